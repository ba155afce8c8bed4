use std::borrow::Cow;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::query::{CastType, CompareOp, Expression};
use crate::value::{compare_values, KgtkValue, Number};

/// An expression with column references resolved to row positions.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Bound {
    Column(usize),
    Literal(KgtkValue),
    Compare(CompareOp, Box<Bound>, Box<Bound>),
    And(Box<Bound>, Box<Bound>),
    Or(Box<Bound>, Box<Bound>),
    Not(Box<Bound>),
    Cast(Box<Bound>, CastType),
    /// Result slot of an aggregate.
    Count(usize),
}

impl Bound {
    /// Binds `expr` against `columns`. Each `count(...)` gets the next slot
    /// and its argument is appended to `counts`.
    pub(crate) fn bind(
        expr: &Expression,
        columns: &[String],
        counts: &mut Vec<(bool, Bound)>,
    ) -> Result<Bound> {
        Ok(match expr {
            Expression::Variable(v) => Bound::Column(
                columns
                    .iter()
                    .position(|c| c == v)
                    .ok_or_else(|| Error::Execution(format!("plan references unknown column {v:?}")))?,
            ),
            Expression::Literal(l) => Bound::Literal(l.clone()),
            Expression::Compare(op, a, b) => Bound::Compare(
                *op,
                Box::new(Self::bind(a, columns, counts)?),
                Box::new(Self::bind(b, columns, counts)?),
            ),
            Expression::And(a, b) => Bound::And(
                Box::new(Self::bind(a, columns, counts)?),
                Box::new(Self::bind(b, columns, counts)?),
            ),
            Expression::Or(a, b) => Bound::Or(
                Box::new(Self::bind(a, columns, counts)?),
                Box::new(Self::bind(b, columns, counts)?),
            ),
            Expression::Not(a) => Bound::Not(Box::new(Self::bind(a, columns, counts)?)),
            Expression::Cast(a, t) => Bound::Cast(Box::new(Self::bind(a, columns, counts)?), *t),
            Expression::Count { distinct, arg } => {
                let arg = Self::bind(arg, columns, &mut Vec::new())?;
                counts.push((*distinct, arg));
                Bound::Count(counts.len() - 1)
            }
        })
    }

    pub(crate) fn eval<'a>(&'a self, row: &'a [KgtkValue], counts: &[u64]) -> Cow<'a, KgtkValue> {
        match self {
            Bound::Column(i) => Cow::Borrowed(&row[*i]),
            Bound::Literal(l) => Cow::Borrowed(l),
            Bound::Compare(op, a, b) => {
                let (a, b) = (a.eval(row, counts), b.eval(row, counts));
                Cow::Owned(boolean(compare(*op, &a, &b)))
            }
            Bound::And(a, b) => Cow::Owned(boolean(a.truthy(row, counts) && b.truthy(row, counts))),
            Bound::Or(a, b) => Cow::Owned(boolean(a.truthy(row, counts) || b.truthy(row, counts))),
            Bound::Not(a) => Cow::Owned(boolean(!a.truthy(row, counts))),
            Bound::Cast(a, t) => Cow::Owned(cast(&a.eval(row, counts), *t)),
            Bound::Count(slot) => Cow::Owned(KgtkValue::int(counts.get(*slot).copied().unwrap_or(0) as i64)),
        }
    }

    pub(crate) fn truthy(&self, row: &[KgtkValue], counts: &[u64]) -> bool {
        is_true(&self.eval(row, counts))
    }
}

fn boolean(b: bool) -> KgtkValue {
    KgtkValue::int(b as i64)
}

/// Only non-zero numbers are true.
pub fn is_true(v: &KgtkValue) -> bool {
    matches!(v, KgtkValue::Number(n) if !n.is_zero())
}

/// Comparison where any `Empty` operand makes the result false.
pub fn compare(op: CompareOp, a: &KgtkValue, b: &KgtkValue) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    let ord = compare_values(a, b);
    match op {
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Le => ord != Ordering::Greater,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Ge => ord != Ordering::Less,
        CompareOp::Eq => ord == Ordering::Equal,
        CompareOp::Ne => ord != Ordering::Equal,
    }
}

fn text_content(v: &KgtkValue) -> Option<Cow<'_, str>> {
    match v {
        KgtkValue::Symbol(s) | KgtkValue::String(s) => Some(Cow::Borrowed(s)),
        KgtkValue::LangString { text, .. } => Some(Cow::Borrowed(text)),
        KgtkValue::Number(n) => Some(Cow::Owned(n.to_string())),
        KgtkValue::Empty => None,
    }
}

/// `cast(v, type)`; anything that does not convert becomes `Empty`.
pub fn cast(v: &KgtkValue, ty: CastType) -> KgtkValue {
    let number = || match v {
        KgtkValue::Number(n) => Some(*n),
        other => text_content(other).and_then(|t| Number::parse(t.trim())),
    };
    match ty {
        CastType::Integer => number()
            .and_then(|n| n.truncate())
            .map_or(KgtkValue::Empty, KgtkValue::int),
        CastType::Float => number()
            .and_then(|n| Number::from_f64(n.as_f64()))
            .map_or(KgtkValue::Empty, KgtkValue::Number),
        CastType::String => text_content(v).map_or(KgtkValue::Empty, |t| KgtkValue::string(t.into_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::parse_value;

    fn p(s: &str) -> KgtkValue {
        parse_value(s).unwrap()
    }

    #[test]
    fn comparisons() {
        assert!(compare(CompareOp::Gt, &p("Q9"), &p("Q5")));
        assert!(!compare(CompareOp::Gt, &p("Q5"), &p("Q9")));
        assert!(!compare(CompareOp::Eq, &KgtkValue::Empty, &KgtkValue::Empty));
        assert!(!compare(CompareOp::Ne, &KgtkValue::Empty, &p("a")));
        assert!(compare(CompareOp::Eq, &p("5"), &p("5.0")));
    }

    #[test]
    fn casts() {
        assert_eq!(cast(&p("\"314889\""), CastType::Integer), KgtkValue::int(314889));
        assert_eq!(cast(&p("'film'@en"), CastType::Integer), KgtkValue::Empty);
        assert_eq!(cast(&p("3.9"), CastType::Integer), KgtkValue::int(3));
        assert_eq!(cast(&p("-3.9"), CastType::Integer), KgtkValue::int(-3));
        assert_eq!(cast(&p("\"2.5\""), CastType::Float), p("2.5"));
        assert_eq!(cast(&p("Q5"), CastType::String), KgtkValue::string("Q5"));
        assert_eq!(cast(&p("12"), CastType::String), KgtkValue::string("12"));
        assert_eq!(cast(&KgtkValue::Empty, CastType::String), KgtkValue::Empty);
    }

    #[test]
    fn connectives_treat_non_numbers_as_false() {
        let row = [p("a"), p("1"), KgtkValue::Empty];
        let col = |i| Box::new(Bound::Column(i));
        assert!(!Bound::And(col(0), col(1)).truthy(&row, &[]));
        assert!(Bound::Or(col(0), col(1)).truthy(&row, &[]));
        assert!(Bound::Not(col(2)).truthy(&row, &[]));
    }
}
