//! Query syntax tree. The `Display` impls print text that parses back to the
//! same tree.

use std::fmt;

use crate::value::KgtkValue;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NodePattern {
    pub variable: Option<String>,
    pub anchor: Option<KgtkValue>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `-[...]->`
    Forward,
    /// `<-[...]-`
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelPattern {
    pub variable: Option<String>,
    pub label: Option<KgtkValue>,
    pub direction: Direction,
}

/// One `graph: (a)-[..]->(b)...` chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternClause {
    pub graph: Option<String>,
    pub start: NodePattern,
    pub steps: Vec<(RelPattern, NodePattern)>,
}

impl PatternClause {
    pub fn nodes(&self) -> impl Iterator<Item = &NodePattern> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|(_, n)| n))
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut vars: Vec<&str> = self.nodes().filter_map(|n| n.variable.as_deref()).collect();
        vars.extend(self.steps.iter().filter_map(|(r, _)| r.variable.as_deref()));
        vars
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CastType {
    Integer,
    Float,
    String,
}

impl CastType {
    pub fn name(self) -> &'static str {
        match self {
            CastType::Integer => "integer",
            CastType::Float => "float",
            CastType::String => "string",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expression {
    Variable(String),
    Literal(KgtkValue),
    Compare(CompareOp, Box<Expression>, Box<Expression>),
    And(Box<Expression>, Box<Expression>),
    Or(Box<Expression>, Box<Expression>),
    Not(Box<Expression>),
    Cast(Box<Expression>, CastType),
    Count { distinct: bool, arg: Box<Expression> },
}

impl Expression {
    pub fn var(name: impl Into<String>) -> Self {
        Expression::Variable(name.into())
    }

    pub fn compare(op: CompareOp, left: Expression, right: Expression) -> Self {
        Expression::Compare(op, Box::new(left), Box::new(right))
    }

    pub fn contains_count(&self) -> bool {
        match self {
            Expression::Count { .. } => true,
            Expression::Variable(_) | Expression::Literal(_) => false,
            Expression::Compare(_, a, b) | Expression::And(a, b) | Expression::Or(a, b) => {
                a.contains_count() || b.contains_count()
            }
            Expression::Not(a) | Expression::Cast(a, _) => a.contains_count(),
        }
    }

    /// Variable names in first-occurrence order, without duplicates.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expression::Variable(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Expression::Literal(_) => {}
            Expression::Compare(_, a, b) | Expression::And(a, b) | Expression::Or(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            Expression::Not(a) | Expression::Cast(a, _) | Expression::Count { arg: a, .. } => a.collect_variables(out),
        }
    }

    /// Splits nested top-level `and`s into their conjuncts.
    pub fn conjuncts(&self) -> Vec<&Expression> {
        match self {
            Expression::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            other => vec![other],
        }
    }

    /// Rewrites every variable reference through `f`.
    pub fn map_variables(&self, f: &mut dyn FnMut(&str) -> Expression) -> Expression {
        match self {
            Expression::Variable(v) => f(v),
            Expression::Literal(l) => Expression::Literal(l.clone()),
            Expression::Compare(op, a, b) => {
                Expression::Compare(*op, Box::new(a.map_variables(f)), Box::new(b.map_variables(f)))
            }
            Expression::And(a, b) => Expression::And(Box::new(a.map_variables(f)), Box::new(b.map_variables(f))),
            Expression::Or(a, b) => Expression::Or(Box::new(a.map_variables(f)), Box::new(b.map_variables(f))),
            Expression::Not(a) => Expression::Not(Box::new(a.map_variables(f))),
            Expression::Cast(a, t) => Expression::Cast(Box::new(a.map_variables(f)), *t),
            Expression::Count { distinct, arg } => Expression::Count {
                distinct: *distinct,
                arg: Box::new(arg.map_variables(f)),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReturnItem {
    pub expr: Expression,
    pub alias: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReturnList {
    pub distinct: bool,
    pub items: Vec<ReturnItem>,
}

impl ReturnList {
    pub fn aliases(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.alias.as_str())
    }

    pub fn has_aggregate(&self) -> bool {
        self.items.iter().any(|i| i.expr.contains_count())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderKey {
    pub expr: Expression,
    pub descending: bool,
}

/// One `-i path [--as alias]` input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputSpec {
    pub path: String,
    pub alias: Option<String>,
}

impl InputSpec {
    pub fn new(path: impl Into<String>, alias: Option<&str>) -> Self {
        InputSpec {
            path: path.into(),
            alias: alias.map(str::to_string),
        }
    }

    /// The graph name this input is known by in patterns.
    pub fn graph_name(&self) -> String {
        match &self.alias {
            Some(a) => a.clone(),
            None => crate::cache::graph_name_from_path(std::path::Path::new(&self.path)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySpec {
    pub inputs: Vec<InputSpec>,
    pub match_clauses: Vec<PatternClause>,
    pub optional_clauses: Vec<Vec<PatternClause>>,
    pub where_clause: Option<Expression>,
    pub returns: ReturnList,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<u64>,
}

impl QuerySpec {
    /// Every variable bound by a mandatory or optional pattern.
    pub fn pattern_variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let clauses = self.match_clauses.iter().chain(self.optional_clauses.iter().flatten());
        for clause in clauses {
            for v in clause.variables() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }
}

const KEYWORDS: &[&str] = &[
    "distinct", "as", "desc", "asc", "descending", "ascending", "count", "cast", "and", "or", "not",
];

pub(crate) fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(word))
}

fn is_plain_name(name: &str, allow_semicolon: bool) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || (allow_semicolon && c == ';'))
}

/// Writes a name bare when it lexes as an identifier, else backquoted.
pub(crate) fn write_name(f: &mut fmt::Formatter<'_>, name: &str, allow_semicolon: bool) -> fmt::Result {
    if is_plain_name(name, allow_semicolon) && !is_keyword(name) {
        f.write_str(name)
    } else {
        write!(f, "`{}`", name.replace('`', "``"))
    }
}

/// Writes a value as a query literal that parses back to the same value.
pub(crate) fn write_literal(f: &mut fmt::Formatter<'_>, value: &KgtkValue) -> fmt::Result {
    match value {
        KgtkValue::Number(n) => write!(f, "{n}"),
        KgtkValue::LangString { .. } => write!(f, "{value}"),
        other => {
            // Raw cell text inside double quotes.
            f.write_str("\"")?;
            for c in other.to_string().chars() {
                match c {
                    '"' | '\\' => write!(f, "\\{c}")?,
                    c => write!(f, "{c}")?,
                }
            }
            f.write_str("\"")
        }
    }
}

fn write_anchor(f: &mut fmt::Formatter<'_>, value: &KgtkValue) -> fmt::Result {
    match value {
        KgtkValue::Symbol(s) => write_name(f, s, false),
        other => write_literal(f, other),
    }
}

impl fmt::Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        if let Some(v) = &self.variable {
            write_name(f, v, false)?;
        }
        if let Some(a) = &self.anchor {
            f.write_str(":")?;
            write_anchor(f, a)?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for RelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.direction == Direction::Backward { "<-[" } else { "-[" })?;
        if let Some(v) = &self.variable {
            write_name(f, v, false)?;
        }
        if let Some(l) = &self.label {
            f.write_str(":")?;
            write_anchor(f, l)?;
        }
        f.write_str(if self.direction == Direction::Backward { "]-" } else { "]->" })
    }
}

impl fmt::Display for PatternClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(g) = &self.graph {
            write_name(f, g, false)?;
            f.write_str(": ")?;
        }
        write!(f, "{}", self.start)?;
        for (rel, node) in &self.steps {
            write!(f, "{rel}{node}")?;
        }
        Ok(())
    }
}

/// Comma-separated clause list.
pub struct Clauses<'a>(pub &'a [PatternClause]);

impl fmt::Display for Clauses<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Fully parenthesized compound expressions keep the printer simple.
        match self {
            Expression::Variable(v) => write_name(f, v, false),
            Expression::Literal(l) => write_literal(f, l),
            Expression::Compare(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expression::And(a, b) => write!(f, "({a} and {b})"),
            Expression::Or(a, b) => write!(f, "({a} or {b})"),
            Expression::Not(a) => write!(f, "(not {a})"),
            Expression::Cast(a, t) => write!(f, "cast({a}, {})", t.name()),
            Expression::Count { distinct, arg } => {
                write!(f, "count({}{arg})", if *distinct { "distinct " } else { "" })
            }
        }
    }
}

impl fmt::Display for ReturnList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.distinct {
            f.write_str("distinct ")?;
        }
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} as ", item.expr)?;
            write_name(f, &item.alias, true)?;
        }
        Ok(())
    }
}

impl fmt::Display for OrderKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.expr, if self.descending { " desc" } else { "" })
    }
}

/// Comma-separated order-by list.
pub struct OrderKeys<'a>(pub &'a [OrderKey]);

impl fmt::Display for OrderKeys<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}
