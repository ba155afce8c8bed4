use std::fmt;

use crate::query::ast::write_literal;
use crate::query::Expression;
use crate::value::KgtkValue;

use super::{LogicalPlan, ScanNode};

/// Prints an expression with column names as-is, for plan listings.
pub struct Raw<'a>(pub &'a Expression);

impl fmt::Display for Raw<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Expression::Variable(v) => f.write_str(v),
            Expression::Literal(l) => write_literal(f, l),
            Expression::Compare(op, a, b) => write!(f, "({} {} {})", Raw(a), op.symbol(), Raw(b)),
            Expression::And(a, b) => write!(f, "({} and {})", Raw(a), Raw(b)),
            Expression::Or(a, b) => write!(f, "({} or {})", Raw(a), Raw(b)),
            Expression::Not(a) => write!(f, "(not {})", Raw(a)),
            Expression::Cast(a, t) => write!(f, "cast({}, {})", Raw(a), t.name()),
            Expression::Count { distinct, arg } => {
                write!(f, "count({}{})", if *distinct { "distinct " } else { "" }, Raw(arg))
            }
        }
    }
}

fn write_scan(f: &mut fmt::Formatter<'_>, s: &ScanNode) -> fmt::Result {
    write!(f, "Scan s{} {}", s.scan, s.graph)?;
    if !s.constraints.is_empty() {
        f.write_str(" [")?;
        for (i, (role, value)) in s.constraints.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{role}=")?;
            match value {
                KgtkValue::Empty => f.write_str("\"\"")?,
                v => write!(f, "{v}")?,
            }
        }
        f.write_str("]")?;
    }
    let cols: Vec<String> = s.columns.iter().map(|r| s.field(*r).name()).collect();
    write!(f, " -> ({})", cols.join(", "))
}

fn write_pairs(f: &mut fmt::Formatter<'_>, on: &[(super::Field, super::Field)]) -> fmt::Result {
    for (i, (a, b)) in on.iter().enumerate() {
        f.write_str(if i == 0 { " on " } else { " and " })?;
        write!(f, "{a} = {b}")?;
    }
    Ok(())
}

fn write_items(f: &mut fmt::Formatter<'_>, items: &[(String, Expression)]) -> fmt::Result {
    for (i, (alias, e)) in items.iter().enumerate() {
        f.write_str(if i == 0 { " " } else { ", " })?;
        write!(f, "{} as {alias}", Raw(e))?;
    }
    Ok(())
}

impl LogicalPlan {
    fn write_line(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicalPlan::Scan(s) => write_scan(f, s),
            LogicalPlan::Filter { predicate, .. } => write!(f, "Filter {}", Raw(predicate)),
            LogicalPlan::Join { on, .. } if on.is_empty() => f.write_str("CrossJoin"),
            LogicalPlan::Join { on, .. } => {
                f.write_str("Join")?;
                write_pairs(f, on)
            }
            LogicalPlan::LeftOuterJoin { on, .. } => {
                f.write_str("LeftOuterJoin")?;
                write_pairs(f, on)
            }
            LogicalPlan::Project { items, .. } => {
                f.write_str("Project")?;
                write_items(f, items)
            }
            LogicalPlan::Aggregate { items, .. } => {
                let keys: Vec<_> = items.iter().filter(|(_, e)| !e.contains_count()).cloned().collect();
                let aggs: Vec<_> = items.iter().filter(|(_, e)| e.contains_count()).cloned().collect();
                f.write_str("Aggregate group")?;
                if keys.is_empty() {
                    f.write_str(" ()")?;
                }
                write_items(f, &keys)?;
                f.write_str(" compute")?;
                write_items(f, &aggs)
            }
            LogicalPlan::Distinct { .. } => f.write_str("Distinct"),
            LogicalPlan::Sort { keys, .. } => {
                f.write_str("Sort")?;
                for (i, (e, desc)) in keys.iter().enumerate() {
                    f.write_str(if i == 0 { " " } else { ", " })?;
                    write!(f, "{}{}", Raw(e), if *desc { " desc" } else { "" })?;
                }
                Ok(())
            }
            LogicalPlan::Limit { count, .. } => write!(f, "Limit {count}"),
        }
    }

    fn write_tree(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        write!(f, "{:width$}", "", width = depth * 2)?;
        self.write_line(f)?;
        writeln!(f)?;
        for child in self.children() {
            child.write_tree(f, depth + 1)?;
        }
        Ok(())
    }
}

/// One operator per line, children indented by two spaces.
impl fmt::Display for LogicalPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_tree(f, 0)
    }
}
