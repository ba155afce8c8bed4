//! Query language front end: lexer, parser and syntax tree.

pub mod ast;
pub mod lexer;
mod parser;

pub use ast::*;
pub use parser::{
    assemble_query, check_query, parse_expression, parse_match, parse_order_by, parse_return, parse_where, QueryText,
};

#[cfg(test)]
mod roundtrip {
    use proptest::prelude::*;

    use super::lexer::tokenize;
    use super::*;
    use crate::value::tests::arb_value;
    use crate::value::KgtkValue;

    fn arb_name() -> impl Strategy<Value = String> {
        prop_oneof![
            8 => "[a-z_][a-z0-9_]{0,5}",
            1 => Just("count".to_string()),
            1 => "[a-z]{1,3}[:. `-][a-z]{0,3}",
        ]
    }

    fn arb_anchor() -> impl Strategy<Value = KgtkValue> {
        arb_value().prop_filter("anchors are never empty", |v| !v.is_empty())
    }

    fn arb_node() -> impl Strategy<Value = NodePattern> {
        (proptest::option::of(arb_name()), proptest::option::of(arb_anchor()))
            .prop_map(|(variable, anchor)| NodePattern { variable, anchor })
    }

    fn arb_rel() -> impl Strategy<Value = RelPattern> {
        (proptest::option::of(arb_name()), proptest::option::of(arb_anchor()), any::<bool>()).prop_map(
            |(variable, label, fwd)| RelPattern {
                variable,
                label,
                direction: if fwd { Direction::Forward } else { Direction::Backward },
            },
        )
    }

    fn arb_clauses() -> impl Strategy<Value = Vec<PatternClause>> {
        let clause = (
            proptest::option::of(arb_name()),
            arb_node(),
            proptest::collection::vec((arb_rel(), arb_node()), 0..3),
        )
            .prop_map(|(graph, start, steps)| PatternClause { graph, start, steps });
        proptest::collection::vec(clause, 1..4).prop_map(|mut cs| {
            // Printing drops inherited prefixes, so only generate trees the
            // parser can produce.
            let mut graph = None;
            for c in &mut cs {
                match &c.graph {
                    Some(g) => graph = Some(g.clone()),
                    None => c.graph = graph.clone(),
                }
            }
            cs
        })
    }

    fn arb_expr() -> impl Strategy<Value = Expression> {
        let leaf = prop_oneof![
            arb_name().prop_map(Expression::Variable),
            arb_value().prop_map(Expression::Literal),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            let op = prop_oneof![
                Just(CompareOp::Lt),
                Just(CompareOp::Le),
                Just(CompareOp::Gt),
                Just(CompareOp::Ge),
                Just(CompareOp::Eq),
                Just(CompareOp::Ne),
            ];
            let ty = prop_oneof![Just(CastType::Integer), Just(CastType::Float), Just(CastType::String)];
            prop_oneof![
                (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expression::compare(o, a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::Or(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Expression::Not(Box::new(a))),
                (inner, ty).prop_map(|(a, t)| Expression::Cast(Box::new(a), t)),
            ]
        })
    }

    fn arb_item_expr() -> impl Strategy<Value = Expression> {
        prop_oneof![
            3 => arb_expr(),
            1 => (any::<bool>(), arb_expr()).prop_map(|(distinct, a)| Expression::Count { distinct, arg: Box::new(a) }),
        ]
    }

    fn arb_returns() -> impl Strategy<Value = ReturnList> {
        (
            any::<bool>(),
            proptest::collection::vec((arb_item_expr(), "[a-z][a-z0-9;]{0,6}|[a-z ]{1,5}"), 1..4),
        )
            .prop_map(|(distinct, items)| {
                let mut out: Vec<ReturnItem> = Vec::new();
                for (i, (expr, alias)) in items.into_iter().enumerate() {
                    out.push(ReturnItem {
                        expr,
                        alias: format!("{alias}{i}"),
                    });
                }
                ReturnList { distinct, items: out }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn match_print_parse(clauses in arb_clauses()) {
            let text = Clauses(&clauses).to_string();
            prop_assert_eq!(parse_match(&text).unwrap(), clauses);
        }

        #[test]
        fn expression_print_parse(e in arb_expr()) {
            prop_assert_eq!(parse_expression(&e.to_string()).unwrap(), e);
        }

        #[test]
        fn return_print_parse(r in arb_returns()) {
            prop_assert_eq!(parse_return(&r.to_string()).unwrap(), r);
        }

        #[test]
        fn order_print_parse(keys in proptest::collection::vec((arb_item_expr(), any::<bool>()), 1..4)) {
            let keys: Vec<OrderKey> = keys.into_iter().map(|(expr, descending)| OrderKey { expr, descending }).collect();
            prop_assert_eq!(parse_order_by(&OrderKeys(&keys).to_string()).unwrap(), keys);
        }

        #[test]
        fn comments_do_not_change_tokens(
            clauses in arb_clauses(),
            comments in proptest::collection::vec(proptest::option::of("[ -~]{0,20}"), 4),
        ) {
            let lines: Vec<String> = clauses.iter().map(|c| c.to_string()).collect();
            let plain = lines.join(",\n");
            let mut commented = String::new();
            for (i, line) in lines.iter().enumerate() {
                commented.push_str(line);
                if i + 1 < lines.len() {
                    commented.push(',');
                }
                if let Some(Some(c)) = comments.get(i) {
                    commented.push_str(" #");
                    commented.push_str(c);
                }
                commented.push('\n');
            }
            let strip = |t: &str| tokenize(t).unwrap().into_iter().map(|s| s.token).collect::<Vec<_>>();
            prop_assert_eq!(strip(&plain), strip(&commented));
        }
    }
}
