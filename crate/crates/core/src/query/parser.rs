use crate::error::{Error, Result};
use crate::value::{parse_value, KgtkValue, Number};

use super::ast::*;
use super::lexer::{tokenize, Spanned, Token};

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|s| &s.token)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Token> {
        self.toks.get(self.pos + ahead).map(|s| &s.token)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |s| s.offset)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).map(|s| s.token.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Token, what: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> Error {
        match self.peek() {
            None => Error::syntax(self.end, format!("expected {what}, found end of input")),
            Some(t) => Error::syntax(self.offset(), format!("expected {what}, found {}", describe(t))),
        }
    }

    fn peek_word(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token::Ident(w)) if w.eq_ignore_ascii_case(word))
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.peek_word(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn name(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Token::Ident(s)) | Some(Token::Quoted(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    // ---- patterns ----

    fn clauses(&mut self) -> Result<Vec<PatternClause>> {
        let mut out = Vec::new();
        let mut graph: Option<String> = None;
        loop {
            let mut clause = self.clause()?;
            match &clause.graph {
                Some(g) => graph = Some(g.clone()),
                None => clause.graph = graph.clone(),
            }
            out.push(clause);
            if !self.eat(&Token::Comma) {
                break;
            }
        }
        self.finish()?;
        Ok(out)
    }

    fn clause(&mut self) -> Result<PatternClause> {
        let graph = match (self.peek(), self.peek_at(1)) {
            (Some(Token::Ident(_) | Token::Quoted(_)), Some(Token::Colon)) => {
                let g = self.name("graph name")?;
                self.pos += 1;
                Some(g)
            }
            _ => None,
        };
        let start = self.node()?;
        let mut steps = Vec::new();
        while matches!(self.peek(), Some(Token::Dash | Token::LeftArrow)) {
            let rel = self.relation()?;
            let node = self.node()?;
            steps.push((rel, node));
        }
        Ok(PatternClause { graph, start, steps })
    }

    fn node(&mut self) -> Result<NodePattern> {
        self.expect(&Token::LParen, "'('")?;
        let (variable, anchor) = self.element_body("node anchor")?;
        self.expect(&Token::RParen, "')'")?;
        Ok(NodePattern { variable, anchor })
    }

    fn relation(&mut self) -> Result<RelPattern> {
        let backward = match self.next() {
            Some(Token::LeftArrow) => true,
            Some(Token::Dash) => false,
            _ => unreachable!("caller checked for a relation start"),
        };
        self.expect(&Token::LBracket, "'['")?;
        let (variable, label) = self.element_body("relation label")?;
        self.expect(&Token::RBracket, "']'")?;
        if backward {
            self.expect(&Token::Dash, "'-' closing a backward relation")?;
        } else {
            self.expect(&Token::Arrow, "'->'")?;
        }
        Ok(RelPattern {
            variable,
            label,
            direction: if backward { Direction::Backward } else { Direction::Forward },
        })
    }

    fn element_body(&mut self, what: &str) -> Result<(Option<String>, Option<KgtkValue>)> {
        let variable = match self.peek() {
            Some(Token::Ident(_) | Token::Quoted(_)) => Some(self.name("variable")?),
            _ => None,
        };
        let anchor = if self.eat(&Token::Colon) { Some(self.anchor(what)?) } else { None };
        Ok((variable, anchor))
    }

    fn anchor(&mut self, what: &str) -> Result<KgtkValue> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Token::Ident(s) | Token::Quoted(s)) => {
                self.pos += 1;
                cell(&s, offset)
            }
            Some(Token::Str { .. } | Token::Number(_) | Token::Dash) => self.literal(),
            _ => Err(self.unexpected(what)),
        }
    }

    // ---- expressions ----

    fn expression(&mut self) -> Result<Expression> {
        let mut left = self.and_expr()?;
        while self.eat_word("or") {
            let right = self.and_expr()?;
            left = Expression::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expression> {
        let mut left = self.comparison()?;
        while self.eat_word("and") {
            let right = self.comparison()?;
            left = Expression::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn comparison(&mut self) -> Result<Expression> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Lt) => CompareOp::Lt,
                Some(Token::Le) => CompareOp::Le,
                Some(Token::Gt) => CompareOp::Gt,
                Some(Token::Ge) => CompareOp::Ge,
                Some(Token::Eq) => CompareOp::Eq,
                Some(Token::Ne) => CompareOp::Ne,
                // `a<-5` lexes as an arrow; read it as `a < -5`.
                Some(Token::LeftArrow) if matches!(self.peek_at(1), Some(Token::Number(_))) => {
                    self.toks[self.pos].token = Token::Dash;
                    let right = self.unary()?;
                    left = Expression::compare(CompareOp::Lt, left, right);
                    continue;
                }
                _ => return Ok(left),
            };
            self.pos += 1;
            let right = self.unary()?;
            left = Expression::compare(op, left, right);
        }
    }

    fn unary(&mut self) -> Result<Expression> {
        if self.eat_word("not") {
            return Ok(Expression::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expression> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Token::LParen) => {
                self.pos += 1;
                let e = self.expression()?;
                self.expect(&Token::RParen, "')'")?;
                Ok(e)
            }
            Some(Token::Str { .. } | Token::Number(_) | Token::Dash) => Ok(Expression::Literal(self.literal()?)),
            Some(Token::Quoted(name)) => {
                self.pos += 1;
                Ok(Expression::Variable(name))
            }
            Some(Token::Ident(word)) => {
                let call = self.peek_at(1) == Some(&Token::LParen);
                if call && word.eq_ignore_ascii_case("count") {
                    self.pos += 2;
                    let distinct = self.eat_word("distinct");
                    let arg = self.expression()?;
                    self.expect(&Token::RParen, "')'")?;
                    return Ok(Expression::Count {
                        distinct,
                        arg: Box::new(arg),
                    });
                }
                if call && word.eq_ignore_ascii_case("cast") {
                    self.pos += 2;
                    let arg = self.expression()?;
                    self.expect(&Token::Comma, "','")?;
                    let type_offset = self.offset();
                    let ty = self.name("type name")?;
                    let ty = match ty.to_ascii_lowercase().as_str() {
                        "integer" | "int" => CastType::Integer,
                        "float" | "real" => CastType::Float,
                        "string" | "text" => CastType::String,
                        _ => return Err(Error::syntax(type_offset, format!("unknown cast type {ty:?}"))),
                    };
                    self.expect(&Token::RParen, "')'")?;
                    return Ok(Expression::Cast(Box::new(arg), ty));
                }
                if is_keyword(&word) && !matches!(word.to_ascii_lowercase().as_str(), "count" | "cast") {
                    return Err(Error::syntax(offset, format!("keyword {word:?} cannot be used as a variable")));
                }
                self.pos += 1;
                Ok(Expression::Variable(word))
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn literal(&mut self) -> Result<KgtkValue> {
        let offset = self.offset();
        match self.next() {
            Some(Token::Str { text, lang: Some(lang) }) => Ok(KgtkValue::lang_string(text, lang)),
            Some(Token::Str { text, lang: None }) => cell(&text, offset),
            Some(Token::Number(n)) => number(&n, offset),
            Some(Token::Dash) => match self.next() {
                Some(Token::Number(n)) => number(&format!("-{n}"), offset),
                _ => Err(Error::syntax(offset, "'-' must be followed by a number")),
            },
            _ => Err(Error::syntax(offset, "expected literal")),
        }
    }

    // ---- return / order-by ----

    fn return_list(&mut self) -> Result<ReturnList> {
        let distinct = self.eat_word("distinct");
        if self.at_end() {
            return Err(Error::syntax(self.end, "empty return list"));
        }
        let mut items: Vec<ReturnItem> = Vec::new();
        loop {
            let expr = self.expression()?;
            let alias = if self.eat_word("as") {
                self.name("alias")?
            } else {
                match &expr {
                    Expression::Variable(v) => v.clone(),
                    other => other.to_string(),
                }
            };
            if items.iter().any(|i| i.alias == alias) {
                return Err(Error::semantic(format!("duplicate return alias {alias:?}")));
            }
            items.push(ReturnItem { expr, alias });
            if !self.eat(&Token::Comma) {
                break;
            }
        }
        self.finish()?;
        Ok(ReturnList { distinct, items })
    }

    fn order_keys(&mut self) -> Result<Vec<OrderKey>> {
        let mut keys = Vec::new();
        loop {
            let expr = self.expression()?;
            let descending = if self.eat_word("desc") || self.eat_word("descending") {
                true
            } else {
                let _ = self.eat_word("asc") || self.eat_word("ascending");
                false
            };
            keys.push(OrderKey { expr, descending });
            if !self.eat(&Token::Comma) {
                break;
            }
        }
        self.finish()?;
        Ok(keys)
    }
}

fn describe(t: &Token) -> String {
    match t {
        Token::Ident(s) => format!("{s:?}"),
        Token::Quoted(s) => format!("`{s}`"),
        Token::Str { text, .. } => format!("string {text:?}"),
        Token::Number(n) => format!("number {n}"),
        Token::LParen => "'('".into(),
        Token::RParen => "')'".into(),
        Token::LBracket => "'['".into(),
        Token::RBracket => "']'".into(),
        Token::Colon => "':'".into(),
        Token::Comma => "','".into(),
        Token::Dash => "'-'".into(),
        Token::Arrow => "'->'".into(),
        Token::LeftArrow => "'<-'".into(),
        Token::Lt => "'<'".into(),
        Token::Le => "'<='".into(),
        Token::Gt => "'>'".into(),
        Token::Ge => "'>='".into(),
        Token::Eq => "'='".into(),
        Token::Ne => "'!='".into(),
    }
}

fn cell(text: &str, offset: usize) -> Result<KgtkValue> {
    parse_value(text).map_err(|e| Error::syntax(offset, e.to_string()))
}

fn number(text: &str, offset: usize) -> Result<KgtkValue> {
    Number::parse(text)
        .map(KgtkValue::Number)
        .ok_or_else(|| Error::syntax(offset, format!("number {text} is out of range")))
}

fn check_no_count(expr: &Expression, context: &str) -> Result<()> {
    if expr.contains_count() {
        Err(Error::semantic(format!("count is not allowed in {context}")))
    } else {
        Ok(())
    }
}

fn check_count_nesting(expr: &Expression) -> Result<()> {
    match expr {
        Expression::Count { arg, .. } => check_no_count(arg, "the argument of count"),
        Expression::Variable(_) | Expression::Literal(_) => Ok(()),
        Expression::Compare(_, a, b) | Expression::And(a, b) | Expression::Or(a, b) => {
            check_count_nesting(a)?;
            check_count_nesting(b)
        }
        Expression::Not(a) | Expression::Cast(a, _) => check_count_nesting(a),
    }
}

/// Parses a comma-separated list of pattern clauses. An unprefixed clause
/// takes the graph of the clause before it; a leading unprefixed clause is
/// left without a graph for [`assemble_query`] to fill in.
pub fn parse_match(text: &str) -> Result<Vec<PatternClause>> {
    let mut p = Parser::new(text)?;
    if p.at_end() {
        return Err(Error::syntax(0, "empty match clause"));
    }
    p.clauses()
}

/// Parses a general expression; `count` is accepted here and rejected by
/// the contexts that forbid it.
pub fn parse_expression(text: &str) -> Result<Expression> {
    let mut p = Parser::new(text)?;
    let e = p.expression()?;
    p.finish()?;
    check_count_nesting(&e)?;
    Ok(e)
}

/// Parses a `--where` condition.
pub fn parse_where(text: &str) -> Result<Expression> {
    let e = parse_expression(text)?;
    check_no_count(&e, "a where clause")?;
    Ok(e)
}

pub fn parse_return(text: &str) -> Result<ReturnList> {
    let list = Parser::new(text)?.return_list()?;
    for item in &list.items {
        check_count_nesting(&item.expr)?;
    }
    Ok(list)
}

pub fn parse_order_by(text: &str) -> Result<Vec<OrderKey>> {
    let keys = Parser::new(text)?.order_keys()?;
    for k in &keys {
        check_count_nesting(&k.expr)?;
    }
    Ok(keys)
}

/// Raw query text as given on the command line.
#[derive(Clone, Debug, Default)]
pub struct QueryText<'a> {
    pub match_text: &'a str,
    pub optional: Vec<&'a str>,
    pub where_text: Option<&'a str>,
    pub return_text: Option<&'a str>,
    pub order_text: Option<&'a str>,
    pub limit: Option<u64>,
}

/// Parses every component, fills in default graphs and checks that every
/// referenced variable is bound. Without a return clause every pattern
/// variable is returned under its own name.
pub fn assemble_query(inputs: Vec<InputSpec>, text: &QueryText<'_>) -> Result<QuerySpec> {
    let default_graph = inputs.first().map(InputSpec::graph_name);
    let fill = |mut clauses: Vec<PatternClause>| {
        for c in &mut clauses {
            if c.graph.is_none() {
                c.graph = default_graph.clone();
            }
        }
        clauses
    };
    let match_clauses = fill(parse_match(text.match_text)?);
    let optional_clauses = text
        .optional
        .iter()
        .map(|t| parse_match(t).map(fill))
        .collect::<Result<Vec<_>>>()?;
    let where_clause = text.where_text.map(parse_where).transpose()?;
    let order_by = text.order_text.map(parse_order_by).transpose()?.unwrap_or_default();

    let mut spec = QuerySpec {
        inputs,
        match_clauses,
        optional_clauses,
        where_clause,
        returns: ReturnList {
            distinct: false,
            items: Vec::new(),
        },
        order_by,
        limit: text.limit,
    };
    spec.returns = match text.return_text {
        Some(t) => parse_return(t)?,
        None => {
            let items: Vec<ReturnItem> = spec
                .pattern_variables()
                .into_iter()
                .map(|v| ReturnItem {
                    expr: Expression::var(v),
                    alias: v.to_string(),
                })
                .collect();
            if items.is_empty() {
                return Err(Error::semantic("query binds no variables; give an explicit return list"));
            }
            ReturnList { distinct: false, items }
        }
    };
    check_query(&spec)?;
    Ok(spec)
}

/// Graph and variable checks shared by [`assemble_query`] and callers that
/// build a [`QuerySpec`] by hand.
pub fn check_query(spec: &QuerySpec) -> Result<()> {
    if !spec.inputs.is_empty() {
        let names: Vec<String> = spec.inputs.iter().map(InputSpec::graph_name).collect();
        for clause in spec.match_clauses.iter().chain(spec.optional_clauses.iter().flatten()) {
            if let Some(g) = &clause.graph {
                if !names.contains(g) {
                    return Err(Error::UnknownGraph {
                        name: g.clone(),
                        available: names,
                    });
                }
            }
        }
    }
    let bound = spec.pattern_variables();
    let check = |expr: &Expression, context: &str, extra: &[&str]| -> Result<()> {
        for v in expr.variables() {
            if !bound.contains(&v) && !extra.contains(&v) {
                return Err(Error::semantic(format!("variable {v:?} in {context} is not bound by any pattern")));
            }
        }
        Ok(())
    };
    if let Some(w) = &spec.where_clause {
        check_no_count(w, "a where clause")?;
        check(w, "where", &[])?;
    }
    if spec.returns.items.is_empty() {
        return Err(Error::semantic("empty return list"));
    }
    for item in &spec.returns.items {
        check(&item.expr, "return", &[])?;
    }
    let aliases: Vec<&str> = spec.returns.aliases().collect();
    for key in &spec.order_by {
        check(&key.expr, "order-by", &aliases)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Expression {
        Expression::var(name)
    }

    #[test]
    fn first_names_match() {
        let text = "\n    p31: (person)-[:P31]->(:Q5), # Q5 is person\n    items: (person)-[:P735]->(given_name), # P735 is first name\n    labels: (given_name)-[:label]->(given_name_label)";
        let clauses = parse_match(text).unwrap();
        assert_eq!(clauses.len(), 3);
        assert_eq!(clauses[0].graph.as_deref(), Some("p31"));
        assert_eq!(clauses[1].graph.as_deref(), Some("items"));
        assert_eq!(clauses[0].start.variable.as_deref(), Some("person"));
        assert_eq!(clauses[1].start.variable.as_deref(), Some("person"));
        assert_eq!(clauses[0].steps[0].1.anchor, Some(KgtkValue::symbol("Q5")));
        assert_eq!(clauses[0].steps[0].0.label, Some(KgtkValue::symbol("P31")));
    }

    #[test]
    fn anonymous_elements_and_backward_chains() {
        let c = parse_match("ulan: (ulan_id)-[]->()").unwrap();
        assert_eq!(c[0].steps[0].0.label, None);
        assert_eq!(c[0].steps[0].1, NodePattern::default());

        let c = parse_match("external_ids: (viaf_id)<-[:P214]-(artist)-[:P245]->(ulan_id)").unwrap();
        assert_eq!(c[0].steps.len(), 2);
        assert_eq!(c[0].steps[0].0.direction, Direction::Backward);
        assert_eq!(c[0].steps[1].0.direction, Direction::Forward);

        let c = parse_match("infobox: (artist)-[:`property:spouse`]->(spouse)").unwrap();
        assert_eq!(c[0].steps[0].0.label, Some(KgtkValue::symbol("property:spouse")));
    }

    #[test]
    fn unprefixed_clauses_inherit() {
        let c = parse_match("(a)-[]->(b), g: (b)-[]->(c), (c)-[]->(d)").unwrap();
        assert_eq!(c[0].graph, None);
        assert_eq!(c[1].graph.as_deref(), Some("g"));
        assert_eq!(c[2].graph.as_deref(), Some("g"));
    }

    #[test]
    fn pattern_errors() {
        for bad in ["(a)-[:P50]->", "(a", "(a)-[:P1](b)", "(a)-[:P1]-(b)", "", "(a) (b)", "(a)<-[]->(b)"] {
            assert!(matches!(parse_match(bad), Err(Error::Syntax { .. })), "{bad:?}");
        }
        match parse_match("(a)-[:P50]->").unwrap_err() {
            Error::Syntax { offset, .. } => assert_eq!(offset, 12),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn expressions() {
        assert_eq!(
            parse_expression("author1 > author2").unwrap(),
            Expression::compare(CompareOp::Gt, v("author1"), v("author2"))
        );
        assert_eq!(
            parse_expression("cast(count, integer)").unwrap(),
            Expression::Cast(Box::new(v("count")), CastType::Integer)
        );
        assert!(matches!(parse_expression("a > (b"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_where("count(a) > 1"), Err(Error::Semantic(_))));
        assert!(matches!(parse_expression("count(count(a))"), Err(Error::Semantic(_))));
    }

    #[test]
    fn precedence() {
        // not binds tighter than comparison, and tighter than or
        let e = parse_expression("not a = b or c < 1 and d").unwrap();
        let expected = Expression::Or(
            Box::new(Expression::compare(CompareOp::Eq, Expression::Not(Box::new(v("a"))), v("b"))),
            Box::new(Expression::And(
                Box::new(Expression::compare(CompareOp::Lt, v("c"), Expression::Literal(KgtkValue::int(1)))),
                Box::new(v("d")),
            )),
        );
        assert_eq!(e, expected);
        assert_eq!(
            parse_expression("a<-5").unwrap(),
            Expression::compare(CompareOp::Lt, v("a"), Expression::Literal(KgtkValue::int(-5)))
        );
        assert_eq!(parse_expression("NOT a").unwrap(), Expression::Not(Box::new(v("a"))));
    }

    #[test]
    fn first_names_return() {
        let r = parse_return(
            "distinct given_name as node1, count(given_name) as node2, \ngiven_name_label as `node1;label`, \"count_names\" as label",
        )
        .unwrap();
        assert!(r.distinct);
        assert_eq!(r.aliases().collect::<Vec<_>>(), ["node1", "node2", "node1;label", "label"]);
        assert_eq!(r.items[3].expr, Expression::Literal(KgtkValue::symbol("count_names")));
        assert!(r.has_aggregate());
    }

    #[test]
    fn return_aliases() {
        let r = parse_return("artist as node1, viaf_id as node1;P214, ulan_id as node1;P245").unwrap();
        assert_eq!(r.items[1].alias, "node1;P214");
        assert!(!r.distinct);
        assert!(matches!(parse_return("x as a, y as a"), Err(Error::Semantic(_))));
        assert!(matches!(parse_return(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse_return("distinct"), Err(Error::Syntax { .. })));
        let r = parse_return("x, cast(y, string)").unwrap();
        assert_eq!(r.items[0].alias, "x");
        assert_eq!(r.items[1].alias, "cast(y, string)");
    }

    #[test]
    fn order_by() {
        let keys = parse_order_by("node2 desc, node1").unwrap();
        assert!(keys[0].descending);
        assert!(!keys[1].descending);
        let keys = parse_order_by("cast(count, integer) desc").unwrap();
        assert_eq!(keys[0].expr, Expression::Cast(Box::new(v("count")), CastType::Integer));
    }

    #[test]
    fn literals() {
        let lit = |t: &str| match parse_expression(t).unwrap() {
            Expression::Literal(l) => l,
            e => panic!("{e:?}"),
        };
        assert_eq!(lit("'John'@en"), KgtkValue::lang_string("John", "en"));
        assert_eq!(lit("\"P26\""), KgtkValue::symbol("P26"));
        assert_eq!(lit("\"\\\"20822441\\\"\""), KgtkValue::string("20822441"));
        assert_eq!(lit("12"), KgtkValue::int(12));
        assert_eq!(lit("-1.5"), KgtkValue::Number(Number::from_f64(-1.5).unwrap()));
        assert_eq!(lit("\"\""), KgtkValue::Empty);
    }

    fn inputs(names: &[&str]) -> Vec<InputSpec> {
        names.iter().map(|n| InputSpec::new(*n, None)).collect()
    }

    #[test]
    fn assemble_checks_bindings() {
        let text = QueryText {
            match_text: "(person)-[:P31]->(:Q5)",
            where_text: Some("personn = \"Q1\""),
            ..Default::default()
        };
        assert!(matches!(assemble_query(inputs(&["p31"]), &text), Err(Error::Semantic(_))));

        let text = QueryText {
            match_text: "(a)-[]->(b)",
            order_text: Some("x desc"),
            return_text: Some("a as x"),
            ..Default::default()
        };
        let q = assemble_query(inputs(&["g"]), &text).unwrap();
        assert_eq!(q.match_clauses[0].graph.as_deref(), Some("g"));

        let text = QueryText {
            match_text: "p13: (a)-[]->(b)",
            ..Default::default()
        };
        match assemble_query(inputs(&["p31", "items", "labels"]), &text).unwrap_err() {
            Error::UnknownGraph { name, available } => {
                assert_eq!(name, "p13");
                assert_eq!(available, ["p31", "items", "labels"]);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn default_return_lists_variables() {
        let text = QueryText {
            match_text: "(a)-[r]->(b)",
            optional: vec!["(b)-[]->(c)"],
            ..Default::default()
        };
        let q = assemble_query(inputs(&["g"]), &text).unwrap();
        assert_eq!(q.returns.aliases().collect::<Vec<_>>(), ["a", "b", "r", "c"]);
        assert_eq!(q.optional_clauses[0][0].graph.as_deref(), Some("g"));
    }

    #[test]
    fn spouse_query_with_optional_group() {
        let text = QueryText {
            match_text: "\n    infobox: (artist)-[:`property:spouse`]->(spouse),\n    p31: (spouse)-[]->(:Q5)",
            optional: vec!["labels: (spouse)-[:label]->(spouse_label)"],
            return_text: Some("artist as node1, \"P26\" as label, spouse as node2, \n          spouse_label as `node2;label`"),
            ..Default::default()
        };
        let q = assemble_query(inputs(&["infobox", "p31", "labels"]), &text).unwrap();
        assert_eq!(q.match_clauses.len(), 2);
        assert_eq!(q.optional_clauses.len(), 1);
        assert_eq!(q.optional_clauses[0].len(), 1);
    }
}
