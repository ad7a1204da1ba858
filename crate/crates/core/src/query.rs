//! The query language.
//!
//! ```text
//! query   := imply ( "-->" imply )?
//! imply   := or ( "imply" imply )?
//! or      := and ( ("or" | "||") and )*
//! and     := unary ( ("and" | "&&") unary )*
//! unary   := ("not" | "!") unary
//!          | ("E<>" | "A[]" | "A<>" | "E[]" | "EX") imply
//!          | "E" "[" query "U" query "]"
//!          | "(" query ")" | "true" | "false" | atom
//! atom    := comparison over integers, `Proc(i).loc`, `Proc.loc`, `deadlock`
//! ```
//!
//! A temporal prefix scopes over everything to its right, as in `A[] not p`.
//! A parenthesised group followed by an arithmetic or comparison operator is
//! re-read as part of an atom, so `(x + 1) > 2` works.

use std::fmt;

use serde::Serialize;

use crate::checker::{Formula, FragmentClass};
use crate::kernel::expr::{lex, Parser, Tok};
use crate::kernel::{Expr, ParseError};
use crate::Error;

/// A parsed query with its routing class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub text: String,
    pub formula: Formula,
    pub class: FragmentClass,
}

impl Serialize for Query {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Query", 3)?;
        st.serialize_field("text", &self.text)?;
        st.serialize_field("formula", &self.formula.to_string())?;
        st.serialize_field("class", &self.class)?;
        st.end()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula)
    }
}

pub fn parse_query(text: &str) -> Result<Query, Error> {
    let formula = parse_formula(text)?;
    Ok(Query {
        text: text.to_string(),
        class: formula.fragment(),
        formula,
    })
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Err(ParseError::new(1, 1, "empty query"));
    }
    let mut p = Parser::new(&tokens);
    let f = query(&mut p)?;
    p.expect_end()?;
    Ok(f)
}

const KEYWORDS: [&str; 6] = ["not", "and", "or", "imply", "EX", "U"];

fn query(p: &mut Parser<'_>) -> Result<Formula, ParseError> {
    let lhs = imply(p)?;
    if p.eat(&Tok::LeadsTo) {
        let rhs = imply(p)?;
        return Ok(Formula::leads_to(lhs, rhs));
    }
    Ok(lhs)
}

fn imply(p: &mut Parser<'_>) -> Result<Formula, ParseError> {
    let lhs = or(p)?;
    if p.eat_keyword("imply") {
        return Ok(Formula::implies(lhs, imply(p)?));
    }
    Ok(lhs)
}

fn or(p: &mut Parser<'_>) -> Result<Formula, ParseError> {
    let mut lhs = and(p)?;
    while p.eat(&Tok::OrOr) || p.eat_keyword("or") {
        lhs = Formula::or(lhs, and(p)?);
    }
    Ok(lhs)
}

fn and(p: &mut Parser<'_>) -> Result<Formula, ParseError> {
    let mut lhs = unary(p)?;
    while p.eat(&Tok::AndAnd) || p.eat_keyword("and") {
        lhs = Formula::and(lhs, unary(p)?);
    }
    Ok(lhs)
}

fn unary(p: &mut Parser<'_>) -> Result<Formula, ParseError> {
    if p.eat(&Tok::Bang) || p.eat_keyword("not") {
        return Ok(Formula::not(unary(p)?));
    }
    let quant: Option<fn(Formula) -> Formula> = match p.peek() {
        Some(Tok::EF) => Some(Formula::ef),
        Some(Tok::AG) => Some(Formula::ag),
        Some(Tok::AF) => Some(Formula::af),
        Some(Tok::EG) => Some(Formula::eg),
        Some(Tok::Ident(s)) if s == "EX" => Some(Formula::ex),
        _ => None,
    };
    if let Some(q) = quant {
        p.bump();
        return Ok(q(imply(p)?));
    }
    match (p.peek(), p.peek_at(1)) {
        (Some(Tok::Ident(e)), Some(Tok::LBrack)) if e == "E" => {
            p.bump();
            p.bump();
            let lhs = query(p)?;
            if !p.eat_keyword("U") {
                return Err(p.error("expected `U` in `E[ p U q ]`"));
            }
            let rhs = query(p)?;
            p.expect(&Tok::RBrack, "`]` closing `E[ p U q ]`")?;
            return Ok(Formula::eu(lhs, rhs));
        }
        (Some(Tok::Ident(q)), Some(next)) if (q == "E" || q == "A") && is_operator(next) => {
            return Err(p.error(format!("unknown operator `{q}{}`", symbol(next))));
        }
        _ => {}
    }
    primary(p)
}

fn primary(p: &mut Parser<'_>) -> Result<Formula, ParseError> {
    let start = p.pos();
    if p.eat(&Tok::LParen) {
        if let Ok(f) = query(p) {
            if p.eat(&Tok::RParen) && !p.peek().is_some_and(continues_atom) {
                return Ok(f);
            }
        }
        p.reset(start);
        return atom(p);
    }
    if let Some(Tok::Ident(s)) = p.peek() {
        let b = match s.as_str() {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        };
        if let Some(b) = b {
            if !p.peek_at(1).is_some_and(continues_atom) {
                p.bump();
                return Ok(Formula::Bool(b));
            }
        }
        if KEYWORDS.contains(&s.as_str()) {
            return Err(p.error(format!("unexpected keyword `{s}`")));
        }
    }
    atom(p)
}

fn atom(p: &mut Parser<'_>) -> Result<Formula, ParseError> {
    let e = p.comparison()?;
    if let Expr::Binary(op, ..) = &e {
        if matches!(op, crate::kernel::BinOp::And | crate::kernel::BinOp::Or) {
            return Err(p.error("boolean connective inside an atom"));
        }
    }
    Ok(Formula::Atom(e))
}

/// Tokens after `)` that make the group part of an arithmetic atom.
fn continues_atom(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Plus
            | Tok::Minus
            | Tok::Star
            | Tok::Slash
            | Tok::Percent
            | Tok::EqEq
            | Tok::NotEq
            | Tok::Lt
            | Tok::Le
            | Tok::Gt
            | Tok::Ge
            | Tok::LBrack
    )
}

fn is_operator(t: &Tok) -> bool {
    matches!(t, Tok::Lt | Tok::Gt | Tok::Le | Tok::Ge | Tok::LBrack | Tok::RBrack)
}

fn symbol(t: &Tok) -> &'static str {
    match t {
        Tok::Lt => "<",
        Tok::Gt => ">",
        Tok::Le => "<=",
        Tok::Ge => ">=",
        Tok::LBrack => "[",
        Tok::RBrack => "]",
        _ => "?",
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn at(s: &str) -> Formula {
        Formula::parse_atom(s).unwrap()
    }

    #[test]
    fn suite_queries() {
        let q = parse_query("E<> MixTeller(0).failed_audit").unwrap();
        assert_eq!(q.formula, Formula::ef(at("MixTeller(0).failed_audit")));
        assert_eq!(q.class, FragmentClass::UppaalFragment);

        let q = parse_query("A[] not Voter(0).punished").unwrap();
        assert_eq!(q.formula, Formula::ag(Formula::not(at("Voter(0).punished"))));

        let q = parse_query("Voter(0).has_ballot --> Voter(0).marked_choice").unwrap();
        assert_eq!(
            q.formula,
            Formula::leads_to(at("Voter(0).has_ballot"), at("Voter(0).marked_choice"))
        );
        assert_eq!(q.class, FragmentClass::UppaalFragment);

        let q = parse_query("A[] ((Sys.results and real) imply E<> (voted_0_1 and initial))").unwrap();
        assert_eq!(q.class, FragmentClass::NestedCtl);
        assert_eq!(
            q.formula,
            Formula::ag(Formula::implies(
                Formula::and(at("Sys.results"), at("real")),
                Formula::ef(Formula::and(at("voted_0_1"), at("initial")))
            ))
        );
    }

    #[test]
    fn symbols_and_keywords_agree() {
        let a = parse_formula("E<> (a && !b || c)").unwrap();
        let b = parse_formula("E<> (a and not b or c)").unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a,
            Formula::ef(Formula::or(Formula::and(at("a"), Formula::not(at("b"))), at("c")))
        );
    }

    #[test]
    fn prefix_scopes_to_the_right() {
        assert_eq!(
            parse_formula("A[] x > 0 and y").unwrap(),
            Formula::ag(Formula::and(at("x > 0"), at("y")))
        );
        assert_eq!(
            parse_formula("a imply b imply c").unwrap(),
            Formula::implies(at("a"), Formula::implies(at("b"), at("c")))
        );
        assert_eq!(parse_formula("not not a").unwrap(), Formula::not(Formula::not(at("a"))));
    }

    #[test]
    fn nested_and_until() {
        assert_eq!(parse_formula("A[] E<> p").unwrap(), Formula::ag(Formula::ef(at("p"))));
        assert_eq!(
            parse_formula("E[ a U (b and EX c) ]").unwrap(),
            Formula::eu(at("a"), Formula::and(at("b"), Formula::ex(at("c"))))
        );
        assert_eq!(parse_formula("E[] true").unwrap(), Formula::eg(Formula::Bool(true)));
    }

    #[test]
    fn parenthesised_arithmetic() {
        assert_eq!(parse_formula("(x + 1) > 2").unwrap(), at("(x + 1) > 2"));
        assert_eq!(parse_formula("((x < 3))").unwrap(), at("x < 3"));
        assert_eq!(
            parse_formula("E<> (board[0][1] == 3)").unwrap(),
            Formula::ef(at("board[0][1] == 3"))
        );
        assert_eq!(parse_formula("deadlock").unwrap(), Formula::Atom(Expr::Deadlock));
    }

    #[test]
    fn errors() {
        let e = parse_formula("E<> (a and b").unwrap_err();
        assert!(e.message.contains("parenthes"), "{e}");
        let e = parse_formula("E<> a)").unwrap_err();
        assert!(e.message.contains("unbalanced"), "{e}");
        let e = parse_formula("A<< p").unwrap_err();
        assert!(e.message.contains("unknown operator `A<`"), "{e}");
        assert_eq!((e.line, e.col), (1, 1));
        let e = parse_formula("E<> p\n  and $").unwrap_err();
        assert_eq!((e.line, e.col), (2, 7));
        assert!(parse_formula("").is_err());
        assert!(parse_formula("E[ a b ]").is_err());
        assert!(parse_formula("a and").is_err());
    }

    fn atoms() -> impl Strategy<Value = Formula> {
        prop_oneof![
            Just(at("Voter(0).punished")),
            Just(at("Sys.results")),
            Just(at("x < 3")),
            Just(at("(a + b) * 2 != c[1]")),
            Just(at("real")),
            Just(Formula::Atom(Expr::Deadlock)),
            any::<bool>().prop_map(Formula::Bool),
        ]
    }

    fn formulas() -> impl Strategy<Value = Formula> {
        atoms().prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                inner.clone().prop_map(Formula::ex),
                inner.clone().prop_map(Formula::ef),
                inner.clone().prop_map(Formula::ag),
                inner.clone().prop_map(Formula::af),
                inner.clone().prop_map(Formula::eg),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::eu(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn pretty_print_round_trips(f in formulas()) {
            let text = f.to_string();
            let back = parse_formula(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
            prop_assert_eq!(&back, &f, "{}", text);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn leads_to_round_trips(a in formulas(), b in formulas()) {
            let f = Formula::leads_to(a, b);
            prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }
}
