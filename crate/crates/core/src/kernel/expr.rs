//! The integer expression language used by guards, updates and query atoms.
//!
//! The syntax is a small C-like subset: integer literals, variables, array
//! indexing, `+ - * / %` with truncating division, comparisons, boolean
//! `&& || !` (or `and or not`), and calls into registered procedures.
//! Query atoms additionally use qualified references such as
//! `Voter(0).punished` or `Sys.results`.

use std::fmt;

use super::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Name(String),
    Index(Box<Expr>, Box<Expr>),
    /// `Process(index).member` or `Process.member`.
    Qualified {
        process: String,
        index: Option<i64>,
        member: String,
    },
    Call(String, Vec<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Deadlock,
}

impl Expr {
    pub fn int(v: i64) -> Self {
        Expr::Int(v)
    }

    pub fn name(n: impl Into<String>) -> Self {
        Expr::Name(n.into())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn not(e: Expr) -> Self {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn loc(process: impl Into<String>, index: Option<i64>, member: impl Into<String>) -> Self {
        Expr::Qualified {
            process: process.into(),
            index,
            member: member.into(),
        }
    }

    /// Parses a standalone expression.
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let tokens = lex(text)?;
        let mut p = Parser::new(&tokens);
        let e = p.expr()?;
        p.expect_end()?;
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Name(n) => write!(f, "{n}"),
            Expr::Index(b, i) => write!(f, "{b}[{i}]"),
            Expr::Qualified { process, index, member } => match index {
                Some(i) => write!(f, "{process}({i}).{member}"),
                None => write!(f, "{process}.{member}"),
            },
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Unary(UnOp::Neg, e) => write!(f, "-({e})"),
            Expr::Unary(UnOp::Not, e) => write!(f, "!({e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Deadlock => write!(f, "deadlock"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign {
        target: Expr,
        op: AssignOp,
        value: Expr,
    },
    /// A procedure call evaluated for its side effects.
    Call(String, Vec<Expr>),
}

impl Stmt {
    /// Parses a `;`- or `,`-separated list of statements.
    pub fn parse_list(text: &str) -> Result<Vec<Stmt>, ParseError> {
        let tokens = lex(text)?;
        let mut p = Parser::new(&tokens);
        let mut out = Vec::new();
        while !p.at_end() {
            if p.eat(&Tok::Semi) || p.eat(&Tok::Comma) {
                continue;
            }
            out.push(p.stmt()?);
        }
        Ok(out)
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Assign { target, op, value } => {
                let op = match op {
                    AssignOp::Set => "=",
                    AssignOp::Add => "+=",
                    AssignOp::Sub => "-=",
                };
                write!(f, "{target} {op} {value}")
            }
            Stmt::Call(n, args) => write!(f, "{}", Expr::Call(n.clone(), args.clone())),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Assign,
    PlusAssign,
    MinusAssign,
    PlusPlus,
    MinusMinus,
    /// `E<>`
    EF,
    /// `A[]`
    AG,
    /// `A<>`
    AF,
    /// `E[]`
    EG,
    /// `-->`
    LeadsTo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let peek = |k: usize| chars.get(k).copied();
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, col: tc });
            *i += len;
            *col += len;
        };
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<i64>()
                .map_err(|_| ParseError::new(tl, tc, "integer literal out of range"))?;
            col += i - start;
            out.push(Token {
                tok: Tok::Int(v),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            // Temporal quantifiers glue onto `E`/`A`.
            if (c == 'E' || c == 'A') && matches!(peek(i + 1), Some('<') | Some('[')) {
                let two: String = chars[i + 1..chars.len().min(i + 3)].iter().collect();
                let q = match (c, two.as_str()) {
                    ('E', "<>") => Some(Tok::EF),
                    ('E', "[]") => Some(Tok::EG),
                    ('A', "<>") => Some(Tok::AF),
                    ('A', "[]") => Some(Tok::AG),
                    _ => None,
                };
                if let Some(q) = q {
                    push(q, 3, &mut i, &mut col);
                    continue;
                }
            }
            let start = i;
            while i < chars.len() && ident_continues(Some(chars[i])) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        let next = peek(i + 1);
        let (tok, len) = match (c, next) {
            ('-', Some('-')) if peek(i + 2) == Some('>') => (Tok::LeadsTo, 3),
            ('-', Some('-')) => (Tok::MinusMinus, 2),
            ('+', Some('+')) => (Tok::PlusPlus, 2),
            ('+', Some('=')) => (Tok::PlusAssign, 2),
            ('-', Some('=')) => (Tok::MinusAssign, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::NotEq, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('.', _) => (Tok::Dot, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('%', _) => (Tok::Percent, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('!', _) => (Tok::Bang, 1),
            ('=', _) => (Tok::Assign, 1),
            _ => return Err(ParseError::new(tl, tc, format!("unexpected character `{c}`"))),
        };
        push(tok, len, &mut i, &mut col);
    }
    Ok(out)
}

fn ident_continues(c: Option<char>) -> bool {
    matches!(c, Some(c) if c.is_ascii_alphanumeric() || c == '_')
}

// ---------------------------------------------------------------------------
// Parser

pub struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    pub fn new(tokens: &'t [Token]) -> Self {
        Parser { tokens, pos: 0 }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|t| &t.tok)
    }

    pub fn bump(&mut self) -> Option<&Tok> {
        let t = self.tokens.get(self.pos).map(|t| &t.tok);
        self.pos += 1;
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        match self.tokens.get(self.pos).or_else(|| self.tokens.last()) {
            Some(t) if self.pos < self.tokens.len() => ParseError::new(t.line, t.col, msg),
            Some(t) => ParseError::new(t.line, t.col + 1, msg),
            None => ParseError::new(1, 1, msg),
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(Tok::RParen) => Err(self.error("unbalanced parentheses")),
            Some(t) => Err(self.error(format!("unexpected token {t:?}"))),
        }
    }

    pub fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let target = self.postfix()?;
        let op = match self.peek() {
            Some(Tok::Assign) => AssignOp::Set,
            Some(Tok::PlusAssign) => AssignOp::Add,
            Some(Tok::MinusAssign) => AssignOp::Sub,
            Some(Tok::PlusPlus) | Some(Tok::MinusMinus) => {
                let op = if self.bump() == Some(&Tok::PlusPlus) {
                    AssignOp::Add
                } else {
                    AssignOp::Sub
                };
                check_lvalue(&target).map_err(|m| self.error(m))?;
                return Ok(Stmt::Assign {
                    target,
                    op,
                    value: Expr::Int(1),
                });
            }
            _ => {
                return match target {
                    Expr::Call(n, args) => Ok(Stmt::Call(n, args)),
                    _ => Err(self.error("expected assignment or procedure call")),
                }
            }
        };
        check_lvalue(&target).map_err(|m| self.error(m))?;
        self.pos += 1;
        let value = self.expr()?;
        Ok(Stmt::Assign { target, op, value })
    }

    /// Full expression including boolean connectives.
    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.eat(&Tok::OrOr) || self.eat_keyword("or") {
            let rhs = self.and_expr()?;
            lhs = Expr::bin(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_expr()?;
        while self.eat(&Tok::AndAnd) || self.eat_keyword("and") {
            let rhs = self.not_expr()?;
            lhs = Expr::bin(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_keyword("not") {
            return Ok(Expr::not(self.not_expr()?));
        }
        self.comparison()
    }

    /// Comparison level: no boolean connectives except unary `!`.
    pub fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Some(Tok::EqEq) => BinOp::Eq,
            Some(Tok::NotEq) => BinOp::Ne,
            Some(Tok::Lt) => BinOp::Lt,
            Some(Tok::Le) => BinOp::Le,
            Some(Tok::Gt) => BinOp::Gt,
            Some(Tok::Ge) => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.additive()?;
        Ok(Expr::bin(op, lhs, rhs))
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.multiplicative()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                Some(Tok::Percent) => BinOp::Rem,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            let e = self.unary()?;
            return Ok(match e {
                Expr::Int(v) => Expr::Int(-v),
                e => Expr::Unary(UnOp::Neg, Box::new(e)),
            });
        }
        if self.eat(&Tok::Bang) {
            return Ok(Expr::not(self.unary()?));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.eat(&Tok::LBrack) {
            let idx = self.expr()?;
            self.expect(&Tok::RBrack, "`]`")?;
            e = Expr::Index(Box::new(e), Box::new(idx));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Expr::Int(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error("unbalanced parentheses: expected `)`"));
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "true" => return Ok(Expr::Int(1)),
                    "false" => return Ok(Expr::Int(0)),
                    "deadlock" => return Ok(Expr::Deadlock),
                    _ => {}
                }
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(&Tok::Comma, "`,` or `)`")?;
                        }
                    }
                    if self.eat(&Tok::Dot) {
                        let index = match args.as_slice() {
                            [Expr::Int(i)] => *i,
                            _ => return Err(self.error("process index must be an integer literal")),
                        };
                        let member = self.ident()?;
                        return Ok(Expr::loc(name, Some(index), member));
                    }
                    return Ok(Expr::Call(name, args));
                }
                if self.eat(&Tok::Dot) {
                    let member = self.ident()?;
                    return Ok(Expr::loc(name, None, member));
                }
                Ok(Expr::Name(name))
            }
            Some(t) => Err(self.error(format!("unexpected token {t:?}"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }
}

fn check_lvalue(e: &Expr) -> Result<(), String> {
    match e {
        Expr::Name(_) => Ok(()),
        Expr::Index(b, _) => check_lvalue(b),
        _ => Err("assignment target must be a variable or array element".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_precedence() {
        let e = Expr::parse("a + b * 2 == 7 && !c || d").unwrap();
        assert_eq!(e.to_string(), "((((a + (b * 2)) == 7) && !(c)) || d)");
    }

    #[test]
    fn parses_qualified_and_calls() {
        assert_eq!(
            Expr::parse("Voter(0).punished").unwrap(),
            Expr::loc("Voter", Some(0), "punished")
        );
        assert_eq!(Expr::parse("Sys.results").unwrap(), Expr::loc("Sys", None, "results"));
        assert_eq!(
            Expr::parse("zpow(3, -1)").unwrap(),
            Expr::Call("zpow".into(), vec![Expr::Int(3), Expr::Int(-1)])
        );
    }

    #[test]
    fn keywords_match_symbols() {
        assert_eq!(
            Expr::parse("a and not b or c").unwrap(),
            Expr::parse("a && !b || c").unwrap()
        );
    }

    #[test]
    fn statements() {
        let s = Stmt::parse_list("x = 1; vec_r[0][p]++; go(x, 2), y -= 3").unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[1].to_string(), "vec_r[0][p] += 1");
        assert!(Stmt::parse_list("1 = x").is_err());
    }

    #[test]
    fn errors_carry_position() {
        let err = Expr::parse("a +\n  (b").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("parenthes"));
        let err = Expr::parse("a $ b").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }

    #[test]
    fn display_round_trips() {
        for src in ["-x + 3 % y", "f(a[1][2], -(b))", "!(a <= 2) || Voter(1).chosen != 2"] {
            let e = Expr::parse(src).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
        }
    }
}
