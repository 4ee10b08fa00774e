//! System files and point files.
//!
//! ```text
//! # description: a coupled pair
//! vars: x1, x2;
//! eq g1: d(x1, 2) + d(x2, 1);
//! eq g2: d(x1, 1) - x2;
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::symexpr::{DerivVar, Expr, Func, Point, Rational};

const RESERVED: &[&str] = &["vars", "eq", "d", "t", "sin", "cos", "exp", "log"];

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub name: String,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemFile {
    pub vars: Vec<String>,
    pub equations: Vec<Equation>,
    /// Taken from a `# description:` comment.
    pub description: Option<String>,
}

impl SystemFile {
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn exprs(&self) -> Vec<Expr> {
        self.equations.iter().map(|e| e.expr.clone()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn derivative_name(&self, v: DerivVar) -> String {
        let name = &self.vars[v.var];
        if v.order == 0 {
            name.clone()
        } else {
            format!("{name}^{}", v.order)
        }
    }
}

impl fmt::Display for SystemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(d) = &self.description {
            writeln!(f, "# description: {d}")?;
        }
        writeln!(f, "vars: {};", self.vars.join(", "))?;
        for eq in &self.equations {
            writeln!(f, "eq {}: {};", eq.name, eq.expr.named(&self.vars))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredVariable(String),
    NegativeOrder(String),
    DivisionByZero,
    DuplicateName(String),
    ReservedName(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UndeclaredVariable(n) => write!(f, "undeclared variable `{n}`"),
            ParseErrorKind::NegativeOrder(n) => write!(f, "negative derivative order for `{n}`"),
            ParseErrorKind::DivisionByZero => f.write_str("division by zero"),
            ParseErrorKind::DuplicateName(n) => write!(f, "`{n}` is declared twice"),
            ParseErrorKind::ReservedName(n) => write!(f, "`{n}` is reserved"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rational),
    Int(BigInt),
    Punct(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<(Vec<Token>, Option<String>), ParseError> {
    let mut out = Vec::new();
    let mut description = None;
    for (ln, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let err = |m: String| ParseError { line: ln + 1, column, kind: ParseErrorKind::Syntax(m) };
            if c.is_whitespace() {
                i += 1;
            } else if c == '#' {
                let comment: String = chars[i + 1..].iter().collect();
                if description.is_none() {
                    if let Some(d) = comment.trim().strip_prefix("description:") {
                        description = Some(d.trim().to_string());
                    }
                }
                break;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: ln + 1, column });
            } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part: String = chars[start..i].iter().collect();
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    let fs = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let frac: String = chars[fs..i].iter().collect();
                    let digits = format!("{int_part}{frac}");
                    let numer: BigInt = digits.parse().map_err(|_| err(format!("bad number `{digits}`")))?;
                    let denom = num_traits::pow(BigInt::from(10), frac.len());
                    out.push(Token { tok: Tok::Number(Rational::new(numer, denom)), line: ln + 1, column });
                } else {
                    let n: BigInt = int_part.parse().map_err(|_| err(format!("bad number `{int_part}`")))?;
                    out.push(Token { tok: Tok::Int(n), line: ln + 1, column });
                }
            } else if "()+-*/^,;:".contains(c) {
                out.push(Token { tok: Tok::Punct(c), line: ln + 1, column });
                i += 1;
            } else {
                return Err(err(format!("unexpected character `{c}`")));
            }
        }
    }
    let (line, column) = out.last().map_or((1, 1), |t| (t.line, t.column + 1));
    out.push(Token { tok: Tok::End, line, column });
    Ok((out, description))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
    // first use of an undeclared name, reported once parsing is done
    undeclared: Option<(String, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.column)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, kind }
    }

    fn syntax(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("`{n}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        };
        self.error(ParseErrorKind::Syntax(format!("expected {expected}, found {found}")))
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("`{c}`")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        let hit = *self.peek() == Tok::Punct(c);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn int(&mut self, expected: &str) -> Result<BigInt, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.syntax(expected)),
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.syntax("a name")),
        }
    }

    fn declared_name(&mut self) -> Result<String, ParseError> {
        let at = self.here();
        let name = self.name()?;
        if RESERVED.contains(&name.as_str()) {
            return Err(ParseError { line: at.0, column: at.1, kind: ParseErrorKind::ReservedName(name) });
        }
        Ok(name)
    }

    fn lookup(&mut self, name: &str, at: (usize, usize)) -> usize {
        match self.vars.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                if self.undeclared.is_none() {
                    self.undeclared = Some((name.to_string(), at.0, at.1));
                }
                usize::MAX
            }
        }
    }

    fn system(&mut self) -> Result<(Vec<String>, Vec<Equation>, bool), ParseError> {
        let has_vars = self.keyword("vars");
        if has_vars {
            self.pos += 1;
            self.punct(':')?;
            loop {
                let at = self.here();
                let v = self.declared_name()?;
                if self.vars.contains(&v) {
                    return Err(ParseError { line: at.0, column: at.1, kind: ParseErrorKind::DuplicateName(v) });
                }
                self.vars.push(v);
                if !self.eat(',') {
                    break;
                }
            }
            self.punct(';')?;
        }
        let mut equations: Vec<Equation> = Vec::new();
        while self.keyword("eq") {
            self.pos += 1;
            let at = self.here();
            let name = self.declared_name()?;
            if equations.iter().any(|e| e.name == name) {
                return Err(ParseError { line: at.0, column: at.1, kind: ParseErrorKind::DuplicateName(name) });
            }
            self.punct(':')?;
            let expr = self.expr()?;
            self.punct(';')?;
            equations.push(Equation { name, expr });
        }
        if *self.peek() != Tok::End {
            return Err(self.syntax(if equations.is_empty() && !has_vars { "`vars`" } else { "`eq`" }));
        }
        Ok((self.vars.clone(), equations, has_vars))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if *self.peek() == Tok::Punct('/') {
                let err = self.error(ParseErrorKind::DivisionByZero);
                self.pos += 1;
                let den = self.unary()?;
                acc = Expr::checked_div(acc, den).ok_or(err)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let parens = self.eat('(');
        let negative = self.eat('-');
        let n = self.int("an integer exponent")?;
        if parens {
            self.punct(')')?;
        }
        let n: i64 = i64::try_from(n).map_err(|_| self.error(ParseErrorKind::Syntax("exponent too large".into())))?;
        let n = if negative { -n } else { n };
        if n < 0 && base.is_zero() {
            return Err(self.error(ParseErrorKind::DivisionByZero));
        }
        Ok(Expr::pow(base, n))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        match self.next() {
            Tok::Int(n) => Ok(Expr::constant(Rational::from_integer(n))),
            Tok::Number(q) => Ok(Expr::constant(q)),
            Tok::Punct('(') => {
                let e = self.expr()?;
                self.punct(')')?;
                Ok(e)
            }
            Tok::Ident(s) if s == "t" => Ok(Expr::time()),
            Tok::Ident(s) if s == "d" && *self.peek() == Tok::Punct('(') => {
                self.punct('(')?;
                let name_at = self.here();
                let name = self.name()?;
                self.punct(',')?;
                let negative = self.eat('-');
                let order = self.int("a derivative order")?;
                if negative && !order.is_zero() {
                    return Err(ParseError { line: at.0, column: at.1, kind: ParseErrorKind::NegativeOrder(name) });
                }
                self.punct(')')?;
                let order = u32::try_from(order)
                    .map_err(|_| self.error(ParseErrorKind::Syntax("derivative order too large".into())))?;
                let var = self.lookup(&name, name_at);
                Ok(Expr::var(var, order))
            }
            Tok::Ident(s) => {
                if let Some(func) = Func::from_name(&s) {
                    if *self.peek() == Tok::Punct('(') {
                        self.punct('(')?;
                        let arg = self.expr()?;
                        self.punct(')')?;
                        return Ok(Expr::apply(func, arg));
                    }
                }
                let var = self.lookup(&s, at);
                Ok(Expr::var(var, 0))
            }
            Tok::End => Err(self.syntax("an expression")),
            _ => {
                self.pos -= 1;
                Err(self.syntax("an expression"))
            }
        }
    }
}

pub fn parse_system(text: &str) -> Result<SystemFile, ParseError> {
    let (tokens, description) = lex(text)?;
    let mut p = Parser { tokens, pos: 0, vars: Vec::new(), undeclared: None };
    let result = p.system();
    if let Some((name, line, column)) = p.undeclared.take() {
        // an unknown name explains later failures better than they do themselves
        if result.as_ref().err().is_none_or(|e| (e.line, e.column) > (line, column)) {
            return Err(ParseError { line, column, kind: ParseErrorKind::UndeclaredVariable(name) });
        }
    }
    let (vars, equations, has_vars) = result?;
    if !has_vars {
        return Err(ParseError { line: 1, column: 1, kind: ParseErrorKind::Syntax("missing `vars` declaration".into()) });
    }
    if equations.is_empty() {
        let (line, column) = p.here();
        return Err(ParseError { line, column, kind: ParseErrorKind::Syntax("expected at least one `eq`".into()) });
    }
    Ok(SystemFile { vars, equations, description })
}

impl std::str::FromStr for SystemFile {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_system(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PointError {
    #[error("point file is not valid JSON: {0}")]
    Json(String),
    #[error("point file must be a JSON object")]
    NotAnObject,
    #[error("key `{0}` is not `t` or `name^order`")]
    BadKey(String),
    #[error("key `{0}` names an undeclared variable")]
    UndeclaredVariable(String),
    #[error("value of `{0}` is not a finite number")]
    BadValue(String),
    #[error("the point gives no value for {}", .0.join(", "))]
    Missing(Vec<String>),
}

/// Reads `{"t": 0.5, "x1": 1.0, "x1^2": -3}`; a bare name means order 0.
pub fn parse_point(text: &str, vars: &[String]) -> Result<Point, PointError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| PointError::Json(e.to_string()))?;
    let obj = value.as_object().ok_or(PointError::NotAnObject)?;
    let mut p = Point::new();
    for (key, v) in obj {
        let x = v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| PointError::BadValue(key.clone()))?;
        if key == "t" {
            p = p.with_time(x);
            continue;
        }
        let (name, order) = match key.split_once('^') {
            Some((n, k)) => (n, k.parse::<u32>().map_err(|_| PointError::BadKey(key.clone()))?),
            None => (key.as_str(), 0),
        };
        let var = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PointError::UndeclaredVariable(name.to_string()))?;
        p.set(DerivVar::new(var, order), x);
    }
    Ok(p)
}

/// The inverse of [`parse_point`], keys sorted.
pub fn point_to_json(p: &Point, vars: &[String]) -> serde_json::Value {
    let mut map = BTreeMap::new();
    if let Some(t) = p.t {
        map.insert("t".to_string(), t);
    }
    for (v, x) in &p.values {
        let name = &vars[v.var];
        let key = if v.order == 0 { name.clone() } else { format!("{name}^{}", v.order) };
        map.insert(key, *x);
    }
    serde_json::to_value(map).expect("finite floats serialize")
}
