//! Scalar-field expressions over the chart coordinates `x`, `y`, `t`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          exponent must be constant
//! atom    := number | x | y | t | func '(' expr ')' | '(' expr ')'
//! func    := exp | log | sin | cos | sqrt | abs
//! ```
//!
//! The same tree evaluates on `f64` and on [`Jet`]s; see [`FieldValue`].

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::jet::{Jet, JetError, Point};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: {message} (expected one of: {})", expected.join(", "))]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    T,
}

impl Var {
    pub fn axis(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::T => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    const ALL: [(&'static str, Func); 6] = [
        ("exp", Func::Exp),
        ("log", Func::Log),
        ("sin", Func::Sin),
        ("cos", Func::Cos),
        ("sqrt", Func::Sqrt),
        ("abs", Func::Abs),
    ];

    fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, f)| *f == self).unwrap().0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Base raised to a constant exponent.
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn mentions(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.mentions(v),
            Expr::Bin(_, a, b) => a.mentions(v) || b.mentions(v),
        }
    }

    fn has_vars(&self) -> bool {
        [Var::X, Var::Y, Var::T].iter().any(|&v| self.mentions(v))
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.depth(),
            Expr::Bin(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn eval<V: FieldValue>(&self, vars: &[V; 3]) -> Result<V, FieldError> {
        Ok(match self {
            Expr::Num(c) => vars[0].constant_like(*c),
            Expr::Var(v) => vars[v.axis()].clone(),
            Expr::Neg(a) => a.eval(vars)?.neg(),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(vars)?, b.eval(vars)?);
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Div => a.div(&b)?,
                }
            }
            Expr::Pow(a, p) => {
                let a = a.eval(vars)?;
                if p.fract() == 0.0 && f64::abs(*p) <= i32::MAX as f64 {
                    a.powi(*p as i32)?
                } else {
                    a.powf(*p)?
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(vars)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => a.ln()?,
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt => a.sqrt()?,
                    Func::Abs => a.abs()?,
                }
            }
        })
    }
}

/// Values an expression can be evaluated on.
///
/// Both implementations perform the same floating-point operations on the
/// value part, so evaluating on jets reproduces the real evaluation exactly.
pub trait FieldValue: Clone + Sized {
    fn constant_like(&self, c: f64) -> Self;
    fn neg(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self, FieldError>;
    fn powi(&self, n: i32) -> Result<Self, FieldError>;
    fn powf(&self, p: f64) -> Result<Self, FieldError>;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self, FieldError>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Result<Self, FieldError>;
    fn abs(&self) -> Result<Self, FieldError>;
}

fn domain(func: &'static str, value: f64) -> FieldError {
    FieldError::Jet(JetError::Domain { func, value })
}

impl FieldValue for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self, FieldError> {
        if *o == 0.0 {
            Err(FieldError::DivisionByZero)
        } else {
            Ok(self / o)
        }
    }
    fn powi(&self, n: i32) -> Result<Self, FieldError> {
        let mut acc = 1.0;
        for _ in 0..n.unsigned_abs() {
            acc *= self;
        }
        if n < 0 {
            1.0.div(&acc)
        } else {
            Ok(acc)
        }
    }
    fn powf(&self, p: f64) -> Result<Self, FieldError> {
        if *self <= 0.0 {
            return Err(domain("pow", *self));
        }
        Ok((f64::ln(*self) * p).exp())
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self, FieldError> {
        if *self <= 0.0 || !self.is_finite() {
            return Err(domain("log", *self));
        }
        Ok(f64::ln(*self))
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Result<Self, FieldError> {
        if *self <= 0.0 || !self.is_finite() {
            return Err(domain("sqrt", *self));
        }
        Ok(f64::sqrt(*self))
    }
    fn abs(&self) -> Result<Self, FieldError> {
        Ok(f64::abs(*self))
    }
}

impl FieldValue for Jet {
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant(self.base(), c)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self, FieldError> {
        Ok(Jet::div(self, o)?)
    }
    fn powi(&self, n: i32) -> Result<Self, FieldError> {
        Ok(Jet::powi(self, n)?)
    }
    fn powf(&self, p: f64) -> Result<Self, FieldError> {
        Ok(Jet::powf(self, p)?)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Result<Self, FieldError> {
        Ok(Jet::ln(self)?)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn sqrt(&self) -> Result<Self, FieldError> {
        Ok(Jet::sqrt(self)?)
    }
    fn abs(&self) -> Result<Self, FieldError> {
        Ok(Jet::abs(self)?)
    }
}

/// Anything that can produce its order-4 jet at a chart point.
pub trait JetField: Send + Sync + fmt::Debug {
    fn jet_at(&self, p: Point) -> Result<Jet, FieldError>;

    fn value_at(&self, p: Point) -> Result<f64, FieldError> {
        Ok(self.jet_at(p)?.value())
    }

    /// True when the field is constant along the fibres (no `t` dependence).
    fn is_basic(&self) -> bool;

    fn describe(&self) -> String;
}

pub type FieldRef = Arc<dyn JetField>;

/// A parsed expression together with its source text.
#[derive(Debug, Clone)]
pub struct ScalarField {
    ast: Expr,
    source: String,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.ast == other.ast
    }
}

impl ScalarField {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let ast = Parser::new(src, false).parse_all()?;
        Ok(Self {
            ast,
            source: src.to_string(),
        })
    }

    pub fn from_expr(ast: Expr) -> Self {
        let source = ast.to_string();
        Self { ast, source }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(Expr::Num(c))
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn basic(&self) -> bool {
        !self.ast.mentions(Var::T)
    }

    pub fn eval(&self, p: Point) -> Result<f64, FieldError> {
        self.ast.eval(&p)
    }

    /// Evaluates on arbitrary jet seeds for `(x, y, t)`.
    pub fn eval_jets(&self, seeds: &[Jet; 3]) -> Result<Jet, FieldError> {
        self.ast.eval(seeds)
    }

    pub fn to_ref(&self) -> FieldRef {
        Arc::new(self.clone())
    }
}

impl JetField for ScalarField {
    fn jet_at(&self, p: Point) -> Result<Jet, FieldError> {
        self.eval_jets(&Jet::seeds(p))
    }

    fn value_at(&self, p: Point) -> Result<f64, FieldError> {
        self.eval(p)
    }

    fn is_basic(&self) -> bool {
        self.basic()
    }

    fn describe(&self) -> String {
        self.source.clone()
    }
}

impl std::str::FromStr for ScalarField {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        Self::parse(s)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || c.is_sign_negative() {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{c:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if prec(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(c) => write_num(f, *c),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(a) => {
                f.write_str("-")?;
                child(f, a, 3)
            }
            Expr::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                };
                child(f, a, p)?;
                write!(f, " {sym} ")?;
                // right operand binds one level tighter (left associativity)
                child(f, b, p + 1)
            }
            Expr::Pow(a, p) => {
                child(f, a, 5)?;
                f.write_str("^")?;
                write_num(f, *p)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

// ---------------------------------------------------------------------------
// parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
    /// Accept `dx` and `dy` as formal symbols (one-form syntax).
    differentials: bool,
}

/// Formal differential symbols inside a one-form expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Diff {
    Dx,
    Dy,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, differentials: bool) -> Self {
        Self {
            src,
            pos: 0,
            tok: Tok::End,
            tok_start: 0,
            differentials,
        }
    }

    fn err(&self, offset: usize, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            offset,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.')
            {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let save = self.pos;
                self.pos += 1;
                if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                    self.pos += 1;
                }
                let digits = self.pos;
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if digits == self.pos {
                    self.pos = save;
                }
            }
            let text = &self.src[start..self.pos];
            let value: f64 = text
                .parse()
                .map_err(|_| self.err(start, format!("malformed number '{text}'"), &["number"]))?;
            self.tok = Tok::Num(value);
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else if b"+-*/^()".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Sym(c as char);
        } else {
            let ch = self.src[self.pos..].chars().next().unwrap();
            return Err(self.err(
                self.pos,
                format!("unexpected character '{ch}'"),
                &["expression"],
            ));
        }
        Ok(())
    }

    fn parse_all(mut self) -> Result<Expr, ParseError> {
        self.advance()?;
        if self.tok == Tok::End {
            return Err(self.err(0, "empty expression", &["expression"]));
        }
        let e = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.err(
                self.tok_start,
                "trailing input",
                &["+", "-", "*", "/", "^", "end of input"],
            ));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Sym('-') {
            self.advance()?;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.advance()?;
        let start = self.tok_start;
        let exponent = self.unary()?;
        if exponent.has_vars() || self.differentials && contains_diff(&exponent) {
            return Err(self.err(start, "exponent must be a constant", &["constant exponent"]));
        }
        let value: f64 = exponent.eval(&[0.0f64; 3]).map_err(|e| {
            self.err(
                start,
                format!("exponent does not evaluate: {e}"),
                &["constant exponent"],
            )
        })?;
        if !value.is_finite() {
            return Err(self.err(start, "exponent is not finite", &["constant exponent"]));
        }
        Ok(Expr::Pow(Box::new(base), value))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.tok_start;
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance()?;
                match name.as_str() {
                    "x" => return Ok(Expr::Var(Var::X)),
                    "y" => return Ok(Expr::Var(Var::Y)),
                    "t" => return Ok(Expr::Var(Var::T)),
                    "dx" if self.differentials => return Ok(diff_marker(Diff::Dx)),
                    "dy" if self.differentials => return Ok(diff_marker(Diff::Dy)),
                    _ => {}
                }
                if let Some((_, func)) = Func::ALL.iter().find(|(n, _)| *n == name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(*func, Box::new(arg)));
                }
                Err(self.err(
                    start,
                    format!("unknown identifier {name}"),
                    &["x", "y", "t", "exp", "log", "sin", "cos", "sqrt", "abs"],
                ))
            }
            Tok::End => Err(self.err(
                start,
                "unexpected end of input",
                &["number", "identifier", "("],
            )),
            Tok::Sym(c) => Err(self.err(
                start,
                format!("unexpected '{c}'"),
                &["number", "identifier", "(", "-"],
            )),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok == Tok::Sym(c) {
            self.advance()
        } else {
            let found = match &self.tok {
                Tok::End => "end of input".to_string(),
                Tok::Num(v) => format!("{v}"),
                Tok::Ident(s) => s.clone(),
                Tok::Sym(s) => s.to_string(),
            };
            Err(self.err(self.tok_start, format!("found {found}"), &[&c.to_string()]))
        }
    }
}

// Differentials ride through the tree as reserved negative literals, which the
// tokenizer can never produce; they never escape `parse_one_form`.
const DX_MARK: f64 = -1.0e308;
const DY_MARK: f64 = -1.5e308;

fn diff_marker(d: Diff) -> Expr {
    Expr::Num(match d {
        Diff::Dx => DX_MARK,
        Diff::Dy => DY_MARK,
    })
}

fn as_diff(e: &Expr) -> Option<Diff> {
    match e {
        Expr::Num(v) if *v == DX_MARK => Some(Diff::Dx),
        Expr::Num(v) if *v == DY_MARK => Some(Diff::Dy),
        _ => None,
    }
}

fn contains_diff(e: &Expr) -> bool {
    if as_diff(e).is_some() {
        return true;
    }
    match e {
        Expr::Num(_) | Expr::Var(_) => false,
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => contains_diff(a),
        Expr::Bin(_, a, b) => contains_diff(a) || contains_diff(b),
    }
}

/// Replaces `dx`, `dy` by the given constants.
fn substitute(e: &Expr, dx: f64, dy: f64) -> Expr {
    if let Some(d) = as_diff(e) {
        return Expr::Num(if d == Diff::Dx { dx } else { dy });
    }
    match e {
        Expr::Num(_) | Expr::Var(_) => e.clone(),
        Expr::Neg(a) => Expr::Neg(Box::new(substitute(a, dx, dy))),
        Expr::Pow(a, p) => Expr::Pow(Box::new(substitute(a, dx, dy)), *p),
        Expr::Call(f, a) => Expr::Call(*f, Box::new(substitute(a, dx, dy))),
        Expr::Bin(op, a, b) => Expr::bin(*op, substitute(a, dx, dy), substitute(b, dx, dy)),
    }
}

/// Degree in the differentials if the tree is homogeneous, `None` otherwise.
fn diff_degree(e: &Expr) -> Option<u32> {
    if as_diff(e).is_some() {
        return Some(1);
    }
    match e {
        Expr::Num(_) | Expr::Var(_) => Some(0),
        Expr::Neg(a) => diff_degree(a),
        Expr::Pow(a, p) => match diff_degree(a)? {
            0 => Some(0),
            d if *p == 1.0 => Some(d),
            _ => None,
        },
        Expr::Call(_, a) => (diff_degree(a)? == 0).then_some(0),
        Expr::Bin(op, a, b) => {
            let (da, db) = (diff_degree(a)?, diff_degree(b)?);
            match op {
                BinOp::Add | BinOp::Sub => (da == db).then_some(da),
                BinOp::Mul => Some(da + db),
                BinOp::Div => (db == 0).then_some(da),
            }
        }
    }
}

/// Parses a one-form `P dx + Q dy` written with explicit differentials,
/// e.g. `x*dy - y*dx`, returning `(P, Q)`.
pub fn parse_one_form(src: &str) -> Result<(ScalarField, ScalarField), ParseError> {
    let tree = Parser::new(src, true).parse_all()?;
    if diff_degree(&tree) != Some(1) {
        return Err(ParseError {
            offset: 0,
            message: "not a one-form linear in dx, dy".into(),
            expected: vec!["<expr>*dx".into(), "<expr>*dy".into()],
        });
    }
    let p = ScalarField::from_expr(substitute(&tree, 1.0, 0.0));
    let q = ScalarField::from_expr(substitute(&tree, 0.0, 1.0));
    Ok((p, q))
}
