//! Expressions in one variable `t`: parsing with source spans, printing,
//! evaluation and one-sided directional derivatives.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     = product (("+" | "-") product)*
//! product = unary (("*" | "/") unary)*
//! unary   = "-" unary | power
//! power   = atom ("^" unary)?
//! atom    = number | "t" | "e" | "pi" | func "(" sum ("," sum)* ")" | "(" sum ")"
//! ```
//!
//! So `^` is right-associative and `-t^2` is `-(t^2)`.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use convex_enclose::convex::Side;
use convex_enclose::probability::DensityOracle;
use convex_enclose::{ConvexOracle, ExtendedReal, Interval};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

impl ParseError {
    /// The message with the source line and a caret under the offending span.
    pub fn render(&self, src: &str) -> String {
        let width = (self.span.end.max(self.span.start + 1)) - self.span.start;
        format!(
            "{} at position {}\n  {src}\n  {}{}",
            self.message,
            self.span.start,
            " ".repeat(src[..self.span.start.min(src.len())].chars().count()),
            "^".repeat(width)
        )
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at position {}", self.message, self.span.start)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Abs,
    Ln,
    Exp,
    Sqrt,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "ln" => Func::Ln,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        if self == Func::Max {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Debug)]
pub enum Kind {
    Num(f64),
    Var,
    E,
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// A node with the source range it was parsed from.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: Kind,
    pub span: Span,
}

/// Trees compare by structure; spans are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Num(a), Kind::Num(b)) => a.to_bits() == b.to_bits(),
            (Kind::Var, Kind::Var) | (Kind::E, Kind::E) | (Kind::Pi, Kind::Pi) => true,
            (Kind::Neg(a), Kind::Neg(b)) => a == b,
            (Kind::Bin(o, a, b), Kind::Bin(p, c, d)) => o == p && a == c && b == d,
            (Kind::Call(f, a), Kind::Call(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(src: &str) -> Result<Vec<(Token, Span)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // Exponent part, only when digits follow.
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError {
                message: format!("malformed number '{text}'"),
                span: Span { start, end: i },
            })?;
            Token::Num(v)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Token::Ident(src[start..i].to_string())
        } else {
            i += c.len_utf8();
            match c {
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '(' => Token::LParen,
                ')' => Token::RParen,
                ',' => Token::Comma,
                _ => {
                    let ch = src[start..].chars().next().unwrap();
                    return Err(ParseError {
                        message: format!("unexpected character '{ch}'"),
                        span: Span {
                            start,
                            end: start + ch.len_utf8(),
                        },
                    });
                }
            }
        };
        out.push((tok, Span { start, end: i }));
    }
    out.push((
        Token::End,
        Span {
            start: src.len(),
            end: src.len(),
        },
    ));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Token, Span) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            message: message.into(),
            span: self.span(),
        }
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.error(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn binary(l: Expr, op: BinOp, r: Expr) -> Expr {
        let span = Span {
            start: l.span.start,
            end: r.span.end,
        };
        Expr {
            kind: Kind::Bin(op, Box::new(l), Box::new(r)),
            span,
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Token::Op('+') => BinOp::Add,
                Token::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Self::binary(lhs, op, rhs);
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Op('*') => BinOp::Mul,
                Token::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Self::binary(lhs, op, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Op('-') {
            let start = self.bump().1.start;
            let inner = self.unary()?;
            let span = Span {
                start,
                end: inner.span.end,
            };
            return Ok(Expr {
                kind: Kind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Token::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Self::binary(base, BinOp::Pow, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, span) = self.bump();
        match tok {
            Token::Num(v) => Ok(Expr {
                kind: Kind::Num(v),
                span,
            }),
            Token::LParen => {
                let inner = self.sum()?;
                let close = self.expect(Token::RParen, "')'")?;
                Ok(Expr {
                    kind: inner.kind,
                    span: Span {
                        start: span.start,
                        end: close.end,
                    },
                })
            }
            Token::Ident(name) => {
                let simple = match name.as_str() {
                    "t" => Some(Kind::Var),
                    "e" => Some(Kind::E),
                    "pi" => Some(Kind::Pi),
                    _ => None,
                };
                if let Some(kind) = simple {
                    return Ok(Expr { kind, span });
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError {
                        message: format!(
                            "unknown identifier '{name}' (variables: t; constants: e, pi; functions: abs, ln, exp, sqrt, max)"
                        ),
                        span,
                    });
                };
                self.expect(Token::LParen, &format!("'(' after {name}"))?;
                let mut args = vec![self.sum()?];
                while *self.peek() == Token::Comma {
                    self.bump();
                    args.push(self.sum()?);
                }
                let close = self.expect(Token::RParen, "')'")?;
                let full = Span {
                    start: span.start,
                    end: close.end,
                };
                if args.len() != func.arity() {
                    return Err(ParseError {
                        message: format!(
                            "{name} takes {} argument(s), got {}",
                            func.arity(),
                            args.len()
                        ),
                        span: full,
                    });
                }
                Ok(Expr {
                    kind: Kind::Call(func, args),
                    span: full,
                })
            }
            other => Err(ParseError {
                message: format!("expected a number, t, a constant, a function or '(', found {}", describe(&other)),
                span,
            }),
        }
    }
}

fn describe(tok: &Token) -> String {
    match tok {
        Token::Num(v) => format!("number {v}"),
        Token::Ident(s) => format!("'{s}'"),
        Token::Op(c) => format!("'{c}'"),
        Token::LParen => "'('".into(),
        Token::RParen => "')'".into(),
        Token::Comma => "','".into(),
        Token::End => "end of input".into(),
    }
}

pub fn parse_expression(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        tokens: lex(src)?,
        pos: 0,
    };
    let e = p.sum()?;
    if *p.peek() != Token::End {
        return Err(p.error(format!("unexpected {}", describe(p.peek()))));
    }
    Ok(e)
}

impl Expr {
    fn prec(&self) -> u8 {
        match &self.kind {
            Kind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Kind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Kind::Neg(_) => 3,
            Kind::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Num(v) => *v,
            Kind::Var => t,
            Kind::E => std::f64::consts::E,
            Kind::Pi => std::f64::consts::PI,
            Kind::Neg(a) => -a.eval(t),
            Kind::Bin(op, a, b) => {
                let (x, y) = (a.eval(t), b.eval(t));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => pow(x, y),
                }
            }
            Kind::Call(f, args) => {
                let x = args[0].eval(t);
                match f {
                    Func::Abs => x.abs(),
                    Func::Ln => x.ln(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                    Func::Max => x.max(args[1].eval(t)),
                }
            }
        }
    }

    /// Value and one-sided directional derivative `lim_{h->0+} (f(t + h d) - f(t)) / h`
    /// for `d = ±1`. NaN marks a case the rules cannot settle.
    pub fn directional(&self, t: f64, d: f64) -> (f64, f64) {
        match &self.kind {
            Kind::Num(_) | Kind::E | Kind::Pi => (self.eval(t), 0.0),
            Kind::Var => (t, d),
            Kind::Neg(a) => {
                let (v, dv) = a.directional(t, d);
                (-v, -dv)
            }
            Kind::Bin(op, a, b) => {
                let (u, du) = a.directional(t, d);
                let (v, dv) = b.directional(t, d);
                match op {
                    BinOp::Add => (u + v, du + dv),
                    BinOp::Sub => (u - v, du - dv),
                    BinOp::Mul => (u * v, prod(du, v) + prod(u, dv)),
                    BinOp::Div => (u / v, (prod(du, v) - prod(u, dv)) / (v * v)),
                    BinOp::Pow => {
                        let w = pow(u, v);
                        if dv == 0.0 {
                            // u^c: c u^(c-1) u'
                            if du == 0.0 {
                                // u may vanish to higher order, e.g. (t^2)^0.5.
                                (w, if u == 0.0 && v < 1.0 { f64::NAN } else { 0.0 })
                            } else {
                                (w, v * pow(u, v - 1.0) * du)
                            }
                        } else {
                            (w, w * (dv * u.ln() + prod(v, du) / u))
                        }
                    }
                }
            }
            Kind::Call(f, args) => {
                let (u, du) = args[0].directional(t, d);
                match f {
                    Func::Abs => {
                        let s = if u > 0.0 {
                            du
                        } else if u < 0.0 {
                            -du
                        } else {
                            du.abs()
                        };
                        (u.abs(), s)
                    }
                    Func::Ln => (u.ln(), if du == 0.0 { 0.0 } else { du / u }),
                    Func::Exp => {
                        let w = u.exp();
                        (w, prod(w, du))
                    }
                    Func::Sqrt => {
                        let w = u.sqrt();
                        let dw = match (du == 0.0, w == 0.0) {
                            (true, true) => f64::NAN,
                            (true, false) => 0.0,
                            _ => du / (2.0 * w),
                        };
                        (w, dw)
                    }
                    Func::Max => {
                        let (v, dv) = args[1].directional(t, d);
                        if u > v {
                            (u, du)
                        } else if v > u {
                            (v, dv)
                        } else {
                            (u, du.max(dv))
                        }
                    }
                }
            }
        }
    }

    pub fn one_sided_derivative(&self, t: f64, side: Side) -> f64 {
        match side {
            Side::Right => self.directional(t, 1.0).1,
            Side::Left => -self.directional(t, -1.0).1,
        }
    }

    /// Kink candidates: points where an `abs` argument or the two `max`
    /// arguments cross, when those are affine in `t`.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_kinks(&mut out);
        out
    }

    fn collect_kinks(&self, out: &mut Vec<f64>) {
        match &self.kind {
            Kind::Neg(a) => a.collect_kinks(out),
            Kind::Bin(_, a, b) => {
                a.collect_kinks(out);
                b.collect_kinks(out);
            }
            Kind::Call(f, args) => {
                for a in args {
                    a.collect_kinks(out);
                }
                let root = match f {
                    Func::Abs => affine_root(|t| args[0].eval(t)),
                    Func::Max => affine_root(|t| args[0].eval(t) - args[1].eval(t)),
                    _ => None,
                };
                out.extend(root);
            }
            _ => {}
        }
    }
}

/// Root of `g` if `g` looks affine (checked at three points).
fn affine_root(g: impl Fn(f64) -> f64) -> Option<f64> {
    let (g0, g1, g2) = (g(0.0), g(1.0), g(2.0));
    let slope = g1 - g0;
    let affine = ((g2 - g1) - slope).abs() <= 1e-12 * slope.abs().max(g0.abs()).max(1.0);
    if affine && slope != 0.0 && slope.is_finite() {
        Some(-g0 / slope)
    } else {
        None
    }
}

/// Product where an exact zero factor wins over an infinite one.
fn prod(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

fn pow(x: f64, y: f64) -> f64 {
    if y.fract() == 0.0 && y.abs() <= 64.0 {
        x.powi(y as i32)
    } else {
        x.powf(y)
    }
}

fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // Shortest text that reads back to the same f64.
    write!(f, "{v}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, f: &mut fmt::Formatter<'_>, parens: bool| {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match &self.kind {
            Kind::Num(v) => fmt_num(*v, f),
            Kind::Var => f.write_str("t"),
            Kind::E => f.write_str("e"),
            Kind::Pi => f.write_str("pi"),
            Kind::Neg(a) => {
                f.write_str("-")?;
                wrap(a, f, a.prec() < 3)
            }
            Kind::Bin(op, a, b) => {
                let (p, sym) = match op {
                    BinOp::Add => (1, " + "),
                    BinOp::Sub => (1, " - "),
                    BinOp::Mul => (2, "*"),
                    BinOp::Div => (2, "/"),
                    BinOp::Pow => (4, "^"),
                };
                if *op == BinOp::Pow {
                    wrap(a, f, a.prec() < 5)?;
                    f.write_str(sym)?;
                    wrap(b, f, b.prec() < 3)
                } else {
                    wrap(a, f, a.prec() < p)?;
                    f.write_str(sym)?;
                    wrap(b, f, b.prec() <= p)
                }
            }
            Kind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed expression used as a convex function.
#[derive(Debug)]
pub struct ExprOracle {
    expr: Expr,
    fell_back: AtomicBool,
}

impl ExprOracle {
    pub fn new(expr: Expr) -> Self {
        ExprOracle {
            expr,
            fell_back: AtomicBool::new(false),
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// True once some derivative had to be estimated from samples.
    pub fn fell_back(&self) -> bool {
        self.fell_back.load(Ordering::Relaxed)
    }
}

impl ConvexOracle for ExprOracle {
    fn eval(&self, t: f64) -> f64 {
        self.expr.eval(t)
    }

    fn one_sided_derivative(&self, t: f64, side: Side) -> Option<ExtendedReal> {
        let d = self.expr.one_sided_derivative(t, side);
        let v = ExtendedReal::from_f64(d);
        if v.is_none() {
            self.fell_back.store(true, Ordering::Relaxed);
        }
        v
    }

    fn has_closed_form_derivatives(&self) -> bool {
        true
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.expr.kinks()
    }

    fn check_domain(&self, domain: &Interval) -> convex_enclose::Result<()> {
        let n = 257;
        for i in 0..n {
            let t = if i + 1 == n {
                domain.hi()
            } else {
                domain.lo() + domain.width() * i as f64 / (n - 1) as f64
            };
            let v = self.expr.eval(t);
            if !v.is_finite() {
                return Err(convex_enclose::Error::Precondition(format!(
                    "{} is not finite at t = {t} (value {v})",
                    self.expr
                )));
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        self.expr.to_string()
    }
}

/// A parsed expression used as a density. Every construct in the grammar is
/// continuous where finite, so one-sided limits are plain values.
#[derive(Debug)]
pub struct ExprDensity(pub Expr);

impl DensityOracle for ExprDensity {
    fn eval(&self, t: f64) -> f64 {
        self.0.eval(t)
    }

    fn one_sided_limit(&self, t: f64, _side: Side) -> Option<f64> {
        let v = self.0.eval(t);
        v.is_finite().then_some(v)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.0.kinks()
    }

    fn describe(&self) -> String {
        self.0.to_string()
    }
}
