use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{Chart, ExprError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }

    fn from_name(s: &str) -> Option<UnaryOp> {
        Some(match s {
            "neg" => UnaryOp::Neg,
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            _ => return None,
        })
    }

    pub const ALL: [UnaryOp; 6] = [
        UnaryOp::Neg,
        UnaryOp::Sqrt,
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Sin,
        UnaryOp::Cos,
    ];
}

pub(crate) fn is_function_name(s: &str) -> bool {
    UnaryOp::from_name(s).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
        }
    }
}

/// Scalar expression over the coordinates of a [`Chart`].
///
/// Variables carry both their chart position and their name, so trees print
/// without the chart at hand.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize, Arc<str>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    /// Variable `name` of `chart`.
    pub fn var(chart: &Chart, name: &str) -> Result<Expr, ExprError> {
        let i = chart
            .index(name)
            .ok_or_else(|| ExprError::Undeclared(name.to_string()))?;
        Ok(Expr::Var(i, Arc::from(name)))
    }

    /// Variable at chart position `i`.
    pub fn var_at(chart: &Chart, i: usize) -> Expr {
        Expr::Var(i, Arc::from(chart.name(i)))
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn pow(self, p: f64) -> Expr {
        Expr::Pow(Box::new(self), p)
    }

    pub fn sqrt(self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }

    pub fn exp(self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }

    pub fn log(self) -> Expr {
        Expr::unary(UnaryOp::Log, self)
    }

    pub fn sin(self) -> Expr {
        Expr::unary(UnaryOp::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::unary(UnaryOp::Cos, self)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Sum of terms, `0` when empty.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut it = terms.into_iter();
        match it.next() {
            None => Expr::Const(0.0),
            Some(first) => it.fold(first, |acc, t| acc + t),
        }
    }

    /// Chart positions of every variable in the tree.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(i, _) => {
                out.insert(*i);
            }
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i, _) => *i == var,
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.depends_on(var),
            Expr::Binary(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    /// Polynomial degree in `vars` when the tree is syntactically polynomial
    /// in them (coefficients may be arbitrary functions of other variables).
    pub fn polynomial_degree(&self, vars: &[usize]) -> Option<u32> {
        let free = |e: &Expr| !vars.iter().any(|v| e.depends_on(*v));
        match self {
            Expr::Const(_) => Some(0),
            Expr::Var(i, _) => Some(u32::from(vars.contains(i))),
            Expr::Unary(UnaryOp::Neg, a) => a.polynomial_degree(vars),
            Expr::Unary(_, a) => free(a).then_some(0),
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, a, b) => {
                Some(a.polynomial_degree(vars)?.max(b.polynomial_degree(vars)?))
            }
            Expr::Binary(BinaryOp::Mul, a, b) => {
                Some(a.polynomial_degree(vars)? + b.polynomial_degree(vars)?)
            }
            Expr::Binary(BinaryOp::Div, a, b) => {
                if free(b) {
                    a.polynomial_degree(vars)
                } else {
                    None
                }
            }
            Expr::Pow(a, p) => {
                if free(a) {
                    Some(0)
                } else if *p >= 0.0 && p.fract() == 0.0 && *p <= 64.0 {
                    Some(a.polynomial_degree(vars)? * (*p as u32))
                } else {
                    None
                }
            }
        }
    }

    /// True when the tree is syntactically a polynomial of degree at most 2 in `vars`.
    pub fn is_quadratic_in(&self, vars: &[usize]) -> bool {
        matches!(self.polynomial_degree(vars), Some(d) if d <= 2)
    }

    /// Re-targets variables onto `chart` by name.
    pub fn rebind(&self, chart: &Chart) -> Result<Expr, ExprError> {
        Ok(match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(_, n) => Expr::var(chart, n)?,
            Expr::Unary(op, a) => Expr::unary(*op, a.rebind(chart)?),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.rebind(chart)?, b.rebind(chart)?),
            Expr::Pow(a, p) => Expr::Pow(Box::new(a.rebind(chart)?), *p),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // Debug formatting is the shortest representation that round-trips.
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_number(f, *c),
            Expr::Var(_, n) => f.write_str(n),
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                if a.precedence() < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if b.precedence() <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Expr::Pow(a, p) => {
                if a.precedence() <= 3 {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, "^{p:?}")
            }
        }
    }
}

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
    chart: &'a Chart,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, at: usize, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset: at,
            message: msg.into(),
        })
    }

    fn advance(&mut self) -> Result<(), ExprError> {
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
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.')
            {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let mut q = self.pos + 1;
                if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                    q += 1;
                }
                if q < bytes.len() && bytes[q].is_ascii_digit() {
                    while q < bytes.len() && bytes[q].is_ascii_digit() {
                        q += 1;
                    }
                    self.pos = q;
                }
            }
            let text = &self.src[start..self.pos];
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => self.tok = Tok::Num(v),
                _ => return self.err(start, format!("invalid number `{text}`")),
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else if b"+-*/^()".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Sym(c as char);
        } else {
            let ch = self.src[self.pos..].chars().next().unwrap_or('?');
            return self.err(self.pos, format!("unexpected character `{ch}`"));
        }
        Ok(())
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.tok == Tok::Sym(c) {
            self.advance()
        } else {
            self.err(self.tok_start, format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinaryOp::Add,
                Tok::Sym('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinaryOp::Mul,
                Tok::Sym('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if self.tok == Tok::Sym('^') {
            self.advance()?;
            let exp = self.signed_number()?;
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn signed_number(&mut self) -> Result<f64, ExprError> {
        let mut sign = 1.0;
        if self.tok == Tok::Sym('-') {
            sign = -1.0;
            self.advance()?;
        } else if self.tok == Tok::Sym('+') {
            self.advance()?;
        }
        match self.tok {
            Tok::Num(v) => {
                self.advance()?;
                Ok(sign * v)
            }
            _ => self.err(self.tok_start, "expected a number"),
        }
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Const(v))
            }
            Tok::Sym('-') => {
                // unary minus binds looser than '^': -y^2 = -(y^2)
                self.advance()?;
                match self.factor()? {
                    Expr::Const(v) => Ok(Expr::Const(-v)),
                    f => Ok(Expr::unary(UnaryOp::Neg, f)),
                }
            }
            Tok::Sym('(') => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.tok_start;
                self.advance()?;
                if let Some(op) = UnaryOp::from_name(&name) {
                    if self.tok != Tok::Sym('(') {
                        return self.err(self.tok_start, format!("expected `(` after `{name}`"));
                    }
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    Ok(Expr::unary(op, arg))
                } else if self.tok == Tok::Sym('(') {
                    self.err(at, format!("unknown function `{name}`"))
                } else {
                    Expr::var(self.chart, &name)
                }
            }
            Tok::End => self.err(self.tok_start, "unexpected end of input"),
            Tok::Sym(c) => self.err(self.tok_start, format!("unexpected `{c}`")),
        }
    }
}

/// Parses `text` against the coordinates declared in `chart`.
pub fn parse_expr(text: &str, chart: &Chart) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src: text,
        pos: 0,
        tok: Tok::End,
        tok_start: 0,
        chart,
    };
    p.advance()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.err(p.tok_start, "trailing input");
    }
    Ok(e)
}
