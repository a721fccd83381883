//! Closed-form analytic expressions.
//!
//! Grammar: complex literals (`2`, `1.5e-3`, `2i`, `i`), the variable `z`,
//! curve coordinates `w1`..`w9`, `x` for polynomial shorthands, named
//! parameters bound at parse time, `+ - * / ^` (integer exponents), and the
//! functions `exp log sqrt sin cos conj mobius automorph blaschke2 compose`.
//!
//! Expressions evaluate over any [`Scalar`], so the same tree yields plain
//! values, second-order jets and truncated Taylor series.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unexpected character {0:?} at offset {1}")]
    BadChar(char, usize),
    #[error("unexpected token at offset {0}: {1}")]
    Unexpected(usize, String),
    #[error("unknown identifier {0:?}")]
    UnknownIdent(String),
    #[error("function {name} expects {expected} arguments, got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("exponent must be a constant integer")]
    NonIntegerPower,
    #[error("argument {0} of {1} must be constant")]
    NonConstArg(usize, String),
    #[error("unexpected end of input")]
    Eof,
}

/// Number-like types an expression can be evaluated over.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(c: C64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn value(&self) -> C64;

    fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(C64::new(1.0, 0.0));
        }
        let mut base = self.clone();
        let mut e = n.unsigned_abs();
        let mut acc: Option<Self> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a * base.clone(),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        let p = acc.expect("nonzero exponent");
        if n < 0 {
            Self::constant(C64::new(1.0, 0.0)) / p
        } else {
            p
        }
    }
}

impl Scalar for C64 {
    fn constant(c: C64) -> Self {
        c
    }
    fn exp(&self) -> Self {
        C64::exp(*self)
    }
    fn ln(&self) -> Self {
        C64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        C64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        C64::sin(*self)
    }
    fn cos(&self) -> Self {
        C64::cos(*self)
    }
    fn value(&self) -> C64 {
        *self
    }
    fn powi(&self, n: i32) -> Self {
        C64::powi(self, n)
    }
}

/// Truncated Taylor series `c[0] + c[1] h + ... + c[N-1] h^(N-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor<const N: usize>(pub [C64; N]);

impl<const N: usize> Taylor<N> {
    pub fn zero() -> Self {
        Taylor([C64::new(0.0, 0.0); N])
    }

    /// The identity series around `at`: `at + h`.
    pub fn variable(at: C64) -> Self {
        let mut t = Self::zero();
        t.0[0] = at;
        if N > 1 {
            t.0[1] = C64::new(1.0, 0.0);
        }
        t
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> C64 {
        let mut f = 1.0;
        for j in 2..=k {
            f *= j as f64;
        }
        self.0[k] * f
    }
}

impl<const N: usize> Add for Taylor<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for k in 0..N {
            self.0[k] += o.0[k];
        }
        self
    }
}

impl<const N: usize> Sub for Taylor<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for k in 0..N {
            self.0[k] -= o.0[k];
        }
        self
    }
}

impl<const N: usize> Neg for Taylor<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for k in 0..N {
            self.0[k] = -self.0[k];
        }
        self
    }
}

impl<const N: usize> Mul for Taylor<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut r = Self::zero();
        for i in 0..N {
            if self.0[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..N - i {
                r.0[i + j] += self.0[i] * o.0[j];
            }
        }
        r
    }
}

impl<const N: usize> Div for Taylor<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let mut q = Self::zero();
        let b0 = o.0[0];
        for n in 0..N {
            let mut s = self.0[n];
            for k in 1..=n {
                s -= o.0[k] * q.0[n - k];
            }
            q.0[n] = s / b0;
        }
        q
    }
}

impl<const N: usize> Taylor<N> {
    fn sin_cos(&self) -> (Self, Self) {
        let mut s = Self::zero();
        let mut c = Self::zero();
        s.0[0] = self.0[0].sin();
        c.0[0] = self.0[0].cos();
        for n in 1..N {
            let mut ss = C64::new(0.0, 0.0);
            let mut cc = C64::new(0.0, 0.0);
            for k in 1..=n {
                let kf = self.0[k] * k as f64;
                ss += kf * c.0[n - k];
                cc -= kf * s.0[n - k];
            }
            s.0[n] = ss / n as f64;
            c.0[n] = cc / n as f64;
        }
        (s, c)
    }
}

impl<const N: usize> Scalar for Taylor<N> {
    fn constant(c: C64) -> Self {
        let mut t = Self::zero();
        t.0[0] = c;
        t
    }
    fn exp(&self) -> Self {
        let mut e = Self::zero();
        e.0[0] = self.0[0].exp();
        for n in 1..N {
            let mut s = C64::new(0.0, 0.0);
            for k in 1..=n {
                s += self.0[k] * e.0[n - k] * k as f64;
            }
            e.0[n] = s / n as f64;
        }
        e
    }
    fn ln(&self) -> Self {
        let mut l = Self::zero();
        let f0 = self.0[0];
        l.0[0] = f0.ln();
        for n in 1..N {
            let mut s = C64::new(0.0, 0.0);
            for k in 1..n {
                s += l.0[k] * self.0[n - k] * k as f64;
            }
            l.0[n] = (self.0[n] - s / n as f64) / f0;
        }
        l
    }
    fn sqrt(&self) -> Self {
        let mut r = Self::zero();
        r.0[0] = self.0[0].sqrt();
        for n in 1..N {
            let mut s = self.0[n];
            for k in 1..n {
                s -= r.0[k] * r.0[n - k];
            }
            r.0[n] = s / (r.0[0] * 2.0);
        }
        r
    }
    fn sin(&self) -> Self {
        self.sin_cos().0
    }
    fn cos(&self) -> Self {
        self.sin_cos().1
    }
    fn value(&self) -> C64 {
        self.0[0]
    }
}

/// Value, first and second derivative.
pub type Jet = Taylor<3>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Conj,
    Mobius,
    Automorph,
    Blaschke2,
    Compose,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "exp" => (Func::Exp, 1),
            "log" => (Func::Log, 1),
            "sqrt" => (Func::Sqrt, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "conj" => (Func::Conj, 1),
            "mobius" => (Func::Mobius, 5),
            "automorph" => (Func::Automorph, 2),
            "blaschke2" => (Func::Blaschke2, 2),
            "compose" => (Func::Compose, 2),
            _ => return None,
        })
    }
}

/// Variable slots: `z` is 0, `w1..w9` are 1..9, `x` is 10.
pub const VAR_Z: usize = 0;
pub const VAR_X: usize = 10;
pub const NUM_VARS: usize = 11;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(C64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Vec<Node>),
}

impl Node {
    fn uses_var(&self, v: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(u) => *u == v,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.uses_var(v) || b.uses_var(v),
            Node::Neg(a) | Node::Pow(a, _) => a.uses_var(v),
            Node::Call(Func::Compose, args) => {
                (v != VAR_Z && args[0].uses_var(v)) || (args[0].uses_var(VAR_Z) && args[1].uses_var(v))
            }
            Node::Call(_, args) => args.iter().any(|a| a.uses_var(v)),
        }
    }

    fn is_const(&self) -> bool {
        (0..NUM_VARS).all(|v| !self.uses_var(v))
    }

    fn const_value(&self) -> C64 {
        let vars = [C64::new(0.0, 0.0); NUM_VARS];
        eval_node::<C64>(self, &vars)
    }

    /// Degree at most one in `z` (symbolic check, conservative).
    fn affine_in_z(&self) -> bool {
        match self {
            Node::Const(_) | Node::Var(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) => a.affine_in_z() && b.affine_in_z(),
            Node::Neg(a) => a.affine_in_z(),
            Node::Mul(a, b) => (a.is_const() && b.affine_in_z()) || (b.is_const() && a.affine_in_z()),
            Node::Div(a, b) => b.is_const() && a.affine_in_z(),
            Node::Pow(a, n) => a.is_const() || *n == 0 || (*n == 1 && a.affine_in_z()),
            Node::Call(Func::Mobius, args) => {
                args[..4].iter().all(|a| a.is_const()) && args[2].const_value() == C64::new(0.0, 0.0) && args[4].affine_in_z()
            }
            Node::Call(Func::Compose, args) => args[0].affine_in_z() && args[1].affine_in_z(),
            Node::Call(_, args) => args.iter().all(|a| a.is_const()),
        }
    }
}

fn eval_node<T: Scalar>(n: &Node, vars: &[T]) -> T {
    match n {
        Node::Const(c) => T::constant(*c),
        Node::Var(v) => vars[*v].clone(),
        Node::Add(a, b) => eval_node(a, vars) + eval_node(b, vars),
        Node::Sub(a, b) => eval_node(a, vars) - eval_node(b, vars),
        Node::Mul(a, b) => eval_node(a, vars) * eval_node(b, vars),
        Node::Div(a, b) => eval_node(a, vars) / eval_node(b, vars),
        Node::Neg(a) => -eval_node(a, vars),
        Node::Pow(a, k) => eval_node(a, vars).powi(*k),
        Node::Call(f, args) => {
            let one = T::constant(C64::new(1.0, 0.0));
            match f {
                Func::Exp => eval_node(&args[0], vars).exp(),
                Func::Log => eval_node(&args[0], vars).ln(),
                Func::Sqrt => eval_node(&args[0], vars).sqrt(),
                Func::Sin => eval_node(&args[0], vars).sin(),
                Func::Cos => eval_node(&args[0], vars).cos(),
                Func::Conj => T::constant(args[0].const_value().conj()),
                Func::Mobius => {
                    let w = eval_node(&args[4], vars);
                    let a = eval_node(&args[0], vars);
                    let b = eval_node(&args[1], vars);
                    let c = eval_node(&args[2], vars);
                    let d = eval_node(&args[3], vars);
                    (a * w.clone() + b) / (c * w + d)
                }
                Func::Automorph => {
                    let a = args[0].const_value();
                    let w = eval_node(&args[1], vars);
                    (w.clone() - T::constant(a)) / (one - T::constant(a.conj()) * w)
                }
                Func::Blaschke2 => {
                    let a = blaschke2_zero(args[0].const_value());
                    let w = eval_node(&args[1], vars);
                    w.clone() * (w.clone() - T::constant(a)) / (one - T::constant(a.conj()) * w)
                }
                Func::Compose => {
                    let inner = eval_node(&args[1], vars);
                    let mut v2: Vec<T> = vars.to_vec();
                    v2[VAR_Z] = inner;
                    eval_node(&args[0], &v2)
                }
            }
        }
    }
}

/// Nonzero root `a` of `w (w - a) / (1 - conj(a) w)` that puts its critical
/// point at `c` (|c| < 1).
pub fn blaschke2_zero(c: C64) -> C64 {
    c * 2.0 / (1.0 + c.norm_sqr())
}

/// A parsed expression with its source text.
#[derive(Clone, Debug)]
pub struct Expr {
    src: String,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, o: &Self) -> bool {
        self.root == o.root
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        Self::parse_with(src, &[])
    }

    /// Parse, binding extra identifiers to constants.
    pub fn parse_with(src: &str, params: &[(&str, C64)]) -> Result<Self, ExprError> {
        let toks = lex(src)?;
        let mut p = Parser { toks, pos: 0, params };
        let root = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(ExprError::Unexpected(p.toks[p.pos].1, format!("{:?}", p.toks[p.pos].0)));
        }
        Ok(Expr { src: src.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn eval_vars<T: Scalar>(&self, vars: &[T]) -> T {
        eval_node(&self.root, vars)
    }

    /// Evaluate as a function of `z` alone.
    pub fn eval<T: Scalar>(&self, z: T) -> T {
        let mut vars: Vec<T> = vec![T::constant(C64::new(0.0, 0.0)); NUM_VARS];
        vars[VAR_Z] = z;
        eval_node(&self.root, &vars)
    }

    /// Evaluate as a function of the curve coordinates `w1..wn`.
    pub fn eval_curve<T: Scalar>(&self, w: &[T]) -> T {
        let mut vars: Vec<T> = vec![T::constant(C64::new(0.0, 0.0)); NUM_VARS];
        for (k, wk) in w.iter().enumerate().take(9) {
            vars[k + 1] = wk.clone();
        }
        eval_node(&self.root, &vars)
    }

    pub fn uses_z(&self) -> bool {
        self.root.uses_var(VAR_Z)
    }

    /// Highest curve coordinate referenced (`w3` gives 3), 0 if none.
    pub fn curve_arity(&self) -> usize {
        (1..=9).rev().find(|&k| self.root.uses_var(k)).unwrap_or(0)
    }

    pub fn is_affine_in_z(&self) -> bool {
        self.root.affine_in_z()
    }

    pub fn is_constant(&self) -> bool {
        self.root.is_const()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && i + 1 < b.len() && (b[i + 1] as char).is_ascii_digit()) {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let save = i;
                i += 1;
                if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
                    i += 1;
                }
                if i < b.len() && (b[i] as char).is_ascii_digit() {
                    while i < b.len() && (b[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let v: f64 = src[start..i].parse().map_err(|_| ExprError::BadChar(c, start))?;
            let imag = i < b.len() && b[i] == b'i' && !(i + 1 < b.len() && ((b[i + 1] as char).is_ascii_alphanumeric() || b[i + 1] == b'_'));
            if imag {
                i += 1;
                out.push((Tok::Imag(v), start));
            } else {
                out.push((Tok::Num(v), start));
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ExprError::BadChar(c, i));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    params: &'a [(&'a str, C64)],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(usize::MAX)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else if self.pos >= self.toks.len() {
            Err(ExprError::Eof)
        } else {
            Err(ExprError::Unexpected(self.offset(), format!("expected {c:?}")))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.eat('^') {
            let e = self.unary()?;
            if !e.is_const() {
                return Err(ExprError::NonIntegerPower);
            }
            let v = e.const_value();
            if v.im != 0.0 || v.re.fract() != 0.0 || v.re.abs() > 64.0 {
                return Err(ExprError::NonIntegerPower);
            }
            return Ok(Node::Pow(Box::new(base), v.re as i32));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let off = self.offset();
        let tok = self.toks.get(self.pos).cloned().ok_or(ExprError::Eof)?.0;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Const(C64::new(v, 0.0))),
            Tok::Imag(v) => Ok(Node::Const(C64::new(0.0, v))),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some((f, arity)) = Func::lookup(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(ExprError::Arity { name, expected: arity, got: args.len() });
                    }
                    let const_args: &[usize] = match f {
                        Func::Conj => &[0],
                        Func::Automorph | Func::Blaschke2 => &[0],
                        _ => &[],
                    };
                    for &k in const_args {
                        if !args[k].is_const() {
                            return Err(ExprError::NonConstArg(k, name));
                        }
                    }
                    return Ok(Node::Call(f, args));
                }
                match name.as_str() {
                    "z" => Ok(Node::Var(VAR_Z)),
                    "x" => Ok(Node::Var(VAR_X)),
                    "i" => Ok(Node::Const(C64::new(0.0, 1.0))),
                    "pi" => Ok(Node::Const(C64::new(std::f64::consts::PI, 0.0))),
                    _ => {
                        if let Some(k) = name.strip_prefix('w').and_then(|s| s.parse::<usize>().ok()) {
                            if (1..=9).contains(&k) {
                                return Ok(Node::Var(k));
                            }
                        }
                        self.params
                            .iter()
                            .find(|(p, _)| *p == name)
                            .map(|(_, v)| Node::Const(*v))
                            .ok_or(ExprError::UnknownIdent(name))
                    }
                }
            }
            Tok::Op(c) => Err(ExprError::Unexpected(off, format!("{c:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn literals_and_precedence() {
        let e = Expr::parse("1 + 2*3^2 - 4/2").unwrap();
        assert_eq!(e.eval(c(0.0, 0.0)), c(17.0, 0.0));
        let e = Expr::parse("2i*i").unwrap();
        assert_eq!(e.eval(c(0.0, 0.0)), c(-2.0, 0.0));
        let e = Expr::parse("-z^2").unwrap();
        assert_eq!(e.eval(c(3.0, 0.0)), c(-9.0, 0.0));
        let e = Expr::parse("1.5e-1 + 1e2i").unwrap();
        assert_eq!(e.eval(c(0.0, 0.0)), c(0.15, 100.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(Expr::parse("z^z"), Err(ExprError::NonIntegerPower)));
        assert!(matches!(Expr::parse("q + 1"), Err(ExprError::UnknownIdent(_))));
        assert!(matches!(Expr::parse("exp(z, 1)"), Err(ExprError::Arity { .. })));
        assert!(matches!(Expr::parse("(z"), Err(ExprError::Eof)));
        assert!(matches!(Expr::parse("z $ 1"), Err(ExprError::BadChar('$', 2))));
        assert!(matches!(Expr::parse("automorph(z, z)"), Err(ExprError::NonConstArg(0, _))));
    }

    #[test]
    fn params_and_curve_vars() {
        let e = Expr::parse_with("w1*w2 + eps", &[("eps", c(0.5, 0.0))]).unwrap();
        assert_eq!(e.curve_arity(), 2);
        assert!(!e.uses_z());
        assert_eq!(e.eval_curve(&[c(2.0, 0.0), c(3.0, 0.0)]), c(6.5, 0.0));
    }

    #[test]
    fn mobius_and_compose() {
        let e = Expr::parse("mobius(1, 0.5, 0, 1.2, z)").unwrap();
        assert!((e.eval(c(0.7, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        let e = Expr::parse("compose(z^2, (z+0.5)/1.2)").unwrap();
        assert!((e.eval(c(0.7, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(!e.is_affine_in_z());
    }

    #[test]
    fn affine_detection() {
        for s in ["(z+0.5)/1.2", "mobius(1,-0.5,0,1.2,z)", "2*z - 3i", "compose(3*z, z+1)", "z*2/4"] {
            assert!(Expr::parse(s).unwrap().is_affine_in_z(), "{s}");
        }
        for s in ["z^2", "exp(z)", "1/(z-3)", "mobius(1,0,1,2,z)", "z*z"] {
            assert!(!Expr::parse(s).unwrap().is_affine_in_z(), "{s}");
        }
    }

    #[test]
    fn taylor_exp_log_sqrt_sin() {
        let z0 = c(0.3, -0.2);
        let t = Taylor::<8>::variable(z0);
        let e = t.exp();
        let mut fact = 1.0;
        for k in 0..8 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((e.0[k] - z0.exp() / fact).norm() < 1e-14);
        }
        let back = e.ln();
        assert!((back.0[0] - z0).norm() < 1e-14);
        assert!((back.0[1] - c(1.0, 0.0)).norm() < 1e-14);
        for k in 2..8 {
            assert!(back.0[k].norm() < 1e-13);
        }
        let s = t.sqrt();
        let sq = s * s;
        for k in 0..8 {
            assert!((sq.0[k] - t.0[k]).norm() < 1e-14);
        }
        let (sn, cs) = t.sin_cos();
        let one = sn * sn + cs * cs;
        assert!((one.0[0] - c(1.0, 0.0)).norm() < 1e-14);
        for k in 1..8 {
            assert!(one.0[k].norm() < 1e-13);
        }
    }

    #[test]
    fn blaschke2_critical_point() {
        let cpt = c(0.2, 0.1);
        let e = Expr::parse("blaschke2(0.2 + 0.1i, z)").unwrap();
        let j = e.eval(Jet::variable(cpt));
        assert!(j.0[1].norm() < 1e-15);
        assert!(j.0[2].norm() > 0.1);
        // unimodular on the circle
        for k in 0..16 {
            let w = C64::from_polar(1.0, k as f64 * 0.4);
            assert!((e.eval(w).norm() - 1.0).abs() < 1e-14);
        }
    }
}
