//! Small arithmetic expression language with truncated Taylor-series evaluation.
//!
//! Custom problems give `H`, the initial data and boundary data as strings such as
//! `0.5*(u+1)^2` or `sin(-pi - t)`. Evaluating over a [`Jet`] yields the value and the
//! first three derivatives along one direction, which is what the boundary cascades
//! need.

use std::fmt;

use crate::error::{HjError, Result};

/// Degree of the truncated Taylor series.
pub const JET_ORDER: usize = 3;

/// `f(x0 + h) = c[0] + c[1] h + c[2] h^2 + c[3] h^3 + O(h^4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; JET_ORDER + 1],
}

// Truncated Taylor arithmetic; inherent methods keep the call sites explicit.
#[allow(clippy::should_implement_trait)]
impl Jet {
    pub fn constant(v: f64) -> Self {
        Self {
            c: [v, 0.0, 0.0, 0.0],
        }
    }

    /// The independent variable at `x0`, moving with slope `dir`.
    pub fn variable(x0: f64, dir: f64) -> Self {
        Self {
            c: [x0, dir, 0.0, 0.0],
        }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `d^m f / dh^m` at `h = 0`.
    pub fn derivative(&self, m: usize) -> f64 {
        const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
        self.c[m] * FACT[m]
    }

    /// `[f, f', f'', f''']`.
    pub fn derivatives(&self) -> [f64; 4] {
        std::array::from_fn(|m| self.derivative(m))
    }

    fn is_constant(&self) -> bool {
        self.c[1..].iter().all(|&x| x == 0.0)
    }

    fn scale(self, s: f64) -> Self {
        Self {
            c: self.c.map(|x| x * s),
        }
    }

    pub fn add(self, o: Self) -> Self {
        Self {
            c: std::array::from_fn(|k| self.c[k] + o.c[k]),
        }
    }

    pub fn sub(self, o: Self) -> Self {
        Self {
            c: std::array::from_fn(|k| self.c[k] - o.c[k]),
        }
    }

    pub fn neg(self) -> Self {
        self.scale(-1.0)
    }

    pub fn mul(self, o: Self) -> Self {
        let mut c = [0.0; 4];
        for (k, ck) in c.iter_mut().enumerate() {
            for j in 0..=k {
                *ck += self.c[j] * o.c[k - j];
            }
        }
        Self { c }
    }

    pub fn div(self, o: Self) -> Self {
        let mut q = [0.0; 4];
        for k in 0..4 {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * q[k - j];
            }
            q[k] = s / o.c[0];
        }
        Self { c: q }
    }

    pub fn exp(self) -> Self {
        let mut e = [0.0; 4];
        e[0] = self.c[0].exp();
        for k in 1..4 {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Self { c: e }
    }

    pub fn ln(self) -> Self {
        let a0 = self.c[0];
        let mut l = [0.0; 4];
        l[0] = a0.ln();
        for k in 1..4 {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * l[j] * self.c[k - j];
            }
            l[k] = (self.c[k] - s / k as f64) / a0;
        }
        Self { c: l }
    }

    pub fn sin_cos(self) -> (Self, Self) {
        let mut s = [0.0; 4];
        let mut c = [0.0; 4];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..4 {
            let (mut ss, mut cc) = (0.0, 0.0);
            for j in 1..=k {
                ss += j as f64 * self.c[j] * c[k - j];
                cc += j as f64 * self.c[j] * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (Self { c: s }, Self { c })
    }

    pub fn powi(self, n: i32) -> Self {
        if n < 0 {
            return Self::constant(1.0).div(self.powi(-n));
        }
        let mut out = Self::constant(1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// `a^r` for a constant real exponent.
    pub fn powf(self, r: f64) -> Self {
        if r.fract() == 0.0 && r.abs() <= 64.0 {
            return self.powi(r as i32);
        }
        let a0 = self.c[0];
        let mut p = [0.0; 4];
        p[0] = a0.powf(r);
        for k in 1..4 {
            let mut s = 0.0;
            for j in 1..=k {
                s += (r * j as f64 - (k - j) as f64) * self.c[j] * p[k - j];
            }
            p[k] = s / (k as f64 * a0);
        }
        Self { c: p }
    }

    pub fn pow(self, e: Self) -> Self {
        if e.is_constant() {
            self.powf(e.c[0])
        } else {
            e.mul(self.ln()).exp()
        }
    }

    pub fn abs(self) -> Self {
        if self.c[0] < 0.0 {
            self.neg()
        } else {
            self
        }
    }

    /// Piecewise constant; derivatives vanish away from zero.
    pub fn sign(self) -> Self {
        let s = if self.c[0] > 0.0 {
            1.0
        } else if self.c[0] < 0.0 {
            -1.0
        } else {
            0.0
        };
        Self::constant(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sign,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, a: Jet) -> Jet {
        match self {
            Func::Sin => a.sin_cos().0,
            Func::Cos => a.sin_cos().1,
            Func::Tan => {
                let (s, c) = a.sin_cos();
                s.div(c)
            }
            Func::Exp => a.exp(),
            Func::Log => a.ln(),
            Func::Sqrt => a.powf(0.5),
            Func::Abs => a.abs(),
            Func::Sign => a.sign(),
            Func::Sinh => a.exp().sub(a.neg().exp()).scale(0.5),
            Func::Cosh => a.exp().add(a.neg().exp()).scale(0.5),
            Func::Tanh => {
                let e2 = a.scale(2.0).exp();
                e2.sub(Jet::constant(1.0)).div(e2.add(Jet::constant(1.0)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
}

/// A parsed expression over a fixed, ordered set of variable names.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    vars: Vec<String>,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?} in {:?})", self.source, self.vars)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| {
                HjError::Expression(format!("bad number `{text}` at column {}", start + 1))
            })?;
            out.push((start, Tok::Num(v)));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(ch) {
            out.push((i, Tok::Op(ch)));
            i += 1;
        } else {
            return Err(HjError::Expression(format!(
                "unexpected character `{ch}` at column {}",
                i + 1
            )));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn err(&self, msg: &str) -> HjError {
        match self.toks.get(self.pos) {
            Some((col, t)) => {
                HjError::Expression(format!("{msg} near {t:?} at column {}", col + 1))
            }
            None => HjError::Expression(format!("{msg} at end of input")),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn binding_power(op: char) -> Option<(u8, u8)> {
        match op {
            '+' | '-' => Some((1, 2)),
            '*' | '/' => Some((3, 4)),
            '^' => Some((8, 7)),
            _ => None,
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Node> {
        let mut lhs = self.prefix()?;
        while let Some(Tok::Op(c)) = self.peek() {
            let op = *c;
            let Some((l, r)) = Self::binding_power(op) else {
                break;
            };
            if l < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(r)?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Node> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('-') => Ok(Node::Neg(Box::new(self.expr(5)?))),
            Tok::Op('+') => self.expr(5),
            Tok::Op('(') => {
                let inner = self.expr(0)?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if self.peek() == Some(&Tok::Op('(')) {
                    self.pos += 1;
                    let a = self.expr(0)?;
                    if name == "min" || name == "max" {
                        self.expect(',')?;
                        let b = self.expr(0)?;
                        self.expect(')')?;
                        return Ok(if name == "min" {
                            Node::Min(Box::new(a), Box::new(b))
                        } else {
                            Node::Max(Box::new(a), Box::new(b))
                        });
                    }
                    self.expect(')')?;
                    let f = Func::lookup(&name)
                        .ok_or_else(|| HjError::Expression(format!("unknown function `{name}`")))?;
                    return Ok(Node::Call(f, Box::new(a)));
                }
                if let Some(idx) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(idx));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(HjError::Expression(format!(
                        "unknown variable `{name}` (allowed: {})",
                        self.vars.join(", ")
                    ))),
                }
            }
            Tok::Op(c) => {
                self.pos -= 1;
                Err(self.err(&format!("unexpected `{c}`")))
            }
        }
    }
}

impl Expr {
    /// Parses `source`; identifiers other than `vars`, `pi` and `e` are rejected.
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let toks = tokenize(source)?;
        if toks.is_empty() {
            return Err(HjError::Expression("empty expression".into()));
        }
        let mut p = Parser {
            toks,
            pos: 0,
            vars: &vars,
        };
        let root = p.expr(0)?;
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(Self {
            source: source.to_string(),
            vars,
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// Whether variable `var` appears in the expression.
    pub fn uses(&self, var: usize) -> bool {
        fn walk(n: &Node, var: usize) -> bool {
            match n {
                Node::Num(_) => false,
                Node::Var(i) => *i == var,
                Node::Neg(a) | Node::Call(_, a) => walk(a, var),
                Node::Bin(_, a, b) | Node::Min(a, b) | Node::Max(a, b) => {
                    walk(a, var) || walk(b, var)
                }
            }
        }
        walk(&self.root, var)
    }

    /// Evaluates with one jet per variable, in declaration order.
    pub fn eval_jet(&self, args: &[Jet]) -> Jet {
        debug_assert_eq!(args.len(), self.vars.len());
        eval(&self.root, args)
    }

    pub fn eval(&self, args: &[f64]) -> f64 {
        let jets: Vec<Jet> = args.iter().map(|&a| Jet::constant(a)).collect();
        self.eval_jet(&jets).value()
    }

    /// Value and first three derivatives with respect to variable `var`, the others held fixed.
    pub fn derivatives(&self, args: &[f64], var: usize) -> [f64; 4] {
        self.directional(args, &unit(args.len(), var))
    }

    /// Value and derivatives along `args + h * dir`.
    pub fn directional(&self, args: &[f64], dir: &[f64]) -> [f64; 4] {
        let jets: Vec<Jet> = args
            .iter()
            .zip(dir)
            .map(|(&a, &d)| Jet::variable(a, d))
            .collect();
        self.eval_jet(&jets).derivatives()
    }

    /// Second mixed partial `∂_i ∂_j` by polarisation of directional second derivatives.
    pub fn mixed_second(&self, args: &[f64], i: usize, j: usize) -> f64 {
        if i == j {
            return self.derivatives(args, i)[2];
        }
        let mut both = vec![0.0; args.len()];
        both[i] = 1.0;
        both[j] = 1.0;
        let dd = self.directional(args, &both)[2];
        0.5 * (dd - self.derivatives(args, i)[2] - self.derivatives(args, j)[2])
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

fn eval(node: &Node, args: &[Jet]) -> Jet {
    match node {
        Node::Num(v) => Jet::constant(*v),
        Node::Var(i) => args[*i],
        Node::Neg(a) => eval(a, args).neg(),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, args), eval(b, args));
            match op {
                '+' => a.add(b),
                '-' => a.sub(b),
                '*' => a.mul(b),
                '/' => a.div(b),
                '^' => a.pow(b),
                _ => unreachable!("parser only emits arithmetic operators"),
            }
        }
        Node::Call(f, a) => f.apply(eval(a, args)),
        Node::Min(a, b) => {
            let (a, b) = (eval(a, args), eval(b, args));
            if a.value() <= b.value() {
                a
            } else {
                b
            }
        }
        Node::Max(a, b) => {
            let (a, b) = (eval(a, args), eval(b, args));
            if a.value() >= b.value() {
                a
            } else {
                b
            }
        }
    }
}
