//! Expression grammar for custom problems with exact symbolic differentiation.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | exp | ln
//! ```

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
    Ln(Arc<Expr>),
}

type E = Arc<Expr>;

fn num(v: f64) -> E {
    Arc::new(Expr::Num(v))
}

fn as_num(e: &Expr) -> Option<f64> {
    if let Expr::Num(v) = e {
        Some(*v)
    } else {
        None
    }
}

fn add(a: E, b: E) -> E {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Expr::Add(a, b)),
    }
}

fn sub(a: E, b: E) -> E {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Expr::Sub(a, b)),
    }
}

fn mul(a: E, b: E) -> E {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => num(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Expr::Mul(a, b)),
    }
}

fn div(a: E, b: E) -> E {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) if y != 0.0 => num(x / y),
        (Some(x), _) if x == 0.0 => num(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Expr::Div(a, b)),
    }
}

fn neg(a: E) -> E {
    match &*a {
        Expr::Num(x) => num(-x),
        Expr::Neg(inner) => inner.clone(),
        _ => Arc::new(Expr::Neg(a)),
    }
}

fn pow(a: E, b: E) -> E {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(pow_eval(x, y)),
        (_, Some(y)) if y == 0.0 => num(1.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Expr::Pow(a, b)),
    }
}

fn pow_eval(x: f64, y: f64) -> f64 {
    if y.fract() == 0.0 && y.abs() < 1024.0 {
        x.powi(y as i32)
    } else {
        x.powf(y)
    }
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => vars[*i],
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Pow(a, b) => pow_eval(a.eval(vars), b.eval(vars)),
            Expr::Sin(a) => a.eval(vars).sin(),
            Expr::Cos(a) => a.eval(vars).cos(),
            Expr::Exp(a) => a.eval(vars).exp(),
            Expr::Ln(a) => a.eval(vars).ln(),
        }
    }

    /// Symbolic partial derivative with respect to variable `v`.
    pub fn diff(self: &Arc<Self>, v: usize) -> E {
        match &**self {
            Expr::Num(_) => num(0.0),
            Expr::Var(i) => num(if *i == v { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.diff(v), b.diff(v)),
            Expr::Sub(a, b) => sub(a.diff(v), b.diff(v)),
            Expr::Mul(a, b) => add(mul(a.diff(v), b.clone()), mul(a.clone(), b.diff(v))),
            Expr::Div(a, b) => div(
                sub(mul(a.diff(v), b.clone()), mul(a.clone(), b.diff(v))),
                pow(b.clone(), num(2.0)),
            ),
            Expr::Neg(a) => neg(a.diff(v)),
            Expr::Pow(a, b) => {
                if let Some(n) = as_num(b) {
                    mul(mul(num(n), pow(a.clone(), num(n - 1.0))), a.diff(v))
                } else {
                    // a^b (b' ln a + b a'/a)
                    let t1 = mul(b.diff(v), Arc::new(Expr::Ln(a.clone())));
                    let t2 = div(mul(b.clone(), a.diff(v)), a.clone());
                    mul(self.clone(), add(t1, t2))
                }
            }
            Expr::Sin(a) => mul(Arc::new(Expr::Cos(a.clone())), a.diff(v)),
            Expr::Cos(a) => neg(mul(Arc::new(Expr::Sin(a.clone())), a.diff(v))),
            Expr::Exp(a) => mul(self.clone(), a.diff(v)),
            Expr::Ln(a) => div(a.diff(v), a.clone()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "v{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| Error::Expression(format!("bad number '{s}'")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<E> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                let r = self.term()?;
                lhs = Arc::new(Expr::Add(lhs, r));
            } else if self.eat('-') {
                let r = self.term()?;
                lhs = Arc::new(Expr::Sub(lhs, r));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<E> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                let r = self.unary()?;
                lhs = Arc::new(Expr::Mul(lhs, r));
            } else if self.eat('/') {
                let r = self.unary()?;
                lhs = Arc::new(Expr::Div(lhs, r));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<E> {
        if self.eat('-') {
            Ok(Arc::new(Expr::Neg(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<E> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.unary()?;
            Ok(Arc::new(Expr::Pow(base, e)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<E> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(num(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Expression("missing ')'".into()));
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Arc::new(Expr::Var(i)));
                }
                if name == "pi" {
                    return Ok(num(std::f64::consts::PI));
                }
                let ctor: fn(E) -> Expr = match name.as_str() {
                    "sin" => Expr::Sin,
                    "cos" => Expr::Cos,
                    "exp" => Expr::Exp,
                    "ln" => Expr::Ln,
                    _ => return Err(Error::Expression(format!("unknown name '{name}'"))),
                };
                if !self.eat('(') {
                    return Err(Error::Expression(format!("expected '(' after {name}")));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Expression("missing ')'".into()));
                }
                Ok(Arc::new(ctor(arg)))
            }
            Some(t) => Err(Error::Expression(format!("unexpected token {t:?}"))),
            None => Err(Error::Expression("unexpected end of expression".into())),
        }
    }
}

/// Parse `src` over the named variables.
pub fn parse(src: &str, vars: &[&str]) -> Result<Arc<Expr>> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(Error::Expression("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0, vars };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Expression(format!("trailing input in '{src}'")));
    }
    Ok(e)
}
