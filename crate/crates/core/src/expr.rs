//! A small expression language for user-supplied metrics and maps.
//!
//! Grammar (usual precedence, `^` right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'i' | 'pi' | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers `z`, `zb`, `v`, `vb` optionally followed by a 1-based index
//! (`z2`, `vb1`) are the polarized jet variables; any other identifier must
//! be a bound parameter.

use std::collections::BTreeMap;

use crate::error::{FinslerError, Result};
use crate::scalar::{c64, Scalar, C64};
use crate::wirtinger::{JetField, JetVars, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Atanh,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "atanh" => Func::Atanh,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(C64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str, params: &BTreeMap<String, f64>) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            params,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(FinslerError::Parse(format!(
                "unexpected token {:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(e)
    }

    /// Largest variable index referenced, plus one.
    pub fn dim_hint(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |v| {
            let i = match v {
                Var::Z(i) | Var::Zb(i) | Var::V(i) | Var::Vb(i) => i,
            };
            n = n.max(i + 1);
        });
        n
    }

    pub fn is_holomorphic_in_z(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |v| {
            if !matches!(v, Var::Z(_)) {
                ok = false;
            }
        });
        ok
    }

    fn visit(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(a) | Expr::Call(_, a) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Evaluates over polarized variables. With `conjugate` set, constants
    /// are conjugated and every variable is replaced by its conjugate role,
    /// which evaluates the complex conjugate of the expression.
    pub fn eval_with<S: Scalar>(&self, x: &JetVars<S>, conjugate: bool) -> S {
        match self {
            Expr::Num(c) => S::from_c(if conjugate { c.conj() } else { *c }),
            Expr::Var(v) => {
                let v = if conjugate { v.conjugate() } else { *v };
                match v {
                    Var::Z(i) => x.z[i],
                    Var::Zb(i) => x.zb[i],
                    Var::V(i) => x.v[i],
                    Var::Vb(i) => x.vb[i],
                }
            }
            Expr::Neg(a) => -a.eval_with(x, conjugate),
            Expr::Add(a, b) => a.eval_with(x, conjugate) + b.eval_with(x, conjugate),
            Expr::Sub(a, b) => a.eval_with(x, conjugate) - b.eval_with(x, conjugate),
            Expr::Mul(a, b) => a.eval_with(x, conjugate) * b.eval_with(x, conjugate),
            Expr::Div(a, b) => a.eval_with(x, conjugate) / b.eval_with(x, conjugate),
            Expr::Pow(a, b) => {
                let base = a.eval_with(x, conjugate);
                if let Expr::Num(p) = **b {
                    if p.im == 0.0 {
                        if p.re.fract() == 0.0 && p.re.abs() <= 64.0 {
                            return base.powi(p.re as i32);
                        }
                        return base.powf(p.re);
                    }
                }
                (base.ln() * b.eval_with(x, conjugate)).exp()
            }
            Expr::Call(f, a) => {
                let y = a.eval_with(x, conjugate);
                match f {
                    Func::Exp => y.exp(),
                    Func::Log => y.ln(),
                    Func::Sqrt => y.sqrt(),
                    Func::Sin => y.sin(),
                    Func::Cos => y.cos(),
                    Func::Sinh => y.sinh(),
                    Func::Cosh => y.cosh(),
                    Func::Tanh => y.tanh(),
                    Func::Atanh => y.atanh(),
                }
            }
        }
    }

    /// Symbolic partial derivative.
    pub fn diff(&self, wrt: Var) -> Expr {
        use Expr::*;
        let b = Box::new;
        match self {
            Num(_) => Num(c64(0.0, 0.0)),
            Var(v) => Num(c64(if *v == wrt { 1.0 } else { 0.0 }, 0.0)),
            Neg(a) => Neg(b(a.diff(wrt))),
            Add(x, y) => Add(b(x.diff(wrt)), b(y.diff(wrt))),
            Sub(x, y) => Sub(b(x.diff(wrt)), b(y.diff(wrt))),
            Mul(x, y) => Add(
                b(Mul(b(x.diff(wrt)), y.clone())),
                b(Mul(x.clone(), b(y.diff(wrt)))),
            ),
            Div(x, y) => Div(
                b(Sub(
                    b(Mul(b(x.diff(wrt)), y.clone())),
                    b(Mul(x.clone(), b(y.diff(wrt)))),
                )),
                b(Mul(y.clone(), y.clone())),
            ),
            Pow(x, y) => {
                if let Num(p) = **y {
                    // p x^(p-1) x'
                    Mul(
                        b(Mul(
                            b(Num(p)),
                            b(Pow(x.clone(), b(Num(p - c64(1.0, 0.0))))),
                        )),
                        b(x.diff(wrt)),
                    )
                } else {
                    // x^y (y' ln x + y x'/x)
                    Mul(
                        b(self.clone()),
                        b(Add(
                            b(Mul(b(y.diff(wrt)), b(Call(Func::Log, x.clone())))),
                            b(Div(b(Mul(y.clone(), b(x.diff(wrt)))), x.clone())),
                        )),
                    )
                }
            }
            Call(f, a) => {
                let inner = a.clone();
                let outer = match f {
                    Func::Exp => Call(Func::Exp, inner),
                    Func::Log => Div(b(Num(c64(1.0, 0.0))), inner),
                    Func::Sqrt => Div(b(Num(c64(0.5, 0.0))), b(Call(Func::Sqrt, inner))),
                    Func::Sin => Call(Func::Cos, inner),
                    Func::Cos => Neg(b(Call(Func::Sin, inner))),
                    Func::Sinh => Call(Func::Cosh, inner),
                    Func::Cosh => Call(Func::Sinh, inner),
                    Func::Tanh => Sub(
                        b(Num(c64(1.0, 0.0))),
                        b(Pow(b(Call(Func::Tanh, inner)), b(Num(c64(2.0, 0.0))))),
                    ),
                    Func::Atanh => Div(
                        b(Num(c64(1.0, 0.0))),
                        b(Sub(b(Num(c64(1.0, 0.0))), b(Mul(inner.clone(), inner)))),
                    ),
                };
                Mul(b(outer), b(a.diff(wrt)))
            }
        }
    }
}

impl JetField for Expr {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
        self.eval_with(x, false)
    }
}

#[derive(Clone, Debug, PartialEq)]
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
            let x = s
                .parse::<f64>()
                .map_err(|_| FinslerError::Parse(format!("bad number '{s}'")))?;
            out.push(Tok::Num(x));
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
            return Err(FinslerError::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    params: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(x)) => {
                self.pos += 1;
                Ok(Expr::Num(c64(x, 0.0)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(FinslerError::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(f) = Func::from_name(&name) {
                    if !self.eat('(') {
                        return Err(FinslerError::Parse(format!("expected '(' after {name}")));
                    }
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(FinslerError::Parse("missing ')'".into()));
                    }
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                self.ident(&name)
            }
            other => Err(FinslerError::Parse(format!("unexpected {other:?}"))),
        }
    }

    fn ident(&self, name: &str) -> Result<Expr> {
        if name == "i" {
            return Ok(Expr::Num(c64(0.0, 1.0)));
        }
        if name == "pi" {
            return Ok(Expr::Num(c64(std::f64::consts::PI, 0.0)));
        }
        if let Some(x) = self.params.get(name) {
            return Ok(Expr::Num(c64(*x, 0.0)));
        }
        for (prefix, ctor) in [
            ("zb", Var::Zb as fn(usize) -> Var),
            ("vb", Var::Vb),
            ("z", Var::Z),
            ("v", Var::V),
        ] {
            if let Some(rest) = name.strip_prefix(prefix) {
                if rest.is_empty() {
                    return Ok(Expr::Var(ctor(0)));
                }
                if let Ok(k) = rest.parse::<usize>() {
                    if k >= 1 {
                        return Ok(Expr::Var(ctor(k - 1)));
                    }
                }
            }
        }
        Err(FinslerError::Parse(format!("unknown identifier '{name}'")))
    }
}
