//! Small arithmetic expression language for field functions of `(t, x, y)`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-' unary | atom
//! atom   := number | 't' | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp' | 'tanh'
//! ```
//!
//! `^` is right-associative and its base is a `unary`, so `-2^2` is `(-2)^2`.

use std::fmt;

use thiserror::Error;

use crate::field::ScalarFn;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot evaluate `{node}`: {reason}")]
pub struct EvalError {
    pub node: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "tanh" => Some(Func::Tanh),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        let msg = if p.src[p.pos] == b')' {
            "unbalanced ')'".to_string()
        } else {
            format!("unexpected trailing input {}", p.describe_here())
        };
        return Err(p.error(msg));
    }
    Ok(e)
}

const MAX_DEPTH: usize = 256;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn describe_here(&self) -> String {
        match std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
        {
            Some(c) => format!("'{c}'"),
            None => format!("byte 0x{:02x}", self.src[self.pos]),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let base = self.unary()?;
        let out = if self.eat(b'^') {
            let exp = self.factor()?;
            Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp))
        } else {
            base
        };
        self.depth -= 1;
        Ok(out)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        if c == b'(' {
            let open = self.pos;
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(b')') {
                return Err(self.unclosed(open));
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            return match name {
                "t" => Ok(Expr::Var(Var::T)),
                "x" => Ok(Expr::Var(Var::X)),
                "y" => Ok(Expr::Var(Var::Y)),
                "pi" => Ok(Expr::Pi),
                _ => match Func::lookup(name) {
                    Some(f) => {
                        if !self.eat(b'(') {
                            return Err(self.error(format!("expected '(' after `{name}`")));
                        }
                        let open = self.pos - 1;
                        let arg = self.expr()?;
                        if !self.eat(b')') {
                            return Err(self.unclosed(open));
                        }
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => Err(ParseError {
                        offset: start,
                        message: format!("unknown identifier `{name}`"),
                    }),
                },
            };
        }
        if c == b')' {
            return Err(self.error("unbalanced ')'"));
        }
        Err(self.error(format!("unexpected {}", self.describe_here())))
    }

    fn unclosed(&self, open: usize) -> ParseError {
        if self.pos >= self.src.len() {
            self.error(format!("unbalanced '(' opened at offset {open}"))
        } else {
            self.error(format!("expected ')' to close '(' at offset {open}"))
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(ParseError {
                offset: start,
                message: "malformed number".into(),
            });
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // not an exponent; leave it for the caller to reject
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let v = text.parse::<f64>().map_err(|e| ParseError {
            offset: start,
            message: format!("malformed number `{text}`: {e}"),
        })?;
        if !v.is_finite() {
            return Err(ParseError {
                offset: start,
                message: format!("number `{text}` is out of range"),
            });
        }
        Ok(Expr::Num(v))
    }
}

impl Expr {
    pub fn eval(&self, t: f64, x: f64, y: f64) -> Result<f64, EvalError> {
        let fail = |reason: &str| EvalError {
            node: self.to_string(),
            reason: reason.to_string(),
        };
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(t, x, y)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval(t, x, y)?;
                let b = b.eval(t, x, y)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(fail("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(fail("negative base with non-integer exponent"));
                        }
                        if a == 0.0 && b < 0.0 {
                            return Err(fail("zero raised to a negative power"));
                        }
                        a.powf(b)
                    }
                }
            }
            Expr::Call(f, arg) => {
                let a = arg.eval(t, x, y)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Tanh => a.tanh(),
                }
            }
        };
        if !v.is_finite() {
            return Err(fail("result is not finite"));
        }
        Ok(v)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Bin(BinOp::Pow, ..) => 3,
            Expr::Neg(_) => 4,
            _ => 5,
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool| {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(v) => {
                if *v == v.trunc() && v.abs() < 1e15 {
                    write!(f, "{v:.1}")
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                wrap(f, e, e.precedence() < 4)
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Expr::Bin(op, a, b) => {
                let p = self.precedence();
                let (lp, rp) = match op {
                    // right-associative; the base must be a unary
                    BinOp::Pow => (a.precedence() < 4, b.precedence() < 3),
                    BinOp::Add | BinOp::Mul => (a.precedence() < p, b.precedence() <= p),
                    BinOp::Sub | BinOp::Div => (a.precedence() < p, b.precedence() <= p),
                };
                wrap(f, a, lp)?;
                write!(f, " {} ", op.symbol())?;
                wrap(f, b, rp)
            }
        }
    }
}

impl ScalarFn for Expr {
    fn value(&self, t: f64, x: f64, y: f64) -> Result<f64, String> {
        self.eval(t, x, y).map_err(|e| e.to_string())
    }
}
