//! Metric-component expressions: parsing, printing and evaluation.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | identifier | identifier "(" expr ")" | "(" expr ")" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ exponent ] ;
//! ```
//!
//! `^` binds tighter than unary minus (`-x^2` is `-(x^2)`) and is right
//! associative. Identifiers resolve to a declared coordinate, then a declared
//! parameter, then the constant `pi`. The functions are exactly `sin cos tan
//! exp log sqrt sinh cosh tanh atan`; non-smooth functions are rejected.

use std::fmt;

use thiserror::Error;

use crate::jet::{Jet, JetError};

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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Atan,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Atan => "atan",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

const NON_SMOOTH: [&str; 8] = ["abs", "sign", "sgn", "floor", "ceil", "round", "min", "max"];

/// Expression tree. Symbols carry their resolved slot and their name.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord { index: usize, name: String },
    Param { index: usize, name: String },
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { func: Func, arg: Box<Expr> },
}

/// Names an expression may refer to.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Symbols {
    pub coordinates: Vec<String>,
    pub parameters: Vec<String>,
}

impl Symbols {
    pub fn new(coordinates: &[&str], parameters: &[&str]) -> Symbols {
        Symbols {
            coordinates: coordinates.iter().map(|s| s.to_string()).collect(),
            parameters: parameters.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function '{name}' at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("non-smooth function '{name}' at offset {offset} is not supported")]
    NonSmooth { name: String, offset: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{function} undefined at {value} in '{subexpr}'")]
    Domain { function: &'static str, value: f64, subexpr: String },
    #[error("division by zero in '{subexpr}'")]
    DivisionByZero { subexpr: String },
    #[error("expression needs {needed} coordinate values, got {got}")]
    Arity { needed: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
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
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number '{s}'"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if b"+-*/^()".contains(&c) {
            out.push((Tok::Sym(c as char), i));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError::Syntax { offset: i, message: format!("unexpected character '{ch}'") });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    symbols: &'a Symbols,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax { offset: self.offset(), message: format!("expected '{c}'") })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(match self.unary()? {
                    Expr::Const(c) => Expr::Const(-c),
                    e => Expr::Neg(Box::new(e)),
                })
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary { op: BinOp::Pow, lhs: Box::new(base), rhs: Box::new(exp) });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Sym('(') {
                    let func = match Func::from_name(&name) {
                        Some(f) => f,
                        None if NON_SMOOTH.contains(&name.as_str()) => {
                            return Err(ParseError::NonSmooth { name, offset })
                        }
                        None => return Err(ParseError::UnknownFunction { name, offset }),
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call { func, arg: Box::new(arg) });
                }
                if let Some(index) = self.symbols.coordinates.iter().position(|c| *c == name) {
                    Ok(Expr::Coord { index, name })
                } else if let Some(index) = self.symbols.parameters.iter().position(|c| *c == name) {
                    Ok(Expr::Param { index, name })
                } else if name == "pi" {
                    Ok(Expr::Const(std::f64::consts::PI))
                } else {
                    Err(ParseError::UnknownIdentifier { name, offset })
                }
            }
            Tok::End => Err(ParseError::Syntax { offset, message: "unexpected end of input".into() }),
            Tok::Sym(c) => Err(ParseError::Syntax { offset, message: format!("unexpected '{c}'") }),
        }
    }
}

/// Parse `text` against the declared `symbols`.
pub fn parse(text: &str, symbols: &Symbols) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, symbols };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::Syntax { offset: p.offset(), message: "unexpected trailing input".into() });
    }
    Ok(e)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "({c:?})"),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Coord { name, .. } | Expr::Param { name, .. } => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Expr::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    /// True when no coordinate symbol occurs in the tree.
    pub fn is_coordinate_free(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Param { .. } => true,
            Expr::Coord { .. } => false,
            Expr::Neg(e) | Expr::Call { arg: e, .. } => e.is_coordinate_free(),
            Expr::Binary { lhs, rhs, .. } => lhs.is_coordinate_free() && rhs.is_coordinate_free(),
        }
    }

    /// True for the literal constant zero.
    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn max_coordinate_index(&self) -> Option<usize> {
        match self {
            Expr::Coord { index, .. } => Some(*index),
            Expr::Const(_) | Expr::Param { .. } => None,
            Expr::Neg(e) | Expr::Call { arg: e, .. } => e.max_coordinate_index(),
            Expr::Binary { lhs, rhs, .. } => lhs.max_coordinate_index().max(rhs.max_coordinate_index()),
        }
    }

    /// Plain floating-point evaluation.
    pub fn eval(&self, point: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Coord { index, .. } => *point
                .get(*index)
                .ok_or(EvalError::Arity { needed: index + 1, got: point.len() })?,
            Expr::Param { index, .. } => params[*index],
            Expr::Neg(e) => -e.eval(point, params)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval(point, params)?;
                let b = rhs.eval(point, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero { subexpr: self.to_string() });
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if b.fract() == 0.0 && b.abs() < 1e9 {
                            if a == 0.0 && b < 0.0 {
                                return Err(EvalError::DivisionByZero { subexpr: self.to_string() });
                            }
                            a.powi(b as i32)
                        } else if a > 0.0 {
                            a.powf(b)
                        } else {
                            return Err(self.domain("pow", a));
                        }
                    }
                }
            }
            Expr::Call { func, arg } => {
                let x = arg.eval(point, params)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => {
                        if x.cos() == 0.0 {
                            return Err(self.domain("tan", x));
                        }
                        x.tan()
                    }
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if !(x > 0.0) {
                            return Err(self.domain("log", x));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if !(x > 0.0) {
                            return Err(self.domain("sqrt", x));
                        }
                        x.sqrt()
                    }
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Atan => x.atan(),
                }
            }
        })
    }

    fn domain(&self, function: &'static str, value: f64) -> EvalError {
        EvalError::Domain { function, value, subexpr: self.to_string() }
    }

    fn lift(&self, e: JetError) -> EvalError {
        match e {
            JetError::DivisionByZero => EvalError::DivisionByZero { subexpr: self.to_string() },
            JetError::Domain { function, value } => self.domain(function, value),
        }
    }

    /// Jet of the expression at `point`, with every coordinate a jet variable.
    pub fn eval_jet(&self, point: &[f64], params: &[f64], order: usize) -> Result<Jet, EvalError> {
        let n = point.len();
        let vars: Vec<Jet> = (0..n).map(|i| Jet::variable(n, order, i, point[i])).collect();
        self.eval_jet_with(&vars, params)
    }

    /// Jet of the expression with coordinate `i` replaced by the jet `vars[i]`.
    pub fn eval_jet_with(&self, vars: &[Jet], params: &[f64]) -> Result<Jet, EvalError> {
        let template = vars.first().expect("at least one coordinate jet");
        Ok(match self {
            Expr::Const(c) => template.constant_like(*c),
            Expr::Coord { index, .. } => vars
                .get(*index)
                .ok_or(EvalError::Arity { needed: index + 1, got: vars.len() })?
                .clone(),
            Expr::Param { index, .. } => template.constant_like(params[*index]),
            Expr::Neg(e) => -e.eval_jet_with(vars, params)?,
            Expr::Binary { op: BinOp::Pow, lhs, rhs } if rhs.is_coordinate_free() => {
                let base = lhs.eval_jet_with(vars, params)?;
                let r = rhs.eval(&[], params).map_err(|e| match e {
                    EvalError::Arity { .. } => unreachable!("coordinate-free exponent"),
                    other => other,
                })?;
                base.powf(r).map_err(|e| self.lift(e))?
            }
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval_jet_with(vars, params)?;
                let b = rhs.eval_jet_with(vars, params)?;
                match op {
                    BinOp::Add => &a + &b,
                    BinOp::Sub => &a - &b,
                    BinOp::Mul => &a * &b,
                    BinOp::Div => a.try_div(&b).map_err(|e| self.lift(e))?,
                    BinOp::Pow => {
                        if !(a.value() > 0.0) {
                            return Err(self.domain("pow", a.value()));
                        }
                        let la = a.ln().map_err(|e| self.lift(e))?;
                        (&b * &la).exp()
                    }
                }
            }
            Expr::Call { func, arg } => {
                let x = arg.eval_jet_with(vars, params)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan().map_err(|e| self.lift(e))?,
                    Func::Exp => x.exp(),
                    Func::Log => x.ln().map_err(|e| self.lift(e))?,
                    Func::Sqrt => x.sqrt().map_err(|e| self.lift(e))?,
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Atan => x.atan(),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn xy() -> Symbols {
        Symbols::new(&["x", "y"], &[])
    }

    #[test]
    fn sum_of_power_and_sine() {
        let e = parse("x^2 + sin(y)", &xy()).unwrap();
        let x = Expr::Coord { index: 0, name: "x".into() };
        let y = Expr::Coord { index: 1, name: "y".into() };
        let want = Expr::Binary {
            op: BinOp::Add,
            lhs: Box::new(Expr::Binary { op: BinOp::Pow, lhs: Box::new(x), rhs: Box::new(Expr::Const(2.0)) }),
            rhs: Box::new(Expr::Call { func: Func::Sin, arg: Box::new(y) }),
        };
        assert_eq!(e, want);
    }

    #[test]
    fn incomplete_product_reports_offset() {
        assert_eq!(
            parse("2*", &xy()).unwrap_err(),
            ParseError::Syntax { offset: 2, message: "unexpected end of input".into() }
        );
    }

    #[test]
    fn negated_parameter_expression() {
        let s = Symbols::new(&["t", "r"], &["m"]);
        let e = parse("-(1-2*m/r)", &s).unwrap();
        assert!(matches!(e, Expr::Neg(_)));
        assert_relative_eq!(e.eval(&[0.0, 5.0], &[1.0]).unwrap(), -0.6);
    }

    #[test]
    fn precedence_of_power_and_unary_minus() {
        let s = xy();
        assert_eq!(parse("-x^2", &s).unwrap().eval(&[3.0, 0.0], &[]).unwrap(), -9.0);
        assert_eq!(parse("2^-1", &s).unwrap().eval(&[0.0, 0.0], &[]).unwrap(), 0.5);
        assert_eq!(parse("2^3^2", &s).unwrap().eval(&[0.0, 0.0], &[]).unwrap(), 512.0);
        assert_eq!(parse("8/2/2", &s).unwrap().eval(&[0.0, 0.0], &[]).unwrap(), 2.0);
        assert_eq!(parse("1-2-3", &s).unwrap().eval(&[0.0, 0.0], &[]).unwrap(), -4.0);
        assert_eq!(parse("2*-3", &s).unwrap().eval(&[0.0, 0.0], &[]).unwrap(), -6.0);
        assert_relative_eq!(parse("pi", &s).unwrap().eval(&[0.0, 0.0], &[]).unwrap(), std::f64::consts::PI);
        assert_eq!(parse("1.5e2 + .5", &s).unwrap().eval(&[0.0, 0.0], &[]).unwrap(), 150.5);
    }

    #[test]
    fn symbol_and_function_errors() {
        let s = xy();
        assert_eq!(
            parse("x + q", &s).unwrap_err(),
            ParseError::UnknownIdentifier { name: "q".into(), offset: 4 }
        );
        assert_eq!(parse("foo(x)", &s).unwrap_err(), ParseError::UnknownFunction { name: "foo".into(), offset: 0 });
        assert_eq!(parse("1 + abs(x)", &s).unwrap_err(), ParseError::NonSmooth { name: "abs".into(), offset: 4 });
        assert!(matches!(parse("(x", &s), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x y", &s), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x $ y", &s), Err(ParseError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let s = xy();
        let e = parse("1 + log(x - 1)", &s).unwrap();
        match e.eval_jet(&[0.5, 0.0], &[], 2).unwrap_err() {
            EvalError::Domain { function: "log", subexpr, .. } => assert_eq!(subexpr, "log((x - 1.0))"),
            other => panic!("{other:?}"),
        }
        let d = parse("y / (x - x)", &s).unwrap();
        assert!(matches!(d.eval(&[1.0, 1.0], &[]), Err(EvalError::DivisionByZero { .. })));
        assert!(matches!(d.eval_jet(&[1.0, 1.0], &[], 1), Err(EvalError::DivisionByZero { .. })));
    }

    #[test]
    fn jet_of_square_and_sine() {
        let s = Symbols::new(&["x"], &[]);
        let j = parse("x^2", &s).unwrap().eval_jet(&[3.0], &[], 2).unwrap();
        assert_eq!(j.coeffs(), &[9.0, 6.0, 1.0]);
        let j = parse("sin(x)", &s).unwrap().eval_jet(&[0.0], &[], 3).unwrap();
        assert_relative_eq!(j.coeffs()[3], -1.0 / 6.0, epsilon = 1e-16);
    }

    #[test]
    fn variable_exponent_uses_exp_log() {
        let s = xy();
        let e = parse("x^y", &s).unwrap();
        let j = e.eval_jet(&[2.0, 3.0], &[], 2).unwrap();
        assert_relative_eq!(j.value(), 8.0, epsilon = 1e-14);
        // ∂x = y x^(y-1) = 12, ∂y = x^y ln x
        assert_relative_eq!(j.derivative(&[1, 0]), 12.0, epsilon = 1e-13);
        assert_relative_eq!(j.derivative(&[0, 1]), 8.0 * 2f64.ln(), epsilon = 1e-13);
        assert!(e.eval_jet(&[-2.0, 3.0], &[], 2).is_err());
    }
}
