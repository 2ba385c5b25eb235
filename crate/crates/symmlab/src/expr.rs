//! A small expression language for scalar fields and warping functions.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          // right-associative, binds above '*'
//! atom   := number | 'r' | 'x1'..'x9' | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | sqrt | sin | cos | sinh | cosh | abs
//! ```
//!
//! Variables `x1..xn` are Cartesian-style coordinates `x_i = r * xi_i`; `r` is
//! the geodesic radius. Unknown identifiers and out-of-dimension variables are
//! rejected at parse time with a byte position.

use std::fmt;
use thiserror::Error;

pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError { pos, msg: msg.into() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    R,
    /// 1-based coordinate index.
    X(usize),
}

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
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Abs => x.abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluate with `xs[i-1] = r * xi_i` already substituted by the caller.
    pub fn eval(&self, r: f64, xs: &[f64; 3]) -> f64 {
        match self {
            Expr::Number(c) => *c,
            Expr::Var(Var::R) => r,
            Expr::Var(Var::X(i)) => xs[i - 1],
            Expr::Neg(e) => -e.eval(r, xs),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(r, xs), b.eval(r, xs));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(r, xs)),
        }
    }

    /// Highest coordinate index used, 0 for purely radial expressions.
    pub fn max_coord(&self) -> usize {
        match self {
            Expr::Number(_) | Expr::Var(Var::R) => 0,
            Expr::Var(Var::X(i)) => *i,
            Expr::Neg(e) | Expr::Call(_, e) => e.max_coord(),
            Expr::Bin(_, a, b) => a.max_coord().max(b.max_coord()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

/// Precedence-aware printer; `parse(to_string(ast)) == ast` for parser output.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "(")?;
                write!(f, "{e}")?;
                write!(f, ")")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Number(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    // negative literals only arise from hand-built ASTs
                    write!(f, "(0 - {})", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(Var::R) => write!(f, "r"),
            Expr::Var(Var::X(i)) => write!(f, "x{i}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                write_child(f, e, 3)
            }
            Expr::Bin(op, a, b) => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                match op {
                    // left-assoc: right child needs strictly higher precedence
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        write_child(f, a, prec)?;
                        write!(f, " {sym} ")?;
                        write_child(f, b, prec + 1)
                    }
                    // right-assoc, exponent slot also admits unary minus
                    BinOp::Pow => {
                        write_child(f, a, 5)?;
                        write!(f, "{sym}")?;
                        write_child(f, b, 3)
                    }
                }
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(usize, usize), // byte range into the source
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => { toks.push((i, Tok::Plus)); i += 1; }
            b'-' => { toks.push((i, Tok::Minus)); i += 1; }
            b'*' => { toks.push((i, Tok::Star)); i += 1; }
            b'/' => { toks.push((i, Tok::Slash)); i += 1; }
            b'^' => { toks.push((i, Tok::Caret)); i += 1; }
            b'(' => { toks.push((i, Tok::LParen)); i += 1; }
            b')' => { toks.push((i, Tok::RParen)); i += 1; }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() { i += 1; }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return err(i, "expected digits after decimal point");
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() { i += 1; }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') { j += 1; }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() { i += 1; }
                    }
                }
                let text = &src[start..i];
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => toks.push((start, Tok::Num(v))),
                    Ok(_) => return err(start, format!("number literal '{text}' overflows")),
                    Err(_) => return err(start, format!("bad number literal '{text}'")),
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(start, i)));
            }
            _ => return err(i, format!("unexpected character '{}'", src[i..].chars().next().unwrap())),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    dim: usize,
    max_coord: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).copied();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_pos(&self) -> usize {
        self.src.len()
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, ExprError> {
        if depth > MAX_DEPTH {
            return err(self.peek().map_or(self.end_pos(), |t| t.0), "expression too deeply nested");
        }
        let mut lhs = self.term(depth + 1)?;
        while let Some(&(_, tok)) = self.peek() {
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term(depth + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self, depth: usize) -> Result<Expr, ExprError> {
        if depth > MAX_DEPTH {
            return err(self.peek().map_or(self.end_pos(), |t| t.0), "expression too deeply nested");
        }
        let mut lhs = self.unary(depth + 1)?;
        while let Some(&(_, tok)) = self.peek() {
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary(depth + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self, depth: usize) -> Result<Expr, ExprError> {
        if depth > MAX_DEPTH {
            return err(self.peek().map_or(self.end_pos(), |t| t.0), "expression too deeply nested");
        }
        if let Some(&(_, Tok::Minus)) = self.peek() {
            self.bump();
            let inner = self.unary(depth + 1)?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power(depth + 1)
    }

    fn power(&mut self, depth: usize) -> Result<Expr, ExprError> {
        if depth > MAX_DEPTH {
            return err(self.peek().map_or(self.end_pos(), |t| t.0), "expression too deeply nested");
        }
        let base = self.atom(depth + 1)?;
        if let Some(&(_, Tok::Caret)) = self.peek() {
            self.bump();
            let exp = self.unary(depth + 1)?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self, depth: usize) -> Result<Expr, ExprError> {
        match self.bump() {
            None => err(self.end_pos(), "unexpected end of expression"),
            Some((pos, tok)) => match tok {
                Tok::Num(v) => Ok(Expr::Number(v)),
                Tok::LParen => {
                    let inner = self.expr(depth + 1)?;
                    match self.bump() {
                        Some((_, Tok::RParen)) => Ok(inner),
                        Some((p, _)) => err(p, "expected ')'"),
                        None => err(self.end_pos(), "missing ')'"),
                    }
                }
                Tok::Ident(a, b) => {
                    let name = &self.src[a..b];
                    if name == "r" {
                        return Ok(Expr::Var(Var::R));
                    }
                    if let Some(idx) = coord_index(name) {
                        if idx > self.dim {
                            return err(
                                pos,
                                format!("variable '{name}' needs dimension >= {idx}, have {}", self.dim),
                            );
                        }
                        self.max_coord = self.max_coord.max(idx);
                        return Ok(Expr::Var(Var::X(idx)));
                    }
                    if let Some(f) = Func::from_name(name) {
                        match self.bump() {
                            Some((_, Tok::LParen)) => {}
                            Some((p, _)) => return err(p, format!("expected '(' after '{name}'")),
                            None => return err(self.end_pos(), format!("expected '(' after '{name}'")),
                        }
                        let arg = self.expr(depth + 1)?;
                        match self.bump() {
                            Some((_, Tok::RParen)) => return Ok(Expr::Call(f, Box::new(arg))),
                            Some((p, _)) => return err(p, "expected ')'"),
                            None => return err(self.end_pos(), "missing ')'"),
                        }
                    }
                    err(pos, format!("unknown identifier '{name}'"))
                }
                other => err(pos, format!("unexpected token {other:?}")),
            },
        }
    }
}

fn coord_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('x')?;
    if rest.len() == 1 {
        let d = rest.as_bytes()[0];
        if (b'1'..=b'9').contains(&d) {
            return Some((d - b'0') as usize);
        }
    }
    None
}

/// Parse an expression over `r, x1..x<dim>`.
pub fn parse(text: &str, dim: usize) -> Result<Expr, ExprError> {
    if text.trim().is_empty() {
        return err(0, "empty expression");
    }
    let toks = lex(text)?;
    let mut p = Parser { src: text, toks, pos: 0, dim, max_coord: 0 };
    let e = p.expr(0)?;
    if let Some(&(pos, _)) = p.peek() {
        return err(pos, "trailing input after expression");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: f64) -> Box<Expr> {
        Box::new(Expr::Number(v))
    }

    #[test]
    fn parses_examples() {
        let e = parse("r^2", 2).unwrap();
        assert_eq!(e.eval(2.0, &[0.0; 3]), 4.0);

        let e = parse("exp(x1)", 2).unwrap();
        assert!((e.eval(1.0, &[1.0, 0.0, 0.0]) - std::f64::consts::E).abs() < 1e-15);

        let e = parse("x1^2", 2).unwrap();
        assert_eq!(e.eval(1.0, &[0.0, 1.0, 0.0]), 0.0);
    }

    #[test]
    fn pow_is_right_associative_and_above_mul() {
        let e = parse("2*3^2", 2).unwrap();
        assert_eq!(e.eval(0.0, &[0.0; 3]), 18.0);
        let e = parse("2^3^2", 2).unwrap();
        assert_eq!(e.eval(0.0, &[0.0; 3]), 512.0);
        let e = parse("-r^2", 2).unwrap();
        assert_eq!(e.eval(3.0, &[0.0; 3]), -9.0);
        let e = parse("2^-1", 2).unwrap();
        assert_eq!(e.eval(0.0, &[0.0; 3]), 0.5);
    }

    #[test]
    fn rejects_dimension_mismatch_with_position() {
        let e = parse("x1 + x3", 2).unwrap_err();
        assert_eq!(e.pos, 5);
        assert!(e.msg.contains("x3"));
    }

    #[test]
    fn rejects_unknown_identifier() {
        let e = parse("foo(r)", 2).unwrap_err();
        assert_eq!(e.pos, 0);
        assert!(e.msg.contains("foo"));
    }

    #[test]
    fn rejects_syntax_errors_with_position() {
        assert!(parse("", 2).is_err());
        assert!(parse("1 +", 2).is_err());
        assert!(parse("(1", 2).is_err());
        assert!(parse("1 2", 2).is_err());
        assert!(parse("exp r", 2).is_err());
        assert!(parse("1.", 2).is_err());
    }

    #[test]
    fn depth_limit_is_enforced() {
        let deep = "(".repeat(5000) + "1" + &")".repeat(5000);
        let e = parse(&deep, 2).unwrap_err();
        assert!(e.msg.contains("nested"));
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "r^2",
            "x1^2",
            "exp(x1)",
            "1 + x1 + r^2",
            "-(x1*x2 - 3/r)^2",
            "sinh(r)/cosh(r) + abs(x2)",
            "2^-x1",
            "1e-3 * r",
        ] {
            let ast = parse(text, 3).unwrap();
            let printed = ast.to_string();
            let reparsed = parse(&printed, 3).unwrap();
            assert_eq!(ast, reparsed, "round trip failed for '{text}' -> '{printed}'");
        }
    }

    #[test]
    fn max_coord_tracks_variables() {
        assert_eq!(parse("r", 3).unwrap().max_coord(), 0);
        assert_eq!(parse("x1 + x2^2", 3).unwrap().max_coord(), 2);
        let _ = num(1.0);
    }
}
