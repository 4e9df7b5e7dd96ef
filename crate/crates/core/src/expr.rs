//! A small arithmetic expression language for coefficient functions and
//! scenario fields.
//!
//! Grammar: numeric literals, identifiers from a [`VarContext`], binary
//! `+ - * / ^`, unary `-`, parentheses and the functions `exp ln sin cos sqrt`.
//! `^` binds tightest and associates to the right, unary minus sits between
//! `^` and `* /`, so `-a^2 = -(a^2)` and `-a*b = (-a)*b`.

use std::fmt;

use crate::autodiff::Scalar;
use crate::error::{DomainError, ParseError, ParseErrorKind};

/// Set of identifiers an expression may reference. `reserved` names are
/// recognized but rejected in this context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarContext {
    pub names: &'static [&'static str],
    pub reserved: &'static [&'static str],
}

pub const COEFF_NAMES: [&str; 7] = ["a", "da", "s1", "s2", "s3", "s4", "s5"];

impl VarContext {
    pub const ISOTROPIC: VarContext = VarContext {
        names: &["a", "da", "s1", "s2", "s3"],
        reserved: &["s4", "s5"],
    };
    pub const TRANSVERSE: VarContext = VarContext {
        names: &COEFF_NAMES,
        reserved: &[],
    };
    pub const SPACE: VarContext = VarContext {
        names: &["x"],
        reserved: &["t"],
    };
    pub const SPACE_TIME: VarContext = VarContext {
        names: &["x", "t"],
        reserved: &[],
    };
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
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => " * ",
            BinOp::Div => " / ",
            BinOp::Pow => "^",
        }
    }
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var { index: usize, name: &'static str },
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Bin(op, ..) => op.precedence(),
            Node::Neg(_) => NEG_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }

    /// Constant integer exponent, if the node is a literal like `2` or `-3`.
    fn integer_literal(&self) -> Option<i32> {
        let v = match self {
            Node::Num(x) => *x,
            Node::Neg(inner) => match **inner {
                Node::Num(x) => -x,
                _ => return None,
            },
            _ => return None,
        };
        (v.fract() == 0.0 && v.abs() <= 1024.0).then_some(v as i32)
    }

    fn eval<S: Scalar>(&self, vars: &[Option<S>]) -> Result<S, DomainError> {
        let out = match self {
            Node::Num(x) => S::constant(*x),
            Node::Var { index, name } => match vars.get(*index).copied().flatten() {
                Some(v) => v,
                None if S::DIFFERENTIABLE => return Err(DomainError::NonSmooth { invariant: name }),
                None => return Err(DomainError::Unavailable { invariant: name }),
            },
            Node::Neg(x) => -x.eval(vars)?,
            Node::Bin(op, l, r) => {
                let a = l.eval(vars)?;
                match op {
                    BinOp::Add => a + r.eval(vars)?,
                    BinOp::Sub => a - r.eval(vars)?,
                    BinOp::Mul => a * r.eval(vars)?,
                    BinOp::Div => {
                        let b = r.eval(vars)?;
                        if b.value() == 0.0 {
                            return Err(DomainError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => match r.integer_literal() {
                        Some(n) => {
                            if n < 0 && a.value() == 0.0 {
                                return Err(DomainError::DivisionByZero);
                            }
                            a.powi(n)
                        }
                        None => {
                            let b = r.eval(vars)?;
                            if a.value() <= 0.0 {
                                return Err(DomainError::Function {
                                    function: "pow",
                                    arg: a.value(),
                                });
                            }
                            a.powf(b)
                        }
                    },
                }
            }
            Node::Call(f, x) => {
                let a = x.eval(vars)?;
                let bad = match f {
                    Func::Ln => a.value() <= 0.0,
                    Func::Sqrt => a.value() < 0.0 || (S::DIFFERENTIABLE && a.value() == 0.0),
                    _ => false,
                };
                if bad {
                    return Err(DomainError::Function {
                        function: f.name(),
                        arg: a.value(),
                    });
                }
                match f {
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt => a.sqrt(),
                }
            }
        };
        if !out.value().is_finite() {
            return Err(DomainError::NonFinite);
        }
        Ok(out)
    }

    fn collect_vars(&self, used: &mut Vec<usize>) {
        match self {
            Node::Num(_) => {}
            Node::Var { index, .. } => {
                if !used.contains(index) {
                    used.push(*index);
                }
            }
            Node::Neg(x) | Node::Call(_, x) => x.collect_vars(used),
            Node::Bin(_, l, r) => {
                l.collect_vars(used);
                r.collect_vars(used);
            }
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            Node::Num(x) => out.push_str(&format!("{x}")),
            Node::Var { name, .. } => out.push_str(name),
            Node::Neg(x) => {
                out.push('-');
                write_child(x, x.precedence() < NEG_PRECEDENCE, out);
            }
            Node::Bin(op, l, r) => {
                let p = op.precedence();
                let (left_paren, right_paren) = if *op == BinOp::Pow {
                    (l.precedence() <= p, r.precedence() < p)
                } else {
                    (l.precedence() < p, r.precedence() <= p)
                };
                write_child(l, left_paren, out);
                out.push_str(op.symbol());
                write_child(r, right_paren, out);
            }
            Node::Call(f, x) => {
                out.push_str(f.name());
                write_child(x, true, out);
            }
        }
    }
}

fn write_child(n: &Node, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
    }
    n.write(out);
    if paren {
        out.push(')');
    }
}

/// Parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    vars: Vec<usize>,
}

impl Expr {
    pub fn parse(src: &str, ctx: VarContext) -> Result<Expr, ParseError> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            ctx,
            end: src.len(),
        };
        if p.peek().tok == Tok::End {
            return Err(ParseError {
                offset: 0,
                kind: ParseErrorKind::Empty,
            });
        }
        let root = p.expr(0)?;
        let t = p.peek();
        if t.tok != Tok::End {
            return Err(ParseError {
                offset: t.offset,
                kind: ParseErrorKind::UnexpectedToken(t.tok.describe()),
            });
        }
        let mut vars = Vec::new();
        root.collect_vars(&mut vars);
        vars.sort_unstable();
        Ok(Expr { root, vars })
    }

    pub fn constant(x: f64) -> Expr {
        Expr {
            root: Node::Num(x),
            vars: Vec::new(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Indices (into the parsing context) of the variables referenced.
    pub fn variables(&self) -> &[usize] {
        &self.vars
    }

    pub fn uses(&self, index: usize) -> bool {
        self.vars.binary_search(&index).is_ok()
    }

    pub fn eval<S: Scalar>(&self, vars: &[Option<S>]) -> Result<S, DomainError> {
        self.root.eval(vars)
    }

    /// Plain evaluation with every variable bound.
    pub fn eval_f64(&self, vars: &[f64]) -> Result<f64, DomainError> {
        let bound: Vec<Option<f64>> = vars.iter().copied().map(Some).collect();
        self.root.eval(&bound)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.root.write(&mut s);
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("{x}"),
            Tok::Ident(s) => s.clone(),
            Tok::Op(c) => c.to_string(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push(Token {
                    tok: Tok::Op(c as char),
                    offset: start,
                });
                i += 1;
            }
            b'(' | b')' => {
                let tok = if c == b'(' { Tok::LParen } else { Tok::RParen };
                out.push(Token { tok, offset: start });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
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
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::InvalidNumber(text.into()),
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::InvalidNumber(text.into()),
                    });
                }
                out.push(Token {
                    tok: Tok::Num(value),
                    offset: start,
                });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[start..i].into()),
                    offset: start,
                });
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::UnexpectedChar(ch),
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::End,
        offset: src.len(),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    ctx: VarContext,
    end: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(t: &Token) -> ParseError {
        let kind = match t.tok {
            Tok::End => ParseErrorKind::UnexpectedEnd,
            _ => ParseErrorKind::UnexpectedToken(t.tok.describe()),
        };
        ParseError {
            offset: t.offset,
            kind,
        }
    }

    fn binary_op(&self) -> Option<BinOp> {
        match self.peek().tok {
            Tok::Op('+') => Some(BinOp::Add),
            Tok::Op('-') => Some(BinOp::Sub),
            Tok::Op('*') => Some(BinOp::Mul),
            Tok::Op('/') => Some(BinOp::Div),
            Tok::Op('^') => Some(BinOp::Pow),
            _ => None,
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<Node, ParseError> {
        let mut lhs = self.prefix()?;
        while let Some(op) = self.binary_op() {
            let p = op.precedence();
            if p < min_prec {
                break;
            }
            self.next();
            let rhs = if op == BinOp::Pow {
                self.expr(p)?
            } else {
                self.expr(p + 1)?
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Node, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Op('-') => Ok(Node::Neg(Box::new(self.expr(NEG_PRECEDENCE)?))),
            Tok::Num(x) => Ok(Node::Num(x)),
            Tok::LParen => {
                let inner = self.expr(0)?;
                let close = self.next();
                if close.tok != Tok::RParen {
                    return Err(Self::unexpected(&close));
                }
                Ok(inner)
            }
            Tok::Ident(ref name) => {
                if self.peek().tok == Tok::LParen {
                    let func = Func::from_name(name).ok_or_else(|| ParseError {
                        offset: t.offset,
                        kind: ParseErrorKind::UnknownFunction(name.clone()),
                    })?;
                    self.next();
                    let arg = self.expr(0)?;
                    let close = self.next();
                    if close.tok != Tok::RParen {
                        return Err(Self::unexpected(&close));
                    }
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                if let Some(index) = self.ctx.names.iter().position(|n| n == name) {
                    return Ok(Node::Var {
                        index,
                        name: self.ctx.names[index],
                    });
                }
                let kind = if self.ctx.reserved.contains(&name.as_str()) {
                    ParseErrorKind::IdentifierNotInContext(name.clone())
                } else {
                    ParseErrorKind::UnknownIdentifier(name.clone())
                };
                Err(ParseError {
                    offset: t.offset,
                    kind,
                })
            }
            Tok::End => Err(ParseError {
                offset: self.end,
                kind: ParseErrorKind::UnexpectedEnd,
            }),
            _ => Err(Self::unexpected(&t)),
        }
    }
}
