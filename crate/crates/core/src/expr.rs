//! Arithmetic expressions over `x1..xk`.
//!
//! Precedence, tightest first: `^`, unary minus, `* /`, `+ -`. All binary
//! operators associate left except `^`, so `-x1^2` is `-(x1^2)` and
//! `2^3^2` is `2^9`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("arity mismatch at position {pos}: {message}")]
    Arity { pos: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Abs,
    Exp,
    Log,
    Sqrt,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    PowI(Box<Node>, i32),
    Call(Func, Vec<Node>),
}

impl Node {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Node::PowI(a, n) => a.eval(x).powi(*n),
            Node::Call(f, args) => {
                let first = args[0].eval(x);
                match f {
                    Func::Abs => first.abs(),
                    Func::Exp => first.exp(),
                    Func::Log => first.ln(),
                    Func::Sqrt => first.sqrt(),
                    Func::Min => args[1..].iter().fold(first, |m, a| m.min(a.eval(x))),
                    Func::Max => args[1..].iter().fold(first, |m, a| m.max(a.eval(x))),
                }
            }
        }
    }
}

/// A parsed expression. Cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Expr {
    root: Arc<Node>,
    arity: usize,
    source: Arc<str>,
}

impl Expr {
    /// Evaluates at `x`; `x` must have at least `arity` coordinates.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert!(x.len() >= self.arity);
        self.root.eval(x)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expr")
            .field("source", &self.source)
            .field("arity", &self.arity)
            .finish()
    }
}

pub fn parse_expr(text: &str, arity: usize) -> Result<Expr, ExprError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        at: 0,
        arity,
        end: text.chars().count(),
    };
    let root = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(ExprError::Syntax {
            pos: t.pos,
            message: format!("unexpected {}", t.kind),
        });
    }
    Ok(Expr {
        root: Arc::new(root),
        arity,
        source: text.into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Op(c) => write!(f, "`{c}`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // An exponent only when digits follow; otherwise `e` is the constant.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| ExprError::Syntax {
                pos: start,
                message: format!("malformed number `{s}`"),
            })?;
            out.push(Token {
                kind: Tok::Num(v),
                pos: start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(chars[start..i].iter().collect()),
                pos: start,
            });
        } else if "+-*/^(),".contains(c) {
            out.push(Token {
                kind: Tok::Op(c),
                pos: i,
            });
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                pos: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    arity: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token { kind: Tok::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn eof_error(&self, what: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.end,
            message: format!("unexpected end of input, expected {what}"),
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        match self.peek().cloned() {
            Some(Token { kind: Tok::Op(c), .. }) if c == op => {
                self.at += 1;
                Ok(())
            }
            Some(t) => Err(ExprError::Syntax {
                pos: t.pos,
                message: format!("expected `{op}`, found {}", t.kind),
            }),
            None => Err(self.eof_error(&format!("`{op}`"))),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.at += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.at += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek_op() {
            Some('-') => {
                self.at += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.at += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.at += 1;
        let exp = self.unary()?;
        Ok(match integer_exponent(&exp) {
            Some(n) => Node::PowI(Box::new(base), n),
            None => Node::Pow(Box::new(base), Box::new(exp)),
        })
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.eof_error("an operand"));
        };
        self.at += 1;
        match tok.kind {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Op(c) => Err(ExprError::Syntax {
                pos: tok.pos,
                message: format!("expected an operand, found `{c}`"),
            }),
            Tok::Ident(name) => self.identifier(name, tok.pos),
        }
    }

    fn identifier(&mut self, name: String, pos: usize) -> Result<Node, ExprError> {
        if let Some(f) = Func::lookup(&name) {
            self.expect('(')?;
            let mut args = vec![self.expr()?];
            while self.peek_op() == Some(',') {
                self.at += 1;
                args.push(self.expr()?);
            }
            self.expect(')')?;
            let ok = if f.variadic() { args.len() >= 2 } else { args.len() == 1 };
            if !ok {
                let want = if f.variadic() { "at least 2" } else { "1" };
                return Err(ExprError::Arity {
                    pos,
                    message: format!("`{name}` takes {want} argument(s), got {}", args.len()),
                });
            }
            return Ok(Node::Call(f, args));
        }
        match name.as_str() {
            "pi" => return Ok(Node::Const(std::f64::consts::PI)),
            "e" => return Ok(Node::Const(std::f64::consts::E)),
            "x" if self.arity == 1 => return Ok(Node::Var(0)),
            _ => {}
        }
        if let Some(k) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if k >= 1 && !name[1..].starts_with('0') {
                if k > self.arity {
                    return Err(ExprError::Arity {
                        pos,
                        message: format!("`{name}` used but the domain has {} coordinate(s)", self.arity),
                    });
                }
                return Ok(Node::Var(k - 1));
            }
        }
        Err(ExprError::UnknownIdentifier { name, pos })
    }
}

fn integer_exponent(node: &Node) -> Option<i32> {
    let v = match node {
        Node::Const(v) => *v,
        Node::Neg(inner) => match **inner {
            Node::Const(v) => -v,
            _ => return None,
        },
        _ => return None,
    };
    (v.fract() == 0.0 && v.abs() <= 64.0).then_some(v as i32)
}
