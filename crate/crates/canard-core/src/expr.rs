//! Scalar expression language for vector-field components.
//!
//! Infix grammar with standard precedence (`^` > unary `-` > `*`,`/` >
//! `+`,`-`), parentheses, and single-argument function calls
//! (`sin`, `cos`, `exp`, `ln`, `tanh`, `abs`, `sqrt`). Identifiers are
//! `[a-zA-Z_][a-zA-Z0-9_]*`; numbers are decimal literals with an optional
//! exponent; there is no implicit multiplication (write `c1*u`, not `c1 u`).
//!
//! `^` with an integer literal exponent evaluates by repeated
//! multiplication — exact for polynomials, defined for negative bases, and
//! free of the exp/ln round trip. Any other exponent takes the exp/ln path
//! and requires a positive base. A single leading `-` on the exponent
//! literal is folded in (`x^-2` is the reciprocal of `x^2`).
//!
//! Whether an identifier is a *variable* or a *parameter* is not a syntactic
//! property: the model declares its variable names, and compilation against
//! that declaration ([`CompiledExpr::compile`]) resolves every identifier to
//! a variable slot or an inlined parameter constant. Unbound names are an
//! error at compile/evaluation time, never silently zero.
//!
//! Expressions are immutable after construction and evaluation is pure, so
//! one [`Expr`] or [`CompiledExpr`] may be evaluated from many threads
//! simultaneously.

use crate::error::{Error, NumError, Result};
use crate::jet::JetScalar;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Built-in single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MathFn {
    Sin,
    Cos,
    Exp,
    Ln,
    Tanh,
    Abs,
    Sqrt,
}

impl MathFn {
    pub fn from_name(name: &str) -> Option<MathFn> {
        Some(match name {
            "sin" => MathFn::Sin,
            "cos" => MathFn::Cos,
            "exp" => MathFn::Exp,
            "ln" => MathFn::Ln,
            "tanh" => MathFn::Tanh,
            "abs" => MathFn::Abs,
            "sqrt" => MathFn::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            MathFn::Sin => "sin",
            MathFn::Cos => "cos",
            MathFn::Exp => "exp",
            MathFn::Ln => "ln",
            MathFn::Tanh => "tanh",
            MathFn::Abs => "abs",
            MathFn::Sqrt => "sqrt",
        }
    }

    fn apply<C: JetScalar>(self, x: &C) -> Result<C, NumError> {
        Ok(match self {
            MathFn::Sin => x.sin(),
            MathFn::Cos => x.cos(),
            MathFn::Exp => x.exp(),
            MathFn::Ln => x.ln()?,
            MathFn::Tanh => x.tanh(),
            MathFn::Abs => x.abs()?,
            MathFn::Sqrt => x.sqrt()?,
        })
    }
}

/// Abstract syntax tree of a scalar expression.
///
/// Number literals produced by the parser are always non-negative (a leading
/// minus becomes [`Expr::Neg`]), which keeps pretty-printing unambiguous.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Ident(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer-literal exponent: evaluated by repeated multiplication.
    PowInt(Box<Expr>, i64),
    /// General exponent: evaluated through exp/ln, base must be positive.
    Pow(Box<Expr>, Box<Expr>),
    Call(MathFn, Box<Expr>),
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { val: f64, int_val: Option<i64> },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let (tline, tcol) = (line, col);
        let bump = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        match ch {
            ' ' | '\t' | '\r' | '\n' => {
                chars.next();
                bump(ch, &mut line, &mut col);
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                chars.next();
                bump(ch, &mut line, &mut col);
                let tok = match ch {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push(Spanned {
                    tok,
                    line: tline,
                    col: tcol,
                });
            }
            '0'..='9' => {
                let mut text = String::new();
                let mut is_int = true;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        chars.next();
                        bump(c, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                if chars.peek() == Some(&'.') {
                    is_int = false;
                    text.push('.');
                    chars.next();
                    bump('.', &mut line, &mut col);
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            text.push(c);
                            chars.next();
                            bump(c, &mut line, &mut col);
                        } else {
                            break;
                        }
                    }
                }
                if matches!(chars.peek(), Some(&'e') | Some(&'E')) {
                    is_int = false;
                    text.push('e');
                    chars.next();
                    bump('e', &mut line, &mut col);
                    if matches!(chars.peek(), Some(&'+') | Some(&'-')) {
                        let c = *chars.peek().expect("just matched");
                        text.push(c);
                        chars.next();
                        bump(c, &mut line, &mut col);
                    }
                    let mut any = false;
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            any = true;
                            text.push(c);
                            chars.next();
                            bump(c, &mut line, &mut col);
                        } else {
                            break;
                        }
                    }
                    if !any {
                        return Err(Error::Parse {
                            line,
                            col,
                            message: "exponent digits expected after `e`".into(),
                        });
                    }
                }
                let val: f64 = text.parse().map_err(|_| Error::Parse {
                    line: tline,
                    col: tcol,
                    message: format!("malformed number `{text}`"),
                })?;
                let int_val = if is_int { text.parse::<i64>().ok() } else { None };
                out.push(Spanned {
                    tok: Tok::Num { val, int_val },
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                        bump(c, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Ident(name),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(Error::Parse {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser (recursive descent)
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse {
            line,
            col,
            message: message.into(),
        }
    }

    fn advance(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected {what}, found {}", describe(t)))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.unary()?;
            Ok(Expr::Neg(Box::new(inner)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            // Fast path: an exponent written as an integer literal
            // (optionally behind one unary minus) folds into the
            // repeated-multiplication form. The decision is lexical —
            // `x^2` folds, `x^2.0` does not — so the fold is attempted on
            // the token stream and rolled back if the next tokens form a
            // larger exponent expression (e.g. `x^2^3`).
            let save = self.pos;
            let mut negated = false;
            if self.peek() == Some(&Tok::Minus) {
                self.pos += 1;
                negated = true;
            }
            if let Some(Tok::Num {
                int_val: Some(n), ..
            }) = self.peek()
            {
                let n = *n;
                self.pos += 1;
                if self.peek() != Some(&Tok::Caret) {
                    return Ok(Expr::PowInt(Box::new(base), if negated { -n } else { n }));
                }
            }
            self.pos = save;
            let exponent = self.unary()?;
            Ok(Expr::Pow(Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let (line, col) = self.here();
        match self.advance().map(|s| s.tok) {
            Some(Tok::Num { val, .. }) => Ok(Expr::Num(val)),
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let f = MathFn::from_name(&name).ok_or(Error::Parse {
                        line,
                        col,
                        message: format!("unknown function `{name}`"),
                    })?;
                    self.pos += 1; // consume '('
                    let arg = self.expr()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    Ok(Expr::Call(f, Box::new(arg)))
                } else {
                    Ok(Expr::Ident(name))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(t) => Err(Error::Parse {
                line,
                col,
                message: format!("expected a number, identifier, or `(`, found {}", describe(&t)),
            }),
            None => Err(Error::Parse {
                line,
                col,
                message: "expected a number, identifier, or `(`, found end of input".into(),
            }),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num { val, .. } => format!("number `{val}`"),
        Tok::Ident(n) => format!("identifier `{n}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
    }
}

impl Expr {
    /// Parse an expression from source text.
    pub fn parse(src: &str) -> Result<Expr> {
        if src.trim().is_empty() {
            return Err(Error::Parse {
                line: 1,
                col: 1,
                message: "empty expression".into(),
            });
        }
        let toks = lex(src)?;
        let (end_line, end_col) = toks
            .last()
            .map(|s| (s.line, s.col + 1))
            .unwrap_or((1, 1));
        let mut p = Parser {
            toks,
            pos: 0,
            end_line,
            end_col,
        };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err(format!(
                "unexpected trailing {}",
                describe(p.peek().expect("not at end"))
            )));
        }
        Ok(e)
    }

    /// All identifiers referenced by the expression.
    pub fn free_names(&self) -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        self.collect_names(&mut set);
        set
    }

    fn collect_names(&self, set: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Ident(n) => {
                set.insert(n.clone());
            }
            Expr::Neg(a) | Expr::PowInt(a, _) | Expr::Call(_, a) => a.collect_names(set),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.collect_names(set);
                b.collect_names(set);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::PowInt(..) | Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Ident(_) | Expr::Call(..) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => {
                // An integer-valued literal under a general `Pow` must print
                // in a non-integer form, or re-parsing would fold it into
                // `PowInt`; that case is handled in the Pow arm below.
                write!(f, "{v}")
            }
            Expr::Ident(n) => write!(f, "{n}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)
            }
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)
            }
            Expr::PowInt(base, n) => {
                base.fmt_prec(f, 5)?;
                write!(f, "^{n}")
            }
            Expr::Pow(base, e) => {
                base.fmt_prec(f, 5)?;
                write!(f, "^")?;
                // Keep constructed trees round-trippable: an integer-valued
                // literal exponent must not re-parse as PowInt.
                if let Expr::Num(v) = **e {
                    if v.fract() == 0.0 {
                        return write!(f, "{v}.0");
                    }
                }
                e.fmt_prec(f, 3)
            }
            Expr::Call(fun, a) => {
                write!(f, "{}(", fun.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

/// Precedence-aware printing: `Expr::parse(&e.to_string())` reconstructs a
/// structurally identical tree for every parsed expression.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

fn eval_rec<C: JetScalar>(
    e: &Expr,
    lookup: &impl Fn(&str) -> Option<C>,
) -> Result<C> {
    Ok(match e {
        Expr::Num(v) => C::from_f64(*v),
        Expr::Ident(name) => lookup(name).ok_or_else(|| Error::Unbound(name.clone()))?,
        Expr::Neg(a) => eval_rec(a, lookup)?.neg(),
        Expr::Add(a, b) => eval_rec(a, lookup)?.add(&eval_rec(b, lookup)?),
        Expr::Sub(a, b) => eval_rec(a, lookup)?.sub(&eval_rec(b, lookup)?),
        Expr::Mul(a, b) => eval_rec(a, lookup)?.mul(&eval_rec(b, lookup)?),
        Expr::Div(a, b) => eval_rec(a, lookup)?.div(&eval_rec(b, lookup)?)?,
        Expr::PowInt(a, n) => eval_rec(a, lookup)?.powi(*n)?,
        Expr::Pow(a, b) => eval_rec(a, lookup)?.powf(&eval_rec(b, lookup)?)?,
        Expr::Call(f, a) => f.apply(&eval_rec(a, lookup)?)?,
    })
}

/// Evaluate over plain reals. Every referenced name must be bound; domain
/// errors (division by zero, `ln` of a non-positive value, …) are reported,
/// never returned as silent NaN.
pub fn eval_real(e: &Expr, bindings: &BTreeMap<String, f64>) -> Result<f64> {
    let v = eval_rec(e, &|name: &str| bindings.get(name).copied())?;
    if !v.is_finite() {
        return Err(NumError::NonFinite(format!("evaluating `{e}`")).into());
    }
    Ok(v)
}

/// Evaluate over jets. All bound jets must share order/mode/dimension; the
/// result is exact to machine precision in each retained coefficient.
pub fn eval_jet<C: JetScalar>(e: &Expr, bindings: &BTreeMap<String, C>) -> Result<C> {
    let mut vals = bindings.values();
    if let Some(first) = vals.next() {
        for v in vals {
            if !first.same_shape(v) {
                return Err(NumError::Shape(
                    "eval_jet bindings have mixed jet shapes".into(),
                )
                .into());
            }
        }
    }
    let v = eval_rec(e, &|name: &str| bindings.get(name).cloned())?;
    if !v.is_finite() {
        return Err(NumError::NonFinite(format!("evaluating `{e}`")).into());
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Compiled form
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum CNode {
    Const(f64),
    Var(usize),
    Neg(Box<CNode>),
    Add(Box<CNode>, Box<CNode>),
    Sub(Box<CNode>, Box<CNode>),
    Mul(Box<CNode>, Box<CNode>),
    Div(Box<CNode>, Box<CNode>),
    PowInt(Box<CNode>, i64),
    Pow(Box<CNode>, Box<CNode>),
    Call(MathFn, Box<CNode>),
}

/// An [`Expr`] resolved against a variable list and a parameter table:
/// identifiers become variable slots or inlined constants, so evaluation
/// needs no name lookups. This is the hot-path form used by vector fields.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    node: CNode,
    n_vars: usize,
}

impl CompiledExpr {
    /// Resolve identifiers: names in `vars` become positional slots, names
    /// in `params` become constants, anything else is an unbound-name error.
    pub fn compile(
        e: &Expr,
        vars: &[String],
        params: &BTreeMap<String, f64>,
    ) -> Result<CompiledExpr> {
        let node = Self::compile_rec(e, vars, params)?;
        Ok(CompiledExpr {
            node,
            n_vars: vars.len(),
        })
    }

    fn compile_rec(
        e: &Expr,
        vars: &[String],
        params: &BTreeMap<String, f64>,
    ) -> Result<CNode> {
        Ok(match e {
            Expr::Num(v) => CNode::Const(*v),
            Expr::Ident(name) => {
                if let Some(idx) = vars.iter().position(|v| v == name) {
                    CNode::Var(idx)
                } else if let Some(v) = params.get(name) {
                    CNode::Const(*v)
                } else {
                    return Err(Error::Unbound(name.clone()));
                }
            }
            Expr::Neg(a) => CNode::Neg(Box::new(Self::compile_rec(a, vars, params)?)),
            Expr::Add(a, b) => CNode::Add(
                Box::new(Self::compile_rec(a, vars, params)?),
                Box::new(Self::compile_rec(b, vars, params)?),
            ),
            Expr::Sub(a, b) => CNode::Sub(
                Box::new(Self::compile_rec(a, vars, params)?),
                Box::new(Self::compile_rec(b, vars, params)?),
            ),
            Expr::Mul(a, b) => CNode::Mul(
                Box::new(Self::compile_rec(a, vars, params)?),
                Box::new(Self::compile_rec(b, vars, params)?),
            ),
            Expr::Div(a, b) => CNode::Div(
                Box::new(Self::compile_rec(a, vars, params)?),
                Box::new(Self::compile_rec(b, vars, params)?),
            ),
            Expr::PowInt(a, n) => {
                CNode::PowInt(Box::new(Self::compile_rec(a, vars, params)?), *n)
            }
            Expr::Pow(a, b) => CNode::Pow(
                Box::new(Self::compile_rec(a, vars, params)?),
                Box::new(Self::compile_rec(b, vars, params)?),
            ),
            Expr::Call(f, a) => CNode::Call(*f, Box::new(Self::compile_rec(a, vars, params)?)),
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Evaluate with variable values in declaration order. Works over any
    /// jet scalar; the result's coefficients are checked finite.
    pub fn eval<C: JetScalar>(&self, vars: &[C]) -> Result<C, NumError> {
        debug_assert_eq!(vars.len(), self.n_vars, "wrong number of variable values");
        let v = Self::eval_rec(&self.node, vars)?;
        if !v.is_finite() {
            return Err(NumError::NonFinite("compiled expression evaluation".into()));
        }
        Ok(v)
    }

    fn eval_rec<C: JetScalar>(node: &CNode, vars: &[C]) -> Result<C, NumError> {
        Ok(match node {
            CNode::Const(v) => C::from_f64(*v),
            CNode::Var(i) => vars[*i].clone(),
            CNode::Neg(a) => Self::eval_rec(a, vars)?.neg(),
            CNode::Add(a, b) => Self::eval_rec(a, vars)?.add(&Self::eval_rec(b, vars)?),
            CNode::Sub(a, b) => Self::eval_rec(a, vars)?.sub(&Self::eval_rec(b, vars)?),
            CNode::Mul(a, b) => Self::eval_rec(a, vars)?.mul(&Self::eval_rec(b, vars)?),
            CNode::Div(a, b) => Self::eval_rec(a, vars)?.div(&Self::eval_rec(b, vars)?)?,
            CNode::PowInt(a, n) => Self::eval_rec(a, vars)?.powi(*n)?,
            CNode::Pow(a, b) => Self::eval_rec(a, vars)?.powf(&Self::eval_rec(b, vars)?)?,
            CNode::Call(f, a) => f.apply(&Self::eval_rec(a, vars)?)?,
        })
    }
}
