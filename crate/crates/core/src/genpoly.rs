//! Generalized polynomials: expressions built from variables, real constants,
//! sums, products and the floor function.
//!
//! The abstract syntax is deliberately small:
//!
//! ```text
//! g := x_i | c | g + g + ... | g * g * ... | floor(g)
//! ```
//!
//! Construction goes through the normalizing helpers [`sum`], [`product`],
//! [`floor`] and [`negate`], which keep a canonical shape (nested sums and
//! products flattened, constants folded into a single child, identity
//! elements dropped). The parser produces normalized trees, and the printer
//! emits text that parses back to a structurally equal tree.
//!
//! Evaluation at integer (or exact rational) variable assignments is exact:
//! rational subexpressions use exact rational arithmetic, irrational
//! constants go through certified interval refinement, and every floor is
//! either decided exactly or reported as ambiguous — never guessed.

use crate::reals::{
    expr_precedence, floor_certified, CertifiedInterval, FloorOutcome, Rational, RealError,
    RealExpr, DEFAULT_PRECISION_CAP,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GenPoly {
    /// 1-based variable index; in univariate contexts `Var(1)` is the
    /// sequence index `n`.
    Var(usize),
    Const(RealExpr),
    Sum(Vec<GenPoly>),
    Product(Vec<GenPoly>),
    Floor(Box<GenPoly>),
}

impl GenPoly {
    pub fn var(i: usize) -> Self {
        assert!(i >= 1, "variable indices are 1-based");
        GenPoly::Var(i)
    }

    pub fn constant(e: RealExpr) -> Self {
        GenPoly::Const(e)
    }

    pub fn integer(n: i64) -> Self {
        GenPoly::Const(RealExpr::integer(n))
    }

    /// Largest variable index that occurs, 0 for closed expressions.
    pub fn arity(&self) -> usize {
        match self {
            GenPoly::Var(i) => *i,
            GenPoly::Const(_) => 0,
            GenPoly::Sum(cs) | GenPoly::Product(cs) => {
                cs.iter().map(GenPoly::arity).max().unwrap_or(0)
            }
            GenPoly::Floor(c) => c.arity(),
        }
    }

    pub fn contains_floor(&self) -> bool {
        match self {
            GenPoly::Var(_) | GenPoly::Const(_) => false,
            GenPoly::Sum(cs) | GenPoly::Product(cs) => cs.iter().any(GenPoly::contains_floor),
            GenPoly::Floor(_) => true,
        }
    }
}

/// Normalizing sum constructor: flattens nested sums, folds all constant
/// children into one (kept at the position of the first constant), drops an
/// exact zero, unwraps singletons.
pub fn sum(children: Vec<GenPoly>) -> GenPoly {
    let mut flat = Vec::with_capacity(children.len());
    for c in children {
        match c {
            GenPoly::Sum(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut const_acc: Option<RealExpr> = None;
    let mut const_pos = 0usize;
    let mut rest: Vec<GenPoly> = Vec::with_capacity(flat.len());
    for c in flat {
        match c {
            GenPoly::Const(e) => {
                const_acc = Some(match const_acc {
                    None => {
                        const_pos = rest.len();
                        e
                    }
                    Some(acc) => acc.add(e),
                });
            }
            other => rest.push(other),
        }
    }
    if let Some(e) = const_acc {
        let is_zero = matches!(&e, RealExpr::Rational(q) if q.is_zero());
        if !is_zero || rest.is_empty() {
            rest.insert(const_pos.min(rest.len()), GenPoly::Const(e));
        }
    }
    match rest.len() {
        0 => GenPoly::integer(0),
        1 => rest.into_iter().next().unwrap(),
        _ => GenPoly::Sum(rest),
    }
}

/// Normalizing product constructor: flattens nested products, folds constants
/// (left to right) into one child, drops an exact one, collapses on an exact
/// zero, unwraps singletons.
pub fn product(children: Vec<GenPoly>) -> GenPoly {
    let mut flat = Vec::with_capacity(children.len());
    for c in children {
        match c {
            GenPoly::Product(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut const_acc: Option<RealExpr> = None;
    let mut const_pos = 0usize;
    let mut rest: Vec<GenPoly> = Vec::with_capacity(flat.len());
    for c in flat {
        match c {
            GenPoly::Const(e) => {
                const_acc = Some(match const_acc {
                    None => {
                        const_pos = rest.len();
                        e
                    }
                    Some(acc) => acc.mul(e),
                });
            }
            other => rest.push(other),
        }
    }
    if let Some(e) = const_acc {
        if matches!(&e, RealExpr::Rational(q) if q.is_zero()) {
            return GenPoly::integer(0);
        }
        let is_one = matches!(&e, RealExpr::Rational(q) if q.is_one());
        if !is_one || rest.is_empty() {
            rest.insert(const_pos.min(rest.len()), GenPoly::Const(e));
        }
    }
    match rest.len() {
        0 => GenPoly::integer(1),
        1 => rest.into_iter().next().unwrap(),
        _ => GenPoly::Product(rest),
    }
}

pub fn floor(child: GenPoly) -> GenPoly {
    GenPoly::Floor(Box::new(child))
}

pub fn negate(g: GenPoly) -> GenPoly {
    product(vec![GenPoly::integer(-1), g])
}

/// `ceil(g)` desugars to `-floor(-g)`.
pub fn ceil(g: GenPoly) -> GenPoly {
    negate(floor(negate(g)))
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// If `g` is "negative-leading" (a negative rational constant, a negated
/// constant, or a product starting with one), return its positive
/// counterpart for sign-aware printing.
fn positive_counterpart(g: &GenPoly) -> Option<GenPoly> {
    match g {
        GenPoly::Const(RealExpr::Rational(q)) if q.is_negative() => {
            Some(GenPoly::Const(RealExpr::Rational(-q.clone())))
        }
        GenPoly::Const(RealExpr::Neg(inner)) => Some(GenPoly::Const(inner.as_ref().clone())),
        GenPoly::Product(cs) => {
            let pos_head = positive_counterpart(&cs[0])?;
            let mut out = cs.clone();
            // A folded +1 would have been dropped by the constructor; keep
            // the child list shape instead of re-normalizing.
            match &pos_head {
                GenPoly::Const(RealExpr::Rational(q)) if q.is_one() => {
                    out.remove(0);
                    if out.len() == 1 {
                        return Some(out.into_iter().next().unwrap());
                    }
                }
                _ => out[0] = pos_head,
            }
            Some(GenPoly::Product(out))
        }
        _ => None,
    }
}

fn fmt_factor(g: &GenPoly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match g {
        GenPoly::Var(1) => write!(f, "n"),
        GenPoly::Var(i) => write!(f, "x{i}"),
        GenPoly::Floor(inner) => write!(f, "floor({inner})"),
        GenPoly::Const(c) => {
            // Inside a product, additive and quotient forms need parentheses
            // to parse back to the same structure.
            let needs_parens = expr_precedence(c) == 1 || matches!(c, RealExpr::Div(..));
            if needs_parens {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        GenPoly::Sum(_) => write!(f, "({g})"),
        GenPoly::Product(_) => write!(f, "({g})"),
    }
}

fn fmt_term(g: &GenPoly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match g {
        GenPoly::Product(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                fmt_factor(c, f)?;
            }
            Ok(())
        }
        other => fmt_factor(other, f),
    }
}

impl fmt::Display for GenPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenPoly::Sum(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    match positive_counterpart(c) {
                        Some(pos) => {
                            write!(f, "-")?;
                            fmt_term(&pos, f)?;
                        }
                        None => {
                            if i > 0 {
                                write!(f, "+")?;
                            }
                            fmt_term(c, f)?;
                        }
                    }
                }
                Ok(())
            }
            other => match positive_counterpart(other) {
                Some(pos) => {
                    write!(f, "-")?;
                    fmt_term(&pos, f)
                }
                None => fmt_term(other, f),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unexpected character {found:?} at byte {pos}")]
    UnexpectedChar { pos: usize, found: char },
    #[error("unexpected end of input (expected {expected})")]
    UnexpectedEnd { expected: &'static str },
    #[error("unexpected token at byte {pos} (expected {expected})")]
    UnexpectedToken { pos: usize, expected: &'static str },
    #[error("unknown name {name:?} at byte {pos}")]
    UnknownName { pos: usize, name: String },
    #[error("sqrt argument at byte {pos} must be a nonnegative rational constant")]
    SqrtArgNotRational { pos: usize },
    #[error("divisor at byte {pos} must be a nonzero constant")]
    BadDivisor { pos: usize },
    #[error("exponent {exp} at byte {pos} exceeds the expansion limit {limit}")]
    ExponentTooLarge { pos: usize, exp: u64, limit: u32 },
    #[error("variable index must be at least 1 at byte {pos}")]
    BadVariableIndex { pos: usize },
    #[error("trailing input at byte {pos}")]
    TrailingInput { pos: usize },
}

const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(Rational),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let whole: BigInt = src[start..i].parse().expect("digits");
                let mut value = Rational::from_integer(whole);
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let fstart = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == fstart {
                        return Err(ParseError::UnexpectedChar {
                            pos: fstart - 1,
                            found: '.',
                        });
                    }
                    let frac_digits = &src[fstart..i];
                    let num: BigInt = frac_digits.parse().expect("digits");
                    let den = BigInt::from(10u8).pow(frac_digits.len() as u32);
                    value += Rational::new(num, den);
                }
                out.push((start, Tok::Number(value)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Tok::Name(src[start..i].to_string())));
            }
            other => return Err(ParseError::UnexpectedChar { pos: i, found: other }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks
            .get(self.at)
            .map(|(p, _)| *p)
            .unwrap_or_else(|| self.toks.last().map(|(p, _)| p + 1).unwrap_or(0))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(_) => Err(ParseError::UnexpectedToken {
                pos: self.toks[self.at - 1].0,
                expected,
            }),
            None => Err(ParseError::UnexpectedEnd { expected }),
        }
    }

    fn expr(&mut self) -> Result<GenPoly, ParseError> {
        let mut terms = Vec::new();
        let negative_head = matches!(self.peek(), Some(Tok::Minus));
        if negative_head {
            self.bump();
        }
        let head = self.term()?;
        terms.push(if negative_head { negate(head) } else { head });
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let t = self.term()?;
                    terms.push(t);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    terms.push(negate(t));
                }
                _ => break,
            }
        }
        Ok(sum(terms))
    }

    fn term(&mut self) -> Result<GenPoly, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = product(vec![acc, rhs]);
                }
                Some(Tok::Slash) => {
                    let pos = self.pos();
                    self.bump();
                    let rhs = self.factor()?;
                    acc = divide(acc, rhs).ok_or(ParseError::BadDivisor { pos })?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<GenPoly, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            let pos = self.pos();
            self.bump();
            let exp = match self.bump() {
                Some(Tok::Number(q)) if q.denom().is_one() && !q.is_negative() => {
                    let n = q.to_integer();
                    u64::try_from(n).map_err(|_| ParseError::ExponentTooLarge {
                        pos,
                        exp: u64::MAX,
                        limit: MAX_EXPONENT,
                    })?
                }
                Some(_) => {
                    return Err(ParseError::UnexpectedToken {
                        pos,
                        expected: "a nonnegative integer exponent",
                    })
                }
                None => {
                    return Err(ParseError::UnexpectedEnd {
                        expected: "a nonnegative integer exponent",
                    })
                }
            };
            if exp > MAX_EXPONENT as u64 {
                return Err(ParseError::ExponentTooLarge {
                    pos,
                    exp,
                    limit: MAX_EXPONENT,
                });
            }
            // `^k` is sugar for a k-fold product.
            return Ok(match exp {
                0 => GenPoly::integer(1),
                _ => product(std::iter::repeat(base).take(exp as usize).collect()),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<GenPoly, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Number(q)) => Ok(GenPoly::Const(RealExpr::Rational(q))),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            Some(Tok::Name(name)) => match name.as_str() {
                "n" => Ok(GenPoly::Var(1)),
                "floor" => {
                    self.expect(Tok::LParen, "opening parenthesis after floor")?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "closing parenthesis")?;
                    Ok(floor(inner))
                }
                "ceil" => {
                    self.expect(Tok::LParen, "opening parenthesis after ceil")?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "closing parenthesis")?;
                    Ok(ceil(inner))
                }
                "sqrt" => {
                    self.expect(Tok::LParen, "opening parenthesis after sqrt")?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "closing parenthesis")?;
                    match inner {
                        GenPoly::Const(c) => match c.as_rational() {
                            Some(q) if !q.is_negative() => Ok(GenPoly::Const(
                                RealExpr::sqrt(q)
                                    .map_err(|_| ParseError::SqrtArgNotRational { pos })?,
                            )),
                            _ => Err(ParseError::SqrtArgNotRational { pos }),
                        },
                        _ => Err(ParseError::SqrtArgNotRational { pos }),
                    }
                }
                other if other.starts_with('x') && other[1..].chars().all(|c| c.is_ascii_digit())
                    && other.len() > 1 =>
                {
                    let idx: usize = other[1..]
                        .parse()
                        .map_err(|_| ParseError::BadVariableIndex { pos })?;
                    if idx == 0 {
                        return Err(ParseError::BadVariableIndex { pos });
                    }
                    Ok(GenPoly::Var(idx))
                }
                _ => Err(ParseError::UnknownName {
                    pos,
                    name: name.clone(),
                }),
            },
            Some(_) => Err(ParseError::UnexpectedToken {
                pos,
                expected: "a number, name, or parenthesized expression",
            }),
            None => Err(ParseError::UnexpectedEnd {
                expected: "a number, name, or parenthesized expression",
            }),
        }
    }
}

/// Division desugars to multiplication by the reciprocal constant; only
/// constant, nonzero divisors are meaningful for generalized polynomials.
fn divide(lhs: GenPoly, rhs: GenPoly) -> Option<GenPoly> {
    match rhs {
        GenPoly::Const(c) => {
            let recip = RealExpr::integer(1).div(c).ok()?;
            Some(product(vec![lhs, GenPoly::Const(recip)]))
        }
        _ => None,
    }
}

pub fn parse(src: &str) -> Result<GenPoly, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0 };
    let g = p.expr()?;
    if p.at != p.toks.len() {
        return Err(ParseError::TrailingInput { pos: p.pos() });
    }
    Ok(g)
}

/// Parse a constant expression (no variables, no floors) into a [`RealExpr`].
/// Normalization folds every variable-free, floor-free tree into a single
/// constant, so anything else is rejected.
pub fn parse_real_expr(src: &str) -> Result<RealExpr, ParseError> {
    match parse(src)? {
        GenPoly::Const(c) => Ok(c),
        _ => Err(ParseError::UnexpectedToken {
            pos: 0,
            expected: "a constant expression without variables or floors",
        }),
    }
}

/// Parse a comma-separated list of constant expressions.
pub fn parse_real_list(src: &str) -> Result<Vec<RealExpr>, ParseError> {
    src.split(',')
        .map(|part| parse_real_expr(part.trim()))
        .collect()
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("floor could not be certified within {max_bits} bits (enclosure [{lo}, {hi}])")]
    AmbiguousFloor {
        max_bits: u32,
        lo: String,
        hi: String,
    },
    #[error("expression value {value} is not an integer")]
    NonIntegerResult { value: String },
    #[error("no value assigned to variable x{index}")]
    MissingVariable { index: usize },
    #[error(transparent)]
    Real(#[from] RealError),
}

impl EvalError {
    fn ambiguous(iv: &CertifiedInterval, max_bits: u32) -> Self {
        EvalError::AmbiguousFloor {
            max_bits,
            lo: iv.lo.to_string(),
            hi: iv.hi.to_string(),
        }
    }
}

/// Evaluation value: exact rational fast path, certified expression otherwise.
#[derive(Debug, Clone)]
enum Value {
    Rat(Rational),
    Real(RealExpr),
}

fn eval_value(g: &GenPoly, assignment: &[RealExpr], max_p: u32) -> Result<Value, EvalError> {
    match g {
        GenPoly::Var(i) => {
            let e = assignment
                .get(*i - 1)
                .ok_or(EvalError::MissingVariable { index: *i })?;
            Ok(match e.as_rational() {
                Some(q) => Value::Rat(q),
                None => Value::Real(e.clone()),
            })
        }
        GenPoly::Const(c) => Ok(match c.as_rational() {
            Some(q) => Value::Rat(q),
            None => Value::Real(c.clone()),
        }),
        GenPoly::Sum(cs) => {
            let mut rat = Rational::zero();
            let mut real: Option<RealExpr> = None;
            for c in cs {
                match eval_value(c, assignment, max_p)? {
                    Value::Rat(q) => rat += q,
                    Value::Real(e) => {
                        real = Some(match real {
                            None => e,
                            Some(acc) => acc.add(e),
                        })
                    }
                }
            }
            Ok(match real {
                None => Value::Rat(rat),
                Some(e) if rat.is_zero() => Value::Real(e),
                Some(e) => Value::Real(e.add(RealExpr::Rational(rat))),
            })
        }
        GenPoly::Product(cs) => {
            let mut rat = Rational::one();
            let mut real: Option<RealExpr> = None;
            for c in cs {
                match eval_value(c, assignment, max_p)? {
                    Value::Rat(q) => {
                        if q.is_zero() {
                            return Ok(Value::Rat(Rational::zero()));
                        }
                        rat *= q;
                    }
                    Value::Real(e) => {
                        real = Some(match real {
                            None => e,
                            Some(acc) => acc.mul(e),
                        })
                    }
                }
            }
            Ok(match real {
                None => Value::Rat(rat),
                Some(e) if rat.is_one() => Value::Real(e),
                Some(e) => Value::Real(RealExpr::Rational(rat).mul(e)),
            })
        }
        GenPoly::Floor(inner) => match eval_value(inner, assignment, max_p)? {
            Value::Rat(q) => Ok(Value::Rat(Rational::from_integer(q.floor().to_integer()))),
            Value::Real(e) => match floor_certified(&e, max_p)? {
                FloorOutcome::Integer(m) => Ok(Value::Rat(Rational::from_integer(m))),
                FloorOutcome::Ambiguous(iv) => Err(EvalError::ambiguous(&iv, max_p)),
            },
        },
    }
}

/// Evaluate a generalized polynomial at an exact assignment, requiring an
/// integer result. `assignment[i]` is the value of variable `x_{i+1}`.
pub fn eval_int(
    g: &GenPoly,
    assignment: &[RealExpr],
    max_p: u32,
) -> Result<BigInt, EvalError> {
    match eval_value(g, assignment, max_p)? {
        Value::Rat(q) => {
            if q.denom().is_one() {
                Ok(q.to_integer())
            } else {
                Err(EvalError::NonIntegerResult {
                    value: q.to_string(),
                })
            }
        }
        Value::Real(e) => Err(EvalError::NonIntegerResult {
            value: e.to_string(),
        }),
    }
}

/// Univariate convenience: evaluate with `n` as the single variable.
pub fn eval_at_integer(g: &GenPoly, n: i64, max_p: u32) -> Result<BigInt, EvalError> {
    eval_int(g, &[RealExpr::integer(n)], max_p)
}

/// Default evaluation precision cap re-exported for callers that have no
/// config of their own.
pub fn default_cap() -> u32 {
    DEFAULT_PRECISION_CAP
}

// ---------------------------------------------------------------------------
// Classical (floor-free) multivariate polynomials
// ---------------------------------------------------------------------------

/// A multivariate polynomial with rational coefficients, used where honest
/// polynomial structure is needed (outer shells of floor compositions,
/// gradients). Keys are exponent vectors of fixed length `arity`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalPoly {
    arity: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl ClassicalPoly {
    pub fn zero(arity: usize) -> Self {
        ClassicalPoly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: Rational) -> Self {
        let mut p = ClassicalPoly::zero(arity);
        if !c.is_zero() {
            p.terms.insert(vec![0; arity], c);
        }
        p
    }

    /// The monomial `x_i` (1-based).
    pub fn var(arity: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= arity);
        let mut exps = vec![0; arity];
        exps[i - 1] = 1;
        let mut p = ClassicalPoly::zero(arity);
        p.terms.insert(exps, Rational::one());
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn insert(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = ClassicalPoly::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let exps: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert(exps, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = ClassicalPoly::zero(self.arity);
        for (e, v) in &self.terms {
            out.insert(e.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = ClassicalPoly::constant(self.arity, Rational::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn partial_derivative(&self, i: usize) -> Self {
        assert!(i >= 1 && i <= self.arity);
        let mut out = ClassicalPoly::zero(self.arity);
        for (e, c) in &self.terms {
            let k = e[i - 1];
            if k == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[i - 1] -= 1;
            out.insert(exps, c * Rational::from_integer(BigInt::from(k)));
        }
        out
    }

    pub fn eval_rational(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.arity);
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term *= x;
                }
            }
            acc += term;
        }
        acc
    }

    pub fn eval_int(&self, point: &[BigInt]) -> Rational {
        let rats: Vec<Rational> = point
            .iter()
            .map(|n| Rational::from_integer(n.clone()))
            .collect();
        self.eval_rational(&rats)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.arity);
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut term = crate::reals::rational_to_f64(c);
            for (x, &k) in point.iter().zip(e) {
                term *= x.powi(k as i32);
            }
            acc += term;
        }
        acc
    }
}

/// Convert a floor-free generalized polynomial with rational constants into
/// expanded classical form.
pub fn to_classical(g: &GenPoly, arity: usize) -> Option<ClassicalPoly> {
    match g {
        GenPoly::Var(i) => {
            if *i > arity {
                return None;
            }
            Some(ClassicalPoly::var(arity, *i))
        }
        GenPoly::Const(c) => Some(ClassicalPoly::constant(arity, c.as_rational()?)),
        GenPoly::Sum(cs) => {
            let mut acc = ClassicalPoly::zero(arity);
            for c in cs {
                acc = acc.add(&to_classical(c, arity)?);
            }
            Some(acc)
        }
        GenPoly::Product(cs) => {
            let mut acc = ClassicalPoly::constant(arity, Rational::one());
            for c in cs {
                acc = acc.mul(&to_classical(c, arity)?);
            }
            Some(acc)
        }
        GenPoly::Floor(_) => None,
    }
}

impl fmt::Display for ClassicalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}
