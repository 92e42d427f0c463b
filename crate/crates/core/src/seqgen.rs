//! Sequence generation for the three families the recovery passes target:
//!
//! * linear sums of shifted floors `a_n = Σᵢ ⌊n·αᵢ + γᵢ⌋`,
//! * classical polynomials of floors `a_n = K(⌊nα₁⌋, …, ⌊nα_d⌋)`,
//! * nested floors `a_n = ⌊⋯⌊⌊nα₁⌋α₂⌋⋯α_d⌋` and their floor/ceiling-word
//!   variants.
//!
//! Every floor is certified: rational parameters evaluate exactly, irrational
//! ones through interval refinement, and an undecidable floor surfaces as an
//! error instead of a silently wrong value. Generation is parallel over the
//! index range and deterministic.

use crate::genpoly::{ClassicalPoly, EvalError};
use crate::reals::{floor_certified, FloorOutcome, Rational, RealExpr};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;

/// Hard cap on eagerly materialized sequence length; longer runs should use
/// the `*_iter` streaming forms.
pub const MATERIALIZE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("requested {requested} values exceeds the materialization cap {cap}; use a streaming iterator")]
    TooManyValues { requested: u64, cap: u64 },
    #[error("parameter shape mismatch: {0}")]
    Shape(String),
}

/// The hidden parameters of a sequence: multipliers `alphas` and shifts
/// `gammas` (same length; shifts default to zero).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    pub alphas: Vec<RealExpr>,
    pub gammas: Vec<RealExpr>,
}

impl ParameterVector {
    pub fn new(alphas: Vec<RealExpr>, gammas: Option<Vec<RealExpr>>) -> Result<Self, GenError> {
        if alphas.is_empty() {
            return Err(GenError::Shape("need at least one multiplier".into()));
        }
        let gammas = match gammas {
            None => vec![RealExpr::integer(0); alphas.len()],
            Some(g) => {
                if g.len() != alphas.len() {
                    return Err(GenError::Shape(format!(
                        "{} multipliers but {} shifts",
                        alphas.len(),
                        g.len()
                    )));
                }
                g
            }
        };
        Ok(ParameterVector { alphas, gammas })
    }

    pub fn d(&self) -> usize {
        self.alphas.len()
    }
}

/// A generated (or loaded) integer sequence, 1-based: `values[k-1]` is `a_k`.
/// `meta` carries free-form header lines for the on-disk format.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerSequence {
    values: Vec<BigInt>,
    meta: Vec<(String, String)>,
}

impl IntegerSequence {
    pub fn new(values: Vec<BigInt>) -> Self {
        assert!(!values.is_empty(), "sequences are nonempty");
        IntegerSequence {
            values,
            meta: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: String) -> Self {
        self.meta.push((key.to_string(), value));
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `a_n` for 1-based `n`.
    pub fn get(&self, n: usize) -> &BigInt {
        &self.values[n - 1]
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn meta(&self) -> &[(String, String)] {
        &self.meta
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Machine-word view for recovery hot paths; `None` if any value
    /// overflows.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.values
            .iter()
            .map(|v| i64::try_from(v).ok())
            .collect()
    }

    /// Text format: optional `# key: value` header lines, then one decimal
    /// integer per line, line k holding `a_k`.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> io::Result<Self> {
        let mut meta = Vec::new();
        let mut values = Vec::new();
        for line in r.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let rest = rest.trim();
                match rest.split_once(':') {
                    Some((k, v)) => meta.push((k.trim().to_string(), v.trim().to_string())),
                    None => meta.push((rest.to_string(), String::new())),
                }
                continue;
            }
            let v: BigInt = trimmed.parse().map_err(|e| {
                io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("bad integer line {trimmed:?}: {e}"),
                )
            })?;
            values.push(v);
        }
        if values.is_empty() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "sequence file holds no values",
            ));
        }
        Ok(IntegerSequence { values, meta })
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut f = io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let f = io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(f)
    }
}

fn check_cap(n_max: u64) -> Result<(), GenError> {
    if n_max == 0 {
        return Err(GenError::Shape("need N >= 1".into()));
    }
    if n_max > MATERIALIZE_CAP {
        return Err(GenError::TooManyValues {
            requested: n_max,
            cap: MATERIALIZE_CAP,
        });
    }
    Ok(())
}

/// Certified `⌊x⌋` for an exact expression, with the rational fast path.
fn floor_expr(x: &RealExpr, max_p: u32) -> Result<BigInt, EvalError> {
    if let Some(q) = x.as_rational() {
        return Ok(q.floor().to_integer());
    }
    match floor_certified(x, max_p)? {
        FloorOutcome::Integer(m) => Ok(m),
        FloorOutcome::Ambiguous(iv) => Err(EvalError::AmbiguousFloor {
            max_bits: max_p,
            lo: iv.lo.to_string(),
            hi: iv.hi.to_string(),
        }),
    }
}

/// `⌊n·α + γ⌋` for integer `n`.
pub fn floor_linear(n: &BigInt, alpha: &RealExpr, gamma: &RealExpr, max_p: u32) -> Result<BigInt, EvalError> {
    let x = RealExpr::Rational(Rational::from_integer(n.clone()))
        .mul(alpha.clone())
        .add(gamma.clone());
    floor_expr(&x, max_p)
}

/// `a_n = Σᵢ ⌊n·αᵢ + γᵢ⌋` for `n = 1..=N`.
pub fn gen_linear_sum(
    p: &ParameterVector,
    n_max: u64,
    max_p: u32,
) -> Result<IntegerSequence, GenError> {
    check_cap(n_max)?;
    let values: Result<Vec<BigInt>, EvalError> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let n = BigInt::from(n);
            let mut acc = BigInt::zero();
            for (a, g) in p.alphas.iter().zip(&p.gammas) {
                acc += floor_linear(&n, a, g, max_p)?;
            }
            Ok(acc)
        })
        .collect();
    Ok(IntegerSequence::new(values?))
}

/// The floor vector `(⌊nα₁⌋, …, ⌊nα_d⌋)`.
pub fn floor_vector(n: &BigInt, alphas: &[RealExpr], max_p: u32) -> Result<Vec<BigInt>, EvalError> {
    let zero = RealExpr::integer(0);
    alphas
        .iter()
        .map(|a| floor_linear(n, a, &zero, max_p))
        .collect()
}

/// `a_n = K(⌊nα₁⌋, …, ⌊nα_d⌋)` for `n = 1..=N`. `K` must be floor-free with
/// as many variables as there are multipliers.
pub fn gen_poly_of_floors(
    k: &ClassicalPoly,
    alphas: &[RealExpr],
    n_max: u64,
    max_p: u32,
) -> Result<IntegerSequence, GenError> {
    check_cap(n_max)?;
    if k.arity() != alphas.len() {
        return Err(GenError::Shape(format!(
            "polynomial has {} variables but {} multipliers given",
            k.arity(),
            alphas.len()
        )));
    }
    let values: Result<Vec<BigInt>, GenError> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let floors = floor_vector(&BigInt::from(n), alphas, max_p).map_err(GenError::Eval)?;
            let v = k.eval_int(&floors);
            if !v.denom().is_one() {
                return Err(GenError::Shape(format!(
                    "polynomial with non-integer coefficients produced {v} at n={n}"
                )));
            }
            Ok(v.to_integer())
        })
        .collect();
    Ok(IntegerSequence::new(values?))
}

/// One nested-floor value `⌊⋯⌊⌊nα₁⌋α₂⌋⋯α_d⌋` (innermost multiplier first).
pub fn nested_value(n: &BigInt, alphas: &[RealExpr], max_p: u32) -> Result<BigInt, EvalError> {
    let mut m = n.clone();
    for a in alphas {
        let x = RealExpr::Rational(Rational::from_integer(m)).mul(a.clone());
        m = floor_expr(&x, max_p)?;
    }
    Ok(m)
}

/// `a_n = ⌊⋯⌊⌊nα₁⌋α₂⌋⋯α_d⌋` for `n = 1..=N`.
pub fn gen_nested(
    alphas: &[RealExpr],
    n_max: u64,
    max_p: u32,
) -> Result<IntegerSequence, GenError> {
    check_cap(n_max)?;
    if alphas.is_empty() {
        return Err(GenError::Shape("need at least one multiplier".into()));
    }
    let values: Result<Vec<BigInt>, EvalError> = (1..=n_max)
        .into_par_iter()
        .map(|n| nested_value(&BigInt::from(n), alphas, max_p))
        .collect();
    Ok(IntegerSequence::new(values?))
}

/// Streaming form of [`gen_nested`] for runs past the materialization cap.
pub fn nested_iter<'a>(
    alphas: &'a [RealExpr],
    max_p: u32,
) -> impl Iterator<Item = Result<BigInt, EvalError>> + 'a {
    (1u64..).map(move |n| nested_value(&BigInt::from(n), alphas, max_p))
}

/// Streaming form of [`gen_linear_sum`].
pub fn linear_sum_iter<'a>(
    p: &'a ParameterVector,
    max_p: u32,
) -> impl Iterator<Item = Result<BigInt, EvalError>> + 'a {
    (1u64..).map(move |n| {
        let n = BigInt::from(n);
        let mut acc = BigInt::zero();
        for (a, g) in p.alphas.iter().zip(&p.gammas) {
            acc += floor_linear(&n, a, g, max_p)?;
        }
        Ok(acc)
    })
}

/// A word over `{0, 1}` selecting floor (0) or ceiling (1) at each nesting
/// level, innermost level first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FloorWord {
    bits: Vec<u8>,
}

impl FloorWord {
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(!bits.is_empty(), "words are nonempty");
        assert!(bits.iter().all(|&b| b <= 1), "bits are 0 or 1");
        FloorWord { bits }
    }

    pub fn all_floors(d: usize) -> Self {
        FloorWord::new(vec![0; d])
    }

    /// The word whose bits read off the binary digits of `t`, most
    /// significant digit innermost.
    pub fn from_rank(t: usize, d: usize) -> Self {
        let bits = (0..d).map(|i| ((t >> (d - 1 - i)) & 1) as u8).collect();
        FloorWord::new(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn hamming_weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

impl fmt::Display for FloorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// `⌈x⌉ = -⌊-x⌋` for an exact expression.
fn ceil_expr(x: &RealExpr, max_p: u32) -> Result<BigInt, EvalError> {
    Ok(-floor_expr(&x.clone().neg(), max_p)?)
}

/// Nested bracket evaluation `[⋯[[n·α₁]_{w₁}·α₂]_{w₂}⋯α_d]_{w_d}` where
/// `[x]_0 = ⌊x⌋` and `[x]_1 = ⌈x⌉`.
pub fn eval_t_word(
    word: &FloorWord,
    alphas: &[RealExpr],
    n: &BigInt,
    max_p: u32,
) -> Result<BigInt, EvalError> {
    assert_eq!(
        word.len(),
        alphas.len(),
        "word length must match multiplier count"
    );
    let mut m = n.clone();
    for (a, &w) in alphas.iter().zip(word.bits()) {
        let x = RealExpr::Rational(Rational::from_integer(m)).mul(a.clone());
        m = if w == 0 {
            floor_expr(&x, max_p)?
        } else {
            ceil_expr(&x, max_p)?
        };
    }
    Ok(m)
}

/// Certified enclosure check that `a_N/N` sits within `bound` of the product
/// of the multipliers — the drift test used by generation sanity checks.
pub fn slope_matches_product(
    seq: &IntegerSequence,
    alphas: &[RealExpr],
    bound: &Rational,
) -> Result<bool, crate::reals::RealError> {
    let n = BigInt::from(seq.len());
    let slope = Rational::new(seq.get(seq.len()).clone(), n);
    let mut prod = RealExpr::integer(1);
    for a in alphas {
        prod = prod.mul(a.clone());
    }
    let iv = crate::reals::refine(&prod, 64)?;
    let dist = if slope < iv.lo {
        &iv.lo - &slope
    } else if slope > iv.hi {
        &slope - &iv.hi
    } else {
        Rational::zero()
    };
    Ok(dist <= *bound)
}
