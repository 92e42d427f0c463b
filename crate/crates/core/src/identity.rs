//! Exact identity testing between generalized polynomial expressions.
//!
//! Three levels of strength, in increasing order of what they prove:
//!
//! 1. [`verify_range`] — certified evaluation of two expressions over an
//!    integer window, reporting either the verified count or the *first*
//!    disagreement (smallest `n`, scanning ascending).
//! 2. [`rational_nested_equiv`] — a complete decision procedure for equality
//!    **on all of ℤ** when both sides are nested floors with rational
//!    multipliers: `n ↦ ⌊r_d ⌊… ⌊r_1 n⌋ …⌋⌋`. Such a map is affine along
//!    every residue class of one full period, so equal slopes plus agreement
//!    over one period prove equality everywhere; unequal slopes force
//!    divergence and a counterexample is exhibited.
//! 3. [`search_collisions`] — an exhaustive census of distinct rational
//!    parameter pairs that generate identical sequences, i.e. the precise
//!    extent to which two-level nested floor sequences fail to determine
//!    their parameters.
//!
//! # Why one period suffices
//!
//! For a reduced fraction `r = p/q` and any multiple `Q` of `q`,
//! `⌊r(n+Q)⌋ = ⌊rn⌋ + pQ/q`. Inductively, with `Q = q_1 q_2 ⋯ q_d` the
//! product of all denominators, each partial value shifts by an integer that
//! remains divisible by every denominator further out, so the whole nest
//! satisfies `a(n + Q) = a(n) + sQ` with `s = r_1 ⋯ r_d` the slope (and `sQ`
//! an integer). Two nests with equal slope and common period `L` therefore
//! agree on all of ℤ as soon as they agree on `L` consecutive integers.

use crate::genpoly::{self, EvalError, GenPoly};
use crate::reals::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

#[derive(Debug, thiserror::Error)]
pub enum IdentityError {
    #[error("evaluation failed at n = {n}: {source}")]
    Eval {
        n: i64,
        #[source]
        source: EvalError,
    },
}

fn ser_bigint<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Outcome of an identity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// Both sides agreed at every point of the tested window.
    HoldsOnRange { count: u64 },
    /// The sides disagree; `n` is the smallest tested witness.
    Counterexample {
        #[serde(serialize_with = "ser_bigint")]
        n: BigInt,
        #[serde(serialize_with = "ser_bigint")]
        lhs: BigInt,
        #[serde(serialize_with = "ser_bigint")]
        rhs: BigInt,
    },
    /// Equality holds on all of ℤ, certified by the shift relation
    /// `a(n + period) = a(n) + shift` plus agreement over one period.
    ProvedEqual {
        #[serde(serialize_with = "ser_bigint")]
        period: BigInt,
        #[serde(serialize_with = "ser_bigint")]
        shift: BigInt,
        slope: String,
    },
}

/// Result of comparing two expressions, serializable as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub lhs: String,
    pub rhs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<(i64, i64)>,
    pub verdict: Verdict,
}

// ---------------------------------------------------------------------------
// Range verification
// ---------------------------------------------------------------------------

const CHUNK: i64 = 2048;

/// Evaluate `lhs` and `rhs` at every integer in `range = (lo, hi)` (inclusive)
/// and report the first disagreement, scanning in ascending order.
///
/// Chunks are verified in parallel; the verdict is identical to a sequential
/// ascending scan (the smallest offending `n` wins, whether it is a
/// counterexample or an evaluation failure).
pub fn verify_range(
    lhs: &GenPoly,
    rhs: &GenPoly,
    range: (i64, i64),
    max_p: u32,
) -> Result<IdentityReport, IdentityError> {
    let (lo, hi) = range;
    assert!(lo <= hi, "empty verification range");

    let mut starts = Vec::new();
    let mut s = lo as i128;
    while s <= hi as i128 {
        starts.push(s as i64);
        s += CHUNK as i128;
    }

    enum Hit {
        Cex(i64, BigInt, BigInt),
        Fail(i64, EvalError),
    }

    let first = starts
        .into_par_iter()
        .map(|start| {
            let end = ((start as i128 + CHUNK as i128 - 1).min(hi as i128)) as i64;
            for n in start..=end {
                let l = match genpoly::eval_at_integer(lhs, n, max_p) {
                    Ok(v) => v,
                    Err(e) => return Some(Hit::Fail(n, e)),
                };
                let r = match genpoly::eval_at_integer(rhs, n, max_p) {
                    Ok(v) => v,
                    Err(e) => return Some(Hit::Fail(n, e)),
                };
                if l != r {
                    return Some(Hit::Cex(n, l, r));
                }
            }
            None
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();

    let verdict = match first {
        Some(Hit::Fail(n, source)) => return Err(IdentityError::Eval { n, source }),
        Some(Hit::Cex(n, l, r)) => Verdict::Counterexample {
            n: BigInt::from(n),
            lhs: l,
            rhs: r,
        },
        None => Verdict::HoldsOnRange {
            count: (hi as i128 - lo as i128 + 1) as u64,
        },
    };
    Ok(IdentityReport {
        label: None,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        range: Some(range),
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Rational nested floors: exact values and the decision procedure
// ---------------------------------------------------------------------------

/// `⌊r_d ⌊… ⌊r_1 n⌋ …⌋⌋` computed exactly in integers.
pub fn nested_rational_value(params: &[Rational], n: &BigInt) -> BigInt {
    let mut v = n.clone();
    for r in params {
        v = (r.numer() * &v).div_floor(r.denom());
    }
    v
}

/// Printable form of the nest, parseable back by the expression grammar
/// (for nonnegative multipliers).
pub fn nested_display(params: &[Rational]) -> String {
    let mut s = String::from("n");
    for r in params {
        s = format!("floor({s}*{r})");
    }
    s
}

fn slope_of(params: &[Rational]) -> Rational {
    params.iter().fold(Rational::one(), |acc, r| acc * r)
}

fn denominator_product(params: &[Rational]) -> BigInt {
    params.iter().fold(BigInt::one(), |acc, r| acc * r.denom())
}

/// Bound on `|a(n) - slope·n|` over all `n`: each floor loses less than 1,
/// scaled by the product of the multipliers applied after it.
fn floor_loss_bound(params: &[Rational]) -> Rational {
    let mut total = Rational::zero();
    let mut tail = Rational::one();
    for r in params.iter().rev() {
        total += &tail;
        tail *= r.abs();
    }
    total
}

/// Decide whether two nested rational floor maps agree on **all of ℤ**.
///
/// * Equal slopes: the two maps share the period
///   `L = lcm(∏ denom(a), ∏ denom(b))` in the sense that both satisfy
///   `f(n + L) = f(n) + slope·L`; agreement for `n = 1 … L` then proves
///   agreement everywhere ([`Verdict::ProvedEqual`] with the certificate),
///   and any disagreement in that window is already a counterexample.
/// * Unequal slopes: the maps provably diverge once
///   `|Δslope|·n` exceeds both floor-loss bounds, so a counterexample is
///   found by scanning `n = 1, 2, …` (guaranteed to terminate).
///
/// Parameters may be any rationals (zero and negative values included);
/// nesting depths need not match.
pub fn rational_nested_equiv(a: &[Rational], b: &[Rational]) -> IdentityReport {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "parameter lists must be nonempty"
    );
    let (slope_a, slope_b) = (slope_of(a), slope_of(b));
    let report = |verdict| IdentityReport {
        label: None,
        lhs: nested_display(a),
        rhs: nested_display(b),
        range: None,
        verdict,
    };

    if slope_a != slope_b {
        let delta = (&slope_a - &slope_b).abs();
        let loss = floor_loss_bound(a) + floor_loss_bound(b);
        let stop = (loss / delta).floor().to_integer() + 1;
        let mut n = BigInt::one();
        while n <= stop {
            let (va, vb) = (nested_rational_value(a, &n), nested_rational_value(b, &n));
            if va != vb {
                return report(Verdict::Counterexample {
                    n,
                    lhs: va,
                    rhs: vb,
                });
            }
            n += 1;
        }
        unreachable!("differing slopes force a counterexample within the divergence bound");
    }

    let period = denominator_product(a).lcm(&denominator_product(b));
    let mut n = BigInt::one();
    while n <= period {
        let (va, vb) = (nested_rational_value(a, &n), nested_rational_value(b, &n));
        if va != vb {
            return report(Verdict::Counterexample {
                n,
                lhs: va,
                rhs: vb,
            });
        }
        n += 1;
    }
    let shift_q = &slope_a * Rational::from_integer(period.clone());
    debug_assert!(shift_q.is_integer());
    report(Verdict::ProvedEqual {
        period,
        shift: shift_q.to_integer(),
        slope: slope_a.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Collision census
// ---------------------------------------------------------------------------

/// Two distinct parameter pairs proved to generate the same sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionPair {
    pub a: [Rational; 2],
    pub b: [Rational; 2],
    pub slope: Rational,
    pub period: BigInt,
}

/// Output of [`search_collisions`]: all proved collisions between distinct
/// parameter *multisets*, plus the count of order-swap collisions (same
/// multiset, swapped nesting order) found along the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionCensus {
    pub max_den: u32,
    pub pairs: Vec<CollisionPair>,
    pub same_multiset: usize,
}

impl CollisionCensus {
    pub fn contains(&self, a: &[Rational; 2], b: &[Rational; 2]) -> bool {
        self.pairs
            .iter()
            .any(|p| (&p.a == a && &p.b == b) || (&p.a == b && &p.b == a))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let fr = |r: &Rational| r.to_string();
        serde_json::json!({
            "max_den": self.max_den,
            "nontrivial": self.pairs.len(),
            "same_multiset": self.same_multiset,
            "pairs": self.pairs.iter().map(|p| serde_json::json!({
                "a": [fr(&p.a[0]), fr(&p.a[1])],
                "b": [fr(&p.b[0]), fr(&p.b[1])],
                "slope": fr(&p.slope),
                "period": p.period.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// All reduced fractions `p/q` with `1 ≤ p < q ≤ max_den`, ascending.
fn proper_fractions(max_den: u32) -> Vec<Rational> {
    let mut out = Vec::new();
    for q in 2..=max_den {
        for p in 1..q {
            if p.gcd(&q) == 1 {
                out.push(Rational::new(BigInt::from(p), BigInt::from(q)));
            }
        }
    }
    out.sort();
    out
}

/// Exhaustive census of depth-2 collisions: ordered pairs `(r_1, r_2)` of
/// reduced fractions in `(0, 1)` with denominators at most `max_den` such
/// that two *different multisets* of parameters generate identical sequences
/// on all of ℤ.
///
/// Pairs are grouped by slope `r_1·r_2` (a necessary condition), decided by
/// [`rational_nested_equiv`] within each group, and returned in a
/// deterministic order (by slope, then lexicographically). Collisions whose
/// parameter multisets coincide — the two nesting orders of the same pair —
/// are tallied in `same_multiset` but excluded from `pairs`.
pub fn search_collisions(max_den: u32) -> CollisionCensus {
    assert!(max_den >= 2, "need denominators of at least 2");
    let fracs = proper_fractions(max_den);

    let mut groups: BTreeMap<Rational, Vec<[Rational; 2]>> = BTreeMap::new();
    for x in &fracs {
        for y in &fracs {
            groups
                .entry(x * y)
                .or_default()
                .push([x.clone(), y.clone()]);
        }
    }

    let per_group: Vec<(Vec<CollisionPair>, usize)> = groups
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(slope, members)| {
            let mut pairs = Vec::new();
            let mut same = 0usize;
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    let (a, b) = (&members[i], &members[j]);
                    let rep = rational_nested_equiv(a, b);
                    if let Verdict::ProvedEqual { period, .. } = rep.verdict {
                        let mut ma = a.clone();
                        let mut mb = b.clone();
                        ma.sort();
                        mb.sort();
                        if ma == mb {
                            same += 1;
                        } else {
                            pairs.push(CollisionPair {
                                a: a.clone(),
                                b: b.clone(),
                                slope: slope.clone(),
                                period,
                            });
                        }
                    }
                }
            }
            (pairs, same)
        })
        .collect();

    let mut census = CollisionCensus {
        max_den,
        pairs: Vec::new(),
        same_multiset: 0,
    };
    for (pairs, same) in per_group {
        census.pairs.extend(pairs);
        census.same_multiset += same;
    }
    census
}

// ---------------------------------------------------------------------------
// Built-in examples
// ---------------------------------------------------------------------------

/// Classic identities shipped as ready-made demonstrations:
///
/// * `complement-pair` — `⌊nα⌋ + ⌊n(1−α)⌋ = n − 1` for irrational
///   `α = √2 − 1`, verified for `n = 1 … 10⁴` (the companion `-at-zero`
///   entry records the lone exception at `n = 0`).
/// * `sporadic-pair` — `⌊⌊n·3/7⌋·2/9⌋ = ⌊⌊n·1/3⌋·2/7⌋`, verified on
///   `|n| ≤ 10⁵` and then *proved* on all of ℤ by the decision procedure.
/// * `special-quadratic` — `⌊⌊√2 n⌋·2√2 n⌋ − ⌊√2 n⌋² − 2n² + 1` vanishes
///   for every nonzero integer and equals 1 at `n = 0`.
pub fn builtin_examples(max_p: u32) -> Result<Vec<IdentityReport>, IdentityError> {
    let parse = |s: &str| genpoly::parse(s).expect("built-in expression parses");
    let frac = |p: i64, q: i64| Rational::new(BigInt::from(p), BigInt::from(q));
    let labeled = |label: &str, mut rep: IdentityReport| {
        rep.label = Some(label.to_string());
        rep
    };

    let mut out = Vec::new();

    let complement_lhs = parse("floor((sqrt(2)-1)*n)+floor((2-sqrt(2))*n)");
    out.push(labeled(
        "complement-pair",
        verify_range(&complement_lhs, &parse("n-1"), (1, 10_000), max_p)?,
    ));
    out.push(labeled(
        "complement-pair-at-zero",
        verify_range(&complement_lhs, &parse("0"), (0, 0), max_p)?,
    ));

    let spor_a = [frac(3, 7), frac(2, 9)];
    let spor_b = [frac(1, 3), frac(2, 7)];
    out.push(labeled(
        "sporadic-pair",
        verify_range(
            &parse(&nested_display(&spor_a)),
            &parse(&nested_display(&spor_b)),
            (-100_000, 100_000),
            max_p,
        )?,
    ));
    out.push(labeled(
        "sporadic-pair-decision",
        rational_nested_equiv(&spor_a, &spor_b),
    ));

    let quad = parse("floor(floor(sqrt(2)*n)*2*sqrt(2)*n)-floor(sqrt(2)*n)^2-2*n^2+1");
    out.push(labeled(
        "special-quadratic-positive",
        verify_range(&quad, &parse("0"), (1, 10_000), max_p)?,
    ));
    out.push(labeled(
        "special-quadratic-negative",
        verify_range(&quad, &parse("0"), (-10_000, -1), max_p)?,
    ));
    out.push(labeled(
        "special-quadratic-at-zero",
        verify_range(&quad, &parse("1"), (0, 0), max_p)?,
    ));

    Ok(out)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
