//! Recovery of multipliers of nested-floor sequences
//! `a_n = ⌊α_d⌊α_{d-1}⌊…⌊α₁·n⌋…⌋⌋⌋`, by two methods.
//!
//! **Moments** (`d ∈ {2,3}`, multipliers in `(0,1)`): the deficit
//! `Δ_n = n·Παᵢ - a_n` equidistributes, and its k-th moments have closed
//! forms in the multipliers. The slope `Παᵢ` is estimated by an exact
//! integer-arithmetic least-squares fit of `a_n` against `n`, the moments by
//! full-sample averages of the deficit powers, and the closed forms are
//! inverted.
//!
//! **Jump spectrum** (`α₁ > 1`, `αᵢ > 2`, all irrational): the difference
//! `Δ(n) = a_{n+1} - a_n` takes exactly `2^d` values — the mixed floor/ceil
//! evaluations `T(W, ᾱ; 1)` over words `W ∈ {0,1}^d` — and ascending value
//! order equals lexicographic word order (most significant bit innermost).
//! The density of word `W` is a chain product `Π pᵢ`, where level `i` takes
//! its ceiling branch with probability `{αᵢ·mᵢ₋₁}` given the partial value
//! `mᵢ₋₁ = T(w₁…wᵢ₋₁, ᾱ; 1)`. Because the all-zeros prefix and the prefix
//! `0…01` have partial values differing by exactly 1, the fractional parts
//! come straight out of conditional densities:
//!
//! ```text
//! {α₁} = P(w₁ = 1),
//! {αᵢ} = (P(wᵢ=1 | w₁…wᵢ₋₁ = 0…01) - P(wᵢ=1 | w₁…wᵢ₋₁ = 0…00)) mod 1.
//! ```

use crate::report::{Estimate, RecoveryReport};
use crate::reals::{rational_to_f64, simplest_in_interval, Rational, RealExpr};
use crate::seqgen::IntegerSequence;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NestedError {
    #[error("sequence of length {len} is too short; need at least {need}")]
    TooShort { len: usize, need: usize },
    #[error("no closed form implemented for moment d={d}, k={k}")]
    UnsupportedForm { d: usize, k: u32 },
    #[error("moment (d={d}, k={k}) missing from the table; request it in empirical_moments")]
    MissingMoment { d: usize, k: u32 },
    #[error("found {found} distinct jump values where {expected} were expected; a multiplier may be rational or N too small")]
    WrongLevelCount { expected: usize, found: usize },
    #[error("jump at index {index} does not fit in i64")]
    JumpOverflow { index: u64 },
    #[error("jump spectrum is degenerate: {detail}")]
    DegenerateSpectrum { detail: String },
    #[error("{what} = {value} is outside its valid range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("moment-inversion discriminant is negative ({value}); raise N or check d")]
    DiscriminantNegative { value: f64 },
    #[error("moment-inversion denominator {value} is too close to zero")]
    DenominatorNearZero { value: f64 },
}

/// Empirical moment table for the deficit `n·slope - a_n`.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub d: usize,
    /// `(d, k) -> empirical k-th moment of the deficit`.
    pub t: BTreeMap<(usize, u32), f64>,
    /// Standard error of each empirical moment.
    pub stderr: BTreeMap<(usize, u32), f64>,
    /// Least-squares slope estimate of `Παᵢ` (exact rational arithmetic).
    pub slope: Rational,
    /// The endpoint estimate `a_N / N`, kept for comparison.
    pub slope_endpoint: Rational,
    pub m_used: u64,
    pub n_slope: u64,
    pub flags: Vec<String>,
}

impl MomentTable {
    fn moment(&self, d: usize, k: u32) -> Result<f64, NestedError> {
        self.t
            .get(&(d, k))
            .copied()
            .ok_or(NestedError::MissingMoment { d, k })
    }

    fn se(&self, d: usize, k: u32) -> f64 {
        self.stderr.get(&(d, k)).copied().unwrap_or(0.0)
    }
}

/// Estimate the slope and the requested deficit moments from the data.
pub fn empirical_moments(
    seq: &IntegerSequence,
    d: usize,
    ks: &[u32],
) -> Result<MomentTable, NestedError> {
    if !(d == 2 || d == 3) {
        return Err(NestedError::UnsupportedForm { d, k: 0 });
    }
    let n = seq.len() as u64;
    if n < 100 {
        return Err(NestedError::TooShort {
            len: seq.len(),
            need: 100,
        });
    }
    let vals = seq.values();
    let big_n = BigInt::from(n);

    // Least squares of a_n on n with intercept, in exact integer arithmetic:
    // slope = (N·Σ n·a_n − Σn·Σa_n) / (N·Σn² − (Σn)²).
    let sx = (&big_n * (&big_n + 1u32)) / 2u32;
    let sxx = (&big_n * (&big_n + 1u32) * (2u32 * &big_n + 1u32)) / 6u32;
    let mut sy = BigInt::zero();
    let mut sxy = BigInt::zero();
    for (i, v) in vals.iter().enumerate() {
        sy += v;
        sxy += v * BigInt::from(i as u64 + 1);
    }
    let denom = &big_n * &sxx - &sx * &sx;
    let slope = Rational::new(&big_n * &sxy - &sx * &sy, denom);
    let slope_endpoint = Rational::new(vals[vals.len() - 1].clone(), big_n);

    let slope_f = rational_to_f64(&slope);
    let deficits: Vec<f64> = vals
        .iter()
        .enumerate()
        .map(|(i, v)| slope_f * (i as f64 + 1.0) - v.to_f64().unwrap_or(f64::NAN))
        .collect();

    let mut t = BTreeMap::new();
    let mut stderr = BTreeMap::new();
    let mut flags = Vec::new();
    let half = deficits.len() / 2;
    for &k in ks {
        let powers: Vec<f64> = deficits.iter().map(|x| x.powi(k as i32)).collect();
        let mean = powers.iter().sum::<f64>() / powers.len() as f64;
        let var = powers.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
            / powers.len() as f64;
        let se = (var / powers.len() as f64).sqrt();
        t.insert((d, k), mean);
        stderr.insert((d, k), se);
        // Secondary sanity check: the two half-sample means should agree.
        let m1 = powers[..half].iter().sum::<f64>() / half as f64;
        let m2 = powers[half..].iter().sum::<f64>() / (powers.len() - half) as f64;
        if (m1 - m2).abs() > 10.0 * se.max(1e-12) {
            let flag = "moment-drift".to_string();
            if !flags.contains(&flag) {
                flags.push(flag);
            }
        }
    }

    // A slope this close to a small-denominator rational signals a rational
    // product of multipliers, which biases the deficit averages.
    let window = Rational::from_float((10.0 / (n as f64).powf(1.5)).max(1e-12))
        .unwrap_or_else(Rational::zero);
    let lo = &slope - &window;
    let hi = &slope + &window;
    let snapped = simplest_in_interval(&lo, &hi);
    if snapped.denom() <= &BigInt::from(100) {
        flags.push("slope-near-rational".to_string());
    }

    Ok(MomentTable {
        d,
        t,
        stderr,
        slope,
        slope_endpoint,
        m_used: n,
        n_slope: n,
        flags,
    })
}

/// Closed form of the deficit moment `T_{d,k}` as an expression in the
/// multipliers; exact when the inputs are rational.
pub fn moment_formula(
    d: usize,
    k: u32,
    alphas: &[RealExpr],
) -> Result<RealExpr, NestedError> {
    let half = RealExpr::ratio(1, 2);
    let one = RealExpr::integer(1);
    match (d, k) {
        (2, 1) => {
            let a2 = alphas[1].clone();
            Ok(one.add(a2).mul(half))
        }
        (3, 1) => Ok(t31(alphas)),
        (3, 2) => {
            let a2 = alphas[1].clone();
            let a3 = alphas[2].clone();
            let lin = one
                .clone()
                .add(a2.clone())
                .mul(half)
                .mul(a3.clone());
            let quad = RealExpr::integer(2)
                .add(RealExpr::integer(3).mul(a2.clone()))
                .add(RealExpr::integer(2).mul(a2.clone()).mul(a2))
                .mul(RealExpr::ratio(1, 6))
                .mul(a3.clone())
                .mul(a3);
            Ok(RealExpr::ratio(1, 3).add(lin).add(quad))
        }
        (3, 3) => {
            let a2 = alphas[1].clone();
            let a3 = alphas[2].clone();
            let a3sq = a3.clone().mul(a3.clone());
            let bracket = one
                .add(a3.clone())
                .add(a3sq.clone())
                .add(a3.clone().add(a3sq.clone()).mul(a2.clone()))
                .add(a3sq.mul(a2.clone()).mul(a2));
            Ok(half.mul(t31(alphas)).mul(bracket))
        }
        _ => Err(NestedError::UnsupportedForm { d, k }),
    }
}

fn t31(alphas: &[RealExpr]) -> RealExpr {
    let a2 = alphas[1].clone();
    let a3 = alphas[2].clone();
    RealExpr::integer(1)
        .add(a3.clone())
        .add(a2.mul(a3))
        .mul(RealExpr::ratio(1, 2))
}

/// Midpoint-rule integration of the squared deficit
/// `(α₂α₃ε₁ + α₃ε₂ + ε₃)²` over `[0,1)³` — an independent check of the
/// quadratic closed form.
pub fn t32_by_quadrature(alpha2: f64, alpha3: f64, grid: usize) -> f64 {
    let a = alpha2 * alpha3;
    let b = alpha3;
    let g = grid as f64;
    let mut sum = 0.0;
    for i in 0..grid {
        let e1 = (i as f64 + 0.5) / g;
        for j in 0..grid {
            let e2 = (j as f64 + 0.5) / g;
            for k in 0..grid {
                let e3 = (k as f64 + 0.5) / g;
                sum += (a * e1 + b * e2 + e3).powi(2);
            }
        }
    }
    sum / (g * g * g)
}

/// Result of a moment inversion.
#[derive(Debug, Clone)]
pub struct MomentInversion {
    /// Innermost multiplier first.
    pub alphas: Vec<Estimate>,
    /// Sign branch chosen by the cubic solve (d = 3 only).
    pub branch_sign: Option<f64>,
    /// `|empirical T_{3,2} − closed form at the recovered point|`, when the
    /// table carries the second moment.
    pub residual_t32: Option<f64>,
    pub slope: f64,
    pub flags: Vec<String>,
    pub n: u64,
}

impl MomentInversion {
    pub fn to_report(&self) -> RecoveryReport {
        let mut r = RecoveryReport::new("nested", self.alphas.len(), self.n);
        r.recovered = self.alphas.clone();
        r.slope = Some(self.slope);
        r.flags = self.flags.clone();
        r = r.with_diagnostic("method", serde_json::json!("moments"));
        if let Some(s) = self.branch_sign {
            r = r.with_diagnostic("branch_sign", serde_json::json!(s));
        }
        if let Some(res) = self.residual_t32 {
            r = r.with_diagnostic("residual_t32", serde_json::json!(res));
        }
        r
    }
}

/// `α₂ = 2T_{2,1} − 1`, `α₁ = P₂/α₂`.
pub fn invert_moments_d2(m: &MomentTable) -> Result<MomentInversion, NestedError> {
    let t21 = m.moment(2, 1)?;
    let p = rational_to_f64(&m.slope);
    let a2 = 2.0 * t21 - 1.0;
    if !(0.0..1.0).contains(&a2) {
        return Err(NestedError::OutOfRange {
            what: "alpha2",
            value: a2,
        });
    }
    if p <= 0.0 {
        return Err(NestedError::OutOfRange {
            what: "slope",
            value: p,
        });
    }
    let a1 = p / a2;
    let mut flags = m.flags.clone();
    if a1 >= 1.1 || a1 <= 0.0 {
        return Err(NestedError::OutOfRange {
            what: "alpha1",
            value: a1,
        });
    }
    if a1 > 1.0 {
        flags.push("alpha1-above-one".to_string());
    }
    let se = m.se(2, 1);
    let r2 = 2.0 * se;
    let r1 = p / (a2 * a2) * r2 + 1e-9;
    Ok(MomentInversion {
        alphas: vec![Estimate::approx(a1, r1), Estimate::approx(a2, r2)],
        branch_sign: None,
        residual_t32: None,
        slope: p,
        flags,
        n: m.n_slope,
    })
}

fn solve_d3(t: f64, t33: f64, p: f64) -> Result<(f64, f64, f64, f64), NestedError> {
    let a = 4.0 * t.powi(3) - 2.0 * t * t + t - 2.0 * t33;
    if a.abs() < 1e-12 {
        return Err(NestedError::DenominatorNearZero { value: a });
    }
    let s = a.signum();
    let mut disc = -12.0 * t.powi(4) + 4.0 * t.powi(3) - 3.0 * t * t + 8.0 * t33 * t;
    if disc < -1e-9 {
        return Err(NestedError::DiscriminantNegative { value: disc });
    }
    disc = disc.max(0.0);
    let a2 = (-4.0 * t.powi(3) - t + 4.0 * t33 + s * (1.0 - 2.0 * t) * disc.sqrt())
        / (2.0 * a);
    let denom = 1.0 + a2;
    if denom.abs() < 1e-9 {
        return Err(NestedError::DenominatorNearZero { value: denom });
    }
    let a3 = (2.0 * t - 1.0) / denom;
    if a2.abs() < 1e-12 || a3.abs() < 1e-12 {
        return Err(NestedError::DenominatorNearZero { value: a2.min(a3) });
    }
    let a1 = p / (a2 * a3);
    Ok((a1, a2, a3, s))
}

/// Closed-form inversion from `(T_{3,1}, T_{3,3}, P₃)` with a sign branch;
/// the second moment, when present, cross-checks the chosen branch.
pub fn invert_moments_d3(m: &MomentTable) -> Result<MomentInversion, NestedError> {
    let t = m.moment(3, 1)?;
    let t33 = m.moment(3, 3)?;
    let p = rational_to_f64(&m.slope);
    let (a1, a2, a3, s) = solve_d3(t, t33, p)?;
    for (name, v) in [("alpha2", a2), ("alpha3", a3)] {
        if !(0.0..1.0).contains(&v) {
            return Err(NestedError::OutOfRange { what: name, value: v });
        }
    }
    let mut flags = m.flags.clone();
    if a1 >= 1.1 || a1 <= 0.0 {
        return Err(NestedError::OutOfRange {
            what: "alpha1",
            value: a1,
        });
    }
    if a1 > 1.0 {
        flags.push("alpha1-above-one".to_string());
    }

    // Error radii by propagating one standard error of each input moment.
    let se_t = m.se(3, 1);
    let se_t33 = m.se(3, 3);
    let fallback = 10.0 * (se_t + se_t33);
    let base = [a1, a2, a3];
    let mut radii = [1e-9f64; 3];
    for (dt, dt33) in [(se_t, 0.0), (0.0, se_t33)] {
        match solve_d3(t + dt, t33 + dt33, p) {
            Ok((b1, b2, b3, _)) => {
                for (r, (b, a)) in radii
                    .iter_mut()
                    .zip([b1, b2, b3].iter().zip(base.iter()))
                {
                    *r += (b - a).abs();
                }
            }
            Err(_) => {
                for r in &mut radii {
                    *r += fallback;
                }
            }
        }
    }

    let residual_t32 = match m.moment(3, 2) {
        Ok(emp) => {
            let closed = moment_formula(
                3,
                2,
                &[
                    RealExpr::integer(0),
                    RealExpr::from_f64(a2).unwrap(),
                    RealExpr::from_f64(a3).unwrap(),
                ],
            )?;
            Some((emp - closed.to_f64()).abs())
        }
        Err(_) => None,
    };

    Ok(MomentInversion {
        alphas: vec![
            Estimate::approx(a1, radii[0]),
            Estimate::approx(a2, radii[1]),
            Estimate::approx(a3, radii[2]),
        ],
        branch_sign: Some(s),
        residual_t32,
        slope: p,
        flags,
        n: m.n_slope,
    })
}

/// The distinct jump values of the sequence with their occurrence counts,
/// ascending. Exactly `2^d` distinct values must occur.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSpectrum {
    /// `(jump value, count)`, ascending by value.
    pub levels: Vec<(i64, u64)>,
    pub d: usize,
    pub samples: u64,
}

impl JumpSpectrum {
    pub fn densities(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|(_, c)| *c as f64 / self.samples as f64)
            .collect()
    }
}

pub fn jump_spectrum(seq: &IntegerSequence, d: usize) -> Result<JumpSpectrum, NestedError> {
    let need = (1usize << d) + 1;
    if seq.len() < need {
        return Err(NestedError::TooShort {
            len: seq.len(),
            need,
        });
    }
    let vals = seq.values();
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for i in 0..vals.len() - 1 {
        let diff = &vals[i + 1] - &vals[i];
        let j = diff.to_i64().ok_or(NestedError::JumpOverflow {
            index: i as u64 + 1,
        })?;
        *counts.entry(j).or_insert(0) += 1;
    }
    let expected = 1usize << d;
    if counts.len() != expected {
        return Err(NestedError::WrongLevelCount {
            expected,
            found: counts.len(),
        });
    }
    Ok(JumpSpectrum {
        levels: counts.into_iter().collect(),
        d,
        samples: vals.len() as u64 - 1,
    })
}

#[derive(Debug, Clone)]
pub struct NestedJumpRecovery {
    /// Fractional parts of the multipliers, innermost first.
    pub fracs: Vec<Estimate>,
    /// Total density per Hamming weight of the word ranks (diagnostic).
    pub weight_coefficients: Vec<f64>,
    pub levels: Vec<(i64, f64)>,
    pub flags: Vec<String>,
    pub n: u64,
}

impl NestedJumpRecovery {
    pub fn to_report(&self) -> RecoveryReport {
        let mut r = RecoveryReport::new("nested", self.fracs.len(), self.n);
        r.recovered = self.fracs.clone();
        r.flags = self.flags.clone();
        r = r.with_diagnostic("method", serde_json::json!("jumps"));
        r = r.with_diagnostic(
            "levels",
            serde_json::json!(self
                .levels
                .iter()
                .map(|(v, dens)| serde_json::json!([v, dens]))
                .collect::<Vec<_>>()),
        );
        r = r.with_diagnostic(
            "weight_coefficients",
            serde_json::json!(self.weight_coefficients),
        );
        r
    }
}

/// Read the fractional parts off the spectrum's conditional densities.
///
/// Ascending levels are assigned to lexicographically ordered words (rank
/// `t` ↔ the `d`-bit binary digits of `t`, most significant bit innermost).
pub fn recover_nested_jumps(spec: &JumpSpectrum) -> Result<NestedJumpRecovery, NestedError> {
    let d = spec.d;
    let counts: Vec<u64> = spec.levels.iter().map(|(_, c)| *c).collect();
    if counts.len() != 1 << d {
        return Err(NestedError::WrongLevelCount {
            expected: 1 << d,
            found: counts.len(),
        });
    }
    let sum = |range: std::ops::Range<usize>| counts[range].iter().sum::<u64>();
    let binom_se = |p: f64, n: u64| (p.max(1e-12) * (1.0 - p).max(1e-12) / n as f64).sqrt();

    let mut fracs = Vec::with_capacity(d);
    for i in 1..=d {
        let blk = 1usize << (d - i);
        if i == 1 {
            let total = spec.samples;
            let up = sum(blk..2 * blk);
            let p = up as f64 / total as f64;
            fracs.push(Estimate::approx(p, 3.0 * binom_se(p, total)));
        } else {
            let c0 = sum(0..2 * blk);
            let u0 = sum(blk..2 * blk);
            let c1 = sum(2 * blk..4 * blk);
            let u1 = sum(3 * blk..4 * blk);
            if c0 == 0 || c1 == 0 {
                return Err(NestedError::DegenerateSpectrum {
                    detail: format!("no samples under the level-{i} conditioning prefix"),
                });
            }
            let p0 = u0 as f64 / c0 as f64;
            let p1 = u1 as f64 / c1 as f64;
            let f = (p1 - p0).rem_euclid(1.0);
            let se = binom_se(p0, c0) + binom_se(p1, c1);
            fracs.push(Estimate::approx(f, 3.0 * se));
        }
    }

    let densities = spec.densities();
    let mut weight_coefficients = vec![0.0f64; d + 1];
    for (rank, dens) in densities.iter().enumerate() {
        weight_coefficients[rank.count_ones() as usize] += dens;
    }

    Ok(NestedJumpRecovery {
        fracs,
        weight_coefficients,
        levels: spec
            .levels
            .iter()
            .zip(densities.iter())
            .map(|((v, _), dens)| (*v, *dens))
            .collect(),
        flags: Vec::new(),
        n: spec.samples + 1,
    })
}
