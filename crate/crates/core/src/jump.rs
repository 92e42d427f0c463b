//! Recovery of hidden parameters from sequences `a_n = Σᵢ ⌊n·αᵢ + γᵢ⌋`.
//!
//! Successive differences of such a sequence jump by an integer in `[0, d]`
//! once the integer-part trend is removed, and coordinate `j` contributes a
//! jump exactly when `{n·αⱼ + γⱼ}` lands in `[1 - {αⱼ}, 1)` — an event of
//! density `{αⱼ}`. For irrational, jointly equidistributing multipliers the
//! observed jump-size frequencies therefore converge to the coefficients of
//! `Π ({αⱼ}·z + 1 - {αⱼ})`, and factoring that polynomial returns the
//! multiset of fractional parts: each root `z ≤ 0` maps back through
//! `α = 1/(1-z)`.
//!
//! The shifts come from a second pass: indices where all `d` coordinates
//! jump simultaneously pin `{n·αⱼ}` inside an arc of length `{αⱼ}` ending at
//! `1 - γⱼ (mod 1)`, so a circular fit of the sampled fractional parts
//! estimates each `γⱼ` from the arc's upper edge.
//!
//! Integer parts of the multipliers are *not* individually recoverable —
//! only their sum, through the slope `a_N / N`. Results carry that caveat
//! explicitly.

use crate::genpoly::EvalError;
use crate::report::{Estimate, RecoveryReport};
use crate::reals::{frac_certified, rational_to_f64, Rational, RealError, RealExpr};
use crate::roots::{
    alpha_from_root, alpha_radius, nonpositive_real_roots, root_radius, RootError,
};
use crate::seqgen::IntegerSequence;
use num_bigint::BigInt;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JumpError {
    #[error("need at least 2 values to form jumps, got {0}")]
    TooShort(usize),
    #[error("jump at index {index} does not fit a machine word")]
    JumpOverflow { index: usize },
    #[error("detrended jumps span [0, {span}] but d = {d}; the multipliers are rational, d is wrong, or the family does not match")]
    TrendMismatch { span: i64, d: usize },
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error("recovered fractional part {alpha} lies outside [0, 1] beyond its radius {radius}")]
    AlphaOutOfRange { alpha: f64, radius: f64 },
    #[error("no index with a simultaneous {d}-jump was observed; raise the sample size")]
    NoDJumps { d: usize },
    #[error("sequence looks rational or mismatched rather than generic: {detail}")]
    RationalCase { detail: String },
    #[error(transparent)]
    Real(#[from] RealError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Counts of successive differences `a_{n+1} - a_n` over `1 ≤ n < N`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpHistogram {
    pub counts: BTreeMap<i64, u64>,
    /// Sequence length `N`; the counts sum to `N - 1`.
    pub n: u64,
}

pub fn jump_histogram(seq: &IntegerSequence) -> Result<JumpHistogram, JumpError> {
    let values = seq.values();
    if values.len() < 2 {
        return Err(JumpError::TooShort(values.len()));
    }
    let mut counts = BTreeMap::new();
    for (idx, pair) in values.windows(2).enumerate() {
        let diff = &pair[1] - &pair[0];
        let r = i64::try_from(&diff).map_err(|_| JumpError::JumpOverflow { index: idx + 1 })?;
        *counts.entry(r).or_insert(0u64) += 1;
    }
    Ok(JumpHistogram {
        counts,
        n: values.len() as u64,
    })
}

/// Empirical jump-frequency polynomial after detrending.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPolynomial {
    /// `coefficients[r]` estimates the density of detrended `r`-jumps,
    /// `r = 0..=d`.
    pub coefficients: Vec<f64>,
    /// The integer trend removed from every jump (the minimum observed
    /// jump; equals the sum of the multipliers' integer parts for generic
    /// inputs).
    pub trend: i64,
    /// Number of jump samples (`N - 1`).
    pub samples: u64,
}

impl JumpPolynomial {
    /// Sampling noise floor: empirical weights below this are treated as
    /// possibly zero.
    pub fn noise_floor(&self) -> f64 {
        3.0 / self.samples as f64
    }

    /// Per-coefficient standard error under a binomial model, floored by
    /// one count.
    pub fn sigmas(&self) -> Vec<f64> {
        let m = self.samples as f64;
        self.coefficients
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * (1.0 - v.clamp(0.0, 1.0)) / m).sqrt() + 1.0 / m)
            .collect()
    }
}

/// Normalize the histogram into degree-`d` frequency coefficients. The
/// minimum observed jump is taken as the integer trend and subtracted;
/// remaining support must fit in `[0, d]`.
pub fn fit_jump_polynomial(h: &JumpHistogram, d: usize) -> Result<JumpPolynomial, JumpError> {
    let trend = *h.counts.keys().next().expect("histogram is nonempty");
    let top = *h.counts.keys().last().expect("histogram is nonempty");
    let span = top - trend;
    if span > d as i64 {
        return Err(JumpError::TrendMismatch { span, d });
    }
    let samples = h.n - 1;
    let mut coefficients = vec![0.0f64; d + 1];
    for (&r, &c) in &h.counts {
        coefficients[(r - trend) as usize] = c as f64 / samples as f64;
    }
    Ok(JumpPolynomial {
        coefficients,
        trend,
        samples,
    })
}

/// Fractional-part estimates extracted from a fitted jump polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaEstimates {
    /// Ascending by value.
    pub alphas: Vec<Estimate>,
    pub flags: Vec<String>,
}

/// Factor the polynomial and map roots to fractional parts.
///
/// Coefficients below the noise floor at the top end remove a degree each
/// and stand for multipliers with fractional part 0 (integer multipliers);
/// a vanishing constant term stands for a fractional part approaching 1.
/// Both cases are flagged — the data cannot distinguish exact degeneracy
/// from undersampling.
pub fn roots_to_alphas(p: &JumpPolynomial) -> Result<AlphaEstimates, JumpError> {
    let floor = p.noise_floor();
    let mut flags: Vec<String> = p
        .coefficients
        .iter()
        .enumerate()
        .filter(|(_, v)| **v < floor)
        .map(|(r, _)| format!("weight-{r}-below-noise-floor"))
        .collect();

    let mut coeffs = p.coefficients.clone();
    let mut alphas: Vec<Estimate> = Vec::new();
    while coeffs.len() > 1 && *coeffs.last().unwrap() < floor {
        coeffs.pop();
        alphas.push(Estimate::approx(0.0, floor));
        flags.push("degenerate-zero-part".to_string());
    }
    while coeffs.len() > 1 && coeffs[0] < floor {
        coeffs.remove(0);
        alphas.push(Estimate::approx(1.0, floor));
        flags.push("degenerate-unit-part".to_string());
    }

    if coeffs.len() > 1 {
        let sigmas = p.sigmas();
        let zs = nonpositive_real_roots(&coeffs, 1e-6)?;
        for z in zs {
            let a = alpha_from_root(z);
            let rz = root_radius(&coeffs, &sigmas[..coeffs.len()], z);
            let ra = alpha_radius(z, rz).max(1e-12).min(1.0);
            if a > 1.0 + ra || a < -ra {
                return Err(JumpError::AlphaOutOfRange {
                    alpha: a,
                    radius: ra,
                });
            }
            alphas.push(Estimate::approx(a.clamp(0.0, 1.0), ra));
        }
    }
    alphas.sort_by(|x, y| x.value.partial_cmp(&y.value).unwrap());
    Ok(AlphaEstimates { alphas, flags })
}

/// Indices `n` (1-based) whose detrended jump equals `d`.
pub fn d_jump_indices(seq: &IntegerSequence, d: usize) -> Result<(Vec<u64>, i64), JumpError> {
    let h = jump_histogram(seq)?;
    let trend = *h.counts.keys().next().unwrap();
    let values = seq.values();
    let want = BigInt::from(trend + d as i64);
    let mut out = Vec::new();
    for (idx, pair) in values.windows(2).enumerate() {
        if &pair[1] - &pair[0] == want {
            out.push(idx as u64 + 1);
        }
    }
    Ok((out, trend))
}

/// Recover the shifts given (exact or certified) multipliers.
///
/// At every full-`d` jump index `i`, `{i·αⱼ}` lies in the arc
/// `[1 - αⱼ - γⱼ, 1 - γⱼ) mod 1`. The samples are fit circularly: the
/// largest gap in sorted order marks the complement of the support arc, and
/// the arc's upper edge estimates `1 - γⱼ`. `index_cap` limits how large an
/// index may be used — required when the multipliers themselves carry error
/// `ρ`, since `{i·α}` amplifies it by `i` (callers pass `1/(10ρ)`).
pub fn recover_gammas(
    seq: &IntegerSequence,
    alphas: &[RealExpr],
    d: usize,
    max_p: u32,
    index_cap: Option<u64>,
) -> Result<Vec<Estimate>, JumpError> {
    let (mut indices, _trend) = d_jump_indices(seq, d)?;
    if let Some(cap) = index_cap {
        indices.retain(|&i| i <= cap);
    }
    if indices.is_empty() {
        return Err(JumpError::NoDJumps { d });
    }
    let mut out = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let mut samples: Vec<f64> = Vec::with_capacity(indices.len());
        for &i in &indices {
            let x = RealExpr::Rational(Rational::from_integer(BigInt::from(i))).mul(alpha.clone());
            let (_, frac) = frac_certified(&x, max_p)?;
            samples.push(frac.midpoint_f64());
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = samples.len();
        // Largest circular gap separates the support arc from the rest.
        let (mut gap_at, mut gap_len) = (m - 1, samples[0] + 1.0 - samples[m - 1]);
        for t in 0..m.saturating_sub(1) {
            let g = samples[t + 1] - samples[t];
            if g > gap_len {
                gap_len = g;
                gap_at = t;
            }
        }
        let arc_upper = samples[gap_at];
        let arc_len = 1.0 - gap_len;
        let gamma = (1.0 - arc_upper).rem_euclid(1.0);
        let radius = (arc_len + 1.0) / (m as f64 + 1.0);
        out.push(Estimate::approx(gamma, radius));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RecoverLinearOptions {
    /// Attempt the second (shift-recovery) pass.
    pub recover_gammas: bool,
    /// Exact multipliers to use for the shift pass; when absent the
    /// estimated ones are used under an index cap.
    pub known_alphas: Option<Vec<RealExpr>>,
    /// Precision cap for certified fractional parts.
    pub max_p: u32,
}

impl Default for RecoverLinearOptions {
    fn default() -> Self {
        RecoverLinearOptions {
            recover_gammas: false,
            known_alphas: None,
            max_p: crate::reals::DEFAULT_PRECISION_CAP,
        }
    }
}

/// Full linear-sum recovery result.
#[derive(Debug, Clone)]
pub struct LinearRecovery {
    pub alphas: Vec<Estimate>,
    /// Exact end-slope `a_N / N`; carries the sum of integer parts.
    pub slope: Rational,
    /// Integer trend removed from the jumps.
    pub trend: i64,
    pub gammas: Option<Vec<Estimate>>,
    pub flags: Vec<String>,
    pub n: u64,
    /// What stays fundamentally unidentifiable from the data.
    pub ambiguity_note: String,
}

const AMBIGUITY_NOTE: &str = "fractional parts are recovered as a multiset only; any permutation, \
and any reallocation of integer parts with the same total (visible in the slope), generates the \
identical sequence";

impl LinearRecovery {
    pub fn to_report(&self) -> RecoveryReport {
        let mut r = RecoveryReport::new("linear-sum", self.alphas.len(), self.n);
        r.recovered = self.alphas.clone();
        r.slope = Some(rational_to_f64(&self.slope));
        r.slope_exact = Some(self.slope.to_string());
        r.gammas = self.gammas.clone();
        r.flags = self.flags.clone();
        r = r.with_diagnostic("trend", serde_json::json!(self.trend));
        r = r.with_diagnostic("ambiguity", serde_json::json!(self.ambiguity_note));
        r
    }
}

/// End-to-end recovery from a raw sequence hypothesized to be a linear sum
/// of `d` shifted floors.
pub fn recover_linear(
    seq: &IntegerSequence,
    d: usize,
    opts: &RecoverLinearOptions,
) -> Result<LinearRecovery, JumpError> {
    let hist = jump_histogram(seq)?;
    let poly = fit_jump_polynomial(&hist, d).map_err(|e| match e {
        JumpError::TrendMismatch { .. } => JumpError::RationalCase {
            detail: e.to_string(),
        },
        other => other,
    })?;
    let est = roots_to_alphas(&poly).map_err(|e| match e {
        JumpError::Roots(RootError::ComplexRoots { .. }) => JumpError::RationalCase {
            detail: e.to_string(),
        },
        other => other,
    })?;
    let n = seq.len();
    let slope = Rational::new(seq.get(n).clone(), BigInt::from(n));

    let gammas = if opts.recover_gammas {
        let (exprs, cap): (Vec<RealExpr>, Option<u64>) = match &opts.known_alphas {
            Some(known) => (known.clone(), None),
            None => {
                // Estimated multipliers: cap usable indices by their radius.
                let worst = est
                    .alphas
                    .iter()
                    .map(|e| e.radius)
                    .fold(1e-12f64, f64::max);
                let cap = (1.0 / (10.0 * worst)).max(1.0) as u64;
                let exprs = est
                    .alphas
                    .iter()
                    .map(|e| {
                        RealExpr::Rational(
                            Rational::from_float(e.value)
                                .unwrap_or_else(|| Rational::from_integer(BigInt::from(0))),
                        )
                    })
                    .collect();
                (exprs, Some(cap))
            }
        };
        Some(recover_gammas(seq, &exprs, d, opts.max_p, cap)?)
    } else {
        None
    };

    Ok(LinearRecovery {
        alphas: est.alphas,
        slope,
        trend: poly.trend,
        gammas,
        flags: est.flags,
        n: n as u64,
        ambiguity_note: AMBIGUITY_NOTE.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::{gen_linear_sum, ParameterVector};
    use num_traits::One;

    fn sqrt_int(n: i64) -> RealExpr {
        RealExpr::sqrt(Rational::from_integer(BigInt::from(n))).unwrap()
    }

    fn seq_from(vals: &[i64]) -> IntegerSequence {
        IntegerSequence::new(vals.iter().map(|&v| BigInt::from(v)).collect())
    }

    #[test]
    fn histogram_of_arithmetic_progression() {
        let h = jump_histogram(&seq_from(&[0, 1, 2, 3, 4])).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(1, 4)]));
        assert_eq!(h.n, 5);
    }

    #[test]
    fn one_jump_share_estimates_alpha() {
        let p = ParameterVector::new(vec![sqrt_int(2).sub(RealExpr::integer(1))], None).unwrap();
        let s = gen_linear_sum(&p, 10_000, 256).unwrap();
        let h = jump_histogram(&s).unwrap();
        let ones = h.counts[&1] as f64 / 9_999.0;
        assert!((ones - (std::f64::consts::SQRT_2 - 1.0)).abs() < 0.01);
    }

    #[test]
    fn two_dim_support() {
        let p = ParameterVector::new(
            vec![
                sqrt_int(2).sub(RealExpr::integer(1)),
                sqrt_int(3).sub(RealExpr::integer(1)),
            ],
            None,
        )
        .unwrap();
        let s = gen_linear_sum(&p, 5_000, 256).unwrap();
        let h = jump_histogram(&s).unwrap();
        let keys: Vec<i64> = h.counts.keys().copied().collect();
        assert!(keys.iter().all(|k| (0..=2).contains(k)), "{keys:?}");
    }

    #[test]
    fn normalization_of_counts() {
        let h = JumpHistogram {
            counts: BTreeMap::from([(0, 586), (1, 414)]),
            n: 1001,
        };
        let p = fit_jump_polynomial(&h, 1).unwrap();
        assert_eq!(p.coefficients, vec![0.586, 0.414]);
        assert_eq!(p.trend, 0);
    }

    #[test]
    fn trend_is_subtracted() {
        // Multiplier with integer part 2 shifts all jumps by 2.
        let base = ParameterVector::new(vec![sqrt_int(2).sub(RealExpr::integer(1))], None).unwrap();
        let lifted = ParameterVector::new(
            vec![sqrt_int(2).add(RealExpr::integer(1))],
            None,
        )
        .unwrap();
        let s0 = gen_linear_sum(&base, 3_000, 256).unwrap();
        let s2 = gen_linear_sum(&lifted, 3_000, 256).unwrap();
        let p0 = fit_jump_polynomial(&jump_histogram(&s0).unwrap(), 1).unwrap();
        let p2 = fit_jump_polynomial(&jump_histogram(&s2).unwrap(), 1).unwrap();
        assert_eq!(p0.trend, 0);
        assert_eq!(p2.trend, 2);
        assert_eq!(p0.coefficients, p2.coefficients);
    }

    #[test]
    fn support_beyond_d_is_rejected() {
        let h = jump_histogram(&seq_from(&[0, 0, 3, 3, 6])).unwrap();
        assert!(matches!(
            fit_jump_polynomial(&h, 2),
            Err(JumpError::TrendMismatch { span: 3, d: 2 })
        ));
    }

    #[test]
    fn fitted_polynomial_recovers_parts_at_modest_sample_size() {
        let a1 = std::f64::consts::SQRT_2 - 1.0;
        let a2 = 3.0f64.sqrt() - 1.0;
        let p = ParameterVector::new(
            vec![
                sqrt_int(2).sub(RealExpr::integer(1)),
                sqrt_int(3).sub(RealExpr::integer(1)),
            ],
            None,
        )
        .unwrap();
        let s = gen_linear_sum(&p, 20_000, 256).unwrap();
        let jp = fit_jump_polynomial(&jump_histogram(&s).unwrap(), 2).unwrap();
        // Top coefficient approximates the product of the parts.
        assert!((jp.coefficients[2] - a1 * a2).abs() < 0.02);
        let est = roots_to_alphas(&jp).unwrap();
        assert_eq!(est.alphas.len(), 2);
        assert!((est.alphas[0].value - a1).abs() < 0.02);
        assert!((est.alphas[1].value - a2).abs() < 0.02);
    }

    #[test]
    fn constant_jumps_give_degenerate_zero_parts() {
        // Complementary pair: a_n = n - 1 exactly; the histogram holds no
        // information about the individual parts.
        let p = ParameterVector::new(
            vec![
                sqrt_int(2).sub(RealExpr::integer(1)),
                RealExpr::integer(2).sub(sqrt_int(2)),
            ],
            None,
        )
        .unwrap();
        let s = gen_linear_sum(&p, 2_000, 256).unwrap();
        let r = recover_linear(&s, 2, &RecoverLinearOptions::default()).unwrap();
        assert!(Rational::one() - &r.slope < Rational::new(BigInt::from(1), BigInt::from(100)));
        assert!(!r.flags.is_empty());
        assert_eq!(r.alphas.len(), 2);
    }

    #[test]
    fn rational_multipliers_are_reported_as_such() {
        let p = ParameterVector::new(
            vec![RealExpr::ratio(1, 2), RealExpr::ratio(1, 2)],
            None,
        )
        .unwrap();
        let s = gen_linear_sum(&p, 2_000, 64).unwrap();
        let r = recover_linear(&s, 2, &RecoverLinearOptions::default());
        assert!(matches!(r, Err(JumpError::RationalCase { .. })), "{r:?}");
    }

    #[test]
    fn gammas_zero_shift_estimates_tend_small() {
        let alphas = vec![sqrt_int(2).sub(RealExpr::integer(1))];
        let p = ParameterVector::new(alphas.clone(), None).unwrap();
        let s = gen_linear_sum(&p, 10_000, 256).unwrap();
        let g = recover_gammas(&s, &alphas, 1, 256, None).unwrap();
        assert!(g[0].value < 0.01 || g[0].value > 0.99, "{:?}", g[0]);
    }

    #[test]
    fn gamma_quarter_recovered() {
        let alphas = vec![sqrt_int(2).sub(RealExpr::integer(1))];
        let p = ParameterVector::new(
            alphas.clone(),
            Some(vec![RealExpr::ratio(1, 4)]),
        )
        .unwrap();
        let s = gen_linear_sum(&p, 10_000, 256).unwrap();
        let g = recover_gammas(&s, &alphas, 1, 256, None).unwrap();
        assert!((g[0].value - 0.25).abs() < 0.02, "{:?}", g[0]);
    }

    #[test]
    fn wrapped_arc_gamma_recovered() {
        // gamma_2 = 1/2 with alpha_2 = sqrt(3)-1 makes the support arc wrap
        // past 1, exercising the circular fit.
        let alphas = vec![
            sqrt_int(2).sub(RealExpr::integer(1)),
            sqrt_int(3).sub(RealExpr::integer(1)),
        ];
        let p = ParameterVector::new(
            alphas.clone(),
            Some(vec![RealExpr::ratio(1, 4), RealExpr::ratio(1, 2)]),
        )
        .unwrap();
        let s = gen_linear_sum(&p, 100_000, 256).unwrap();
        let g = recover_gammas(&s, &alphas, 2, 256, None).unwrap();
        assert!((g[0].value - 0.25).abs() < 0.02, "{:?}", g[0]);
        assert!((g[1].value - 0.50).abs() < 0.02, "{:?}", g[1]);
    }

    #[test]
    fn end_to_end_three_parts() {
        let p = ParameterVector::new(
            vec![
                sqrt_int(2).sub(RealExpr::integer(1)),
                sqrt_int(3).sub(RealExpr::integer(1)),
                sqrt_int(5).sub(RealExpr::integer(2)),
            ],
            None,
        )
        .unwrap();
        let s = gen_linear_sum(&p, 20_000, 256).unwrap();
        let r = recover_linear(&s, 3, &RecoverLinearOptions::default()).unwrap();
        let expect = [
            5.0f64.sqrt() - 2.0,
            std::f64::consts::SQRT_2 - 1.0,
            3.0f64.sqrt() - 1.0,
        ];
        assert_eq!(r.alphas.len(), 3);
        for (e, want) in r.alphas.iter().zip(expect) {
            assert!((e.value - want).abs() < 0.025, "{} vs {want}", e.value);
        }
        let report = r.to_report();
        assert_eq!(report.family, "linear-sum");
        assert!(report.to_json_pretty().contains("ambiguity"));
    }

    #[test]
    fn estimated_alphas_feed_gamma_pass_with_cap() {
        let p = ParameterVector::new(
            vec![sqrt_int(2).sub(RealExpr::integer(1))],
            Some(vec![RealExpr::ratio(1, 4)]),
        )
        .unwrap();
        let s = gen_linear_sum(&p, 50_000, 256).unwrap();
        let opts = RecoverLinearOptions {
            recover_gammas: true,
            known_alphas: None,
            ..RecoverLinearOptions::default()
        };
        let r = recover_linear(&s, 1, &opts).unwrap();
        let g = r.gammas.unwrap();
        // Alpha error is ~5e-3 at this N, so the capped gamma pass stays
        // coarse; it must still land in the right neighborhood.
        assert!((g[0].value - 0.25).abs() < 0.2, "{:?}", g[0]);
    }
}
