//! Recovery of multipliers from symmetric polynomials of floors.
//!
//! For a symmetric homogeneous form `K` of degree `D`, the normalized first
//! difference of `a_n = K(⌊nα₁⌋, …, ⌊nα_d⌋)`,
//!
//! ```text
//! Δ(n) = (a_{n+1} - a_n) / n^(D-1),
//! ```
//!
//! converges onto `2^d` limit points: writing `δᵢ(n) = ⌊(n+1)αᵢ⌋ - ⌊nαᵢ⌋ ∈
//! {⌊αᵢ⌋, ⌈αᵢ⌉}`, the leading term of `Δ(n)` is `Σᵢ Lᵢ·δᵢ(n)` where `Lᵢ =
//! ∂K/∂xᵢ(ᾱ)`. The limit set is therefore an affine cube: a base point plus
//! all subset sums of the gradient components `{L₁, …, L_d}`. Clustering the
//! observed `Δ(n)`, peeling the cube back into its edge multiset, and
//! inverting the gradient map recovers the multipliers.

use crate::genpoly::ClassicalPoly;
use crate::report::{Estimate, RecoveryReport};
use crate::reals::Rational;
use crate::seqgen::IntegerSequence;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymmetricError {
    #[error("unrecognized form {0:?}; expected product:<d>, powersum:<d>:<r>, or quadratic:<d>")]
    ParseForm(String),
    #[error("form needs {need}, got {got}")]
    BadForm { need: &'static str, got: usize },
    #[error("sequence of length {len} is too short; need at least {need} values")]
    TooShort { len: usize, need: usize },
    #[error("found {found} difference clusters where {expected} were expected; d or the form degree may be wrong")]
    WrongClusterCount { expected: usize, found: usize },
    #[error("corner multiset is not a subset-sum cube: {detail}")]
    PairingFailure { detail: String },
    #[error("gradient inversion produced a non-positive multiplier {value}")]
    NegativeIntermediate { value: f64 },
    #[error("corner count {0} is not a power of two")]
    NotPowerOfTwo(usize),
}

/// The symmetric forms whose gradient map has a closed-form inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetricForm {
    /// `x₁·x₂⋯x_d`, degree `d`.
    Product { d: usize },
    /// `x₁^r + ⋯ + x_d^r`, degree `r`.
    PowerSum { d: usize, r: u32 },
    /// `Σ_{i≤j} xᵢxⱼ` (all quadratic monomials), degree 2.
    QuadraticAll { d: usize },
}

impl SymmetricForm {
    pub fn d(&self) -> usize {
        match self {
            SymmetricForm::Product { d }
            | SymmetricForm::PowerSum { d, .. }
            | SymmetricForm::QuadraticAll { d } => *d,
        }
    }

    /// Homogeneity degree `D`.
    pub fn degree(&self) -> u32 {
        match self {
            SymmetricForm::Product { d } => *d as u32,
            SymmetricForm::PowerSum { r, .. } => *r,
            SymmetricForm::QuadraticAll { .. } => 2,
        }
    }

    pub fn parse(s: &str) -> Result<Self, SymmetricError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || SymmetricError::ParseForm(s.to_string());
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let form = match parts.as_slice() {
            ["product", d] => SymmetricForm::Product { d: num(d)? },
            ["powersum", d, r] => SymmetricForm::PowerSum {
                d: num(d)?,
                r: num(r)? as u32,
            },
            ["quadratic", d] => SymmetricForm::QuadraticAll { d: num(d)? },
            _ => return Err(bad()),
        };
        form.validate()?;
        Ok(form)
    }

    fn validate(&self) -> Result<(), SymmetricError> {
        match *self {
            SymmetricForm::Product { d } if d < 2 => Err(SymmetricError::BadForm {
                need: "d >= 2 for product",
                got: d,
            }),
            SymmetricForm::PowerSum { r, .. } if r < 2 => Err(SymmetricError::BadForm {
                need: "r >= 2 for powersum",
                got: r as usize,
            }),
            SymmetricForm::PowerSum { d, .. } if d < 1 => Err(SymmetricError::BadForm {
                need: "d >= 1 for powersum",
                got: d,
            }),
            SymmetricForm::QuadraticAll { d } if d < 2 => Err(SymmetricError::BadForm {
                need: "d >= 2 for quadratic",
                got: d,
            }),
            _ => Ok(()),
        }
    }

    pub fn to_classical(&self) -> ClassicalPoly {
        let d = self.d();
        match *self {
            SymmetricForm::Product { .. } => {
                let mut p = ClassicalPoly::constant(d, Rational::one());
                for i in 1..=d {
                    p = p.mul(&ClassicalPoly::var(d, i));
                }
                p
            }
            SymmetricForm::PowerSum { r, .. } => {
                let mut p = ClassicalPoly::zero(d);
                for i in 1..=d {
                    p = p.add(&ClassicalPoly::var(d, i).pow(r));
                }
                p
            }
            SymmetricForm::QuadraticAll { .. } => {
                let mut p = ClassicalPoly::zero(d);
                for i in 1..=d {
                    for j in i..=d {
                        p = p.add(&ClassicalPoly::var(d, i).mul(&ClassicalPoly::var(d, j)));
                    }
                }
                p
            }
        }
    }

    pub fn gradient_at(&self, alphas: &[f64]) -> Vec<f64> {
        assert_eq!(alphas.len(), self.d());
        match *self {
            SymmetricForm::Product { .. } => {
                let prod: f64 = alphas.iter().product();
                alphas.iter().map(|a| prod / a).collect()
            }
            SymmetricForm::PowerSum { r, .. } => alphas
                .iter()
                .map(|a| r as f64 * a.powi(r as i32 - 1))
                .collect(),
            SymmetricForm::QuadraticAll { .. } => {
                let s: f64 = alphas.iter().sum();
                alphas.iter().map(|a| a + s).collect()
            }
        }
    }

    /// Solve `∂K/∂xᵢ(ᾱ) = Lᵢ` for `ᾱ`, assuming every `αᵢ > 0`.
    pub fn invert_gradient(&self, grads: &[f64]) -> Result<Vec<f64>, SymmetricError> {
        assert_eq!(grads.len(), self.d());
        let check_positive = |v: f64| {
            if v > 0.0 {
                Ok(v)
            } else {
                Err(SymmetricError::NegativeIntermediate { value: v })
            }
        };
        let mut alphas = match *self {
            SymmetricForm::Product { d } => {
                let prod_l: f64 = grads.iter().product();
                let prod_alpha = check_positive(prod_l)?.powf(1.0 / (d as f64 - 1.0));
                grads
                    .iter()
                    .map(|l| check_positive(prod_alpha / l))
                    .collect::<Result<Vec<_>, _>>()?
            }
            SymmetricForm::PowerSum { r, .. } => grads
                .iter()
                .map(|l| Ok(check_positive(l / r as f64)?.powf(1.0 / (r as f64 - 1.0))))
                .collect::<Result<Vec<_>, _>>()?,
            SymmetricForm::QuadraticAll { d } => {
                let sum_alpha = grads.iter().sum::<f64>() / (d as f64 + 1.0);
                grads
                    .iter()
                    .map(|l| check_positive(l - sum_alpha))
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        alphas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(alphas)
    }
}

impl fmt::Display for SymmetricForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SymmetricForm::Product { d } => write!(f, "product:{d}"),
            SymmetricForm::PowerSum { d, r } => write!(f, "powersum:{d}:{r}"),
            SymmetricForm::QuadraticAll { d } => write!(f, "quadratic:{d}"),
        }
    }
}

/// `Δ(n) = (a_{n+1} - a_n)/n^(D-1)` for `n` in `window` (default
/// `[N/2, N-1]`, which keeps only the asymptotic tail).
pub fn normalized_jumps(
    seq: &IntegerSequence,
    degree: u32,
    window: Option<(u64, u64)>,
) -> Result<Vec<f64>, SymmetricError> {
    let n_max = seq.len() as u64;
    if n_max < 4 {
        return Err(SymmetricError::TooShort {
            len: seq.len(),
            need: 4,
        });
    }
    let (w0, w1) = window.unwrap_or(((n_max / 2).max(1), n_max - 1));
    let w0 = w0.max(1);
    let w1 = w1.min(n_max - 1);
    if w0 > w1 {
        return Err(SymmetricError::TooShort {
            len: seq.len(),
            need: w0 as usize + 1,
        });
    }
    let vals = seq.values();
    let mut out = Vec::with_capacity((w1 - w0 + 1) as usize);
    for n in w0..=w1 {
        let diff = &vals[n as usize] - &vals[n as usize - 1];
        let scale = (n as f64).powi(degree as i32 - 1);
        out.push(diff.to_f64().unwrap_or(f64::NAN) / scale);
    }
    Ok(out)
}

/// Cluster means of the limit points of the normalized differences.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeCorners {
    /// Ascending cluster means.
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub counts: Vec<u64>,
    /// The adjacent-gap threshold that separated the clusters.
    pub gap_used: f64,
}

/// Split sorted values into exactly `expected` clusters at the largest
/// adjacent gaps. Without an explicit `gap`, the threshold is the geometric
/// mean of the `(expected-1)`-th and `expected`-th largest adjacent gaps —
/// between the separating gaps and the within-cluster ones.
pub fn cluster_limit_points(
    values: &[f64],
    expected: usize,
    gap: Option<f64>,
) -> Result<CubeCorners, SymmetricError> {
    if values.len() < expected {
        return Err(SymmetricError::TooShort {
            len: values.len(),
            need: expected,
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let threshold = match gap {
        Some(g) => g,
        None => {
            let mut by_size = gaps.clone();
            by_size.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if by_size.len() < expected {
                return Err(SymmetricError::WrongClusterCount {
                    expected,
                    found: by_size.len() + 1,
                });
            }
            (by_size[expected - 2] * by_size[expected - 1]).sqrt()
        }
    };

    let mut clusters: Vec<Vec<f64>> = vec![Vec::new()];
    clusters.last_mut().unwrap().push(sorted[0]);
    for (i, g) in gaps.iter().enumerate() {
        if *g > threshold {
            clusters.push(Vec::new());
        }
        clusters.last_mut().unwrap().push(sorted[i + 1]);
    }
    if clusters.len() != expected {
        return Err(SymmetricError::WrongClusterCount {
            expected,
            found: clusters.len(),
        });
    }
    let mut means = Vec::with_capacity(expected);
    let mut stderrs = Vec::with_capacity(expected);
    let mut counts = Vec::with_capacity(expected);
    for c in &clusters {
        let k = c.len() as f64;
        let mean = c.iter().sum::<f64>() / k;
        let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
        means.push(mean);
        stderrs.push((var / k).sqrt().max(1e-12));
        counts.push(c.len() as u64);
    }
    Ok(CubeCorners {
        means,
        stderrs,
        counts,
        gap_used: threshold,
    })
}

fn check_power_of_two(len: usize) -> Result<usize, SymmetricError> {
    if len == 0 || len & (len - 1) != 0 {
        return Err(SymmetricError::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Recover the edge multiset of an exact subset-sum cube: `corners` must be
/// the multiset `{Σ_{i∈S} eᵢ : S ⊆ {1..d}}` up to a common shift. Returns
/// the edges ascending.
pub fn peel_cube_edges_exact(corners: &[Rational]) -> Result<Vec<Rational>, SymmetricError> {
    let d = check_power_of_two(corners.len())?;
    let base = corners.iter().min().unwrap().clone();
    let mut multiset: BTreeMap<Rational, usize> = BTreeMap::new();
    for c in corners {
        *multiset.entry(c - &base).or_insert(0) += 1;
    }
    let shifted: Vec<Rational> = multiset
        .iter()
        .flat_map(|(v, k)| std::iter::repeat(v.clone()).take(*k))
        .collect();
    let mut edges = Vec::with_capacity(d);
    let mut current = multiset;
    for _ in 0..d {
        // Smallest strictly positive element is the smallest remaining edge.
        let edge = current
            .keys()
            .find(|v| v.is_positive())
            .cloned()
            .ok_or_else(|| SymmetricError::PairingFailure {
                detail: "no positive corner left to serve as an edge".into(),
            })?;
        let mut half: BTreeMap<Rational, usize> = BTreeMap::new();
        while let Some((q, _)) = current.iter().next().map(|(k, v)| (k.clone(), *v)) {
            take_one(&mut current, &q);
            let partner = &q + &edge;
            if !take_one(&mut current, &partner) {
                return Err(SymmetricError::PairingFailure {
                    detail: format!("corner {q} has no partner at distance {edge}"),
                });
            }
            *half.entry(q).or_insert(0) += 1;
        }
        edges.push(edge);
        current = half;
    }
    // Reconstruct and verify before trusting the peel.
    let mut sums: Vec<Rational> = vec![Rational::zero()];
    for e in &edges {
        let with: Vec<Rational> = sums.iter().map(|s| s + e).collect();
        sums.extend(with);
    }
    sums.sort();
    if sums != shifted {
        return Err(SymmetricError::PairingFailure {
            detail: "peeled edges do not reconstruct the corner multiset".into(),
        });
    }
    Ok(edges)
}

fn take_one(set: &mut BTreeMap<Rational, usize>, key: &Rational) -> bool {
    match set.get_mut(key) {
        Some(k) if *k > 1 => {
            *k -= 1;
            true
        }
        Some(_) => {
            set.remove(key);
            true
        }
        None => false,
    }
}

/// Noise-tolerant cube peel: corners may be off by up to `tol` each.
pub fn peel_cube_edges_approx(corners: &[f64], tol: f64) -> Result<Vec<f64>, SymmetricError> {
    let d = check_power_of_two(corners.len())?;
    let mut sorted = corners.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let base = sorted[0];
    let shifted: Vec<f64> = sorted.iter().map(|c| c - base).collect();

    let mut edges = Vec::with_capacity(d);
    let mut current = shifted.clone();
    for _ in 0..d {
        let edge = current[1];
        if edge <= tol {
            return Err(SymmetricError::PairingFailure {
                detail: format!("edge candidate {edge} is below the pairing tolerance {tol}"),
            });
        }
        let mut used = vec![false; current.len()];
        let mut half = Vec::with_capacity(current.len() / 2);
        for i in 0..current.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let target = current[i] + edge;
            let mut best: Option<(usize, f64)> = None;
            for (j, u) in used.iter().enumerate().skip(i + 1) {
                if *u {
                    continue;
                }
                let err = (current[j] - target).abs();
                if best.map_or(true, |(_, b)| err < b) {
                    best = Some((j, err));
                }
            }
            match best {
                Some((j, err)) if err <= tol => {
                    used[j] = true;
                    half.push(current[i]);
                }
                _ => {
                    return Err(SymmetricError::PairingFailure {
                        detail: format!(
                            "corner {} has no partner within {tol} of distance {edge}",
                            current[i] + base
                        ),
                    })
                }
            }
        }
        edges.push(edge);
        half.sort_by(|a, b| a.partial_cmp(b).unwrap());
        current = half;
    }
    // Verify the reconstruction; pairing errors compound across levels.
    let mut sums = vec![0.0f64];
    for e in &edges {
        let with: Vec<f64> = sums.iter().map(|s| s + e).collect();
        sums.extend(with);
    }
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let worst = sums
        .iter()
        .zip(&shifted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if worst > tol * d as f64 {
        return Err(SymmetricError::PairingFailure {
            detail: format!("reconstruction misses corners by {worst}"),
        });
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(edges)
}

#[derive(Debug, Clone, Default)]
pub struct SymmetricRecoveryOptions {
    /// Index window `[lo, hi]` for the normalized differences.
    pub window: Option<(u64, u64)>,
    /// Explicit adjacent-gap threshold for clustering.
    pub cluster_gap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SymmetricRecovery {
    /// Sorted descending.
    pub alphas: Vec<Estimate>,
    /// Gradient components recovered from the cube, ascending.
    pub edges: Vec<f64>,
    pub corners: CubeCorners,
    pub flags: Vec<String>,
    pub form: SymmetricForm,
    pub n: u64,
}

impl SymmetricRecovery {
    pub fn to_report(&self) -> RecoveryReport {
        let mut r = RecoveryReport::new("symmetric", self.form.d(), self.n);
        r.recovered = self.alphas.clone();
        r.flags = self.flags.clone();
        r = r.with_diagnostic("form", serde_json::json!(self.form.to_string()));
        r = r.with_diagnostic("gradient", serde_json::json!(self.edges));
        r = r.with_diagnostic("cluster_counts", serde_json::json!(self.corners.counts));
        r = r.with_diagnostic("cluster_gap", serde_json::json!(self.corners.gap_used));
        r
    }
}

/// Full pipeline: normalized differences → `2^d` clusters → cube peel →
/// gradient inversion.
pub fn recover_symmetric(
    seq: &IntegerSequence,
    form: SymmetricForm,
    opts: &SymmetricRecoveryOptions,
) -> Result<SymmetricRecovery, SymmetricError> {
    form.validate()?;
    let d = form.d();
    let jumps = normalized_jumps(seq, form.degree(), opts.window)?;
    let corners = cluster_limit_points(&jumps, 1usize << d, opts.cluster_gap)?;

    let mut flags = Vec::new();
    if corners.counts.iter().any(|&c| c < 10) {
        flags.push("low-cluster-occupancy".to_string());
    }
    let worst_stderr = corners.stderrs.iter().cloned().fold(1e-12, f64::max);
    let tol = 3.0 * worst_stderr;
    let edges = peel_cube_edges_approx(&corners.means, tol)?;
    let alphas = form.invert_gradient(&edges)?;
    let estimates = alphas
        .iter()
        .map(|a| Estimate::approx(*a, tol))
        .collect();
    Ok(SymmetricRecovery {
        alphas: estimates,
        edges,
        corners,
        flags,
        form,
        n: seq.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reals::RealExpr;
    use crate::seqgen::gen_poly_of_floors;
    use num_bigint::BigInt;

    fn rat(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    fn sqrt_int(n: i64) -> RealExpr {
        RealExpr::sqrt(rat(n)).unwrap()
    }

    #[test]
    fn form_parse_and_display_round_trip() {
        for s in ["product:2", "powersum:3:2", "quadratic:3"] {
            assert_eq!(SymmetricForm::parse(s).unwrap().to_string(), s);
        }
        assert!(SymmetricForm::parse("product:1").is_err());
        assert!(SymmetricForm::parse("powersum:2:1").is_err());
        assert!(SymmetricForm::parse("cubes:2").is_err());
    }

    #[test]
    fn classical_forms_evaluate_correctly() {
        let q = SymmetricForm::QuadraticAll { d: 2 }.to_classical();
        // x1^2 + x1*x2 + x2^2 at (2, 3) = 4 + 6 + 9
        assert_eq!(q.eval_f64(&[2.0, 3.0]), 19.0);
        let p = SymmetricForm::PowerSum { d: 2, r: 3 }.to_classical();
        assert_eq!(p.eval_f64(&[2.0, 3.0]), 35.0);
        let m = SymmetricForm::Product { d: 3 }.to_classical();
        assert_eq!(m.eval_f64(&[2.0, 3.0, 4.0]), 24.0);
    }

    #[test]
    fn gradient_inversions_round_trip() {
        let alphas = [2.236, 1.414];
        for form in [
            SymmetricForm::Product { d: 2 },
            SymmetricForm::PowerSum { d: 2, r: 2 },
            SymmetricForm::PowerSum { d: 2, r: 3 },
            SymmetricForm::QuadraticAll { d: 2 },
        ] {
            let grads = form.gradient_at(&alphas);
            let mut sorted = grads.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let back = form.invert_gradient(&sorted).unwrap();
            for (a, b) in back.iter().zip(alphas.iter()) {
                assert!((a - b).abs() < 1e-9, "{form}: {back:?}");
            }
        }
    }

    #[test]
    fn peel_exact_two_edges() {
        let corners: Vec<Rational> = [0, 2, 3, 5].map(rat).to_vec();
        let edges = peel_cube_edges_exact(&corners).unwrap();
        assert_eq!(edges, vec![rat(2), rat(3)]);
    }

    #[test]
    fn peel_exact_three_edges() {
        let corners: Vec<Rational> = [0, 1, 4, 5, 9, 10, 13, 14].map(rat).to_vec();
        let edges = peel_cube_edges_exact(&corners).unwrap();
        assert_eq!(edges, vec![rat(1), rat(4), rat(9)]);
    }

    #[test]
    fn peel_exact_repeated_edge() {
        let corners: Vec<Rational> = [0, 1, 1, 2].map(rat).to_vec();
        let edges = peel_cube_edges_exact(&corners).unwrap();
        assert_eq!(edges, vec![rat(1), rat(1)]);
    }

    #[test]
    fn peel_exact_rejects_non_cube() {
        let corners: Vec<Rational> = [0, 1, 2, 4].map(rat).to_vec();
        assert!(matches!(
            peel_cube_edges_exact(&corners),
            Err(SymmetricError::PairingFailure { .. })
        ));
        let odd: Vec<Rational> = [0, 1, 2].map(rat).to_vec();
        assert!(matches!(
            peel_cube_edges_exact(&odd),
            Err(SymmetricError::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn peel_exact_shift_invariant() {
        let corners: Vec<Rational> = [7, 9, 10, 12].map(rat).to_vec();
        assert_eq!(
            peel_cube_edges_exact(&corners).unwrap(),
            vec![rat(2), rat(3)]
        );
    }

    #[test]
    fn peel_approx_with_noise() {
        let exact = [0.0, 1.0, 4.0, 5.0, 9.0, 10.0, 13.0, 14.0];
        let noisy: Vec<f64> = exact
            .iter()
            .enumerate()
            .map(|(i, v)| v + 1e-6 * ((i % 3) as f64 - 1.0))
            .collect();
        let edges = peel_cube_edges_approx(&noisy, 1e-4).unwrap();
        for (e, want) in edges.iter().zip([1.0, 4.0, 9.0]) {
            assert!((e - want).abs() < 1e-5);
        }
    }

    #[test]
    fn clusters_found_and_counted() {
        let mut values = Vec::new();
        for center in [0.0, 1.0, 4.0, 5.0] {
            for j in 0..50 {
                values.push(center + 0.01 * ((j % 5) as f64 - 2.0) / 2.0);
            }
        }
        let c = cluster_limit_points(&values, 4, None).unwrap();
        assert_eq!(c.counts, vec![50, 50, 50, 50]);
        for (m, want) in c.means.iter().zip([0.0, 1.0, 4.0, 5.0]) {
            assert!((m - want).abs() < 0.01);
        }
        assert!(matches!(
            cluster_limit_points(&values, 8, None),
            Err(SymmetricError::WrongClusterCount { expected: 8, .. })
        ));
    }

    #[test]
    fn product_form_end_to_end() {
        let form = SymmetricForm::Product { d: 2 };
        let seq = gen_poly_of_floors(
            &form.to_classical(),
            &[sqrt_int(2), sqrt_int(3)],
            20_000,
            256,
        )
        .unwrap();
        let rec = recover_symmetric(&seq, form, &SymmetricRecoveryOptions::default()).unwrap();
        assert!((rec.alphas[0].value - 3.0f64.sqrt()).abs() < 2e-2, "{:?}", rec.alphas);
        assert!((rec.alphas[1].value - 2.0f64.sqrt()).abs() < 2e-2, "{:?}", rec.alphas);
    }

    #[test]
    fn power_sum_with_lower_order_term_end_to_end() {
        // a_n = m1^2 + m2^2 + 3*m1: the inhomogeneous tail vanishes in the
        // normalized differences.
        let form = SymmetricForm::PowerSum { d: 2, r: 2 };
        let k = form.to_classical().add(&ClassicalPoly::var(2, 1).scale(&rat(3)));
        let seq = gen_poly_of_floors(&k, &[sqrt_int(2), sqrt_int(3)], 20_000, 256).unwrap();
        let rec = recover_symmetric(&seq, form, &SymmetricRecoveryOptions::default()).unwrap();
        assert!((rec.alphas[0].value - 3.0f64.sqrt()).abs() < 2e-2, "{:?}", rec.alphas);
        assert!((rec.alphas[1].value - 2.0f64.sqrt()).abs() < 2e-2, "{:?}", rec.alphas);
    }

    #[test]
    fn quadratic_three_variables_end_to_end() {
        let form = SymmetricForm::QuadraticAll { d: 3 };
        let seq = gen_poly_of_floors(
            &form.to_classical(),
            &[sqrt_int(2), sqrt_int(3), sqrt_int(5)],
            40_000,
            256,
        )
        .unwrap();
        let rec = recover_symmetric(&seq, form, &SymmetricRecoveryOptions::default()).unwrap();
        let got: Vec<f64> = rec.alphas.iter().map(|e| e.value).collect();
        let want = [5.0f64.sqrt(), 3.0f64.sqrt(), 2.0f64.sqrt()];
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() < 3e-2, "{got:?}");
        }
    }

    #[test]
    fn report_carries_form_and_diagnostics() {
        let form = SymmetricForm::Product { d: 2 };
        let seq = gen_poly_of_floors(
            &form.to_classical(),
            &[sqrt_int(2), sqrt_int(3)],
            5_000,
            256,
        )
        .unwrap();
        let rec = recover_symmetric(&seq, form, &SymmetricRecoveryOptions::default()).unwrap();
        let report = rec.to_report();
        assert_eq!(report.family, "symmetric");
        let json = report.to_json_pretty();
        assert!(json.contains("product:2"));
        assert!(json.contains("cluster_gap"));
    }
}
