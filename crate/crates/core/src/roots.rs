//! Root extraction for jump-frequency polynomials.
//!
//! The polynomials in question have nonnegative coefficients summing to
//! (approximately) one and all roots real and nonpositive, one per hidden
//! fractional part. The primary finder brackets sign changes on a grid under
//! the Cauchy bound and bisects; a Durand–Kerner sweep backs it up for
//! near-multiple roots that produce no sign change. Rational-coefficient
//! polynomials get an exact path: dyadic bisection with exact sign tests,
//! candidate snapping to the simplest rational in the bracket, verification
//! by exact evaluation, and deflation.

use crate::reals::{simplest_in_interval, Rational};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("only {found} of {expected} roots are certifiably real (coefficient noise too large; raise the sample size)")]
    ComplexRoots { expected: usize, found: usize },
    #[error("root {root} lies outside the admissible range (-inf, 0]")]
    OutOfRange { root: f64 },
    #[error("polynomial is identically zero or has no degree")]
    Degenerate,
}

/// Horner evaluation; `coeffs[r]` multiplies `z^r`.
pub fn polyval(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// Coefficients of the derivative.
pub fn polyder(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(r, c)| c * r as f64)
        .collect()
}

fn cauchy_bound(coeffs: &[f64]) -> f64 {
    let lead = coeffs.last().copied().unwrap_or(0.0).abs();
    let max_ratio = coeffs[..coeffs.len() - 1]
        .iter()
        .map(|c| c.abs() / lead)
        .fold(0.0f64, f64::max);
    1.0 + max_ratio
}

fn bisect(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = polyval(coeffs, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fmid = polyval(coeffs, mid);
        if fmid == 0.0 {
            return mid;
        }
        if (flo < 0.0) == (fmid < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cplx {
    re: f64,
    im: f64,
}

impl Cplx {
    fn new(re: f64, im: f64) -> Self {
        Cplx { re, im }
    }
    fn add(self, o: Cplx) -> Cplx {
        Cplx::new(self.re + o.re, self.im + o.im)
    }
    fn sub(self, o: Cplx) -> Cplx {
        Cplx::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: Cplx) -> Cplx {
        Cplx::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
    fn div(self, o: Cplx) -> Cplx {
        let d = o.re * o.re + o.im * o.im;
        Cplx::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
}

fn polyval_c(coeffs: &[f64], z: Cplx) -> Cplx {
    let mut acc = Cplx::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(Cplx::new(*c, 0.0));
    }
    acc
}

/// Simultaneous-iteration root finder; returns all `degree` roots as complex
/// pairs (unsorted).
pub fn durand_kerner(coeffs: &[f64], max_iter: usize) -> Vec<(f64, f64)> {
    let degree = coeffs.len() - 1;
    let lead = coeffs[degree];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    // Standard non-real starting point prevents symmetric stalls.
    let seed = Cplx::new(0.4, 0.9);
    let mut zs: Vec<Cplx> = (0..degree)
        .scan(Cplx::new(1.0, 0.0), |acc, _| {
            *acc = acc.mul(seed);
            Some(*acc)
        })
        .collect();
    for _ in 0..max_iter {
        let mut shift = 0.0f64;
        for i in 0..degree {
            let mut denom = Cplx::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom = denom.mul(zs[i].sub(zs[j]));
                }
            }
            let step = polyval_c(&monic, zs[i]).div(denom);
            zs[i] = zs[i].sub(step);
            shift = shift.max(step.abs());
        }
        if shift < 1e-14 {
            break;
        }
    }
    zs.into_iter().map(|z| (z.re, z.im)).collect()
}

/// All real roots of `coeffs` in `(-inf, 0]`, ascending, with multiplicity.
/// Fails if fewer than `degree` roots can be certified real within
/// `im_tolerance` (relative to the root magnitudes).
pub fn nonpositive_real_roots(coeffs: &[f64], im_tolerance: f64) -> Result<Vec<f64>, RootError> {
    let mut cs = coeffs.to_vec();
    while cs.last().is_some_and(|c| *c == 0.0) {
        cs.pop();
    }
    if cs.len() <= 1 {
        return if cs.is_empty() {
            Err(RootError::Degenerate)
        } else {
            Ok(Vec::new())
        };
    }
    let degree = cs.len() - 1;
    let bound = cauchy_bound(&cs);

    // Primary: grid scan for sign changes, then bisection.
    let steps = 20_000.max(256 * degree);
    let mut found: Vec<f64> = Vec::new();
    let mut prev_x = -bound - 1.0;
    let mut prev_f = polyval(&cs, prev_x);
    for k in 1..=steps {
        let x = -bound - 1.0 + (bound + 1.0) * k as f64 / steps as f64;
        let fx = polyval(&cs, x);
        if fx == 0.0 {
            found.push(x);
        } else if (prev_f < 0.0) != (fx < 0.0) {
            found.push(bisect(&cs, prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    if found.len() == degree {
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return Ok(found);
    }

    // Fallback: all-root iteration, accept near-real roots. This covers
    // even-multiplicity roots that touch the axis without crossing it.
    let dk = durand_kerner(&cs, 500);
    let scale = dk.iter().map(|(re, im)| re.hypot(*im)).fold(1.0, f64::max);
    let mut real_roots: Vec<f64> = Vec::new();
    for (re, im) in &dk {
        if im.abs() <= im_tolerance * scale {
            real_roots.push(*re);
        }
    }
    if real_roots.len() != degree {
        return Err(RootError::ComplexRoots {
            expected: degree,
            found: real_roots.len(),
        });
    }
    for r in &mut real_roots {
        // Positive drift beyond tolerance is a genuine failure; tiny
        // positive noise clamps to the admissible boundary.
        if *r > im_tolerance * scale {
            return Err(RootError::OutOfRange { root: *r });
        }
        if *r > 0.0 {
            *r = 0.0;
        }
    }
    real_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(real_roots)
}

/// Exact evaluation with rational coefficients.
pub fn polyval_exact(coeffs: &[Rational], z: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Synthetic division by `(z - root)`; `root` must be an exact root.
fn deflate_exact(coeffs: &[Rational], root: &Rational) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); coeffs.len() - 1];
    let mut carry = Rational::zero();
    for r in (0..coeffs.len() - 1).rev() {
        carry = &coeffs[r + 1] + &carry * root;
        out[r] = carry.clone();
    }
    out
}

fn strip_trailing_zeros(mut cs: Vec<Rational>) -> Vec<Rational> {
    while cs.last().is_some_and(|c| c.is_zero()) {
        cs.pop();
    }
    cs
}

/// Polynomial long division; panics if `b` is zero.
fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = strip_trailing_zeros(b.to_vec());
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut rem = a.to_vec();
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let mut quot = vec![Rational::zero(); rem.len() - b.len() + 1];
    let lead = b.last().unwrap().clone();
    for k in (0..quot.len()).rev() {
        let factor = &rem[k + b.len() - 1] / &lead;
        if factor.is_zero() {
            continue;
        }
        quot[k] = factor.clone();
        for (j, bc) in b.iter().enumerate() {
            let delta = bc * &factor;
            rem[k + j] -= delta;
        }
    }
    (quot, strip_trailing_zeros(rem))
}

fn poly_gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut a = strip_trailing_zeros(a.to_vec());
    let mut b = strip_trailing_zeros(b.to_vec());
    while !b.is_empty() {
        let (_, r) = poly_divmod(&a, &b);
        a = b;
        b = r;
    }
    // Monic normalization.
    if let Some(lead) = a.last().cloned() {
        for c in &mut a {
            *c = &*c / &lead;
        }
    }
    a
}

fn poly_derivative(cs: &[Rational]) -> Vec<Rational> {
    cs.iter()
        .enumerate()
        .skip(1)
        .map(|(r, c)| c * Rational::from_integer(r.into()))
        .collect()
}

/// All simple rational roots in `[-bound, 0]` of a square-free polynomial,
/// by adaptive sign-change bracketing plus snap-and-verify. Returns `None`
/// if fewer than `expected` roots are found.
fn simple_rational_roots(
    cs: &[Rational],
    expected: usize,
    bound: &Rational,
) -> Option<Vec<Rational>> {
    let two = Rational::from_integer(2.into());
    let mut grid: i64 = (128 * expected.max(1)) as i64;
    while grid <= 1 << 18 {
        let mut roots = Vec::new();
        let mut brackets = Vec::new();
        let mut prev_x = -bound.clone();
        let mut prev_s = polyval_exact(cs, &prev_x);
        if prev_s.is_zero() {
            roots.push(prev_x.clone());
        }
        for k in 1..=grid {
            let x = -bound + bound * Rational::new(k.into(), grid.into());
            let s = polyval_exact(cs, &x);
            if s.is_zero() {
                roots.push(x.clone());
            } else if !prev_s.is_zero() && prev_s.is_negative() != s.is_negative() {
                brackets.push((prev_x.clone(), x.clone()));
            }
            prev_x = x;
            prev_s = s;
        }
        'bracket: for (mut lo, mut hi) in brackets {
            let mut lo_neg = polyval_exact(cs, &lo).is_negative();
            for step in 0..256 {
                if step % 4 == 0 {
                    let c = simplest_in_interval(&lo, &hi);
                    if polyval_exact(cs, &c).is_zero() {
                        roots.push(c);
                        continue 'bracket;
                    }
                }
                let mid = (&lo + &hi) / &two;
                let s = polyval_exact(cs, &mid);
                if s.is_zero() {
                    roots.push(mid);
                    continue 'bracket;
                }
                if s.is_negative() == lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
                lo_neg = polyval_exact(cs, &lo).is_negative();
            }
            return None;
        }
        if roots.len() >= expected {
            roots.sort();
            roots.dedup();
            if roots.len() == expected {
                return Some(roots);
            }
            return None;
        }
        grid *= 4;
    }
    None
}

/// Exact nonpositive rational roots (with multiplicity), ascending, for a
/// polynomial whose roots are all rational and nonpositive. Returns `None`
/// when that structural promise cannot be certified (caller falls back to
/// the floating-point path).
pub fn exact_nonpositive_rational_roots(coeffs: &[Rational]) -> Option<Vec<Rational>> {
    let cs = strip_trailing_zeros(coeffs.to_vec());
    if cs.is_empty() {
        return None;
    }
    if cs.len() == 1 {
        return Some(Vec::new());
    }
    let degree = cs.len() - 1;

    // Square-free part carries the root set; multiplicities come from
    // repeated exact deflation afterwards.
    let deriv = poly_derivative(&cs);
    let g = poly_gcd(&cs, &deriv);
    let (square_free, rem) = poly_divmod(&cs, &g);
    if !rem.is_empty() {
        return None;
    }
    let distinct = square_free.len() - 1;

    let lead = square_free.last().unwrap();
    let bound = square_free[..distinct]
        .iter()
        .map(|c| (c / lead).abs())
        .fold(Rational::zero(), |a, b| if a > b { a } else { b })
        + Rational::one();
    let root_set = simple_rational_roots(&square_free, distinct, &bound)?;

    let mut roots = Vec::new();
    let mut work = cs;
    for r in &root_set {
        if r.is_positive() {
            return None;
        }
        while work.len() > 1 && polyval_exact(&work, r).is_zero() {
            work = deflate_exact(&work, r);
            roots.push(r.clone());
        }
    }
    if roots.len() != degree {
        return None;
    }
    roots.sort();
    Some(roots)
}

/// Map a root of the jump polynomial to the fractional part it encodes.
/// Each factor `α·z + (1-α)` vanishes at `z = -(1-α)/α`, so `α = 1/(1-z)`.
pub fn alpha_from_root(z: f64) -> f64 {
    1.0 / (1.0 - z)
}

pub fn alpha_from_root_exact(z: &Rational) -> Option<Rational> {
    let denom = Rational::one() - z;
    if denom.is_zero() {
        return None;
    }
    Some(denom.recip())
}

/// First-order sensitivity of a simple root to coefficient perturbations:
/// `|δz| ≲ Σ_r σ_r |z|^r / |p'(z)|`.
pub fn root_radius(coeffs: &[f64], sigmas: &[f64], z: f64) -> f64 {
    let deriv = polyval(&polyder(coeffs), z).abs();
    let num: f64 = sigmas
        .iter()
        .enumerate()
        .map(|(r, s)| s * z.abs().powi(r as i32))
        .sum();
    if deriv == 0.0 {
        f64::INFINITY
    } else {
        num / deriv
    }
}

/// Radius transfer through `α = 1/(1-z)`.
pub fn alpha_radius(z: f64, z_radius: f64) -> f64 {
    z_radius / ((1.0 - z) * (1.0 - z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reals::rational_to_f64;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Expand the factored jump polynomial for the given fractional parts.
    fn jump_poly_exact(alphas: &[Rational]) -> Vec<Rational> {
        let mut cs = vec![Rational::one()];
        for a in alphas {
            let mut next = vec![Rational::zero(); cs.len() + 1];
            for (r, c) in cs.iter().enumerate() {
                next[r] += c * (Rational::one() - a);
                next[r + 1] += c * a;
            }
            cs = next;
        }
        cs
    }

    #[test]
    fn exact_roots_recover_rational_parts() {
        let alphas = [rat(1, 4), rat(2, 3)];
        let cs = jump_poly_exact(&alphas);
        let roots = exact_nonpositive_rational_roots(&cs).unwrap();
        assert_eq!(roots, vec![rat(-3, 1), rat(-1, 2)]);
        let mut recovered: Vec<Rational> = roots
            .iter()
            .map(|z| alpha_from_root_exact(z).unwrap())
            .collect();
        recovered.sort();
        assert_eq!(recovered, vec![rat(1, 4), rat(2, 3)]);
    }

    #[test]
    fn exact_roots_handle_multiplicity() {
        // (z + 2)^2 (z + 1/3) = z^3 + 13/3 z^2 + 16/3 z + 4/3.
        let cs = vec![rat(4, 3), rat(16, 3), rat(13, 3), rat(1, 1)];
        let roots = exact_nonpositive_rational_roots(&cs).unwrap();
        assert_eq!(roots, vec![rat(-2, 1), rat(-2, 1), rat(-1, 3)]);
    }

    #[test]
    fn exact_roots_handle_zero_root() {
        // z (z + 1) = z^2 + z.
        let cs = vec![rat(0, 1), rat(1, 1), rat(1, 1)];
        let roots = exact_nonpositive_rational_roots(&cs).unwrap();
        assert_eq!(roots, vec![rat(-1, 1), rat(0, 1)]);
    }

    #[test]
    fn float_roots_of_simple_quartic() {
        // (z+1)(z+2)(z+1/2)(z+5) expanded.
        let mut cs = vec![1.0f64];
        for r in [1.0, 2.0, 0.5, 5.0] {
            let mut next = vec![0.0; cs.len() + 1];
            for (k, c) in cs.iter().enumerate() {
                next[k] += c * r;
                next[k + 1] += c;
            }
            cs = next;
        }
        let roots = nonpositive_real_roots(&cs, 1e-8).unwrap();
        let expect = [-5.0, -2.0, -1.0, -0.5];
        for (got, want) in roots.iter().zip(expect) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn double_root_found_by_fallback() {
        // (z+1)^2 touches zero without a sign change.
        let cs = vec![1.0, 2.0, 1.0];
        let roots = nonpositive_real_roots(&cs, 1e-4).unwrap();
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert!((r + 1.0).abs() < 1e-4, "{r}");
        }
    }

    #[test]
    fn complex_pair_rejected() {
        // z^2 + 1 has no real roots.
        let cs = vec![1.0, 0.0, 1.0];
        assert!(matches!(
            nonpositive_real_roots(&cs, 1e-8),
            Err(RootError::ComplexRoots { expected: 2, found: 0 })
        ));
    }

    #[test]
    fn half_maps_to_half() {
        // 0.5 + 0.5 z vanishes at -1; both orientations of the factored
        // form agree on this symmetric instance.
        let roots = nonpositive_real_roots(&[0.5, 0.5], 1e-9).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((alpha_from_root(roots[0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empirical_orientation_sqrt2() {
        // Frequencies for a single multiplier alpha = sqrt(2)-1: share of
        // 1-jumps is alpha itself, so the polynomial is (1-a) + a z and the
        // mapping must return a (not its complement).
        let a = std::f64::consts::SQRT_2 - 1.0;
        let roots = nonpositive_real_roots(&[1.0 - a, a], 1e-9).unwrap();
        assert!((alpha_from_root(roots[0]) - a).abs() < 1e-12);
    }

    #[test]
    fn radius_predicts_first_order_motion() {
        // p(z) = (z+1)(z+3) = 3 + 4z + z^2; perturb the constant term.
        let cs = [3.0, 4.0, 1.0];
        let eps = 1e-6;
        let perturbed = [3.0 + eps, 4.0, 1.0];
        let r0 = nonpositive_real_roots(&cs, 1e-9).unwrap();
        let r1 = nonpositive_real_roots(&perturbed, 1e-9).unwrap();
        let moved = (r1[1] - r0[1]).abs();
        let predicted = root_radius(&cs, &[eps, 0.0, 0.0], -1.0);
        assert!(moved <= predicted * 1.01, "{moved} vs {predicted}");
        assert!(predicted < 2.0 * eps, "{predicted}");
    }

    #[test]
    fn rational_to_f64_alignment() {
        // The exact and float paths agree on a shared instance.
        let alphas = [rat(2, 7), rat(5, 9)];
        let cs = jump_poly_exact(&alphas);
        let fs: Vec<f64> = cs.iter().map(rational_to_f64).collect();
        let exact = exact_nonpositive_rational_roots(&cs).unwrap();
        let float = nonpositive_real_roots(&fs, 1e-9).unwrap();
        for (e, f) in exact.iter().zip(float) {
            assert!((rational_to_f64(e) - f).abs() < 1e-9);
        }
    }
}
