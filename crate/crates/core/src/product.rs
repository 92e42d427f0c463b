//! Recovery of multipliers from products of floors `a_n = Π ⌊n·αᵢ⌋`.
//!
//! Any prime `q` dividing `|a_n|` with `q^d ≥ |a_n|` is at least the
//! geometric mean of the floor magnitudes, so it must divide the largest
//! floor — generically `⌊n·α₁⌋` itself, which pins `α₁` inside an interval
//! of width `1/n`. Intersecting those intervals over every such detection,
//! snapping to the simplest consistent rational when one exists, dividing
//! each `a_n` by the now-determined first floor, and recursing handles the
//! remaining `d - 1` multipliers.
//!
//! Signs are settled by hypothesis branching: each sign choice for the
//! current multiplier induces its own interval family, and a wrong branch
//! dies on an empty intersection or a non-exact division. Exactness claims
//! are only kept when the fully snapped multiset regenerates the entire
//! observed sequence.

use crate::genpoly::EvalError;
use crate::primality::{factorize, is_probable_prime, PrimalityConfig};
use crate::report::{Estimate, RecoveryReport};
use crate::reals::{rational_to_f64, simplest_in_interval, Rational, RealExpr};
use crate::seqgen::floor_linear;
use crate::seqgen::IntegerSequence;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProductError {
    #[error("every sequence value is zero; products of floors carry no factor information there")]
    AllZero,
    #[error("no usable prime detections at depth {depth} ({incomplete} factorizations exceeded the budget); raise N or the budget")]
    InsufficientDetections { depth: usize, incomplete: u64 },
    #[error("detection intervals have empty intersection at depth {depth} under both sign hypotheses; d may be wrong or a multiplier is integral")]
    EmptyIntersection { depth: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One successful prime detection at index `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorDetection {
    pub n: u64,
    pub value: BigInt,
    pub q: BigInt,
}

impl FactorDetection {
    /// Interval implied for the current multiplier under a sign hypothesis:
    /// `⌊n·α⌋ = s·q` confines `α` to `[s·q/n, (s·q+1)/n)`.
    pub fn implied_interval(&self, sign: i8) -> (Rational, Rational) {
        let f = if sign >= 0 {
            self.q.clone()
        } else {
            -self.q.clone()
        };
        let n = BigInt::from(self.n);
        let lo = Rational::new(f.clone(), n.clone());
        let hi = Rational::new(f + BigInt::one(), n);
        (lo, hi)
    }
}

/// Find a prime factor `q` of `|value|` with `q^d ≥ |value|`, if the budget
/// allows. The boolean is true when factorization ran out of budget (a
/// detection may have been missed, never fabricated).
pub fn detect_leading_floor(
    value: &BigInt,
    n: u64,
    d: usize,
    cfg: &PrimalityConfig,
) -> (Option<FactorDetection>, bool) {
    if value.is_zero() {
        return (None, false);
    }
    let magnitude = value.abs();
    let f = factorize(&magnitude, cfg);
    let incomplete = !f.is_complete();
    let detection = f
        .largest_known_prime()
        .filter(|q| q.pow(d as u32) >= magnitude)
        .map(|q| FactorDetection {
            n,
            value: value.clone(),
            q: q.clone(),
        });
    (detection, incomplete)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProductDiagnostics {
    /// Prime detections used at each recursion depth (outermost first).
    pub detections: Vec<u64>,
    /// Indices skipped at each depth because the current interval did not
    /// determine the floor.
    pub ambiguous_skips: Vec<u64>,
    pub incomplete_factorizations: u64,
    pub sign_ambiguous: bool,
}

#[derive(Debug, Clone)]
struct RecoveredEntry {
    lo: Rational,
    hi: Rational,
    snapped: Option<Rational>,
}

impl RecoveredEntry {
    fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }
}

fn floor_rat(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

/// The single floor value compatible with every `x` in `[lo, hi)` at index
/// `n`, if the interval is narrow enough to determine it.
fn determined_floor(n: u64, lo: &Rational, hi: &Rational) -> Option<BigInt> {
    let nn = Rational::from_integer(BigInt::from(n));
    let f_lo = floor_rat(&(lo * &nn));
    let top = hi * &nn;
    let f_hi = if top.denom().is_one() {
        top.to_integer() - BigInt::one()
    } else {
        floor_rat(&top)
    };
    (f_lo == f_hi).then_some(f_lo)
}

/// Simplest rational consistent with `⌊n·x⌋ = v` for every pair, searched
/// inside `[lo, hi)`.
fn snap_consistent(
    lo: &Rational,
    hi: &Rational,
    pairs: &[(u64, BigInt)],
) -> Option<Rational> {
    let verify = |cand: &Rational| {
        pairs.iter().all(|(n, v)| {
            &floor_rat(&(cand * Rational::from_integer(BigInt::from(*n)))) == v
        })
    };
    let width = hi - lo;
    let mut upper = hi.clone();
    for _ in 0..8 {
        let cand = simplest_in_interval(lo, &upper);
        if verify(&cand) {
            return Some(cand);
        }
        // The top endpoint is excluded; shave and retry in case the snap
        // landed exactly on it.
        upper = &upper - &width / Rational::from_integer(16.into());
        if upper < *lo {
            break;
        }
    }
    None
}

fn recover_level(
    pairs: &[(u64, BigInt)],
    depth: usize,
    d_left: usize,
    cfg: &PrimalityConfig,
    diag: &mut ProductDiagnostics,
) -> Result<Vec<RecoveredEntry>, ProductError> {
    if d_left == 1 {
        // Base case: the sequence values are the floors themselves.
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for (n, v) in pairs {
            let nn = BigInt::from(*n);
            let l = Rational::new(v.clone(), nn.clone());
            let h = Rational::new(v + BigInt::one(), nn);
            lo = Some(lo.map_or(l.clone(), |cur: Rational| cur.max(l)));
            hi = Some(hi.map_or(h.clone(), |cur: Rational| cur.min(h)));
        }
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        if lo >= hi {
            return Err(ProductError::EmptyIntersection { depth });
        }
        let snapped = snap_consistent(&lo, &hi, pairs);
        return Ok(vec![RecoveredEntry { lo, hi, snapped }]);
    }

    let results: Vec<(Option<FactorDetection>, bool)> = pairs
        .par_iter()
        .map(|(n, v)| detect_leading_floor(v, *n, d_left, cfg))
        .collect();
    let incomplete = results.iter().filter(|(_, inc)| *inc).count() as u64;
    diag.incomplete_factorizations += incomplete;
    let detections: Vec<FactorDetection> =
        results.into_iter().filter_map(|(d, _)| d).collect();
    if detections.is_empty() {
        return Err(ProductError::InsufficientDetections { depth, incomplete });
    }
    diag.detections.push(detections.len() as u64);

    let mut survivors: Vec<(i8, Vec<RecoveredEntry>, u64)> = Vec::new();
    for sign in [1i8, -1] {
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for det in &detections {
            let (l, h) = det.implied_interval(sign);
            lo = Some(lo.map_or(l.clone(), |cur: Rational| cur.max(l)));
            hi = Some(hi.map_or(h.clone(), |cur: Rational| cur.min(h)));
        }
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        if lo >= hi {
            continue;
        }

        // Divide the determined first floor out of every index it is known
        // at; one inexact division falsifies the branch.
        let mut sub_pairs: Vec<(u64, BigInt)> = Vec::with_capacity(pairs.len());
        let mut skips = 0u64;
        let mut dead = false;
        for (n, v) in pairs {
            match determined_floor(*n, &lo, &hi) {
                Some(f) if !f.is_zero() => {
                    let (quot, rem) = v.div_rem(&f);
                    if !rem.is_zero() {
                        dead = true;
                        break;
                    }
                    sub_pairs.push((*n, quot));
                }
                _ => skips += 1,
            }
        }
        if dead || sub_pairs.is_empty() {
            continue;
        }
        let mut branch_diag = diag.clone();
        match recover_level(&sub_pairs, depth + 1, d_left - 1, cfg, &mut branch_diag) {
            Ok(rest) => {
                let snapped = snap_consistent(
                    &lo,
                    &hi,
                    &detections
                        .iter()
                        .map(|det| {
                            let f = if sign >= 0 { det.q.clone() } else { -det.q.clone() };
                            (det.n, f)
                        })
                        .collect::<Vec<_>>(),
                );
                let mut entries = vec![RecoveredEntry { lo, hi, snapped }];
                entries.extend(rest);
                *diag = branch_diag;
                survivors.push((sign, entries, skips));
            }
            Err(_) => continue,
        }
    }

    match survivors.len() {
        0 => Err(ProductError::EmptyIntersection { depth }),
        1 => {
            let (_, entries, skips) = survivors.into_iter().next().unwrap();
            record_skips(diag, depth, skips);
            Ok(entries)
        }
        _ => {
            // Mirrored solutions both explain the data; keep the positive
            // branch and say so.
            diag.sign_ambiguous = true;
            let (_, entries, skips) = survivors
                .into_iter()
                .find(|(s, _, _)| *s > 0)
                .expect("one branch per sign");
            record_skips(diag, depth, skips);
            Ok(entries)
        }
    }
}

fn record_skips(diag: &mut ProductDiagnostics, depth: usize, skips: u64) {
    while diag.ambiguous_skips.len() <= depth {
        diag.ambiguous_skips.push(0);
    }
    diag.ambiguous_skips[depth] += skips;
}

#[derive(Debug, Clone)]
pub struct ProductRecovery {
    /// Sorted descending by value, matching the convention that the first
    /// multiplier is the largest.
    pub alphas: Vec<Estimate>,
    pub flags: Vec<String>,
    pub diagnostics: ProductDiagnostics,
    pub n: u64,
}

impl ProductRecovery {
    pub fn to_report(&self) -> RecoveryReport {
        let mut r = RecoveryReport::new("product", self.alphas.len(), self.n);
        r.recovered = self.alphas.clone();
        r.flags = self.flags.clone();
        r = r.with_diagnostic(
            "detections",
            serde_json::json!(self.diagnostics.detections),
        );
        r = r.with_diagnostic(
            "ambiguous_skips",
            serde_json::json!(self.diagnostics.ambiguous_skips),
        );
        r = r.with_diagnostic(
            "incomplete_factorizations",
            serde_json::json!(self.diagnostics.incomplete_factorizations),
        );
        r
    }
}

/// Recover the multiplier multiset from `a_n = Π ⌊n·αᵢ⌋`, `n = 1..=N`.
pub fn recover_product(
    seq: &IntegerSequence,
    d: usize,
    cfg: &PrimalityConfig,
) -> Result<ProductRecovery, ProductError> {
    assert!(d >= 1);
    let pairs: Vec<(u64, BigInt)> = seq
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (i as u64 + 1, v.clone()))
        .collect();
    if pairs.is_empty() {
        return Err(ProductError::AllZero);
    }
    let mut diag = ProductDiagnostics::default();
    let entries = recover_level(&pairs, 0, d, cfg, &mut diag)?;

    let mut flags = Vec::new();
    if diag.sign_ambiguous {
        flags.push("sign-ambiguous-mirror".to_string());
    }

    // The exact labels survive only if the snapped multiset regenerates the
    // whole sequence.
    let all_snapped: Option<Vec<Rational>> = entries
        .iter()
        .map(|e| e.snapped.clone())
        .collect();
    let certified_exact = match &all_snapped {
        Some(cands) => {
            let regenerates = seq.values().par_iter().enumerate().all(|(i, v)| {
                let n = BigInt::from(i as u64 + 1);
                let prod = cands.iter().fold(BigInt::one(), |acc, c| {
                    acc * floor_rat(&(c * Rational::from_integer(n.clone())))
                });
                &prod == v
            });
            if !regenerates {
                flags.push("exact-candidate-failed-regeneration".to_string());
            }
            regenerates
        }
        None => false,
    };

    let mut alphas: Vec<Estimate> = entries
        .iter()
        .map(|e| {
            if certified_exact {
                Estimate::exact(e.snapped.as_ref().unwrap())
            } else {
                let mid = rational_to_f64(&e.midpoint());
                let rad = rational_to_f64(&((&e.hi - &e.lo) / Rational::from_integer(2.into())))
                    .max(1e-15);
                Estimate::approx(mid, rad)
            }
        })
        .collect();
    alphas.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap());
    Ok(ProductRecovery {
        alphas,
        flags,
        diagnostics: diag,
        n: seq.len() as u64,
    })
}

/// All `n ≤ N` where `|⌊n·α + γ⌋|` is (probably) prime.
pub fn beatty_prime_scan(
    alpha: &RealExpr,
    gamma: &RealExpr,
    n_max: u64,
    max_p: u32,
    cfg: &PrimalityConfig,
) -> Result<Vec<(u64, BigInt)>, EvalError> {
    let hits: Result<Vec<Option<(u64, BigInt)>>, EvalError> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let v = floor_linear(&BigInt::from(n), alpha, gamma, max_p)?;
            Ok(is_probable_prime(&v, cfg).then_some((n, v)))
        })
        .collect();
    Ok(hits?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genpoly::{parse, to_classical};
    use crate::seqgen::gen_poly_of_floors;

    fn cfg() -> PrimalityConfig {
        PrimalityConfig::default()
    }

    fn sqrt_int(n: i64) -> RealExpr {
        RealExpr::sqrt(Rational::from_integer(BigInt::from(n))).unwrap()
    }

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn detection_of_large_prime_factor() {
        let (det, incomplete) = detect_leading_floor(&BigInt::from(35), 3, 2, &cfg());
        let det = det.unwrap();
        assert!(!incomplete);
        assert_eq!(det.q, BigInt::from(7));
        let (lo, hi) = det.implied_interval(1);
        assert_eq!(lo, rat(7, 3));
        assert_eq!(hi, rat(8, 3));
    }

    #[test]
    fn no_detection_when_factors_small() {
        let (det, _) = detect_leading_floor(&BigInt::from(36), 5, 2, &cfg());
        assert!(det.is_none());
    }

    #[test]
    fn prime_value_detects_itself() {
        let p = BigInt::from(2_000_000_033u64);
        let (det, _) = detect_leading_floor(&p, 10, 3, &cfg());
        assert_eq!(det.unwrap().q, p);
    }

    #[test]
    fn base_case_recovers_exact_rational() {
        let k = to_classical(&parse("x1").unwrap(), 1).unwrap();
        let s = gen_poly_of_floors(&k, &[RealExpr::ratio(7, 3)], 100, 64).unwrap();
        let r = recover_product(&s, 1, &cfg()).unwrap();
        assert_eq!(r.alphas.len(), 1);
        assert_eq!(r.alphas[0].exact.as_deref(), Some("7/3"));
    }

    #[test]
    fn base_case_recovers_negative_rational() {
        let k = to_classical(&parse("x1").unwrap(), 1).unwrap();
        let s = gen_poly_of_floors(&k, &[RealExpr::ratio(-7, 3)], 100, 64).unwrap();
        let r = recover_product(&s, 1, &cfg()).unwrap();
        assert_eq!(r.alphas[0].exact.as_deref(), Some("-7/3"));
    }

    #[test]
    fn two_rationals_recovered_exactly() {
        let k = to_classical(&parse("x1*x2").unwrap(), 2).unwrap();
        let s = gen_poly_of_floors(
            &k,
            &[RealExpr::ratio(7, 3), RealExpr::ratio(13, 9)],
            2_000,
            64,
        )
        .unwrap();
        let r = recover_product(&s, 2, &cfg()).unwrap();
        let exacts: Vec<_> = r.alphas.iter().map(|e| e.exact.as_deref()).collect();
        assert_eq!(exacts, vec![Some("7/3"), Some("13/9")]);
    }

    #[test]
    fn two_irrationals_recovered_tightly() {
        let k = to_classical(&parse("x1*x2").unwrap(), 2).unwrap();
        let s = gen_poly_of_floors(&k, &[sqrt_int(5), sqrt_int(2)], 2_000, 256).unwrap();
        let r = recover_product(&s, 2, &cfg()).unwrap();
        assert_eq!(r.alphas.len(), 2);
        assert!((r.alphas[0].value - 5.0f64.sqrt()).abs() < 5e-3, "{:?}", r.alphas);
        assert!((r.alphas[1].value - 2.0f64.sqrt()).abs() < 5e-3, "{:?}", r.alphas);
        // Irrational multipliers must not be certified as rationals.
        assert!(r.alphas.iter().all(|e| e.exact.is_none()), "{:?}", r.alphas);
    }

    #[test]
    fn negative_multipliers_recovered() {
        let k = to_classical(&parse("x1*x2").unwrap(), 2).unwrap();
        let s = gen_poly_of_floors(
            &k,
            &[sqrt_int(5).neg(), sqrt_int(2).neg()],
            1_500,
            256,
        )
        .unwrap();
        let r = recover_product(&s, 2, &cfg()).unwrap();
        assert_eq!(r.alphas.len(), 2);
        assert!((r.alphas[0].value + 2.0f64.sqrt()).abs() < 5e-3, "{:?}", r.alphas);
        assert!((r.alphas[1].value + 5.0f64.sqrt()).abs() < 5e-3, "{:?}", r.alphas);
    }

    #[test]
    fn detection_intervals_contain_truth() {
        let k = to_classical(&parse("x1*x2").unwrap(), 2).unwrap();
        let s = gen_poly_of_floors(&k, &[sqrt_int(5), sqrt_int(2)], 500, 256).unwrap();
        let root5 = 5.0f64.sqrt();
        for (i, v) in s.values().iter().enumerate() {
            let n = i as u64 + 1;
            if let (Some(det), _) = detect_leading_floor(v, n, 2, &cfg()) {
                let (lo, hi) = det.implied_interval(1);
                assert!(
                    rational_to_f64(&lo) <= root5 && root5 < rational_to_f64(&hi),
                    "n={n}"
                );
            }
        }
    }

    #[test]
    fn prime_scan_finds_known_hits() {
        let hits = beatty_prime_scan(&sqrt_int(2), &RealExpr::integer(0), 100, 128, &cfg()).unwrap();
        let ns: Vec<u64> = hits.iter().map(|(n, _)| *n).collect();
        assert!(ns.contains(&2)); // floor(2*sqrt(2)) = 2
        assert!(ns.contains(&5)); // floor(5*sqrt(2)) = 7
        let v5 = hits.iter().find(|(n, _)| *n == 5).unwrap();
        assert_eq!(v5.1, BigInt::from(7));
    }

    #[test]
    fn prime_scan_small_slope_hits_every_small_prime() {
        let hits =
            beatty_prime_scan(&RealExpr::ratio(1, 3), &RealExpr::integer(0), 50, 64, &cfg())
                .unwrap();
        let values: std::collections::BTreeSet<BigInt> =
            hits.into_iter().map(|(_, v)| v).collect();
        for p in [2i64, 3, 5, 7, 11, 13] {
            assert!(values.contains(&BigInt::from(p)), "missing {p}");
        }
    }

    #[test]
    fn shifted_scan_with_all_composite_values() {
        // floor(15n/2 + 3): even n gives a multiple of 3, odd n a multiple
        // of 5, so no prime ever appears for n >= 1.
        let hits = beatty_prime_scan(
            &RealExpr::ratio(15, 2),
            &RealExpr::integer(3),
            1_000,
            64,
            &cfg(),
        )
        .unwrap();
        assert!(hits.is_empty(), "{hits:?}");
    }

    #[test]
    fn report_shape() {
        let k = to_classical(&parse("x1*x2").unwrap(), 2).unwrap();
        let s = gen_poly_of_floors(
            &k,
            &[RealExpr::ratio(7, 3), RealExpr::ratio(13, 9)],
            500,
            64,
        )
        .unwrap();
        let r = recover_product(&s, 2, &cfg()).unwrap();
        let report = r.to_report();
        assert_eq!(report.family, "product");
        assert!(report.to_json_pretty().contains("detections"));
    }
}
