//! Primality testing and budgeted factorization.
//!
//! Detection of leading floors only needs *opportunistic* factorization:
//! values that resist the trial-division + rho budget are skipped and
//! counted, never guessed. Primality is Miller–Rabin — deterministic via a
//! fixed witness set for values below 3.3·10²⁴ (far beyond desk scale), and
//! reproducible prime-base rounds above.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimalityConfig {
    pub miller_rabin_rounds: u32,
    pub trial_division_bound: u64,
    /// Iteration cap for one rho attempt (cycle steps, all restarts pooled).
    pub pollard_rho_budget: u64,
}

impl Default for PrimalityConfig {
    fn default() -> Self {
        PrimalityConfig {
            miller_rabin_rounds: 40,
            trial_division_bound: 100_000,
            pollard_rho_budget: 2_000_000,
        }
    }
}

/// First thirteen primes: a deterministic Miller–Rabin witness set for all
/// n < 3.3·10²⁴.
const DETERMINISTIC_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn deterministic_threshold() -> &'static BigInt {
    static T: OnceLock<BigInt> = OnceLock::new();
    T.get_or_init(|| BigInt::from_str("3317044064679887385961981").unwrap())
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

fn miller_rabin_witness(n: &BigInt, base: &BigInt) -> bool {
    // true = composite witnessed.
    let one = BigInt::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let mut x = base.modpow(&d, n);
    if x.is_one() || x == n_minus_1 {
        return false;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return false;
        }
    }
    true
}

pub fn is_probable_prime(n: &BigInt, cfg: &PrimalityConfig) -> bool {
    if n.is_negative() {
        return is_probable_prime(&-n, cfg);
    }
    let two = BigInt::from(2);
    if *n < two {
        return false;
    }
    for p in DETERMINISTIC_BASES {
        let p = BigInt::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let bases: Vec<BigInt> = if n < deterministic_threshold() {
        DETERMINISTIC_BASES.iter().map(|&b| BigInt::from(b)).collect()
    } else {
        first_primes(cfg.miller_rabin_rounds.max(13) as usize)
            .into_iter()
            .map(BigInt::from)
            .collect()
    };
    !bases.iter().any(|b| miller_rabin_witness(n, b))
}

/// Outcome of budgeted factorization of a positive integer. Factors are
/// `(prime, exponent)` in ascending prime order; `Incomplete` carries the
/// composite cofactor the budget could not split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factorization {
    Complete(Vec<(BigInt, u32)>),
    Incomplete {
        factors: Vec<(BigInt, u32)>,
        remaining: BigInt,
    },
}

impl Factorization {
    pub fn known_factors(&self) -> &[(BigInt, u32)] {
        match self {
            Factorization::Complete(f) => f,
            Factorization::Incomplete { factors, .. } => factors,
        }
    }

    pub fn largest_known_prime(&self) -> Option<&BigInt> {
        self.known_factors().last().map(|(p, _)| p)
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, Factorization::Complete(_))
    }
}

/// Brent-cycle rho; returns a nontrivial factor of composite odd `n`, or
/// `None` when the step budget runs out.
fn pollard_brent(n: &BigInt, budget: u64) -> Option<BigInt> {
    let one = BigInt::one();
    let two = BigInt::from(2);
    let mut steps = 0u64;
    // Deterministic restarts over the polynomial offset.
    for c in 1u64..64 {
        let c = BigInt::from(c);
        let mut y = two.clone();
        let mut r: u64 = 1;
        let mut q = one.clone();
        let mut factor = one.clone();
        let mut x = y.clone();
        let mut ys = y.clone();
        'outer: while factor.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = (&y * &y + &c) % n;
            }
            let mut k: u64 = 0;
            while k < r {
                ys = y.clone();
                let m = 128.min(r - k);
                for _ in 0..m {
                    y = (&y * &y + &c) % n;
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (&q * &diff) % n;
                }
                steps += m;
                if steps > budget {
                    return None;
                }
                factor = q.gcd(n);
                if !factor.is_one() {
                    break 'outer;
                }
                k += m;
            }
            r *= 2;
        }
        if factor == *n {
            // Backtrack one step at a time.
            loop {
                ys = (&ys * &ys + &c) % n;
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                factor = diff.gcd(n);
                if !factor.is_one() {
                    break;
                }
                steps += 1;
                if steps > budget {
                    return None;
                }
            }
        }
        if !factor.is_one() && factor != *n {
            return Some(factor);
        }
    }
    None
}

/// Factor `|n|` (n nonzero) within the configured budget.
pub fn factorize(n: &BigInt, cfg: &PrimalityConfig) -> Factorization {
    assert!(!n.is_zero(), "zero has no factorization");
    let mut remaining = n.abs();
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let push = |factors: &mut Vec<(BigInt, u32)>, p: BigInt, k: u32| {
        factors.push((p, k));
    };

    let one = BigInt::one();
    if remaining.is_one() {
        return Factorization::Complete(Vec::new());
    }

    // Trial division by 2, 3, then 6k±1 up to the bound (or sqrt).
    for p in [2u64, 3] {
        let pb = BigInt::from(p);
        let mut k = 0;
        while (&remaining % &pb).is_zero() {
            remaining /= &pb;
            k += 1;
        }
        if k > 0 {
            push(&mut factors, pb, k);
        }
    }
    let mut divisor = 5u64;
    while divisor <= cfg.trial_division_bound {
        let db = BigInt::from(divisor);
        if &db * &db > remaining {
            break;
        }
        for p in [divisor, divisor + 2] {
            let pb = BigInt::from(p);
            let mut k = 0;
            while (&remaining % &pb).is_zero() {
                remaining /= &pb;
                k += 1;
            }
            if k > 0 {
                push(&mut factors, pb, k);
            }
        }
        divisor += 6;
    }

    // Now split what is left with primality checks and rho.
    let mut stack = vec![remaining.clone()];
    let mut leftover = one.clone();
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m, cfg) {
            match factors.iter_mut().find(|(p, _)| *p == m) {
                Some((_, k)) => *k += 1,
                None => factors.push((m, 1)),
            }
            continue;
        }
        match pollard_brent(&m, cfg.pollard_rho_budget) {
            Some(f) => {
                stack.push(&m / &f);
                stack.push(f);
            }
            None => leftover *= &m,
        }
    }
    factors.sort_by(|a, b| a.0.cmp(&b.0));
    if leftover.is_one() {
        Factorization::Complete(factors)
    } else {
        Factorization::Incomplete {
            factors,
            remaining: leftover,
        }
    }
}
