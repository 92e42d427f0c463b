//! Certified arithmetic over constant real expressions.
//!
//! A [`RealExpr`] is a closed-form constant built from rationals, square roots
//! of nonnegative rationals, negation, sums, products and quotients. Every
//! expression denotes a single well-defined real number, and the module can
//!
//! * enclose that number in an interval of requested width ([`refine`]),
//! * decide its floor, reporting ambiguity instead of guessing when the
//!   enclosure still straddles an integer at the precision cap
//!   ([`floor_certified`]),
//! * certify its fractional part ([`frac_certified`]), and
//! * find the smallest-denominator rational inside an interval
//!   ([`snap_to_rational`]).
//!
//! Intervals are evaluated in fixed-point form: a bound is an integer `m`
//! read as `m / 2^w` for a working scale `w`. Addition is exact, the other
//! operations round outward by at most one unit in the last place, so an
//! enclosure is always genuine. Working precision escalates geometrically
//! (doubling, starting at 64 bits) until the requested width is met or the
//! caller's cap is reached.
//!
//! Expressions that are syntactically rational — no surviving square root —
//! are handled in exact rational arithmetic and never report ambiguity.
//! `sqrt` of a perfect square simplifies to a rational at construction, so
//! `sqrt(4)` is exactly `2`, but no deeper algebraic normalization is
//! attempted: `sqrt(2)*sqrt(2) - 2` evaluates to an arbitrarily thin interval
//! around zero, and its floor is reported ambiguous rather than resolved.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub type Rational = BigRational;

/// Default cap on working precision, in bits.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

/// Starting working precision for interval evaluation, in bits.
const STARTING_PRECISION: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RealError {
    #[error("square root of negative rational {0}")]
    SqrtOfNegative(Rational),
    #[error("division by an expression that is exactly zero")]
    DivisionByZero,
    #[error("denominator interval still straddles zero at {bits} bits")]
    DenominatorStraddlesZero { bits: u32 },
    #[error("internal precision exhausted at {bits} bits")]
    PrecisionExhausted { bits: u32 },
}

/// A constant real number in closed form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RealExpr {
    Rational(Rational),
    /// Square root of a nonnegative rational that is not a perfect square
    /// (perfect squares simplify to `Rational` at construction).
    Sqrt(Rational),
    Neg(Arc<RealExpr>),
    Add(Arc<RealExpr>, Arc<RealExpr>),
    Mul(Arc<RealExpr>, Arc<RealExpr>),
    Div(Arc<RealExpr>, Arc<RealExpr>),
}

impl RealExpr {
    pub fn integer<T: Into<BigInt>>(n: T) -> Self {
        RealExpr::Rational(Rational::from_integer(n.into()))
    }

    pub fn rational(q: Rational) -> Self {
        RealExpr::Rational(q)
    }

    pub fn ratio<T: Into<BigInt>, U: Into<BigInt>>(num: T, den: U) -> Self {
        RealExpr::Rational(Rational::new(num.into(), den.into()))
    }

    /// The exact rational value of a finite float (every finite f64 is a
    /// dyadic rational).
    pub fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x).map(RealExpr::Rational)
    }

    /// Square root of a nonnegative rational. Perfect squares (of both
    /// numerator and denominator) simplify to an exact rational.
    pub fn sqrt(q: Rational) -> Result<Self, RealError> {
        if q.is_negative() {
            return Err(RealError::SqrtOfNegative(q));
        }
        let (num, den) = (q.numer(), q.denom());
        let sn = num.sqrt();
        let sd = den.sqrt();
        if &(&sn * &sn) == num && &(&sd * &sd) == den {
            return Ok(RealExpr::Rational(Rational::new(sn, sd)));
        }
        Ok(RealExpr::Sqrt(q))
    }

    pub fn neg(self) -> Self {
        match self {
            RealExpr::Rational(q) => RealExpr::Rational(-q),
            RealExpr::Neg(inner) => inner.as_ref().clone(),
            other => RealExpr::Neg(Arc::new(other)),
        }
    }

    pub fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (RealExpr::Rational(a), RealExpr::Rational(b)) => RealExpr::Rational(a + b),
            (RealExpr::Rational(a), b) if a.is_zero() => b,
            (a, RealExpr::Rational(b)) if b.is_zero() => a,
            (a, b) => RealExpr::Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(self, rhs: Self) -> Self {
        self.add(rhs.neg())
    }

    pub fn mul(self, rhs: Self) -> Self {
        match (self, rhs) {
            (RealExpr::Rational(a), RealExpr::Rational(b)) => RealExpr::Rational(a * b),
            (RealExpr::Rational(a), b) if a.is_one() => b,
            (a, RealExpr::Rational(b)) if b.is_one() => a,
            (RealExpr::Rational(a), b) if a == -Rational::one() => b.neg(),
            (a, RealExpr::Rational(b)) if b == -Rational::one() => a.neg(),
            (a, b) => RealExpr::Mul(Arc::new(a), Arc::new(b)),
        }
    }

    /// Quotient. Fails only when the divisor is *syntactically* zero; a
    /// divisor that hides a zero behind irrational cancellation surfaces as
    /// [`RealError::DenominatorStraddlesZero`] during evaluation instead.
    pub fn div(self, rhs: Self) -> Result<Self, RealError> {
        match (self, rhs) {
            (_, RealExpr::Rational(b)) if b.is_zero() => Err(RealError::DivisionByZero),
            (RealExpr::Rational(a), RealExpr::Rational(b)) => Ok(RealExpr::Rational(a / b)),
            (a, b) => Ok(RealExpr::Div(Arc::new(a), Arc::new(b))),
        }
    }

    /// Exact rational value, when the expression is syntactically rational.
    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            RealExpr::Rational(q) => Some(q.clone()),
            RealExpr::Sqrt(_) => None,
            RealExpr::Neg(a) => a.as_rational().map(|q| -q),
            RealExpr::Add(a, b) => Some(a.as_rational()? + b.as_rational()?),
            RealExpr::Mul(a, b) => Some(a.as_rational()? * b.as_rational()?),
            RealExpr::Div(a, b) => {
                let d = b.as_rational()?;
                if d.is_zero() {
                    return None;
                }
                Some(a.as_rational()? / d)
            }
        }
    }

    /// Approximate double-precision value (no certification; for display and
    /// for seeding estimates).
    pub fn to_f64(&self) -> f64 {
        match refine(self, 64) {
            Ok(iv) => iv.midpoint_f64(),
            Err(_) => f64::NAN,
        }
    }
}

fn rational_to_string(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Precedence levels for printing: additive 1, multiplicative 2, atoms 3.
pub(crate) fn expr_precedence(e: &RealExpr) -> u8 {
    match e {
        RealExpr::Add(..) | RealExpr::Neg(..) => 1,
        RealExpr::Mul(..) | RealExpr::Div(..) => 2,
        RealExpr::Sqrt(_) => 3,
        RealExpr::Rational(q) => {
            if q.is_negative() {
                1
            } else {
                3
            }
        }
    }
}

impl fmt::Display for RealExpr {
    /// Prints in the same syntax the expression parser accepts, so printed
    /// forms round-trip.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &RealExpr, min_prec: u8) -> fmt::Result {
            if expr_precedence(e) < min_prec {
                write!(f, "({})", e)
            } else {
                write!(f, "{}", e)
            }
        }
        match self {
            RealExpr::Rational(q) => write!(f, "{}", rational_to_string(q)),
            RealExpr::Sqrt(q) => write!(f, "sqrt({})", rational_to_string(q)),
            RealExpr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 2)
            }
            RealExpr::Add(a, b) => {
                write!(f, "{}", a)?;
                // Render `x + (-y)` as `x-y` where the right side makes that
                // unambiguous.
                match b.as_ref() {
                    RealExpr::Rational(q) if q.is_negative() => {
                        write!(f, "-{}", rational_to_string(&-q.clone()))
                    }
                    RealExpr::Neg(inner) => {
                        write!(f, "-")?;
                        wrap(f, inner, 2)
                    }
                    other => {
                        write!(f, "+")?;
                        wrap(f, other, 1)
                    }
                }
            }
            RealExpr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                // Right operand of `*` must bind at least as tightly; `/`
                // would reassociate, so parenthesize it.
                match expr_precedence(b) {
                    3 => write!(f, "{}", b),
                    _ => write!(f, "({})", b),
                }
            }
            RealExpr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                match expr_precedence(b) {
                    3 => write!(f, "{}", b),
                    _ => write!(f, "({})", b),
                }
            }
        }
    }
}

/// A certified enclosure: the expression's value lies in `[lo, hi]`, and
/// `hi - lo <= 2^-precision_bits` (except for the output of a failed floor
/// certification, which reports whatever width it reached).
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub precision_bits: u32,
}

impl CertifiedInterval {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn midpoint_f64(&self) -> f64 {
        rational_to_f64(&self.midpoint())
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    // num-rational's ToPrimitive handles sign and huge magnitudes.
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}

/// Fixed-point interval: value set is `[lo, hi] / 2^scale`.
#[derive(Debug, Clone)]
struct ScaledInterval {
    lo: BigInt,
    hi: BigInt,
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

/// `floor(q * 2^scale)` and `ceil(q * 2^scale)`.
fn rational_bounds(q: &Rational, scale: u32) -> (BigInt, BigInt) {
    let shifted = q.numer() << scale;
    (floor_div(&shifted, q.denom()), ceil_div(&shifted, q.denom()))
}

thread_local! {
    /// Square roots are by far the hottest repeated sub-evaluation (the same
    /// constant at the same scale, once per sequence index); memoize them.
    static SQRT_CACHE: RefCell<HashMap<(Rational, u32), (BigInt, BigInt)>> =
        RefCell::new(HashMap::new());
}

/// Enclosure of `sqrt(q) * 2^scale` for `q >= 0`.
fn sqrt_bounds(q: &Rational, scale: u32) -> (BigInt, BigInt) {
    SQRT_CACHE.with(|cache| {
        if let Some(hit) = cache.borrow().get(&(q.clone(), scale)) {
            return hit.clone();
        }
        // sqrt(q)*2^s = sqrt(q * 4^s); bracket the radicand by integers,
        // then integer sqrt gives floor on the low side; +1 covers ceil.
        let shifted = q.numer() << (2 * scale);
        let rad_lo = floor_div(&shifted, q.denom());
        let rad_hi = ceil_div(&shifted, q.denom());
        let lo = rad_lo.sqrt();
        let s = rad_hi.sqrt();
        let hi = if &s * &s == rad_hi { s } else { s + 1 };
        let result = (lo, hi);
        cache
            .borrow_mut()
            .insert((q.clone(), scale), result.clone());
        result
    })
}

fn eval_scaled(e: &RealExpr, scale: u32) -> Result<ScaledInterval, RealError> {
    match e {
        RealExpr::Rational(q) => {
            let (lo, hi) = rational_bounds(q, scale);
            Ok(ScaledInterval { lo, hi })
        }
        RealExpr::Sqrt(q) => {
            let (lo, hi) = sqrt_bounds(q, scale);
            Ok(ScaledInterval { lo, hi })
        }
        RealExpr::Neg(a) => {
            let iv = eval_scaled(a, scale)?;
            Ok(ScaledInterval {
                lo: -iv.hi,
                hi: -iv.lo,
            })
        }
        RealExpr::Add(a, b) => {
            let x = eval_scaled(a, scale)?;
            let y = eval_scaled(b, scale)?;
            Ok(ScaledInterval {
                lo: x.lo + y.lo,
                hi: x.hi + y.hi,
            })
        }
        RealExpr::Mul(a, b) => {
            let x = eval_scaled(a, scale)?;
            let y = eval_scaled(b, scale)?;
            // Products live at scale 2w; shift back outward.
            let candidates = [&x.lo * &y.lo, &x.lo * &y.hi, &x.hi * &y.lo, &x.hi * &y.hi];
            let min = candidates.iter().min().unwrap();
            let max = candidates.iter().max().unwrap();
            Ok(ScaledInterval {
                lo: min >> scale,
                hi: -((-max) >> scale),
            })
        }
        RealExpr::Div(a, b) => {
            let x = eval_scaled(a, scale)?;
            let y = eval_scaled(b, scale)?;
            if !y.lo.is_positive() && !y.hi.is_negative() {
                return Err(RealError::DenominatorStraddlesZero { bits: scale });
            }
            // (m1/2^w)/(m2/2^w) = m1/m2, so the scaled quotient is m1*2^w/m2.
            let mut lo: Option<BigInt> = None;
            let mut hi: Option<BigInt> = None;
            for num in [&x.lo, &x.hi] {
                for den in [&y.lo, &y.hi] {
                    let shifted = num << scale;
                    let f = floor_div(&shifted, den);
                    let c = ceil_div(&shifted, den);
                    lo = Some(match lo {
                        Some(cur) => cur.min(f),
                        None => f,
                    });
                    hi = Some(match hi {
                        Some(cur) => cur.max(c),
                        None => c,
                    });
                }
            }
            Ok(ScaledInterval {
                lo: lo.unwrap(),
                hi: hi.unwrap(),
            })
        }
    }
}

fn to_certified(iv: &ScaledInterval, scale: u32, precision_bits: u32) -> CertifiedInterval {
    let denom = BigInt::one() << scale;
    CertifiedInterval {
        lo: Rational::new(iv.lo.clone(), denom.clone()),
        hi: Rational::new(iv.hi.clone(), denom),
        precision_bits,
    }
}

/// Enclose `expr` in an interval of width at most `2^-p`.
///
/// Exactly-rational expressions yield a point interval. Escalation beyond the
/// width target happens internally; the only failure mode is a denominator
/// whose enclosure never clears zero (`DenominatorStraddlesZero` at the
/// internal safety cap).
pub fn refine(expr: &RealExpr, p: u32) -> Result<CertifiedInterval, RealError> {
    if let Some(q) = expr.as_rational() {
        return Ok(CertifiedInterval {
            lo: q.clone(),
            hi: q,
            precision_bits: p,
        });
    }
    // Width at scale w is (node count)*O(2^-w); the loop terminates well
    // before the safety cap for any well-defined expression.
    let safety_cap = 8 * (p + STARTING_PRECISION).max(DEFAULT_PRECISION_CAP);
    let mut scale = STARTING_PRECISION.max(p + 4);
    loop {
        match eval_scaled(expr, scale) {
            Ok(iv) => {
                // Width <= 2^-p at scale w means hi - lo <= 2^(w-p).
                let width = &iv.hi - &iv.lo;
                if scale >= p && width <= (BigInt::one() << (scale - p)) {
                    return Ok(to_certified(&iv, scale, p));
                }
            }
            Err(RealError::DenominatorStraddlesZero { .. }) if scale < safety_cap => {}
            Err(e) => return Err(e),
        }
        if scale >= safety_cap {
            return Err(RealError::PrecisionExhausted { bits: scale });
        }
        scale = (scale * 2).min(safety_cap);
    }
}

/// Outcome of a floor certification.
#[derive(Debug, Clone, PartialEq)]
pub enum FloorOutcome {
    Integer(BigInt),
    /// The enclosure still straddled an integer at `max_p` working bits.
    /// Ambiguity is information, not failure: for a non-rational expression
    /// it usually means the value is an exact integer reachable only through
    /// algebraic identities, and the caller should switch representations.
    Ambiguous(CertifiedInterval),
}

impl FloorOutcome {
    pub fn integer(self) -> Option<BigInt> {
        match self {
            FloorOutcome::Integer(n) => Some(n),
            FloorOutcome::Ambiguous(_) => None,
        }
    }
}

/// Certified floor of `expr`, escalating working precision up to `max_p` bits.
///
/// Expressions that are syntactically rational are floored exactly and never
/// report ambiguity, whatever `max_p` is.
pub fn floor_certified(expr: &RealExpr, max_p: u32) -> Result<FloorOutcome, RealError> {
    if let Some(q) = expr.as_rational() {
        return Ok(FloorOutcome::Integer(q.floor().to_integer()));
    }
    let mut scale = STARTING_PRECISION.min(max_p.max(8));
    loop {
        match eval_scaled(expr, scale) {
            Ok(iv) => {
                let m_lo = &iv.lo >> scale;
                let m_hi = &iv.hi >> scale;
                if m_lo == m_hi {
                    return Ok(FloorOutcome::Integer(m_lo));
                }
                if scale >= max_p {
                    return Ok(FloorOutcome::Ambiguous(to_certified(&iv, scale, scale)));
                }
            }
            Err(RealError::DenominatorStraddlesZero { .. }) if scale < max_p => {}
            Err(e) => return Err(e),
        }
        if scale >= max_p {
            // Denominator still straddling zero at the cap.
            return Err(RealError::DenominatorStraddlesZero { bits: scale });
        }
        scale = (scale * 2).min(max_p);
    }
}

/// Certified fractional part: returns the floor together with an enclosure of
/// `expr - floor` (clamped to `[0, 1]`), or the ambiguous enclosure.
pub fn frac_certified(
    expr: &RealExpr,
    max_p: u32,
) -> Result<(BigInt, CertifiedInterval), RealError> {
    match floor_certified(expr, max_p)? {
        FloorOutcome::Integer(m) => {
            let iv = refine(expr, max_p)?;
            let m_rat = Rational::from_integer(m.clone());
            let lo = (&iv.lo - &m_rat).max(Rational::zero());
            let hi = (&iv.hi - &m_rat).min(Rational::one());
            Ok((
                m,
                CertifiedInterval {
                    lo,
                    hi,
                    precision_bits: max_p,
                },
            ))
        }
        FloorOutcome::Ambiguous(iv) => Err(RealError::PrecisionExhausted {
            bits: iv.precision_bits,
        }),
    }
}

/// The rational with smallest denominator in the closed interval `[lo, hi]`
/// (ties on denominator broken toward smaller magnitude: among integers the
/// one closest to zero is returned).
pub fn snap_to_rational(iv: &CertifiedInterval) -> Rational {
    simplest_in_interval(&iv.lo, &iv.hi)
}

pub fn simplest_in_interval(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi, "empty interval");
    if lo.is_positive() {
        simplest_positive(lo.clone(), hi.clone())
    } else if hi.is_negative() {
        -simplest_positive(-hi.clone(), -lo.clone())
    } else {
        Rational::zero()
    }
}

/// Stern-Brocot / continued-fraction walk: the unique smallest-denominator
/// rational in `[lo, hi]` with `0 < lo <= hi`.
fn simplest_positive(lo: Rational, hi: Rational) -> Rational {
    if lo == hi {
        return lo;
    }
    let ceil_lo = lo.ceil();
    if ceil_lo <= hi.floor() {
        // An integer lies inside; the smallest positive one wins.
        return ceil_lo;
    }
    let a = lo.floor();
    // No integer inside, so both endpoints share the integer part `a` and
    // the answer is a + 1/simplest(1/(hi-a), 1/(lo-a)).
    let one = Rational::one();
    let inv_hi = one.clone() / (hi - a.clone());
    let inv_lo = one / (lo - a.clone());
    a + (Rational::one() / simplest_positive(inv_hi, inv_lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn sqrt_int(n: i64) -> RealExpr {
        RealExpr::sqrt(Rational::from_integer(n.into())).unwrap()
    }

    /// Long-division style oracle: floor(sqrt(radicand) * 10^digits) computed
    /// purely with integer sqrt on a decimal-scaled radicand, independent of
    /// the interval machinery.
    fn sqrt_decimal_oracle(radicand: u64, digits: u32) -> BigInt {
        let scale = BigInt::from(10u8).pow(digits);
        (BigInt::from(radicand) * &scale * &scale).sqrt()
    }

    #[test]
    fn refine_sqrt2_matches_decimal_oracle() {
        // 30-digit decimal enclosure from the oracle.
        let oracle = sqrt_decimal_oracle(2, 30);
        let scale = BigInt::from(10u8).pow(30);
        let lo = Rational::new(oracle.clone(), scale.clone());
        let hi = Rational::new(oracle + 1, scale);
        let iv = refine(&sqrt_int(2), 128).unwrap();
        assert!(iv.width() <= rat(1, 1) / Rational::from_integer(BigInt::one() << 128));
        // The certified interval must overlap the oracle's one-ulp bracket.
        assert!(iv.lo <= hi && lo <= iv.hi);
    }

    #[test]
    fn refine_rational_is_exact_point() {
        let iv = refine(&RealExpr::rational(rat(1, 2)), 10).unwrap();
        assert_eq!(iv.lo, rat(1, 2));
        assert_eq!(iv.hi, rat(1, 2));
    }

    #[test]
    fn refine_meets_width_for_compound_expression() {
        // sqrt(2)*sqrt(2) - 2 is exactly zero but not syntactically rational:
        // the enclosure must be thin and contain zero.
        let e = sqrt_int(2).mul(sqrt_int(2)).sub(RealExpr::integer(2));
        let iv = refine(&e, 50).unwrap();
        assert!(iv.contains(&Rational::zero()));
        assert!(iv.width() <= Rational::new(BigInt::one(), BigInt::one() << 50));
    }

    #[test]
    fn floor_of_rational_is_exact() {
        assert_eq!(
            floor_certified(&RealExpr::rational(rat(-7, 2)), 64)
                .unwrap()
                .integer()
                .unwrap(),
            BigInt::from(-4)
        );
        // sqrt(4) simplifies at construction, so this is the exact path.
        let e = RealExpr::sqrt(Rational::from_integer(4.into())).unwrap();
        assert_eq!(
            floor_certified(&e, 8).unwrap().integer().unwrap(),
            BigInt::from(2)
        );
    }

    #[test]
    fn floor_of_scaled_sqrt_matches_oracle() {
        // floor(n*sqrt(2)) for a spread of n, against the decimal oracle.
        let s = sqrt_decimal_oracle(2, 40);
        let scale = BigInt::from(10u8).pow(40);
        for n in [1i64, 2, 3, 5, 12, 99, 1000, 123_456, 10_000_019] {
            let expected = (BigInt::from(n) * &s) / &scale;
            let e = RealExpr::integer(n).mul(sqrt_int(2));
            assert_eq!(
                floor_certified(&e, 256).unwrap().integer().unwrap(),
                expected,
                "n = {n}"
            );
        }
    }

    #[test]
    fn floor_reports_ambiguity_for_hidden_integer() {
        // sqrt(2)*sqrt(2) is exactly 2; no finite interval refinement can
        // certify the floor, so the outcome must be Ambiguous, with an
        // enclosure that still contains 2.
        let e = sqrt_int(2).mul(sqrt_int(2));
        match floor_certified(&e, 512).unwrap() {
            FloorOutcome::Ambiguous(iv) => {
                assert!(iv.contains(&Rational::from_integer(2.into())));
            }
            FloorOutcome::Integer(n) => panic!("must not certify a floor, got {n}"),
        }
    }

    #[test]
    fn frac_certified_of_negative_sqrt() {
        // frac(-sqrt(2)) = 2 - sqrt(2) ≈ 0.5857864...
        let e = sqrt_int(2).neg();
        let (floor, iv) = frac_certified(&e, 64).unwrap();
        assert_eq!(floor, BigInt::from(-2));
        let approx = Rational::from_f64(0.585_786_437_626_904_9).unwrap();
        assert!((iv.midpoint() - approx).abs() < rat(1, 1_000_000_000));
    }

    #[test]
    fn division_by_hidden_zero_errors() {
        let zero = sqrt_int(2).mul(sqrt_int(2)).sub(RealExpr::integer(2));
        let e = RealExpr::integer(1).div(zero).unwrap();
        assert!(matches!(
            refine(&e, 32),
            Err(RealError::DenominatorStraddlesZero { .. })
        ));
    }

    #[test]
    fn division_by_syntactic_zero_rejected_at_construction() {
        assert_eq!(
            RealExpr::integer(1).div(RealExpr::integer(0)),
            Err(RealError::DivisionByZero)
        );
    }

    /// Brute-force oracle: smallest-denominator rational in [lo, hi] by
    /// scanning denominators in order.
    fn snap_oracle(lo: &Rational, hi: &Rational, max_den: i64) -> Rational {
        for den in 1..=max_den {
            let d = BigInt::from(den);
            // Smallest numerator with n/d >= lo.
            let n_lo = (lo * Rational::from_integer(d.clone())).ceil().to_integer();
            let cand = Rational::new(n_lo, d);
            if &cand <= hi {
                return cand;
            }
        }
        panic!("oracle ran out of denominators");
    }

    #[test]
    fn snap_matches_brute_force_oracle() {
        let cases = [
            (rat(45, 100), rat(55, 100)),
            (rat(23332, 10000), rat(23334, 10000)),
            (rat(2, 10), rat(3, 10)),
            (rat(-55, 100), rat(-45, 100)),
            (rat(-1, 10), rat(2, 10)),
            (rat(141, 100), rat(142, 100)),
            (rat(1414213, 1000000), rat(1414214, 1000000)),
            (rat(7, 3), rat(7, 3)),
        ];
        for (lo, hi) in cases {
            let got = simplest_in_interval(&lo, &hi);
            let want = snap_oracle(&lo, &hi, 2_000_000);
            // Same denominator is the contract; the choice among equal
            // denominators must still be in the interval.
            assert_eq!(
                got.denom(),
                want.denom(),
                "interval [{lo}, {hi}] got {got} want {want}"
            );
            assert!(lo <= got && got <= hi);
        }
    }

    #[test]
    fn snap_prefers_half_in_tight_interval() {
        assert_eq!(simplest_in_interval(&rat(49, 100), &rat(51, 100)), rat(1, 2));
        assert_eq!(
            simplest_in_interval(&rat(23332, 10000), &rat(23334, 10000)),
            rat(7, 3)
        );
    }

    #[test]
    fn display_round_trips_value() {
        let e = sqrt_int(2)
            .mul(RealExpr::integer(2))
            .add(RealExpr::rational(rat(-1, 3)));
        let s = format!("{e}");
        assert_eq!(s, "sqrt(2)*2-1/3");
    }

    #[test]
    fn negative_shift_is_floor_division() {
        // The floor logic relies on BigInt's >> rounding toward -inf.
        assert_eq!(BigInt::from(-3) >> 1, BigInt::from(-2));
        assert_eq!(BigInt::from(-1) >> 8, BigInt::from(-1));
        assert_eq!(BigInt::from(255) >> 8, BigInt::from(0));
    }
}
