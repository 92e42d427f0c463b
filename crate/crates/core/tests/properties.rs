//! Randomized invariants. Each test states a law the library is supposed to
//! obey for *every* input and lets proptest hunt for counterexamples; the
//! fixed-example regression coverage lives with the modules and in the
//! acceptance suite.

use beatty_core::genpoly::{self, GenPoly};
use beatty_core::identity::{self, Verdict};
use beatty_core::primality::PrimalityConfig;
use beatty_core::product;
use beatty_core::reals::simplest_in_interval;
use beatty_core::seqgen::{self, FloorWord, IntegerSequence};
use beatty_core::symmetric;
use beatty_core::{floor_certified, refine, FloorOutcome, Rational, RealExpr};
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::collection::vec as pvec;
use proptest::prelude::*;

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Constant expressions mixing rationals and square roots through the ring
/// operations; every tree this produces is a well-defined real number.
fn arb_real_expr() -> impl Strategy<Value = RealExpr> {
    let leaf = prop_oneof![
        (-50i64..=50, 1i64..=12).prop_map(|(p, q)| RealExpr::ratio(p, q)),
        (0i64..=30, 1i64..=9).prop_map(|(p, q)| RealExpr::sqrt(rat(p, q)).unwrap()),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
        ]
    })
}

/// Univariate floor expressions over nonnegative rational constants — the
/// fragment where evaluation is exact, so printer/parser disagreements are
/// the only possible source of divergence.
fn arb_rational_poly() -> impl Strategy<Value = GenPoly> {
    let leaf = prop_oneof![
        2 => Just(GenPoly::var(1)),
        2 => (0i64..=50, 1i64..=12).prop_map(|(p, q)| GenPoly::constant(RealExpr::ratio(p, q))),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            pvec(inner.clone(), 2..=3).prop_map(genpoly::sum),
            pvec(inner.clone(), 2..=3).prop_map(genpoly::product),
            inner.prop_map(genpoly::floor),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Refining the same expression at higher precision keeps enclosing the
    /// same real number (a 1024-bit pin must meet both enclosures) and never
    /// widens the interval.
    #[test]
    fn certified_enclosures_stay_sound_and_tighten(e in arb_real_expr()) {
        let iv64 = refine(&e, 64).unwrap();
        let iv256 = refine(&e, 256).unwrap();
        let pin = refine(&e, 1024).unwrap();
        prop_assert!(iv256.width() <= iv64.width(),
            "width grew: {} -> {}", iv64.width(), iv256.width());
        for iv in [&iv64, &iv256] {
            prop_assert!(iv.lo <= pin.hi && pin.lo <= iv.hi,
                "enclosure [{}, {}] misses the 1024-bit pin [{}, {}]",
                iv.lo, iv.hi, pin.lo, pin.hi);
        }
    }

    /// Certified floors commute with integer shifts: whenever both sides
    /// certify, floor(x + k) = floor(x) + k.
    #[test]
    fn certified_floor_commutes_with_integer_shifts(
        e in arb_real_expr(),
        k in -500i64..=500,
    ) {
        let shifted = e.clone().add(RealExpr::integer(k));
        if let (Ok(FloorOutcome::Integer(m)), Ok(FloorOutcome::Integer(ms))) =
            (floor_certified(&e, 512), floor_certified(&shifted, 512))
        {
            prop_assert_eq!(ms, m + BigInt::from(k));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The snap target is the *simplest* rational in the interval: it lies
    /// inside, and no rational with a smaller denominator does.
    #[test]
    fn interval_snap_returns_the_simplest_rational(
        p1 in -200i64..=200, q1 in 1i64..=60,
        p2 in -200i64..=200, q2 in 1i64..=60,
    ) {
        let (a, b) = (rat(p1, q1), rat(p2, q2));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let r = simplest_in_interval(&lo, &hi);
        prop_assert!(lo <= r && r <= hi, "{r} outside [{lo}, {hi}]");
        let rd = num_traits::ToPrimitive::to_i64(r.denom()).unwrap();
        for q in 1..rd {
            let qr = Rational::from_integer(BigInt::from(q));
            let top = (&hi * &qr).floor().to_integer();
            let bot = (&lo * &qr).ceil().to_integer();
            prop_assert!(top < bot,
                "denominator {q} admits {bot}/{q} in [{lo}, {hi}] yet snap gave {r}");
        }
    }

    /// Floor-word ranks and bit vectors are two views of the same object.
    #[test]
    fn floor_words_round_trip_through_ranks(
        (d, t) in (1usize..=8).prop_flat_map(|d| (Just(d), 0usize..(1usize << d))),
    ) {
        let w = FloorWord::from_rank(t, d);
        prop_assert_eq!(w.len(), d);
        let rank = w.bits().iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
        prop_assert_eq!(rank, t);
        let weight = w.bits().iter().filter(|&&b| b == 1).count();
        prop_assert_eq!(w.hamming_weight(), weight);
        if t == 0 {
            prop_assert_eq!(w, FloorWord::all_floors(d));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// What the printer writes, the parser reads back as the same expression,
    /// and both evaluate identically.
    #[test]
    fn printer_and_parser_agree(g in arb_rational_poly(), n in -50i64..=50) {
        let shown = format!("{g}");
        let back = genpoly::parse(&shown)
            .map_err(|e| TestCaseError::fail(format!("printer wrote {shown:?}: {e}")))?;
        prop_assert_eq!(&back, &g, "round trip changed {}", shown);
        let lhs = genpoly::floor(g.clone());
        let rhs = genpoly::floor(back);
        prop_assert_eq!(
            genpoly::eval_at_integer(&lhs, n, 128).ok(),
            genpoly::eval_at_integer(&rhs, n, 128).ok()
        );
    }

    /// The equality decision emits a (period, shift) certificate; the nested
    /// map must actually satisfy a(n + period) = a(n) + shift everywhere.
    #[test]
    fn nested_floor_maps_satisfy_their_period_certificate(
        raw in pvec((1i64..=9, 1i64..=9), 1..=4),
        n in -1_000_000i64..=1_000_000,
    ) {
        let params: Vec<Rational> = raw.iter().map(|&(p, q)| rat(p, q)).collect();
        let rep = identity::rational_nested_equiv(&params, &params);
        let (period, shift) = match rep.verdict {
            Verdict::ProvedEqual { period, shift, .. } => (period, shift),
            v => return Err(TestCaseError::fail(format!(
                "self-comparison not proved equal: {v:?}"
            ))),
        };
        let base = identity::nested_rational_value(&params, &BigInt::from(n));
        let stepped = identity::nested_rational_value(&params, &(BigInt::from(n) + &period));
        prop_assert_eq!(stepped, base + &shift, "period {} shift {}", period, shift);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Peeling inverts cube construction no matter how the corners arrive.
    #[test]
    fn cube_corners_peel_back_to_their_edges(
        (edges, corners) in (
            (0i64..=100, 1i64..=6),
            pvec((1i64..=30, 1i64..=6), 1..=5),
        )
            .prop_flat_map(|((bp, bq), raw)| {
                let base = rat(bp, bq);
                let edges: Vec<Rational> = raw.iter().map(|&(p, q)| rat(p, q)).collect();
                let mut corners = vec![base];
                for e in &edges {
                    let shifted: Vec<Rational> = corners.iter().map(|c| c + e).collect();
                    corners.extend(shifted);
                }
                (Just(edges), Just(corners).prop_shuffle())
            }),
    ) {
        let peeled = symmetric::peel_cube_edges_exact(&corners)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut want = edges;
        want.sort();
        prop_assert_eq!(peeled, want);
    }

    /// The sequence file format is lossless for values and metadata.
    #[test]
    fn sequence_files_round_trip(
        vals in pvec((any::<i64>(), 0usize..=128), 1..60),
        meta in pvec(("[a-z][a-z0-9_]{0,7}", "[A-Za-z0-9 :/._+-]{0,16}"), 0..4),
    ) {
        let values: Vec<BigInt> = vals.iter().map(|&(x, s)| BigInt::from(x) << s).collect();
        let mut seq = IntegerSequence::new(values.clone());
        let meta: Vec<(String, String)> = meta
            .into_iter()
            .map(|(k, v)| (k, v.trim().to_string()))
            .collect();
        for (k, v) in &meta {
            seq = seq.with_meta(k, v.clone());
        }
        let mut buf = Vec::new();
        seq.write_to(&mut buf).unwrap();
        let back = IntegerSequence::read_from(&buf[..]).unwrap();
        prop_assert_eq!(back.values(), &values[..]);
        prop_assert_eq!(back.meta(), &meta[..]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// On non-integer rational inputs with small denominators the product
    /// pipeline must come back with the exact labels, not approximations:
    /// the detection intervals are narrower than the spacing between
    /// candidates. (Integer multipliers are out of scope by design — they
    /// make the leading floor `k·n`, which never carries the large prime
    /// factors the detections rely on.)
    #[test]
    fn rational_product_recovery_is_exact(
        q1 in 2i64..=9, q2 in 2i64..=9,
        s1 in 0i64..=100, s2 in 0i64..=100,
    ) {
        // Numerators chosen so both multipliers land in (1.2, 3.8).
        let pick = |q: i64, s: i64| {
            let lo = (12 * q) / 10 + 1;
            let hi = (38 * q) / 10;
            lo + s % (hi - lo + 1)
        };
        let (p1, p2) = (pick(q1, s1), pick(q2, s2));
        prop_assume!(p1 % q1 != 0 && p2 % q2 != 0);
        let a = rat(p1, q1);
        let b = rat(p2, q2);
        prop_assume!((&a - &b).abs() > rat(1, 20));
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };

        let alphas = vec![RealExpr::rational(hi.clone()), RealExpr::rational(lo.clone())];
        let k = genpoly::ClassicalPoly::var(2, 1).mul(&genpoly::ClassicalPoly::var(2, 2));
        let seq = seqgen::gen_poly_of_floors(&k, &alphas, 2000, 256).unwrap();
        let rec = product::recover_product(&seq, 2, &PrimalityConfig::default())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let got: Vec<Option<&str>> = rec.alphas.iter().map(|e| e.exact.as_deref()).collect();
        let want = [hi.to_string(), lo.to_string()];
        prop_assert_eq!(got, [Some(want[0].as_str()), Some(want[1].as_str())]);
        prop_assert!(
            !rec.flags.iter().any(|f| f == "exact-candidate-failed-regeneration"),
            "flags: {:?}", rec.flags
        );
    }
}
