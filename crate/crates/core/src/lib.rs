//! Generation of Beatty-type generalized polynomial sequences and recovery of
//! their hidden real parameters.
//!
//! The crate has two halves:
//!
//! * **Forward**: evaluate generalized polynomials — expressions built from
//!   variables, real constants, `+`, `*` and the floor function — exactly,
//!   and generate the classic integer-sequence families they define
//!   ([`genpoly`], [`seqgen`], backed by the certified constant arithmetic
//!   in [`reals`]).
//! * **Inverse**: given only the integer sequence, recover the real
//!   parameters that produced it — from jump frequencies ([`jump`]), from
//!   prime factors of products ([`product`]), from the limit set of
//!   normalized differences ([`symmetric`]), and from deficit moments or
//!   jump spectra of nested floors ([`nested`]). The [`identity`] module
//!   decides when two parameter lists produce the *same* sequence.
//!
//! Recovered values always carry error radii; exact rational recovery is
//! attempted whenever the data supports it, and every certification either
//! succeeds or reports its failure honestly (ambiguity is a value here, not
//! a panic).

pub mod genpoly;
pub mod identity;
pub mod jump;
pub mod nested;
pub mod primality;
pub mod product;
pub mod reals;
pub mod report;
pub mod roots;
pub mod seqgen;
pub mod symmetric;

pub use reals::{
    floor_certified, frac_certified, refine, snap_to_rational, CertifiedInterval, FloorOutcome,
    Rational, RealError, RealExpr, DEFAULT_PRECISION_CAP,
};
