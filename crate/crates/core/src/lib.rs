//! Exact arithmetic on two families of elliptic curves over the rationals.
//!
//! The library constructs the curve families `y² = x³ − a²x + b²` and
//! `y² = x³ − a²x + b⁶`, determines torsion subgroups, computes Néron–Tate
//! canonical heights by the doubling limit, and assembles machine-checkable
//! certificates that the designated three points are independent, giving a
//! Mordell–Weil rank lower bound of 3.
//!
//! The crate is `no_std` (alloc required); IO, CLI, and report formats live
//! in the companion `rank3-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod curve;
pub mod families;
pub mod heights;
pub mod pell;
pub mod rational;
pub mod torsion;

pub use curve::{Curve, CurveError, Point};
pub use families::{
    CertifyOptions, Family, FamilyError, FamilyInstance, HypothesisFlags, LogBase, RankCertificate,
    ScanRecord, ScanSource,
};
pub use heights::{GramMatrix, HeightError, HeightEstimate, HeightOptions, IndependenceVerdict};
pub use pell::PellPair;
pub use rational::Rational;
pub use torsion::{TorsionMethod, TorsionResult};
