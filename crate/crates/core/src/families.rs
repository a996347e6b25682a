//! The two curve families and the end-to-end rank certification pipeline.
//!
//! Square family: `y² = x³ − a²x + b²` with designated points
//! (0,b), (a,b), (−1,2b); the third lies on the curve exactly when
//! a² = 3b² + 1 (a Pell pair). Sixth family: `y² = x³ − a²x + b⁶` with
//! (0,b³), (a,b³), (−b²,ab), on the curve for every a, b ≥ 1.
//!
//! `certify` runs torsion (square family by default), fills the 3×3 height
//! pairing matrix, and issues an independence verdict whose positive margin
//! certifies Mordell–Weil rank ≥ 3.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::curve::{Curve, Point};
use crate::heights::{
    gram_matrix_best_effort, independence_certificate, GramMatrix, HeightOptions,
    IndependenceVerdict,
};
use crate::pell;
use crate::rational::Rational;
use crate::torsion::{
    good_reduction_primes, theorem1_hypotheses, torsion_subgroup_with, TorsionConfig, TorsionResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// y² = x³ − a²x + b²
    Square,
    /// y² = x³ − a²x + b⁶
    Sixth,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Square => "square",
            Family::Sixth => "sixth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyError {
    /// Square family only: a² ≠ 3b² + 1, so (−1, 2b) misses the curve.
    NotOnCurve { a: BigUint, b: BigUint },
    /// Parameters must satisfy a, b ≥ 1.
    InvalidParameters,
    /// Degenerate model. Unreachable for valid parameters; kept as a guard.
    Singular,
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::NotOnCurve { a, b } => write!(
                f,
                "(-1, 2b) is not on the curve: the Pell relation a^2 = 3b^2 + 1 fails for a = {a}, b = {b}"
            ),
            FamilyError::InvalidParameters => write!(f, "family parameters must satisfy a, b >= 1"),
            FamilyError::Singular => write!(f, "family model is singular"),
        }
    }
}

/// Which of the theorem-grade hypotheses the parameters satisfy. Recorded,
/// not enforced: the numeric pipeline is well-defined without them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisFlags {
    pub pell_relation_holds: bool,
    pub theorem1_hypotheses: bool,
    pub a_less_than_b: bool,
}

/// A family member: curve plus its three designated points.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInstance {
    pub family: Family,
    pub a: BigUint,
    pub b: BigUint,
    pub curve: Curve,
    pub points: [Point; 3],
    pub hypothesis_flags: HypothesisFlags,
}

/// Display normalization for Gram entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    /// Natural log (the canonical internal unit).
    #[default]
    Natural,
    /// The family's own parameter: a for the square family, b for the sixth.
    FamilyBase,
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub tol: f64,
    pub max_doublings: u32,
    pub prime_window: usize,
    pub prime_limit: u64,
    /// None: torsion on for the square family, off for the sixth.
    pub compute_torsion: Option<bool>,
    pub log_base: LogBase,
    /// Milliseconds since the epoch, supplied by the caller; the library
    /// itself never reads a clock.
    pub timestamp_ms: Option<u64>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            tol: 1e-3,
            max_doublings: 10,
            prime_window: 5,
            prime_limit: 200,
            compute_torsion: None,
            log_base: LogBase::Natural,
            timestamp_ms: None,
        }
    }
}

/// The numeric context a certificate was produced under.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateParams {
    pub tol: f64,
    pub max_doublings: u32,
    pub primes: Vec<u64>,
}

/// Torsion verdict, Gram matrix, and independence verdict for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RankCertificate {
    pub instance: FamilyInstance,
    pub torsion: Option<TorsionResult>,
    pub gram: GramMatrix,
    pub verdict: IndependenceVerdict,
    pub params: CertificateParams,
    pub timestamp_ms: Option<u64>,
    /// Present when the verdict was withheld (e.g. the height iteration hit
    /// its cap before reaching tolerance).
    pub diagnostic: Option<String>,
}

impl RankCertificate {
    pub fn certified(&self) -> bool {
        self.verdict.independent && self.verdict.rank_lower_bound == 3
    }
}

fn require_positive(a: &BigUint, b: &BigUint) -> Result<(), FamilyError> {
    if a.is_zero() || b.is_zero() {
        Err(FamilyError::InvalidParameters)
    } else {
        Ok(())
    }
}

fn flags(a: &BigUint, b: &BigUint, pell_relation_holds: bool) -> HypothesisFlags {
    HypothesisFlags {
        pell_relation_holds,
        theorem1_hypotheses: theorem1_hypotheses(a, b),
        a_less_than_b: a < b,
    }
}

fn int(v: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(v.clone()))
}

fn pell_relation_holds(a: &BigUint, b: &BigUint) -> bool {
    a * a == BigUint::from(3u32) * b * b + BigUint::one()
}

/// Square-family member with points (0,b), (a,b), (−1,2b). Requires the Pell
/// relation a² = 3b² + 1; without it the third point misses the curve.
pub fn build_square(a: BigUint, b: BigUint) -> Result<FamilyInstance, FamilyError> {
    require_positive(&a, &b)?;
    if !pell_relation_holds(&a, &b) {
        return Err(FamilyError::NotOnCurve { a, b });
    }
    let a_int = BigInt::from(a.clone());
    let b_int = BigInt::from(b.clone());
    let curve =
        Curve::new(-(&a_int * &a_int), &b_int * &b_int).map_err(|_| FamilyError::Singular)?;
    let points = [
        curve.point(Rational::zero(), int(&b)),
        curve.point(int(&a), int(&b)),
        curve.point(
            Rational::from_integer(BigInt::from(-1)),
            int(&b) * Rational::from_integer(2.into()),
        ),
    ]
    .map(|p| p.expect("designated square-family points satisfy the curve equation"));
    let hypothesis_flags = flags(&a, &b, true);
    Ok(FamilyInstance {
        family: Family::Square,
        a,
        b,
        curve,
        points,
        hypothesis_flags,
    })
}

/// Sixth-family member with points (0,b³), (a,b³), (−b²,ab); all three lie
/// on the curve for every a, b ≥ 1. The hypothesis 0 < a < b is recorded as
/// a flag, never enforced.
pub fn build_sixth(a: BigUint, b: BigUint) -> Result<FamilyInstance, FamilyError> {
    require_positive(&a, &b)?;
    let a_int = BigInt::from(a.clone());
    let b_int = BigInt::from(b.clone());
    let curve = Curve::new(-(&a_int * &a_int), b_int.pow(6)).map_err(|_| FamilyError::Singular)?;
    let b_cubed = int(&b) * int(&b) * int(&b);
    let points = [
        curve.point(Rational::zero(), b_cubed.clone()),
        curve.point(int(&a), b_cubed),
        curve.point(-(int(&b) * int(&b)), int(&a) * int(&b)),
    ]
    .map(|p| p.expect("designated sixth-family points satisfy the curve equation"));
    let pell = pell_relation_holds(&a, &b);
    let hypothesis_flags = flags(&a, &b, pell);
    Ok(FamilyInstance {
        family: Family::Sixth,
        a,
        b,
        curve,
        points,
        hypothesis_flags,
    })
}

fn resolved_log_base(inst: &FamilyInstance, choice: LogBase) -> f64 {
    match choice {
        LogBase::Natural => 1.0,
        LogBase::FamilyBase => {
            let base = match inst.family {
                Family::Square => &inst.a,
                Family::Sixth => &inst.b,
            };
            base.to_f64().unwrap_or(f64::INFINITY)
        }
    }
}

/// Runs the pipeline: torsion subgroup (where requested), Gram matrix on the
/// three designated points, independence verdict. Never fails: a height
/// iteration that hits its cap yields a certificate with
/// `independent = false` and a diagnostic instead.
pub fn certify(inst: &FamilyInstance, opts: &CertifyOptions) -> RankCertificate {
    let primes = good_reduction_primes(&inst.curve, opts.prime_window, opts.prime_limit);
    let torsion_cfg = TorsionConfig {
        prime_window: opts.prime_window,
        prime_limit: opts.prime_limit,
    };
    let do_torsion = opts
        .compute_torsion
        .unwrap_or(inst.family == Family::Square);
    let torsion = do_torsion.then(|| torsion_subgroup_with(&inst.curve, &torsion_cfg));

    let height_opts = HeightOptions {
        tol: opts.tol,
        max_doublings: opts.max_doublings,
    };
    let base = resolved_log_base(inst, opts.log_base);
    let (gram, converged) = gram_matrix_best_effort(&inst.curve, &inst.points, &height_opts, base)
        .expect("designated points are on the curve");

    let mut verdict = independence_certificate(&gram);
    let mut diagnostic = None;
    if !converged {
        diagnostic = Some(format!(
            "canonical height hit the doubling cap N = {} before reaching tol = {:e}; margin not certified",
            opts.max_doublings, opts.tol
        ));
        verdict = IndependenceVerdict {
            independent: false,
            determinant: verdict.determinant,
            margin: 0.0,
            rank_lower_bound: 0,
        };
    }

    RankCertificate {
        instance: inst.clone(),
        torsion,
        gram,
        verdict,
        params: CertificateParams {
            tol: opts.tol,
            max_doublings: opts.max_doublings,
            primes,
        },
        timestamp_ms: opts.timestamp_ms,
        diagnostic,
    }
}

/// Where a scan draws its instances from.
#[derive(Debug, Clone)]
pub enum ScanSource {
    /// The first k admissible Pell pairs (square-family seeds).
    PellCount(usize),
    /// An explicit (a, b) list.
    Pairs(Vec<(BigUint, BigUint)>),
}

/// One scan item: the parameters and either a certificate or the build
/// failure that kept the item from certifying. Failures never abort a scan.
#[derive(Debug, Clone)]
pub struct ScanRecord {
    pub a: BigUint,
    pub b: BigUint,
    pub outcome: Result<RankCertificate, FamilyError>,
}

/// Certificates for each instance, in input order.
pub fn scan(family: Family, source: ScanSource, opts: &CertifyOptions) -> Vec<ScanRecord> {
    let pairs: Vec<(BigUint, BigUint)> = match source {
        ScanSource::PellCount(k) => pell::admissible_stream(k)
            .into_iter()
            .map(|p| (p.a().clone(), p.b().clone()))
            .collect(),
        ScanSource::Pairs(v) => v,
    };
    pairs
        .into_iter()
        .map(|(a, b)| {
            let built = match family {
                Family::Square => build_square(a.clone(), b.clone()),
                Family::Sixth => build_sixth(a.clone(), b.clone()),
            };
            ScanRecord {
                a,
                b,
                outcome: built.map(|inst| certify(&inst, opts)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn square_family_construction() {
        let inst = build_square(u(26), u(15)).unwrap();
        assert_eq!(inst.family, Family::Square);
        for p in &inst.points {
            assert!(inst.curve.contains(p));
        }
        assert!(inst.hypothesis_flags.pell_relation_holds);
        assert!(inst.hypothesis_flags.theorem1_hypotheses);

        let inst = build_square(u(2), u(1)).unwrap();
        assert!(inst.curve.contains(&inst.points[2]));

        assert_eq!(
            build_square(u(3), u(2)),
            Err(FamilyError::NotOnCurve { a: u(3), b: u(2) })
        );
        assert_eq!(
            build_square(u(0), u(1)),
            Err(FamilyError::InvalidParameters)
        );
    }

    #[test]
    fn sixth_family_construction() {
        let inst = build_sixth(u(1), u(2)).unwrap();
        let xs: Vec<i64> = inst
            .points
            .iter()
            .map(|p| p.x().unwrap().numer().to_i64().unwrap())
            .collect();
        assert_eq!(xs, [0, 1, -4]);
        assert!(inst.hypothesis_flags.a_less_than_b);

        let inst = build_sixth(u(1), u(3)).unwrap();
        for p in &inst.points {
            assert!(inst.curve.contains(p));
        }

        let inst = build_sixth(u(5), u(2)).unwrap();
        assert!(!inst.hypothesis_flags.a_less_than_b);
        for p in &inst.points {
            assert!(inst.curve.contains(p));
        }
    }

    #[test]
    fn sixth_membership_is_an_identity() {
        // deterministic xorshift sampling of (a, b) in [1, 50]
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..100 {
            let a = next() % 50 + 1;
            let b = next() % 50 + 1;
            let inst = build_sixth(u(a), u(b)).unwrap();
            for p in &inst.points {
                assert!(inst.curve.contains(p), "membership failed at ({a}, {b})");
            }
        }
    }

    #[test]
    fn certify_square_seed() {
        let inst = build_square(u(26), u(15)).unwrap();
        let cert = certify(&inst, &CertifyOptions::default());
        assert!(cert.certified());
        assert_eq!(cert.verdict.rank_lower_bound, 3);
        assert!(cert.verdict.margin > 0.0);
        let torsion = cert
            .torsion
            .expect("square family computes torsion by default");
        assert!(torsion.is_trivial());
        assert_eq!(cert.params.primes.len(), 5);
        assert!(cert.diagnostic.is_none());
    }

    #[test]
    fn certify_sixth_smallest() {
        let inst = build_sixth(u(1), u(2)).unwrap();
        let cert = certify(&inst, &CertifyOptions::default());
        assert!(cert.certified());
        assert!(
            cert.torsion.is_none(),
            "sixth family skips torsion by default"
        );

        let opts = CertifyOptions {
            compute_torsion: Some(true),
            ..CertifyOptions::default()
        };
        let cert = certify(&inst, &opts);
        assert!(cert.torsion.is_some());
    }

    #[test]
    fn dependent_points_fail_certification() {
        let mut inst = build_square(u(26), u(15)).unwrap();
        let p = inst.points[0].clone();
        inst.points = [
            p.clone(),
            inst.curve.scalar_mul(2, &p).unwrap(),
            inst.curve.scalar_mul(3, &p).unwrap(),
        ];
        let cert = certify(&inst, &CertifyOptions::default());
        assert!(!cert.verdict.independent);
        assert_eq!(cert.verdict.rank_lower_bound, 0);
    }

    #[test]
    fn unconverged_heights_yield_diagnostic_not_panic() {
        let inst = build_sixth(u(1), u(2)).unwrap();
        let opts = CertifyOptions {
            tol: 1e-12,
            max_doublings: 4,
            ..CertifyOptions::default()
        };
        let cert = certify(&inst, &opts);
        assert!(!cert.verdict.independent);
        assert_eq!(cert.verdict.margin, 0.0);
        assert!(cert.diagnostic.is_some());
    }

    #[test]
    fn scan_isolates_failures() {
        let opts = CertifyOptions::default();
        let records = scan(
            Family::Square,
            ScanSource::Pairs(alloc::vec![(u(2), u(1)), (u(3), u(2))]),
            &opts,
        );
        assert_eq!(records.len(), 2);
        assert!(records[0].outcome.is_ok());
        assert!(records[1].outcome.is_err());

        let empty = scan(Family::Sixth, ScanSource::Pairs(Vec::new()), &opts);
        assert!(empty.is_empty());
    }

    #[test]
    fn scan_pell_draws_admissible_seeds() {
        let records = scan(
            Family::Square,
            ScanSource::PellCount(1),
            &CertifyOptions::default(),
        );
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].a, u(26));
        assert_eq!(records[0].b, u(15));
        assert!(records[0].outcome.as_ref().unwrap().certified());
    }
}
