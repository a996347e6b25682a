//! Néron–Tate canonical heights and height-pairing certificates.
//!
//! The canonical height is computed as the doubling limit
//! `ĥ(P) = ½ · lim H(2ᴺP) / 4ᴺ`, where `H` is the naive height of the
//! x-coordinate (log of the larger of |numerator| and denominator). The
//! iteration is exact rational arithmetic; only the logarithms are floating
//! point. Successive approximants decay roughly geometrically with ratio
//! 1/4, so the reported error bound is the geometric tail (1/3 of the
//! effective last difference, anchored on the recent-difference window so a
//! single cancellation cannot fake convergence) times a safety factor of 4.
//! The bound is an empirical estimate at desk scale, reported alongside
//! every value rather than hidden.
//!
//! The height pairing `⟨P,Q⟩ = ĥ(P+Q) − ĥ(P) − ĥ(Q)` fills Gram matrices
//! whose certified-nonzero determinant proves ℤ-linear independence of the
//! points, hence a rank lower bound.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Natural log via the libm backend; `f64::ln` is std-only.
#[inline]
fn f64_ln(x: f64) -> f64 {
    num_traits::Float::ln(x)
}

#[inline]
fn pow4(n: u32) -> f64 {
    num_traits::Float::powi(4.0f64, n as i32)
}

use crate::curve::{Curve, Point};
use crate::rational::Rational;

/// A canonical-height approximation with an explicit error bound
/// (natural-log units) and the number of doublings spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub doublings_used: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeightError {
    PointNotOnCurve,
    /// The doubling cap was reached with estimated error above tolerance.
    /// The best estimate is still carried inside.
    DidNotConverge {
        estimate: HeightEstimate,
    },
}

impl fmt::Display for HeightError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeightError::PointNotOnCurve => write!(f, "point is not on the curve"),
            HeightError::DidNotConverge { estimate } => write!(
                f,
                "height iteration hit the doubling cap at N = {} with estimated error {:e}",
                estimate.doublings_used, estimate.error_bound
            ),
        }
    }
}

/// Stopping tolerance and doubling cap for the height iteration.
#[derive(Debug, Clone, Copy)]
pub struct HeightOptions {
    pub tol: f64,
    pub max_doublings: u32,
}

impl Default for HeightOptions {
    fn default() -> Self {
        HeightOptions {
            tol: 1e-3,
            max_doublings: 10,
        }
    }
}

/// Accept a stop no earlier than this, so coincidentally small early
/// differences cannot end the iteration before the geometric regime.
const MIN_DOUBLINGS: u32 = 4;

/// Geometric tail factor (ratio 1/4 ⇒ tail ≤ last difference / 3) times a
/// safety factor of 4.
const ERROR_FACTOR: f64 = 4.0 / 3.0;

/// Error bound at step N from the last three differences, each scaled by its
/// expected geometric decay. Anchoring on a short window keeps one
/// accidentally cancelling difference from faking convergence.
fn error_bound(deltas: &[f64]) -> f64 {
    let mut bound = 0.0f64;
    let mut scale = 1.0;
    for &d in deltas.iter().rev().take(3) {
        bound = bound.max(d * scale);
        scale /= 4.0;
    }
    bound * ERROR_FACTOR
}

/// Natural log of a nonnegative big integer, from the bit length plus a
/// leading-bits correction. Exact enough that the limit truncation, not the
/// log, dominates every reported error bound.
pub fn ln_magnitude(n: &BigUint) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let bits = n.bits();
    if bits <= 53 {
        return f64_ln(n.to_f64().expect("fits f64"));
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().expect("53-bit integer fits f64");
    f64_ln(top) + shift as f64 * core::f64::consts::LN_2
}

/// Naive height log max(|p|, |q|) of a reduced fraction; 0 for 0 = 0/1.
pub fn naive_height(x: &Rational) -> f64 {
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    ln_magnitude(num.max(den))
}

/// Naive height of a point: H(𝒪) = 0, otherwise the naive height of x(P).
pub fn naive_height_point(p: &Point) -> f64 {
    match p.x() {
        None => 0.0,
        Some(x) => naive_height(x),
    }
}

/// The x-coordinate orbit x(P), x(2P), x(4P), … as a reduced fraction u/v,
/// advanced by the homogenized duplication formula.
///
/// With gcd(u, v) = 1, the common factor of
/// `F = u⁴ − 2Au²v² − 8Buv³ + A²v⁴` and `G = 4v(u³ + Auv² + Bv³)` divides
/// the discriminant (by the classical eliminant identity
/// `(12x² + 16A)·F − (3x³ − 5Ax − 27B)·4f = 4(4A³ + 27B²)` and
/// gcd(F, v) = 1), so each step reduces against that fixed modulus in
/// linear time instead of running a full gcd on the ever-growing operands.
struct XOrbit {
    a: BigInt,
    b: BigInt,
    disc_abs: BigUint,
    u: BigInt,
    v: BigInt,
}

impl XOrbit {
    fn new(c: &Curve, x: &Rational) -> XOrbit {
        XOrbit {
            a: c.a().clone(),
            b: c.b().clone(),
            disc_abs: c.discriminant().magnitude().clone(),
            u: x.numer().clone(),
            v: x.denom().clone(),
        }
    }

    /// Advances to x(2P). Returns false when the current point is 2-torsion
    /// (the doubled point is the identity).
    fn step(&mut self) -> bool {
        let u2 = &self.u * &self.u;
        let v2 = &self.v * &self.v;
        let uv = &self.u * &self.v;
        let u4 = &u2 * &u2;
        let v4 = &v2 * &v2;

        // G = 4(u³v + Auv³ + Bv⁴) = 4(uv(u² + Av²) + Bv⁴)
        let g = (&uv * (&u2 + &self.a * &v2) + &self.b * &v4) * BigInt::from(4);
        if g.is_zero() {
            return false;
        }
        // F = u⁴ − 2Au²v² − 8Buv³ + A²v⁴
        let f = u4 - BigInt::from(2) * &self.a * &u2 * &v2 - BigInt::from(8) * &self.b * &uv * &v2
            + &self.a * &self.a * &v4;

        if f.is_zero() {
            self.u = BigInt::zero();
            self.v = BigInt::one();
            return true;
        }

        // Reduce the huge operands mod the small modulus first, then divide
        // out exactly.
        let with_f = (f.magnitude() % &self.disc_abs).gcd(&self.disc_abs);
        let common = BigInt::from((g.magnitude() % &with_f).gcd(&with_f));
        self.u = f / &common;
        self.v = g / common;
        debug_assert!(self.v.is_positive(), "f(x) = y² > 0 off 2-torsion");
        true
    }

    fn naive_height(&self) -> f64 {
        ln_magnitude(self.u.magnitude().max(self.v.magnitude()))
    }
}

/// Canonical height by the doubling limit ĥ_N = H(2ᴺP) / (2·4ᴺ).
///
/// Torsion encountered mid-iteration (a doubling lands on the identity)
/// returns exactly 0 with error 0. `doublings_used` is reported as 1 for the
/// identity input itself.
pub fn canonical_height(
    c: &Curve,
    p: &Point,
    opts: &HeightOptions,
) -> Result<HeightEstimate, HeightError> {
    assert!(opts.max_doublings >= 1, "at least one doubling is required");
    if !c.contains(p) {
        return Err(HeightError::PointNotOnCurve);
    }
    let Some(x) = p.x() else {
        return Ok(HeightEstimate {
            value: 0.0,
            error_bound: 0.0,
            doublings_used: 1,
        });
    };

    let mut orbit = XOrbit::new(c, x);
    let mut prev = orbit.naive_height() / 2.0;
    let mut deltas = Vec::with_capacity(opts.max_doublings as usize);
    let mut at_cap = HeightEstimate {
        value: prev,
        error_bound: f64::INFINITY,
        doublings_used: 0,
    };

    for n in 1..=opts.max_doublings {
        if !orbit.step() {
            return Ok(HeightEstimate {
                value: 0.0,
                error_bound: 0.0,
                doublings_used: n,
            });
        }
        let scale = 2.0 * pow4(n);
        let est = orbit.naive_height() / scale;
        deltas.push((est - prev).abs());
        let err = error_bound(&deltas);
        if n >= MIN_DOUBLINGS && err <= opts.tol {
            return Ok(HeightEstimate {
                value: est,
                error_bound: err,
                doublings_used: n,
            });
        }
        prev = est;
        at_cap = HeightEstimate {
            value: est,
            error_bound: err,
            doublings_used: n,
        };
    }

    Err(HeightError::DidNotConverge { estimate: at_cap })
}

/// ⟨P,Q⟩ = ĥ(P+Q) − ĥ(P) − ĥ(Q), with the three error bounds summed.
pub fn pairing(
    c: &Curve,
    p: &Point,
    q: &Point,
    opts: &HeightOptions,
) -> Result<(f64, f64), HeightError> {
    let hp = canonical_height(c, p, opts)?;
    let hq = canonical_height(c, q, opts)?;
    let sum = c.add(p, q).map_err(|_| HeightError::PointNotOnCurve)?;
    let hs = canonical_height(c, &sum, opts)?;
    Ok((
        hs.value - hp.value - hq.value,
        hs.error_bound + hp.error_bound + hq.error_bound,
    ))
}

/// Height-pairing matrix with entrywise error bounds.
///
/// Entries are natural-log units divided by ln(log_base); `log_base = 1`
/// means natural log (no rescaling).
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Vec<Vec<f64>>,
    entry_errors: Vec<Vec<f64>>,
    points: Vec<Point>,
    log_base: f64,
}

impl GramMatrix {
    /// Wraps an explicit matrix (no associated points), e.g. an exactly
    /// known pairing matrix with zero errors.
    pub fn from_entries(entries: Vec<Vec<f64>>, entry_errors: Vec<Vec<f64>>) -> GramMatrix {
        let k = entries.len();
        assert!(
            entries.iter().all(|row| row.len() == k),
            "matrix not square"
        );
        assert_eq!(entry_errors.len(), k);
        assert!(entry_errors.iter().all(|row| row.len() == k));
        GramMatrix {
            entries,
            entry_errors,
            points: Vec::new(),
            log_base: 1.0,
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn entry_errors(&self) -> &[Vec<f64>] {
        &self.entry_errors
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn log_base(&self) -> f64 {
        self.log_base
    }
}

/// Outcome of the determinant test on a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependenceVerdict {
    pub independent: bool,
    pub determinant: f64,
    /// Certified lower bound on |det| after first-order error propagation.
    pub margin: f64,
    pub rank_lower_bound: usize,
}

/// Fills ⟨P_i,P_j⟩ computing each unordered pair once: k height runs for the
/// points themselves plus k(k−1)/2 for the pairwise sums. Diagonal entries
/// use ⟨P,P⟩ = 2ĥ(P), exact by quadraticity of the canonical height.
pub fn gram_matrix(
    c: &Curve,
    points: &[Point],
    opts: &HeightOptions,
    log_base: f64,
) -> Result<GramMatrix, HeightError> {
    let (gram, converged) = gram_matrix_impl(c, points, opts, log_base, false)?;
    debug_assert!(converged);
    Ok(gram)
}

/// Like `gram_matrix`, but a height that hits the doubling cap contributes
/// its best estimate instead of aborting. The flag reports whether every
/// height converged; when false the matrix is a diagnostic, not a
/// certificate.
pub fn gram_matrix_best_effort(
    c: &Curve,
    points: &[Point],
    opts: &HeightOptions,
    log_base: f64,
) -> Result<(GramMatrix, bool), HeightError> {
    gram_matrix_impl(c, points, opts, log_base, true)
}

fn gram_matrix_impl(
    c: &Curve,
    points: &[Point],
    opts: &HeightOptions,
    log_base: f64,
    lenient: bool,
) -> Result<(GramMatrix, bool), HeightError> {
    assert!(
        log_base >= 1.0 && log_base.is_finite(),
        "log base must be a finite real ≥ 1 (1 = natural)"
    );
    let scale = if log_base == 1.0 {
        1.0
    } else {
        f64_ln(log_base)
    };
    let k = points.len();
    let mut converged = true;

    let mut height_of = |point: &Point| -> Result<HeightEstimate, HeightError> {
        match canonical_height(c, point, opts) {
            Ok(h) => Ok(h),
            Err(HeightError::DidNotConverge { estimate }) if lenient => {
                converged = false;
                Ok(estimate)
            }
            Err(e) => Err(e),
        }
    };

    let mut heights = Vec::with_capacity(k);
    for p in points {
        heights.push(height_of(p)?);
    }

    let mut entries = vec![vec![0.0; k]; k];
    let mut errors = vec![vec![0.0; k]; k];

    for i in 0..k {
        entries[i][i] = 2.0 * heights[i].value / scale;
        errors[i][i] = 2.0 * heights[i].error_bound / scale;
        for j in (i + 1)..k {
            let sum = c
                .add(&points[i], &points[j])
                .map_err(|_| HeightError::PointNotOnCurve)?;
            let h_sum = height_of(&sum)?;
            let value = (h_sum.value - heights[i].value - heights[j].value) / scale;
            let error =
                (h_sum.error_bound + heights[i].error_bound + heights[j].error_bound) / scale;
            entries[i][j] = value;
            entries[j][i] = value;
            errors[i][j] = error;
            errors[j][i] = error;
        }
    }

    Ok((
        GramMatrix {
            entries,
            entry_errors: errors,
            points: points.to_vec(),
            log_base,
        },
        converged,
    ))
}

/// Determinant test with first-order perturbation margin:
/// margin = |det| − Σ_{i,j} |cofactor_{ij}| · error_{ij}. Independence is
/// certified exactly when the margin is positive.
pub fn independence_certificate(g: &GramMatrix) -> IndependenceVerdict {
    let k = g.size();
    assert!(k >= 1, "empty Gram matrix");
    let det = determinant(g.entries());
    let mut perturbation = 0.0;
    for i in 0..k {
        for j in 0..k {
            perturbation += cofactor(g.entries(), i, j).abs() * g.entry_errors()[i][j];
        }
    }
    let margin = det.abs() - perturbation;
    let independent = margin > 0.0;
    IndependenceVerdict {
        independent,
        determinant: det,
        margin,
        rank_lower_bound: if independent { k } else { 0 },
    }
}

/// Laplace expansion; the matrices here are tiny (k ≤ 3 in the pipeline).
fn determinant(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        k => {
            let mut acc = 0.0;
            for j in 0..k {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * m[0][j] * determinant(&minor(m, 0, j));
            }
            acc
        }
    }
}

fn minor(m: &[Vec<f64>], row: usize, col: usize) -> Vec<Vec<f64>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

fn cofactor(m: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let sign = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * determinant(&minor(m, i, j))
}
