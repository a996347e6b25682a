//! Short Weierstrass curves `y² = x³ + Ax + B` over ℚ with integer
//! coefficients, and the exact chord–tangent group law on their rational
//! points.
//!
//! All coordinate arithmetic is exact: degeneracies (vertical chords,
//! tangents at 2-torsion) are decided by equality of reduced fractions,
//! never by tolerance.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveError {
    /// 4A³ + 27B² = 0: the cubic has a repeated root.
    SingularCurve,
    /// A point handed to a group-law operation does not satisfy the curve
    /// equation.
    PointNotOnCurve,
    /// The duplication formula was evaluated at a 2-torsion abscissa, where
    /// its denominator vanishes.
    TwoTorsionX,
}

impl fmt::Display for CurveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveError::SingularCurve => write!(f, "singular curve: 4A^3 + 27B^2 = 0"),
            CurveError::PointNotOnCurve => write!(f, "point is not on the curve"),
            CurveError::TwoTorsionX => {
                write!(f, "duplication formula undefined at a 2-torsion abscissa")
            }
        }
    }
}

/// A rational point: the identity (point at infinity) or an affine pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Point {
    Identity,
    Affine(Rational, Rational),
}

impl Point {
    pub fn affine(x: Rational, y: Rational) -> Self {
        Point::Affine(x, y)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Point::Identity)
    }

    pub fn x(&self) -> Option<&Rational> {
        match self {
            Point::Identity => None,
            Point::Affine(x, _) => Some(x),
        }
    }

    pub fn y(&self) -> Option<&Rational> {
        match self {
            Point::Identity => None,
            Point::Affine(_, y) => Some(y),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Identity => write!(f, "infinity"),
            Point::Affine(x, y) => write!(f, "({}, {})", x, y),
        }
    }
}

/// `y² = x³ + Ax + B` with integer A, B and cached discriminant
/// Δ = −16(4A³ + 27B²).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    a: BigInt,
    b: BigInt,
    discriminant: BigInt,
}

impl Curve {
    /// Rejects singular input (4A³ + 27B² = 0).
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Result<Curve, CurveError> {
        let a = a.into();
        let b = b.into();
        let core = BigInt::from(4) * a.pow(3) + BigInt::from(27) * b.pow(2);
        if core.is_zero() {
            return Err(CurveError::SingularCurve);
        }
        let discriminant = BigInt::from(-16) * core;
        Ok(Curve { a, b, discriminant })
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    /// Checked point constructor; the membership gate for affine input.
    pub fn point(&self, x: Rational, y: Rational) -> Result<Point, CurveError> {
        let p = Point::Affine(x, y);
        if self.contains(&p) {
            Ok(p)
        } else {
            Err(CurveError::PointNotOnCurve)
        }
    }

    /// Right-hand side x³ + Ax + B as an exact rational.
    fn rhs(&self, x: &Rational) -> Rational {
        let a = Rational::from_integer(self.a.clone());
        let b = Rational::from_integer(self.b.clone());
        x * x * x + a * x + b
    }

    /// True iff `p` is the identity or satisfies the curve equation exactly.
    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Identity => true,
            Point::Affine(x, y) => y * y == self.rhs(x),
        }
    }

    fn require_on_curve(&self, p: &Point) -> Result<(), CurveError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(CurveError::PointNotOnCurve)
        }
    }

    /// Chord–tangent addition.
    pub fn add(&self, p: &Point, q: &Point) -> Result<Point, CurveError> {
        self.require_on_curve(p)?;
        self.require_on_curve(q)?;
        Ok(self.add_unchecked(p, q))
    }

    /// Group law without the membership gate; used internally where the
    /// operands are already known to lie on the curve.
    pub(crate) fn add_unchecked(&self, p: &Point, q: &Point) -> Point {
        let (x1, y1) = match p {
            Point::Identity => return q.clone(),
            Point::Affine(x, y) => (x, y),
        };
        let (x2, y2) = match q {
            Point::Identity => return p.clone(),
            Point::Affine(x, y) => (x, y),
        };

        let slope = if x1 == x2 {
            if *y1 == -y2 {
                // Vertical chord (includes the y = 0 tangent case).
                return Point::Identity;
            }
            // Tangent: λ = (3x² + A) / (2y).
            let three_x2 = Rational::from_integer(3.into()) * x1 * x1;
            let a = Rational::from_integer(self.a.clone());
            (three_x2 + a) / (Rational::from_integer(2.into()) * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };

        let x3 = &slope * &slope - x1 - x2;
        let y3 = slope * (x1 - &x3) - y1;
        Point::Affine(x3, y3)
    }

    /// (x, y) ↦ (x, −y); identity maps to itself.
    pub fn negate(&self, p: &Point) -> Result<Point, CurveError> {
        self.require_on_curve(p)?;
        Ok(match p {
            Point::Identity => Point::Identity,
            Point::Affine(x, y) => Point::Affine(x.clone(), -y),
        })
    }

    /// 2P. Identity and 2-torsion (y = 0) double to the identity.
    pub fn double(&self, p: &Point) -> Result<Point, CurveError> {
        self.require_on_curve(p)?;
        Ok(self.add_unchecked(p, p))
    }

    /// nP by left-to-right double-and-add; 0·P is the identity and
    /// (−n)P = −(nP).
    pub fn scalar_mul(&self, n: i64, p: &Point) -> Result<Point, CurveError> {
        self.require_on_curve(p)?;
        if n == 0 {
            return Ok(Point::Identity);
        }
        let negated;
        let base = if n < 0 {
            negated = match p {
                Point::Identity => Point::Identity,
                Point::Affine(x, y) => Point::Affine(x.clone(), -y),
            };
            &negated
        } else {
            p
        };
        let mag = n.unsigned_abs();
        let mut acc = Point::Identity;
        for i in (0..u64::BITS - mag.leading_zeros()).rev() {
            acc = self.add_unchecked(&acc, &acc);
            if (mag >> i) & 1 == 1 {
                acc = self.add_unchecked(&acc, base);
            }
        }
        Ok(acc)
    }

    /// x-coordinate of 2P as a function of x(P) alone:
    /// `(x⁴ − 2Ax² − 8Bx + A²) / (4(x³ + Ax + B))`.
    ///
    /// Valid for either sign of y; errors where the denominator vanishes
    /// (x is a 2-torsion abscissa).
    pub fn x_of_double(&self, x: &Rational) -> Result<Rational, CurveError> {
        let denom = Rational::from_integer(4.into()) * self.rhs(x);
        if denom.is_zero() {
            return Err(CurveError::TwoTorsionX);
        }
        let a = Rational::from_integer(self.a.clone());
        let b = Rational::from_integer(self.b.clone());
        let x2 = x * x;
        let numer = &x2 * &x2
            - Rational::from_integer(2.into()) * &a * &x2
            - Rational::from_integer(8.into()) * b * x
            + &a * &a;
        Ok(numer / denom)
    }

    /// Reduction of the coefficients mod an odd prime, as least residues.
    pub(crate) fn coefficients_mod(&self, p: u64) -> (u64, u64) {
        let m = BigInt::from(p);
        let reduce = |v: &BigInt| -> u64 {
            let mut r = v % &m;
            if r.is_negative() {
                r += &m;
            }
            u64::try_from(r).expect("residue fits u64")
        };
        (reduce(&self.a), reduce(&self.b))
    }
}

/// Convenience for enumerating small integral points in tests and the
/// Lutz–Nagell search: all points with the given integer coordinates that lie
/// on the curve.
pub(crate) fn integral_point(c: &Curve, x: &BigInt, y: &BigInt) -> Option<Vec<Point>> {
    let px = Rational::from_integer(x.clone());
    let py = Rational::from_integer(y.clone());
    let p = Point::Affine(px, py);
    if !c.contains(&p) {
        return None;
    }
    let mut out = Vec::new();
    if y.is_zero() {
        out.push(p);
    } else {
        let neg = Point::Affine(
            Rational::from_integer(x.clone()),
            Rational::from_integer(-y.clone()),
        );
        out.push(p);
        out.push(neg);
    }
    Some(out)
}
