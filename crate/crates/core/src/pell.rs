//! Solutions of the Pell equation a² − 3b² = 1, i.e. the powers of the
//! fundamental unit 2 + √3 of ℤ[√3], and the admissibility filter
//! (b odd, 3 | b, 4 ∤ a) under which the square family has trivial torsion.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

/// The n-th solution (aₙ, bₙ) of a² − 3b² = 1, 1-based with (a₁, b₁) = (2, 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PellPair {
    n: u64,
    a: BigUint,
    b: BigUint,
}

impl fmt::Display for PellPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, a={}, b={})", self.n, self.a, self.b)
    }
}

impl PellPair {
    /// Invariant gate: rejects any (a, b) with a² ≠ 3b² + 1.
    pub fn new(n: u64, a: BigUint, b: BigUint) -> Option<PellPair> {
        let lhs = &a * &a;
        let rhs = BigUint::from(3u32) * &b * &b + BigUint::one();
        if n >= 1 && lhs == rhs {
            Some(PellPair { n, a, b })
        } else {
            None
        }
    }

    pub fn index(&self) -> u64 {
        self.n
    }

    pub fn a(&self) -> &BigUint {
        &self.a
    }

    pub fn b(&self) -> &BigUint {
        &self.b
    }

    /// (a₁, b₁) = (2, 1).
    pub fn first() -> PellPair {
        PellPair {
            n: 1,
            a: BigUint::from(2u32),
            b: BigUint::one(),
        }
    }

    /// One step of the recurrence aₙ₊₁ = 2aₙ + 3bₙ, bₙ₊₁ = aₙ + 2bₙ.
    pub fn next_pair(&self) -> PellPair {
        PellPair {
            n: self.n + 1,
            a: BigUint::from(2u32) * &self.a + BigUint::from(3u32) * &self.b,
            b: &self.a + BigUint::from(2u32) * &self.b,
        }
    }

    /// The n-th pair by binary powering of the step matrix [[2,3],[1,2]]
    /// applied to (2, 1); agrees with `next_pair` iteration.
    pub fn nth(n: u64) -> PellPair {
        assert!(n >= 1, "Pell indices are 1-based");
        let m = mat_pow(n - 1);
        // (a, b)ᵀ = M^(n−1) · (2, 1)ᵀ
        let a = &m[0] * 2u32 + &m[1];
        let b = &m[2] * 2u32 + &m[3];
        PellPair { n, a, b }
    }

    /// b odd, 3 | b, and 4 ∤ a.
    pub fn admissible(&self) -> bool {
        let three = BigUint::from(3u32);
        let four = BigUint::from(4u32);
        self.b.is_odd() && (&self.b % three).is_zero() && !(&self.a % four).is_zero()
    }

    /// Infinite iterator over the full solution sequence, starting at n = 1.
    pub fn sequence() -> impl Iterator<Item = PellPair> {
        let mut next = Some(PellPair::first());
        core::iter::from_fn(move || {
            let current = next.take()?;
            next = Some(current.next_pair());
            Some(current)
        })
    }
}

/// First `count` admissible pairs in index order, by filtering the full
/// sequence. The index pattern n ≡ 3 (mod 6) is observed, not assumed.
pub fn admissible_stream(count: usize) -> Vec<PellPair> {
    PellPair::sequence()
        .filter(PellPair::admissible)
        .take(count)
        .collect()
}

/// [[2,3],[1,2]]^e, row-major.
fn mat_pow(e: u64) -> [BigUint; 4] {
    let mut result = [BigUint::one(), BigUint::ZERO, BigUint::ZERO, BigUint::one()];
    let mut base = [
        BigUint::from(2u32),
        BigUint::from(3u32),
        BigUint::one(),
        BigUint::from(2u32),
    ];
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    result
}

fn mat_mul(x: &[BigUint; 4], y: &[BigUint; 4]) -> [BigUint; 4] {
    [
        &x[0] * &y[0] + &x[1] * &y[2],
        &x[0] * &y[1] + &x[1] * &y[3],
        &x[2] * &y[0] + &x[3] * &y[2],
        &x[2] * &y[1] + &x[3] * &y[3],
    ]
}
