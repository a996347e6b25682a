//! Arbitrary-precision rationals in canonical reduced form.
//!
//! Point coordinates are `Rational` values: reduced fractions with a positive
//! denominator and the sign carried by the numerator. `num_rational::BigRational`
//! already maintains exactly that canonical form after every operation, so it
//! backs the type directly.

use alloc::format;
use alloc::string::String;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub use num_rational::BigRational as Rational;

/// Builds a reduced rational, rejecting a zero denominator.
pub fn rational(numerator: BigInt, denominator: BigInt) -> Option<Rational> {
    if denominator.is_zero() {
        None
    } else {
        Some(Rational::new(numerator, denominator))
    }
}

/// Rational from an integer.
pub fn from_integer(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Renders `p/q` with the sign on the numerator, e.g. `-3/4`, `26/1`.
pub fn render(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// True when the fraction is in canonical form: gcd(|p|, q) = 1 and q > 0.
pub fn is_canonical(x: &Rational) -> bool {
    if !x.denom().is_positive() {
        return false;
    }
    if x.numer().is_zero() {
        return x.denom().is_one();
    }
    num_integer::gcd(x.numer().abs(), x.denom().clone()).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn construction_reduces_and_normalizes_sign() {
        let x = rational(big(6), big(-4)).unwrap();
        assert_eq!(x.numer(), &big(-3));
        assert_eq!(x.denom(), &big(2));
        assert!(is_canonical(&x));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(rational(big(1), big(0)).is_none());
    }

    #[test]
    fn arithmetic_stays_canonical() {
        let a = rational(big(3), big(8)).unwrap();
        let b = rational(big(5), big(12)).unwrap();
        for v in [&a + &b, &a - &b, &a * &b, &a / &b] {
            assert!(is_canonical(&v));
        }
    }

    #[test]
    fn render_keeps_sign_on_numerator() {
        let x = rational(big(1), big(-256)).unwrap();
        assert_eq!(render(&x), "-1/256");
        assert_eq!(render(&from_integer(26)), "26/1");
    }
}
