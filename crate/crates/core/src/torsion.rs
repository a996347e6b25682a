//! Torsion subgroup determination for integral short Weierstrass curves.
//!
//! The torsion order is first bounded by the gcd of point counts of the
//! reductions modulo a window of odd primes of good reduction (torsion
//! injects into each such reduction). When the bound is already 1 the group
//! is trivial and no factoring is needed. Otherwise Lutz–Nagell candidates
//! are enumerated — integer points with y = 0 or y² | Δ — and each is
//! confirmed or discarded by checking nP = 𝒪 for some n ≤ 12 (Mazur's bound
//! caps the loop; order 11 cannot occur).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::curve::{integral_point, Curve, Point};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TorsionError {
    /// p divides the discriminant: the reduction is singular.
    BadReduction { p: u64 },
    /// p = 2 is never valid for the injection bound.
    EvenPrime,
}

impl fmt::Display for TorsionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorsionError::BadReduction { p } => write!(f, "bad reduction at p = {p}"),
            TorsionError::EvenPrime => write!(f, "p = 2 is not admitted for point counting"),
        }
    }
}

/// How the torsion subgroup was pinned down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorsionMethod {
    /// The gcd of reduction point counts was already 1.
    GcdBound,
    /// Lutz–Nagell enumeration alone (no usable reduction primes).
    LutzNagell,
    /// gcd bound narrowed the order, Lutz–Nagell confirmed the group.
    Combined,
}

impl TorsionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TorsionMethod::GcdBound => "gcd-bound",
            TorsionMethod::LutzNagell => "lutz-nagell",
            TorsionMethod::Combined => "combined",
        }
    }
}

/// The exact torsion subgroup: its order, its points (identity included),
/// and the method that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsionResult {
    pub order: usize,
    pub points: Vec<Point>,
    pub method: TorsionMethod,
}

impl TorsionResult {
    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }
}

/// Prime window used for the reduction bound.
#[derive(Debug, Clone, Copy)]
pub struct TorsionConfig {
    /// How many odd primes of good reduction to use.
    pub prime_window: usize,
    /// Upper limit of the prime search.
    pub prime_limit: u64,
}

impl Default for TorsionConfig {
    fn default() -> Self {
        TorsionConfig {
            prime_window: 5,
            prime_limit: 200,
        }
    }
}

/// All rational 2-torsion points (n, 0): n ranges over the integer roots of
/// x³ + Ax + B.
pub fn two_torsion(c: &Curve) -> Vec<Point> {
    integer_cubic_roots(c.a(), c.b())
        .into_iter()
        .map(|root| Point::Affine(root.into(), crate::rational::Rational::zero()))
        .collect()
}

/// #Ē(F_p) = 1 + Σ_x (1 + χ(x³ + Ax + B)) for an odd prime p of good
/// reduction, by direct loop with the quadratic character χ (χ(0) = 0).
pub fn count_points_mod_p(c: &Curve, p: u64) -> Result<u64, TorsionError> {
    if p == 2 {
        return Err(TorsionError::EvenPrime);
    }
    debug_assert!(is_prime_u64(p), "p must be an odd prime");
    if (c.discriminant() % BigInt::from(p)).is_zero() {
        return Err(TorsionError::BadReduction { p });
    }
    let (a, b) = c.coefficients_mod(p);
    let mut count: u64 = 1 + p; // identity plus one slot per abscissa
    for x in 0..p {
        let fx = cubic_mod(x, a, b, p);
        match legendre(fx, p) {
            1 => count += 1,
            -1 => count -= 1,
            _ => {}
        }
    }
    Ok(count)
}

/// gcd of reduction point counts over the given primes; the torsion order
/// divides the result.
pub fn torsion_order_bound(c: &Curve, primes: &[u64]) -> Result<u64, TorsionError> {
    let mut bound = 0u64;
    for &p in primes {
        bound = bound.gcd(&count_points_mod_p(c, p)?);
    }
    Ok(bound)
}

/// First `count` odd primes below `limit` at which the curve has good
/// reduction.
pub fn good_reduction_primes(c: &Curve, count: usize, limit: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = 3u64;
    while p < limit && out.len() < count {
        if is_prime_u64(p) && !(c.discriminant() % BigInt::from(p)).is_zero() {
            out.push(p);
        }
        p += 2;
    }
    out
}

pub fn torsion_subgroup(c: &Curve) -> TorsionResult {
    torsion_subgroup_with(c, &TorsionConfig::default())
}

pub fn torsion_subgroup_with(c: &Curve, cfg: &TorsionConfig) -> TorsionResult {
    let primes = good_reduction_primes(c, cfg.prime_window, cfg.prime_limit);
    let bound = torsion_order_bound(c, &primes).expect("primes were screened for good reduction");

    if !primes.is_empty() && bound == 1 {
        return TorsionResult {
            order: 1,
            points: vec![Point::Identity],
            method: TorsionMethod::GcdBound,
        };
    }

    let mut points = lutz_nagell_points(c);
    sort_points(&mut points);
    let order = points.len();
    assert!(order <= 12 && order != 11, "Mazur bound violated: {order}");

    TorsionResult {
        order,
        points,
        method: if primes.is_empty() {
            TorsionMethod::LutzNagell
        } else {
            TorsionMethod::Combined
        },
    }
}

/// The four conditions of the square family's torsion theorem:
/// gcd(a, b) = 1, b odd, 3 | b, 4 ∤ a.
pub fn theorem1_hypotheses(a: &BigUint, b: &BigUint) -> bool {
    if a.is_zero() || b.is_zero() {
        return false;
    }
    a.gcd(b).is_one()
        && b.is_odd()
        && (b % BigUint::from(3u32)).is_zero()
        && !(a % BigUint::from(4u32)).is_zero()
}

/// Full torsion group by Lutz–Nagell: integral candidates with y = 0 or
/// y² | Δ, confirmed by an order check (nP = 𝒪 for some n ≤ 12). Every
/// rational torsion point is of this shape, so the confirmed set is the
/// whole group.
fn lutz_nagell_points(c: &Curve) -> Vec<Point> {
    let mut points = vec![Point::Identity];

    for p in two_torsion(c) {
        if !points.contains(&p) {
            points.push(p);
        }
    }

    // Candidate |y| values: divisors of the square part of |Δ|.
    let disc_abs = c.discriminant().magnitude().clone();
    let square_part = factorize(disc_abs)
        .into_iter()
        .map(|(prime, exp)| prime.pow(exp / 2))
        .fold(BigUint::one(), |acc, f| acc * f);

    for y in divisors(&square_part) {
        if y.is_zero() {
            continue;
        }
        let y_int = BigInt::from(y);
        // x³ + Ax + (B − y²) = 0
        let shifted_b = c.b() - &y_int * &y_int;
        for x in integer_cubic_roots(c.a(), &shifted_b) {
            let Some(candidates) = integral_point(c, &x, &y_int) else {
                continue;
            };
            for cand in candidates {
                if points.contains(&cand) {
                    continue;
                }
                if has_small_order(c, &cand) {
                    points.push(cand);
                }
            }
        }
    }

    points
}

/// nP = 𝒪 for some n ≤ 12 (Mazur's cap; 11 cannot occur).
fn has_small_order(c: &Curve, p: &Point) -> bool {
    let mut acc = p.clone();
    for _ in 1..=12 {
        if acc.is_identity() {
            return true;
        }
        acc = c.add_unchecked(&acc, p);
    }
    false
}

/// Identity first, then affine points ordered by (x, y).
fn sort_points(points: &mut [Point]) {
    points.sort_by(|p, q| match (p, q) {
        (Point::Identity, Point::Identity) => core::cmp::Ordering::Equal,
        (Point::Identity, _) => core::cmp::Ordering::Less,
        (_, Point::Identity) => core::cmp::Ordering::Greater,
        (Point::Affine(x1, y1), Point::Affine(x2, y2)) => x1.cmp(x2).then_with(|| y1.cmp(y2)),
    });
}

/// All integer roots of the monic cubic x³ + px + q, found by exact
/// bisection on the (at most three) monotone integer ranges. No factoring
/// and no floating point.
fn integer_cubic_roots(p: &BigInt, q: &BigInt) -> Vec<BigInt> {
    let eval = |x: &BigInt| x.pow(3) + p * x + q;
    // Cauchy bound: every real root has |x| ≤ 1 + max(|p|, |q|).
    let bound = BigInt::one() + p.abs().max(q.abs());
    let mut roots: Vec<BigInt> = Vec::new();

    let mut search = |lo: BigInt, hi: BigInt, increasing: bool| {
        if let Some(root) = bisect_monotone(&eval, lo, hi, increasing) {
            if !roots.contains(&root) {
                roots.push(root);
            }
        }
    };

    if p.is_negative() {
        // Critical points at ±√(−p/3); s = ⌊√⌊−p/3⌋⌋ never overshoots them,
        // so the three integer ranges below are each monotone.
        let s = ((-p) / BigInt::from(3)).sqrt();
        search(-&bound, -&s - 1, true);
        search(-&s, s.clone(), false);
        search(&s + 1, bound.clone(), true);
    } else {
        search(-&bound, bound.clone(), true);
    }

    roots.sort();
    roots
}

/// Integer zero of a function monotone on [lo, hi], if one exists.
fn bisect_monotone(
    eval: &dyn Fn(&BigInt) -> BigInt,
    mut lo: BigInt,
    mut hi: BigInt,
    increasing: bool,
) -> Option<BigInt> {
    if lo > hi {
        return None;
    }
    let sign_at = |x: &BigInt| {
        let v = eval(x);
        if increasing {
            v
        } else {
            -v
        }
    };
    if sign_at(&lo).is_positive() || sign_at(&hi).is_negative() {
        return None;
    }
    while lo <= hi {
        let mid = (&lo + &hi).div_floor(&BigInt::from(2));
        let v = sign_at(&mid);
        if v.is_zero() {
            return Some(mid);
        } else if v.is_negative() {
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    None
}

fn cubic_mod(x: u64, a: u64, b: u64, p: u64) -> u64 {
    let x = x as u128;
    let t = (x * x % p as u128) * x % p as u128;
    let t = (t + a as u128 * x) % p as u128;
    ((t + b as u128) % p as u128) as u64
}

/// Quadratic character of t mod an odd prime p via Euler's criterion.
fn legendre(t: u64, p: u64) -> i8 {
    if t.is_multiple_of(p) {
        return 0;
    }
    if pow_mod(t, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut result: u128 = 1;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result as u64
}

/// Deterministic Miller–Rabin for u64.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller–Rabin with the deterministic u64 witness set (probabilistic, but
/// overwhelmingly reliable, above 64 bits).
fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if n.is_even() {
        return false;
    }
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division below 10⁶, then Pollard rho on any
/// remaining cofactor. Returns (prime, exponent) pairs, ascending.
fn factorize(mut n: BigUint) -> Vec<(BigUint, u32)> {
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    if n <= BigUint::one() {
        return factors;
    }

    let push = |p: BigUint, factors: &mut Vec<(BigUint, u32)>| {
        if let Some(last) = factors.iter_mut().find(|(q, _)| *q == p) {
            last.1 += 1;
        } else {
            factors.push((p, 1));
        }
    };

    let mut d = 2u64;
    while d < 1_000_000 {
        let big_d = BigUint::from(d);
        if &big_d * &big_d > n {
            break;
        }
        while (&n % &big_d).is_zero() {
            n /= &big_d;
            push(big_d.clone(), &mut factors);
        }
        d = if d == 2 { 3 } else { d + 2 };
    }

    if n > BigUint::one() {
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            if is_probable_prime(&m) {
                push(m, &mut factors);
            } else {
                let f = pollard_rho(&m);
                stack.push(&m / &f);
                stack.push(f);
            }
        }
    }

    factors.sort();
    factors
}

/// Pollard rho with Brent cycle detection and deterministic restarts.
fn pollard_rho(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    if n.is_even() {
        return BigUint::from(2u32);
    }
    for c in 1u64..64 {
        let c = BigUint::from(c);
        let step = |x: &BigUint| (x * x + &c) % n;
        let mut x = BigUint::from(2u32);
        let mut y = x.clone();
        let mut d = one.clone();
        while d.is_one() {
            x = step(&x);
            y = step(&step(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break; // cycle without factor; retry with the next c
            }
            d = diff.gcd(n);
        }
        if !d.is_one() && &d != n {
            return d;
        }
    }
    unreachable!("pollard rho exhausted restarts on composite input")
}

/// All divisors of n (ascending).
fn divisors(n: &BigUint) -> Vec<BigUint> {
    let mut out = vec![BigUint::one()];
    for (prime, exp) in factorize(n.clone()) {
        let mut extended = Vec::with_capacity(out.len() * (exp as usize + 1));
        for d in &out {
            let mut power = BigUint::one();
            for _ in 0..=exp {
                extended.push(d * &power);
                power *= &prime;
            }
        }
        out = extended;
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn ri(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    fn curve_e_26_15() -> Curve {
        Curve::new(-676, 225).unwrap()
    }

    #[test]
    fn cubic_roots_exact() {
        // x³ − x: roots −1, 0, 1
        let roots = integer_cubic_roots(&BigInt::from(-1), &BigInt::zero());
        assert_eq!(roots, vec![BigInt::from(-1), BigInt::zero(), BigInt::one()]);
        // x³ + 1: root −1
        let roots = integer_cubic_roots(&BigInt::zero(), &BigInt::one());
        assert_eq!(roots, vec![BigInt::from(-1)]);
        // x³ − 3x + 2 = (x − 1)²(x + 2)
        let roots = integer_cubic_roots(&BigInt::from(-3), &BigInt::from(2));
        assert_eq!(roots, vec![BigInt::from(-2), BigInt::one()]);
        // x³ + x + 1 has no integer root
        assert!(integer_cubic_roots(&BigInt::one(), &BigInt::one()).is_empty());
    }

    #[test]
    fn two_torsion_examples() {
        let c = Curve::new(-1, 0).unwrap();
        let pts = two_torsion(&c);
        assert_eq!(pts.len(), 3);
        for p in &pts {
            assert!(c.contains(p));
            assert!(p.y().unwrap().is_zero());
        }

        assert!(two_torsion(&curve_e_26_15()).is_empty());

        let c = Curve::new(0, 1).unwrap();
        let pts = two_torsion(&c);
        assert_eq!(pts, vec![Point::Affine(ri(-1), ri(0))]);
    }

    #[test]
    fn point_counts() {
        // y² = x³ − x over F₅ has 8 points (brute-force oracle below).
        let c = Curve::new(-1, 0).unwrap();
        assert_eq!(count_points_mod_p(&c, 5).unwrap(), 8);
        assert_eq!(count_points_mod_p(&c, 5).unwrap(), brute_force_count(&c, 5));

        // E_{26,15} mod 3 reduces to y² = x³ − x with exactly 4 points.
        let c = curve_e_26_15();
        assert!(!(c.discriminant() % BigInt::from(3)).is_zero());
        assert_eq!(count_points_mod_p(&c, 3).unwrap(), 4);

        assert_eq!(count_points_mod_p(&c, 2), Err(TorsionError::EvenPrime));
        // Δ(E_{26,15}) = 2⁴ · 1234296229, so reduction at any prime divisor
        // of the odd part is bad; p = 19 divides it (19 · 64963 = 1234297).
        let disc = c.discriminant().magnitude().clone();
        let bad = factorize(disc)
            .into_iter()
            .map(|(p, _)| p)
            .find(|p| p.is_odd())
            .and_then(|p| p.to_u64());
        if let Some(p) = bad {
            if is_prime_u64(p) {
                assert_eq!(
                    count_points_mod_p(&c, p),
                    Err(TorsionError::BadReduction { p })
                );
            }
        }
    }

    fn brute_force_count(c: &Curve, p: u64) -> u64 {
        let (a, b) = c.coefficients_mod(p);
        let mut count = 1;
        for x in 0..p {
            for y in 0..p {
                if (y * y) % p == cubic_mod(x, a, b, p) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn order_bound_gcd() {
        let c = curve_e_26_15();
        // Single prime: the bound is that count alone.
        assert_eq!(torsion_order_bound(&c, &[3]).unwrap(), 4);
        let primes = good_reduction_primes(&c, 5, 200);
        assert_eq!(primes.len(), 5);
        assert_eq!(torsion_order_bound(&c, &primes).unwrap(), 1);
    }

    #[test]
    fn hasse_window() {
        for (a, b) in [(-1i64, 0i64), (0, 1), (-676, 225), (-1, 64)] {
            let c = Curve::new(a, b).unwrap();
            for p in good_reduction_primes(&c, 6, 60) {
                let n = count_points_mod_p(&c, p).unwrap() as f64;
                let center = (p + 1) as f64;
                let radius = 2.0 * (p as f64).sqrt();
                assert!((n - center).abs() <= radius, "Hasse violated at p={p}: {n}");
            }
        }
    }

    #[test]
    fn torsion_of_paper_curve_is_trivial() {
        let r = torsion_subgroup(&curve_e_26_15());
        assert_eq!(r.order, 1);
        assert_eq!(r.points, vec![Point::Identity]);
        assert_eq!(r.method, TorsionMethod::GcdBound);
    }

    #[test]
    fn full_two_torsion_group() {
        let c = Curve::new(-1, 0).unwrap();
        let r = torsion_subgroup(&c);
        assert_eq!(r.order, 4);
        assert_eq!(r.points.len(), 4);
        assert!(r.points.contains(&Point::Identity));
        for p in &r.points {
            assert_eq!(c.scalar_mul(r.order as i64, p).unwrap(), Point::Identity);
        }
    }

    #[test]
    fn six_torsion_group_found() {
        // y² = x³ + 1 has torsion ℤ/6: (−1,0), (0,±1), (2,±3), 𝒪.
        let c = Curve::new(0, 1).unwrap();
        let r = torsion_subgroup(&c);
        assert_eq!(r.order, 6);
        assert!(r.points.contains(&Point::Affine(ri(2), ri(3))));
        assert!(r.points.contains(&Point::Affine(ri(0), ri(-1))));
        for p in &r.points {
            assert_eq!(c.scalar_mul(6, p).unwrap(), Point::Identity);
        }
    }

    #[test]
    fn hypotheses_checker() {
        let check = |a: u64, b: u64| theorem1_hypotheses(&BigUint::from(a), &BigUint::from(b));
        assert!(check(26, 15));
        assert!(!check(4, 3)); // 4 | a
        assert!(check(2, 9));
        assert!(!check(2, 6)); // b even
        assert!(!check(3, 9)); // gcd 3
        assert!(!check(2, 5)); // 3 ∤ b
    }

    #[test]
    fn factorization_roundtrip() {
        let n = BigUint::from(2u32).pow(4) * BigUint::from(19748739664u64 / 16);
        let factors = factorize(n.clone());
        let product = factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
        assert_eq!(product, n);
        for (p, _) in &factors {
            assert!(is_probable_prime(p));
        }
    }

    #[test]
    fn divisor_enumeration() {
        let ds = divisors(&BigUint::from(12u32));
        let expected: Vec<BigUint> = [1u32, 2, 3, 4, 6, 12]
            .iter()
            .map(|&n| BigUint::from(n))
            .collect();
        assert_eq!(ds, expected);
    }
}
