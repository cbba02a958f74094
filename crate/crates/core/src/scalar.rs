//! Exact rational scalars.
//!
//! Every probability, cost, reward, payoff and bias parameter is a
//! [`Scalar`]: an arbitrary-precision rational kept in canonical form
//! (reduced, positive denominator). Floating point only appears when a value
//! is rendered for display.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Integer;
use thiserror::Error;

pub type Scalar = BigRational;

/// Significant digits used by [`to_decimal`].
pub const DISPLAY_DIGITS: i32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {text:?}: {reason}")]
pub struct ParseScalarError {
    pub text: String,
    pub reason: &'static str,
}

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

/// `num / den`, reduced. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Scalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"-0.25"`.
/// Decimals are converted exactly.
pub fn parse(text: &str) -> Result<Scalar, ParseScalarError> {
    let err = |reason| ParseScalarError {
        text: text.to_string(),
        reason,
    };
    let t = text.trim();
    if t.is_empty() {
        return Err(err("empty"));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let (negative, whole) = match whole.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, whole.strip_prefix('+').unwrap_or(whole)),
        };
        if frac.is_empty() && whole.is_empty() {
            return Err(err("no digits"));
        }
        if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err("bad decimal"));
        }
        let digits = format!("{whole}{frac}");
        let numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| err("bad decimal"))?
        };
        let denom = num::pow(BigInt::from(10u32), frac.len());
        let value = BigRational::new(numer, denom);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = t.parse().map_err(|_| err("bad integer"))?;
    Ok(BigRational::from_integer(n))
}

pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Display-only decimal rendering at [`DISPLAY_DIGITS`] significant digits.
pub fn to_decimal(x: &Scalar) -> String {
    let v = to_f64(x);
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-6..=15).contains(&exp) {
        let decimals = (DISPLAY_DIGITS - 1 - exp).max(0) as usize;
        let mut s = format!("{v:.decimals$}");
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    } else {
        format!("{:.*e}", (DISPLAY_DIGITS - 1) as usize, v)
    }
}

/// `base^exp` for a non-negative exponent.
pub fn pow(base: &Scalar, exp: u32) -> Scalar {
    let mut acc = Scalar::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

pub fn abs(x: &Scalar) -> Scalar {
    x.abs()
}

/// Rational enclosure `(lo, hi)` of `√x` with `lo ≤ √x ≤ hi` and
/// `hi − lo ≤ tol`. Newton iteration from above; `x/hi` is the matching lower
/// bound.
pub fn sqrt_bounds(x: &Scalar, tol: &Scalar) -> (Scalar, Scalar) {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    assert!(tol.is_positive(), "tolerance must be positive");
    if x.is_zero() {
        return (zero(), zero());
    }
    let two = int(2);
    let mut hi = if x > &one() { x.clone() } else { one() };
    loop {
        let lo = x / &hi;
        if &hi - &lo <= *tol {
            return (lo, hi);
        }
        hi = (&hi + &lo) / &two;
        // Keep denominators bounded: round hi up onto a dyadic grid well
        // below the tolerance. Rounding up preserves hi ≥ √x.
        hi = round_up_dyadic(&hi, tol);
    }
}

/// Smallest multiple of `2^-k` that is `≥ x`, where `2^-k ≤ tol / 16`.
fn round_up_dyadic(x: &Scalar, tol: &Scalar) -> Scalar {
    let mut denom = BigInt::one();
    let target = tol / int(16);
    while BigRational::new(BigInt::one(), denom.clone()) > target {
        denom <<= 1;
    }
    let scaled = x * BigRational::from_integer(denom.clone());
    let ceil = scaled.ceil().to_integer();
    BigRational::new(ceil, denom)
}

/// Approximation of `√x` within `tol`, rounded onto a dyadic grid.
pub fn sqrt_approx(x: &Scalar, tol: &Scalar) -> Scalar {
    let (lo, hi) = sqrt_bounds(x, &(tol / int(2)));
    let mid = (lo + hi) / int(2);
    round_nearest_dyadic(&mid, &(tol / int(2)))
}

fn round_nearest_dyadic(x: &Scalar, tol: &Scalar) -> Scalar {
    let mut denom = BigInt::one();
    while BigRational::new(BigInt::one(), denom.clone()) > *tol {
        denom <<= 1;
    }
    let scaled = x * BigRational::from_integer(denom.clone());
    BigRational::new(scaled.round().to_integer(), denom)
}

/// Whether the value is an integer, returning it if so.
pub fn as_integer(x: &Scalar) -> Option<BigInt> {
    if x.denom().is_one() {
        Some(x.numer().clone())
    } else {
        None
    }
}

pub fn is_integer(x: &Scalar) -> bool {
    x.denom().is_one()
}

/// `a/b` and `c/d` summed by cross-multiplication, reduced by gcd. Kept as a
/// free-standing check on the library arithmetic.
pub fn cross_sum(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> (BigInt, BigInt) {
    let num = a * d + c * b;
    let den = b * d;
    let g = num.gcd(&den);
    let (mut n, mut d) = (num / &g, den / &g);
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    (n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_exactly() {
        assert_eq!(parse("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse("2/4").unwrap().to_string(), "1/2");
        assert_eq!(parse("-7").unwrap(), int(-7));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse(" 3 / 6 ").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("").is_err());
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("1.2.3").is_err());
        assert!(parse("0x10").is_err());
    }

    #[test]
    fn canonical_display() {
        assert_eq!(ratio(4, -8).to_string(), "-1/2");
        assert_eq!(ratio(6, 3).to_string(), "2");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(1, 3)), "0.333333333333");
        assert_eq!(to_decimal(&int(10)), "10");
        assert_eq!(to_decimal(&zero()), "0");
        assert_eq!(to_decimal(&ratio(-5, 27)), "-0.185185185185");
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let b = ratio(2, 3);
        let mut acc = one();
        for e in 0..12 {
            assert_eq!(pow(&b, e), acc);
            acc *= &b;
        }
    }

    #[test]
    fn sqrt_enclosure() {
        let tol = ratio(1, 1_000_000_000_000);
        for x in [ratio(2, 1), ratio(5, 4), ratio(11, 1), ratio(1, 9)] {
            let (lo, hi) = sqrt_bounds(&x, &tol);
            assert!(&lo * &lo <= x);
            assert!(&hi * &hi >= x);
            assert!(&hi - &lo <= tol);
        }
        let r = sqrt_approx(&int(2), &tol);
        assert!((to_f64(&r) - std::f64::consts::SQRT_2).abs() < 1e-12);
        let (lo, hi) = sqrt_bounds(&int(4), &tol);
        assert!(lo <= int(2) && hi >= int(2));
    }

    #[test]
    fn cross_multiplication_agrees_with_library() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a: i64 = rng.gen_range(-1000..1000);
            let b: i64 = rng.gen_range(1..1000);
            let c: i64 = rng.gen_range(-1000..1000);
            let d: i64 = rng.gen_range(-1000..1000);
            let d = if d == 0 { 1 } else { d };
            let (n, m) = cross_sum(&a.into(), &b.into(), &c.into(), &d.into());
            let lib = ratio(a, b) + ratio(c, d);
            assert_eq!(lib.numer(), &n);
            assert_eq!(lib.denom(), &m);
        }
    }
}
