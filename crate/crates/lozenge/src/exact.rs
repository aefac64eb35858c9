//! Exact rational arithmetic and q-analogues of factorials and binomials.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator.
pub type ExactRational = BigRational;

pub fn rat(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
        let den = BigInt::from(10).pow(frac.len() as u32);
        let r = BigRational::new(n, den);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// q^e for any integer exponent, by repeated squaring.
pub fn qpow(q: &ExactRational, e: i64) -> ExactRational {
    if e >= 0 {
        Pow::pow(q, e as u64)
    } else {
        Pow::pow(q.recip(), e.unsigned_abs())
    }
}

pub fn to_f64(r: &ExactRational) -> f64 {
    match r.to_f64() {
        Some(v) if v.is_finite() && (v != 0.0 || r.is_zero()) => v,
        _ => {
            let mag = ln(&r.abs()).exp();
            if r.is_negative() {
                -mag
            } else {
                mag
            }
        }
    }
}

/// Natural logarithm of a positive rational, accurate even when the value
/// overflows `f64`.
pub fn ln(r: &ExactRational) -> f64 {
    fn ln_big(x: &BigInt) -> f64 {
        let bits = x.bits();
        if bits <= 1000 {
            x.to_f64().unwrap().ln()
        } else {
            let shift = bits - 64;
            (x >> shift as usize).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
    ln_big(r.numer()) - ln_big(r.denom())
}

/// The q-factorial ∏_{i=1}^{a} (1 - q^i).
pub fn q_factorial(a: u64, q: &ExactRational) -> ExactRational {
    let mut acc = ExactRational::one();
    let mut p = ExactRational::one();
    for _ in 0..a {
        p *= q;
        acc *= ExactRational::one() - &p;
    }
    acc
}

pub fn binomial(a: i64, b: i64) -> BigInt {
    if a < 0 || b < 0 || b > a {
        return BigInt::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigInt::one();
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// Gaussian binomial. At q = 1 it is the ordinary binomial; at q = -1 the
/// limit of the polynomial is used.
pub fn q_binomial(a: i64, b: i64, q: &ExactRational) -> ExactRational {
    if a < 0 || b < 0 || b > a {
        return ExactRational::zero();
    }
    if q.is_one() {
        return BigRational::from_integer(binomial(a, b));
    }
    if *q == -ExactRational::one() {
        if a % 2 == 0 && b % 2 == 1 {
            return ExactRational::zero();
        }
        return BigRational::from_integer(binomial(a / 2, b / 2));
    }
    let b = b.min(a - b);
    let mut num = ExactRational::one();
    let mut den = ExactRational::one();
    for i in 1..=b {
        num *= ExactRational::one() - qpow(q, a - b + i);
        den *= ExactRational::one() - qpow(q, i);
    }
    num / den
}

/// Determinant of an integer matrix by Bareiss fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Determinant of a rational matrix: rows are cleared of denominators and the
/// integer matrix goes through Bareiss.
pub fn det(m: &[Vec<ExactRational>]) -> ExactRational {
    let mut scale = BigInt::one();
    let rows: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| num::integer::lcm(acc, x.denom().clone()));
            scale *= &l;
            row.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    BigRational::new(bareiss_det(rows), scale)
}

pub fn is_positive(r: &ExactRational) -> bool {
    r.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_factorial_values() {
        assert_eq!(q_factorial(0, &rat(7, 3)), int(1));
        assert_eq!(q_factorial(2, &int(2)), int(3));
        assert_eq!(q_factorial(3, &int(1)), int(0));
    }

    #[test]
    fn q_binomial_values() {
        assert_eq!(q_binomial(5, 0, &rat(2, 7)), int(1));
        assert_eq!(q_binomial(2, 1, &int(3)), int(4));
        assert_eq!(q_binomial(4, 2, &int(1)), int(6));
        assert_eq!(q_binomial(4, 5, &int(2)), int(0));
        assert_eq!(q_binomial(4, -1, &int(2)), int(0));
    }

    #[test]
    fn q_binomial_at_minus_one_is_polynomial_limit() {
        // [4 choose 2]_q = 1 + q + 2q^2 + q^3 + q^4
        assert_eq!(q_binomial(4, 2, &int(-1)), int(2));
        // [3 choose 1]_q = 1 + q + q^2
        assert_eq!(q_binomial(3, 1, &int(-1)), int(1));
        // [4 choose 1]_q = 1 + q + q^2 + q^3
        assert_eq!(q_binomial(4, 1, &int(-1)), int(0));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, -1), BigInt::zero());
        assert_eq!(binomial(2, 1) - binomial(2, 2), BigInt::one());
    }

    #[test]
    fn determinant_small() {
        let m = vec![vec![rat(1, 2), int(3)], vec![rat(2, 3), int(5)]];
        assert_eq!(det(&m), rat(1, 2));
        let z = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert_eq!(det(&z), int(-1));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("5/3").unwrap(), rat(5, 3));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn ln_of_huge_values() {
        let big = qpow(&int(2), 3000);
        assert!((ln(&big) - 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln(&big.recip()) + 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
