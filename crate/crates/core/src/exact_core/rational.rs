use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always stored in lowest terms.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d`; panics on a zero denominator.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(n: u64) -> Rational {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    Rational::from_integer(acc)
}

pub fn binomial(n: i64, k: i64) -> Rational {
    if k < 0 || (n >= 0 && k > n) {
        return Rational::zero();
    }
    let mut acc = Rational::one();
    for j in 0..k {
        acc = acc * int(n - j) / int(j + 1);
    }
    acc
}

/// Renders `p/q`, or `p` when the denominator is one.
pub fn fmt_rat(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q` or `p`.
pub fn parse_rat(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse { line: 0, msg: format!("bad rational '{s}'") };
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse() {
        assert_eq!(fmt_rat(&rat(6, 4)), "3/2");
        assert_eq!(fmt_rat(&rat(-4, 2)), "-2");
        assert_eq!(fmt_rat(&int(0)), "0");
        assert_eq!(parse_rat("-10/4").unwrap(), rat(-5, 2));
        assert_eq!(parse_rat(" 7 ").unwrap(), int(7));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn lowest_terms() {
        let x = rat(10, -4);
        assert_eq!(x.numer(), &BigInt::from(-5));
        assert_eq!(x.denom(), &BigInt::from(2));
    }

    #[test]
    fn combinatorics() {
        assert_eq!(factorial(5), int(120));
        assert_eq!(binomial(6, 2), int(15));
        assert_eq!(binomial(3, 5), int(0));
        assert_eq!(binomial(-1, 2), int(1));
    }
}
