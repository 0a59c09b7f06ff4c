use num_traits::{One, Zero};

use super::rational::{int, rat, Rational};
use crate::error::{Error, Result};

/// Coefficients (in `s`, lowest first) of `(s+x)(s+x+1)...(s+x+k)`.
fn generating_coeffs(x: &Rational, k: i64) -> Vec<Rational> {
    let mut poly = vec![Rational::one()];
    for j in 0..=k {
        let c = x + int(j);
        let mut next = vec![Rational::zero(); poly.len() + 1];
        for (i, p) in poly.iter().enumerate() {
            next[i] += p * &c;
            next[i + 1] += p;
        }
        poly = next;
    }
    poly
}

/// `[x]^k_i`, the coefficient of `s^i` in `(s+x)(s+x+1)...(s+x+k)`.
pub fn bracket(x: &Rational, k: i64, i: i64) -> Result<Rational> {
    if k < -1 || i < 0 || i > k + 1 {
        return Err(Error::IndexOutOfRange(format!("bracket k={k} i={i}")));
    }
    Ok(generating_coeffs(x, k)[i as usize].clone())
}

/// `[x]^k_i` as a polynomial in `x` (coefficients lowest degree first).
pub fn bracket_poly(k: i64, i: i64) -> Result<Vec<Rational>> {
    if k < -1 || i < 0 || i > k + 1 {
        return Err(Error::IndexOutOfRange(format!("bracket k={k} i={i}")));
    }
    // Elementary symmetric polynomial e_{k+1-i}(x, x+1, ..., x+k), built by
    // tracking polynomials in x for each e_j.
    let n = (k + 1) as usize;
    let mut e: Vec<Vec<Rational>> = vec![vec![Rational::zero(); n + 1]; n + 1];
    e[0][0] = Rational::one();
    for j in 0..n {
        for deg in (1..=j + 1).rev() {
            let prev = e[deg - 1].clone();
            for (p, c) in prev.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                e[deg][p] += c * int(j as i64);
                if p < n {
                    e[deg][p + 1] += c;
                }
            }
        }
    }
    let mut out = e[n - i as usize].clone();
    while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    Ok(out)
}

/// `(m+1/2)(m+3/2)...(m+k+1/2)`; the empty product for `k = -1`.
pub fn half_product(m: i64, k: i64) -> Rational {
    let mut acc = Rational::one();
    for j in 0..=k {
        acc *= rat(2 * (m + j) + 1, 2);
    }
    acc
}

/// `(-1)^m half_product(m, k)`.
pub fn signed_gamma_ratio(m: i64, k: i64) -> Rational {
    let h = half_product(m, k);
    if m.rem_euclid(2) == 1 {
        -h
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(p: &[Rational], x: &Rational) -> Rational {
        p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    #[test]
    fn small_brackets() {
        let x = rat(3, 7);
        assert_eq!(bracket(&x, 0, 0).unwrap(), x.clone());
        assert_eq!(bracket(&x, 0, 1).unwrap(), int(1));
        assert_eq!(bracket(&x, 1, 1).unwrap(), int(2) * &x + int(1));
        assert_eq!(bracket(&x, 1, 0).unwrap(), &x * &x + &x);
        assert_eq!(bracket(&x, -1, 0).unwrap(), int(1));
        assert!(bracket(&x, 1, 3).is_err());
        assert!(bracket(&x, -2, 0).is_err());
    }

    #[test]
    fn polynomial_form_agrees() {
        assert_eq!(bracket_poly(1, 1).unwrap(), vec![int(1), int(2)]);
        assert_eq!(bracket_poly(1, 0).unwrap(), vec![int(0), int(1), int(1)]);
        for k in -1..=6 {
            for i in 0..=k + 1 {
                let p = bracket_poly(k, i).unwrap();
                for xv in [rat(-5, 2), int(0), rat(1, 3), int(4)] {
                    assert_eq!(eval(&p, &xv), bracket(&xv, k, i).unwrap(), "k={k} i={i}");
                }
            }
        }
    }

    #[test]
    fn half_products() {
        assert_eq!(half_product(0, 3), rat(105, 16));
        assert_eq!(half_product(-2, 3), rat(9, 16));
        assert_eq!(half_product(0, 0), rat(1, 2));
        assert_eq!(half_product(1, 3), rat(945, 16));
        assert_eq!(half_product(5, -1), int(1));
    }

    #[test]
    fn signed_ratios() {
        assert_eq!(signed_gamma_ratio(-3, 3), rat(15, 16));
        assert_eq!(signed_gamma_ratio(-2, 3), rat(9, 16));
        assert_eq!(signed_gamma_ratio(-1, 1), rat(1, 4));
    }
}
