use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::rational::{fmt_rat, Rational};

/// Finite Laurent polynomial in ħ with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HbarLaurent {
    terms: BTreeMap<i32, Rational>,
}

impl HbarLaurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(exp: i32, c: Rational) -> Self {
        let mut out = Self::zero();
        out.add_term(exp, c);
        out
    }

    pub fn add_term(&mut self, exp: i32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(exp).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn coeff(&self, exp: i32) -> Rational {
        self.terms.get(&exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, v * c);
        }
        out
    }
}

impl Add for &HbarLaurent {
    type Output = HbarLaurent;
    fn add(self, rhs: &HbarLaurent) -> HbarLaurent {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &HbarLaurent {
    type Output = HbarLaurent;
    fn sub(self, rhs: &HbarLaurent) -> HbarLaurent {
        self + &(-rhs)
    }
}

impl Neg for &HbarLaurent {
    type Output = HbarLaurent;
    fn neg(self) -> HbarLaurent {
        let mut out = HbarLaurent::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul for &HbarLaurent {
    type Output = HbarLaurent;
    fn mul(self, rhs: &HbarLaurent) -> HbarLaurent {
        let mut out = HbarLaurent::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for HbarLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| match e {
                0 => fmt_rat(c),
                _ => format!("{} * hbar^{}", fmt_rat(c), e),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_core::{int, rat};

    #[test]
    fn laurent_arithmetic() {
        let a = &HbarLaurent::monomial(-1, rat(1, 2)) + &HbarLaurent::constant(int(3));
        let b = HbarLaurent::monomial(1, int(2));
        let p = &a * &b;
        assert_eq!(p.coeff(0), int(1));
        assert_eq!(p.coeff(1), int(6));
        assert!((&a - &a).is_zero());
        assert_eq!(format!("{}", HbarLaurent::monomial(-1, rat(1, 2))), "1/2 * hbar^-1");
    }
}
