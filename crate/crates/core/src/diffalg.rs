//! Differential polynomials in one jet variable `u` over `Q[hbar]`.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_core::{fmt_rat, int, rat, Rational};

/// Monomial `hbar^h * u^(j1) * u^(j2) * ...`, jets kept in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffMono {
    hbar: u32,
    jets: Vec<u32>,
}

impl DiffMono {
    pub fn new(hbar: u32, mut jets: Vec<u32>) -> Self {
        jets.sort_unstable_by(|a, b| b.cmp(a));
        Self { hbar, jets }
    }

    pub fn one() -> Self {
        Self { hbar: 0, jets: Vec::new() }
    }

    pub fn hbar(&self) -> u32 {
        self.hbar
    }

    /// Jet indices in descending order.
    pub fn jets(&self) -> &[u32] {
        &self.jets
    }

    pub fn degree(&self) -> usize {
        self.jets.len()
    }

    fn times(&self, other: &DiffMono) -> DiffMono {
        let mut jets = self.jets.clone();
        jets.extend_from_slice(&other.jets);
        DiffMono::new(self.hbar + other.hbar, jets)
    }
}

impl Ord for DiffMono {
    /// Graded order: total degree first, then jet indices (descending list)
    /// compared lexicographically with larger jets first, then ħ-power.
    fn cmp(&self, other: &Self) -> Ordering {
        self.jets
            .len()
            .cmp(&other.jets.len())
            .then_with(|| other.jets.cmp(&self.jets))
            .then_with(|| self.hbar.cmp(&other.hbar))
    }
}

impl PartialOrd for DiffMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Element of `Q[hbar]{u}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffPoly {
    terms: BTreeMap<DiffMono, Rational>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, DiffMono::one())
    }

    /// The generator `u^(i)`.
    pub fn jet(i: u32) -> Self {
        Self::term(Rational::one(), DiffMono::new(0, vec![i]))
    }

    pub fn hbar() -> Self {
        Self::term(Rational::one(), DiffMono::new(1, vec![]))
    }

    pub fn term(c: Rational, m: DiffMono) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn add_term(&mut self, m: DiffMono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMono, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &DiffMono) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Largest jet index present, if any generator occurs.
    pub fn max_jet(&self) -> Option<u32> {
        self.terms.keys().filter_map(|m| m.jets.first().copied()).max()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&DiffMono::one())
    }

    /// Substitutes `hbar = 0`.
    pub fn dispersionless(&self) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            if m.hbar == 0 {
                out.add_term(m.clone(), v.clone());
            }
        }
        out
    }

    /// The derivation with `∂u^(i) = u^(i+1)`.
    pub fn derive(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for pos in 0..m.jets.len() {
                let mut jets = m.jets.clone();
                jets[pos] += 1;
                out.add_term(DiffMono::new(m.hbar, jets), c.clone());
            }
        }
        out
    }

    pub fn derive_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derive())
    }

    /// `K p = hbar/8 ∂³p + u ∂p + 1/2 u' p`.
    pub fn apply_k(&self) -> Self {
        let third = &self.derive_n(3) * &Self::hbar().scale(&rat(1, 8));
        let mid = &Self::jet(0) * &self.derive();
        let low = &Self::jet(1).scale(&rat(1, 2)) * self;
        &(&third + &mid) + &low
    }

    /// Returns `q` with `∂q = self` and no constant term.
    pub fn integrate(&self) -> Result<Self> {
        let mut rest = self.clone();
        let mut acc = Self::zero();
        while !rest.is_zero() {
            let top = match rest.max_jet() {
                Some(n) if n > 0 => n,
                _ => return Err(Error::NotExact),
            };
            let mut candidate = Self::zero();
            for (m, c) in &rest.terms {
                let count = m.jets.iter().filter(|&&j| j == top).count();
                match count {
                    0 => {}
                    1 => {
                        // Replace the single u^(top) by an integral in u^(top-1).
                        let mut jets: Vec<u32> = m.jets.iter().copied().filter(|&j| j != top).collect();
                        let e = jets.iter().filter(|&&j| j == top - 1).count() as i64;
                        jets.push(top - 1);
                        candidate.add_term(DiffMono::new(m.hbar, jets), c / int(e + 1));
                    }
                    _ => return Err(Error::NotExact),
                }
            }
            rest = &rest - &candidate.derive();
            if rest.max_jet().is_some_and(|n| n >= top) {
                return Err(Error::NotExact);
            }
            acc = &acc + &candidate;
        }
        Ok(acc)
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&int(-1))
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.times(m2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut parts = vec![fmt_rat(c)];
            if m.hbar > 0 {
                parts.push(format!("hbar^{}", m.hbar));
            }
            if !m.jets.is_empty() {
                let gens: Vec<String> = m.jets.iter().map(|j| format!("u^({j})")).collect();
                parts.push(gens.join("*"));
            }
            write!(f, "{}", parts.join(" * "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(i: u32) -> DiffPoly {
        DiffPoly::jet(i)
    }

    #[test]
    fn derive_generators() {
        assert_eq!(u(0).derive(), u(1));
        assert_eq!((&u(0) * &u(0)).derive(), (&u(0) * &u(1)).scale(&int(2)));
        let r2 = &(&DiffPoly::hbar() * &u(2)).scale(&rat(1, 12)) + &(&u(0) * &u(0)).scale(&rat(1, 2));
        let expect = &(&DiffPoly::hbar() * &u(3)).scale(&rat(1, 12)) + &(&u(0) * &u(1));
        assert_eq!(r2.derive(), expect);
    }

    #[test]
    fn k_examples() {
        assert_eq!(DiffPoly::one().apply_k(), u(1).scale(&rat(1, 2)));
        let expect = &(&DiffPoly::hbar() * &u(3)).scale(&rat(1, 8)) + &(&u(0) * &u(1)).scale(&rat(3, 2));
        assert_eq!(u(0).apply_k(), expect);
        let uu = &u(0) * &u(0);
        let h = DiffPoly::hbar();
        let expect = &(&(&h * &(&u(1) * &u(2))).scale(&rat(6, 8)) + &(&h * &(&u(0) * &u(3))).scale(&rat(2, 8)))
            + &(&uu * &u(1)).scale(&rat(5, 2));
        assert_eq!(uu.apply_k(), expect);
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(u(1).integrate().unwrap(), u(0));
        assert_eq!((&u(0) * &u(1)).scale(&int(2)).integrate().unwrap(), &u(0) * &u(0));
        assert_eq!(u(0).integrate(), Err(Error::NotExact));
        assert_eq!((&u(1) * &u(1)).integrate(), Err(Error::NotExact));
    }

    #[test]
    fn render_order() {
        let p = &(&(&DiffPoly::hbar() * &u(2)).scale(&rat(1, 12)) + &(&u(0) * &u(0)).scale(&rat(1, 2)))
            + &(&u(1) * &u(1));
        assert_eq!(p.to_string(), "1/12 * hbar^1 * u^(2) + 1 * u^(1)*u^(1) + 1/2 * u^(0)*u^(0)");
    }
}
