//! Truncated multivariate power series ("jets") with an auxiliary grading.
//!
//! A jet stores only the coefficients it can certify: every monomial of total
//! degree at most `deg_trust` whose auxiliary exponent (the power of ħ, or a
//! Novikov degree) is at most `aux_trust`. Anything outside that window is
//! indeterminate rather than zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;

use crate::exact_core::{factorial, fmt_rat, int, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetMono {
    pub aux: i32,
    pub exps: Vec<u8>,
}

impl JetMono {
    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    /// `∏ e_i!`, the symmetry factor of the monomial.
    pub fn factorial(&self) -> Rational {
        self.exps.iter().fold(int(1), |acc, &e| acc * factorial(e as u64))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    nvars: usize,
    deg_trust: i32,
    aux_trust: i32,
    terms: BTreeMap<JetMono, Rational>,
}

impl Jet {
    pub fn zero(nvars: usize, deg_trust: i32, aux_trust: i32) -> Self {
        Self { nvars, deg_trust, aux_trust, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, deg_trust: i32, aux_trust: i32, c: Rational) -> Self {
        let mut j = Self::zero(nvars, deg_trust, aux_trust);
        j.add_term(JetMono { aux: 0, exps: vec![0; nvars] }, c);
        j
    }

    /// `c * aux^a` with no variables.
    pub fn aux_monomial(nvars: usize, deg_trust: i32, aux_trust: i32, a: i32, c: Rational) -> Self {
        let mut j = Self::zero(nvars, deg_trust, aux_trust);
        j.add_term(JetMono { aux: a, exps: vec![0; nvars] }, c);
        j
    }

    pub fn variable(nvars: usize, deg_trust: i32, aux_trust: i32, var: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[var] = 1;
        let mut j = Self::zero(nvars, deg_trust, aux_trust);
        j.add_term(JetMono { aux: 0, exps }, int(1));
        j
    }

    /// Builds a jet from a coefficient function evaluated on every monomial
    /// of degree at most `deg_trust`; `coeffs` returns `(aux, value)` pairs.
    pub fn from_fn(
        nvars: usize,
        deg_trust: i32,
        aux_trust: i32,
        mut coeffs: impl FnMut(&[u8]) -> Vec<(i32, Rational)>,
    ) -> Self {
        let mut j = Self::zero(nvars, deg_trust, aux_trust);
        if deg_trust < 0 {
            return j;
        }
        for exps in monomials(nvars, deg_trust as u32) {
            for (a, c) in coeffs(&exps) {
                j.add_term(JetMono { aux: a, exps: exps.clone() }, c);
            }
        }
        j
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn deg_trust(&self) -> i32 {
        self.deg_trust
    }

    pub fn aux_trust(&self) -> i32 {
        self.aux_trust
    }

    fn in_window(&self, m: &JetMono) -> bool {
        (m.degree() as i32) <= self.deg_trust && m.aux <= self.aux_trust
    }

    pub fn add_term(&mut self, m: JetMono, c: Rational) {
        if c.is_zero() || !self.in_window(&m) {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMono, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every certified coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &JetMono) -> Option<Rational> {
        if !self.in_window(m) {
            return None;
        }
        Some(self.terms.get(m).cloned().unwrap_or_else(Rational::zero))
    }

    /// Coefficient of `aux^a * ∏ x_i^{e_i}`.
    pub fn coeff_of(&self, aux: i32, exps: &[u8]) -> Option<Rational> {
        self.coeff(&JetMono { aux, exps: exps.to_vec() })
    }

    pub fn first_term(&self) -> Option<(&JetMono, &Rational)> {
        self.terms.iter().next()
    }

    /// Narrows the certified window.
    pub fn restrict(&self, deg_trust: i32, aux_trust: i32) -> Self {
        let mut out = Self::zero(self.nvars, deg_trust.min(self.deg_trust), aux_trust.min(self.aux_trust));
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    fn low_degree(&self) -> i32 {
        self.terms.keys().map(|m| m.degree() as i32).min().unwrap_or(self.deg_trust + 1)
    }

    fn low_aux(&self) -> i32 {
        self.terms.keys().map(|m| m.aux).min().unwrap_or(self.aux_trust + 1)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.nvars, self.deg_trust, self.aux_trust);
        if c.is_zero() {
            return out;
        }
        for (m, v) in &self.terms {
            out.terms.insert(m.clone(), v * c);
        }
        out
    }

    /// Multiplies by `aux^a`.
    pub fn shift_aux(&self, a: i32) -> Self {
        let mut out = Self::zero(self.nvars, self.deg_trust, self.aux_trust + a);
        for (m, v) in &self.terms {
            out.terms.insert(JetMono { aux: m.aux + a, exps: m.exps.clone() }, v.clone());
        }
        out
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.combine(other, &int(1))
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.combine(other, &int(-1))
    }

    fn combine(&self, other: &Jet, sign: &Rational) -> Jet {
        assert_eq!(self.nvars, other.nvars, "jet variable mismatch");
        let mut out = Jet::zero(
            self.nvars,
            self.deg_trust.min(other.deg_trust),
            self.aux_trust.min(other.aux_trust),
        );
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c * sign);
        }
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        assert_eq!(self.nvars, other.nvars, "jet variable mismatch");
        let deg = (self.deg_trust + other.low_degree()).min(other.deg_trust + self.low_degree());
        let aux = (self.aux_trust + other.low_aux()).min(other.aux_trust + self.low_aux());
        let lhs: Vec<(&JetMono, &Rational, i32)> =
            self.terms.iter().map(|(m, c)| (m, c, m.degree() as i32)).collect();
        let rhs: Vec<(&JetMono, &Rational, i32)> =
            other.terms.iter().map(|(m, c)| (m, c, m.degree() as i32)).collect();
        let mut acc: HashMap<JetMono, Rational> = HashMap::new();
        for (m1, c1, d1) in &lhs {
            for (m2, c2, d2) in &rhs {
                if d1 + d2 > deg || m1.aux + m2.aux > aux {
                    continue;
                }
                let exps: Vec<u8> = m1.exps.iter().zip(&m2.exps).map(|(a, b)| a + b).collect();
                let key = JetMono { aux: m1.aux + m2.aux, exps };
                *acc.entry(key).or_insert_with(Rational::zero) += *c1 * *c2;
            }
        }
        let mut out = Jet::zero(self.nvars, deg, aux);
        for (m, c) in acc {
            if !c.is_zero() {
                out.terms.insert(m, c);
            }
        }
        out
    }

    /// Partial derivative in variable `var`; the certified degree drops by one.
    pub fn derivative(&self, var: usize) -> Jet {
        let mut out = Jet::zero(self.nvars, self.deg_trust - 1, self.aux_trust);
        for (m, c) in &self.terms {
            let e = m.exps[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.clone();
            exps[var] -= 1;
            out.add_term(JetMono { aux: m.aux, exps }, c * int(e as i64));
        }
        out
    }

    pub fn derivative_n(&self, var: usize, n: usize) -> Jet {
        (0..n).fold(self.clone(), |j, _| j.derivative(var))
    }

    /// Multiplies by the variable `var`; the certified degree grows by one.
    pub fn times_variable(&self, var: usize) -> Jet {
        let mut out = Jet::zero(self.nvars, self.deg_trust + 1, self.aux_trust);
        for (m, c) in &self.terms {
            let mut exps = m.exps.clone();
            exps[var] += 1;
            out.terms.insert(JetMono { aux: m.aux, exps }, c.clone());
        }
        out
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = fmt_rat(c);
                if m.aux != 0 {
                    s.push_str(&format!(" * q^{}", m.aux));
                }
                for (i, &e) in m.exps.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => s.push_str(&format!(" * x{i}")),
                        _ => s.push_str(&format!(" * x{i}^{e}")),
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// All exponent vectors in `nvars` variables of total degree at most `max_deg`.
pub fn monomials(nvars: usize, max_deg: u32) -> Vec<Vec<u8>> {
    fn rec(pos: usize, left: u32, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[pos] = e as u8;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u8; nvars];
    rec(0, max_deg, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_core::rat;

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(6, 5).len(), 462);
        assert_eq!(monomials(1, 3).len(), 4);
    }

    #[test]
    fn windows_track_truncation() {
        let x = Jet::variable(2, 3, 0, 0);
        let one = Jet::constant(2, 3, 0, int(1));
        let p = x.add(&one);
        let sq = p.mul(&p);
        assert_eq!(sq.deg_trust(), 3);
        assert_eq!(sq.coeff_of(0, &[2, 0]), Some(int(1)));
        let d = sq.derivative(0);
        assert_eq!(d.deg_trust(), 2);
        assert_eq!(d.coeff_of(0, &[1, 0]), Some(int(2)));
        assert_eq!(d.coeff_of(0, &[3, 0]), None);
        let x2 = x.mul(&x);
        // x has no constant term, so x*x is certified to degree 4.
        assert_eq!(x2.deg_trust(), 4);
        let half = x.scale(&rat(1, 2));
        assert_eq!(half.coeff_of(0, &[1, 0]), Some(rat(1, 2)));
    }
}
