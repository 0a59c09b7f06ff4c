use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::coh_model::CohModel;
use crate::error::Result;
use crate::exact_core::{binomial, fmt_rat, int, rat, RatMatrix, Rational};
use crate::report::CheckLine;

/// Polynomial in `D` with matrix coefficients; `coeffs[i]` multiplies `D^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly {
    n: usize,
    coeffs: Vec<RatMatrix>,
}

impl MatPoly {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: Vec::new() }
    }

    pub fn constant(m: RatMatrix) -> Self {
        Self::from_coeffs(m.rows(), vec![m])
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<RatMatrix>) -> Self {
        let mut p = Self { n, coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(RatMatrix::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[RatMatrix] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let z = RatMatrix::zeros(self.n, self.n);
        let c = (0..len)
            .map(|i| self.coeffs.get(i).unwrap_or(&z) + other.coeffs.get(i).unwrap_or(&z))
            .collect();
        Self::from_coeffs(self.n, c)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_coeffs(self.n, self.coeffs.iter().map(|m| m.scale(c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.n);
        }
        let mut c = vec![RatMatrix::zeros(self.n, self.n); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        Self::from_coeffs(self.n, c)
    }

    /// `g(D) -> g(D + k)`.
    pub fn shift(&self, k: &Rational) -> Self {
        let mut c = vec![RatMatrix::zeros(self.n, self.n); self.coeffs.len()];
        for (i, g) in self.coeffs.iter().enumerate() {
            let mut kp = int(1);
            for j in (0..=i).rev() {
                c[j] = &c[j] + &g.scale(&(binomial(i as i64, j as i64) * &kp));
                kp *= k;
            }
        }
        Self::from_coeffs(self.n, c)
    }

    /// `g(D) -> g(-D)`.
    pub fn reflect(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, m)| if i % 2 == 1 { m.scale(&int(-1)) } else { m.clone() })
            .collect();
        Self::from_coeffs(self.n, c)
    }

    pub fn map(&self, f: impl Fn(&RatMatrix) -> RatMatrix) -> Self {
        Self::from_coeffs(self.n, self.coeffs.iter().map(f).collect())
    }

    pub fn eval(&self, x: &Rational) -> RatMatrix {
        let mut acc = RatMatrix::zeros(self.n, self.n);
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(x) + c;
        }
        acc
    }
}

/// Finite sum `Σ f_k(D) ∂^k` with `D = z∂`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiSymbol {
    n: usize,
    terms: BTreeMap<i32, MatPoly>,
}

impl PsiSymbol {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::term(0, MatPoly::constant(RatMatrix::identity(n)))
    }

    pub fn term(k: i32, f: MatPoly) -> Self {
        let mut s = Self::zero(f.size());
        s.add_term(k, f);
        s
    }

    /// `∂^k` times the identity.
    pub fn d_power(n: usize, k: i32) -> Self {
        Self::term(k, MatPoly::constant(RatMatrix::identity(n)))
    }

    /// The multiplication operator `D` times the identity.
    pub fn d_op(n: usize) -> Self {
        Self::term(0, MatPoly::from_coeffs(n, vec![RatMatrix::zeros(n, n), RatMatrix::identity(n)]))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, k: i32, f: MatPoly) {
        let sum = match self.terms.remove(&k) {
            Some(g) => g.add(&f),
            None => f,
        };
        if !sum.is_zero() {
            self.terms.insert(k, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &MatPoly)> {
        self.terms.iter().map(|(k, f)| (*k, f))
    }

    pub fn get(&self, k: i32) -> Option<&MatPoly> {
        self.terms.get(&k)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut s = self.clone();
        for (k, f) in other.terms() {
            s.add_term(k, f.clone());
        }
        s
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut s = Self::zero(self.n);
        for (k, f) in self.terms() {
            s.add_term(k, f.scale(c));
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&int(-1)))
    }

    /// `f(D)∂^k ∘ g(D)∂^l = f(D) g(D+k) ∂^{k+l}`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut s = Self::zero(self.n);
        for (k, f) in self.terms() {
            for (l, g) in other.terms() {
                s.add_term(k + l, f.mul(&g.shift(&int(k as i64))));
            }
        }
        s
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::identity(self.n), |acc, _| acc.mul(self))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }
}

impl fmt::Display for PsiSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, p) in self.terms() {
            writeln!(f, "d^{k}:")?;
            for (i, c) in p.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    writeln!(f, "  D^{i}: {c}")?;
                }
            }
        }
        Ok(())
    }
}

/// `σ(L_k) = -((D+μ_s)∂^{-1} + R)^{k+1} ∂`.
pub fn symbol_lk(model: &CohModel, k: i32, s: &Rational) -> PsiSymbol {
    assert!(k >= -1, "L_k is defined for k >= -1");
    let n = model.rank();
    let mut x = PsiSymbol::term(-1, MatPoly::from_coeffs(n, vec![model.mu(s), RatMatrix::identity(n)]));
    x.add_term(0, MatPoly::constant(model.c1.clone()));
    x.pow((k + 1) as u32).mul(&PsiSymbol::d_power(n, 1)).scale(&int(-1))
}

/// The two-cocycle of the central extension, with supertraces over the
/// model's parities.
pub fn cocycle(model: &CohModel, a: &PsiSymbol, b: &PsiSymbol) -> Rational {
    let half = rat(1, 2);
    let mut total = Rational::zero();
    for (k, f) in a.terms() {
        let Some(g) = b.get(-k) else { continue };
        let mut acc = Rational::zero();
        for m in 0..k.max(0) {
            let x = int((m - k) as i64) + &half;
            let y = int(m as i64) + &half;
            acc += model.supertrace(&(&f.eval(&x) * &g.eval(&y)));
        }
        for m in 0..(-k).max(0) {
            let x = int(m as i64) + &half;
            let y = int((m - k) as i64) + &half;
            acc -= model.supertrace(&(&f.eval(&x) * &g.eval(&y)));
        }
        total += acc / int(2);
    }
    total
}

/// `c(σ(L_k), σ(L_l)) = (k-l)δ_{k+l,0}ρ(V)` for `-1 ≤ k, l ≤ kmax`; the
/// cocycle is antisymmetric, so at `(1,-1)` this is `2ρ(V)` and at `(-1,1)`
/// it is `-2ρ(V)`.
pub fn central_term_check(model: &CohModel, kmax: i32) -> Vec<CheckLine> {
    let zero = Rational::zero();
    let syms: Vec<PsiSymbol> = (-1..=kmax).map(|k| symbol_lk(model, k, &zero)).collect();
    let mut out = Vec::new();
    for k in -1..=kmax {
        for l in -1..=kmax {
            let lhs = cocycle(model, &syms[(k + 1) as usize], &syms[(l + 1) as usize]);
            let rhs = if k + l == 0 { int((k - l) as i64) * model.rho() } else { Rational::zero() };
            let pass = lhs == rhs;
            let detail = if pass { String::new() } else { format!("lhs={} rhs={}", fmt_rat(&lhs), fmt_rat(&rhs)) };
            out.push(CheckLine::new(format!("cocycle({k},{l})"), pass, detail));
        }
    }
    out
}

/// `c(σ(L_1), σ(L_{-1})) = -½ Str(μ² - ¼)`, computed from the symbols on
/// the left and from the grading alone on the right.
pub fn supertrace_cocycle_check(model: &CohModel) -> CheckLine {
    let zero = Rational::zero();
    let lhs = cocycle(model, &symbol_lk(model, 1, &zero), &symbol_lk(model, -1, &zero));
    let mu = model.mu0();
    let quarter = RatMatrix::scalar(model.rank(), &rat(1, 4));
    let rhs = -model.supertrace(&(&(&mu * &mu) - &quarter)) / int(2);
    let pass = lhs == rhs;
    CheckLine::new("cocycle(1,-1) = -Str(mu^2-1/4)/2", pass, format!("{} = {}", fmt_rat(&lhs), fmt_rat(&rhs)))
}

/// `[σ(L_k), σ(L_l)] = (k-l)σ(L_{k+l})` for `-1 ≤ k, l ≤ kmax`.
pub fn symbol_virasoro_check(model: &CohModel, kmax: i32, s: &Rational) -> Vec<CheckLine> {
    let syms: Vec<PsiSymbol> = (-1..=2 * kmax).map(|k| symbol_lk(model, k, s)).collect();
    let sym = |k: i32| &syms[(k + 1) as usize];
    let mut out = Vec::new();
    for k in -1..=kmax {
        for l in -1..=kmax {
            let lhs = sym(k).commutator(sym(l));
            let rhs = if k + l < -1 { PsiSymbol::zero(model.rank()) } else { sym(k + l).scale(&int((k - l) as i64)) };
            let pass = lhs == rhs;
            let detail = if pass {
                String::new()
            } else {
                let d = lhs.sub(&rhs);
                let (p, _) = d.terms().next().expect("nonzero difference");
                format!("differs at d^{p}")
            };
            out.push(CheckLine::new(format!("symbol[{k},{l}]"), pass, detail));
        }
    }
    out
}

/// `F* = η⁻¹ Fᵀ η`.
pub fn eta_adjoint(model: &CohModel, f: &RatMatrix) -> Result<RatMatrix> {
    let inv = model.eta_inverse()?;
    Ok(&(&inv * &f.transpose()) * &model.eta)
}

/// Checks `f_k(-t) = (-1)^{k+1} f_k*(t-k)` on every component.
pub fn parity_check(model: &CohModel, sym: &PsiSymbol) -> Result<bool> {
    for (k, f) in sym.terms() {
        let lhs = f.reflect();
        let mut rhs = MatPoly::zero(f.size());
        let adj = f.shift(&int(-k as i64));
        let mut coeffs = Vec::new();
        for c in adj.coeffs() {
            coeffs.push(eta_adjoint(model, c)?);
        }
        rhs = rhs.add(&MatPoly::from_coeffs(f.size(), coeffs));
        if k % 2 == 0 {
            rhs = rhs.scale(&int(-1));
        }
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coh_model::builtin;

    fn poly(n: usize, c: &[i64]) -> MatPoly {
        MatPoly::from_coeffs(n, c.iter().map(|&x| RatMatrix::scalar(n, &int(x))).collect())
    }

    #[test]
    fn composition_rule() {
        let d = PsiSymbol::d_power(1, 1);
        let dd = PsiSymbol::d_op(1);
        assert_eq!(d.mul(&dd), PsiSymbol::term(1, poly(1, &[1, 1])));
        let a = d.add(&dd);
        assert_eq!(PsiSymbol::identity(1).mul(&a), a);
    }

    #[test]
    fn product_anchor() {
        // (z + μ∂⁻¹)² ∂ = (D+μ)(D+μ-1)∂⁻¹ with μ = 1/3 as a 1x1 matrix
        let mu = RatMatrix::scalar(1, &rat(1, 3));
        let x = PsiSymbol::term(-1, MatPoly::from_coeffs(1, vec![mu.clone(), RatMatrix::identity(1)]));
        let lhs = x.pow(2).mul(&PsiSymbol::d_power(1, 1));
        let a = MatPoly::from_coeffs(1, vec![mu.clone(), RatMatrix::identity(1)]);
        let b = a.shift(&int(-1));
        assert_eq!(lhs, PsiSymbol::term(-1, a.mul(&b)));
    }

    #[test]
    fn small_symbols() {
        let p1 = builtin("P1").unwrap();
        let z = Rational::zero();
        assert_eq!(symbol_lk(&p1, -1, &z), PsiSymbol::d_power(2, 1).scale(&int(-1)));
        let mut l0 = PsiSymbol::term(0, MatPoly::from_coeffs(2, vec![p1.mu0(), RatMatrix::identity(2)]));
        l0.add_term(1, MatPoly::constant(p1.c1.clone()));
        assert_eq!(symbol_lk(&p1, 0, &z), l0.scale(&int(-1)));
        let l1 = symbol_lk(&p1, 1, &z);
        let lm = symbol_lk(&p1, -1, &z);
        assert_eq!(l1.commutator(&lm), symbol_lk(&p1, 0, &z).scale(&int(2)));
        assert_eq!(symbol_lk(&p1, 2, &z).commutator(&l1), symbol_lk(&p1, 3, &z));
        let l0 = symbol_lk(&p1, 0, &z);
        assert!(l0.commutator(&l0).is_zero());
    }

    #[test]
    fn cocycle_values() {
        let pt = builtin("point").unwrap();
        let z = Rational::zero();
        assert_eq!(cocycle(&pt, &symbol_lk(&pt, 1, &z), &symbol_lk(&pt, -1, &z)), rat(1, 8));
        let p2 = builtin("P2").unwrap();
        let c = cocycle(&p2, &symbol_lk(&p2, 1, &z), &symbol_lk(&p2, -1, &z));
        let mu = p2.mu0();
        let quarter = RatMatrix::scalar(3, &rat(1, 4));
        assert_eq!(c, -p2.supertrace(&(&(&mu * &mu) - &quarter)) / int(2));
        for l in central_term_check(&p2, 4) {
            assert!(l.pass, "{l}");
        }
        let mut bad = p2.clone();
        bad.c1_crm1 += int(1);
        let lines = central_term_check(&bad, 2);
        assert!(lines.iter().any(|l| l.name == "cocycle(1,-1)" && !l.pass));
    }

    #[test]
    fn parity_normal_form() {
        for name in ["point", "P1", "P2", "P3", "C2"] {
            let m = builtin(name).unwrap();
            for k in -1..=4 {
                assert!(parity_check(&m, &symbol_lk(&m, k, &Rational::zero())).unwrap(), "{name} k={k}");
            }
        }
    }
}
