//! Genus-zero generating series on jets: θ(ζ), Θ(ζ), the G-series, the
//! matrices U, V and A_{k,i}, and the identities relating them.
//!
//! Jets live on the slice of the large phase space spanned by `t_m^a` with
//! `m < indices`; variable `m·rank + a` is `t_m^a`. For tables over a
//! lattice of rank one the auxiliary grading of a jet is the Novikov degree.

mod checks;
mod series;

use std::collections::HashMap;

use num_traits::{One, Zero};
use parking_lot::Mutex;

pub use checks::{
    a_matrices, amat_check, bilinear_check, delta_iterate_check, fp_check, g_series, g_vanish_check, invert_check, lminus1_check,
    nabla_theta_check, nabla_z_check, run_check, theta_basics, trr_check, uv_check, uv_matrices, wdvv_check,
    Genus0Check,
};
pub use series::{JetMat, JetShape, LaurentJetSeries};

use crate::coh_model::CohModel;
use crate::constraint_eval::{GwTable, Ins};
use crate::error::{Error, Result};
use crate::exact_core::{factorial, int, RatMatrix, Rational};
use crate::jet::{monomials, Jet, JetMono};
use crate::point_correlators::genus0_closed;

/// Jet truncation for the genus-zero series: total degree `degree` in the
/// variables `t_m^a`, `m < indices`; θ and Θ are kept down to `ζ^{-depth}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct G0Truncation {
    pub degree: i32,
    pub indices: usize,
    pub depth: usize,
}

impl G0Truncation {
    /// Depth `indices + 6` is enough to certify G[n] for n ≥ -5.
    pub fn new(degree: i32, indices: usize) -> Self {
        Self { degree, indices, depth: indices + 6 }
    }
}

enum Source<'a> {
    Point,
    Table(&'a GwTable),
}

/// Genus-zero correlator jets of one model, with a memo.
pub struct Genus0<'a> {
    source: Source<'a>,
    model: CohModel,
    trunc: G0Truncation,
    eta_inv: RatMatrix,
    unit: usize,
    shape: JetShape,
    cache: Mutex<HashMap<Vec<Ins>, Jet>>,
}

impl<'a> Genus0<'a> {
    /// The point, from the closed genus-zero formula.
    pub fn point(trunc: G0Truncation) -> Result<Genus0<'static>> {
        let model = crate::coh_model::builtin("point")?;
        Genus0::build(Source::Point, model, trunc, 0)
    }

    /// Any even model, from the genus-zero part of a table.
    pub fn from_table(table: &'a GwTable, trunc: G0Truncation) -> Result<Self> {
        if table.model.has_odd() {
            return Err(Error::Unsupported("genus-zero series are built for models without odd classes".into()));
        }
        if table.lattice_rank() > 1 {
            return Err(Error::Unsupported("genus-zero series support a Novikov lattice of rank at most one".into()));
        }
        let aux = if table.lattice_rank() == 0 { 0 } else { table.bounds.degree as i32 };
        Genus0::build(Source::Table(table), table.model.clone(), trunc, aux)
    }

    fn build(source: Source<'a>, model: CohModel, trunc: G0Truncation, aux: i32) -> Result<Self> {
        if trunc.indices == 0 {
            return Err(Error::TruncationTooSmall("at least one descendant level is needed".into()));
        }
        let eta_inv = model.eta_inverse()?;
        let unit = model
            .basis
            .iter()
            .position(|b| b.p == 0 && b.q == 0)
            .ok_or_else(|| Error::InvalidModel("no unit class".into()))?;
        let shape = JetShape { nvars: trunc.indices * model.rank(), degree: trunc.degree, aux };
        Ok(Self { source, model, trunc, eta_inv, unit, shape, cache: Mutex::new(HashMap::new()) })
    }

    pub fn model(&self) -> &CohModel {
        &self.model
    }

    pub fn truncation(&self) -> G0Truncation {
        self.trunc
    }

    pub fn shape(&self) -> JetShape {
        self.shape
    }

    pub fn rank(&self) -> usize {
        self.model.rank()
    }

    pub fn eta_inv(&self) -> &RatMatrix {
        &self.eta_inv
    }

    /// Index of the unit class.
    pub fn unit(&self) -> usize {
        self.unit
    }

    /// Jet variable of `t_m^a`.
    pub fn var(&self, m: usize, a: usize) -> usize {
        m * self.rank() + a
    }

    /// `t_m^a` as a jet (zero off the slice).
    pub fn t(&self, m: usize, a: usize) -> Jet {
        if m < self.trunc.indices {
            Jet::variable(self.shape.nvars, self.shape.degree, self.shape.aux, self.var(m, a))
        } else {
            self.shape.zero()
        }
    }

    /// `t̃_m^a = t_m^a - δ_{m,1}δ_{a,unit}`.
    pub fn t_tilde(&self, m: usize, a: usize) -> Jet {
        let t = self.t(m, a);
        if m == 1 && a == self.unit {
            t.sub(&self.shape.constant(Rational::one()))
        } else {
            t
        }
    }

    fn value(&self, beta: Option<i64>, ins: &[Ins]) -> Result<Rational> {
        match self.source {
            Source::Point => {
                let ks: Vec<u32> = ins.iter().map(|i| i.0).collect();
                Ok(genus0_closed(&ks))
            }
            Source::Table(table) => {
                let b: Vec<i64> = beta.into_iter().collect();
                let c1b: i64 = b.iter().zip(&table.c1_beta).map(|(x, y)| x * y).sum();
                let degree: i64 = ins
                    .iter()
                    .map(|&(k, a)| {
                        let c = &self.model.basis[a];
                        k as i64 + (c.p + c.q) as i64 / 2
                    })
                    .sum();
                if degree != self.model.vdim(0, c1b, ins.len() as u32) {
                    return Ok(Rational::zero());
                }
                table.get(0, &b, ins)
            }
        }
    }

    /// `⟨⟨τ_{fixed}⟩⟩₀` as a jet on the slice.
    pub fn corr(&self, fixed: &[Ins]) -> Result<Jet> {
        let mut key = fixed.to_vec();
        key.sort_unstable();
        if let Some(j) = self.cache.lock().get(&key) {
            return Ok(j.clone());
        }
        let betas: Vec<Option<i64>> = match self.source {
            Source::Table(t) if t.lattice_rank() == 1 => (0..=t.bounds.degree).map(Some).collect(),
            _ => vec![None],
        };
        let mut jet = self.shape.zero();
        if self.shape.degree >= 0 {
            for exps in monomials(self.shape.nvars, self.shape.degree as u32) {
                let mut ins = key.clone();
                let mut sym = int(1);
                for (v, &e) in exps.iter().enumerate() {
                    for _ in 0..e {
                        ins.push(((v / self.rank()) as u32, v % self.rank()));
                    }
                    sym *= factorial(e as u64);
                }
                for beta in &betas {
                    let c = self.value(*beta, &ins)?;
                    if !c.is_zero() {
                        let aux = beta.unwrap_or(0) as i32;
                        jet.add_term(JetMono { aux, exps: exps.clone() }, c / &sym);
                    }
                }
            }
        }
        self.cache.lock().insert(key, jet.clone());
        Ok(jet)
    }

    /// `θ(ζ)` as a column vector: `Σ ζ^{-m-1} η^{ab}⟨⟨τ_{m,b}⟩⟩₀ + Σ (-ζ)^m t̃_m^a`.
    pub fn theta(&self) -> Result<LaurentJetSeries> {
        let n = self.rank();
        let depth = self.trunc.depth as i32;
        let top = (self.trunc.indices as i32 - 1).max(1);
        let mut coeffs = Vec::new();
        for p in -depth..=top {
            let col = if p < 0 {
                let m = (-p - 1) as u32;
                let mut lower = JetMat::zero(n, 1, self.shape);
                for b in 0..n {
                    lower.set(b, 0, self.corr(&[(m, b)])?);
                }
                lower.lmul_rat(&self.eta_inv)
            } else {
                let sign = if p % 2 == 1 { int(-1) } else { int(1) };
                JetMat::from_fn(n, 1, |a, _| self.t_tilde(p as usize, a).scale(&sign))
            };
            coeffs.push(col);
        }
        Ok(LaurentJetSeries::new(-depth, false, coeffs))
    }

    /// `Θ(ζ)` with entries `Θ^a_b = δ^a_b + Σ ζ^{-m-1} η^{ac}⟨⟨τ_{m,c}τ_{0,b}⟩⟩₀`.
    pub fn big_theta(&self) -> Result<LaurentJetSeries> {
        let n = self.rank();
        let depth = self.trunc.depth as i32;
        let mut coeffs = Vec::new();
        for p in -depth..0 {
            let m = (-p - 1) as u32;
            let mut lower = JetMat::zero(n, n, self.shape);
            for c in 0..n {
                for b in 0..n {
                    lower.set(c, b, self.corr(&[(m, c), (0, b)])?);
                }
            }
            coeffs.push(lower.lmul_rat(&self.eta_inv));
        }
        coeffs.push(JetMat::from_rat(&RatMatrix::identity(n), self.shape));
        Ok(LaurentJetSeries::new(-depth, false, coeffs))
    }

    /// `η`-adjoint `X ↦ η⁻¹Xᵀη` applied coefficientwise.
    pub fn adjoint(&self, s: &LaurentJetSeries) -> LaurentJetSeries {
        let eta = &self.model.eta;
        s.map(|c| c.transpose().rmul_rat(eta).lmul_rat(&self.eta_inv))
    }

    /// Row covector `θ*`, i.e. `θᵀη`, applied coefficientwise.
    pub fn lower(&self, s: &LaurentJetSeries) -> LaurentJetSeries {
        let eta = &self.model.eta;
        s.map(|c| c.transpose().rmul_rat(eta))
    }

    /// The vector field ℒ₋₁ = Σ_{m≥1} t̃_m^a ∂_{m-1,a} applied to a jet.
    pub fn l_minus_one(&self, f: &Jet) -> Jet {
        let mut acc = self.shape.zero().restrict(f.deg_trust() - 1, f.aux_trust());
        for m in 1..=self.trunc.indices {
            for a in 0..self.rank() {
                let coeff = self.t_tilde(m, a);
                if coeff.is_zero() {
                    continue;
                }
                let d = f.derivative(self.var(m - 1, a));
                acc = acc.add(&d.mul(&coeff));
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_core::int;

    #[test]
    fn point_theta_at_origin() {
        let g0 = Genus0::point(G0Truncation::new(3, 3)).unwrap();
        let th = g0.big_theta().unwrap();
        let u = th.coeff(-1).unwrap().get(0, 0);
        assert_eq!(u.coeff_of(0, &[0, 0, 0]), Some(int(0)));
        assert_eq!(u.coeff_of(0, &[1, 0, 0]), Some(int(1)));
        let theta = g0.theta().unwrap();
        // θ at t = 0 is the tail -ζ t̃_1 = ζ.
        for (p, c) in theta.powers() {
            let at0 = c.get(0, 0).coeff_of(0, &[0, 0, 0]).unwrap();
            assert_eq!(at0, if p == 1 { int(1) } else { int(0) }, "power {p}");
        }
    }

    #[test]
    fn odd_tables_rejected() {
        let model = crate::coh_model::builtin("C2").unwrap();
        let bounds = crate::constraint_eval::Bounds { genus: 0, ksum: 0, points: 3, degree: 0 };
        let t = GwTable::new("builtin:C2", model, vec![], bounds);
        assert!(matches!(Genus0::from_table(&t, G0Truncation::new(1, 1)), Err(Error::Unsupported(_))));
    }
}
