//! Finite models of the cohomology of a smooth projective variety: Hodge
//! grading, Poincaré pairing, multiplication by the first Chern class and
//! the two Chern numbers the constraints depend on.

mod builtin;

use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_core::{fmt_rat, int, parse_rat, rat, RatMatrix, Rational};

pub use builtin::{builtin, builtin_names, curve, k3_surface, product, projective_space};

/// A basis class with its Hodge bidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisClass {
    pub label: String,
    pub p: u32,
    pub q: u32,
}

impl BasisClass {
    pub fn new(label: impl Into<String>, p: u32, q: u32) -> Self {
        Self { label: label.into(), p, q }
    }

    pub fn is_odd(&self) -> bool {
        (self.p + self.q) % 2 == 1
    }
}

/// `eta[a][b]` is the pairing of classes `a` and `b`; `c1[b][a]` is the
/// coefficient `R^b_a` of `γ_b` in `c₁ ∪ γ_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct CohModel {
    pub name: String,
    pub dim: u32,
    pub basis: Vec<BasisClass>,
    pub eta: RatMatrix,
    pub c1: RatMatrix,
    /// `∫ c_r`, the Euler characteristic.
    pub chi: Rational,
    /// `∫ c₁ c_{r-1}`.
    pub c1_crm1: Rational,
}

impl CohModel {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn parity(&self, a: usize) -> bool {
        self.basis[a].is_odd()
    }

    pub fn has_odd(&self) -> bool {
        self.basis.iter().any(BasisClass::is_odd)
    }

    /// Sign `(-1)^{p_a+q_a}`.
    pub fn sign(&self, a: usize) -> Rational {
        if self.parity(a) {
            int(-1)
        } else {
            int(1)
        }
    }

    /// `μ_s = (1-s)μ + sμ̄`, diagonal with entries `(1-s)(p-r/2) + s(q-r/2)`.
    pub fn mu(&self, s: &Rational) -> RatMatrix {
        let half_r = rat(self.dim as i64, 2);
        let entries: Vec<Rational> = self
            .basis
            .iter()
            .map(|b| {
                let p = int(b.p as i64) - &half_r;
                let q = int(b.q as i64) - &half_r;
                (Rational::one() - s) * p + s * q
            })
            .collect();
        RatMatrix::diag(&entries)
    }

    pub fn mu0(&self) -> RatMatrix {
        self.mu(&Rational::zero())
    }

    /// Supertrace `Σ (-1)^{p_a+q_a} M_aa`.
    pub fn supertrace(&self, m: &RatMatrix) -> Rational {
        (0..self.rank()).fold(Rational::zero(), |acc, a| acc + self.sign(a) * m.get(a, a))
    }

    /// `ρ(V) = 1/48 ∫ ((3-r)c_r - 2c₁c_{r-1})`.
    pub fn rho(&self) -> Rational {
        (int(3 - self.dim as i64) * &self.chi - int(2) * &self.c1_crm1) / int(48)
    }

    /// `Str((μ-μ̄)²)`.
    pub fn rho_tilde(&self) -> Rational {
        let d = &self.mu0() - &self.mu(&int(1));
        self.supertrace(&(&d * &d))
    }

    /// Compares `Str(μ²)` with `1/12 ∫ (r c_r + 2c₁c_{r-1})`.
    pub fn libgober_check(&self) -> (Rational, Rational, bool) {
        let m = self.mu0();
        let lhs = self.supertrace(&(&m * &m));
        let rhs = (int(self.dim as i64) * &self.chi + int(2) * &self.c1_crm1) / int(12);
        let ok = lhs == rhs;
        (lhs, rhs, ok)
    }

    /// `(3-r)(g-1) + c₁∩β + n`.
    pub fn vdim(&self, g: u32, beta_c1: i64, n: u32) -> i64 {
        (3 - self.dim as i64) * (g as i64 - 1) + beta_c1 + n as i64
    }

    pub fn eta_inverse(&self) -> Result<RatMatrix> {
        self.eta.inverse().ok_or_else(|| Error::InvalidModel("pairing degenerate".into()))
    }

    /// Lists every violated invariant; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let n = self.rank();
        let mut bad = Vec::new();
        if n == 0 {
            return vec!["empty basis".into()];
        }
        if self.eta.rows() != n || self.eta.cols() != n || self.c1.rows() != n || self.c1.cols() != n {
            return vec!["matrix size does not match basis".into()];
        }
        if self.basis[0].p != 0 || self.basis[0].q != 0 {
            bad.push("class 0 must be the unit with bidegree (0,0)".into());
        }
        if self.basis.iter().any(|b| b.p > self.dim || b.q > self.dim) {
            bad.push("bidegree exceeds dimension".into());
        }
        if self.eta.inverse().is_none() {
            bad.push("pairing degenerate".into());
        }
        for a in 0..n {
            for b in 0..n {
                let x = self.eta.get(a, b);
                if x.is_zero() {
                    continue;
                }
                let (ca, cb) = (&self.basis[a], &self.basis[b]);
                if ca.p + cb.p != self.dim || ca.q + cb.q != self.dim {
                    bad.push(format!("pairing degree: eta {a} {b} pairs ({},{}) with ({},{})", ca.p, ca.q, cb.p, cb.q));
                }
                let sign = if ca.is_odd() && cb.is_odd() { int(-1) } else { int(1) };
                if *self.eta.get(b, a) != sign * x {
                    bad.push(format!("pairing not graded symmetric at {a} {b}"));
                }
            }
        }
        let mu = self.mu0();
        if mu.commutator(&self.c1) != self.c1 {
            bad.push("[mu, R] != R".into());
        }
        let mubar = self.mu(&int(1));
        if mubar.commutator(&self.c1) != self.c1 {
            bad.push("R does not have bidegree (1,1)".into());
        }
        if &self.c1.transpose() * &self.eta != &self.eta * &self.c1 {
            bad.push("R not self-adjoint for the pairing".into());
        }
        bad
    }

    pub fn validated(self) -> Result<Self> {
        let bad = self.validate();
        if bad.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidModel(bad.join("; ")))
        }
    }

    /// Parses the line-oriented model format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut name = String::from("model");
        let mut basis = Vec::new();
        let mut eta_entries = Vec::new();
        let mut c1_entries = Vec::new();
        let mut chi = None;
        let mut c1c = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let perr = |msg: String| Error::Parse { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let f: Vec<&str> = content.split_whitespace().collect();
            let num = |s: &str| s.parse::<u32>().map_err(|_| perr(format!("expected an integer, found `{s}`")));
            let ratv = |s: &str| parse_rat(s).map_err(|_| perr(format!("expected a rational, found `{s}`")));
            match (f[0], f.len()) {
                ("name", 2) => name = f[1].to_string(),
                ("dim", 2) => dim = Some(num(f[1])?),
                ("basis", 4) => basis.push(BasisClass::new(f[1], num(f[2])?, num(f[3])?)),
                ("eta", 4) => eta_entries.push((line, num(f[1])? as usize, num(f[2])? as usize, ratv(f[3])?)),
                ("c1", 4) => c1_entries.push((line, num(f[1])? as usize, num(f[2])? as usize, ratv(f[3])?)),
                ("chern", 3) if f[1] == "cr" => chi = Some(ratv(f[2])?),
                ("chern", 3) if f[1] == "c1crm1" => c1c = Some(ratv(f[2])?),
                _ => return Err(perr(format!("unrecognized line `{content}`"))),
            }
        }
        let last = text.lines().count();
        let missing = |what: &str| Error::Parse { line: last, msg: format!("missing `{what}`") };
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let chi = chi.ok_or_else(|| missing("chern cr"))?;
        let c1_crm1 = c1c.ok_or_else(|| missing("chern c1crm1"))?;
        let n = basis.len();
        let mut eta = RatMatrix::zeros(n, n);
        let mut c1 = RatMatrix::zeros(n, n);
        for (line, a, b, v) in eta_entries {
            if a >= n || b >= n {
                return Err(Error::Parse { line, msg: format!("index out of range for {n} classes") });
            }
            eta.set(a, b, v);
        }
        for (line, i, j, v) in c1_entries {
            if i >= n || j >= n {
                return Err(Error::Parse { line, msg: format!("index out of range for {n} classes") });
            }
            c1.set(j, i, v);
        }
        Ok(Self { name, dim, basis, eta, c1, chi, c1_crm1 })
    }

    /// Writes the model in the format read by [`CohModel::parse`].
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "name {}", self.name);
        let _ = writeln!(s, "dim {}", self.dim);
        for b in &self.basis {
            let _ = writeln!(s, "basis {} {} {}", b.label, b.p, b.q);
        }
        let n = self.rank();
        for a in 0..n {
            for b in 0..n {
                if !self.eta.get(a, b).is_zero() {
                    let _ = writeln!(s, "eta {a} {b} {}", fmt_rat(self.eta.get(a, b)));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !self.c1.get(j, i).is_zero() {
                    let _ = writeln!(s, "c1 {i} {j} {}", fmt_rat(self.c1.get(j, i)));
                }
            }
        }
        let _ = writeln!(s, "chern cr {}", fmt_rat(&self.chi));
        let _ = writeln!(s, "chern c1crm1 {}", fmt_rat(&self.c1_crm1));
        s
    }
}

/// Resolves `builtin:NAME`, a file path, or a bare built-in name when no
/// such file exists.
pub fn load_model(spec: &str) -> Result<CohModel> {
    let m = match spec.strip_prefix("builtin:") {
        Some(name) => builtin(name)?,
        None if !std::path::Path::new(spec).exists() => builtin(spec)
            .map_err(|_| Error::InvalidModel(format!("{spec}: neither a model file nor a built-in name")))?,
        None => CohModel::parse(&std::fs::read_to_string(spec)?)?,
    };
    m.validated()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_numbers() {
        let pt = builtin("point").unwrap();
        assert_eq!(pt.rho(), rat(1, 16));
        assert_eq!(pt.libgober_check(), (int(0), int(0), true));
        assert_eq!(pt.vdim(2, 0, 1), 4);
        let p1 = builtin("P1").unwrap();
        assert_eq!(p1.rho(), int(0));
        let p2 = builtin("P2").unwrap();
        assert_eq!(p2.mu0(), RatMatrix::diag(&[int(-1), int(0), int(1)]));
        assert_eq!(p2.libgober_check(), (int(2), int(2), true));
        assert_eq!(p2.vdim(0, 3, 2), 4);
        assert_eq!(builtin("P3").unwrap().libgober_check().0, int(5));
    }

    #[test]
    fn parse_errors() {
        let e = CohModel::parse("dim 0\nbasis one 0 0\neta 0 0 x\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let m = CohModel::parse("dim 0\nbasis one 0 0\neta 0 0 0\nchern cr 1\nchern c1crm1 0\n").unwrap();
        assert!(m.validate().contains(&"pairing degenerate".to_string()));
    }

    #[test]
    fn round_trip() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            assert_eq!(CohModel::parse(&m.emit()).unwrap(), m, "{name}");
            assert!(m.validate().is_empty(), "{name}: {:?}", m.validate());
        }
    }

    #[test]
    fn curve_invariants() {
        let c = builtin("C2").unwrap();
        assert!(c.validate().is_empty(), "{:?}", c.validate());
        assert_eq!(c.rho_tilde(), int(-4));
        assert_eq!(c.libgober_check(), (rat(-1, 2), rat(-1, 2), true));
    }
}
