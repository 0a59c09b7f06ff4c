//! Second, independent route to the point correlators through the KdV
//! hierarchy, plus jet-level checks of the KdV/Virasoro relationship.
//!
//! The correlator recursion used here is the coefficient form of
//! `(k+1/2) ∂₀²<<τ_k>> = K ∂₀<<τ_{k-1}>>` (ħ-expanded, `u = ħ<<τ₀²>>`):
//!
//! ```text
//! (k+1/2) <τ₀²τ_k S>_g = 1/8 <τ₀⁴τ_{k-1} S>_{g-1}
//!     + Σ_h Σ_{A⊔B=S} ( <τ₀²A>_h <τ₀²τ_{k-1}B>_{g-h} + 1/2 <τ₀³A>_h <τ₀τ_{k-1}B>_{g-h} )
//! ```
//!
//! Keys with fewer than two `τ₀` are reached from it through the string and
//! dilaton equations only; the Virasoro recursion is never consulted.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use num_traits::Zero;
use parking_lot::RwLock;

use crate::diffalg::DiffPoly;
use crate::error::{Error, Result};
use crate::exact_core::{int, rat, Rational};
use crate::gelfand_dikii::gd;
use crate::jet::Jet;
use crate::point_correlators::{
    correlator_jet, dilaton_reduce, splittings, string_reduce, Coords, Reduction, TauKey,
};

/// Truncation of jets: total degree, largest variable index, largest genus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub degree: i32,
    pub indices: usize,
    pub genus: u32,
}

impl Truncation {
    pub fn new(degree: i32, indices: usize, genus: u32) -> Self {
        Self { degree, indices, genus }
    }
}

/// Memo for the KdV route.
#[derive(Debug, Default)]
pub struct KdvStore {
    memo: RwLock<HashMap<TauKey, Rational>>,
}

thread_local! {
    static IN_PROGRESS: RefCell<HashSet<TauKey>> = RefCell::new(HashSet::new());
}

fn global() -> &'static KdvStore {
    static STORE: OnceLock<KdvStore> = OnceLock::new();
    STORE.get_or_init(KdvStore::default)
}

/// Correlator computed through the KdV recursion; the truncation must expose
/// the requested coefficient.
pub fn kdv_route_tau(key: &TauKey, trunc: Truncation) -> Result<Rational> {
    let max_k = key.ks.iter().copied().max().unwrap_or(0) as usize;
    if (trunc.degree as i64) < key.n() as i64 || trunc.indices < max_k || trunc.genus < key.genus {
        return Err(Error::TruncationTooSmall(format!(
            "{key} needs degree >= {}, indices >= {max_k}, genus >= {}",
            key.n(),
            key.genus
        )));
    }
    Ok(global().tau(key))
}

impl KdvStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tau(&self, key: &TauKey) -> Rational {
        if !key.dimension_ok() || !key.is_stable() {
            return Rational::zero();
        }
        if let Some(v) = self.memo.read().get(key) {
            return v.clone();
        }
        let fresh = IN_PROGRESS.with(|s| s.borrow_mut().insert(key.clone()));
        assert!(fresh, "KdV recursion revisited {key}");
        let v = self.compute(key);
        IN_PROGRESS.with(|s| s.borrow_mut().remove(key));
        self.memo.write().insert(key.clone(), v.clone());
        v
    }

    fn t(&self, g: u32, ks: Vec<u32>) -> Rational {
        self.tau(&TauKey::new(g, ks))
    }

    fn eval(&self, r: &Reduction) -> Rational {
        r.terms.iter().fold(r.constant.clone(), |acc, (c, k)| acc + c * self.tau(k))
    }

    fn compute(&self, key: &TauKey) -> Rational {
        let zeros = key.ks.iter().filter(|&&k| k == 0).count();
        if key.genus == 0 && key.ks == [0, 0, 0] {
            return int(1);
        }
        if key.genus == 1 && key.ks == [1] {
            return rat(1, 24);
        }
        if zeros >= 2 {
            let k = *key.ks.last().expect("nonempty");
            let mut s = key.ks.clone();
            s.remove(0);
            s.remove(0);
            s.pop();
            return self.kdv_rhs(key.genus, k, &s, false) / (int(k as i64) + rat(1, 2));
        }
        if zeros == 1 {
            return self.eval(&string_reduce(key).expect("stable key reduces"));
        }
        if key.ks.contains(&1) {
            return self.eval(&dilaton_reduce(key).expect("stable key reduces"));
        }
        self.reverse_string(key)
    }

    /// Right side of the coefficient identity for `<τ₀²τ_k S>_g`, optionally
    /// omitting the `h = 0, A = ∅` term `1/2 <τ₀³>_0 <τ₀τ_{k-1}S>_g`.
    fn kdv_rhs(&self, g: u32, k: u32, s: &[u32], omit_self: bool) -> Rational {
        let mut rhs = Rational::zero();
        if g > 0 {
            let mut ks = vec![0, 0, 0, 0, k - 1];
            ks.extend_from_slice(s);
            rhs += self.t(g - 1, ks) / int(8);
        }
        for (a, b, w) in splittings(s) {
            for h in 0..=g {
                let mut a2 = vec![0, 0];
                a2.extend_from_slice(&a);
                let mut b2 = vec![0, 0, k - 1];
                b2.extend_from_slice(&b);
                rhs += &w * self.product(h, a2, g - h, b2);

                if omit_self && h == 0 && a.is_empty() {
                    continue;
                }
                let mut a3 = vec![0, 0, 0];
                a3.extend_from_slice(&a);
                let mut b3 = vec![0, k - 1];
                b3.extend_from_slice(&b);
                rhs += &w * self.product(h, a3, g - h, b3) / int(2);
            }
        }
        rhs
    }

    /// Product of two correlators, evaluating the genus-0 factor first so
    /// that vanishing factors short-circuit before any deeper recursion.
    fn product(&self, g1: u32, k1: Vec<u32>, g2: u32, k2: Vec<u32>) -> Rational {
        let (first, second) = if g2 == 0 && g1 != 0 { ((g2, k2), (g1, k1)) } else { ((g1, k1), (g2, k2)) };
        let f = self.t(first.0, first.1);
        if f.is_zero() {
            return f;
        }
        f * self.t(second.0, second.1)
    }

    /// Keys with every index at least two: the string equation applied twice
    /// to `<τ₀²τ_{a+2}T>` and once to `<τ₀τ_{a+1}T>`, combined with the KdV
    /// identity for `<τ₀²τ_{a+2}T>`, gives a linear equation for `<τ_a T>`.
    fn reverse_string(&self, key: &TauKey) -> Rational {
        let g = key.genus;
        let a = *key.ks.last().expect("nonempty");
        let t: Vec<u32> = key.ks[..key.ks.len() - 1].to_vec();

        let mut single = Rational::zero();
        for j in 0..t.len() {
            let mut ks = t.clone();
            ks[j] -= 1;
            ks.push(a + 1);
            single += self.t(g, ks);
        }
        let mut double = Rational::zero();
        for j in 0..t.len() {
            for l in 0..t.len() {
                let mut ks = t.clone();
                if ks[j] == 0 {
                    continue;
                }
                ks[j] -= 1;
                if ks[l] == 0 {
                    continue;
                }
                ks[l] -= 1;
                ks.push(a + 2);
                double += self.t(g, ks);
            }
        }
        let p = int(2) * &single + double;
        let q = self.kdv_rhs(g, a + 2, &t, true);
        let lhs = int(a as i64 + 2);
        (q + single / int(2) - (int(a as i64 + 2) + rat(1, 2)) * p) / lhs
    }
}

/// Substitutes jets `u^(i)` into a differential polynomial.
pub fn eval_diffpoly(p: &DiffPoly, jets: &dyn Fn(u32) -> Jet, proto: &Jet) -> Jet {
    let mut out = Jet::zero(proto.nvars(), proto.deg_trust(), proto.aux_trust());
    for (m, c) in p.terms() {
        let mut acc = Jet::aux_monomial(proto.nvars(), proto.deg_trust(), proto.aux_trust(), 0, c.clone());
        for &j in m.jets() {
            acc = acc.mul(&jets(j));
        }
        out = out.add(&acc.shift_aux(m.hbar() as i32));
    }
    out
}

/// `ħ<<τ_m τ₀>> - R_{m+1}(u)` with `u = ħ<<τ₀²>>`.
pub fn witten_residual(m: u32, trunc: Truncation) -> Result<Jet> {
    let nv = trunc.indices + 1;
    let d = trunc.degree;
    let g = trunc.genus;
    let lhs = correlator_jet(&[m, 0], g, nv, d, Coords::Raw).shift_aux(1);
    let u_jet = |i: u32| correlator_jet(&vec![0; i as usize + 2], g, nv, d, Coords::Raw).shift_aux(1);
    let rhs = eval_diffpoly(&gd(m as usize + 1)?, &u_jet, &lhs);
    Ok(lhs.sub(&rhs))
}

/// Jets in rescaled coordinates used by the DVV checks.
struct SigmaJets {
    nv: usize,
    deg: i32,
    g: u32,
}

impl SigmaJets {
    fn one(&self, i: i64) -> Jet {
        if i < 0 {
            return Jet::zero(self.nv, self.deg, self.g as i32 - 1);
        }
        correlator_jet(&[i as u32], self.g, self.nv, self.deg, Coords::Rescaled)
    }

    fn two(&self, i: i64, j: i64) -> Jet {
        if i < 0 || j < 0 {
            return Jet::zero(self.nv, self.deg, self.g as i32 - 1);
        }
        correlator_jet(&[i as u32, j as u32], self.g, self.nv, self.deg, Coords::Rescaled)
    }

    fn u(&self) -> Jet {
        correlator_jet(&[0, 0], self.g, self.nv, self.deg, Coords::Rescaled).shift_aux(1)
    }

    fn hbar(&self, c: Rational) -> Jet {
        Jet::aux_monomial(self.nv, self.deg + 8, self.g as i32 + 8, 1, c)
    }

    fn constant(&self, c: Rational) -> Jet {
        Jet::constant(self.nv, self.deg + 8, self.g as i32 + 8, c)
    }

    fn d(&self, j: &Jet, n: usize) -> Jet {
        j.derivative_n(0, n)
    }

    /// `K ∂ f`.
    fn k_d(&self, f: &Jet) -> Jet {
        let u = self.u();
        let df = self.d(f, 1);
        let a = self.hbar(rat(1, 8)).mul(&self.d(f, 4));
        let b = u.mul(&self.d(f, 2));
        let c = self.d(&u, 1).mul(&df).scale(&rat(1, 2));
        a.add(&b).add(&c)
    }

    /// `s̃_m = s_m - 2/3 δ_{m,1}`.
    fn s_tilde(&self, m: usize) -> Jet {
        let v = Jet::variable(self.nv, self.deg + 8, self.g as i32 + 8, m);
        if m == 1 {
            v.sub(&self.constant(rat(2, 3)))
        } else {
            v
        }
    }

    /// `Σ_m (m+1/2) s̃_m <<σ_{m+k}>>` over the slice.
    fn linear_part(&self, k: i64) -> Jet {
        let mut acc = Jet::zero(self.nv, self.deg, self.g as i32 - 1);
        for m in 0..self.nv {
            let term = self.s_tilde(m).mul(&self.one(m as i64 + k)).scale(&rat(2 * m as i64 + 1, 2));
            acc = acc.add(&term);
        }
        acc
    }

    /// Sum over `i + j = n` of `f(i, j)`.
    fn pair_sum(&self, n: i64, f: impl Fn(i64, i64) -> Jet) -> Jet {
        let mut acc = Jet::zero(self.nv, self.deg + 8, self.g as i32 + 8);
        for i in 0..=n.max(-1) {
            acc = acc.add(&f(i, n - i));
        }
        acc
    }

    /// The constraint `z_k` in rescaled coordinates (k ≥ -1).
    fn z(&self, k: i64) -> Jet {
        let lin = self.linear_part(k);
        if k == -1 {
            let s0 = Jet::variable(self.nv, self.deg + 8, self.g as i32 + 8, 0);
            let quad = s0.mul(&s0).shift_aux(-1).scale(&rat(1, 2));
            return lin.add(&quad);
        }
        let q = self.pair_sum(k - 1, |i, j| self.two(i, j).add(&self.one(i).mul(&self.one(j))));
        lin.add(&self.hbar(rat(1, 8)).mul(&q))
    }
}

fn sigma_jets(trunc: Truncation, extra: i32) -> SigmaJets {
    SigmaJets { nv: trunc.indices + 1, deg: trunc.degree + extra, g: trunc.genus }
}

/// `∂K∂z_{k-1} - ∂³z_k`, which vanishes for solutions of the KdV hierarchy.
pub fn dvv_residual(k: i64, trunc: Truncation) -> Jet {
    let s = sigma_jets(trunc, 5);
    let lhs = s.d(&s.k_d(&s.z(k - 1)), 1);
    let rhs = s.d(&s.z(k), 3);
    lhs.sub(&rhs)
}

/// Residuals of the intermediate identities in the proof that the KdV
/// recursion implies `∂K∂z_{k-1} = ∂³z_k` (k ≥ 1).
pub fn dvv_intermediates(k: i64, trunc: Truncation) -> Vec<(String, Jet)> {
    assert!(k >= 1, "intermediate identities are stated for k >= 1");
    let s = sigma_jets(trunc, 6);
    let h = |c: Rational| s.hbar(c);
    let d = |j: &Jet, n: usize| s.d(j, n);
    let u = s.u();
    let phi = |i: i64| s.one(i);

    // I
    let i_lhs = d(&s.linear_part(k), 2);
    let i_rhs = s
        .k_d(&s.linear_part(k - 1))
        .add(&d(&phi(k), 1))
        .sub(
            &h(rat(1, 4))
                .mul(&d(&phi(k - 1), 3))
                .add(&u.mul(&d(&phi(k - 1), 1)))
                .add(&d(&u, 1).mul(&phi(k - 1)).scale(&rat(1, 4))),
        );
    // II
    let ii_lhs = d(&s.pair_sum(k - 1, |i, j| s.two(i, j)), 2);
    let ii_rhs = s
        .k_d(&s.pair_sum(k - 2, |i, j| s.two(i, j)))
        .add(&d(&phi(k - 1), 3))
        .add(&s.pair_sum(k - 2, |i, j| {
            h(rat(1, 2))
                .mul(&d(&phi(i), 1))
                .mul(&d(&phi(j), 3))
                .add(&h(int(1)).mul(&d(&phi(i), 2)).mul(&d(&phi(j), 2)))
        }));
    // III
    let iii_lhs = d(&s.pair_sum(k - 1, |i, j| phi(i).mul(&phi(j))), 2);
    let iii_rhs = s
        .k_d(&s.pair_sum(k - 2, |i, j| phi(i).mul(&phi(j))))
        .add(&d(&u, 1).mul(&phi(k - 1)).shift_aux(-1).scale(&int(2)))
        .add(&s.pair_sum(k - 1, |i, j| d(&phi(i), 1).mul(&d(&phi(j), 1))).scale(&int(2)))
        .sub(&s.pair_sum(k - 2, |i, j| {
            h(int(1))
                .mul(&d(&phi(i), 1))
                .mul(&d(&phi(j), 3))
                .add(&h(rat(3, 4)).mul(&d(&phi(i), 2)).mul(&d(&phi(j), 2)))
                .add(&u.mul(&d(&phi(i), 1)).mul(&d(&phi(j), 1)).scale(&int(2)))
        }));
    // a and b
    let a = d(&phi(k), 1)
        .sub(&h(rat(1, 8)).mul(&d(&phi(k - 1), 3)).add(&u.mul(&d(&phi(k - 1), 1))))
        .add(&h(rat(1, 4)).mul(&s.pair_sum(k - 1, |i, j| d(&phi(i), 1).mul(&d(&phi(j), 1)))));
    let b = h(rat(-1, 2)).mul(&s.pair_sum(k - 2, |i, j| {
        h(rat(1, 8))
            .mul(&d(&phi(i), 1))
            .mul(&d(&phi(j), 3))
            .sub(&h(rat(1, 16)).mul(&d(&phi(i), 2)).mul(&d(&phi(j), 2)))
            .add(&u.mul(&d(&phi(i), 1)).mul(&d(&phi(j), 1)).scale(&rat(1, 2)))
    }));
    let split = d(&s.z(k), 2).sub(&s.k_d(&s.z(k - 1))).sub(&a.add(&b));
    let da = d(&a, 1).sub(&h(rat(1, 2)).mul(&s.pair_sum(k - 2, |i, j| d(&phi(i), 1).mul(&d(&phi(j + 1), 2)))));
    let db = d(&b, 1).add(&h(rat(1, 2)).mul(&s.pair_sum(k - 2, |i, j| d(&phi(i), 1).mul(&s.k_d(&phi(j))))));
    let dab = d(&a.add(&b), 1);

    let narrow = |j: Jet| j.restrict(trunc.degree, trunc.genus as i32 - 1);
    vec![
        ("I".to_string(), narrow(i_lhs.sub(&i_rhs))),
        ("II".to_string(), narrow(ii_lhs.sub(&ii_rhs))),
        ("III".to_string(), narrow(iii_lhs.sub(&iii_rhs))),
        ("d2z-Kdz=a+b".to_string(), narrow(split)),
        ("da".to_string(), narrow(da)),
        ("db".to_string(), narrow(db)),
        ("d(a+b)=0".to_string(), narrow(dab)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_correlators::tau;

    #[test]
    fn route_values() {
        let tr = Truncation::new(6, 6, 3);
        assert_eq!(kdv_route_tau(&TauKey::new(2, vec![4]), tr).unwrap(), rat(1, 1152));
        assert_eq!(kdv_route_tau(&TauKey::new(0, vec![0, 0, 0]), tr).unwrap(), int(1));
        assert_eq!(kdv_route_tau(&TauKey::new(1, vec![1]), tr).unwrap(), rat(1, 24));
        assert!(kdv_route_tau(&TauKey::new(2, vec![4]), Truncation::new(1, 3, 2)).is_err());
    }

    #[test]
    fn routes_agree_small() {
        let store = KdvStore::new();
        for (g, ks) in [(2u32, vec![2u32, 3]), (2, vec![2, 2, 2]), (3, vec![7]), (3, vec![2, 2, 3, 5])] {
            let key = TauKey::new(g, ks);
            assert_eq!(store.tau(&key), tau(&key), "{key}");
        }
    }

    #[test]
    fn witten_small() {
        for m in 0..=2 {
            let r = witten_residual(m, Truncation::new(4, 4, 2)).unwrap();
            assert!(r.is_zero(), "m={m}: {r}");
        }
    }

    #[test]
    fn dvv_small() {
        for k in 0..=2 {
            let r = dvv_residual(k, Truncation::new(2, 3, 2));
            assert!(r.is_zero(), "k={k}: {r}");
            assert!(r.deg_trust() >= 2);
        }
    }
}

#[cfg(test)]
mod intermediate_tests {
    use super::*;

    #[test]
    fn intermediates_vanish() {
        for k in 1..=3 {
            for (name, r) in dvv_intermediates(k, Truncation::new(2, 3, 2)) {
                assert!(r.is_zero(), "k={k} {name}: {r}");
            }
        }
    }
}
