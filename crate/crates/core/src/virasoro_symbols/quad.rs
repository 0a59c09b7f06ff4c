use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;

use super::symbol::PsiSymbol;
use crate::coh_model::CohModel;
use crate::error::{Error, Result};
use crate::exact_core::{bracket, fmt_rat, int, rat, RatMatrix, Rational};

/// Normal-ordered monomial `ħ^hbar t̃_{t[0]}… ∂_{d[0]}…`; variables are
/// encoded as `m * rank + a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QMono {
    pub hbar: i32,
    pub t: Vec<u32>,
    pub d: Vec<u32>,
}

impl QMono {
    pub fn new(hbar: i32, mut t: Vec<u32>, mut d: Vec<u32>) -> Self {
        t.sort_unstable();
        d.sort_unstable();
        Self { hbar, t, d }
    }

    pub fn scalar() -> Self {
        Self::new(0, vec![], vec![])
    }

    pub fn is_scalar(&self) -> bool {
        self.t.is_empty() && self.d.is_empty()
    }

    fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.t.iter().chain(self.d.iter()).copied()
    }
}

/// Operator quadratic in `t̃` and `∂`, truncated to `t̃_m, ∂_m` with
/// `m ≤ cutoff`; coefficients are exact for monomials whose indices are all
/// at most `trust`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadOperator {
    rank: usize,
    cutoff: u32,
    trust: i64,
    terms: HashMap<QMono, Rational>,
}

impl QuadOperator {
    pub fn zero(rank: usize, cutoff: u32) -> Self {
        Self { rank, cutoff, trust: cutoff as i64, terms: HashMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn trust(&self) -> i64 {
        self.trust
    }

    pub fn var(&self, m: u32, a: usize) -> u32 {
        m * self.rank as u32 + a as u32
    }

    pub fn index_of(&self, v: u32) -> u32 {
        v / self.rank as u32
    }

    pub fn class_of(&self, v: u32) -> usize {
        (v % self.rank as u32) as usize
    }

    fn in_range(&self, m: &QMono) -> bool {
        m.vars().all(|v| self.index_of(v) <= self.cutoff)
    }

    /// Adds `c·m`; monomials beyond the cutoff are dropped.
    pub fn add_term(&mut self, m: QMono, c: Rational) {
        if c.is_zero() || !self.in_range(&m) {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&QMono, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &QMono) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scalar(&self) -> Rational {
        self.coeff(&QMono::scalar())
    }

    /// Largest index spread inside one monomial; bounds how far a
    /// contraction can reach past the monomials being compared.
    pub fn reach(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| {
                let idx: Vec<u32> = m.vars().map(|v| self.index_of(v)).collect();
                match (idx.iter().max(), idx.iter().min()) {
                    (Some(a), Some(b)) => (a - b) as i64,
                    _ => 0,
                }
            })
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self { terms: HashMap::new(), ..self.clone() };
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.trust = self.trust.min(other.trust);
        out.cutoff = self.cutoff.min(other.cutoff);
        for (k, v) in other.terms() {
            out.add_term(k.clone(), v.clone());
        }
        out.terms.retain(|_, v| !v.is_zero());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&int(-1)))
    }

    pub fn add_scalar(&mut self, c: Rational) {
        self.add_term(QMono::scalar(), c);
    }

    /// Monomials with every index at most `w`.
    pub fn within(&self, w: i64) -> impl Iterator<Item = (&QMono, &Rational)> {
        self.terms.iter().filter(move |(m, _)| m.vars().all(|v| self.index_of(v) as i64 <= w))
    }

    /// First (in monomial order) coefficient on which `self` and `other`
    /// disagree inside the window `w`.
    pub fn first_difference(&self, other: &Self, w: i64) -> Option<(QMono, Rational, Rational)> {
        let mut keys: Vec<&QMono> = self.within(w).chain(other.within(w)).map(|(k, _)| k).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|k| (k.clone(), self.coeff(k), other.coeff(k)))
            .find(|(_, a, b)| a != b)
    }

    /// Replaces `t^0_1` by `t̃^0_1 + 1`: reads an operator written in the
    /// original coordinates into shifted ones.
    pub fn shifted_from_plain(&self) -> Self {
        self.substitute_shift(int(1))
    }

    /// The inverse presentation transform, `t̃^0_1 = t^0_1 - 1`.
    pub fn plain_from_shifted(&self) -> Self {
        self.substitute_shift(int(-1))
    }

    fn substitute_shift(&self, c: Rational) -> Self {
        let special = self.var(1, 0);
        let mut out = Self { terms: HashMap::new(), ..self.clone() };
        for (m, v) in self.terms() {
            let hits: Vec<usize> = (0..m.t.len()).filter(|&i| m.t[i] == special).collect();
            // expand (t + c)^j over the occurrences
            for mask in 0u32..(1 << hits.len()) {
                let mut t = m.t.clone();
                let mut coef = v.clone();
                for (bit, &pos) in hits.iter().enumerate().rev() {
                    if mask & (1 << bit) != 0 {
                        t.remove(pos);
                        coef *= &c;
                    }
                }
                out.add_term(QMono::new(m.hbar, t, m.d.clone()), coef);
            }
        }
        out
    }

    fn check_even(&self, model: &CohModel) -> Result<()> {
        if model.has_odd() {
            return Err(Error::Unsupported(
                "operator-level algebra is implemented for models without odd classes".into(),
            ));
        }
        Ok(())
    }

    /// Exact commutator; the trusted window shrinks by the larger reach plus one.
    pub fn commutator(&self, other: &Self) -> Self {
        let rank = self.rank;
        let by_t = index_by(other, |m| &m.t);
        let by_d = index_by(other, |m| &m.d);
        let other_terms: Vec<(&QMono, &Rational)> = other.terms().collect();
        let mine: Vec<(&QMono, &Rational)> = self.terms().collect();
        let acc = mine
            .par_iter()
            .fold(HashMap::<QMono, Rational>::new, |mut acc, (p, cp)| {
                for j in candidates(&by_t, &p.d) {
                    let (q, cq) = other_terms[j];
                    for (m, n) in contractions(p, q) {
                        *acc.entry(m).or_insert_with(Rational::zero) += *cp * cq * int(n);
                    }
                }
                for j in candidates(&by_d, &p.t) {
                    let (q, cq) = other_terms[j];
                    for (m, n) in contractions(q, p) {
                        *acc.entry(m).or_insert_with(Rational::zero) -= *cp * cq * int(n);
                    }
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert_with(Rational::zero) += v;
                }
                a
            });
        let mut out = Self::zero(rank, self.cutoff.min(other.cutoff));
        out.trust = self.trust.min(other.trust) - self.reach().max(other.reach()) - 1;
        for (k, v) in acc {
            out.add_term(k, v);
        }
        out
    }

    pub fn fmt_mono(&self, m: &QMono) -> String {
        let mut parts = Vec::new();
        if m.hbar != 0 {
            parts.push(format!("hbar^{}", m.hbar));
        }
        for &v in &m.t {
            parts.push(format!("t{}_{}", self.class_of(v), self.index_of(v)));
        }
        for &v in &m.d {
            parts.push(format!("d{}_{}", self.class_of(v), self.index_of(v)));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for QuadOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<&QMono> = self.terms.keys().collect();
        keys.sort();
        if keys.is_empty() {
            return write!(f, "0");
        }
        let body: Vec<String> =
            keys.iter().map(|k| format!("{} * {}", fmt_rat(&self.terms[*k]), self.fmt_mono(k))).collect();
        write!(f, "{}", body.join(" + "))
    }
}

fn index_by(op: &QuadOperator, f: impl Fn(&QMono) -> &Vec<u32>) -> HashMap<u32, Vec<usize>> {
    let mut idx: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, (m, _)) in op.terms().enumerate() {
        let mut vs = f(m).clone();
        vs.dedup();
        for v in vs {
            idx.entry(v).or_default().push(i);
        }
    }
    idx
}

fn candidates(idx: &HashMap<u32, Vec<usize>>, vars: &[u32]) -> Vec<usize> {
    let mut out: Vec<usize> = vars.iter().filter_map(|v| idx.get(v)).flatten().copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Terms of `p·q` (normal ordered) with at least one `∂` of `p` contracted
/// against a `t̃` of `q`, with their multiplicities.
fn contractions(p: &QMono, q: &QMono) -> Vec<(QMono, i64)> {
    fn rec(i: usize, p: &QMono, q: &QMono, used_d: &mut Vec<bool>, used_t: &mut Vec<bool>, size: usize, out: &mut HashMap<QMono, i64>) {
        if i == p.d.len() {
            if size == 0 {
                return;
            }
            let t: Vec<u32> = p.t.iter().copied().chain(q.t.iter().enumerate().filter(|(j, _)| !used_t[*j]).map(|(_, v)| *v)).collect();
            let d: Vec<u32> = p.d.iter().enumerate().filter(|(j, _)| !used_d[*j]).map(|(_, v)| *v).chain(q.d.iter().copied()).collect();
            *out.entry(QMono::new(p.hbar + q.hbar, t, d)).or_insert(0) += 1;
            return;
        }
        rec(i + 1, p, q, used_d, used_t, size, out);
        for j in 0..q.t.len() {
            if !used_t[j] && q.t[j] == p.d[i] {
                used_t[j] = true;
                used_d[i] = true;
                rec(i + 1, p, q, used_d, used_t, size + 1, out);
                used_t[j] = false;
                used_d[i] = false;
            }
        }
    }
    let mut out = HashMap::new();
    rec(0, p, q, &mut vec![false; p.d.len()], &mut vec![false; q.t.len()], 0, &mut out);
    out.into_iter().collect()
}

/// `L_k` assembled literally from its defining formula in the original
/// coordinates, then rewritten in shifted coordinates. `s` selects the
/// grading `μ_s`.
pub fn build_lk_direct(model: &CohModel, k: i32, cutoff: u32, s: &Rational) -> Result<QuadOperator> {
    assert!(k >= -1, "L_k is defined for k >= -1");
    let n = model.rank();
    let mu = model.mu(s);
    let eta_inv = model.eta_inverse()?;
    let half = rat(1, 2);
    let r = model.dim as i64;
    let mut op = QuadOperator::zero(n, cutoff);
    let mut rpow = RatMatrix::identity(n);
    for i in 0..=(k + 1) {
        // the bracket is evaluated at the grading of the class R^i acts on,
        // which is contracted with the first derivative through η⁻¹
        for m in (i - k)..=-1 {
            let sign = if m.rem_euclid(2) == 0 { int(1) } else { int(-1) };
            for a in 0..n {
                let br = bracket(&(mu.get(a, a) + int(m as i64) + &half), k as i64, i as i64)?;
                for c in 0..n {
                    let e = eta_inv.get(c, a);
                    if e.is_zero() {
                        continue;
                    }
                    for b in 0..n {
                        let r = rpow.get(b, a);
                        if r.is_zero() {
                            continue;
                        }
                        let x = op.var((-m - 1) as u32, c);
                        let y = op.var((m + k - i) as u32, b);
                        op.add_term(QMono::new(1, vec![], vec![x, y]), &half * &sign * &br * e * r);
                    }
                }
            }
        }
        if k - i + 1 >= 0 {
            let br = bracket(&rat(3 - r, 2), k as i64, i as i64)?;
            for b in 0..n {
                let c = rpow.get(b, 0);
                if !c.is_zero() {
                    op.add_term(QMono::new(0, vec![], vec![op.var((k - i + 1) as u32, b)]), -(&br * c));
                }
            }
        }
        for m in 0..=cutoff as i32 {
            if m + k - i < 0 {
                continue;
            }
            for a in 0..n {
                let br = bracket(&(mu.get(a, a) + int(m as i64) + &half), k as i64, i as i64)?;
                for b in 0..n {
                    let c = rpow.get(b, a);
                    if c.is_zero() {
                        continue;
                    }
                    let x = op.var(m as u32, a);
                    let y = op.var((m + k - i) as u32, b);
                    op.add_term(QMono::new(0, vec![x], vec![y]), &br * c);
                }
            }
        }
        rpow = &rpow * &model.c1;
    }
    let lowered = &model.eta * &model.c1.pow((k + 1) as u32);
    for a in 0..n {
        for b in 0..n {
            let c = lowered.get(a, b);
            if !c.is_zero() {
                op.add_term(QMono::new(-1, vec![op.var(0, a), op.var(0, b)], vec![]), &half * c);
            }
        }
    }
    if k == 0 {
        op.add_scalar(model.rho());
    }
    Ok(op.shifted_from_plain())
}

/// Section of the symbol map, producing an operator in shifted
/// coordinates. Signs of the `∂∂` and `t̃t̃` blocks are those forced by the
/// defining identity `σ(δ)φ + [δ,φ] = 0` (see the free-field check).
pub fn sigma_inverse(model: &CohModel, sym: &PsiSymbol, cutoff: u32) -> Result<QuadOperator> {
    sigma_inverse_with(model, sym, cutoff, false)
}

/// The section with the alternating signs `(-1)^m` attached to the first
/// index of each quadratic block, kept to exhibit that this variant fails
/// the free-field identity for even `k`.
pub fn sigma_inverse_literal_signs(model: &CohModel, sym: &PsiSymbol, cutoff: u32) -> Result<QuadOperator> {
    sigma_inverse_with(model, sym, cutoff, true)
}

fn sigma_inverse_with(model: &CohModel, sym: &PsiSymbol, cutoff: u32, literal: bool) -> Result<QuadOperator> {
    let n = model.rank();
    let eta_inv = model.eta_inverse()?;
    let half = rat(1, 2);
    let mut op = QuadOperator::zero(n, cutoff);
    let parity = |e: i32| if e.rem_euclid(2) == 0 { int(1) } else { int(-1) };
    for (k, f) in sym.terms() {
        for m in (-k).max(0)..=cutoff as i32 {
            if m + k > cutoff as i32 {
                break;
            }
            let fm = f.eval(&(int(m as i64) + &half));
            for c in 0..n {
                for a in 0..n {
                    let v = fm.get(c, a);
                    if !v.is_zero() {
                        op.add_term(QMono::new(0, vec![op.var((m + k) as u32, a)], vec![op.var(m as u32, c)]), -v.clone());
                    }
                }
            }
        }
        for q in 0..(-k).max(0) {
            let nn = -k - 1 - q;
            let sign = if literal { parity(q) } else { parity(nn) };
            let block = &f.eval(&(int(q as i64) + &half)) * &eta_inv;
            for c in 0..n {
                for b in 0..n {
                    let v = block.get(c, b);
                    if !v.is_zero() {
                        let mono = QMono::new(1, vec![], vec![op.var(q as u32, c), op.var(nn as u32, b)]);
                        op.add_term(mono, &half * &sign * v);
                    }
                }
            }
        }
        for p in 0..k.max(0) {
            let nn = k - p - 1;
            let sign = if literal { parity(nn + 1) } else { parity(p + 1) };
            let block = &model.eta * &f.eval(&(int(-p as i64) - &half));
            for d in 0..n {
                for a in 0..n {
                    let v = block.get(d, a);
                    if !v.is_zero() {
                        let mono = QMono::new(-1, vec![op.var(p as u32, d), op.var(nn as u32, a)], vec![]);
                        op.add_term(mono, &half * &sign * v);
                    }
                }
            }
        }
    }
    Ok(op)
}

/// `[A, B]` for operators attached to `model`; odd models are rejected.
pub fn quad_commutator(model: &CohModel, a: &QuadOperator, b: &QuadOperator) -> Result<QuadOperator> {
    a.check_even(model)?;
    Ok(a.commutator(b))
}

pub(crate) fn ensure_even(model: &CohModel) -> Result<()> {
    QuadOperator::zero(1, 0).check_even(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coh_model::builtin;
    use crate::virasoro_symbols::symbol_virasoro_check;

    #[test]
    fn lowest_operators() {
        let m = builtin("P1").unwrap();
        let z = Rational::zero();
        let cutoff = 5;
        let lm = build_lk_direct(&m, -1, cutoff, &z).unwrap().plain_from_shifted();
        let mut expect = QuadOperator::zero(2, cutoff);
        expect.add_term(QMono::new(0, vec![], vec![0]), int(-1));
        for mm in 1..=cutoff {
            for a in 0..2 {
                expect.add_term(QMono::new(0, vec![expect.var(mm, a)], vec![expect.var(mm - 1, a)]), int(1));
            }
        }
        expect.add_term(QMono::new(-1, vec![0, 1], vec![]), int(1));
        assert_eq!(lm.first_difference(&expect, cutoff as i64), None);

        // σ⁻¹(∂) is -L_{-1} in shifted coordinates
        let sec = sigma_inverse(&m, &PsiSymbol::d_power(2, 1), cutoff).unwrap();
        let shifted = build_lk_direct(&m, -1, cutoff, &z).unwrap();
        assert_eq!(sec.first_difference(&shifted.scale(&int(-1)), cutoff as i64), None);
        assert!(sigma_inverse(&m, &PsiSymbol::zero(2), cutoff).unwrap().is_empty());

        let pt = builtin("point").unwrap();
        let l0 = build_lk_direct(&pt, 0, cutoff, &z).unwrap().plain_from_shifted();
        assert_eq!(l0.coeff(&QMono::new(0, vec![], vec![1])), rat(-3, 2));
        assert_eq!(l0.coeff(&QMono::new(0, vec![3], vec![3])), rat(7, 2));
        assert_eq!(l0.scalar(), rat(1, 16));
    }

    #[test]
    fn small_commutators() {
        let m = builtin("P2").unwrap();
        let z = Rational::zero();
        let l0 = build_lk_direct(&m, 0, 10, &z).unwrap();
        let lm = build_lk_direct(&m, -1, 10, &z).unwrap();
        let c = quad_commutator(&m, &l0, &lm).unwrap();
        assert_eq!(c.first_difference(&lm, c.trust()), None);
        assert!(c.trust() >= 8);
        let l2 = build_lk_direct(&m, 2, 10, &z).unwrap();
        assert!(l2.commutator(&l2).is_empty());
        assert!(quad_commutator(&builtin("C2").unwrap(), &l0, &lm).is_err());
    }

    #[test]
    fn symbol_relations_on_projective_spaces() {
        for name in ["point", "P1", "P2", "P3"] {
            let m = builtin(name).unwrap();
            for l in symbol_virasoro_check(&m, 5, &Rational::zero()) {
                assert!(l.pass, "{name}: {l}");
            }
        }
    }
}
