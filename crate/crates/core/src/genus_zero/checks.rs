use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{Genus0, JetMat, LaurentJetSeries};
use crate::constraint_eval::Ins;
use crate::error::{Error, Result};
use crate::exact_core::{fmt_rat, int, rat, RatMatrix, Rational};
use crate::jet::Jet;
use crate::report::CheckLine;

fn describe(j: &Jet) -> String {
    match j.first_term() {
        Some((m, c)) => format!("{} at q^{} t^{:?}", fmt_rat(c), m.aux, m.exps),
        None => "0".into(),
    }
}

fn first_bad(s: &LaurentJetSeries, expected: impl Fn(i32) -> Option<JetMat>) -> Option<String> {
    for (p, c) in s.powers() {
        let r = match expected(p) {
            Some(e) => c.sub(&e),
            None => c.clone(),
        };
        if let Some((i, j, jet)) = r.first_nonzero() {
            return Some(format!("ζ^{p} entry ({i},{j}): {}", describe(jet)));
        }
    }
    None
}

fn line(name: &str, bad: Option<String>, ok_detail: String) -> CheckLine {
    match bad {
        None => CheckLine::new(name, true, ok_detail),
        Some(b) => CheckLine::new(name, false, b),
    }
}

/// Runs `f` over `items` in parallel and returns the first failure in input order.
fn first_failure<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<Option<String>> + Sync + Send) -> Result<Option<String>> {
    let out: Vec<Option<String>> = items.par_iter().map(&f).collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().next())
}

/// Coefficient of `q⁰t⁰`.
fn at_origin(j: &Jet) -> Rational {
    j.coeff_of(0, &vec![0; j.nvars()]).unwrap_or_else(|| int(0))
}

/// Values at `t = 0` in Novikov degree zero: Θ's ζ⁻¹ coefficient vanishes
/// and θ reduces to its `t̃` tail.
pub fn theta_basics(g0: &Genus0) -> Result<Vec<CheckLine>> {
    let big = g0.big_theta()?;
    let u = big.coeff(-1).expect("depth at least one");
    let mut bad = None;
    for i in 0..g0.rank() {
        for j in 0..g0.rank() {
            let v = at_origin(u.get(i, j));
            if v != int(0) && bad.is_none() {
                bad = Some(format!("Θ ζ^-1 entry ({i},{j}) at t=0 is {}", fmt_rat(&v)));
            }
        }
    }
    let theta = g0.theta()?;
    for (p, c) in theta.powers() {
        for a in 0..g0.rank() {
            let v = at_origin(c.get(a, 0));
            let want = if p == 1 && a == g0.unit() { int(1) } else { int(0) };
            if v != want && bad.is_none() {
                bad = Some(format!("θ ζ^{p} component {a} at t=0 is {}", fmt_rat(&v)));
            }
        }
    }
    Ok(vec![line("genus0 theta at origin", bad, "Θ = I + O(ζ⁻²), θ = ζ·1".into())])
}

/// `Θ^a_b = ∂_{0,b} θ^a` on every certified coefficient.
pub fn nabla_theta_check(g0: &Genus0) -> Result<Vec<CheckLine>> {
    let theta = g0.theta()?;
    let big = g0.big_theta()?;
    let mut bad = None;
    for (p, c) in big.powers() {
        let Some(th) = theta.coeff(p) else { continue };
        for a in 0..g0.rank() {
            for b in 0..g0.rank() {
                let d = th.get(a, 0).derivative(g0.var(0, b));
                let r = c.get(a, b).sub(&d);
                if !r.is_zero() && bad.is_none() {
                    bad = Some(format!("ζ^{p} entry ({a},{b}): {}", describe(&r)));
                }
            }
        }
    }
    Ok(vec![line("genus0 Θ = ∇θ", bad, format!("{} powers", big.powers().count()))])
}

/// `Θ(ζ)Θ*(-ζ) = I`, and the bilinear identity behind it.
pub fn invert_check(g0: &Genus0) -> Result<Vec<CheckLine>> {
    let big = g0.big_theta()?;
    let star = g0.adjoint(&big).reflect();
    let prod = big.mul(&star);
    let id = JetMat::from_rat(&RatMatrix::identity(g0.rank()), g0.shape());
    let bad = first_bad(&prod, |p| (p == 0).then(|| id.clone()));
    let mut lines = vec![line(
        "genus0 invert ΘΘ*(-ζ)=I",
        bad,
        format!("ζ^0..ζ^{} at degree {}", prod.lo(), g0.shape().degree),
    )];
    lines.extend(bilinear_check(g0, g0.truncation().indices)?);
    Ok(lines)
}

/// `η^{ef}⟨⟨τ_{k,a}τ_{0,e}⟩⟩⟨⟨τ_{0,f}τ_{l,b}⟩⟩ = ⟨⟨τ_{k,a}τ_{l+1,b}⟩⟩ + ⟨⟨τ_{k+1,a}τ_{l,b}⟩⟩`.
pub fn bilinear_check(g0: &Genus0, levels: usize) -> Result<Vec<CheckLine>> {
    let n = g0.rank();
    let mut tuples = Vec::new();
    for k in 0..levels as u32 {
        for l in 0..levels as u32 {
            for a in 0..n {
                for b in 0..n {
                    tuples.push((k, a, l, b));
                }
            }
        }
    }
    let eta_inv = g0.eta_inv();
    let bad = first_failure(&tuples, |&(k, a, l, b)| {
        let mut r = g0.corr(&[(k, a), (l + 1, b)])?.add(&g0.corr(&[(k + 1, a), (l, b)])?).scale(&int(-1));
        for e in 0..n {
            for f in 0..n {
                let c = eta_inv.get(e, f);
                if *c != int(0) {
                    let p = g0.corr(&[(k, a), (0, e)])?.mul(&g0.corr(&[(0, f), (l, b)])?);
                    r = r.add(&p.scale(c));
                }
            }
        }
        Ok((!r.is_zero()).then(|| format!("k={k} a={a} l={l} b={b}: {}", describe(&r))))
    })?;
    Ok(vec![line("genus0 bilinear identity", bad, format!("{} index tuples", tuples.len()))])
}

/// `G(ζ) = θ*(-ζ)Θ(ζ)`, a row covector series.
pub fn g_series(g0: &Genus0) -> Result<LaurentJetSeries> {
    let theta = g0.theta()?;
    let big = g0.big_theta()?;
    Ok(g0.lower(&theta).reflect().mul(&big))
}

/// `G[n] = 0` for `nmin ≤ n ≤ 0`.
pub fn g_vanish_check(g0: &Genus0, nmin: i32) -> Result<Vec<CheckLine>> {
    let g = g_series(g0)?;
    if g.lo() > nmin {
        return Err(Error::TruncationTooSmall(format!(
            "G is certified only down to ζ^{}, {} was requested",
            g.lo(),
            nmin
        )));
    }
    let mut bad = None;
    for n in nmin..=0 {
        let c = g.coeff(n).expect("in window");
        if let Some((_, j, jet)) = c.first_nonzero() {
            bad = Some(format!("G[{n}] component {j}: {}", describe(jet)));
            break;
        }
    }
    Ok(vec![line("genus0 G[n]=0", bad, format!("{nmin} ≤ n ≤ 0"))])
}

/// The Faber-Pandharipande combinations for `1 ≤ ℓ ≤ lmax`.
pub fn fp_check(g0: &Genus0, lmax: u32) -> Result<Vec<CheckLine>> {
    let n = g0.rank();
    let eta_inv = g0.eta_inv();
    let top = g0.truncation().indices.max(2);
    let mut out = Vec::new();
    for l in 1..=lmax as i64 {
        let mut acc = g0.shape().zero();
        for m in 0..top {
            for a in 0..n {
                let t = g0.t_tilde(m, a);
                if !t.is_zero() {
                    acc = acc.add(&t.mul(&g0.corr(&[((m as i64 + 2 * l - 1) as u32, a)])?));
                }
            }
        }
        for m in (1 - 2 * l)..=-1 {
            let sign = if m.rem_euclid(2) == 1 { rat(-1, 2) } else { rat(1, 2) };
            for a in 0..n {
                for b in 0..n {
                    let c = eta_inv.get(a, b);
                    if *c == int(0) {
                        continue;
                    }
                    let p = g0
                        .corr(&[((-m - 1) as u32, a)])?
                        .mul(&g0.corr(&[((m + 2 * l - 1) as u32, b)])?);
                    acc = acc.add(&p.scale(&(c * &sign)));
                }
            }
        }
        let bad = (!acc.is_zero()).then(|| describe(&acc));
        out.push(line(&format!("genus0 FP l={l}"), bad, format!("degree {}", acc.deg_trust())));
    }
    Ok(out)
}

/// `U = η⁻¹⟨⟨τ₀τ₀⟩⟩₀` and `V = U + R + [μ, U]`.
pub fn uv_matrices(g0: &Genus0) -> Result<(JetMat, JetMat)> {
    let n = g0.rank();
    let mut lower = JetMat::zero(n, n, g0.shape());
    for c in 0..n {
        for b in 0..n {
            lower.set(c, b, g0.corr(&[(0, c), (0, b)])?);
        }
    }
    let u = lower.lmul_rat(g0.eta_inv());
    let mu = g0.model().mu0();
    let r = JetMat::from_rat(&g0.model().c1, g0.shape());
    let v = u.add(&r).add(&u.lmul_rat(&mu)).sub(&u.rmul_rat(&mu));
    Ok((u, v))
}

/// `A_{k,i}` for `0 ≤ i ≤ k+1`, from `A_{-1,i} = δ_{i,0}` and
/// `A_{k,i} = (μ+½-i)A_{k-1,i-1} + V A_{k-1,i}`.
pub fn a_matrices(mu: &RatMatrix, v: &JetMat, k: i32) -> Vec<JetMat> {
    let n = v.rows();
    let id = JetMat::from_rat(&RatMatrix::identity(n), shape_of(v));
    let mut prev = vec![id];
    for kk in 0..=k {
        let mut next = Vec::with_capacity(kk as usize + 2);
        for i in 0..=(kk + 1) as usize {
            let shift = mu + &RatMatrix::scalar(n, &(rat(1, 2) - int(i as i64)));
            let mut acc: Option<JetMat> = None;
            if i >= 1 {
                acc = Some(prev[i - 1].lmul_rat(&shift));
            }
            if i < prev.len() {
                let p = v.mul(&prev[i]);
                acc = Some(match acc {
                    None => p,
                    Some(a) => a.add(&p),
                });
            }
            next.push(acc.expect("one branch applies"));
        }
        prev = next;
    }
    prev
}

fn shape_of(m: &JetMat) -> super::JetShape {
    let j = m.get(0, 0);
    super::JetShape { nvars: j.nvars(), degree: j.deg_trust(), aux: j.aux_trust() }
}

/// `δX = -ζ²X' + ζ(μ-½)X + RX`.
fn delta(g0: &Genus0, x: &LaurentJetSeries) -> LaurentJetSeries {
    let n = g0.rank();
    let mu_half = &g0.model().mu0() - &RatMatrix::scalar(n, &rat(1, 2));
    let r = &g0.model().c1;
    let a = x.d_zeta().shift(2).map(|c| c.scale(&int(-1)));
    let b = x.map(|c| c.lmul_rat(&mu_half)).shift(1);
    let c = x.map(|c| c.lmul_rat(r));
    a.add(&b).add(&c)
}

/// `A_{k,0} = V^{k+1}` for `k ≤ kmax`.
pub fn amat_check(g0: &Genus0, kmax: i32) -> Result<Vec<CheckLine>> {
    let (_, v) = uv_matrices(g0)?;
    let mu = g0.model().mu0();
    let mut bad = None;
    let mut vpow = v.clone();
    for k in 0..=kmax {
        let a = a_matrices(&mu, &v, k);
        let r = a[0].sub(&vpow);
        if let Some((i, j, jet)) = r.first_nonzero() {
            bad = Some(format!("k={k} entry ({i},{j}): {}", describe(jet)));
            break;
        }
        vpow = vpow.mul(&v);
    }
    Ok(vec![line("genus0 A_{k,0}=V^{k+1}", bad, format!("k ≤ {kmax}"))])
}

/// `δ^{k+1}Θ = Σ ζ^i Θ A_{k,i}` for `0 ≤ k ≤ kmax`.
pub fn delta_iterate_check(g0: &Genus0, kmax: i32) -> Result<Vec<CheckLine>> {
    let (_, v) = uv_matrices(g0)?;
    let mu = g0.model().mu0();
    let big = g0.big_theta()?;
    let mut lhs = big.clone();
    let mut bad = None;
    for k in 0..=kmax {
        lhs = delta(g0, &lhs);
        let a = a_matrices(&mu, &v, k);
        let mut rhs: Option<LaurentJetSeries> = None;
        for (i, ai) in a.iter().enumerate() {
            let term = big.map(|c| c.mul(ai)).shift(i as i32);
            rhs = Some(match rhs {
                None => term,
                Some(s) => s.add(&term),
            });
        }
        let diff = lhs.sub(&rhs.expect("k ≥ 0"));
        if let Some(b) = first_bad(&diff, |_| None) {
            bad = Some(format!("k={k} {b}"));
            break;
        }
    }
    Ok(vec![line("genus0 δ^{k+1}Θ = Σ ζ^i Θ A_{k,i}", bad, format!("k ≤ {kmax}"))])
}

/// `Θ(ζ)⁻¹ δΘ(ζ) = ζ(μ-½) + V` on every certified power.
pub fn uv_check(g0: &Genus0) -> Result<Vec<CheckLine>> {
    let (_, v) = uv_matrices(g0)?;
    let big = g0.big_theta()?;
    let lhs = big.inverse_unipotent().mul(&delta(g0, &big));
    let n = g0.rank();
    let mu_half = &g0.model().mu0() - &RatMatrix::scalar(n, &rat(1, 2));
    let top = JetMat::from_rat(&mu_half, g0.shape());
    let bad = first_bad(&lhs, |p| match p {
        0 => Some(v.clone()),
        1 => Some(top.clone()),
        _ => None,
    });
    Ok(vec![line("genus0 Θ⁻¹δΘ = ζ(μ-½)+V", bad, format!("ζ^1..ζ^{}", lhs.lo()))])
}

/// `ζℒ₋₁θ + θ = 0` and `ζℒ₋₁Θ + Θ = 0`.
pub fn lminus1_check(g0: &Genus0) -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    for (name, s) in [("θ", g0.theta()?), ("Θ", g0.big_theta()?)] {
        let moved = s.map(|c| c.map(|j| g0.l_minus_one(j))).shift(1);
        let r = moved.add(&s);
        let bad = first_bad(&r, |_| None);
        out.push(line(&format!("genus0 ζℒ₋₁{name}+{name}=0"), bad, format!("down to ζ^{}", r.lo())));
    }
    Ok(out)
}

/// Genus-zero TRR `⟨⟨τ_{k+1,a}τ_{l,b}τ_{m,c}⟩⟩ = η^{ef}⟨⟨τ_{k,a}τ_{0,e}⟩⟩⟨⟨τ_{0,f}τ_{l,b}τ_{m,c}⟩⟩`.
pub fn trr_check(g0: &Genus0, levels: usize) -> Result<Vec<CheckLine>> {
    let n = g0.rank();
    let slots: Vec<Ins> = (0..levels as u32).flat_map(|m| (0..n).map(move |a| (m, a))).collect();
    let mut tuples = Vec::new();
    for &ka in &slots {
        for (i, &lb) in slots.iter().enumerate() {
            for &mc in &slots[i..] {
                tuples.push((ka, lb, mc));
            }
        }
    }
    let eta_inv = g0.eta_inv();
    let bad = first_failure(&tuples, |&((k, a), lb, mc)| {
        let mut r = g0.corr(&[(k + 1, a), lb, mc])?;
        for e in 0..n {
            for f in 0..n {
                let c = eta_inv.get(e, f);
                if *c != int(0) {
                    let p = g0.corr(&[(k, a), (0, e)])?.mul(&g0.corr(&[(0, f), lb, mc])?);
                    r = r.sub(&p.scale(c));
                }
            }
        }
        Ok((!r.is_zero()).then(|| format!("({k},{a}) {lb:?} {mc:?}: {}", describe(&r))))
    })?;
    Ok(vec![line("genus0 TRR", bad, format!("{} index tuples", tuples.len()))])
}

/// WDVV: `η^{ef}⟨⟨τ_{k,a}τ_{l,b}τ_{0,e}⟩⟩⟨⟨τ_{0,f}τ_{m,c}τ_{n,d}⟩⟩` is symmetric in `(l,b) ↔ (m,c)`.
pub fn wdvv_check(g0: &Genus0, levels: usize) -> Result<Vec<CheckLine>> {
    let n = g0.rank();
    let slots: Vec<Ins> = (0..levels as u32).flat_map(|m| (0..n).map(move |a| (m, a))).collect();
    let mut tuples = Vec::new();
    for &ka in &slots {
        for (i, &lb) in slots.iter().enumerate() {
            for &mc in &slots[i + 1..] {
                for &nd in &slots {
                    tuples.push((ka, lb, mc, nd));
                }
            }
        }
    }
    let eta_inv = g0.eta_inv();
    let side = |x: Ins, y: Ins, z: Ins, w: Ins| -> Result<Jet> {
        let mut acc = g0.shape().zero();
        for e in 0..n {
            for f in 0..n {
                let c = eta_inv.get(e, f);
                if *c != int(0) {
                    let p = g0.corr(&[x, y, (0, e)])?.mul(&g0.corr(&[(0, f), z, w])?);
                    acc = acc.add(&p.scale(c));
                }
            }
        }
        Ok(acc)
    };
    let bad = first_failure(&tuples, |&(ka, lb, mc, nd)| {
        let r = side(ka, lb, mc, nd)?.sub(&side(ka, mc, lb, nd)?);
        Ok((!r.is_zero()).then(|| format!("{ka:?} {lb:?} {mc:?} {nd:?}: {}", describe(&r))))
    })?;
    Ok(vec![line("genus0 WDVV", bad, format!("{} index tuples", tuples.len()))])
}

/// `∇z_{k,0} = Σ_i G[-i] A_{k,i}` vanishes for `0 ≤ k ≤ kmax`.
pub fn nabla_z_check(g0: &Genus0, kmax: i32) -> Result<Vec<CheckLine>> {
    let g = g_series(g0)?;
    if g.lo() > -(kmax + 1) {
        return Err(Error::TruncationTooSmall(format!("G is certified only down to ζ^{}", g.lo())));
    }
    let (_, v) = uv_matrices(g0)?;
    let mu = g0.model().mu0();
    let mut bad = None;
    for k in 0..=kmax {
        let a = a_matrices(&mu, &v, k);
        let mut acc: Option<JetMat> = None;
        for (i, ai) in a.iter().enumerate() {
            let p = g.coeff(-(i as i32)).expect("in window").mul(ai);
            acc = Some(match acc {
                None => p,
                Some(s) => s.add(&p),
            });
        }
        if let Some((_, j, jet)) = acc.expect("k ≥ 0").first_nonzero() {
            bad = Some(format!("k={k} component {j}: {}", describe(jet)));
            break;
        }
    }
    Ok(vec![line("genus0 ∇z_{k,0} = Σ G[-i]A_{k,i} = 0", bad, format!("k ≤ {kmax}"))])
}

/// Named genus-zero checks, as selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Genus0Check {
    Theta,
    Nabla,
    Invert,
    GVanish,
    Fp,
    Uv,
    Amat,
    Trr,
    Wdvv,
    LMinus1,
    NablaZ,
}

impl Genus0Check {
    pub const ALL: [Genus0Check; 11] = [
        Self::Theta,
        Self::Nabla,
        Self::Invert,
        Self::GVanish,
        Self::Fp,
        Self::Uv,
        Self::Amat,
        Self::Trr,
        Self::Wdvv,
        Self::LMinus1,
        Self::NablaZ,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Theta => "theta",
            Self::Nabla => "nabla",
            Self::Invert => "invert",
            Self::GVanish => "g-vanish",
            Self::Fp => "fp",
            Self::Uv => "uv",
            Self::Amat => "amat",
            Self::Trr => "trr",
            Self::Wdvv => "wdvv",
            Self::LMinus1 => "lminus1",
            Self::NablaZ => "nabla-z",
        }
    }
}

impl fmt::Display for Genus0Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Genus0Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown genus-zero check {s}")))
    }
}

/// Runs one check with its default parameters.
pub fn run_check(g0: &Genus0, check: Genus0Check) -> Result<Vec<CheckLine>> {
    let levels = g0.truncation().indices.min(3);
    match check {
        Genus0Check::Theta => theta_basics(g0),
        Genus0Check::Nabla => nabla_theta_check(g0),
        Genus0Check::Invert => invert_check(g0),
        Genus0Check::GVanish => g_vanish_check(g0, -4),
        Genus0Check::Fp => fp_check(g0, 2),
        Genus0Check::Uv => uv_check(g0),
        Genus0Check::Amat => {
            let mut lines = amat_check(g0, 6)?;
            lines.extend(delta_iterate_check(g0, 2)?);
            Ok(lines)
        }
        Genus0Check::Trr => trr_check(g0, g0.truncation().indices),
        Genus0Check::Wdvv => wdvv_check(g0, levels),
        Genus0Check::LMinus1 => lminus1_check(g0),
        Genus0Check::NablaZ => nabla_z_check(g0, 3),
    }
}

#[cfg(test)]
mod tests {
    use super::super::G0Truncation;
    use super::*;

    #[test]
    fn point_suite_small() {
        let g0 = Genus0::point(G0Truncation::new(3, 3)).unwrap();
        for c in Genus0Check::ALL {
            let lines = run_check(&g0, c).unwrap();
            for l in &lines {
                assert!(l.pass, "{l}");
            }
        }
    }

    #[test]
    fn a_matrix_first_step() {
        let g0 = Genus0::point(G0Truncation::new(2, 2)).unwrap();
        let (u, v) = uv_matrices(&g0).unwrap();
        assert_eq!(u, v);
        let a = a_matrices(&g0.model().mu0(), &v, 0);
        assert_eq!(a.len(), 2);
        // One step of the recursion at i = 1 gives μ - ½.
        assert_eq!(at_origin(a[1].get(0, 0)), rat(-1, 2));
        assert_eq!(a_matrices(&g0.model().mu0(), &v, -1).len(), 1);
    }
}
