use num_traits::Zero;

use super::{tau, TauKey};
use crate::exact_core::{half_product, Rational};
use crate::jet::Jet;

/// Coordinates on the large phase space of a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coords {
    /// `t_m`.
    Raw,
    /// `s_m = Γ(3/2)/Γ(m+3/2) t_m`.
    Rescaled,
}

/// `Γ(m+3/2)/Γ(3/2)`, the factor relating `σ_m` to `τ_m`.
pub fn sigma_factor(m: u32) -> Rational {
    half_product(1, m as i64 - 1)
}

/// `Σ_{g ≤ g_max} ħ^{g-1} <<τ_{fixed}>>_g` on the slice spanned by the first
/// `nvars` coordinates, certified to total degree `deg` and ħ-power `g_max - 1`.
pub fn correlator_jet(fixed: &[u32], g_max: u32, nvars: usize, deg: i32, coords: Coords) -> Jet {
    let fixed_factor = match coords {
        Coords::Raw => Rational::from_integer(1.into()),
        Coords::Rescaled => fixed.iter().fold(Rational::from_integer(1.into()), |a, &m| a * sigma_factor(m)),
    };
    Jet::from_fn(nvars, deg, g_max as i32 - 1, |exps| {
        let mut ks: Vec<u32> = fixed.to_vec();
        let mut weight = fixed_factor.clone();
        let mut sym = Rational::from_integer(1.into());
        for (m, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                ks.push(m as u32);
            }
            sym *= crate::exact_core::factorial(e as u64);
            if coords == Coords::Rescaled {
                for _ in 0..e {
                    weight *= sigma_factor(m as u32);
                }
            }
        }
        let n = ks.len() as i64;
        let sum: i64 = ks.iter().map(|&k| k as i64).sum();
        // Only the genus allowed by the dimension constraint contributes.
        if (sum - n + 3) % 3 != 0 {
            return vec![];
        }
        let g = (sum - n + 3) / 3;
        if g < 0 || g > g_max as i64 {
            return vec![];
        }
        let v = tau(&TauKey::new(g as u32, ks));
        if v.is_zero() {
            return vec![];
        }
        vec![(g as i32 - 1, v * &weight / sym)]
    })
}

/// `<<>>_g` truncated at degree `deg` in the variables `t_0..t_M` (or `s`).
pub fn free_energy_jet(g: u32, deg: i32, m_max: usize, coords: Coords) -> Jet {
    let full = correlator_jet(&[], g, m_max + 1, deg, coords);
    let mut out = Jet::zero(m_max + 1, deg, 0);
    for (mono, c) in full.terms() {
        if mono.aux == g as i32 - 1 {
            out.add_term(crate::jet::JetMono { aux: 0, exps: mono.exps.clone() }, c.clone());
        }
    }
    out
}

/// One term `coeff * G[k_1]...G[k_n] / (u')^power` of the genus-g potential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IzTerm {
    pub ks: Vec<u32>,
    pub coeff: Rational,
    pub uprime_power: u32,
}

/// The genus-g potential (g ≥ 2) expressed through `G[k]` and `u'`.
pub fn genus_potential_iz(g: u32) -> Vec<IzTerm> {
    assert!(g >= 2, "the G[k] form applies for g >= 2");
    let target = 3 * g - 3;
    let mut out = Vec::new();
    // Partitions of 3g-3 into parts k_i - 1 >= 1.
    for parts in partitions(target) {
        let ks: Vec<u32> = parts.iter().map(|p| p + 1).collect();
        let key = TauKey::new(g, ks.clone());
        let mut sym = Rational::from_integer(1.into());
        let mut run = 1u64;
        for w in key.ks.windows(2) {
            if w[0] == w[1] {
                run += 1;
                sym *= Rational::from_integer(run.into());
            } else {
                run = 1;
            }
        }
        out.push(IzTerm {
            ks: key.ks.clone(),
            coeff: tau(&key) / sym,
            uprime_power: 2 * g - 2 + ks.len() as u32,
        });
    }
    out.sort_by(|a, b| a.ks.len().cmp(&b.ks.len()).then_with(|| b.ks.cmp(&a.ks)));
    out
}

fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=max.min(n)).rev() {
            cur.push(p);
            rec(n - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Number of partitions of `n` (Euler's pentagonal recurrence).
pub fn partition_count(n: u32) -> u64 {
    let n = n as usize;
    let mut p = vec![0i64; n + 1];
    p[0] = 1;
    for i in 1..=n {
        let mut k: i64 = 1;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > i {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            p[i] += sign * p[i - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= i {
                p[i] += sign * p[i - g2];
            }
            k += 1;
        }
    }
    p[n] as u64
}
