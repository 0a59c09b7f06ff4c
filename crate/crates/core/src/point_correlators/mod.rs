//! Intersection numbers `<tau_{k_1} ... tau_{k_n}>_g` of a point.

mod potential;
mod store;

pub use potential::{
    correlator_jet, free_energy_jet, genus_potential_iz, partition_count, Coords, IzTerm,
};
pub use store::{global_store, tau, TauStore};

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact_core::{int, rat, Rational};

/// Genus and sorted multiset of descendent indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TauKey {
    pub genus: u32,
    pub ks: Vec<u32>,
}

impl TauKey {
    pub fn new(genus: u32, mut ks: Vec<u32>) -> Self {
        ks.sort_unstable();
        Self { genus, ks }
    }

    pub fn n(&self) -> usize {
        self.ks.len()
    }

    /// `2g - 2 + n`.
    pub fn euler(&self) -> i64 {
        2 * self.genus as i64 - 2 + self.ks.len() as i64
    }

    pub fn is_stable(&self) -> bool {
        self.euler() > 0
    }

    /// `sum k_i = 3g - 3 + n`.
    pub fn dimension_ok(&self) -> bool {
        let sum: i64 = self.ks.iter().map(|&k| k as i64).sum();
        sum == 3 * self.genus as i64 - 3 + self.ks.len() as i64
    }

    fn without(&self, pos: usize) -> Vec<u32> {
        let mut ks = self.ks.clone();
        ks.remove(pos);
        ks
    }
}

impl fmt::Display for TauKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ks: Vec<String> = self.ks.iter().map(|k| k.to_string()).collect();
        write!(f, "<{}>_{}", ks.iter().map(|k| format!("tau_{k}")).collect::<Vec<_>>().join(" "), self.genus)
    }
}

/// A rational constant plus a linear combination of correlators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub constant: Rational,
    pub terms: Vec<(Rational, TauKey)>,
}

impl Reduction {
    fn push(&mut self, c: Rational, key: TauKey) {
        if let Some(slot) = self.terms.iter_mut().find(|(_, k)| *k == key) {
            slot.0 += c;
        } else {
            self.terms.push((c, key));
        }
        self.terms.retain(|(c, _)| !c.is_zero());
    }
}

/// `(n-3)! / prod k_i!` when `sum k_i = n - 3`, else zero.
pub fn genus0_closed(ks: &[u32]) -> Rational {
    let n = ks.len() as i64;
    let sum: i64 = ks.iter().map(|&k| k as i64).sum();
    if n < 3 || sum != n - 3 {
        return Rational::zero();
    }
    let mut v = crate::exact_core::factorial((n - 3) as u64);
    for &k in ks {
        v /= crate::exact_core::factorial(k as u64);
    }
    v
}

/// String equation: removes one `tau_0` and lowers each other index in turn.
pub fn string_reduce(key: &TauKey) -> Result<Reduction> {
    let pos = key
        .ks
        .iter()
        .position(|&k| k == 0)
        .ok_or_else(|| Error::Unstable(format!("{key} has no tau_0")))?;
    if key.genus == 0 && key.ks == [0, 0, 0] {
        return Ok(Reduction { constant: int(1), terms: vec![] });
    }
    let rest = key.without(pos);
    let reduced = TauKey::new(key.genus, rest.clone());
    if !reduced.is_stable() {
        return Err(Error::Unstable(format!("string equation on {key}")));
    }
    let mut out = Reduction { constant: Rational::zero(), terms: vec![] };
    for j in 0..rest.len() {
        if rest[j] == 0 {
            continue;
        }
        let mut ks = rest.clone();
        ks[j] -= 1;
        out.push(int(1), TauKey::new(key.genus, ks));
    }
    Ok(out)
}

/// Dilaton equation: removes one `tau_1`, scaling by `2g - 2 + n`.
pub fn dilaton_reduce(key: &TauKey) -> Result<Reduction> {
    let pos = key
        .ks
        .iter()
        .position(|&k| k == 1)
        .ok_or_else(|| Error::Unstable(format!("{key} has no tau_1")))?;
    if key.genus == 1 && key.ks == [1] {
        return Ok(Reduction { constant: rat(1, 24), terms: vec![] });
    }
    let reduced = TauKey::new(key.genus, key.without(pos));
    if !reduced.is_stable() {
        return Err(Error::Unstable(format!("dilaton equation on {key}")));
    }
    let factor = int(reduced.euler());
    Ok(Reduction { constant: Rational::zero(), terms: vec![(factor, reduced)] })
}

/// Ordered splittings `S = A ⊔ B` of a multiset, counted with multiplicity
/// (as subsets of labelled positions).
pub(crate) fn splittings(s: &[u32]) -> Vec<(Vec<u32>, Vec<u32>, Rational)> {
    let mut groups: Vec<(u32, usize)> = Vec::new();
    for &k in s {
        match groups.last_mut() {
            Some((v, c)) if *v == k => *c += 1,
            _ => groups.push((k, 1)),
        }
    }
    let mut out = vec![(Vec::new(), Vec::new(), int(1))];
    for (v, c) in groups {
        let mut next = Vec::new();
        for (a, b, w) in &out {
            for take in 0..=c {
                let mut a2 = a.clone();
                let mut b2 = b.clone();
                a2.extend(std::iter::repeat_n(v, take));
                b2.extend(std::iter::repeat_n(v, c - take));
                next.push((a2, b2, w * crate::exact_core::binomial(c as i64, take as i64)));
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(g: u32, ks: &[u32]) -> Rational {
        tau(&TauKey::new(g, ks.to_vec()))
    }

    #[test]
    fn reported_values() {
        assert_eq!(t(0, &[0, 0, 0]), int(1));
        assert_eq!(t(1, &[1]), rat(1, 24));
        assert_eq!(t(2, &[4]), rat(1, 1152));
        assert_eq!(t(2, &[2, 3]), rat(29, 5760));
        assert_eq!(t(2, &[2, 2, 2]), rat(7, 240));
    }

    #[test]
    fn closed_form_genus0() {
        assert_eq!(genus0_closed(&[0, 0, 0]), int(1));
        assert_eq!(genus0_closed(&[0, 0, 0, 1, 1]), int(2));
        assert_eq!(genus0_closed(&[0, 0, 1]), int(0));
    }

    #[test]
    fn reductions() {
        let r = string_reduce(&TauKey::new(1, vec![0, 2])).unwrap();
        assert_eq!(r.terms, vec![(int(1), TauKey::new(1, vec![1]))]);
        assert_eq!(string_reduce(&TauKey::new(0, vec![0, 0, 0])).unwrap().constant, int(1));
        assert_eq!(dilaton_reduce(&TauKey::new(1, vec![1])).unwrap().constant, rat(1, 24));
        let r = dilaton_reduce(&TauKey::new(1, vec![1, 1])).unwrap();
        assert_eq!(r.terms, vec![(int(1), TauKey::new(1, vec![1]))]);
        let r = dilaton_reduce(&TauKey::new(0, vec![0, 0, 0, 1])).unwrap();
        assert_eq!(r.terms, vec![(int(1), TauKey::new(0, vec![0, 0, 0]))]);
        assert!(string_reduce(&TauKey::new(0, vec![0, 1])).is_err());
        assert!(dilaton_reduce(&TauKey::new(0, vec![2, 2])).is_err());
    }

    #[test]
    fn worked_intermediates() {
        let s = global_store();
        let (l, r) = s.virasoro_step(&TauKey::new(2, vec![4]), 0);
        assert_eq!((l, r), (rat(945, 16), rat(105, 2048)));
        let (l, r) = s.virasoro_step(&TauKey::new(2, vec![2, 3]), 1);
        assert_eq!((l, r), (rat(105, 8), rat(203, 3072)));
        let (l, r) = s.virasoro_step(&TauKey::new(2, vec![2, 2, 2]), 2);
        assert_eq!((l, r), (rat(15, 4), rat(7, 64)));
    }

    #[test]
    fn iz_genus2() {
        let terms = genus_potential_iz(2);
        let got: Vec<(Vec<u32>, Rational, u32)> =
            terms.into_iter().map(|t| (t.ks, t.coeff, t.uprime_power)).collect();
        assert_eq!(
            got,
            vec![
                (vec![4], rat(1, 1152), 3),
                (vec![2, 3], rat(29, 5760), 4),
                (vec![2, 2, 2], rat(7, 1440), 5),
            ]
        );
        assert_eq!(genus_potential_iz(3).len(), 11);
        assert_eq!(partition_count(6), 11);
    }

    #[test]
    fn energy_jets() {
        let j = free_energy_jet(0, 3, 0, Coords::Raw);
        assert_eq!(j.len(), 1);
        assert_eq!(j.coeff_of(0, &[3]), Some(rat(1, 6)));
        let j = free_energy_jet(1, 2, 2, Coords::Raw);
        assert_eq!(j.coeff_of(0, &[0, 1, 0]), Some(rat(1, 24)));
        assert_eq!(j.coeff_of(0, &[1, 0, 1]), Some(rat(1, 24)));
        assert_eq!(j.coeff_of(0, &[0, 2, 0]), Some(rat(1, 48)));
    }
}
