//! Correlator tables and the residuals of the Virasoro constraints and of
//! the puncture, dilaton and divisor equations evaluated on them.

mod residual;

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::Zero;

use crate::coh_model::{load_model, CohModel};
use crate::error::{Error, Result};
use crate::exact_core::{fmt_rat, int, parse_rat, RatMatrix, Rational};
use crate::point_correlators::{tau, TauKey};

pub use residual::{
    divisor_check, dilaton_check, enumerate_probes, puncture_check, z_residual, AxiomReport, Insertion,
};

/// Insertion `τ_{k,a}`.
pub type Ins = (u32, usize);

/// Completeness bounds: every correlator with `g ≤ genus`, `Σk ≤ ksum`,
/// `n ≤ points` and degree `β ≥ 0` with `|β| ≤ degree` is either listed or
/// zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub genus: u32,
    pub ksum: u32,
    pub points: usize,
    pub degree: i64,
}

/// Data attached to a divisor class `ω` (a basis index).
#[derive(Clone, Debug, PartialEq)]
pub struct Divisor {
    /// `ω ∩ β` for each lattice basis vector.
    pub pairing: Vec<i64>,
    /// `mult[b][a]`: coefficient of `γ_b` in `ω ∪ γ_a`.
    pub mult: RatMatrix,
    /// `∫ ω ∪ c_{r-1}`.
    pub with_crm1: Rational,
}

#[derive(Clone, Debug)]
pub struct GwTable {
    pub model_ref: String,
    pub model: CohModel,
    /// `c₁ ∩ β` for each lattice basis vector; its length is the lattice rank.
    pub c1_beta: Vec<i64>,
    pub bounds: Bounds,
    pub divisors: HashMap<usize, Divisor>,
    entries: HashMap<(u32, Vec<i64>, Vec<Ins>), Rational>,
}

impl GwTable {
    pub fn new(model_ref: impl Into<String>, model: CohModel, c1_beta: Vec<i64>, bounds: Bounds) -> Self {
        Self { model_ref: model_ref.into(), model, c1_beta, bounds, divisors: HashMap::new(), entries: HashMap::new() }
    }

    pub fn lattice_rank(&self) -> usize {
        self.c1_beta.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorts insertions, returning the Koszul sign of the reordering of odd
    /// classes (zero when an odd insertion repeats).
    pub fn canonical(&self, ins: &[Ins]) -> (Vec<Ins>, i64) {
        let mut v = ins.to_vec();
        let mut sign = 1;
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                if self.model.parity(v[j - 1].1) && self.model.parity(v[j].1) {
                    sign = -sign;
                }
                v.swap(j - 1, j);
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1] && self.model.parity(w[0].1)) {
            sign = 0;
        }
        (v, sign)
    }

    pub fn insert(&mut self, g: u32, beta: Vec<i64>, ins: &[Ins], value: Rational) {
        let (v, sign) = self.canonical(ins);
        if sign == 0 {
            return;
        }
        let value = value * int(sign);
        if value.is_zero() {
            self.entries.remove(&(g, beta, v));
        } else {
            self.entries.insert((g, beta, v), value);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, Vec<i64>, Vec<Ins>), &Rational)> {
        self.entries.iter()
    }

    /// Correlator lookup: zero for non-effective degrees and unstable
    /// degree-zero signatures, `Indeterminate` outside the bounds.
    pub fn get(&self, g: u32, beta: &[i64], ins: &[Ins]) -> Result<Rational> {
        if beta.iter().any(|&b| b < 0) {
            return Ok(Rational::zero());
        }
        let n = ins.len() as i64;
        if beta.iter().all(|&b| b == 0) && 2 * g as i64 - 2 + n <= 0 {
            return Ok(Rational::zero());
        }
        let ksum: u32 = ins.iter().map(|i| i.0).sum();
        let b = &self.bounds;
        if g > b.genus || ksum > b.ksum || ins.len() > b.points || beta.iter().sum::<i64>() > b.degree {
            return Err(Error::Indeterminate(format!(
                "g={g} degree={beta:?} insertions={ins:?} lies outside the table bounds"
            )));
        }
        let (v, sign) = self.canonical(ins);
        if sign == 0 {
            return Ok(Rational::zero());
        }
        Ok(self
            .entries
            .get(&(g, beta.to_vec(), v))
            .map(|x| x * int(sign))
            .unwrap_or_else(Rational::zero))
    }

    /// Degrees `β ≥ 0` with `|β| ≤ bound`.
    pub fn degrees(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for _ in 0..self.lattice_rank() {
            let mut next = Vec::new();
            for p in &out {
                let used: i64 = p.iter().sum();
                for x in 0..=(self.bounds.degree - used) {
                    let mut q = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    /// Parses the table format: header lines then entries `g; β; (k,a)…; value`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut model_ref = None;
        let mut rank = 0usize;
        let mut c1_beta = Vec::new();
        let mut bounds = None;
        let mut pairings: HashMap<usize, Vec<i64>> = HashMap::new();
        let mut mults: Vec<(usize, usize, usize, Rational)> = Vec::new();
        let mut crm1: HashMap<usize, Rational> = HashMap::new();
        let mut raw_entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let perr = |msg: String| Error::Parse { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if content.contains(';') {
                raw_entries.push((line, content.to_string()));
                continue;
            }
            let f: Vec<&str> = content.split_whitespace().collect();
            let int_of = |s: &str| s.parse::<i64>().map_err(|_| perr(format!("expected an integer, found `{s}`")));
            match f[0] {
                "model" if f.len() == 2 => model_ref = Some(f[1].to_string()),
                "lattice" if f.len() == 2 => rank = int_of(f[1])? as usize,
                "c1beta" => c1_beta = f[1..].iter().map(|s| int_of(s)).collect::<Result<_>>()?,
                "bounds" if f.len() == 5 => {
                    bounds = Some(Bounds {
                        genus: int_of(f[1])? as u32,
                        ksum: int_of(f[2])? as u32,
                        points: int_of(f[3])? as usize,
                        degree: int_of(f[4])?,
                    })
                }
                "divisor" if f.len() >= 2 => {
                    let class = int_of(f[1])? as usize;
                    let v = f[2..].iter().map(|s| int_of(s)).collect::<Result<Vec<_>>>()?;
                    pairings.insert(class, v);
                }
                "mult" if f.len() == 5 => {
                    let v = parse_rat(f[4]).map_err(|_| perr(format!("bad rational `{}`", f[4])))?;
                    mults.push((int_of(f[1])? as usize, int_of(f[2])? as usize, int_of(f[3])? as usize, v));
                }
                "omega_crm1" if f.len() == 3 => {
                    let v = parse_rat(f[2]).map_err(|_| perr(format!("bad rational `{}`", f[2])))?;
                    crm1.insert(int_of(f[1])? as usize, v);
                }
                _ => return Err(perr(format!("unrecognized header line `{content}`"))),
            }
        }
        let last = text.lines().count();
        let model_ref = model_ref.ok_or(Error::Parse { line: last, msg: "missing `model`".into() })?;
        let model = load_model(&model_ref)?;
        let bounds = bounds.ok_or(Error::Parse { line: last, msg: "missing `bounds`".into() })?;
        if c1_beta.len() != rank {
            return Err(Error::Parse { line: last, msg: format!("c1beta needs {rank} values") });
        }
        let n = model.rank();
        let mut table = Self::new(model_ref, model, c1_beta, bounds);
        for (class, pairing) in pairings {
            if pairing.len() != rank || class >= n {
                return Err(Error::Parse { line: last, msg: format!("divisor {class} is malformed") });
            }
            let mut mult = RatMatrix::zeros(n, n);
            for (c, i, j, v) in &mults {
                if *c == class {
                    if *i >= n || *j >= n {
                        return Err(Error::Parse { line: last, msg: format!("mult index out of range for {class}") });
                    }
                    mult.set(*j, *i, v.clone());
                }
            }
            let with_crm1 = crm1.get(&class).cloned().unwrap_or_else(Rational::zero);
            table.divisors.insert(class, Divisor { pairing, mult, with_crm1 });
        }
        for (line, content) in raw_entries {
            let perr = |msg: String| Error::Parse { line, msg };
            let parts: Vec<&str> = content.split(';').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(perr("entry needs four `;`-separated fields".into()));
            }
            let g = parts[0].parse::<u32>().map_err(|_| perr(format!("bad genus `{}`", parts[0])))?;
            let beta: Vec<i64> = if parts[1].is_empty() {
                vec![]
            } else {
                parts[1]
                    .split(',')
                    .map(|s| s.trim().parse::<i64>().map_err(|_| perr(format!("bad degree `{s}`"))))
                    .collect::<Result<_>>()?
            };
            if beta.len() != rank {
                return Err(perr(format!("degree has {} components, lattice rank is {rank}", beta.len())));
            }
            let ins = parse_insertions(parts[2]).map_err(perr)?;
            if ins.iter().any(|&(_, a)| a >= n) {
                return Err(perr("class index out of range".into()));
            }
            let value = parse_rat(parts[3]).map_err(|_| perr(format!("bad value `{}`", parts[3])))?;
            let (canon, sign) = table.canonical(&ins);
            if let Some(old) = table.entries.get(&(g, beta.clone(), canon)) {
                if *old != &value * int(sign) {
                    return Err(perr("conflicting duplicate entry".into()));
                }
            }
            table.insert(g, beta, &ins, value);
        }
        Ok(table)
    }

    pub fn emit(&self) -> String {
        let mut s = String::new();
        let b = &self.bounds;
        let _ = writeln!(s, "model {}", self.model_ref);
        let _ = writeln!(s, "lattice {}", self.lattice_rank());
        let c1: Vec<String> = self.c1_beta.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "c1beta {}", c1.join(" "));
        let _ = writeln!(s, "bounds {} {} {} {}", b.genus, b.ksum, b.points, b.degree);
        let mut classes: Vec<&usize> = self.divisors.keys().collect();
        classes.sort();
        for class in classes {
            let d = &self.divisors[class];
            let p: Vec<String> = d.pairing.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "divisor {class} {}", p.join(" "));
            for i in 0..self.model.rank() {
                for j in 0..self.model.rank() {
                    if !d.mult.get(j, i).is_zero() {
                        let _ = writeln!(s, "mult {class} {i} {j} {}", fmt_rat(d.mult.get(j, i)));
                    }
                }
            }
            let _ = writeln!(s, "omega_crm1 {class} {}", fmt_rat(&d.with_crm1));
        }
        let mut keys: Vec<&(u32, Vec<i64>, Vec<Ins>)> = self.entries.keys().collect();
        keys.sort();
        for k in keys {
            let beta: Vec<String> = k.1.iter().map(|x| x.to_string()).collect();
            let ins: String = k.2.iter().map(|(kk, a)| format!("({kk},{a})")).collect();
            let _ = writeln!(s, "{}; {}; {}; {}", k.0, beta.join(","), ins, fmt_rat(&self.entries[k]));
        }
        s
    }
}

fn parse_insertions(s: &str) -> std::result::Result<Vec<Ins>, String> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(|| format!("expected `(` in `{s}`"))?;
        let close = open.find(')').ok_or_else(|| format!("unclosed `(` in `{s}`"))?;
        let (k, a) = open[..close].split_once(',').ok_or_else(|| format!("expected `(k,a)` in `{s}`"))?;
        let k = k.trim().parse::<u32>().map_err(|_| format!("bad index `{k}`"))?;
        let a = a.trim().parse::<usize>().map_err(|_| format!("bad class `{a}`"))?;
        out.push((k, a));
        rest = open[close + 1..].trim_start();
    }
    Ok(out)
}

/// Dimension-matching point keys with `g ≤ genus`, `Σk ≤ ksum`.
pub fn point_keys(genus: u32, ksum: u32) -> Vec<TauKey> {
    let mut out = Vec::new();
    for g in 0..=genus {
        for total in 0..=ksum {
            let n = total as i64 - 3 * g as i64 + 3;
            if n < 1 {
                continue;
            }
            let mut parts = Vec::new();
            fill_partitions(total, n as usize, total, &mut Vec::new(), &mut parts);
            for ks in parts {
                let key = TauKey::new(g, ks);
                if key.is_stable() {
                    out.push(key);
                }
            }
        }
    }
    out
}

/// Multisets of `len` nonnegative integers summing to `total`, parts ≤ `max`.
fn fill_partitions(total: u32, len: usize, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if len == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for p in (0..=max.min(total)).rev() {
        if p as u64 * len as u64 >= total as u64 {
            cur.push(p);
            fill_partitions(total - p, len - 1, p, cur, out);
            cur.pop();
        }
    }
}

/// The point's correlators as a table complete for `g ≤ genus`, `Σk ≤ ksum`.
pub fn point_table(genus: u32, ksum: u32) -> GwTable {
    let model = crate::coh_model::builtin("point").expect("builtin");
    let bounds = Bounds { genus, ksum, points: ksum as usize + 3, degree: 0 };
    let mut table = GwTable::new("builtin:point", model, vec![], bounds);
    for key in point_keys(genus, ksum) {
        let v = tau(&key);
        let ins: Vec<Ins> = key.ks.iter().map(|&k| (k, 0)).collect();
        table.insert(key.genus, vec![], &ins, v);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_core::rat;

    #[test]
    fn point_table_round_trip() {
        let t = point_table(2, 8);
        assert_eq!(t.get(2, &[], &[(4, 0)]).unwrap(), rat(1, 1152));
        assert!(matches!(t.get(3, &[], &[(7, 0)]), Err(Error::Indeterminate(_))));
        let back = GwTable::parse(&t.emit()).unwrap();
        assert_eq!(back.len(), t.len());
        assert_eq!(back.get(1, &[], &[(1, 0)]).unwrap(), rat(1, 24));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = GwTable::parse("model builtin:point\nbounds 1 3 4 0\n0; ; (0,0)(0,0)(0,x); 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn partitions_count() {
        let mut out = Vec::new();
        fill_partitions(4, 3, 4, &mut Vec::new(), &mut out);
        assert_eq!(out.len(), 4);
    }
}
