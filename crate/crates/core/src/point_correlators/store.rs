use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::OnceLock;

use num_traits::Zero;
use parking_lot::RwLock;

use super::{dilaton_reduce, splittings, string_reduce, TauKey};
use crate::error::{Error, Result};
use crate::exact_core::{fmt_rat, half_product, int, parse_rat, rat, signed_gamma_ratio, Rational};

/// Memo of computed correlators; concurrent reads, serialized inserts.
#[derive(Debug, Default)]
pub struct TauStore {
    memo: RwLock<HashMap<TauKey, Rational>>,
}

pub fn global_store() -> &'static TauStore {
    static STORE: OnceLock<TauStore> = OnceLock::new();
    STORE.get_or_init(TauStore::new)
}

/// `<tau_{k_1} ... tau_{k_n}>_g` via the global memo.
pub fn tau(key: &TauKey) -> Rational {
    global_store().tau(key)
}

impl TauStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.memo.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.read().is_empty()
    }

    pub fn get(&self, key: &TauKey) -> Option<Rational> {
        self.memo.read().get(key).cloned()
    }

    pub fn tau(&self, key: &TauKey) -> Rational {
        if !key.dimension_ok() || !key.is_stable() {
            return Rational::zero();
        }
        if let Some(v) = self.get(key) {
            return v;
        }
        let value = self.compute(key);
        self.memo.write().insert(key.clone(), value.clone());
        value
    }

    fn eval_reduction(&self, r: &super::Reduction) -> Rational {
        r.terms.iter().fold(r.constant.clone(), |acc, (c, k)| acc + c * self.tau(k))
    }

    fn compute(&self, key: &TauKey) -> Rational {
        if key.ks.contains(&0) {
            let r = string_reduce(key).expect("stable key with tau_0 reduces");
            return self.eval_reduction(&r);
        }
        if key.ks.contains(&1) {
            let r = dilaton_reduce(key).expect("stable key with tau_1 reduces");
            return self.eval_reduction(&r);
        }
        let pivot = key.ks.len() - 1;
        let (lhs, rhs) = self.virasoro_step(key, pivot);
        rhs / lhs
    }

    /// One application of the point constraint `z_{k,g}` with the insertion at
    /// `pivot` playing `tau_{k+1}`. Returns `(c, r)` with `c <key> = r`.
    pub fn virasoro_step(&self, key: &TauKey, pivot: usize) -> (Rational, Rational) {
        let g = key.genus;
        let k = key.ks[pivot] as i64 - 1;
        let s = key.without(pivot);
        let lhs = half_product(1, k);
        let mut rhs = Rational::zero();

        for j in 0..s.len() {
            let idx = s[j] as i64 + k;
            if idx < 0 {
                continue;
            }
            let mut ks = s.clone();
            ks[j] = idx as u32;
            rhs += half_product(s[j] as i64, k) * self.tau(&TauKey::new(g, ks));
        }

        for m in -k..=-1 {
            let a = (-m - 1) as u32;
            let b = (m + k) as u32;
            let mut inner = Rational::zero();
            if g > 0 {
                let mut ks = s.clone();
                ks.push(a);
                ks.push(b);
                inner += self.tau(&TauKey::new(g - 1, ks));
            }
            for (sa, sb, w) in splittings(&s) {
                for h in 0..=g {
                    let mut ka = sa.clone();
                    ka.push(a);
                    let left = self.tau(&TauKey::new(h, ka));
                    if left.is_zero() {
                        continue;
                    }
                    let mut kb = sb.clone();
                    kb.push(b);
                    inner += &w * left * self.tau(&TauKey::new(g - h, kb));
                }
            }
            rhs += signed_gamma_ratio(m, k) * inner / int(2);
        }

        if k == 0 && g == 1 && s.is_empty() {
            rhs += rat(1, 16);
        }
        if k == -1 && g == 0 && s == [0, 0] {
            rhs += int(1);
        }
        (lhs, rhs)
    }

    /// Reads cache lines `g;k1,k2,...;p/q`.
    pub fn load(&self, path: &Path) -> Result<usize> {
        let file = std::fs::File::open(path)?;
        let mut count = 0;
        let mut memo = self.memo.write();
        for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = parse_cache_line(line).map_err(|msg| Error::Parse { line: i + 1, msg })?;
            memo.insert(key, value);
            count += 1;
        }
        Ok(count)
    }

    /// Writes the memo as sorted cache lines.
    pub fn save(&self, path: &Path) -> Result<()> {
        let memo = self.memo.read();
        let mut entries: Vec<_> = memo.iter().collect();
        entries.sort();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (k, v) in entries {
            let ks: Vec<String> = k.ks.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{};{};{}", k.genus, ks.join(","), fmt_rat(v))?;
        }
        Ok(())
    }
}

fn parse_cache_line(line: &str) -> std::result::Result<(TauKey, Rational), String> {
    let parts: Vec<&str> = line.split(';').collect();
    if parts.len() != 3 {
        return Err(format!("expected 'g;k1,k2,...;p/q', got '{line}'"));
    }
    let g: u32 = parts[0].trim().parse().map_err(|_| format!("bad genus '{}'", parts[0]))?;
    let ks = if parts[1].trim().is_empty() {
        Vec::new()
    } else {
        parts[1]
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| format!("bad index '{x}'")))
            .collect::<std::result::Result<Vec<_>, _>>()?
    };
    let v = parse_rat(parts[2]).map_err(|e| e.to_string())?;
    Ok((TauKey::new(g, ks), v))
}
