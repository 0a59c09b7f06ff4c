//! Gelfand-Dikii polynomials `R_m(u)` and the KdV flows.

use std::sync::OnceLock;

use parking_lot::RwLock;

use crate::diffalg::DiffPoly;
use crate::error::Result;
use crate::exact_core::rat;

/// Memo of `R_0, R_1, ...`; `K R_m = (m+1/2) ∂R_{m+1}`.
#[derive(Debug)]
pub struct GdCache {
    memo: RwLock<Vec<DiffPoly>>,
}

impl Default for GdCache {
    fn default() -> Self {
        Self::new()
    }
}

impl GdCache {
    pub fn new() -> Self {
        Self { memo: RwLock::new(vec![DiffPoly::one()]) }
    }

    pub fn get(&self, m: usize) -> Result<DiffPoly> {
        if let Some(p) = self.memo.read().get(m) {
            return Ok(p.clone());
        }
        let mut memo = self.memo.write();
        while memo.len() <= m {
            let j = memo.len() - 1;
            let next = memo[j].apply_k().integrate()?.scale(&rat(2, 2 * j as i64 + 1));
            memo.push(next);
        }
        Ok(memo[m].clone())
    }
}

fn global() -> &'static GdCache {
    static CACHE: OnceLock<GdCache> = OnceLock::new();
    CACHE.get_or_init(GdCache::new)
}

/// `R_m(u)`.
pub fn gd(m: usize) -> Result<DiffPoly> {
    global().get(m)
}

/// Right-hand side of the `m`-th KdV flow, `∂R_{m+1}`.
pub fn kdv_rhs(m: usize) -> Result<DiffPoly> {
    Ok(gd(m + 1)?.derive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffalg::DiffMono;
    use crate::exact_core::Rational;

    fn t(c: Rational, h: u32, jets: &[u32]) -> DiffPoly {
        DiffPoly::term(c, DiffMono::new(h, jets.to_vec()))
    }

    #[test]
    fn first_polynomials() {
        assert_eq!(gd(0).unwrap(), DiffPoly::one());
        assert_eq!(gd(1).unwrap(), DiffPoly::jet(0));
        let r2 = &t(rat(1, 12), 1, &[2]) + &t(rat(1, 2), 0, &[0, 0]);
        assert_eq!(gd(2).unwrap(), r2);
        let r3 = [
            t(rat(1, 240), 2, &[4]),
            t(rat(1, 12), 1, &[2, 0]),
            t(rat(1, 24), 1, &[1, 1]),
            t(rat(1, 6), 0, &[0, 0, 0]),
        ]
        .iter()
        .fold(DiffPoly::zero(), |a, b| &a + b);
        assert_eq!(gd(3).unwrap(), r3);
    }

    #[test]
    fn flows() {
        assert_eq!(kdv_rhs(0).unwrap(), DiffPoly::jet(1));
        let f1 = &t(rat(1, 12), 1, &[3]) + &t(rat(1, 1), 0, &[1, 0]);
        assert_eq!(kdv_rhs(1).unwrap(), f1);
        let f2 = [
            t(rat(1, 240), 2, &[5]),
            t(rat(1, 6), 1, &[2, 1]),
            t(rat(1, 12), 1, &[3, 0]),
            t(rat(1, 2), 0, &[1, 0, 0]),
        ]
        .iter()
        .fold(DiffPoly::zero(), |a, b| &a + b);
        assert_eq!(kdv_rhs(2).unwrap(), f2);
    }
}
