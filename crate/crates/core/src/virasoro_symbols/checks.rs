use num_traits::Zero;
use rayon::prelude::*;

use super::free_field::free_field_symbol_check;
use super::quad::{build_lk_direct, ensure_even, sigma_inverse, QuadOperator};
use super::symbol::{cocycle, symbol_lk, symbol_virasoro_check};
use crate::coh_model::CohModel;
use crate::error::Result;
use crate::exact_core::{fmt_rat, int, Rational};
use crate::report::CheckLine;

fn describe(op: &QuadOperator, diff: Option<(super::QMono, Rational, Rational)>) -> String {
    match diff {
        None => String::new(),
        Some((m, a, b)) => format!("at {}: {} vs {}", op.fmt_mono(&m), fmt_rat(&a), fmt_rat(&b)),
    }
}

/// `[L_k, L_l] = (k-l) L_{k+l}` on trusted coefficients, scalar included.
pub fn operator_virasoro_check(model: &CohModel, kmax: i32, cutoff: u32, s: &Rational) -> Result<Vec<CheckLine>> {
    ensure_even(model)?;
    let ops: Vec<QuadOperator> =
        (-1..=2 * kmax).into_par_iter().map(|k| build_lk_direct(model, k, cutoff, s)).collect::<Result<_>>()?;
    let op = |k: i32| &ops[(k + 1) as usize];
    let pairs: Vec<(i32, i32)> = (-1..=kmax).flat_map(|k| (-1..=kmax).map(move |l| (k, l))).collect();
    Ok(pairs
        .par_iter()
        .map(|&(k, l)| {
            let lhs = op(k).commutator(op(l));
            let rhs = if k + l < -1 {
                QuadOperator::zero(model.rank(), cutoff)
            } else {
                op(k + l).scale(&int((k - l) as i64))
            };
            let diff = lhs.first_difference(&rhs, lhs.trust());
            let pass = diff.is_none();
            CheckLine::new(format!("operator[{k},{l}]"), pass, describe(&lhs, diff))
        })
        .collect())
}

/// The literal operator against the section of its symbol, and both
/// against the free-field identity.
pub fn section_consistency_check(model: &CohModel, kmax: i32, cutoff: u32) -> Result<Vec<CheckLine>> {
    ensure_even(model)?;
    let zero = Rational::zero();
    (-1..=kmax)
        .into_par_iter()
        .map(|k| {
            let sym = symbol_lk(model, k, &zero);
            let direct = build_lk_direct(model, k, cutoff, &zero)?;
            let mut section = sigma_inverse(model, &sym, cutoff)?;
            if k == 0 {
                section.add_scalar(model.rho());
            }
            let diff = direct.first_difference(&section, cutoff as i64);
            let a = CheckLine::new(format!("section L_{k}"), diff.is_none(), describe(&direct, diff));
            let mut b = free_field_symbol_check(model, &direct, &sym)?;
            b.name = format!("free-field L_{k}");
            Ok(vec![a, b])
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

#[derive(Clone, Debug)]
pub struct ModifiedReport {
    /// `[σ(L_1^s), σ(L_{-1})] = 2σ(L_0^s)` exactly.
    pub symbol_ok: bool,
    /// `c(σ(L_1^s), σ(L_{-1})) - 2ρ(V)`.
    pub cocycle_discrepancy: Rational,
    /// `-(s choose 2) ρ̃(V)`.
    pub expected: Rational,
    /// Operator route for even models: non-scalar part vanishes, and the scalar.
    pub operator: Option<(bool, Rational)>,
}

impl ModifiedReport {
    pub fn lines(&self, s: &Rational) -> Vec<CheckLine> {
        let s = fmt_rat(s);
        let mut out = vec![
            CheckLine::new(format!("modified symbol s={s}"), self.symbol_ok, ""),
            CheckLine::new(
                format!("modified cocycle s={s}"),
                self.cocycle_discrepancy == self.expected,
                format!("discrepancy={} expected={}", fmt_rat(&self.cocycle_discrepancy), fmt_rat(&self.expected)),
            ),
        ];
        if let Some((ok, scalar)) = &self.operator {
            out.push(CheckLine::new(
                format!("modified operator s={s}"),
                *ok && *scalar == self.expected,
                format!("scalar={} expected={}", fmt_rat(scalar), fmt_rat(&self.expected)),
            ));
        }
        out
    }
}

/// `[L_1^s, L_{-1}] = 2L_0^s - (s choose 2) ρ̃(V)`.
pub fn modified_virasoro_check(model: &CohModel, s: &Rational, cutoff: u32) -> Result<ModifiedReport> {
    let zero = Rational::zero();
    let l1 = symbol_lk(model, 1, s);
    let lm = symbol_lk(model, -1, &zero);
    let symbol_ok = l1.commutator(&lm) == symbol_lk(model, 0, s).scale(&int(2));
    let cocycle_discrepancy = cocycle(model, &l1, &lm) - int(2) * model.rho();
    let expected = -(s * (s - int(1)) / int(2)) * model.rho_tilde();
    let operator = if model.has_odd() {
        None
    } else {
        let a = build_lk_direct(model, 1, cutoff, s)?;
        let b = build_lk_direct(model, -1, cutoff, &zero)?;
        let c = build_lk_direct(model, 0, cutoff, s)?;
        let mut d = a.commutator(&b).sub(&c.scale(&int(2)));
        let scalar = d.scalar();
        d.add_scalar(-scalar.clone());
        let ok = d.within(d.trust()).next().is_none();
        Some((ok, scalar))
    };
    Ok(ModifiedReport { symbol_ok, cocycle_discrepancy, expected, operator })
}

/// Symbol-level relations for `-1 ≤ k, l ≤ kmax`.
pub fn symbol_lines(model: &CohModel, kmax: i32) -> Vec<CheckLine> {
    symbol_virasoro_check(model, kmax, &Rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coh_model::builtin;
    use crate::exact_core::rat;
    use crate::report::all_pass;
    use crate::virasoro_symbols::{free_field_symbol_check, PsiSymbol};

    #[test]
    fn section_agrees_with_literal_operators() {
        for name in ["point", "P1", "P2", "P3", "P1xP1"] {
            let m = builtin(name).unwrap();
            for l in section_consistency_check(&m, 4, 8).unwrap() {
                assert!(l.pass, "{name}: {l}");
            }
        }
    }

    #[test]
    fn operator_relations() {
        for name in ["point", "P1", "P2"] {
            let m = builtin(name).unwrap();
            for l in operator_virasoro_check(&m, 3, 12, &Rational::zero()).unwrap() {
                assert!(l.pass, "{name}: {l}");
            }
        }
    }

    #[test]
    fn negative_control() {
        let m = builtin("P1").unwrap();
        let op = build_lk_direct(&m, -1, 6, &Rational::zero()).unwrap();
        let wrong = PsiSymbol::d_power(2, 1);
        assert!(!free_field_symbol_check(&m, &op, &wrong).unwrap().pass);
        assert!(free_field_symbol_check(&m, &op, &wrong.scale(&int(-1))).unwrap().pass);
    }

    #[test]
    fn modified_relation() {
        let p2 = builtin("P2").unwrap();
        for s in [int(0), int(1), rat(1, 2)] {
            let r = modified_virasoro_check(&p2, &s, 6).unwrap();
            assert!(all_pass(&r.lines(&s)), "{:?}", r);
        }
        let k3 = builtin("K3").unwrap();
        let r = modified_virasoro_check(&k3, &int(2), 4).unwrap();
        assert_eq!(r.expected, int(-8));
        assert!(all_pass(&r.lines(&int(2))), "{:?}", r);
        let c2 = builtin("C2").unwrap();
        let r = modified_virasoro_check(&c2, &int(2), 4).unwrap();
        assert_eq!(r.expected, int(4));
        assert!(r.operator.is_none());
        assert!(all_pass(&r.lines(&int(2))), "{:?}", r);
    }
}
