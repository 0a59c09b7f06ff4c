use std::collections::BTreeMap;

use num_traits::Zero;

use super::quad::{ensure_even, QMono, QuadOperator};
use super::symbol::PsiSymbol;
use crate::coh_model::CohModel;
use crate::error::Result;
use crate::exact_core::{fmt_rat, half_product, int, rat, Rational};
use crate::report::CheckLine;

/// Generator multiplying a power of `z` in a field component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    One,
    T(u32),
    D(u32),
}

/// `coeff · ħ^hbar · z^{zpow2/2} · gen` in component `comp`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTerm {
    pub comp: usize,
    pub zpow2: i32,
    pub gen: Gen,
    pub hbar: i32,
    pub coeff: Rational,
}

/// The free field in shifted coordinates, truncated at index `cutoff`.
#[derive(Clone, Debug)]
pub struct FreeField {
    pub rank: usize,
    pub cutoff: u32,
    pub terms: Vec<FieldTerm>,
}

impl FreeField {
    pub fn new(model: &CohModel, cutoff: u32) -> Result<Self> {
        let n = model.rank();
        let eta_inv = model.eta_inverse()?;
        let mut terms = Vec::new();
        for m in 0..=cutoff {
            // Γ(1/2)/Γ(m+3/2) and Γ(m+1/2)/Γ(1/2)
            let up = int(1) / half_product(0, m as i64);
            let down = half_product(0, m as i64 - 1);
            for a in 0..n {
                terms.push(FieldTerm {
                    comp: a,
                    zpow2: 2 * m as i32 + 1,
                    gen: Gen::T(m * n as u32 + a as u32),
                    hbar: 0,
                    coeff: up.clone(),
                });
                for b in 0..n {
                    let e = eta_inv.get(a, b);
                    if !e.is_zero() {
                        terms.push(FieldTerm {
                            comp: a,
                            zpow2: -2 * m as i32 - 1,
                            gen: Gen::D(m * n as u32 + b as u32),
                            hbar: 1,
                            coeff: -(&down * e),
                        });
                    }
                }
            }
        }
        Ok(Self { rank: n, cutoff, terms })
    }
}

/// `Γ(β+1)/Γ(β-k+1)`, the factor in `∂^k z^β`.
fn falling(beta: &Rational, k: i32) -> Rational {
    let mut acc = int(1);
    if k >= 0 {
        for j in 0..k {
            acc *= beta - int(j as i64);
        }
    } else {
        for j in 1..=-k {
            acc /= beta + int(j as i64);
        }
    }
    acc
}

type Key = (usize, i32, Gen, i32);

/// Coefficients of `σ(δ)φ(z) + [δ, φ(z)]`.
fn defect(op: &QuadOperator, sym: &PsiSymbol, field: &FreeField) -> BTreeMap<Key, Rational> {
    let mut out: BTreeMap<Key, Rational> = BTreeMap::new();
    let mut put = |k: Key, v: Rational| {
        let e = out.entry(k).or_insert_with(Rational::zero);
        *e += v;
    };
    for ft in &field.terms {
        let beta = rat(ft.zpow2 as i64, 2);
        for (k, f) in sym.terms() {
            let new_beta = &beta - int(k as i64);
            let mat = f.eval(&new_beta);
            let factor = falling(&beta, k) * &ft.coeff;
            for b in 0..field.rank {
                let v = mat.get(b, ft.comp);
                if !v.is_zero() {
                    put((b, ft.zpow2 - 2 * k, ft.gen, ft.hbar), v * &factor);
                }
            }
        }
    }
    for ft in &field.terms {
        for (m, c) in op.terms() {
            let (positions, sign, from_d) = match ft.gen {
                Gen::T(x) => (m.d.iter().filter(|&&v| v == x).count(), int(1), true),
                Gen::D(x) => (m.t.iter().filter(|&&v| v == x).count(), int(-1), false),
                Gen::One => (0, int(0), true),
            };
            if positions == 0 {
                continue;
            }
            let x = match ft.gen {
                Gen::T(x) | Gen::D(x) => x,
                Gen::One => unreachable!(),
            };
            let mut t = m.t.clone();
            let mut d = m.d.clone();
            if from_d {
                let i = d.iter().position(|&v| v == x).expect("present");
                d.remove(i);
            } else {
                let i = t.iter().position(|&v| v == x).expect("present");
                t.remove(i);
            }
            let gen = match (t.as_slice(), d.as_slice()) {
                ([], []) => Gen::One,
                ([v], []) => Gen::T(*v),
                ([], [v]) => Gen::D(*v),
                _ => unreachable!("commutator with a generator of a quadratic operator is linear"),
            };
            let v = c * &ft.coeff * &sign * int(positions as i64);
            put((ft.comp, ft.zpow2, gen, m.hbar + ft.hbar), v);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Verifies `σ(δ)φ(z) + [δ, φ(z)] = 0` coefficient by coefficient on the
/// generators inside the operator's trusted window.
pub fn free_field_symbol_check(model: &CohModel, op: &QuadOperator, sym: &PsiSymbol) -> Result<CheckLine> {
    ensure_even(model)?;
    let field = FreeField::new(model, op.cutoff())?;
    let sym_reach = sym.terms().map(|(k, _)| k.abs() as i64).max().unwrap_or(0);
    let window = op.trust() - op.reach().max(sym_reach) - 1;
    let bad = defect(op, sym, &field).into_iter().find(|((_, _, g, _), _)| match g {
        Gen::One => true,
        Gen::T(v) | Gen::D(v) => op.index_of(*v) as i64 <= window,
    });
    Ok(match bad {
        None => CheckLine::new("free-field", true, format!("window={window}")),
        Some(((comp, zpow2, gen, hbar), v)) => {
            let g = match gen {
                Gen::One => "1".to_string(),
                Gen::T(x) => op.fmt_mono(&QMono::new(0, vec![x], vec![])),
                Gen::D(x) => op.fmt_mono(&QMono::new(0, vec![], vec![x])),
            };
            CheckLine::new(
                "free-field",
                false,
                format!("z^({zpow2}/2) component {comp} generator {g} hbar^{hbar}: residual {}", fmt_rat(&v)),
            )
        }
    })
}
