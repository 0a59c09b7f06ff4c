//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::Zero;

use vircore::coh_model::{builtin, builtin_names, product, projective_space, CohModel};
use vircore::constraint_eval::{enumerate_probes, point_keys, point_table, z_residual, GwTable};
use vircore::diffalg::{DiffMono, DiffPoly};
use vircore::exact_core::{fmt_rat, int, rat, Rational};
use vircore::gelfand_dikii::gd;
use vircore::genus_zero::{run_check, G0Truncation, Genus0, Genus0Check};
use vircore::kdv_oracle::{kdv_route_tau, Truncation};
use vircore::point_correlators::{genus_potential_iz, partition_count, tau, TauKey, TauStore};
use vircore::report::CheckLine;
use vircore::virasoro_symbols::{
    central_term_check, operator_virasoro_check, section_consistency_check, supertrace_cocycle_check,
    symbol_virasoro_check,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn first_failure(lines: &[CheckLine]) -> Option<String> {
    lines.iter().find(|l| !l.pass).map(|l| l.to_string())
}

fn point_values() -> Outcome {
    let cases: [(u32, &[u32], Rational); 5] = [
        (0, &[0, 0, 0], int(1)),
        (1, &[1], rat(1, 24)),
        (2, &[4], rat(1, 1152)),
        (2, &[2, 3], rat(29, 5760)),
        (2, &[2, 2, 2], rat(7, 240)),
    ];
    let mut slowest = Duration::ZERO;
    for (g, ks, want) in cases {
        // A fresh memo per value, so each timing covers the whole recursion.
        let store = TauStore::new();
        let start = Instant::now();
        let got = store.tau(&TauKey::new(g, ks.to_vec()));
        let took = start.elapsed();
        slowest = slowest.max(took);
        if got != want {
            return Err(format!("<{ks:?}>_{g} = {} expected {}", fmt_rat(&got), fmt_rat(&want)));
        }
        if took >= Duration::from_secs(1) {
            return Err(format!("<{ks:?}>_{g} took {took:?}"));
        }
    }
    Ok(format!("5 values, slowest {slowest:?}"))
}

fn iz_potential() -> Outcome {
    let terms = genus_potential_iz(2);
    let got: Vec<(Vec<u32>, Rational, u32)> =
        terms.iter().map(|t| (t.ks.clone(), t.coeff.clone(), t.uprime_power)).collect();
    let want = vec![
        (vec![4], rat(1, 1152), 3),
        (vec![2, 3], rat(29, 5760), 4),
        (vec![2, 2, 2], rat(7, 1440), 5),
    ];
    if got != want {
        return Err(format!("genus 2 terms {got:?}"));
    }
    let (p3, p6) = (partition_count(3), partition_count(6));
    let n3 = genus_potential_iz(3).len() as u64;
    if terms.len() as u64 != p3 || n3 != p6 || (p3, p6) != (3, 11) {
        return Err(format!("term counts {} and {n3}, partitions {p3} and {p6}", terms.len()));
    }
    Ok("3 genus-2 terms, 11 genus-3 terms".into())
}

fn worked_steps() -> Outcome {
    let s = TauStore::new();
    let steps = [
        (vec![4], 0, rat(945, 16), rat(105, 2048)),
        (vec![2, 3], 1, rat(105, 8), rat(203, 3072)),
        (vec![2, 2, 2], 2, rat(15, 4), rat(7, 64)),
    ];
    for (ks, pivot, c, r) in steps {
        let key = TauKey::new(2, ks);
        let got = s.virasoro_step(&key, pivot);
        if got != (c.clone(), r.clone()) {
            return Err(format!("{key}: got {} / {}", fmt_rat(&got.0), fmt_rat(&got.1)));
        }
    }
    Ok("105/2048, 203/3072, 7/64".into())
}

fn routes_agree() -> Outcome {
    let trunc = Truncation::new(16, 12, 3);
    let start = Instant::now();
    let keys = point_keys(3, 12);
    for key in &keys {
        let a = kdv_route_tau(key, trunc).map_err(|e| e.to_string())?;
        let b = tau(key);
        if a != b {
            return Err(format!("{key}: kdv {} virasoro {}", fmt_rat(&a), fmt_rat(&b)));
        }
    }
    Ok(format!("{} keys in {:?}", keys.len(), start.elapsed()))
}

fn term(c: Rational, h: u32, jets: &[u32]) -> DiffPoly {
    DiffPoly::term(c, DiffMono::new(h, jets.to_vec()))
}

fn sum(ts: &[DiffPoly]) -> DiffPoly {
    ts.iter().fold(DiffPoly::zero(), |a, b| &a + b)
}

fn gelfand_dikii() -> Outcome {
    let displays = [
        DiffPoly::jet(0),
        sum(&[term(rat(1, 12), 1, &[2]), term(rat(1, 2), 0, &[0, 0])]),
        sum(&[
            term(rat(1, 240), 2, &[4]),
            term(rat(1, 12), 1, &[2, 0]),
            term(rat(1, 24), 1, &[1, 1]),
            term(rat(1, 6), 0, &[0, 0, 0]),
        ]),
    ];
    for (m, want) in displays.iter().enumerate() {
        let got = gd(m + 1).map_err(|e| e.to_string())?;
        if &got != want {
            return Err(format!("R_{} = {got}", m + 1));
        }
    }
    for m in 0..=8usize {
        let r = gd(m).map_err(|e| e.to_string())?;
        let next = gd(m + 1).map_err(|e| e.to_string())?;
        let lhs = r.apply_k();
        let rhs = next.derive().scale(&(int(m as i64) + rat(1, 2)));
        if lhs != rhs {
            return Err(format!("K R_{m} differs from (m+1/2) R_{}'", m + 1));
        }
        if m >= 1 && r.max_jet().unwrap_or(0) as usize > 2 * m - 2 {
            return Err(format!("R_{m} involves u^({})", r.max_jet().unwrap_or(0)));
        }
    }
    Ok("R_1..R_3, recursion and jet bound for m <= 8".into())
}

fn libgober_models() -> Vec<CohModel> {
    let mut out: Vec<CohModel> = (0..=4).map(projective_space).collect();
    for (a, b) in [(1, 1), (1, 2), (2, 2), (1, 3)] {
        out.push(product(&projective_space(a), &projective_space(b)));
    }
    out.push(product(&product(&projective_space(1), &projective_space(1)), &projective_space(1)));
    out
}

fn libgober() -> Outcome {
    let expected = [(1, rat(1, 2)), (2, int(2)), (3, int(5))];
    let mut shown = Vec::new();
    for m in libgober_models() {
        let (lhs, rhs, ok) = m.libgober_check();
        if !ok {
            return Err(format!("{}: {} vs {}", m.name, fmt_rat(&lhs), fmt_rat(&rhs)));
        }
        shown.push(format!("{} {}", m.name, fmt_rat(&lhs)));
    }
    for (r, v) in expected {
        let (lhs, _, _) = projective_space(r).libgober_check();
        if lhs != v {
            return Err(format!("P{r}: {} expected {}", fmt_rat(&lhs), fmt_rat(&v)));
        }
    }
    Ok(shown.join(", "))
}

fn symbols() -> Outcome {
    let zero = Rational::zero();
    let mut count = 0;
    for name in builtin_names() {
        let m = builtin(name).map_err(|e| e.to_string())?;
        let mut lines = symbol_virasoro_check(&m, 5, &zero);
        lines.extend(central_term_check(&m, 5));
        lines.push(supertrace_cocycle_check(&m));
        if let Some(bad) = first_failure(&lines) {
            return Err(format!("{name}: {bad}"));
        }
        count += lines.len();
    }
    Ok(format!("{count} relations over {} models", builtin_names().len()))
}

fn operators() -> Outcome {
    let zero = Rational::zero();
    let mut count = 0;
    for name in ["point", "P2"] {
        let m = builtin(name).map_err(|e| e.to_string())?;
        let mut lines = operator_virasoro_check(&m, 3, 12, &zero).map_err(|e| e.to_string())?;
        lines.extend(section_consistency_check(&m, 4, 12).map_err(|e| e.to_string())?);
        if let Some(bad) = first_failure(&lines) {
            return Err(format!("{name}: {bad}"));
        }
        count += lines.len();
    }
    Ok(format!("{count} operator, section and free-field lines"))
}

/// Number of nonzero residuals over the sweep, and the number of cells.
fn sweep(table: &GwTable) -> Result<(usize, usize), String> {
    let (mut bad, mut cells) = (0, 0);
    for g in 0..=2 {
        for k in -1..=5 {
            for probe in enumerate_probes(table, k, g, &[], 6) {
                let v = z_residual(table, k, g, &probe, &[]).map_err(|e| e.to_string())?;
                cells += 1;
                if !v.is_zero() {
                    bad += 1;
                }
            }
        }
    }
    Ok((bad, cells))
}

fn constraints() -> Outcome {
    let table = point_table(2, 12);
    let reread = GwTable::parse(&table.emit()).map_err(|e| e.to_string())?;
    let (bad, cells) = sweep(&reread)?;
    if bad > 0 {
        return Err(format!("{bad} of {cells} residuals nonzero"));
    }
    let mut corrupted = reread.clone();
    corrupted.insert(1, vec![], &[(2, 0), (0, 0)], rat(1, 12));
    let (hits, _) = sweep(&corrupted)?;
    if hits == 0 {
        return Err("corrupted <tau_2 tau_0>_1 went unnoticed".into());
    }
    Ok(format!("{cells} residuals zero; corruption flagged in {hits}"))
}

fn genus_zero() -> Outcome {
    let g0 = Genus0::point(G0Truncation::new(5, 5)).map_err(|e| e.to_string())?;
    let mut count = 0;
    for check in Genus0Check::ALL {
        let lines = run_check(&g0, check).map_err(|e| format!("{check}: {e}"))?;
        if let Some(bad) = first_failure(&lines) {
            return Err(bad);
        }
        count += lines.len();
    }
    Ok(format!("{count} identities at (D, M) = (5, 5)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("point correlators", point_values),
        ("genus-2 and genus-3 potential", iz_potential),
        ("worked recursion steps", worked_steps),
        ("kdv route = virasoro route", routes_agree),
        ("gelfand-dikii", gelfand_dikii),
        ("libgober-wood", libgober),
        ("symbol-level virasoro", symbols),
        ("operator-level virasoro", operators),
        ("constraint evaluator", constraints),
        ("genus-zero suite", genus_zero),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (verdict, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {verdict} {name}: {detail} ({:.2?})", i + 1, start.elapsed());
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
