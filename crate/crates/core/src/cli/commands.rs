use std::path::Path;

use num_traits::Zero;

use super::{Cli, CliError, Command, Genus0Args, ModelCmd, Report, ResidualArgs, Verify};
use crate::coh_model::{builtin, builtin_names, load_model, CohModel};
use crate::constraint_eval::{
    dilaton_check, divisor_check, enumerate_probes, point_keys, point_table, puncture_check, z_residual, AxiomReport,
    GwTable,
};
use crate::error::Error;
use crate::exact_core::{fmt_rat, parse_rat};
use crate::gelfand_dikii::gd;
use crate::genus_zero::{run_check, G0Truncation, Genus0, Genus0Check};
use crate::jet::Jet;
use crate::kdv_oracle::{dvv_intermediates, dvv_residual, kdv_route_tau, witten_residual, Truncation};
use crate::point_correlators::{genus_potential_iz, global_store, tau, TauKey};
use crate::report::CheckLine;
use crate::virasoro_symbols::{
    central_term_check, modified_virasoro_check, operator_virasoro_check, parity_check, section_consistency_check,
    supertrace_cocycle_check, symbol_lk, symbol_virasoro_check,
};

type CmdResult = Result<(), CliError>;

pub(super) fn dispatch(cli: &Cli, r: &mut Report) -> CmdResult {
    if let Some(path) = &cli.cache {
        if path.exists() {
            global_store().load(path)?;
        }
    }
    match &cli.command {
        Command::Tau { genus, ks } => cmd_tau(*genus, ks, r)?,
        Command::TauTable { genus, dim_max } => cmd_tau_table(*genus, *dim_max, r)?,
        Command::PointTable { genus, ksum } => r.raw(&point_table(*genus, *ksum).emit())?,
        Command::Gd { m } => r.raw(&format!("{}\n", gd(*m)?))?,
        Command::PotentialIz { genus } => cmd_potential(*genus, r)?,
        Command::Verify(v) => cmd_verify(v, r)?,
        Command::Model(m) => cmd_model(m, r)?,
        Command::Residual(a) => cmd_residual(a, r)?,
        Command::Genus0(a) => cmd_genus0(a, r)?,
    }
    if let Some(path) = &cli.cache {
        global_store().save(path)?;
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn describe(j: &Jet) -> String {
    match j.first_term() {
        None => format!("zero to degree {}", j.deg_trust()),
        Some((m, c)) => format!("first nonzero {} at hbar^{} t^{:?}", fmt_rat(c), m.aux, m.exps),
    }
}

fn cmd_tau(genus: u32, ks: &[u32], r: &mut Report) -> CmdResult {
    let key = TauKey::new(genus, ks.to_vec());
    if !key.is_stable() {
        return Err(CliError::Usage(format!("{key} is unstable")));
    }
    r.row(&[fmt_rat(&tau(&key))])?;
    Ok(())
}

fn cmd_tau_table(genus: u32, dim_max: u32, r: &mut Report) -> CmdResult {
    let mut keys: Vec<TauKey> = point_keys(genus, dim_max).into_iter().filter(|k| k.genus == genus).collect();
    keys.sort_by(|a, b| a.ks.len().cmp(&b.ks.len()).then_with(|| a.ks.cmp(&b.ks)));
    for key in keys {
        let v = tau(&key);
        if v.is_zero() {
            continue;
        }
        let ks: Vec<String> = key.ks.iter().map(u32::to_string).collect();
        r.row(&[key.genus.to_string(), ks.join(","), fmt_rat(&v)])?;
    }
    Ok(())
}

fn cmd_potential(genus: u32, r: &mut Report) -> CmdResult {
    if genus < 2 {
        return Err(CliError::Usage("the G[k] form starts in genus 2".into()));
    }
    let terms = genus_potential_iz(genus);
    for t in &terms {
        let mut factors: Vec<String> = Vec::new();
        let mut i = 0;
        while i < t.ks.len() {
            let run = t.ks[i..].iter().take_while(|&&k| k == t.ks[i]).count();
            factors.push(if run == 1 { format!("G[{}]", t.ks[i]) } else { format!("G[{}]^{run}", t.ks[i]) });
            i += run;
        }
        r.row(&[fmt_rat(&t.coeff), factors.join("*"), format!("(u')^-{}", t.uprime_power)])?;
    }
    r.note(&format!("{} terms", terms.len()))?;
    Ok(())
}

fn cmd_verify(v: &Verify, r: &mut Report) -> CmdResult {
    match v {
        Verify::Kdv { genus, degree, indices, m_max } => {
            let trunc = Truncation::new(*degree, *indices, *genus);
            let m_max = m_max.unwrap_or(*indices as u32);
            for m in 0..=m_max {
                let j = witten_residual(m, trunc)?;
                r.check(&CheckLine::new(format!("witten m={m}"), j.is_zero(), describe(&j)))?;
            }
            for k in 0..=m_max as i64 {
                let j = dvv_residual(k, trunc);
                r.check(&CheckLine::new(format!("dvv k={k}"), j.is_zero(), describe(&j)))?;
            }
            for k in 1..=(m_max as i64).min(3) {
                for (name, j) in dvv_intermediates(k, trunc) {
                    r.check(&CheckLine::new(format!("dvv-step k={k} {name}"), j.is_zero(), describe(&j)))?;
                }
            }
            let ksum = (3 * *genus as i64 - 3 + *degree as i64).max(0) as u32;
            let (mut checked, mut bad) = (0usize, None);
            for key in point_keys(*genus, ksum) {
                match kdv_route_tau(&key, trunc) {
                    Ok(v) => {
                        checked += 1;
                        let w = tau(&key);
                        if v != w && bad.is_none() {
                            bad = Some(format!("{key}: kdv {} virasoro {}", fmt_rat(&v), fmt_rat(&w)));
                        }
                    }
                    Err(Error::TruncationTooSmall(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            let line = match bad {
                None => CheckLine::new("routes kdv=virasoro", true, format!("{checked} keys")),
                Some(b) => CheckLine::new("routes kdv=virasoro", false, b),
            };
            r.check(&line)?;
        }
        Verify::Virasoro { model, kmax, cutoff, s } => {
            let model = load_model(model)?;
            let s = parse_rat(s).map_err(|_| CliError::Usage(format!("bad --s value `{s}`")))?;
            r.checks(&symbol_virasoro_check(&model, *kmax, &s))?;
            if s.is_zero() {
                r.checks(&central_term_check(&model, *kmax))?;
                r.check(&supertrace_cocycle_check(&model))?;
                r.check(&libgober_line(&model))?;
                for k in -1..=*kmax {
                    let ok = parity_check(&model, &symbol_lk(&model, k, &s))?;
                    r.check(&CheckLine::new(format!("parity L_{k}"), ok, ""))?;
                }
            } else {
                r.checks(&modified_virasoro_check(&model, &s, *cutoff)?.lines(&s))?;
            }
            if model.has_odd() {
                r.note("operator-level checks skipped: the model has odd classes")?;
            } else {
                r.checks(&operator_virasoro_check(&model, *kmax, *cutoff, &s)?)?;
                if s.is_zero() {
                    r.checks(&section_consistency_check(&model, (*kmax).min(4), *cutoff)?)?;
                }
            }
        }
        Verify::Libgober { model } => {
            let model = load_model(model)?;
            r.check(&libgober_line(&model))?;
        }
    }
    Ok(())
}

fn libgober_line(model: &CohModel) -> CheckLine {
    let (lhs, rhs, ok) = model.libgober_check();
    CheckLine::new("libgober", ok, format!("{} = {}", fmt_rat(&lhs), fmt_rat(&rhs)))
}

fn cmd_model(m: &ModelCmd, r: &mut Report) -> CmdResult {
    match m {
        ModelCmd::Validate { file } => {
            let model = CohModel::parse(&read(file)?)?;
            let issues = model.validate();
            if issues.is_empty() {
                r.check(&CheckLine::new("model", true, format!("{} classes", model.rank())))?;
            }
            for issue in issues {
                r.check(&CheckLine::new("model", false, issue))?;
            }
        }
        ModelCmd::Builtin { name, emit } => {
            let model = builtin(name)?;
            if *emit {
                r.raw(&model.emit())?;
            } else {
                let mu = model.mu0();
                let rows = [
                    ("name", model.name.clone()),
                    ("dim", model.dim.to_string()),
                    ("rank", model.rank().to_string()),
                    ("rho", fmt_rat(&model.rho())),
                    ("rho_tilde", fmt_rat(&model.rho_tilde())),
                    ("str_mu2", fmt_rat(&model.supertrace(&(&mu * &mu)))),
                ];
                for (k, v) in rows {
                    r.row(&[k.to_string(), v])?;
                }
            }
        }
        ModelCmd::List => {
            for name in builtin_names() {
                r.row(&[name.to_string()])?;
            }
        }
    }
    Ok(())
}

fn load_table(path: &Path, model: Option<&String>) -> Result<GwTable, CliError> {
    let table = GwTable::parse(&read(path)?)?;
    if let Some(spec) = model {
        let m = load_model(spec)?;
        if m.emit() != table.model.emit() {
            return Err(CliError::Usage(format!("{spec} differs from the table model {}", table.model_ref)));
        }
    }
    Ok(table)
}

fn axiom_line(rep: &AxiomReport) -> CheckLine {
    CheckLine::new(rep.name.clone(), rep.pass(), rep.summary())
}

fn cmd_residual(a: &ResidualArgs, r: &mut Report) -> CmdResult {
    let table = load_table(&a.table, a.model.as_ref())?;
    for g in 0..=a.gmax {
        for k in -1..=a.kmax {
            let (mut checked, mut skipped) = (0usize, 0usize);
            let mut bad: Option<String> = None;
            for beta in table.degrees() {
                for probe in enumerate_probes(&table, k, g, &beta, a.msum) {
                    match z_residual(&table, k, g, &probe, &beta) {
                        Ok(v) => {
                            checked += 1;
                            if !v.is_zero() && bad.is_none() {
                                let p: String = probe.iter().map(|(m, c)| format!("({m},{c})")).collect();
                                bad = Some(format!("degree={beta:?} probe={p} residual {}", fmt_rat(&v)));
                            }
                        }
                        Err(Error::Indeterminate(_)) => skipped += 1,
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            let counts = format!("checked={checked} skipped={skipped}");
            let line = match bad {
                None => CheckLine::new(format!("z[k={k},g={g}]"), true, counts),
                Some(b) => CheckLine::new(format!("z[k={k},g={g}]"), false, format!("{counts} first: {b}")),
            };
            r.check(&line)?;
        }
    }
    r.check(&axiom_line(&puncture_check(&table)))?;
    r.check(&axiom_line(&dilaton_check(&table)))?;
    let mut classes: Vec<usize> = table.divisors.keys().copied().collect();
    classes.sort_unstable();
    for c in classes {
        r.check(&axiom_line(&divisor_check(&table, c)?))?;
    }
    Ok(())
}

fn cmd_genus0(a: &Genus0Args, r: &mut Report) -> CmdResult {
    let checks: Vec<Genus0Check> = if a.check.iter().any(|c| c == "all") {
        Genus0Check::ALL.to_vec()
    } else {
        a.check.iter().map(|c| c.parse::<Genus0Check>()).collect::<Result<_, _>>()?
    };
    let trunc = G0Truncation::new(a.degree, a.indices);
    let table;
    let g0 = match &a.table {
        Some(path) => {
            table = load_table(path, a.model.as_ref())?;
            Genus0::from_table(&table, trunc)?
        }
        None => {
            if let Some(spec) = &a.model {
                let m = load_model(spec)?;
                if m.emit() != builtin("point")?.emit() {
                    return Err(CliError::Usage("models other than the point need --table".into()));
                }
            }
            Genus0::point(trunc)?
        }
    };
    for c in checks {
        r.checks(&run_check(&g0, c)?)?;
    }
    Ok(())
}
