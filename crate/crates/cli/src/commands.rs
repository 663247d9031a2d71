use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use zp_core::biorth::Families;
use zp_core::blocks::{Profile, GROWTH_LAW};
use zp_core::synth::{psp_pairs, synth_system, SynthConfig};
use zp_core::{
    block_sum_growth, centralizer_defect, distortion_lower_bound_at, estimate_centralizer_constant,
    inevitability_proxy, lift_system, log_lift_direct, make_disjoint_blocks, normalize_flattened,
    omega_p, psp_flatten, validate_biorth, BiorthSystem, InevitabilityProbe, PExponent, SeqVector,
    TwistedVector,
};

use crate::args::{Command, GrowthKind, SweepTarget};
use crate::report::{float, Cell, Check, Report, Table};

/// Why a run stopped before producing a report.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unparsable vectors or files; exit status 2.
    Usage(String),
    /// A computation refused its input or could not complete; exit status 1.
    Compute(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Compute(m) => m,
        }
    }
}

impl From<zp_core::Error> for Failure {
    fn from(e: zp_core::Error) -> Self {
        use zp_core::Error as E;
        match e {
            E::InvalidExponent(_)
            | E::ZeroIndex
            | E::DuplicateIndex(_)
            | E::UnorderedIndex { .. }
            | E::NonFinite { .. }
            | E::Parse(_)
            | E::MalformedSystem(_)
            | E::InvalidArgument(_)
            | E::DeltaOutOfRange(_) => Failure::Usage(e.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

/// What a subcommand writes: a report record, or a system file.
pub enum Output {
    Report(Report),
    System { json: String, checks: Vec<Check> },
}

impl Output {
    pub fn checks(&self) -> &[Check] {
        match self {
            Output::Report(r) => &r.checks,
            Output::System { checks, .. } => checks,
        }
    }
}

const EXACT: f64 = 1e-12;
const CLOSED_FORM: f64 = 1e-10;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn exponent(p: f64) -> Result<PExponent> {
    Ok(PExponent::new(p)?)
}

fn vector(s: &str, flag: &str) -> Result<SeqVector> {
    s.parse()
        .map_err(|e: zp_core::Error| Failure::Usage(format!("--{flag}: {e}")))
}

fn load_system(path: &Path) -> Result<BiorthSystem> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    BiorthSystem::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn run(command: &Command, seed: u64) -> Result<Output> {
    let report = |name, input, value, table, checks| {
        Ok(Output::Report(Report {
            command: name,
            seed,
            input,
            value,
            table,
            checks,
        }))
    };
    match *command {
        Command::Omega { p, ref vec } => {
            let q = exponent(p)?;
            let x = vector(vec, "vec")?;
            let w = omega_p(&x, q);
            let mut table = Table::new(&["index", "x", "omega"]);
            for &(i, v) in x.entries() {
                table.push(vec![i.into(), v.into(), w.get(i).into()]);
            }
            let support_ok = w.support().all(|i| x.get(i) != 0.0);
            let finite = w.entries().iter().all(|(_, v)| v.is_finite());
            report(
                "omega",
                json!({"p": p, "vec": vec}),
                to_value(&w),
                table,
                vec![
                    Check::new("support_preserved", support_ok),
                    Check::new("finite", finite),
                ],
            )
        }
        Command::Qnorm {
            p,
            ref vec,
            ref vec2,
        } => {
            let q = exponent(p)?;
            let x = vector(vec, "vec")?;
            let y = vector(vec2, "vec2")?;
            let z = TwistedVector::new(x.clone(), y.clone(), q);
            let value = z.quasi_norm();
            let lifted = TwistedVector::lifted(y.clone(), q).quasi_norm();
            let mut table = Table::new(&["x_norm", "y_norm", "quasi_norm"]);
            table.push(vec![x.lp_norm(q).into(), y.lp_norm(q).into(), value.into()]);
            report(
                "qnorm",
                json!({"p": p, "vec": vec, "vec2": vec2}),
                float(value),
                table,
                vec![
                    Check::new("finite", value.is_finite()),
                    Check::new("lifted_identity", close(lifted, y.lp_norm(q), EXACT)),
                ],
            )
        }
        Command::Defect {
            p,
            ref vec,
            ref mult,
        } => {
            let q = exponent(p)?;
            let x = vector(vec, "vec")?;
            let a = match mult {
                Some(m) => vector(m, "mult")?,
                None => SeqVector::indicator(x.support())?,
            };
            let d = centralizer_defect(&a, &x, q);
            let scale = a.sup_norm() * x.lp_norm(q);
            let ratio = if scale > 0.0 { d / scale } else { 0.0 };
            let mut checks = vec![Check::new(
                "homogeneity",
                close(centralizer_defect(&a, &x.scale(2.0), q), 2.0 * d, EXACT),
            )];
            if a.entries().iter().all(|&(_, v)| v == 1.0) {
                let ax = a.pointwise_mul(&x).lp_norm(q);
                let closed = if ax > 0.0 {
                    ax * (x.lp_norm(q) / ax).ln()
                } else {
                    0.0
                };
                checks.push(
                    Check::new("indicator_closed_form", close(d, closed, CLOSED_FORM))
                        .with_detail(format!("closed form {closed:e}")),
                );
            }
            let mut table = Table::new(&["defect", "ratio"]);
            table.push(vec![d.into(), ratio.into()]);
            report(
                "defect",
                json!({"p": p, "vec": vec, "mult": mult}),
                json!({"defect": float(d), "ratio": float(ratio)}),
                table,
                checks,
            )
        }
        Command::Cconst { p, dim, trials } => {
            let q = exponent(p)?;
            let est = estimate_centralizer_constant(q, dim, trials, seed)?;
            let mut table = Table::new(&["max_ratio", "evaluated", "skipped"]);
            table.push(vec![
                est.max_ratio.into(),
                est.evaluated.into(),
                est.skipped.into(),
            ]);
            report(
                "cconst",
                json!({"p": p, "dim": dim, "trials": trials}),
                to_value(&est),
                table,
                vec![Check::new(
                    "finite",
                    est.max_ratio.is_finite() && est.max_ratio >= 0.0,
                )],
            )
        }
        Command::Loglift {
            p,
            n,
            profile,
            width,
        } => {
            let cell = loglift_cell(p, n, profile.into(), width)?;
            let mut table = Table::new(&["n", "value", "direct", "closed_form"]);
            table.push(vec![
                n.into(),
                cell.value.into(),
                cell.direct.into(),
                cell.closed.into(),
            ]);
            report(
                "loglift",
                json!({"p": p, "n": n, "profile": Profile::from(profile).to_string(), "width": width}),
                float(cell.value),
                table,
                vec![
                    Check::new("closed_form", close(cell.value, cell.closed, CLOSED_FORM)),
                    Check::new(
                        "direct_agreement",
                        close(cell.direct, cell.closed, CLOSED_FORM),
                    ),
                ],
            )
        }
        Command::Psp { p, n, width } => {
            let q = exponent(p)?;
            let pairs = psp_pairs(q, n, width, seed)?;
            let flat = psp_flatten(&pairs)?;
            let mut table = Table::new(&["j", "u_norm", "err", "bound"]);
            let (mut exact, mut dyadic, mut total) = (true, true, 0.0);
            for (j, (z, f)) in pairs.iter().zip(&flat).enumerate() {
                let u = z.y.lp_norm(q);
                let bound = 0.5_f64.powi(j as i32 + 1);
                exact &= close(f.err, u, EXACT);
                dyadic &= close(f.err, bound, EXACT);
                total += f.err;
                table.push(vec![(j + 1).into(), u.into(), f.err.into(), bound.into()]);
            }
            report(
                "psp",
                json!({"p": p, "n": n, "width": width}),
                json!({"total_err": float(total)}),
                table,
                vec![
                    Check::new("err_equals_norm", exact),
                    Check::new("dyadic_bound", dyadic),
                ],
            )
        }
        Command::Growth { p, n, kind, width } => {
            let rows = growth_rows(p, n, kind, width, seed)?;
            let mut table = Table::new(&["n", "value", "reference", "law"]);
            let mut exact = true;
            let mut above_two = None;
            for r in &rows {
                exact &= r.passed;
                if above_two.is_none() && r.ratio > 2.0 {
                    above_two = Some(r.n);
                }
                table.push(vec![
                    r.n.into(),
                    r.value.into(),
                    r.reference.into(),
                    GROWTH_LAW.into(),
                ]);
            }
            let kind_name = match kind {
                GrowthKind::Unit => "unit",
                GrowthKind::Flattened => "flattened",
            };
            let last = rows.last().expect("n >= 1");
            report(
                "growth",
                json!({"p": p, "n": n, "kind": kind_name, "width": width}),
                json!({"law": GROWTH_LAW, "final_ratio": float(last.ratio), "first_n_above_two": above_two}),
                table,
                vec![Check::new("ratio_closed_form", exact)],
            )
        }
        Command::Validate { ref system } => {
            let sys = load_system(system)?;
            let r = validate_biorth(&sys);
            let mut table = Table::new(&["j", "k", "margin"]);
            for (j, row) in r.margins.iter().enumerate() {
                for (k, &m) in row.iter().enumerate() {
                    table.push(vec![(j + 1).into(), (k + 1).into(), m.into()]);
                }
            }
            report(
                "validate",
                json!({"system": system.display().to_string()}),
                to_value(&r),
                table,
                vec![
                    Check::new("same_index_margin", r.same_index_ok),
                    Check::new("cross_margin", r.cross_ok),
                    Check::new("norms", r.norms_ok),
                ],
            )
        }
        Command::Lift { ref system } => {
            let sys = load_system(system)?;
            let lifted = lift_system(&sys)?;
            let (before, after) = (validate_biorth(&sys), validate_biorth(&lifted));
            let same = before
                .margins
                .iter()
                .flatten()
                .zip(after.margins.iter().flatten())
                .all(|(a, b)| (a - b).abs() <= EXACT);
            Ok(Output::System {
                json: lifted.to_json(),
                checks: vec![
                    Check::new("margins_preserved", same),
                    Check::new("lifted_valid", after.passes()),
                ],
            })
        }
        Command::Distort {
            ref system,
            eps,
            index,
        } => {
            let sys = load_system(system)?;
            let r = distortion_lower_bound_at(&sys, eps, index)?;
            let mut table = Table::new(&["index", "epsilon", "delta", "ratio", "bound", "holds"]);
            table.push(vec![
                r.index.into(),
                r.epsilon.into(),
                r.delta.into(),
                r.ratio.into(),
                r.bound.into(),
                r.holds.into(),
            ]);
            report(
                "distort",
                json!({"system": system.display().to_string(), "eps": eps, "index": index}),
                to_value(&r),
                table,
                vec![Check::new("ratio_above_bound", r.holds)],
            )
        }
        Command::Probe {
            ref system,
            family,
            ref basis,
            dim,
            budget,
            tolerance,
        } => {
            let sys = load_system(system)?;
            let Families::Ellp(families) = sys.families() else {
                return Err(Failure::Usage("probe needs an ellp system".into()));
            };
            if family == 0 || family > families.len() {
                return Err(Failure::Usage(format!(
                    "--family {family} outside 1..={}",
                    families.len()
                )));
            }
            let span = if basis.is_empty() {
                (1..=dim).map(SeqVector::unit).collect()
            } else {
                basis
                    .iter()
                    .map(|b| vector(b, "basis"))
                    .collect::<Result<Vec<_>>>()?
            };
            let probe = InevitabilityProbe::new(span, tolerance, budget, seed)?;
            let set = &families[family - 1].a;
            let r = inevitability_proxy(set, &probe, sys.p())?;
            let half = inevitability_proxy(set, &probe.with_budget(budget.div_ceil(2)), sys.p())?;
            let mut table = Table::new(&["distance", "evaluations", "nearest"]);
            table.push(vec![
                r.distance.into(),
                r.evaluations.into(),
                r.nearest.into(),
            ]);
            report(
                "probe",
                json!({
                    "system": system.display().to_string(),
                    "family": family,
                    "basis": basis,
                    "dim": dim,
                    "budget": budget,
                    "tolerance": tolerance,
                }),
                to_value(&r),
                table,
                vec![
                    Check::new("finite", r.distance.is_finite()),
                    Check::new("monotone_in_budget", r.distance <= half.distance),
                ],
            )
        }
        Command::Synth {
            p,
            delta,
            families,
            size,
            width,
            lift,
        } => {
            let cfg = SynthConfig {
                p: exponent(p)?,
                delta,
                families,
                size,
                width,
                seed,
            };
            let mut sys = synth_system(&cfg)?;
            if lift {
                sys = lift_system(&sys)?;
            }
            let valid = validate_biorth(&sys).passes();
            Ok(Output::System {
                json: sys.to_json(),
                checks: vec![Check::new("valid", valid)],
            })
        }
        Command::Sweep {
            target,
            ref p,
            ref n,
            ref eps,
            ref delta,
            profile,
            width,
        } => sweep(target, p, n, eps, delta, profile.into(), width, seed),
    }
}

struct LogliftCell {
    value: f64,
    direct: f64,
    closed: f64,
}

fn loglift_cell(p: f64, n: usize, profile: Profile, width: usize) -> Result<LogliftCell> {
    let q = exponent(p)?;
    let blocks = make_disjoint_blocks(n, width, profile, q, true)?;
    let nf = n as f64;
    Ok(LogliftCell {
        value: blocks.log_lift(),
        direct: log_lift_direct(blocks.blocks(), q),
        closed: nf.powf(1.0 / p) * nf.ln() / p,
    })
}

struct GrowthCell {
    n: usize,
    value: f64,
    reference: f64,
    ratio: f64,
    expected: f64,
    passed: bool,
}

fn growth_rows(
    p: f64,
    n: usize,
    kind: GrowthKind,
    width: usize,
    seed: u64,
) -> Result<Vec<GrowthCell>> {
    let q = exponent(p)?;
    if n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let pairs: Vec<TwistedVector> = match kind {
        GrowthKind::Unit => (1..=n)
            .map(|j| TwistedVector::new(SeqVector::zero(), SeqVector::unit(j), q))
            .collect(),
        GrowthKind::Flattened => {
            let flat = psp_flatten(&psp_pairs(q, n, width, seed)?)?;
            let ys: Vec<SeqVector> = flat.into_iter().map(|f| f.y).collect();
            normalize_flattened(&ys, q)?
                .vectors
                .into_iter()
                .map(|y| TwistedVector::first(y, q))
                .collect()
        }
    };
    let ns: Vec<usize> = (1..=n).collect();
    let table = block_sum_growth(&pairs, &ns)?;
    Ok(table
        .rows
        .iter()
        .map(|r| {
            let (expected, tol) = match kind {
                GrowthKind::Unit => (1.0 + (r.n as f64).ln() / p, CLOSED_FORM),
                GrowthKind::Flattened => (1.0, EXACT),
            };
            GrowthCell {
                n: r.n,
                value: r.value,
                reference: r.reference,
                ratio: r.ratio(),
                expected,
                passed: close(r.ratio(), expected, tol),
            }
        })
        .collect())
}

fn grid<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect();
    if items.is_empty() {
        return Err(Failure::Usage(format!("--{flag}: empty grid")));
    }
    items
        .into_iter()
        .map(|t| {
            t.parse()
                .map_err(|_| Failure::Usage(format!("--{flag}: cannot parse `{t}`")))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    target: SweepTarget,
    p: &str,
    n: &str,
    eps: &str,
    delta: &str,
    profile: Profile,
    width: usize,
    seed: u64,
) -> Result<Output> {
    let ps: Vec<f64> = grid("p", p)?;
    for &v in &ps {
        exponent(v)?;
    }
    let (columns, rows, input): (&[&'static str], Vec<Vec<Cell>>, Value) = match target {
        SweepTarget::Loglift => {
            let ns: Vec<usize> = grid("n", n)?;
            let cells: Vec<(f64, usize)> = ps
                .iter()
                .flat_map(|&p| ns.iter().map(move |&n| (p, n)))
                .collect();
            let rows = cells
                .par_iter()
                .map(|&(p, n)| {
                    let c = loglift_cell(p, n, profile, width)?;
                    let rel = (c.value - c.closed).abs() / c.closed.abs().max(1.0);
                    Ok(vec![
                        p.into(),
                        n.into(),
                        profile.to_string().into(),
                        c.value.into(),
                        c.closed.into(),
                        rel.into(),
                        (rel <= CLOSED_FORM).into(),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            (
                &[
                    "p",
                    "n",
                    "profile",
                    "value",
                    "closed_form",
                    "rel_err",
                    "passed",
                ],
                rows,
                json!({"target": "loglift", "p": ps, "n": ns, "profile": profile.to_string(), "width": width}),
            )
        }
        SweepTarget::Growth => {
            let ns: Vec<usize> = grid("n", n)?;
            let cells: Vec<(f64, usize)> = ps
                .iter()
                .flat_map(|&p| ns.iter().map(move |&n| (p, n)))
                .collect();
            let rows = cells
                .par_iter()
                .map(|&(p, n)| {
                    let r = growth_rows(p, n, GrowthKind::Unit, width, seed)?
                        .pop()
                        .expect("n >= 1");
                    Ok(vec![
                        p.into(),
                        n.into(),
                        r.value.into(),
                        r.reference.into(),
                        r.ratio.into(),
                        r.expected.into(),
                        r.passed.into(),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            (
                &[
                    "p",
                    "n",
                    "value",
                    "reference",
                    "ratio",
                    "expected",
                    "passed",
                ],
                rows,
                json!({"target": "growth", "p": ps, "n": ns}),
            )
        }
        SweepTarget::Distort => {
            let ds: Vec<f64> = grid("delta", delta)?;
            let es: Vec<f64> = grid("eps", eps)?;
            let mut cells = Vec::new();
            for &p in &ps {
                for &d in &ds {
                    for &e in &es {
                        cells.push((p, d, e));
                    }
                }
            }
            let rows = cells
                .par_iter()
                .map(|&(p, d, e)| {
                    let sys = synth_system(&SynthConfig::new(exponent(p)?, d, seed))?;
                    let r = distortion_lower_bound_at(&sys, e, 1)?;
                    Ok(vec![
                        p.into(),
                        d.into(),
                        e.into(),
                        r.ratio.into(),
                        r.bound.into(),
                        r.holds.into(),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            (
                &["p", "delta", "eps", "ratio", "bound", "passed"],
                rows,
                json!({"target": "distort", "p": ps, "delta": ds, "eps": es}),
            )
        }
    };
    let passed_col = columns.len() - 1;
    let failed = rows
        .iter()
        .filter(|r| r[passed_col] != Cell::Bool(true))
        .count();
    let mut table = Table::new(columns);
    let cells = rows.len();
    for row in rows {
        table.push(row);
    }
    Ok(Output::Report(Report {
        command: "sweep",
        seed,
        input,
        value: json!({"cells": cells, "failed": failed}),
        table,
        checks: vec![Check::new("all_cells", failed == 0)
            .with_detail(format!("{failed} of {cells} cells failed"))],
    }))
}
