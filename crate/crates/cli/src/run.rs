//! Executes one scenario: tables at every channel and cut, invariant
//! checks, analyses and artifacts.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use qcomm::channels::{Channel, ChannelSpec, PathChannel};
use qcomm::info::{capacity_sweep, mutual_information, uniform_prior, CapacityReport, ConditionalTable, ROW_SUM_SLACK};
use qcomm::io::{write_json, write_json_file};
use qcomm::povm::{validate_family, FamilyJson, MeasurementFamily};
use qcomm::wigner::wigner_of_density;
use qcomm::{DensityOperator, FockSpace};

use crate::analysis::run_analysis;
use crate::report::{Check, Report, TailRecord};
use crate::scenario::{build_measurement, build_states, GridFormat, OutputSpec, Scenario};
use crate::ConfigError;

/// Agreement required between tables computed at different cuts.
pub const CUT_TOLERANCE: f64 = 1e-8;

/// `P(r|t)` for one path and one cut position.
#[derive(Clone, Debug)]
pub struct CutTable {
    pub channel_index: usize,
    pub channel: String,
    pub cut_index: usize,
    pub cut: f64,
    pub table: ConditionalTable,
}

/// Everything built while running a scenario.
pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub space: FockSpace,
    pub states: Vec<DensityOperator>,
    pub family: Option<MeasurementFamily>,
    pub channels: Vec<Option<(ChannelSpec, PathChannel)>>,
    pub tables: Vec<CutTable>,
}

pub struct RunOutput {
    pub report: Report,
    pub tables: Vec<CutTable>,
}

/// Runs `scenario`; artifacts and `report.json` go to `out_dir` when given.
/// Numerical failures become failed checks, only configuration and output
/// problems are errors.
pub fn run_scenario(scenario: &Scenario, out_dir: Option<&Path>) -> Result<RunOutput, ConfigError> {
    scenario.check()?;
    let space = scenario.space()?;
    let mut report = Report::new(&scenario.name, space.dim());
    let mut ctx = Context { scenario, space, states: Vec::new(), family: None, channels: Vec::new(), tables: Vec::new() };
    build(&mut ctx, &mut report);
    for spec in &scenario.analyses {
        report.extend(run_analysis(spec, &ctx));
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| ConfigError::Output(format!("{}: {e}", dir.display())))?;
        for spec in &scenario.outputs {
            match write_output(spec, &ctx, dir) {
                Ok(paths) => report.artifacts.extend(paths),
                Err(e) => report.push(Check::failed(format!("output:{}", output_name(spec)), e)),
            }
        }
        write_json_file(dir.join("report.json"), &report).map_err(|e| ConfigError::Output(e.to_string()))?;
    }
    Ok(RunOutput { report, tables: ctx.tables })
}

fn build(ctx: &mut Context, report: &mut Report) {
    let s = ctx.scenario;
    match build_states(&s.states, ctx.space) {
        Ok(states) => ctx.states = states,
        Err(e) => return report.push(Check::failed("build:states", e)),
    }
    for rho in &ctx.states {
        let r = rho.report();
        report.push(
            Check::flag(format!("state:{}", rho.label()), r.passed(), "")
                .with_detail(format!("trace defect {:.3e}, min eigenvalue {:.3e}", r.trace_defect, r.min_eigenvalue)),
        );
    }
    if let Some(m) = &s.measurement {
        match build_measurement(m, ctx.space) {
            Ok(fam) => {
                let r = validate_family(&fam);
                report.push(
                    Check::within(format!("family:{}", fam.name()), r.completeness_defect, qcomm::tolerance::COMPLETENESS_TOL)
                        .with_detail(format!(
                            "certified on {} levels, hermiticity {:.3e}, min eigenvalue {:.3e}",
                            r.certified_dim, r.max_hermiticity_defect, r.min_eigenvalue
                        )),
                );
                if !r.passed {
                    report.push(Check::flag(format!("family-elements:{}", fam.name()), false, "element check failed"));
                }
                ctx.family = Some(fam);
            }
            Err(e) => return report.push(Check::failed("build:measurement", e)),
        }
    }
    let specs: Vec<Option<ChannelSpec>> =
        if s.channels.is_empty() { vec![None] } else { s.channels.iter().copied().map(Some).collect() };
    for spec in specs {
        match spec.map(|c| c.build().map(|ch| (c, ch))).transpose() {
            Ok(ch) => ctx.channels.push(ch),
            Err(e) => return report.push(Check::failed("build:channel", e)),
        }
    }
    let Some(fam) = ctx.family.as_ref() else { return };
    if ctx.states.is_empty() {
        return;
    }
    for (ci, ch) in ctx.channels.iter().enumerate() {
        let name = ch.as_ref().map_or("none".to_string(), |(_, c)| c.name());
        for (fi, &f) in s.cuts.iter().enumerate() {
            match table_at_cut(&ctx.states, fam, ch.as_ref().map(|(_, c)| c), f) {
                Ok((table, tails)) => {
                    let defect = table.stochasticity_defect();
                    report.push(Check::within(
                        format!("rows:{name}:cut={f}"),
                        defect,
                        table.completeness_defect.max(fam.completeness_defect()) + ROW_SUM_SLACK,
                    ));
                    for (rho, tail) in ctx.states.iter().zip(tails) {
                        report.tail_masses.push(TailRecord {
                            state: rho.label().to_string(),
                            channel: name.clone(),
                            cut: f,
                            tail_mass: tail,
                        });
                    }
                    ctx.tables.push(CutTable { channel_index: ci, channel: name.clone(), cut_index: fi, cut: f, table });
                }
                Err(e) => report.push(Check::failed(format!("table:{name}:cut={f}"), e)),
            }
        }
        if s.cuts.len() > 1 {
            let mine: Vec<&CutTable> = ctx.tables.iter().filter(|t| t.channel_index == ci).collect();
            if mine.len() == s.cuts.len() {
                let worst = mine[1..]
                    .iter()
                    .map(|t| t.table.max_abs_difference(&mine[0].table).unwrap_or(f64::INFINITY))
                    .fold(0.0f64, f64::max);
                report.push(Check::within(format!("cut-invariance:{name}"), worst, CUT_TOLERANCE));
            }
        }
    }
}

/// Transmitter share applied to the states, receiver share folded into the
/// family; returns the table and each state's tail mass.
pub fn table_at_cut(
    states: &[DensityOperator],
    fam: &MeasurementFamily,
    channel: Option<&PathChannel>,
    f: f64,
) -> qcomm::Result<(ConditionalTable, Vec<f64>)> {
    let (relocated, before) = match channel {
        Some(ch) => {
            let (before, after) = ch.split(f);
            (after.relocate(fam)?, Some(before))
        }
        None => (fam.clone(), None),
    };
    let rows: qcomm::Result<Vec<(Vec<f64>, f64)>> = states
        .par_iter()
        .map(|rho| {
            let out = match &before {
                Some(b) => b.apply(rho)?,
                None => rho.clone(),
            };
            Ok((relocated.probabilities(&out)?, out.tail_mass()))
        })
        .collect();
    let (probs, tails): (Vec<_>, Vec<_>) = rows?.into_iter().unzip();
    let labels = states.iter().map(|r| r.label().to_string()).collect();
    Ok((ConditionalTable::from_rows(labels, &relocated, probs)?, tails))
}

fn output_name(spec: &OutputSpec) -> &'static str {
    match spec {
        OutputSpec::Table => "table",
        OutputSpec::Family => "family",
        OutputSpec::Wigner { .. } => "wigner",
        OutputSpec::Capacity => "capacity",
    }
}

#[derive(Serialize)]
struct CapacityEntry<'a> {
    channel: &'a str,
    cut: f64,
    uniform_prior_bits: f64,
    capacity: CapacityReport,
}

fn write_output(spec: &OutputSpec, ctx: &Context, dir: &Path) -> qcomm::Result<Vec<String>> {
    let mut written = Vec::new();
    let mut create = |name: String| -> qcomm::Result<(fs::File, PathBuf)> {
        let path = dir.join(&name);
        written.push(name);
        Ok((fs::File::create(&path)?, path))
    };
    match spec {
        OutputSpec::Table => {
            for t in &ctx.tables {
                let stem = format!("table-c{}-f{}", t.channel_index, t.cut_index);
                t.table.write_csv(create(format!("{stem}.csv"))?.0)?;
                t.table.write_sidecar(create(format!("{stem}.json"))?.0)?;
            }
        }
        OutputSpec::Family => {
            if let Some(fam) = &ctx.family {
                write_json(create("family.json".into())?.0, &FamilyJson::from(fam))?;
            }
        }
        OutputSpec::Wigner { state, grid, format } => {
            let rho = ctx.states.get(*state).ok_or(qcomm::Error::OutOfRange { level: *state, dim: ctx.states.len() })?;
            let w = wigner_of_density(rho, grid)?;
            match format {
                GridFormat::Csv => w.write_csv(create(format!("wigner-{state}.csv"))?.0)?,
                GridFormat::Binary => {
                    let mut out = BufWriter::new(create(format!("wigner-{state}.bin"))?.0);
                    w.write_binary(&mut out)?;
                    out.flush()?;
                }
            }
        }
        OutputSpec::Capacity => {
            let entries: qcomm::Result<Vec<CapacityEntry>> = ctx
                .tables
                .iter()
                .filter(|t| t.cut_index == 0)
                .map(|t| {
                    Ok(CapacityEntry {
                        channel: &t.channel,
                        cut: t.cut,
                        uniform_prior_bits: mutual_information(&t.table, &uniform_prior(t.table.n_settings()))?,
                        capacity: capacity_sweep(&t.table, None)?,
                    })
                })
                .collect();
            write_json(create("capacity.json".into())?.0, &entries?)?;
        }
    }
    Ok(written)
}
