use std::path::Path;

use ngfiber_core::bath::BathSpec;
use ngfiber_core::channel::{self, ChannelParams};
use ngfiber_core::design::{self, silica_preset, FiberSpec};
use ngfiber_core::entanglement::negativity_analytic;
use ngfiber_core::states::{self, build_state, DEFAULT_TAIL_TOL};
use ngfiber_core::{Complex64, Error};
use rayon::prelude::*;
use serde_json::Value;

use crate::args::{Cli, Command, DesignArgs, Fig1Args, Fig2Args, Format};
use crate::config::{self, Config, Observable};
use crate::table::{gnuplot_script, Cell, Table};
use crate::validate;
use crate::{CliError, CliResult};

fn invalid(name: &'static str, reason: impl Into<String>) -> CliError {
    CliError::Core(Error::InvalidParameter { name, reason: reason.into() })
}

/// `steps` evenly spaced points from `lo` to `hi`, both included.
fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn fig1(args: &Fig1Args) -> CliResult<Table> {
    if !(args.zeta_min > 0.0 && args.zeta_min <= args.zeta_max && args.zeta_max < 1.0) {
        return Err(invalid("zeta_min", format!("need 0 < {} <= {} < 1", args.zeta_min, args.zeta_max)));
    }
    if args.steps == 0 {
        return Err(invalid("steps", "need at least one point"));
    }
    let mut table = Table::new(["zeta", "negativity"]);
    for zeta in linspace(args.zeta_min, args.zeta_max, args.steps) {
        let state = build_state(args.p, Complex64::new(zeta, 0.0), DEFAULT_TAIL_TOL)?;
        table.push(vec![Cell::Real(zeta), Cell::Real(negativity_analytic(&state))]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Params {
    pub p: usize,
    pub zeta: f64,
    pub epsilon: f64,
    pub omega_c: f64,
    pub x_max: f64,
    pub steps: usize,
}

impl Fig2Params {
    /// Flags override the file, which overrides the silica defaults.
    pub fn resolve(args: &Fig2Args, cfg: &Config) -> Self {
        let preset = silica_preset();
        Fig2Params {
            p: args.p.or(cfg.state.p).unwrap_or(1),
            zeta: args.zeta.or(cfg.state.zeta).unwrap_or(0.5),
            epsilon: args.epsilon.or(cfg.channel.epsilon).unwrap_or(preset.channel.epsilon),
            omega_c: args.omega_c.or(cfg.bath.omega_c).unwrap_or(preset.bath.omega_c),
            x_max: args.x_max.or(cfg.fig2.x_max).unwrap_or(100.0),
            steps: args.steps.or(cfg.fig2.steps).unwrap_or(1000),
        }
    }
}

impl Default for Fig2Params {
    fn default() -> Self {
        Fig2Params::resolve(&Fig2Args::default(), &Config::default())
    }
}

/// Negativity with fluctuation decay at `x = ω_c τ_L`.
pub fn fig2_point(params: &Fig2Params, x: f64, epsilon: f64) -> CliResult<f64> {
    let preset = silica_preset();
    let state = build_state(params.p, Complex64::new(params.zeta, 0.0), DEFAULT_TAIL_TOL)?;
    let bath = BathSpec { omega_c: params.omega_c, ..preset.bath };
    let channel = ChannelParams { tau_l: x / params.omega_c, epsilon, ..preset.channel };
    Ok(channel::negativity_dissipative(&state, &channel, &bath)?)
}

pub fn fig2(params: &Fig2Params) -> CliResult<Table> {
    if !(params.x_max >= 0.0 && params.x_max.is_finite()) {
        return Err(invalid("x_max", format!("{} must be non-negative", params.x_max)));
    }
    if params.steps == 0 {
        return Err(invalid("steps", "need at least one interval"));
    }
    let preset = silica_preset();
    let state = build_state(params.p, Complex64::new(params.zeta, 0.0), DEFAULT_TAIL_TOL)?;
    let bath = BathSpec { omega_c: params.omega_c, ..preset.bath };
    bath.validate()?;
    let base = ChannelParams { epsilon: params.epsilon, ..preset.channel };
    base.validate()?;
    let mut table = Table::new(["x", "negativity_with_fluctuations", "negativity_without_fluctuations"]);
    for x in linspace(0.0, params.x_max, params.steps + 1) {
        let with = ChannelParams { tau_l: x / params.omega_c, ..base };
        let without = ChannelParams { epsilon: 0.0, ..with };
        table.push(vec![
            Cell::Real(x),
            Cell::Real(channel::negativity_dissipative(&state, &with, &bath)?),
            Cell::Real(channel::negativity_dissipative(&state, &without, &bath)?),
        ]);
    }
    Ok(table)
}

pub fn resolve_fiber(args: &DesignArgs, cfg: &Config) -> FiberSpec {
    let preset = silica_preset().fiber;
    FiberSpec {
        length: args.length.or(cfg.fiber.length).unwrap_or(preset.length),
        group_index: args.group_index.or(cfg.fiber.group_index).unwrap_or(preset.group_index),
        omega_c: args.omega_c.or(cfg.fiber.omega_c).unwrap_or(preset.omega_c),
        unit: args.unit.or(cfg.fiber.unit).map_or(preset.unit, Into::into),
        error_budget: args.error_budget.or(cfg.fiber.error_budget).unwrap_or(preset.error_budget),
        delta_spacing: args.delta.or(cfg.fiber.delta),
    }
}

/// Single-row design report. Without a chosen spacing the finite-length
/// bound is used.
pub fn design_report(fiber: &FiberSpec) -> CliResult<Table> {
    fiber.validate()?;
    let tau_l = design::transit_time(fiber)?;
    let bound = design::max_spacing(fiber, Some(tau_l))?;
    let chosen = FiberSpec { delta_spacing: Some(fiber.delta_spacing.unwrap_or(bound.finite)), ..*fiber };
    let timing = design::segment_time(&chosen)?;
    let segments = design::segment_count(&chosen)?;
    let mut table = Table::new([
        "length",
        "group_index",
        "omega_c",
        "error_budget",
        "tau_l",
        "x",
        "delta_max",
        "delta_max_asymptotic",
        "delta",
        "tau",
        "segments",
        "tau_omega_c",
        "separated",
    ]);
    table.push(vec![
        Cell::Real(fiber.length),
        Cell::Real(fiber.group_index),
        Cell::Real(fiber.angular_cutoff()),
        Cell::Real(fiber.error_budget),
        Cell::Real(tau_l),
        Cell::Real(bound.x),
        Cell::Real(bound.finite),
        Cell::Real(bound.asymptotic),
        Cell::Real(chosen.delta_spacing.expect("set above")),
        Cell::Real(timing.tau),
        Cell::Int(segments),
        Cell::Real(timing.tau_omega_c),
        Cell::Bool(timing.separated),
    ]);
    Ok(table)
}

/// Canonical axis order of sweep rows, independent of declaration order.
pub const SWEEP_AXES: [&str; 6] = ["p", "zeta", "gamma_plus", "temperature", "epsilon", "tau_l"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub p: usize,
    pub zeta: f64,
    pub gamma_plus: f64,
    pub temperature: f64,
    pub epsilon: f64,
    pub tau_l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub zeta_phase: f64,
    pub channel: ChannelParams,
    pub bath: BathSpec,
    pub points: Vec<SweepPoint>,
    pub observables: Vec<Observable>,
}

pub fn plan_sweep(cfg: &Config) -> CliResult<SweepPlan> {
    let preset = silica_preset();
    let ch = &cfg.channel;
    let channel = ChannelParams {
        omega_a: ch.omega_a.unwrap_or(preset.channel.omega_a),
        omega_b: ch.omega_b.unwrap_or(preset.channel.omega_b),
        gamma_plus: ch.gamma_plus.unwrap_or(preset.channel.gamma_plus),
        gamma_minus: ch.gamma_minus.unwrap_or(preset.channel.gamma_minus),
        tau_l: ch.tau_l.unwrap_or(preset.channel.tau_l),
        epsilon: ch.epsilon.unwrap_or(preset.channel.epsilon),
    };
    let bath = BathSpec {
        omega_phonon: cfg.bath.omega_phonon.unwrap_or(preset.bath.omega_phonon),
        temperature: cfg.bath.temperature.unwrap_or(preset.bath.temperature),
        omega_c: cfg.bath.omega_c.unwrap_or(preset.bath.omega_c),
        gibbs_tail_tol: preset.bath.gibbs_tail_tol,
    };
    let axis = |a: &Option<config::Axis>, name: &str, base: f64| -> CliResult<Vec<f64>> {
        a.as_ref().map_or(Ok(vec![base]), |a| a.points(name))
    };
    let g = &cfg.grid;
    let ps = g.p.clone().unwrap_or_else(|| vec![cfg.state.p.unwrap_or(1)]);
    if ps.is_empty() {
        return Err(CliError::Usage("grid axis p has no points".into()));
    }
    let zetas = axis(&g.zeta, "zeta", cfg.state.zeta.unwrap_or(0.5))?;
    let gammas = axis(&g.gamma_plus, "gamma_plus", channel.gamma_plus)?;
    let temps = axis(&g.temperature, "temperature", bath.temperature)?;
    let epsilons = axis(&g.epsilon, "epsilon", channel.epsilon)?;
    let taus = axis(&g.tau_l, "tau_l", channel.tau_l)?;

    let mut points = Vec::new();
    for &p in &ps {
        for &zeta in &zetas {
            for &gamma_plus in &gammas {
                for &temperature in &temps {
                    for &epsilon in &epsilons {
                        for &tau_l in &taus {
                            points.push(SweepPoint { p, zeta, gamma_plus, temperature, epsilon, tau_l });
                        }
                    }
                }
            }
        }
    }
    let zeta_phase = cfg.state.zeta_phase.unwrap_or(0.0);
    let plan = SweepPlan {
        zeta_phase,
        channel,
        bath,
        points,
        observables: cfg.output.observables.clone().unwrap_or_else(|| Observable::ALL.to_vec()),
    };
    // Reject every bad point before any evaluation starts.
    for pt in &plan.points {
        let (zeta, channel, bath) = plan.inputs(pt);
        channel.validate()?;
        bath.validate()?;
        states::normalization(pt.p, zeta, DEFAULT_TAIL_TOL)?;
    }
    Ok(plan)
}

impl SweepPlan {
    pub fn inputs(&self, pt: &SweepPoint) -> (Complex64, ChannelParams, BathSpec) {
        let zeta = Complex64::from_polar(pt.zeta, self.zeta_phase);
        let channel =
            ChannelParams { gamma_plus: pt.gamma_plus, epsilon: pt.epsilon, tau_l: pt.tau_l, ..self.channel };
        let bath = BathSpec { temperature: pt.temperature, ..self.bath };
        (zeta, channel, bath)
    }
}

/// One observable at one point, as a single library call.
pub fn observe(obs: Observable, p: usize, zeta: Complex64, channel: &ChannelParams, bath: &BathSpec) -> CliResult<f64> {
    let state = build_state(p, zeta, DEFAULT_TAIL_TOL)?;
    Ok(match obs {
        Observable::Negativity => negativity_analytic(&state),
        Observable::NegativityDephased => channel::negativity_after_dephasing(&state, channel, bath)?,
        Observable::NegativityDissipative => channel::negativity_dissipative(&state, channel, bath)?,
        Observable::NegativityCombined => channel::negativity_combined(&state, channel, bath)?,
        Observable::Fidelity => channel::fidelity(&state, channel, bath)?,
    })
}

/// Evaluate the plan concurrently; rows come back in grid order.
pub fn sweep(plan: &SweepPlan) -> CliResult<Table> {
    let columns = SWEEP_AXES.iter().copied().chain(plan.observables.iter().map(|o| o.column()));
    let mut table = Table::new(columns);
    let rows: Vec<CliResult<Vec<Cell>>> = plan
        .points
        .par_iter()
        .map(|pt| {
            let (zeta, channel, bath) = plan.inputs(pt);
            let mut row = vec![
                Cell::Int(pt.p as u64),
                Cell::Real(pt.zeta),
                Cell::Real(pt.gamma_plus),
                Cell::Real(pt.temperature),
                Cell::Real(pt.epsilon),
                Cell::Real(pt.tau_l),
            ];
            for &obs in &plan.observables {
                row.push(Cell::Real(observe(obs, pt.p, zeta, &channel, &bath)?));
            }
            Ok(row)
        })
        .collect();
    for row in rows {
        table.push(row?);
    }
    Ok(table)
}

enum Rendered {
    Table { table: Table, x: &'static str, ys: Vec<String>, title: &'static str },
    Record(Table),
    Report { text: String, json: String },
}

fn render(cli: &Cli, cfg: &Config) -> CliResult<(Rendered, Option<CliError>)> {
    Ok(match &cli.command {
        Command::Fig1(a) => {
            let table = fig1(a)?;
            (Rendered::Table { table, x: "zeta", ys: vec!["negativity".into()], title: "negativity vs squeezing" }, None)
        }
        Command::Fig2(a) => {
            let table = fig2(&Fig2Params::resolve(a, cfg))?;
            let ys = vec!["negativity_with_fluctuations".into(), "negativity_without_fluctuations".into()];
            (Rendered::Table { table, x: "x", ys, title: "negativity vs omega_c tau_L" }, None)
        }
        Command::Design(a) => (Rendered::Record(design_report(&resolve_fiber(a, cfg))?), None),
        Command::Validate(a) => {
            let outcomes = validate::run_checks(a.level, &validate::Tolerances::default(), cli.seed);
            let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.to_string()).collect();
            let text = validate::render_text(&outcomes);
            let mut json = serde_json::to_string_pretty(&outcomes).expect("plain values serialize");
            json.push('\n');
            let err = (!failed.is_empty()).then_some(CliError::ValidationFailed(failed));
            (Rendered::Report { text, json }, err)
        }
        Command::Sweep => {
            if cli.config.is_none() {
                return Err(CliError::Usage("sweep needs --config".into()));
            }
            let plan = plan_sweep(cfg)?;
            let table = sweep(&plan)?;
            let ys = plan.observables.iter().map(|o| o.column().to_string()).collect();
            let x = first_varying_axis(&table);
            (Rendered::Table { table, x, ys, title: "sweep" }, None)
        }
    })
}

fn first_varying_axis(table: &Table) -> &'static str {
    SWEEP_AXES
        .iter()
        .copied()
        .find(|a| table.column(a).is_some_and(|c| c.windows(2).any(|w| w[0] != w[1])))
        .unwrap_or("tau_l")
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => Config::default(),
    };
    if cli.emit_plot_script && (cli.out.is_none() || cli.format != Format::Csv) {
        return Err(CliError::Usage("--emit-plot-script needs --out with --format csv".into()));
    }
    let (rendered, deferred) = render(cli, &cfg)?;
    match rendered {
        Rendered::Table { table, x, ys, title } => {
            let text = match cli.format {
                Format::Csv => table.to_csv(),
                Format::Json => table.to_json(),
            };
            write_out(cli.out.as_deref(), &text)?;
            if cli.emit_plot_script {
                let out = cli.out.as_deref().expect("checked above");
                let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let ys: Vec<&str> = ys.iter().map(String::as_str).collect();
                let script = gnuplot_script(&name, &table, x, &ys, title);
                write_out(Some(&out.with_extension("gp")), &script)?;
            }
        }
        Rendered::Record(table) => {
            let text = match cli.format {
                Format::Csv => table.to_csv(),
                Format::Json => {
                    let record = table.records().into_iter().next().unwrap_or_default();
                    let mut s = serde_json::to_string_pretty(&Value::Object(record)).expect("plain values serialize");
                    s.push('\n');
                    s
                }
            };
            if cli.emit_plot_script {
                return Err(CliError::Usage("design produces no plot".into()));
            }
            write_out(cli.out.as_deref(), &text)?;
        }
        Rendered::Report { text, json } => {
            if cli.emit_plot_script {
                return Err(CliError::Usage("validate produces no plot".into()));
            }
            let body = match cli.format {
                Format::Csv => text,
                Format::Json => json,
            };
            write_out(cli.out.as_deref(), &body)?;
        }
    }
    deferred.map_or(Ok(()), Err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_defaults_are_increasing() {
        let args = Fig1Args { p: 1, zeta_min: 0.05, zeta_max: 0.85, steps: 50 };
        let t = fig1(&args).unwrap();
        assert_eq!(t.rows.len(), 50);
        let n = t.column("negativity").unwrap();
        assert!(n.windows(2).all(|w| w[1] > w[0]));
        assert!(fig1(&Fig1Args { zeta_min: 0.0, ..args.clone() }).is_err());
        assert!(fig1(&Fig1Args { zeta_max: 1.0, ..args }).is_err());
    }

    #[test]
    fn fig2_starts_equal_and_without_is_flat() {
        let t = fig2(&Fig2Params { steps: 20, ..Fig2Params::default() }).unwrap();
        let with = t.column("negativity_with_fluctuations").unwrap();
        let without = t.column("negativity_without_fluctuations").unwrap();
        assert_eq!(with[0], without[0]);
        assert!(without.iter().all(|v| *v == without[0]));
        assert!(with[1] < with[0]);
    }

    #[test]
    fn design_report_for_silica() {
        let t = design_report(&silica_preset().fiber).unwrap();
        let dmax = t.column("delta_max").unwrap()[0];
        assert!((dmax - 0.81e-3).abs() < 0.05 * 0.81e-3);
        let tau_l = t.column("tau_l").unwrap()[0];
        assert!((tau_l - 5.33e-6).abs() < 2e-3 * 5.33e-6);
        let mut loose = silica_preset().fiber;
        loose.error_budget = 0.5;
        let wider = design_report(&loose).unwrap().column("delta_max_asymptotic").unwrap()[0];
        assert!(wider > t.column("delta_max_asymptotic").unwrap()[0]);
    }

    #[test]
    fn sweep_plan_fails_fast_on_bad_point() {
        let cfg = config::parse("[grid]\nzeta = [0.5, 1.2]\n", Path::new("x")).unwrap();
        let err = plan_sweep(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), crate::EXIT_PARAMETER);
        let cfg = config::parse("[grid]\ntemperature = [-1.0]\n", Path::new("x")).unwrap();
        assert!(plan_sweep(&cfg).is_err());
    }

    #[test]
    fn sweep_grid_size_and_order() {
        let cfg = config::parse(
            "[bath]\ntemperature = 0.0\n[grid]\nzeta = { start = 0.1, stop = 0.6, steps = 10 }\ngamma_plus = { start = 0.0, stop = 1e9, steps = 10 }\n[output]\nobservables = [\"negativity\", \"fidelity\"]\n",
            Path::new("x"),
        )
        .unwrap();
        let t = sweep(&plan_sweep(&cfg).unwrap()).unwrap();
        assert_eq!(t.rows.len(), 100);
        let zeta = t.column("zeta").unwrap();
        assert_eq!(zeta[0], zeta[9]);
        assert!(zeta[10] > zeta[9]);
    }
}
