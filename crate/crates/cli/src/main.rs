//! `svetlichny`: command-line front end for the genuine three-particle
//! nonlocality toolkit.

mod config;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use svetlichny::hidden_models::{enumerate_network_assignments, SvetlichnyPolytope};
use svetlichny::inequalities::{
    correlator_table, eval_s_probability_form, eval_svetlichny, stats_of, triple_distributions,
    triple_name, CorrelatorTable, TERMS,
};
use svetlichny::optimizer::{audit_fixed_menu, optimize_settings, SearchKind, SearchSpace};
use svetlichny::quantum::{Choice, Scenario};
use svetlichny::sampler::{estimate, sample_outcomes, ShotPlan};

use config::{Config, ConfigError};
use report::Report;

/// Tolerance for the printed `8 - 2S == Sv_signed` check.
const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "svetlichny",
    version,
    about = "Svetlichny-inequality analysis of three-qubit states"
)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print `key = value` lines instead of the human report.
    #[arg(long, global = true)]
    machine: bool,
    /// Seed for the optimizer restarts and the sampler.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV destination for `sample`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Config override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Correlators, Sv and S for a state and scenario.
    Evaluate,
    /// Search measurement settings maximizing |Sv|.
    Optimize,
    /// Exhaustive audit of a fixed setting menu.
    Audit,
    /// Membership of a correlator table in the hybrid-model polytope.
    Polytope,
    /// Finite-shot simulation with CSV output.
    Sample,
    /// Bond counts of the frustrated network.
    Network,
}

#[derive(Debug, thiserror::Error)]
enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(String),
    #[error("solver failure: {0}")]
    Solver(svetlichny::Error),
    #[error("{0}")]
    Io(String),
}

impl From<svetlichny::Error> for AppError {
    fn from(e: svetlichny::Error) -> Self {
        use svetlichny::Error as E;
        match e {
            E::SolverIterationCap { .. } | E::SolverNumerical(_) => AppError::Solver(e),
            E::Csv(m) => AppError::Io(m),
            other => AppError::Input(other.to_string()),
        }
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) | AppError::Input(_) => 2,
            AppError::Solver(_) => 3,
            AppError::Io(_) => 1,
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, AppError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                AppError::Input(format!("cannot read config {}: {e}", path.display()))
            })?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    for o in &cli.overrides {
        config.apply_override(o)?;
    }
    if let Some(seed) = cli.seed {
        config.set_from_flag("seed", seed.to_string(), "seed");
    }
    if let Some(out) = &cli.out {
        config.set_from_flag("out", out.display().to_string(), "out");
    }
    Ok(config)
}

fn table_lines(report: &mut Report, table: &CorrelatorTable) {
    for ([x, y, z], _) in TERMS {
        let name = triple_name(x, y, z);
        let key = format!("e_{}", name.replace('\'', "p").to_lowercase());
        report.num(&key, &format!("E({name})"), table.get(x, y, z));
    }
}

fn scenario_lines(report: &mut Report, scenario: &Scenario) {
    for (p, party) in ["a", "b", "c"].iter().enumerate() {
        for choice in Choice::BOTH {
            let s = scenario.setting(p, choice);
            let primed = choice == Choice::Primed;
            let key = format!("setting_{party}{}", if primed { "_prime" } else { "" });
            let label = format!(
                "setting {}{}",
                party.to_uppercase(),
                if primed { "'" } else { "" }
            );
            let [x, y, z] = s.direction.map(report::sig12);
            report.text(&key, &label, format!("{} [{x}, {y}, {z}]", s.label));
        }
    }
}

fn evaluate(config: &Config) -> Result<Report, AppError> {
    let state = config.state()?;
    let scenario = config.scenario()?;
    let dists = triple_distributions(&state, &scenario)?;
    let table = correlator_table(&state, &scenario)?;
    let sv = eval_svetlichny(&table);
    let born_table = CorrelatorTable::from_fn(|x, y, z| {
        dists[&[
            Choice::from_index(x),
            Choice::from_index(y),
            Choice::from_index(z),
        ]]
            .correlator()
    })?;
    let born_sv = eval_svetlichny(&born_table).signed_value;
    let s = eval_s_probability_form(&stats_of(&dists))?;
    let identity = (8.0 - 2.0 * s - born_sv).abs() <= IDENTITY_TOLERANCE;

    let mut r = Report::default();
    scenario_lines(&mut r, &scenario);
    table_lines(&mut r, &table);
    r.num("sv_signed", "Sv_signed", sv.signed_value)
        .num("sv_abs", "|Sv|", sv.absolute_value)
        .num("s", "S", s)
        .num("classical_bound", "classical bound", sv.classical_bound)
        .num("quantum_bound", "quantum bound", sv.quantum_bound)
        .flag(
            "violates_classical",
            "violates classical bound",
            sv.violates_classical(),
        )
        .text(
            "identity_check",
            "8 - 2S == Sv_signed",
            if identity { "pass" } else { "fail" },
        );
    Ok(r)
}

fn optimize(config: &Config) -> Result<Report, AppError> {
    let state = config.state()?;
    let kind = match config.raw("search").unwrap_or("planar") {
        "planar" => SearchKind::Planar,
        "sphere" => SearchKind::FullSphere,
        other => {
            return Err(config
                .error("search", format!("`{other}` is not planar or sphere"))
                .into())
        }
    };
    let base = if kind == SearchKind::Planar {
        SearchSpace::planar(32)
    } else {
        SearchSpace::full_sphere(32)
    };
    let space = SearchSpace {
        seeds: config.usize_or("seeds", base.seeds)?,
        max_iterations: config.usize_or("max_iterations", base.max_iterations)?,
        step_tolerance: config.f64_or("step_tolerance", base.step_tolerance)?,
        ..base
    }
    .with_rng_seed(config.u64_or("seed", 0)?);
    let result = optimize_settings(&state, &space)?;

    let mut r = Report::default();
    r.text(
        "search",
        "search",
        if kind == SearchKind::Planar {
            "planar"
        } else {
            "sphere"
        },
    );
    let names = ["a", "a_prime", "b", "b_prime", "c", "c_prime"];
    let labels = ["A", "A'", "B", "B'", "C", "C'"];
    let per = result.parameters.len() / 6;
    for (s, (name, label)) in names.iter().zip(labels).enumerate() {
        if per == 1 {
            r.num(
                &format!("angle_{name}"),
                &format!("angle {label} (rad)"),
                result.parameters[s],
            );
        } else {
            r.num(
                &format!("polar_{name}"),
                &format!("polar {label} (rad)"),
                result.parameters[2 * s],
            );
            r.num(
                &format!("azimuth_{name}"),
                &format!("azimuth {label} (rad)"),
                result.parameters[2 * s + 1],
            );
        }
    }
    r.num("sv_abs", "best |Sv|", result.best_value)
        .num("sv_signed", "Sv_signed", result.signed_value)
        .flag("converged", "converged", result.trace.converged)
        .int("restart", "winning restart", result.trace.restart as i64)
        .int("sweeps", "sweeps", result.trace.iterations as i64);
    if !result.trace.converged {
        r.text(
            "warning",
            "warning",
            "winning restart hit the sweep cap before converging",
        );
    }
    Ok(r)
}

fn audit(config: &Config) -> Result<Report, AppError> {
    let state = config.state()?;
    let menu = config.menu()?;
    let a = audit_fixed_menu(&state, &menu)?;
    let mut r = Report::default();
    r.text(
        "menu",
        "menu",
        menu.iter()
            .map(|s| s.label.as_str())
            .collect::<Vec<_>>()
            .join(", "),
    );
    scenario_lines(&mut r, &a.best_scenario);
    r.int(
        "scenarios_evaluated",
        "scenarios evaluated",
        a.scenarios_evaluated as i64,
    )
    .num("sv_abs", "best |Sv|", a.best_value)
    .num("sv_signed", "Sv_signed", a.signed_value)
    .text("verdict", "verdict", a.verdict.to_string());
    Ok(r)
}

fn polytope(config: &Config) -> Result<Report, AppError> {
    let polytope = SvetlichnyPolytope::new();
    let vertices = polytope.vertices();
    let mode = config.raw("target").unwrap_or("state");
    let target = if mode == "state" {
        correlator_table(&config.state()?, &config.scenario()?)?
    } else if mode == "uniform" {
        let mut flat = [0.0; 8];
        for v in vertices {
            for (f, e) in flat.iter_mut().zip(v.to_flat()) {
                *f += e / vertices.len() as f64;
            }
        }
        CorrelatorTable::from_flat(flat)?
    } else if let Some(k) = mode.strip_prefix("vertex:") {
        let bad = || {
            config.error(
                "target",
                format!("`{k}` is not a vertex index below {}", vertices.len()),
            )
        };
        let k: usize = k.parse().map_err(|_| bad())?;
        vertices.get(k).ok_or_else(bad)?.clone()
    } else {
        return Err(config
            .error(
                "target",
                format!("`{mode}` is not state, uniform, or vertex:<k>"),
            )
            .into());
    };
    let tolerance = config.f64_or("tolerance", 1e-9)?;
    let verdict = polytope.membership(&target, tolerance)?;

    let mut r = Report::default();
    r.text("target", "target", mode)
        .int("vertices", "vertices", vertices.len() as i64);
    table_lines(&mut r, &target);
    r.num(
        "sv_signed",
        "Sv_signed",
        eval_svetlichny(&target).signed_value,
    )
    .text(
        "membership",
        "membership",
        if verdict.inside { "inside" } else { "outside" },
    )
    .num(
        "violation_margin",
        "violation margin",
        verdict.violation_margin,
    );
    for (k, w) in verdict.weights.iter().enumerate() {
        if *w > tolerance {
            r.num(&format!("weight_{k}"), &format!("weight vertex {k}"), *w);
        }
    }
    Ok(r)
}

fn sample(config: &Config) -> Result<Report, AppError> {
    let state = config.state()?;
    let scenario = config.scenario()?;
    let shots = config.u64_or("shots", 100_000)?;
    let seed = config.u64_or("seed", 0)?;
    let out = config.raw("out").ok_or_else(|| ConfigError {
        origin: config::Origin::Flag("out"),
        key: "out".into(),
        message: "sample needs a CSV destination (--out or `out = path`)".into(),
    })?;
    let plan = ShotPlan::new(scenario, shots, seed)?;
    let record = sample_outcomes(&state, &plan)?;
    let bytes = record.to_csv_bytes()?;
    fs::write(out, bytes).map_err(|e| AppError::Io(format!("cannot write {out}: {e}")))?;
    let e = estimate(&record)?;

    let mut r = Report::default();
    r.int("shots_per_triple", "shots per triple", shots as i64)
        .int("seed", "seed", seed as i64)
        .text("csv", "csv", out);
    for ([x, y, z], _) in TERMS {
        let t = 4 * x + 2 * y + z;
        let name = triple_name(x, y, z);
        let key = name.replace('\'', "p").to_lowercase();
        r.num(
            &format!("e_{key}"),
            &format!("E({name}) estimate"),
            e.correlator_estimates[t],
        )
        .num(
            &format!("se_{key}"),
            &format!("E({name}) standard error"),
            e.standard_errors[t],
        );
    }
    r.num("sv_estimate", "Sv estimate", e.sv_estimate)
        .num(
            "sv_standard_error",
            "Sv standard error",
            e.sv_standard_error,
        )
        .num("sigma_above_4", "sigma above 4", e.sigma_above_4);
    Ok(r)
}

fn network() -> Report {
    let s = enumerate_network_assignments();
    let mut r = Report::default();
    r.int("min_satisfied", "min_satisfied", i64::from(s.min_satisfied))
        .int("max_satisfied", "max_satisfied", i64::from(s.max_satisfied));
    for (k, n) in s.histogram.iter().enumerate() {
        r.int(
            &format!("satisfied_{k}"),
            &format!("assignments with {k} satisfied"),
            *n as i64,
        );
    }
    r.int("total", "total assignments", s.total() as i64);
    r
}

fn run(cli: &Cli) -> Result<String, AppError> {
    let config = load_config(cli)?;
    let report = match cli.command {
        Command::Evaluate => evaluate(&config)?,
        Command::Optimize => optimize(&config)?,
        Command::Audit => audit(&config)?,
        Command::Polytope => polytope(&config)?,
        Command::Sample => sample(&config)?,
        Command::Network => network(),
    };
    Ok(report.render(cli.machine))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
