//! Command-line interface.
//!
//! Subcommands: simulate, h-study, k-study, eps-study, decay, verify.
//! Exit codes: 0 success, 1 configuration/usage error, 2 solver failure,
//! 3 failed verification.

use crate::diagnostics::{decay_report, linf_decay_monitor};
use crate::error::Error;
use crate::io::config::{parse_config, RunConfig, StudyConfig};
use crate::io::{csv, vtk};
use crate::mesh::Mesh;
use crate::presets::build_mesh;
use crate::scheme::{
    run, EnergyChecker, NormRecorder, StepContext, StepObserver, Stepper,
};
use crate::studies::{eps_study, h_study, k_study, ErrorTable, RateReport};
use crate::verification::full_verification;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "llbfem",
    version,
    about = "Finite element solver for the Landau-Lifshitz-Bloch equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scheme and write norm series plus VTK snapshots.
    Simulate(CommonArgs),
    /// Spatial convergence study on nested meshes.
    #[command(name = "h-study")]
    HStudy(CommonArgs),
    /// Time-step convergence study on a fixed mesh.
    #[command(name = "k-study")]
    KStudy(CommonArgs),
    /// Regularisation study against the eps = 0 reference.
    #[command(name = "eps-study")]
    EpsStudy(CommonArgs),
    /// Run the scheme and report the discrete decay margins.
    Decay(CommonArgs),
    /// Run the dense-oracle and manufactured-solution suites.
    Verify(CommonArgs),
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SolveFailed(_) | Error::SingularMatrix => 2,
        Error::StepFailed { source, .. } => exit_code(source),
        _ => 1,
    }
}

/// Entry point; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own usage/help text; --help and --version
            // are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (args, action): (&CommonArgs, fn(&RunConfig, &CommonArgs) -> Result<i32, Error>) =
        match &cli.command {
            Command::Simulate(a) => (a, cmd_simulate),
            Command::HStudy(a) => (a, cmd_h_study),
            Command::KStudy(a) => (a, cmd_k_study),
            Command::EpsStudy(a) => (a, cmd_eps_study),
            Command::Decay(a) => (a, cmd_decay),
            Command::Verify(a) => (a, cmd_verify),
        };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return 1;
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match action(&cfg, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn build_cfg_mesh(cfg: &RunConfig) -> Result<Mesh, Error> {
    build_mesh(cfg.domain, cfg.n)
}

// Writes one VTK snapshot per stride steps.
struct SnapshotWriter<'a> {
    stride: usize,
    out_dir: &'a Path,
    num_steps: usize,
    enabled: bool,
}

impl StepObserver for SnapshotWriter<'_> {
    fn observe(&mut self, ctx: &StepContext) -> Result<(), Error> {
        if !self.enabled {
            return Ok(());
        }
        if ctx.step % self.stride == 0 || ctx.step == self.num_steps {
            let path = self.out_dir.join(format!("u_{:06}.vtk", ctx.step));
            vtk::write_vtk(ctx.mesh, &ctx.current.u, &path)?;
        }
        Ok(())
    }
}

fn warn_time_step(cfg: &RunConfig, mesh: &Mesh, quiet: bool) -> Result<(), Error> {
    if quiet {
        return Ok(());
    }
    let stepper = Stepper::new(mesh, cfg.params, cfg.grid.k(), cfg.solver)?;
    if let Some(w) = &stepper.time_step_warning {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig, args: &CommonArgs) -> Result<i32, Error> {
    let mesh = build_cfg_mesh(cfg)?;
    warn_time_step(cfg, &mesh, args.quiet)?;
    let u0 = cfg.initial_fn()?;
    let mut norms = NormRecorder::default();
    let mut energy = EnergyChecker::default();
    let mut snapshots = SnapshotWriter {
        stride: cfg.output.snapshot_stride,
        out_dir: &args.out,
        num_steps: cfg.grid.num_steps(),
        enabled: cfg.output.vtk,
    };
    run(&mesh, &cfg.params, &cfg.grid, &u0, &cfg.solver, &mut [
        &mut norms,
        &mut energy,
        &mut snapshots,
    ])?;
    csv::write_norms_csv(&norms.samples, &args.out.join("norms.csv"))?;
    let worst = energy
        .residuals
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    if !args.quiet {
        println!(
            "simulate: {} steps on {} vertices, final |u|_L2 = {:.6e}, worst energy defect {:.3e}",
            cfg.grid.num_steps(),
            mesh.num_vertices(),
            norms.samples.last().map(|s| s.l2).unwrap_or(0.0),
            worst
        );
    }
    Ok(0)
}

fn print_rates(axis: &str, table: &ErrorTable, rates: &RateReport, quiet: bool) {
    if quiet {
        return;
    }
    println!("{axis}-study: {} levels", table.levels.len());
    for level in &table.levels {
        println!(
            "  {} = {:.4e}: err_l2 {:.4e}, err_h1 {:.4e}, err_linf {:.4e}",
            axis, level.param, level.l2, level.h1, level.linf
        );
    }
    let s = |r: &Option<f64>| r.map(|v| format!("{v:.3}")).unwrap_or_else(|| "n/a".into());
    println!(
        "  observed orders: l2 {}, h1 {}, linf {}",
        s(&rates.l2.summary),
        s(&rates.h1.summary),
        s(&rates.linf.summary)
    );
}

fn cmd_h_study(cfg: &RunConfig, args: &CommonArgs) -> Result<i32, Error> {
    let levels = match &cfg.study {
        Some(StudyConfig::H { levels }) => *levels,
        _ => {
            return Err(Error::Config(
                "h-study requires a [study] block with axis = \"h\"".into(),
            ))
        }
    };
    let mesh = build_cfg_mesh(cfg)?;
    warn_time_step(cfg, &mesh, args.quiet)?;
    let u0 = cfg.initial_fn()?;
    let (table, rates) = h_study(&mesh, &cfg.params, &cfg.grid, &u0, levels, &cfg.solver)?;
    csv::write_error_table_csv(&table, &rates, &args.out.join("h_study.csv"))?;
    print_rates("h", &table, &rates, args.quiet);
    Ok(0)
}

fn cmd_k_study(cfg: &RunConfig, args: &CommonArgs) -> Result<i32, Error> {
    let n_sequence = match &cfg.study {
        Some(StudyConfig::K { n_sequence }) => n_sequence.clone(),
        _ => {
            return Err(Error::Config(
                "k-study requires a [study] block with axis = \"k\"".into(),
            ))
        }
    };
    let mesh = build_cfg_mesh(cfg)?;
    let u0 = cfg.initial_fn()?;
    let (table, rates) = k_study(
        &mesh,
        &cfg.params,
        cfg.grid.t_final(),
        &n_sequence,
        &u0,
        &cfg.solver,
    )?;
    csv::write_error_table_csv(&table, &rates, &args.out.join("k_study.csv"))?;
    print_rates("k", &table, &rates, args.quiet);
    Ok(0)
}

fn cmd_eps_study(cfg: &RunConfig, args: &CommonArgs) -> Result<i32, Error> {
    let eps_sequence = match &cfg.study {
        Some(StudyConfig::Eps { eps_sequence }) => eps_sequence.clone(),
        _ => {
            return Err(Error::Config(
                "eps-study requires a [study] block with axis = \"eps\"".into(),
            ))
        }
    };
    let mesh = build_cfg_mesh(cfg)?;
    let u0 = cfg.initial_fn()?;
    let (table, rates) = eps_study(&mesh, &cfg.params, &cfg.grid, &u0, &eps_sequence, &cfg.solver)?;
    csv::write_error_table_csv(&table, &rates, &args.out.join("eps_study.csv"))?;
    print_rates("eps", &table, &rates, args.quiet);
    Ok(0)
}

fn cmd_decay(cfg: &RunConfig, args: &CommonArgs) -> Result<i32, Error> {
    let mesh = build_cfg_mesh(cfg)?;
    let u0 = cfg.initial_fn()?;
    let mut norms = NormRecorder::default();
    run(&mesh, &cfg.params, &cfg.grid, &u0, &cfg.solver, &mut [&mut norms])?;
    let report = decay_report(&norms.samples, &cfg.params, cfg.grid.k())?;
    csv::write_decay_csv(&report, &args.out.join("decay.csv"))?;
    let monitor = linf_decay_monitor(&norms.samples, &cfg.params);
    csv::write_monitor_csv(&monitor, "t,linf_times_exp_kappa2_t", &args.out.join("linf_monitor.csv"))?;
    csv::write_norms_csv(&norms.samples, &args.out.join("norms.csv"))?;
    if !args.quiet {
        println!(
            "decay: lambda = {:.6}, min margin = {:.3e}, hypothesis (eps < k1/k2) {}",
            report.lambda,
            report.min_margin(),
            if report.hypothesis_satisfied { "holds" } else { "violated" }
        );
    }
    Ok(0)
}

fn cmd_verify(_cfg: &RunConfig, args: &CommonArgs) -> Result<i32, Error> {
    let reports = full_verification()?;
    let mut failed = 0usize;
    for r in &reports {
        if !args.quiet || !r.pass {
            println!(
                "{} {}: discrepancy {:.3e} (threshold {:.1e})",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.max_abs_discrepancy,
                r.threshold
            );
        }
        if !r.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("verify: {failed} of {} checks failed", reports.len());
        Ok(3)
    } else {
        if !args.quiet {
            println!("verify: all {} checks passed", reports.len());
        }
        Ok(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_exits_one() {
        assert_eq!(cli_main(["llbfem", "frobnicate"]), 1);
    }

    #[test]
    fn missing_config_exits_one() {
        assert_eq!(cli_main(["llbfem", "simulate", "--config", "/nonexistent.toml"]), 1);
    }

    #[test]
    fn bad_config_exits_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "preset = \"sim99\"").unwrap();
        assert_eq!(
            cli_main(["llbfem", "simulate", "--config", path.to_str().unwrap()]),
            1
        );
    }
}
