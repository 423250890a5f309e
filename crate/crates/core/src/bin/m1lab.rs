use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use m1lab::config::{preset, RunConfig, PRESETS};
use m1lab::pipeline::{closure_check, greens_check, sweep};
use m1lab::report::{format_report, write_kernel_scaling, write_outcome};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Check {
    /// Closure identity and Eddington factor bounds.
    Closure,
    /// Heat-kernel norm exponents.
    Greens,
}

/// Runs damped p-system / M1 decay experiments on the half-line.
///
/// Each `--config` or `--preset` is one run; several runs are executed in
/// parallel on `--threads` workers. Exit status is 0 only when every gated
/// verdict passes.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// TOML run configuration (repeatable).
    #[arg(long)]
    config: Vec<PathBuf>,
    /// Bundled configuration (repeatable).
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Vec<String>,
    /// Output root; each run writes into `<out>/<name>`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Overrides the seed of every run.
    #[arg(long)]
    seed: Option<u64>,
    /// Run a standalone check instead of simulations.
    #[arg(long, value_enum)]
    check: Option<Check>,
    /// Print the TOML of a preset and exit.
    #[arg(long, value_name = "PRESET")]
    print_config: Option<String>,
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: Cli) -> m1lab::Result<bool> {
    if let Some(name) = &cli.print_config {
        print!("{}", preset(name)?.to_toml());
        return Ok(true);
    }
    let seed = cli.seed.unwrap_or(7);
    match cli.check {
        Some(Check::Closure) => {
            let r = closure_check(200, 10_000, 10_000, seed)?;
            println!(
                "closure identity: max residual {:.3e} over {} samples",
                r.max_identity_residual, r.identity_samples
            );
            println!(
                "chi: range [{:.15}, {:.15}], monotone {} over {} samples",
                r.chi_min, r.chi_max, r.chi_monotone, r.chi_samples
            );
            return Ok(r.max_identity_residual <= 1e-12 && r.chi_monotone && r.chi_in_range());
        }
        Some(Check::Greens) => {
            let times = m1lab::solver::geometric_times(1e2, 1e4, 16);
            let lines = greens_check(1.0 / 3.0, &times)?;
            std::fs::create_dir_all(&cli.out).map_err(|e| m1lab::Error::Io {
                path: cli.out.clone(),
                source: e,
            })?;
            write_kernel_scaling(&cli.out.join("kernel_scaling.csv"), &lines)?;
            let mut ok = true;
            for l in &lines {
                let pass = l.gap().abs() <= 0.02;
                ok &= pass;
                println!(
                    "k={} j={} p={:<4} expected {:+.4} fitted {:+.4} {}",
                    l.k,
                    l.j,
                    l.p,
                    l.expected,
                    l.fit.exponent,
                    if pass { "pass" } else { "fail" }
                );
            }
            return Ok(ok);
        }
        None => {}
    }

    let mut configs = Vec::new();
    for path in &cli.config {
        configs.push(RunConfig::load(path)?);
    }
    for name in &cli.preset {
        configs.push(preset(name)?);
    }
    if configs.is_empty() {
        configs.push(preset("m1-small")?);
    }
    if let Some(seed) = cli.seed {
        for c in &mut configs {
            c.seed = seed;
        }
    }

    let mut all_ok = true;
    for (cfg, result) in configs.iter().zip(sweep(&configs, cli.threads)?) {
        println!("== {} ({})", cfg.name, cfg.theorem);
        match result {
            Ok(outcome) => {
                let dir = cfg.out_dir.clone().unwrap_or_else(|| cli.out.join(&cfg.name));
                let manifest = write_outcome(&outcome, &dir)?;
                print!("{}", format_report(outcome.report()));
                println!("artifacts: {}", dir.display());
                all_ok &= manifest.passed;
            }
            Err(e) => {
                eprintln!("error in {}: {e}", cfg.name);
                all_ok = false;
            }
        }
    }
    Ok(all_ok)
}
