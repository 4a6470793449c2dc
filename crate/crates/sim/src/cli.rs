//! Command-line front end. Every subcommand maps onto one library call.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dpcascade_core::bounds::{self, BoundKind};

use crate::config::ExperimentConfig;
use crate::error::{Result, SimError};
use crate::harness::{self, Sweep};
use crate::output;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DPCASCADE_OUT_DIR";

const VARIANTS_HELP: &str = "Variants: non_private, dp_hybrid, ldp_laplace, ldp_gaussian, \
ldp_laplace_composed, cucb_ldp_gaussian

Exit codes: 0 success, 1 I/O error, 2 invalid configuration, 3 simulation fault";

#[derive(Debug, Parser)]
#[command(name = "dpcascade", version, about = "Private cascading bandit simulations", after_help = VARIANTS_HELP)]
pub struct Cli {
    /// Only print warnings and errors.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured grid and write the regret curves.
    Run(Common),
    /// Final regret over a list or range of privacy budgets.
    #[command(name = "sweep-eps")]
    SweepEps {
        #[command(flatten)]
        common: Common,
        /// Comma-separated budgets.
        #[arg(long, value_delimiter = ',', conflicts_with = "range", required_unless_present = "range")]
        eps: Vec<f64>,
        /// LO:HI:STEP, inclusive of HI.
        #[arg(long)]
        range: Option<String>,
    },
    /// Final regret for several item counts (weights regenerated).
    #[command(name = "sweep-L")]
    SweepL {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
    },
    /// Final regret for several list sizes (weights regenerated).
    #[command(name = "sweep-K")]
    SweepK {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
    },
    /// Evaluate the closed-form bounds for the configured instance.
    Bounds(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// KEY=VALUE override by dotted path, e.g. `horizon=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Base seed; repetition i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
}

impl Common {
    pub fn load(&self) -> Result<ExperimentConfig> {
        if !self.config.is_file() {
            return Err(SimError::Config(format!("config file not found: {}", self.config.display())));
        }
        let mut overrides = self.overrides.clone();
        if let Some(s) = self.seed {
            overrides.push(format!("base_seed={s}"));
        }
        if let Some(r) = self.reps {
            overrides.push(format!("repetitions={r}"));
        }
        ExperimentConfig::load(&self.config, &overrides)
    }

    fn out_path(&self, config: Option<&Path>, default_name: &str) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        if let Some(p) = config {
            return p.to_path_buf();
        }
        let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from);
        dir.join(default_name)
    }
}

/// Parses `LO:HI:STEP` into an inclusive list rounded to 12 decimals.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || SimError::Config(format!("range `{spec}` is not LO:HI:STEP"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(SimError::Config(format!("range `{spec}`: step must be positive")));
    }
    if hi < lo {
        return Err(SimError::Config(format!("range `{spec}` is empty")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Maps an error onto the process exit code.
pub fn exit_code(err: &SimError) -> i32 {
    match err {
        SimError::Config(_) => 2,
        e if e.is_simulation_fault() => 3,
        _ => 1,
    }
}

fn summary_path(regret: &Path) -> PathBuf {
    let stem = regret.file_stem().and_then(|s| s.to_str()).unwrap_or("regret");
    regret.with_file_name(format!("{stem}_summary.csv"))
}

/// Executes a parsed invocation. Tables go to `stdout` unless quiet.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let mut say = |text: &str| -> Result<()> {
        if cli.quiet {
            return Ok(());
        }
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| SimError::io("<stdout>", e))
    };
    match &cli.command {
        Command::Run(common) => {
            let config = common.load()?;
            let path = common.out_path(config.output.as_deref(), "regret.csv");
            let grid = harness::run_grid(&config)?;
            let rows = harness::summarize_grid(&config, &grid)?;
            if !grid.traces.is_empty() {
                output::write_csv(&grid.traces, &path)?;
            }
            output::write_summary(&rows, &summary_path(&path))?;
            say(&output::summary_table(&rows))?;
            say(&format!("wrote {}\n", path.display()))?;
            if !grid.failures.is_empty() {
                return Err(SimError::CellsFailed(grid.failures.len()));
            }
        }
        Command::SweepEps { common, eps, range } => {
            let values = match range {
                Some(r) => parse_range(r)?,
                None => eps.clone(),
            };
            sweep_command(common, &Sweep::Epsilon(values), "sweep_eps.csv", &mut say)?;
        }
        Command::SweepL { common, values } => {
            sweep_command(common, &Sweep::NumItems(values.clone()), "sweep_L.csv", &mut say)?;
        }
        Command::SweepK { common, values } => {
            sweep_command(common, &Sweep::ListSize(values.clone()), "sweep_K.csv", &mut say)?;
        }
        Command::Bounds(common) => {
            let config = common.load()?;
            let text = bounds_csv(&config)?;
            if let Some(p) = &common.out {
                std::fs::write(p, &text).map_err(|e| SimError::io(p, e))?;
            }
            say(&text)?;
        }
    }
    Ok(())
}

fn sweep_command(
    common: &Common,
    axis: &Sweep,
    default_name: &str,
    say: &mut dyn FnMut(&str) -> Result<()>,
) -> Result<()> {
    let config = common.load()?;
    let path = common.out_path(None, default_name);
    let rows = harness::sweep(&config, axis)?;
    output::write_summary(&rows, &path)?;
    say(&output::summary_table(&rows))?;
    say(&format!("wrote {}\n", path.display()))?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(SimError::CellsFailed(failed));
    }
    Ok(())
}

/// `bound,variant,epsilon,delta,t,value` at the configured horizon. Lower
/// bounds are the `ln T` coefficient times `ln T` and need a two-level
/// instance.
pub fn bounds_csv(config: &ExperimentConfig) -> Result<String> {
    let t = config.horizon as f64;
    let mut out = String::from("bound,variant,epsilon,delta,t,value\n");
    for v in &config.variants {
        for &eps in &v.epsilon {
            let instance = config.instance_for(v.name)?;
            let mut p = harness::bound_params(config, &instance).with_privacy(eps, v.delta);
            p.c1 = v.c1;
            if let Some(kind) = BoundKind::for_variant(v.name) {
                let ub = bounds::upper_bound(kind, &p, t)?;
                out.push_str(&format!(
                    "upper,{},{eps},{},{},{}\n",
                    v.name,
                    v.delta,
                    config.horizon,
                    output::format_sig6(ub)
                ));
            }
            let lower = match v.name {
                dpcascade_core::Variant::DpHybrid => Some(("lower_dp", bounds::lower_bound_dp(&p))),
                n if n.is_private() => Some(("lower_ldp", bounds::lower_bound_ldp(&p))),
                _ => None,
            };
            match lower {
                Some((name, Ok(coef))) => out.push_str(&format!(
                    "{name},{},{eps},{},{},{}\n",
                    v.name,
                    v.delta,
                    config.horizon,
                    output::format_sig6(coef * t.ln())
                )),
                Some((name, Err(e))) => log::info!("{name} skipped for {}: {e}", v.name),
                None => {}
            }
        }
    }
    Ok(out)
}
