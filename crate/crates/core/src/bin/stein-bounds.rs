use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use stein_bounds::clt::clt_constants;
use stein_bounds::harness::{
    closed_form_bound, diagnostics_battery, empirical_wp, fit_rate, mc_bound, null_allowance,
    render_report, run_sweep, Format, SweepConfig,
};
use stein_bounds::Result;

#[derive(Parser)]
#[command(name = "stein-bounds", version, about = "Wasserstein bounds for normalized sums against the Gaussian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON sweep configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed and STEIN_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Sample sizes, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    m: Option<f64>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    c_p: Option<f64>,
    #[arg(long, global = true)]
    n_mc: Option<usize>,
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    #[arg(long, global = true)]
    n_emp: Option<usize>,
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Skip the integrated surrogate bound in `sweep` and `verify`.
    #[arg(long, global = true)]
    no_mc_bound: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the numerical constants of the W₂ bound.
    Constants,
    /// Closed-form bounds for each n.
    Bound,
    /// Integrated surrogate bound for each n.
    Mcbound,
    /// Empirical W_p between sums and Gaussian samples.
    Empirical,
    /// Bounds against empirical distances for the first n.
    Verify,
    /// Full sweep over the n grid.
    Sweep,
    /// Residual diagnostics on the CLT process.
    Diag {
        #[arg(long, default_value_t = 1_000_000)]
        diag_mc: usize,
        /// Number of summands of the process.
        #[arg(long, default_value_t = 8)]
        summands: usize,
    },
}

impl Common {
    fn config(&self) -> Result<SweepConfig> {
        let mut c = match &self.config {
            Some(p) => SweepConfig::from_file(p)?,
            None => SweepConfig::default(),
        };
        if let Ok(s) = std::env::var("STEIN_SEED") {
            c.seed = s
                .trim()
                .parse()
                .map_err(|_| stein_bounds::Error::Config(format!("STEIN_SEED is not a u64: `{s}`")))?;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f.clone() { c.$f = v; })* };
        }
        set!(seed, model, d, n, p, m, q, c_p, n_mc, quad_tol, n_emp, replicates);
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        if self.no_mc_bound {
            c.mc_bound = false;
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(bytes: &[u8], out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(v: &T, out: Option<&PathBuf>) -> Result<()> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    emit(&s, out)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = cli.common.config()?;
    let out = cfg.out.as_ref();
    let pool = match cfg.workers {
        Some(w) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| stein_bounds::Error::Config(format!("thread pool: {e}")))?,
        ),
        None => None,
    };
    let go = || -> Result<bool> {
        let model = cfg.model_spec().build()?;
        match cli.command {
            Command::Constants => {
                let k = clt_constants();
                emit_json(&k, out)?;
                Ok(k.c_prime < 14.0)
            }
            Command::Bound => {
                let rows = cfg
                    .n
                    .iter()
                    .map(|&n| {
                        let (b, exact) = closed_form_bound(model.as_ref(), n, &cfg)?;
                        Ok(json!({ "n": n, "bound": b, "exact": exact }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                emit_json(&rows, out)?;
                Ok(true)
            }
            Command::Mcbound => {
                let rows = cfg
                    .n
                    .iter()
                    .map(|&n| {
                        let (b, err) = mc_bound(model.as_ref(), n, &cfg)?;
                        Ok(json!({ "n": n, "bound": b, "combined_error": err }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                emit_json(&rows, out)?;
                Ok(true)
            }
            Command::Empirical => {
                let (null_mean, null_sd, allowance) = null_allowance(&cfg)?;
                let rows = cfg
                    .n
                    .iter()
                    .map(|&n| Ok(json!({ "n": n, "values": empirical_wp(model.as_ref(), n, &cfg)? })))
                    .collect::<Result<Vec<_>>>()?;
                emit_json(
                    &json!({ "null_mean": null_mean, "null_sd": null_sd, "allowance": allowance, "rows": rows }),
                    out,
                )?;
                Ok(true)
            }
            Command::Verify | Command::Sweep => {
                let mut c = cfg.clone();
                if matches!(cli.command, Command::Verify) {
                    c.n.truncate(1);
                }
                let rows = run_sweep(&c)?;
                emit(&render_report(&rows, cli.common.format)?, out)?;
                if rows.len() >= 3 {
                    if let Ok(fit) = fit_rate(&rows) {
                        eprintln!("rate fit: slope {:.4}, R² {:.4}", fit.slope, fit.r2);
                    }
                }
                Ok(rows.iter().all(|r| r.pass))
            }
            Command::Diag { diag_mc, summands } => {
                let entries = diagnostics_battery(model.as_ref(), summands, diag_mc, cfg.seed)?;
                emit_json(&entries, out)?;
                Ok(entries.iter().all(|e| e.ok()))
            }
        }
    };
    match pool {
        Some(p) => p.install(go),
        None => go(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
