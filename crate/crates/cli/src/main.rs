use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kjellberg_cli::commands::{cmd_check, cmd_construct, cmd_measure, cmd_report, cmd_solve, load, Artifacts};
use kjellberg_cli::config::{parse_range, set_from_keys, RunConfig, SetSource};
use kjellberg_cli::CliError;

#[derive(Parser)]
#[command(name = "kjellberg", version, about = "Class-K potentials on slit planes: solve, construct, check, measure, report")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Single-threaded, serial reductions: byte-identical reruns.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a set and solve for its normalized class-K function.
    Solve(SolveArgs),
    /// Discretize the solved measure into an entire function.
    Construct {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Drop the first k zeros (constant reset to 1).
        #[arg(long)]
        skip: Option<usize>,
        /// Compare the potential with itself (zero error field).
        #[arg(long)]
        continuum: bool,
    },
    /// Run checks; exit status 1 if any fails.
    Check {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated subset, e.g. `harnack,zeros` or `criterion-7`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Walk-on-spheres harmonic measure of the boundary squares.
    Measure {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long)]
        n_walks: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write SVG plots and their CSVs.
    Report {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// `key = value` run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// kjellberg, corollary, sodin or thick.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Index range `lo..hi`, or just `n_max`.
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Explicit interval file (`lo hi` per line).
    #[arg(long, conflicts_with = "family")]
    intervals: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    panel_order: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SolveArgs {
    fn into_config(self, deterministic: bool) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_text(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(family) = &self.family {
            let mut keys = Vec::new();
            let mut push = |k: &str, v: Option<String>| {
                if let Some(v) = v {
                    keys.push((k.to_string(), v));
                }
            };
            push("alpha", self.alpha.map(|v| v.to_string()));
            push("beta", self.beta.map(|v| v.to_string()));
            push("rho", self.rho.map(|v| v.to_string()));
            push("p", self.p.map(|v| v.to_string()));
            if let Some(n) = &self.n {
                let (lo, hi) = parse_range(n)?;
                push("n_min", Some(lo.to_string()));
                push("n_max", Some(hi.to_string()));
            }
            cfg.set = set_from_keys(family, &keys)?;
        } else if let Some(path) = self.intervals {
            cfg.set = SetSource::File(path);
        } else if self.config.is_none() {
            return Err(CliError::Usage("give --family, --intervals or --config".into()));
        }
        if let Some(v) = self.nodes {
            cfg.nodes_per_interval = v;
        }
        if let Some(v) = self.panel_order {
            cfg.panel_order = v;
        }
        if let Some(v) = self.tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.out {
            cfg.out_dir = v;
        }
        cfg.deterministic |= deterministic;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let deterministic = cli.deterministic;
    match cli.cmd {
        Cmd::Solve(args) => {
            let cfg = args.into_config(deterministic)?;
            let h = cmd_solve(&cfg)?;
            let d = h.diagnostics();
            println!(
                "solved: {} unknowns, check residual {:.3e}, condition {:.3e}, trust radius {:.4e} -> {}",
                d.unknowns,
                d.check_residual,
                d.condition,
                h.trust_radius(),
                cfg.out_dir.display()
            );
        }
        Cmd::Construct { out, skip, continuum } => {
            let art = Artifacts::new(out);
            let skip = match skip {
                Some(k) => k,
                None => load(&art)?.cfg.skip,
            };
            let s = cmd_construct(&art, skip, continuum)?;
            println!(
                "constructed: {} zeros, R_emp {:.4e}, fitted C {:.4}, {} upper violations",
                s.zeros, s.r_emp, s.fitted_c, s.upper_violations
            );
        }
        Cmd::Check { out, only } => {
            let art = Artifacts::new(out);
            let exe = std::env::current_exe().ok();
            let records = cmd_check(&art, &only, exe.as_deref())?;
            for r in &records {
                println!("{r}");
            }
            let failed = records.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
        Cmd::Measure { out, radii, n_walks, seed } => {
            let art = Artifacts::new(out);
            let cfg = load(&art)?.cfg;
            let seed = seed.unwrap_or(cfg.seed);
            let rep = cmd_measure(
                &art,
                radii.as_deref().unwrap_or(&cfg.radii),
                n_walks.unwrap_or(cfg.n_walks),
                seed,
                deterministic || cfg.deterministic,
            )?;
            for (s, scaled) in rep.samples.iter().zip(rep.scaled()) {
                println!(
                    "r = {}: omega_hat {:.5} +- {:.5}, scaled {:.4}",
                    s.r, s.estimate.omega_hat, s.estimate.ci95, scaled
                );
            }
            let rec = rep.record();
            println!("{rec}");
            if !rec.passed {
                return Err(CliError::ChecksFailed(1));
            }
        }
        Cmd::Report { out } => {
            for p in cmd_report(&Artifacts::new(out))? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.deterministic {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(1).build_global() {
            log::warn!("could not pin the thread pool: {e}");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
