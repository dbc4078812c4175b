use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gsqg::checkpoint::Checkpoint;
use gsqg::config::{parse_config, preset, RunConfig, PRESET_NAMES};
use gsqg::experiment::{failure_file_name, run_experiment, TaskSummary};
use gsqg::spectral::derivative;
use gsqg::verify::{verify_suite, Group};
use gsqg::Error;

#[derive(Parser)]
#[command(name = "gsqg", version, about = "Front dynamics simulator and identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Threads {
    /// Worker threads for the parallel loops.
    #[arg(long, env = "GSQG_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a bundled preset.
    Run {
        #[arg(long, value_name = "PATH", conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "NAME")]
        preset: Option<String>,
        /// Output directory; overrides the config.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Seed for randomized initial data; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Print the resolved config with all defaults and exit.
        #[arg(long)]
        print_config: bool,
        #[command(flatten)]
        threads: Threads,
    },
    /// Run the constant, symbol and identity checks.
    Verify {
        /// Groups to run: constants, symbols, rhs, contourfield. All when omitted.
        selection: Vec<String>,
        /// Perturb a pinned reference value (fault injection).
        #[arg(long, hide = true)]
        tamper: Option<String>,
        #[command(flatten)]
        threads: Threads,
    },
    /// Print the header and basic statistics of a checkpoint.
    InspectCheckpoint { path: PathBuf },
}

fn set_threads(t: &Threads) -> Result<(), Error> {
    if let Some(k) = t.threads {
        if k == 0 {
            return Err(Error::Validation(vec!["--threads must be at least 1".into()]));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn load_config(config: Option<&Path>, preset_name: Option<&str>) -> Result<(RunConfig, String), Error> {
    match (config, preset_name) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            Ok((parse_config(&text)?, stem))
        }
        (None, Some(name)) => Ok((preset(name)?, name.to_string())),
        (None, None) => Err(Error::Validation(vec![format!(
            "either --config or --preset is required (presets: {})",
            PRESET_NAMES.join(", ")
        )])),
    }
}

fn cmd_run(
    config: Option<PathBuf>,
    preset_name: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    print_config: bool,
) -> Result<(), Error> {
    let (mut cfg, stem) = load_config(config.as_deref(), preset_name.as_deref())?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if print_config {
        println!("{}", cfg.emit());
        return Ok(());
    }
    let dir = out
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("gsqg-out").join(stem));
    let (summary, outputs) = match run_experiment(&cfg, &dir) {
        Ok(done) => done,
        Err(e) => {
            if dir.join(failure_file_name()).exists() {
                eprintln!("failure record: {}", dir.join(failure_file_name()).display());
            }
            return Err(e);
        }
    };
    println!("config hash {}", summary.stamp.config_hash);
    match &summary.result {
        TaskSummary::Evolve(e) => {
            println!("steps {} dt {} t_final {}", e.steps, e.dt, e.t_final);
            println!("l2_drift {:e} mean_drift {:e}", e.l2_drift, e.mean_drift);
            if let Some(h4) = e.h4_growth {
                println!("h4_growth {h4:e}");
            }
            println!(
                "max_slope initial {:e} peak {:e} ratio {:.4}",
                e.max_slope_initial, e.max_slope_peak, e.max_slope_ratio
            );
            match (&e.decay_fit, &e.decay_fit_error) {
                (Some(f), _) => println!("decay slope {:.4} on [{}, {}]", f.slope, f.t1, f.t2),
                (None, Some(msg)) => println!("decay fit unavailable: {msg}"),
                _ => {}
            }
            for p in &e.phase_probes {
                println!(
                    "phase xi {}: h variation {:e} v variation {:e} ratio {:.3}",
                    p.xi, p.h_variation, p.v_variation, p.ratio
                );
            }
        }
        TaskSummary::Kinematic(k) => {
            println!("kinematic residual {:e} (offset {}, sup phi_t {:e})", k.residual, k.offset, k.rhs_sup);
        }
        TaskSummary::ResonanceProbe { rows } => {
            println!("{} resonance rows", rows.len());
        }
    }
    println!("diagnostics {}", outputs.diagnostics.display());
    println!("summary {}", outputs.summary.display());
    Ok(())
}

fn cmd_verify(selection: Vec<String>, tamper: Option<String>) -> Result<bool, Error> {
    let groups = selection
        .iter()
        .map(|s| s.parse::<Group>())
        .collect::<Result<Vec<_>, _>>()?;
    let report = verify_suite(&groups, tamper.as_deref())?;
    for c in &report.checks {
        println!("{c}");
    }
    let failed = report.failures().len();
    println!("{} checks, {} failed", report.checks.len(), failed);
    Ok(failed == 0)
}

fn cmd_inspect(path: &Path) -> Result<(), Error> {
    let ck = Checkpoint::read(path)?;
    let s = &ck.state;
    let g = s.grid();
    println!("alpha {}", ck.alpha);
    println!("theta {}", ck.theta);
    println!("n_points {}", g.n_points());
    println!("length {}", g.length());
    println!("time {}", s.time());
    println!("config_hash {}", ck.config_hash);
    println!("mean {:e}", s.mean());
    println!("l2_norm {:e}", s.l2_norm());
    println!("max_abs {:e}", s.max_abs());
    println!("max_slope {:e}", derivative(s, 1).max_abs());
    Ok(())
}

fn report(e: &Error) -> ExitCode {
    eprintln!("error ({}): {e}", e.kind());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            preset,
            out,
            seed,
            print_config,
            threads,
        } => set_threads(&threads).and_then(|_| cmd_run(config, preset, out, seed, print_config)),
        Command::Verify {
            selection,
            tamper,
            threads,
        } => match set_threads(&threads).and_then(|_| cmd_verify(selection, tamper)) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(4),
            Err(e) => Err(e),
        },
        Command::InspectCheckpoint { path } => cmd_inspect(&path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
