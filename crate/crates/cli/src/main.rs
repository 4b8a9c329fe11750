use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use corsearch::harness::{self, summary_csv, ExperimentConfig, Scale, SweepSpec};
use corsearch::Error;

#[derive(Parser)]
#[command(name = "corsearch", version, about = "Corruption-robust contextual search simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its regret trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: the config's, else `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write `geometry.jsonl` with per-epoch snapshots.
        #[arg(long)]
        trace_geometry: bool,
    },
    /// Run a grid of experiments and write `summary.csv`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the base config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant battery and print one line per check.
    Validate {
        /// Full-size suites (minutes) instead of the quick ones.
        #[arg(long)]
        full: bool,
        /// Write `validate.json` with every check.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn out_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| config.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

fn run(config: &Path, seed: Option<u64>, out: Option<PathBuf>, geometry: bool) -> Result<bool, Failure> {
    let mut cfg = ExperimentConfig::from_json(&read(config)?)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.output.trace_geometry |= geometry;
    let dir = out_dir(out, &cfg);
    let results = harness::run_replicates(&cfg);
    let many = results.len() > 1;
    for (i, r) in results.into_iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let out = r.map_err(|e| Failure::Run(format!("seed {seed}: {e}")))?;
        let target = if many { dir.join(format!("seed-{seed}")) } else { dir.clone() };
        out.write(&target)?;
        let [eb, abs, pr] = out.trace.totals;
        println!(
            "{} seed {seed}: T={} eps-ball {eb} abs {abs:.6} pricing {pr:.6} -> {}",
            cfg.algorithm.name(),
            cfg.horizon,
            target.join("trace.csv").display()
        );
    }
    Ok(true)
}

fn sweep(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<bool, Failure> {
    let mut spec = SweepSpec::from_json(&read(config)?)?;
    if let Some(s) = seed {
        spec.base.seed = s;
    }
    let dir = out_dir(out, &spec.base);
    let rows = harness::sweep(&spec)?;
    let csv = summary_csv(&rows);
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Run(e.to_string()))?;
    std::fs::write(dir.join("summary.csv"), &csv).map_err(|e| Failure::Run(e.to_string()))?;
    print!("{csv}");
    Ok(rows.iter().all(|r| r.failures == 0))
}

fn validate(full: bool, out: Option<PathBuf>) -> Result<bool, Failure> {
    let checks = harness::battery(if full { Scale::Full } else { Scale::Quick });
    for c in &checks {
        println!("{}", c.line());
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} checks passed", checks.len());
    if let Some(dir) = out {
        let json: Vec<_> = checks
            .iter()
            .map(|c| serde_json::json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect();
        std::fs::create_dir_all(&dir).map_err(|e| Failure::Run(e.to_string()))?;
        let text = serde_json::to_string_pretty(&json).expect("json");
        std::fs::write(dir.join("validate.json"), text + "\n").map_err(|e| Failure::Run(e.to_string()))?;
    }
    Ok(passed == checks.len())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out, trace_geometry } => run(&config, seed, out, trace_geometry),
        Command::Sweep { config, seed, out } => sweep(&config, seed, out),
        Command::Validate { full, out } => validate(full, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
    }
}
