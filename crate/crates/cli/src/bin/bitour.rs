use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bitour_cli::{generate, parse_edge_list, render, run_task, write_edge_list, CliError, GenKind, ModeArg, RunConfig, Task};
use bitour_core::Params;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bitour", about = "Hamilton decompositions of regular bipartite tournaments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance as an edge list.
    Gen {
        #[arg(long)]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        flips: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a task on one or more instances and write JSON reports.
    Run {
        #[arg(long)]
        task: Task,
        /// Instance files; with several, `--out` names a directory.
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Prior report, for `--task verify`.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        eps_prime: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        nu_prime: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Largest instance (in vertices) accepted by `decompose`.
        #[arg(long, default_value_t = 32)]
        cap: usize,
        #[arg(long, default_value = "auto")]
        mode: ModeArg,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs one instance; the report is written even when verification fails.
fn run_one(task: Task, input: &Path, out: Option<&Path>, cfg: &RunConfig, prior: Option<&serde_json::Value>) -> Result<(), CliError> {
    let d = parse_edge_list(&read(input)?)?;
    match run_task(task, &d, cfg, prior) {
        Ok(v) => write(out, &render(&v)),
        Err(CliError::Verify(v)) => {
            write(out, &render(&v))?;
            Err(CliError::Verify(v))
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen { kind, n, flips, seed, out } => generate(kind, n, flips, seed).and_then(|d| write(out.as_deref(), &write_edge_list(&d))),
        Cmd::Run { task, inputs, report, out, eps, eps_prime, gamma, nu, nu_prime, tau, seed, jobs, cap, mode } => {
            let mut params = Params::default();
            for (slot, v) in [
                (&mut params.eps, eps),
                (&mut params.eps_prime, eps_prime),
                (&mut params.gamma, gamma),
                (&mut params.nu, nu),
                (&mut params.nu_prime, nu_prime),
                (&mut params.tau, tau),
            ] {
                if let Some(v) = v {
                    *slot = v;
                }
            }
            let cfg = RunConfig { params, seed, cap, mode };
            run(task, &inputs, report.as_deref(), out.as_deref(), &cfg, jobs)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bitour: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(task: Task, inputs: &[PathBuf], report: Option<&Path>, out: Option<&Path>, cfg: &RunConfig, jobs: usize) -> Result<(), CliError> {
    let prior = match report {
        Some(p) => Some(serde_json::from_str(&read(p)?).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?),
        None => None,
    };
    if inputs.len() == 1 {
        return run_one(task, &inputs[0], out, cfg, prior.as_ref());
    }
    let dir = out.ok_or_else(|| CliError::Usage("several inputs need --out <directory>".into()))?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let targets: Vec<(PathBuf, PathBuf)> = inputs
        .iter()
        .map(|p| {
            let stem = p.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
            (p.clone(), dir.join(format!("{stem}.json")))
        })
        .collect();
    let jobs = jobs.max(1);
    let mut results: Vec<Option<Result<(), CliError>>> = (0..targets.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let per = targets.len().div_ceil(jobs);
        for (ts, rs) in targets.chunks(per).zip(results.chunks_mut(per)) {
            let prior = prior.as_ref();
            s.spawn(move || {
                for ((input, output), slot) in ts.iter().zip(rs.iter_mut()) {
                    *slot = Some(run_one(task, input, Some(output), cfg, prior));
                }
            });
        }
    });
    let mut worst: Option<CliError> = None;
    for (r, (input, _)) in results.into_iter().zip(&targets) {
        if let Some(Err(e)) = r {
            eprintln!("bitour: {}: {e}", input.display());
            if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                worst = Some(e);
            }
        }
    }
    worst.map_or(Ok(()), Err)
}
