#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod tasks;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::json;

use config::{Format, RunConfig, Task};

#[derive(Debug, Parser)]
#[command(name = "weylspec", version, about = "Spectral computations for half-line Sturm-Liouville operators")]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the task named in the config.
    #[arg(long, value_enum)]
    task: Option<Task>,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 picks automatically.
    #[arg(long, env = "WEYLSPEC_THREADS", default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    quiet: bool,
}

const EXIT_NUMERICAL: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn load(cli: &Cli) -> Result<(RunConfig, PathBuf), String> {
    let text = fs::read_to_string(&cli.config).map_err(|e| format!("{}: {e}", cli.config.display()))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(task) = cli.task {
        cfg.task = Some(task);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.directory = Some(out.clone());
    }
    cfg.validate()?;
    let dir = cfg
        .output
        .directory
        .clone()
        .ok_or_else(|| "no output directory (use --out or output.directory)".to_string())?;
    Ok((cfg, dir))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    fs::write(dir.join(name), contents).map_err(|e| format!("{}: {e}", dir.join(name).display()))
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, dir) = match load(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let task = cfg.task.expect("validated");
    let pot = match cfg.potential.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: potential: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let threads = weylspec::par::init_threads(cli.threads);
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("error: {}: {e}", dir.display());
        return ExitCode::from(EXIT_INPUT);
    }

    let started = Instant::now();
    let result = tasks::run(task, &cfg, &pot);
    let wall = started.elapsed().as_secs_f64();
    let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);

    let (status, out, error) = match result {
        Ok(out) if out.failed.is_empty() => ("ok", Some(out), None),
        Ok(out) => ("failed_checks", Some(out), None),
        Err(e) => ("numerical_error", None, Some(e.to_string())),
    };

    let mut files = Vec::new();
    let io = (|| -> Result<(), String> {
        if let Some(out) = &out {
            if cfg.output.formats.contains(&Format::Csv) {
                for (name, table) in &out.tables {
                    write(&dir, name, &table.render())?;
                    files.push(name.clone());
                }
            }
            if cfg.output.formats.contains(&Format::Json) {
                write(&dir, "summary.json", &json_text(&out.summary))?;
                files.push("summary.json".into());
            }
        }
        if status != "ok" {
            let diag = json!({
                "task": task.name(),
                "status": status,
                "error": error,
                "failed_checks": out.as_ref().map(|o| o.failed.clone()).unwrap_or_default(),
            });
            write(&dir, "diagnostic.json", &json_text(&diag))?;
            files.push("diagnostic.json".into());
        }
        let manifest = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "task": task.name(),
            "seed": cfg.seed,
            "threads": threads,
            "wall_time_s": wall,
            "unix_time": unix,
            "files": files,
            "estimates": out.as_ref().map(|o| o.estimates.clone()),
            "status": status,
        });
        write(&dir, "manifest.json", &json_text(&manifest))
    })();
    if let Err(e) = io {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_NUMERICAL);
    }

    if !cli.quiet {
        eprintln!("{}: {status} in {wall:.2}s, {} file(s) in {}", task.name(), files.len() + 1, dir.display());
    }
    match status {
        "ok" => ExitCode::SUCCESS,
        _ => {
            if let Some(e) = error {
                eprintln!("error: {e}");
            } else if let Some(out) = &out {
                eprintln!("failed checks: {}", out.failed.join(", "));
            }
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
