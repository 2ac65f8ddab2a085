use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ogaprox_cli::config::{FairnessConfig, KeyValues, MksvmConfig, SyntheticConfig, ToyConfig, ValidateConfig};
use ogaprox_cli::experiments::{fairness, mksvm, synthetic, toy, validate};
use ogaprox_cli::report::{write_outputs, VERSION};
use ogaprox_cli::{ExperimentOutput, HarnessError, Result};

#[derive(Parser)]
#[command(name = "ogaprox", version = VERSION, about = "Run the ogaprox experiments and write CSV/JSON reports")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check Lipschitz constants and prox operators of every model problem.
    Validate(Common),
    /// Piecewise bilinear toy problem with the constant and adaptive schedules.
    Toy(Common),
    /// Multiple kernel SVM on one UCI dataset.
    Mksvm(Common),
    /// Minimax group fairness on heart-disease.
    Fairness(Common),
    /// Strongly convex-strongly concave quadratic with the linear schedule.
    Synthetic(Common),
}

#[derive(Args)]
struct Common {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` entries, appended after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn key_values(&self) -> Result<KeyValues> {
        let mut text = match &self.config {
            Some(p) => std::fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?,
            None => String::new(),
        };
        for s in &self.set {
            text.push('\n');
            text.push_str(s);
        }
        KeyValues::parse(&text)
    }
}

fn finish(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    for p in write_outputs(dir, out)? {
        log::info!("wrote {}", p.display());
    }
    println!("{}", serde_json::to_string_pretty(&out.summary).unwrap_or_default());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.verb {
        Verb::Validate(c) => {
            let out = validate::run_validate(&ValidateConfig::from_kv(&c.key_values()?)?, c.seed)?;
            finish(&out, &c.out)?;
            if out.summary["passed"] != serde_json::Value::Bool(true) {
                return Err(HarnessError::Validation("at least one problem failed its oracle checks".into()));
            }
            Ok(())
        }
        Verb::Toy(c) => finish(&toy::run_toy(&ToyConfig::from_kv(&c.key_values()?)?, c.seed)?, &c.out),
        Verb::Mksvm(c) => finish(&mksvm::run_mksvm(&MksvmConfig::from_kv(&c.key_values()?)?, c.seed)?, &c.out),
        Verb::Fairness(c) => {
            finish(&fairness::run_fairness(&FairnessConfig::from_kv(&c.key_values()?)?, c.seed)?, &c.out)
        }
        Verb::Synthetic(c) => {
            finish(&synthetic::run_synthetic(&SyntheticConfig::from_kv(&c.key_values()?)?, c.seed)?, &c.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
