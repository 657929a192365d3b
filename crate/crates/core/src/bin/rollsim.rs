use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use rollsim::integrate::Method;
use rollsim::run::{disk_oracle_table, output_root, run_to_dir, RunRecord};
use rollsim::scenario::{bundled, bundled_names, resolve, Scenario};
use rollsim::{Result, SimError};

#[derive(Parser)]
#[command(name = "rollsim", version, about = "Rolling ball and disk simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Overrides {
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output root; each run writes into <out>/<scenario name>/.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario file (or bundled scenario name) and write results.
    Run {
        scenario: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the bundled scenario names.
    ListScenarios,
    /// Validate a scenario without integrating it.
    Check { scenario: String },
    /// Compare the planar equation with the torque-balance reference along a
    /// single-mass disk trajectory.
    OracleDisk { scenario: String },
    /// Run several scenarios concurrently.
    Sweep {
        scenarios: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn apply(mut sc: Scenario, o: &Overrides) -> Result<Scenario> {
    if let Some(m) = o.method {
        sc.integrator.method = m;
    }
    if let Some(a) = o.atol {
        sc.integrator.atol = a;
    }
    if let Some(r) = o.rtol {
        sc.integrator.rtol = r;
    }
    if let Some(s) = o.samples {
        sc.output.samples = s;
    }
    if let Some(d) = &o.out {
        sc.output.dir = Some(d.display().to_string());
    }
    sc.validate()?;
    Ok(sc)
}

fn run_one(arg: &str, o: &Overrides) -> Result<RunRecord> {
    let sc = apply(resolve(arg)?, o)?;
    let root = output_root(sc.output.dir.as_deref().map(std::path::Path::new));
    info!("running {} with {}", sc.name, sc.integrator.method.name());
    run_to_dir(&sc, &root)
}

/// Write to stdout; a closed pipe ends the output quietly.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("{e}");
        }
    }
}

fn report(e: &SimError) {
    let rec = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    eprintln!("{rec}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            report(&SimError::Validation(e.to_string().lines().next().unwrap_or("").to_string()));
            return ExitCode::from(2);
        }
    };
    let result: Result<()> = match cli.command {
        Command::Run { scenario, overrides } => run_one(&scenario, &overrides).map(|rec| {
            emit(&format!("{}\n", serde_json::to_string(&rec).expect("record serializes")));
        }),
        Command::ListScenarios => {
            let mut text = String::new();
            for name in bundled_names() {
                let desc = bundled(name).ok().and_then(|s| s.description).unwrap_or_default();
                text.push_str(&format!("{name}\t{desc}\n"));
            }
            emit(&text);
            Ok(())
        }
        Command::Check { scenario } => resolve(&scenario).map(|sc| {
            emit(&format!(
                "{}\n",
                serde_json::json!({ "scenario": sc.name, "system": sc.system.name(), "hash": sc.hash(), "valid": true })
            ));
        }),
        Command::OracleDisk { scenario } => resolve(&scenario).and_then(|sc| disk_oracle_table(&sc)).map(|rows| {
            let mut text = String::from("t,phi_ddot_variational,phi_ddot_newton,abs_diff\n");
            let mut worst = 0.0_f64;
            for (t, a, b) in rows {
                worst = worst.max((a - b).abs());
                text.push_str(&format!("{t:.16e},{a:.16e},{b:.16e},{:.3e}\n", (a - b).abs()));
            }
            emit(&text);
            eprintln!("max abs difference {worst:.3e}");
        }),
        Command::Sweep { scenarios, overrides } => {
            let results: Vec<(String, Result<RunRecord>)> = std::thread::scope(|s| {
                let handles: Vec<_> = scenarios
                    .iter()
                    .map(|a| {
                        let o = overrides.clone();
                        s.spawn(move || (a.clone(), run_one(a, &o)))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
            });
            let mut first_err = None;
            for (name, r) in results {
                match r {
                    Ok(rec) => emit(&format!("{}\n", serde_json::to_string(&rec).expect("record serializes"))),
                    Err(e) => {
                        log::error!("{name}: {e}");
                        first_err.get_or_insert(e);
                    }
                }
            }
            first_err.map_or(Ok(()), Err)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
