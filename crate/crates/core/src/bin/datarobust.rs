use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use datarobust::analysis::VerifyOptions;
use datarobust::experiments::{
    run_length_sweep, run_noise_sweep, run_problem, run_satellite_study, run_scenario_study, ExperimentConfig, ProblemFile,
};
use datarobust::lmi::backend_from_env;
use datarobust::synthesis::{Objective, SynthesisOptions};

/// Robust state-feedback synthesis from prior multipliers and noisy data.
///
/// The solver backend is chosen with DATAROBUST_SOLVER (default: clarabel).
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for data generation and verification sampling.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Feasibility and gap tolerance of the conic solver.
    #[arg(long, global = true)]
    solver_tol: Option<f64>,
    /// Margin for strict matrix inequalities.
    #[arg(long, global = true)]
    eps: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Design a controller for a JSON problem file.
    Synth {
        file: PathBuf,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        /// Also write the compiled conic program as sparse triplets.
        #[arg(long)]
        dump: bool,
    },
    /// Regenerate the CSV data behind one of the studies.
    Repro {
        #[arg(value_enum)]
        study: Study,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    H2,
    Stabilize,
    Hinf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Fig3,
    Fig4,
    Fig5,
    Satellite,
}

fn options(cli: &Cli) -> (SynthesisOptions, VerifyOptions) {
    let mut synth = SynthesisOptions::default();
    if let Some(t) = cli.solver_tol {
        synth.solver.feas_tol = t;
        synth.solver.gap_tol = t;
    }
    if let Some(e) = cli.eps {
        synth.solver.strict_eps = e;
    }
    let verify = VerifyOptions {
        seed: cli.seed,
        solver: synth.solver.clone(),
        ..VerifyOptions::default()
    };
    (synth, verify)
}

fn run(cli: &Cli) -> datarobust::Result<()> {
    backend_from_env()?;
    let (mut synth, verify) = options(cli);
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Synth { file, objective, dump } => {
            if *dump {
                synth.solver.dump = Some(cli.out.join("problem.triplets"));
            }
            let (problem, base) = ProblemFile::load(file)?;
            let objective = objective.map(|o| match o {
                ObjectiveArg::H2 => Objective::H2,
                ObjectiveArg::Stabilize => Objective::Stabilize,
                ObjectiveArg::Hinf => Objective::Hinf,
            });
            let outcome = run_problem(&problem, &base, objective, &synth, &verify)?;
            std::fs::write(cli.out.join("result.json"), serde_json::to_string_pretty(&outcome.to_json())?)?;
            std::fs::write(cli.out.join("report.txt"), outcome.report.to_text())?;
            match outcome.result.gamma {
                Some(g) => println!("gamma = {g}"),
                None => println!("stabilizing gain found"),
            }
            println!("K = {:?}", outcome.result.k.as_slice());
            println!("verification: {}", if outcome.report.passed() { "passed" } else { "FAILED" });
        }
        Command::Repro { study } => {
            let cfg = ExperimentConfig {
                seed: cli.seed,
                synthesis: synth,
                verify,
                ..ExperimentConfig::default()
            };
            let (out, stem) = match study {
                Study::Fig3 => (run_scenario_study(&cfg)?, "fig3"),
                Study::Fig4 => (run_noise_sweep(&cfg)?, "fig4"),
                Study::Fig5 => (run_length_sweep(&cfg)?, "fig5"),
                Study::Satellite => (run_satellite_study(&cfg)?.output, "satellite"),
            };
            out.write(&cli.out, stem)?;
            for note in &out.notes {
                println!("{note}");
            }
            println!(
                "wrote {} table(s) and {} verification entries to {}, {} violations",
                out.tables.len(),
                out.reports.len(),
                cli.out.display(),
                out.violations()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
