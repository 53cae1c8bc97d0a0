use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use magchain::hilbert::SpinQuantum;
use magchain_harness::{
    run_fig2, run_fig4, run_fig5, run_fig6, run_pulse, run_table1, simulate, ExperimentResult, Fig4Variant,
    HarnessError, HarnessResult, PulseParams, Settings, SimulationConfig, Table1Params,
};

#[derive(Debug, Parser)]
#[command(name = "magchain", version, about = "Spin-chain storage and data-bus simulations")]
struct Cli {
    /// Output root; each experiment writes a subdirectory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Propagator tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Largest Hilbert-space dimension to allocate.
    #[arg(long = "max-dim", global = true, default_value_t = 1 << 21)]
    max_dim: usize,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bus-transfer F_max and Jt* for N = 2..10, short and long range.
    Table1 {
        #[arg(long = "d", default_value_t = -20.0, allow_hyphen_values = true)]
        d_over_j: f64,
        #[arg(long = "e", default_value_t = 0.0, allow_hyphen_values = true)]
        e_over_j: f64,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// N = 5 spectra against D/J.
    Fig2,
    /// Effective-vs-full curves (a, b) and scaling with N (c, d).
    Fig4 {
        #[arg(long, value_parser = ["a", "b", "c", "d"])]
        variant: String,
    },
    /// Bus transfer with dephasing.
    Fig5,
    /// Memory storage fidelity with dephasing.
    Fig6,
    /// Resonant memory-to-bus pulse on one magnet.
    Pulse {
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long = "d", default_value_t = -20.0, allow_hyphen_values = true)]
        zfs_d: f64,
        #[arg(long, default_value_t = 1.5)]
        spin: f64,
        #[arg(long)]
        frequency: Option<f64>,
    },
    /// Run the protocol described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> HarnessResult<ExperimentResult> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("--threads: {e}")))?;
    }
    let settings = Settings {
        tol: cli.tol,
        max_dim: cli.max_dim,
        ..Settings::default()
    };
    match cli.command {
        Command::Table1 {
            d_over_j,
            e_over_j,
            n_min,
            n_max,
        } => {
            let params = Table1Params {
                d_over_j,
                e_over_j,
                n_min,
                n_max,
            };
            let (rows, result) = run_table1(&settings, &params)?;
            println!("{:>3} {:>8} {:>6} {:>8} {:>6}", "N", "F_SR", "Jt_SR", "F_LR", "Jt_LR");
            for r in rows {
                println!(
                    "{:>3} {:>8.4} {:>6.2} {:>8.4} {:>6.2}",
                    r.n, r.f_max_sr, r.jt_star_sr, r.f_max_lr, r.jt_star_lr
                );
            }
            Ok(result)
        }
        Command::Fig2 => run_fig2(&settings),
        Command::Fig4 { variant } => run_fig4(&settings, variant.parse::<Fig4Variant>()?),
        Command::Fig5 => run_fig5(&settings),
        Command::Fig6 => run_fig6(&settings),
        Command::Pulse {
            amplitude,
            zfs_d,
            spin,
            frequency,
        } => {
            let spin = SpinQuantum::try_from(spin).map_err(|e| HarnessError::Config(e.to_string()))?;
            run_pulse(
                &settings,
                &PulseParams {
                    spin,
                    zfs_d,
                    amplitude,
                    frequency,
                },
            )
        }
        Command::Simulate { config } => simulate(&settings, &SimulationConfig::from_path(&config)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let outcome = run(cli).and_then(|result| {
        let dir = result.write(&out)?;
        Ok((result, dir))
    });
    match outcome {
        Ok((result, dir)) => {
            if let Some(summary) = result.table("summary") {
                for row in &summary.rows {
                    let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                    println!("{}", cells.join(" = "));
                }
            }
            println!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
