use clap::{Parser, Subcommand};
use declip::harness::{
    emit_report, list_methods, run_experiment, run_method, ExperimentConfig,
};
use declip::signal::{
    clip_to_target_sdr, delta_sdr_clipped, sdr, sdr_clipped, ClipMask, Signal,
};
use declip::wav::{read_wav, write_wav};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "declip", about = "Declipping solvers and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Declip one WAV file with one method.
    Single {
        #[arg(long)]
        method: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Clipping threshold of the input recording.
        #[arg(long, conflicts_with = "clip_sdr")]
        theta: Option<f64>,
        /// Clip the input to this SDR (dB) first, then declip.
        #[arg(long)]
        clip_sdr: Option<f64>,
        /// Copy reliable input samples into the output verbatim.
        #[arg(long)]
        replace_reliable: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print SDR / SDRc / delta-SDRc between a reference and an estimate.
    Metrics {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        estimate: PathBuf,
        #[arg(long)]
        theta: f64,
    },
    /// Print the method registry.
    ListMethods,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> declip::Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let outcome = run_experiment(&cfg)?;
            for c in &outcome.clipping {
                println!(
                    "clip  {:<14} {:>5.1} dB  theta={:.4}  clipped={:.2}%",
                    c.signal, c.input_sdr, c.theta, c.percent_clipped
                );
            }
            for c in &outcome.cells {
                println!(
                    "cell  {:<14} {:>5.1} dB  {:<8} dSDRc={:+.4}  R={} HL={} iters={} t={:.4}s",
                    c.signal,
                    c.input_sdr,
                    c.method,
                    c.delta_sdr_c,
                    c.consistent_r,
                    c.consistent_hl,
                    c.iters,
                    c.seconds
                );
            }
            if let Some(dir) = &cfg.output_dir {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("report.{}", cfg.report_format));
                emit_report(&outcome.cells, &cfg.report_format, &path)?;
                println!("report written to {}", path.display());
            }
            for f in &outcome.failures {
                eprintln!(
                    "failed: {} at {} dB with {}: {}",
                    f.signal, f.input_sdr, f.method, f.error
                );
            }
            Ok(if outcome.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Single { method, input, output, theta, clip_sdr, replace_reliable, seed } => {
            let x = read_wav(&input)?;
            let (y, mask) = match (theta, clip_sdr) {
                (Some(t), None) => {
                    let mask = ClipMask::from_signal(&x.samples, t);
                    (x.clone(), mask)
                }
                (None, Some(target)) => {
                    let (y, mask, t) = clip_to_target_sdr(&x, target, 0.01)?;
                    println!("clipped at theta = {t:.6}");
                    (y, mask)
                }
                _ => {
                    return Err(declip::DeclipError::Config(
                        "pass exactly one of --theta or --clip-sdr".into(),
                    ))
                }
            };
            let (mut xhat, iters) = run_method(&method, &y.samples, &mask, seed)?;
            if replace_reliable {
                for &i in &mask.reliable {
                    xhat[i] = y.samples[i];
                }
            }
            println!(
                "{} finished in {} iterations; clipped samples: {:.2}%",
                method,
                iters,
                mask.percent_clipped()
            );
            if clip_sdr.is_some() {
                println!("delta SDRc = {:+.4} dB",
                    delta_sdr_clipped(&x.samples, &y.samples, &xhat, &mask)?);
            }
            write_wav(&output, &Signal::new(xhat, x.sample_rate)?)?;
            println!("wrote {}", output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Metrics { reference, estimate, theta } => {
            let x = read_wav(&reference)?;
            let xhat = read_wav(&estimate)?;
            if x.len() != xhat.len() {
                return Err(declip::DeclipError::LengthMismatch {
                    expected: x.len(),
                    got: xhat.len(),
                });
            }
            let (y, mask) = declip::signal::clip(&x, theta)?;
            println!("SDR    = {:.4} dB", sdr(&x.samples, &xhat.samples)?);
            println!("SDRc   = {:.4} dB", sdr_clipped(&x.samples, &xhat.samples, &mask)?);
            println!(
                "dSDRc  = {:+.4} dB",
                delta_sdr_clipped(&x.samples, &y.samples, &xhat.samples, &mask)?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::ListMethods => {
            for m in list_methods() {
                println!("{:<8} {}", m.name, m.description);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
