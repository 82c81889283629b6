//! Run the benchmark grid (signals x input-SDR levels x methods) in memory
//! and print a compact per-method summary plus the CSV report head.

use declip::harness::{reports_to_csv, run_experiment, ExperimentConfig};

fn main() -> declip::Result<()> {
    let cfg = ExperimentConfig {
        input_sdr_levels: vec![5.0, 10.0],
        methods: vec!["aspade".into(), "dr".into(), "janssen".into(), "nmf".into()],
        signal_length: 2048,
        write_audio: false,
        ..ExperimentConfig::default()
    };
    let outcome = run_experiment(&cfg)?;

    for m in &cfg.methods {
        let scores: Vec<f64> = outcome
            .cells
            .iter()
            .filter(|c| &c.method == m)
            .map(|c| c.delta_sdr_c)
            .collect();
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        println!("{m:<8} mean delta SDRc over {} cells: {mean:+.2} dB", scores.len());
    }

    println!("\nCSV head:");
    for line in reports_to_csv(&outcome.cells).lines().take(5) {
        println!("{line}");
    }
    if !outcome.failures.is_empty() {
        println!("{} cells failed", outcome.failures.len());
    }
    Ok(())
}
