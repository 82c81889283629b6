//! Hard-clip a test tone, inspect the sample partition, and score the
//! damage with SDR metrics.

use declip::signal::{clip, clip_to_target_sdr, sdr, sdr_clipped, Signal};
use std::f64::consts::TAU;

fn main() -> declip::Result<()> {
    let n = 4096;
    let x = Signal::new(
        (0..n).map(|i| 0.9 * (TAU * 220.0 * i as f64 / 16000.0).sin()).collect(),
        16000,
    )?;

    // clip at a fixed threshold
    let (y, mask) = clip(&x, 0.5)?;
    println!("threshold 0.5:");
    println!("  clipped samples : {:.1}%", mask.percent_clipped());
    println!("  high / low      : {} / {}", mask.high.len(), mask.low.len());
    println!("  input SDR       : {:.2} dB", sdr(&x.samples, &y.samples)?);
    println!("  input SDRc      : {:.2} dB", sdr_clipped(&x.samples, &y.samples, &mask)?);

    // or search for the threshold that yields a wanted input SDR
    for target in [3.0, 7.0, 15.0] {
        let (yt, mt, theta) = clip_to_target_sdr(&x, target, 0.01)?;
        println!(
            "target {target:>4.1} dB: theta = {theta:.4}, clipped = {:.1}%, achieved = {:.2} dB",
            mt.percent_clipped(),
            sdr(&x.samples, &yt.samples)?
        );
    }
    Ok(())
}
