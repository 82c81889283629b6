//! Autoregressive declipping: alternate AR model fitting (Levinson-Durbin)
//! with least-squares interpolation of the clipped samples.

use declip::janssen::{ar_interpolate, janssen_declip, levinson_durbin, JanssenParams};
use declip::signal::{clip, delta_sdr_clipped, Signal};
use std::f64::consts::TAU;

fn main() -> declip::Result<()> {
    // fit an AR model to a damped resonance and fill a gap with it
    let n = 512;
    let x: Vec<f64> = {
        let mut v = vec![0.0f64; n];
        v[0] = 1.0;
        for i in 2..n {
            v[i] = 1.95 * v[i - 1] - 0.975 * v[i - 2];
        }
        v
    };
    let r = declip::janssen::autocorrelation(&x, 8);
    let a = levinson_durbin(&r, 8)?;
    println!("AR coefficients: {:?}", &a[1..5]);

    let missing: Vec<usize> = (200..220).collect();
    let mut gapped = x.clone();
    for &i in &missing {
        gapped[i] = 0.0;
    }
    let filled = ar_interpolate(&gapped, &missing, &a)?;
    let err: f64 = missing.iter().map(|&i| (filled[i] - x[i]).powi(2)).sum::<f64>().sqrt();
    println!("gap fill error over 20 samples: {err:.2e}");

    // the same machinery declips a tonal signal block by block
    let m = 4096;
    let tone = Signal::new(
        (0..m)
            .map(|i| {
                let t = i as f64 / 16000.0;
                0.7 * (TAU * 493.9 * t).sin() + 0.2 * (TAU * 1975.5 * t + 0.4).sin()
            })
            .collect(),
        16000,
    )?;
    let (y, mask) = clip(&tone, 0.5)?;
    let (xhat, iters) = janssen_declip(&y.samples, &mask, &JanssenParams::desk())?;
    let d = delta_sdr_clipped(&tone.samples, &y.samples, &xhat, &mask)?;
    println!("declipped tone: delta SDRc = {d:+.2} dB ({iters} alternations)");
    Ok(())
}
