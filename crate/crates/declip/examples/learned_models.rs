//! The two learned declippers: dictionary learning with consistent iterative
//! hard thresholding, and IS-NMF with a Wiener posterior over unreliable
//! samples.

use declip::learned::{dl_declip, nmf_declip, DlParams, NmfParams};
use declip::signal::{clip, delta_sdr_clipped, Signal};
use std::f64::consts::TAU;

fn main() -> declip::Result<()> {
    let n = 4096;
    let x = Signal::new(
        (0..n)
            .map(|i| {
                let t = i as f64 / 16000.0;
                0.6 * (TAU * 329.6 * t).sin() + 0.3 * (TAU * 987.8 * t + 0.2).sin()
            })
            .collect(),
        16000,
    )?;
    let (y, mask) = clip(&x, 0.5)?;
    let score = |xhat: &[f64]| delta_sdr_clipped(&x.samples, &y.samples, xhat, &mask).unwrap();

    let (xhat, outers) = dl_declip(&y.samples, &mask, &DlParams::default())?;
    println!("dictionary learning: {:+.2} dB ({outers} outer rounds)", score(&xhat));

    let (xhat, gems) = nmf_declip(&y.samples, &mask, &NmfParams::desk())?;
    println!("IS-NMF (GEM)       : {:+.2} dB ({gems} EM iterations)", score(&xhat));
    Ok(())
}
