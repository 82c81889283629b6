//! Convex l1 declipping: Douglas-Rachford (synthesis model), Chambolle-Pock
//! (analysis model), frequency-weighted and reweighted variants.

use declip::frames::{FrameOp, TransformSpec};
use declip::l1::{
    declip_cp, declip_dr, declip_reweighted, parabola_weights, CpParams, DrParams, RwModel,
    RwParams,
};
use declip::signal::{clip, delta_sdr_clipped, Signal};
use std::f64::consts::TAU;

fn main() -> declip::Result<()> {
    let n = 4096;
    let x = Signal::new(
        (0..n)
            .map(|i| {
                let t = i as f64 / 16000.0;
                0.55 * (TAU * 261.6 * t).sin()
                    + 0.3 * (TAU * 659.3 * t + 0.3).sin()
                    + 0.15 * (TAU * 1318.5 * t + 1.1).sin()
            })
            .collect(),
        16000,
    )?;
    let (y, mask) = clip(&x, 0.45)?;
    let op = FrameOp::new(&TransformSpec::desk_gabor(), n)?;
    let weights = parabola_weights(&op, 0.001);
    let score = |xhat: &[f64]| delta_sdr_clipped(&x.samples, &y.samples, xhat, &mask).unwrap();

    let dp = DrParams { iterations: 1000, tol: Some(1e-6), ..DrParams::default() };
    let (xhat, it, _) = declip_dr(&y.samples, &mask, &op, &dp, None, None)?;
    println!("DR  plain    : {:+.2} dB ({it} iters)", score(&xhat));
    let (xhat, it, _) = declip_dr(&y.samples, &mask, &op, &dp, Some(&weights), None)?;
    println!("DR  weighted : {:+.2} dB ({it} iters)", score(&xhat));

    let cp = CpParams { iterations: 1000, tol: Some(1e-6), ..CpParams::default() };
    let (xhat, it) = declip_cp(&y.samples, &mask, &op, &cp, None, None)?;
    println!("CP  plain    : {:+.2} dB ({it} iters)", score(&xhat));
    let (xhat, it) = declip_cp(&y.samples, &mask, &op, &cp, Some(&weights), None)?;
    println!("CP  weighted : {:+.2} dB ({it} iters)", score(&xhat));

    let rw = RwParams { inner: 300, ..RwParams::default() };
    for model in [RwModel::Synthesis, RwModel::Analysis] {
        let (xhat, it) = declip_reweighted(&y.samples, &mask, &op, model, &rw)?;
        println!("RW  {model:<9?}: {:+.2} dB ({it} total inner iters)", score(&xhat));
    }
    Ok(())
}
