//! Structured (social) shrinkage: each time-frequency coefficient is kept or
//! shrunk based on its neighborhood energy, inside a FISTA loop on the
//! clipping-consistency data term.

use declip::frames::{FrameOp, TransformSpec};
use declip::shrinkage::{Neighborhood, SocialKind};
use declip::signal::{clip, delta_sdr_clipped, Signal};
use declip::social::{declip_social, SocialParams};
use std::f64::consts::TAU;

fn main() -> declip::Result<()> {
    let n = 4096;
    let x = Signal::new(
        (0..n)
            .map(|i| {
                let t = i as f64 / 16000.0;
                0.6 * (TAU * 392.0 * t).sin() + 0.3 * (TAU * 987.8 * t + 0.5).sin()
            })
            .collect(),
        16000,
    )?;
    let (y, mask) = clip(&x, 0.4)?;
    let op = FrameOp::new(&TransformSpec::desk_gabor(), n)?;

    for kind in [SocialKind::EmpiricalWiener, SocialKind::PersistentEmpiricalWiener] {
        let p = SocialParams {
            kind,
            neighborhood: Neighborhood::new(3, 7)?,
            ..SocialParams::default()
        };
        let (xhat, iters) = declip_social(&y.samples, &mask, &op, &p)?;
        let d = delta_sdr_clipped(&x.samples, &y.samples, &xhat, &mask)?;
        println!("{kind:?}: delta SDRc = {d:+.2} dB ({iters} iterations)");
    }
    Ok(())
}
