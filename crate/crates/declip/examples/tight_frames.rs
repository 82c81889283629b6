//! Build Parseval-tight analysis/synthesis operators (block DFT, block DCT,
//! Gabor) and verify perfect reconstruction and norm preservation.

use declip::frames::{FrameOp, TransformKind, TransformSpec, WindowKind};
use rand::Rng;

fn main() -> declip::Result<()> {
    let n = 1000;
    let mut rng = rand::thread_rng();
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let energy = x.iter().map(|v| v * v).sum::<f64>().sqrt();

    let specs = [
        ("block DFT", TransformSpec::block_dft(256, 512)),
        ("desk Gabor", TransformSpec::desk_gabor()),
        (
            "sine-window DCT",
            TransformSpec {
                kind: TransformKind::BlockDct,
                window: WindowKind::Sine,
                window_length: 128,
                hop: 32,
                channels: 256,
            },
        ),
    ];

    for (name, spec) in specs {
        let op = FrameOp::new(&spec, n)?;
        let z = op.analyze(&x)?;
        let back = op.synthesize(&z)?;
        let err = x
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / energy;
        println!(
            "{name:<16} coefficients: {:>6}  |Ax| - |x| = {:+.2e}  reconstruction error = {:.2e}",
            op.num_coefficients(),
            z.norm() - energy,
            err
        );
    }
    Ok(())
}
