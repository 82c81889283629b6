//! The coefficient shrinkers used across the solvers: top-k hard
//! thresholding with conjugate pairing, weighted soft thresholding, and
//! neighborhood-based social shrinkage.

use declip::frames::{FrameOp, TransformSpec};
use declip::shrinkage::{
    hard_threshold_k, neighborhood_energy, shrink_social, soft_threshold, Neighborhood,
    SocialKind,
};
use std::f64::consts::TAU;

fn main() -> declip::Result<()> {
    let n = 256;
    let op = FrameOp::new(&TransformSpec::block_dft(n, 2 * n), n)?;
    let x: Vec<f64> = (0..n)
        .map(|i| (TAU * 8.0 * i as f64 / n as f64).sin() + 0.2 * (TAU * 37.0 * i as f64 / n as f64).cos())
        .collect();
    let z = op.analyze(&x)?;

    let nnz = |c: &declip::frames::Coefficients| c.data.iter().filter(|v| v.norm() > 1e-12).count();
    println!("analysis coefficients: {} nonzero of {}", nnz(&z), z.len());

    // keep the 2 strongest conjugate pairs
    let hk = hard_threshold_k(&z, 2, true)?;
    println!("hard top-2 pairs     : {} nonzero", nnz(&hk));

    let soft = soft_threshold(&z, 0.5, None);
    println!("soft tau=0.5         : {} nonzero", nnz(&soft));

    let nb = Neighborhood::new(1, 7)?;
    let energy = neighborhood_energy(&z, nb, op.is_fourier());
    let peak = energy.iter().cloned().fold(0.0f64, f64::max);
    println!("peak 1x7 neighborhood energy: {peak:.3}");

    let social = shrink_social(&z, SocialKind::PersistentEmpiricalWiener, 0.05, Some(nb), true)?;
    println!("PEW lambda=0.05      : {} nonzero", nnz(&social));
    Ok(())
}
