//! NMF-based declipping: an Itakura-Saito low-rank model of the power
//! spectrogram, fit by generalized EM. The E-step is a Wiener posterior of
//! the clean DFT coefficients given the reliable samples of each windowed
//! frame; the M-step runs multiplicative IS-NMF updates on the posterior
//! power. An ad hoc consistency pass pins restored samples that still
//! violate the clipping constraints and repeats the posterior.

use crate::error::{DeclipError, Result};
use crate::frames::{split_blocks, split_mask, BlockPlan, WindowKind};
use crate::signal::{project_gamma_in_place, ClipMask};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct NmfParams {
    pub block_length: usize,
    pub components: usize,
    pub gem_iters: usize,
    /// Maximum extra posterior passes per frame that pin clip-constraint
    /// violators to the threshold and mark them reliable.
    pub consistency_passes: usize,
    pub seed: u64,
    pub ridge: f64,
    pub theta_max: Option<f64>,
}

impl Default for NmfParams {
    fn default() -> Self {
        Self {
            block_length: 2048,
            components: 20,
            gem_iters: 50,
            consistency_passes: 3,
            seed: 7,
            ridge: 1e-8,
            theta_max: None,
        }
    }
}

impl NmfParams {
    pub fn desk() -> Self {
        Self { block_length: 128, components: 8, gem_iters: 25, ..Self::default() }
    }
}

struct Frame {
    /// Windowed observation.
    y: Vec<f64>,
    /// Per-sample clipping thresholds (window-scaled).
    theta: Vec<f64>,
    reliable: Vec<usize>,
    high: Vec<usize>,
    low: Vec<usize>,
}

fn unitary_fft(fft: &Arc<dyn Fft<f64>>, x: &[f64]) -> Vec<Complex64> {
    let m = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let s = 1.0 / (m as f64).sqrt();
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

fn unitary_ifft_real(ifft: &Arc<dyn Fft<f64>>, z: &[Complex64]) -> Vec<f64> {
    let m = z.len();
    let mut buf = z.to_vec();
    ifft.process(&mut buf);
    let s = 1.0 / (m as f64).sqrt();
    buf.iter().map(|c| c.re * s).collect()
}

/// Wiener posterior of the clean unitary-DFT coefficients of one frame.
///
/// Prior: z ~ CN(0, diag(v)); observation: the reliable time samples equal
/// the synthesis of z there. Returns the posterior mean and the posterior
/// marginal variances.
fn wiener_posterior(
    v: &[f64],
    y: &[f64],
    reliable: &[usize],
    ridge: f64,
    fft: &Arc<dyn Fft<f64>>,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let m = v.len();
    let r = reliable.len();
    if r == 0 {
        return Err(DeclipError::NoReliableSamples);
    }
    // circular autocovariance c(d) = (1/M) sum_f v_f cos(2*pi*f*d/M)
    let mut c = vec![0.0; m];
    for (d, cd) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for (f, &vf) in v.iter().enumerate() {
            s += vf * (2.0 * std::f64::consts::PI * f as f64 * d as f64 / m as f64).cos();
        }
        *cd = s / m as f64;
    }
    let mut syy = DMatrix::from_fn(r, r, |i, j| {
        let d = reliable[i].abs_diff(reliable[j]);
        c[d.min(m - d)]
    });
    let ridge_val = ridge * (c[0] + 1e-300);
    for i in 0..r {
        syy[(i, i)] += ridge_val;
    }
    let chol = syy
        .clone()
        .cholesky()
        .ok_or_else(|| DeclipError::DegenerateBlock("posterior covariance not PD".into()))?;
    let yr = DVector::from_fn(r, |i, _| y[reliable[i]]);
    let s = chol.solve(&yr);
    // posterior mean: v .* A (M_R^T s)
    let mut embedded = vec![0.0; m];
    for (k, &i) in reliable.iter().enumerate() {
        embedded[i] = s[k];
    }
    let az = unitary_fft(fft, &embedded);
    let mean: Vec<Complex64> = az.iter().zip(v).map(|(a, &vf)| a * vf).collect();
    // posterior variances: v_f - c_f^H Syy^{-1} c_f with
    // c_f[n] = v_f e^{2 pi i f n / M} / sqrt(M)
    let inv = chol.inverse();
    let mut var = vec![0.0; m];
    let mut cosv = DVector::zeros(r);
    let mut sinv = DVector::zeros(r);
    for f in 0..m {
        for (k, &i) in reliable.iter().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * f as f64 * i as f64 / m as f64;
            cosv[k] = ang.cos();
            sinv[k] = ang.sin();
        }
        let q = cosv.dot(&(&inv * &cosv)) + sinv.dot(&(&inv * &sinv));
        var[f] = (v[f] - v[f] * v[f] / m as f64 * q).max(1e-12);
    }
    Ok((mean, var))
}

/// One multiplicative IS-NMF sweep (W then H) against the power matrix `p`.
pub fn is_nmf_update(w: &mut DMatrix<f64>, h: &mut DMatrix<f64>, p: &DMatrix<f64>) {
    let floor = 1e-12;
    let vhat = &*w * &*h;
    let m = p.nrows();
    let t = p.ncols();
    let k = w.ncols();
    // W update
    for f in 0..m {
        for kk in 0..k {
            let mut num = 0.0;
            let mut den = 0.0;
            for tt in 0..t {
                let vh = vhat[(f, tt)].max(floor);
                num += h[(kk, tt)] * p[(f, tt)] / (vh * vh);
                den += h[(kk, tt)] / vh;
            }
            w[(f, kk)] = (w[(f, kk)] * num / den.max(floor)).max(floor);
        }
    }
    let vhat = &*w * &*h;
    // H update
    for kk in 0..k {
        for tt in 0..t {
            let mut num = 0.0;
            let mut den = 0.0;
            for f in 0..m {
                let vh = vhat[(f, tt)].max(floor);
                num += w[(f, kk)] * p[(f, tt)] / (vh * vh);
                den += w[(f, kk)] / vh;
            }
            h[(kk, tt)] = (h[(kk, tt)] * num / den.max(floor)).max(floor);
        }
    }
}

/// Whole-signal NMF declipping.
pub fn nmf_declip(y: &[f64], mask: &ClipMask, p: &NmfParams) -> Result<(Vec<f64>, usize)> {
    let n = y.len();
    let m = p.block_length;
    let plan = BlockPlan::new(m, 0.5, WindowKind::Sine)?;
    let win = WindowKind::Sine.taps(m);
    let raw_blocks = split_blocks(y, &plan);
    let block_masks = split_mask(mask, &plan, n);
    let t_frames = raw_blocks.len();
    let frames: Vec<Frame> = raw_blocks
        .iter()
        .zip(&block_masks)
        .map(|(b, bm)| Frame {
            y: b.iter().zip(&win).map(|(v, w)| v * w).collect(),
            theta: win.iter().map(|w| w * mask.theta_c).collect(),
            reliable: bm.reliable.clone(),
            high: bm.high.clone(),
            low: bm.low.clone(),
        })
        .collect();

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);

    // symmetric random init keeps the model conjugate-consistent
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let k = p.components;
    let mut w = DMatrix::zeros(m, k);
    for kk in 0..k {
        for f in 0..=m / 2 {
            let val: f64 = rng.gen_range(0.1..1.0);
            w[(f, kk)] = val;
            w[((m - f) % m, kk)] = val;
        }
    }
    let mut h = DMatrix::from_fn(k, t_frames, |_, _| rng.gen_range(0.1..1.0));

    let mut restored: Vec<Vec<f64>> = frames.iter().map(|fr| fr.y.clone()).collect();
    let mut iters = 0;
    for _ in 0..p.gem_iters {
        iters += 1;
        let mut power = DMatrix::zeros(m, t_frames);
        let vhat = &w * &h;
        for (t, fr) in frames.iter().enumerate() {
            if fr.high.is_empty() && fr.low.is_empty() {
                let z = unitary_fft(&fwd, &fr.y);
                for f in 0..m {
                    power[(f, t)] = z[f].norm_sqr().max(1e-12);
                }
                continue;
            }
            let v: Vec<f64> = (0..m).map(|f| vhat[(f, t)].max(1e-12)).collect();
            // posterior passes with consistency pinning
            let mut reliable = fr.reliable.clone();
            let mut obs = fr.y.clone();
            let mut mean = Vec::new();
            let mut var = vec![0.0; m];
            for pass in 0..=p.consistency_passes {
                let (zm, zv) = wiener_posterior(&v, &obs, &reliable, p.ridge, &fwd)?;
                let xhat = unitary_ifft_real(&inv, &zm);
                mean = zm;
                var = zv;
                restored[t] = xhat.clone();
                if pass == p.consistency_passes {
                    break;
                }
                let mut pinned = false;
                for &i in &fr.high {
                    if !reliable.contains(&i) && restored[t][i] < fr.theta[i] {
                        obs[i] = fr.theta[i];
                        reliable.push(i);
                        pinned = true;
                    }
                }
                for &i in &fr.low {
                    if !reliable.contains(&i) && restored[t][i] > -fr.theta[i] {
                        obs[i] = -fr.theta[i];
                        reliable.push(i);
                        pinned = true;
                    }
                }
                if !pinned {
                    break;
                }
            }
            for f in 0..m {
                // symmetrize against numerical asymmetry of the posterior
                let g = (m - f) % m;
                let pf = mean[f].norm_sqr() + var[f];
                let pg = mean[g].norm_sqr() + var[g];
                power[(f, t)] = (0.5 * (pf + pg)).max(1e-12);
            }
        }
        is_nmf_update(&mut w, &mut h, &power);
    }

    // weighted overlap-add of the (already windowed) restored frames
    let mut acc = vec![0.0; n];
    let mut wsum = vec![0.0; n];
    for (t, fr) in restored.iter().enumerate() {
        let start = t * plan.hop;
        for j in 0..m {
            let i = start + j;
            if i < n {
                acc[i] += win[j] * fr[j];
                wsum[i] += win[j] * win[j];
            }
        }
    }
    let mut out: Vec<f64> = acc.iter().zip(&wsum).map(|(a, s)| a / s.max(1e-12)).collect();
    project_gamma_in_place(&mut out, mask, y, p.theta_max);
    Ok((out, iters))
}
