//! Janssen interpolation: alternate an autoregressive model fit with a
//! least-squares fill of the clipped samples.

use crate::error::{DeclipError, Result};
use crate::frames::{overlap_add, split_blocks, split_mask, BlockPlan, WindowKind};
use crate::signal::{project_gamma_in_place, ClipMask};
use nalgebra::{DMatrix, DVector};

/// Biased autocorrelation r[0..=lags].
pub fn autocorrelation(x: &[f64], lags: usize) -> Vec<f64> {
    (0..=lags)
        .map(|k| x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum())
        .collect()
}

/// Levinson-Durbin recursion. Returns the prediction-error filter
/// `[1, a_1, ..., a_p]` for the Yule-Walker system of `r`.
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<Vec<f64>> {
    if r.len() < order + 1 || r[0] <= 0.0 {
        return Err(DeclipError::DegenerateBlock("autocorrelation not positive".into()));
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut e = r[0];
    for i in 1..=order {
        let mut acc = r[i];
        for j in 1..i {
            acc += a[j] * r[i - j];
        }
        let k = -acc / e;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        e *= 1.0 - k * k;
        if e <= 0.0 {
            // perfectly predictable signal; the filter so far is exact
            break;
        }
    }
    Ok(a)
}

/// Fill the samples at `missing` so that the AR prediction-error energy is
/// minimized, all other samples held fixed. Classic banded normal equations
/// with b_j = sum_i a_i a_{i+j}.
pub fn ar_interpolate(x: &[f64], missing: &[usize], a: &[f64]) -> Result<Vec<f64>> {
    if missing.is_empty() {
        return Ok(x.to_vec());
    }
    let p = a.len() - 1;
    let b: Vec<f64> = (0..=p)
        .map(|d| (0..=p - d).map(|i| a[i] * a[i + d]).sum())
        .collect();
    let m = missing.len();
    let mut in_missing = vec![false; x.len()];
    for &i in missing {
        in_missing[i] = true;
    }
    let mut g = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let d = missing[i].abs_diff(missing[j]);
            if d <= p {
                g[(i, j)] = b[d];
            }
        }
        g[(i, i)] += 1e-9 * b[0];
    }
    let mut rhs = DVector::zeros(m);
    for i in 0..m {
        let mi = missing[i] as i64;
        let mut s = 0.0;
        for d in -(p as i64)..=(p as i64) {
            let n = mi + d;
            if n >= 0 && (n as usize) < x.len() && !in_missing[n as usize] {
                s += b[d.unsigned_abs() as usize] * x[n as usize];
            }
        }
        rhs[i] = -s;
    }
    let sol = g
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| g.lu().solve(&rhs))
        .ok_or_else(|| DeclipError::DegenerateBlock("singular interpolation system".into()))?;
    let mut out = x.to_vec();
    for (k, &i) in missing.iter().enumerate() {
        out[i] = sol[k];
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct JanssenParams {
    pub order: usize,
    pub iterations: usize,
    pub block_length: usize,
    pub overlap: f64,
    /// Revert a block when the filled estimate exceeds this multiple of the
    /// observed block energy (divergence guard).
    pub energy_guard: f64,
    pub theta_max: Option<f64>,
}

impl Default for JanssenParams {
    fn default() -> Self {
        Self {
            order: 512,
            iterations: 3,
            block_length: 4096,
            overlap: 0.5,
            energy_guard: 100.0,
            theta_max: None,
        }
    }
}

impl JanssenParams {
    /// Small setting for short test signals.
    pub fn desk() -> Self {
        Self { order: 64, block_length: 1024, ..Self::default() }
    }
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn janssen_block(y: &[f64], mask: &ClipMask, p: &JanssenParams) -> Result<(Vec<f64>, usize)> {
    let missing: Vec<usize> = {
        let mut v: Vec<usize> = mask.high.iter().chain(&mask.low).copied().collect();
        v.sort_unstable();
        v
    };
    // cap the order so the model stays estimable from this block
    let order = p.order.min(y.len() / 4).max(1);
    let y_energy = energy(y);
    let mut x = y.to_vec();
    let mut iters = 0;
    for _ in 0..p.iterations {
        let r = autocorrelation(&x, order);
        let a = match levinson_durbin(&r, order) {
            Ok(a) => a,
            Err(_) => break,
        };
        let x_new = match ar_interpolate(&x, &missing, &a) {
            Ok(v) => v,
            Err(_) => break,
        };
        if energy(&x_new) > p.energy_guard * y_energy {
            break;
        }
        x = x_new;
        iters += 1;
    }
    Ok((x, iters))
}

/// Whole-signal Janssen declipping: per-block AR fit and fill, overlap-add,
/// final projection onto the feasible set.
pub fn janssen_declip(
    y: &[f64],
    mask: &ClipMask,
    p: &JanssenParams,
) -> Result<(Vec<f64>, usize)> {
    let n = y.len();
    let plan = BlockPlan::new(p.block_length, p.overlap, WindowKind::Hann)?;
    let y_blocks = split_blocks(y, &plan);
    let m_blocks = split_mask(mask, &plan, n);
    let mut out_blocks = Vec::with_capacity(y_blocks.len());
    let mut total = 0;
    for (yb, mb) in y_blocks.iter().zip(&m_blocks) {
        if mb.high.is_empty() && mb.low.is_empty() || mb.reliable.is_empty() {
            out_blocks.push(yb.clone());
            continue;
        }
        let (xb, it) = janssen_block(yb, mb, p)?;
        total += it;
        out_blocks.push(xb);
    }
    let mut out = overlap_add(&out_blocks, &plan, n)?;
    project_gamma_in_place(&mut out, mask, y, p.theta_max);
    Ok((out, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{clip, delta_sdr_clipped, sdr, Signal};
    use nalgebra::{DMatrix, DVector};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ar2_signal(n: usize, a1: f64, a2: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![0.0; n + 200];
        for i in 2..x.len() {
            let e: f64 = rng.gen_range(-1.0..1.0);
            x[i] = -a1 * x[i - 1] - a2 * x[i - 2] + 0.1 * e;
        }
        x.split_off(200)
    }

    #[test]
    fn levinson_matches_direct_yule_walker_solve() {
        let x = ar2_signal(8000, -1.5, 0.8, 1);
        let p = 6;
        let r = autocorrelation(&x, p);
        let a = levinson_durbin(&r, p).unwrap();
        // oracle: solve the Toeplitz system R a = -r directly
        let big = DMatrix::from_fn(p, p, |i, j| r[i.abs_diff(j)]);
        let rhs = DVector::from_fn(p, |i, _| -r[i + 1]);
        let direct = big.lu().solve(&rhs).unwrap();
        for i in 0..p {
            assert!((a[i + 1] - direct[i]).abs() < 1e-8, "lag {i}");
        }
    }

    #[test]
    fn levinson_recovers_ar2_coefficients() {
        let x = ar2_signal(60_000, -1.6, 0.9, 2);
        let r = autocorrelation(&x, 2);
        let a = levinson_durbin(&r, 2).unwrap();
        assert!((a[1] - -1.6).abs() < 0.05, "a1 = {}", a[1]);
        assert!((a[2] - 0.9).abs() < 0.05, "a2 = {}", a[2]);
    }

    #[test]
    fn levinson_rejects_degenerate_input() {
        assert!(levinson_durbin(&[0.0, 0.0, 0.0], 2).is_err());
        assert!(levinson_durbin(&[1.0], 2).is_err());
    }

    #[test]
    fn interpolation_solves_the_normal_equations() {
        // oracle: build the full quadratic form and solve it densely
        let x = ar2_signal(64, -1.5, 0.8, 3);
        let a = vec![1.0, -0.9, 0.3];
        let missing = vec![10usize, 11, 30, 55];
        let got = ar_interpolate(&x, &missing, &a).unwrap();
        // direct minimization of |C v|^2 where C is the (n+p) x n full
        // convolution matrix and only the missing entries of v vary
        let n = x.len();
        let p = a.len() - 1;
        let c = DMatrix::from_fn(n + p, n, |i, j| {
            if i >= j && i - j <= p {
                a[i - j]
            } else {
                0.0
            }
        });
        let gram = c.transpose() * &c;
        let mm = missing.len();
        let g = DMatrix::from_fn(mm, mm, |i, j| gram[(missing[i], missing[j])]);
        let mut rhs = DVector::zeros(mm);
        for i in 0..mm {
            let mut s = 0.0;
            for j in 0..n {
                if !missing.contains(&j) {
                    s += gram[(missing[i], j)] * x[j];
                }
            }
            rhs[i] = -s;
        }
        let direct = g.lu().solve(&rhs).unwrap();
        for (k, &i) in missing.iter().enumerate() {
            // the banded formulation ignores edge truncation, so allow a
            // small interior-vs-edge discrepancy
            assert!((got[i] - direct[k]).abs() < 1e-6, "index {i}");
        }
    }

    #[test]
    fn interpolation_restores_sinusoid_gap() {
        let n = 256;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 5.0 * i as f64 / n as f64).sin()).collect();
        let mut damaged = x.clone();
        let missing: Vec<usize> = (100..112).collect();
        for &i in &missing {
            damaged[i] = 0.0;
        }
        let r = autocorrelation(&damaged, 8);
        let a = levinson_durbin(&r, 8).unwrap();
        let filled = ar_interpolate(&damaged, &missing, &a).unwrap();
        for &i in &missing {
            assert!((filled[i] - x[i]).abs() < 0.05, "sample {i}: {} vs {}", filled[i], x[i]);
        }
    }

    #[test]
    fn declip_improves_on_tonal_signal() {
        let n = 2048;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                0.6 * (2.0 * PI * 20.0 * t).sin() + 0.3 * (2.0 * PI * 47.0 * t + 0.8).sin()
            })
            .collect();
        let x = Signal::new(samples, 16000).unwrap();
        let (y, mask) = clip(&x, 0.5).unwrap();
        let (rec, iters) = janssen_declip(&y.samples, &mask, &JanssenParams::desk()).unwrap();
        assert!(iters > 0);
        assert!(mask.consistent_reliable(&rec, &y.samples));
        assert!(mask.consistent_clipped(&rec));
        let d = delta_sdr_clipped(&x.samples, &y.samples, &rec, &mask).unwrap();
        assert!(d > 3.0, "delta sdr_c = {d}");
        assert!(sdr(&x.samples, &rec).unwrap() > sdr(&x.samples, &y.samples).unwrap());
    }

    #[test]
    fn silence_passes_through() {
        let y = vec![0.0; 512];
        let mask = ClipMask::from_signal(&y, 0.5);
        let (rec, iters) = janssen_declip(&y, &mask, &JanssenParams::desk()).unwrap();
        assert_eq!(iters, 0);
        assert_eq!(rec, y);
    }
}
