//! Dictionary learning declipping: alternate consistent IHT sparse coding
//! per block with a projected, accelerated gradient update of the
//! dictionary. The data-fit term is the squared distance of each coded
//! block to its feasible set, so clipped samples constrain rather than bias
//! the fit.

use crate::error::Result;
use crate::frames::{overlap_add, split_blocks, split_mask, BlockPlan, WindowKind};
use crate::omp::dct_dictionary;
use crate::signal::{project_gamma_in_place, ClipMask};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct DlParams {
    pub block_length: usize,
    /// Atoms as a multiple of the block length.
    pub redundancy: usize,
    pub overlap: f64,
    pub outer: usize,
    pub iht_iters: usize,
    pub dict_iters: usize,
    /// Sparsity ramp: start, increment per outer iteration, cap.
    pub k0: usize,
    pub k_step: usize,
    pub k_max: usize,
    pub theta_max: Option<f64>,
}

impl Default for DlParams {
    fn default() -> Self {
        Self {
            block_length: 256,
            redundancy: 2,
            overlap: 0.75,
            outer: 20,
            iht_iters: 20,
            dict_iters: 20,
            k0: 2,
            k_step: 2,
            k_max: 64,
            theta_max: None,
        }
    }
}

/// Keep the `k` largest-magnitude entries of a real vector.
fn hard_top_k(z: &mut DVector<f64>, k: usize) {
    if k >= z.len() {
        return;
    }
    let mut mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let cutoff = mags[k.saturating_sub(1).min(mags.len() - 1)];
    let mut kept = 0;
    for v in z.iter_mut() {
        if v.abs() >= cutoff && kept < k {
            kept += 1;
        } else {
            *v = 0.0;
        }
    }
}

fn proj_block(v: &DVector<f64>, mask: &ClipMask, y: &[f64], theta_max: Option<f64>) -> DVector<f64> {
    let mut out: Vec<f64> = v.iter().copied().collect();
    project_gamma_in_place(&mut out, mask, y, theta_max);
    DVector::from_vec(out)
}

/// Largest squared singular value of `d`, by power iteration on `d^T d`.
fn op_norm_sq(d: &DMatrix<f64>) -> f64 {
    let mut v = DVector::from_element(d.ncols(), 1.0 / (d.ncols() as f64).sqrt());
    let mut lam = 1.0;
    for _ in 0..50 {
        let w = d.transpose() * (d * &v);
        lam = w.norm();
        if lam == 0.0 {
            return 1.0;
        }
        v = w / lam;
    }
    lam
}

/// Consistent IHT: gradient descent on the distance of `D z` to the block
/// feasible set, hard-thresholded to `k` terms.
fn consistent_iht(
    d: &DMatrix<f64>,
    z: &mut DVector<f64>,
    mask: &ClipMask,
    y: &[f64],
    k: usize,
    iters: usize,
    mu: f64,
    theta_max: Option<f64>,
) {
    for _ in 0..iters {
        let v = d * &*z;
        let p = proj_block(&v, mask, y, theta_max);
        let grad = d.transpose() * (&v - &p);
        *z -= mu * grad;
        hard_top_k(z, k);
    }
}

/// Squared distance of all coded blocks to their feasible sets.
pub fn dict_objective(
    d: &DMatrix<f64>,
    codes: &[DVector<f64>],
    masks: &[&ClipMask],
    ys: &[&Vec<f64>],
    theta_max: Option<f64>,
) -> f64 {
    let mut obj = 0.0;
    for ((z, m), y) in codes.iter().zip(masks).zip(ys) {
        let v = d * z;
        let p = proj_block(&v, m, y, theta_max);
        obj += 0.5 * (&v - &p).norm_squared();
    }
    obj
}

fn dict_gradient(
    d: &DMatrix<f64>,
    codes: &[DVector<f64>],
    masks: &[&ClipMask],
    ys: &[&Vec<f64>],
    theta_max: Option<f64>,
) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(d.nrows(), d.ncols());
    for ((z, m), y) in codes.iter().zip(masks).zip(ys) {
        let v = d * z;
        let p = proj_block(&v, m, y, theta_max);
        let r = &v - &p;
        g += r * z.transpose();
    }
    g
}

/// Project every column into the unit l2 ball.
fn project_columns(d: &mut DMatrix<f64>) {
    for mut col in d.column_iter_mut() {
        let n = col.norm();
        if n > 1.0 {
            col /= n;
        }
    }
}

/// Accelerated projected gradient with backtracking on the dictionary.
pub fn update_dictionary(
    d: &mut DMatrix<f64>,
    codes: &[DVector<f64>],
    masks: &[&ClipMask],
    ys: &[&Vec<f64>],
    iters: usize,
    theta_max: Option<f64>,
) {
    let mut lip = 1.0;
    let mut prev = d.clone();
    for it in 0..iters {
        let momentum = it as f64 / (it as f64 + 3.0);
        let yk = &*d + (&*d - &prev) * momentum;
        let f_y = dict_objective(&yk, codes, masks, ys, theta_max);
        let g = dict_gradient(&yk, codes, masks, ys, theta_max);
        let mut cand;
        loop {
            cand = &yk - &g * (1.0 / lip);
            project_columns(&mut cand);
            let diff = &cand - &yk;
            let quad = f_y + g.dot(&diff) + 0.5 * lip * diff.norm_squared();
            if dict_objective(&cand, codes, masks, ys, theta_max) <= quad + 1e-12 || lip > 1e12 {
                break;
            }
            lip *= 2.0;
        }
        prev = d.clone();
        *d = cand;
    }
}

/// Whole-signal dictionary learning declipping.
pub fn dl_declip(y: &[f64], mask: &ClipMask, p: &DlParams) -> Result<(Vec<f64>, usize)> {
    let n = y.len();
    let plan = BlockPlan::new(p.block_length, p.overlap, WindowKind::Hann)?;
    let y_blocks = split_blocks(y, &plan);
    let m_blocks = split_mask(mask, &plan, n);
    let b = plan.block_length;
    let atoms = b * p.redundancy;
    let mut d = dct_dictionary(b, atoms);
    // code every block; blocks without clipping still shape the dictionary
    let active: Vec<usize> = (0..y_blocks.len()).collect();
    let mut codes: Vec<DVector<f64>> = active.iter().map(|_| DVector::zeros(atoms)).collect();
    let masks: Vec<&ClipMask> = active.iter().map(|&i| &m_blocks[i]).collect();
    let ys: Vec<&Vec<f64>> = active.iter().map(|&i| &y_blocks[i]).collect();
    let mut iters = 0;
    for outer in 0..p.outer {
        iters += 1;
        let k = (p.k0 + outer * p.k_step).min(p.k_max);
        let mu = 1.0 / op_norm_sq(&d);
        for ((z, m), yb) in codes.iter_mut().zip(&masks).zip(&ys) {
            consistent_iht(&d, z, m, yb, k, p.iht_iters, mu, p.theta_max);
        }
        update_dictionary(&mut d, &codes, &masks, &ys, p.dict_iters, p.theta_max);
    }
    // final consistent reconstruction of each block
    let mut out_blocks = Vec::with_capacity(y_blocks.len());
    for (bi, &i) in active.iter().enumerate() {
        let m = &m_blocks[i];
        if m.high.is_empty() && m.low.is_empty() {
            out_blocks.push(y_blocks[i].clone());
            continue;
        }
        let v = &d * &codes[bi];
        let rec = proj_block(&v, m, &y_blocks[i], p.theta_max);
        out_blocks.push(rec.iter().copied().collect());
    }
    let mut out = overlap_add(&out_blocks, &plan, n)?;
    project_gamma_in_place(&mut out, mask, y, p.theta_max);
    Ok((out, iters))
}
