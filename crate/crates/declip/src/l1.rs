//! Convex l1 declipping: Douglas-Rachford splitting (synthesis model),
//! Chambolle-Pock (analysis model), iterative reweighting, psychoacoustic
//! parabola weights, and a constrained-sparse primal-dual variant.

use crate::error::Result;
use crate::frames::{Coefficients, FrameOp};
use crate::shrinkage::{clip_coefficients, soft_threshold};
use crate::signal::{project_gamma_in_place, ClipMask};

/// Fixed parabola weight profile over frequency: small near DC, 1 + w0 at
/// the top band, conjugate-symmetric on DFT grids.
pub fn parabola_weights(op: &FrameOp, w0: f64) -> Vec<f64> {
    let m = op.spec.channels;
    let shifts = op.shifts();
    let mut w = Vec::with_capacity(m * shifts);
    for _ in 0..shifts {
        for f in 0..m {
            let fu = if op.is_fourier() { f.min(m - f) as f64 / (m as f64 / 2.0) } else { f as f64 / (m - 1) as f64 };
            w.push(w0 + fu * fu);
        }
    }
    w
}

fn rel_change(new: &Coefficients, old: &Coefficients) -> f64 {
    let num: f64 =
        new.data.iter().zip(&old.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    num / (old.norm() + 1e-300)
}

#[derive(Debug, Clone)]
pub struct DrParams {
    pub lambda: f64,
    pub gamma: f64,
    pub iterations: usize,
    /// Optional early stop on the relative coefficient change.
    pub tol: Option<f64>,
    pub theta_max: Option<f64>,
}

impl Default for DrParams {
    fn default() -> Self {
        Self { lambda: 1.0, gamma: 1.0, iterations: 3000, tol: None, theta_max: None }
    }
}

/// Douglas-Rachford on the synthesis model: min |w.z|_1 s.t. D z in Gamma.
/// Returns the reconstruction, iterations used, and the final (projected)
/// coefficients for warm starts and reweighting.
pub fn declip_dr(
    y: &[f64],
    mask: &ClipMask,
    op: &FrameOp,
    p: &DrParams,
    weights: Option<&[f64]>,
    z0: Option<Coefficients>,
) -> Result<(Vec<f64>, usize, Coefficients)> {
    let (pm, py) = op.pad_mask(mask, y);
    let mut z = match z0 {
        Some(z) => z,
        None => op.analyze(y)?,
    };
    let mut iters = 0;
    for _ in 0..p.iterations {
        iters += 1;
        let zt = op.project_gamma_star_padded(&z, &pm, &py, p.theta_max)?;
        let mut refl = zt.clone();
        for (r, zz) in refl.data.iter_mut().zip(&z.data) {
            *r = 2.0 * *r - zz;
        }
        let s = soft_threshold(&refl, p.gamma, weights);
        let mut z_new = z.clone();
        for ((zn, sv), ztv) in z_new.data.iter_mut().zip(&s.data).zip(&zt.data) {
            *zn += p.lambda * (sv - ztv);
        }
        let change = rel_change(&z_new, &z);
        z = z_new;
        if let Some(tol) = p.tol {
            if change < tol {
                break;
            }
        }
    }
    let z_proj = op.project_gamma_star_padded(&z, &pm, &py, p.theta_max)?;
    let mut x = op.synthesize(&z_proj)?;
    // the coefficient-domain projection is exact only up to transform
    // roundoff; clamp in the time domain so feasibility holds exactly
    project_gamma_in_place(&mut x, mask, y, p.theta_max);
    Ok((x, iters, z_proj))
}

#[derive(Debug, Clone)]
pub struct CpParams {
    pub sigma: f64,
    pub zeta: f64,
    pub rho: f64,
    pub iterations: usize,
    pub tol: Option<f64>,
    pub theta_max: Option<f64>,
}

impl Default for CpParams {
    fn default() -> Self {
        Self { sigma: 1.0, zeta: 1.0, rho: 1.0, iterations: 3000, tol: None, theta_max: None }
    }
}

impl CpParams {
    /// Strict convergence condition zeta * sigma * |A|^2 < 1. The classic
    /// defaults sit exactly on the boundary (|A| = 1 for tight frames),
    /// which works in practice but is worth surfacing.
    pub fn is_strictly_convergent(&self) -> bool {
        self.zeta * self.sigma < 1.0
    }
}

/// Chambolle-Pock on the analysis model: min |w.(A x)|_1 s.t. x in Gamma.
pub fn declip_cp(
    y: &[f64],
    mask: &ClipMask,
    op: &FrameOp,
    p: &CpParams,
    weights: Option<&[f64]>,
    x0: Option<Vec<f64>>,
) -> Result<(Vec<f64>, usize)> {
    let (pm, py) = op.pad_mask(mask, y);
    let mut x = match x0 {
        Some(x) => op.pad(&x),
        None => py.clone(),
    };
    let mut x_bar = x.clone();
    let mut v = Coefficients::zeros(op.spec.channels, op.shifts());
    let mut iters = 0;
    for _ in 0..p.iterations {
        iters += 1;
        let mut av = op.analyze_padded(&x_bar);
        for (a, vv) in av.data.iter_mut().zip(&v.data) {
            *a = vv + p.sigma * *a;
        }
        v = clip_coefficients(&av, 1.0, weights);
        let dv = op.synthesize_padded(&v)?;
        let x_old = x.clone();
        for (xx, d) in x.iter_mut().zip(&dv) {
            *xx -= p.zeta * d;
        }
        project_gamma_in_place(&mut x, &pm, &py, p.theta_max);
        for ((xb, xn), xo) in x_bar.iter_mut().zip(&x).zip(&x_old) {
            *xb = xn + p.rho * (xn - xo);
        }
        // only the clipped samples evolve (projection resets the rest), so
        // measure progress on that subset; skip the first iterations where
        // the clipped part plateaus at the thresholds while the dual builds
        if let (Some(tol), true) = (p.tol, iters >= 50) {
            let mut change_sq = 0.0;
            let mut norm_sq = 0.0;
            for &i in pm.high.iter().chain(&pm.low) {
                change_sq += (x[i] - x_old[i]) * (x[i] - x_old[i]);
                norm_sq += x_old[i] * x_old[i];
            }
            if change_sq.sqrt() / (norm_sq.sqrt() + 1e-300) < tol {
                break;
            }
        }
    }
    x.truncate(y.len());
    Ok((x, iters))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwModel {
    /// Inner solves by Douglas-Rachford on synthesis coefficients.
    Synthesis,
    /// Inner solves by Chambolle-Pock; weights from an extra analysis.
    Analysis,
}

#[derive(Debug, Clone)]
pub struct RwParams {
    pub outer: usize,
    pub inner: usize,
    /// Stabilizer in the weight update 1 / (|z| + eps).
    pub eps: f64,
    /// Inner-loop stop on relative coefficient change.
    pub delta: f64,
    pub theta_max: Option<f64>,
}

impl Default for RwParams {
    fn default() -> Self {
        Self { outer: 6, inner: 1000, eps: 1e-4, delta: 0.01, theta_max: None }
    }
}

/// Iteratively reweighted l1: alternate an inner convex solve with the
/// weight update w = 1 / (|z| + eps).
pub fn declip_reweighted(
    y: &[f64],
    mask: &ClipMask,
    op: &FrameOp,
    model: RwModel,
    p: &RwParams,
) -> Result<(Vec<f64>, usize)> {
    let mut weights = vec![1.0; op.num_coefficients()];
    let mut x = y.to_vec();
    let mut warm: Option<Coefficients> = None;
    let mut total = 0;
    for _ in 0..p.outer {
        let z = match model {
            RwModel::Synthesis => {
                let dp = DrParams {
                    iterations: p.inner,
                    tol: Some(p.delta),
                    theta_max: p.theta_max,
                    ..DrParams::default()
                };
                let (xo, it, z) = declip_dr(y, mask, op, &dp, Some(&weights), warm.take())?;
                x = xo;
                total += it;
                warm = Some(z.clone());
                z
            }
            RwModel::Analysis => {
                let cp = CpParams {
                    iterations: p.inner,
                    tol: Some(p.delta),
                    theta_max: p.theta_max,
                    ..CpParams::default()
                };
                let (xo, it) = declip_cp(y, mask, op, &cp, Some(&weights), Some(x.clone()))?;
                x = xo;
                total += it;
                op.analyze(&x)?
            }
        };
        let mut z = z;
        if op.is_fourier() {
            // keep the weights pair-symmetric, or the next solve slowly
            // pushes the iterate off the real subspace
            z.symmetrize_conjugate();
        }
        for (w, c) in weights.iter_mut().zip(&z.data) {
            *w = 1.0 / (c.norm() + p.eps);
        }
    }
    Ok((x, total))
}

#[derive(Debug, Clone)]
pub struct CsParams {
    pub lambda: f64,
    pub sigma: f64,
    pub tau: f64,
    pub rho: f64,
    pub iterations: usize,
    pub theta_max: Option<f64>,
}

impl Default for CsParams {
    fn default() -> Self {
        Self { lambda: 0.01, sigma: 1.0, tau: 0.0186, rho: 0.99, iterations: 500, theta_max: None }
    }
}

impl CsParams {
    /// Step-size condition sigma < 1/tau - 1/2.
    pub fn is_convergent(&self) -> bool {
        self.sigma < 1.0 / self.tau - 0.5
    }
}

/// Constrained sparse l1 (primal-dual with a smooth data term on the
/// reliable samples and a dual enforcing the clipping constraints).
pub fn declip_cs(
    y: &[f64],
    mask: &ClipMask,
    op: &FrameOp,
    p: &CsParams,
    weights: Option<&[f64]>,
) -> Result<(Vec<f64>, usize)> {
    let (pm, py) = op.pad_mask(mask, y);
    let reliable = {
        let mut sel = vec![false; py.len()];
        for &i in &pm.reliable {
            sel[i] = true;
        }
        sel
    };
    let mut z = op.analyze(y)?;
    let mut u = vec![0.0; py.len()];
    let hi = p.theta_max.unwrap_or(f64::INFINITY);
    let mut iters = 0;
    for _ in 0..p.iterations {
        iters += 1;
        // gradient-like step through the reliable-residual plus the dual
        let dz = op.synthesize_padded(&z)?;
        let mut r: Vec<f64> = dz
            .iter()
            .zip(&py)
            .zip(&reliable)
            .map(|((d, yy), &is_r)| if is_r { d - yy } else { 0.0 })
            .collect();
        for (rr, uu) in r.iter_mut().zip(&u) {
            *rr += uu;
        }
        let grad = op.analyze_padded(&r);
        let mut arg = z.clone();
        for (a, g) in arg.data.iter_mut().zip(&grad.data) {
            *a -= p.tau * g;
        }
        let zt = soft_threshold(&arg, p.tau * p.lambda, weights);
        // dual ascent against the clip-constraint projection
        let mut diff = zt.clone();
        for (d, zz) in diff.data.iter_mut().zip(&z.data) {
            *d = 2.0 * *d - zz;
        }
        let dd = op.synthesize_padded(&diff)?;
        let mut ut = vec![0.0; py.len()];
        for (i, t) in ut.iter_mut().enumerate() {
            *t = u[i] + p.sigma * dd[i];
        }
        // proj onto Gamma_H and Gamma_L only (identity on reliable samples)
        let mut proj: Vec<f64> = ut.iter().map(|&v| v / p.sigma).collect();
        for &i in &pm.high {
            proj[i] = proj[i].max(pm.theta_c).min(hi);
        }
        for &i in &pm.low {
            proj[i] = proj[i].min(-pm.theta_c).max(-hi);
        }
        for (i, t) in ut.iter_mut().enumerate() {
            *t -= p.sigma * proj[i];
        }
        for (zz, ztv) in z.data.iter_mut().zip(&zt.data) {
            *zz = p.rho * ztv + (1.0 - p.rho) * *zz;
        }
        for (uu, utv) in u.iter_mut().zip(&ut) {
            *uu = p.rho * utv + (1.0 - p.rho) * *uu;
        }
    }
    let x = op.synthesize(&z)?;
    Ok((x, iters))
}
