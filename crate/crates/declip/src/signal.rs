//! Time-domain signal model: hard clipping, reliable/clipped masks,
//! feasibility projection and SDR metrics.

use crate::error::{DeclipError, Result};
use serde::{Deserialize, Serialize};

/// Finite cap standing in for +inf dB, keeps reports serializable.
pub const SDR_CAP_DB: f64 = 300.0;

/// Mono waveform with double-precision samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(DeclipError::EmptySignal);
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(DeclipError::NonFiniteSample(i));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &s| m.max(s.abs()))
    }
}

/// Classification of a sample with respect to the clipping model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleClass {
    Reliable,
    High,
    Low,
}

/// Disjoint index sets R/H/L plus the clipping threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipMask {
    pub reliable: Vec<usize>,
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    pub theta_c: f64,
}

impl ClipMask {
    pub fn len(&self) -> usize {
        self.reliable.len() + self.high.len() + self.low.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_clipped(&self) -> usize {
        self.high.len() + self.low.len()
    }

    pub fn percent_clipped(&self) -> f64 {
        100.0 * self.num_clipped() as f64 / self.len() as f64
    }

    /// Dense per-sample labels, for elementwise loops.
    pub fn labels(&self) -> Vec<SampleClass> {
        let mut labels = vec![SampleClass::Reliable; self.len()];
        for &i in &self.high {
            labels[i] = SampleClass::High;
        }
        for &i in &self.low {
            labels[i] = SampleClass::Low;
        }
        labels
    }

    /// Classify an already-clipped signal against a known threshold.
    pub fn from_signal(y: &[f64], theta_c: f64) -> ClipMask {
        let mut mask =
            ClipMask { reliable: Vec::new(), high: Vec::new(), low: Vec::new(), theta_c };
        for (i, &s) in y.iter().enumerate() {
            if s.abs() < theta_c {
                mask.reliable.push(i);
            } else if s >= theta_c {
                mask.high.push(i);
            } else {
                mask.low.push(i);
            }
        }
        mask
    }

    /// Restriction of the mask to `range`, with indices shifted to be local.
    pub fn restrict(&self, range: std::ops::Range<usize>) -> ClipMask {
        let pick = |set: &[usize]| {
            set.iter()
                .filter(|&&i| range.contains(&i))
                .map(|&i| i - range.start)
                .collect::<Vec<_>>()
        };
        ClipMask {
            reliable: pick(&self.reliable),
            high: pick(&self.high),
            low: pick(&self.low),
            theta_c: self.theta_c,
        }
    }

    /// Exact membership test for Gamma_R: estimate equals `y` on R.
    pub fn consistent_reliable(&self, xhat: &[f64], y: &[f64]) -> bool {
        self.reliable.iter().all(|&i| xhat[i] == y[i])
    }

    /// Exact membership test for Gamma_H and Gamma_L.
    pub fn consistent_clipped(&self, xhat: &[f64]) -> bool {
        self.high.iter().all(|&i| xhat[i] >= self.theta_c)
            && self.low.iter().all(|&i| xhat[i] <= -self.theta_c)
    }
}

/// The feasible set Gamma, optionally narrowed by a dynamic-range cap.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    pub mask: ClipMask,
    pub theta_max: Option<f64>,
}

impl FeasibleSet {
    pub fn new(mask: ClipMask) -> Self {
        Self { mask, theta_max: None }
    }

    pub fn with_theta_max(mask: ClipMask, theta_max: f64) -> Result<Self> {
        if theta_max < mask.theta_c {
            return Err(DeclipError::InvalidThreshold(theta_max));
        }
        Ok(Self { mask, theta_max: Some(theta_max) })
    }
}

/// Per-(signal, level, method) evaluation record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeclipReport {
    pub signal: String,
    pub method: String,
    pub input_sdr: f64,
    pub output_sdr: f64,
    pub delta_sdr: f64,
    pub delta_sdr_clipped: f64,
    pub consistent_reliable: bool,
    pub consistent_clipped: bool,
    pub iterations: usize,
    pub wall_time: f64,
}

/// Hard-clip `x` at `theta_c` and record which samples were touched.
pub fn clip(x: &Signal, theta_c: f64) -> Result<(Signal, ClipMask)> {
    if theta_c <= 0.0 || !theta_c.is_finite() {
        return Err(DeclipError::InvalidThreshold(theta_c));
    }
    if let Some(i) = x.samples.iter().position(|s| !s.is_finite()) {
        return Err(DeclipError::NonFiniteSample(i));
    }
    let mut samples = Vec::with_capacity(x.len());
    let mut mask = ClipMask {
        reliable: Vec::new(),
        high: Vec::new(),
        low: Vec::new(),
        theta_c,
    };
    for (i, &s) in x.samples.iter().enumerate() {
        if s.abs() < theta_c {
            mask.reliable.push(i);
            samples.push(s);
        } else if s >= theta_c {
            mask.high.push(i);
            samples.push(theta_c);
        } else {
            mask.low.push(i);
            samples.push(-theta_c);
        }
    }
    Ok((Signal { samples, sample_rate: x.sample_rate }, mask))
}

/// Elementwise projection onto Gamma: `y` on R, clamp beyond the thresholds
/// on H and L. With a dynamic-range cap, H is additionally limited to
/// `theta_max` and L to `-theta_max`.
pub fn project_gamma(u: &[f64], fs: &FeasibleSet, y: &[f64]) -> Result<Vec<f64>> {
    if u.len() != y.len() || u.len() != fs.mask.len() {
        return Err(DeclipError::LengthMismatch { expected: fs.mask.len(), got: u.len() });
    }
    let mut out = u.to_vec();
    project_gamma_in_place(&mut out, &fs.mask, y, fs.theta_max);
    Ok(out)
}

/// In-place variant used in solver inner loops.
pub fn project_gamma_in_place(u: &mut [f64], mask: &ClipMask, y: &[f64], theta_max: Option<f64>) {
    for &i in &mask.reliable {
        u[i] = y[i];
    }
    let hi = theta_max.unwrap_or(f64::INFINITY);
    for &i in &mask.high {
        u[i] = u[i].max(mask.theta_c).min(hi);
    }
    for &i in &mask.low {
        u[i] = u[i].min(-mask.theta_c).max(-hi);
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|s| s * s).sum::<f64>().sqrt()
}

fn sdr_from_norms(ref_norm: f64, err_norm: f64) -> Result<f64> {
    if ref_norm == 0.0 {
        return Err(DeclipError::ZeroReference);
    }
    if err_norm == 0.0 {
        return Ok(SDR_CAP_DB);
    }
    Ok((20.0 * (ref_norm / err_norm).log10()).min(SDR_CAP_DB))
}

/// Signal-to-distortion ratio 20*log10(|u| / |u - v|) in dB, capped at
/// [`SDR_CAP_DB`] when the signals coincide.
pub fn sdr(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(DeclipError::LengthMismatch { expected: u.len(), got: v.len() });
    }
    let err: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    sdr_from_norms(l2(u), err.sqrt())
}

/// SDR restricted to the clipped indices H and L.
pub fn sdr_clipped(x: &[f64], xhat: &[f64], mask: &ClipMask) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(DeclipError::LengthMismatch { expected: x.len(), got: xhat.len() });
    }
    if mask.num_clipped() == 0 {
        return Err(DeclipError::NothingClipped);
    }
    let mut ref_sq = 0.0;
    let mut err_sq = 0.0;
    for &i in mask.high.iter().chain(&mask.low) {
        ref_sq += x[i] * x[i];
        let d = x[i] - xhat[i];
        err_sq += d * d;
    }
    sdr_from_norms(ref_sq.sqrt(), err_sq.sqrt())
}

/// SDR improvement on the clipped part: SDRc(x, xhat) - SDRc(x, y).
pub fn delta_sdr_clipped(x: &[f64], y: &[f64], xhat: &[f64], mask: &ClipMask) -> Result<f64> {
    Ok(sdr_clipped(x, xhat, mask)? - sdr_clipped(x, y, mask)?)
}

/// SDR improvement on the full signal: SDR(x, xhat) - SDR(x, y).
pub fn delta_sdr(x: &[f64], y: &[f64], xhat: &[f64]) -> Result<f64> {
    Ok(sdr(x, xhat)? - sdr(x, y)?)
}

/// Find the clipping threshold that degrades `x` to the target input SDR,
/// by bisection. The input SDR is strictly increasing in the threshold on
/// (0, max|x|), which justifies the bracketing.
pub fn clip_to_target_sdr(x: &Signal, target: f64, tol: f64) -> Result<(Signal, ClipMask, f64)> {
    let max_abs = x.max_abs();
    if max_abs == 0.0 || !target.is_finite() || target <= 0.0 {
        return Err(DeclipError::TargetNotBracketable { target });
    }
    let eval = |theta: f64| -> Result<f64> {
        let (y, _) = clip(x, theta)?;
        sdr(&x.samples, &y.samples)
    };
    let mut lo = max_abs * 1e-9;
    let mut hi = max_abs * (1.0 - 1e-12);
    if eval(lo)? > target || eval(hi)? < target {
        return Err(DeclipError::TargetNotBracketable { target });
    }
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..200 {
        theta = 0.5 * (lo + hi);
        let s = eval(theta)?;
        if (s - target).abs() <= tol {
            break;
        }
        if s < target {
            lo = theta;
        } else {
            hi = theta;
        }
    }
    let (y, mask) = clip(x, theta)?;
    Ok((y, mask, theta))
}
