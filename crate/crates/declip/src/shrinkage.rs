//! Coefficient-domain shrinkage operators: k-term hard thresholding,
//! (weighted) soft thresholding, and structured shrinkers with time-frequency
//! neighborhoods.

use crate::error::{DeclipError, Result};
use crate::frames::Coefficients;

/// Keep the `k` largest-magnitude coefficient groups, zero the rest.
///
/// With `conjugate_pairs` set (DFT grids of real signals), bins `p` and
/// `channels - p` of each shift form one group and are kept or dropped
/// together, so `k` counts independent groups and the output stays
/// conjugate-symmetric. Without it every coefficient is its own group.
pub fn hard_threshold_k(z: &Coefficients, k: usize, conjugate_pairs: bool) -> Result<Coefficients> {
    let groups = group_indices(z, conjugate_pairs);
    if k > groups.len() {
        return Err(DeclipError::SparsityOutOfRange { k, max: groups.len() });
    }
    let mut scored: Vec<(f64, usize)> = groups
        .iter()
        .enumerate()
        .map(|(g, idx)| (idx.iter().map(|&i| z.data[i].norm_sqr()).sum::<f64>(), g))
        .collect();
    if k < scored.len() {
        scored.select_nth_unstable_by(k, |a, b| b.0.partial_cmp(&a.0).unwrap());
    }
    let mut out = Coefficients::zeros(z.channels, z.shifts);
    for &(_, g) in &scored[..k] {
        for &i in &groups[g] {
            out.data[i] = z.data[i];
        }
    }
    Ok(out)
}

/// Number of independent groups available to `hard_threshold_k`.
pub fn num_groups(z: &Coefficients, conjugate_pairs: bool) -> usize {
    if conjugate_pairs {
        (z.channels / 2 + 1) * z.shifts
    } else {
        z.data.len()
    }
}

fn group_indices(z: &Coefficients, conjugate_pairs: bool) -> Vec<Vec<usize>> {
    if !conjugate_pairs {
        return (0..z.data.len()).map(|i| vec![i]).collect();
    }
    let m = z.channels;
    let mut groups = Vec::with_capacity((m / 2 + 1) * z.shifts);
    for t in 0..z.shifts {
        let base = t * m;
        for f in 0..=m / 2 {
            let partner = (m - f) % m;
            if partner == f {
                groups.push(vec![base + f]);
            } else {
                groups.push(vec![base + f, base + partner]);
            }
        }
    }
    groups
}

/// Elementwise soft threshold `z * max(1 - tau*w/|z|, 0)`; `weights = None`
/// means unit weights.
pub fn soft_threshold(z: &Coefficients, tau: f64, weights: Option<&[f64]>) -> Coefficients {
    let mut out = z.clone();
    soft_threshold_in_place(&mut out, tau, weights);
    out
}

pub fn soft_threshold_in_place(z: &mut Coefficients, tau: f64, weights: Option<&[f64]>) {
    for (i, c) in z.data.iter_mut().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let mag = c.norm();
        let factor = if mag > 0.0 { (1.0 - tau * w / mag).max(0.0) } else { 0.0 };
        *c *= factor;
    }
}

/// `clip_w = Id - soft_w`: the residual the soft threshold removes.
pub fn clip_coefficients(z: &Coefficients, tau: f64, weights: Option<&[f64]>) -> Coefficients {
    let s = soft_threshold(z, tau, weights);
    let mut out = z.clone();
    for (o, v) in out.data.iter_mut().zip(&s.data) {
        *o -= v;
    }
    out
}

/// Hinge: identity on the negative part, zero elsewhere.
pub fn hinge(u: f64) -> f64 {
    u.min(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocialKind {
    /// Plain Lasso soft threshold.
    Lasso,
    /// Windowed group Lasso: soft threshold driven by neighborhood energy.
    WindowedGroupLasso,
    /// Empirical Wiener: `z * max(1 - lambda^2/|z|^2, 0)`.
    EmpiricalWiener,
    /// Persistent empirical Wiener: EW driven by neighborhood energy.
    PersistentEmpiricalWiener,
}

/// Centered time-frequency neighborhood; both extents must be odd.
#[derive(Debug, Clone, Copy)]
pub struct Neighborhood {
    pub freq: usize,
    pub time: usize,
}

impl Neighborhood {
    pub fn new(freq: usize, time: usize) -> Result<Self> {
        if freq == 0 || time == 0 || freq % 2 == 0 || time % 2 == 0 {
            return Err(DeclipError::MissingNeighborhood("extents must be odd and positive"));
        }
        Ok(Self { freq, time })
    }

    /// 3 frequency bins by 7 time shifts.
    pub fn default_speech() -> Self {
        Self { freq: 3, time: 7 }
    }
}

/// Sum of `|z|^2` over the neighborhood centered at each grid point,
/// truncated at the time edges. With `wrap_freq` the frequency window wraps
/// circularly (required on DFT grids so conjugate bins see mirror-image
/// neighborhoods and shrinkage preserves conjugate symmetry).
pub fn neighborhood_energy(z: &Coefficients, nb: Neighborhood, wrap_freq: bool) -> Vec<f64> {
    let (ch, sh) = (z.channels, z.shifts);
    let fr = nb.freq / 2;
    let tr = nb.time / 2;
    // pass 1: sum over the time window per (f, t)
    let mut tmp = vec![0.0; ch * sh];
    for f in 0..ch {
        for t in 0..sh {
            let lo = t.saturating_sub(tr);
            let hi = (t + tr).min(sh - 1);
            let mut s = 0.0;
            for tt in lo..=hi {
                s += z.data[tt * ch + f].norm_sqr();
            }
            tmp[t * ch + f] = s;
        }
    }
    // pass 2: sum over the frequency window
    let mut out = vec![0.0; ch * sh];
    for t in 0..sh {
        for f in 0..ch {
            let mut s = 0.0;
            for d in -(fr as i64)..=(fr as i64) {
                let ff = f as i64 + d;
                if wrap_freq {
                    s += tmp[t * ch + ff.rem_euclid(ch as i64) as usize];
                } else if (0..ch as i64).contains(&ff) {
                    s += tmp[t * ch + ff as usize];
                }
            }
            out[t * ch + f] = s;
        }
    }
    out
}

/// Apply a structured shrinker with parameter `lambda`. The neighborhood is
/// required by the windowed/persistent kinds and ignored by the others.
pub fn shrink_social(
    z: &Coefficients,
    kind: SocialKind,
    lambda: f64,
    nb: Option<Neighborhood>,
    wrap_freq: bool,
) -> Result<Coefficients> {
    let mut out = z.clone();
    match kind {
        SocialKind::Lasso => {
            soft_threshold_in_place(&mut out, lambda, None);
        }
        SocialKind::EmpiricalWiener => {
            for c in out.data.iter_mut() {
                let e = c.norm_sqr();
                let factor = if e > 0.0 { (1.0 - lambda * lambda / e).max(0.0) } else { 0.0 };
                *c *= factor;
            }
        }
        SocialKind::WindowedGroupLasso | SocialKind::PersistentEmpiricalWiener => {
            let nb = nb.ok_or(DeclipError::MissingNeighborhood(
                "windowed shrinkers need a neighborhood",
            ))?;
            let energy = neighborhood_energy(z, nb, wrap_freq);
            for (c, &e) in out.data.iter_mut().zip(&energy) {
                let factor = if e > 0.0 {
                    match kind {
                        SocialKind::WindowedGroupLasso => (1.0 - lambda / e.sqrt()).max(0.0),
                        _ => (1.0 - lambda * lambda / e).max(0.0),
                    }
                } else {
                    0.0
                };
                *c *= factor;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand::Rng as _;
    use rand_chacha::ChaCha8Rng;

    fn rand_coeffs(rng: &mut ChaCha8Rng, channels: usize, shifts: usize) -> Coefficients {
        let mut z = Coefficients::zeros(channels, shifts);
        for c in z.data.iter_mut() {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        z
    }

    fn symmetric_coeffs(rng: &mut ChaCha8Rng, channels: usize, shifts: usize) -> Coefficients {
        let mut z = Coefficients::zeros(channels, shifts);
        for t in 0..shifts {
            for f in 0..=channels / 2 {
                let re = rng.gen_range(-1.0..1.0);
                let im = if f == 0 || (channels % 2 == 0 && f == channels / 2) {
                    0.0
                } else {
                    rng.gen_range(-1.0..1.0)
                };
                *z.at_mut(f, t) = Complex64::new(re, im);
                if f != 0 && f != (channels - f) % channels {
                    *z.at_mut(channels - f, t) = Complex64::new(re, -im);
                }
            }
        }
        z
    }

    #[test]
    fn soft_threshold_scalar_matches_grid_search_prox() {
        // prox of tau*|v| at z: argmin over a fine grid of 0.5(v-z)^2 + tau|v|
        for &(zv, tau) in &[(0.8, 0.3), (-0.25, 0.3), (0.1, 0.3), (1.5, 1.0), (-2.0, 0.5)] {
            let mut best = f64::INFINITY;
            let mut best_v = 0.0f64;
            let mut v = -3.0f64;
            while v <= 3.0 {
                let obj = 0.5 * (v - zv) * (v - zv) + tau * v.abs();
                if obj < best {
                    best = obj;
                    best_v = v;
                }
                v += 1e-5;
            }
            let mut z = Coefficients::zeros(1, 1);
            z.data[0] = Complex64::new(zv, 0.0);
            let s = soft_threshold(&z, tau, None);
            assert!((s.data[0].re - best_v).abs() < 2e-5, "z={zv} tau={tau}");
            assert_eq!(s.data[0].im, 0.0);
        }
    }

    #[test]
    fn complex_soft_threshold_preserves_phase() {
        let mut z = Coefficients::zeros(1, 1);
        z.data[0] = Complex64::from_polar(2.0, 1.1);
        let s = soft_threshold(&z, 0.5, None);
        assert!((s.data[0].norm() - 1.5).abs() < 1e-12);
        assert!((s.data[0].arg() - 1.1).abs() < 1e-12);
        // below the threshold the coefficient dies
        z.data[0] = Complex64::from_polar(0.4, -0.3);
        let s = soft_threshold(&z, 0.5, None);
        assert_eq!(s.data[0], Complex64::ZERO);
    }

    #[test]
    fn weighted_soft_threshold_scales_per_coefficient() {
        let mut z = Coefficients::zeros(2, 1);
        z.data[0] = Complex64::new(1.0, 0.0);
        z.data[1] = Complex64::new(1.0, 0.0);
        let s = soft_threshold(&z, 0.5, Some(&[1.0, 0.2]));
        assert!((s.data[0].re - 0.5).abs() < 1e-12);
        assert!((s.data[1].re - 0.9).abs() < 1e-12);
    }

    #[test]
    fn clip_plus_soft_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z = rand_coeffs(&mut rng, 8, 3);
        let w: Vec<f64> = (0..24).map(|_| rng.gen_range(0.1..2.0)).collect();
        let s = soft_threshold(&z, 0.3, Some(&w));
        let c = clip_coefficients(&z, 0.3, Some(&w));
        for i in 0..z.data.len() {
            assert!((s.data[i] + c.data[i] - z.data[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn hard_threshold_keeps_largest_groups() {
        let mut z = Coefficients::zeros(6, 1);
        for (i, mag) in [0.1, 0.9, 0.5, 0.2, 0.5, 0.9].iter().enumerate() {
            z.data[i] = Complex64::new(*mag, 0.0);
        }
        // without pairing: top-2 out of 6 coefficients
        let h = hard_threshold_k(&z, 2, false).unwrap();
        let kept: Vec<usize> =
            (0..6).filter(|&i| h.data[i] != Complex64::ZERO).collect();
        assert_eq!(kept, vec![1, 5]);
        // with pairing: groups are {0},{1,5},{2,4},{3}; top-1 is the pair {1,5}
        let h = hard_threshold_k(&z, 1, true).unwrap();
        let kept: Vec<usize> =
            (0..6).filter(|&i| h.data[i] != Complex64::ZERO).collect();
        assert_eq!(kept, vec![1, 5]);
    }

    #[test]
    fn hard_threshold_preserves_conjugate_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let z = symmetric_coeffs(&mut rng, 16, 2);
        let h = hard_threshold_k(&z, 5, true).unwrap();
        for t in 0..2 {
            for f in 1..16 {
                let a = h.at(f, t);
                let b = h.at(16 - f, t);
                assert!((a - b.conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hard_threshold_is_best_k_term_approximation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let z = rand_coeffs(&mut rng, 10, 1);
            let k = rng.gen_range(1..9);
            let h = hard_threshold_k(&z, k, false).unwrap();
            let err_h: f64 = z
                .data
                .iter()
                .zip(&h.data)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            // compare against random k-sparse competitors with z's values
            for _ in 0..20 {
                let mut keep: Vec<usize> = (0..10).collect();
                keep.shuffle(&mut rng);
                let err_v: f64 = keep[k..].iter().map(|&i| z.data[i].norm_sqr()).sum();
                assert!(err_h <= err_v + 1e-12);
            }
        }
    }

    #[test]
    fn hard_threshold_sparsity_bounds() {
        let z = Coefficients::zeros(8, 2);
        assert!(hard_threshold_k(&z, 17, false).is_err());
        assert!(hard_threshold_k(&z, 16, false).is_ok());
        assert_eq!(num_groups(&z, true), 5 * 2);
        assert!(hard_threshold_k(&z, 11, true).is_err());
        let full = hard_threshold_k(&z, 10, true).unwrap();
        assert_eq!(full.data.len(), 16);
    }

    #[test]
    fn hinge_is_negative_part() {
        assert_eq!(hinge(-0.5), -0.5);
        assert_eq!(hinge(0.0), 0.0);
        assert_eq!(hinge(2.0), 0.0);
    }

    #[test]
    fn neighborhood_energy_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let z = rand_coeffs(&mut rng, 9, 11);
        let nb = Neighborhood::new(3, 7).unwrap();
        let fast = neighborhood_energy(&z, nb, false);
        for f in 0..9usize {
            for t in 0..11usize {
                let mut s = 0.0;
                for df in -1i64..=1 {
                    for dt in -3i64..=3 {
                        let ff = f as i64 + df;
                        let tt = t as i64 + dt;
                        if (0..9).contains(&ff) && (0..11).contains(&tt) {
                            s += z.at(ff as usize, tt as usize).norm_sqr();
                        }
                    }
                }
                assert!((fast[t * 9 + f] - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrapped_shrinkage_preserves_conjugate_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let z = symmetric_coeffs(&mut rng, 16, 4);
        let nb = Neighborhood::new(3, 3).unwrap();
        let s = shrink_social(&z, SocialKind::PersistentEmpiricalWiener, 0.3, Some(nb), true)
            .unwrap();
        for t in 0..4 {
            for f in 1..16 {
                assert!((s.at(f, t) - s.at(16 - f, t).conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn empirical_wiener_formula() {
        let mut z = Coefficients::zeros(2, 1);
        z.data[0] = Complex64::new(2.0, 0.0);
        z.data[1] = Complex64::new(0.5, 0.0);
        let s = shrink_social(&z, SocialKind::EmpiricalWiener, 1.0, None, false).unwrap();
        assert!((s.data[0].re - 2.0 * (1.0 - 0.25)).abs() < 1e-12);
        assert_eq!(s.data[1], Complex64::ZERO);
    }

    #[test]
    fn persistent_shrinkers_survive_on_neighborhood_energy() {
        // a tiny coefficient inside an energetic neighborhood is kept by
        // PEW but killed by EW
        let mut z = Coefficients::zeros(3, 3);
        *z.at_mut(1, 1) = Complex64::new(0.05, 0.0);
        *z.at_mut(1, 0) = Complex64::new(3.0, 0.0);
        let nb = Neighborhood::new(3, 3).unwrap();
        let ew = shrink_social(&z, SocialKind::EmpiricalWiener, 0.5, None, false).unwrap();
        let pew =
            shrink_social(&z, SocialKind::PersistentEmpiricalWiener, 0.5, Some(nb), false).unwrap();
        assert_eq!(ew.at(1, 1), Complex64::ZERO);
        assert!(pew.at(1, 1).norm() > 0.0);
    }

    #[test]
    fn windowed_group_lasso_requires_neighborhood() {
        let z = Coefficients::zeros(2, 2);
        assert!(matches!(
            shrink_social(&z, SocialKind::WindowedGroupLasso, 0.1, None, false),
            Err(DeclipError::MissingNeighborhood(_))
        ));
        assert!(Neighborhood::new(2, 3).is_err());
        assert!(Neighborhood::new(3, 0).is_err());
    }

    proptest! {
        #[test]
        fn shrinkers_never_grow_coefficients(
            seed in 0u64..1000,
            lambda in 0.0f64..2.0,
            kind_idx in 0usize..4,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z = rand_coeffs(&mut rng, 5, 9);
            let kind = [
                SocialKind::Lasso,
                SocialKind::WindowedGroupLasso,
                SocialKind::EmpiricalWiener,
                SocialKind::PersistentEmpiricalWiener,
            ][kind_idx];
            let nb = Some(Neighborhood::default_speech());
            let s = shrink_social(&z, kind, lambda, nb, false).unwrap();
            for (a, b) in s.data.iter().zip(&z.data) {
                prop_assert!(a.norm() <= b.norm() + 1e-12);
                // shrinkage preserves phase
                if a.norm() > 1e-12 {
                    prop_assert!((a / b).im.abs() < 1e-9);
                }
            }
        }

        #[test]
        fn hard_threshold_idempotent(seed in 0u64..1000, k in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z = rand_coeffs(&mut rng, 4, 4);
            let h = hard_threshold_k(&z, k, false).unwrap();
            let h2 = hard_threshold_k(&h, k, false).unwrap();
            prop_assert_eq!(h.data, h2.data);
        }

        #[test]
        fn soft_threshold_nonexpansive(seed in 0u64..1000, tau in 0.0f64..1.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = rand_coeffs(&mut rng, 6, 3);
            let b = rand_coeffs(&mut rng, 6, 3);
            let sa = soft_threshold(&a, tau, None);
            let sb = soft_threshold(&b, tau, None);
            let d_in: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm_sqr()).sum();
            let d_out: f64 = sa.data.iter().zip(&sb.data).map(|(x, y)| (x - y).norm_sqr()).sum();
            prop_assert!(d_out <= d_in + 1e-9);
        }
    }
}
