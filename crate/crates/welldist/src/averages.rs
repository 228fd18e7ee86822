//! Surface L^2 averages of `mu_hat` over spheres and convex boundaries,
//! decay-exponent fits, and the cap-decomposition diagnostic for `s = d/2`.

use crate::error::{Result, WelldistError};
use crate::geometry::{fibonacci_sphere, ConvexBody};
use crate::kernels::DecayProfile;
use crate::measure::{MeasureDescriptor, ThickenedMeasure};
use crate::numeric::{linear_fit, pairwise_sum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Quadrature controls for the surface averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Multiplier on the Nyquist node count (default 4).
    pub oversample: f64,
    /// Relative doubling-residual accepted as converged.
    pub tol: f64,
    /// Hard cap on the node count.
    pub m_max: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { oversample: 4.0, tol: 1e-3, m_max: 1 << 23 }
    }
}

/// One evaluated average: `sigma(t)` with its quadrature metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPoint {
    pub t: f64,
    pub sigma: f64,
    /// Final quadrature size.
    pub m: usize,
    /// Relative change under the last doubling.
    pub residual: f64,
    pub converged: bool,
}

/// Sampled `(t, sigma(t))` series over one body and measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AverageSeries {
    pub body: String,
    pub dim: usize,
    pub s: f64,
    pub entries: Vec<SigmaPoint>,
    pub measure: Option<MeasureDescriptor>,
}

impl AverageSeries {
    /// Synthetic series over an explicit grid (test and closed-form inputs).
    pub fn synthetic(dim: usize, grid: &[f64], f: impl Fn(f64) -> f64) -> Self {
        AverageSeries {
            body: "synthetic".into(),
            dim,
            s: f64::NAN,
            entries: grid
                .iter()
                .map(|&t| SigmaPoint { t, sigma: f(t), m: 0, residual: 0.0, converged: true })
                .collect(),
            measure: None,
        }
    }

    pub fn t_range(&self) -> (f64, f64) {
        (
            self.entries.first().map_or(f64::NAN, |e| e.t),
            self.entries.last().map_or(f64::NAN, |e| e.t),
        )
    }
}

/// `sigma(t) = sum_k w_k |mu_hat(t x_k)|^2` over a boundary sample, doubling
/// the node count until the relative change drops below `tol`.
///
/// The initial size is `max(64, ceil(8 t diam oversample))` in d = 2 and
/// `max(64, ceil(oversample (4t)^2))` in d = 3. In d = 2 the equal-arc nodes
/// nest under doubling, so previous evaluations are reused.
pub fn surface_average(
    measure: &ThickenedMeasure,
    body: &ConvexBody,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<SigmaPoint> {
    if body.dim != measure.dim() {
        return Err(WelldistError::Domain("body and measure dimensions differ".into()));
    }
    if !(t >= 0.0) {
        return Err(WelldistError::Domain("t must be nonnegative".into()));
    }
    let d = body.dim;
    let diam = measure.support_diameter();
    let m0 = match d {
        2 => (8.0 * t * diam * quad.oversample).ceil().max(64.0) as usize,
        3 => (quad.oversample * (4.0 * t) * (4.0 * t)).ceil().max(64.0) as usize,
        _ => {
            return Err(WelldistError::Domain(
                "surface averages implemented for d = 2, 3".into(),
            ))
        }
    };
    let m0 = m0.min(quad.m_max);
    let nested = d == 2;

    let eval_nodes = |pts: &[f64], from: usize, stride: usize| -> Vec<f64> {
        let idx: Vec<usize> = (from..pts.len() / d).step_by(stride).collect();
        idx.par_iter()
            .map(|&k| {
                let mut xi = [0.0f64; 3];
                for i in 0..d {
                    xi[i] = t * pts[k * d + i];
                }
                measure.fourier_at(&xi[..d]).norm_sqr()
            })
            .collect()
    };

    let mut m = m0;
    let (pts, weights) = body.boundary_sample(m)?;
    let uniform_w = weights[0];
    let uniform = weights.iter().all(|w| *w == uniform_w);
    let mut vals = eval_nodes(&pts, 0, 1);
    let mut sigma = if uniform {
        uniform_w * pairwise_sum(&vals)
    } else {
        let prods: Vec<f64> = vals.iter().zip(&weights).map(|(v, w)| v * w).collect();
        pairwise_sum(&prods)
    };
    loop {
        let m2 = m * 2;
        let (pts2, weights2) = body.boundary_sample(m2)?;
        let vals2 = if nested {
            // Odd nodes of the doubled grid are new; even nodes are the
            // previous level.
            let fresh = eval_nodes(&pts2, 1, 2);
            let mut merged = Vec::with_capacity(m2);
            for i in 0..m {
                merged.push(vals[i]);
                merged.push(fresh[i]);
            }
            merged
        } else {
            eval_nodes(&pts2, 0, 1)
        };
        let w2 = weights2[0];
        let uniform2 = weights2.iter().all(|w| *w == w2);
        let sigma2 = if uniform2 {
            w2 * pairwise_sum(&vals2)
        } else {
            let prods: Vec<f64> = vals2.iter().zip(&weights2).map(|(v, w)| v * w).collect();
            pairwise_sum(&prods)
        };
        let scale = sigma2.abs().max(1e-300);
        let residual = (sigma2 - sigma).abs() / scale;
        if residual <= quad.tol {
            return Ok(SigmaPoint { t, sigma: sigma2, m: m2, residual, converged: true });
        }
        if m2 >= quad.m_max {
            return Ok(SigmaPoint { t, sigma: sigma2, m: m2, residual, converged: false });
        }
        m = m2;
        vals = vals2;
        sigma = sigma2;
    }
}

/// Evaluate `sigma` over the dyadic grid `t_min * 2^(k / per_octave)`.
pub fn average_series(
    measure: &ThickenedMeasure,
    body: &ConvexBody,
    t_min: f64,
    t_max: f64,
    per_octave: u32,
    quad: &QuadratureSpec,
) -> Result<AverageSeries> {
    if !(t_min >= 1.0 && t_min < t_max) {
        return Err(WelldistError::Domain("need 1 <= t_min < t_max".into()));
    }
    if per_octave < 1 {
        return Err(WelldistError::Domain("per_octave must be >= 1".into()));
    }
    let grid = dyadic_grid(t_min, t_max, per_octave);
    let mut entries = Vec::with_capacity(grid.len());
    for &t in &grid {
        entries.push(surface_average(measure, body, t, quad)?);
    }
    Ok(AverageSeries {
        body: body.to_string(),
        dim: body.dim,
        s: measure.s,
        entries,
        measure: Some(measure.descriptor()),
    })
}

/// `t_min * 2^(k/per_octave)` up to `t_max` (inclusive within rounding).
pub fn dyadic_grid(t_min: f64, t_max: f64, per_octave: u32) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let t = t_min * 2f64.powf(k as f64 / per_octave as f64);
        if t > t_max * (1.0 + 1e-12) {
            break;
        }
        grid.push(t);
        k += 1;
    }
    grid
}

/// Least-squares decay exponent of `sigma` over `[t_lo, t_hi]`:
/// `sigma ~ C t^{-beta}` gives `(beta, stderr)`.
pub fn fit_exponent(series: &AverageSeries, t_lo: f64, t_hi: f64) -> Result<(f64, f64)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for e in &series.entries {
        if e.t >= t_lo * (1.0 - 1e-12) && e.t <= t_hi * (1.0 + 1e-12) {
            if !(e.sigma > 0.0) {
                return Err(WelldistError::Domain(format!(
                    "nonpositive sigma({}) in fit range",
                    e.t
                )));
            }
            xs.push(e.t.ln());
            ys.push(e.sigma.ln());
        }
    }
    if xs.len() < 4 {
        return Err(WelldistError::Domain(format!(
            "need >= 4 grid points in [{t_lo}, {t_hi}], found {}",
            xs.len()
        )));
    }
    let (_, slope, se) = linear_fit(&xs, &ys);
    Ok((-slope, se))
}

/// One cap of the `Sigma_{d/2}` decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cap {
    pub direction: Vec<f64>,
    pub contribution: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapDecomposition {
    pub t: f64,
    pub c1: f64,
    pub c2: f64,
    pub caps: Vec<Cap>,
    pub sigma_half: f64,
}

/// Cap-decomposition diagnostic at `s = d/2`:
/// for each direction `p` in a maximal `c1/sqrt(t)`-separated set, tile the
/// support by rectangles of size `C2 (1 x t^{-1/2} x ...)` aligned with `p`,
/// form the localized one-dimensional sums
/// `mu_hat_{p,j}(u) = phi_hat(q^{-2}|u|) sum_{a in R_{p,j}} w_a e^{-2 pi i (a.p) u}`,
/// take `sup_tau |mu_hat_{p,j}(t - tau)|^2 eta(c C2 tau)` over the `tau` grid
/// of step 1/4, and sum `t^{(d-1)/2} sum_j sup_j` over the caps.
pub fn sigma_half_decomposition(
    measure: &ThickenedMeasure,
    t: f64,
    c1: f64,
    c2: f64,
    eta: &DecayProfile,
    frame_angle: f64,
) -> Result<CapDecomposition> {
    let d = measure.dim();
    if (measure.p - 2.0).abs() > 1e-9 {
        return Err(WelldistError::Domain(
            "cap decomposition requires the s = d/2 measure (p = 2)".into(),
        ));
    }
    let q = measure.q;
    if !(t >= 1.0 && t <= 4.0 * q * q * (1.0 + 1e-9)) {
        return Err(WelldistError::Domain(format!(
            "t must lie in [1, 4 q^2] = [1, {}]",
            4.0 * q * q
        )));
    }
    if d != 2 && d != 3 {
        return Err(WelldistError::Domain("cap decomposition implemented for d = 2, 3".into()));
    }
    let sep = c1 / t.sqrt();
    let dirs = separated_directions(d, sep, frame_angle);

    // tau grid: step 1/4, truncated where eta < 1e-6.
    let delta = 0.25;
    let eta_floor = 1e-6;
    let mut taus = vec![0.0];
    let mut k = 1;
    loop {
        let tau = k as f64 * delta;
        if eta.eta(c2 * tau) < eta_floor {
            break;
        }
        taus.push(tau);
        taus.push(-tau);
        k += 1;
    }

    let width = c2 / t.sqrt();
    // Golden-ratio tile offset keeps lattice coordinates away from tile
    // boundaries, so binning is stable under frame rotations.
    let offset = 0.381_966_011_250_105;
    let qp = measure.q.powf(-measure.p);
    let caps: Vec<Cap> = dirs
        .par_iter()
        .map(|p| {
            // Orthonormal frame with first axis p.
            let frame = orthonormal_frame(p);
            use std::collections::HashMap;
            let mut tiles: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
            for i in 0..measure.atom_count() {
                let a = measure.atom(i);
                let mut key = Vec::with_capacity(d);
                // u tile (width c2 * 1), then transverse tiles (width c2/sqrt t)
                for (axis, e) in frame.iter().enumerate() {
                    let coord: f64 = a.iter().zip(e).map(|(x, y)| x * y).sum();
                    let w = if axis == 0 { c2 } else { width };
                    key.push(((coord + 1.0) / w + offset).floor() as i64);
                }
                tiles.entry(key).or_default().push(i);
            }
            let mut total = 0.0;
            for atoms in tiles.values() {
                let mut sup = 0.0f64;
                for &tau in &taus {
                    let u = t - tau;
                    let cut = measure.bump.hat_radial(qp * u.abs());
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for &i in atoms {
                        let a = measure.atom(i);
                        let along: f64 = a.iter().zip(&frame[0]).map(|(x, y)| x * y).sum();
                        let (s, c) = (-2.0 * PI * along * u).sin_cos();
                        re += measure.weight(i) * c;
                        im += measure.weight(i) * s;
                    }
                    let value = (re * re + im * im) * cut * cut * eta.eta(c2 * tau);
                    sup = sup.max(value);
                }
                total += sup;
            }
            Cap {
                direction: p.clone(),
                contribution: t.powf((d as f64 - 1.0) / 2.0) * total,
            }
        })
        .collect();
    let sigma_half = pairwise_sum(&caps.iter().map(|c| c.contribution).collect::<Vec<_>>());
    Ok(CapDecomposition { t, c1, c2, caps, sigma_half })
}

/// Maximal `sep`-separated direction set (greedy over a fine angular grid).
fn separated_directions(d: usize, sep: f64, frame_angle: f64) -> Vec<Vec<f64>> {
    match d {
        2 => {
            let fine = ((2.0 * PI) / (sep / 8.0)).ceil() as usize;
            let mut dirs: Vec<Vec<f64>> = Vec::new();
            let mut last_angle = f64::NEG_INFINITY;
            let first_chord = |theta: f64, dirs: &Vec<Vec<f64>>| -> bool {
                if let Some(first) = dirs.first() {
                    let p = [theta.cos(), theta.sin()];
                    let dx = p[0] - first[0];
                    let dy = p[1] - first[1];
                    (dx * dx + dy * dy).sqrt() >= sep
                } else {
                    true
                }
            };
            for i in 0..fine {
                let theta = frame_angle + 2.0 * PI * i as f64 / fine as f64;
                // chord distance to the previously accepted direction
                let ok_prev = if last_angle == f64::NEG_INFINITY {
                    true
                } else {
                    (2.0 * ((theta - last_angle) / 2.0).sin()).abs() >= sep
                };
                if ok_prev && first_chord(theta, &dirs) {
                    dirs.push(vec![theta.cos(), theta.sin()]);
                    last_angle = theta;
                }
            }
            dirs
        }
        3 => {
            let grid = fibonacci_sphere(((16.0 / (sep * sep)).ceil() as usize).max(64));
            let mut dirs: Vec<Vec<f64>> = Vec::new();
            for u in grid.chunks_exact(3) {
                let far = dirs.iter().all(|p| {
                    let dd: f64 = p.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum();
                    dd.sqrt() >= sep
                });
                if far {
                    dirs.push(u.to_vec());
                }
            }
            dirs
        }
        _ => unreachable!(),
    }
}

fn orthonormal_frame(p: &[f64]) -> Vec<Vec<f64>> {
    match p.len() {
        2 => vec![p.to_vec(), vec![-p[1], p[0]]],
        3 => {
            let a = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            // Gram-Schmidt
            let dot = a[0] * p[0] + a[1] * p[1] + a[2] * p[2];
            let mut e1 = [a[0] - dot * p[0], a[1] - dot * p[1], a[2] - dot * p[2]];
            let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
            e1 = [e1[0] / n, e1[1] / n, e1[2] / n];
            let e2 = [
                p[1] * e1[2] - p[2] * e1[1],
                p[2] * e1[0] - p[0] * e1[2],
                p[0] * e1[1] - p[1] * e1[0],
            ];
            vec![p.to_vec(), e1.to_vec(), e2.to_vec()]
        }
        _ => unreachable!(),
    }
}

/// Count dual-lattice points `b in q Z^d` with `| |b| - t | <= width`
/// (the active caps of the lattice decomposition), by exact shell
/// enumeration.
pub fn count_active_caps(q: f64, t: f64, d: usize, width: f64) -> Result<u64> {
    if width < 0.0 {
        return Err(WelldistError::Domain("width must be nonnegative".into()));
    }
    let reach = ((t + width) / q).ceil() as i64 + 1;
    let est = (2 * reach + 1).pow(d as u32);
    if est > 1_000_000_000 {
        return Err(WelldistError::Budget(format!(
            "shell enumeration of ~{est} candidates"
        )));
    }
    // Exact path when q, t are integral and width hits integer norms only.
    let exact = q.fract() == 0.0 && t.fract() == 0.0 && width == 0.0;
    let qi = q as i64;
    let ti = t as i64;
    let mut count = 0u64;
    let mut a = vec![-reach; d];
    'outer: loop {
        if exact {
            let norm_sq: i64 = a.iter().map(|v| qi * v * qi * v).sum();
            if norm_sq == ti * ti {
                count += 1;
            }
        } else {
            let norm: f64 = a
                .iter()
                .map(|v| (q * *v as f64) * (q * *v as f64))
                .sum::<f64>()
                .sqrt();
            if (norm - t).abs() <= width {
                count += 1;
            }
        }
        for k in 0..d {
            a[k] += 1;
            if a[k] <= reach {
                continue 'outer;
            }
            a[k] = -reach;
        }
        break;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::BumpProfile;
    use crate::measure::MeasureVariant;
    use crate::points::{generate, rescale_to_unit, GeneratorKind, TruncationShape};

    fn lattice_measure(d: usize, q: f64, s: f64, variant: MeasureVariant) -> ThickenedMeasure {
        let ps = generate(GeneratorKind::Lattice, d, q, TruncationShape::Ball, 0, 0.0).unwrap();
        let scaled = rescale_to_unit(&ps).unwrap();
        ThickenedMeasure::build(&scaled, s, BumpProfile::standard(d), variant).unwrap()
    }

    #[test]
    fn sigma_at_zero_is_surface_measure() {
        let m = lattice_measure(2, 4.0, 1.0, MeasureVariant::Standard);
        let k = ConvexBody::ball(2);
        let p = surface_average(&m, &k, 0.0, &QuadratureSpec::default()).unwrap();
        assert!((p.sigma - 2.0 * PI).abs() < 1e-12);
        assert!(p.converged);
    }

    #[test]
    fn single_atom_sigma_is_closed_form() {
        // Modified q=1 lattice keeps only the origin atom; then
        // sigma(t) = 2 pi (phi_hat(q^{-p} t)/phi_hat(0))^2.
        let m = lattice_measure(2, 1.0, 1.0, MeasureVariant::Modified);
        assert_eq!(m.atom_count(), 1);
        let k = ConvexBody::ball(2);
        for t in [1.0, 10.0] {
            let p = surface_average(&m, &k, t, &QuadratureSpec::default()).unwrap();
            let expect = 2.0 * PI
                * (m.bump.hat_radial(t * m.q.powf(-m.p)) / m.bump.total_mass()).powi(2);
            assert!(
                (p.sigma - expect).abs() < 1e-8 * expect.max(1e-12),
                "t={t}: {} vs {expect}",
                p.sigma
            );
        }
    }

    #[test]
    fn sigma_self_convergence() {
        let m = lattice_measure(2, 8.0, 1.0, MeasureVariant::Standard);
        let k = ConvexBody::ball(2);
        let quad = QuadratureSpec { oversample: 4.0, tol: 1e-6, m_max: 1 << 22 };
        let p = surface_average(&m, &k, 64.0, &quad).unwrap();
        assert!(p.converged, "doubling residual {}", p.residual);
        assert!(p.residual <= 1e-6);
        assert!(p.sigma > 0.0);
    }

    #[test]
    fn dyadic_grid_shape() {
        assert_eq!(dyadic_grid(8.0, 64.0, 1), vec![8.0, 16.0, 32.0, 64.0]);
        assert_eq!(dyadic_grid(8.0, 64.0, 2).len(), 7);
    }

    #[test]
    fn fit_exponent_exact_power_laws() {
        let grid = dyadic_grid(1.0, 1024.0, 2);
        let s1 = AverageSeries::synthetic(2, &grid, |t| 1.0 / t);
        let (beta, se) = fit_exponent(&s1, 1.0, 1024.0).unwrap();
        assert!((beta - 1.0).abs() < 1e-9 && se < 1e-9);
        let s2 = AverageSeries::synthetic(2, &grid, |t| 5.0 * t.powf(-0.75));
        let (beta, _) = fit_exponent(&s2, 1.0, 1024.0).unwrap();
        assert!((beta - 0.75).abs() < 1e-9);
        // intercept recovery
        let xs: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = grid.iter().map(|t| (5.0 * t.powf(-0.75)).ln()).collect();
        let (a, _, _) = linear_fit(&xs, &ys);
        assert!((a.exp() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn fit_exponent_requires_points_and_positivity() {
        let grid = dyadic_grid(1.0, 8.0, 1);
        let s = AverageSeries::synthetic(2, &grid, |t| 1.0 / t);
        assert!(fit_exponent(&s, 1.0, 2.0).is_err(), "too few points");
        let z = AverageSeries::synthetic(2, &grid, |_| 0.0);
        assert!(fit_exponent(&z, 1.0, 8.0).is_err(), "zero sigma rejected");
    }

    #[test]
    fn active_cap_counts() {
        assert_eq!(count_active_caps(5.0, 25.0, 2, 0.5).unwrap(), 20);
        assert_eq!(count_active_caps(5.0, 25.0, 2, 0.0).unwrap(), 12);
        let c0 = count_active_caps(5.0, 25.0, 2, 0.0).unwrap();
        let c1 = count_active_caps(5.0, 25.0, 2, 0.5).unwrap();
        let c2 = count_active_caps(5.0, 25.0, 2, 2.0).unwrap();
        assert!(c0 <= c1 && c1 <= c2);
    }

    #[test]
    fn cap_directions_are_separated() {
        let m = lattice_measure(2, 8.0, 1.0, MeasureVariant::Standard);
        let t = 64.0;
        let dec =
            sigma_half_decomposition(&m, t, 0.25, 4.0, &DecayProfile::default(), 0.0).unwrap();
        let sep = 0.25 / t.sqrt();
        for (i, a) in dec.caps.iter().enumerate() {
            for b in dec.caps.iter().skip(i + 1) {
                let dd: f64 = a
                    .direction
                    .iter()
                    .zip(&b.direction)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                assert!(dd.sqrt() >= sep * (1.0 - 1e-9));
            }
        }
        assert!(dec.sigma_half > 0.0);
        let total: f64 = dec.caps.iter().map(|c| c.contribution).sum();
        assert!((total - dec.sigma_half).abs() < 1e-9 * total);
        assert!(dec.caps.iter().all(|c| c.contribution >= 0.0));
    }

    #[test]
    fn single_atom_cap_degeneracy() {
        // One atom: exactly one rectangle per cap is nonempty and every cap
        // carries the same contribution, so Sigma = |P| times it.
        let m = lattice_measure(2, 1.0, 1.0, MeasureVariant::Modified);
        assert_eq!(m.atom_count(), 1);
        let t = 4.0;
        let dec =
            sigma_half_decomposition(&m, t, 0.25, 4.0, &DecayProfile::default(), 0.0).unwrap();
        let first = dec.caps[0].contribution;
        for c in &dec.caps {
            assert!((c.contribution - first).abs() <= 1e-9 * first.max(1e-300));
        }
        assert!(
            (dec.sigma_half - first * dec.caps.len() as f64).abs()
                < 1e-9 * dec.sigma_half.max(1e-300)
        );
        // The single-atom sup value: atom at origin, so the 1-D sum is w and
        // the sup over tau picks the largest cut-off factor times eta.
        let eta = DecayProfile::default();
        let w = m.weight(0);
        let qp = m.q.powf(-m.p);
        let mut expect = 0.0f64;
        let mut k = 0;
        loop {
            let tau = 0.25 * k as f64;
            if eta.eta(4.0 * tau) < 1e-6 {
                break;
            }
            for sgn in [-1.0, 1.0] {
                let u = t - sgn * tau;
                let cut = m.bump.hat_radial(qp * u.abs());
                expect = expect.max(w * w * cut * cut * eta.eta(4.0 * tau));
            }
            k += 1;
        }
        let expect = t.powf(0.5) * expect;
        assert!((first - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn cap_decomposition_rotation_invariance() {
        use crate::points::{PointSet, Truncation};
        let q = 8.0;
        let base = generate(GeneratorKind::Lattice, 2, q, TruncationShape::Ball, 0, 0.0).unwrap();
        let angle = 17.0_f64.to_radians();
        let (sa, ca) = angle.sin_cos();
        let rotated: Vec<f64> = base
            .iter_points()
            .flat_map(|p| [ca * p[0] - sa * p[1], sa * p[0] + ca * p[1]])
            .collect();
        let rot_ps = PointSet::from_points(
            2,
            rotated,
            Truncation { shape: TruncationShape::Ball, radius: q },
        )
        .unwrap();
        let scaled_base = rescale_to_unit(&base).unwrap();
        let scaled_rot = rescale_to_unit(&rot_ps).unwrap();
        let bump = BumpProfile::standard(2);
        let m0 = ThickenedMeasure::build(&scaled_base, 1.0, bump.clone(), MeasureVariant::Standard)
            .unwrap();
        let m1 =
            ThickenedMeasure::build(&scaled_rot, 1.0, bump, MeasureVariant::Standard).unwrap();
        let t = q * q;
        let eta = DecayProfile::default();
        let d0 = sigma_half_decomposition(&m0, t, 0.25, 4.0, &eta, 0.0).unwrap();
        let d1 = sigma_half_decomposition(&m1, t, 0.25, 4.0, &eta, angle).unwrap();
        assert!(
            (d0.sigma_half - d1.sigma_half).abs() < 1e-6 * d0.sigma_half,
            "{} vs {}",
            d0.sigma_half,
            d1.sigma_half
        );
    }
}
