//! The distance-measure side of the apparatus: the empirical push-forward of
//! `mu x mu` under the distance map, its Hankel transform, the spectral
//! energy and Mattila integrals, and the single-distance oscillatory
//! integrals.

use crate::averages::AverageSeries;
use crate::error::{Result, WelldistError};
use crate::geometry::ConvexBody;
use crate::kernels::bessel_j;
use crate::measure::ThickenedMeasure;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Empirical distance measure: atoms at the pairwise distance values,
/// weights summing to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceMeasure {
    pub support: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Push-forward of `mu x mu` under the distance map, on ordered atom pairs
/// with the diagonal dropped and the weight renormalized away.
pub fn empirical_distance_measure(m: &ThickenedMeasure) -> Result<DistanceMeasure> {
    let n = m.atom_count();
    if n > 100_000 {
        return Err(WelldistError::Budget(format!("{n} atoms exceed the pair budget")));
    }
    let d = m.dim();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let a = m.atom(i);
        let mi = m.atom_mass(i);
        for j in (i + 1)..n {
            let b = m.atom(j);
            let dist: f64 = (0..d).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum::<f64>().sqrt();
            // unordered pair carries both ordered pairs
            pairs.push((dist, 2.0 * mi * m.atom_mass(j)));
        }
    }
    if pairs.is_empty() {
        return Err(WelldistError::Domain("distance measure needs >= 2 atoms".into()));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut support = Vec::new();
    let mut weights = Vec::new();
    for (dist, w) in pairs {
        match support.last() {
            Some(&last) if dist - last < 1e-12 => {
                *weights.last_mut().unwrap() += w;
            }
            _ => {
                support.push(dist);
                weights.push(w);
            }
        }
    }
    let total: f64 = crate::numeric::pairwise_sum(&weights);
    for w in &mut weights {
        *w /= total;
    }
    Ok(DistanceMeasure { support, weights })
}

/// Hankel transform `nu_hat(t) = sum_k w_k sqrt(t tau_k) J_{d/2-1}(t tau_k)`.
pub fn hankel_transform(nu: &DistanceMeasure, t: f64, d: usize) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(WelldistError::Domain("t must be nonnegative".into()));
    }
    let order = match d {
        2 => 0.0,
        3 => 0.5,
        _ => {
            return Err(WelldistError::Domain(
                "hankel transform implemented for d = 2, 3".into(),
            ))
        }
    };
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut terms = Vec::with_capacity(nu.support.len());
    for (tau, w) in nu.support.iter().zip(&nu.weights) {
        let z = t * tau;
        terms.push(w * (z).sqrt() * bessel_j(order, z)?);
    }
    Ok(crate::numeric::pairwise_sum(&terms))
}

/// Trapezoid value of `int sigma(t) t^{s-1} dt` over the series range.
pub fn energy_spectral(series: &AverageSeries, s: f64) -> Result<f64> {
    let d = series.dim as f64;
    if !(s > 0.0 && s < d) {
        return Err(WelldistError::Domain(format!("s must lie in (0, {d})")));
    }
    trapezoid(series, |t, sigma| sigma * t.powf(s - 1.0)).map(|r| r.value)
}

/// Result of a truncated integral with a crude divergence diagnostic: the
/// trend flag is set when the top octave contributes at least as much as the
/// octave below it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailIntegral {
    pub value: f64,
    pub divergent_trend: bool,
}

/// Trapezoid value of the Mattila integrand `sigma^2(t) t^{d-1}` over the
/// series range (spherical form).
pub fn mattila_integral(series: &AverageSeries, d: usize) -> Result<TailIntegral> {
    let df = d as f64;
    trapezoid(series, move |t, sigma| sigma * sigma * t.powf(df - 1.0))
}

/// K-distance form: the series must have been computed over the boundary of
/// the dual body `K*`, which is enforced through the series descriptor.
pub fn mattila_integral_k(
    series: &AverageSeries,
    body: &ConvexBody,
) -> Result<TailIntegral> {
    let dual = body.dual_body()?;
    if series.body != dual.to_string() {
        return Err(WelldistError::Domain(format!(
            "series was computed on '{}', expected the dual boundary '{}'",
            series.body, dual
        )));
    }
    mattila_integral(series, body.dim)
}

fn trapezoid(
    series: &AverageSeries,
    f: impl Fn(f64, f64) -> f64,
) -> Result<TailIntegral> {
    let e = &series.entries;
    if e.len() < 2 {
        return Err(WelldistError::Domain("series needs >= 2 entries".into()));
    }
    let mut terms = Vec::with_capacity(e.len() - 1);
    for w in e.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !(b.t > a.t) {
            return Err(WelldistError::Domain("series grid must be ascending".into()));
        }
        terms.push(0.5 * (b.t - a.t) * (f(a.t, a.sigma) + f(b.t, b.sigma)));
    }
    let value = crate::numeric::pairwise_sum(&terms);
    // Octave-contribution trend at the top of the range.
    let (lo, hi) = series.t_range();
    let top_start = hi / 2.0;
    let prev_start = hi / 4.0;
    let mut top = 0.0;
    let mut prev = 0.0;
    for (w, term) in e.windows(2).zip(&terms) {
        let mid = 0.5 * (w[0].t + w[1].t);
        if mid >= top_start {
            top += term;
        } else if mid >= prev_start {
            prev += term;
        }
    }
    let divergent_trend = prev_start >= lo && top >= prev * (1.0 - 1e-9) && top > 0.0;
    Ok(TailIntegral { value, divergent_trend })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleDistanceIntegrals {
    /// `int t J_0(tau t) sigma(t) dt` over the full range.
    pub j0_integral: f64,
    /// `| int sqrt(t) e^{-2 pi i tau t} sigma(t) dt |` over the top octave.
    pub oscillatory: f64,
    /// Sub-grid step used (contract: at most `1/(8 tau)`).
    pub step: f64,
}

/// Single-distance integrals for `tau in (0, 1)`. `sigma` is re-evaluated on
/// an oscillation-resolving uniform sub-grid (composite Simpson at step
/// `<= 1/(64 tau)`, comfortably inside the `1/(8 tau)` contract).
pub fn single_distance_integrals(
    range: (f64, f64),
    tau: f64,
    sigma: impl Fn(f64) -> f64 + Sync,
) -> Result<SingleDistanceIntegrals> {
    let (lo, hi) = range;
    if !(tau > 0.0 && tau < 1.0) {
        return Err(WelldistError::Domain("tau must lie in (0, 1)".into()));
    }
    if !(lo >= 0.0 && lo < hi) {
        return Err(WelldistError::Domain("invalid range".into()));
    }
    let step = 1.0 / (64.0 * tau);
    let j0 = simpson(lo, hi, step, |t| {
        t * crate::kernels::bessel_jn(0, tau * t) * sigma(t)
    });
    let osc_lo = lo.max(hi / 2.0);
    let osc = simpson_complex(osc_lo, hi, step, |t| {
        let (s, c) = (-2.0 * PI * tau * t).sin_cos();
        let g = t.sqrt() * sigma(t);
        Complex64::new(g * c, g * s)
    });
    Ok(SingleDistanceIntegrals { j0_integral: j0, oscillatory: osc.norm(), step })
}

/// Composite Simpson with an even subinterval count at step <= target.
pub fn simpson(a: f64, b: f64, target_step: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = (((b - a) / target_step).ceil() as usize).max(2);
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut terms = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = a + i as f64 * h;
        let coef = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        terms.push(coef * f(t));
    }
    crate::numeric::pairwise_sum(&terms) * h / 3.0
}

fn simpson_complex(a: f64, b: f64, target_step: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let re = simpson(a, b, target_step, |t| f(t).re);
    let im = simpson(a, b, target_step, |t| f(t).im);
    Complex64::new(re, im)
}
