//! Scalar special functions shared by every other module: the radial bump
//! `phi` with a non-negative Fourier transform, the rapid-decay envelope
//! `eta`, and Bessel functions of the first kind.
//!
//! The bump is fixed as `phi = c * (psi * psi)` (self-convolution) with
//! `psi(x) = (1 - |x/rho|^2)^2` on `|x| <= rho`. Self-convolution makes
//! `phi_hat = c * psi_hat^2 >= 0` by construction, and `c` is calibrated so
//! that `phi(0) = 1`. With the default `rho = 1/2` the support of `phi` is
//! exactly the closed unit ball.

use crate::error::WelldistError;
use crate::numeric::gauss_legendre;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

/// Evaluate the Bessel function of the first kind for the orders used here:
/// `0`, `1/2` and `1` (the orders `d/2 - 1` for dimensions up to 4).
///
/// Power series below `x = 12`, Hankel asymptotic expansion above. The
/// half-integer order uses its elementary closed form.
pub fn bessel_j(order: f64, x: f64) -> Result<f64, WelldistError> {
    if !(x >= 0.0) {
        return Err(WelldistError::Domain("bessel_j requires x >= 0".into()));
    }
    if order == 0.5 {
        if x == 0.0 {
            return Ok(0.0);
        }
        return Ok((2.0 / (PI * x)).sqrt() * x.sin());
    }
    if order == 0.0 || order == 1.0 {
        return Ok(bessel_jn(order as u32, x));
    }
    Err(WelldistError::Domain(format!(
        "bessel_j: unsupported order {order} (supported: 0, 1/2, 1)"
    )))
}

/// J_n for integer n >= 0 (n = 0, 1 are the calibrated fast paths; larger n
/// appears only in test oracles).
pub fn bessel_jn(n: u32, x: f64) -> f64 {
    if x <= 12.0 {
        bessel_series(n, x)
    } else {
        bessel_asymptotic(n, x)
    }
}

fn bessel_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let x2 = half * half;
    for k in 1..200 {
        term *= -x2 / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn bessel_asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    let inv8x = 1.0 / (8.0 * x);
    // Hankel series: t_{j} = t_{j-1} * (mu - (2j-1)^2) / (j * 8x); even terms
    // feed P (cosine factor), odd terms feed Q (sine factor). Truncate at the
    // smallest term.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0;
    let mut prev = f64::INFINITY;
    for j in 1..40u32 {
        let odd = 2.0 * j as f64 - 1.0;
        t *= (mu - odd * odd) * inv8x / j as f64;
        if t.abs() >= prev {
            break;
        }
        prev = t.abs();
        match j % 4 {
            1 => q += t,
            2 => p -= t,
            3 => q -= t,
            _ => p += t,
        }
        if t.abs() < 1e-18 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Rapid-decay envelope `eta(tau) = (1 + |tau|)^{-n}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecayProfile {
    pub order: u32,
}

impl Default for DecayProfile {
    fn default() -> Self {
        DecayProfile { order: 8 }
    }
}

impl DecayProfile {
    pub fn new(order: u32) -> Result<Self, WelldistError> {
        if order < 2 {
            return Err(WelldistError::Domain("eta order must be >= 2".into()));
        }
        Ok(DecayProfile { order })
    }

    pub fn eta(&self, tau: f64) -> f64 {
        (1.0 + tau.abs()).powi(-(self.order as i32))
    }
}

/// The fixed radial bump profile.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BumpProfile {
    pub dim: usize,
    /// Inner radius of `psi`; the support of `phi` is the ball of radius `2*rho`.
    pub rho: f64,
    /// Calibration constant, `c = 1 / int psi^2`, giving `phi(0) = 1`.
    pub amplitude: f64,
}

impl BumpProfile {
    pub fn new(dim: usize, rho: f64) -> Result<Self, WelldistError> {
        if !(1..=4).contains(&dim) {
            return Err(WelldistError::Domain(format!(
                "bump profile supports dim 1..=4, got {dim}"
            )));
        }
        if !(rho > 0.0 && rho <= 0.5) {
            return Err(WelldistError::Domain(
                "bump inner radius must lie in (0, 1/2]".into(),
            ));
        }
        Ok(BumpProfile {
            dim,
            rho,
            amplitude: 1.0 / psi_l2(dim, rho),
        })
    }

    pub fn standard(dim: usize) -> Self {
        BumpProfile::new(dim, 0.5).expect("standard profile is valid")
    }

    /// `phi(x)`; exactly zero for `|x| >= 2*rho`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.eval_radial(r)
    }

    /// Radial profile of `phi` at distance `r` from the origin.
    pub fn eval_radial(&self, r: f64) -> f64 {
        if r >= 2.0 * self.rho {
            return 0.0;
        }
        self.phi_table().lookup(r)
    }

    /// `phi_hat(xi)`, non-negative by construction.
    pub fn hat(&self, xi: &[f64]) -> f64 {
        assert_eq!(xi.len(), self.dim);
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.hat_radial(r)
    }

    /// Radial profile of `phi_hat`; `hat_radial(0) = int phi`.
    pub fn hat_radial(&self, r: f64) -> f64 {
        let psi = self.psi_hat_table().lookup_or(r, || psi_hat(self.dim, self.rho, r));
        self.amplitude * psi * psi
    }

    /// Same value computed without the interpolation table; used as the
    /// in-process cross-check for the table path.
    pub fn hat_radial_direct(&self, r: f64) -> f64 {
        let psi = psi_hat(self.dim, self.rho, r);
        self.amplitude * psi * psi
    }

    /// Total mass `int phi = phi_hat(0) = c (int psi)^2`.
    pub fn total_mass(&self) -> f64 {
        let s = psi_l1(self.dim, self.rho);
        self.amplitude * s * s
    }

    fn phi_table(&self) -> &'static RadialTable {
        static TABLES: OnceLock<Mutex<HashMap<(usize, u64), &'static RadialTable>>> =
            OnceLock::new();
        let key = (self.dim, self.rho.to_bits());
        let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = map.lock().unwrap();
        guard.entry(key).or_insert_with(|| {
            let c = self.amplitude;
            let table = RadialTable::build(2.0 * self.rho, 4096, |r| {
                c * psi_self_convolution(self.dim, self.rho, r)
            });
            Box::leak(Box::new(table))
        })
    }

    fn psi_hat_table(&self) -> &'static RadialTable {
        static TABLES: OnceLock<Mutex<HashMap<(usize, u64), &'static RadialTable>>> =
            OnceLock::new();
        let key = (self.dim, self.rho.to_bits());
        let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = map.lock().unwrap();
        guard.entry(key).or_insert_with(|| {
            let dim = self.dim;
            let rho = self.rho;
            let table = RadialTable::build(PSI_HAT_TABLE_MAX, 512 * 32, |r| psi_hat(dim, rho, r));
            Box::leak(Box::new(table))
        })
    }
}

const PSI_HAT_TABLE_MAX: f64 = 32.0;

/// Dense radial samples with Catmull-Rom interpolation.
struct RadialTable {
    max_r: f64,
    step: f64,
    values: Vec<f64>,
}

impl RadialTable {
    fn build(max_r: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let step = max_r / n as f64;
        let values = (0..=n + 2).map(|i| f(i as f64 * step)).collect();
        RadialTable { max_r, step, values }
    }

    fn lookup(&self, r: f64) -> f64 {
        let u = r / self.step;
        let i = u as usize;
        if i + 2 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let t = u - i as f64;
        if i == 0 {
            // Quadratic through the first three samples; radial functions are
            // even so the derivative at 0 vanishes.
            let (y0, y1, y2) = (self.values[0], self.values[1], self.values[2]);
            let a = (y2 - 2.0 * y1 + y0) * 0.5;
            let b = (y2 - y0) * 0.5 - 2.0 * a;
            return y0 + t * (b + t * a) + t * (y1 - y0 - a - b);
        }
        let (y0, y1, y2, y3) = (
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        );
        let a = -0.5 * y0 + 1.5 * y1 - 1.5 * y2 + 0.5 * y3;
        let b = y0 - 2.5 * y1 + 2.0 * y2 - 0.5 * y3;
        let c = -0.5 * y0 + 0.5 * y2;
        y1 + t * (c + t * (b + t * a))
    }

    fn lookup_or(&self, r: f64, fallback: impl Fn() -> f64) -> f64 {
        if r <= self.max_r {
            self.lookup(r)
        } else {
            fallback()
        }
    }
}

/// `psi` profile: `(1 - (u/rho)^2)^2` on `[0, rho]`.
fn psi0(rho: f64, u: f64) -> f64 {
    if u >= rho {
        return 0.0;
    }
    let v = 1.0 - (u / rho) * (u / rho);
    v * v
}

/// `int psi^2` in dimension `dim` (closed form via Beta integrals).
fn psi_l2(dim: usize, rho: f64) -> f64 {
    match dim {
        1 => 2.0 * rho * 128.0 / 315.0,
        2 => PI * rho * rho / 5.0,
        3 => 4.0 * PI * rho.powi(3) * 128.0 / 3465.0,
        4 => 2.0 * PI * PI * rho.powi(4) / 60.0,
        _ => unreachable!(),
    }
}

/// `int psi` in dimension `dim`.
fn psi_l1(dim: usize, rho: f64) -> f64 {
    match dim {
        1 => 2.0 * rho * 8.0 / 15.0,
        2 => PI * rho * rho / 3.0,
        3 => 4.0 * PI * rho.powi(3) * 8.0 / 105.0,
        4 => 2.0 * PI * PI * rho.powi(4) / 24.0,
        _ => unreachable!(),
    }
}

/// Radial Fourier transform of `psi` at radius `r`, by oscillation-aware
/// panel quadrature of the one-dimensional radial integral.
fn psi_hat(dim: usize, rho: f64, r: f64) -> f64 {
    if r == 0.0 {
        return psi_l1(dim, rho);
    }
    // Panels short enough that the phase advances at most pi/2 per panel.
    let panels = (4.0 * rho * r).ceil().max(1.0) as usize;
    let (nodes, weights) = gauss_legendre(16);
    let dw = rho / panels as f64;
    let mut total = 0.0;
    for pnl in 0..panels {
        let a = pnl as f64 * dw;
        let mut acc = 0.0;
        for (xi, wi) in nodes.iter().zip(weights) {
            let u = a + 0.5 * dw * (xi + 1.0);
            let z = 2.0 * PI * r * u;
            let kernel = match dim {
                1 => 2.0 * z.cos(),
                2 => 2.0 * PI * bessel_jn(0, z) * u,
                3 => 2.0 / r * z.sin() * u,
                4 => {
                    // 2*pi*|xi|^{-1} * J_1(z) * u^2
                    2.0 * PI / r * bessel_jn(1, z) * u * u
                }
                _ => unreachable!(),
            };
            acc += wi * kernel * psi0(rho, u);
        }
        total += acc * 0.5 * dw;
    }
    total
}

/// Self-convolution `(psi * psi)(r)` in dimension `dim`, by splitting the
/// radial/angular integrals at the support kinks so every panel is analytic.
fn psi_self_convolution(dim: usize, rho: f64, r: f64) -> f64 {
    if r >= 2.0 * rho {
        return 0.0;
    }
    if dim == 1 {
        // int psi(t) psi(r - t) dt over the overlap of the supports.
        let lo = (-rho).max(r - rho);
        let hi = rho.min(r + rho);
        if lo >= hi {
            return 0.0;
        }
        let mut cuts = vec![lo, hi];
        for c in [0.0, r] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let (nodes, weights) = gauss_legendre(32);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut acc = 0.0;
            for (xi, wi) in nodes.iter().zip(weights) {
                let t = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                acc += wi * psi0(rho, t.abs()) * psi0(rho, (r - t).abs());
            }
            total += acc * 0.5 * (b - a);
        }
        return total;
    }
    // Surface measure of S^{d-2}.
    let omega = match dim {
        2 => 2.0,
        3 => 2.0 * PI,
        4 => 4.0 * PI,
        _ => unreachable!(),
    };
    let (nodes, weights) = gauss_legendre(32);
    let (in_nodes, in_weights) = gauss_legendre(24);
    // Outer integrand has regime changes at |r - s| = rho and r + s = rho.
    let mut cuts = vec![0.0, rho];
    for c in [rho - r, r - rho, r + rho] {
        if c > 0.0 && c < rho {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut acc = 0.0;
        for (xi, wi) in nodes.iter().zip(weights) {
            let s = 0.5 * (a + b) + 0.5 * (b - a) * xi;
            if s <= 0.0 {
                continue;
            }
            // theta range where |r - s e^{i theta}| < rho.
            let theta_max = if r + s <= rho {
                PI
            } else if (r - s).abs() >= rho {
                continue;
            } else {
                ((r * r + s * s - rho * rho) / (2.0 * r * s)).clamp(-1.0, 1.0).acos()
            };
            let mut inner = 0.0;
            for (yi, vi) in in_nodes.iter().zip(in_weights) {
                let theta = 0.5 * theta_max * (yi + 1.0);
                let u = (r * r + s * s - 2.0 * r * s * theta.cos()).max(0.0).sqrt();
                let ang = match dim {
                    2 => 1.0,
                    3 => theta.sin(),
                    4 => theta.sin() * theta.sin(),
                    _ => unreachable!(),
                };
                inner += vi * psi0(rho, u) * ang;
            }
            inner *= 0.5 * theta_max;
            acc += wi * s.powi(dim as i32 - 1) * psi0(rho, s) * inner;
        }
        total += acc * 0.5 * (b - a);
    }
    omega * total
}
