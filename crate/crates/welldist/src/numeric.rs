//! Shared numeric helpers: deterministic reductions, quadrature nodes,
//! keyed random streams and small statistics.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::sync::OnceLock;

/// Pairwise (tree) summation over a slice, in slice order.
///
/// The reduction shape depends only on the length, so the result is
/// bit-identical across runs and thread counts as long as the inputs are.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise summation of complex values, same contract as [`pairwise_sum`].
pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.len() <= 32 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n` without materializing the terms.
pub fn pairwise_sum_fn(n: usize, f: &impl Fn(usize) -> f64) -> f64 {
    fn go(lo: usize, hi: usize, f: &impl Fn(usize) -> f64) -> f64 {
        if hi - lo <= 32 {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    if n == 0 {
        0.0
    } else {
        go(0, n, &f)
    }
}

/// Format a float with 17 significant digits, the round-trip precision of f64.
/// Used by every CSV writer so that outputs are byte-reproducible.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// SplitMix64 step, used to fold coordinates and seeds into stream keys.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-site random stream: the key is a fold of the seed and the
/// site's integer coordinates, so membership of a site does not depend on the
/// enumeration order or on the truncation radius.
pub struct SiteRng(ChaCha8Rng);

impl SiteRng {
    pub fn new(seed: u64, site: &[i64]) -> Self {
        let mut key = splitmix64(seed ^ 0x77c6_a9d1_005e_ed11);
        for &c in site {
            key = splitmix64(key ^ (c as u64));
        }
        SiteRng(ChaCha8Rng::seed_from_u64(key))
    }

    /// Uniform draw in [0, 1).
    pub fn next_unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform draw in [-1, 1).
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_unit() - 1.0
    }
}

/// Seeded general-purpose stream for test sampling and experiment centers.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform f64 in [0,1) from any RngCore.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence. Accurate to machine precision for n <= 64.
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static TABLES: OnceLock<Vec<OnceLock<(Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| (0..=64).map(|_| OnceLock::new()).collect());
    assert!(n >= 1 && n <= 64, "gauss_legendre supports n in 1..=64");
    tables[n].get_or_init(|| compute_gauss_legendre(n))
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Least-squares line fit `y = a + b x`; returns (a, b, stderr of b).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let mut ss_res = 0.0;
    for i in 0..x.len() {
        let r = y[i] - (a + b * x[i]);
        ss_res += r * r;
    }
    let dof = (x.len().max(3) - 2) as f64;
    let se = (ss_res / dof / sxx).sqrt();
    (a, b, se)
}

/// Pearson correlation coefficient of two samples.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    sxy / (sxx * syy).sqrt()
}
