//! The thickened probability measure built over a rescaled truncation
//! `q^{-1} A_q`: atoms carrying bump profiles of radius `q^{-p}`, `p = d/s`,
//! with Fourier transform `mu_hat(xi) = phi_hat(q^{-p} xi) * sum_a w_a
//! e^{-2 pi i a.xi}`.
//!
//! Exponential sums use pairwise tree reduction in fixed atom order, so
//! batched and single-point evaluations agree bit for bit across runs and
//! thread counts.

use crate::error::{Result, WelldistError};
use crate::kernels::BumpProfile;
use crate::points::{self, GeneratorKind, PointSet, Provenance, Truncation, TruncationShape};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureVariant {
    /// Uniform atom weights over `q^{-1} A_q`.
    Standard,
    /// Each atom weighted by `phi(a)`; atoms where `phi` vanishes are dropped.
    Modified,
}

impl MeasureVariant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(MeasureVariant::Standard),
            "modified" => Ok(MeasureVariant::Modified),
            other => Err(WelldistError::Domain(format!(
                "unknown measure variant '{other}' (expected standard | modified)"
            ))),
        }
    }
}

/// Evaluation route for the exponential sum.
#[derive(Debug, Clone, Copy, PartialEq)]
enum FourierPath {
    /// Direct sum over atoms.
    Direct,
    /// Dual-lattice bump sum via Poisson summation; exact for the modified
    /// lattice measure, where the weights `phi(a)` already vanish at the
    /// truncation boundary.
    Poisson { r_cut: f64 },
}

#[derive(Debug, Clone)]
pub struct ThickenedMeasure {
    base: PointSet,
    pub q: f64,
    pub s: f64,
    /// Thickening exponent `p = d/s`; atom radius is `q^{-p}`.
    pub p: f64,
    pub variant: MeasureVariant,
    pub bump: BumpProfile,
    /// Normalization constant of the density; fixed by `mu_hat(0) = 1`.
    pub c_a: f64,
    /// Per-atom weights including the `C_A q^{-d}` factor.
    weights: Vec<f64>,
    /// Retained atom coordinates (modified variant drops zero-weight atoms).
    atoms: Vec<f64>,
    path: FourierPath,
    diameter: f64,
}

impl ThickenedMeasure {
    /// Build the measure over a rescaled point set.
    pub fn build(
        ps: &PointSet,
        s: f64,
        bump: BumpProfile,
        variant: MeasureVariant,
    ) -> Result<Self> {
        let d = ps.dim();
        if !ps.scaled {
            return Err(WelldistError::Domain(
                "measure construction expects the point set scaled into the unit ball".into(),
            ));
        }
        if ps.is_empty() {
            return Err(WelldistError::Domain("empty point set".into()));
        }
        if !(s > 0.0 && s <= d as f64) {
            return Err(WelldistError::Domain(format!(
                "s must lie in (0, {d}], got {s}"
            )));
        }
        if bump.dim != d {
            return Err(WelldistError::Domain(
                "bump profile dimension does not match the point set".into(),
            ));
        }
        let q = ps.truncation.radius;
        let p = d as f64 / s;
        let mut atoms = Vec::new();
        let mut unnormalized = Vec::new();
        for a in ps.iter_points() {
            let w = match variant {
                MeasureVariant::Standard => 1.0,
                MeasureVariant::Modified => bump.eval(a),
            };
            if w > 0.0 {
                atoms.extend_from_slice(a);
                unnormalized.push(w);
            }
        }
        if unnormalized.is_empty() {
            return Err(WelldistError::Domain(
                "all atom weights vanish; measure would be null".into(),
            ));
        }
        let total: f64 = crate::numeric::pairwise_sum(&unnormalized);
        let phi_mass = bump.total_mass();
        let c_a = q.powi(d as i32) / (phi_mass * total);
        let scale = c_a * q.powi(-(d as i32));
        let weights: Vec<f64> = unnormalized.iter().map(|w| w * scale).collect();
        let max_norm = atoms
            .chunks_exact(d)
            .map(|a| a.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0f64, f64::max);
        let diameter = 2.0 * max_norm + 2.0 * 2.0 * bump.rho * q.powf(-p);
        let path = match (&ps.provenance, variant) {
            (
                Provenance::Generated { kind: GeneratorKind::Lattice, .. },
                MeasureVariant::Modified,
            ) if q >= 32.0 => FourierPath::Poisson { r_cut: 24.0 },
            _ => FourierPath::Direct,
        };
        Ok(ThickenedMeasure {
            base: ps.clone(),
            q,
            s,
            p,
            variant,
            bump,
            c_a,
            weights,
            atoms,
            path,
            diameter,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim()..(i + 1) * self.dim()]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Probability mass carried by atom `i` (weights times the bump mass).
    pub fn atom_mass(&self, i: usize) -> f64 {
        self.weights[i] * self.bump.total_mass()
    }

    pub fn base(&self) -> &PointSet {
        &self.base
    }

    /// Diameter of the support (used to size surface quadratures).
    pub fn support_diameter(&self) -> f64 {
        self.diameter
    }

    /// Radius of one thickened atom, `2 rho q^{-p}`.
    pub fn atom_radius(&self) -> f64 {
        2.0 * self.bump.rho * self.q.powf(-self.p)
    }

    /// `mu_hat` at a single frequency.
    pub fn fourier_at(&self, xi: &[f64]) -> Complex64 {
        match self.path {
            FourierPath::Direct => self.fourier_direct(xi),
            FourierPath::Poisson { r_cut } => self.fourier_poisson(xi, r_cut),
        }
    }

    /// `mu_hat` over a batch of frequencies (flat buffer, `dim` per entry).
    /// Entries are independent, so the parallel split cannot change results.
    pub fn fourier_batch(&self, xis: &[f64]) -> Vec<Complex64> {
        let d = self.dim();
        assert_eq!(xis.len() % d, 0);
        xis.par_chunks_exact(d).map(|xi| self.fourier_at(xi)).collect()
    }

    /// Direct exponential sum in fixed atom order (pairwise reduction).
    pub fn fourier_direct(&self, xi: &[f64]) -> Complex64 {
        let cutoff = self.cutoff_factor(xi);
        cutoff * self.raw_sum(xi)
    }

    /// The bump cut-off `phi_hat(q^{-p} xi)` (radial).
    fn cutoff_factor(&self, xi: &[f64]) -> f64 {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.bump.hat_radial(r * self.q.powf(-self.p))
    }

    /// The weighted exponential sum without the bump cut-off.
    pub fn raw_sum(&self, xi: &[f64]) -> Complex64 {
        let d = self.dim();
        let n = self.atom_count();
        pairwise_complex_fn(n, &|i| {
            let a = &self.atoms[i * d..(i + 1) * d];
            let phase: f64 = a.iter().zip(xi).map(|(x, y)| x * y).sum();
            let (sin, cos) = (-2.0 * PI * phase).sin_cos();
            Complex64::new(self.weights[i] * cos, self.weights[i] * sin)
        })
    }

    /// Dual-lattice route: `mu_hat(xi) = C_A phi_hat(q^{-p}|xi|) sum_m
    /// phi_hat(|xi - q m|)`, truncated at radius `r_cut`. Exact (up to the
    /// stated truncation) for the modified lattice measure.
    pub fn fourier_poisson(&self, xi: &[f64], r_cut: f64) -> Complex64 {
        let d = self.dim();
        let q = self.q;
        let cutoff = self.cutoff_factor(xi);
        let window = (r_cut / q).ceil() as i64;
        let center: Vec<i64> = xi.iter().map(|v| (v / q).round() as i64).collect();
        let mut sum = 0.0;
        let mut idx = vec![-window; d];
        'outer: loop {
            let mut dist2 = 0.0;
            for k in 0..d {
                let mk = (center[k] + idx[k]) as f64;
                let delta = xi[k] - q * mk;
                dist2 += delta * delta;
            }
            if dist2 <= r_cut * r_cut {
                sum += self.bump.hat_radial(dist2.sqrt());
            }
            for k in 0..d {
                idx[k] += 1;
                if idx[k] <= window {
                    continue 'outer;
                }
                idx[k] = -window;
            }
            break;
        }
        Complex64::new(self.c_a * cutoff * sum, 0.0)
    }

    /// Force a specific evaluation route (oracle comparisons in tests).
    pub fn fourier_poisson_forced(&self, xi: &[f64], r_cut: f64) -> Result<Complex64> {
        match (&self.base.provenance, self.variant) {
            (
                Provenance::Generated { kind: GeneratorKind::Lattice, .. },
                MeasureVariant::Modified,
            ) => Ok(self.fourier_poisson(xi, r_cut)),
            _ => Err(WelldistError::Domain(
                "Poisson route requires the modified lattice measure".into(),
            )),
        }
    }

    /// Exact Dirichlet-kernel product for the cube-truncated standard lattice
    /// measure; serves as oracle and fast path on its domain.
    pub fn fourier_separable_oracle(&self, xi: &[f64]) -> Result<Complex64> {
        let is_lattice = matches!(
            self.base.provenance,
            Provenance::Generated { kind: GeneratorKind::Lattice, .. }
        );
        if !is_lattice
            || self.base.truncation.shape != TruncationShape::Cube
            || self.variant != MeasureVariant::Standard
        {
            return Err(WelldistError::Domain(
                "separable oracle requires the cube-truncated standard lattice measure".into(),
            ));
        }
        let q = self.q;
        let m = q.floor() as i64;
        let mut product = 1.0;
        for &v in xi {
            product *= dirichlet_kernel(PI * v / q, 2 * m + 1);
        }
        let scale = self.c_a * q.powi(-(self.dim() as i32));
        Ok(Complex64::new(self.cutoff_factor(xi) * scale * product, 0.0))
    }

    /// Riesz `s`-energy `I_s(mu)` by the atomic double sum; each atom's
    /// self-interaction uses the closed-form mean of `|y|^{-s}` over the
    /// thickening ball, `(d/(d-s)) r^{-s}`.
    pub fn energy_direct(&self, s: f64) -> Result<f64> {
        let d = self.dim() as f64;
        if !(s >= 0.0 && s < d) {
            return Err(WelldistError::Domain(format!(
                "energy exponent must lie in [0, {d}), got {s}"
            )));
        }
        let n = self.atom_count();
        let dd = self.dim();
        let r_atom = self.atom_radius();
        let self_factor = d / (d - s) * r_atom.powf(-s);
        let total = crate::numeric::pairwise_sum_fn(n, &|i| {
            let mi = self.atom_mass(i);
            let ai = self.atom(i);
            let mut acc = mi * mi * self_factor;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let aj = &self.atoms[j * dd..(j + 1) * dd];
                let dist2: f64 = ai
                    .iter()
                    .zip(aj)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                acc += mi * self.atom_mass(j) * dist2.powf(-0.5 * s);
            }
            acc
        });
        Ok(total)
    }

    /// `mu(B(x, delta))` by summing atom masses, with half-space interpolation
    /// of the bump mass for atoms straddling the boundary ring.
    pub fn ball_mass(&self, center: &[f64], delta: f64) -> f64 {
        let r = self.atom_radius();
        let mut mass = 0.0;
        for i in 0..self.atom_count() {
            let a = self.atom(i);
            let dist: f64 = a
                .iter()
                .zip(center)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if dist <= delta - r {
                mass += self.atom_mass(i);
            } else if dist < delta + r {
                let frac = self.bump_halfspace_fraction((delta - dist) / r);
                mass += self.atom_mass(i) * frac;
            }
        }
        mass
    }

    /// Fraction of the bump mass in the half-space `{y_1 <= u * r}` for
    /// `u in [-1, 1]`, from a cached cumulative marginal.
    fn bump_halfspace_fraction(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let table = marginal_table(&self.bump);
        let pos = (u + 1.0) / 2.0 * (table.len() - 1) as f64;
        let i = (pos as usize).min(table.len() - 2);
        let t = pos - i as f64;
        table[i] * (1.0 - t) + table[i + 1] * t
    }

    /// Replayable description of the measure.
    pub fn descriptor(&self) -> MeasureDescriptor {
        MeasureDescriptor {
            provenance: self.base.provenance.clone(),
            truncation: self.base.truncation,
            dim: self.dim(),
            q: self.q,
            s: self.s,
            p: self.p,
            variant: self.variant,
            c_a: self.c_a,
            bump_rho: self.bump.rho,
            atom_count: self.atom_count(),
        }
    }
}

/// Cumulative marginal of the bump along one axis, normalized to 1.
fn marginal_table(bump: &BumpProfile) -> &'static Vec<f64> {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static TABLES: OnceLock<Mutex<HashMap<(usize, u64), &'static Vec<f64>>>> = OnceLock::new();
    let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap();
    guard
        .entry((bump.dim, bump.rho.to_bits()))
        .or_insert_with(|| {
            let d = bump.dim;
            let half = 2.0 * bump.rho;
            let n = 512usize;
            let (nodes, weights) = crate::numeric::gauss_legendre(24);
            // marginal density m(x1) = int phi(x1, y) dy over the slab.
            let marg = |x1: f64| -> f64 {
                if d == 1 {
                    return bump.eval_radial(x1.abs());
                }
                let rmax = (half * half - x1 * x1).max(0.0).sqrt();
                if rmax == 0.0 {
                    return 0.0;
                }
                let mut acc = 0.0;
                for (xi, wi) in nodes.iter().zip(weights) {
                    let u = 0.5 * rmax * (xi + 1.0);
                    let radial = (x1 * x1 + u * u).sqrt();
                    let ring = match d {
                        2 => 2.0,
                        3 => 2.0 * PI * u,
                        4 => 4.0 * PI * u * u,
                        _ => unreachable!(),
                    };
                    acc += wi * ring * bump.eval_radial(radial);
                }
                acc * 0.5 * rmax
            };
            let step = 2.0 * half / n as f64;
            let mut cum = Vec::with_capacity(n + 1);
            cum.push(0.0);
            let mut acc = 0.0;
            let mut prev = marg(-half);
            for i in 1..=n {
                let x = -half + i as f64 * step;
                let cur = marg(x);
                acc += 0.5 * (prev + cur) * step;
                cum.push(acc);
                prev = cur;
            }
            let total = *cum.last().unwrap();
            let normalized: Vec<f64> = cum.iter().map(|v| v / total).collect();
            Box::leak(Box::new(normalized))
        })
}

/// `sin(n u) / sin(u)` with the removable singularity handled by series.
fn dirichlet_kernel(u: f64, n: i64) -> f64 {
    let nf = n as f64;
    let e = u - (u / PI).round() * PI;
    if e.abs() < 1e-7 {
        // sin(n(k pi + e))/sin(k pi + e) = sin(n e)/sin(e) for odd n.
        return nf * (1.0 - (nf * nf - 1.0) * e * e / 6.0);
    }
    (nf * u).sin() / u.sin()
}

fn pairwise_complex_fn(n: usize, f: &impl Fn(usize) -> Complex64) -> Complex64 {
    fn go(lo: usize, hi: usize, f: &impl Fn(usize) -> Complex64) -> Complex64 {
        if hi - lo <= 32 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    if n == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        go(0, n, f)
    }
}

/// Everything needed to rebuild a measure (and so replay an experiment).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureDescriptor {
    pub provenance: Provenance,
    pub truncation: Truncation,
    pub dim: usize,
    pub q: f64,
    pub s: f64,
    pub p: f64,
    pub variant: MeasureVariant,
    pub c_a: f64,
    pub bump_rho: f64,
    pub atom_count: usize,
}

impl MeasureDescriptor {
    pub fn rebuild(&self) -> Result<ThickenedMeasure> {
        let Provenance::Generated { kind, seed, jitter } = self.provenance else {
            return Err(WelldistError::Domain(
                "only generated measures can be rebuilt from a descriptor".into(),
            ));
        };
        let ps = points::generate(
            kind,
            self.dim,
            self.q,
            self.truncation.shape,
            seed,
            jitter,
        )?;
        let scaled = points::rescale_to_unit(&ps)?;
        let bump = BumpProfile::new(self.dim, self.bump_rho)?;
        ThickenedMeasure::build(&scaled, self.s, bump, self.variant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{seeded_rng, unit_f64};
    use crate::points::{generate, rescale_to_unit, GeneratorKind, TruncationShape};

    fn lattice_measure(
        d: usize,
        q: f64,
        shape: TruncationShape,
        s: f64,
        variant: MeasureVariant,
    ) -> ThickenedMeasure {
        let ps = generate(GeneratorKind::Lattice, d, q, shape, 0, 0.0).unwrap();
        let scaled = rescale_to_unit(&ps).unwrap();
        ThickenedMeasure::build(&scaled, s, BumpProfile::standard(d), variant).unwrap()
    }

    #[test]
    fn normalization_and_uniform_weights() {
        let m = lattice_measure(2, 2.0, TruncationShape::Ball, 1.0, MeasureVariant::Standard);
        assert_eq!(m.atom_count(), 13);
        let w0 = m.weight(0);
        assert!((0..13).all(|i| m.weight(i) == w0), "uniform weights");
        let mu0 = m.fourier_at(&[0.0, 0.0]);
        assert!((mu0.re - 1.0).abs() < 1e-12 && mu0.im.abs() < 1e-15);
        let mass: f64 = (0..m.atom_count()).map(|i| m.atom_mass(i)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modified_variant_drops_boundary_atoms() {
        let m = lattice_measure(2, 2.0, TruncationShape::Ball, 1.0, MeasureVariant::Modified);
        // The 4 atoms at scaled norm 1 sit where phi vanishes.
        assert_eq!(m.atom_count(), 9);
        let mu0 = m.fourier_at(&[0.0, 0.0]);
        assert!((mu0.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_atom_measure_is_pure_bump() {
        let ps = generate(GeneratorKind::Lattice, 2, 1.0, TruncationShape::Ball, 0, 0.0).unwrap();
        // keep only the origin by using a modified measure at q=1: the four
        // boundary atoms at norm 1 are dropped.
        let scaled = rescale_to_unit(&ps).unwrap();
        let m = ThickenedMeasure::build(&scaled, 1.0, BumpProfile::standard(2), MeasureVariant::Modified).unwrap();
        assert_eq!(m.atom_count(), 1);
        for xi in [[0.5, 0.0], [3.0, 2.0], [10.0, -4.0]] {
            let got = m.fourier_at(&xi);
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            let expect = m.bump.hat_radial(r * m.q.powf(-m.p)) / m.bump.total_mass();
            assert!((got.re - expect).abs() < 1e-12 && got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn d1_cube_lattice_exponential_sum() {
        // atoms {-1, 0, 1}, uniform weights 1/3 of the normalized sum:
        // raw sum at xi = 1/2 is (1 + 2 cos pi)/3 = -1/3 (before bump factor).
        let m = lattice_measure(1, 1.0, TruncationShape::Cube, 1.0, MeasureVariant::Standard);
        let raw = m.raw_sum(&[0.5]);
        let normalized = raw.re * m.bump.total_mass();
        assert!((normalized - (-1.0 / 3.0)).abs() < 1e-12);
        assert!(raw.im.abs() < 1e-15);
        // Dirichlet factor at the same point: sin(3 pi/2)/sin(pi/2) = -1.
        let oracle = m.fourier_separable_oracle(&[0.5]).unwrap();
        let direct = m.fourier_at(&[0.5]);
        assert!((oracle.re - direct.re).abs() < 1e-12);
    }

    #[test]
    fn separable_oracle_peak_value() {
        let q = 4.0;
        let m = lattice_measure(2, q, TruncationShape::Cube, 1.0, MeasureVariant::Standard);
        // At xi = q * integer vector all phases are unity: the raw sum peaks
        // at the atom count (2q+1)^2.
        let raw = m.raw_sum(&[q * q, 0.0]);
        let expect: f64 = (0..m.atom_count()).map(|i| m.weight(i)).sum();
        assert!((raw.re - expect).abs() < 1e-10 * expect);
        let oracle = m.fourier_separable_oracle(&[q * q, 0.0]).unwrap();
        let direct = m.fourier_at(&[q * q, 0.0]);
        assert!((oracle.re - direct.re).abs() < 1e-10 * direct.re.abs());
    }

    #[test]
    fn separable_oracle_matches_direct_sum() {
        for q in [4.0, 8.0] {
            let m = lattice_measure(2, q, TruncationShape::Cube, 1.0, MeasureVariant::Standard);
            let mut rng = seeded_rng(101);
            for _ in 0..100 {
                let xi = [
                    2.0 * q * q * (unit_f64(&mut rng) - 0.5),
                    2.0 * q * q * (unit_f64(&mut rng) - 0.5),
                ];
                let direct = m.fourier_at(&xi);
                let oracle = m.fourier_separable_oracle(&xi).unwrap();
                let denom = oracle.norm().max(1e-30);
                assert!(
                    (direct - oracle).norm() / denom < 1e-10,
                    "q={q}, xi={xi:?}: {direct} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn poisson_route_matches_direct_sum() {
        for q in [8.0, 16.0] {
            let ps = generate(GeneratorKind::Lattice, 2, q, TruncationShape::Ball, 0, 0.0).unwrap();
            let scaled = rescale_to_unit(&ps).unwrap();
            let m = ThickenedMeasure::build(&scaled, 1.0, BumpProfile::standard(2), MeasureVariant::Modified).unwrap();
            let mut rng = seeded_rng(7);
            // Peak scale of mu_hat; off-peak values sit many orders of
            // magnitude into cancellation, so errors are measured against it.
            let peak = m.fourier_at(&[0.0, 0.0]).norm();
            for _ in 0..60 {
                let xi = [
                    3.0 * q * (unit_f64(&mut rng) - 0.5),
                    3.0 * q * (unit_f64(&mut rng) - 0.5),
                ];
                let direct = m.fourier_direct(&xi);
                let poisson = m.fourier_poisson_forced(&xi, 48.0).unwrap();
                assert!(
                    (direct - poisson).norm() < 1e-9 * peak,
                    "q={q} xi={xi:?}: {direct} vs {poisson}"
                );
            }
            // Near a Poisson peak the two routes agree in relative terms too.
            let near_peak = [q + 0.3, -0.2];
            let direct = m.fourier_direct(&near_peak);
            let poisson = m.fourier_poisson_forced(&near_peak, 48.0).unwrap();
            assert!((direct - poisson).norm() / poisson.norm() < 1e-9);
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let m = lattice_measure(2, 4.0, TruncationShape::Ball, 1.0, MeasureVariant::Standard);
        let mut rng = seeded_rng(23);
        for _ in 0..50 {
            let xi = [
                30.0 * (unit_f64(&mut rng) - 0.5),
                30.0 * (unit_f64(&mut rng) - 0.5),
            ];
            let plus = m.fourier_at(&xi);
            let minus = m.fourier_at(&[-xi[0], -xi[1]]);
            // Exact conjugate symmetry (== treats -0.0 and 0.0 alike).
            assert!(plus.re == minus.re && plus.im == -minus.im);
            assert!(plus.norm() <= 1.0 + 1e-12, "probability measure bound");
        }
    }

    #[test]
    fn batch_matches_single_bitwise() {
        let m = lattice_measure(2, 8.0, TruncationShape::Ball, 1.0, MeasureVariant::Standard);
        let mut rng = seeded_rng(5);
        let mut flat = Vec::new();
        for _ in 0..64 {
            flat.push(100.0 * (unit_f64(&mut rng) - 0.5));
            flat.push(100.0 * (unit_f64(&mut rng) - 0.5));
        }
        let batch = m.fourier_batch(&flat);
        for (i, chunk) in flat.chunks_exact(2).enumerate() {
            let single = m.fourier_at(chunk);
            assert_eq!(single.re.to_bits(), batch[i].re.to_bits());
            assert_eq!(single.im.to_bits(), batch[i].im.to_bits());
        }
    }

    #[test]
    fn energy_zero_exponent_is_total_mass_squared() {
        let m = lattice_measure(2, 4.0, TruncationShape::Ball, 1.0, MeasureVariant::Standard);
        let e0 = m.energy_direct(0.0).unwrap();
        assert!((e0 - 1.0).abs() < 1e-10);
        assert!(m.energy_direct(2.0).is_err(), "s >= d diverges");
    }

    #[test]
    fn energy_cross_term_for_two_atoms() {
        // Two equal atoms at distance 1 (d=2): cross-term of I_1 is
        // 2 * (1/2) * (1/2) * 1 = 1/2; the brute-force double quadrature over
        // the two bumps agrees within 1% once the thickening is small.
        let ps = PointSet::from_points(
            2,
            vec![-0.5, 0.0, 0.5, 0.0],
            Truncation { shape: TruncationShape::Ball, radius: 16.0 },
        )
        .unwrap();
        // from_points marks the set unscaled; rescale_to_unit would divide
        // by q, so construct the scaled view directly.
        let mut scaled = ps;
        scaled.scaled = true;
        let m = ThickenedMeasure::build(&scaled, 1.0, BumpProfile::standard(2), MeasureVariant::Standard).unwrap();
        let r = m.atom_radius();
        // Atomic cross-term.
        let cross: f64 = {
            let m0 = m.atom_mass(0);
            let m1 = m.atom_mass(1);
            2.0 * m0 * m1 / 1.0
        };
        assert!((cross - 0.5).abs() < 1e-12);
        // Brute-force cross-term: E[1/|x - y|] for x, y in the two bumps.
        let (nodes, weights) = crate::numeric::gauss_legendre(24);
        let b = &m.bump;
        let mut num = 0.0;
        let mut den = 0.0;
        for (xi, wi) in nodes.iter().zip(weights) {
            for (yi, vi) in nodes.iter().zip(weights) {
                for (ui, pi_) in nodes.iter().zip(weights) {
                    for (vi2, qi) in nodes.iter().zip(weights) {
                        let x = [r * xi, r * yi];
                        let y = [1.0 + r * ui, r * vi2];
                        let w = wi * vi * pi_ * qi
                            * b.eval_radial((x[0] * x[0] + x[1] * x[1]).sqrt() / r * (2.0 * b.rho))
                            * b.eval_radial((( (y[0]-1.0)*(y[0]-1.0) + y[1]*y[1]).sqrt()) / r * (2.0 * b.rho));
                        let dist = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
                        num += w / dist;
                        den += w;
                    }
                }
            }
        }
        let mean_inv_dist = num / den;
        let brute_cross = 2.0 * 0.5 * 0.5 * mean_inv_dist;
        assert!(
            (brute_cross - cross).abs() / cross < 0.01,
            "cross {cross} vs brute {brute_cross}"
        );
    }

    #[test]
    fn energy_bounded_in_q() {
        // Lemma-level sanity: I_1 for d=2, s=1 stays within a tight band in q.
        let qs = [8.0, 16.0, 32.0];
        let vals: Vec<f64> = qs
            .iter()
            .map(|&q| {
                lattice_measure(2, q, TruncationShape::Ball, 1.0, MeasureVariant::Standard)
                    .energy_direct(1.0)
                    .unwrap()
            })
            .collect();
        let max = vals.iter().cloned().fold(f64::MIN, f64::max);
        let min = vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            (max - min) / max < 0.25,
            "I_1 varies more than 25% across q: {vals:?}"
        );
    }

    #[test]
    fn frostman_ball_condition() {
        let mut worst = 0.0f64;
        for &q in &[8.0, 16.0] {
            for &s in &[1.0, 4.0 / 3.0] {
                let m = lattice_measure(2, q, TruncationShape::Ball, s, MeasureVariant::Standard);
                let mut rng = seeded_rng(71);
                let deltas = [q.powf(-m.p), 1.0 / q, 0.1];
                for _ in 0..100 {
                    // random center in the unit ball
                    let ang = 2.0 * PI * unit_f64(&mut rng);
                    let rad = unit_f64(&mut rng).sqrt();
                    let x = [rad * ang.cos(), rad * ang.sin()];
                    for &delta in &deltas {
                        let mass = m.ball_mass(&x, delta);
                        worst = worst.max(mass / delta.powf(s));
                    }
                }
            }
        }
        assert!(worst <= 10.0, "Frostman constant {worst} exceeds 10");
        assert!(worst > 0.0);
    }

    #[test]
    fn descriptor_roundtrip() {
        let m = lattice_measure(2, 8.0, TruncationShape::Ball, 1.0, MeasureVariant::Standard);
        let desc = m.descriptor();
        let json = serde_json::to_string(&desc).unwrap();
        let back: MeasureDescriptor = serde_json::from_str(&json).unwrap();
        let rebuilt = back.rebuild().unwrap();
        assert_eq!(rebuilt.atom_count(), m.atom_count());
        assert_eq!(rebuilt.c_a.to_bits(), m.c_a.to_bits());
        let xi = [3.25, -1.5];
        assert_eq!(
            rebuilt.fourier_at(&xi).re.to_bits(),
            m.fourier_at(&xi).re.to_bits()
        );
    }
}
