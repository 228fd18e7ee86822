//! Generation, truncation, rescaling and validation of well-distributed
//! (Delone) point sets: the set `A` and its truncation `A_q`.

use crate::error::{Result, WelldistError};
use crate::numeric::{fmt_f64, SiteRng};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

/// Separation and covering witnesses of a Delone set. `separation` is the
/// minimum pairwise distance; every axis-aligned cube of side `covering`
/// inside the truncation region meets the set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeloneConstants {
    pub separation: f64,
    pub covering: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Lattice,
    PerturbedLattice,
    Jittered,
}

impl GeneratorKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lattice" => Ok(GeneratorKind::Lattice),
            "perturbed-lattice" => Ok(GeneratorKind::PerturbedLattice),
            "jittered" => Ok(GeneratorKind::Jittered),
            other => Err(WelldistError::Domain(format!(
                "unknown generator kind '{other}' (expected lattice | perturbed-lattice | jittered)"
            ))),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GeneratorKind::Lattice => "lattice",
            GeneratorKind::PerturbedLattice => "perturbed-lattice",
            GeneratorKind::Jittered => "jittered",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationShape {
    Ball,
    Cube,
}

impl TruncationShape {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ball" => Ok(TruncationShape::Ball),
            "cube" => Ok(TruncationShape::Cube),
            other => Err(WelldistError::Domain(format!(
                "unknown truncation shape '{other}' (expected ball | cube)"
            ))),
        }
    }
}

/// The truncation region: `B(0, q)` or `[-q, q]^d`, boundary closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub shape: TruncationShape,
    pub radius: f64,
}

impl Truncation {
    fn contains(&self, point: &[f64]) -> bool {
        match self.shape {
            TruncationShape::Ball => {
                let r2: f64 = point.iter().map(|v| v * v).sum();
                r2 <= self.radius * self.radius * (1.0 + 1e-14)
            }
            TruncationShape::Cube => point.iter().all(|v| v.abs() <= self.radius * (1.0 + 1e-14)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Provenance {
    Generated {
        kind: GeneratorKind,
        seed: u64,
        jitter: f64,
    },
    /// Hand-built point list; no generator guarantees attach.
    Explicit,
}

/// A finite point configuration with its provenance and truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    /// Flat coordinate buffer, `n * dim` entries, point-major.
    coords: Vec<f64>,
    pub provenance: Provenance,
    pub truncation: Truncation,
    pub scaled: bool,
}

impl PointSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Wrap an explicit point list (tests, CSV round trips).
    pub fn from_points(dim: usize, points: Vec<f64>, truncation: Truncation) -> Result<Self> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(WelldistError::Domain(
                "point buffer length must be a multiple of dim".into(),
            ));
        }
        Ok(PointSet {
            dim,
            coords: points,
            provenance: Provenance::Explicit,
            truncation,
            scaled: false,
        })
    }

    /// Serialize to CSV: header `x0,x1,...`, 17-significant-digit decimals,
    /// LF line endings.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        let header: Vec<String> = (0..self.dim).map(|i| format!("x{i}")).collect();
        out.write_all(header.join(",").as_bytes())?;
        out.write_all(b"\n")?;
        for p in self.iter_points() {
            let row: Vec<String> = p.iter().map(|v| fmt_f64(*v)).collect();
            out.write_all(row.join(",").as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Minimum pairwise distance, grid-accelerated.
    pub fn min_pairwise_distance(&self) -> Result<f64> {
        if self.len() < 2 {
            return Err(WelldistError::Domain(
                "min pairwise distance needs at least 2 points".into(),
            ));
        }
        let d = self.dim;
        let n = self.len();
        // Expected spacing from the bounding extent; widen until a pair is
        // found within the cell neighborhood.
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in self.iter_points() {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let extent = (0..d).map(|k| hi[k] - lo[k]).fold(0.0f64, f64::max).max(1e-300);
        let mut cell = extent / (n as f64).powf(1.0 / d as f64).max(1.0);
        for _ in 0..64 {
            if let Some(min) = self.min_distance_with_cell(&lo, cell) {
                if min <= cell {
                    return Ok(min);
                }
                cell = min; // a witness exists; one more pass certifies it
            } else {
                cell *= 2.0;
            }
        }
        // Degenerate fallback (never reached for sane inputs).
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min(dist(self.point(i), self.point(j)));
            }
        }
        Ok(best)
    }

    fn min_distance_with_cell(&self, lo: &[f64], cell: f64) -> Option<f64> {
        use std::collections::HashMap;
        let d = self.dim;
        let key = |p: &[f64]| -> Vec<i64> {
            (0..d).map(|k| ((p[k] - lo[k]) / cell).floor() as i64).collect()
        };
        let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for i in 0..self.len() {
            grid.entry(key(self.point(i))).or_default().push(i);
        }
        let mut best = f64::INFINITY;
        let offsets = neighbor_offsets(d);
        for (cell_key, members) in &grid {
            for off in &offsets {
                let nk: Vec<i64> = cell_key.iter().zip(off).map(|(a, b)| a + b).collect();
                if let Some(others) = grid.get(&nk) {
                    for &i in members {
                        for &j in others {
                            if j > i || (nk != *cell_key && j != i) {
                                let dd = dist(self.point(i), self.point(j));
                                if dd > 0.0 && dd < best {
                                    best = dd;
                                }
                            }
                        }
                    }
                }
            }
        }
        if best.is_finite() {
            Some(best)
        } else {
            None
        }
    }
}

fn neighbor_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for v in &out {
            for o in [-1i64, 0, 1] {
                let mut w = v.clone();
                w.push(o);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Generate the truncation `A_q` of one of the three well-distributed models.
///
/// * `lattice`: `Z^d`.
/// * `perturbed-lattice`: `Z^d` plus a per-site uniform offset of sup-norm at
///   most `jitter`, drawn from a stream keyed by the site coordinates so that
///   membership is stable under changing `q`.
/// * `jittered`: one uniform point per unit cell of `Z^d`, keyed likewise.
pub fn generate(
    kind: GeneratorKind,
    dim: usize,
    q: f64,
    shape: TruncationShape,
    seed: u64,
    jitter: f64,
) -> Result<PointSet> {
    if dim < 1 {
        return Err(WelldistError::Domain("dim must be >= 1".into()));
    }
    if !(q >= 1.0) {
        return Err(WelldistError::Domain("truncation radius q must be >= 1".into()));
    }
    if !(0.0..0.5).contains(&jitter) {
        return Err(WelldistError::Domain(
            "jitter must lie in [0, 1/2); larger values break separation".into(),
        ));
    }
    let truncation = Truncation { shape, radius: q };
    // Enumeration box wide enough that no member of the infinite model inside
    // the truncation region is missed.
    let pad = match kind {
        GeneratorKind::Lattice => 0.0,
        GeneratorKind::PerturbedLattice => jitter,
        GeneratorKind::Jittered => 1.0,
    };
    let reach = (q + pad).floor() as i64 + 1;
    let est = (2 * reach + 1).pow(dim as u32);
    if est > 200_000_000 {
        return Err(WelldistError::Budget(format!(
            "generation would enumerate ~{est} candidate sites"
        )));
    }
    let mut coords = Vec::new();
    let mut site = vec![-reach; dim];
    'outer: loop {
        let mut point = vec![0.0f64; dim];
        match kind {
            GeneratorKind::Lattice => {
                for k in 0..dim {
                    point[k] = site[k] as f64;
                }
            }
            GeneratorKind::PerturbedLattice => {
                let mut rng = SiteRng::new(seed, &site);
                for k in 0..dim {
                    point[k] = site[k] as f64 + jitter * rng.next_symmetric();
                }
            }
            GeneratorKind::Jittered => {
                let mut rng = SiteRng::new(seed, &site);
                for k in 0..dim {
                    point[k] = site[k] as f64 + rng.next_unit();
                }
            }
        }
        if truncation.contains(&point) {
            coords.extend_from_slice(&point);
        }
        // advance site counter
        for k in 0..dim {
            site[k] += 1;
            if site[k] <= reach {
                continue 'outer;
            }
            site[k] = -reach;
        }
        break;
    }
    Ok(PointSet {
        dim,
        coords,
        provenance: Provenance::Generated { kind, seed, jitter },
        truncation,
        scaled: false,
    })
}

/// Map `A_q` into the unit ball as `q^{-1} A_q`.
pub fn rescale_to_unit(ps: &PointSet) -> Result<PointSet> {
    if ps.scaled {
        return Err(WelldistError::Domain("point set is already scaled".into()));
    }
    let q = ps.truncation.radius;
    let coords = ps.coords.iter().map(|v| v / q).collect();
    Ok(PointSet {
        dim: ps.dim,
        coords,
        provenance: ps.provenance.clone(),
        truncation: ps.truncation,
        scaled: true,
    })
}

/// Report naming the first empty cube found by the covering check.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringFailure {
    pub center: Vec<f64>,
    pub side: f64,
}

impl fmt::Display for CoveringFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "empty cube of side {} centered at {:?}",
            self.side, self.center
        )
    }
}

/// The covering side guaranteed analytically by each generator.
pub fn analytic_covering(ps: &PointSet) -> Option<f64> {
    match &ps.provenance {
        Provenance::Generated { kind, jitter, .. } => Some(match kind {
            GeneratorKind::Lattice => 1.0,
            GeneratorKind::PerturbedLattice => 1.0 + 2.0 * jitter,
            GeneratorKind::Jittered => 2.0,
        }),
        Provenance::Explicit => None,
    }
}

/// Measure the separation and verify a claimed covering side.
///
/// Covering is checked on a grid of cube centers of step `covering / 2` over
/// the interior of the truncation region (margin `covering` from the
/// boundary); the first empty cube is reported on failure.
pub fn verify_delone(ps: &PointSet, covering_claim: f64) -> Result<std::result::Result<DeloneConstants, CoveringFailure>> {
    if ps.scaled {
        return Err(WelldistError::Domain(
            "verify_delone expects the unscaled truncation".into(),
        ));
    }
    if ps.len() < 2 {
        return Err(WelldistError::Domain("need at least 2 points".into()));
    }
    if !(covering_claim > 0.0) {
        return Err(WelldistError::Domain("claimed covering must be positive".into()));
    }
    let separation = ps.min_pairwise_distance()?;
    let side = covering_claim;
    let step = side / 2.0;
    let q = ps.truncation.radius;
    let reach = q - side;
    if reach <= 0.0 {
        // Region too small to host any test cube; covering holds vacuously.
        return Ok(Ok(DeloneConstants { separation, covering: side }));
    }
    let d = ps.dim;
    // Bucket points at half-side resolution for the cube queries.
    use std::collections::HashMap;
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for i in 0..ps.len() {
        let key: Vec<i64> = ps.point(i).iter().map(|v| (v / step).floor() as i64).collect();
        grid.entry(key).or_default().push(i);
    }
    let m = (reach / step).floor() as i64;
    let mut idx = vec![-m; d];
    'outer: loop {
        let center: Vec<f64> = idx.iter().map(|k| *k as f64 * step).collect();
        let inside = match ps.truncation.shape {
            TruncationShape::Ball => center.iter().map(|v| v * v).sum::<f64>().sqrt() <= reach,
            TruncationShape::Cube => true,
        };
        if inside {
            let mut found = false;
            let cell_lo: Vec<i64> = center
                .iter()
                .map(|c| ((c - side / 2.0) / step).floor() as i64)
                .collect();
            let cell_hi: Vec<i64> = center
                .iter()
                .map(|c| ((c + side / 2.0) / step).floor() as i64)
                .collect();
            let mut probe = cell_lo.clone();
            'cubes: loop {
                if let Some(members) = grid.get(&probe) {
                    for &i in members {
                        let p = ps.point(i);
                        if p.iter()
                            .zip(&center)
                            .all(|(x, c)| (x - c).abs() <= side / 2.0 + 1e-12)
                        {
                            found = true;
                            break 'cubes;
                        }
                    }
                }
                for k in 0..d {
                    probe[k] += 1;
                    if probe[k] <= cell_hi[k] {
                        continue 'cubes;
                    }
                    probe[k] = cell_lo[k];
                }
                break;
            }
            if !found {
                return Ok(Err(CoveringFailure { center, side }));
            }
        }
        for k in 0..d {
            idx[k] += 1;
            if idx[k] <= m {
                continue 'outer;
            }
            idx[k] = -m;
        }
        break;
    }
    Ok(Ok(DeloneConstants { separation, covering: side }))
}

/// Convenience wrapper using the generator's analytic covering claim.
pub fn verify_delone_auto(ps: &PointSet) -> Result<std::result::Result<DeloneConstants, CoveringFailure>> {
    let claim = analytic_covering(ps).ok_or_else(|| {
        WelldistError::Domain("explicit point sets need an explicit covering claim".into())
    })?;
    verify_delone(ps, claim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_ball_d2_q2_has_13_points() {
        let ps = generate(GeneratorKind::Lattice, 2, 2.0, TruncationShape::Ball, 0, 0.0).unwrap();
        assert_eq!(ps.len(), 13);
        // distance census: origin, 4 at distance 1, 4 at sqrt(2), 4 at 2.
        let mut census = [0usize; 3];
        for p in ps.iter_points() {
            let r2 = p[0] * p[0] + p[1] * p[1];
            match r2 as i64 {
                0 => {}
                1 => census[0] += 1,
                2 => census[1] += 1,
                4 => census[2] += 1,
                other => panic!("unexpected squared norm {other}"),
            }
        }
        assert_eq!(census, [4, 4, 4]);
    }

    #[test]
    fn lattice_cube_d1_q3_is_span() {
        let ps = generate(GeneratorKind::Lattice, 1, 3.0, TruncationShape::Cube, 0, 0.0).unwrap();
        let mut xs: Vec<f64> = ps.iter_points().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn jittered_generation_is_deterministic() {
        let a = generate(GeneratorKind::Jittered, 2, 8.0, TruncationShape::Ball, 42, 0.0).unwrap();
        let b = generate(GeneratorKind::Jittered, 2, 8.0, TruncationShape::Ball, 42, 0.0).unwrap();
        assert_eq!(a.coords(), b.coords());
        let c = generate(GeneratorKind::Jittered, 2, 8.0, TruncationShape::Ball, 43, 0.0).unwrap();
        assert_ne!(a.coords(), c.coords());
    }

    #[test]
    fn perturbed_membership_stable_under_q() {
        // Sites present in both truncations carry identical offsets.
        let small = generate(GeneratorKind::PerturbedLattice, 2, 4.0, TruncationShape::Cube, 9, 0.2).unwrap();
        let large = generate(GeneratorKind::PerturbedLattice, 2, 8.0, TruncationShape::Cube, 9, 0.2).unwrap();
        for p in small.iter_points() {
            assert!(
                large
                    .iter_points()
                    .any(|q| q.iter().zip(p).all(|(a, b)| a == b)),
                "point {p:?} missing from the larger truncation"
            );
        }
    }

    #[test]
    fn jitter_out_of_range_rejected() {
        let err = generate(GeneratorKind::PerturbedLattice, 2, 4.0, TruncationShape::Ball, 0, 0.5);
        assert!(err.is_err());
    }

    #[test]
    fn rescale_contract() {
        let ps = generate(GeneratorKind::Lattice, 2, 2.0, TruncationShape::Ball, 0, 0.0).unwrap();
        let scaled = rescale_to_unit(&ps).unwrap();
        assert_eq!(scaled.len(), 13);
        let max_norm = scaled
            .iter_points()
            .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
            .fold(0.0f64, f64::max);
        assert!((max_norm - 1.0).abs() < 1e-15);
        assert!((scaled.min_pairwise_distance().unwrap() - 0.5).abs() < 1e-15);
        assert!(rescale_to_unit(&scaled).is_err(), "double scaling rejected");
    }

    #[test]
    fn verify_delone_lattice() {
        let ps = generate(GeneratorKind::Lattice, 2, 6.0, TruncationShape::Ball, 0, 0.0).unwrap();
        let ok = verify_delone_auto(&ps).unwrap().expect("lattice is Delone");
        assert_eq!(ok.separation, 1.0);
        assert_eq!(ok.covering, 1.0);
    }

    #[test]
    fn verify_delone_perturbed_bounds() {
        let ps = generate(GeneratorKind::PerturbedLattice, 2, 8.0, TruncationShape::Ball, 1, 0.25).unwrap();
        let ok = verify_delone_auto(&ps).unwrap().expect("perturbed lattice is Delone");
        assert!(ok.separation >= 0.5, "analytic bound 1 - 2*jitter");
        assert!(ok.separation <= 1.0 + 2.0 * 0.25);
    }

    #[test]
    fn verify_delone_names_empty_cube() {
        let ps = PointSet::from_points(
            2,
            vec![0.0, 0.0, 0.0, 3.0],
            Truncation { shape: TruncationShape::Cube, radius: 3.0 },
        )
        .unwrap();
        let fail = verify_delone(&ps, 1.0).unwrap().expect_err("gap of length 3");
        assert_eq!(fail.side, 1.0);
        // The named cube really is empty.
        for p in ps.iter_points() {
            assert!(
                !p.iter()
                    .zip(&fail.center)
                    .all(|(x, c)| (x - c).abs() <= 0.5),
                "cube at {:?} is not empty",
                fail.center
            );
        }
    }

    #[test]
    fn gauss_circle_band() {
        for q in [16.0f64, 24.0] {
            let ps = generate(GeneratorKind::Lattice, 2, q, TruncationShape::Ball, 0, 0.0).unwrap();
            let ratio = ps.len() as f64 / (q * q);
            assert!((ratio - std::f64::consts::PI).abs() / std::f64::consts::PI < 0.15);
        }
    }

    #[test]
    fn csv_shape() {
        let ps = generate(GeneratorKind::Lattice, 2, 1.0, TruncationShape::Cube, 0, 0.0).unwrap();
        let mut buf = Vec::new();
        ps.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x0,x1"));
        assert_eq!(text.lines().count(), 10, "header + 9 points");
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }
}
