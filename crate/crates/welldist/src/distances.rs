//! Distance-set statistics: separated distinct distances, single-distance
//! multiplicities, and point-curve incidence counts, for Euclidean and
//! K-norms.

use crate::error::{Result, WelldistError};
use crate::geometry::{BodyKind, ConvexBody};
use crate::points::PointSet;
use serde::{Deserialize, Serialize};

const PAIR_BUDGET: u64 = 5_000_000_000;
const INCIDENCE_BUDGET: u64 = 1_000_000_000;

/// Sorted multiset of pairwise K-distances of a point set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceStats {
    pub source: String,
    pub norm: String,
    pub n_points: usize,
    /// Ascending pairwise distances, one entry per unordered pair.
    pub sorted: Vec<f64>,
}

/// All unordered-pair K-distances, sorted ascending.
pub fn distance_multiset(ps: &PointSet, body: &ConvexBody) -> Result<DistanceStats> {
    let n = ps.len();
    if n < 2 {
        return Err(WelldistError::Domain("need at least 2 points".into()));
    }
    if n > 100_000 || (n as u64) * (n as u64 - 1) / 2 > PAIR_BUDGET {
        return Err(WelldistError::Budget(format!(
            "{n} points give {} pairs (budget {PAIR_BUDGET})",
            (n as u64) * (n as u64 - 1) / 2
        )));
    }
    if body.dim != ps.dim() {
        return Err(WelldistError::Domain("body and point set dimensions differ".into()));
    }
    let d = ps.dim();
    let mut sorted = Vec::with_capacity(n * (n - 1) / 2);
    let mut diff = vec![0.0; d];
    for i in 0..n {
        let a = ps.point(i);
        for j in (i + 1)..n {
            let b = ps.point(j);
            for k in 0..d {
                diff[k] = a[k] - b[k];
            }
            sorted.push(body.minkowski_norm(&diff));
        }
    }
    sorted.sort_by(f64::total_cmp);
    Ok(DistanceStats {
        source: format!("{:?}", ps.provenance),
        norm: body.to_string(),
        n_points: n,
        sorted,
    })
}

/// Count of `delta`-separated distinct distances: greedy left-to-right scan
/// counting entries that exceed the last counted one by more than `delta`
/// (`delta = 0` counts exactly-distinct values at tolerance 1e-12).
pub fn distinct_count(stats: &DistanceStats, delta: f64) -> Result<u64> {
    if delta < 0.0 {
        return Err(WelldistError::Domain("delta must be nonnegative".into()));
    }
    let gap = if delta == 0.0 { 1e-12 } else { delta };
    let mut count = 0u64;
    let mut last = f64::NEG_INFINITY;
    for &v in &stats.sorted {
        if v > last + gap {
            count += 1;
            last = v;
        }
    }
    Ok(count)
}

/// Maximum number of unordered pairs inside a sliding window of width
/// `delta` over the sorted distances; returns `(count, window start value)`.
pub fn max_multiplicity(stats: &DistanceStats, delta: f64) -> Result<(u64, f64)> {
    if delta < 0.0 {
        return Err(WelldistError::Domain("delta must be nonnegative".into()));
    }
    let width = if delta == 0.0 { 1e-12 } else { delta };
    let v = &stats.sorted;
    let mut best = (0u64, f64::NAN);
    let mut lo = 0usize;
    for hi in 0..v.len() {
        while v[hi] - v[lo] > width {
            lo += 1;
        }
        let count = (hi - lo + 1) as u64;
        if count > best.0 {
            best = (count, v[lo]);
        }
    }
    Ok(best)
}

/// `#{(p, j) : | |p - c_j|_K - tau | <= eps }` (ordered pairs). Exact integer
/// arithmetic when both sets are integral, `K` is the ball, `tau^2` is an
/// integer and `eps = 0`.
pub fn incidence_count(
    points: &PointSet,
    centers: &PointSet,
    tau: f64,
    body: &ConvexBody,
    eps: f64,
) -> Result<u64> {
    let n = points.len() as u64;
    let m = centers.len() as u64;
    if n * m > INCIDENCE_BUDGET {
        return Err(WelldistError::Budget(format!(
            "{n} x {m} incidence pairs (budget {INCIDENCE_BUDGET})"
        )));
    }
    if points.dim() != centers.dim() || points.dim() != body.dim {
        return Err(WelldistError::Domain("dimension mismatch".into()));
    }
    let d = points.dim();
    let integral = |ps: &PointSet| ps.coords().iter().all(|v| v.fract() == 0.0 && v.abs() < 2e9);
    let exact = matches!(body.kind, BodyKind::Ball)
        && eps == 0.0
        && (tau * tau - (tau * tau).round()).abs() < 1e-9
        && integral(points)
        && integral(centers);
    let mut count = 0u64;
    if exact {
        let target = (tau * tau).round() as i64;
        for p in points.iter_points() {
            for c in centers.iter_points() {
                let mut sq = 0i64;
                for k in 0..d {
                    let dk = (p[k] - c[k]) as i64;
                    sq += dk * dk;
                }
                if sq == target {
                    count += 1;
                }
            }
        }
    } else {
        let mut diff = vec![0.0; d];
        for p in points.iter_points() {
            for c in centers.iter_points() {
                for k in 0..d {
                    diff[k] = p[k] - c[k];
                }
                if (body.minkowski_norm(&diff) - tau).abs() <= eps {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::{PointSet, Truncation, TruncationShape};

    fn explicit(points: Vec<f64>) -> PointSet {
        PointSet::from_points(
            2,
            points,
            Truncation { shape: TruncationShape::Cube, radius: 10.0 },
        )
        .unwrap()
    }

    fn grid3x3() -> PointSet {
        let mut pts = Vec::new();
        for x in 0..3 {
            for y in 0..3 {
                pts.push(x as f64);
                pts.push(y as f64);
            }
        }
        explicit(pts)
    }

    #[test]
    fn two_point_multiset() {
        let ps = explicit(vec![0.0, 0.0, 3.0, 4.0]);
        let stats = distance_multiset(&ps, &ConvexBody::ball(2)).unwrap();
        assert_eq!(stats.sorted, vec![5.0]);
    }

    #[test]
    fn grid_multiset_census() {
        let stats = distance_multiset(&grid3x3(), &ConvexBody::ball(2)).unwrap();
        assert_eq!(stats.sorted.len(), 36);
        // squared values drawn from {1, 2, 4, 5, 8}
        for &v in &stats.sorted {
            let sq = (v * v).round() as i64;
            assert!((v * v - sq as f64).abs() < 1e-9);
            assert!([1, 2, 4, 5, 8].contains(&sq), "unexpected squared distance {sq}");
        }
        assert_eq!(distinct_count(&stats, 0.0).unwrap(), 5);
        // brute-force multiplicity tally: 12 unit pairs
        assert_eq!(max_multiplicity(&stats, 0.0).unwrap(), (12, 1.0));
    }

    #[test]
    fn ellipse_norm_distance() {
        let ps = explicit(vec![0.0, 0.0, 2.0, 0.0]);
        let k = ConvexBody::ellipse(2.0, 1.0).unwrap();
        let stats = distance_multiset(&ps, &k).unwrap();
        assert_eq!(stats.sorted, vec![1.0]);
    }

    #[test]
    fn greedy_distinct_merges_within_delta() {
        let stats = DistanceStats {
            source: "test".into(),
            norm: "ball".into(),
            n_points: 3,
            sorted: vec![1.0, 1.05, 2.0],
        };
        assert_eq!(distinct_count(&stats, 0.1).unwrap(), 2);
        assert_eq!(distinct_count(&stats, 10.0).unwrap(), 1);
        assert_eq!(distinct_count(&stats, 0.0).unwrap(), 3);
    }

    #[test]
    fn collinear_multiplicity() {
        let ps = explicit(vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0]);
        let stats = distance_multiset(&ps, &ConvexBody::ball(2)).unwrap();
        let (count, value) = max_multiplicity(&stats, 0.0).unwrap();
        assert_eq!((count, value), (2, 1.0));
        let wide = max_multiplicity(&stats, 0.5).unwrap().0;
        assert!(wide >= count, "delta monotonicity");
    }

    #[test]
    fn grid_incidences_unit_radius() {
        let g = grid3x3();
        let n = incidence_count(&g, &g, 1.0, &ConvexBody::ball(2), 0.0).unwrap();
        assert_eq!(n, 24, "12 unit pairs counted in both orders");
        assert_eq!(n % 2, 0, "symmetric incidences are even");
    }

    #[test]
    fn incidence_circle_of_radius_five() {
        let ps = crate::points::generate(
            crate::points::GeneratorKind::Lattice,
            2,
            10.0,
            TruncationShape::Ball,
            0,
            0.0,
        )
        .unwrap();
        let center = explicit(vec![0.0, 0.0]);
        let n = incidence_count(&ps, &center, 5.0, &ConvexBody::ball(2), 0.0).unwrap();
        assert_eq!(n, 12, "r_2(25) = 12");
    }

    #[test]
    fn incidence_beyond_diameter_is_zero() {
        let g = grid3x3();
        let n = incidence_count(&g, &g, 50.0, &ConvexBody::ball(2), 0.1).unwrap();
        assert_eq!(n, 0);
    }
}
