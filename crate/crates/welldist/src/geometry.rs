//! Convex bodies `K` (Minkowski functional, boundary sampling with surface
//! measure, duals), lattice-point counts on dilated boundaries, and the
//! parabola-patch construction whose dilates host many integer points.

use crate::error::{Result, WelldistError};
use crate::numeric::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Circle or parabola piece of a piecewise-analytic boundary, traversed CCW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum SegGeom {
    /// Point `(y^2, y)` for `y` running from `y_from` to `y_to`.
    Parabola { y_from: f64, y_to: f64 },
    /// Circle arc `center + r (cos a, sin a)`, position angle from
    /// `ang_from` to `ang_to` (CCW when increasing).
    Circle { center: [f64; 2], r: f64, ang_from: f64, ang_to: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Segment {
    geom: SegGeom,
    /// Polar-angle span of the segment as seen from the origin.
    theta: (f64, f64),
    len: f64,
    cum: f64,
}

/// Parabola arc closed into a convex body: the arc `{(x, +-sqrt(x))}` for
/// `x` in `[x0, 1]` stays on the boundary, the right side is capped by the
/// tangent circle through `(1, +-1)`, and the left side wraps around the
/// origin with a tangent-continuous pair of circular arcs so the gauge
/// center (the coordinate origin, which the dilations fix) is interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolaBody {
    segments: Vec<Segment>,
    /// Uniform scale applied to the world construction (area normalization).
    pub scale: f64,
    total_len: f64,
    area_world: f64,
}

pub const PARABOLA_ARC_X0: f64 = 1.0 / 16.0;
const LEFT_CAP_R1: f64 = 3.0;
const LEFT_CAP_TURN: f64 = PI / 45.0; // 4 degrees

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BodyKind {
    Ball,
    Ellipse { a: f64, b: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    ParabolaPatch(ParabolaBody),
}

/// A convex body with its Minkowski functional and boundary measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexBody {
    pub dim: usize,
    pub kind: BodyKind,
    pub volume_normalized: bool,
    /// `[kappa_min, kappa_max]` of the boundary curvature.
    pub curvature_range: (f64, f64),
}

impl fmt::Display for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            BodyKind::Ball if self.dim == 2 => write!(f, "ball"),
            BodyKind::Ball => write!(f, "ball{}d", self.dim),
            BodyKind::Ellipse { a, b } => write!(f, "ellipse({a},{b})"),
            BodyKind::Ellipsoid { a, b, c } => write!(f, "ellipsoid({a},{b},{c})"),
            BodyKind::ParabolaPatch(_) => write!(f, "parabola-patch"),
        }
    }
}

impl ConvexBody {
    pub fn ball(dim: usize) -> Self {
        ConvexBody {
            dim,
            kind: BodyKind::Ball,
            volume_normalized: true,
            curvature_range: (1.0, 1.0),
        }
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(WelldistError::Domain("ellipse semi-axes must be positive".into()));
        }
        let (hi, lo) = (a.max(b), a.min(b));
        Ok(ConvexBody {
            dim: 2,
            kind: BodyKind::Ellipse { a, b },
            volume_normalized: (a * b - 1.0).abs() < 1e-12,
            curvature_range: (lo / (hi * hi), hi / (lo * lo)),
        })
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(WelldistError::Domain("ellipsoid semi-axes must be positive".into()));
        }
        // Gaussian curvature extremes sit at the axis ends.
        let ends = [
            a * a / (b * b * c * c),
            b * b / (a * a * c * c),
            c * c / (a * a * b * b),
        ];
        let kmin = ends.iter().cloned().fold(f64::MAX, f64::min);
        let kmax = ends.iter().cloned().fold(f64::MIN, f64::max);
        Ok(ConvexBody {
            dim: 3,
            kind: BodyKind::Ellipsoid { a, b, c },
            volume_normalized: (a * b * c - 1.0).abs() < 1e-12,
            curvature_range: (kmin, kmax),
        })
    }

    /// Rescale to the volume of the unit ball.
    pub fn normalized(&self) -> Self {
        match &self.kind {
            BodyKind::Ball => self.clone(),
            BodyKind::Ellipse { a, b } => {
                let lambda = 1.0 / (a * b).sqrt();
                ConvexBody::ellipse(a * lambda, b * lambda).unwrap()
            }
            BodyKind::Ellipsoid { a, b, c } => {
                let lambda = 1.0 / (a * b * c).cbrt();
                ConvexBody::ellipsoid(a * lambda, b * lambda, c * lambda).unwrap()
            }
            BodyKind::ParabolaPatch(_) => self.clone(),
        }
    }

    /// Minkowski functional `inf { t > 0 : x/t in K }`; `0` iff `x = 0`.
    pub fn minkowski_norm(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        match &self.kind {
            BodyKind::Ball => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            BodyKind::Ellipse { a, b } => {
                ((x[0] / a).powi(2) + (x[1] / b).powi(2)).sqrt()
            }
            BodyKind::Ellipsoid { a, b, c } => {
                ((x[0] / a).powi(2) + (x[1] / b).powi(2) + (x[2] / c).powi(2)).sqrt()
            }
            BodyKind::ParabolaPatch(pb) => pb.gauge(x),
        }
    }

    /// `n` boundary points with quadrature weights summing to the surface
    /// measure `|dK|`. d=2 uses equal arc-length steps (nested under
    /// doubling); d=3 uses Fibonacci-sphere directions with area-element
    /// weights rescaled to the exact surface measure.
    pub fn boundary_sample(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if n < 8 {
            return Err(WelldistError::Domain("boundary sample needs n >= 8".into()));
        }
        match &self.kind {
            BodyKind::Ball if self.dim == 2 => {
                let mut pts = Vec::with_capacity(2 * n);
                for k in 0..n {
                    let theta = 2.0 * PI * k as f64 / n as f64;
                    pts.push(theta.cos());
                    pts.push(theta.sin());
                }
                Ok((pts, vec![2.0 * PI / n as f64; n]))
            }
            BodyKind::Ellipse { a, b } => {
                let (pts, total) = ellipse_equal_arc(*a, *b, n);
                Ok((pts, vec![total / n as f64; n]))
            }
            BodyKind::Ball if self.dim == 3 => {
                let dirs = fibonacci_sphere(n);
                Ok((dirs, vec![4.0 * PI / n as f64; n]))
            }
            BodyKind::Ellipsoid { a, b, c } => {
                let axes = [*a, *b, *c];
                let dirs = fibonacci_sphere(n);
                let mut pts = Vec::with_capacity(3 * n);
                let mut w = Vec::with_capacity(n);
                for u in dirs.chunks_exact(3) {
                    let g = (0..3).map(|i| (u[i] / axes[i]).powi(2)).sum::<f64>().sqrt();
                    let r = 1.0 / g;
                    let p = [r * u[0], r * u[1], r * u[2]];
                    pts.extend_from_slice(&p);
                    // dS = r sqrt(r^2 + |grad_S r|^2) dsigma with r(u) = 1/g(u).
                    let gg: Vec<f64> = (0..3).map(|i| u[i] / (axes[i] * axes[i] * g)).collect();
                    let gr_dot_u: f64 = (0..3).map(|i| gg[i] * u[i]).sum();
                    let mut tang2 = 0.0;
                    for i in 0..3 {
                        let gi = -(gg[i] - gr_dot_u * u[i]) / (g * g);
                        tang2 += gi * gi;
                    }
                    w.push(r * (r * r + tang2).sqrt() * 4.0 * PI / n as f64);
                }
                // Rescale so the weights sum to the exact surface measure.
                let area = ellipsoid_surface_area(*a, *b, *c);
                let raw: f64 = crate::numeric::pairwise_sum(&w);
                let fix = area / raw;
                for wi in &mut w {
                    *wi *= fix;
                }
                Ok((pts, w))
            }
            BodyKind::ParabolaPatch(pb) => Ok(pb.boundary_sample(n)),
            BodyKind::Ball => Err(WelldistError::Domain(
                "boundary sampling implemented for d = 2, 3".into(),
            )),
        }
    }

    /// Surface measure `|dK|`.
    pub fn surface_measure(&self) -> f64 {
        match &self.kind {
            BodyKind::Ball if self.dim == 2 => 2.0 * PI,
            BodyKind::Ball => 4.0 * PI,
            BodyKind::Ellipse { a, b } => ellipse_equal_arc(*a, *b, 8).1,
            BodyKind::Ellipsoid { a, b, c } => ellipsoid_surface_area(*a, *b, *c),
            BodyKind::ParabolaPatch(pb) => pb.total_len * pb.scale,
        }
    }

    /// Support function `h_K(x) = sup_{y in dK} x.y` (the gauge of the dual
    /// body), by maximizing over a boundary sample with golden-section
    /// refinement near the argmax.
    pub fn dual_norm(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        if norm2 == 0.0 {
            return 0.0;
        }
        match self.dim {
            2 => {
                let f = |s: f64| -> f64 {
                    let p = self.boundary_point_at(s);
                    p[0] * x[0] + p[1] * x[1]
                };
                let coarse = 512usize;
                let total = self.parameter_range();
                let mut best_i = 0;
                let mut best = f64::MIN;
                for i in 0..coarse {
                    let v = f(total * i as f64 / coarse as f64);
                    if v > best {
                        best = v;
                        best_i = i;
                    }
                }
                let lo = total * (best_i as f64 - 1.0) / coarse as f64;
                let hi = total * (best_i as f64 + 1.0) / coarse as f64;
                golden_max(f, lo, hi, 1e-12 * total)
            }
            3 => {
                // Coarse Fibonacci sweep plus local refinement over the
                // projected direction.
                let dirs = fibonacci_sphere(4096);
                let mut best = f64::MIN;
                let mut best_u = [0.0; 3];
                for u in dirs.chunks_exact(3) {
                    let g = self.minkowski_norm(u);
                    let v = (u[0] * x[0] + u[1] * x[1] + u[2] * x[2]) / g;
                    if v > best {
                        best = v;
                        best_u = [u[0], u[1], u[2]];
                    }
                }
                // Local pattern refinement on the sphere.
                let mut step = 0.05;
                let mut cur = best_u;
                let mut cur_v = best;
                while step > 1e-10 {
                    let mut improved = false;
                    for axis in 0..3 {
                        for sgn in [-1.0, 1.0] {
                            let mut cand = cur;
                            cand[axis] += sgn * step;
                            let n: f64 = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
                            let cand = [cand[0] / n, cand[1] / n, cand[2] / n];
                            let g = self.minkowski_norm(&cand);
                            let v = (cand[0] * x[0] + cand[1] * x[1] + cand[2] * x[2]) / g;
                            if v > cur_v {
                                cur_v = v;
                                cur = cand;
                                improved = true;
                            }
                        }
                    }
                    if !improved {
                        step *= 0.5;
                    }
                }
                cur_v
            }
            _ => unreachable!("bodies are 2- or 3-dimensional"),
        }
    }

    /// Closed-form dual body where available.
    pub fn dual_body(&self) -> Result<ConvexBody> {
        match &self.kind {
            BodyKind::Ball => Ok(self.clone()),
            BodyKind::Ellipse { a, b } => ConvexBody::ellipse(1.0 / a, 1.0 / b),
            BodyKind::Ellipsoid { a, b, c } => ConvexBody::ellipsoid(1.0 / a, 1.0 / b, 1.0 / c),
            BodyKind::ParabolaPatch(_) => Err(WelldistError::Domain(
                "no closed-form dual for the parabola patch; use dual_norm".into(),
            )),
        }
    }

    /// Parameter length of the d=2 boundary (arc length, or 2 pi for a ball).
    fn parameter_range(&self) -> f64 {
        match &self.kind {
            BodyKind::Ball => 2.0 * PI,
            BodyKind::Ellipse { a, b } => ellipse_equal_arc(*a, *b, 8).1,
            BodyKind::ParabolaPatch(pb) => pb.total_len * pb.scale,
            _ => unreachable!(),
        }
    }

    /// Boundary point at parameter s (d=2 only).
    fn boundary_point_at(&self, s: f64) -> [f64; 2] {
        match &self.kind {
            BodyKind::Ball => [s.cos(), s.sin()],
            BodyKind::Ellipse { a, b } => {
                let t = ellipse_invert_arc(*a, *b, s);
                [a * t.cos(), b * t.sin()]
            }
            BodyKind::ParabolaPatch(pb) => pb.point_at_arclen(s / pb.scale).map(|v| v * pb.scale),
            _ => unreachable!(),
        }
    }
}

/// Fibonacci-sphere directions (unit vectors), deterministic.
pub fn fibonacci_sphere(n: usize) -> Vec<f64> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = 2.0 * PI * (i as f64 / golden).fract();
        out.push(r * phi.cos());
        out.push(r * phi.sin());
        out.push(z);
    }
    out
}

/// Equal-arc-length sample of an ellipse; returns flat points and perimeter.
fn ellipse_equal_arc(a: f64, b: f64, n: usize) -> (Vec<f64>, f64) {
    let total = ellipse_arclen(a, b, 2.0 * PI);
    let mut pts = Vec::with_capacity(2 * n);
    for k in 0..n {
        let s = total * k as f64 / n as f64;
        let t = ellipse_invert_arc(a, b, s);
        pts.push(a * t.cos());
        pts.push(b * t.sin());
    }
    (pts, total)
}

/// Arc length of the ellipse from parameter 0 to `t`.
fn ellipse_arclen(a: f64, b: f64, t: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(32);
    // Panel per quarter turn keeps the speed function well resolved.
    let panels = (t / (PI / 2.0)).ceil().max(1.0) as usize;
    let dw = t / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let base = p as f64 * dw;
        for (x, w) in nodes.iter().zip(weights) {
            let u = base + 0.5 * dw * (x + 1.0);
            acc += w * ((a * u.sin()).powi(2) + (b * u.cos()).powi(2)).sqrt();
        }
    }
    acc * 0.5 * dw
}

/// Invert the ellipse arc length by Newton iteration.
fn ellipse_invert_arc(a: f64, b: f64, s: f64) -> f64 {
    let total = ellipse_arclen(a, b, 2.0 * PI);
    let target = s.rem_euclid(total);
    let mut t = 2.0 * PI * target / total;
    for _ in 0..50 {
        let f = ellipse_arclen(a, b, t) - target;
        let speed = ((a * t.sin()).powi(2) + (b * t.cos()).powi(2)).sqrt();
        let dt = f / speed;
        t -= dt;
        if dt.abs() < 1e-14 {
            break;
        }
    }
    t
}

/// Thomsen's approximation is not exact; integrate the surface area instead.
fn ellipsoid_surface_area(a: f64, b: f64, c: f64) -> f64 {
    // Latitude-longitude Gauss-Legendre quadrature of |r_theta x r_phi|.
    let (nodes, weights) = gauss_legendre(64);
    let mut acc = 0.0;
    for (xt, wt) in nodes.iter().zip(weights) {
        let theta = 0.5 * PI * (xt + 1.0); // [0, pi]
        for (xp, wp) in nodes.iter().zip(weights) {
            let phi = PI * (xp + 1.0); // [0, 2 pi]
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            let e = (a * st * cp).powi(2) * (b * b * c * c)
                + (b * st * sp).powi(2) * (a * a * c * c)
                + (c * ct).powi(2) * (a * a * b * b);
            acc += wt * wp * st * (e / (a * a * b * b * c * c)).sqrt() * a * b * c;
        }
    }
    acc * 0.5 * PI * PI
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    fc.max(fd)
}

impl ParabolaBody {
    fn gauge(&self, x: &[f64]) -> f64 {
        let norm = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let theta = x[1].atan2(x[0]);
        norm / (self.radial_world(theta) * self.scale)
    }

    /// Radial function of the world-frame body: exact ray-segment
    /// intersection on the segment owning the direction.
    fn radial_world(&self, theta: f64) -> f64 {
        let seg = self
            .segments
            .iter()
            .find(|s| theta_in_span(theta, s.theta))
            .unwrap_or(&self.segments[0]);
        let (ct, st) = (theta.cos(), theta.sin());
        match &seg.geom {
            SegGeom::Parabola { .. } => ct / (st * st),
            SegGeom::Circle { center, r, .. } => {
                let uc = ct * center[0] + st * center[1];
                let disc = uc * uc - (center[0] * center[0] + center[1] * center[1]) + r * r;
                uc + disc.max(0.0).sqrt()
            }
        }
    }

    fn boundary_sample(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut pts = Vec::with_capacity(2 * n);
        let step = self.total_len / n as f64;
        for k in 0..n {
            let p = self.point_at_arclen(step * k as f64);
            pts.push(p[0] * self.scale);
            pts.push(p[1] * self.scale);
        }
        let w = self.total_len * self.scale / n as f64;
        (pts, vec![w; n])
    }

    /// World-frame boundary point at world arc length s.
    fn point_at_arclen(&self, s: f64) -> [f64; 2] {
        let s = s.rem_euclid(self.total_len);
        let seg = self
            .segments
            .iter()
            .find(|g| s < g.cum + g.len)
            .unwrap_or(self.segments.last().unwrap());
        let local = s - seg.cum;
        match &seg.geom {
            SegGeom::Circle { center, r, ang_from, ang_to } => {
                let dir = (ang_to - ang_from).signum();
                let ang = ang_from + dir * local / r;
                [center[0] + r * ang.cos(), center[1] + r * ang.sin()]
            }
            SegGeom::Parabola { y_from, y_to } => {
                // Newton on |arclen(y_from -> y)| = local.
                let sgn = (y_to - y_from).signum();
                let mut y = y_from + sgn * local / (1.0 + 4.0 * y_from * y_from).sqrt();
                for _ in 0..60 {
                    let g = parabola_arclen_abs(*y_from, y) - local;
                    let speed = (1.0 + 4.0 * y * y).sqrt();
                    let dy = sgn * g / speed;
                    y -= dy;
                    if dy.abs() < 1e-15 {
                        break;
                    }
                }
                [y * y, y]
            }
        }
    }
}

/// |arc length of (y^2, y) between y0 and y1|.
fn parabola_arclen_abs(y0: f64, y1: f64) -> f64 {
    (parabola_arclen_prim(y1) - parabola_arclen_prim(y0)).abs()
}

/// Primitive of sqrt(1 + 4 y^2).
fn parabola_arclen_prim(y: f64) -> f64 {
    let u = 2.0 * y;
    0.5 * (y * (1.0 + u * u).sqrt() + 0.5 * (u + (1.0 + u * u).sqrt()).ln())
}

fn theta_in_span(theta: f64, span: (f64, f64)) -> bool {
    let (lo, hi) = span;
    if lo <= hi {
        theta >= lo - 1e-12 && theta <= hi + 1e-12
    } else {
        // span wraps at +-pi
        theta >= lo - 1e-12 || theta <= hi + 1e-12
    }
}

/// Build the parabola-patch body, rescaled to unit-ball area.
pub fn make_parabola_body() -> ConvexBody {
    let x0 = PARABOLA_ARC_X0;
    let y0 = x0.sqrt();
    // Right cap: circle tangent to the parabola at (1, +-1), center on the
    // symmetry axis. Tangency fixes center (3/2, 0), radius sqrt(5)/2.
    let rc_center = [1.5, 0.0];
    let rc_r = 5.0_f64.sqrt() / 2.0;
    let rc_half = (1.0_f64).atan2(-0.5); // position angle of (1, 1)
    // Left cap (upper half): biarc from A = (x0, y0). Unit tangent of the
    // CCW traversal at A (coming down the upper parabola branch) and its
    // left normal.
    let a_pt = [x0, y0];
    let tnorm = (1.0 + 4.0 * y0 * y0).sqrt();
    let tangent = [-2.0 * y0 / tnorm, -1.0 / tnorm];
    let normal = [-tangent[1], tangent[0]];
    let c1 = [a_pt[0] + LEFT_CAP_R1 * normal[0], a_pt[1] + LEFT_CAP_R1 * normal[1]];
    let alpha0 = (a_pt[1] - c1[1]).atan2(a_pt[0] - c1[0]);
    let alpha1 = alpha0 + LEFT_CAP_TURN;
    let j_pt = [c1[0] + LEFT_CAP_R1 * alpha1.cos(), c1[1] + LEFT_CAP_R1 * alpha1.sin()];
    // Normal after turning by LEFT_CAP_TURN.
    let (sw, cw) = LEFT_CAP_TURN.sin_cos();
    let n_j = [normal[0] * cw - normal[1] * sw, normal[0] * sw + normal[1] * cw];
    debug_assert!(j_pt[1] > 0.0 && n_j[1] < 0.0);
    let r2 = -j_pt[1] / n_j[1];
    let c2 = [j_pt[0] + r2 * n_j[0], 0.0];
    let beta0 = (j_pt[1] - c2[1]).atan2(j_pt[0] - c2[0]);
    let l_pt = [c2[0] - r2, 0.0];
    debug_assert!(l_pt[0] < 0.0, "left cap must wrap around the origin");

    // CCW segment list starting at (1, -1).
    let geoms = vec![
        SegGeom::Circle { center: rc_center, r: rc_r, ang_from: -rc_half, ang_to: rc_half },
        SegGeom::Parabola { y_from: 1.0, y_to: y0 },
        SegGeom::Circle { center: c1, r: LEFT_CAP_R1, ang_from: alpha0, ang_to: alpha1 },
        SegGeom::Circle { center: c2, r: r2, ang_from: beta0, ang_to: PI },
        SegGeom::Circle { center: [c2[0], 0.0], r: r2, ang_from: -PI, ang_to: -beta0 },
        SegGeom::Circle { center: [c1[0], -c1[1]], r: LEFT_CAP_R1, ang_from: -alpha1, ang_to: -alpha0 },
        SegGeom::Parabola { y_from: -y0, y_to: -1.0 },
    ];
    let mut segments = Vec::new();
    let mut cum = 0.0;
    for geom in geoms {
        let (len, endpoints) = match &geom {
            SegGeom::Circle { r, ang_from, ang_to, center } => (
                r * (ang_to - ang_from).abs(),
                (
                    [center[0] + r * ang_from.cos(), center[1] + r * ang_from.sin()],
                    [center[0] + r * ang_to.cos(), center[1] + r * ang_to.sin()],
                ),
            ),
            SegGeom::Parabola { y_from, y_to } => (
                parabola_arclen_abs(*y_from, *y_to),
                ([y_from * y_from, *y_from], [y_to * y_to, *y_to]),
            ),
        };
        let th0 = endpoints.0[1].atan2(endpoints.0[0]);
        let th1 = endpoints.1[1].atan2(endpoints.1[0]);
        segments.push(Segment { geom, theta: (th0, th1), len, cum });
        cum += len;
    }
    let total_len = cum;

    // Area by Green's theorem (exact per segment).
    let mut area = 0.0;
    for seg in &segments {
        area += match &seg.geom {
            SegGeom::Circle { center, r, ang_from, ang_to } => {
                0.5 * r * r * (ang_to - ang_from)
                    + 0.5 * r
                        * (center[0] * (ang_to.sin() - ang_from.sin())
                            - center[1] * (ang_to.cos() - ang_from.cos()))
            }
            SegGeom::Parabola { y_from, y_to } => {
                -(y_to.powi(3) - y_from.powi(3)) / 6.0
            }
        };
    }
    let scale = (PI / area).sqrt();
    let body = ParabolaBody { segments, scale, total_len, area_world: area };

    // Curvature metadata from a 1000-sample polyline (Menger curvature).
    let (pts, _) = body.boundary_sample(1000);
    let n = 1000;
    let mut kmin = f64::MAX;
    let mut kmax = f64::MIN;
    for i in 0..n {
        let a = &pts[2 * ((i + n - 1) % n)..2 * ((i + n - 1) % n) + 2];
        let b = &pts[2 * i..2 * i + 2];
        let c = &pts[2 * ((i + 1) % n)..2 * ((i + 1) % n) + 2];
        let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        let la = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let lb = ((c[0] - b[0]).powi(2) + (c[1] - b[1]).powi(2)).sqrt();
        let lc = ((c[0] - a[0]).powi(2) + (c[1] - a[1]).powi(2)).sqrt();
        let k = 2.0 * cross.abs() / (la * lb * lc);
        kmin = kmin.min(k);
        kmax = kmax.max(k);
    }
    ConvexBody {
        dim: 2,
        kind: BodyKind::ParabolaPatch(body),
        volume_normalized: true,
        curvature_range: (kmin, kmax),
    }
}

/// Count integer points with `| |z|_K - tau | <= eps`, enumerating the
/// bounding box of `(tau + eps) K`. For the ball with `eps = 0` and integral
/// `tau^2` the test is exact integer arithmetic.
pub fn lattice_points_near_dilate(
    body: &ConvexBody,
    tau: f64,
    eps: f64,
) -> Result<(u64, Vec<Vec<i64>>)> {
    if !(tau >= 1.0) {
        return Err(WelldistError::Domain("tau must be >= 1".into()));
    }
    if eps < 0.0 {
        return Err(WelldistError::Domain("eps must be >= 0".into()));
    }
    let d = body.dim;
    // Axis extents from the support function.
    let mut half = Vec::with_capacity(d);
    for axis in 0..d {
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        let h = match &body.kind {
            BodyKind::Ball => 1.0,
            BodyKind::Ellipse { a, b } => [*a, *b][axis],
            BodyKind::Ellipsoid { a, b, c } => [*a, *b, *c][axis],
            BodyKind::ParabolaPatch(_) => body.dual_norm(&e).max(body.dual_norm(&e.iter().map(|v| -v).collect::<Vec<_>>())),
        };
        half.push(((tau + eps) * h).floor() as i64 + 1);
    }
    let count_est: f64 = half.iter().map(|h| (2 * h + 1) as f64).product();
    if count_est > 1e9 {
        return Err(WelldistError::Budget(format!(
            "bounding box holds ~{count_est:.2e} candidate points (limit 1e9)"
        )));
    }
    let exact_ball = matches!(body.kind, BodyKind::Ball)
        && eps == 0.0
        && (tau * tau - (tau * tau).round()).abs() < 1e-9;
    let target_sq = (tau * tau).round() as i64;
    let mut points = Vec::new();
    let mut count = 0u64;
    let mut z = half.iter().map(|h| -h).collect::<Vec<i64>>();
    'outer: loop {
        if exact_ball {
            let sq: i64 = z.iter().map(|v| v * v).sum();
            if sq == target_sq {
                count += 1;
                points.push(z.clone());
            }
        } else {
            let x: Vec<f64> = z.iter().map(|v| *v as f64).collect();
            let g = body.minkowski_norm(&x);
            if (g - tau).abs() <= eps {
                count += 1;
                points.push(z.clone());
            }
        }
        for k in 0..d {
            z[k] += 1;
            if z[k] <= half[k] {
                continue 'outer;
            }
            z[k] = -half[k];
        }
        break;
    }
    Ok((count, points))
}

/// Exact rational dilation parameter for arc counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(WelldistError::Domain("zero denominator".into()));
        }
        let g = gcd(num, den);
        Ok(Ratio { num: num / g, den: den / g })
    }

    /// Parse a decimal literal exactly (finite decimals are rational).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(dot) = s.find('.') {
            let whole = &s[..dot];
            let frac = &s[dot + 1..];
            if frac.len() > 12 {
                return Err(WelldistError::Domain(format!("tau '{s}' has too many digits")));
            }
            let whole: u64 = if whole.is_empty() { 0 } else {
                whole.parse().map_err(|_| WelldistError::Domain(format!("bad tau '{s}'")))?
            };
            let fracv: u64 = if frac.is_empty() { 0 } else {
                frac.parse().map_err(|_| WelldistError::Domain(format!("bad tau '{s}'")))?
            };
            let den = 10u64.pow(frac.len() as u32);
            Ratio::new(whole * den + fracv, den)
        } else {
            let n: u64 = s.parse().map_err(|_| WelldistError::Domain(format!("bad tau '{s}'")))?;
            Ratio::new(n, 1)
        }
    }

    /// Recognize an f64 as a small-denominator rational, else reject.
    pub fn from_f64(v: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(WelldistError::Domain("tau must be positive and finite".into()));
        }
        // Continued-fraction reconstruction with denominator cap.
        let (mut h0, mut h1, mut k0, mut k1) = (0u64, 1u64, 1u64, 0u64);
        let mut x = v;
        for _ in 0..40 {
            let a = x.floor();
            if a > 1e18 {
                break;
            }
            let ai = a as u64;
            let h2 = ai.checked_mul(h1).and_then(|t| t.checked_add(h0));
            let k2 = ai.checked_mul(k1).and_then(|t| t.checked_add(k0));
            let (Some(h2), Some(k2)) = (h2, k2) else { break };
            if k2 > 1_000_000 {
                break;
            }
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            if (h1 as f64 / k1 as f64 - v).abs() < 1e-12 * v.max(1.0) {
                return Ratio::new(h1, k1);
            }
            let frac = x - a;
            if frac < 1e-15 {
                break;
            }
            x = 1.0 / frac;
        }
        if (h1 as f64 / k1 as f64 - v).abs() < 1e-12 * v.max(1.0) && k1 > 0 {
            return Ratio::new(h1, k1);
        }
        Err(WelldistError::Domain(format!(
            "tau = {v} is not recognizably rational; pass it as a decimal or fraction"
        )))
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a.max(1) } else { gcd(b, a % b) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branches {
    Upper,
    Both,
}

/// Exact count of integer points on the dilated parabola arc
/// `{(X, sqrt(tau X)) : X in [0, tau]}` (upper branch); `Both` doubles the
/// nonzero-height points.
pub fn parabola_arc_count(tau: Ratio, branches: Branches) -> u64 {
    // (X, Y) with Y^2 = tau X, X integer in [0, tau]  <=>  Y in [0, tau]
    // integer with tau | Y^2 (in the exact rational sense).
    let n = tau.num as i128;
    let den = tau.den as i128;
    let y_max = tau.num / tau.den; // floor(tau)
    let mut upper = 0u64;
    for y in 0..=y_max as i128 {
        // X = Y^2 den / num must be a nonnegative integer.
        if (y * y % n) * den % n == 0 {
            upper += 1;
        }
    }
    match branches {
        Branches::Upper => upper,
        Branches::Both => 2 * upper - 1, // Y = 0 counted once
    }
}

/// Best-known spherical-average exponent for `M_s` measures, and the
/// lattice-point error exponents of Muller (absent in d = 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBounds {
    pub beta_gnr: f64,
    pub gamma_muller: Option<f64>,
}

pub fn reference_bounds(d: usize, s: f64) -> Result<ReferenceBounds> {
    if d < 2 {
        return Err(WelldistError::Domain("reference bounds need d >= 2".into()));
    }
    let df = d as f64;
    if !(s > 0.0 && s < df) {
        return Err(WelldistError::Domain(format!("s must lie in (0, {df})")));
    }
    let beta = if s <= (df - 1.0) / 2.0 {
        s
    } else if s <= df / 2.0 {
        (df - 1.0) / 2.0
    } else if s <= (df + 2.0) / 2.0 {
        (df + 2.0 * s - 2.0) / 4.0
    } else {
        s - 1.0
    };
    let gamma = match d {
        2 => None,
        3 => Some(20.0 / 43.0),
        _ => Some((df + 4.0) / (df * df + df + 2.0)),
    };
    Ok(ReferenceBounds { beta_gnr: beta, gamma_muller: gamma })
}
