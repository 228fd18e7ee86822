// Temporary development probe for acceptance-criterion calibration.
use welldist::averages::*;
use welldist::distances;
use welldist::geometry::*;
use welldist::kernels::*;
use welldist::mattila::*;
use welldist::measure::*;
use welldist::numeric::pearson;
use welldist::points::*;

fn lattice_measure(d: usize, q: f64, s: f64, variant: MeasureVariant) -> ThickenedMeasure {
    let ps = generate(GeneratorKind::Lattice, d, q, TruncationShape::Ball, 0, 0.0).unwrap();
    let scaled = rescale_to_unit(&ps).unwrap();
    ThickenedMeasure::build(&scaled, s, BumpProfile::standard(d), variant).unwrap()
}

fn main() {
    let which: String = std::env::args().nth(1).unwrap_or_default();
    let quad = QuadratureSpec::default();
    let ball = ConvexBody::ball(2);

    if which.is_empty() || which == "crit3" {
        println!("== criterion 3: coarse bound bands ==");
        let t0 = std::time::Instant::now();
        let mut maxima = Vec::new();
        for q in [16.0f64, 32.0] {
            let m = lattice_measure(2, q, 1.0, MeasureVariant::Standard);
            let mut max_qsigma: f64 = 0.0;
            for t in dyadic_grid(q, q * q, 1) {
                let p = surface_average(&m, &ball, t, &quad).unwrap();
                println!("  q={q} t={t}: sigma={:.6e} M={} res={:.2e}", p.sigma, p.m, p.residual);
                max_qsigma = max_qsigma.max(q * p.sigma);
            }
            let s2 = surface_average(&m, &ball, 2.0 * q * q, &quad).unwrap();
            let s4 = surface_average(&m, &ball, 4.0 * q * q, &quad).unwrap();
            println!(
                "  q={q}: max q*sigma = {max_qsigma:.4}; sigma(4q^2)/sigma(2q^2) = {:.4}",
                s4.sigma / s2.sigma
            );
            maxima.push(max_qsigma);
        }
        println!("  ratio of maxima = {:.4}", maxima[1] / maxima[0]);
        println!("  elapsed {:?}", t0.elapsed());
    }

    if which.is_empty() || which == "crit4" {
        println!("== criterion 4: beta fit q=32 ==");
        let t0 = std::time::Instant::now();
        let m = lattice_measure(2, 32.0, 1.0, MeasureVariant::Standard);
        let series = average_series(&m, &ball, 64.0, 1024.0, 2, &quad).unwrap();
        for e in &series.entries {
            println!("  t={:.1} sigma={:.6e}", e.t, e.sigma);
        }
        let (beta, se) = fit_exponent(&series, 64.0, 1024.0).unwrap();
        println!("  beta_hat = {beta:.4} +- {se:.4}  (elapsed {:?})", t0.elapsed());
    }

    if which.is_empty() || which == "crit5" {
        println!("== criterion 5: cap decomposition q=16, t=q^2 ==");
        let m = lattice_measure(2, 16.0, 1.0, MeasureVariant::Standard);
        let dec = sigma_half_decomposition(&m, 256.0, 0.25, 4.0, &DecayProfile::default(), 0.0)
            .unwrap();
        println!(
            "  caps={} Sigma={:.4} bound 10*t^(1/2)={:.1}",
            dec.caps.len(),
            dec.sigma_half,
            10.0 * 256.0f64.sqrt()
        );
        let sp = surface_average(&m, &ball, 256.0, &quad).unwrap();
        println!(
            "  t^(1-d) Sigma = {:.4e} vs sigma(t) = {:.4e} (slack check)",
            dec.sigma_half / 256.0,
            sp.sigma
        );
    }

    if which.is_empty() || which == "crit7" {
        println!("== criterion 7: parabola lower-bound sequence ==");
        let body = make_parabola_body();
        let BodyKind::ParabolaPatch(pb) = &body.kind else { panic!() };
        let lambda = pb.scale;
        println!("  body scale lambda = {lambda:.6}");
        for tau in [16.0f64, 64.0, 256.0] {
            let t0 = std::time::Instant::now();
            let m = lattice_measure(2, tau, 1.0, MeasureVariant::Modified);
            let t = tau * tau / lambda;
            let p = surface_average(&m, &body, t, &quad).unwrap();
            println!(
                "  tau={tau}: t={t:.1} sigma={:.6e} sigma*t^(3/4)={:.4} M={} conv={} ({:?})",
                p.sigma,
                p.sigma * t.powf(0.75),
                p.m,
                p.converged,
                t0.elapsed()
            );
        }
    }

    if which.is_empty() || which == "crit9" {
        println!("== criterion 9: mattila consistency q=16 ==");
        let m = lattice_measure(2, 16.0, 1.0, MeasureVariant::Standard);
        let series = average_series(&m, &ball, 16.0, 256.0, 2, &quad).unwrap();
        let nu = empirical_distance_measure(&m).unwrap();
        let mut logs_lhs = Vec::new();
        let mut logs_rhs = Vec::new();
        for e in &series.entries {
            let lhs = hankel_transform(&nu, e.t, 2).unwrap();
            let rhs = e.t.sqrt() * e.sigma;
            println!("  t={:.1} nu_hat={lhs:+.5e} sqrt(t)sigma={rhs:.5e}", e.t);
            logs_lhs.push(lhs.abs().max(1e-300).ln());
            logs_rhs.push(rhs.ln());
        }
        println!("  log-correlation = {:.4}", pearson(&logs_lhs, &logs_rhs));
        let spectral_series = average_series(&m, &ball, 1.0, 2.0 * 256.0, 4, &quad).unwrap();
        let spec = energy_spectral(&spectral_series, 1.0).unwrap();
        let direct = m.energy_direct(1.0).unwrap();
        println!("  energy spectral={spec:.4} direct={direct:.4} ratio={:.3}", direct / spec);
    }

    if which.is_empty() || which == "peak" {
        println!("== Poisson peak contrast ==");
        for q in [8.0f64, 16.0] {
            let m = lattice_measure(2, q, 1.0, MeasureVariant::Modified);
            let peak = m.fourier_at(&[q, 0.0]).norm();
            let lit = m.fourier_at(&[q + 0.5, 0.5]).norm();
            let valley = m.fourier_at(&[q + q / 2.0, q / 2.0]).norm();
            println!(
                "  q={q}: peak={peak:.4e} literal={lit:.4e} (ratio {:.2}) valley={valley:.4e} (ratio {:.2e})",
                peak / lit,
                peak / valley
            );
        }
    }

    if which.is_empty() || which == "crit8" {
        println!("== criterion 8: distance statistics ==");
        for q in [8.0f64, 16.0, 32.0] {
            let t0 = std::time::Instant::now();
            let ps = generate(GeneratorKind::Lattice, 2, q, TruncationShape::Ball, 0, 0.0).unwrap();
            let stats = distances::distance_multiset(&ps, &ball).unwrap();
            let distinct = distances::distinct_count(&stats, 1.0 / q).unwrap();
            let bound = (ps.len() as f64).powf(0.75);
            println!(
                "  q={q}: |A_q|={} distinct(1/q)={distinct} |A_q|^(3/4)={bound:.1} ({:?})",
                ps.len(),
                t0.elapsed()
            );
        }
        // ST sanity
        for q in [8usize, 16] {
            let mut pts = Vec::new();
            for x in 0..q {
                for y in 0..q {
                    pts.push(x as f64);
                    pts.push(y as f64);
                }
            }
            let grid = PointSet::from_points(
                2,
                pts,
                Truncation { shape: TruncationShape::Cube, radius: q as f64 },
            )
            .unwrap();
            let mut max_inc = 0u64;
            let mut best_tau2 = 0i64;
            for tau2 in 1..=(2 * (q - 1) * (q - 1)) as i64 {
                let tau = (tau2 as f64).sqrt();
                let c = distances::incidence_count(&grid, &grid, tau, &ball, 0.0).unwrap();
                if c > max_inc {
                    max_inc = c;
                    best_tau2 = tau2;
                }
            }
            println!(
                "  q={q}: max incidences {max_inc} at tau^2={best_tau2}; 10 q^(8/3) = {:.0}",
                10.0 * (q as f64).powf(8.0 / 3.0)
            );
        }
    }
}
