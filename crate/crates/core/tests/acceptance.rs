//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.

mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;
use std::time::{Duration, Instant};

use gauss_avoid::cli::{DEFAULT_MAX_DEGREE, DEFAULT_TARGET_RADIUS};
use gauss_avoid::figure_eight::FigureEightParams;
use gauss_avoid::framing::{
    build_frame, check_separation, choose_pole, frame_residuals, separate, Frame, ObstacleSet,
    DEFAULT_MARGIN,
};
use gauss_avoid::immersion::{
    base_circle, projected_gauss, spin, ExtensionParams, FnImmersion, Immersion,
};
use gauss_avoid::verify::{
    auto_tune, c1_defect, circle_torus, degree_check, gauss_defect, verify_extension, Grid,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{cos3, random_obstacles, random_series, tetrahedron};

// Criterion 1.
const C1_GRID: usize = 2048;
const C1_MAX_SECONDS: f64 = 60.0;
/// Sampled avoidance margin of the ε = δ = 1/8, z = cos 3θ torus at 2048².
const C1_GOLDEN_MARGIN: f64 = 0.1459080333908726;
const C1_GOLDEN_TOLERANCE: f64 = 1e-9;
// Criterion 2.
const C2_DELTAS: [f64; 5] = [0.5, 0.25, 0.125, 1e-2, 1e-4];
const C2_TOLERANCE: f64 = 1e-6;
const C2_ORACLE_SAMPLES: usize = 1_000_000;
// Criterion 3.
const C3_COARSE: (usize, f64) = (512, 1e-2);
const C3_FINE: (usize, f64) = (1024, 2.5e-3);
// Criterion 4.
const C4_SERIES: usize = 50;
const C4_SAMPLES: usize = 4096;
const C4_TOLERANCE: f64 = 1e-12;
// Criterion 5.
const C5_SETS: u64 = 100;
const C5_GRID: usize = 512;
const C5_MAX_SECONDS: f64 = 15.0 * 60.0;
// Criterion 6.
const C6_EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
const C6_GRID: usize = 256;
const C6_SLOPE_TOLERANCE: f64 = 0.2;
// Criterion 7.
const C7_DELTAS: [f64; 2] = [0.125, 0.5];
const C7_THETAS: usize = 512;
const C7_T_SAMPLES: usize = 4096;
const C7_TOLERANCE: f64 = 1e-9;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn tetrahedron_torus(epsilon: f64, delta: f64) -> (ObstacleSet, Arc<Frame>, ExtensionParams) {
    let set = choose_pole(&tetrahedron(), 0).unwrap();
    check_separation(&set, &cos3()).unwrap();
    (
        set,
        Arc::new(build_frame(cos3())),
        ExtensionParams::new(epsilon, delta).unwrap(),
    )
}

fn tetrahedron_reproduction() -> Outcome {
    let start = Instant::now();
    let (set, frame, params) = tetrahedron_torus(0.125, 0.125);
    let r = verify_extension(&set, &frame, params, &Grid::torus(&[C1_GRID, C1_GRID])).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let golden = (r.avoidance_margin - C1_GOLDEN_MARGIN).abs();
    Outcome {
        pass: r.pass && r.sigma_min > 0.0 && r.certified_radius > 0.0 && secs < C1_MAX_SECONDS && golden < C1_GOLDEN_TOLERANCE,
        detail: format!(
            "pass={} sigma_min={:.4e} margin={:.10} (golden diff {golden:.1e}) certified={:.4e} in {secs:.1}s",
            r.pass, r.sigma_min, r.avoidance_margin, r.certified_radius
        ),
    }
}

/// Extent of a finite-difference normal angle, unwrapped sample by sample.
fn sampled_image_length(delta: f64, n: usize) -> f64 {
    let h = 1e-7;
    let e = |s: f64| (s.cos(), delta * (2.0 * s).sin());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut prev: Option<f64> = None;
    for i in 0..=n {
        let t = TAU * i as f64 / n as f64;
        let ((x1, y1), (x0, y0)) = (e(t + h), e(t - h));
        let mut a = (x0 - x1).atan2(y1 - y0);
        if let Some(p) = prev {
            a += TAU * ((p - a) / TAU).round();
        }
        prev = Some(a);
        lo = lo.min(a);
        hi = hi.max(a);
    }
    hi - lo
}

fn image_length() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut lengths = Vec::new();
    for &d in &C2_DELTAS {
        let closed = PI + 2.0 * (2.0 * d).atan();
        let l = FigureEightParams::new(d).unwrap().spherical_image_length();
        worst = worst.max((l - closed).abs());
        worst_oracle =
            worst_oracle.max((sampled_image_length(d, C2_ORACLE_SAMPLES) - closed).abs());
        lengths.push(l);
    }
    let monotone = lengths.windows(2).all(|w| w[1] < w[0]) && lengths.iter().all(|&l| l > PI);
    let near_pi = lengths.last().unwrap() - PI;
    Outcome {
        pass: worst < C2_TOLERANCE && worst_oracle < C2_TOLERANCE && monotone && near_pi < 1e-3,
        detail: format!(
            "max |l - closed form| = {worst:.1e}, oracle gap {worst_oracle:.1e}, monotone={monotone}, l(1e-4) - pi = {near_pi:.2e}"
        ),
    }
}

fn degree_zero() -> Outcome {
    let revolution = spin(Arc::new(FnImmersion::circle(1.0, &[0.0, 2.0]).unwrap())).unwrap();
    let (_, frame, params) = tetrahedron_torus(0.125, 0.125);
    let torus = circle_torus(frame, params);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, f) in [
        ("revolution", &revolution as &dyn Immersion),
        ("tetrahedron", &torus),
    ] {
        for (n, tol) in [C3_COARSE, C3_FINE] {
            let d = degree_check(f, &Grid::torus(&[n, n])).unwrap();
            pass &= d.abs() < tol;
            parts.push(format!("{name}@{n}={d:.1e}"));
        }
    }
    Outcome {
        pass,
        detail: parts.join(" "),
    }
}

fn frame_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let base = base_circle();
    let thetas: Vec<[f64; 1]> = (0..C4_SAMPLES)
        .map(|i| [TAU * i as f64 / C4_SAMPLES as f64])
        .collect();
    let (mut residual, mut odd, mut equivariance): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..C4_SERIES {
        let z = random_series(&mut rng, 9, 1.0);
        let frame = build_frame(z.clone());
        residual =
            residual.max(frame_residuals(&base, &frame, thetas.iter().map(|t| &t[..])).max());
        for [th] in &thetas {
            odd = odd.max((z.eval(*th) + z.eval(th + PI)).abs());
            equivariance = equivariance.max((frame.n2(*th) + frame.n2(th + PI)).norm());
        }
    }
    Outcome {
        pass: residual < C4_TOLERANCE && odd < C4_TOLERANCE && equivariance < C4_TOLERANCE,
        detail: format!(
            "residual {residual:.1e}, z odd {odd:.1e}, N2 equivariance {equivariance:.1e}"
        ),
    }
}

fn random_end_to_end() -> Outcome {
    let start = Instant::now();
    let grid = Grid::torus(&[C5_GRID, C5_GRID]);
    let mut failures = Vec::new();
    let mut min_radius = f64::INFINITY;
    for seed in 0..C5_SETS {
        let pts = random_obstacles(seed);
        let outcome = separate(&pts, seed, DEFAULT_MARGIN, DEFAULT_MAX_DEGREE).and_then(|sep| {
            let frame = Arc::new(build_frame(sep.series.clone()));
            auto_tune(&sep.obstacles, &frame, DEFAULT_TARGET_RADIUS, &grid)
        });
        match outcome {
            Ok((_, r)) if r.pass => min_radius = min_radius.min(r.certified_radius),
            Ok(_) => failures.push(format!("{seed}: report failed")),
            Err(e) => failures.push(format!("{seed}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: failures.is_empty() && elapsed < Duration::from_secs_f64(C5_MAX_SECONDS),
        detail: format!(
            "{}/{C5_SETS} passed, smallest certified radius {min_radius:.2e}, {:.0}s{}",
            C5_SETS as usize - failures.len(),
            elapsed.as_secs_f64(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(" failures: {}", failures.join("; "))
            }
        ),
    }
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn convergence_rates() -> Outcome {
    let grid = Grid::torus(&[C6_GRID, C6_GRID]);
    let mut c1 = Vec::new();
    let mut gauss = Vec::new();
    for &eps in &C6_EPSILONS {
        let (_, frame, params) = tetrahedron_torus(eps, 0.125);
        let torus = circle_torus(frame, params);
        c1.push(c1_defect(&torus, &grid).unwrap());
        gauss.push(gauss_defect(&torus, &grid).unwrap());
    }
    let (s1, s2) = (
        log_slope(&C6_EPSILONS, &c1),
        log_slope(&C6_EPSILONS, &gauss),
    );
    Outcome {
        pass: (s1 - 1.0).abs() <= C6_SLOPE_TOLERANCE && (s2 - 1.0).abs() <= C6_SLOPE_TOLERANCE,
        detail: format!("C1 defect slope {s1:.4}, Gauss defect slope {s2:.4}"),
    }
}

fn projected_arc() -> Outcome {
    let frame = Arc::new(build_frame(cos3()));
    let mut worst: f64 = 0.0;
    for &d in &C7_DELTAS {
        let params = ExtensionParams::new(0.125, d).unwrap();
        let proj = projected_gauss(frame.clone(), &params);
        let expected = FRAC_PI_2 + (2.0 * d).atan();
        for i in 0..C7_THETAS {
            let th = TAU * i as f64 / C7_THETAS as f64;
            let n1 = frame.n1(th);
            let max = (0..C7_T_SAMPLES)
                .map(|j| {
                    let g = proj.at(&[th, TAU * j as f64 / C7_T_SAMPLES as f64]).vec3();
                    g.dot(&n1).clamp(-1.0, 1.0).acos()
                })
                .fold(0.0, f64::max);
            worst = worst.max((max - expected).abs());
        }
    }
    Outcome {
        pass: worst < C7_TOLERANCE,
        detail: format!("max deviation from pi/2 + atan(2 delta): {worst:.1e}"),
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("tetrahedron reproduction", tetrahedron_reproduction),
        ("spherical-image length", image_length),
        ("degree zero", degree_zero),
        ("frame exactness", frame_exactness),
        ("randomized end-to-end", random_end_to_end),
        ("convergence rates", convergence_rates),
        ("projected-arc geometry", projected_arc),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {} ({name}): {}  {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {}/7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
