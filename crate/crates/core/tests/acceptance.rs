//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line
//! with the measured values, then asserts.

use std::f64::consts::{PI, TAU};
use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracvis::fractals::{
    circle, koch_generalized, polyline, quasicircle, subdivided_segment, uniform_measure,
    CurveApprox, CurveSpec,
};
use fracvis::geom::fuzz::{sample_angle_case, sample_intercone_case};
use fracvis::geom::{check_angle_bound, intercone_holds, Annulus, Cone, Point, CHECK_SLACK};
use fracvis::harness::{
    bound_value, exceptional_bound, run_sweep, write_outputs, ExperimentConfig, ViewpointConfig,
    ViewpointMode,
};
use fracvis::measurelab::{
    curve_box_dimension, default_n_grid, default_s_grid, energy_dimension, frostman_check,
    frostman_normalize, least_squares, riesz_energy, scale_constants, sector_mass_check,
    FrostmanGrid, Sector, SectorRegion,
};
use fracvis::visibility::{build_index, oracle_eps, sample_visible, visible_oracle, visible_set};

/// Runs every criterion, printing one line each, and fails if any failed.
fn main() -> ExitCode {
    let criteria: [fn(); 10] = [
        criterion_01_formula_exactness,
        criterion_02_constants,
        criterion_03_oracle_equivalence,
        criterion_04_analytic_visibility,
        criterion_05_estimator_calibration,
        criterion_06_energy_growth,
        criterion_07_bound_on_koch,
        criterion_08_quasicircle,
        criterion_09_inequality_fuzz,
        criterion_10_determinism,
    ];
    let mut failed = 0;
    for (i, run) in criteria.iter().enumerate() {
        if let Err(e) = panic::catch_unwind(run) {
            failed += 1;
            // Panics outside `verdict` still get a verdict line.
            if !e.is::<Verdict>() {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {}: FAIL {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// Panic payload of a criterion that already printed its verdict.
struct Verdict;

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n}: {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    if !pass {
        panic::panic_any(Verdict);
    }
}

fn koch_classic(level: u32) -> CurveApprox {
    koch_generalized(4f64.ln() / 3f64.ln(), level).unwrap()
}

fn criterion_01_formula_exactness() {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let f2 = bound_value(2.0).unwrap();
    let e = exceptional_bound(2.0, phi).unwrap();
    let err_f = (f2 - 1.618_033_988_749_895).abs();
    let err_e = (e - (phi - 1.0)).abs();
    verdict(
        1,
        "formula exactness",
        err_f <= 1e-12 && err_e <= 1e-12,
        &format!("bound_value(2) = {f2} (err {err_f:e}), exceptional_bound(2, phi) = {e} (err {err_e:e})"),
    );
}

fn criterion_02_constants() {
    let c = scale_constants(2.0, 0.5, 12.0, 1.0, 1.0, 1.0).unwrap();
    // Hand evaluation: d0 = 1 * 2^-1; r2 = min(1/sqrt2, sqrt3/2, (1/0.5)^2, 0.5^2);
    // alpha1 = (61/0.5)^2 = 122^2; c1 = 2^6 * 14884 * 1.
    let want = [
        ("d0", c.d0, 0.5),
        ("r2", c.r2, 0.25),
        ("alpha0", c.alpha0, 60.0),
        ("alpha1", c.alpha1, 14884.0),
        ("c1", c.c1, 952_576.0),
    ];
    let worst = want
        .iter()
        .map(|(_, got, w)| (got - w).abs())
        .fold(0.0, f64::max);
    let detail = want
        .iter()
        .map(|(n, g, _)| format!("{n}={g}"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(
        2,
        "explicit constants",
        worst <= 1e-9,
        &format!("{detail}; max err {worst:e}"),
    );
}

/// Random points outside `inside` and at least `clear` from the curve.
fn exterior_viewpoints(
    curve: &CurveApprox,
    n: usize,
    seed: u64,
    inside: impl Fn(Point) -> bool,
) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = curve.bounds();
    let m = curve.diam;
    let clear = curve.min_seg_len;
    let mut out = Vec::new();
    while out.len() < n {
        let p = Point::new(
            rng.gen_range(b.min.x - m..b.max.x + m),
            rng.gen_range(b.min.y - m..b.max.y + m),
        );
        if !inside(p) && curve.distance_to(p) > clear {
            out.push(p);
        }
    }
    out
}

/// Uniform arclength probe on the curve: (segment index, point).
fn probe(curve: &CurveApprox, rng: &mut ChaCha8Rng) -> (usize, Point) {
    let total = curve.total_length();
    let mut t = rng.gen_range(0.0..total);
    for (i, s) in curve.segments.iter().enumerate() {
        if t < s.len() {
            return (i, s.at(t / s.len()));
        }
        t -= s.len();
    }
    let i = curve.len() - 1;
    (i, curve.segments[i].b)
}

/// Name, curve and a test for viewpoints enclosed by the curve.
type Fixture = (&'static str, CurveApprox, Box<dyn Fn(Point) -> bool>);

fn criterion_03_oracle_equivalence() {
    let start = Instant::now();
    let square = polyline(&[
        Point::ORIGIN,
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
        Point::ORIGIN,
    ])
    .unwrap();
    let fixtures: Vec<Fixture> = vec![
        (
            "circle",
            circle(Point::ORIGIN, 1.0, 1024).unwrap(),
            Box::new(|p: Point| p.norm() < 1.0),
        ),
        (
            "square",
            square,
            Box::new(|p: Point| (0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y)),
        ),
        ("koch5", koch_classic(5), Box::new(|_| false)),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (k, (name, curve, inside)) in fixtures.iter().enumerate() {
        let idx = build_index(curve);
        let eps = oracle_eps(curve);
        let mut sampled = 0usize;
        let mut sampled_fail = 0usize;
        let mut hidden = 0usize;
        let mut hidden_reported = 0usize;
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        for (j, x) in exterior_viewpoints(curve, 10, 10 + k as u64, inside)
            .into_iter()
            .enumerate()
        {
            let vs = visible_set(curve, x, Some(&idx)).unwrap();
            let (pts, _) = sample_visible(&vs, 200, j as u64).unwrap();
            for u in pts {
                sampled += 1;
                if !visible_oracle(curve, x, u, eps).unwrap() {
                    sampled_fail += 1;
                }
            }
            for _ in 0..200 {
                let (si, u) = probe(curve, &mut rng);
                if !visible_oracle(curve, x, u, eps).unwrap() {
                    hidden += 1;
                    if vs.contains(si, u, 1e-9) {
                        hidden_reported += 1;
                    }
                }
            }
        }
        pass &= sampled_fail == 0 && hidden_reported == 0 && hidden > 0;
        lines.push(format!(
            "{name}: {}/{sampled} samples pass oracle, {hidden_reported}/{hidden} hidden probes reported visible",
            sampled - sampled_fail
        ));
    }
    let el = start.elapsed();
    pass &= el < Duration::from_secs(30);
    verdict(
        3,
        "visibility oracle equivalence",
        pass,
        &format!("{}; {el:.2?}", lines.join("; ")),
    );
}

fn criterion_04_analytic_visibility() {
    let start = Instant::now();
    let c = circle(Point::ORIGIN, 1.0, 4096).unwrap();
    let vs = visible_set(&c, Point::new(2.0, 0.0), None).unwrap();
    let el = start.elapsed();
    // Tangent points at angle acos(1/2) either side: visible arc 2 * pi/3.
    let want = 2.0 * PI / 3.0;
    let rel = (vs.total_length - want).abs() / want;
    verdict(
        4,
        "analytic visibility",
        rel <= 0.005 && el < Duration::from_secs(1),
        &format!(
            "length {} vs {want} (rel err {rel:.2e}); {el:.2?}",
            vs.total_length
        ),
    );
}

fn criterion_05_estimator_calibration() {
    let start = Instant::now();
    let seg = subdivided_segment(Point::ORIGIN, Point::new(1.0, 0.0), 1024).unwrap();
    let koch = koch_classic(7);
    let seg_box = curve_box_dimension(&seg).unwrap();
    let koch_box = curve_box_dimension(&koch).unwrap();
    let (s, n) = (default_s_grid(), default_n_grid());
    let seg_energy = energy_dimension(&seg, &s, &n).unwrap();
    let koch_energy = energy_dimension(&koch, &s, &n).unwrap();
    let el = start.elapsed();
    let target = 4f64.ln() / 3f64.ln();
    let pass = (seg_box.value - 1.0).abs() <= 0.03
        && (koch_box.value - target).abs() <= 0.05
        && koch_box.r_squared >= 0.98
        && (seg_energy.value - seg_box.value).abs() <= 0.15
        && (koch_energy.value - koch_box.value).abs() <= 0.15
        && el < Duration::from_secs(60);
    verdict(
        5,
        "estimator calibration",
        pass,
        &format!(
            "segment box {:.4} energy {:.4}; koch box {:.4} (r2 {:.4}) energy {:.4}; {el:.2?}",
            seg_box.value, seg_energy.value, koch_box.value, koch_box.r_squared, koch_energy.value
        ),
    );
}

fn criterion_06_energy_growth() {
    let seg = polyline(&[Point::ORIGIN, Point::new(1.0, 0.0)]).unwrap();
    let ns: Vec<usize> = (8..=13).map(|k| 1usize << k).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &ns {
        let mu = uniform_measure(&seg, n).unwrap();
        xs.push((n as f64).ln());
        ys.push(riesz_energy(&mu, 1.5).unwrap().ln());
    }
    let fit = least_squares(&xs, &ys).unwrap();
    verdict(
        6,
        "energy growth on the unit segment",
        (fit.slope - 0.5).abs() <= 0.1,
        &format!(
            "slope of log I_1.5 vs log n over 2^8..2^13 = {:.4}",
            fit.slope
        ),
    );
}

fn ring_config(curve: CurveSpec, count: usize, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(
        curve,
        ViewpointConfig {
            mode: ViewpointMode::Ring,
            count,
            region: None,
            ring_radii: None,
        },
    );
    c.seed = seed;
    c
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn criterion_07_bound_on_koch() {
    let cfg = ring_config(CurveSpec::koch(1.5, 7), 100, 7);
    let out = run_sweep(&cfg).unwrap();
    let dims: Vec<f64> = out.rows.iter().filter_map(|r| r.dim_visible).collect();
    let errors = out.rows.iter().filter(|r| r.error_flag).count();
    let limit = 1.466;
    let frac = dims.iter().filter(|&&d| d <= limit).count() as f64 / out.rows.len() as f64;
    let med = median(dims.clone());
    let max = dims.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    verdict(
        7,
        "visible dimension bound on Koch(1.5)",
        frac >= 0.95 && med <= 1.40,
        &format!(
            "{:.0}% of 100 viewpoints <= {limit}, median {med:.4}, max {max:.4}, errors {errors}, d_hat {:.4}",
            100.0 * frac, out.report.d_hat
        ),
    );
}

fn criterion_08_quasicircle() {
    let start = Instant::now();
    let spec = CurveSpec::quasicircle(1, 0.5, 10);
    let q = quasicircle(1, 0.5, 10).unwrap();
    let qbox = curve_box_dimension(&q).unwrap().value;
    let out = run_sweep(&ring_config(spec, 50, 8)).unwrap();
    let dims: Vec<f64> = out.rows.iter().filter_map(|r| r.dim_visible).collect();
    let med = median(dims.clone());
    let el = start.elapsed();
    verdict(
        8,
        "quasicircle visible parts",
        (1.25..=1.40).contains(&qbox)
            && dims.len() == 50
            && med <= 1.10
            && el < Duration::from_secs(600),
        &format!(
            "curve box dimension {qbox:.4}, median visible {med:.4} over {} viewpoints; {el:.2?}",
            dims.len()
        ),
    );
}

fn sector_fixture_violations(
    name: &str,
    curve: &CurveApprox,
    s: f64,
    seed: u64,
) -> (usize, usize, String) {
    let mu0 = uniform_measure(curve, 1500).unwrap();
    let spacing = curve.total_length() / 1500.0;
    let grid = FrostmanGrid::new(2.0 * spacing, 4.0 * curve.diam).unwrap();
    let mu = frostman_normalize(&mu0, s, &grid).unwrap();
    let cert = frostman_check(&mu, s, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = curve.bounds();
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    let n = 1000;
    for i in 0..n {
        let x = Point::new(
            rng.gen_range(b.min.x - 0.5..b.max.x + 0.5),
            rng.gen_range(b.min.y - 0.5..b.max.y + 0.5),
        );
        let d_plus = rng.gen_range(0.1..2.0) * curve.diam;
        let d_minus = d_plus * rng.gen_range(0.01..0.5);
        let ann = Annulus::new(x, d_minus, d_plus).unwrap();
        // Sectors narrower than the grid resolution are outside the checked regime.
        let theta_min = 4.0 * grid.r_min() / d_plus;
        let theta = if i % 50 == 0 {
            0.0
        } else {
            rng.gen_range(theta_min.min(1.0)..PI)
        };
        let start = rng.gen_range(0.0..TAU);
        let region = if i % 2 == 0 || theta == 0.0 {
            SectorRegion::Sector(Sector::new(x, start, theta).unwrap())
        } else {
            // A cone of half-opening tan(theta/2) subtends theta.
            let dir = Point::from_polar(1.0, start);
            SectorRegion::Cone(Cone::new(x, dir, (0.5 * theta).tan().max(1e-9)).unwrap())
        };
        let chk = sector_mass_check(&cert, &region, &ann).unwrap();
        if !chk.ok {
            violations += 1;
        }
        if chk.rhs > 0.0 {
            worst = worst.max(chk.lhs / chk.rhs);
        }
    }
    (
        violations,
        n,
        format!("{name}: {violations}/{n} violations, max lhs/rhs {worst:.3}"),
    )
}

fn criterion_09_inequality_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n_cases = 100_000;
    let mut angle_bad = 0usize;
    for _ in 0..n_cases {
        let c = sample_angle_case(&mut rng, 6);
        let chk = check_angle_bound(c.a, &c.pts, c.d_minus, c.d_plus).unwrap();
        if chk.violations(CHECK_SLACK) > 0 {
            angle_bad += 1;
        }
    }
    let mut cone_bad = 0usize;
    for _ in 0..n_cases {
        let c = sample_intercone_case(&mut rng);
        if intercone_holds(c.p, c.sigma, c.tau, c.u, CHECK_SLACK).unwrap() != Some(true) {
            cone_bad += 1;
        }
    }
    let seg = subdivided_segment(Point::ORIGIN, Point::new(1.0, 0.0), 64).unwrap();
    let k15 = koch_generalized(1.5, 6).unwrap();
    let circ = circle(Point::ORIGIN, 0.5, 256).unwrap();
    let sectors = [
        sector_fixture_violations("segment", &seg, 1.0, 91),
        sector_fixture_violations("koch1.5", &k15, 1.5, 92),
        sector_fixture_violations("circle", &circ, 1.0, 93),
    ];
    let sector_bad: usize = sectors.iter().map(|s| s.0).sum();
    let detail = format!(
        "angle {angle_bad}/{n_cases}, intercone {cone_bad}/{n_cases}, sectors [{}]",
        sectors
            .iter()
            .map(|s| s.2.as_str())
            .collect::<Vec<_>>()
            .join("; ")
    );
    verdict(
        9,
        "inequality fuzz",
        angle_bad == 0 && cone_bad == 0 && sector_bad == 0,
        &detail,
    );
}

fn criterion_10_determinism() {
    let mut cfg = ring_config(CurveSpec::koch(1.5, 6), 24, 10);
    let mut outputs = Vec::new();
    for w in [1usize, 4, 8] {
        cfg.workers = Some(w);
        let dir = tempfile::tempdir().unwrap();
        let out = run_sweep(&cfg).unwrap();
        write_outputs(&out, dir.path()).unwrap();
        let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
        outputs.push((
            w,
            read("results.csv"),
            read("report.json"),
            read("visible.svg"),
            read("scatter.svg"),
        ));
    }
    let base = &outputs[0];
    let same = outputs
        .iter()
        .all(|o| o.1 == base.1 && o.2 == base.2 && o.3 == base.3 && o.4 == base.4);
    verdict(
        10,
        "determinism across worker counts",
        same,
        &format!(
            "results.csv {} bytes, report.json {} bytes, SVGs {}+{} bytes; identical for 1, 4, 8 workers: {same}",
            base.1.len(),
            base.2.len(),
            base.3.len(),
            base.4.len()
        ),
    );
}
