//! Acceptance experiments, one line per criterion. Run with
//! `cargo test -p hilbert-geometry --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use hilbert_geometry::catalog;
use hilbert_geometry::finsler::{
    self, berwald_noise_floor, calibration_point, curvature_grid, DifferenceSteps, FinslerProbe,
};
use hilbert_geometry::geodesic::GeodesicSegment;
use hilbert_geometry::metric::{hilbert_distance, integral_length, PolylineCurve};
use hilbert_geometry::npc::*;
use hilbert_geometry::sampling::{substream, uniform_in_box, unit_direction, Region};
use hilbert_geometry::{ConvexBody, Point};
use nalgebra::{dvector, DVector};
use serde::Serialize;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn geo<T>(r: hilbert_geometry::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Closed-form Beltrami–Klein distance in the unit ball, via
/// `sinh² d = (|w|²(1-|x|²) + <x,w>²) / ((1-|x|²)(1-|y|²))` with `w = y - x`.
fn klein_distance(x: &Point, y: &Point) -> f64 {
    let w = y - x;
    let (sx, sy) = (1.0 - x.norm_squared(), 1.0 - y.norm_squared());
    let num = w.norm_squared() * sx + x.dot(&w).powi(2);
    (num / (sx * sy)).sqrt().asinh()
}

fn random_in_ball(rng: &mut hilbert_geometry::sampling::SampleRng, dim: usize, max_radius: f64) -> Point {
    let lo = DVector::from_element(dim, -1.0);
    let hi = DVector::from_element(dim, 1.0);
    loop {
        let p = uniform_in_box(rng, &lo, &hi);
        if p.norm() < max_radius {
            return p;
        }
    }
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for dim in [2, 3] {
        let body = geo(ConvexBody::unit_ball(dim))?;
        for i in 0..10_000u64 {
            let mut rng = substream(1, i);
            let x = random_in_ball(&mut rng, dim, 0.999);
            let y = random_in_ball(&mut rng, dim, 0.999);
            let d = geo(hilbert_distance(&body, &x, &y))?;
            worst = worst.max((d - klein_distance(&x, &y)).abs());
        }
    }
    ensure(worst < 1e-10, || format!("max Klein error {worst:e}"))?;
    let disk = catalog::disk();
    let mut radial = 0.0f64;
    for k in 1..=9 {
        let r = k as f64 / 10.0;
        let d = geo(hilbert_distance(&disk, &dvector![0.0, 0.0], &dvector![r, 0.0]))?;
        radial = radial.max((d - r.atanh()).abs());
    }
    ensure(radial < 1e-12, || format!("max radial error {radial:e}"))?;
    Ok(format!("max Klein error {worst:.2e} on 2x10^4 pairs, radial {radial:.2e}"))
}

fn max_kappa_error(body: &ConvexBody, per_axis: usize, flags: usize) -> Result<(f64, usize), String> {
    let probe = geo(FinslerProbe::new(body))?;
    let samples = geo(curvature_grid(&probe, per_axis, 0.5, flags, 2))?;
    let worst = samples.iter().map(|s| (s.kappa + 1.0).abs()).fold(0.0, f64::max);
    Ok((worst, samples.len()))
}

fn criterion_2() -> Outcome {
    let mut parts = Vec::new();
    let ball3 = geo(ConvexBody::unit_ball(3))?;
    let cases = [
        ("disk", catalog::disk(), 5, 8),
        ("ellipse", catalog::ellipse(), 5, 8),
        ("superellipse", catalog::superellipse(), 5, 8),
        ("ball3", ball3, 2, 4),
    ];
    for (name, body, per_axis, flags) in &cases {
        let (worst, n) = max_kappa_error(body, *per_axis, *flags)?;
        ensure(worst < 5e-3, || format!("{name}: max|k+1| = {worst:e}"))?;
        parts.push(format!("{name} {worst:.1e} ({n})"));
    }
    Ok(format!("max|k+1|: {}", parts.join(", ")))
}

fn criterion_3(reports: &mut Vec<String>) -> Outcome {
    let params = CheckParams::new(100_000, 42, 1e-9);
    let mut parts = Vec::new();
    for (name, body) in [("disk", catalog::disk()), ("ellipse", catalog::ellipse())] {
        let region = Region::default_for(&body);
        for rep in [geo(busemann_check(&body, &region, &params))?, geo(alexandrov_check(&body, &region, &params))?] {
            ensure(rep.passed(), || format!("{name} {}: {} violations", rep.checker.name(), rep.violation_count))?;
            parts.push(format!("{name}/{} worst {:.1e}", rep.checker.name(), rep.worst_margin));
            reports.push(rep.to_json());
        }
    }
    Ok(format!("10^5 samples, 0 violations; {}", parts.join(", ")))
}

/// Worst margins of the first verified run, frozen as regression values.
const FROZEN_SQUARE_BUSEMANN: f64 = 1.323795873615287;
const FROZEN_SUPER_BUSEMANN: f64 = 9.787424316371540e-2;
const FROZEN_SUPER_ALEXANDROV: f64 = 3.025183717122594e-1;

fn criterion_4(reports: &mut Vec<String>) -> Outcome {
    let params = CheckParams::new(10_000, 42, 1e-9);
    let square = catalog::square();
    let sup = catalog::superellipse();
    let runs = [
        (
            "square",
            "busemann",
            geo(busemann_check(&square, &Region::default_for(&square), &params))?,
            1e-4,
            FROZEN_SQUARE_BUSEMANN,
        ),
        (
            "superellipse",
            "busemann",
            geo(busemann_check(&sup, &Region::default_for(&sup), &params))?,
            1e-6,
            FROZEN_SUPER_BUSEMANN,
        ),
        (
            "superellipse",
            "alexandrov",
            geo(alexandrov_check(&sup, &Region::default_for(&sup), &params))?,
            1e-6,
            FROZEN_SUPER_ALEXANDROV,
        ),
    ];
    let mut parts = Vec::new();
    for (body, checker, rep, min_margin, frozen) in runs {
        let best = rep.violations.first().ok_or_else(|| format!("{body} {checker}: no witness"))?;
        ensure(best.margin > min_margin, || format!("{body} {checker}: margin {:e}", best.margin))?;
        ensure((best.margin - frozen).abs() <= 1e-6 * frozen, || {
            format!("{body} {checker}: margin {:.12e} drifted from frozen {frozen:.12e}", best.margin)
        })?;
        parts.push(format!("{body}/{checker} {:.4e}", best.margin));
        reports.push(rep.to_json());
    }
    Ok(format!("witness margins {}", parts.join(", ")))
}

fn criterion_5(reports: &mut Vec<String>) -> Outcome {
    let params = CheckParams::new(1000, 42, 1e-7);
    let mut parts = Vec::new();
    for (name, body) in
        [("disk", catalog::disk()), ("ellipse", catalog::ellipse()), ("superellipse", catalog::superellipse())]
    {
        let region = Region::default_for(&body);
        let ped = geo(pedersen_check(&body, &region, &params, PedersenParams::default()))?;
        let cap = geo(random_capsule_check(&body, &region, &params))?;
        for rep in [ped, cap] {
            ensure(rep.passed(), || format!("{name} {}: {} violations", rep.checker.name(), rep.violation_count))?;
            parts.push(format!("{name}/{} {:.1e}", rep.checker.name(), rep.worst_margin));
            reports.push(rep.to_json());
        }
    }
    Ok(format!("10^3 pairs, worst margins {}", parts.join(", ")))
}

#[derive(Serialize)]
struct BerwaldRecord {
    floor: f64,
    defects: Vec<(String, Vec<f64>)>,
}

fn criterion_6(reports: &mut Vec<String>) -> Outcome {
    let (fibers, seed) = (8, 7);
    let floor = geo(berwald_noise_floor(2, fibers, seed, DifferenceSteps::default()))?;
    let mut record = BerwaldRecord { floor, defects: Vec::new() };
    let mut parts = Vec::new();
    for (name, body) in
        [("disk", catalog::disk()), ("ellipse", catalog::ellipse()), ("superellipse", catalog::superellipse())]
    {
        let defects: Vec<f64> = (0..finsler::CALIBRATION_POINTS.len())
            .map(|i| geo(finsler::berwald_defect(&body, &calibration_point(i, 2), fibers, seed)))
            .collect::<Result<_, _>>()?;
        let ratios: Vec<f64> = defects.iter().map(|d| d / floor).collect();
        if name == "superellipse" {
            ensure(ratios.iter().all(|&r| r > 10.0), || format!("{name} ratios {ratios:?}"))?;
            parts.push(format!("{name} min ratio {:.1e}", ratios.iter().copied().fold(f64::INFINITY, f64::min)));
        } else {
            ensure(ratios.iter().all(|&r| r <= 2.0), || format!("{name} ratios {ratios:?}"))?;
            parts.push(format!("{name} max ratio {:.2}", ratios.iter().copied().fold(0.0, f64::max)));
        }
        record.defects.push((name.to_owned(), defects));
    }
    reports.push(serde_json::to_string_pretty(&record).expect("serializes"));
    Ok(format!("floor {floor:.2e}; {}", parts.join(", ")))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for body in [catalog::disk(), catalog::superellipse()] {
        let region = Region::default_for(&body);
        for i in 0..1000u64 {
            let mut rng = substream(7, i);
            let x = geo(region.sample(&body, &mut rng))?;
            let y = geo(region.sample(&body, &mut rng))?;
            let curve = geo(PolylineCurve::new(vec![x.clone(), y.clone()]))?;
            let l = geo(integral_length(&body, &curve, 128))?;
            worst = worst.max((l - geo(hilbert_distance(&body, &x, &y))?).abs());
        }
    }
    ensure(worst < 1e-8, || format!("max |L - d| = {worst:e}"))?;
    Ok(format!("max |L - d| = {worst:.2e} on 2x10^3 chords"))
}

fn criterion_8() -> Outcome {
    let mut worst = 0.0f64;
    for body in [catalog::disk(), catalog::superellipse()] {
        let probe = geo(FinslerProbe::new(&body))?;
        let region = Region::hilbert_ball(body.interior_point(), 1.0);
        for i in 0..100u64 {
            let mut rng = substream(8, i);
            let x0 = geo(region.sample(&body, &mut rng))?;
            let y0 = unit_direction(&mut rng, 2);
            let g = geo(probe.spray_geodesic(&x0, &y0, 1.0, 64))?;
            worst = worst.max(g.max_deviation);
        }
    }
    ensure(worst < 1e-5, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e} over 200 spray geodesics"))
}

fn criterion_9() -> Outcome {
    let trivial = [
        (geo(comparison_angle(1.0, 1.0, 2f64.sqrt()))?, PI / 2.0),
        (geo(comparison_angle(1.0, 1.0, 2.0))?, PI),
        (geo(comparison_angle(1.0, 1.0, 0.0))?, 0.0),
    ];
    for (got, want) in trivial {
        ensure((got - want).abs() <= 1e-12, || format!("comparison angle {got} != {want}"))?;
    }

    let disk = catalog::disk();
    let o = dvector![0.0, 0.0];
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let mut rng = substream(9, i);
        let (u, v) = (unit_direction(&mut rng, 2), unit_direction(&mut rng, 2));
        let g1 = geo(GeodesicSegment::new(&disk, &o, &(&u * 0.5)))?;
        let g2 = geo(GeodesicSegment::new(&disk, &o, &(&v * 0.5)))?;
        let a = geo(average_angle(&g1, &g2, AngleParams::default()))?;
        ensure(a.converged, || format!("angle {i} did not converge"))?;
        worst = worst.max((a.value - u.dot(&v).clamp(-1.0, 1.0).acos()).abs());
    }
    ensure(worst < 1e-6, || format!("center angle error {worst:e}"))?;

    let params = CheckParams::new(500, 42, 1e-5);
    let rep = geo(adjacent_angle_sum_check(&disk, &Region::default_for(&disk), &params, AngleParams::default()))?;
    let (lo, hi) = (rep.statistics["min_angle_sum"], rep.statistics["max_angle_sum"]);
    ensure(rep.passed() && (lo - PI).abs() < 1e-5 && (hi - PI).abs() < 1e-5, || {
        format!("disk angle sums in [{lo}, {hi}], {} non-converged", rep.statistics["non_converged"])
    })?;

    let sup = catalog::superellipse();
    let srep = geo(adjacent_angle_sum_check(&sup, &Region::default_for(&sup), &params, AngleParams::default()))?;
    Ok(format!(
        "center error {worst:.1e}; disk sums - pi in [{:.1e}, {:.1e}]; superellipse (reported) sums in [{:.4}, {:.4}], {} below pi",
        lo - PI,
        hi - PI,
        srep.statistics["min_angle_sum"],
        srep.statistics["max_angle_sum"],
        srep.violation_count
    ))
}

fn criterion_10(first: &[String]) -> Outcome {
    let mut again = Vec::new();
    criterion_3(&mut again)?;
    criterion_4(&mut again)?;
    criterion_5(&mut again)?;
    criterion_6(&mut again)?;
    ensure(again == first, || "repeated reports differ".into())?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let mut serial = Vec::new();
    pool.install(|| criterion_4(&mut serial))?;
    let offset = 4;
    ensure(serial[..] == first[offset..offset + serial.len()], || "single-thread reports differ".into())?;
    Ok(format!("{} reports byte-identical on rerun; criterion 4 identical on one thread", first.len()))
}

fn main() {
    let mut reports = Vec::new();
    let mut failed = 0;
    let mut report =
        |n: usize, name: &str, run: &mut dyn FnMut(&mut Vec<String>) -> Outcome, reports: &mut Vec<String>| {
            let start = Instant::now();
            let out = run(reports);
            let secs = Duration::as_secs_f64(&start.elapsed());
            match out {
                Ok(detail) => println!("criterion {n:>2} {name}: PASS ({secs:.1}s) {detail}"),
                Err(why) => {
                    failed += 1;
                    println!("criterion {n:>2} {name}: FAIL ({secs:.1}s) {why}");
                }
            }
        };
    report(1, "klein oracle", &mut |_| criterion_1(), &mut reports);
    report(2, "flag curvature -1", &mut |_| criterion_2(), &mut reports);
    report(3, "rigidity positive", &mut criterion_3, &mut reports);
    report(4, "rigidity negative", &mut criterion_4, &mut reports);
    report(5, "pedersen and capsules", &mut criterion_5, &mut reports);
    report(6, "berwald rigidity", &mut criterion_6, &mut reports);
    report(7, "finsler length", &mut |_| criterion_7(), &mut reports);
    report(8, "projective flatness", &mut |_| criterion_8(), &mut reports);
    report(9, "angles", &mut |_| criterion_9(), &mut reports);
    let first = reports.clone();
    report(10, "determinism", &mut |_| criterion_10(&first), &mut reports);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
