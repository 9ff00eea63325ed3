//! The five subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hilbert_geometry::body::{BodyKind, BOUNDARY_CLEARANCE};
use hilbert_geometry::finsler::{berwald_noise_floor, curvature_grid, FinslerProbe};
use hilbert_geometry::metric::{cross_ratio, hilbert_distance};
use hilbert_geometry::npc::{
    adjacent_angle_sum_check, alexandrov_check, busemann_check, pedersen_check, random_capsule_check, AngleParams,
    CheckParams, CheckReport, CheckerId, PedersenParams, DEFAULT_ANGLE_TOL, DEFAULT_SMOOTH_TOL, DEFAULT_TOL,
};
use hilbert_geometry::sampling::Region;
use hilbert_geometry::{chord_through, validate, ConvexBody, Point};
use serde::Serialize;

use crate::report::{columns, csv_field, point, render, sig12, structured, LoadedSpec, Meta, Output};
use crate::{CliError, Command, Common, Status, Which};

/// Berwald ratios at or below this are indistinguishable from the floor.
const BERWALD_RATIO: f64 = 2.0;
/// Some ratio above this marks the metric as non-Berwald.
const NON_BERWALD_RATIO: f64 = 10.0;

pub fn execute(command: &Command, common: &Common, spec: &LoadedSpec) -> Result<Output, CliError> {
    match command {
        Command::Distance { x, y } => distance(common, spec, x, y),
        Command::Check { which } => check(common, spec, *which),
        Command::Curvature { grid, flags, fraction } => curvature(common, spec, *grid, *flags, *fraction),
        Command::Berwald { points, fibers } => berwald(common, spec, points, *fibers),
        Command::Validate => validate_spec(common, spec),
    }
}

fn positive(value: usize, flag: &str) -> Result<usize, CliError> {
    if value == 0 {
        return Err(CliError::Config(format!("{flag} must be positive")));
    }
    Ok(value)
}

#[derive(Serialize)]
struct DistanceRecord {
    x: Vec<f64>,
    y: Vec<f64>,
    distance: f64,
    /// `None` when `x = y` and the chord is undefined.
    chord: Option<[Vec<f64>; 2]>,
    cross_ratio: f64,
}

fn distance(common: &Common, spec: &LoadedSpec, x: &[f64], y: &[f64]) -> Result<Output, CliError> {
    let body = &spec.body;
    let (px, py) = (Point::from_column_slice(x), Point::from_column_slice(y));
    let d = hilbert_distance(body, &px, &py)?;
    let (chord, cr) = if px == py {
        (None, 1.0)
    } else {
        let c = chord_through(body, &px, &py)?;
        let cr = cross_ratio(&c.a, &c.x, &c.y, &c.b)?;
        (Some([c.a.as_slice().to_vec(), c.b.as_slice().to_vec()]), cr)
    };

    let mut meta = Meta::new("distance", spec, common.seed);
    meta.tolerances.insert("boundary_clearance".into(), BOUNDARY_CLEARANCE);

    let mut human = format!("distance: {d:.10}\n");
    match &chord {
        Some([a, b]) => {
            writeln!(human, "a: {}", point(a, 10)).unwrap();
            writeln!(human, "b: {}", point(b, 10)).unwrap();
        }
        None => human.push_str("chord: none (x = y)\n"),
    }
    writeln!(human, "cross_ratio: {cr:.10}").unwrap();

    let n = body.dim();
    let mut header = vec!["distance".to_owned(), "cross_ratio".to_owned()];
    header.extend(columns("a", n));
    header.extend(columns("b", n));
    let mut row = vec![sig12(d), sig12(cr)];
    match &chord {
        Some([a, b]) => row.extend(a.iter().chain(b).map(|&v| sig12(v))),
        None => row.extend(std::iter::repeat_n(String::new(), 2 * n)),
    }
    let tabular = format!("{}\n{}\n", header.join(","), row.join(","));

    let record = DistanceRecord { x: x.to_vec(), y: y.to_vec(), distance: d, chord, cross_ratio: cr };
    let summary = format!("distance: {d:.10}\n");
    let text = render(common.format, &meta, human, tabular, structured(&meta, record));
    Ok(Output { text, summary, status: Status::Pass })
}

fn default_tol(id: CheckerId, body: &ConvexBody) -> f64 {
    match (id, body.kind()) {
        (CheckerId::AngleSum, _) => DEFAULT_ANGLE_TOL,
        (_, BodyKind::Smooth(_)) => DEFAULT_SMOOTH_TOL,
        _ => DEFAULT_TOL,
    }
}

fn run_checker(
    id: CheckerId,
    body: &ConvexBody,
    region: &Region,
    params: &CheckParams,
) -> Result<CheckReport, CliError> {
    Ok(match id {
        CheckerId::Alexandrov => alexandrov_check(body, region, params)?,
        CheckerId::Busemann => busemann_check(body, region, params)?,
        CheckerId::Pedersen => pedersen_check(body, region, params, PedersenParams::default())?,
        CheckerId::Capsule => random_capsule_check(body, region, params)?,
        CheckerId::AngleSum => adjacent_angle_sum_check(body, region, params, AngleParams::default())?,
    })
}

fn verdict_line(r: &CheckReport) -> String {
    format!(
        "{}: {}  samples={} violations={} worst_margin={:.6e} tol={:e}\n",
        r.checker.name(),
        if r.passed() { "PASS" } else { "FAIL" },
        r.samples_tested,
        r.violation_count,
        r.worst_margin,
        r.tolerance,
    )
}

#[derive(Serialize)]
struct CheckRecord<'a> {
    reports: &'a [CheckReport],
}

fn check(common: &Common, spec: &LoadedSpec, which: Which) -> Result<Output, CliError> {
    let body = &spec.body;
    let samples = positive(common.samples, "--samples")?;
    if let Some(t) = common.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Config(format!("--tol must be a non-negative number, got {t}")));
        }
    }
    let ids = match which {
        Which::Alexandrov => vec![CheckerId::Alexandrov],
        Which::Busemann => vec![CheckerId::Busemann],
        Which::Pedersen => vec![CheckerId::Pedersen],
        Which::Capsule => vec![CheckerId::Capsule],
        Which::AngleSum => vec![CheckerId::AngleSum],
        Which::All => vec![
            CheckerId::Alexandrov,
            CheckerId::Busemann,
            CheckerId::Pedersen,
            CheckerId::Capsule,
            CheckerId::AngleSum,
        ],
    };

    let region = Region::default_for(body);
    let mut meta = Meta::new("check", spec, common.seed);
    meta.samples = Some(samples);
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let tol = common.tol.unwrap_or_else(|| default_tol(id, body));
        meta.tolerances.insert(id.name().to_owned(), tol);
        reports.push(run_checker(id, body, &region, &CheckParams::new(samples, common.seed, tol))?);
    }

    let summary: String = reports.iter().map(verdict_line).collect();
    let mut human = format!("region: hilbert ball radius {} about {}\n", region.radius, point(&region.center, 6));
    for r in &reports {
        human.push_str(&verdict_line(r));
        if let Some(w) = r.violations.first() {
            let origin = w.sample.map_or("refined".to_owned(), |i| format!("sample {i}"));
            writeln!(
                human,
                "  worst witness ({origin}): lhs={:.10e} rhs={:.10e} margin={:.6e}",
                w.lhs, w.rhs, w.margin
            )
            .unwrap();
            for (name, p) in &w.configuration.points {
                writeln!(human, "    {name} = {}", point(p, 12)).unwrap();
            }
            for (name, v) in &w.configuration.params {
                writeln!(human, "    {name} = {v:.12}").unwrap();
            }
        }
        for (name, v) in &r.statistics {
            writeln!(human, "  {name} = {v}").unwrap();
        }
    }

    let mut tabular = String::from("checker,verdict,samples_tested,violation_count,worst_margin,tolerance\n");
    for r in &reports {
        writeln!(
            tabular,
            "{},{},{},{},{},{}",
            r.checker.name(),
            if r.passed() { "pass" } else { "fail" },
            r.samples_tested,
            r.violation_count,
            sig12(r.worst_margin),
            sig12(r.tolerance),
        )
        .unwrap();
    }

    let status = if reports.iter().all(CheckReport::passed) { Status::Pass } else { Status::Violation };
    let text = render(common.format, &meta, human, tabular, structured(&meta, CheckRecord { reports: &reports }));
    Ok(Output { text, summary, status })
}

#[derive(Serialize)]
struct CurvatureRecord<'a> {
    grid: BTreeMap<&'static str, f64>,
    mean_kappa: f64,
    max_abs_kappa_plus_one: f64,
    samples: &'a [hilbert_geometry::finsler::FlagCurvatureSample],
}

fn curvature(common: &Common, spec: &LoadedSpec, grid: usize, flags: usize, fraction: f64) -> Result<Output, CliError> {
    positive(grid, "--grid")?;
    positive(flags, "--flags")?;
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::Config(format!("--fraction must lie in (0, 1), got {fraction}")));
    }
    let probe = FinslerProbe::new(&spec.body)?;
    let samples = curvature_grid(&probe, grid, fraction, flags, common.seed)?;
    let mean = samples.iter().map(|s| s.kappa).sum::<f64>() / samples.len() as f64;
    let max_dev = samples.iter().map(|s| (s.kappa + 1.0).abs()).fold(0.0, f64::max);

    let mut meta = Meta::new("curvature", spec, common.seed);
    meta.steps = Some(*probe.steps());
    let summary = format!("mean_kappa={}\nmax_abs_kappa_plus_one={}\n", sig12(mean), sig12(max_dev));

    let n = spec.body.dim();
    let human =
        format!("grid: {grid} per axis, fraction {fraction}, {flags} flags, {} samples\n{summary}", samples.len());
    let mut header = columns("x", n);
    header.extend(columns("pole", n));
    header.extend(columns("edge", n));
    header.push("kappa".into());
    let mut tabular = header.join(",") + "\n";
    for s in &samples {
        let row: Vec<String> = s.x.iter().chain(&s.pole).chain(&s.edge).chain([&s.kappa]).map(|&v| sig12(v)).collect();
        tabular.push_str(&row.join(","));
        tabular.push('\n');
    }
    for line in summary.lines() {
        writeln!(tabular, "# {line}").unwrap();
    }

    let record = CurvatureRecord {
        grid: BTreeMap::from([("per_axis", grid as f64), ("fraction", fraction), ("flags", flags as f64)]),
        mean_kappa: mean,
        max_abs_kappa_plus_one: max_dev,
        samples: &samples,
    };
    let text = render(common.format, &meta, human, tabular, structured(&meta, record));
    Ok(Output { text, summary, status: Status::Pass })
}

fn parse_points(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let points: Vec<Vec<f64>> = text
        .split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|e| CliError::Config(format!("bad coordinate {c:?}: {e}"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if points.is_empty() {
        return Err(CliError::Config("empty points list".into()));
    }
    Ok(points)
}

#[derive(Serialize)]
struct BerwaldRow {
    point: Vec<f64>,
    defect: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct BerwaldRecord {
    fibers: usize,
    noise_floor: f64,
    points: Vec<BerwaldRow>,
    max_ratio: f64,
    verdict: &'static str,
}

fn berwald(common: &Common, spec: &LoadedSpec, points: &str, fibers: usize) -> Result<Output, CliError> {
    let points = parse_points(points)?;
    positive(fibers, "--fibers")?;
    let probe = FinslerProbe::new(&spec.body)?;
    let floor = berwald_noise_floor(spec.body.dim(), fibers, common.seed, *probe.steps())?;
    let rows = points
        .into_iter()
        .map(|p| {
            let defect = probe.berwald_defect(&Point::from_vec(p.clone()), fibers, common.seed)?;
            Ok(BerwaldRow { point: p, defect, ratio: defect / floor })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let verdict = if max_ratio <= BERWALD_RATIO {
        "berwald"
    } else if max_ratio > NON_BERWALD_RATIO {
        "non-berwald"
    } else {
        "inconclusive"
    };

    let mut meta = Meta::new("berwald", spec, common.seed);
    meta.tolerances.insert("berwald_ratio".into(), BERWALD_RATIO);
    meta.tolerances.insert("non_berwald_ratio".into(), NON_BERWALD_RATIO);
    meta.steps = Some(*probe.steps());
    let summary = format!("noise_floor={}\nverdict={verdict} max_ratio={}\n", sig12(floor), sig12(max_ratio));

    let mut human = format!("fibers: {fibers}\n");
    for r in &rows {
        writeln!(human, "{}  defect={:.6e}  ratio={:.4}", point(&r.point, 6), r.defect, r.ratio).unwrap();
    }
    human.push_str(&summary);

    let n = spec.body.dim();
    let mut tabular = columns("x", n).join(",") + ",defect,ratio\n";
    for r in &rows {
        let row: Vec<String> = r.point.iter().chain([&r.defect, &r.ratio]).map(|&v| sig12(v)).collect();
        tabular.push_str(&row.join(","));
        tabular.push('\n');
    }
    for line in summary.lines() {
        writeln!(tabular, "# {line}").unwrap();
    }

    let record = BerwaldRecord { fibers, noise_floor: floor, points: rows, max_ratio, verdict };
    let text = render(common.format, &meta, human, tabular, structured(&meta, record));
    Ok(Output { text, summary, status: Status::Pass })
}

fn validate_spec(common: &Common, spec: &LoadedSpec) -> Result<Output, CliError> {
    let samples = positive(common.samples, "--samples")?;
    let report = validate(&spec.body, samples, common.seed);
    let mut meta = Meta::new("validate", spec, common.seed);
    meta.samples = Some(samples);

    let summary = match &report.failure {
        None => format!("validate: PASS  samples={}\n", report.samples_tested),
        Some(f) => format!("validate: FAIL  at sample {}: {}: {}\n", report.samples_tested - 1, f.check, f.message),
    };
    let mut human = summary.clone();
    let mut tabular = String::from("passed,samples_tested,check,message\n");
    match &report.failure {
        None => writeln!(tabular, "true,{},,", report.samples_tested).unwrap(),
        Some(f) => {
            for p in &f.points {
                writeln!(human, "  {}", point(p, 12)).unwrap();
            }
            writeln!(tabular, "false,{},{},{}", report.samples_tested, csv_field(&f.check), csv_field(&f.message))
                .unwrap();
        }
    }

    let status = if report.passed { Status::Pass } else { Status::Violation };
    let text = render(common.format, &meta, human, tabular, structured(&meta, &report));
    Ok(Output { text, summary, status })
}
