//! End-to-end acceptance suite. Runs every shipped experiment config and
//! checks the reference numbers, then prints one PASS/FAIL line per
//! criterion. Exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use itrans::analysis::{delta_corner, fit_angle_law, fit_power_law, spectral_checks};
use itrans::assembly::{assemble_global, Pencil};
use itrans::config::RunConfig;
use itrans::geometry::{builtin_domain, mesh_cube, mesh_domain, DofPartition};
use itrans::radial::disk_first_te;
use itrans::runner::{run_experiment, RunOutcome};
use itrans::solver::{shift_invert_arnoldi, SearchWindow, SolverOptions};
use itrans::sparse::SparseMatrix;
use itrans::C64;

type Check = Result<String, String>;

const CONFIGS: &[&str] = &[
    "equilateral_n16",
    "equilateral_n16_coarse",
    "right_triangle_variable",
    "arrow_n16",
    "moon_n16",
    "unit_square_n16",
    "isosceles_pi12",
    "isosceles_pi6",
    "isosceles_pi3",
    "isosceles_2pi3",
    "sector_4pi3",
    "sector_5pi3",
    "sector_11pi6",
    "sector_23pi12",
    "disk_n16_coarse",
    "disk_n16",
    "cube_n16",
];

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.toml"))
}

struct Run {
    out: RunOutcome,
    cfg: RunConfig,
    seconds: f64,
}

type Runs = HashMap<&'static str, Result<Run, String>>;

fn run_config(name: &str, dir: &Path) -> Result<Run, String> {
    let cfg = RunConfig::from_file(&config_path(name)).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let out = run_experiment(&cfg, Some(&dir.join(name))).map_err(|e| format!("{name}: {e}"))?;
    Ok(Run {
        out,
        cfg,
        seconds: t.elapsed().as_secs_f64(),
    })
}

fn get<'a>(runs: &'a Runs, name: &str) -> Result<&'a Run, String> {
    runs[name].as_ref().map_err(Clone::clone)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn real_ks(run: &Run) -> Vec<f64> {
    run.out.pairs.iter().map(|p| p.k.re).collect()
}

fn slope(run: &Run, mode: usize, feature: &str, field: &str) -> Result<f64, String> {
    let rec = run
        .out
        .rate(mode, feature, field)
        .ok_or_else(|| format!("{}: no rate for mode {mode} {feature} {field}", run.cfg.name))?;
    rec.fit.map(|f| f.slope).ok_or_else(|| {
        format!(
            "{}: mode {mode} {feature} {field}: {}",
            run.cfg.name,
            rec.error.as_deref().unwrap_or("no fit")
        )
    })
}

fn in_band(s: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&s)
}

/// Index of the computed eigenvalue nearest `target`.
fn nearest(ks: &[f64], target: f64) -> Result<f64, String> {
    ks.iter()
        .copied()
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .ok_or_else(|| "no eigenvalues".to_string())
}

fn equilateral_eigenvalues(runs: &Runs) -> Check {
    let fine = get(runs, "equilateral_n16")?;
    let coarse = get(runs, "equilateral_n16_coarse")?;
    let mut notes = Vec::new();
    for target in [1.5748, 1.9807] {
        let kc = nearest(&real_ks(coarse), target)?;
        let kf = nearest(&real_ks(fine), target)?;
        ensure(rel(kf, target) <= 0.01 && rel(kc, target) <= 0.01, || {
            format!("k near {target}: coarse {kc:.6}, fine {kf:.6}")
        })?;
        ensure(rel(kf, target) < rel(kc, target), || {
            format!("k near {target}: finer {kf:.6} not closer than {kc:.6}")
        })?;
        notes.push(format!("{kc:.5}→{kf:.5}"));
    }
    let cluster: Vec<_> = fine.out.pairs.iter().filter(|p| rel(p.k.re, 1.9807) <= 0.01).collect();
    ensure(
        cluster.len() == 2 && cluster.iter().all(|p| p.multiplicity == 2),
        || format!("cluster near 1.9807 has {} members", cluster.len()),
    )?;
    ensure(fine.seconds < 300.0, || format!("fine run took {:.0}s", fine.seconds))?;
    Ok(format!(
        "{}, double cluster, fine run {:.1}s",
        notes.join(", "),
        fine.seconds
    ))
}

fn right_triangle_eigenvalues(runs: &Runs) -> Check {
    let run = get(runs, "right_triangle_variable")?;
    let ks = real_ks(run);
    let mut got = Vec::new();
    for target in [2.1651, 2.4993, 2.8814] {
        let k = nearest(&ks, target)?;
        ensure(rel(k, target) <= 0.015, || format!("k = {k:.6} vs {target}"))?;
        got.push(format!("{k:.5}"));
    }
    Ok(got.join(", "))
}

fn equilateral_rates(runs: &Runs) -> Check {
    let run = get(runs, "equilateral_n16")?;
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for mode in 0..3 {
        for corner in ["P1", "P2", "P3"] {
            for field in ["u0", "u"] {
                let s = slope(run, mode, corner, field)?;
                ensure(in_band(s, 2.8, 3.3), || format!("mode {mode} {corner} {field}: {s:.3}"))?;
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
    }
    Ok(format!("18 slopes in [{lo:.3}, {hi:.3}]"))
}

fn right_triangle_rates(runs: &Runs) -> Check {
    let run = get(runs, "right_triangle_variable")?;
    let bands = [
        ("P1", PI / 6.0, 6.0, 7.5),
        ("P2", PI / 3.0, 2.8, 3.3),
        ("P3", PI / 2.0, 1.5, 2.0),
    ];
    let mut summary = Vec::new();
    for mode in 0..3 {
        for field in ["u0", "u"] {
            let mut prev = f64::INFINITY;
            for &(corner, omega, lo, hi) in &bands {
                let angle = run.out.rate(mode, corner, field).and_then(|r| r.angle);
                ensure(angle.is_some_and(|a| (a - omega).abs() < 1e-9), || {
                    format!("{corner} angle {angle:?}, expected {omega}")
                })?;
                let s = slope(run, mode, corner, field)?;
                ensure(in_band(s, lo, hi), || format!("mode {mode} {corner} {field}: {s:.3}"))?;
                ensure(s < prev, || format!("mode {mode} {field}: not decreasing at {corner}"))?;
                prev = s;
                if mode == 0 && field == "u0" {
                    summary.push(format!("{corner} {s:.2}"));
                }
            }
        }
    }
    Ok(format!("mode 0 u0: {}", summary.join(", ")))
}

fn arrow_rates(runs: &Runs) -> Check {
    let run = get(runs, "arrow_n16")?;
    let modes = run.out.pairs.len();
    ensure(modes >= 3, || format!("{modes} modes"))?;
    let mut p1 = Vec::new();
    for mode in 0..3 {
        let s = slope(run, mode, "P1", "u0")?;
        ensure(s < 0.0, || format!("mode {mode} P1 u0 slope {s:.3}"))?;
        p1.push(format!("{s:.2}"));
        for corner in ["P2", "P3", "P4"] {
            let s = slope(run, mode, corner, "u0")?;
            ensure(s > 0.0, || format!("mode {mode} {corner} u0 slope {s:.3}"))?;
        }
        for corner in ["P1", "P2", "P3", "P4"] {
            let s = slope(run, mode, corner, "u-u0")?;
            ensure(s > 0.0, || format!("mode {mode} {corner} u-u0 slope {s:.3}"))?;
        }
    }
    Ok(format!(
        "P1 u0 slopes {}; P1 u-u0 {:.2}",
        p1.join("/"),
        slope(run, 0, "P1", "u-u0")?
    ))
}

fn moon(runs: &Runs) -> Check {
    let run = get(runs, "moon_n16")?;
    let ks = real_ks(run);
    for target in [1.6832, 1.8153, 2.0688] {
        let k = nearest(&ks, target)?;
        ensure(rel(k, target) <= 0.015, || format!("k = {k:.6} vs {target}"))?;
    }
    let mut count = 0;
    for r in &run.out.rates {
        let s = r
            .fit
            .map(|f| f.slope)
            .ok_or_else(|| format!("{} {}: no fit", r.feature, r.field))?;
        ensure(r.angle.is_some_and(|a| (a - PI / 3.0).abs() < 1e-9), || {
            format!("{} angle {:?}", r.feature, r.angle)
        })?;
        ensure(in_band(s, 2.8, 3.3), || {
            format!("mode {} {} {}: {s:.3}", r.mode, r.feature, r.field)
        })?;
        count += 1;
    }
    ensure(count >= 12, || format!("only {count} fits"))?;
    Ok(format!("{count} curved-corner slopes in [2.8, 3.3]"))
}

fn apex_point(run: &Run) -> Result<(f64, f64), String> {
    let angle = run
        .out
        .rate(0, "P1", "u0")
        .and_then(|r| r.angle)
        .ok_or("missing apex angle")?;
    Ok((angle, slope(run, 0, "P1", "u0")?))
}

fn angle_sweeps(runs: &Runs) -> Check {
    let mut points = Vec::new();
    let mut prev = f64::INFINITY;
    for name in ["isosceles_pi12", "isosceles_pi6", "isosceles_pi3", "isosceles_2pi3"] {
        let (w, s) = apex_point(get(runs, name)?)?;
        ensure(s > 0.0 && s < prev, || format!("{name}: slope {s:.3} after {prev:.3}"))?;
        prev = s;
        points.push((w, s));
    }
    for name in ["sector_4pi3", "sector_5pi3", "sector_11pi6", "sector_23pi12"] {
        let (w, s) = apex_point(get(runs, name)?)?;
        ensure(s < 0.0, || format!("{name}: slope {s:.3}"))?;
        points.push((w, s));
    }
    let law = fit_angle_law(&points).map_err(|e| e.to_string())?;
    ensure(law.r2 >= 0.9, || format!("angle law R² {:.4}", law.r2))?;
    let slopes: Vec<String> = points.iter().map(|p| format!("{:.2}", p.1)).collect();
    Ok(format!(
        "slopes {}; s = {:.3}/ω {:+.3}, R² {:.4}",
        slopes.join(" "),
        law.a,
        law.b,
        law.r2
    ))
}

fn complex_eigenvalues(runs: &Runs) -> Check {
    let square = get(runs, "unit_square_n16")?;
    let target = C64::new(4.5428, 0.5648);
    let best = square
        .out
        .pairs
        .iter()
        .map(|p| C64::new(p.k.re, p.k.im.abs()))
        .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
        .ok_or("no eigenvalues")?;
    let err = (best - target).norm() / target.norm();
    ensure(err <= 0.02, || format!("closest complex k {best} (error {err:.4})"))?;
    let mut pairs = 0;
    for name in CONFIGS {
        let run = get(runs, name)?;
        let ks: Vec<C64> = run.out.pairs.iter().map(|p| p.k).collect();
        let report = spectral_checks(&ks);
        ensure(report.is_clean(), || format!("{name}: {report:?}"))?;
        ensure(!run.out.pairs.iter().any(|p| p.imaginary), || {
            format!("{name}: imaginary flag")
        })?;
        pairs += report.conjugate_pairs.len();
    }
    let square_pairs = spectral_checks(&square.out.pairs.iter().map(|p| p.k).collect::<Vec<_>>());
    ensure(!square_pairs.conjugate_pairs.is_empty(), || {
        "no conjugate pair on the square".into()
    })?;
    Ok(format!(
        "{:.4}±{:.4}i (error {:.2}%), {pairs} conjugate pair(s), no imaginary flags",
        best.re,
        best.im,
        100.0 * err
    ))
}

fn disk_oracle(runs: &Runs) -> Check {
    let oracle = disk_first_te(16.0).map_err(|e| e.to_string())?;
    let coarse = get(runs, "disk_n16_coarse")?;
    let fine = get(runs, "disk_n16")?;
    let kc = nearest(&real_ks(coarse), oracle)?;
    let kf = nearest(&real_ks(fine), oracle)?;
    ensure(rel(kf, oracle) <= 0.005, || format!("fine {kf:.6} vs {oracle:.6}"))?;
    ensure(rel(kf, oracle) < rel(kc, oracle), || {
        format!("{kc:.6} → {kf:.6} not converging")
    })?;
    Ok(format!(
        "oracle {oracle:.6}; FEM {kc:.6} → {kf:.6} ({:.3}%)",
        100.0 * rel(kf, oracle)
    ))
}

fn cube(runs: &Runs) -> Check {
    let run = get(runs, "cube_n16")?;
    let k = nearest(&real_ks(run), 2.0671)?;
    ensure(rel(k, 2.0671) <= 0.03, || format!("k = {k:.6}"))?;
    ensure(run.seconds <= 1800.0, || format!("{:.0}s", run.seconds))?;
    let vertex = slope(run, 0, "P", "u0")?;
    let edge = slope(run, 0, "E", "u0")?;
    ensure(vertex > edge, || format!("vertex {vertex:.3} ≤ edge {edge:.3}"))?;
    let band = |s: f64, lo: f64, hi: f64| if in_band(s, lo, hi) { "in band" } else { "outside band" };
    Ok(format!(
        "k = {k:.5} in {:.0}s; vertex {vertex:.2} > edge {edge:.2}; advisory: vertex {} [4.5, 7], edge {} [1, 2]",
        run.seconds,
        band(vertex, 4.5, 7.0),
        band(edge, 1.0, 2.0)
    ))
}

fn diagonal_pencil(d: &[f64]) -> Pencil {
    let n = d.len();
    let a = SparseMatrix::from_triplets(n, n, d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect()).unwrap();
    Pencil {
        a,
        b: SparseMatrix::identity(n),
        partition: DofPartition {
            interior: vec![0],
            boundary: (1..n - 1).collect(),
            position: Vec::new(),
        },
        mass: SparseMatrix::identity(n - 1),
        degenerate: false,
    }
}

fn properties(runs: &Runs, scratch: &Path) -> Check {
    // constant fields
    let spec = builtin_domain("right_triangle", &[]).map_err(|e| e.to_string())?;
    let mesh = mesh_domain(&spec, 0.1).map_err(|e| e.to_string())?;
    let c = C64::new(0.6, -0.8);
    let values = vec![c; mesh.n_vertices()];
    for corner in &spec.corners {
        for r in [0.4, 0.2, 0.1, 0.05] {
            let d =
                delta_corner(&values, &mesh, [corner.point[0], corner.point[1], 0.0], r).map_err(|e| e.to_string())?;
            ensure((d - c.norm()).abs() <= 1e-12, || format!("constant field δ = {d}"))?;
        }
    }

    // exact power law
    for s in [-0.7, 0.5, 3.0, 7.25] {
        let samples: Vec<(f64, f64)> = (0..6).map(|i| 0.5f64.powi(i)).map(|r| (r, 2.5 * r.powf(s))).collect();
        let fit = fit_power_law(&samples).map_err(|e| e.to_string())?;
        ensure((fit.slope - s).abs() <= 1e-12, || {
            format!("fitted {} for {s}", fit.slope)
        })?;
    }

    // stiffness kernel and partition of unity
    for (mesh, measure) in [(mesh, spec.area()), (mesh_cube(0.25).map_err(|e| e.to_string())?, 1.0)] {
        let g = assemble_global(&mesh, &itrans::problem::RefractiveIndex::constant(16.0), None)
            .map_err(|e| e.to_string())?;
        let ones = vec![1.0; mesh.n_vertices()];
        let row = g.stiffness.mul_vec(&ones).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ensure(row <= 1e-12, || format!("stiffness row sum {row:e}"))?;
        let total: f64 = g.mass.values().iter().sum();
        ensure((total - measure).abs() <= 1e-12 * measure, || {
            format!("mass total {total}")
        })?;
        let weighted: f64 = g.weighted_mass.values().iter().sum();
        ensure((weighted - 16.0 * measure).abs() <= 1e-11 * measure, || {
            format!("weighted mass total {weighted}")
        })?;
    }

    // diagonal pencil
    let pencil = diagonal_pencil(&[1.0, 4.0, 9.0, 16.0]);
    let window = SearchWindow::new(0.5, 3.5, Some(2.0), 3).map_err(|e| e.to_string())?;
    let pairs = shift_invert_arnoldi(&pencil, &window, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let ks: Vec<f64> = pairs.iter().map(|p| p.k.re).collect();
    ensure(
        ks.len() == 3 && ks.iter().zip([1.0, 2.0, 3.0]).all(|(k, e)| (k - e).abs() <= 1e-12),
        || format!("diagonal pencil gave {ks:?}"),
    )?;

    // normalization
    let run = get(runs, "equilateral_n16")?;
    let index = run.cfg.problem().map_err(|e| e.to_string())?.index;
    let mass = assemble_global(&run.out.mesh, &index, None)
        .map_err(|e| e.to_string())?
        .mass;
    for p in &run.out.pairs {
        let mu = mass.mul_vec_complex(&p.u0);
        let q: C64 = p.u0.iter().zip(&mu).map(|(a, b)| a.conj() * b).sum();
        ensure((q - 1.0).norm() <= 1e-10, || format!("u0ᴴMu0 = {q}"))?;
    }

    // rerun determinism
    let cfg = RunConfig::from_file(&config_path("equilateral_n16_coarse")).map_err(|e| e.to_string())?;
    let mut hashes = Vec::new();
    let mut csvs = Vec::new();
    for i in 0..2 {
        let dir = scratch.join(format!("rerun{i}"));
        let out = run_experiment(&cfg, Some(&dir)).map_err(|e| e.to_string())?;
        hashes.push(out.hash);
        let mut bytes = Vec::new();
        for f in ["eigs.csv", "delta.csv", "rates.csv"] {
            bytes.push(std::fs::read(dir.join(f)).map_err(|e| e.to_string())?);
        }
        csvs.push(bytes);
    }
    ensure(csvs[0] == csvs[1] && hashes[0] == hashes[1], || "rerun differs".into())?;

    Ok("constant δ, power law, row sums, partition of unity, diagonal pencil, normalization, rerun".into())
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temporary directory");
    let started = Instant::now();
    let runs: Runs = CONFIGS
        .iter()
        .map(|&name| (name, run_config(name, scratch.path())))
        .collect();
    println!(
        "acceptance: {} configs run in {:.1}s",
        CONFIGS.len(),
        started.elapsed().as_secs_f64()
    );

    let criteria: [(&str, Check); 11] = [
        ("equilateral eigenvalues", equilateral_eigenvalues(&runs)),
        (
            "variable-index right triangle eigenvalues",
            right_triangle_eigenvalues(&runs),
        ),
        ("equilateral corner rates", equilateral_rates(&runs)),
        ("right triangle corner rates", right_triangle_rates(&runs)),
        ("arrow localization", arrow_rates(&runs)),
        ("moon eigenvalues and curved corners", moon(&runs)),
        ("angle-law sweeps", angle_sweeps(&runs)),
        ("complex eigenvalues", complex_eigenvalues(&runs)),
        ("disk oracle", disk_oracle(&runs)),
        ("unit cube", cube(&runs)),
        ("property suite", properties(&runs, scratch.path())),
    ];
    let mut failed = 0;
    for (i, (name, result)) in criteria.iter().enumerate() {
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
