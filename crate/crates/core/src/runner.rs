//! End-to-end experiment execution: mesh, assemble, solve, analyse, emit.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{
    delta_series, fit_rate, radii_schedule, radius_floor, spectral_checks, DeltaSeries, RateFit, SpectralReport,
};
use crate::assembly::{assemble_blocks, build_pencil};
use crate::config::RunConfig;
use crate::geometry::{partition_dofs, Mesh};
use crate::io::{
    plot_loglog, write_delta_csv, write_eigs_csv, write_rates_csv, write_vtk_mode, ModeFields, PlotSeries, RateRow,
};
use crate::problem::{Contrast, FeatureSpec, TransmissionProblem};
use crate::radial::{first_te, Geometry};
use crate::solver::{dirichlet_lambda1, search_lower_bound, shift_invert_arnoldi, EigenPair, SearchWindow};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub cells: usize,
    pub max_edge: f64,
    pub min_angle_deg: Option<f64>,
    pub pencil_size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRecord {
    pub mode: usize,
    pub feature: String,
    pub field: String,
    pub angle: Option<f64>,
    pub fit: Option<RateFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// In-memory results of a run plus the files written for it.
#[derive(Debug)]
pub struct RunOutcome {
    pub mesh: Mesh,
    pub mesh_summary: MeshSummary,
    pub k_min: f64,
    pub sigma: f64,
    pub pairs: Vec<EigenPair>,
    pub series: Vec<DeltaSeries>,
    pub rates: Vec<RateRecord>,
    pub spectral: SpectralReport,
    pub files: Vec<FileRecord>,
    /// Digest over every emitted file except the manifest.
    pub hash: String,
    pub timings: Vec<(&'static str, f64)>,
}

impl RunOutcome {
    pub fn rate(&self, mode: usize, feature: &str, field: &str) -> Option<&RateRecord> {
        self.rates
            .iter()
            .find(|r| r.mode == mode && r.feature == feature && r.field == field)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    name: &'a str,
    crate_version: &'static str,
    config: &'a RunConfig,
    k_min: f64,
    sigma: f64,
    mesh: &'a MeshSummary,
    eigenvalues: Vec<[f64; 2]>,
    spectral: &'a SpectralReport,
    files: &'a [FileRecord],
    hash: &'a str,
    timings_s: Vec<(&'static str, f64)>,
}

/// Tracks written files so a failed run can mark them as partial.
struct Emitter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Emitter {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn mark_partial(&self) {
        for p in &self.written {
            let mut q = p.clone().into_os_string();
            q.push(".partial");
            if let Err(e) = fs::rename(p, &q) {
                log::warn!("could not mark {} as partial: {e}", p.display());
            }
        }
    }
}

/// Runs a configured experiment, writing artifacts to `out_dir` (or the
/// configured directory). On failure, files already written get a
/// `.partial` suffix and the error carries the failing stage.
pub fn run_experiment(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<RunOutcome> {
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir());
    fs::create_dir_all(&dir).map_err(|e| Error::from(e).at_stage("output"))?;
    let mut em = Emitter {
        dir,
        written: Vec::new(),
    };
    let result = execute(cfg, &mut em);
    if result.is_err() {
        em.mark_partial();
    }
    result
}

fn execute(cfg: &RunConfig, em: &mut Emitter) -> Result<RunOutcome> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |stage: &'static str, timings: &mut Vec<(&'static str, f64)>| {
        timings.push((stage, clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let problem = cfg.problem().map_err(|e| e.at_stage("config"))?;
    let features = cfg.features().map_err(|e| e.at_stage("config"))?;
    let fields = cfg.fields().map_err(|e| e.at_stage("config"))?;

    let mesh = problem.build_mesh().map_err(|e| e.at_stage("mesh"))?;
    for f in &features {
        f.check_on_boundary(&mesh).map_err(|e| e.at_stage("mesh"))?;
    }
    lap("mesh", &mut timings);

    let partition = partition_dofs(&mesh);
    let pencil = assemble_blocks(&mesh, &partition, &problem.index)
        .and_then(|b| build_pencil(&b))
        .map_err(|e| e.at_stage("assemble"))?;
    let mesh_summary = MeshSummary {
        vertices: mesh.n_vertices(),
        cells: mesh.n_cells(),
        max_edge: mesh.max_edge(),
        min_angle_deg: (mesh.dim() == 2).then(|| mesh.min_angle_deg()),
        pencil_size: pencil.size(),
    };
    lap("assemble", &mut timings);

    let k_min = match cfg.window.k_min.resolve("window.k_min")? {
        Some(k) => k,
        None => auto_k_min(&problem, &mesh).map_err(|e| e.at_stage("bound"))?,
    };
    if k_min >= cfg.window.k_max {
        return Err(Error::Config(format!(
            "lower bound k_min = {k_min} is not below k_max = {}",
            cfg.window.k_max
        ))
        .at_stage("bound"));
    }
    let window = SearchWindow::new(k_min, cfg.window.k_max, cfg.window.sigma, cfg.window.count)
        .map_err(|e| e.at_stage("solve"))?;
    let pairs = shift_invert_arnoldi(&pencil, &window, &cfg.solver_options()).map_err(|e| e.at_stage("solve"))?;
    lap("solve", &mut timings);

    let mut buf = Vec::new();
    write_eigs_csv(&mut buf, &pairs).map_err(|e| e.at_stage("emit"))?;
    em.write("eigs.csv", &buf).map_err(|e| e.at_stage("emit"))?;
    if cfg.output.vtk {
        for (i, p) in pairs.iter().enumerate() {
            let mut buf = Vec::new();
            let title = format!("{} mode {i} k = {} {:+}i", cfg.name, p.k.re, p.k.im);
            write_vtk_mode(&mut buf, &mesh, &ModeFields::from_pair(p), &title).map_err(|e| e.at_stage("emit"))?;
            em.write(&format!("mode_{i}.vtk"), &buf)
                .map_err(|e| e.at_stage("emit"))?;
        }
    }

    let analysed = cfg.analysis.modes.unwrap_or(pairs.len()).min(pairs.len());
    let radii: Vec<(FeatureSpec, Vec<f64>)> = features
        .iter()
        .map(|f| Ok((f.clone(), feature_radii(cfg, &problem, &mesh, f)?)))
        .collect::<Result<_>>()
        .map_err(|e| e.at_stage("analyze"))?;
    let mut series = Vec::new();
    for (mode, pair) in pairs.iter().enumerate().take(analysed) {
        for (f, r) in &radii {
            for &field in &fields {
                series.push(delta_series(pair, mode, field, &mesh, f, r).map_err(|e| e.at_stage("analyze"))?);
            }
        }
    }
    let rows: Vec<RateRow> = series
        .iter()
        .map(|s| RateRow {
            series: s,
            angle: features.iter().find(|f| f.id == s.feature_id).and_then(|f| f.angle),
            fit: fit_rate(s),
        })
        .collect();
    let rates: Vec<RateRecord> = rows
        .iter()
        .map(|r| RateRecord {
            mode: r.series.mode,
            feature: r.series.feature_id.clone(),
            field: r.series.field.name().to_string(),
            angle: r.angle,
            fit: r.fit.as_ref().ok().copied(),
            error: r.fit.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    let spectral = spectral_checks(&pairs.iter().map(|p| p.k).collect::<Vec<_>>());
    lap("analyze", &mut timings);

    let mut buf = Vec::new();
    write_delta_csv(&mut buf, &series).map_err(|e| e.at_stage("emit"))?;
    em.write("delta.csv", &buf).map_err(|e| e.at_stage("emit"))?;
    let mut buf = Vec::new();
    write_rates_csv(&mut buf, &rows).map_err(|e| e.at_stage("emit"))?;
    em.write("rates.csv", &buf).map_err(|e| e.at_stage("emit"))?;
    if cfg.output.plots {
        for f in &features {
            for &field in &fields {
                let lines: Vec<PlotSeries> = series
                    .iter()
                    .filter(|s| s.feature_id == f.id && s.field == field)
                    .map(|s| PlotSeries {
                        label: format!("mode {}", s.mode),
                        points: s.samples.clone(),
                    })
                    .collect();
                if lines.is_empty() {
                    continue;
                }
                let title = format!("{}: δ({}) near {}", cfg.name, field.name(), f.id);
                let svg = plot_loglog(&lines, &title);
                em.write(&format!("delta_{}_{}.svg", f.id, field.name()), svg.as_bytes())
                    .map_err(|e| e.at_stage("emit"))?;
            }
        }
    }

    let files = em
        .written
        .iter()
        .map(|p| {
            let bytes = fs::read(p)?;
            Ok(FileRecord {
                path: p.file_name().unwrap().to_string_lossy().into_owned(),
                bytes: bytes.len() as u64,
                sha256: hex::encode(Sha256::digest(&bytes)),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("emit"))?;
    let mut digest = Sha256::new();
    for f in &files {
        digest.update(f.path.as_bytes());
        digest.update([0]);
        digest.update(f.sha256.as_bytes());
    }
    let hash = hex::encode(digest.finalize());
    lap("emit", &mut timings);

    let manifest = Manifest {
        name: &cfg.name,
        crate_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        k_min,
        sigma: window.sigma,
        mesh: &mesh_summary,
        eigenvalues: pairs.iter().map(|p| [p.k.re, p.k.im]).collect(),
        spectral: &spectral,
        files: &files,
        hash: &hash,
        timings_s: timings.clone(),
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()).at_stage("emit"))?;
    em.write("manifest.json", &json).map_err(|e| e.at_stage("emit"))?;

    Ok(RunOutcome {
        mesh,
        mesh_summary,
        k_min,
        sigma: window.sigma,
        pairs,
        series,
        rates,
        spectral,
        files,
        hash,
        timings,
    })
}

fn feature_radii(cfg: &RunConfig, problem: &TransmissionProblem, mesh: &Mesh, f: &FeatureSpec) -> Result<Vec<f64>> {
    let scale = f.scale(&problem.domain);
    let radii = match cfg.analysis.radii.resolve("analysis.radii")? {
        None => radii_schedule(mesh, f, scale, cfg.analysis.levels),
        Some(factors) => {
            let floor = radius_floor(mesh, f);
            let (keep, drop): (Vec<f64>, Vec<f64>) = factors.iter().map(|&x| x * scale).partition(|&r| r >= floor);
            if !drop.is_empty() {
                log::warn!("feature {}: radii {drop:?} fall below 4× the local mesh size", f.id);
            }
            keep
        }
    };
    if radii.len() < 4 {
        log::warn!(
            "feature {}: only {} radii above the mesh floor; rates will not be fitted",
            f.id,
            radii.len()
        );
    }
    Ok(radii)
}

/// Lower end of the search window from the radial bound.
pub fn auto_k_min(problem: &TransmissionProblem, mesh: &Mesh) -> Result<f64> {
    let sample = problem.index.sample(mesh)?;
    let geometry = if problem.domain.dim() == 2 {
        Geometry::Disk
    } else {
        Geometry::Ball
    };
    let reference = match sample.contrast() {
        Contrast::Above => sample.sup,
        Contrast::Below => sample.inf,
        Contrast::Mixed => {
            return Err(Error::BoundUnavailable(format!(
                "index range [{}, {}] touches 1; set window.k_min explicitly",
                sample.inf, sample.sup
            )))
        }
    };
    let lambda_ball = first_te(geometry, reference)?;
    let lambda1 = dirichlet_lambda1(mesh)?;
    let bound = search_lower_bound(
        sample.inf,
        sample.sup,
        problem.domain.enclosing_radius(),
        lambda1,
        lambda_ball,
    )?;
    log::info!("search lower bound k_min = {bound} (λ1 = {lambda1}, radial = {lambda_ball})");
    Ok(bound)
}
