use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use itrans::config::RunConfig;
use itrans::io::{write_roots_csv, write_vtk};
use itrans::radial::{first_te, radial_roots, Geometry, MAX_ANGULAR_ORDER};
use itrans::runner::run_experiment;
use itrans::Error;

#[derive(Parser)]
#[command(name = "itrans", about = "Interior transmission eigenvalues on corner domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radial transmission eigenvalues of the unit disk or ball.
    Oracle {
        #[arg(value_enum)]
        geometry: OracleGeometry,
        /// Constant refractive index.
        #[arg(long)]
        n: f64,
        /// Highest angular order listed in the roots table.
        #[arg(long, default_value_t = 10)]
        max_order: usize,
        /// Largest k listed in the roots table.
        #[arg(long, default_value_t = 5.0)]
        cap: f64,
        /// Write the roots table here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build the mesh of a config and report its statistics.
    Mesh {
        config: PathBuf,
        /// Write the mesh as legacy VTK.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Print the version.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleGeometry {
    Disk,
    Ball,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { config, out } => run(config, out),
        Command::Oracle {
            geometry,
            n,
            max_order,
            cap,
            csv,
        } => oracle(geometry, n, max_order, cap, csv),
        Command::Mesh { config, export } => mesh(config, export),
        Command::Version => {
            println!("itrans {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn run(config: PathBuf, out: Option<PathBuf>) -> Result<(), Error> {
    let cfg = RunConfig::from_file(&config)?;
    let dir = out.unwrap_or_else(|| cfg.output_dir());
    let res = run_experiment(&cfg, Some(&dir))?;
    let s = &res.mesh_summary;
    println!(
        "{}: {} vertices, {} cells, pencil size {}",
        cfg.name, s.vertices, s.cells, s.pencil_size
    );
    println!(
        "window k ∈ [{:.6}, {}], σ = {:.6}",
        res.k_min, cfg.window.k_max, res.sigma
    );
    for (i, p) in res.pairs.iter().enumerate() {
        println!(
            "  mode {i}: k = {:.6} {:+.6}i  multiplicity {}  residual {:.1e}",
            p.k.re, p.k.im, p.multiplicity, p.residual
        );
    }
    for r in &res.rates {
        match (&r.fit, &r.error) {
            (Some(f), _) => println!(
                "  mode {} {:>4} {:<5} slope {:>7.3}  R² {:.4}  {}",
                r.mode,
                r.feature,
                r.field,
                f.slope,
                f.r2,
                f.class.name()
            ),
            (None, e) => println!(
                "  mode {} {:>4} {:<5} no fit: {}",
                r.mode,
                r.feature,
                r.field,
                e.as_deref().unwrap_or("")
            ),
        }
    }
    if !res.spectral.is_clean() {
        println!("spectral check flags: {:?}", res.spectral);
    }
    println!("artifacts in {} (hash {})", dir.display(), &res.hash[..16]);
    Ok(())
}

fn oracle(g: OracleGeometry, n: f64, max_order: usize, cap: f64, csv: Option<PathBuf>) -> Result<(), Error> {
    let geometry = match g {
        OracleGeometry::Disk => Geometry::Disk,
        OracleGeometry::Ball => Geometry::Ball,
    };
    let k = first_te(geometry, n)?;
    let roots = radial_roots(geometry, n, max_order.min(MAX_ANGULAR_ORDER), cap)?;
    match csv {
        Some(path) => {
            write_roots_csv(BufWriter::new(File::create(&path)?), &roots)?;
            println!("first transmission eigenvalue of the unit {}: {k:.12}", geometry.name());
        }
        None => {
            eprintln!("first transmission eigenvalue of the unit {}: {k:.12}", geometry.name());
            let stdout = io::stdout();
            write_roots_csv(stdout.lock(), &roots)?;
        }
    }
    Ok(())
}

fn mesh(config: PathBuf, export: Option<PathBuf>) -> Result<(), Error> {
    let cfg = RunConfig::from_file(&config)?;
    let mesh = cfg.problem()?.build_mesh()?;
    println!(
        "{}: dim {}, {} vertices, {} cells, max edge {:.4}",
        cfg.name,
        mesh.dim(),
        mesh.n_vertices(),
        mesh.n_cells(),
        mesh.max_edge()
    );
    if mesh.dim() == 2 {
        println!("minimum angle {:.2}°", mesh.min_angle_deg());
    }
    if let Some(path) = export {
        let boundary: Vec<f64> = (0..mesh.n_vertices())
            .map(|v| if mesh.is_boundary(v) { 1.0 } else { 0.0 })
            .collect();
        let mut w = BufWriter::new(File::create(&path)?);
        write_vtk(&mut w, &mesh, &cfg.name, &[("boundary", &boundary)])?;
        w.flush()?;
        println!("mesh written to {}", path.display());
    }
    Ok(())
}
