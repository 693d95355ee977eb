//! `arbf`: porous scaffolds from volumetric meshes.
//!
//! Exit status is 0 on success, 2 for bad input and 3 when the numerics fail
//! (singular interpolation matrix, degenerate perturbation).

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::FileConfig;
use scaffold_core::grid::{read_volume, write_volume, VoxelGrid, DEFAULT_PAD, DEFAULT_RESOLUTION};
use scaffold_core::mesh::{save_mesh, MeshFormat, VolumetricMesh};
use scaffold_core::perturb::{
    perturb_mesh, PerturbSpec, DEFAULT_MAGNITUDE, DEFAULT_VERTEX_FRACTION,
};
use scaffold_core::pipeline::{
    extract_isos, fit_mesh, iso_sweep, load_mesh_auto, run_pipeline, sample_model, IsoResult,
};
use scaffold_core::rbf::{read_model, write_model, Basis, BasisKind, Mode, DEFAULT_SHAPE};
use scaffold_core::tpms::{sample_tpms, TpmsKind, TpmsSurface};
use scaffold_core::{shapes, Error, Result};

#[derive(Parser)]
#[command(
    name = "arbf",
    version,
    about = "Porous scaffold construction by anisotropic RBF interpolation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an interpolation model to a mesh
    Fit(FitArgs),
    /// Sample a model on a voxel grid
    Sample(SampleArgs),
    /// Extract iso-surfaces (or contours) from a sampled volume
    Iso(IsoArgs),
    /// Sample a TPMS unit cell and extract iso-surfaces
    Tpms(TpmsArgs),
    /// Randomly displace mesh vertices
    Perturb(PerturbArgs),
    /// Fit, sample and extract in one run
    Pipeline(PipelineArgs),
    /// Write one of the built-in reference meshes
    Mesh(MeshArgs),
}

#[derive(Args)]
struct MeshInput {
    /// Mesh file (.off, .node/.ele, .hexmesh)
    #[arg(long)]
    mesh: PathBuf,
    /// Mesh format; guessed from the extension by default
    #[arg(long)]
    format: Option<MeshFormat>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "aniso")]
    mode: Mode,
    #[arg(long, default_value = "imq")]
    basis: BasisKind,
    /// Shape parameter
    #[arg(long, default_value_t = DEFAULT_SHAPE)]
    c: f64,
    /// Diagonal regularization
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: MeshInput,
    #[command(flatten)]
    model: ModelArgs,
    /// Model file to write; defaults to the mesh path with extension .arbf
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, default_value_t = DEFAULT_PAD)]
    pad: f64,
    /// Output stem for <stem>.vhdr and <stem>.raw
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IsoList {
    /// Comma separated iso-values
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    iso: Vec<f64>,
    /// Add N iso-values spread evenly inside the value range
    #[arg(long, default_value_t = 0)]
    sweep: usize,
}

#[derive(Args)]
struct IsoArgs {
    /// Volume stem (or its .vhdr file)
    #[arg(long)]
    volume: PathBuf,
    #[command(flatten)]
    isos: IsoList,
    /// Output stem; files are named <stem>_iso<value>.obj
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TpmsName {
    P,
    D,
    G,
    Iwp,
}

#[derive(Args)]
struct TpmsArgs {
    #[arg(long, value_enum)]
    kind: TpmsName,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Angular frequency multipliers px,py,pz
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0])]
    periods: Vec<f64>,
    #[command(flatten)]
    isos: IsoList,
    /// Output stem; defaults to tpms_<kind>
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the sampled volume
    #[arg(long)]
    save_volume: bool,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    input: MeshInput,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Displacement as a fraction of the shortest incident edge (at most 0.3)
    #[arg(long, default_value_t = DEFAULT_MAGNITUDE)]
    magnitude: f64,
    /// Fraction of vertices to move
    #[arg(long, default_value_t = DEFAULT_VERTEX_FRACTION)]
    fraction: f64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// TOML file with pipeline settings; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    pad: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    iso: Option<Vec<f64>>,
    #[arg(long)]
    sweep: Option<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Tri,
    TriGrid,
    Tet,
    TwoTets,
    Hex,
    Hex8,
    Rod4,
    Icosa,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, value_enum)]
    shape: Shape,
    /// Uniform scale factor
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, short)]
    out: PathBuf,
}

fn workers() -> Result<usize> {
    match std::env::var("ARBF_WORKERS") {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!(
                "ARBF_WORKERS must be a non-negative integer, got '{v}'"
            ))
        }),
        _ => Ok(0),
    }
}

fn report_isos(results: &[IsoResult], planar: bool) {
    let unit = if planar { "segments" } else { "triangles" };
    for r in results {
        println!(
            "iso {}: {} {unit}, solid fraction {:.4} -> {}",
            r.iso,
            r.elements,
            r.solid_fraction,
            r.path.display()
        );
        if r.elements == 0 {
            eprintln!(
                "warning: iso {} does not cross the sampled values; {} is empty",
                r.iso,
                r.path.display()
            );
        }
    }
}

fn iso_values(list: &IsoList, grid: &VoxelGrid) -> Result<Vec<f64>> {
    let (lo, hi) = grid.min_max();
    let mut values = list.iso.clone();
    values.extend(iso_sweep(f64::from(lo), f64::from(hi), list.sweep));
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "no iso-values given (use --iso or --sweep)".into(),
        ));
    }
    Ok(values)
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let mesh = load_mesh_auto(&args.input.mesh, args.input.format)?;
    let basis = Basis::new(args.model.basis, args.model.c)?;
    let (model, solution) = fit_mesh(&mesh, args.model.mode, basis, args.model.lambda)?;
    let out = args
        .out
        .unwrap_or_else(|| args.input.mesh.with_extension("arbf"));
    write_model(&model, &out)?;
    println!("N {}", model.len());
    println!("condition estimate {:.3e}", solution.condition_estimate);
    println!("residual {:.3e}", solution.residual);
    println!("model -> {}", out.display());
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let grid = sample_model(&model, args.resolution, args.pad, workers()?)?;
    let out = args.out.unwrap_or_else(|| args.model.with_extension(""));
    write_volume(&grid, &out)?;
    let (lo, hi) = grid.min_max();
    println!("dims {} {} {}", grid.dims[0], grid.dims[1], grid.dims[2]);
    println!("range {lo} {hi}");
    println!("volume -> {}", out.display());
    Ok(())
}

fn cmd_iso(args: IsoArgs) -> Result<()> {
    let grid = read_volume(&args.volume)?;
    let values = iso_values(&args.isos, &grid)?;
    let stem = args.out.unwrap_or_else(|| strip_volume_ext(&args.volume));
    let results = extract_isos(&grid, &values, &stem)?;
    report_isos(&results, grid.dims[2] == 1);
    Ok(())
}

fn strip_volume_ext(p: &Path) -> PathBuf {
    match p.extension().and_then(|e| e.to_str()) {
        Some("vhdr") | Some("raw") => p.with_extension(""),
        _ => p.to_path_buf(),
    }
}

fn cmd_tpms(args: TpmsArgs) -> Result<()> {
    let surface = match args.kind {
        TpmsName::P => TpmsSurface::P,
        TpmsName::D => TpmsSurface::D,
        TpmsName::G => TpmsSurface::G,
        TpmsName::Iwp => TpmsSurface::Iwp,
    };
    let kind =
        TpmsKind::with_periods(surface, [args.periods[0], args.periods[1], args.periods[2]])?;
    let mut grid = kind.unit_cell_grid(args.resolution)?;
    sample_tpms(kind, &mut grid, workers()?);
    let values = iso_values(&args.isos, &grid)?;
    let stem = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("tpms_{surface}")));
    if args.save_volume {
        write_volume(&grid, &stem)?;
    }
    let results = extract_isos(&grid, &values, &stem)?;
    report_isos(&results, false);
    Ok(())
}

fn cmd_perturb(args: PerturbArgs) -> Result<()> {
    let mesh = load_mesh_auto(&args.input.mesh, args.input.format)?;
    let spec = PerturbSpec::new(args.magnitude, args.seed, args.fraction)?;
    let out = perturb_mesh(&mesh, &spec)?;
    let format = MeshFormat::from_path(&args.out).unwrap_or(MeshFormat::for_kind(out.kind()));
    save_mesh(&out, &args.out, format)?;
    let moved = mesh
        .vertices()
        .iter()
        .zip(out.vertices())
        .filter(|(a, b)| a != b)
        .count();
    println!(
        "moved {moved} of {} vertices -> {}",
        mesh.vertices().len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let flags = FileConfig {
        mesh: args.mesh,
        format: args.format,
        mode: args.mode,
        basis: args.basis,
        c: args.c,
        lambda: args.lambda,
        resolution: args.resolution,
        pad: args.pad,
        iso: args.iso,
        sweep: args.sweep,
        output: args.out,
    };
    let merged = match &args.config {
        Some(path) => flags.or(FileConfig::load(path)?),
        None => flags,
    };
    let cfg = merged.into_pipeline(workers()?)?;
    let report = run_pipeline(&cfg)?;
    println!("N {}", report.centers);
    println!(
        "condition estimate {:.3e}",
        report.solution.condition_estimate
    );
    println!("residual {:.3e}", report.solution.residual);
    println!("range {} {}", report.value_range.0, report.value_range.1);
    report_isos(&report.isos, report.preview_path.is_some());
    Ok(())
}

fn cmd_mesh(args: MeshArgs) -> Result<()> {
    let mesh: VolumetricMesh = match args.shape {
        Shape::Tri => shapes::single_triangle(),
        Shape::TriGrid => shapes::triangle_grid(4, 1.0),
        Shape::Tet => shapes::unit_tet(),
        Shape::TwoTets => shapes::two_tets(),
        Shape::Hex => shapes::unit_hex(),
        Shape::Hex8 => shapes::hex_block(2, 2, 2, 1.0),
        Shape::Rod4 => shapes::hex_rod(4, 1.0),
        Shape::Icosa => shapes::icosahedron(),
    };
    if !(args.scale > 0.0 && args.scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive, got {}",
            args.scale
        )));
    }
    let mesh = if args.scale == 1.0 {
        mesh
    } else {
        shapes::scaled(&mesh, args.scale)
    };
    let format = MeshFormat::from_path(&args.out).unwrap_or(MeshFormat::for_kind(mesh.kind()));
    save_mesh(&mesh, &args.out, format)?;
    println!(
        "{} vertices, {} cells -> {}",
        mesh.vertices().len(),
        mesh.num_cells(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Iso(a) => cmd_iso(a),
        Command::Tpms(a) => cmd_tpms(a),
        Command::Perturb(a) => cmd_perturb(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Mesh(a) => cmd_mesh(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
