//! Mesh to scaffold in one pass: fit, sample, extract.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{
    make_grid, make_grid_2d, sample_field, solid_fraction, VoxelGrid, DEFAULT_PAD,
    DEFAULT_RESOLUTION,
};
use crate::isosurface::{
    export_contours_obj, export_obj, export_pgm, marching_cubes, marching_squares,
};
use crate::mesh::{assemble_center_set, load_mesh, MeshFormat, VolumetricMesh};
use crate::rbf::{write_model, Basis, InterpolationModel, Mode, Solution};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mesh_path: PathBuf,
    /// Guessed from the extension when `None`.
    pub mesh_format: Option<MeshFormat>,
    pub mode: Mode,
    pub basis: Basis,
    pub lambda: f64,
    pub resolution: usize,
    pub pad: f64,
    pub iso_values: Vec<f64>,
    /// Additional iso-values spread evenly inside the sampled value range.
    pub sweep: usize,
    pub output_stem: PathBuf,
    /// Sampling threads, 0 for all cores.
    pub workers: usize,
}

impl PipelineConfig {
    pub fn new(mesh_path: impl Into<PathBuf>, output_stem: impl Into<PathBuf>) -> Self {
        Self {
            mesh_path: mesh_path.into(),
            mesh_format: None,
            mode: Mode::default(),
            basis: Basis::default(),
            lambda: 0.0,
            resolution: DEFAULT_RESOLUTION,
            pad: DEFAULT_PAD,
            iso_values: vec![0.0],
            sweep: 0,
            output_stem: output_stem.into(),
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iso_values.is_empty() && self.sweep == 0 {
            return Err(Error::InvalidParameter(
                "at least one iso-value is required".into(),
            ));
        }
        if let Some(v) = self.iso_values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "iso-value {v} is not finite"
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be a finite value >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.pad >= 0.0 && self.pad.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pad must be >= 0, got {}",
                self.pad
            )));
        }
        if self.resolution < 2 {
            return Err(Error::InvalidParameter(format!(
                "resolution must be >= 2, got {}",
                self.resolution
            )));
        }
        Ok(())
    }
}

pub fn load_mesh_auto(path: &Path, format: Option<MeshFormat>) -> Result<VolumetricMesh> {
    let format = match format.or_else(|| MeshFormat::from_path(path)) {
        Some(f) => f,
        None => {
            return Err(Error::InvalidParameter(format!(
                "cannot tell the mesh format of {}; pass it explicitly",
                path.display()
            )))
        }
    };
    load_mesh(path, format)
}

pub fn fit_mesh(
    mesh: &VolumetricMesh,
    mode: Mode,
    basis: Basis,
    lambda: f64,
) -> Result<(InterpolationModel, Solution)> {
    InterpolationModel::fit_with_report(assemble_center_set(mesh, mode), basis, mode, lambda)
}

/// Samples a model over its padded bounding box. Planar models get a
/// single-slice grid.
pub fn sample_model(
    model: &InterpolationModel,
    resolution: usize,
    pad: f64,
    workers: usize,
) -> Result<VoxelGrid> {
    let (lo, hi) = model.bounding_box();
    let mut grid = if model.is_planar() {
        make_grid_2d(&lo, &hi, resolution, pad)?
    } else {
        make_grid(&lo, &hi, resolution, pad)?
    };
    sample_field(model, &mut grid, workers);
    Ok(grid)
}

/// `n` iso-values evenly spaced strictly inside `(lo, hi)`.
pub fn iso_sweep(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64)
        .collect()
}

/// `<stem>_iso<value>.obj`
pub fn iso_output_path(stem: &Path, iso: f64) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(format!("_iso{iso}.obj"));
    PathBuf::from(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsoResult {
    pub iso: f64,
    pub path: PathBuf,
    /// Triangles for volumes, line segments for single-slice grids.
    pub elements: usize,
    pub solid_fraction: f64,
}

/// Extracts and writes one OBJ per iso-value. Volumes give triangle meshes,
/// single-slice grids give polylines.
pub fn extract_isos(grid: &VoxelGrid, iso_values: &[f64], stem: &Path) -> Result<Vec<IsoResult>> {
    if iso_values.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one iso-value is required".into(),
        ));
    }
    let planar = grid.dims[2] == 1;
    iso_values
        .iter()
        .map(|&iso| {
            let path = iso_output_path(stem, iso);
            let elements = if planar {
                let contours = marching_squares(grid, iso)?;
                export_contours_obj(&contours, &path)?;
                contours
                    .polylines
                    .iter()
                    .map(|l| l.len().saturating_sub(1))
                    .sum()
            } else {
                let soup = marching_cubes(grid, iso);
                export_obj(&soup, &path)?;
                soup.triangles.len()
            };
            Ok(IsoResult {
                iso,
                path,
                elements,
                solid_fraction: solid_fraction(grid, iso),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub centers: usize,
    pub solution: Solution,
    pub model_path: PathBuf,
    pub volume_stem: PathBuf,
    /// Grey-scale preview, written for planar meshes only.
    pub preview_path: Option<PathBuf>,
    pub value_range: (f32, f32),
    pub isos: Vec<IsoResult>,
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Loads the mesh, fits the model, samples it and extracts every iso-value.
/// Writes `<stem>.arbf`, `<stem>.vhdr`/`.raw`, the iso OBJ files and, for
/// planar meshes, `<stem>.pgm`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    config.validate()?;
    let mesh = load_mesh_auto(&config.mesh_path, config.mesh_format)?;
    let (model, solution) = fit_mesh(&mesh, config.mode, config.basis, config.lambda)?;
    let stem = &config.output_stem;
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let model_path = with_suffix(stem, ".arbf");
    write_model(&model, &model_path)?;
    let grid = sample_model(&model, config.resolution, config.pad, config.workers)?;
    crate::grid::write_volume(&grid, stem)?;
    let value_range = grid.min_max();
    let preview_path = if grid.dims[2] == 1 {
        let p = with_suffix(stem, ".pgm");
        let (lo, hi) = (f64::from(value_range.0), f64::from(value_range.1));
        if lo < hi {
            export_pgm(&grid, &p, lo, hi)?;
            Some(p)
        } else {
            None
        }
    } else {
        None
    };
    let mut iso_values = config.iso_values.clone();
    iso_values.extend(iso_sweep(
        f64::from(value_range.0),
        f64::from(value_range.1),
        config.sweep,
    ));
    let isos = extract_isos(&grid, &iso_values, stem)?;
    Ok(PipelineReport {
        centers: model.len(),
        solution,
        model_path,
        volume_stem: stem.clone(),
        preview_path,
        value_range,
        isos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::save_mesh;
    use crate::shapes;
    use std::fs;

    #[test]
    fn iso_paths() {
        let stem = Path::new("out/run");
        assert_eq!(
            iso_output_path(stem, -0.5),
            PathBuf::from("out/run_iso-0.5.obj")
        );
        assert_eq!(
            iso_output_path(stem, 0.0),
            PathBuf::from("out/run_iso0.obj")
        );
        assert_eq!(
            iso_output_path(stem, 0.25),
            PathBuf::from("out/run_iso0.25.obj")
        );
    }

    #[test]
    fn sweep_stays_inside_the_range() {
        assert_eq!(iso_sweep(-1.0, 1.0, 3), vec![-0.5, 0.0, 0.5]);
        let s = iso_sweep(-0.3, 2.0, 20);
        assert_eq!(s.len(), 20);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(s[0] > -0.3 && s[19] < 2.0);
        assert!(iso_sweep(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn runs_end_to_end_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let mesh_path = dir.path().join("tet.node");
        save_mesh(&shapes::unit_tet(), &mesh_path, MeshFormat::NodeEle).unwrap();
        let mut cfg = PipelineConfig::new(&mesh_path, dir.path().join("a/run"));
        cfg.resolution = 24;
        cfg.iso_values = vec![-0.2, 0.0, 0.2];
        let first = run_pipeline(&cfg).unwrap();
        assert_eq!(first.centers, 14);
        assert_eq!(first.isos.len(), 3);
        assert!(first
            .isos
            .windows(2)
            .all(|w| w[0].solid_fraction >= w[1].solid_fraction));
        let bytes: Vec<Vec<u8>> = first
            .isos
            .iter()
            .map(|r| fs::read(&r.path).unwrap())
            .collect();

        cfg.output_stem = dir.path().join("b/run");
        let second = run_pipeline(&cfg).unwrap();
        for (r, b) in second.isos.iter().zip(&bytes) {
            assert_eq!(&fs::read(&r.path).unwrap(), b);
        }
    }

    #[test]
    fn planar_meshes_give_contours_and_preview() {
        let dir = tempfile::tempdir().unwrap();
        let mesh_path = dir.path().join("tri.off");
        save_mesh(&shapes::single_triangle(), &mesh_path, MeshFormat::Off).unwrap();
        let mut cfg = PipelineConfig::new(&mesh_path, dir.path().join("tri"));
        cfg.mode = Mode::Isotropic;
        cfg.resolution = 64;
        let report = run_pipeline(&cfg).unwrap();
        assert_eq!(report.centers, 7);
        assert!(report.preview_path.is_some());
        assert!(report.isos[0].elements > 0);
        let text = fs::read_to_string(&report.isos[0].path).unwrap();
        assert!(text.lines().any(|l| l.starts_with("l ")));
    }

    #[test]
    fn rejects_empty_iso_list_and_missing_mesh() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::new(dir.path().join("missing.node"), dir.path().join("x"));
        assert!(matches!(run_pipeline(&cfg), Err(Error::Io { .. })));
        cfg.iso_values.clear();
        assert!(matches!(
            run_pipeline(&cfg),
            Err(Error::InvalidParameter(_))
        ));
    }
}
