use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use scaffold_core::mesh::MeshFormat;
use scaffold_core::pipeline::PipelineConfig;
use scaffold_core::rbf::{Basis, BasisKind, Mode, DEFAULT_SHAPE};
use scaffold_core::{Error, Result};

/// Pipeline settings as read from a TOML file. Relative paths are taken
/// relative to the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mesh: Option<PathBuf>,
    pub format: Option<String>,
    pub mode: Option<String>,
    pub basis: Option<String>,
    pub c: Option<f64>,
    pub lambda: Option<f64>,
    pub resolution: Option<usize>,
    pub pad: Option<f64>,
    pub iso: Option<Vec<f64>>,
    pub sweep: Option<usize>,
    pub output: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut cfg: FileConfig = toml::from_str(&text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start].lines().count().max(1))
                .unwrap_or(0);
            Error::Parse {
                path: path.display().to_string(),
                line,
                message: e.message().to_string(),
            }
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.mesh, &mut cfg.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Fills every unset field of `self` from `other`.
    pub fn or(self, other: FileConfig) -> FileConfig {
        FileConfig {
            mesh: self.mesh.or(other.mesh),
            format: self.format.or(other.format),
            mode: self.mode.or(other.mode),
            basis: self.basis.or(other.basis),
            c: self.c.or(other.c),
            lambda: self.lambda.or(other.lambda),
            resolution: self.resolution.or(other.resolution),
            pad: self.pad.or(other.pad),
            iso: self.iso.or(other.iso),
            sweep: self.sweep.or(other.sweep),
            output: self.output.or(other.output),
        }
    }

    pub fn into_pipeline(self, workers: usize) -> Result<PipelineConfig> {
        let mesh = self.mesh.ok_or_else(|| {
            Error::InvalidParameter("no mesh given (--mesh or `mesh` in the config)".into())
        })?;
        let output = self.output.unwrap_or_else(|| mesh.with_extension(""));
        let mut cfg = PipelineConfig::new(mesh, output);
        cfg.mesh_format = self
            .format
            .as_deref()
            .map(str::parse::<MeshFormat>)
            .transpose()?;
        if let Some(mode) = &self.mode {
            cfg.mode = mode.parse::<Mode>()?;
        }
        let kind = match &self.basis {
            Some(b) => b.parse::<BasisKind>()?,
            None => cfg.basis.kind(),
        };
        cfg.basis = Basis::new(kind, self.c.unwrap_or(DEFAULT_SHAPE))?;
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(r) = self.resolution {
            cfg.resolution = r;
        }
        if let Some(p) = self.pad {
            cfg.pad = p;
        }
        cfg.sweep = self.sweep.unwrap_or(0);
        cfg.iso_values = self.iso.unwrap_or_default();
        cfg.workers = workers;
        Ok(cfg)
    }
}
