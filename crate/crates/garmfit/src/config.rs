//! Pipeline configuration: JSON file, then command-line flags, then the
//! `GARMFIT_THREADS` environment variable.

use std::path::{Path, PathBuf};

use garmfit_core::baseline::BaselineConfig;
use garmfit_core::fitting::{FitConfig, View};
use garmfit_core::imagery::SegConfig;
use garmfit_core::model::GarmentClass;
use garmfit_core::render::Camera;
use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};

pub const THREADS_ENV: &str = "GARMFIT_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Model JSON; the bundled toy model when absent.
    pub model: Option<PathBuf>,
    pub class: GarmentClass,
    pub view: View,
    /// Camera intrinsics; derived from the image size when absent.
    pub camera: Option<Camera>,
    pub seg: SegConfig,
    /// Fit settings; the class and view defaults when absent.
    pub fit: Option<FitConfig>,
    pub baseline: Option<BaselineConfig>,
    pub atlas_size: usize,
    pub output_dir: PathBuf,
    pub jobs: usize,
    pub seed: u64,
    /// Mirror images and masks horizontally before processing.
    pub flip: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            model: None,
            class: GarmentClass::TShirt,
            view: View::Front,
            camera: None,
            seg: SegConfig::default(),
            fit: None,
            baseline: None,
            atlas_size: 256,
            output_dir: PathBuf::from("out"),
            jobs: 1,
            seed: 0,
            flip: false,
        }
    }
}

/// Values given on the command line; `None` keeps the config value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<PathBuf>,
    pub class: Option<GarmentClass>,
    pub view: Option<View>,
    pub atlas_size: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub flip: bool,
}

impl PipelineConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        let text = String::from_utf8(bytes).map_err(|e| Error::parse(path, e))?;
        Self::from_json(&text, path)
    }

    /// Config file (if any), then flags, then the environment.
    pub fn resolve(file: Option<&Path>, flags: &Overrides, threads_env: Option<&str>) -> Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(flags);
        if let Some(v) = threads_env {
            cfg.jobs = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_ENV}={v:?} is not a job count")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, flags: &Overrides) {
        if let Some(m) = &flags.model {
            self.model = Some(m.clone());
        }
        if let Some(c) = flags.class {
            self.class = c;
        }
        if let Some(v) = flags.view {
            self.view = v;
        }
        if let Some(a) = flags.atlas_size {
            self.atlas_size = a;
        }
        if let Some(o) = &flags.output_dir {
            self.output_dir = o.clone();
        }
        if let Some(j) = flags.jobs {
            self.jobs = j;
        }
        if let Some(s) = flags.seed {
            self.seed = s;
        }
        self.flip |= flags.flip;
    }

    pub fn validate(&self) -> Result<()> {
        if self.jobs == 0 {
            return Err(Error::Config("job count must be at least 1".into()));
        }
        if self.atlas_size == 0 {
            return Err(Error::Config("atlas_size must be positive".into()));
        }
        if let Some(m) = &self.model {
            if !m.is_file() {
                return Err(Error::Config(format!("model file {} does not exist", m.display())));
            }
        }
        if let Some(f) = &self.fit {
            f.validate()?;
        }
        if let Some(c) = &self.camera {
            c.validate()?;
        }
        Ok(())
    }

    /// Fit settings for `class`: the configured ones with the class
    /// substituted, or the class defaults.
    pub fn fit_config(&self, class: GarmentClass) -> FitConfig {
        match &self.fit {
            Some(f) => FitConfig { class, ..f.clone() },
            None => FitConfig::new(class, self.view),
        }
    }

    pub fn baseline_config(&self, class: GarmentClass) -> BaselineConfig {
        let fit = self.fit_config(class);
        match &self.baseline {
            Some(b) => BaselineConfig { fit, atlas_size: self.atlas_size, ..b.clone() },
            None => BaselineConfig { atlas_size: self.atlas_size, ..BaselineConfig::new(fit) },
        }
    }

    pub fn camera_for(&self, width: usize, height: usize) -> Result<Camera> {
        match self.camera {
            Some(c) if c.width != width || c.height != height => Err(Error::Config(format!(
                "configured camera is {}x{} but the image is {width}x{height}",
                c.width, c.height
            ))),
            Some(c) => Ok(c),
            None => Ok(Camera::for_image(width, height)),
        }
    }
}
