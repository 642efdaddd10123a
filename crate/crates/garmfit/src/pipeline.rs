//! Segmentation, fitting and baking of one image, the SC+TPS baseline, and
//! batch runs over a suite directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use garmfit_core::baseline::{baseline_texture, BaselineResult};
use garmfit_core::fitting::{fit_garment, FitResult, PhaseTrace};
use garmfit_core::imagery::{segment, BinaryMask, Image};
use garmfit_core::model::{pose_garment, GarmentClass, GarmentTemplate, LbsModel, PoseParams};
use garmfit_core::render::{rasterize_uv_atlas, render_shaded, Camera};
use garmfit_core::surfmap::{bake_correspondence, sample_texture, CorrespondenceMap, TextureAtlas};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{write_file, Error, Result};
use crate::suite::{self, from_json, to_json};
use crate::{formats, image_io, model_io};

pub const MASK: &str = "mask.png";
pub const FIT: &str = "fit.json";
pub const MESH: &str = "mesh.obj";
pub const ATLAS: &str = "atlas.png";
pub const CORR: &str = "corr.p2sc";
pub const LOG: &str = "log.json";
/// Wall-clock timings; the only output that differs between runs.
pub const TIMING: &str = "timing.json";
pub const BASELINE_ATLAS: &str = "baseline_atlas.png";
pub const BASELINE_CORR: &str = "baseline_corr.p2sc";
pub const WARPED: &str = "warped.png";
pub const BATCH: &str = "batch.json";

/// Model and templates, loaded once and shared read-only.
#[derive(Debug, Clone)]
pub struct Context {
    pub model: LbsModel,
    pub garments: Vec<GarmentTemplate>,
}

impl Context {
    pub fn load(cfg: &PipelineConfig) -> Result<Self> {
        let (model, garments) = model_io::load_model_or_toy(cfg.model.as_deref())?;
        Ok(Context { model, garments })
    }

    pub fn garment(&self, class: GarmentClass) -> Result<&GarmentTemplate> {
        model_io::garment(&self.garments, class)
    }
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFile {
    pub camera: Camera,
    /// Whether the input was mirrored before fitting.
    pub flipped: bool,
    pub result: FitResult,
}

/// Contents of `log.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitLog {
    pub class: GarmentClass,
    pub stage1_iou: f64,
    pub stage2_iou: f64,
    pub final_silhouette_energy: f64,
    pub all_traces_non_increasing: bool,
    pub traces: Vec<PhaseTrace>,
}

impl FitLog {
    pub fn new(r: &FitResult) -> Self {
        let traces: Vec<PhaseTrace> = r.traces().cloned().collect();
        FitLog {
            class: r.class,
            stage1_iou: r.stage1_iou,
            stage2_iou: r.stage2_iou,
            final_silhouette_energy: r.final_silhouette_energy,
            all_traces_non_increasing: traces.iter().all(PhaseTrace::is_non_increasing),
            traces,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub segment_seconds: f64,
    pub fit_seconds: f64,
    pub bake_seconds: f64,
    pub baseline_seconds: Option<f64>,
    pub total_seconds: f64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone)]
pub struct CaseOutput {
    pub mask: BinaryMask,
    pub fit: FitFile,
    pub correspondence: CorrespondenceMap,
    pub atlas: TextureAtlas,
    pub baseline: Option<BaselineResult>,
    pub timing: Timing,
}

/// Applies the configured horizontal mirror.
pub fn prepare(image: Image, mask: Option<BinaryMask>, cfg: &PipelineConfig) -> (Image, Option<BinaryMask>) {
    if cfg.flip {
        (image.flip_horizontal(), mask.map(|m| m.flip_horizontal()))
    } else {
        (image, mask)
    }
}

pub fn segment_image(image: &Image, cfg: &PipelineConfig) -> Result<BinaryMask> {
    Ok(segment(image, &cfg.seg)?)
}

pub fn fit_image(ctx: &Context, class: GarmentClass, mask: &BinaryMask, cfg: &PipelineConfig) -> Result<FitFile> {
    let tmpl = ctx.garment(class)?;
    let camera = cfg.camera_for(mask.width(), mask.height())?;
    let result = fit_garment(&ctx.model, tmpl, mask, &camera, &cfg.fit_config(class))?;
    Ok(FitFile { camera, flipped: cfg.flip, result })
}

/// Correspondence and atlas of a fitted mesh; texels whose projection falls
/// outside `fg` stay invalid.
pub fn bake(ctx: &Context, fit: &FitFile, image: &Image, fg: &BinaryMask, atlas_size: usize) -> Result<(CorrespondenceMap, TextureAtlas)> {
    let tmpl = ctx.garment(fit.result.class)?;
    let raster = rasterize_uv_atlas(tmpl, atlas_size, atlas_size)?;
    let corr = bake_correspondence(tmpl, &fit.result.vertices, &fit.camera, fg, &raster)?;
    let atlas = sample_texture(image, &corr);
    Ok((corr, atlas))
}

pub fn run_baseline(ctx: &Context, class: GarmentClass, image: &Image, mask: &BinaryMask, cfg: &PipelineConfig) -> Result<BaselineResult> {
    let tmpl = ctx.garment(class)?;
    let camera = cfg.camera_for(image.width(), image.height())?;
    Ok(baseline_texture(&ctx.model, tmpl, &camera, image, mask, &cfg.baseline_config(class))?)
}

fn unix_now() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Segment (unless `mask` is given), fit and bake one image.
pub fn process(
    ctx: &Context,
    class: GarmentClass,
    image: &Image,
    mask: Option<&BinaryMask>,
    cfg: &PipelineConfig,
    with_baseline: bool,
) -> Result<CaseOutput> {
    let t0 = Instant::now();
    let mask = match mask {
        Some(m) => m.clone(),
        None => segment_image(image, cfg)?,
    };
    let t1 = Instant::now();
    let fit = fit_image(ctx, class, &mask, cfg)?;
    let t2 = Instant::now();
    let (correspondence, atlas) = bake(ctx, &fit, image, &mask, cfg.atlas_size)?;
    let t3 = Instant::now();
    let baseline = if with_baseline { Some(run_baseline(ctx, class, image, &mask, cfg)?) } else { None };
    let t4 = Instant::now();
    let timing = Timing {
        segment_seconds: (t1 - t0).as_secs_f64(),
        fit_seconds: (t2 - t1).as_secs_f64(),
        bake_seconds: (t3 - t2).as_secs_f64(),
        baseline_seconds: with_baseline.then(|| (t4 - t3).as_secs_f64()),
        total_seconds: (t3 - t0).as_secs_f64(),
        finished_unix: unix_now(),
    };
    Ok(CaseOutput { mask, fit, correspondence, atlas, baseline, timing })
}

pub fn write_fit(dir: &Path, ctx: &Context, fit: &FitFile) -> Result<()> {
    write_file(&dir.join(FIT), &to_json(fit)?)?;
    write_file(&dir.join(LOG), &to_json(&FitLog::new(&fit.result))?)?;
    formats::write_obj(&dir.join(MESH), ctx.garment(fit.result.class)?, &fit.result.vertices)
}

pub fn write_baseline(dir: &Path, b: &BaselineResult) -> Result<()> {
    image_io::write_atlas(&dir.join(BASELINE_ATLAS), &b.atlas)?;
    formats::write_correspondence(&dir.join(BASELINE_CORR), &b.image_correspondence())?;
    image_io::write_image(&dir.join(WARPED), &b.warped)
}

pub fn write_outputs(dir: &Path, ctx: &Context, out: &CaseOutput) -> Result<()> {
    image_io::write_mask(&dir.join(MASK), &out.mask)?;
    write_fit(dir, ctx, &out.fit)?;
    image_io::write_atlas(&dir.join(ATLAS), &out.atlas)?;
    formats::write_correspondence(&dir.join(CORR), &out.correspondence)?;
    if let Some(b) = &out.baseline {
        write_baseline(dir, b)?;
    }
    write_file(&dir.join(TIMING), &to_json(&out.timing)?)
}

pub fn read_fit(path: &Path) -> Result<FitFile> {
    from_json(path)
}

/// One line of `batch.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub seed: u64,
    pub dir: String,
    /// `None` on success.
    pub error: Option<String>,
}

pub struct BatchOutcome {
    pub entries: Vec<BatchEntry>,
    /// Worst exit code over the failed cases; 0 when all succeeded.
    pub exit_code: i32,
}

/// Runs every case of the suite at `suite_dir` on `cfg.jobs` workers,
/// writing `<output_dir>/case_<seed>/`. Each case uses its ground-truth
/// class.
pub fn run_suite(ctx: &Context, suite_dir: &Path, cfg: &PipelineConfig, with_baseline: bool) -> Result<BatchOutcome> {
    let manifest = suite::read_manifest(suite_dir)?;
    let mut cases = manifest.cases;
    cases.dedup_by(|a, b| a.dir == b.dir);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let results: Vec<(BatchEntry, i32)> = pool.install(|| {
        cases
            .par_iter()
            .map(|entry| {
                let out_dir = cfg.output_dir.join(&entry.dir);
                let run = || -> Result<()> {
                    let cdir = suite_dir.join(&entry.dir);
                    let image = image_io::read_image(&cdir.join(suite::IMAGE))?;
                    let (image, _) = prepare(image, None, cfg);
                    let out = process(ctx, entry.class, &image, None, cfg, with_baseline)?;
                    write_outputs(&out_dir, ctx, &out)
                };
                match run() {
                    Ok(()) => (BatchEntry { seed: entry.seed, dir: entry.dir.clone(), error: None }, 0),
                    Err(e) => {
                        eprintln!("{}: {e}", entry.dir);
                        (BatchEntry { seed: entry.seed, dir: entry.dir.clone(), error: Some(e.to_string()) }, e.exit_code())
                    }
                }
            })
            .collect()
    });
    let exit_code = results.iter().map(|r| r.1).max().unwrap_or(0);
    let entries: Vec<BatchEntry> = results.into_iter().map(|r| r.0).collect();
    write_file(&cfg.output_dir.join(BATCH), &to_json(&entries)?)?;
    Ok(BatchOutcome { entries, exit_code })
}

/// Re-poses a fit with new parameters and shades it. The stage-2 offsets
/// from the fitted articulated mesh are carried along unskinned.
pub fn render_preview(ctx: &Context, fit: &FitFile, pose: &[(usize, [f64; 3])], shape: Option<&[f64]>) -> Result<Image> {
    let r = &fit.result;
    let tmpl = ctx.garment(r.class)?;
    let fitted = pose_garment(&ctx.model, tmpl, &r.params)?;
    let mut params: PoseParams = r.params.clone();
    for &(j, rot) in pose {
        if j >= params.theta.len() {
            return Err(Error::Config(format!("--pose joint {j} out of range; the model has {} joints", params.theta.len())));
        }
        params.theta[j] = rot;
    }
    if let Some(beta) = shape {
        if beta.len() != params.beta.len() {
            return Err(Error::Config(format!("--shape needs {} coefficients, got {}", params.beta.len(), beta.len())));
        }
        params.beta = beta.to_vec();
    }
    let posed = pose_garment(&ctx.model, tmpl, &params)?;
    let verts: Vec<[f64; 3]> = posed
        .iter()
        .zip(fitted.iter().zip(&r.vertices))
        .map(|(p, (f, g))| [0, 1, 2].map(|a| p[a] + g[a] - f[a]))
        .collect();
    Ok(render_shaded(&fit.camera, &verts, &tmpl.faces)?)
}

/// Output directory for a batch case.
pub fn case_output_dir(cfg: &PipelineConfig, seed: u64) -> PathBuf {
    cfg.output_dir.join(suite::case_dir_name(seed))
}
