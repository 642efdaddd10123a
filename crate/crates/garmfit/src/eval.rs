//! Metrics of pipeline outputs against a suite's ground truth.

use std::fmt::Write as _;
use std::path::Path;

use garmfit_core::model::GarmentClass;
use garmfit_core::render::{compute_iou, rasterize_silhouette};
use garmfit_core::surfmap::{coord_error, photometric_error, psnr};
use serde::{Deserialize, Serialize};

use crate::error::{write_file, Result};
use crate::pipeline::{self, Context, FitLog, Timing};
use crate::suite::{self, from_json, to_json};
use crate::{formats, image_io};

pub const REPORT_JSON: &str = "eval.json";
pub const REPORT_TEXT: &str = "eval.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub seed: u64,
    pub class: GarmentClass,
    /// Segmentation against the ground-truth mask.
    pub seg_iou: Option<f64>,
    /// Fitted silhouettes against the segmentation the fit saw.
    pub stage1_iou: Option<f64>,
    pub stage2_iou: Option<f64>,
    /// Final fitted silhouette against the ground-truth mask.
    pub iou: Option<f64>,
    pub coord_error: Option<f64>,
    pub coord_disagreements: Option<usize>,
    pub photometric_error: Option<f64>,
    pub psnr: Option<f64>,
    pub baseline_photometric_error: Option<f64>,
    pub runtime_seconds: Option<f64>,
    pub traces_non_increasing: Option<bool>,
    pub error: Option<String>,
}

impl EvalRow {
    fn empty(seed: u64, class: GarmentClass) -> Self {
        EvalRow {
            seed,
            class,
            seg_iou: None,
            stage1_iou: None,
            stage2_iou: None,
            iou: None,
            coord_error: None,
            coord_disagreements: None,
            photometric_error: None,
            psnr: None,
            baseline_photometric_error: None,
            runtime_seconds: None,
            traces_non_increasing: None,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetadata {
    pub generated_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    /// Changes between runs; everything else is a function of the inputs.
    pub metadata: EvalMetadata,
}

/// Scores every suite case that has outputs under `pred_dir`; cases
/// without outputs get a row with `error` set.
pub fn evaluate(ctx: &Context, suite_dir: &Path, pred_dir: &Path) -> Result<EvalReport> {
    let manifest = suite::read_manifest(suite_dir)?;
    let rows = manifest
        .cases
        .iter()
        .map(|e| {
            let mut row = EvalRow::empty(e.seed, e.class);
            if let Err(err) = fill_row(ctx, &suite_dir.join(&e.dir), &pred_dir.join(&e.dir), &mut row) {
                row.error = Some(err.to_string());
            }
            row
        })
        .collect();
    let generated_unix = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(EvalReport { rows, metadata: EvalMetadata { generated_unix } })
}

fn fill_row(ctx: &Context, gt_dir: &Path, pred_dir: &Path, row: &mut EvalRow) -> Result<()> {
    let gt = suite::read_case(gt_dir)?;
    let mask = image_io::read_mask(&pred_dir.join(pipeline::MASK))?;
    row.seg_iou = Some(compute_iou(&mask, &gt.mask)?);
    let fit = pipeline::read_fit(&pred_dir.join(pipeline::FIT))?;
    row.stage1_iou = Some(fit.result.stage1_iou);
    row.stage2_iou = Some(fit.result.stage2_iou);
    let tmpl = ctx.garment(fit.result.class)?;
    let rendered = rasterize_silhouette(&fit.camera, &fit.result.vertices, &tmpl.faces)?.mask;
    row.iou = Some(compute_iou(&rendered, &gt.mask)?);
    let corr = formats::read_correspondence(&pred_dir.join(pipeline::CORR))?;
    let ce = coord_error(&corr, &gt.correspondence)?;
    row.coord_error = ce.mse;
    row.coord_disagreements = Some(ce.disagreements);
    row.photometric_error = photometric_error(&gt.image, &corr, &gt.atlas)?;
    let atlas = image_io::read_atlas(&pred_dir.join(pipeline::ATLAS))?;
    row.psnr = psnr(&atlas, &gt.atlas)?;
    let bpath = pred_dir.join(pipeline::BASELINE_CORR);
    if bpath.is_file() {
        let bcorr = formats::read_correspondence(&bpath)?;
        row.baseline_photometric_error = photometric_error(&gt.image, &bcorr, &gt.atlas)?;
    }
    let log: FitLog = from_json(&pred_dir.join(pipeline::LOG))?;
    row.traces_non_increasing = Some(log.traces.iter().all(|t| t.is_non_increasing()));
    let tpath = pred_dir.join(pipeline::TIMING);
    if tpath.is_file() {
        let timing: Timing = from_json(&tpath)?;
        row.runtime_seconds = Some(timing.total_seconds);
    }
    Ok(())
}

fn cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn num(v: Option<f64>, digits: usize) -> String {
    cell(v.map(|v| format!("{v:.digits$}")))
}

/// Aligned-column table, one row per case.
pub fn report_table(report: &EvalReport) -> String {
    let header = ["seed", "class", "seg_iou", "s1_iou", "s2_iou", "iou", "coord_mse", "photo_err", "base_err", "psnr", "runtime_s", "status"];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in &report.rows {
        rows.push(vec![
            r.seed.to_string(),
            r.class.name().to_string(),
            num(r.seg_iou, 4),
            num(r.stage1_iou, 4),
            num(r.stage2_iou, 4),
            num(r.iou, 4),
            num(r.coord_error, 3),
            num(r.photometric_error, 4),
            num(r.baseline_photometric_error, 4),
            num(r.psnr, 2),
            num(r.runtime_seconds, 2),
            r.error.as_deref().map_or("ok", |_| "error").to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..header.len()).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn write_report(dir: &Path, report: &EvalReport) -> Result<()> {
    write_file(&dir.join(REPORT_JSON), &to_json(report)?)?;
    write_file(&dir.join(REPORT_TEXT), report_table(report).as_bytes())
}
