//! Command-line front end. Diagnostics go to standard error; results are
//! written to files only.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use garmfit_core::fitting::View;
use garmfit_core::model::GarmentClass;
use garmfit_core::surfmap::coordinate_mask;
use garmfit_core::synth::{generate_suite, SynthConfig};

use crate::config::{Overrides, PipelineConfig, THREADS_ENV};
use crate::dataset::{export_dataset, DatasetCase};
use crate::error::{Error, Result};
use crate::pipeline::{self, Context};
use crate::{eval, formats, image_io, suite};

#[derive(Debug, Parser)]
#[command(name = "garmfit", version, about = "Fit a garment template to a photograph and bake its texture atlas")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Pipeline configuration JSON; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Model JSON (defaults to the bundled toy model).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// tshirt, shorts or pants.
    #[arg(long, global = true)]
    class: Option<String>,
    /// front or back.
    #[arg(long, global = true)]
    view: Option<String>,
    #[arg(long, global = true)]
    atlas_size: Option<usize>,
    /// Output directory.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Parallel jobs for batch runs; GARMFIT_THREADS takes precedence.
    #[arg(long, short, global = true)]
    jobs: Option<usize>,
    /// Mirror images and masks horizontally first.
    #[arg(long, global = true)]
    flip: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment the garment; writes mask.png.
    Segment { image: PathBuf },
    /// Fit the template; writes fit.json, mesh.obj and log.json.
    Fit {
        image: PathBuf,
        /// Use this mask instead of segmenting.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Bake atlas.png and corr.p2sc from an image and a fit.
    Bake {
        image: PathBuf,
        fit: PathBuf,
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Segment, fit and bake an image, or every case of a suite directory.
    Pipeline {
        input: PathBuf,
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Also run the shape-context baseline.
        #[arg(long)]
        baseline: bool,
    },
    /// Shape-context and thin-plate-spline baseline.
    Warp {
        image: PathBuf,
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Generate a synthetic suite with seeds `seed .. seed + n`.
    Synth {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        perturbation: Option<f64>,
        #[arg(long)]
        supersample: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
    },
    /// Score pipeline outputs against a suite; writes eval.json and eval.txt.
    Eval {
        suite: PathBuf,
        /// Pipeline output directory (defaults to --out).
        #[arg(long)]
        pred: Option<PathBuf>,
    },
    /// Write X, Y and C files for a suite, from its ground truth or from fits.
    ExportDataset {
        suite: PathBuf,
        /// Pipeline output directory to export instead of the ground truth.
        #[arg(long)]
        fits: Option<PathBuf>,
    },
    /// Shade a fit re-posed with new joint rotations or shape.
    Render {
        fit: PathBuf,
        /// `joint=x,y,z` axis-angle rotation; repeatable.
        #[arg(long)]
        pose: Vec<String>,
        /// Comma-separated shape coefficients.
        #[arg(long)]
        shape: Option<String>,
    },
}

/// Parses `argv` (including the program name) and runs it; returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_class(s: &str) -> Result<GarmentClass> {
    s.parse().map_err(|_| Error::Config(format!("unknown garment class `{s}`; expected tshirt, shorts or pants")))
}

fn parse_view(s: &str) -> Result<View> {
    match s {
        "front" => Ok(View::Front),
        "back" => Ok(View::Back),
        _ => Err(Error::Config(format!("unknown view `{s}`; expected front or back"))),
    }
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("{what}: `{t}` is not a number"))))
        .collect()
}

fn parse_pose(s: &str) -> Result<(usize, [f64; 3])> {
    let bad = || Error::Config(format!("--pose `{s}`: expected joint=x,y,z"));
    let (j, rot) = s.split_once('=').ok_or_else(bad)?;
    let j = j.trim().parse().map_err(|_| bad())?;
    let v = parse_floats(rot, "--pose")?;
    let r: [f64; 3] = v.try_into().map_err(|_| bad())?;
    Ok((j, r))
}

fn config(common: &Common, seed: Option<u64>) -> Result<PipelineConfig> {
    let flags = Overrides {
        model: common.model.clone(),
        class: common.class.as_deref().map(parse_class).transpose()?,
        view: common.view.as_deref().map(parse_view).transpose()?,
        atlas_size: common.atlas_size,
        output_dir: common.out.clone(),
        jobs: common.jobs,
        seed,
        flip: common.flip,
    };
    let env = std::env::var(THREADS_ENV).ok();
    PipelineConfig::resolve(common.config.as_deref(), &flags, env.as_deref())
}

fn load_input(image: &Path, mask: Option<&Path>, cfg: &PipelineConfig) -> Result<(garmfit_core::imagery::Image, Option<garmfit_core::imagery::BinaryMask>)> {
    let img = image_io::read_image(image)?;
    let m = mask.map(image_io::read_mask).transpose()?;
    Ok(pipeline::prepare(img, m, cfg))
}

fn execute(cli: Cli) -> Result<i32> {
    let Cli { common, command } = cli;
    match command {
        Command::Segment { image } => {
            let cfg = config(&common, None)?;
            let (img, _) = load_input(&image, None, &cfg)?;
            let mask = pipeline::segment_image(&img, &cfg)?;
            image_io::write_mask(&cfg.output_dir.join(pipeline::MASK), &mask)?;
        }
        Command::Fit { image, mask } => {
            let cfg = config(&common, None)?;
            let ctx = Context::load(&cfg)?;
            let (img, m) = load_input(&image, mask.as_deref(), &cfg)?;
            let m = match m {
                Some(m) => m,
                None => pipeline::segment_image(&img, &cfg)?,
            };
            let fit = pipeline::fit_image(&ctx, cfg.class, &m, &cfg)?;
            pipeline::write_fit(&cfg.output_dir, &ctx, &fit)?;
        }
        Command::Bake { image, fit, mask } => {
            let cfg = config(&common, None)?;
            let ctx = Context::load(&cfg)?;
            let fit = pipeline::read_fit(&fit)?;
            let cfg = PipelineConfig { flip: fit.flipped, ..cfg };
            let (img, m) = load_input(&image, mask.as_deref(), &cfg)?;
            let m = match m {
                Some(m) => m,
                None => pipeline::segment_image(&img, &cfg)?,
            };
            let (corr, atlas) = pipeline::bake(&ctx, &fit, &img, &m, cfg.atlas_size)?;
            image_io::write_atlas(&cfg.output_dir.join(pipeline::ATLAS), &atlas)?;
            formats::write_correspondence(&cfg.output_dir.join(pipeline::CORR), &corr)?;
        }
        Command::Pipeline { input, mask, baseline } => {
            let cfg = config(&common, None)?;
            let ctx = Context::load(&cfg)?;
            if input.is_dir() {
                if !suite::is_suite(&input) {
                    return Err(Error::Config(format!("{} has no {}", input.display(), suite::MANIFEST)));
                }
                let outcome = pipeline::run_suite(&ctx, &input, &cfg, baseline)?;
                let failed = outcome.entries.iter().filter(|e| e.error.is_some()).count();
                eprintln!("{} cases, {failed} failed", outcome.entries.len());
                return Ok(outcome.exit_code);
            }
            let (img, m) = load_input(&input, mask.as_deref(), &cfg)?;
            let out = pipeline::process(&ctx, cfg.class, &img, m.as_ref(), &cfg, baseline)?;
            pipeline::write_outputs(&cfg.output_dir, &ctx, &out)?;
        }
        Command::Warp { image, mask } => {
            let cfg = config(&common, None)?;
            let ctx = Context::load(&cfg)?;
            let (img, m) = load_input(&image, mask.as_deref(), &cfg)?;
            let m = match m {
                Some(m) => m,
                None => pipeline::segment_image(&img, &cfg)?,
            };
            let b = pipeline::run_baseline(&ctx, cfg.class, &img, &m, &cfg)?;
            pipeline::write_baseline(&cfg.output_dir, &b)?;
        }
        Command::Synth { n, seed, perturbation, supersample, width, height } => {
            let cfg = config(&common, Some(seed))?;
            let ctx = Context::load(&cfg)?;
            let d = SynthConfig::default();
            let synth = SynthConfig {
                width: width.unwrap_or(d.width),
                height: height.unwrap_or(d.height),
                atlas_size: cfg.atlas_size,
                perturbation: perturbation.unwrap_or(d.perturbation),
                supersample: supersample.unwrap_or(d.supersample),
                fill: d.fill,
            };
            let seeds: Vec<u64> = (0..n).map(|k| seed + k).collect();
            let cases = generate_suite(&ctx.model, &ctx.garments, &seeds, &synth)?;
            suite::write_suite(&cfg.output_dir, &cases, &synth)?;
        }
        Command::Eval { suite: dir, pred } => {
            let cfg = config(&common, None)?;
            let ctx = Context::load(&cfg)?;
            let pred = pred.unwrap_or_else(|| cfg.output_dir.clone());
            let report = eval::evaluate(&ctx, &dir, &pred)?;
            eval::write_report(&pred, &report)?;
            let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
            eprintln!("evaluated {} cases, {failed} without outputs", report.rows.len());
        }
        Command::ExportDataset { suite: dir, fits } => {
            let cfg = config(&common, None)?;
            let manifest = suite::read_manifest(&dir)?;
            let mut cases = Vec::with_capacity(manifest.cases.len());
            for e in &manifest.cases {
                let case = match &fits {
                    None => {
                        let c = suite::read_case(&dir.join(&e.dir))?;
                        DatasetCase { name: e.dir.clone(), x: coordinate_mask(&c.mask), y: c.atlas, c: c.correspondence }
                    }
                    Some(f) => {
                        let p = f.join(&e.dir);
                        DatasetCase {
                            name: e.dir.clone(),
                            x: coordinate_mask(&image_io::read_mask(&p.join(pipeline::MASK))?),
                            y: image_io::read_atlas(&p.join(pipeline::ATLAS))?,
                            c: formats::read_correspondence(&p.join(pipeline::CORR))?,
                        }
                    }
                };
                cases.push(case);
            }
            export_dataset(&cfg.output_dir, &cases)?;
        }
        Command::Render { fit, pose, shape } => {
            let cfg = config(&common, None)?;
            let ctx = Context::load(&cfg)?;
            let fit = pipeline::read_fit(&fit)?;
            let pose = pose.iter().map(|s| parse_pose(s)).collect::<Result<Vec<_>>>()?;
            let shape = shape.as_deref().map(|s| parse_floats(s, "--shape")).transpose()?;
            let img = pipeline::render_preview(&ctx, &fit, &pose, shape.as_deref())?;
            image_io::write_image(&cfg.output_dir.join("render.png"), &img)?;
        }
    }
    Ok(0)
}
