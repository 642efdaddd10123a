//! Shape-context matching plus thin-plate-spline warping: the comparison
//! method the fitting pipeline is measured against.
//!
//! The garment is posed by the stage-1 fit only. Its rendered silhouette is
//! matched to the image silhouette along the contours, the image is warped
//! onto the render with a TPS and the warped image is projected onto the
//! unrefined stage-1 mesh.

mod contour;
mod hungarian;
mod shape_context;
mod tps;

pub use contour::{sample_contour, trace_boundary};
pub use hungarian::hungarian;
pub use shape_context::{chi2, chi2_cost_matrix, shape_context, ShapeContextDescriptor, CHI2_EPS, R_INNER, R_OUTER};
pub use tps::{tps_fit, tps_kernel, tps_warp_image, TpsWarp};

use alloc::vec::Vec;

use crate::fitting::{stage1_fit, FitConfig, Stage1Result};
use crate::imagery::{BinaryMask, Image};
use crate::model::{GarmentTemplate, LbsModel};
use crate::render::{rasterize_silhouette, rasterize_uv_atlas, Camera};
use crate::surfmap::{bake_correspondence, sample_texture, CorrespondenceMap, TextureAtlas};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct BaselineConfig {
    pub fit: FitConfig,
    pub samples: usize,
    pub radial_bins: usize,
    pub angular_bins: usize,
    pub lambda: f64,
    pub atlas_size: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            fit: FitConfig::default(),
            samples: 100,
            radial_bins: 5,
            angular_bins: 12,
            lambda: 1.0,
            atlas_size: 256,
        }
    }
}

impl BaselineConfig {
    pub fn new(fit: FitConfig) -> Self {
        BaselineConfig { fit, ..Self::default() }
    }
}

/// Contour correspondences between two masks: `pairs[k] = (a, b)` with `a`
/// on the first mask and `b` on the second, plus the total matching cost.
pub fn match_contours(
    a: &BinaryMask,
    b: &BinaryMask,
    samples: usize,
    radial: usize,
    angular: usize,
) -> Result<(Vec<([f64; 2], [f64; 2])>, f64)> {
    let la = trace_boundary(a)?.len();
    let lb = trace_boundary(b)?.len();
    let n = samples.min(la).min(lb);
    let pa = sample_contour(a, n)?;
    let pb = sample_contour(b, n)?;
    let da = shape_context(&pa, radial, angular)?;
    let db = shape_context(&pb, radial, angular)?;
    let (assign, cost) = hungarian(&chi2_cost_matrix(&da, &db)?)?;
    Ok((assign.iter().enumerate().map(|(i, &j)| (pa[i], pb[j])).collect(), cost))
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub stage1: Stage1Result,
    /// Maps render pixel coordinates to image pixel coordinates.
    pub warp: TpsWarp,
    /// The input image warped onto the rendered silhouette.
    pub warped: Image,
    pub rendered: BinaryMask,
    /// Texel coordinates in the warped image.
    pub correspondence: CorrespondenceMap,
    pub atlas: TextureAtlas,
    pub matching_cost: f64,
}

impl BaselineResult {
    /// Texel coordinates pulled back through the warp into the input image.
    pub fn image_correspondence(&self) -> CorrespondenceMap {
        self.correspondence.map(|[i, j]| {
            let [x, y] = self.warp.apply([j, i]);
            Some([y, x])
        })
    }
}

pub fn baseline_texture(
    model: &LbsModel,
    tmpl: &GarmentTemplate,
    cam: &Camera,
    image: &Image,
    mask: &BinaryMask,
    cfg: &BaselineConfig,
) -> Result<BaselineResult> {
    if mask.is_empty() {
        return Err(Error::Empty("garment mask"));
    }
    if image.width() != mask.width() || image.height() != mask.height() {
        return Err(Error::dims("image", mask.width() * mask.height(), image.width() * image.height()));
    }
    let stage1 = stage1_fit(model, tmpl, mask, cam, &cfg.fit)?;
    let rendered = rasterize_silhouette(cam, &stage1.vertices, &tmpl.faces)?.mask;
    let (pairs, matching_cost) = match_contours(mask, &rendered, cfg.samples, cfg.radial_bins, cfg.angular_bins)?;
    let (img_pts, ren_pts): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let warp = tps_fit(&ren_pts, &img_pts, cfg.lambda)?;
    let warped = tps_warp_image(&warp, image)?;
    let raster = rasterize_uv_atlas(tmpl, cfg.atlas_size, cfg.atlas_size)?;
    let correspondence = bake_correspondence(tmpl, &stage1.vertices, cam, &rendered, &raster)?;
    let atlas = sample_texture(&warped, &correspondence);
    Ok(BaselineResult { stage1, warp, warped, rendered, correspondence, atlas, matching_cost })
}
