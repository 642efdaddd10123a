//! Two-stage silhouette registration of a garment template.
//!
//! Stage 1 fits shape, the class's active joint rotations and translation
//! of the parametric garment; stage 2 frees every vertex and refines the
//! mesh against the silhouette under coupling and smoothness terms.

mod edge;
mod optimize;
mod silhouette;
mod stage1;
mod stage2;

use alloc::string::String;
use alloc::vec::Vec;

use crate::geom::{self, Vec3};
use crate::linalg::{cholesky_solve, Matrix};
use crate::model::{covariance_factor, pose_garment, GarmentClass, GarmentTemplate, LbsModel, PoseParams};
use crate::render::Camera;
use crate::{Error, Result};

pub use edge::{detect_edge_line, EdgeLine};
pub use optimize::{armijo_descent, DescentOptions, DescentOutcome, StopReason};
pub use silhouette::{silhouette_energy, silhouette_gradient, ContourGradient, ContourTopology, SilhouetteTarget};
pub use stage1::{stage1_fit, stage1_fit_from, Stage1Result};
pub use stage2::{fit_garment, stage2_fit, Stage2Problem, Stage2Terms};

/// Photographed side of the garment; selects the weight table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum View {
    #[default]
    Front,
    Back,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stage1Weights {
    pub w_s: f64,
    pub w_beta: f64,
    /// Pose-prior weight while shape is held fixed.
    pub w_theta_pose_only: f64,
    /// Pose-prior weight once shape is free as well.
    pub w_theta_joint: f64,
    pub w_i: f64,
    pub w_o: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stage2Weights {
    pub w_s: f64,
    pub w_c: f64,
    pub w_l: f64,
    pub w_e: f64,
    pub w_b: f64,
}

/// Order in which stage 1 frees its variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Schedule {
    /// Shape and translation first, then everything.
    ShapeFirst,
    /// Pose and translation first, then everything.
    PoseFirst,
}

impl Schedule {
    pub fn for_class(class: GarmentClass) -> Self {
        match class {
            GarmentClass::TShirt => Schedule::ShapeFirst,
            GarmentClass::Shorts | GarmentClass::Pants => Schedule::PoseFirst,
        }
    }
}

/// Per-class and per-view weights of both stages.
pub fn default_weights(class: GarmentClass, view: View) -> (Stage1Weights, Stage2Weights) {
    let s1 = |w_s, w_beta, pose_only, joint| Stage1Weights {
        w_s,
        w_beta,
        w_theta_pose_only: pose_only,
        w_theta_joint: joint,
        w_i: 1.0,
        w_o: 1.0,
    };
    let s2 = |w_s, w_c, w_b, w_l, w_e| Stage2Weights { w_s, w_c, w_l, w_e, w_b };
    match (class, view) {
        (GarmentClass::TShirt, View::Front) => (s1(100.0, 3.0, 1.0, 1.0), s2(2.0, 0.3, 2.0, 30.0, 0.0)),
        (GarmentClass::TShirt, View::Back) => (s1(100.0, 5.0, 0.0, 0.0), s2(2.0, 0.3, 2.0, 30.0, 0.0)),
        (GarmentClass::Shorts, View::Front) => (s1(100.0, 4.0, 30.0, 20.0), s2(100.0, 4.0, 2.0, 45.0, 0.001)),
        (GarmentClass::Shorts, View::Back) => (s1(160.0, 3.0, 40.0, 30.0), s2(100.0, 3.8, 6.0, 75.0, 0.01)),
        (GarmentClass::Pants, _) => (s1(100.0, 4.0, 40.0, 5.0), s2(100.0, 0.5, 2.0, 45.0, 0.1)),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FitConfig {
    pub class: GarmentClass,
    pub view: View,
    pub stage1: Stage1Weights,
    pub stage2: Stage2Weights,
    pub schedule: Schedule,
    pub pyramid_levels: usize,
    pub stage1_max_iters: usize,
    pub stage2_max_iters: usize,
    /// Relative energy decrease below which a phase stops.
    pub tol: f64,
    /// Finite-difference step for angles and shape; translation uses this
    /// times the initial depth.
    pub fd_step: f64,
    pub armijo_c: f64,
    pub max_halvings: usize,
    /// Initial and largest step, as the largest vertex move in pixels.
    pub stage1_step_px: f64,
    pub stage1_max_step_px: f64,
    pub stage2_step_px: f64,
    pub stage2_max_step_px: f64,
    /// Contour vertices farther than this from the rendered silhouette
    /// boundary get no silhouette gradient.
    pub band_px: f64,
    /// Row-occupancy fraction for the waistline detector.
    pub edge_fraction: f64,
    pub min_target_pixels: usize,
}

impl FitConfig {
    pub fn new(class: GarmentClass, view: View) -> Self {
        let (stage1, stage2) = default_weights(class, view);
        FitConfig {
            class,
            view,
            stage1,
            stage2,
            schedule: Schedule::for_class(class),
            pyramid_levels: 3,
            stage1_max_iters: 200,
            stage2_max_iters: 500,
            tol: 1e-6,
            fd_step: 1e-3,
            armijo_c: 1e-4,
            max_halvings: 30,
            stage1_step_px: 4.0,
            stage1_max_step_px: 8.0,
            stage2_step_px: 1.0,
            stage2_max_step_px: 2.0,
            band_px: 3.0,
            edge_fraction: 0.5,
            min_target_pixels: 25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s1 = &self.stage1;
        let s2 = &self.stage2;
        let all = [
            s1.w_s, s1.w_beta, s1.w_theta_pose_only, s1.w_theta_joint, s1.w_i, s1.w_o, s2.w_s, s2.w_c, s2.w_l, s2.w_e, s2.w_b,
        ];
        if all.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument("fit weights must be finite and non-negative".into()));
        }
        if self.pyramid_levels == 0 {
            return Err(Error::InvalidArgument("pyramid_levels must be at least 1".into()));
        }
        if !(self.tol >= 0.0 && self.fd_step > 0.0 && self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::InvalidArgument("invalid optimiser tolerances".into()));
        }
        if !(self.stage1_step_px > 0.0 && self.stage2_step_px > 0.0) {
            return Err(Error::InvalidArgument("step sizes must be positive".into()));
        }
        Ok(())
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig::new(GarmentClass::TShirt, View::Front)
    }
}

/// Energies of one optimisation phase, one entry per accepted iterate.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseTrace {
    pub name: String,
    pub energies: Vec<f64>,
    pub stop: String,
}

impl PhaseTrace {
    pub fn is_non_increasing(&self) -> bool {
        self.energies.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn accepted_steps(&self) -> usize {
        self.energies.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub class: GarmentClass,
    pub params: PoseParams,
    /// Free-form stage-2 vertices `G`.
    pub vertices: Vec<Vec3>,
    pub stage1_traces: Vec<PhaseTrace>,
    pub stage2_trace: PhaseTrace,
    pub stage1_iou: f64,
    pub stage2_iou: f64,
    /// Image-space silhouette energy of the final mesh.
    pub final_silhouette_energy: f64,
}

impl FitResult {
    pub fn traces(&self) -> impl Iterator<Item = &PhaseTrace> {
        self.stage1_traces.iter().chain(core::iter::once(&self.stage2_trace))
    }
}

/// Mahalanobis shape prior `beta^T Sigma^-1 beta`.
pub fn shape_prior_energy(beta: &[f64], covariance: &Matrix) -> Result<f64> {
    Ok(shape_prior(beta, covariance)?.0)
}

/// Energy and gradient of the shape prior.
pub(crate) fn shape_prior(beta: &[f64], covariance: &Matrix) -> Result<(f64, Vec<f64>)> {
    if covariance.rows() != beta.len() || covariance.cols() != beta.len() {
        return Err(Error::dims("shape covariance", beta.len(), covariance.rows()));
    }
    if beta.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let l = covariance_factor(covariance)?;
    let x = cholesky_solve(&l, beta);
    let e = beta.iter().zip(&x).map(|(b, v)| b * v).sum();
    Ok((e, x.iter().map(|v| 2.0 * v).collect()))
}

/// `sum_{j in active} |theta_j - theta_A,j|^2`.
pub fn pose_prior_energy(theta: &[Vec3], theta_a: &[Vec3], active: &[usize]) -> Result<f64> {
    if theta.len() != theta_a.len() {
        return Err(Error::dims("pose rotations", theta_a.len(), theta.len()));
    }
    Ok(active.iter().map(|&j| geom::norm_sq(geom::sub(theta[j], theta_a[j]))).sum())
}

/// Translation that centres the A-posed garment in the image and scales it
/// to fill `fill` of the frame.
pub fn initial_translation(model: &LbsModel, tmpl: &GarmentTemplate, cam: &Camera, fill: f64) -> Result<Vec3> {
    let p = PoseParams::a_pose(model, tmpl.class, [0.0; 3]);
    let v = pose_garment(model, tmpl, &p)?;
    if v.is_empty() {
        return Err(Error::Empty("garment vertices"));
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for q in &v {
        for a in 0..3 {
            lo[a] = lo[a].min(q[a]);
            hi[a] = hi[a].max(q[a]);
        }
    }
    let zx = cam.focal * (hi[0] - lo[0]) / (fill * cam.width as f64);
    let zy = cam.focal * (hi[1] - lo[1]) / (fill * cam.height as f64);
    let depth = zx.max(zy);
    // Place the box centre on the optical axis line through the principal
    // point's pixel offset from the image centre.
    let ox = (0.5 * cam.width as f64 - cam.cx) * depth / cam.focal;
    let oy = (0.5 * cam.height as f64 - cam.cy) * depth / cam.focal;
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])];
    Ok([ox - mid[0], oy - mid[1], depth - mid[2]])
}
