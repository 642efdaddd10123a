use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::optimize::{armijo_descent, DescentOptions};
use super::silhouette::{silhouette_gradient, ContourTopology, SilhouetteTarget};
use super::{initial_translation, shape_prior, FitConfig, PhaseTrace, Schedule};
use crate::geom::{self, Vec3};
use crate::imagery::BinaryMask;
use crate::linalg::cholesky_solve;
use crate::model::{covariance_factor, GarmentTemplate, LbsModel, PoseParams, Poser};
use crate::render::{compute_iou, rasterize_silhouette, Camera};
use crate::{Error, Result};

/// Outcome of the parametric stage.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stage1Result {
    pub params: PoseParams,
    pub vertices: Vec<Vec3>,
    pub traces: Vec<PhaseTrace>,
    pub iou: f64,
    /// Unweighted silhouette energy at the result.
    pub silhouette_energy: f64,
}

pub(crate) fn check_target(target: &BinaryMask, cam: &Camera, cfg: &FitConfig) -> Result<()> {
    cam.validate()?;
    cfg.validate()?;
    if target.width() != cam.width || target.height() != cam.height {
        return Err(Error::InvalidArgument(format!(
            "target mask is {}x{} but the camera expects {}x{}",
            target.width(),
            target.height(),
            cam.width,
            cam.height
        )));
    }
    let n = target.count();
    if n < cfg.min_target_pixels {
        return Err(Error::InvalidArgument(format!(
            "target silhouette has {n} pixels; at least {} required",
            cfg.min_target_pixels
        )));
    }
    Ok(())
}

/// Fits shape, active pose and translation starting from the A-pose,
/// centred in the frame.
pub fn stage1_fit(
    model: &LbsModel,
    tmpl: &GarmentTemplate,
    target: &BinaryMask,
    cam: &Camera,
    cfg: &FitConfig,
) -> Result<Stage1Result> {
    check_target(target, cam, cfg)?;
    let t = initial_translation(model, tmpl, cam, 0.7)?;
    stage1_fit_from(model, tmpl, target, cam, cfg, PoseParams::a_pose(model, tmpl.class, t))
}

struct Problem<'a> {
    poser: Poser<'a>,
    faces: &'a [[usize; 3]],
    cam: &'a Camera,
    target: &'a SilhouetteTarget,
    topo: ContourTopology,
    cfg: &'a FitConfig,
    base: PoseParams,
    active: Vec<usize>,
    num_shapes: usize,
    cov_inv_diag: Vec<f64>,
    fd: Vec<f64>,
}

impl Problem<'_> {
    fn len(&self) -> usize {
        self.num_shapes + 3 * self.active.len() + 3
    }

    fn pack(&self, p: &PoseParams) -> Vec<f64> {
        let mut q = p.beta.clone();
        for &j in &self.active {
            q.extend_from_slice(&p.theta[j]);
        }
        q.extend_from_slice(&p.trans);
        q
    }

    fn unpack(&self, q: &[f64]) -> PoseParams {
        let mut p = self.base.clone();
        let s = self.num_shapes;
        p.beta.copy_from_slice(&q[..s]);
        for (k, &j) in self.active.iter().enumerate() {
            p.theta[j] = [q[s + 3 * k], q[s + 3 * k + 1], q[s + 3 * k + 2]];
        }
        let o = s + 3 * self.active.len();
        p.trans = [q[o], q[o + 1], q[o + 2]];
        p
    }

    fn priors(&self, p: &PoseParams, w_theta: f64) -> Result<(f64, Vec<f64>)> {
        let w = &self.cfg.stage1;
        let (eb, gb) = shape_prior(&p.beta, &self.poser.model().shape_covariance)?;
        let mut grad = vec![0.0; self.len()];
        for (g, v) in grad.iter_mut().zip(&gb) {
            *g = w.w_beta * v;
        }
        let mut et = 0.0;
        let a = &self.poser.model().a_pose;
        for (k, &j) in self.active.iter().enumerate() {
            let d = geom::sub(p.theta[j], a[j]);
            et += geom::norm_sq(d);
            for c in 0..3 {
                grad[self.num_shapes + 3 * k + c] = 2.0 * w_theta * d[c];
            }
        }
        Ok((w.w_beta * eb + w_theta * et, grad))
    }

    fn energy(&self, q: &[f64], w_theta: f64) -> Result<f64> {
        let p = self.unpack(q);
        let v = self.poser.pose(&p)?;
        let raster = rasterize_silhouette(self.cam, &v, self.faces)?;
        let w = &self.cfg.stage1;
        let es = self.target.energy(&raster.mask, w.w_i, w.w_o)?;
        Ok(w.w_s * es + self.priors(&p, w_theta)?.0)
    }

    fn direction(&self, q: &[f64], free: &[bool], w_theta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let w = &self.cfg.stage1;
        let p = self.unpack(q);
        let verts = self.poser.pose(&p)?;
        let raster = rasterize_silhouette(self.cam, &verts, self.faces)?;
        let cg = silhouette_gradient(
            self.target,
            &self.topo,
            self.cam,
            &verts,
            self.faces,
            &raster,
            w.w_i,
            w.w_o,
            w.w_s,
            self.cfg.band_px,
        )?;
        let (_, mut g) = self.priors(&p, w_theta)?;
        let n = self.len();
        let mut h = vec![0.0; n];
        for i in 0..self.num_shapes {
            h[i] = 2.0 * w.w_beta * self.cov_inv_diag[i];
        }
        for k in 0..3 * self.active.len() {
            h[self.num_shapes + k] = 2.0 * w_theta;
        }
        let mut cols: Vec<Option<Vec<Vec3>>> = vec![None; n];
        let mut qq = q.to_vec();
        for i in (0..n).filter(|&i| free[i]) {
            let step = self.fd[i];
            qq[i] = q[i] + step;
            let plus = self.poser.pose(&self.unpack(&qq))?;
            qq[i] = q[i] - step;
            let minus = self.poser.pose(&self.unpack(&qq))?;
            qq[i] = q[i];
            let col: Vec<Vec3> = plus.iter().zip(&minus).map(|(a, b)| geom::scale(geom::sub(*a, *b), 0.5 / step)).collect();
            let mut gi = 0.0;
            let mut hi = 0.0;
            for (v, j) in col.iter().enumerate() {
                gi += geom::dot(cg.grad[v], *j);
                if cg.weight[v] > 0.0 {
                    let px = self.cam.focal / verts[v][2];
                    hi += cg.weight[v] * px * px * geom::norm_sq(*j);
                }
            }
            g[i] += gi;
            h[i] += hi;
            cols[i] = Some(col);
        }
        let hmax = (0..n).filter(|&i| free[i]).map(|i| h[i]).fold(0.0, f64::max);
        let mut d = vec![0.0; n];
        for i in (0..n).filter(|&i| free[i]) {
            d[i] = if hmax > 0.0 { -g[i] / (h[i] + 1e-9 * hmax) } else { -g[i] };
        }
        for i in (0..n).filter(|&i| !free[i]) {
            g[i] = 0.0;
        }
        let mut disp = 0.0f64;
        for (v, x) in verts.iter().enumerate() {
            let mut m = [0.0; 3];
            for (i, col) in cols.iter().enumerate() {
                if let Some(col) = col {
                    m = geom::add(m, geom::scale(col[v], d[i]));
                }
            }
            disp = disp.max(geom::norm(m) * self.cam.focal / x[2].abs().max(self.cam.z_near));
        }
        if disp > 0.0 && disp.is_finite() {
            for di in &mut d {
                *di /= disp;
            }
        }
        Ok((g, d))
    }
}

/// Like [`stage1_fit`] from a caller-supplied initial state.
pub fn stage1_fit_from(
    model: &LbsModel,
    tmpl: &GarmentTemplate,
    target: &BinaryMask,
    cam: &Camera,
    cfg: &FitConfig,
    init: PoseParams,
) -> Result<Stage1Result> {
    check_target(target, cam, cfg)?;
    tmpl.validate(model)?;
    if init.theta.len() != model.num_joints() {
        return Err(Error::dims("pose rotations", model.num_joints(), init.theta.len()));
    }
    model.check_beta(&init.beta)?;
    let st = SilhouetteTarget::new(target, cfg.pyramid_levels)?;
    let active = tmpl.class.active_joints().to_vec();
    let s = model.num_shapes;
    let cov_inv_diag = if s > 0 {
        let l = covariance_factor(&model.shape_covariance)?;
        (0..s)
            .map(|i| {
                let mut e = vec![0.0; s];
                e[i] = 1.0;
                cholesky_solve(&l, &e)[i]
            })
            .collect()
    } else {
        Vec::new()
    };
    let depth = init.trans[2].abs().max(1e-9);
    let mut base = init;
    base.active_joints = active.clone();
    let mut prob = Problem {
        poser: Poser::new(model, tmpl)?,
        faces: &tmpl.faces,
        cam,
        target: &st,
        topo: ContourTopology::new(&tmpl.faces),
        cfg,
        base,
        active,
        num_shapes: s,
        cov_inv_diag,
        fd: Vec::new(),
    };
    let n = prob.len();
    prob.fd = (0..n).map(|i| if i >= n - 3 { cfg.fd_step * depth } else { cfg.fd_step }).collect();
    let in_shape = |i: usize| i < s;
    let in_pose = |i: usize| i >= s && i < n - 3;
    let (first, first_name): (Vec<bool>, &str) = match cfg.schedule {
        Schedule::ShapeFirst => ((0..n).map(|i| !in_pose(i)).collect(), "stage1_shape_translation"),
        Schedule::PoseFirst => ((0..n).map(|i| !in_shape(i)).collect(), "stage1_pose_translation"),
    };
    let w = &cfg.stage1;
    let phases = [(first, first_name, w.w_theta_pose_only), (vec![true; n], "stage1_joint", w.w_theta_joint)];
    let opts = DescentOptions {
        max_iters: cfg.stage1_max_iters,
        tol: cfg.tol,
        armijo_c: cfg.armijo_c,
        max_halvings: cfg.max_halvings,
        step0: cfg.stage1_step_px,
        step_max: cfg.stage1_max_step_px,
    };
    let mut q = prob.pack(&prob.base);
    let mut traces = Vec::new();
    for (free, name, w_theta) in phases {
        let out = armijo_descent(q, &opts, |x| prob.energy(x, w_theta), |x| prob.direction(x, &free, w_theta))?;
        q = out.x;
        traces.push(PhaseTrace { name: String::from(name), energies: out.energies, stop: String::from(out.stop.name()) });
    }
    let params = prob.unpack(&q);
    let vertices = prob.poser.pose(&params)?;
    let raster = rasterize_silhouette(cam, &vertices, &tmpl.faces)?;
    let iou = compute_iou(&raster.mask, target)?;
    let silhouette_energy = st.energy(&raster.mask, w.w_i, w.w_o)?;
    Ok(Stage1Result { params, vertices, traces, iou, silhouette_energy })
}
