use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::edge::detect_edge_line;
use super::optimize::{armijo_descent, DescentOptions};
use super::silhouette::{silhouette_gradient, ContourTopology, SilhouetteTarget};
use super::stage1::{check_target, stage1_fit, Stage1Result};
use super::{FitConfig, FitResult, PhaseTrace, Stage2Weights};
use crate::geom::{self, Vec3};
use crate::imagery::BinaryMask;
use crate::model::{build_laplacian, GarmentClass, GarmentTemplate, LaplacianMatrix, LbsModel};
use crate::render::{compute_iou, rasterize_silhouette, Camera};
use crate::{Error, Result};

/// Individual stage-2 regulariser values, unweighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage2Terms {
    pub coupling: f64,
    pub laplacian: f64,
    pub edge: f64,
    pub boundary: f64,
}

/// Free-form refinement energy over the vertex positions `G`. Coupling,
/// Laplacian and boundary terms act on the offset `G - G0`.
pub struct Stage2Problem<'a> {
    faces: &'a [[usize; 3]],
    rings: &'a [Vec<usize>],
    top_ring: &'a [usize],
    g0: Vec<Vec3>,
    lap: LaplacianMatrix,
    lap_diag: Vec<f64>,
    ring_diag: Vec<f64>,
    cam: Camera,
    weights: Stage2Weights,
    y_max: Option<f64>,
    silhouette: Option<(&'a SilhouetteTarget, f64, f64, f64)>,
    topo: ContourTopology,
}

impl<'a> Stage2Problem<'a> {
    /// `y_max` is required for garments with a waistline.
    pub fn new(
        tmpl: &'a GarmentTemplate,
        g0: Vec<Vec3>,
        cam: Camera,
        weights: Stage2Weights,
        y_max: Option<f64>,
    ) -> Result<Self> {
        cam.validate()?;
        if g0.len() != tmpl.num_vertices() {
            return Err(Error::dims("stage-2 initial vertices", tmpl.num_vertices(), g0.len()));
        }
        if tmpl.class.has_waistline() && y_max.is_none() {
            return Err(Error::InvalidArgument(alloc::format!("{} fitting needs a detected waistline", tmpl.class.name())));
        }
        let lap = build_laplacian(tmpl)?;
        let mut lap_diag = vec![0.0; g0.len()];
        for i in 0..lap.size() {
            for &(j, w) in lap.row(i) {
                lap_diag[j] += w * w;
            }
        }
        let mut ring_diag = vec![0.0; g0.len()];
        for ring in &tmpl.boundary_rings {
            for &v in ring {
                ring_diag[v] += 6.0;
            }
        }
        Ok(Stage2Problem {
            faces: &tmpl.faces,
            rings: &tmpl.boundary_rings,
            top_ring: if tmpl.class == GarmentClass::TShirt && y_max.is_none() { &[] } else { &tmpl.top_ring },
            g0,
            lap,
            lap_diag,
            ring_diag,
            cam,
            weights,
            y_max,
            silhouette: None,
            topo: ContourTopology::new(&tmpl.faces),
        })
    }

    /// Adds the silhouette term against `target`.
    pub fn with_silhouette(mut self, target: &'a SilhouetteTarget, w_i: f64, w_o: f64, band_px: f64) -> Self {
        self.silhouette = Some((target, w_i, w_o, band_px));
        self
    }

    pub fn initial(&self) -> &[Vec3] {
        &self.g0
    }

    fn offsets(&self, g: &[Vec3]) -> Vec<Vec3> {
        g.iter().zip(&self.g0).map(|(a, b)| geom::sub(*a, *b)).collect()
    }

    fn projected_y(&self, p: Vec3) -> f64 {
        self.cam.focal * p[1] / p[2] + self.cam.cy
    }

    /// Distance of the projection to the edge line in image heights, so
    /// the term does not grow with the resolution.
    fn edge_residual(&self, p: Vec3, y_max: f64) -> f64 {
        (self.projected_y(p) - y_max) / self.cam.height as f64
    }

    pub fn terms(&self, g: &[Vec3]) -> Stage2Terms {
        let u = self.offsets(g);
        let coupling = u.iter().map(|d| geom::norm_sq(*d)).sum();
        let laplacian = self.lap.apply(&u).iter().map(|d| geom::norm_sq(*d)).sum();
        let mut boundary = 0.0;
        for ring in self.rings {
            let r = ring.len();
            for i in 0..r {
                let d = second_difference(&u, ring, i);
                boundary += geom::norm_sq(d);
            }
        }
        let edge = match self.y_max {
            Some(y) => self
                .top_ring
                .iter()
                .map(|&v| {
                    if g[v][2] <= self.cam.z_near {
                        f64::INFINITY
                    } else {
                        let e = self.edge_residual(g[v], y);
                        e * e
                    }
                })
                .sum(),
            None => 0.0,
        };
        Stage2Terms { coupling, laplacian, edge, boundary }
    }

    /// Weighted regularisers without the silhouette term.
    pub fn smooth_energy(&self, g: &[Vec3]) -> f64 {
        let t = self.terms(g);
        let w = &self.weights;
        let edge = if w.w_e == 0.0 { 0.0 } else { w.w_e * t.edge };
        w.w_c * t.coupling + w.w_l * t.laplacian + edge + w.w_b * t.boundary
    }

    /// Analytic gradient of [`Self::smooth_energy`].
    pub fn smooth_gradient(&self, g: &[Vec3]) -> Vec<Vec3> {
        let w = &self.weights;
        let u = self.offsets(g);
        let lu = self.lap.apply(&u);
        let ltlu = self.lap.apply_transpose(&lu);
        let mut out: Vec<Vec3> =
            u.iter().zip(&ltlu).map(|(a, b)| geom::add(geom::scale(*a, 2.0 * w.w_c), geom::scale(*b, 2.0 * w.w_l))).collect();
        if w.w_b != 0.0 {
            for ring in self.rings {
                let r = ring.len();
                for i in 0..r {
                    let d = geom::scale(second_difference(&u, ring, i), 2.0 * w.w_b);
                    let (p, n) = (ring[(i + r - 1) % r], ring[(i + 1) % r]);
                    out[p] = geom::add(out[p], d);
                    out[n] = geom::add(out[n], d);
                    out[ring[i]] = geom::sub(out[ring[i]], geom::scale(d, 2.0));
                }
            }
        }
        if let (Some(y), true) = (self.y_max, w.w_e != 0.0) {
            for &v in self.top_ring {
                let p = g[v];
                let e = self.edge_residual(p, y);
                let k = 2.0 * w.w_e * e * self.cam.focal / (p[2] * self.cam.height as f64);
                out[v][1] += k;
                out[v][2] -= k * p[1] / p[2];
            }
        }
        out
    }

    /// Full stage-2 energy.
    pub fn energy(&self, g: &[Vec3]) -> Result<f64> {
        if g.len() != self.g0.len() {
            return Err(Error::dims("stage-2 vertices", self.g0.len(), g.len()));
        }
        let mut e = self.smooth_energy(g);
        if let Some((target, w_i, w_o, _)) = self.silhouette {
            if self.weights.w_s != 0.0 {
                let raster = rasterize_silhouette(&self.cam, g, self.faces)?;
                e += self.weights.w_s * target.energy(&raster.mask, w_i, w_o)?;
            }
        }
        Ok(e)
    }

    fn direction(&self, g: &[Vec3]) -> Result<(Vec<f64>, Vec<f64>)> {
        let w = &self.weights;
        let mut grad = self.smooth_gradient(g);
        let mut sil_weight = vec![0.0; g.len()];
        if let Some((target, w_i, w_o, band)) = self.silhouette {
            if w.w_s != 0.0 {
                let raster = rasterize_silhouette(&self.cam, g, self.faces)?;
                let cg = silhouette_gradient(target, &self.topo, &self.cam, g, self.faces, &raster, w_i, w_o, w.w_s, band)?;
                for (a, b) in grad.iter_mut().zip(&cg.grad) {
                    *a = geom::add(*a, *b);
                }
                sil_weight = cg.weight;
            }
        }
        let mut top = vec![false; g.len()];
        if self.y_max.is_some() {
            for &v in self.top_ring {
                top[v] = true;
            }
        }
        let mut d = Vec::with_capacity(3 * g.len());
        let mut disp = 0.0f64;
        for v in 0..g.len() {
            let px = self.cam.focal / g[v][2].abs().max(self.cam.z_near);
            let mut h = sil_weight[v] * px * px + 2.0 * w.w_c + 2.0 * w.w_l * self.lap_diag[v] + 2.0 * w.w_b * self.ring_diag[v];
            if top[v] {
                let rows = self.cam.height as f64;
                h += 2.0 * w.w_e * px * px / (rows * rows);
            }
            let s = if h > 0.0 { -1.0 / h } else { -1.0 };
            let dv = geom::scale(grad[v], s);
            disp = disp.max(geom::norm(dv) * px);
            d.extend_from_slice(&dv);
        }
        if disp > 0.0 && disp.is_finite() {
            for x in &mut d {
                *x /= disp;
            }
        }
        Ok((grad.iter().flatten().copied().collect(), d))
    }

    /// Runs the normalised descent from `G0`.
    pub fn solve(&self, opts: &DescentOptions) -> Result<(Vec<Vec3>, PhaseTrace)> {
        let x0: Vec<f64> = self.g0.iter().flatten().copied().collect();
        let out = armijo_descent(
            x0,
            opts,
            |x| self.energy(&unflatten(x)),
            |x| self.direction(&unflatten(x)),
        )?;
        let trace = PhaseTrace { name: String::from("stage2"), energies: out.energies, stop: String::from(out.stop.name()) };
        Ok((unflatten(&out.x), trace))
    }
}

fn second_difference(u: &[Vec3], ring: &[usize], i: usize) -> Vec3 {
    let r = ring.len();
    let prev = u[ring[(i + r - 1) % r]];
    let next = u[ring[(i + 1) % r]];
    geom::sub(geom::add(prev, next), geom::scale(u[ring[i]], 2.0))
}

fn unflatten(x: &[f64]) -> Vec<Vec3> {
    x.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

/// Free-form refinement after [`stage1_fit`].
pub fn stage2_fit(
    tmpl: &GarmentTemplate,
    target: &BinaryMask,
    cam: &Camera,
    cfg: &FitConfig,
    stage1: Stage1Result,
) -> Result<FitResult> {
    check_target(target, cam, cfg)?;
    let st = SilhouetteTarget::new(target, cfg.pyramid_levels)?;
    let y_max = if tmpl.class.has_waistline() { Some(detect_edge_line(target, cfg.edge_fraction)?.y) } else { None };
    let prob = Stage2Problem::new(tmpl, stage1.vertices.clone(), *cam, cfg.stage2, y_max)?.with_silhouette(
        &st,
        cfg.stage1.w_i,
        cfg.stage1.w_o,
        cfg.band_px,
    );
    let opts = DescentOptions {
        max_iters: cfg.stage2_max_iters,
        tol: cfg.tol,
        armijo_c: cfg.armijo_c,
        max_halvings: cfg.max_halvings,
        step0: cfg.stage2_step_px,
        step_max: cfg.stage2_max_step_px,
    };
    let (vertices, stage2_trace) = prob.solve(&opts)?;
    let raster = rasterize_silhouette(cam, &vertices, &tmpl.faces)?;
    let stage2_iou = compute_iou(&raster.mask, target)?;
    let final_silhouette_energy = st.energy(&raster.mask, cfg.stage1.w_i, cfg.stage1.w_o)?;
    Ok(FitResult {
        class: tmpl.class,
        params: stage1.params,
        vertices,
        stage1_traces: stage1.traces,
        stage2_trace,
        stage1_iou: stage1.iou,
        stage2_iou,
        final_silhouette_energy,
    })
}

/// Both stages from the default initialisation.
pub fn fit_garment(
    model: &LbsModel,
    tmpl: &GarmentTemplate,
    target: &BinaryMask,
    cam: &Camera,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let s1 = stage1_fit(model, tmpl, target, cam, cfg)?;
    stage2_fit(tmpl, target, cam, cfg, s1)
}
