//! Multi-resolution silhouette energy and its contour pseudo-gradient.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::geom::Vec3;
use crate::imagery::{bilinear_taps, distance_transform, mask_pyramid, BinaryMask, DistanceField, DtSet};
use crate::render::{rasterize_silhouette, Camera, RasterMask};
use crate::{Error, Result};

struct Level {
    width: usize,
    height: usize,
    psi: DistanceField,
    psi_hat: DistanceField,
    /// Signed distance, positive outside the target, zero halfway between
    /// boundary pixel centres.
    sdf: Vec<f64>,
}

impl Level {
    fn sdf_at(&self, x: f64, y: f64) -> f64 {
        let (x0, x1, fx) = bilinear_taps(x - 0.5, self.width);
        let (y0, y1, fy) = bilinear_taps(y - 0.5, self.height);
        let g = |x: usize, y: usize| self.sdf[y * self.width + x];
        let top = g(x0, y0) + (g(x1, y0) - g(x0, y0)) * fx;
        let bot = g(x0, y1) + (g(x1, y1) - g(x0, y1)) * fx;
        top + (bot - top) * fy
    }
}

/// Distance-transform pyramid of a target silhouette.
pub struct SilhouetteTarget {
    width: usize,
    height: usize,
    levels: Vec<Level>,
}

impl SilhouetteTarget {
    /// Builds up to `levels` pyramid levels. Coarse levels where the target
    /// vanishes or fills the whole frame are dropped.
    pub fn new(mask: &BinaryMask, levels: usize) -> Result<Self> {
        let fg = mask.count();
        if fg == 0 {
            return Err(Error::Empty("target silhouette"));
        }
        if fg == mask.width() * mask.height() {
            return Err(Error::InvalidArgument("target silhouette covers the whole image".into()));
        }
        let pyr = mask_pyramid(mask, levels)?;
        let mut out = Vec::with_capacity(levels);
        for m in &pyr {
            let c = m.count();
            if c == 0 || c == m.width() * m.height() {
                break;
            }
            let psi = distance_transform(m, DtSet::Foreground)?;
            let psi_hat = distance_transform(m, DtSet::Background)?;
            let sdf = psi.values().iter().zip(psi_hat.values()).map(|(&o, &i)| if o > 0.0 { o - 0.5 } else { 0.5 - i }).collect();
            out.push(Level { width: m.width(), height: m.height(), psi, psi_hat, sdf });
        }
        Ok(SilhouetteTarget { width: mask.width(), height: mask.height(), levels: out })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Signed distance to the target boundary at level `l`, in that
    /// level's pixels, at level-0 coordinates `(x, y)`.
    pub fn signed_distance(&self, l: usize, x: f64, y: f64) -> f64 {
        let s = (1u64 << l) as f64;
        self.levels[l].sdf_at((x - 0.5) / s + 0.5, (y - 0.5) / s + 0.5)
    }

    /// `sum_l 1/P_l sum_x [w_i R_l Psi_l + w_o (1 - R_l) Psi_hat_l]` with
    /// `R_l` the pyramid of the rendered mask.
    pub fn energy(&self, rendered: &BinaryMask, w_i: f64, w_o: f64) -> Result<f64> {
        if rendered.width() != self.width || rendered.height() != self.height {
            return Err(Error::dims("rendered silhouette", self.width * self.height, rendered.width() * rendered.height()));
        }
        let pyr = mask_pyramid(rendered, self.levels.len())?;
        let mut e = 0.0;
        for (lvl, r) in self.levels.iter().zip(&pyr) {
            let mut s_in = 0.0;
            let mut s_out = 0.0;
            for ((&on, &o), &i) in r.data().iter().zip(lvl.psi.values()).zip(lvl.psi_hat.values()) {
                if on {
                    s_in += o;
                } else {
                    s_out += i;
                }
            }
            e += (w_i * s_in + w_o * s_out) / (lvl.width * lvl.height) as f64;
        }
        Ok(e)
    }
}

/// Rasterizes the mesh and evaluates the silhouette energy.
pub fn silhouette_energy(
    target: &SilhouetteTarget,
    cam: &Camera,
    vertices: &[Vec3],
    faces: &[[usize; 3]],
    w_i: f64,
    w_o: f64,
) -> Result<(f64, RasterMask)> {
    let raster = rasterize_silhouette(cam, vertices, faces)?;
    let e = target.energy(&raster.mask, w_i, w_o)?;
    Ok((e, raster))
}

/// Undirected mesh edges with their incident faces.
pub struct ContourTopology {
    edges: Vec<(usize, usize, usize, Option<usize>)>,
}

impl ContourTopology {
    pub fn new(faces: &[[usize; 3]]) -> Self {
        let mut map: BTreeMap<(usize, usize), (usize, Option<usize>)> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                map.entry((a.min(b), a.max(b)))
                    .and_modify(|e| {
                        if e.1.is_none() {
                            e.1 = Some(fi);
                        }
                    })
                    .or_insert((fi, None));
            }
        }
        ContourTopology { edges: map.into_iter().map(|((a, b), (f0, f1))| (a, b, f0, f1)).collect() }
    }

    /// Projected contour edges `(a, b, unit outward normal, length)`:
    /// boundary edges and edges between faces of opposite projected
    /// orientation.
    pub fn contour_edges(&self, faces: &[[usize; 3]], proj: &[[f64; 2]]) -> Vec<(usize, usize, [f64; 2], f64)> {
        let area = |f: usize| {
            let [a, b, c] = faces[f].map(|v| proj[v]);
            (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        };
        let mut out = Vec::new();
        for &(a, b, f0, f1) in &self.edges {
            let contour = match f1 {
                None => true,
                Some(f1) => area(f0) * area(f1) <= 0.0,
            };
            if !contour {
                continue;
            }
            let c = faces[f0].iter().copied().find(|&v| v != a && v != b).unwrap_or(a);
            let (pa, pb, pc) = (proj[a], proj[b], proj[c]);
            let mut n = [pb[1] - pa[1], pa[0] - pb[0]];
            if n[0] * (pc[0] - pa[0]) + n[1] * (pc[1] - pa[1]) > 0.0 {
                n = [-n[0], -n[1]];
            }
            let len = libm::hypot(n[0], n[1]);
            if len > 0.0 && len.is_finite() {
                out.push((a, b, [n[0] / len, n[1] / len], len));
            }
        }
        out
    }
}

/// Silhouette pseudo-gradient with respect to the vertex positions.
pub struct ContourGradient {
    /// `dE_s/dX` per vertex, zero away from the contour.
    pub grad: Vec<Vec3>,
    /// Curvature proxy per vertex for diagonal preconditioning: the image
    /// space weight `sum_l w ell / P_0`.
    pub weight: Vec<f64>,
}

/// Gradient of `scale * E_s` with respect to the vertices. Every projected
/// contour edge is pushed along its outward normal by the target's signed
/// distance integrated along the edge, shared linearly between its two
/// endpoints and summed over pyramid levels. Samples farther than
/// `band_px` from the rendered silhouette boundary are ignored.
#[allow(clippy::too_many_arguments)]
pub fn silhouette_gradient(
    target: &SilhouetteTarget,
    topo: &ContourTopology,
    cam: &Camera,
    vertices: &[Vec3],
    faces: &[[usize; 3]],
    raster: &RasterMask,
    w_i: f64,
    w_o: f64,
    scale: f64,
    band_px: f64,
) -> Result<ContourGradient> {
    let m = vertices.len();
    let mut g2 = vec![[0.0; 2]; m];
    let mut weight = vec![0.0; m];
    let proj: Vec<[f64; 2]> = vertices.iter().map(|&p| cam.project_point(p).unwrap_or([f64::NAN; 2])).collect();
    let rm = &raster.mask;
    let fg = rm.count();
    let band = if fg > 0 && fg < rm.width() * rm.height() {
        Some((distance_transform(rm, DtSet::Background)?, distance_transform(rm, DtSet::Foreground)?))
    } else {
        None
    };
    let in_band = |x: f64, y: f64| match &band {
        None => true,
        Some((tb, tf)) => {
            let px = (libm::floor(x).max(0.0) as usize).min(rm.width() - 1);
            let py = (libm::floor(y).max(0.0) as usize).min(rm.height() - 1);
            let d = if rm.get(px, py) { tb.get(px, py) } else { tf.get(px, py) };
            d <= band_px
        }
    };
    let p0 = (target.width * target.height) as f64;
    let levels = target.levels.len();
    for (a, b, n, len) in topo.contour_edges(faces, &proj) {
        let (pa, pb) = (proj[a], proj[b]);
        let k = libm::ceil(len).max(2.0) as usize;
        let ds = len / k as f64;
        for i in 0..k {
            let s = (i as f64 + 0.5) / k as f64;
            let x = pa[0] + s * (pb[0] - pa[0]);
            let y = pa[1] + s * (pb[1] - pa[1]);
            if !in_band(x, y) {
                continue;
            }
            let mut val = 0.0;
            let mut wsum = 0.0;
            for l in 0..levels {
                let sc = (1u64 << l) as f64;
                let sd = target.levels[l].sdf_at((x - 0.5) / sc + 0.5, (y - 0.5) / sc + 0.5);
                let w = if sd > 0.0 { w_i } else { w_o };
                val += w * sd;
                wsum += w;
            }
            let f = scale * ds / p0;
            for (v, phi) in [(a, 1.0 - s), (b, s)] {
                g2[v][0] += f * val * phi * n[0];
                g2[v][1] += f * val * phi * n[1];
                weight[v] += f * wsum * phi;
            }
        }
    }
    let grad = (0..m)
        .map(|v| {
            if weight[v] == 0.0 {
                return [0.0; 3];
            }
            let g = g2[v];
            let j = cam.jacobian(vertices[v]);
            [j[0][0] * g[0] + j[1][0] * g[1], j[0][1] * g[0] + j[1][1] * g[1], j[0][2] * g[0] + j[1][2] * g[1]]
        })
        .collect();
    Ok(ContourGradient { grad, weight })
}
