//! Pinhole camera, projection and a small edge-function rasterizer for
//! silhouettes, depth-buffered visibility and UV atlases.
//!
//! The camera looks down `+z` with `y` pointing down the image. Pixel
//! `(x, y)` has its centre at `(x + 0.5, y + 0.5)`.

mod atlas;

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::Vec3;
use crate::imagery::{BinaryMask, Image};
use crate::{Error, Result};

pub use atlas::{rasterize_uv_atlas, AtlasRaster};

pub const NO_FACE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Camera {
    pub focal: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub z_near: f64,
}

impl Camera {
    /// Default intrinsics: focal length 1.2 x width, centred principal point.
    pub fn for_image(width: usize, height: usize) -> Self {
        Camera { focal: 1.2 * width as f64, cx: 0.5 * width as f64, cy: 0.5 * height as f64, width, height, z_near: 1e-6 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal > 0.0 && self.focal.is_finite()) {
            return Err(Error::InvalidArgument("focal length must be positive".into()));
        }
        if !(0.0..=self.width as f64).contains(&self.cx) || !(0.0..=self.height as f64).contains(&self.cy) {
            return Err(Error::InvalidArgument("principal point must lie inside the image".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("camera image is empty".into()));
        }
        Ok(())
    }

    /// The same camera on an image upsampled by an integer factor.
    pub fn scaled(&self, s: usize) -> Camera {
        let f = s as f64;
        Camera { focal: self.focal * f, cx: self.cx * f, cy: self.cy * f, width: self.width * s, height: self.height * s, z_near: self.z_near }
    }

    #[inline]
    pub fn project_point(&self, p: Vec3) -> Option<[f64; 2]> {
        if p[2] <= self.z_near || !p.iter().all(|c| c.is_finite()) {
            return None;
        }
        Some([self.focal * p[0] / p[2] + self.cx, self.focal * p[1] / p[2] + self.cy])
    }

    /// `d(u, v) / d(x, y, z)` at `p`.
    #[inline]
    pub fn jacobian(&self, p: Vec3) -> [[f64; 3]; 2] {
        let iz = 1.0 / p[2];
        let f = self.focal * iz;
        [[f, 0.0, -f * p[0] * iz], [0.0, f, -f * p[1] * iz]]
    }
}

/// Projected pixel coordinates and validity (in front of the near plane).
pub fn project(cam: &Camera, points: &[Vec3]) -> Vec<([f64; 2], bool)> {
    points
        .iter()
        .map(|&p| match cam.project_point(p) {
            Some(q) => (q, true),
            None => ([f64::NAN, f64::NAN], false),
        })
        .collect()
}

/// Binary coverage plus the nearest surface depth and face per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    pub mask: BinaryMask,
    /// Camera-space `z` of the front-most surface; `+inf` where uncovered.
    pub depth: Vec<f64>,
    pub face: Vec<usize>,
}

impl RasterMask {
    pub fn depth_at(&self, x: usize, y: usize) -> f64 {
        self.depth[y * self.mask.width() + x]
    }

    pub fn face_at(&self, x: usize, y: usize) -> usize {
        self.face[y * self.mask.width() + x]
    }
}

/// Edge function `(b - a) x (p - a)` evaluated from the lexicographically
/// smaller endpoint, so two triangles sharing an edge get exactly opposite
/// values.
#[inline]
pub(crate) fn edge_value(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    if (a[0], a[1]) <= (b[0], b[1]) {
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    } else {
        -((a[0] - b[0]) * (p[1] - b[1]) - (a[1] - b[1]) * (p[0] - b[0]))
    }
}

/// Whether a positively oriented triangle owns its edge `a -> b` when a
/// sample lies exactly on it.
#[inline]
fn owns_edge(a: [f64; 2], b: [f64; 2]) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

/// Visits the sample points `(x + 0.5, y + 0.5)` covered by a 2D triangle,
/// passing pixel indices and barycentric weights of the three corners.
pub(crate) fn scan_triangle(
    tri: [[f64; 2]; 3],
    width: usize,
    height: usize,
    mut visit: impl FnMut(usize, usize, [f64; 3]),
) {
    let mut t = tri;
    let mut perm = [0usize, 1, 2];
    let area = edge_value(t[0], t[1], t[2]);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    if area < 0.0 {
        t.swap(1, 2);
        perm.swap(1, 2);
    }
    let area = area.abs();
    let xmin = t.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let xmax = t.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let ymin = t.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let ymax = t.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let x0 = libm::floor(xmin - 0.5).max(0.0) as usize;
    let y0 = libm::floor(ymin - 0.5).max(0.0) as usize;
    let x1 = (libm::ceil(xmax - 0.5).max(-1.0) + 1.0).min(width as f64) as usize;
    let y1 = (libm::ceil(ymax - 0.5).max(-1.0) + 1.0).min(height as f64) as usize;
    let owns = [owns_edge(t[1], t[2]), owns_edge(t[2], t[0]), owns_edge(t[0], t[1])];
    for y in y0..y1 {
        for x in x0..x1 {
            let p = [x as f64 + 0.5, y as f64 + 0.5];
            // e[k] is opposite corner k.
            let e = [edge_value(t[1], t[2], p), edge_value(t[2], t[0], p), edge_value(t[0], t[1], p)];
            if (0..3).all(|k| e[k] > 0.0 || (e[k] == 0.0 && owns[k])) {
                let mut bary = [0.0; 3];
                for k in 0..3 {
                    bary[perm[k]] = e[k] / area;
                }
                visit(x, y, bary);
            }
        }
    }
}

/// Union of projected triangles with a nearest-depth buffer. Faces with a
/// vertex at or behind the near plane are skipped.
pub fn rasterize_silhouette(cam: &Camera, vertices: &[Vec3], faces: &[[usize; 3]]) -> Result<RasterMask> {
    rasterize_with(cam, vertices, faces, |_, _, _, _| {})
}

/// Like [`rasterize_silhouette`], additionally reporting every depth-test
/// winner as `(pixel index, face, perspective-correct barycentrics)`; later
/// calls for a pixel override earlier ones.
pub fn rasterize_with(
    cam: &Camera,
    vertices: &[Vec3],
    faces: &[[usize; 3]],
    mut on_write: impl FnMut(usize, usize, [f64; 3], f64),
) -> Result<RasterMask> {
    if faces.is_empty() {
        return Err(Error::Empty("face list"));
    }
    let (w, h) = (cam.width, cam.height);
    let mut depth = vec![f64::INFINITY; w * h];
    let mut face_buf = vec![NO_FACE; w * h];
    let mut any_valid = false;
    for (fi, f) in faces.iter().enumerate() {
        if f.iter().any(|&v| v >= vertices.len()) {
            return Err(Error::invariant("faces", alloc::format!("face {fi} indexes past the vertex list")));
        }
        let p = f.map(|v| vertices[v]);
        let q = match (cam.project_point(p[0]), cam.project_point(p[1]), cam.project_point(p[2])) {
            (Some(a), Some(b), Some(c)) => [a, b, c],
            _ => continue,
        };
        any_valid = true;
        let inv_z = p.map(|v| 1.0 / v[2]);
        scan_triangle(q, w, h, |x, y, b| {
            let s = b[0] * inv_z[0] + b[1] * inv_z[1] + b[2] * inv_z[2];
            let z = 1.0 / s;
            let k = y * w + x;
            if z < depth[k] || (z == depth[k] && fi < face_buf[k]) {
                depth[k] = z;
                face_buf[k] = fi;
                let pc = [b[0] * inv_z[0] / s, b[1] * inv_z[1] / s, b[2] * inv_z[2] / s];
                on_write(k, fi, pc, z);
            }
        });
    }
    if !any_valid {
        return Err(Error::Rasterization("every face has a vertex behind the camera".into()));
    }
    let mask = BinaryMask::from_vec(w, h, face_buf.iter().map(|&f| f != NO_FACE).collect())?;
    Ok(RasterMask { mask, depth, face: face_buf })
}

/// Per-pixel face and perspective-correct barycentrics of the visible
/// surface, `None` where uncovered.
pub fn rasterize_barycentric(
    cam: &Camera,
    vertices: &[Vec3],
    faces: &[[usize; 3]],
) -> Result<(RasterMask, Vec<Option<(usize, [f64; 3])>>)> {
    let mut out = vec![None; cam.width * cam.height];
    let raster = rasterize_with(cam, vertices, faces, |k, f, b, _| out[k] = Some((f, b)))?;
    Ok((raster, out))
}

/// |a ∩ b| / |a ∪ b|, 1 when both are empty.
pub fn compute_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.same_size(b)?;
    let mut inter = 0usize;
    let mut union = 0usize;
    for (x, y) in a.data().iter().zip(b.data()) {
        inter += usize::from(*x && *y);
        union += usize::from(*x || *y);
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Gray Lambertian preview lit from the camera, over white.
pub fn render_shaded(cam: &Camera, vertices: &[Vec3], faces: &[[usize; 3]]) -> Result<Image> {
    let raster = rasterize_silhouette(cam, vertices, faces)?;
    let mut img = Image::filled(cam.width, cam.height, 3, 1.0)?;
    for y in 0..cam.height {
        for x in 0..cam.width {
            let f = raster.face_at(x, y);
            if f == NO_FACE {
                continue;
            }
            let [a, b, c] = faces[f].map(|v| vertices[v]);
            let n = crate::geom::cross(crate::geom::sub(b, a), crate::geom::sub(c, a));
            let len = crate::geom::norm(n).max(1e-300);
            let centre = crate::geom::scale(crate::geom::add(crate::geom::add(a, b), c), 1.0 / 3.0);
            let view = crate::geom::scale(centre, 1.0 / crate::geom::norm(centre).max(1e-300));
            let shade = 0.25 + 0.6 * (crate::geom::dot(n, view) / len).abs();
            for ch in 0..3 {
                img.set(x, y, ch, shade);
            }
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests;
