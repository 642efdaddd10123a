//! Coordinate masks, texel-to-pixel correspondence maps, projective texture
//! baking and the metrics used to compare them.
//!
//! Image coordinates are `(i, j)` = (row, column) in index units, so pixel
//! `(i, j)` sits exactly at integer coordinates.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{self, Vec3};
use crate::imagery::{BinaryMask, Image};
use crate::model::GarmentTemplate;
use crate::render::{rasterize_silhouette, AtlasRaster, Camera, NO_FACE};
use crate::{Error, Result};

/// Every foreground pixel stores its own `(i, j)`; background is `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMask {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl CoordinateMask {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<[f64; 2]>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims("coordinate mask", rows * cols, data.len()));
        }
        Ok(CoordinateMask { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[[f64; 2]] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> [f64; 2] {
        self.data[i * self.cols + j]
    }
}

pub fn coordinate_mask(mask: &BinaryMask) -> CoordinateMask {
    let (rows, cols) = (mask.height(), mask.width());
    let mut data = vec![[0.0; 2]; rows * cols];
    for (x, y) in mask.foreground() {
        data[y * cols + x] = [y as f64, x as f64];
    }
    CoordinateMask { rows, cols, data }
}

/// Image coordinates of every atlas texel; invalid texels hold NaN.
#[derive(Debug, Clone)]
pub struct CorrespondenceMap {
    rows: usize,
    cols: usize,
    coords: Vec<[f64; 2]>,
}

/// Two invalid texels are equal; valid ones compare their coordinates
/// exactly.
impl PartialEq for CorrespondenceMap {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.coords.iter().zip(&other.coords).all(|(a, b)| a == b || (a[0].is_nan() && b[0].is_nan()))
    }
}

impl CorrespondenceMap {
    /// All texels invalid.
    pub fn invalid(rows: usize, cols: usize) -> Self {
        CorrespondenceMap { rows, cols, coords: vec![[f64::NAN; 2]; rows * cols] }
    }

    /// Texels whose coordinates are not both finite are invalid.
    pub fn from_vec(rows: usize, cols: usize, coords: Vec<[f64; 2]>) -> Result<Self> {
        if coords.len() != rows * cols {
            return Err(Error::dims("correspondence map", rows * cols, coords.len()));
        }
        let coords = coords.into_iter().map(|c| if c[0].is_finite() && c[1].is_finite() { c } else { [f64::NAN; 2] }).collect();
        Ok(CorrespondenceMap { rows, cols, coords })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn get(&self, k: usize, l: usize) -> Option<[f64; 2]> {
        let c = self.coords[k * self.cols + l];
        c[0].is_finite().then_some(c)
    }

    pub fn set(&mut self, k: usize, l: usize, c: Option<[f64; 2]>) {
        self.coords[k * self.cols + l] = c.unwrap_or([f64::NAN; 2]);
    }

    pub fn is_valid(&self, k: usize, l: usize) -> bool {
        self.coords[k * self.cols + l][0].is_finite()
    }

    pub fn valid_mask(&self) -> Vec<bool> {
        self.coords.iter().map(|c| c[0].is_finite()).collect()
    }

    pub fn valid_count(&self) -> usize {
        self.coords.iter().filter(|c| c[0].is_finite()).count()
    }

    /// Applies `f` to every valid coordinate; `None` invalidates the texel.
    pub fn map(&self, mut f: impl FnMut([f64; 2]) -> Option<[f64; 2]>) -> CorrespondenceMap {
        let coords = self
            .coords
            .iter()
            .map(|&c| if c[0].is_finite() { f(c).filter(|c| c[0].is_finite() && c[1].is_finite()).unwrap_or([f64::NAN; 2]) } else { c })
            .collect();
        CorrespondenceMap { rows: self.rows, cols: self.cols, coords }
    }
}

/// Per-texel colours with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureAtlas {
    rows: usize,
    cols: usize,
    colors: Vec<[f64; 3]>,
    valid: Vec<bool>,
}

impl TextureAtlas {
    /// Colours are clamped to `[0, 1]`; invalid texels are stored as black.
    pub fn new(rows: usize, cols: usize, colors: Vec<[f64; 3]>, valid: Vec<bool>) -> Result<Self> {
        if colors.len() != rows * cols || valid.len() != rows * cols {
            return Err(Error::dims("texture atlas", rows * cols, colors.len().min(valid.len())));
        }
        let colors = colors
            .iter()
            .zip(&valid)
            .map(|(c, &v)| if v { c.map(|x| if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) }) } else { [0.0; 3] })
            .collect();
        Ok(TextureAtlas { rows, cols, colors, valid })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn colors(&self) -> &[[f64; 3]] {
        &self.colors
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn get(&self, k: usize, l: usize) -> Option<[f64; 3]> {
        let i = k * self.cols + l;
        self.valid[i].then(|| self.colors[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Keeps only texels valid in both `self` and `mask`.
    pub fn restricted(&self, mask: &[bool]) -> TextureAtlas {
        let valid: Vec<bool> = self.valid.iter().zip(mask).map(|(a, b)| *a && *b).collect();
        let colors = self.colors.iter().zip(&valid).map(|(c, &v)| if v { *c } else { [0.0; 3] }).collect();
        TextureAtlas { rows: self.rows, cols: self.cols, colors, valid }
    }
}

/// Surface point of a texel on the mesh.
fn texel_point(faces: &[[usize; 3]], vertices: &[Vec3], face: usize, b: [f64; 3]) -> Vec3 {
    let [p, q, r] = faces[face].map(|v| vertices[v]);
    [
        b[0] * p[0] + b[1] * q[0] + b[2] * r[0],
        b[0] * p[1] + b[1] * q[1] + b[2] * r[1],
        b[0] * p[2] + b[1] * q[2] + b[2] * r[2],
    ]
}

/// Depth along the viewing ray through `x` of the plane of `face`.
fn plane_depth(faces: &[[usize; 3]], vertices: &[Vec3], face: usize, x: Vec3) -> f64 {
    let [p, q, r] = faces[face].map(|v| vertices[v]);
    let n = geom::cross(geom::sub(q, p), geom::sub(r, p));
    let denom = geom::dot(n, x);
    if denom == 0.0 {
        return f64::INFINITY;
    }
    // Ray s * x hits the plane at s = (n . p) / (n . x).
    geom::dot(n, p) / denom * x[2]
}

/// Projects every atlas texel's surface point into the image. A texel is
/// invalid when its point falls outside the image or the foreground mask,
/// is hidden behind nearer geometry, or lies on a face turned away from
/// the camera.
pub fn bake_correspondence(
    tmpl: &GarmentTemplate,
    vertices: &[Vec3],
    cam: &Camera,
    fg: &BinaryMask,
    atlas: &AtlasRaster,
) -> Result<CorrespondenceMap> {
    if vertices.len() != tmpl.num_vertices() {
        return Err(Error::dims("fitted vertices", tmpl.num_vertices(), vertices.len()));
    }
    if atlas.face.iter().any(|&f| f != NO_FACE && f >= tmpl.faces.len()) {
        return Err(Error::InvalidArgument("atlas raster does not belong to this template".into()));
    }
    if fg.width() != cam.width || fg.height() != cam.height {
        return Err(Error::dims("foreground mask", cam.width * cam.height, fg.width() * fg.height()));
    }
    let faces = &tmpl.faces;
    let raster = rasterize_silhouette(cam, vertices, faces)?;
    let depth_scale = {
        let z: f64 = vertices.iter().map(|v| v[2].abs()).sum();
        z / vertices.len().max(1) as f64
    };
    let eps_z = 1e-3 * depth_scale;
    let mut out = CorrespondenceMap::invalid(atlas.rows, atlas.cols);
    for k in 0..atlas.rows {
        for l in 0..atlas.cols {
            let Some((f, b)) = atlas.texel(k, l) else { continue };
            let x = texel_point(faces, vertices, f, b);
            let Some([u, v]) = cam.project_point(x) else { continue };
            if !(u >= 0.0 && v >= 0.0 && u < cam.width as f64 && v < cam.height as f64) {
                continue;
            }
            // Points in the outer half of a border pixel are pulled onto its
            // centre so coordinates stay inside [0, M-1] x [0, N-1].
            let i = (v - 0.5).clamp(0.0, (cam.height - 1) as f64);
            let j = (u - 0.5).clamp(0.0, (cam.width - 1) as f64);
            let (px, py) = (u as usize, v as usize);
            if !fg.get(px, py) {
                continue;
            }
            let [p, q, r] = faces[f].map(|v| vertices[v]);
            let n = geom::cross(geom::sub(q, p), geom::sub(r, p));
            if geom::dot(n, x) >= 0.0 {
                continue;
            }
            let front = raster.face_at(px, py);
            if front == NO_FACE {
                continue;
            }
            if front != f && x[2] > plane_depth(faces, vertices, front, x) + eps_z {
                continue;
            }
            out.set(k, l, Some([i, j]));
        }
    }
    Ok(out)
}

/// Bilinear lookup of the image at every valid correspondence.
pub fn sample_texture(image: &Image, c: &CorrespondenceMap) -> TextureAtlas {
    let mut colors = vec![[0.0; 3]; c.rows * c.cols];
    let mut valid = vec![false; c.rows * c.cols];
    let mut px = [0.0; 3];
    for (t, &[i, j]) in c.coords.iter().enumerate() {
        if !i.is_finite() {
            continue;
        }
        image.bilinear(i, j, &mut px);
        colors[t] = if image.channels() == 1 { [px[0]; 3] } else { px };
        valid[t] = true;
    }
    TextureAtlas { rows: c.rows, cols: c.cols, colors, valid }
}

/// Projective texturing: [`sample_texture`] of [`bake_correspondence`].
pub fn bake_texture(
    tmpl: &GarmentTemplate,
    vertices: &[Vec3],
    cam: &Camera,
    image: &Image,
    fg: &BinaryMask,
    atlas: &AtlasRaster,
) -> Result<TextureAtlas> {
    if image.width() != cam.width || image.height() != cam.height {
        return Err(Error::dims("image", cam.width * cam.height, image.width() * image.height()));
    }
    Ok(sample_texture(image, &bake_correspondence(tmpl, vertices, cam, fg, atlas)?))
}

/// Correspondence disagreement between two maps.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoordError {
    /// Mean squared pixel distance over texels valid in both; `None` if
    /// there are none.
    pub mse: Option<f64>,
    /// Texels valid in exactly one map.
    pub disagreements: usize,
    pub shared: usize,
}

pub fn coord_error(pred: &CorrespondenceMap, reference: &CorrespondenceMap) -> Result<CoordError> {
    if pred.rows != reference.rows || pred.cols != reference.cols {
        return Err(Error::dims("correspondence map", reference.rows * reference.cols, pred.rows * pred.cols));
    }
    let mut sum = 0.0;
    let mut shared = 0usize;
    let mut disagreements = 0usize;
    for (a, b) in pred.coords.iter().zip(&reference.coords) {
        match (a[0].is_finite(), b[0].is_finite()) {
            (true, true) => {
                let (di, dj) = (a[0] - b[0], a[1] - b[1]);
                sum += di * di + dj * dj;
                shared += 1;
            }
            (false, false) => {}
            _ => disagreements += 1,
        }
    }
    Ok(CoordError { mse: (shared > 0).then(|| sum / shared as f64), disagreements, shared })
}

/// Mean absolute per-channel difference between the image sampled through
/// `pred` and `reference`, over texels valid in both.
pub fn photometric_error(image: &Image, pred: &CorrespondenceMap, reference: &TextureAtlas) -> Result<Option<f64>> {
    if pred.rows != reference.rows || pred.cols != reference.cols {
        return Err(Error::dims("texture atlas", pred.rows * pred.cols, reference.rows * reference.cols));
    }
    let sampled = sample_texture(image, pred);
    let mut sum = 0.0;
    let mut n = 0usize;
    for t in 0..sampled.colors.len() {
        if sampled.valid[t] && reference.valid[t] {
            for c in 0..3 {
                sum += (sampled.colors[t][c] - reference.colors[t][c]).abs();
            }
            n += 1;
        }
    }
    Ok((n > 0).then(|| sum / (3 * n) as f64))
}

/// Peak signal-to-noise ratio (peak 1) over texels valid in both atlases;
/// `None` without shared texels, infinite for identical colours.
pub fn psnr(a: &TextureAtlas, b: &TextureAtlas) -> Result<Option<f64>> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::dims("texture atlas", a.rows * a.cols, b.rows * b.cols));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for t in 0..a.colors.len() {
        if a.valid[t] && b.valid[t] {
            for c in 0..3 {
                let d = a.colors[t][c] - b.colors[t][c];
                sum += d * d;
            }
            n += 1;
        }
    }
    if n == 0 {
        return Ok(None);
    }
    let mse = sum / (3 * n) as f64;
    Ok(Some(if mse == 0.0 { f64::INFINITY } else { -10.0 * libm::log10(mse) }))
}
