use alloc::vec;
use alloc::vec::Vec;

use super::{scan_triangle, NO_FACE};
use crate::model::{GarmentTemplate, Island};
use crate::{Error, Result};

/// Texel-to-surface lookup of a garment's UV layout.
///
/// Texel `(k, l)` (row `k`, column `l`) samples the UV point
/// `u = (l + 0.5) / L`, `v = (k + 0.5) / K`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtlasRaster {
    pub rows: usize,
    pub cols: usize,
    pub face: Vec<usize>,
    pub bary: Vec<[f64; 3]>,
}

impl AtlasRaster {
    #[inline]
    pub fn texel(&self, k: usize, l: usize) -> Option<(usize, [f64; 3])> {
        let i = k * self.cols + l;
        (self.face[i] != NO_FACE).then(|| (self.face[i], self.bary[i]))
    }

    pub fn is_valid(&self, k: usize, l: usize) -> bool {
        self.face[k * self.cols + l] != NO_FACE
    }

    pub fn valid_count(&self) -> usize {
        self.face.iter().filter(|f| **f != NO_FACE).count()
    }
}

/// Rasterizes every UV triangle of the template into a `rows x cols` atlas.
pub fn rasterize_uv_atlas(tmpl: &GarmentTemplate, rows: usize, cols: usize) -> Result<AtlasRaster> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("atlas size must be positive".into()));
    }
    if tmpl.uv_coords.len() != tmpl.faces.len() || tmpl.islands.len() != tmpl.faces.len() {
        return Err(Error::dims("UV triples", tmpl.faces.len(), tmpl.uv_coords.len()));
    }
    let mut face = vec![NO_FACE; rows * cols];
    let mut bary = vec![[0.0; 3]; rows * cols];
    let mut clash: Option<(Island, usize, usize)> = None;
    for (fi, uv) in tmpl.uv_coords.iter().enumerate() {
        let tri = uv.map(|p| [p[0] * cols as f64, p[1] * rows as f64]);
        scan_triangle(tri, cols, rows, |l, k, b| {
            let i = k * cols + l;
            let prev = face[i];
            if prev == NO_FACE {
                face[i] = fi;
                bary[i] = b;
            } else if tmpl.islands[prev] == tmpl.islands[fi] && clash.is_none() {
                clash = Some((tmpl.islands[fi], prev, fi));
            }
        });
    }
    if let Some((island, a, b)) = clash {
        return Err(Error::UvOverlap { island: island.name(), faces: (a, b) });
    }
    Ok(AtlasRaster { rows, cols, face, bary })
}
