//! Binary correspondence and coordinate maps, and OBJ export.
//!
//! Both maps are the 4-byte magic, little-endian `u32` rows and columns,
//! then one little-endian `f32` pair per cell in row-major order.

use std::fmt::Write as _;
use std::path::Path;

use garmfit_core::geom::Vec3;
use garmfit_core::model::GarmentTemplate;
use garmfit_core::surfmap::{CoordinateMask, CorrespondenceMap};

use crate::error::{read_file, write_file, Error, Result};

pub const CORRESPONDENCE_MAGIC: &[u8; 4] = b"P2SC";
pub const COORDINATE_MAGIC: &[u8; 4] = b"P2CM";

fn encode_pairs(magic: &[u8; 4], rows: usize, cols: usize, pairs: &[[f64; 2]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + pairs.len() * 8);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for p in pairs {
        out.extend_from_slice(&(p[0] as f32).to_le_bytes());
        out.extend_from_slice(&(p[1] as f32).to_le_bytes());
    }
    out
}

fn decode_pairs(magic: &[u8; 4], bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<[f64; 2]>)> {
    if bytes.len() < 12 || &bytes[..4] != magic {
        return Err(Error::format(path, format!("missing {} header", String::from_utf8_lossy(magic))));
    }
    let word = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]) as usize;
    let (rows, cols) = (word(4), word(8));
    let expect = rows.checked_mul(cols).and_then(|n| n.checked_mul(8)).and_then(|n| n.checked_add(12));
    if expect != Some(bytes.len()) {
        return Err(Error::format(path, format!("{rows}x{cols} map needs {expect:?} bytes, file has {}", bytes.len())));
    }
    let f = |i: usize| f64::from(f32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]));
    let pairs = (0..rows * cols).map(|k| [f(12 + 8 * k), f(16 + 8 * k)]).collect();
    Ok((rows, cols, pairs))
}

pub fn encode_correspondence(c: &CorrespondenceMap) -> Vec<u8> {
    encode_pairs(CORRESPONDENCE_MAGIC, c.rows(), c.cols(), c.coords())
}

pub fn decode_correspondence(bytes: &[u8], path: &Path) -> Result<CorrespondenceMap> {
    let (rows, cols, pairs) = decode_pairs(CORRESPONDENCE_MAGIC, bytes, path)?;
    Ok(CorrespondenceMap::from_vec(rows, cols, pairs)?)
}

pub fn write_correspondence(path: &Path, c: &CorrespondenceMap) -> Result<()> {
    write_file(path, &encode_correspondence(c))
}

pub fn read_correspondence(path: &Path) -> Result<CorrespondenceMap> {
    decode_correspondence(&read_file(path)?, path)
}

pub fn encode_coordinate_mask(x: &CoordinateMask) -> Vec<u8> {
    encode_pairs(COORDINATE_MAGIC, x.rows(), x.cols(), x.data())
}

pub fn decode_coordinate_mask(bytes: &[u8], path: &Path) -> Result<CoordinateMask> {
    let (rows, cols, pairs) = decode_pairs(COORDINATE_MAGIC, bytes, path)?;
    Ok(CoordinateMask::from_vec(rows, cols, pairs)?)
}

pub fn write_coordinate_mask(path: &Path, x: &CoordinateMask) -> Result<()> {
    write_file(path, &encode_coordinate_mask(x))
}

pub fn read_coordinate_mask(path: &Path) -> Result<CoordinateMask> {
    decode_coordinate_mask(&read_file(path)?, path)
}

/// Wavefront OBJ with one `vt` per face corner, so UV seams survive.
pub fn obj_string(tmpl: &GarmentTemplate, vertices: &[Vec3]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# garment {} {} vertices {} faces", tmpl.class.name(), vertices.len(), tmpl.faces.len());
    for v in vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for uv in &tmpl.uv_coords {
        for p in uv {
            // OBJ texture space has v pointing up.
            let _ = writeln!(s, "vt {} {}", p[0], 1.0 - p[1]);
        }
    }
    for (k, f) in tmpl.faces.iter().enumerate() {
        let t = 3 * k + 1;
        let _ = writeln!(s, "f {}/{} {}/{} {}/{}", f[0] + 1, t, f[1] + 1, t + 1, f[2] + 1, t + 2);
    }
    s
}

pub fn write_obj(path: &Path, tmpl: &GarmentTemplate, vertices: &[Vec3]) -> Result<()> {
    write_file(path, obj_string(tmpl, vertices).as_bytes())
}
