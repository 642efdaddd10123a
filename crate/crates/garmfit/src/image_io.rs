//! 8-bit PNG reading and writing of images, masks and atlases.

use std::path::Path;

use garmfit_core::imagery::{BinaryMask, Image};
use garmfit_core::surfmap::TextureAtlas;
use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::{read_file, write_file, Error, Result};

/// `[0, 1]` to `0..=255`, rounding to nearest.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let bytes = read_file(path)?;
    image::load_from_memory(&bytes).map_err(|e| Error::format(path, e))
}

fn encode(path: &Path, img: DynamicImage) -> Result<()> {
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).map_err(|e| Error::format(path, e))?;
    write_file(path, &out.into_inner())
}

/// Gray and RGB load as they are; an alpha channel is composited over
/// white.
pub fn read_image(path: &Path) -> Result<Image> {
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64>;
    let channels;
    if img.color().has_color() || img.color().has_alpha() {
        let rgba = img.to_rgba8();
        channels = 3;
        data = rgba
            .pixels()
            .flat_map(|p| {
                let a = f64::from(p[3]) / 255.0;
                [0, 1, 2].map(|c| f64::from(p[c]) / 255.0 * a + (1.0 - a))
            })
            .collect();
    } else {
        channels = 1;
        data = img.to_luma8().pixels().map(|p| f64::from(p[0]) / 255.0).collect();
    }
    Ok(Image::from_vec(w, h, channels, data)?)
}

pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes: Vec<u8> = img.data().iter().map(|v| quantize(*v)).collect();
    let dynamic = if img.channels() == 3 {
        DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, bytes).ok_or_else(|| Error::Internal("image buffer size".into()))?)
    } else {
        DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, bytes).ok_or_else(|| Error::Internal("image buffer size".into()))?)
    };
    encode(path, dynamic)
}

/// Foreground where the luminance is at least one half.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let img = decode(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(BinaryMask::from_vec(w, h, img.pixels().map(|p| p[0] >= 128).collect())?)
}

/// Foreground 255, background 0.
pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let bytes = mask.data().iter().map(|b| if *b { 255 } else { 0 }).collect();
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, bytes)
        .ok_or_else(|| Error::Internal("mask buffer size".into()))?;
    encode(path, DynamicImage::ImageLuma8(img))
}

/// Validity PNG path beside an atlas PNG: `atlas.png` -> `atlas_valid.png`.
pub fn validity_path(atlas: &Path) -> std::path::PathBuf {
    let stem = atlas.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    atlas.with_file_name(format!("{stem}_valid.png"))
}

/// Writes the colours to `path` and the validity mask beside it.
pub fn write_atlas(path: &Path, atlas: &TextureAtlas) -> Result<()> {
    let (k, l) = (atlas.rows(), atlas.cols());
    let bytes: Vec<u8> = atlas.colors().iter().flat_map(|c| c.map(quantize)).collect();
    let img = RgbImage::from_raw(l as u32, k as u32, bytes).ok_or_else(|| Error::Internal("atlas buffer size".into()))?;
    encode(path, DynamicImage::ImageRgb8(img))?;
    write_mask(&validity_path(path), &BinaryMask::from_vec(l, k, atlas.valid().to_vec())?)
}

pub fn read_atlas(path: &Path) -> Result<TextureAtlas> {
    let img = decode(path)?.to_rgb8();
    let (l, k) = (img.width() as usize, img.height() as usize);
    let valid = read_mask(&validity_path(path))?;
    if (valid.width(), valid.height()) != (l, k) {
        return Err(Error::format(&validity_path(path), format!("validity mask is {}x{}, atlas is {l}x{k}", valid.width(), valid.height())));
    }
    let colors = img.pixels().map(|p| [0, 1, 2].map(|c| f64::from(p[c]) / 255.0)).collect();
    Ok(TextureAtlas::new(k, l, colors, valid.data().to_vec())?)
}
