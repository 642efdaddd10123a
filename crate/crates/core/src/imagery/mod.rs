//! Image containers, exact distance transforms, binary morphology, Gaussian
//! pyramids and automatic garment segmentation.
//!
//! Pixel `(x, y)` is column `x`, row `y`; samples are row-major.

mod edt;
mod gmm;
mod maxflow;
mod morph;
mod pyramid;
mod segment;

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub use edt::{distance_transform, squared_distance_transform, DistanceField, DtSet};
pub use gmm::Gmm;
pub use maxflow::MaxFlow;
pub use morph::{morphology, MorphOp};
pub use pyramid::{gaussian_pyramid, mask_pyramid, pyramid_down};
pub use segment::{build_trimap, segment, SegConfig, Trimap, TrimapLabel};

/// Gray or RGB image with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize) -> Result<Self> {
        Self::filled(width, height, channels, 0.0)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        check_channels(channels)?;
        Ok(Image { width, height, channels, data: vec![value.clamp(0.0, 1.0); width * height * channels] })
    }

    /// Wraps raw samples, clamping them into `[0, 1]`.
    pub fn from_vec(width: usize, height: usize, channels: usize, mut data: Vec<f64>) -> Result<Self> {
        check_channels(channels)?;
        if data.len() != width * height * channels {
            return Err(Error::dims("image samples", width * height * channels, data.len()));
        }
        for v in &mut data {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Ok(Image { width, height, channels, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v.clamp(0.0, 1.0);
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let k = (y * self.width + x) * self.channels;
        &self.data[k..k + self.channels]
    }

    /// Rec. 601 luma for RGB, the sample itself for gray.
    pub fn luminance(&self, x: usize, y: usize) -> f64 {
        let p = self.pixel(x, y);
        if self.channels == 3 {
            0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]
        } else {
            p[0]
        }
    }

    /// Single channel plane `c`.
    pub fn plane(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(self.channels).copied().collect()
    }

    pub fn from_planes(width: usize, height: usize, planes: &[Vec<f64>]) -> Result<Self> {
        let channels = planes.len();
        check_channels(channels)?;
        let mut data = Vec::with_capacity(width * height * channels);
        for k in 0..width * height {
            for p in planes {
                data.push(p[k]);
            }
        }
        Image::from_vec(width, height, channels, data)
    }

    pub fn flip_horizontal(&self) -> Image {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                for c in 0..self.channels {
                    out.data[(y * self.width + x) * self.channels + c] = self.get(self.width - 1 - x, y, c);
                }
            }
        }
        out
    }

    /// Bilinear sample at index coordinates (row `i`, column `j`), where
    /// integer coordinates hit pixel centres; borders are clamped.
    pub fn bilinear(&self, i: f64, j: f64, out: &mut [f64]) {
        let (y0, y1, fy) = bilinear_taps(i, self.height);
        let (x0, x1, fx) = bilinear_taps(j, self.width);
        for (c, o) in out.iter_mut().enumerate().take(self.channels) {
            let a = self.get(x0, y0, c);
            let b = self.get(x1, y0, c);
            let d = self.get(x0, y1, c);
            let e = self.get(x1, y1, c);
            let top = a + (b - a) * fx;
            let bot = d + (e - d) * fx;
            *o = top + (bot - top) * fy;
        }
    }
}

pub(crate) fn bilinear_taps(t: f64, n: usize) -> (usize, usize, f64) {
    let last = n.saturating_sub(1) as f64;
    let t = t.clamp(0.0, last);
    let t0 = libm::floor(t);
    let i0 = t0 as usize;
    let i1 = (i0 + 1).min(n - 1);
    (i0, i1, t - t0)
}

fn check_channels(channels: usize) -> Result<()> {
    if channels == 1 || channels == 3 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!("images have 1 or 3 channels, got {channels}")))
    }
}

/// One bit per pixel; `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask { width, height, data: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        BinaryMask { width, height, data }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::dims("mask pixels", width * height, data.len()));
        }
        Ok(BinaryMask { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Like [`get`](Self::get) but `false` outside the image.
    #[inline]
    pub fn get_or_false(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|b| *b)
    }

    pub fn same_size(&self, other: &BinaryMask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::dims("mask size", self.width * self.height, other.width * other.height));
        }
        Ok(())
    }

    pub fn not(&self) -> BinaryMask {
        BinaryMask { width: self.width, height: self.height, data: self.data.iter().map(|b| !b).collect() }
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.same_size(other)?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a && *b).collect(),
        })
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.same_size(other)?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a || *b).collect(),
        })
    }

    /// Foreground pixels as `(x, y)`, row by row.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data.iter().enumerate().filter(|(_, b)| **b).map(move |(k, _)| (k % self.width, k / self.width))
    }

    pub fn flip_horizontal(&self) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of the foreground.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for (x, y) in self.foreground() {
            bb = Some(match bb {
                None => (x, y, x, y),
                Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
            });
        }
        bb
    }

    /// 0/1 gray image.
    pub fn to_image(&self) -> Image {
        Image { width: self.width, height: self.height, channels: 1, data: self.data.iter().map(|b| f64::from(u8::from(*b))).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_clamped() {
        let img = Image::from_vec(2, 1, 1, vec![-0.5, 1.5]).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0]);
        assert!(Image::from_vec(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(Image::new(2, 2, 2).is_err());
    }

    #[test]
    fn bilinear_midpoint() {
        let img = Image::from_vec(2, 1, 1, vec![0.0, 1.0]).unwrap();
        let mut out = [0.0];
        img.bilinear(0.0, 0.5, &mut out);
        assert_eq!(out[0], 0.5);
        img.bilinear(0.0, 1.0, &mut out);
        assert_eq!(out[0], 1.0);
    }

    #[test]
    fn mask_bounding_box() {
        let m = BinaryMask::from_fn(8, 6, |x, y| (2..5).contains(&x) && (1..3).contains(&y));
        assert_eq!(m.bounding_box(), Some((2, 1, 4, 2)));
        assert_eq!(m.count(), 6);
        assert_eq!(BinaryMask::new(3, 3).bounding_box(), None);
    }
}
