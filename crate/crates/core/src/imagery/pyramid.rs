//! Gaussian pyramids with the separable binomial kernel (1, 4, 6, 4, 1) / 16
//! and clamped borders; each level keeps the even taps.

use alloc::vec::Vec;

use super::{BinaryMask, Image};
use crate::{Error, Result};

#[inline]
fn blur5(v0: f64, v1: f64, v2: f64, v3: f64, v4: f64) -> f64 {
    // Written around the centre tap so a constant signal is reproduced exactly.
    v2 + ((v0 + v4 - 2.0 * v2) + 4.0 * (v1 + v3 - 2.0 * v2)) / 16.0
}

/// Blurs and decimates one plane, returning the plane and its size.
pub fn pyramid_down(plane: &[f64], width: usize, height: usize) -> (Vec<f64>, usize, usize) {
    let w2 = width.div_ceil(2);
    let h2 = height.div_ceil(2);
    let at = |i: i64, n: usize| i.clamp(0, n as i64 - 1) as usize;
    // Horizontal pass at even columns only.
    let mut tmp = Vec::with_capacity(w2 * height);
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x2 in 0..w2 {
            let c = 2 * x2 as i64;
            tmp.push(blur5(row[at(c - 2, width)], row[at(c - 1, width)], row[at(c, width)], row[at(c + 1, width)], row[at(c + 2, width)]));
        }
    }
    let mut out = Vec::with_capacity(w2 * h2);
    for y2 in 0..h2 {
        let c = 2 * y2 as i64;
        let r = |d: i64| &tmp[at(c + d, height) * w2..at(c + d, height) * w2 + w2];
        let (r0, r1, r2, r3, r4) = (r(-2), r(-1), r(0), r(1), r(2));
        for x2 in 0..w2 {
            out.push(blur5(r0[x2], r1[x2], r2[x2], r3[x2], r4[x2]));
        }
    }
    (out, w2, h2)
}

fn check_levels(levels: usize, width: usize, height: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::InvalidArgument("pyramid needs at least one level".into()));
    }
    if levels > 40 || (1usize << (levels - 1)) > width.min(height) {
        return Err(Error::InvalidArgument(alloc::format!("{levels} pyramid levels do not fit a {width}x{height} image")));
    }
    Ok(())
}

/// Level 0 is the input; every further level halves the size (rounding up).
pub fn gaussian_pyramid(img: &Image, levels: usize) -> Result<Vec<Image>> {
    check_levels(levels, img.width(), img.height())?;
    let mut out = Vec::with_capacity(levels);
    out.push(img.clone());
    for _ in 1..levels {
        let prev = out.last().unwrap();
        let (w, h) = (prev.width(), prev.height());
        let mut planes = Vec::with_capacity(prev.channels());
        let mut size = (w, h);
        for c in 0..prev.channels() {
            let (p, w2, h2) = pyramid_down(&prev.plane(c), w, h);
            size = (w2, h2);
            planes.push(p);
        }
        out.push(Image::from_planes(size.0, size.1, &planes)?);
    }
    Ok(out)
}

/// Pyramid of a binary mask: blur-and-decimate of the 0/1 image, thresholded
/// at one half at every level.
pub fn mask_pyramid(mask: &BinaryMask, levels: usize) -> Result<Vec<BinaryMask>> {
    check_levels(levels, mask.width(), mask.height())?;
    let mut out = Vec::with_capacity(levels);
    out.push(mask.clone());
    let mut plane: Vec<f64> = mask.data().iter().map(|b| f64::from(u8::from(*b))).collect();
    let (mut w, mut h) = (mask.width(), mask.height());
    for _ in 1..levels {
        let (p, w2, h2) = pyramid_down(&plane, w, h);
        out.push(BinaryMask::from_vec(w2, h2, p.iter().map(|v| *v >= 0.5).collect())?);
        plane = p;
        w = w2;
        h = h2;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn sizes_halve() {
        let img = Image::filled(64, 64, 1, 0.3).unwrap();
        let p = gaussian_pyramid(&img, 3).unwrap();
        assert_eq!(p.iter().map(|l| l.width()).collect::<Vec<_>>(), vec![64, 32, 16]);
        let odd = Image::filled(9, 5, 3, 0.3).unwrap();
        let p = gaussian_pyramid(&odd, 3).unwrap();
        assert_eq!((p[2].width(), p[2].height()), (3, 2));
        assert!(gaussian_pyramid(&odd, 4).is_err());
        assert!(gaussian_pyramid(&odd, 0).is_err());
    }

    #[test]
    fn impulse_response_is_binomial() {
        let n = 16;
        let mut data = vec![0.0; n * n];
        data[8 * n + 8] = 1.0;
        let img = Image::from_vec(n, n, 1, data).unwrap();
        let p = gaussian_pyramid(&img, 2).unwrap();
        let k = [1.0, 4.0, 6.0, 4.0, 1.0];
        for y2 in 0..8 {
            for x2 in 0..8 {
                // Direct 2D convolution at the even taps.
                let (cx, cy) = (2 * x2 as i64, 2 * y2 as i64);
                let tap = |c: i64| if (c - 8).abs() <= 2 { k[(8 - c + 2) as usize] / 16.0 } else { 0.0 };
                let expect = tap(cx) * tap(cy);
                assert!((p[1].get(x2, y2, 0) - expect).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn constants_are_preserved(v in 0.0f64..=1.0, w in 1usize..40, h in 1usize..40) {
            let img = Image::filled(w, h, 3, v).unwrap();
            let levels = 1 + (usize::BITS - 1 - w.min(h).leading_zeros()) as usize;
            for l in gaussian_pyramid(&img, levels.min(4)).unwrap() {
                prop_assert!(l.data().iter().all(|x| *x == v));
            }
        }
    }
}
