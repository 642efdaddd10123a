//! Binary morphology with a disk structuring element `dx^2 + dy^2 <= r^2`.
//!
//! Dilation is a threshold on the squared distance to the foreground, which
//! equals the disk sweep exactly. Pixels outside the image never dilate into
//! it, and count as foreground for erosion.

use super::edt::squared_distance_transform;
use super::{BinaryMask, DtSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Erode,
    Dilate,
    /// Dilation followed by erosion.
    Close,
    /// Erosion followed by dilation.
    Open,
}

pub fn morphology(mask: &BinaryMask, op: MorphOp, radius: f64) -> BinaryMask {
    match op {
        MorphOp::Dilate => dilate(mask, radius),
        MorphOp::Erode => erode(mask, radius),
        MorphOp::Close => erode(&dilate(mask, radius), radius),
        MorphOp::Open => dilate(&erode(mask, radius), radius),
    }
}

fn dilate(mask: &BinaryMask, radius: f64) -> BinaryMask {
    let r2 = radius * radius;
    match squared_distance_transform(mask, DtSet::Foreground) {
        Ok(sq) => BinaryMask::from_vec(mask.width(), mask.height(), sq.iter().map(|&d| d as f64 <= r2).collect()).unwrap(),
        Err(_) => mask.clone(),
    }
}

fn erode(mask: &BinaryMask, radius: f64) -> BinaryMask {
    dilate(&mask.not(), radius).not()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn disk_oracle(mask: &BinaryMask, r: i64, dilate: bool) -> BinaryMask {
        BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
            let mut any = false;
            let mut all = true;
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx * dx + dy * dy > r * r {
                        continue;
                    }
                    let (u, v) = (x as i64 + dx, y as i64 + dy);
                    let inside = u >= 0 && v >= 0 && (u as usize) < mask.width() && (v as usize) < mask.height();
                    if inside {
                        let b = mask.get(u as usize, v as usize);
                        any |= b;
                        all &= b;
                    }
                }
            }
            if dilate {
                any
            } else {
                all
            }
        })
    }

    #[test]
    fn single_pixel_dilates_to_plus() {
        let m = BinaryMask::from_fn(5, 5, |x, y| x == 2 && y == 2);
        let d = morphology(&m, MorphOp::Dilate, 1.0);
        let expect = BinaryMask::from_fn(5, 5, |x, y| x.abs_diff(2) + y.abs_diff(2) <= 1);
        assert_eq!(d, expect);
        assert_eq!(d.count(), 5);
    }

    #[test]
    fn opening_keeps_large_square_up_to_corners() {
        let (x0, x1, y0, y1) = (8usize, 30usize, 10usize, 32usize);
        let m = BinaryMask::from_fn(40, 40, |x, y| (x0..x1).contains(&x) && (y0..y1).contains(&y));
        for r in [1usize, 3] {
            let opened = morphology(&morphology(&m, MorphOp::Erode, r as f64), MorphOp::Dilate, r as f64);
            assert_eq!(opened, morphology(&m, MorphOp::Open, r as f64));
            // A disk cannot reach into the corners; everything else survives.
            let corner = |x: usize, y: usize| (x < x0 + r || x + r >= x1) && (y < y0 + r || y + r >= y1);
            for y in 0..40 {
                for x in 0..40 {
                    if !corner(x, y) {
                        assert_eq!(opened.get(x, y), m.get(x, y), "r={r} ({x},{y})");
                    } else {
                        assert!(!opened.get(x, y) || m.get(x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn closing_fills_hole() {
        let sq = BinaryMask::from_fn(20, 20, |x, y| (4..16).contains(&x) && (4..16).contains(&y));
        let mut holed = sq.clone();
        holed.set(9, 9, false);
        assert_eq!(morphology(&holed, MorphOp::Close, 1.0), sq);
    }

    #[test]
    fn empty_mask_stays_empty() {
        let m = BinaryMask::new(6, 6);
        assert_eq!(morphology(&m, MorphOp::Dilate, 2.0), m);
        assert_eq!(morphology(&m, MorphOp::Erode, 2.0), m);
        let full = m.not();
        assert_eq!(morphology(&full, MorphOp::Erode, 2.0), full);
    }

    proptest! {
        #[test]
        fn matches_structuring_element(bits in proptest::collection::vec(proptest::bool::weighted(0.3), 144), r in 1i64..4) {
            let m = BinaryMask::from_vec(12, 12, bits).unwrap();
            prop_assert_eq!(morphology(&m, MorphOp::Dilate, r as f64), disk_oracle(&m, r, true));
            prop_assert_eq!(morphology(&m, MorphOp::Erode, r as f64), disk_oracle(&m, r, false));
        }

        #[test]
        fn extensive_and_monotone(a in proptest::collection::vec(any::<bool>(), 100), b in proptest::collection::vec(any::<bool>(), 100)) {
            let ma = BinaryMask::from_vec(10, 10, a).unwrap();
            let mb = ma.or(&BinaryMask::from_vec(10, 10, b).unwrap()).unwrap();
            let da = morphology(&ma, MorphOp::Dilate, 1.5);
            let ea = morphology(&ma, MorphOp::Erode, 1.5);
            prop_assert_eq!(da.and(&ma).unwrap(), ma.clone());
            prop_assert_eq!(ea.and(&ma).unwrap(), ea.clone());
            let db = morphology(&mb, MorphOp::Dilate, 1.5);
            let eb = morphology(&mb, MorphOp::Erode, 1.5);
            prop_assert_eq!(da.and(&db).unwrap(), da);
            prop_assert_eq!(ea.and(&eb).unwrap(), ea);
        }
    }
}
