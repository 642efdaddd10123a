//! Exact Euclidean distance transform by the two-pass lower envelope of
//! parabolas, carried out in integer arithmetic.

use alloc::vec;
use alloc::vec::Vec;

use super::{bilinear_taps, BinaryMask};
use crate::{Error, Result};

/// Set that a distance field measures distance to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtSet {
    Foreground,
    Background,
}

/// Per-pixel Euclidean distance (pixels) to the nearest pixel of a set.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    squared: Vec<u64>,
    dist: Vec<f64>,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.dist[y * self.width + x]
    }

    #[inline]
    pub fn squared(&self, x: usize, y: usize) -> u64 {
        self.squared[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.dist
    }

    /// Bilinear sample at continuous pixel coordinates `(x, y)` where pixel
    /// centres lie at half-integers; borders are clamped.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (x0, x1, fx) = bilinear_taps(x - 0.5, self.width);
        let (y0, y1, fy) = bilinear_taps(y - 0.5, self.height);
        let a = self.get(x0, y0);
        let b = self.get(x1, y0);
        let c = self.get(x0, y1);
        let d = self.get(x1, y1);
        let top = a + (b - a) * fx;
        let bot = c + (d - c) * fx;
        top + (bot - top) * fy
    }

    /// Gradient of the bilinear interpolant of the distance at `(x, y)`,
    /// using central differences of one pixel.
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        [0.5 * (self.sample(x + 1.0, y) - self.sample(x - 1.0, y)), 0.5 * (self.sample(x, y + 1.0) - self.sample(x, y - 1.0))]
    }
}

/// Euclidean distance to the nearest pixel of the chosen set.
pub fn distance_transform(mask: &BinaryMask, of: DtSet) -> Result<DistanceField> {
    let squared = squared_distance_transform(mask, of)?;
    let dist = squared.iter().map(|&s| libm::sqrt(s as f64)).collect();
    Ok(DistanceField { width: mask.width(), height: mask.height(), squared, dist })
}

/// Exact squared distances, row-major.
pub fn squared_distance_transform(mask: &BinaryMask, of: DtSet) -> Result<Vec<u64>> {
    let (w, h) = (mask.width(), mask.height());
    let target = of == DtSet::Foreground;
    if !mask.data().iter().any(|&b| b == target) {
        return Err(Error::Empty(match of {
            DtSet::Foreground => "distance-transform foreground set",
            DtSet::Background => "distance-transform background set",
        }));
    }
    // Columns first; `None` marks columns with no site.
    let mut col: Vec<Option<u64>> = vec![None; w * h];
    let mut f = vec![None; h];
    let mut d = vec![None; h];
    for x in 0..w {
        for (y, slot) in f.iter_mut().enumerate() {
            *slot = if mask.get(x, y) == target { Some(0) } else { None };
        }
        envelope_1d(&f, &mut d);
        for y in 0..h {
            col[y * w + x] = d[y];
        }
    }
    let mut out = vec![0u64; w * h];
    let mut f = vec![None; w];
    let mut d = vec![None; w];
    for y in 0..h {
        f.copy_from_slice(&col[y * w..(y + 1) * w]);
        envelope_1d(&f, &mut d);
        for x in 0..w {
            out[y * w + x] = d[x].expect("set is non-empty");
        }
    }
    Ok(out)
}

/// `d[q] = min_p (q - p)^2 + f[p]` over sites with finite `f`.
fn envelope_1d(f: &[Option<u64>], d: &mut [Option<u64>]) {
    let n = f.len();
    // Parabola apexes and the left end of their envelope intervals as exact
    // fractions `num / den` with `den > 0`.
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<(i128, i128)> = Vec::with_capacity(n);
    let key = |p: usize| f[p].unwrap() as i128 + (p as i128) * (p as i128);
    for q in 0..n {
        if f[q].is_none() {
            continue;
        }
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push((i128::MIN, 1));
                    break;
                }
                Some(&p) => {
                    let s = (key(q) - key(p), 2 * (q as i128 - p as i128));
                    let zk = *z.last().unwrap();
                    // s <= z_k, compared without rounding.
                    if zk.0 != i128::MIN && s.0 * zk.1 <= zk.0 * s.1 {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        d.iter_mut().for_each(|x| *x = None);
        return;
    }
    let mut k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        // Advance while the next interval starts at or before q.
        while k + 1 < v.len() && z[k + 1].0 <= q as i128 * z[k + 1].1 {
            k += 1;
        }
        let p = v[k];
        let dq = q.abs_diff(p) as u64;
        *out = Some(dq * dq + f[p].unwrap());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(mask: &BinaryMask, target: bool) -> Vec<u64> {
        let (w, h) = (mask.width(), mask.height());
        let sites: Vec<(usize, usize)> =
            (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).filter(|&(x, y)| mask.get(x, y) == target).collect();
        (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| {
                sites
                    .iter()
                    .map(|&(a, b)| (x.abs_diff(a) as u64).pow(2) + (y.abs_diff(b) as u64).pow(2))
                    .min()
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn single_site() {
        let m = BinaryMask::from_fn(3, 3, |x, y| x == 1 && y == 1);
        let d = distance_transform(&m, DtSet::Foreground).unwrap();
        assert_eq!(d.get(1, 1), 0.0);
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(1, 2), 1.0);
        assert_eq!(d.get(0, 0), libm::sqrt(2.0));
        assert_eq!(d.get(2, 2), libm::sqrt(2.0));
    }

    #[test]
    fn full_foreground_is_zero() {
        let m = BinaryMask::from_fn(5, 4, |_, _| true);
        let d = distance_transform(&m, DtSet::Foreground).unwrap();
        assert!(d.values().iter().all(|v| *v == 0.0));
        assert!(distance_transform(&m, DtSet::Background).is_err());
    }

    #[test]
    fn far_sites_do_not_overflow() {
        let m = BinaryMask::from_fn(300, 2, |x, y| x == 299 && y == 1);
        let d = squared_distance_transform(&m, DtSet::Foreground).unwrap();
        assert_eq!(d[0], 299 * 299 + 1);
    }

    proptest! {
        #[test]
        fn matches_brute_force(bits in proptest::collection::vec(proptest::bool::weighted(0.15), 1..=400), w in 1usize..24) {
            let h = bits.len().div_ceil(w);
            let mut data = bits.clone();
            data.resize(w * h, false);
            let m = BinaryMask::from_vec(w, h, data).unwrap();
            for (set, target) in [(DtSet::Foreground, true), (DtSet::Background, false)] {
                if m.data().contains(&target) {
                    prop_assert_eq!(squared_distance_transform(&m, set).unwrap(), brute(&m, target));
                }
            }
        }
    }

    #[test]
    fn lipschitz_and_complementary() {
        let m = BinaryMask::from_fn(20, 17, |x, y| (x * 7 + y * 3) % 11 < 3 || (x > 12 && y < 6));
        let a = distance_transform(&m, DtSet::Foreground).unwrap();
        let b = distance_transform(&m, DtSet::Background).unwrap();
        for y in 0..17 {
            for x in 0..20 {
                assert_eq!(a.get(x, y) * b.get(x, y), 0.0);
                assert_eq!(a.get(x, y) == 0.0, m.get(x, y));
                for (dx, dy) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                    let (u, v) = (x as i64 + dx, y as i64 + dy);
                    if u < 20 && v >= 0 && v < 17 {
                        let step = libm::sqrt((dx * dx + dy * dy) as f64);
                        assert!((a.get(x, y) - a.get(u as usize, v as usize)).abs() <= step + 1e-12);
                    }
                }
            }
        }
    }
}
