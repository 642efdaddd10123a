use alloc::vec;
use alloc::vec::Vec;

use crate::imagery::Image;
use crate::linalg::{Lu, Matrix};
use crate::{Error, Result};

/// Thin-plate spline from the plane to the plane.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TpsWarp {
    pub source: Vec<[f64; 2]>,
    pub target: Vec<[f64; 2]>,
    /// Kernel weight of each source point, per output coordinate.
    pub weights: Vec<[f64; 2]>,
    /// Rows `1, x, y` of the affine part, per output coordinate.
    pub affine: [[f64; 2]; 3],
    pub lambda: f64,
}

/// `U(r) = r^2 log r^2`, with `U(0) = 0`.
#[inline]
pub fn tps_kernel(r2: f64) -> f64 {
    if r2 > 0.0 { r2 * libm::log(r2) } else { 0.0 }
}

fn d2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])
}

/// Solves `[K + lambda I, P; P^T, 0] [w; a] = [target; 0]`.
pub fn tps_fit(source: &[[f64; 2]], target: &[[f64; 2]], lambda: f64) -> Result<TpsWarp> {
    let n = source.len();
    if target.len() != n {
        return Err(Error::dims("TPS target points", n, target.len()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(alloc::format!("TPS needs at least 3 control points, got {n}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("TPS regularisation must be >= 0, got {lambda}")));
    }
    if source.iter().chain(target).any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::InvalidArgument("TPS control points must be finite".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if source[i] == source[j] {
                return Err(Error::Singular(alloc::format!(
                    "TPS source points {i} and {j} coincide at ({}, {})",
                    source[i][0],
                    source[i][1]
                )));
            }
        }
    }
    let size = n + 3;
    let mut a = Matrix::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = tps_kernel(d2(source[i], source[j]));
        }
        a[(i, i)] += lambda;
        let p = [1.0, source[i][0], source[i][1]];
        for k in 0..3 {
            a[(i, n + k)] = p[k];
            a[(n + k, i)] = p[k];
        }
    }
    let lu = Lu::new(a.clone()).map_err(|_| Error::Singular("TPS source points are collinear".into()))?;
    let mut coef = [vec![0.0; size], vec![0.0; size]];
    for (c, x) in coef.iter_mut().enumerate() {
        let mut b = vec![0.0; size];
        for i in 0..n {
            b[i] = target[i][c];
        }
        *x = lu.solve(&b);
        // One round of iterative refinement.
        let ax = a.mul_vec(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, y)| b - y).collect();
        for (x, d) in x.iter_mut().zip(lu.solve(&r)) {
            *x += d;
        }
    }
    let weights = (0..n).map(|i| [coef[0][i], coef[1][i]]).collect();
    let affine = [0, 1, 2].map(|k| [coef[0][n + k], coef[1][n + k]]);
    Ok(TpsWarp { source: source.to_vec(), target: target.to_vec(), weights, affine, lambda })
}

impl TpsWarp {
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for c in 0..2 {
            out[c] = self.affine[0][c] + self.affine[1][c] * p[0] + self.affine[2][c] * p[1];
        }
        for (s, w) in self.source.iter().zip(&self.weights) {
            let u = tps_kernel(d2(p, *s));
            out[0] += w[0] * u;
            out[1] += w[1] * u;
        }
        out
    }

    pub fn apply_all(&self, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
        points.iter().map(|p| self.apply(*p)).collect()
    }

    /// `trace(W^T K W)` over both output coordinates.
    pub fn bending_energy(&self) -> f64 {
        let mut e = 0.0;
        for (i, si) in self.source.iter().enumerate() {
            for (j, sj) in self.source.iter().enumerate() {
                let k = tps_kernel(d2(*si, *sj));
                e += k * (self.weights[i][0] * self.weights[j][0] + self.weights[i][1] * self.weights[j][1]);
            }
        }
        e
    }
}

/// Inverse-mapping image warp: output pixel `(x, y)` takes the bilinear
/// sample of `image` at `warp(x, y)`. Coordinates are `(x, y)` in index
/// units (pixel centres at integers); borders are clamped.
pub fn tps_warp_image(warp: &TpsWarp, image: &Image) -> Result<Image> {
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    let mut data = Vec::with_capacity(w * h * ch);
    let mut px = [0.0; 3];
    for y in 0..h {
        for x in 0..w {
            let [sx, sy] = warp.apply([x as f64, y as f64]);
            image.bilinear(sy, sx, &mut px);
            data.extend_from_slice(&px[..ch]);
        }
    }
    Image::from_vec(w, h, ch, data)
}
