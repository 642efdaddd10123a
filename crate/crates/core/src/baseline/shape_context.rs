use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Log-polar histogram of the positions of all other points relative to
/// one point. `counts` is row-major, radial bin major.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeContextDescriptor {
    pub radial: usize,
    pub angular: usize,
    pub counts: Vec<u32>,
}

impl ShapeContextDescriptor {
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// Inner radius of the log-polar grid, as a fraction of the mean pairwise
/// distance.
pub const R_INNER: f64 = 0.125;
/// Outer radius, same units.
pub const R_OUTER: f64 = 2.0;

/// Descriptors for every point. Distances are divided by the mean pairwise
/// distance; points nearer than the inner radius land in the first radial
/// bin and points beyond the outer radius in the last.
pub fn shape_context(points: &[[f64; 2]], radial: usize, angular: usize) -> Result<Vec<ShapeContextDescriptor>> {
    if radial == 0 || angular == 0 {
        return Err(Error::InvalidArgument("shape context needs at least one bin per axis".into()));
    }
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidArgument(alloc::format!("shape context needs at least 2 points, got {n}")));
    }
    let dist = |a: [f64; 2], b: [f64; 2]| libm::hypot(b[0] - a[0], b[1] - a[1]);
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += dist(points[i], points[j]);
        }
    }
    let mean = total / (n * (n - 1) / 2) as f64;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::InvalidArgument("points are coincident or not finite".into()));
    }
    let (lo, hi) = (libm::log(R_INNER), libm::log(R_OUTER));
    let edges: Vec<f64> = (1..radial).map(|k| libm::exp(lo + (hi - lo) * k as f64 / radial as f64)).collect();
    let sector = 2.0 * PI / angular as f64;
    let out = points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut counts = vec![0u32; radial * angular];
            for (j, &q) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let r = dist(p, q) / mean;
                let rb = edges.iter().take_while(|&&e| r >= e).count();
                let mut a = libm::atan2(q[1] - p[1], q[0] - p[0]);
                if a < 0.0 {
                    a += 2.0 * PI;
                }
                let ab = ((a / sector) as usize).min(angular - 1);
                counts[rb * angular + ab] += 1;
            }
            ShapeContextDescriptor { radial, angular, counts }
        })
        .collect();
    Ok(out)
}

/// Denominator guard of the chi-squared histogram distance.
pub const CHI2_EPS: f64 = 1e-10;

/// Chi-squared distance between two normalised histograms.
pub fn chi2(a: &ShapeContextDescriptor, b: &ShapeContextDescriptor) -> f64 {
    let (na, nb) = (f64::from(a.total().max(1)), f64::from(b.total().max(1)));
    a.counts
        .iter()
        .zip(&b.counts)
        .map(|(&x, &y)| {
            let (x, y) = (f64::from(x) / na, f64::from(y) / nb);
            (x - y) * (x - y) / (x + y + CHI2_EPS)
        })
        .sum::<f64>()
        * 0.5
}

pub fn chi2_cost_matrix(a: &[ShapeContextDescriptor], b: &[ShapeContextDescriptor]) -> Result<Matrix> {
    if let (Some(x), Some(y)) = (a.first(), b.first()) {
        if (x.radial, x.angular) != (y.radial, y.angular) {
            return Err(Error::dims("shape context bins", x.counts.len(), y.counts.len()));
        }
    }
    let mut m = Matrix::zeros(a.len(), b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            m[(i, j)] = chi2(x, y);
        }
    }
    Ok(m)
}
