//! Full-covariance Gaussian mixtures over RGB colours.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::inverse3;

const COV_REG: f64 = 1e-4;
const LOG_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq)]
pub struct Gmm {
    weights: Vec<f64>,
    means: Vec<[f64; 3]>,
    inv_covs: Vec<[[f64; 3]; 3]>,
    /// `log(weight) - log det(2 pi cov) / 2` per component.
    log_consts: Vec<f64>,
}

impl Gmm {
    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[[f64; 3]] {
        &self.means
    }

    /// Deterministic k-means labelling used to seed the mixture: centres
    /// start at luminance quantiles, then a few Lloyd rounds.
    pub fn kmeans_labels(samples: &[[f64; 3]], k: usize) -> Vec<usize> {
        let n = samples.len();
        if n == 0 || k == 0 {
            return vec![0; n];
        }
        let k = k.min(n);
        let lum = |z: &[f64; 3]| 0.299 * z[0] + 0.587 * z[1] + 0.114 * z[2];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lum(&samples[a]).total_cmp(&lum(&samples[b])).then(a.cmp(&b)));
        let mut centres: Vec<[f64; 3]> = (0..k).map(|c| samples[order[((2 * c + 1) * n) / (2 * k)]]).collect();
        let mut labels = vec![0usize; n];
        for _ in 0..10 {
            for (z, l) in samples.iter().zip(labels.iter_mut()) {
                *l = nearest(&centres, z);
            }
            let mut sums = vec![[0.0; 3]; k];
            let mut counts = vec![0usize; k];
            for (z, &l) in samples.iter().zip(&labels) {
                for a in 0..3 {
                    sums[l][a] += z[a];
                }
                counts[l] += 1;
            }
            for c in 0..k {
                if counts[c] > 0 {
                    centres[c] = sums[c].map(|s| s / counts[c] as f64);
                }
            }
        }
        labels
    }

    /// Maximum-likelihood mixture from hard component labels; empty
    /// components are dropped.
    pub fn fit(samples: &[[f64; 3]], labels: &[usize], k: usize) -> Option<Gmm> {
        let n = samples.len();
        if n == 0 {
            return None;
        }
        let mut counts = vec![0usize; k];
        let mut sums = vec![[0.0; 3]; k];
        for (z, &l) in samples.iter().zip(labels) {
            counts[l] += 1;
            for a in 0..3 {
                sums[l][a] += z[a];
            }
        }
        let means: Vec<[f64; 3]> =
            (0..k).map(|c| if counts[c] > 0 { sums[c].map(|s| s / counts[c] as f64) } else { [0.0; 3] }).collect();
        let mut covs = vec![[[0.0; 3]; 3]; k];
        for (z, &l) in samples.iter().zip(labels) {
            let d = [z[0] - means[l][0], z[1] - means[l][1], z[2] - means[l][2]];
            for a in 0..3 {
                for b in 0..3 {
                    covs[l][a][b] += d[a] * d[b];
                }
            }
        }
        let mut gmm = Gmm { weights: Vec::new(), means: Vec::new(), inv_covs: Vec::new(), log_consts: Vec::new() };
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let mut cov = covs[c].map(|r| r.map(|v| v / counts[c] as f64));
            for (a, row) in cov.iter_mut().enumerate() {
                row[a] += COV_REG;
            }
            let (inv, det) = inverse3(&cov)?;
            let w = counts[c] as f64 / n as f64;
            gmm.weights.push(w);
            gmm.means.push(means[c]);
            gmm.inv_covs.push(inv);
            gmm.log_consts.push(libm::log(w) - 0.5 * (3.0 * LOG_2PI + libm::log(det)));
        }
        Some(gmm)
    }

    fn component_log(&self, c: usize, z: &[f64; 3]) -> f64 {
        let m = &self.means[c];
        let d = [z[0] - m[0], z[1] - m[1], z[2] - m[2]];
        let s = &self.inv_covs[c];
        let mut q = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                q += d[a] * s[a][b] * d[b];
            }
        }
        self.log_consts[c] - 0.5 * q
    }

    /// `log sum_k w_k N(z; mu_k, Sigma_k)`.
    pub fn log_likelihood(&self, z: &[f64; 3]) -> f64 {
        let logs: Vec<f64> = (0..self.num_components()).map(|c| self.component_log(c, z)).collect();
        let mx = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        mx + libm::log(logs.iter().map(|l| libm::exp(l - mx)).sum::<f64>())
    }

    /// Most responsible component.
    pub fn assign(&self, z: &[f64; 3]) -> usize {
        (0..self.num_components())
            .map(|c| (c, self.component_log(c, z)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0
    }
}

fn nearest(centres: &[[f64; 3]], z: &[f64; 3]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centres.iter().enumerate() {
        let d = sq(z[0] - m[0]) + sq(z[1] - m[1]) + sq(z[2] - m[2]);
        if d < best.1 {
            best = (c, d);
        }
    }
    best.0
}


#[inline]
fn sq(x: f64) -> f64 {
    x * x
}
