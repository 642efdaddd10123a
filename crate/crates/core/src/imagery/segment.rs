//! Automatic garment segmentation for photos over a bright, plain backdrop:
//! luminance threshold, morphological cleanup into a trimap, then GrabCut
//! refinement of the uncertain band.

use alloc::vec;
use alloc::vec::Vec;

use super::gmm::Gmm;
use super::maxflow::MaxFlow;
use super::morph::{morphology, MorphOp};
use super::{BinaryMask, Image};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SegConfig {
    /// Pixels with luminance above this are background.
    pub threshold: f64,
    pub close_radius: f64,
    pub erode_radius: f64,
    pub dilate_radius: f64,
    /// Image width at which the radii apply; they scale with the width.
    pub reference_width: f64,
    pub refine: bool,
    pub components: usize,
    pub iterations: usize,
    pub gamma: f64,
}

impl Default for SegConfig {
    fn default() -> Self {
        SegConfig {
            threshold: 0.94,
            close_radius: 3.0,
            erode_radius: 5.0,
            dilate_radius: 5.0,
            reference_width: 256.0,
            refine: true,
            components: 5,
            iterations: 3,
            gamma: 50.0,
        }
    }
}

impl SegConfig {
    fn radius(&self, r: f64, width: usize) -> f64 {
        (r * width as f64 / self.reference_width).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimapLabel {
    AbsFg,
    ProbFg,
    ProbBg,
    AbsBg,
}

impl TrimapLabel {
    pub fn is_fg(self) -> bool {
        matches!(self, TrimapLabel::AbsFg | TrimapLabel::ProbFg)
    }

    pub fn is_fixed(self) -> bool {
        matches!(self, TrimapLabel::AbsFg | TrimapLabel::AbsBg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trimap {
    width: usize,
    height: usize,
    labels: Vec<TrimapLabel>,
}

impl Trimap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[TrimapLabel] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> TrimapLabel {
        self.labels[y * self.width + x]
    }

    /// Pixels labelled (absolutely or probably) foreground.
    pub fn foreground(&self) -> BinaryMask {
        BinaryMask::from_vec(self.width, self.height, self.labels.iter().map(|l| l.is_fg()).collect()).unwrap()
    }
}

/// Threshold, close, then erode for certain foreground and dilate for the
/// complement of certain background. Pixels only the closing added are
/// never certain: narrow background gaps such as the one between two legs
/// close up too.
pub fn build_trimap(image: &Image, cfg: &SegConfig) -> Result<Trimap> {
    let (w, h) = (image.width(), image.height());
    let raw = BinaryMask::from_fn(w, h, |x, y| image.luminance(x, y) <= cfg.threshold);
    if raw.is_empty() {
        return Err(Error::Empty("segmentation foreground (image is entirely above the threshold)"));
    }
    let closed = morphology(&raw, MorphOp::Close, cfg.radius(cfg.close_radius, w));
    let sure_fg = morphology(&closed, MorphOp::Erode, cfg.radius(cfg.erode_radius, w));
    let maybe = morphology(&closed, MorphOp::Dilate, cfg.radius(cfg.dilate_radius, w));
    let labels = (0..w * h)
        .map(|k| {
            let (x, y) = (k % w, k / w);
            if sure_fg.get(x, y) && raw.get(x, y) {
                TrimapLabel::AbsFg
            } else if closed.get(x, y) {
                TrimapLabel::ProbFg
            } else if maybe.get(x, y) {
                TrimapLabel::ProbBg
            } else {
                TrimapLabel::AbsBg
            }
        })
        .collect();
    Ok(Trimap { width: w, height: h, labels })
}

/// Garment mask of a product photo.
pub fn segment(image: &Image, cfg: &SegConfig) -> Result<BinaryMask> {
    if cfg.refine && image.channels() != 3 {
        return Err(Error::InvalidArgument("colour-model refinement needs an RGB image".into()));
    }
    let trimap = build_trimap(image, cfg)?;
    if !cfg.refine {
        return Ok(trimap.foreground());
    }
    grabcut(image, &trimap, cfg)
}

fn grabcut(image: &Image, trimap: &Trimap, cfg: &SegConfig) -> Result<BinaryMask> {
    let (w, h) = (image.width(), image.height());
    let colors: Vec<[f64; 3]> = (0..w * h).map(|k| {
        let p = image.pixel(k % w, k / w);
        [p[0], p[1], p[2]]
    }).collect();
    let mut alpha: Vec<bool> = trimap.labels.iter().map(|l| l.is_fg()).collect();
    let unknown: Vec<usize> = (0..w * h).filter(|&k| !trimap.labels[k].is_fixed()).collect();
    if unknown.is_empty() {
        return BinaryMask::from_vec(w, h, alpha);
    }

    // Contrast normaliser over all 4-neighbour pairs.
    let mut sum = 0.0;
    let mut pairs = 0usize;
    let diff2 = |a: usize, b: usize| {
        let (p, q) = (colors[a], colors[b]);
        let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
        d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
    };
    for y in 0..h {
        for x in 0..w {
            let k = y * w + x;
            if x + 1 < w {
                sum += diff2(k, k + 1);
                pairs += 1;
            }
            if y + 1 < h {
                sum += diff2(k, k + w);
                pairs += 1;
            }
        }
    }
    let mean = if pairs > 0 { sum / pairs as f64 } else { 0.0 };
    let beta = if mean > 0.0 { 1.0 / (2.0 * mean) } else { 0.0 };
    let pairwise = |a: usize, b: usize| cfg.gamma * libm::exp(-beta * diff2(a, b));

    let mut node = vec![usize::MAX; w * h];
    for (i, &k) in unknown.iter().enumerate() {
        node[k] = i;
    }
    let k_comp = cfg.components.max(1);
    let mut fg_labels: Option<Vec<usize>> = None;
    let mut bg_labels: Option<Vec<usize>> = None;
    for _ in 0..cfg.iterations.max(1) {
        let fg_samples: Vec<[f64; 3]> = (0..w * h).filter(|&k| alpha[k]).map(|k| colors[k]).collect();
        let bg_samples: Vec<[f64; 3]> = (0..w * h).filter(|&k| !alpha[k]).map(|k| colors[k]).collect();
        if fg_samples.is_empty() || bg_samples.is_empty() {
            break;
        }
        let fg = fit_class(&fg_samples, &mut fg_labels, k_comp)?;
        let bg = fit_class(&bg_samples, &mut bg_labels, k_comp)?;

        let n = unknown.len();
        let (s, t) = (n, n + 1);
        let mut g = MaxFlow::new(n + 2);
        let mut to_source = vec![0.0; n];
        let mut to_sink = vec![0.0; n];
        for (i, &k) in unknown.iter().enumerate() {
            // Source side = foreground: cutting s->p labels p background.
            to_source[i] += -bg.log_likelihood(&colors[k]);
            to_sink[i] += -fg.log_likelihood(&colors[k]);
        }
        let (x_max, y_max) = (w - 1, h - 1);
        for (i, &k) in unknown.iter().enumerate() {
            let (x, y) = (k % w, k / w);
            let mut nbrs = [usize::MAX; 4];
            if x > 0 {
                nbrs[0] = k - 1;
            }
            if x < x_max {
                nbrs[1] = k + 1;
            }
            if y > 0 {
                nbrs[2] = k - w;
            }
            if y < y_max {
                nbrs[3] = k + w;
            }
            for q in nbrs.into_iter().filter(|&q| q != usize::MAX) {
                let v = pairwise(k, q);
                match trimap.labels[q] {
                    TrimapLabel::AbsFg => to_source[i] += v,
                    TrimapLabel::AbsBg => to_sink[i] += v,
                    _ if q > k => g.add_edge(i, node[q], v, v),
                    _ => {}
                }
            }
        }
        for i in 0..n {
            // Only the difference of the two terminal costs matters.
            let m = to_source[i].min(to_sink[i]);
            g.add_edge(s, i, to_source[i] - m, 0.0);
            g.add_edge(i, t, to_sink[i] - m, 0.0);
        }
        g.max_flow(s, t);
        let side = g.source_side(s);
        for (i, &k) in unknown.iter().enumerate() {
            alpha[k] = side[i];
        }
    }
    BinaryMask::from_vec(w, h, alpha)
}

fn fit_class(samples: &[[f64; 3]], labels: &mut Option<Vec<usize>>, k: usize) -> Result<Gmm> {
    let init = match labels.take() {
        Some(_) => None,
        None => Some(Gmm::kmeans_labels(samples, k)),
    };
    let assigned = match init {
        Some(l) => l,
        None => {
            // Re-estimate from the previous model's responsibilities.
            let seed = Gmm::fit(samples, &Gmm::kmeans_labels(samples, k), k)
                .ok_or_else(|| Error::Singular("colour model".into()))?;
            samples.iter().map(|z| seed.assign(z)).collect()
        }
    };
    let gmm = Gmm::fit(samples, &assigned, k).ok_or_else(|| Error::Singular("colour model covariance".into()))?;
    *labels = Some(assigned);
    Ok(gmm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_image() -> Image {
        let mut img = Image::filled(64, 64, 3, 1.0).unwrap();
        for y in 20..40 {
            for x in 22..42 {
                img.set(x, y, 0, 0.55);
                img.set(x, y, 1, 0.05);
                img.set(x, y, 2, 0.08);
            }
        }
        img
    }

    #[test]
    fn dark_square_is_recovered_exactly() {
        let mask = segment(&square_image(), &SegConfig::default()).unwrap();
        let expect = BinaryMask::from_fn(64, 64, |x, y| (22..42).contains(&x) && (20..40).contains(&y));
        assert_eq!(mask, expect);
    }

    #[test]
    fn white_image_has_no_foreground() {
        let img = Image::filled(16, 16, 3, 1.0).unwrap();
        assert!(matches!(segment(&img, &SegConfig::default()), Err(Error::Empty(_))));
    }

    #[test]
    fn gray_input_needs_refinement_off() {
        let img = Image::filled(16, 16, 1, 0.2).unwrap();
        assert!(segment(&img, &SegConfig::default()).is_err());
        let cfg = SegConfig { refine: false, ..SegConfig::default() };
        assert_eq!(segment(&img, &cfg).unwrap().count(), 256);
    }

    #[test]
    fn trimap_bands_nest() {
        let t = build_trimap(&square_image(), &SegConfig::default()).unwrap();
        let count = |l| t.labels().iter().filter(|x| **x == l).count();
        assert!(count(TrimapLabel::AbsFg) > 0 && count(TrimapLabel::ProbFg) > 0 && count(TrimapLabel::ProbBg) > 0);
        // Every certain-foreground pixel sits inside the foreground band.
        for y in 1..63 {
            for x in 1..63 {
                if t.get(x, y) == TrimapLabel::AbsFg {
                    for (u, v) in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
                        assert!(t.get(u, v).is_fg());
                    }
                }
            }
        }
    }

    #[test]
    fn background_brightness_does_not_matter() {
        let base = segment(&square_image(), &SegConfig::default()).unwrap();
        let mut img = square_image();
        for y in 0..64 {
            for x in 0..64 {
                if img.get(x, y, 1) > 0.5 {
                    for c in 0..3 {
                        img.set(x, y, c, 0.96);
                    }
                }
            }
        }
        assert_eq!(segment(&img, &SegConfig::default()).unwrap(), base);
    }
}
