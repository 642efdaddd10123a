//! Seeded synthetic ground truth: perturbed garment poses, procedural
//! textures, textured renders and their exact correspondences.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fitting::initial_translation;
use crate::geom::{self, Vec3};
use crate::imagery::{BinaryMask, Image};
use crate::model::{pose_garment, GarmentClass, GarmentTemplate, LbsModel, PoseParams};
use crate::render::{rasterize_barycentric, rasterize_silhouette, rasterize_uv_atlas, Camera};
use crate::surfmap::{bake_correspondence, CorrespondenceMap, TextureAtlas};
use crate::{Error, Result};

pub const MAX_THETA: f64 = 0.3;
pub const MAX_BETA: f64 = 1.5;
/// Translation bound as a fraction of the scene depth.
pub const MAX_TRANS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TextureKind {
    Checkerboard,
    Stripes,
    Noise,
}

/// Smooth-edged procedural colour field over UV space.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProceduralTexture {
    pub kind: TextureKind,
    pub colors: [[f64; 3]; 2],
    /// Pattern period in UV units.
    pub period: f64,
    pub angle: f64,
    /// Lattice colours for `Noise`, `lattice x lattice` entries.
    pub lattice: usize,
    pub values: Vec<[f64; 3]>,
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Square wave of unit period, 1 on `[0, 0.5)`, with transitions of
/// half-width `soft`.
fn soft_square(s: f64, soft: f64) -> f64 {
    let f = s - libm::floor(s);
    let d = if f < 0.5 { f.min(0.5 - f) } else { -(f - 0.5).min(1.0 - f) };
    smoothstep((d + soft) / (2.0 * soft))
}

impl ProceduralTexture {
    pub fn random(rng: &mut impl Rng) -> Self {
        let kind = match rng.random_range(0..3u32) {
            0 => TextureKind::Checkerboard,
            1 => TextureKind::Stripes,
            _ => TextureKind::Noise,
        };
        let mut color = || [rng.random_range(0.15..0.85), rng.random_range(0.15..0.85), rng.random_range(0.15..0.85)];
        let colors = [color(), color()];
        let period = rng.random_range(0.1..0.18);
        let angle = rng.random_range(0.0..core::f64::consts::PI);
        let lattice = 6;
        let values = (0..lattice * lattice)
            .map(|_| [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)])
            .collect();
        ProceduralTexture { kind, colors, period, angle, lattice, values }
    }

    /// Colour at UV `(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> [f64; 3] {
        let soft = 0.12;
        let mix = |t: f64| {
            let [a, b] = self.colors;
            [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t]
        };
        match self.kind {
            TextureKind::Checkerboard => {
                let a = soft_square(u / self.period, soft);
                let b = soft_square(v / self.period, soft);
                mix(a + b - 2.0 * a * b)
            }
            TextureKind::Stripes => {
                let s = (u * libm::cos(self.angle) + v * libm::sin(self.angle)) / self.period;
                mix(soft_square(s, soft))
            }
            TextureKind::Noise => {
                let n = self.lattice;
                let x = u.clamp(0.0, 1.0) * (n - 1) as f64;
                let y = v.clamp(0.0, 1.0) * (n - 1) as f64;
                let (x0, y0) = ((libm::floor(x) as usize).min(n - 2), (libm::floor(y) as usize).min(n - 2));
                let (fx, fy) = (smoothstep(x - x0 as f64), smoothstep(y - y0 as f64));
                let g = |i: usize, j: usize| self.values[j * n + i];
                let mut out = [0.0; 3];
                for (c, o) in out.iter_mut().enumerate() {
                    let top = g(x0, y0)[c] + (g(x0 + 1, y0)[c] - g(x0, y0)[c]) * fx;
                    let bot = g(x0, y0 + 1)[c] + (g(x0 + 1, y0 + 1)[c] - g(x0, y0 + 1)[c]) * fx;
                    *o = top + (bot - top) * fy;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    pub atlas_size: usize,
    /// Multiplies every perturbation bound; 0 renders the defaults.
    pub perturbation: f64,
    /// Supersampling factor per axis; 1 renders hard edges.
    pub supersample: usize,
    /// Fraction of the frame the default garment fills.
    pub fill: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { width: 256, height: 256, atlas_size: 256, perturbation: 1.0, supersample: 1, fill: 0.7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCase {
    pub class: GarmentClass,
    pub seed: u64,
    pub params: PoseParams,
    pub camera: Camera,
    pub texture: ProceduralTexture,
    /// Ground-truth texture on every UV-covered texel.
    pub atlas: TextureAtlas,
    pub image: Image,
    /// Per-pixel garment coverage in `[0, 1]`.
    pub alpha: Vec<f64>,
    /// Rasterized silhouette of the ground-truth garment.
    pub mask: BinaryMask,
    pub correspondence: CorrespondenceMap,
}

impl SynthCase {
    /// `alpha > 0.5`.
    pub fn alpha_mask(&self) -> BinaryMask {
        BinaryMask::from_fn(self.image.width(), self.image.height(), |x, y| self.alpha[y * self.image.width() + x] > 0.5)
    }
}

/// Garment class of a suite case, cycling through the classes by seed.
pub fn suite_class(seed: u64) -> GarmentClass {
    [GarmentClass::TShirt, GarmentClass::Shorts, GarmentClass::Pants][(seed % 3) as usize]
}

fn unit_ball(rng: &mut impl Rng) -> Vec3 {
    loop {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if geom::norm_sq(p) <= 1.0 {
            return p;
        }
    }
}

/// Bounded random perturbation of the default shape, pose and translation.
pub fn perturb_defaults(
    model: &LbsModel,
    tmpl: &GarmentTemplate,
    cam: &Camera,
    rng: &mut impl Rng,
    scale: f64,
    fill: f64,
) -> Result<PoseParams> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument("perturbation scale must be finite and non-negative".into()));
    }
    let t0 = initial_translation(model, tmpl, cam, fill)?;
    let mut p = PoseParams::a_pose(model, tmpl.class, t0);
    for b in &mut p.beta {
        *b = scale * MAX_BETA * rng.random_range(-1.0..1.0);
    }
    for &j in tmpl.class.active_joints() {
        p.theta[j] = geom::add(p.theta[j], geom::scale(unit_ball(rng), scale * MAX_THETA));
    }
    p.trans = geom::add(t0, geom::scale(unit_ball(rng), scale * MAX_TRANS * t0[2]));
    Ok(p)
}

/// Textured render over white: per-pixel UV lookup of the front-most face
/// at `supersample^2` samples per pixel, with the coverage fraction.
pub fn render_textured(
    cam: &Camera,
    vertices: &[Vec3],
    tmpl: &GarmentTemplate,
    texture: &ProceduralTexture,
    supersample: usize,
) -> Result<(Image, Vec<f64>)> {
    let s = supersample.max(1);
    let big = cam.scaled(s);
    let (_, hits) = rasterize_barycentric(&big, vertices, &tmpl.faces)?;
    let (w, h) = (cam.width, cam.height);
    let mut data = vec![0.0; w * h * 3];
    let mut alpha = vec![0.0; w * h];
    let inv = 1.0 / (s * s) as f64;
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            let mut cover = 0.0;
            for sy in 0..s {
                for sx in 0..s {
                    let k = (y * s + sy) * big.width + x * s + sx;
                    let c = match hits[k] {
                        Some((f, b)) => {
                            let uv = tmpl.uv_coords[f];
                            let u = b[0] * uv[0][0] + b[1] * uv[1][0] + b[2] * uv[2][0];
                            let v = b[0] * uv[0][1] + b[1] * uv[1][1] + b[2] * uv[2][1];
                            cover += 1.0;
                            texture.eval(u, v)
                        }
                        None => [1.0; 3],
                    };
                    for ch in 0..3 {
                        acc[ch] += c[ch];
                    }
                }
            }
            for ch in 0..3 {
                data[(y * w + x) * 3 + ch] = acc[ch] * inv;
            }
            alpha[y * w + x] = cover * inv;
        }
    }
    Ok((Image::from_vec(w, h, 3, data)?, alpha))
}

/// Ground-truth texture sampled at every covered texel centre.
pub fn texture_atlas(tmpl: &GarmentTemplate, texture: &ProceduralTexture, size: usize) -> Result<TextureAtlas> {
    let raster = rasterize_uv_atlas(tmpl, size, size)?;
    let mut colors = vec![[0.0; 3]; size * size];
    let mut valid = vec![false; size * size];
    for k in 0..size {
        for l in 0..size {
            if raster.is_valid(k, l) {
                colors[k * size + l] = texture.eval((l as f64 + 0.5) / size as f64, (k as f64 + 0.5) / size as f64);
                valid[k * size + l] = true;
            }
        }
    }
    TextureAtlas::new(size, size, colors, valid)
}

/// Generates one case from `seed`.
pub fn generate_case(model: &LbsModel, tmpl: &GarmentTemplate, seed: u64, cfg: &SynthConfig) -> Result<SynthCase> {
    let cam = Camera::for_image(cfg.width, cfg.height);
    cam.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = perturb_defaults(model, tmpl, &cam, &mut rng, cfg.perturbation, cfg.fill)?;
    let texture = ProceduralTexture::random(&mut rng);
    let vertices = pose_garment(model, tmpl, &params)?;
    let margin = 1.0;
    for v in &vertices {
        match cam.project_point(*v) {
            Some([u, y]) if u >= margin && y >= margin && u <= cfg.width as f64 - margin && y <= cfg.height as f64 - margin => {}
            _ => return Err(Error::InvalidArgument(alloc::format!("seed {seed}: perturbation pushes the garment out of frame"))),
        }
    }
    let (image, alpha) = render_textured(&cam, &vertices, tmpl, &texture, cfg.supersample)?;
    let mask = rasterize_silhouette(&cam, &vertices, &tmpl.faces)?.mask;
    let raster = rasterize_uv_atlas(tmpl, cfg.atlas_size, cfg.atlas_size)?;
    let correspondence = bake_correspondence(tmpl, &vertices, &cam, &mask, &raster)?;
    let atlas = texture_atlas(tmpl, &texture, cfg.atlas_size)?;
    Ok(SynthCase { class: tmpl.class, seed, params, camera: cam, texture, atlas, image, alpha, mask, correspondence })
}

/// One case per seed, the class chosen by [`suite_class`].
pub fn generate_suite(model: &LbsModel, garments: &[GarmentTemplate], seeds: &[u64], cfg: &SynthConfig) -> Result<Vec<SynthCase>> {
    seeds
        .iter()
        .map(|&seed| {
            let class = suite_class(seed);
            let tmpl = garments
                .iter()
                .find(|g| g.class == class)
                .ok_or_else(|| Error::InvalidArgument(alloc::format!("no {} template", class.name())))?;
            generate_case(model, tmpl, seed, cfg)
        })
        .collect()
}
