//! Synthetic suite directories: `case_<seed>/` folders with the rendered
//! image, ground-truth mask, parameters, correspondence and atlas, plus a
//! manifest.

use std::path::{Path, PathBuf};

use garmfit_core::imagery::{BinaryMask, Image};
use garmfit_core::model::{GarmentClass, PoseParams};
use garmfit_core::render::Camera;
use garmfit_core::surfmap::{CorrespondenceMap, TextureAtlas};
use garmfit_core::synth::{ProceduralTexture, SynthCase, SynthConfig};
use serde::{Deserialize, Serialize};

use crate::error::{read_file, write_file, Error, Result};
use crate::{formats, image_io};

pub const MANIFEST: &str = "manifest.json";
pub const IMAGE: &str = "image.png";
pub const MASK: &str = "mask.png";
pub const GT: &str = "gt.json";
pub const GT_CORR: &str = "gt_corr.p2sc";
pub const GT_ATLAS: &str = "gt_atlas.png";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub synth: SynthConfig,
    pub cases: Vec<SuiteEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub seed: u64,
    pub class: GarmentClass,
    /// Relative to the suite directory.
    pub dir: String,
    pub files: Vec<String>,
}

/// Ground-truth parameters of one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub class: GarmentClass,
    pub params: PoseParams,
    pub camera: Camera,
    pub texture: ProceduralTexture,
}

/// A case as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCase {
    pub dir: PathBuf,
    pub gt: GroundTruth,
    pub image: Image,
    pub mask: BinaryMask,
    pub correspondence: CorrespondenceMap,
    pub atlas: TextureAtlas,
}

pub fn case_dir_name(seed: u64) -> String {
    format!("case_{seed}")
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

pub(crate) fn from_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::parse(path, e))
}

/// Writes the cases and the manifest under `dir`. Duplicate seeds share
/// one case directory but keep one manifest entry each.
pub fn write_suite(dir: &Path, cases: &[SynthCase], synth: &SynthConfig) -> Result<SuiteManifest> {
    let mut entries = Vec::with_capacity(cases.len());
    for case in cases {
        let name = case_dir_name(case.seed);
        let cdir = dir.join(&name);
        image_io::write_image(&cdir.join(IMAGE), &case.image)?;
        image_io::write_mask(&cdir.join(MASK), &case.mask)?;
        let gt = GroundTruth {
            seed: case.seed,
            class: case.class,
            params: case.params.clone(),
            camera: case.camera,
            texture: case.texture.clone(),
        };
        write_file(&cdir.join(GT), &to_json(&gt)?)?;
        formats::write_correspondence(&cdir.join(GT_CORR), &case.correspondence)?;
        image_io::write_atlas(&cdir.join(GT_ATLAS), &case.atlas)?;
        let valid = image_io::validity_path(Path::new(GT_ATLAS));
        let files = [IMAGE, MASK, GT, GT_CORR, GT_ATLAS, &valid.to_string_lossy()].iter().map(|f| format!("{name}/{f}")).collect();
        entries.push(SuiteEntry { seed: case.seed, class: case.class, dir: name, files });
    }
    let manifest = SuiteManifest { synth: *synth, cases: entries };
    write_file(&dir.join(MANIFEST), &to_json(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<SuiteManifest> {
    from_json(&dir.join(MANIFEST))
}

pub fn read_case(dir: &Path) -> Result<SuiteCase> {
    Ok(SuiteCase {
        dir: dir.to_path_buf(),
        gt: from_json(&dir.join(GT))?,
        image: image_io::read_image(&dir.join(IMAGE))?,
        mask: image_io::read_mask(&dir.join(MASK))?,
        correspondence: formats::read_correspondence(&dir.join(GT_CORR))?,
        atlas: image_io::read_atlas(&dir.join(GT_ATLAS))?,
    })
}

/// True when `dir` holds a suite manifest.
pub fn is_suite(dir: &Path) -> bool {
    dir.join(MANIFEST).is_file()
}
