//! Training-set export: per case a coordinate mask `X`, a texture atlas
//! `Y` with its validity mask, and a correspondence map `C`.

use std::path::Path;

use garmfit_core::surfmap::{CoordinateMask, CorrespondenceMap, TextureAtlas};
use serde::{Deserialize, Serialize};

use crate::error::{write_file, Result};
use crate::suite::{from_json, to_json};
use crate::{formats, image_io};

pub const MANIFEST: &str = "dataset.json";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetCase {
    pub name: String,
    pub x: CoordinateMask,
    pub y: TextureAtlas,
    pub c: CorrespondenceMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub x: String,
    pub y: String,
    pub y_valid: String,
    pub c: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub cases: Vec<DatasetEntry>,
    /// Every file written besides the manifest, relative to the dataset
    /// directory.
    pub files: Vec<String>,
}

fn entry(name: &str) -> DatasetEntry {
    DatasetEntry {
        name: name.to_string(),
        x: format!("{name}/x.p2cm"),
        y: format!("{name}/y.png"),
        y_valid: format!("{name}/y_valid.png"),
        c: format!("{name}/c.p2sc"),
    }
}

pub fn export_dataset(dir: &Path, cases: &[DatasetCase]) -> Result<DatasetManifest> {
    let mut manifest = DatasetManifest::default();
    for case in cases {
        let e = entry(&case.name);
        formats::write_coordinate_mask(&dir.join(&e.x), &case.x)?;
        image_io::write_atlas(&dir.join(&e.y), &case.y)?;
        formats::write_correspondence(&dir.join(&e.c), &case.c)?;
        manifest.files.extend([e.x.clone(), e.y.clone(), e.y_valid.clone(), e.c.clone()]);
        manifest.cases.push(e);
    }
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    write_file(&dir.join(MANIFEST), &to_json(&manifest)?)?;
    Ok(manifest)
}

pub fn read_dataset(dir: &Path) -> Result<(DatasetManifest, Vec<DatasetCase>)> {
    let manifest: DatasetManifest = from_json(&dir.join(MANIFEST))?;
    let cases = manifest
        .cases
        .iter()
        .map(|e| {
            Ok(DatasetCase {
                name: e.name.clone(),
                x: formats::read_coordinate_mask(&dir.join(&e.x))?,
                y: image_io::read_atlas(&dir.join(&e.y))?,
                c: formats::read_correspondence(&dir.join(&e.c))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, cases))
}
