//! The model JSON file: a body with skeleton and shape space plus the
//! garment templates cut from it.

use std::path::Path;

use garmfit_core::linalg::Matrix;
use garmfit_core::model::{GarmentClass, GarmentTemplate, Island, LbsModel};
use serde::{Deserialize, Serialize};

use crate::error::{read_file, write_file, Error, Result};

/// The toy model shipped with the crate.
pub const TOY_MODEL_JSON: &str = include_str!("../assets/toy_model.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub body: BodyJson,
    pub garments: Vec<GarmentJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyJson {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    /// `n x 3 x S`.
    pub shape_dirs: Vec<[Vec<f64>; 3]>,
    /// `J x n`.
    pub joint_regressor: Vec<Vec<f64>>,
    /// Parent per joint, `-1` at the root.
    pub kinematic_tree: Vec<i64>,
    /// `n x J`.
    pub skin_weights: Vec<Vec<f64>>,
    pub shape_covariance: Vec<Vec<f64>>,
    pub a_pose: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarmentJson {
    pub class: GarmentClass,
    pub vertex_ids: Vec<usize>,
    pub displacements: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub uv: Vec<[[f64; 2]; 3]>,
    pub islands: Vec<Island>,
    pub boundary_rings: Vec<Vec<usize>>,
    #[serde(default)]
    pub top_ring: Vec<usize>,
}

fn matrix(field: &'static str, rows: &[Vec<f64>], cols: Option<usize>) -> garmfit_core::Result<Matrix> {
    let rule = |r: String| garmfit_core::Error::Invariant { field, rule: r };
    if let Some(c) = cols {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != c) {
            return Err(rule(format!("row {i} has {} entries, expected {c}", r.len())));
        }
    }
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, cols.unwrap_or(0)));
    }
    Matrix::from_rows(rows).map_err(|_| rule("rows have different lengths".into()))
}

impl ModelFile {
    pub fn from_model(model: &LbsModel, garments: &[GarmentTemplate]) -> Self {
        let s = model.num_shapes;
        let shape_dirs = (0..model.num_vertices())
            .map(|v| [0, 1, 2].map(|a| model.shape_dirs[(v * 3 + a) * s..(v * 3 + a + 1) * s].to_vec()))
            .collect();
        let body = BodyJson {
            vertices: model.template_vertices.clone(),
            faces: model.faces.clone(),
            shape_dirs,
            joint_regressor: model.joint_regressor.to_rows(),
            kinematic_tree: model.kinematic_tree.iter().map(|p| p.map_or(-1, |p| p as i64)).collect(),
            skin_weights: model.skin_weights.to_rows(),
            shape_covariance: model.shape_covariance.to_rows(),
            a_pose: model.a_pose.clone(),
        };
        let garments = garments
            .iter()
            .map(|g| GarmentJson {
                class: g.class,
                vertex_ids: g.body_vertex_ids.clone(),
                displacements: g.displacements.clone(),
                faces: g.faces.clone(),
                uv: g.uv_coords.clone(),
                islands: g.islands.clone(),
                boundary_rings: g.boundary_rings.clone(),
                top_ring: g.top_ring.clone(),
            })
            .collect();
        ModelFile { body, garments }
    }

    /// Converts and validates every invariant.
    pub fn into_model(self) -> garmfit_core::Result<(LbsModel, Vec<GarmentTemplate>)> {
        use garmfit_core::Error as C;
        let b = self.body;
        let n = b.vertices.len();
        let s = b.shape_dirs.first().map_or(0, |d| d[0].len());
        if b.shape_dirs.len() != n {
            return Err(C::Invariant { field: "shape_dirs", rule: format!("{} rows for {n} vertices", b.shape_dirs.len()) });
        }
        let mut shape_dirs = Vec::with_capacity(n * 3 * s);
        for (v, d) in b.shape_dirs.iter().enumerate() {
            for axis in d {
                if axis.len() != s {
                    return Err(C::Invariant { field: "shape_dirs", rule: format!("vertex {v} has {} components, expected {s}", axis.len()) });
                }
                shape_dirs.extend_from_slice(axis);
            }
        }
        let j = b.kinematic_tree.len();
        let mut tree = Vec::with_capacity(j);
        for (k, &p) in b.kinematic_tree.iter().enumerate() {
            tree.push(match p {
                -1 => None,
                p if p >= 0 && (p as usize) < j => Some(p as usize),
                p => return Err(C::Invariant { field: "kinematic_tree", rule: format!("joint {k} has parent {p}") }),
            });
        }
        let model = LbsModel {
            template_vertices: b.vertices,
            faces: b.faces,
            shape_dirs,
            num_shapes: s,
            joint_regressor: matrix("joint_regressor", &b.joint_regressor, Some(n))?,
            kinematic_tree: tree,
            skin_weights: matrix("skin_weights", &b.skin_weights, Some(j))?,
            shape_covariance: matrix("shape_covariance", &b.shape_covariance, Some(s))?,
            a_pose: b.a_pose,
        };
        model.validate()?;
        let garments: Vec<GarmentTemplate> = self
            .garments
            .into_iter()
            .map(|g| GarmentTemplate {
                class: g.class,
                body_vertex_ids: g.vertex_ids,
                displacements: g.displacements,
                faces: g.faces,
                uv_coords: g.uv,
                islands: g.islands,
                boundary_rings: g.boundary_rings,
                top_ring: g.top_ring,
            })
            .collect();
        for g in &garments {
            g.validate(&model)?;
        }
        Ok((model, garments))
    }
}

pub fn parse_model(text: &str, path: &Path) -> Result<(LbsModel, Vec<GarmentTemplate>)> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::parse(path, e))?;
    Ok(file.into_model()?)
}

pub fn load_model(path: &Path) -> Result<(LbsModel, Vec<GarmentTemplate>)> {
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::parse(path, e))?;
    parse_model(text, path)
}

/// The bundled toy model.
pub fn toy_model() -> Result<(LbsModel, Vec<GarmentTemplate>)> {
    parse_model(TOY_MODEL_JSON, Path::new("<bundled toy_model.json>"))
}

/// `path` if given, otherwise the bundled toy model.
pub fn load_model_or_toy(path: Option<&Path>) -> Result<(LbsModel, Vec<GarmentTemplate>)> {
    match path {
        Some(p) => load_model(p),
        None => toy_model(),
    }
}

pub fn save_model(path: &Path, model: &LbsModel, garments: &[GarmentTemplate]) -> Result<()> {
    let text = serde_json::to_string(&ModelFile::from_model(model, garments)).map_err(|e| Error::Internal(e.to_string()))?;
    write_file(path, text.as_bytes())
}

pub fn garment<'a>(garments: &'a [GarmentTemplate], class: GarmentClass) -> Result<&'a GarmentTemplate> {
    garments.iter().find(|g| g.class == class).ok_or_else(|| Error::Config(format!("model has no {} template", class.name())))
}
