//! Skinned body model, garment templates and linear blend skinning.
//!
//! A garment is the sub-mesh of the body selected by `body_vertex_ids`,
//! offset by fixed per-vertex displacements and articulated with the body's
//! skeleton. Garment skin weights are copied from the associated body
//! vertices.

mod laplacian;
pub mod toy;
mod validate;

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{self, Rigid, Vec3};
use crate::linalg::{cholesky, Matrix};
use crate::{Error, Result};

pub use laplacian::{boundary_second_differences, build_laplacian, LaplacianMatrix};
pub use validate::{boundary_edges, boundary_cycles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum GarmentClass {
    #[cfg_attr(feature = "serde", serde(alias = "t-shirt", alias = "shirt"))]
    TShirt,
    Shorts,
    Pants,
}

impl GarmentClass {
    pub const ALL: [GarmentClass; 3] = [GarmentClass::TShirt, GarmentClass::Shorts, GarmentClass::Pants];

    /// Joints whose rotations are optimised for this class, in the model's
    /// canonical joint ordering: shoulders for shirts, hips for shorts, hips
    /// and knees for pants.
    pub fn active_joints(self) -> &'static [usize] {
        match self {
            GarmentClass::TShirt => &[13, 14, 16, 17],
            GarmentClass::Shorts => &[1, 2],
            GarmentClass::Pants => &[1, 2, 3, 4],
        }
    }

    /// Shorts and pants carry a waistline ring matched against the image.
    pub fn has_waistline(self) -> bool {
        !matches!(self, GarmentClass::TShirt)
    }

    pub fn name(self) -> &'static str {
        match self {
            GarmentClass::TShirt => "tshirt",
            GarmentClass::Shorts => "shorts",
            GarmentClass::Pants => "pants",
        }
    }
}

impl core::str::FromStr for GarmentClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tshirt" | "t-shirt" | "shirt" => Ok(GarmentClass::TShirt),
            "shorts" => Ok(GarmentClass::Shorts),
            "pants" => Ok(GarmentClass::Pants),
            other => Err(Error::InvalidArgument(alloc::format!("unknown garment class `{other}`"))),
        }
    }
}

/// UV island of a garment face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Island {
    Front,
    Back,
}

impl Island {
    pub fn name(self) -> &'static str {
        match self {
            Island::Front => "front",
            Island::Back => "back",
        }
    }
}

/// Skinned template body.
#[derive(Debug, Clone, PartialEq)]
pub struct LbsModel {
    pub template_vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// Per-unit-coefficient displacements, laid out `[vertex][axis][shape]`.
    pub shape_dirs: Vec<f64>,
    pub num_shapes: usize,
    /// `J x n`.
    pub joint_regressor: Matrix,
    /// Parent of every joint; `None` for the root.
    pub kinematic_tree: Vec<Option<usize>>,
    /// `n x J`.
    pub skin_weights: Matrix,
    /// `S x S`, symmetric positive definite.
    pub shape_covariance: Matrix,
    /// Axis-angle rotation per joint of the reference A-pose.
    pub a_pose: Vec<Vec3>,
}

impl LbsModel {
    pub fn num_vertices(&self) -> usize {
        self.template_vertices.len()
    }

    pub fn num_joints(&self) -> usize {
        self.kinematic_tree.len()
    }

    /// Template vertices with shape blendshapes applied.
    pub fn shaped_vertices(&self, beta: &[f64]) -> Result<Vec<Vec3>> {
        self.check_beta(beta)?;
        let s = self.num_shapes;
        Ok(self
            .template_vertices
            .iter()
            .enumerate()
            .map(|(v, &t)| {
                let mut p = t;
                for (axis, coord) in p.iter_mut().enumerate() {
                    let dirs = &self.shape_dirs[(v * 3 + axis) * s..(v * 3 + axis + 1) * s];
                    *coord += dirs.iter().zip(beta).map(|(d, b)| d * b).sum::<f64>();
                }
                p
            })
            .collect())
    }

    pub(crate) fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.num_shapes {
            return Err(Error::dims("shape coefficients", self.num_shapes, beta.len()));
        }
        Ok(())
    }

    /// Blendshape displacement of one body vertex for coefficients `beta`.
    pub fn shape_offset(&self, vertex: usize, beta: &[f64]) -> Vec3 {
        let s = self.num_shapes;
        let mut out = [0.0; 3];
        for (axis, o) in out.iter_mut().enumerate() {
            let dirs = &self.shape_dirs[(vertex * 3 + axis) * s..(vertex * 3 + axis + 1) * s];
            *o = dirs.iter().zip(beta).map(|(d, b)| d * b).sum();
        }
        out
    }

    /// Children lists of the kinematic tree.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_joints()];
        for (j, p) in self.kinematic_tree.iter().enumerate() {
            if let Some(p) = p {
                out[*p].push(j);
            }
        }
        out
    }

    /// Joint order in which every parent precedes its children.
    pub fn topological_order(&self) -> Vec<usize> {
        let children = self.children();
        let mut order = Vec::with_capacity(self.num_joints());
        let mut stack: Vec<usize> =
            (0..self.num_joints()).filter(|&j| self.kinematic_tree[j].is_none()).rev().collect();
        while let Some(j) = stack.pop() {
            order.push(j);
            stack.extend(children[j].iter().rev());
        }
        order
    }
}

/// Joint locations `J(beta)` regressed from the shaped template.
pub fn compute_joints(model: &LbsModel, beta: &[f64]) -> Result<Vec<Vec3>> {
    let shaped = model.shaped_vertices(beta)?;
    Ok(regress_joints(model, &shaped))
}

fn regress_joints(model: &LbsModel, shaped: &[Vec3]) -> Vec<Vec3> {
    (0..model.num_joints())
        .map(|j| {
            let mut acc = [0.0; 3];
            for (w, p) in model.joint_regressor.row(j).iter().zip(shaped) {
                if *w != 0.0 {
                    acc = geom::add(acc, geom::scale(*p, *w));
                }
            }
            acc
        })
        .collect()
}

/// Per-joint skinning transforms `G_k * G_k(rest)^-1` for joint locations
/// `joints` and axis-angle rotations `theta`.
pub fn skinning_transforms(model: &LbsModel, joints: &[Vec3], theta: &[Vec3]) -> Result<Vec<Rigid>> {
    let j = model.num_joints();
    if theta.len() != j {
        return Err(Error::dims("pose rotations", j, theta.len()));
    }
    // A_k = A_parent o (rotation by theta_k about J_k).
    let mut out = vec![Rigid::IDENTITY; j];
    for k in model.topological_order() {
        let rot = geom::rodrigues(theta[k]);
        let local = Rigid { rot, trans: geom::sub(joints[k], geom::mat_vec(&rot, joints[k])) };
        out[k] = match model.kinematic_tree[k] {
            None => local,
            Some(p) => out[p].compose(&local),
        };
    }
    Ok(out)
}

/// Garment template: a re-indexed sub-mesh of the body plus displacements
/// and a two-island UV atlas.
#[derive(Debug, Clone, PartialEq)]
pub struct GarmentTemplate {
    pub class: GarmentClass,
    pub body_vertex_ids: Vec<usize>,
    pub displacements: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// UV coordinates of the three corners of every face.
    pub uv_coords: Vec<[[f64; 2]; 3]>,
    pub islands: Vec<Island>,
    /// Ordered closed cycles of boundary vertices.
    pub boundary_rings: Vec<Vec<usize>>,
    /// Waistline ring vertices (shorts and pants only).
    pub top_ring: Vec<usize>,
}

impl GarmentTemplate {
    pub fn num_vertices(&self) -> usize {
        self.body_vertex_ids.len()
    }
}

/// Shape, pose and translation of the articulated garment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoseParams {
    pub beta: Vec<f64>,
    pub theta: Vec<Vec3>,
    pub trans: Vec3,
    pub active_joints: Vec<usize>,
}

impl PoseParams {
    /// Zero shape, identity joint rotations.
    pub fn rest(model: &LbsModel) -> Self {
        PoseParams {
            beta: vec![0.0; model.num_shapes],
            theta: vec![[0.0; 3]; model.num_joints()],
            trans: [0.0; 3],
            active_joints: Vec::new(),
        }
    }

    /// Zero shape at the model's A-pose, with the active joints of `class`.
    pub fn a_pose(model: &LbsModel, class: GarmentClass, trans: Vec3) -> Self {
        PoseParams {
            beta: vec![0.0; model.num_shapes],
            theta: model.a_pose.clone(),
            trans,
            active_joints: class.active_joints().to_vec(),
        }
    }
}

/// Precomputed garment skinning data, reused across many posing calls.
pub struct Poser<'a> {
    model: &'a LbsModel,
    tmpl: &'a GarmentTemplate,
    weights: Vec<Vec<(usize, f64)>>,
}

impl<'a> Poser<'a> {
    pub fn new(model: &'a LbsModel, tmpl: &'a GarmentTemplate) -> Result<Self> {
        let n = model.num_vertices();
        if tmpl.displacements.len() != tmpl.body_vertex_ids.len() {
            return Err(Error::dims("garment displacements", tmpl.body_vertex_ids.len(), tmpl.displacements.len()));
        }
        let weights = tmpl
            .body_vertex_ids
            .iter()
            .map(|&b| {
                if b >= n {
                    return Err(Error::invariant("vertex_ids", alloc::format!("body vertex {b} out of range")));
                }
                Ok(model.skin_weights.row(b).iter().copied().enumerate().filter(|(_, w)| *w != 0.0).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Poser { model, tmpl, weights })
    }

    pub fn model(&self) -> &LbsModel {
        self.model
    }

    pub fn template(&self) -> &GarmentTemplate {
        self.tmpl
    }

    /// Unposed garment vertices `I T(beta) + D`.
    pub fn unposed(&self, beta: &[f64]) -> Result<Vec<Vec3>> {
        self.model.check_beta(beta)?;
        Ok(self
            .tmpl
            .body_vertex_ids
            .iter()
            .zip(&self.tmpl.displacements)
            .map(|(&b, &d)| geom::add(geom::add(self.model.template_vertices[b], self.model.shape_offset(b, beta)), d))
            .collect())
    }

    /// Posed garment vertices including the translation.
    pub fn pose(&self, p: &PoseParams) -> Result<Vec<Vec3>> {
        let shaped = self.model.shaped_vertices(&p.beta)?;
        let joints = regress_joints(self.model, &shaped);
        let transforms = skinning_transforms(self.model, &joints, &p.theta)?;
        let unposed = self.unposed(&p.beta)?;
        Ok(unposed
            .iter()
            .zip(&self.weights)
            .map(|(&u, ws)| {
                let mut acc = u;
                for &(k, w) in ws {
                    acc = geom::add(acc, geom::scale(geom::sub(transforms[k].apply(u), u), w));
                }
                geom::add(acc, p.trans)
            })
            .collect())
    }
}

/// Articulates the garment: shape blendshapes, sub-mesh selection,
/// displacements, linear blend skinning, then translation.
pub fn pose_garment(model: &LbsModel, tmpl: &GarmentTemplate, p: &PoseParams) -> Result<Vec<Vec3>> {
    Poser::new(model, tmpl)?.pose(p)
}

/// Cholesky factor of the shape covariance, rejecting non-SPD input.
pub(crate) fn covariance_factor(cov: &Matrix) -> Result<Matrix> {
    cholesky(cov).map_err(|_| Error::invariant("shape_covariance", "must be symmetric positive definite"))
}

#[cfg(test)]
mod tests;
