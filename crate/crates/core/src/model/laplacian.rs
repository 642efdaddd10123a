use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::GarmentTemplate;
use crate::geom::{self, Vec3};
use crate::{Error, Result};

/// Uniform graph Laplacian `L = I - K^-1 A` over the triangle edge graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    /// Sparse rows; every row stores its diagonal first.
    rows: Vec<Vec<(usize, f64)>>,
    degree: Vec<usize>,
}

impl LaplacianMatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn degree(&self) -> &[usize] {
        &self.degree
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|(c, _)| *c == j).map_or(0.0, |(_, v)| *v)
    }

    /// `L x` for a field of 3-vectors.
    pub fn apply(&self, x: &[Vec3]) -> Vec<Vec3> {
        self.rows
            .iter()
            .map(|row| row.iter().fold([0.0; 3], |acc, &(j, w)| geom::add(acc, geom::scale(x[j], w))))
            .collect()
    }

    /// `L^T y`.
    pub fn apply_transpose(&self, y: &[Vec3]) -> Vec<Vec3> {
        let mut out = vec![[0.0; 3]; self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                out[j] = geom::add(out[j], geom::scale(y[i], w));
            }
        }
        out
    }
}

/// Builds the uniform Laplacian of the garment's edge graph.
pub fn build_laplacian(tmpl: &GarmentTemplate) -> Result<LaplacianMatrix> {
    laplacian_from_faces(&tmpl.faces, tmpl.num_vertices())
}

pub(crate) fn laplacian_from_faces(faces: &[[usize; 3]], m: usize) -> Result<LaplacianMatrix> {
    let edges: Vec<(usize, usize)> = faces.iter().flat_map(|f| (0..3).map(move |k| (f[k], f[(k + 1) % 3]))).collect();
    LaplacianMatrix::from_edges(&edges, m)
}

impl LaplacianMatrix {
    /// Laplacian of the undirected graph with the given edges on `m` vertices.
    pub fn from_edges(edges: &[(usize, usize)], m: usize) -> Result<LaplacianMatrix> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
        for &(a, b) in edges {
            if a >= m || b >= m {
                return Err(Error::invariant("faces", format!("edge ({a},{b}) out of range")));
            }
            if a != b {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        let mut rows = Vec::with_capacity(m);
        let mut degree = Vec::with_capacity(m);
        for (i, nbrs) in adj.iter().enumerate() {
            let k = nbrs.len();
            if k == 0 {
                return Err(Error::invariant("faces", format!("vertex {i} is isolated")));
            }
            let w = -1.0 / k as f64;
            let mut row = Vec::with_capacity(k + 1);
            row.push((i, 1.0));
            row.extend(nbrs.iter().map(|&j| (j, w)));
            rows.push(row);
            degree.push(k);
        }
        Ok(LaplacianMatrix { rows, degree })
    }
}

/// Cyclic second differences `v[i-1] - 2 v[i] + v[i+1]` along every
/// boundary ring.
pub fn boundary_second_differences(tmpl: &GarmentTemplate, vertices: &[Vec3]) -> Result<Vec<Vec<Vec3>>> {
    if vertices.len() != tmpl.num_vertices() {
        return Err(Error::dims("garment vertices", tmpl.num_vertices(), vertices.len()));
    }
    tmpl.boundary_rings.iter().map(|ring| ring_second_differences(ring, vertices)).collect()
}

pub(crate) fn ring_second_differences(ring: &[usize], vertices: &[Vec3]) -> Result<Vec<Vec3>> {
    let r = ring.len();
    if r < 3 {
        return Err(Error::InvalidArgument(format!("boundary ring of length {r}; need at least 3")));
    }
    Ok((0..r)
        .map(|i| {
            let prev = vertices[ring[(i + r - 1) % r]];
            let cur = vertices[ring[i]];
            let next = vertices[ring[(i + 1) % r]];
            geom::sub(geom::add(prev, next), geom::scale(cur, 2.0))
        })
        .collect())
}
