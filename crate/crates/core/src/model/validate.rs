use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{covariance_factor, GarmentTemplate, Island, LbsModel};
use crate::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-6;

impl LbsModel {
    /// Checks every structural invariant of the body model.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vertices();
        let j = self.num_joints();
        let s = self.num_shapes;
        if n == 0 {
            return Err(Error::invariant("vertices", "model has no vertices"));
        }
        if j == 0 {
            return Err(Error::invariant("kinematic_tree", "model has no joints"));
        }
        if self.template_vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invariant("vertices", "non-finite coordinate"));
        }
        check_faces("faces", &self.faces, n)?;
        if self.shape_dirs.len() != n * 3 * s {
            return Err(Error::invariant(
                "shape_dirs",
                format!("expected {n}x3x{s} entries, found {}", self.shape_dirs.len()),
            ));
        }
        if self.joint_regressor.rows() != j || self.joint_regressor.cols() != n {
            return Err(Error::invariant(
                "joint_regressor",
                format!(
                    "expected {j}x{n}, found {}x{}",
                    self.joint_regressor.rows(),
                    self.joint_regressor.cols()
                ),
            ));
        }
        self.check_tree()?;
        if self.skin_weights.rows() != n || self.skin_weights.cols() != j {
            return Err(Error::invariant(
                "skin_weights",
                format!("expected {n}x{j}, found {}x{}", self.skin_weights.rows(), self.skin_weights.cols()),
            ));
        }
        for v in 0..n {
            let row = self.skin_weights.row(v);
            if let Some(k) = row.iter().position(|w| *w < 0.0 || !w.is_finite()) {
                return Err(Error::invariant("skin_weights", format!("row {v} has negative weight at joint {k}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::invariant("skin_weights", format!("row {v} sums to {sum}, expected 1")));
            }
        }
        if self.shape_covariance.rows() != s || self.shape_covariance.cols() != s {
            return Err(Error::invariant("shape_covariance", format!("expected {s}x{s}")));
        }
        if s > 0 {
            covariance_factor(&self.shape_covariance)?;
        }
        if self.a_pose.len() != j {
            return Err(Error::invariant("a_pose", format!("expected {j} joint rotations, found {}", self.a_pose.len())));
        }
        Ok(())
    }

    fn check_tree(&self) -> Result<()> {
        let j = self.num_joints();
        let roots = self.kinematic_tree.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::invariant("kinematic_tree", format!("expected exactly one root, found {roots}")));
        }
        for (k, p) in self.kinematic_tree.iter().enumerate() {
            if let Some(p) = p {
                if *p >= j {
                    return Err(Error::invariant("kinematic_tree", format!("joint {k} has parent {p} out of range")));
                }
            }
        }
        // Walking up from every joint must reach the root within j steps.
        for k in 0..j {
            let mut cur = k;
            let mut steps = 0;
            while let Some(p) = self.kinematic_tree[cur] {
                cur = p;
                steps += 1;
                if steps > j {
                    return Err(Error::invariant("kinematic_tree", format!("cycle through joint {k}")));
                }
            }
        }
        Ok(())
    }
}

impl GarmentTemplate {
    /// Checks the template against its body model.
    pub fn validate(&self, model: &LbsModel) -> Result<()> {
        let m = self.num_vertices();
        let n = model.num_vertices();
        if m == 0 {
            return Err(Error::invariant("vertex_ids", "garment has no vertices"));
        }
        if let Some(b) = self.body_vertex_ids.iter().find(|&&b| b >= n) {
            return Err(Error::invariant("vertex_ids", format!("body vertex {b} out of range 0..{n}")));
        }
        if self.displacements.len() != m {
            return Err(Error::invariant("displacements", format!("expected {m} rows, found {}", self.displacements.len())));
        }
        check_faces("faces", &self.faces, m)?;
        let f = self.faces.len();
        if self.uv_coords.len() != f {
            return Err(Error::invariant("uv", format!("expected {f} UV triples, found {}", self.uv_coords.len())));
        }
        if self.islands.len() != f {
            return Err(Error::invariant("islands", format!("expected {f} labels, found {}", self.islands.len())));
        }
        if !(self.islands.contains(&Island::Front) && self.islands.contains(&Island::Back)) {
            return Err(Error::invariant("islands", "template must have both a front and a back island"));
        }
        if self.uv_coords.iter().flatten().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::invariant("uv", "UV coordinates must lie in [0,1]"));
        }
        for island in [Island::Front, Island::Back] {
            if let Some((a, b)) = first_uv_overlap(self, island) {
                return Err(Error::UvOverlap { island: island.name(), faces: (a, b) });
            }
        }
        let boundary: BTreeMap<(usize, usize), ()> =
            boundary_edges(&self.faces).into_iter().map(|(a, b)| ((a.min(b), a.max(b)), ())).collect();
        let mut ring_vertices = vec![false; m];
        for (r, ring) in self.boundary_rings.iter().enumerate() {
            if ring.len() < 3 {
                return Err(Error::invariant("boundary_rings", format!("ring {r} has fewer than 3 vertices")));
            }
            for i in 0..ring.len() {
                let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
                if a >= m || b >= m {
                    return Err(Error::invariant("boundary_rings", format!("ring {r} vertex out of range")));
                }
                if !boundary.contains_key(&(a.min(b), a.max(b))) {
                    return Err(Error::invariant(
                        "boundary_rings",
                        format!("ring {r}: ({a},{b}) is not a boundary edge"),
                    ));
                }
                ring_vertices[a] = true;
            }
        }
        if let Some(v) = self.top_ring.iter().find(|&&v| v >= m || !ring_vertices[v]) {
            return Err(Error::invariant("top_ring", format!("vertex {v} is not on a boundary ring")));
        }
        Ok(())
    }
}

fn check_faces(field: &'static str, faces: &[[usize; 3]], n: usize) -> Result<()> {
    for (i, f) in faces.iter().enumerate() {
        if f.iter().any(|&v| v >= n) {
            return Err(Error::invariant(field, format!("face {i} indexes past {n} vertices")));
        }
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return Err(Error::invariant(field, format!("face {i} repeats a vertex")));
        }
    }
    Ok(())
}

/// Directed edges `(a, b)` that belong to exactly one face, in the winding
/// of that face.
pub fn boundary_edges(faces: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut count: BTreeMap<(usize, usize), (usize, (usize, usize))> = BTreeMap::new();
    for f in faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            let e = count.entry((a.min(b), a.max(b))).or_insert((0, (a, b)));
            e.0 += 1;
        }
    }
    count.into_values().filter(|(c, _)| *c == 1).map(|(_, e)| e).collect()
}

/// Chains boundary edges into closed cycles following the face winding.
pub fn boundary_cycles(faces: &[[usize; 3]]) -> Result<Vec<Vec<usize>>> {
    let edges = boundary_edges(faces);
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for (a, b) in edges {
        if next.insert(a, b).is_some() {
            return Err(Error::invariant("boundary_rings", format!("vertex {a} has several outgoing boundary edges")));
        }
    }
    let mut cycles = Vec::new();
    let mut seen: BTreeMap<usize, ()> = BTreeMap::new();
    let starts: Vec<usize> = next.keys().copied().collect();
    for start in starts {
        if seen.contains_key(&start) {
            continue;
        }
        let mut ring = Vec::new();
        let mut cur = start;
        loop {
            seen.insert(cur, ());
            ring.push(cur);
            cur = *next
                .get(&cur)
                .ok_or_else(|| Error::invariant("boundary_rings", format!("open boundary at vertex {cur}")))?;
            if cur == start {
                break;
            }
            if seen.contains_key(&cur) {
                return Err(Error::invariant("boundary_rings", format!("boundary revisits vertex {cur}")));
            }
        }
        cycles.push(ring);
    }
    Ok(cycles)
}

/// First pair of faces in `island` whose UV triangles share interior area.
fn first_uv_overlap(tmpl: &GarmentTemplate, island: Island) -> Option<(usize, usize)> {
    let mut items: Vec<(usize, [f64; 4])> = tmpl
        .uv_coords
        .iter()
        .enumerate()
        .filter(|(i, _)| tmpl.islands[*i] == island)
        .map(|(i, t)| {
            let us = t.map(|p| p[0]);
            let vs = t.map(|p| p[1]);
            let bb = [
                us.iter().copied().fold(f64::INFINITY, f64::min),
                us.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                vs.iter().copied().fold(f64::INFINITY, f64::min),
                vs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ];
            (i, bb)
        })
        .collect();
    items.sort_by(|a, b| a.1[0].total_cmp(&b.1[0]).then(a.0.cmp(&b.0)));
    for (k, (i, bi)) in items.iter().enumerate() {
        for (j, bj) in &items[k + 1..] {
            if bj[0] >= bi[1] {
                break;
            }
            if bj[2] >= bi[3] || bi[2] >= bj[3] {
                continue;
            }
            if triangles_overlap(&tmpl.uv_coords[*i], &tmpl.uv_coords[*j]) {
                return Some(((*i).min(*j), (*i).max(*j)));
            }
        }
    }
    None
}

/// Separating-axis test for interior overlap; touching triangles do not
/// count.
pub(crate) fn triangles_overlap(a: &[[f64; 2]; 3], b: &[[f64; 2]; 3]) -> bool {
    let scale = a.iter().chain(b).fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs())).max(1.0);
    let eps = 1e-12 * scale;
    for tri in [a, b] {
        for k in 0..3 {
            let p = tri[k];
            let q = tri[(k + 1) % 3];
            let axis = [q[1] - p[1], p[0] - q[0]];
            let proj = |t: &[[f64; 2]; 3]| {
                let vals = t.map(|v| v[0] * axis[0] + v[1] * axis[1]);
                (vals.iter().copied().fold(f64::INFINITY, f64::min), vals.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            };
            let (amin, amax) = proj(a);
            let (bmin, bmax) = proj(b);
            let len = libm::sqrt(axis[0] * axis[0] + axis[1] * axis[1]);
            if len == 0.0 {
                continue;
            }
            if amax <= bmin + eps * len || bmax <= amin + eps * len {
                return false;
            }
        }
    }
    true
}
