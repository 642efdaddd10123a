//! A small self-authored body model and its three garment templates.
//!
//! The body is a two-sided cut-out doll: a human outline laid out on a
//! regular grid in the T-pose, with a front panel and a back panel that are
//! stitched together along the outline and bulge out to give the limbs and
//! torso a rounded cross-section. Units are meters, `y` up, the body faces
//! `+z`. The root of the A-pose is a half turn about `x`, which maps the body
//! into the camera frame (`y` down, facing the camera at the origin).
//!
//! Joints follow a 24-joint ordering in which 1, 2 are the hips, 3, 4 the
//! knees, 13, 14 the collars and 16, 17 the shoulders, so the per-class active
//! joint subsets select the joints their names suggest.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use super::{boundary_cycles, GarmentClass, GarmentTemplate, Island, LbsModel};
use crate::geom::Vec3;
use crate::linalg::Matrix;
use crate::Result;

const CELL: f64 = 0.04;
const BLEND: f64 = 0.04;
const X_RANGE: (i32, i32) = (-19, 19);
const Y_RANGE: (i32, i32) = (0, 44);

pub const NUM_JOINTS: usize = 24;

const PARENTS: [i32; NUM_JOINTS] = [-1, 0, 0, 1, 2, 0, 5, 3, 4, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21];

const JOINTS: [[f64; 2]; NUM_JOINTS] = [
    [0.0, 0.95],   // 0 pelvis
    [0.10, 0.86],  // 1 left hip
    [-0.10, 0.86], // 2 right hip
    [0.10, 0.48],  // 3 left knee
    [-0.10, 0.48], // 4 right knee
    [0.0, 1.05],   // 5 spine 1
    [0.0, 1.18],   // 6 spine 2
    [0.10, 0.16],  // 7 left ankle
    [-0.10, 0.16], // 8 right ankle
    [0.0, 1.30],   // 9 spine 3
    [0.10, 0.10],  // 10 left foot
    [-0.10, 0.10], // 11 right foot
    [0.0, 1.46],   // 12 neck
    [0.08, 1.42],  // 13 left collar
    [-0.08, 1.42], // 14 right collar
    [0.0, 1.60],   // 15 head
    [0.18, 1.42],  // 16 left shoulder
    [-0.18, 1.42], // 17 right shoulder
    [0.44, 1.42],  // 18 left elbow
    [-0.44, 1.42], // 19 right elbow
    [0.62, 1.42],  // 20 left wrist
    [-0.62, 1.42], // 21 right wrist
    [0.70, 1.42],  // 22 left hand
    [-0.70, 1.42], // 23 right hand
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Torso,
    Head,
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
}

fn part_of(cx: i32, cy: i32) -> Option<Part> {
    if (-4..=3).contains(&cx) && (21..=36).contains(&cy) {
        Some(Part::Torso)
    } else if (-2..=1).contains(&cx) && (37..=42).contains(&cy) {
        Some(Part::Head)
    } else if (4..=17).contains(&cx) && (34..=36).contains(&cy) {
        Some(Part::LeftArm)
    } else if (-18..=-5).contains(&cx) && (34..=36).contains(&cy) {
        Some(Part::RightArm)
    } else if (1..=3).contains(&cx) && (2..=20).contains(&cy) {
        Some(Part::LeftLeg)
    } else if (-4..=-2).contains(&cx) && (2..=20).contains(&cy) {
        Some(Part::RightLeg)
    } else {
        None
    }
}

/// Cells covered by each garment class.
fn garment_cell(class: GarmentClass, cx: i32, cy: i32) -> bool {
    match (class, part_of(cx, cy)) {
        (GarmentClass::TShirt, Some(Part::Torso)) => cy >= 22,
        (GarmentClass::TShirt, Some(Part::LeftArm)) => cx <= 8,
        (GarmentClass::TShirt, Some(Part::RightArm)) => cx >= -9,
        (GarmentClass::Shorts, Some(Part::Torso)) => cy <= 24,
        (GarmentClass::Shorts, Some(Part::LeftLeg | Part::RightLeg)) => cy >= 15,
        (GarmentClass::Pants, Some(Part::Torso)) => cy <= 24,
        (GarmentClass::Pants, Some(Part::LeftLeg | Part::RightLeg)) => cy >= 4,
        _ => false,
    }
}

/// Cloth offsets (outline, normal-to-panel) per class.
fn garment_offsets(class: GarmentClass) -> (f64, f64) {
    match class {
        GarmentClass::TShirt => (0.03, 0.02),
        GarmentClass::Shorts => (0.02, 0.015),
        GarmentClass::Pants => (0.015, 0.012),
    }
}

/// Weights along a chain of joints split at ascending `bounds`, with linear
/// blending within `BLEND` of each split.
fn chain_weights(s: f64, joints: &[usize], bounds: &[f64]) -> Vec<(usize, f64)> {
    debug_assert_eq!(joints.len(), bounds.len() + 1);
    let nearest = bounds
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - s).abs().total_cmp(&(b.1 - s).abs()))
        .map(|(k, b)| (k, *b));
    if let Some((k, b)) = nearest {
        if (s - b).abs() < BLEND - 1e-9 {
            let t = (s - (b - BLEND)) / (2.0 * BLEND);
            return vec![(joints[k], 1.0 - t), (joints[k + 1], t)];
        }
    }
    let seg = bounds.iter().filter(|&&b| b <= s).count();
    vec![(joints[seg], 1.0)]
}

fn part_weights(part: Part, x: f64, y: f64) -> Vec<(usize, f64)> {
    match part {
        Part::Torso => {
            let mut out = Vec::new();
            for (slot, w) in chain_weights(y, &[0, 5, 6, 9, usize::MAX], &[1.05, 1.18, 1.30, 1.42]) {
                if slot == usize::MAX {
                    for (j, wx) in chain_weights(x, &[14, 12, 13], &[-0.06, 0.06]) {
                        out.push((j, w * wx));
                    }
                } else {
                    out.push((slot, w));
                }
            }
            out
        }
        Part::Head => chain_weights(y, &[12, 15], &[1.60]),
        Part::LeftArm => chain_weights(x, &[13, 16, 18, 20, 22], &[0.18, 0.44, 0.62, 0.70]),
        Part::RightArm => chain_weights(-x, &[14, 17, 19, 21, 23], &[0.18, 0.44, 0.62, 0.70]),
        Part::LeftLeg => chain_weights(-y, &[0, 1, 3, 7, 10], &[-0.86, -0.48, -0.16, -0.10]),
        Part::RightLeg => chain_weights(-y, &[0, 2, 4, 8, 11], &[-0.86, -0.48, -0.16, -0.10]),
    }
}

/// One grid point of the doll and its one (outline) or two (front, back)
/// mesh vertices.
#[derive(Debug, Clone, Copy)]
struct GridPoint {
    front: usize,
    back: usize,
    outline: bool,
}

struct Doll {
    points: BTreeMap<(i32, i32), GridPoint>,
    positions: Vec<Vec3>,
    /// Outward in-plane normal of outline points, or panel side (+1/-1) of
    /// interior copies.
    offset_dir: Vec<[f64; 3]>,
    grid_of: Vec<(i32, i32)>,
}

fn cell_inside(cx: i32, cy: i32) -> bool {
    part_of(cx, cy).is_some()
}

fn point_cells(ix: i32, iy: i32) -> [(i32, i32); 4] {
    [(ix - 1, iy - 1), (ix, iy - 1), (ix - 1, iy), (ix, iy)]
}

fn build_doll() -> Doll {
    let mut inside_pts = Vec::new();
    for iy in Y_RANGE.0..=Y_RANGE.1 + 1 {
        for ix in X_RANGE.0..=X_RANGE.1 + 1 {
            let cells = point_cells(ix, iy);
            let n_in = cells.iter().filter(|c| cell_inside(c.0, c.1)).count();
            if n_in > 0 {
                inside_pts.push(((ix, iy), n_in < 4));
            }
        }
    }
    // Grid distance to the outline drives the panel bulge.
    let mut dist: BTreeMap<(i32, i32), u32> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &(p, outline) in &inside_pts {
        if outline {
            dist.insert(p, 0);
            queue.push_back(p);
        }
    }
    let all: BTreeMap<(i32, i32), bool> = inside_pts.iter().copied().collect();
    while let Some((ix, iy)) = queue.pop_front() {
        let d = dist[&(ix, iy)];
        for q in [(ix + 1, iy), (ix - 1, iy), (ix, iy + 1), (ix, iy - 1)] {
            if all.contains_key(&q) && !dist.contains_key(&q) {
                dist.insert(q, d + 1);
                queue.push_back(q);
            }
        }
    }

    let mut points = BTreeMap::new();
    let mut positions = Vec::new();
    let mut offset_dir = Vec::new();
    let mut grid_of = Vec::new();
    for &((ix, iy), outline) in &inside_pts {
        let x = ix as f64 * CELL;
        let y = iy as f64 * CELL;
        if outline {
            let mut n = [0.0f64; 2];
            for (cx, cy) in point_cells(ix, iy) {
                if !cell_inside(cx, cy) {
                    n[0] += (cx as f64 + 0.5) - ix as f64;
                    n[1] += (cy as f64 + 0.5) - iy as f64;
                }
            }
            let len = libm::sqrt(n[0] * n[0] + n[1] * n[1]).max(1e-12);
            let idx = positions.len();
            positions.push([x, y, 0.0]);
            offset_dir.push([n[0] / len, n[1] / len, 0.0]);
            grid_of.push((ix, iy));
            points.insert((ix, iy), GridPoint { front: idx, back: idx, outline: true });
        } else {
            let depth = (0.06 * libm::sqrt(dist[&(ix, iy)] as f64)).min(0.10);
            let front = positions.len();
            positions.push([x, y, depth]);
            offset_dir.push([0.0, 0.0, 1.0]);
            grid_of.push((ix, iy));
            let back = positions.len();
            positions.push([x, y, -depth]);
            offset_dir.push([0.0, 0.0, -1.0]);
            grid_of.push((ix, iy));
            points.insert((ix, iy), GridPoint { front, back, outline: false });
        }
    }
    Doll { points, positions, offset_dir, grid_of }
}

impl Doll {
    /// Front and back triangles of a cell, front panel wound towards `+z`.
    fn cell_faces(&self, cx: i32, cy: i32) -> [([usize; 3], Island); 4] {
        let p = |ix, iy| self.points[&(ix, iy)];
        let (a, b, c, d) = (p(cx, cy), p(cx + 1, cy), p(cx + 1, cy + 1), p(cx, cy + 1));
        [
            ([a.front, b.front, c.front], Island::Front),
            ([a.front, c.front, d.front], Island::Front),
            ([a.back, c.back, b.back], Island::Back),
            ([a.back, d.back, c.back], Island::Back),
        ]
    }

    fn cells(&self) -> impl Iterator<Item = (i32, i32)> {
        (Y_RANGE.0..=Y_RANGE.1)
            .flat_map(|cy| (X_RANGE.0..=X_RANGE.1).map(move |cx| (cx, cy)))
            .filter(|&(cx, cy)| cell_inside(cx, cy))
    }
}

/// Builds the toy body and its T-shirt, shorts and pants templates.
pub fn build() -> Result<(LbsModel, Vec<GarmentTemplate>)> {
    let doll = build_doll();
    let n = doll.positions.len();

    let mut faces = Vec::new();
    for (cx, cy) in doll.cells() {
        faces.extend(doll.cell_faces(cx, cy).iter().map(|(f, _)| *f));
    }

    // Shape space: girth (x, z scaling) and height (y scaling about the pelvis).
    let num_shapes = 2;
    let mut shape_dirs = vec![0.0; n * 3 * num_shapes];
    for (v, p) in doll.positions.iter().enumerate() {
        shape_dirs[(v * 3) * num_shapes] = 0.06 * p[0];
        shape_dirs[(v * 3 + 2) * num_shapes] = 0.06 * p[2];
        shape_dirs[(v * 3 + 1) * num_shapes + 1] = 0.04 * (p[1] - 0.95);
    }

    let mut skin = Matrix::zeros(n, NUM_JOINTS);
    for (v, &(ix, iy)) in doll.grid_of.iter().enumerate() {
        let pos = doll.positions[v];
        let cells: Vec<Part> = point_cells(ix, iy).iter().filter_map(|c| part_of(c.0, c.1)).collect();
        let share = 1.0 / cells.len() as f64;
        for part in cells {
            for (j, w) in part_weights(part, pos[0], pos[1]) {
                skin[(v, j)] += w * share;
            }
        }
    }

    let mut regressor = Matrix::zeros(NUM_JOINTS, n);
    for (j, &[x, y]) in JOINTS.iter().enumerate() {
        let gx = x / CELL;
        let gy = y / CELL;
        let cx = libm::floor(gx) as i32;
        let cy = libm::floor(gy) as i32;
        assert!(cell_inside(cx, cy), "joint {j} outside the body");
        let fx = gx - cx as f64;
        let fy = gy - cy as f64;
        for (ix, iy, w) in [
            (cx, cy, (1.0 - fx) * (1.0 - fy)),
            (cx + 1, cy, fx * (1.0 - fy)),
            (cx, cy + 1, (1.0 - fx) * fy),
            (cx + 1, cy + 1, fx * fy),
        ] {
            let gp = doll.points[&(ix, iy)];
            if gp.outline {
                regressor[(j, gp.front)] += w;
            } else {
                regressor[(j, gp.front)] += 0.5 * w;
                regressor[(j, gp.back)] += 0.5 * w;
            }
        }
    }

    let mut a_pose = vec![[0.0; 3]; NUM_JOINTS];
    a_pose[0] = [core::f64::consts::PI, 0.0, 0.0];
    a_pose[1] = [0.0, 0.0, 0.05];
    a_pose[2] = [0.0, 0.0, -0.05];
    a_pose[16] = [0.0, 0.0, -0.75];
    a_pose[17] = [0.0, 0.0, 0.75];

    let model = LbsModel {
        template_vertices: doll.positions.clone(),
        faces,
        shape_dirs,
        num_shapes,
        joint_regressor: regressor,
        kinematic_tree: PARENTS.iter().map(|&p| if p < 0 { None } else { Some(p as usize) }).collect(),
        skin_weights: skin,
        shape_covariance: Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.64]])?,
        a_pose,
    };

    let garments = GarmentClass::ALL.iter().map(|&class| build_garment(&doll, class)).collect::<Result<Vec<_>>>()?;
    Ok((model, garments))
}

fn build_garment(doll: &Doll, class: GarmentClass) -> Result<GarmentTemplate> {
    let cells: Vec<(i32, i32)> = doll.cells().filter(|&(cx, cy)| garment_cell(class, cx, cy)).collect();
    let mut body_faces = Vec::new();
    for &(cx, cy) in &cells {
        body_faces.extend(doll.cell_faces(cx, cy));
    }
    let mut used: Vec<usize> = body_faces.iter().flat_map(|(f, _)| *f).collect();
    used.sort_unstable();
    used.dedup();
    let local: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &b)| (b, i)).collect();

    let (side_off, panel_off) = garment_offsets(class);
    let displacements = used
        .iter()
        .map(|&b| {
            let d = doll.offset_dir[b];
            let s = if d[2] == 0.0 { side_off } else { panel_off };
            [d[0] * s, d[1] * s, d[2] * s]
        })
        .collect();

    let xs = cells.iter().flat_map(|c| [c.0, c.0 + 1]).map(|i| i as f64 * CELL);
    let ys = cells.iter().flat_map(|c| [c.1, c.1 + 1]).map(|i| i as f64 * CELL);
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let s = (0.46 / (xmax - xmin)).min(0.96 / (ymax - ymin));
    let ymid = 0.5 * (ymin + ymax);
    let uv_of = |b: usize, island: Island| {
        let p = doll.positions[b];
        let v = 0.5 + s * (ymid - p[1]);
        let u = match island {
            Island::Front => 0.02 + s * (p[0] - xmin),
            Island::Back => 0.98 - s * (p[0] - xmin),
        };
        [u, v]
    };

    let faces: Vec<[usize; 3]> = body_faces.iter().map(|(f, _)| f.map(|b| local[&b])).collect();
    let uv_coords = body_faces.iter().map(|(f, island)| f.map(|b| uv_of(b, *island))).collect();
    let islands = body_faces.iter().map(|(_, i)| *i).collect();

    let boundary_rings = boundary_cycles(&faces)?;
    let top_ring = if class.has_waistline() {
        boundary_rings
            .iter()
            .max_by(|a, b| {
                let mean = |r: &Vec<usize>| r.iter().map(|&v| doll.positions[used[v]][1]).sum::<f64>() / r.len() as f64;
                mean(a).total_cmp(&mean(b))
            })
            .cloned()
            .unwrap_or_default()
    } else {
        Vec::new()
    };

    Ok(GarmentTemplate {
        class,
        body_vertex_ids: used,
        displacements,
        faces,
        uv_coords,
        islands,
        boundary_rings,
        top_ring,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_model_validates() {
        let (model, garments) = build().unwrap();
        model.validate().unwrap();
        assert!(model.num_vertices() > 400 && model.num_vertices() < 1200, "{}", model.num_vertices());
        assert_eq!(garments.len(), 3);
        for g in &garments {
            g.validate(&model).unwrap();
        }
    }

    #[test]
    fn garment_rings_match_openings() {
        let (_, garments) = build().unwrap();
        let rings: Vec<usize> = garments.iter().map(|g| g.boundary_rings.len()).collect();
        // T-shirt: neck, hem, two sleeves. Shorts and pants: waist, two legs.
        assert_eq!(rings, vec![4, 3, 3]);
        assert!(garments[0].top_ring.is_empty());
        assert!(!garments[1].top_ring.is_empty());
    }

    #[test]
    fn regressed_joints_sit_at_authored_locations() {
        let (model, _) = build().unwrap();
        let joints = super::super::compute_joints(&model, &[0.0, 0.0]).unwrap();
        for (j, p) in joints.iter().enumerate() {
            assert!((p[0] - JOINTS[j][0]).abs() < 1e-9, "joint {j}");
            assert!((p[1] - JOINTS[j][1]).abs() < 1e-9, "joint {j}");
            assert!(p[2].abs() < 1e-12);
        }
    }
}
