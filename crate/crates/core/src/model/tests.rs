use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::laplacian::{laplacian_from_faces, ring_second_differences};
use super::*;
use crate::geom;

fn toy() -> (LbsModel, Vec<GarmentTemplate>) {
    toy::build().unwrap()
}

fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
    (0..3).all(|k| (a[k] - b[k]).abs() <= tol)
}

#[test]
fn rest_pose_returns_template_plus_displacements() {
    let (model, garments) = toy();
    for g in &garments {
        let out = pose_garment(&model, g, &PoseParams::rest(&model)).unwrap();
        for (i, v) in out.iter().enumerate() {
            let b = g.body_vertex_ids[i];
            let expect = geom::add(model.template_vertices[b], g.displacements[i]);
            assert_eq!(*v, expect);
        }
    }
}

#[test]
fn root_rotation_is_rigid() {
    let (model, garments) = toy();
    let g = &garments[0];
    let mut p = PoseParams::a_pose(&model, GarmentClass::TShirt, [0.0; 3]);
    p.theta[0] = [0.0; 3];
    p.theta[16] = [0.1, -0.3, 0.2];
    let base = pose_garment(&model, g, &p).unwrap();
    let r = [0.4, -1.1, 0.7];
    let rot = geom::rodrigues(r);
    p.theta[0] = r;
    let rotated = pose_garment(&model, g, &p).unwrap();
    // The root rotates about the root joint, so compare relative to it.
    let j0 = compute_joints(&model, &p.beta).unwrap()[0];
    for (a, b) in base.iter().zip(&rotated) {
        let expect = geom::add(geom::mat_vec(&rot, geom::sub(*a, j0)), j0);
        assert!(close(expect, *b, 1e-9));
    }
}

#[test]
fn translation_is_added_last() {
    let (model, garments) = toy();
    let g = &garments[2];
    let p = PoseParams::a_pose(&model, g.class, [0.0; 3]);
    let mut q = p.clone();
    q.trans = [0.3, -0.2, 2.5];
    let a = pose_garment(&model, g, &p).unwrap();
    let b = pose_garment(&model, g, &q).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(close(geom::add(*x, q.trans), *y, 1e-12));
    }
}

#[test]
fn unit_shape_coefficient_shifts_by_first_direction() {
    let (model, garments) = toy();
    let g = &garments[1];
    let poser = Poser::new(&model, g).unwrap();
    let base = poser.unposed(&[0.0, 0.0]).unwrap();
    let shifted = poser.unposed(&[1.0, 0.0]).unwrap();
    for (i, (a, b)) in base.iter().zip(&shifted).enumerate() {
        let v = g.body_vertex_ids[i];
        let s = model.num_shapes;
        let dir = [0, 1, 2].map(|axis| model.shape_dirs[(v * 3 + axis) * s]);
        assert!(close(geom::add(*a, dir), *b, 1e-12));
    }
}

#[test]
fn posing_is_linear_in_displacements() {
    let (model, garments) = toy();
    let g = garments[0].clone();
    let mut p = PoseParams::a_pose(&model, g.class, [0.1, 0.0, 3.0]);
    p.beta = vec![0.7, -0.4];
    p.theta[13] = [0.05, 0.1, -0.2];
    let zero = GarmentTemplate { displacements: vec![[0.0; 3]; g.num_vertices()], ..g.clone() };
    let double = GarmentTemplate { displacements: g.displacements.iter().map(|d| geom::scale(*d, 2.0)).collect(), ..g.clone() };
    let v0 = pose_garment(&model, &zero, &p).unwrap();
    let v1 = pose_garment(&model, &g, &p).unwrap();
    let v2 = pose_garment(&model, &double, &p).unwrap();
    for i in 0..v0.len() {
        let d1 = geom::sub(v1[i], v0[i]);
        let d2 = geom::sub(v2[i], v0[i]);
        assert!(close(geom::scale(d1, 2.0), d2, 1e-9));
    }
}

#[test]
fn pose_rejects_wrong_dimensions() {
    let (model, garments) = toy();
    let mut p = PoseParams::rest(&model);
    p.beta = vec![0.0; 3];
    assert!(matches!(pose_garment(&model, &garments[0], &p), Err(Error::DimensionMismatch { .. })));
    let mut p = PoseParams::rest(&model);
    p.theta.pop();
    assert!(matches!(pose_garment(&model, &garments[0], &p), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn joints_are_regressed_from_shaped_template() {
    let (model, _) = toy();
    let j0 = compute_joints(&model, &[0.0, 0.0]).unwrap();
    let j1 = compute_joints(&model, &[1.0, 0.0]).unwrap();
    let s = model.num_shapes;
    for j in 0..model.num_joints() {
        let mut expect = [0.0; 3];
        let mut shift = [0.0; 3];
        for v in 0..model.num_vertices() {
            let w = model.joint_regressor[(j, v)];
            expect = geom::add(expect, geom::scale(model.template_vertices[v], w));
            let dir = [0, 1, 2].map(|axis| model.shape_dirs[(v * 3 + axis) * s]);
            shift = geom::add(shift, geom::scale(dir, w));
        }
        assert!(close(j0[j], expect, 1e-12));
        assert!(close(geom::sub(j1[j], j0[j]), shift, 1e-12));
    }
}

#[test]
fn one_hot_regressor_selects_vertices() {
    let (mut model, _) = toy();
    let picks: Vec<usize> = (0..model.num_joints()).map(|j| j * 7 + 3).collect();
    let mut reg = crate::linalg::Matrix::zeros(model.num_joints(), model.num_vertices());
    for (j, &v) in picks.iter().enumerate() {
        reg[(j, v)] = 1.0;
    }
    model.joint_regressor = reg;
    let joints = compute_joints(&model, &[0.0, 0.0]).unwrap();
    for (j, &v) in picks.iter().enumerate() {
        assert_eq!(joints[j], model.template_vertices[v]);
    }
}

#[test]
fn triangle_laplacian() {
    let l = laplacian_from_faces(&[[0, 1, 2]], 3).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let e = if i == j { 1.0 } else { -0.5 };
            assert_eq!(l.get(i, j), e);
        }
    }
}

#[test]
fn path_laplacian_middle_row() {
    let path = LaplacianMatrix::from_edges(&[(0, 1), (1, 2)], 3).unwrap();
    assert_eq!([path.get(1, 0), path.get(1, 1), path.get(1, 2)], [-0.5, 1.0, -0.5]);
    assert_eq!([path.get(0, 0), path.get(0, 1), path.get(0, 2)], [1.0, -1.0, 0.0]);
}

#[test]
fn laplacian_kills_constants() {
    let (_, garments) = toy();
    for g in &garments {
        let l = build_laplacian(g).unwrap();
        for i in 0..l.size() {
            let sum: f64 = l.row(i).iter().map(|(_, w)| w).sum();
            assert!(sum.abs() < 1e-9);
            assert_eq!(l.get(i, i), 1.0);
        }
        let field = vec![[0.3, -1.2, 5.0]; g.num_vertices()];
        assert!(l.apply(&field).iter().all(|v| geom::norm(*v) < 1e-9));
    }
}

#[test]
fn isolated_vertex_is_rejected() {
    assert!(laplacian_from_faces(&[[0, 1, 2]], 4).is_err());
}

#[test]
fn collinear_ring_has_zero_second_differences() {
    // The closing edge of a ring breaks collinearity, so only interior
    // stencils vanish.
    let verts: Vec<Vec3> = (0..5).map(|i| [i as f64, 2.0 * i as f64, 0.0]).collect();
    let d = ring_second_differences(&[0, 1, 2, 3, 4], &verts).unwrap();
    for v in &d[1..4] {
        assert!(geom::norm(*v) < 1e-12);
    }
}

#[test]
fn regular_polygon_has_equal_second_differences() {
    let n = 9;
    let verts: Vec<Vec3> = (0..n)
        .map(|i| {
            let a = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
            [libm::cos(a), libm::sin(a), 0.5]
        })
        .collect();
    let ring: Vec<usize> = (0..n).collect();
    let d = ring_second_differences(&ring, &verts).unwrap();
    let n0 = geom::norm(d[0]);
    assert!(d.iter().all(|v| (geom::norm(*v) - n0).abs() < 1e-12));
}

#[test]
fn short_ring_is_rejected() {
    let verts = vec![[0.0; 3]; 2];
    assert!(ring_second_differences(&[0, 1], &verts).is_err());
}

proptest! {
    #[test]
    fn second_differences_match_loop(coords in proptest::collection::vec(-10.0f64..10.0, 9..60)) {
        let r = coords.len() / 3;
        let verts: Vec<Vec3> = (0..r).map(|i| [coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]]).collect();
        let ring: Vec<usize> = (0..r).rev().collect();
        let d = ring_second_differences(&ring, &verts).unwrap();
        for i in 0..r {
            let prev = if i == 0 { ring[r - 1] } else { ring[i - 1] };
            let next = if i + 1 == r { ring[0] } else { ring[i + 1] };
            for k in 0..3 {
                let e = verts[prev][k] - 2.0 * verts[ring[i]][k] + verts[next][k];
                prop_assert!((d[i][k] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn second_differences_commute_with_affine_maps(
        coords in proptest::collection::vec(-5.0f64..5.0, 12..45),
        m in proptest::collection::vec(-2.0f64..2.0, 9),
        t in proptest::collection::vec(-3.0f64..3.0, 3),
    ) {
        let r = coords.len() / 3;
        let verts: Vec<Vec3> = (0..r).map(|i| [coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]]).collect();
        let a = [[m[0], m[1], m[2]], [m[3], m[4], m[5]], [m[6], m[7], m[8]]];
        let mapped: Vec<Vec3> = verts.iter().map(|v| geom::add(geom::mat_vec(&a, *v), [t[0], t[1], t[2]])).collect();
        let ring: Vec<usize> = (0..r).collect();
        let d0 = ring_second_differences(&ring, &verts).unwrap();
        let d1 = ring_second_differences(&ring, &mapped).unwrap();
        for (x, y) in d0.iter().zip(&d1) {
            prop_assert!(close(geom::mat_vec(&a, *x), *y, 1e-9));
        }
    }

    #[test]
    fn rigid_motion_of_root_is_equivariant(r in proptest::collection::vec(-2.0f64..2.0, 3), t in proptest::collection::vec(-1.0f64..1.0, 3)) {
        let (model, garments) = toy();
        let g = &garments[1];
        let mut p = PoseParams::a_pose(&model, g.class, [0.0; 3]);
        p.theta[0] = [0.0; 3];
        p.theta[1] = [0.1, 0.0, 0.2];
        let base = pose_garment(&model, g, &p).unwrap();
        let rv = [r[0], r[1], r[2]];
        p.theta[0] = rv;
        p.trans = [t[0], t[1], t[2]];
        let moved = pose_garment(&model, g, &p).unwrap();
        let rot = geom::rodrigues(rv);
        let j0 = compute_joints(&model, &p.beta).unwrap()[0];
        for (a, b) in base.iter().zip(&moved) {
            let e = geom::add(geom::add(geom::mat_vec(&rot, geom::sub(*a, j0)), j0), p.trans);
            prop_assert!(close(e, *b, 1e-9));
        }
    }
}

#[test]
fn skin_row_summing_to_half_names_skin_weights() {
    let (mut model, _) = toy();
    let j = model.num_joints();
    let mut w = model.skin_weights.clone();
    for k in 0..j {
        w[(5, k)] = if k == 0 { 0.5 } else { 0.0 };
    }
    model.skin_weights = w;
    match model.validate() {
        Err(Error::Invariant { field, .. }) => assert_eq!(field, "skin_weights"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn cyclic_tree_is_rejected() {
    let (mut model, _) = toy();
    model.kinematic_tree[0] = Some(3);
    model.kinematic_tree[5] = None;
    match model.validate() {
        Err(Error::Invariant { field, .. }) => assert_eq!(field, "kinematic_tree"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn non_spd_covariance_is_rejected() {
    let (mut model, _) = toy();
    model.shape_covariance = crate::linalg::Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
    match model.validate() {
        Err(Error::Invariant { field, .. }) => assert_eq!(field, "shape_covariance"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn overlapping_uv_is_rejected() {
    let (model, garments) = toy();
    let mut g = garments[0].clone();
    let k = g.islands.iter().position(|i| *i == Island::Front).unwrap();
    let other = g.islands.iter().rposition(|i| *i == Island::Front).unwrap();
    g.uv_coords[other] = g.uv_coords[k];
    assert!(matches!(g.validate(&model), Err(Error::UvOverlap { island: "front", .. })));
}

#[test]
fn top_ring_must_lie_on_rings() {
    let (model, garments) = toy();
    let mut g = garments[1].clone();
    let interior = (0..g.num_vertices()).find(|v| !g.boundary_rings.iter().flatten().any(|r| r == v)).unwrap();
    g.top_ring.push(interior);
    match g.validate(&model) {
        Err(Error::Invariant { field, .. }) => assert_eq!(field, "top_ring"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn boundary_cycles_of_a_quad() {
    let cycles = boundary_cycles(&[[0, 1, 2], [0, 2, 3]]).unwrap();
    assert_eq!(cycles, vec![vec![0, 1, 2, 3]]);
}
