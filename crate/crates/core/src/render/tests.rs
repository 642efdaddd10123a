use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::model::{toy, GarmentClass, GarmentTemplate, Island};

fn cam(w: usize, h: usize) -> Camera {
    Camera::for_image(w, h)
}

/// Vertices at depth `z` whose projections are the given pixel positions.
fn lift(c: &Camera, pts: &[[f64; 2]], z: f64) -> Vec<Vec3> {
    pts.iter().map(|p| [(p[0] - c.cx) * z / c.focal, (p[1] - c.cy) * z / c.focal, z]).collect()
}

fn inside_oracle(t: [[f64; 2]; 3], p: [f64; 2]) -> Option<bool> {
    let s = |a: [f64; 2], b: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let e = [s(t[0], t[1]), s(t[1], t[2]), s(t[2], t[0])];
    if e.iter().any(|v| v.abs() < 1e-9) {
        return None;
    }
    Some(e.iter().all(|v| *v > 0.0) || e.iter().all(|v| *v < 0.0))
}

#[test]
fn projection_examples() {
    let c = cam(100, 80);
    let out = project(&c, &[[0.0, 0.0, 3.0], [2.0, 0.0, 2.0 * c.focal], [1.0, 1.0, 0.0], [1.0, 1.0, -2.0]]);
    assert_eq!(out[0], ([50.0, 40.0], true));
    assert!((out[1].0[0] - 51.0).abs() < 1e-12);
    assert!(!out[2].1 && !out[3].1);
}

#[test]
fn empty_faces_rejected() {
    let c = cam(8, 8);
    assert!(matches!(rasterize_silhouette(&c, &[[0.0, 0.0, 1.0]], &[]), Err(Error::Empty(_))));
    let behind = vec![[0.0, 0.0, -1.0], [1.0, 0.0, -1.0], [0.0, 1.0, -1.0]];
    assert!(matches!(rasterize_silhouette(&c, &behind, &[[0, 1, 2]]), Err(Error::Rasterization(_))));
}

#[test]
fn right_triangle_matches_oracle() {
    let c = cam(32, 32);
    let t = [[3.2, 4.1], [27.7, 4.1], [3.2, 25.3]];
    let v = lift(&c, &t, 2.0);
    let r = rasterize_silhouette(&c, &v, &[[0, 1, 2]]).unwrap();
    for y in 0..32 {
        for x in 0..32 {
            let p = [x as f64 + 0.5, y as f64 + 0.5];
            let expect = inside_oracle(t, p).unwrap();
            assert_eq!(r.mask.get(x, y), expect, "({x},{y})");
        }
    }
}

#[test]
fn stacked_triangles_keep_min_depth() {
    let c = cam(20, 20);
    let t = [[1.0, 1.0], [19.0, 1.0], [1.0, 19.0]];
    let mut v = lift(&c, &t, 3.0);
    v.extend(lift(&c, &t, 2.0));
    for faces in [[[0, 1, 2], [3, 4, 5]], [[3, 4, 5], [0, 1, 2]]] {
        let r = rasterize_silhouette(&c, &v, &faces).unwrap();
        for (k, covered) in r.mask.data().iter().enumerate() {
            if *covered {
                assert!((r.depth[k] - 2.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn shared_edge_covers_each_sample_once() {
    let c = cam(16, 16);
    // A quad split along a diagonal passing exactly through sample centres.
    let pts = [[2.5, 2.5], [13.5, 2.5], [13.5, 13.5], [2.5, 13.5]];
    let v = lift(&c, &pts, 1.0);
    let mut hits = vec![0u32; 256];
    for f in [[0usize, 1, 2], [0, 2, 3]] {
        let r = rasterize_silhouette(&c, &v, &[f]).unwrap();
        for (k, b) in r.mask.data().iter().enumerate() {
            hits[k] += u32::from(*b);
        }
    }
    assert!(hits.iter().all(|h| *h <= 1));
    assert_eq!(hits.iter().sum::<u32>(), 11 * 11);
}

#[test]
fn iou_examples() {
    let a = BinaryMask::from_fn(4, 4, |x, y| x < 2 && y < 2);
    let b = BinaryMask::from_fn(4, 4, |x, y| (1..3).contains(&x) && y < 2);
    let far = BinaryMask::from_fn(4, 4, |x, y| x >= 3 && y >= 3);
    assert_eq!(compute_iou(&a, &a).unwrap(), 1.0);
    assert_eq!(compute_iou(&a, &far).unwrap(), 0.0);
    assert!((compute_iou(&a, &b).unwrap() - 2.0 / 6.0).abs() < 1e-15);
    assert_eq!(compute_iou(&BinaryMask::new(3, 3), &BinaryMask::new(3, 3)).unwrap(), 1.0);
    assert!(compute_iou(&a, &BinaryMask::new(3, 3)).is_err());
}

fn single_triangle_template(uv: [[f64; 2]; 3]) -> GarmentTemplate {
    GarmentTemplate {
        class: GarmentClass::TShirt,
        body_vertex_ids: vec![0, 1, 2, 3, 4, 5],
        displacements: vec![[0.0; 3]; 6],
        faces: vec![[0, 1, 2], [3, 4, 5]],
        uv_coords: vec![uv, [[0.9, 0.9], [0.95, 0.9], [0.9, 0.95]]],
        islands: vec![Island::Front, Island::Back],
        boundary_rings: vec![],
        top_ring: vec![],
    }
}

#[test]
fn atlas_triangle_matches_oracle() {
    let uv = [[0.05, 0.1], [0.7, 0.2], [0.3, 0.8]];
    let t = single_triangle_template(uv);
    let a = rasterize_uv_atlas(&t, 40, 50).unwrap();
    for k in 0..40 {
        for l in 0..50 {
            let p = [(l as f64 + 0.5) / 50.0, (k as f64 + 0.5) / 40.0];
            if let Some(inside) = inside_oracle(uv, p) {
                let got = a.texel(k, l).map(|(f, _)| f == 0).unwrap_or(false);
                assert_eq!(got, inside);
            }
            if let Some((_, b)) = a.texel(k, l) {
                assert!(b.iter().all(|x| *x >= 0.0));
                assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn toy_atlas_gap_between_islands_is_invalid() {
    let (_, garments) = toy::build().unwrap();
    for g in &garments {
        let a = rasterize_uv_atlas(g, 256, 256).unwrap();
        for k in 0..256 {
            assert!(!a.is_valid(k, 128) && !a.is_valid(k, 127));
        }
        // Covered texels approach the UV area within a perimeter band.
        let area: f64 = g
            .uv_coords
            .iter()
            .map(|t| 0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs())
            .sum::<f64>()
            * 256.0
            * 256.0;
        let got = a.valid_count() as f64;
        assert!((got - area).abs() < 0.02 * area, "{got} vs {area}");
    }
}

#[test]
fn overlapping_uv_in_one_island_is_an_error() {
    let mut t = single_triangle_template([[0.1, 0.1], [0.6, 0.1], [0.1, 0.6]]);
    t.uv_coords[1] = [[0.2, 0.2], [0.5, 0.2], [0.2, 0.5]];
    t.islands[1] = Island::Front;
    assert!(matches!(rasterize_uv_atlas(&t, 32, 32), Err(Error::UvOverlap { .. })));
}

proptest! {
    #[test]
    fn integer_translation_shifts_mask(dx in -5i64..5, dy in -5i64..5, seed in proptest::collection::vec(4.0f64..28.0, 6)) {
        let c = cam(40, 40);
        let t = [[seed[0], seed[1]], [seed[2], seed[3]], [seed[4], seed[5]]];
        let v = lift(&c, &t, 2.0);
        let shifted: Vec<[f64; 2]> = t.iter().map(|p| [p[0] + dx as f64, p[1] + dy as f64]).collect();
        let v2 = lift(&c, &shifted, 2.0);
        if let (Ok(a), Ok(b)) = (rasterize_silhouette(&c, &v, &[[0, 1, 2]]), rasterize_silhouette(&c, &v2, &[[0, 1, 2]])) {
            // Re-projection rounding can move samples lying on an edge, so
            // compare pixels away from the triangle's boundary.
            for y in 0..40i64 {
                for x in 0..40i64 {
                    let p = [x as f64 + 0.5, y as f64 + 0.5];
                    if let Some(_) = inside_oracle(t, p) {
                        let near = {
                            let s = |a: [f64; 2], b: [f64; 2]| {
                                let l = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt().max(1e-12);
                                ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])).abs() / l
                            };
                            s(t[0], t[1]).min(s(t[1], t[2])).min(s(t[2], t[0])) < 1e-6
                        };
                        let (u, w) = (x + dx, y + dy);
                        if !near && (0..40).contains(&u) && (0..40).contains(&w) {
                            prop_assert_eq!(a.mask.get(x as usize, y as usize), b.mask.get(u as usize, w as usize));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn face_order_does_not_matter(rot in 0usize..8) {
        let (model, garments) = toy::build().unwrap();
        let g = &garments[0];
        let p = crate::model::PoseParams::a_pose(&model, g.class, [0.0, -0.2, 3.0]);
        let verts = crate::model::pose_garment(&model, g, &p).unwrap();
        let c = cam(96, 96);
        let a = rasterize_silhouette(&c, &verts, &g.faces).unwrap();
        let mut faces = g.faces.clone();
        let n = faces.len();
        faces.rotate_left(rot * 37 % n);
        faces.reverse();
        let b = rasterize_silhouette(&c, &verts, &faces).unwrap();
        prop_assert_eq!(&a.mask, &b.mask);
        prop_assert_eq!(&a.depth, &b.depth);
    }
}
