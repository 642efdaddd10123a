use std::path::Path;

use garmfit::formats::*;
use garmfit_core::imagery::BinaryMask;
use garmfit_core::surfmap::{coordinate_mask, CoordinateMask, CorrespondenceMap};
use proptest::prelude::*;

const P: &str = "<memory>";

#[test]
fn correspondence_layout_by_hand() {
    let mut c = CorrespondenceMap::invalid(1, 2);
    c.set(0, 1, Some([1.5, -2.0]));
    let b = encode_correspondence(&c);
    assert_eq!(&b[..4], b"P2SC");
    assert_eq!(&b[4..12], &[1, 0, 0, 0, 2, 0, 0, 0]);
    assert_eq!(b.len(), 12 + 2 * 8);
    assert!(f32::from_le_bytes(b[12..16].try_into().unwrap()).is_nan());
    assert!(f32::from_le_bytes(b[16..20].try_into().unwrap()).is_nan());
    assert_eq!(f32::from_le_bytes(b[20..24].try_into().unwrap()), 1.5);
    assert_eq!(f32::from_le_bytes(b[24..28].try_into().unwrap()), -2.0);
    let back = decode_correspondence(&b, Path::new(P)).unwrap();
    assert_eq!(back, c);
    assert!(!back.is_valid(0, 0));
}

#[test]
fn coordinate_mask_background_is_zero() {
    let m = BinaryMask::from_fn(3, 2, |x, y| x == 2 && y == 1);
    let b = encode_coordinate_mask(&coordinate_mask(&m));
    assert_eq!(&b[..4], b"P2CM");
    assert_eq!(&b[4..12], &[2, 0, 0, 0, 3, 0, 0, 0]);
    let x = decode_coordinate_mask(&b, Path::new(P)).unwrap();
    let nonzero: Vec<_> = x.data().iter().filter(|p| **p != [0.0, 0.0]).collect();
    assert_eq!(nonzero.len(), 1);
}

#[test]
fn bad_headers_and_lengths_are_rejected() {
    let c = encode_correspondence(&CorrespondenceMap::invalid(2, 2));
    assert!(decode_coordinate_mask(&c, Path::new(P)).is_err());
    assert!(decode_correspondence(&c[..c.len() - 1], Path::new(P)).is_err());
    assert!(decode_correspondence(b"P2S", Path::new(P)).is_err());
    let mut big = c.clone();
    big[4..8].copy_from_slice(&u32::MAX.to_le_bytes());
    let e = decode_correspondence(&big, Path::new("x.p2sc")).unwrap_err();
    assert!(e.to_string().contains("x.p2sc"));
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let x = CoordinateMask::from_vec(2, 2, vec![[0.0, 0.0], [0.25, 0.5], [1.0, 0.0], [0.5, 0.5]]).unwrap();
    write_coordinate_mask(&dir.path().join("a/x.p2cm"), &x).unwrap();
    assert_eq!(read_coordinate_mask(&dir.path().join("a/x.p2cm")).unwrap(), x);
    assert!(read_correspondence(&dir.path().join("missing.p2sc")).is_err());
}

#[test]
fn obj_has_positions_uvs_and_faces() {
    let (_, garments) = garmfit::model_io::toy_model().unwrap();
    let t = &garments[0];
    let verts: Vec<[f64; 3]> = (0..t.num_vertices()).map(|i| [i as f64, 0.0, 1.0]).collect();
    let s = obj_string(t, &verts);
    let count = |p: &str| s.lines().filter(|l| l.starts_with(p)).count();
    assert_eq!(count("v "), t.num_vertices());
    assert_eq!(count("vt "), 3 * t.faces.len());
    assert_eq!(count("f "), t.faces.len());
    let f0 = s.lines().find(|l| l.starts_with("f ")).unwrap();
    let [a, b, c] = t.faces[0];
    assert_eq!(f0, format!("f {}/1 {}/2 {}/3", a + 1, b + 1, c + 1));
    let vt0 = s.lines().find(|l| l.starts_with("vt ")).unwrap();
    let uv = t.uv_coords[0][0];
    assert_eq!(vt0, format!("vt {} {}", uv[0], 1.0 - uv[1]));
}

proptest! {
    #[test]
    fn correspondence_write_read_write_is_byte_identical(
        k in 1usize..12, l in 1usize..12,
        vals in prop::collection::vec(prop::option::of((-1e3f64..1e3, -1e3f64..1e3)), 144),
    ) {
        let coords = (0..k * l).map(|t| vals[t].map_or([f64::NAN; 2], |(a, b)| [a, b])).collect();
        let c = CorrespondenceMap::from_vec(k, l, coords).unwrap();
        let b = encode_correspondence(&c);
        let back = decode_correspondence(&b, Path::new(P)).unwrap();
        prop_assert_eq!(encode_correspondence(&back), b);
        for t in 0..k * l {
            match vals[t] {
                None => prop_assert!(!back.coords()[t][0].is_finite()),
                Some((a, bb)) => prop_assert_eq!(back.coords()[t], [a as f32 as f64, bb as f32 as f64]),
            }
        }
    }

    #[test]
    fn coordinate_mask_write_read_write_is_byte_identical(
        m in 1usize..12, n in 1usize..12,
        vals in prop::collection::vec((0f64..1.0, 0f64..1.0), 144),
    ) {
        let x = CoordinateMask::from_vec(m, n, vals[..m * n].iter().map(|&(a, b)| [a, b]).collect()).unwrap();
        let b = encode_coordinate_mask(&x);
        let back = decode_coordinate_mask(&b, Path::new(P)).unwrap();
        prop_assert_eq!(encode_coordinate_mask(&back), b);
    }
}
