use std::path::Path;

use garmfit::model_io::{load_model, parse_model, save_model, toy_model, ModelFile, TOY_MODEL_JSON};
use garmfit::Error;
use garmfit_core::model::toy;

#[test]
fn bundled_asset_matches_the_builder() {
    let (m, g) = toy::build().unwrap();
    let (lm, lg) = toy_model().unwrap();
    assert_eq!(lm, m);
    assert_eq!(lg, g);
}

#[test]
fn save_then_load_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let (m, g) = toy_model().unwrap();
    save_model(&path, &m, &g).unwrap();
    let (m2, g2) = load_model(&path).unwrap();
    assert_eq!((m2, g2), (m, g));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), TOY_MODEL_JSON);
}

#[test]
fn schema_has_the_documented_keys() {
    let v: serde_json::Value = serde_json::from_str(TOY_MODEL_JSON).unwrap();
    for k in ["vertices", "faces", "shape_dirs", "joint_regressor", "kinematic_tree", "skin_weights", "shape_covariance", "a_pose"] {
        assert!(v["body"].get(k).is_some(), "body.{k}");
    }
    for k in ["class", "vertex_ids", "displacements", "faces", "uv", "islands", "boundary_rings", "top_ring"] {
        assert!(v["garments"][0].get(k).is_some(), "garments[0].{k}");
    }
    assert_eq!(v["body"]["kinematic_tree"][0], -1);
}

#[test]
fn skin_weight_row_summing_to_half_names_the_field() {
    let mut file: ModelFile = serde_json::from_str(TOY_MODEL_JSON).unwrap();
    let row = &mut file.body.skin_weights[7];
    let s: f64 = row.iter().sum();
    for w in row.iter_mut() {
        *w *= 0.5 / s;
    }
    let text = serde_json::to_string(&file).unwrap();
    let e = parse_model(&text, Path::new("m.json")).unwrap_err();
    assert!(e.to_string().contains("skin_weights"), "{e}");
    assert_eq!(e.exit_code(), 1);
}

#[test]
fn empty_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, "").unwrap();
    let e = load_model(&path).unwrap_err();
    assert!(matches!(e, Error::Parse { .. }), "{e:?}");
    assert!(e.to_string().contains("empty.json"));
}

#[test]
fn missing_file_names_the_path() {
    let e = load_model(Path::new("/nonexistent/model.json")).unwrap_err();
    assert!(matches!(e, Error::Io { .. }));
    assert!(e.to_string().contains("/nonexistent/model.json"));
}

#[test]
fn ragged_matrix_is_rejected() {
    let mut file: ModelFile = serde_json::from_str(TOY_MODEL_JSON).unwrap();
    file.body.joint_regressor[1].pop();
    let e = parse_model(&serde_json::to_string(&file).unwrap(), Path::new("m.json")).unwrap_err();
    assert!(e.to_string().contains("joint_regressor"), "{e}");
}
