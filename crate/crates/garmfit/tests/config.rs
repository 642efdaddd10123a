use std::path::{Path, PathBuf};

use garmfit::config::{Overrides, PipelineConfig};
use garmfit::Error;
use garmfit_core::fitting::{FitConfig, View};
use garmfit_core::model::GarmentClass;

fn write(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn defaults_without_file_or_flags() {
    let c = PipelineConfig::resolve(None, &Overrides::default(), None).unwrap();
    assert_eq!(c, PipelineConfig::default());
    assert_eq!(c.jobs, 1);
    assert_eq!(c.atlas_size, 256);
}

#[test]
fn flag_beats_config_beats_default() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), r#"{"class": "pants", "jobs": 3, "atlas_size": 64}"#);
    let c = PipelineConfig::resolve(Some(&p), &Overrides::default(), None).unwrap();
    assert_eq!((c.class, c.jobs, c.atlas_size, c.seed), (GarmentClass::Pants, 3, 64, 0));
    let flags = Overrides { jobs: Some(5), class: Some(GarmentClass::Shorts), ..Overrides::default() };
    let c = PipelineConfig::resolve(Some(&p), &flags, None).unwrap();
    assert_eq!((c.class, c.jobs, c.atlas_size), (GarmentClass::Shorts, 5, 64));
}

#[test]
fn thread_variable_overrides_the_job_count() {
    let flags = Overrides { jobs: Some(5), ..Overrides::default() };
    assert_eq!(PipelineConfig::resolve(None, &flags, Some("2")).unwrap().jobs, 2);
    assert!(matches!(PipelineConfig::resolve(None, &flags, Some("many")), Err(Error::Config(_))));
    assert!(PipelineConfig::resolve(None, &flags, Some("0")).is_err());
}

#[test]
fn zero_jobs_and_missing_model_are_rejected() {
    let flags = Overrides { jobs: Some(0), ..Overrides::default() };
    assert!(PipelineConfig::resolve(None, &flags, None).is_err());
    let flags = Overrides { model: Some("/nonexistent/model.json".into()), ..Overrides::default() };
    let e = PipelineConfig::resolve(None, &flags, None).unwrap_err();
    assert!(e.to_string().contains("/nonexistent/model.json"));
}

#[test]
fn unknown_keys_and_bad_json_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), r#"{"jobz": 2}"#);
    assert!(matches!(PipelineConfig::resolve(Some(&p), &Overrides::default(), None), Err(Error::Parse { .. })));
    let p = write(dir.path(), "{");
    assert!(matches!(PipelineConfig::resolve(Some(&p), &Overrides::default(), None), Err(Error::Parse { .. })));
}

#[test]
fn nested_settings_fill_in_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), r#"{"seg": {"threshold": 0.9}, "fit": {"stage2_max_iters": 17}}"#);
    let c = PipelineConfig::resolve(Some(&p), &Overrides::default(), None).unwrap();
    assert_eq!(c.seg.threshold, 0.9);
    assert_eq!(c.seg.close_radius, 3.0);
    let f = c.fit_config(GarmentClass::Pants);
    assert_eq!(f.stage2_max_iters, 17);
    assert_eq!(f.class, GarmentClass::Pants);
}

#[test]
fn class_defaults_follow_view() {
    let c = PipelineConfig { view: View::Back, ..PipelineConfig::default() };
    assert_eq!(c.fit_config(GarmentClass::TShirt), FitConfig::new(GarmentClass::TShirt, View::Back));
    assert_eq!(c.baseline_config(GarmentClass::TShirt).atlas_size, 256);
}

#[test]
fn camera_must_match_the_image() {
    let c = PipelineConfig::default();
    assert_eq!(c.camera_for(64, 32).unwrap().width, 64);
    let c = PipelineConfig { camera: Some(c.camera_for(64, 64).unwrap()), ..c };
    assert!(c.camera_for(64, 32).is_err());
}
