use std::collections::BTreeSet;
use std::path::Path;

use garmfit::dataset::{export_dataset, read_dataset, DatasetCase, MANIFEST};
use garmfit::model_io::toy_model;
use garmfit::suite::{read_case, read_manifest, write_suite};
use garmfit_core::surfmap::coordinate_mask;
use garmfit_core::synth::{generate_suite, SynthConfig};

fn small() -> SynthConfig {
    SynthConfig { width: 96, height: 96, atlas_size: 32, ..SynthConfig::default() }
}

fn files_under(dir: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out
}

#[test]
fn empty_suite_has_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_suite(dir.path(), &[], &small()).unwrap();
    assert!(m.cases.is_empty());
    assert_eq!(read_manifest(dir.path()).unwrap(), m);
}

#[test]
fn suite_round_trips_and_lists_its_files() {
    let (model, garments) = toy_model().unwrap();
    let cfg = small();
    let cases = generate_suite(&model, &garments, &[4, 5, 4], &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = write_suite(dir.path(), &cases, &cfg).unwrap();
    assert_eq!(m.cases.len(), 3);
    assert_eq!(m.cases[0], m.cases[2]);
    let mut listed: BTreeSet<String> = m.cases.iter().flat_map(|c| c.files.iter().cloned()).collect();
    listed.insert("manifest.json".into());
    assert_eq!(listed, files_under(dir.path()));
    let back = read_case(&dir.path().join("case_5")).unwrap();
    // PNG stores 8 bits per sample.
    assert!(back.image.data().iter().zip(cases[1].image.data()).all(|(a, b)| (a - b).abs() <= 0.5 / 255.0 + 1e-12));
    assert_eq!(back.mask, cases[1].mask);
    assert_eq!(back.gt.params, cases[1].params);
    assert_eq!(back.atlas.valid(), cases[1].atlas.valid());
    assert_eq!(back.correspondence.valid_mask(), cases[1].correspondence.valid_mask());
}

#[test]
fn dataset_export_round_trips_bit_exactly() {
    let (model, garments) = toy_model().unwrap();
    let cases = generate_suite(&model, &garments, &[1, 2], &small()).unwrap();
    let items: Vec<DatasetCase> = cases
        .iter()
        .map(|c| DatasetCase { name: format!("case_{}", c.seed), x: coordinate_mask(&c.mask), y: c.atlas.clone(), c: c.correspondence.clone() })
        .collect();
    let a = tempfile::tempdir().unwrap();
    let m = export_dataset(a.path(), &items).unwrap();
    let mut listed: BTreeSet<String> = m.files.iter().cloned().collect();
    listed.insert(MANIFEST.into());
    assert_eq!(listed, files_under(a.path()));
    let (m2, back) = read_dataset(a.path()).unwrap();
    assert_eq!(m2, m);
    let b = tempfile::tempdir().unwrap();
    export_dataset(b.path(), &back).unwrap();
    for f in &listed {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let (_, again) = read_dataset(b.path()).unwrap();
    assert_eq!(again, back);
}

#[test]
fn empty_dataset_is_a_valid_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = export_dataset(&dir.path().join("ds"), &[]).unwrap();
    assert!(m.cases.is_empty() && m.files.is_empty());
    let (m2, cases) = read_dataset(&dir.path().join("ds")).unwrap();
    assert_eq!(m2, m);
    assert!(cases.is_empty());
}
