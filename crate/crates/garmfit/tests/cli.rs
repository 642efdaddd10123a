use std::path::Path;
use std::process::{Command, Output};

use garmfit::eval::EvalReport;

fn garmfit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_garmfit")).current_dir(dir).args(args).env_remove("GARMFIT_THREADS").output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let o = garmfit(dir, args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty(), "{args:?} wrote to stdout");
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_subcommand_and_flag_print_usage_and_exit_1() {
    let d = tempfile::tempdir().unwrap();
    for args in [&["frobnicate"][..], &["fit", "x.png", "--frobnicate"], &[]] {
        let o = garmfit(d.path(), args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains("Usage"), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(garmfit(d.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn fit_on_a_missing_image_names_the_path() {
    let d = tempfile::tempdir().unwrap();
    let o = garmfit(d.path(), &["fit", "missing.png"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.png"), "{}", stderr(&o));
}

#[test]
fn bad_values_are_input_errors() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(garmfit(d.path(), &["fit", "x.png", "--class", "hat"]).status.code(), Some(1));
    assert_eq!(garmfit(d.path(), &["fit", "x.png", "--view", "side"]).status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_garmfit")).current_dir(d.path()).args(["synth", "--n", "1"]).env("GARMFIT_THREADS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("job count"));
}

#[test]
fn internal_failures_map_to_exit_2() {
    let e = garmfit::Error::Core(garmfit_core::Error::Singular("x".into()));
    assert_eq!(e.exit_code(), 2);
    assert_eq!(garmfit::Error::Internal("x".into()).exit_code(), 2);
    assert_eq!(garmfit::Error::Config("x".into()).exit_code(), 1);
}

#[test]
fn synth_with_no_cases_writes_an_empty_manifest() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--n", "0", "--out", "s"]);
    let m = garmfit::suite::read_manifest(&d.path().join("s")).unwrap();
    assert!(m.cases.is_empty());
}

#[test]
fn pipeline_at_zero_perturbation_recovers_the_silhouette() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--n", "3", "--seed", "0", "--perturbation", "0", "--out", "s"]);
    ok(d.path(), &["pipeline", "s", "--out", "p", "--jobs", "3"]);
    ok(d.path(), &["eval", "s", "--pred", "p"]);
    let report: EvalReport = serde_json::from_slice(&std::fs::read(d.path().join("p/eval.json")).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 3);
    for r in &report.rows {
        assert!(r.error.is_none(), "{:?}", r.error);
        assert!(r.iou.unwrap() >= 0.995, "seed {} IoU {:?}", r.seed, r.iou);
        assert_eq!(r.traces_non_increasing, Some(true));
    }
}

#[test]
fn single_image_commands_write_their_files() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--n", "1", "--seed", "6", "--width", "128", "--height", "128", "--atlas-size", "64", "--out", "s"]);
    let img = "s/case_6/image.png";
    ok(d.path(), &["segment", img, "--out", "a"]);
    ok(d.path(), &["fit", img, "--mask", "a/mask.png", "--class", "tshirt", "--out", "a"]);
    ok(d.path(), &["bake", img, "a/fit.json", "--atlas-size", "64", "--out", "a"]);
    ok(d.path(), &["warp", img, "--class", "tshirt", "--atlas-size", "64", "--out", "a"]);
    ok(d.path(), &["render", "a/fit.json", "--pose", "1=0,0,0.3", "--shape", "1,0", "--out", "a"]);
    ok(d.path(), &["pipeline", img, "--class", "tshirt", "--flip", "--out", "b"]);
    for f in ["mask.png", "fit.json", "mesh.obj", "log.json", "atlas.png", "atlas_valid.png", "corr.p2sc", "baseline_atlas.png", "baseline_corr.p2sc", "warped.png", "render.png"] {
        assert!(d.path().join("a").join(f).is_file(), "{f}");
    }
    let fit = garmfit::pipeline::read_fit(&d.path().join("b/fit.json")).unwrap();
    assert!(fit.flipped);
    let o = garmfit(d.path(), &["render", "a/fit.json", "--pose", "99=0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("joint 99"));
    assert_eq!(garmfit(d.path(), &["render", "a/fit.json", "--shape", "1"]).status.code(), Some(1));
}

#[test]
fn ten_case_suite_then_eval_is_pure() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--n", "10", "--seed", "7", "--out", "s"]);
    ok(d.path(), &["pipeline", "s", "--out", "p", "--jobs", "4"]);
    ok(d.path(), &["eval", "s", "--pred", "p"]);
    let read = || -> (EvalReport, Vec<u8>) {
        let r = serde_json::from_slice(&std::fs::read(d.path().join("p/eval.json")).unwrap()).unwrap();
        (r, std::fs::read(d.path().join("p/eval.txt")).unwrap())
    };
    let (first, text) = read();
    assert_eq!(first.rows.len(), 10);
    assert!(first.rows.iter().all(|r| r.error.is_none()));
    let header = String::from_utf8(text.clone()).unwrap();
    assert!(header.lines().next().unwrap().contains("photo_err"));
    ok(d.path(), &["eval", "s", "--pred", "p"]);
    let (second, text2) = read();
    assert_eq!(first.rows, second.rows);
    assert_eq!(text, text2);
    ok(d.path(), &["export-dataset", "s", "--fits", "p", "--out", "ds"]);
    let (m, cases) = garmfit::dataset::read_dataset(&d.path().join("ds")).unwrap();
    assert_eq!((m.cases.len(), cases.len()), (10, 10));
}
