use garmfit::image_io::*;
use garmfit_core::imagery::{BinaryMask, Image};
use garmfit_core::surfmap::TextureAtlas;

#[test]
fn quantize_examples() {
    assert_eq!(quantize(0.0), 0);
    assert_eq!(quantize(1.0), 255);
    assert_eq!(quantize(0.5), 128);
    assert_eq!(quantize(-3.0), 0);
    assert_eq!(quantize(7.0), 255);
}

#[test]
fn eight_bit_images_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let data: Vec<f64> = (0..4 * 3 * 3).map(|k| (k * 7 % 256) as f64 / 255.0).collect();
    let img = Image::from_vec(4, 3, 3, data).unwrap();
    let p = dir.path().join("i.png");
    write_image(&p, &img).unwrap();
    assert_eq!(read_image(&p).unwrap(), img);
    let gray = Image::from_vec(2, 2, 1, vec![0.0, 1.0, 20.0 / 255.0, 1.0]).unwrap();
    write_image(&p, &gray).unwrap();
    assert_eq!(read_image(&p).unwrap(), gray);
}

#[test]
fn alpha_is_composited_over_white() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.png");
    let img = image::RgbaImage::from_raw(2, 1, vec![0, 0, 0, 0, 0, 0, 0, 255]).unwrap();
    img.save(&p).unwrap();
    let back = read_image(&p).unwrap();
    assert_eq!(back.channels(), 3);
    assert_eq!(back.pixel(0, 0), &[1.0, 1.0, 1.0]);
    assert_eq!(back.pixel(1, 0), &[0.0, 0.0, 0.0]);
}

#[test]
fn masks_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = BinaryMask::from_fn(5, 4, |x, y| (x + y) % 3 == 0);
    let p = dir.path().join("m.png");
    write_mask(&p, &m).unwrap();
    assert_eq!(read_mask(&p).unwrap(), m);
}

#[test]
fn atlas_writes_colour_and_validity() {
    let dir = tempfile::tempdir().unwrap();
    let colors = vec![[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.2, 0.4, 0.6], [0.0; 3]];
    let a = TextureAtlas::new(2, 2, colors, vec![true, false, true, false]).unwrap();
    let p = dir.path().join("atlas.png");
    write_atlas(&p, &a).unwrap();
    assert!(dir.path().join("atlas_valid.png").is_file());
    let back = read_atlas(&p).unwrap();
    assert_eq!(back.valid(), a.valid());
    for (x, y) in back.colors().iter().zip(a.colors()) {
        for c in 0..3 {
            assert!((x[c] - y[c]).abs() <= 0.5 / 255.0);
        }
    }
    std::fs::remove_file(dir.path().join("atlas_valid.png")).unwrap();
    let e = read_atlas(&p).unwrap_err();
    assert!(e.to_string().contains("atlas_valid.png"), "{e}");
}

#[test]
fn garbage_is_a_format_error_naming_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.png");
    std::fs::write(&p, b"not a png").unwrap();
    let e = read_image(&p).unwrap_err();
    assert!(e.to_string().contains("bad.png"));
    assert_eq!(e.exit_code(), 1);
}
