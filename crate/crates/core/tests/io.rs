use ffl_core::forward::{SignalRecord, SignalSample};
use ffl_core::grid::{make_grid, Grid2D, Image2D, Volume3D};
use ffl_core::io::{
    decode_image, decode_signal, decode_volume, encode_image, encode_signal, encode_volume, read_volume, values_to_csv,
    write_volume,
};
use ffl_core::{Error, Vec3};
use proptest::prelude::*;

fn sample_volume() -> Volume3D<f64> {
    let grid = make_grid([[-1.0, 1.0], [0.0, 3.0], [-0.5, 2.5]], [2, 3, 4]).unwrap();
    Volume3D::from_fn(grid, |x, y, z| x + 10.0 * y - z * z)
}

#[test]
fn volume_round_trip_through_a_file() {
    let vol = sample_volume();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.fflv");
    write_volume(&path, &vol).unwrap();
    let back = read_volume(&path).unwrap();
    assert!(back.grid.same_as(&vol.grid));
    assert_eq!(back.values, vol.values);
}

#[test]
fn payload_is_little_endian_after_the_header() {
    let bytes = encode_volume(&sample_volume());
    let split = bytes.windows(2).position(|w| w == b"\n\n").unwrap() + 2;
    assert_eq!(bytes.len() - split, 2 * 3 * 4 * 8);
    assert!(bytes.starts_with(b"FFLV1\n"));
    let first = f64::from_le_bytes(bytes[split..split + 8].try_into().unwrap());
    assert_eq!(first, sample_volume().values[0]);
}

#[test]
fn truncated_and_foreign_files_are_rejected() {
    let bytes = encode_volume(&sample_volume());
    match decode_volume(&bytes[..bytes.len() - 3], "cut") {
        Err(Error::Truncated { expected, actual, .. }) => assert_eq!(expected, actual + 3),
        other => panic!("{other:?}"),
    }
    let mut extra = bytes.clone();
    extra.extend_from_slice(&[0; 8]);
    assert!(matches!(decode_volume(&extra, "long"), Err(Error::Header { .. })));
    assert!(matches!(decode_volume(b"PNG...", "x"), Err(Error::BadMagic { .. })));
    let img = encode_image(&Image2D::zeros(Grid2D::square(1.0, 2).unwrap()));
    assert!(matches!(decode_volume(&img, "img"), Err(Error::BadMagic { .. })));
    let text = String::from_utf8_lossy(&bytes).replace("dims=", "dimz=");
    let err = decode_volume(text.as_bytes(), "mangled").unwrap_err();
    assert!(err.to_string().contains("mangled"));
}

proptest! {
    #[test]
    fn image_round_trip(nu in 1usize..6, nv in 1usize..6, lo in -5.0f64..0.0, seed in any::<u64>()) {
        let grid = Grid2D::new(
            ffl_core::grid::Axis::new(lo, lo + 1.5, nu).unwrap(),
            ffl_core::grid::Axis::new(-1.0, 2.0, nv).unwrap(),
        );
        let img = Image2D::from_fn(grid, |u, v| (seed as f64).sin() * u - v / 3.0);
        let back = decode_image(&encode_image(&img), "p").unwrap();
        prop_assert!(back.grid.same_as(&img.grid));
        prop_assert_eq!(back.values, img.values);
    }

    #[test]
    fn signal_round_trip(theta in 0.0f64..3.1, idx in 0usize..300, vals in prop::collection::vec(-1e3f64..1e3, 0..40)) {
        let rec = SignalRecord {
            theta,
            angle_index: idx,
            samples: vals
                .iter()
                .enumerate()
                .map(|(i, &x)| SignalSample { t: i as f64 * 0.01, s: Vec3::new(x, -x, x * 0.5) })
                .collect(),
        };
        let back = decode_signal(&encode_signal(&rec), "s").unwrap();
        prop_assert_eq!(back, rec);
    }
}

#[test]
fn csv_has_one_value_per_line() {
    let csv = values_to_csv(&[1.0, -0.5, 2e-9]);
    let lines: Vec<f64> = csv.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(lines, vec![1.0, -0.5, 2e-9]);
}
