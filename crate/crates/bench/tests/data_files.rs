use std::io::Write;

use clusterkrig_bench::{load_csv, synth_dataset, write_csv, BenchError, SynthFunction};

fn file_with(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let data = synth_dataset(SynthFunction::Schwefel, 50, 3, 4).unwrap();
    let f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    write_csv(f.path(), &data).unwrap();
    let back = load_csv(f.path(), "y").unwrap();
    assert_eq!(back.n(), 50);
    for (a, b) in back.x().as_slice().iter().zip(data.x().as_slice()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    for (a, b) in back.y().iter().zip(data.y()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn target_may_sit_in_any_column() {
    let f = file_with("t,a,b\n1,2,3\n4,5,6\n");
    let d = load_csv(f.path(), "t").unwrap();
    assert_eq!(d.y(), &[1.0, 4.0]);
    assert_eq!(d.x().row(1), &[5.0, 6.0]);
}

#[test]
fn bad_cell_names_row_and_column() {
    let f = file_with("a,b,y\n1,2,3\n4,oops,6\n");
    let err = load_csv(f.path(), "y").unwrap_err();
    match &err {
        BenchError::NonNumeric { row, column, value, .. } => {
            assert_eq!(*row, 2);
            assert_eq!(column, "b");
            assert_eq!(value, "oops");
        }
        other => panic!("unexpected {other:?}"),
    }
    let msg = err.to_string();
    assert!(msg.contains("row 2") && msg.contains("'b'"), "{msg}");
}

#[test]
fn non_finite_cells_are_rejected() {
    let f = file_with("a,y\n1,NaN\n");
    assert!(matches!(load_csv(f.path(), "y"), Err(BenchError::NonNumeric { row: 1, .. })));
    let f = file_with("a,y\ninf,1\n");
    assert!(matches!(load_csv(f.path(), "y"), Err(BenchError::NonNumeric { row: 1, .. })));
}

#[test]
fn missing_target_lists_columns() {
    let f = file_with("a,b\n1,2\n");
    let err = load_csv(f.path(), "y").unwrap_err();
    assert!(matches!(err, BenchError::MissingColumn { .. }));
    assert!(err.to_string().contains("a, b"));
}

#[test]
fn ragged_and_empty_files_fail() {
    let f = file_with("a,y\n1,2\n3\n");
    let err = load_csv(f.path(), "y").unwrap_err();
    assert!(err.to_string().contains("row 2"), "{err}");
    let f = file_with("a,y\n");
    assert!(load_csv(f.path(), "y").is_err());
    let f = file_with("y\n1\n2\n");
    assert!(load_csv(f.path(), "y").is_err());
    assert!(matches!(load_csv("/nonexistent/data.csv", "y"), Err(BenchError::Io { .. })));
}
