use clusterkrig_bench::results::{format_g6, round6};
use clusterkrig_bench::{aggregate, emit_results, read_results, BenchError, Fold, Format, ResultRow};
use proptest::prelude::*;

fn row(flavor: &str, sweep: usize, fold: Fold, r2: f64) -> ResultRow {
    ResultRow {
        dataset: "ackley".into(),
        flavor: flavor.into(),
        sweep,
        fold,
        r2,
        smse: 1.0 - r2,
        msll: -0.123456789,
        fit_time_s: 1.23456789,
        predict_time_s: 0.000123456789,
        error: None,
    }
}

fn close6(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || (a - b).abs() <= 5e-6 * b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn one_row_gives_two_csv_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    emit_results(&[row("owck", 2, Fold::Index(0), 0.9)], Format::Csv, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "dataset,flavor,sweep,fold,r2,smse,msll,fit_time_s,predict_time_s");
    assert_eq!(lines[1], "ackley,owck,2,0,0.9,0.1,-0.123457,1.23457,0.000123457");
}

#[test]
fn json_round_trip_within_six_digits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let mut rows = vec![row("owck", 2, Fold::Index(0), 0.987654321), row("owck", 2, Fold::Index(1), -81.888)];
    rows.push(ResultRow::failed("ackley", "owck", 2, Fold::Index(2), "did not converge".into()));
    rows.extend(aggregate(&rows));
    emit_results(&rows, Format::Json, &path).unwrap();
    let back = read_results(&path).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in back.iter().zip(&rows) {
        assert_eq!((&a.dataset, &a.flavor, a.sweep, a.fold), (&b.dataset, &b.flavor, b.sweep, b.fold));
        assert!(close6(a.r2, b.r2) && close6(a.smse, b.smse) && close6(a.msll, b.msll));
        assert!(close6(a.fit_time_s, b.fit_time_s) && close6(a.predict_time_s, b.predict_time_s));
        assert_eq!(a.error, b.error);
    }
    // NaN is written as null
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"r2\": null"));
    assert!(text.contains("\"fold\": \"mean\""));
}

#[test]
fn csv_round_trip_within_six_digits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let mut rows = vec![row("mtck", 8, Fold::Index(0), 0.5), row("mtck", 8, Fold::Index(1), 0.25)];
    rows.extend(aggregate(&rows));
    emit_results(&rows, Format::Csv, &path).unwrap();
    let back = read_results(&path).unwrap();
    assert_eq!(back[2].fold, Fold::Mean);
    assert_eq!(back[2].r2, 0.375);
    assert!(back.iter().zip(&rows).all(|(a, b)| close6(a.msll, b.msll)));
}

#[test]
fn empty_rows_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let err = emit_results(&[], Format::Csv, dir.path().join("r.csv")).unwrap_err();
    assert!(matches!(err, BenchError::Config(_)));
}

#[test]
fn unwritable_path_is_an_io_error() {
    let err = emit_results(&[row("sod", 64, Fold::Index(0), 0.1)], Format::Csv, "/nonexistent/dir/r.csv").unwrap_err();
    assert!(matches!(err, BenchError::Io { .. }));
}

#[test]
fn foreign_header_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    std::fs::write(&path, "a,b\n1,2\n").unwrap();
    assert!(read_results(&path).is_err());
}

proptest! {
    #[test]
    fn g6_text_reads_back_to_the_rounded_value(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let text = format_g6(x);
        let back: f64 = text.parse().unwrap();
        prop_assert_eq!(back, round6(x));
        prop_assert!(close6(back, x));
        // at most six significant digits
        let digits = text.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 6, "{}", text);
    }

    #[test]
    fn aggregate_is_the_arithmetic_mean(values in prop::collection::vec(-1e3f64..1e3, 1..12)) {
        let rows: Vec<ResultRow> =
            values.iter().enumerate().map(|(i, v)| row("owfck", 4, Fold::Index(i), *v)).collect();
        let agg = aggregate(&rows);
        prop_assert_eq!(agg.len(), 1);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        prop_assert!((agg[0].r2 - mean).abs() <= 1e-12 * mean.abs().max(1.0));
    }
}
