//! Result rows, aggregation and the CSV / JSON result files.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{BenchError, Result};

pub const HEADER: [&str; 9] =
    ["dataset", "flavor", "sweep", "fold", "r2", "smse", "msll", "fit_time_s", "predict_time_s"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fold {
    Index(usize),
    /// Arithmetic mean over the fold rows of one sweep cell.
    Mean,
}

impl fmt::Display for Fold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fold::Index(i) => write!(f, "{i}"),
            Fold::Mean => f.write_str("mean"),
        }
    }
}

impl FromStr for Fold {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "mean" {
            Ok(Fold::Mean)
        } else {
            s.parse().map(Fold::Index).map_err(|_| format!("fold must be an index or 'mean', got '{s}'"))
        }
    }
}

/// One line of the result file. Failed cells carry NaN metrics and the
/// error message.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub flavor: String,
    pub sweep: usize,
    pub fold: Fold,
    pub r2: f64,
    pub smse: f64,
    pub msll: f64,
    pub fit_time_s: f64,
    pub predict_time_s: f64,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn failed(dataset: &str, flavor: &str, sweep: usize, fold: Fold, error: String) -> Self {
        ResultRow {
            dataset: dataset.into(),
            flavor: flavor.into(),
            sweep,
            fold,
            r2: f64::NAN,
            smse: f64::NAN,
            msll: f64::NAN,
            fit_time_s: f64::NAN,
            predict_time_s: f64::NAN,
            error: Some(error),
        }
    }

    fn metrics(&self) -> [f64; 5] {
        [self.r2, self.smse, self.msll, self.fit_time_s, self.predict_time_s]
    }

    fn key(&self) -> (&str, &str, usize) {
        (&self.dataset, &self.flavor, self.sweep)
    }
}

/// One `mean` row per (dataset, flavor, sweep) group of fold rows, in order
/// of first appearance. A group with a failed fold has NaN means.
pub fn aggregate(rows: &[ResultRow]) -> Vec<ResultRow> {
    let mut keys: Vec<(&str, &str, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.fold != Fold::Mean) {
        if !keys.contains(&r.key()) {
            keys.push(r.key());
        }
    }
    keys.into_iter()
        .map(|key| {
            let group: Vec<&ResultRow> = rows.iter().filter(|r| r.fold != Fold::Mean && r.key() == key).collect();
            let n = group.len() as f64;
            let mut sums = [0.0; 5];
            for r in &group {
                for (s, v) in sums.iter_mut().zip(r.metrics()) {
                    *s += v;
                }
            }
            let failed = group.iter().filter(|r| r.error.is_some()).count();
            ResultRow {
                dataset: key.0.into(),
                flavor: key.1.into(),
                sweep: key.2,
                fold: Fold::Mean,
                r2: sums[0] / n,
                smse: sums[1] / n,
                msll: sums[2] / n,
                fit_time_s: sums[3] / n,
                predict_time_s: sums[4] / n,
                error: (failed > 0).then(|| format!("{failed} of {} folds failed", group.len())),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    /// From the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(BenchError::config(format!("unknown format '{s}' (csv or json)"))),
        }
    }
}

/// Rounds to six significant digits.
pub fn round6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// `%g`-style text with six significant digits: fixed notation for
/// exponents in `[-5, 6)`, scientific otherwise. NaN prints as `NaN`.
pub fn format_g6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// CSV line for one row, without the newline.
pub fn csv_line(r: &ResultRow) -> String {
    let quote = |s: &str| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut fields = vec![quote(&r.dataset), quote(&r.flavor), r.sweep.to_string(), r.fold.to_string()];
    fields.extend(r.metrics().iter().map(|v| format_g6(*v)));
    fields.join(",")
}

/// JSON object for one row. NaN becomes `null`; the error message is only
/// present on failed rows.
pub fn json_value(r: &ResultRow) -> Value {
    let mut m = Map::new();
    m.insert("dataset".into(), r.dataset.clone().into());
    m.insert("flavor".into(), r.flavor.clone().into());
    m.insert("sweep".into(), r.sweep.into());
    m.insert(
        "fold".into(),
        match r.fold {
            Fold::Index(i) => i.into(),
            Fold::Mean => "mean".into(),
        },
    );
    for (name, v) in HEADER[4..].iter().zip(r.metrics()) {
        let v = serde_json::Number::from_f64(round6(v)).map(Value::Number).unwrap_or(Value::Null);
        m.insert((*name).into(), v);
    }
    if let Some(e) = &r.error {
        m.insert("error".into(), e.clone().into());
    }
    Value::Object(m)
}

/// Writes the complete result file, replacing any previous content.
pub fn emit_results(rows: &[ResultRow], format: Format, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if rows.is_empty() {
        return Err(BenchError::config("no result rows to write"));
    }
    let mut f = BufWriter::new(File::create(path).map_err(|e| BenchError::io(path, e))?);
    write_results(rows, format, &mut f).and_then(|_| f.flush()).map_err(|e| BenchError::io(path, e))
}

/// Serializes rows in the result-file layout.
pub fn write_results(rows: &[ResultRow], format: Format, mut w: impl Write) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{}", HEADER.join(","))?;
            for r in rows {
                writeln!(w, "{}", csv_line(r))?;
            }
        }
        Format::Json => {
            let arr = Value::Array(rows.iter().map(json_value).collect());
            serde_json::to_writer_pretty(&mut w, &arr)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Appends rows to a result file as they complete, so that an interrupted
/// run leaves its finished cells on disk. CSV output is valid at every
/// point; JSON output is an array missing its closing bracket until
/// [`emit_results`] rewrites the file.
pub struct IncrementalWriter {
    file: BufWriter<File>,
    format: Format,
    first: bool,
}

impl IncrementalWriter {
    pub fn create(path: impl AsRef<Path>, format: Format) -> Result<Self> {
        let path = path.as_ref();
        let mut file = BufWriter::new(File::create(path).map_err(|e| BenchError::io(path, e))?);
        let start = match format {
            Format::Csv => format!("{}\n", HEADER.join(",")),
            Format::Json => "[\n".into(),
        };
        file.write_all(start.as_bytes()).and_then(|_| file.flush()).map_err(|e| BenchError::io(path, e))?;
        Ok(IncrementalWriter { file, format, first: true })
    }

    pub fn append(&mut self, row: &ResultRow) -> std::io::Result<()> {
        match self.format {
            Format::Csv => writeln!(self.file, "{}", csv_line(row))?,
            Format::Json => {
                if !self.first {
                    writeln!(self.file, ",")?;
                }
                write!(self.file, "{}", json_value(row))?;
            }
        }
        self.first = false;
        self.file.flush()
    }
}

fn parse_metric(s: &str) -> Option<f64> {
    match s {
        "NaN" | "nan" | "" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

/// Reads a result file written by [`emit_results`], choosing the format by
/// extension.
pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    match Format::from_path(path) {
        Format::Csv => read_csv_rows(path, &text),
        Format::Json => read_json_rows(path, &text),
    }
}

fn read_csv_rows(path: &Path, text: &str) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> =
        reader.headers().map_err(|e| BenchError::format(path, e))?.iter().map(String::from).collect();
    if headers != HEADER {
        return Err(BenchError::format(path, format!("unexpected header: {}", headers.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| BenchError::format(path, format!("row {row}: {e}")))?;
        let bad = |c: usize| BenchError::NonNumeric {
            path: path.to_path_buf(),
            row,
            column: HEADER[c].into(),
            value: rec[c].to_string(),
        };
        let mut m = [0.0; 5];
        for (j, slot) in m.iter_mut().enumerate() {
            *slot = parse_metric(&rec[4 + j]).ok_or_else(|| bad(4 + j))?;
        }
        rows.push(ResultRow {
            dataset: rec[0].into(),
            flavor: rec[1].into(),
            sweep: rec[2].parse().map_err(|_| bad(2))?,
            fold: rec[3].parse().map_err(|_| bad(3))?,
            r2: m[0],
            smse: m[1],
            msll: m[2],
            fit_time_s: m[3],
            predict_time_s: m[4],
            error: None,
        });
    }
    Ok(rows)
}

fn read_json_rows(path: &Path, text: &str) -> Result<Vec<ResultRow>> {
    let value: Value = serde_json::from_str(text).map_err(|e| BenchError::format(path, e))?;
    let Value::Array(items) = value else {
        return Err(BenchError::format(path, "expected a JSON array of result objects"));
    };
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let bad = |field: &str| BenchError::format(path, format!("row {}: missing or invalid '{field}'", i + 1));
            let text = |field: &str| item.get(field).and_then(Value::as_str).map(String::from).ok_or_else(|| bad(field));
            let metric = |field: &str| match item.get(field) {
                Some(Value::Null) => Ok(f64::NAN),
                Some(v) => v.as_f64().ok_or_else(|| bad(field)),
                None => Err(bad(field)),
            };
            let fold = match item.get("fold") {
                Some(Value::String(s)) if s == "mean" => Fold::Mean,
                Some(v) => Fold::Index(v.as_u64().ok_or_else(|| bad("fold"))? as usize),
                None => return Err(bad("fold")),
            };
            Ok(ResultRow {
                dataset: text("dataset")?,
                flavor: text("flavor")?,
                sweep: item.get("sweep").and_then(Value::as_u64).ok_or_else(|| bad("sweep"))? as usize,
                fold,
                r2: metric("r2")?,
                smse: metric("smse")?,
                msll: metric("msll")?,
                fit_time_s: metric("fit_time_s")?,
                predict_time_s: metric("predict_time_s")?,
                error: item.get("error").and_then(Value::as_str).map(String::from),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(fold: Fold, r2: f64) -> ResultRow {
        ResultRow {
            dataset: "d".into(),
            flavor: "owck".into(),
            sweep: 4,
            fold,
            r2,
            smse: 1.0 - r2,
            msll: -1.0,
            fit_time_s: 0.5,
            predict_time_s: 0.01,
            error: None,
        }
    }

    #[test]
    fn g6_formatting() {
        assert_eq!(format_g6(0.123456789), "0.123457");
        assert_eq!(format_g6(1234567.0), "1.23457e6");
        assert_eq!(format_g6(123456.4), "123456");
        assert_eq!(format_g6(-0.5), "-0.5");
        assert_eq!(format_g6(2.0), "2");
        assert_eq!(format_g6(1.5e-7), "1.5e-7");
        assert_eq!(format_g6(0.0001), "0.0001");
        assert_eq!(format_g6(f64::NAN), "NaN");
        assert_eq!(format_g6(-81.888), "-81.888");
        for x in [0.123456789, 98765.4321, -3.3e-9, 7.0e12] {
            assert_eq!(format_g6(x).parse::<f64>().unwrap(), round6(x));
        }
    }

    #[test]
    fn aggregate_is_the_fold_mean() {
        let rows = vec![row(Fold::Index(0), 0.5), row(Fold::Index(1), 0.7), row(Fold::Index(2), 0.9)];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].fold, Fold::Mean);
        assert!((agg[0].r2 - 0.7).abs() < 1e-12);
        assert!(agg[0].error.is_none());
    }

    #[test]
    fn failed_fold_poisons_the_mean() {
        let mut rows = vec![row(Fold::Index(0), 0.5)];
        rows.push(ResultRow::failed("d", "owck", 4, Fold::Index(1), "boom".into()));
        let agg = aggregate(&rows);
        assert!(agg[0].r2.is_nan());
        assert_eq!(agg[0].error.as_deref(), Some("1 of 2 folds failed"));
    }

    #[test]
    fn json_nulls_for_nan() {
        let r = ResultRow::failed("d", "mtck", 2, Fold::Index(0), "x".into());
        let v = json_value(&r);
        assert!(v["r2"].is_null());
        assert_eq!(v["fold"], 0);
        assert_eq!(v["error"], "x");
        assert!(json_value(&row(Fold::Mean, 0.25)).get("error").is_none());
    }
}
