//! Tabular input: CSV files with a header row, and z-scoring.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use clusterkrig_core::{Dataset, Matrix};

use crate::error::{BenchError, Result};

/// Reads a CSV with a header row. `target` names the response column; every
/// other column is an input. All cells must parse as finite numbers.
pub fn load_csv(path: impl AsRef<Path>, target: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BenchError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| BenchError::format(path, e))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let t = names.iter().position(|h| *h == target).ok_or_else(|| BenchError::MissingColumn {
        path: path.to_path_buf(),
        column: target.to_string(),
        available: names.join(", "),
    })?;
    if names.len() < 2 {
        return Err(BenchError::format(path, "need at least one input column besides the target"));
    }

    let d = names.len() - 1;
    let mut xs = Vec::new();
    let mut y = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| BenchError::format(path, format!("row {row}: {e}")))?;
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| BenchError::NonNumeric {
                path: path.to_path_buf(),
                row,
                column: names[c].to_string(),
                value: cell.to_string(),
            })?;
            if c == t {
                y.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(BenchError::format(path, "no data rows"));
    }
    let x = Matrix::from_row_major(y.len(), d, xs)?;
    Ok(Dataset::new(x, y)?)
}

/// Writes inputs as `x0..x{d-1}` followed by `y`. Values use the shortest
/// representation that reads back to the same bits.
pub fn write_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| BenchError::format(path, e))?;
    let mut header: Vec<String> = (0..data.d()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header).map_err(|e| BenchError::format(path, e))?;
    for (row, y) in data.x().row_iter().zip(data.y()) {
        let rec: Vec<String> = row.iter().chain(std::iter::once(y)).map(|v| v.to_string()).collect();
        w.write_record(&rec).map_err(|e| BenchError::format(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Writes query predictions as `mean,variance`.
pub fn write_predictions(path: impl AsRef<Path>, mean: &[f64], variance: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(File::create(path).map_err(|e| BenchError::io(path, e))?);
    let io = |e| BenchError::io(path, e);
    writeln!(f, "mean,variance").map_err(io)?;
    for (m, v) in mean.iter().zip(variance) {
        writeln!(f, "{m},{v}").map_err(io)?;
    }
    f.flush().map_err(io)
}

/// Reads a query CSV: every column is an input.
pub fn load_queries(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BenchError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let names: Vec<String> =
        reader.headers().map_err(|e| BenchError::format(path, e))?.iter().map(String::from).collect();
    let mut data = Vec::new();
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| BenchError::format(path, format!("row {}: {e}", r + 1)))?;
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| BenchError::NonNumeric {
                path: path.to_path_buf(),
                row: r + 1,
                column: names[c].clone(),
                value: cell.to_string(),
            })?;
            data.push(v);
        }
        rows += 1;
    }
    Ok(Matrix::from_row_major(rows, names.len(), data)?)
}

/// Column-wise z-scoring fitted on one set of rows and applied to others.
/// Constant columns keep a unit scale so they map to zero.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Standardizer {
    pub x_mean: Vec<f64>,
    pub x_scale: Vec<f64>,
    pub y_mean: f64,
    pub y_scale: f64,
}

fn mean_scale(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    (mean, if sd > 0.0 && sd.is_finite() { sd } else { 1.0 })
}

impl Standardizer {
    pub fn fit(data: &Dataset) -> Self {
        let (x_mean, x_scale) = (0..data.d())
            .map(|j| mean_scale(&data.x().row_iter().map(|r| r[j]).collect::<Vec<_>>()))
            .unzip();
        let (y_mean, y_scale) = mean_scale(data.y());
        Standardizer { x_mean, x_scale, y_mean, y_scale }
    }

    pub fn transform_x(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.x_mean.len() {
            return Err(BenchError::config(format!(
                "inputs have {} columns, the model expects {}",
                x.cols(),
                self.x_mean.len()
            )));
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.x_mean[j]) / self.x_scale[j];
            }
        }
        Ok(out)
    }

    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        let x = self.transform_x(data.x())?;
        let y = data.y().iter().map(|v| (v - self.y_mean) / self.y_scale).collect();
        Ok(Dataset::new(x, y)?)
    }

    /// Maps a standardized mean and variance back to the original units.
    pub fn inverse(&self, mean: &mut [f64], variance: &mut [f64]) {
        for m in mean {
            *m = *m * self.y_scale + self.y_mean;
        }
        let s2 = self.y_scale * self.y_scale;
        for v in variance {
            *v *= s2;
        }
    }
}
