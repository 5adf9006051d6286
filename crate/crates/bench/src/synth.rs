//! Synthetic benchmark functions.
//!
//! | name | domain (every coordinate) | dimensions |
//! |---|---|---|
//! | `ackley` | [-15, 30] | any |
//! | `rastrigin` | [-5.12, 5.12] | any |
//! | `schwefel` | [-500, 500] | any |
//! | `rosenbrock` | [-2.048, 2.048] | >= 2 |
//! | `schaffer` | [-100, 100] | >= 2 (chained pairs) |
//! | `diffpow` | [-1, 1] | any |
//! | `h1` | [-100, 100] | 2 |
//! | `himmelblau` | [-6, 6] | 2 |
//! | `h1-ext`, `himmelblau-ext` | as above | >= 2 |
//!
//! The `-ext` variants are an additive extension to more than two inputs:
//! the 2-d function summed over consecutive coordinate pairs,
//! `f(x) = Σᵢ g(xᵢ, xᵢ₊₁)`. With `d = 2` they equal the plain form.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use clusterkrig_core::{Dataset, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthFunction {
    Ackley,
    Rastrigin,
    Schwefel,
    Rosenbrock,
    Schaffer,
    Diffpow,
    H1,
    Himmelblau,
    H1Ext,
    HimmelblauExt,
}

impl SynthFunction {
    pub const ALL: [SynthFunction; 10] = [
        SynthFunction::Ackley,
        SynthFunction::Rastrigin,
        SynthFunction::Schwefel,
        SynthFunction::Rosenbrock,
        SynthFunction::Schaffer,
        SynthFunction::Diffpow,
        SynthFunction::H1,
        SynthFunction::Himmelblau,
        SynthFunction::H1Ext,
        SynthFunction::HimmelblauExt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SynthFunction::Ackley => "ackley",
            SynthFunction::Rastrigin => "rastrigin",
            SynthFunction::Schwefel => "schwefel",
            SynthFunction::Rosenbrock => "rosenbrock",
            SynthFunction::Schaffer => "schaffer",
            SynthFunction::Diffpow => "diffpow",
            SynthFunction::H1 => "h1",
            SynthFunction::Himmelblau => "himmelblau",
            SynthFunction::H1Ext => "h1-ext",
            SynthFunction::HimmelblauExt => "himmelblau-ext",
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            SynthFunction::Ackley => (-15.0, 30.0),
            SynthFunction::Rastrigin => (-5.12, 5.12),
            SynthFunction::Schwefel => (-500.0, 500.0),
            SynthFunction::Rosenbrock => (-2.048, 2.048),
            SynthFunction::Schaffer | SynthFunction::H1 | SynthFunction::H1Ext => (-100.0, 100.0),
            SynthFunction::Diffpow => (-1.0, 1.0),
            SynthFunction::Himmelblau | SynthFunction::HimmelblauExt => (-6.0, 6.0),
        }
    }

    /// Checks that the function is defined for `d` inputs.
    pub fn check_dim(self, d: usize) -> Result<()> {
        let ok = match self {
            SynthFunction::H1 | SynthFunction::Himmelblau => d == 2,
            SynthFunction::Rosenbrock
            | SynthFunction::Schaffer
            | SynthFunction::H1Ext
            | SynthFunction::HimmelblauExt => d >= 2,
            _ => d >= 1,
        };
        if ok {
            Ok(())
        } else {
            let need = match self {
                SynthFunction::H1 | SynthFunction::Himmelblau => "exactly 2",
                SynthFunction::Rosenbrock
                | SynthFunction::Schaffer
                | SynthFunction::H1Ext
                | SynthFunction::HimmelblauExt => "at least 2",
                _ => "at least 1",
            };
            Err(BenchError::config(format!("{} needs {need} dimensions, got d = {d}", self.name())))
        }
    }

    /// Function value at `x`; the caller guarantees a valid dimension.
    pub fn eval(self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        match self {
            SynthFunction::Ackley => {
                let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
                let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
                20.0 - 20.0 * (-0.2 * sq.sqrt()).exp() + E - cs.exp()
            }
            SynthFunction::Rastrigin => {
                10.0 * d + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
            }
            SynthFunction::Schwefel => {
                418.982_887_272_433_9 * d - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
            }
            SynthFunction::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum(),
            SynthFunction::Schaffer => x
                .windows(2)
                .map(|w| {
                    let s = w[0] * w[0] + w[1] * w[1];
                    s.powf(0.25) * ((50.0 * s.powf(0.1)).sin().powi(2) + 1.0)
                })
                .sum(),
            SynthFunction::Diffpow => {
                let n = x.len();
                x.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let p = if n > 1 { 2.0 + 10.0 * i as f64 / (n - 1) as f64 } else { 2.0 };
                        v.abs().powf(p)
                    })
                    .sum()
            }
            SynthFunction::H1 | SynthFunction::H1Ext => x.windows(2).map(|w| h1(w[0], w[1])).sum(),
            SynthFunction::Himmelblau | SynthFunction::HimmelblauExt => {
                x.windows(2).map(|w| himmelblau(w[0], w[1])).sum()
            }
        }
    }
}

fn h1(a: f64, b: f64) -> f64 {
    let num = (a - b / 8.0).sin().powi(2) + (b + a / 8.0).sin().powi(2);
    let den = ((a - 8.6998).powi(2) + (b - 6.7665).powi(2)).sqrt() + 1.0;
    num / den
}

fn himmelblau(a: f64, b: f64) -> f64 {
    (a * a + b - 11.0).powi(2) + (a + b * b - 7.0).powi(2)
}

impl fmt::Display for SynthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthFunction {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        SynthFunction::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = SynthFunction::ALL.iter().map(|f| f.name()).collect();
                BenchError::config(format!("unknown function '{s}' (known: {})", names.join(", ")))
            })
    }
}

/// `n` points drawn uniformly from the function's domain with noise-free
/// targets. Deterministic per seed.
pub fn synth_dataset(function: SynthFunction, n: usize, d: usize, seed: u64) -> Result<Dataset> {
    function.check_dim(d)?;
    if n == 0 {
        return Err(BenchError::config("synthetic dataset needs n >= 1"));
    }
    let (lo, hi) = function.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..n * d).map(|_| rng.random_range(lo..=hi)).collect();
    let x = Matrix::from_row_major(n, d, data)?;
    let y = x.row_iter().map(|r| function.eval(r)).collect();
    Ok(Dataset::new(x, y)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_minima() {
        assert_eq!(SynthFunction::Rastrigin.eval(&[0.0; 5]), 0.0);
        assert!(SynthFunction::Ackley.eval(&[0.0; 7]).abs() < 1e-9);
        assert_eq!(SynthFunction::Rosenbrock.eval(&[1.0; 4]), 0.0);
        assert_eq!(SynthFunction::Himmelblau.eval(&[3.0, 2.0]), 0.0);
        assert_eq!(SynthFunction::Schaffer.eval(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(SynthFunction::Diffpow.eval(&[0.0; 3]), 0.0);
        // Schwefel's minimum sits at 420.9687 in every coordinate
        assert!(SynthFunction::Schwefel.eval(&[420.968_746_2; 3]).abs() < 1e-4);
    }

    #[test]
    fn hand_values() {
        // 10 + (1 - 10 cos 2π) = 1
        assert!((SynthFunction::Rastrigin.eval(&[1.0]) - 1.0).abs() < 1e-12);
        // 100 (1 - 0)² + (1 - 0)² = 101
        assert_eq!(SynthFunction::Rosenbrock.eval(&[0.0, 1.0]), 101.0);
        // (0 + 0 - 11)² + (0 + 0 - 7)² = 170
        assert_eq!(SynthFunction::Himmelblau.eval(&[0.0, 0.0]), 170.0);
        // |x1|² + |x2|^12 at (0.5, 0.5)
        let v = SynthFunction::Diffpow.eval(&[0.5, 0.5]);
        assert!((v - (0.25 + 0.5f64.powi(12))).abs() < 1e-15);
        // h1 peaks near (8.6998, 6.7665) at about 2
        assert!((SynthFunction::H1.eval(&[8.6998, 6.7665]) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn extension_matches_plain_form_in_two_dimensions() {
        let x = [1.3, -2.2];
        assert_eq!(SynthFunction::H1Ext.eval(&x), SynthFunction::H1.eval(&x));
        assert_eq!(SynthFunction::HimmelblauExt.eval(&x), SynthFunction::Himmelblau.eval(&x));
        let x3 = [1.0, 2.0, 3.0];
        assert_eq!(
            SynthFunction::HimmelblauExt.eval(&x3),
            SynthFunction::Himmelblau.eval(&[1.0, 2.0]) + SynthFunction::Himmelblau.eval(&[2.0, 3.0])
        );
    }

    #[test]
    fn dimension_rules() {
        assert!(synth_dataset(SynthFunction::H1, 10, 3, 0).is_err());
        assert!(synth_dataset(SynthFunction::Himmelblau, 10, 2, 0).is_ok());
        assert!(synth_dataset(SynthFunction::Rosenbrock, 10, 1, 0).is_err());
        assert!(synth_dataset(SynthFunction::Ackley, 10, 1, 0).is_ok());
        assert!("nope".parse::<SynthFunction>().is_err());
    }

    #[test]
    fn deterministic_and_in_domain() {
        for f in SynthFunction::ALL {
            let d = if matches!(f, SynthFunction::H1 | SynthFunction::Himmelblau) { 2 } else { 3 };
            let a = synth_dataset(f, 50, d, 7).unwrap();
            assert_eq!(a, synth_dataset(f, 50, d, 7).unwrap());
            let (lo, hi) = f.domain();
            assert!(a.x().as_slice().iter().all(|v| (lo..=hi).contains(v)));
            assert_eq!(f.name().parse::<SynthFunction>().unwrap(), f);
        }
    }
}
