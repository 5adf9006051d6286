//! Box-constrained Nelder-Mead, used to maximize the concentrated likelihood
//! over log-scale hyper-parameters.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(*lo).min(*hi);
        }
    }
}

pub(crate) struct Settings {
    pub max_evals: usize,
    /// Stop when the spread of objective values over the simplex drops below
    /// `f_tol * (1 + |best|)`.
    pub f_tol: f64,
    /// Initial simplex edge, as a fraction of each bound's width.
    pub initial_step: f64,
}

pub(crate) struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    pub evals: usize,
}

/// Maximizes `f` from `start`. Non-finite objective values are treated as
/// `-inf` (infeasible). Every vertex is projected into the box.
pub(crate) fn maximize<F>(mut f: F, start: &[f64], bounds: &Bounds, settings: &Settings) -> Optimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };

    // minimize g = -f internally
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut x0 = start.to_vec();
    bounds.clamp(&mut x0);
    simplex.push(x0.clone());
    for i in 0..dim {
        let width = bounds.upper[i] - bounds.lower[i];
        let mut x = x0.clone();
        let step = settings.initial_step * width;
        // step inward when the start sits on the upper bound
        x[i] = if x[i] + step <= bounds.upper[i] { x[i] + step } else { x[i] - step };
        bounds.clamp(&mut x);
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];

    while evals < settings.max_evals {
        // order vertices by value, ties keep insertion order
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(core::cmp::Ordering::Equal));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[dim];
        if best.is_finite() && (worst - best).abs() <= settings.f_tol * (1.0 + best.abs()) {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for x in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }

        let point_along = |coef: f64, out: &mut [f64]| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&simplex[dim]) {
                *o = c + coef * (c - w);
            }
            bounds.clamp(out);
        };

        point_along(alpha, &mut trial);
        let reflected = eval(&trial, &mut evals);
        if reflected < values[0] {
            let reflected_point = trial.clone();
            point_along(gamma, &mut trial);
            let expanded = eval(&trial, &mut evals);
            if expanded < reflected {
                simplex[dim].copy_from_slice(&trial);
                values[dim] = expanded;
            } else {
                simplex[dim] = reflected_point;
                values[dim] = reflected;
            }
            continue;
        }
        if reflected < values[dim - 1] {
            simplex[dim].copy_from_slice(&trial);
            values[dim] = reflected;
            continue;
        }
        // contraction, outside or inside
        let outside = reflected < values[dim];
        point_along(if outside { rho } else { -rho }, &mut trial);
        let contracted = eval(&trial, &mut evals);
        if contracted < values[dim].min(reflected) {
            simplex[dim].copy_from_slice(&trial);
            values[dim] = contracted;
            continue;
        }
        // shrink towards the best vertex
        let head = simplex[0].clone();
        for i in 1..=dim {
            for (v, b) in simplex[i].iter_mut().zip(&head) {
                *v = b + sigma * (*v - b);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let (best_idx, best_val) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    Optimum { x: simplex[best_idx].clone(), value: -best_val, evals }
}
