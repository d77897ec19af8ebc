#![allow(dead_code)]

use netsig_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller, kept local so the oracles share no code with the crate
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Random design with both classes present, labels loosely tied to the
/// first column.
pub fn instance(seed: u64, n: usize, p: usize) -> (Matrix, Vec<f64>) {
    let mut r = rng(seed);
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| gaussian(&mut r)).collect())
            .collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|row| {
                if row[0] + 1.5 * gaussian(&mut r) > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        if y.contains(&1.0) && y.contains(&-1.0) {
            return (Matrix::from_rows(&rows).unwrap(), y);
        }
    }
}

pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Mean logistic loss computed row by row from the raw matrix.
pub fn loss(x: &Matrix, y: &[f64], w: &[f64], b: f64) -> f64 {
    let n = x.nrows();
    (0..n)
        .map(|i| {
            let eta: f64 = b + (0..x.ncols()).map(|j| x.get(i, j) * w[j]).sum::<f64>();
            softplus(-y[i] * eta)
        })
        .sum::<f64>()
        / n as f64
}

pub fn l1_objective(x: &Matrix, y: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    loss(x, y, w, b) + lambda * w.iter().map(|a| a.abs()).sum::<f64>()
}

/// Gradient of the mean loss with respect to `(w, b)`, by direct summation.
pub fn loss_gradient(x: &Matrix, y: &[f64], w: &[f64], b: f64) -> (Vec<f64>, f64) {
    let n = x.nrows();
    let mut gw = vec![0.0; x.ncols()];
    let mut gb = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let eta: f64 = b + (0..x.ncols()).map(|j| x.get(i, j) * w[j]).sum::<f64>();
        let s = -yi / (1.0 + (yi * eta).exp()) / n as f64;
        gb += s;
        for (j, g) in gw.iter_mut().enumerate() {
            *g += s * x.get(i, j);
        }
    }
    (gw, gb)
}

/// Derivative-free minimizer: coarse grid, then compass search over every
/// direction in `{-1, 0, 1}^d`, halving the step down to `1e-10`.
pub fn brute_force_min<F: Fn(&[f64]) -> f64>(f: F, dim: usize, radius: f64) -> (Vec<f64>, f64) {
    let per_axis: usize = 9;
    let mut best = vec![0.0; dim];
    let mut best_val = f(&best);
    let total = per_axis.pow(dim as u32);
    let mut point = vec![0.0; dim];
    for code in 0..total {
        let mut c = code;
        for v in point.iter_mut() {
            let k = c % per_axis;
            c /= per_axis;
            *v = -radius + 2.0 * radius * k as f64 / (per_axis - 1) as f64;
        }
        let val = f(&point);
        if val < best_val {
            best_val = val;
            best.copy_from_slice(&point);
        }
    }
    let dirs: Vec<Vec<f64>> = (0..3usize.pow(dim as u32))
        .map(|mut c| {
            (0..dim)
                .map(|_| {
                    let d = (c % 3) as f64 - 1.0;
                    c /= 3;
                    d
                })
                .collect::<Vec<f64>>()
        })
        .filter(|d| d.iter().any(|&v| v != 0.0))
        .collect();
    let mut step = radius / (per_axis - 1) as f64;
    let mut trial = vec![0.0; dim];
    while step > 1e-10 {
        let mut improved = false;
        for d in &dirs {
            for k in 0..dim {
                trial[k] = best[k] + step * d[k];
            }
            let val = f(&trial);
            if val < best_val {
                best_val = val;
                best.copy_from_slice(&trial);
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_val)
}
