//! Monte Carlo estimators of the multilinear extension
//! `F(x) = E_{S ~ x}[f(S)]`, where `S ~ x` includes item `i` independently
//! with probability `x_i`, and of its gradient
//! `∂F/∂x_i = E[f(S ∪ {i}) - f(S \ {i})]`.

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objective::SetObjective;
use crate::rng;

pub(crate) fn check_unit_box(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::input(format!("point has {} coordinates, ground set {n}", x.len())));
    }
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::input(format!("x[{i}] = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Draw `S ~ x`. Coordinates at exactly 0 or 1 are deterministic.
pub fn sample_independent_set(x: &[f64], rng: &mut rng::Rng) -> Vec<usize> {
    (0..x.len()).filter(|&i| rng.gen::<f64>() < x[i]).collect()
}

/// The `samples` sets used by every estimator for a given seed; sample `s`
/// comes from stream `(rng_seed, s)`.
pub fn sample_sets(x: &[f64], samples: usize, rng_seed: u64) -> Vec<Vec<usize>> {
    (0..samples)
        .into_par_iter()
        .map(|s| sample_independent_set(x, &mut rng::stream_rng(rng_seed, s as u64)))
        .collect()
}

/// Mean of `f(S)` over `samples` independent draws `S ~ x`.
pub fn multilinear_value<F: SetObjective + ?Sized>(f: &F, x: &[f64], samples: usize, rng_seed: u64) -> Result<f64> {
    Ok(multilinear_value_with_stderr(f, x, samples, rng_seed)?.0)
}

pub fn multilinear_value_with_stderr<F: SetObjective + ?Sized>(
    f: &F,
    x: &[f64],
    samples: usize,
    rng_seed: u64,
) -> Result<(f64, f64)> {
    check_unit_box(x, f.ground_size())?;
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    let values: Vec<f64> = sample_sets(x, samples, rng_seed)
        .par_iter()
        .map(|s| f.value(s))
        .collect();
    Ok(crate::cascade::mean_and_stderr(values.iter().copied()))
}

/// Gradient estimate; all components share the same sampled sets.
pub fn multilinear_grad<F: SetObjective + ?Sized>(f: &F, x: &[f64], samples: usize, rng_seed: u64) -> Result<Vec<f64>> {
    check_unit_box(x, f.ground_size())?;
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    let n = x.len();
    let per_sample: Vec<Vec<f64>> = sample_sets(x, samples, rng_seed)
        .par_iter()
        .map(|s| {
            let mut g = vec![0.0; n];
            f.marginal_gains(s, &mut g);
            g
        })
        .collect();
    let mut grad = vec![0.0; n];
    for g in &per_sample {
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    for a in &mut grad {
        *a /= samples as f64;
    }
    Ok(grad)
}
