//! Normalised descent with a backtracking Armijo line search.

use alloc::vec::Vec;

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    pub max_iters: usize,
    /// Stop once the relative decrease of an accepted step falls below this.
    pub tol: f64,
    pub armijo_c: f64,
    pub max_halvings: usize,
    pub step0: f64,
    pub step_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ZeroEnergy,
    Converged,
    LineSearchFailed,
    NoDescent,
    MaxIterations,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::ZeroEnergy => "zero_energy",
            StopReason::Converged => "converged",
            StopReason::LineSearchFailed => "line_search_failed",
            StopReason::NoDescent => "no_descent",
            StopReason::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub x: Vec<f64>,
    /// Energy at the start and after every accepted step.
    pub energies: Vec<f64>,
    pub stop: StopReason,
}

/// Minimises `energy` from `x0`. `direction` returns the gradient and a
/// descent direction scaled so that a unit step is one unit of the caller's
/// step measure. Trial points whose energy fails to evaluate are rejected.
pub fn armijo_descent(
    x0: Vec<f64>,
    opts: &DescentOptions,
    mut energy: impl FnMut(&[f64]) -> Result<f64>,
    mut direction: impl FnMut(&[f64]) -> Result<(Vec<f64>, Vec<f64>)>,
) -> Result<DescentOutcome> {
    let mut x = x0;
    let mut e = energy(&x)?;
    let mut energies = alloc::vec![e];
    let mut alpha = opts.step0;
    let mut trial = x.clone();
    for _ in 0..opts.max_iters {
        if e == 0.0 {
            return Ok(DescentOutcome { x, energies, stop: StopReason::ZeroEnergy });
        }
        let (g, d) = direction(&x)?;
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) || d.iter().any(|v| !v.is_finite()) {
            return Ok(DescentOutcome { x, energies, stop: StopReason::NoDescent });
        }
        let mut a = alpha;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            for ((t, xi), di) in trial.iter_mut().zip(&x).zip(&d) {
                *t = xi + a * di;
            }
            let et = energy(&trial).unwrap_or(f64::INFINITY);
            if et < e && et <= e + opts.armijo_c * a * slope {
                accepted = Some(et);
                break;
            }
            a *= 0.5;
        }
        let Some(et) = accepted else {
            return Ok(DescentOutcome { x, energies, stop: StopReason::LineSearchFailed });
        };
        let rel = (e - et) / e.abs().max(f64::MIN_POSITIVE);
        core::mem::swap(&mut x, &mut trial);
        e = et;
        energies.push(e);
        alpha = (2.0 * a).min(opts.step_max);
        if rel < opts.tol {
            return Ok(DescentOutcome { x, energies, stop: StopReason::Converged });
        }
    }
    let stop = if e == 0.0 { StopReason::ZeroEnergy } else { StopReason::MaxIterations };
    Ok(DescentOutcome { x, energies, stop })
}
