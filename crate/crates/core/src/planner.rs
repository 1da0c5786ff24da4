//! Deadline-constrained seed planning for uniform thresholds.
//!
//! The closed form gives the waiting time to reach an active fraction
//! `alpha` from a seed `d0`; the inverse question (smallest seed reaching
//! `alpha` by a deadline) has no closed form and is solved by bisecting the
//! fixed-point equation
//!
//! ```text
//! e^{-rT} = (1 - (alpha/d0) r) / (1 - r),   r = 1 - G + G d0
//! ```
//!
//! whose two sides bracket each other on [alpha(1-G)/(1-alpha G), 1]: the
//! left side is larger below the solution and smaller above it.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HiltError, Result};
use crate::ode::UniformClosedForm;
use crate::scalar::{real, to_f64, Real};

/// Default stopping threshold on |F - G| for the bisection.
pub const DEFAULT_SOLVER_EPS: f64 = 1e-10;

/// Bracket width below which the bisection stops regardless of |F - G|.
const WIDTH_FLOOR: f64 = 1e-12;

/// Fluid time needed for the active fraction a(t) = b(t) + d(t) to reach
/// `alpha` from seed `d0`; zero when alpha <= d0 (already reached).
///
/// Errors when alpha is at or above the terminal spread d0/r.
pub fn time_to_reach<T: Real>(alpha: T, d0: T, gamma: T) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(HiltError::InvalidParameter(format!(
            "target fraction must lie in (0, 1), got {}",
            to_f64(alpha)
        )));
    }
    let cf = UniformClosedForm::new(gamma, d0)?;
    if alpha <= d0 {
        return Ok(T::zero());
    }
    let r = cf.r;
    if alpha >= cf.terminal() {
        return Err(HiltError::UnreachableTarget {
            alpha: to_f64(alpha),
            limit: to_f64(cf.terminal()),
        });
    }
    Ok(((T::one() - r) / (T::one() - alpha / d0 * r)).ln() / r)
}

/// Output of [`seed_for_deadline`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeedSolution<T> {
    /// Minimal seed fraction reaching the target by the deadline.
    pub d0_star: T,
    pub iterations: u32,
    /// |F - G| at the returned point.
    pub residual: T,
}

/// Smallest seed whose active fraction reaches `alpha` by fluid time `t`.
///
/// Bisects the fixed-point equation on the bracket
/// [alpha(1-G)/(1-alpha G), 1]: the midpoint replaces whichever end shares
/// the sign of F - G, and the loop stops once |F - G| < eps (or the bracket
/// collapses to floating-point width). With no social interaction (G = 0)
/// the answer is `alpha` itself.
pub fn seed_for_deadline<T: Real>(alpha: T, t: T, gamma: T, eps: T) -> Result<SeedSolution<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(HiltError::InvalidParameter(format!(
            "target fraction must lie in (0, 1), got {}",
            to_f64(alpha)
        )));
    }
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(HiltError::InvalidParameter(format!(
            "influence scale must lie in [0, 1], got {}",
            to_f64(gamma)
        )));
    }
    if !(t > T::zero()) {
        return Err(HiltError::InvalidParameter(
            "deadline must be positive".into(),
        ));
    }
    if !(eps > T::zero()) {
        return Err(HiltError::InvalidParameter(
            "solver tolerance must be positive".into(),
        ));
    }
    if gamma == T::zero() {
        // a(t) = d0 for all t, so the seed must equal the target
        return Ok(SeedSolution {
            d0_star: alpha,
            iterations: 0,
            residual: T::zero(),
        });
    }

    // F(x) - G(x) with r = 1 - gamma + gamma x
    let gap = |x: T| -> T {
        let r = T::one() - gamma + gamma * x;
        let f = (-r * t).exp();
        let g = (T::one() - alpha / x * r) / (T::one() - r);
        f - g
    };

    let mut lo = alpha * (T::one() - gamma) / (T::one() - alpha * gamma);
    let mut hi = T::one();
    // the bracket must satisfy gap(lo) >= 0 >= gap(hi-); allow rounding noise
    // at the lower end, where G vanishes and F may underflow for long
    // deadlines, but report a clear violation as an inconsistent query
    if gap(lo.max(real(1e-300))) < -real::<T>(1e-9) {
        return Err(HiltError::NoSolution(format!(
            "inconsistent query: F - G is negative at the bracket lower end {}",
            to_f64(lo)
        )));
    }

    let width_floor = real::<T>(WIDTH_FLOOR);
    let mut iterations = 0u32;
    loop {
        let x = (lo + hi) / real(2.0);
        let g = gap(x);
        iterations += 1;
        if g > T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        if g.abs() < eps || (hi - lo) < width_floor {
            return Ok(SeedSolution {
                d0_star: x,
                iterations,
                residual: g.abs(),
            });
        }
    }
}

/// One cell of a planning sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow<T> {
    pub gamma: T,
    pub alpha: T,
    pub t: T,
    pub d0_star: T,
    pub iterations: u32,
}

/// Result of [`sweep`]: solved cells plus diagnostics for failed ones.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult<T> {
    pub rows: Vec<SweepRow<T>>,
    /// (gamma, alpha, t, error message) for cells that failed to solve.
    pub failures: Vec<(T, T, T, String)>,
}

/// Solves `seed_for_deadline` over the grid of all (gamma, alpha, t)
/// combinations. Failed cells are recorded and the sweep continues.
pub fn sweep<T: Real>(
    gammas: &[T],
    alphas: &[T],
    deadlines: &[T],
    eps: T,
) -> SweepResult<T> {
    let mut cells = Vec::new();
    for &g in gammas {
        for &a in alphas {
            for &t in deadlines {
                cells.push((g, a, t));
            }
        }
    }
    let solved: Vec<_> = cells
        .par_iter()
        .map(|&(g, a, t)| (g, a, t, seed_for_deadline(a, t, g, eps)))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (g, a, t, res) in solved {
        match res {
            Ok(sol) => rows.push(SweepRow {
                gamma: g,
                alpha: a,
                t,
                d0_star: sol.d0_star,
                iterations: sol.iterations,
            }),
            Err(e) => failures.push((g, a, t, e.to_string())),
        }
    }
    SweepResult { rows, failures }
}
