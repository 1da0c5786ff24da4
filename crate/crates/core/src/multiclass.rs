//! Community-structured extension of the fluid dynamics.
//!
//! The population splits into M communities with relative sizes n_i (summing
//! to one), an influence matrix G whose entry g_{ij} is the strength from
//! community i to community j, and per-community threshold distributions.
//! Writing [G^T v]_i for the influence flowing into community i, each
//! community evolves as
//!
//! ```text
//! db_i/dt = d_i
//! dd_i/dt = -d_i + [G^T d]_i * h_i([G^T b]_i) * (n_i - b_i - d_i)
//! ```
//!
//! All fractions are absolute population fractions (b_i + d_i + inactive_i
//! sums to n_i), which is exactly what the (n_i - b_i - d_i) term requires.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::ThresholdDist;
use crate::error::{HiltError, Result};
use crate::ode::StepControl;
use crate::rk4::{drive_adaptive, drive_fixed, StepVerdict};
use crate::scalar::{real, to_f64, Real};

/// Community layout: sizes, influence matrix, per-community thresholds.
#[derive(Debug, Clone)]
pub struct CommunityNetwork<T: Real> {
    sizes: Vec<T>,
    influence: Vec<Vec<T>>,
    dists: Vec<ThresholdDist<T>>,
}

impl<T: Real> CommunityNetwork<T> {
    /// `influence[i][j]` is the strength from community i to community j
    /// (per-edge weight `influence[i][j] / N` in the finite system).
    pub fn new(
        sizes: Vec<T>,
        influence: Vec<Vec<T>>,
        dists: Vec<ThresholdDist<T>>,
    ) -> Result<Self> {
        let m = sizes.len();
        if m == 0 {
            return Err(HiltError::InvalidParameter(
                "need at least one community".into(),
            ));
        }
        if sizes.iter().any(|&s| !(s > T::zero())) {
            return Err(HiltError::InvalidParameter(
                "community sizes must be positive".into(),
            ));
        }
        let total = sizes.iter().fold(T::zero(), |acc, &s| acc + s);
        if (total - T::one()).abs() > real(1e-12) {
            return Err(HiltError::InvalidParameter(format!(
                "community sizes must sum to 1, got {}",
                to_f64(total)
            )));
        }
        if influence.len() != m || influence.iter().any(|row| row.len() != m) {
            return Err(HiltError::InvalidParameter(format!(
                "influence matrix must be {m} x {m}"
            )));
        }
        if influence
            .iter()
            .flatten()
            .any(|&g| !(g >= T::zero() && g.is_finite()))
        {
            return Err(HiltError::InvalidParameter(
                "influence entries must be finite and nonnegative".into(),
            ));
        }
        if dists.len() != m {
            return Err(HiltError::InvalidParameter(format!(
                "need one threshold distribution per community, got {} for {m}",
                dists.len()
            )));
        }
        Ok(CommunityNetwork {
            sizes,
            influence,
            dists,
        })
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[T] {
        &self.sizes
    }

    pub fn influence(&self) -> &[Vec<T>] {
        &self.influence
    }

    pub fn dists(&self) -> &[ThresholdDist<T>] {
        &self.dists
    }
}

/// Per-community time series.
#[derive(Debug, Clone, Serialize)]
pub struct MultiTrajectory<T> {
    pub times: Vec<T>,
    /// b[k][i]: exhausted-active fraction of community i at sample k.
    pub b: Vec<Vec<T>>,
    /// d[k][i]: infectious fraction of community i at sample k.
    pub d: Vec<Vec<T>>,
    pub terminal: bool,
}

impl<T: Real> MultiTrajectory<T> {
    /// Total active fraction at the end of the series (residual infectious
    /// mass counted as active).
    pub fn total_final_active(&self) -> T {
        match (self.b.last(), self.d.last()) {
            (Some(b), Some(d)) => b
                .iter()
                .zip(d.iter())
                .fold(T::zero(), |acc, (&bi, &di)| acc + bi + di),
            _ => T::zero(),
        }
    }

    pub fn communities(&self) -> usize {
        self.b.first().map_or(0, |row| row.len())
    }
}

/// Integrates the community system from `d_init` (absolute fractions,
/// 0 <= d_i(0) <= n_i) up to `t_end`; same integrator contract as the
/// single-class fluid system, applied componentwise.
pub fn integrate_multiclass<T: Real>(
    net: &CommunityNetwork<T>,
    d_init: &[T],
    t_end: T,
    ctrl: &StepControl<T>,
) -> Result<MultiTrajectory<T>> {
    let m = net.len();
    if d_init.len() != m {
        return Err(HiltError::InvalidParameter(format!(
            "initial seeding must list {m} communities, got {}",
            d_init.len()
        )));
    }
    for (i, &d) in d_init.iter().enumerate() {
        if !(d >= T::zero() && d <= net.sizes[i] + real(1e-12)) {
            return Err(HiltError::InvalidParameter(format!(
                "seed fraction {} of community {i} exceeds its size {}",
                to_f64(d),
                to_f64(net.sizes[i])
            )));
        }
    }
    if !(t_end > T::zero()) {
        return Err(HiltError::InvalidParameter(
            "integration horizon must be positive".into(),
        ));
    }
    if !(ctrl.step > T::zero()) {
        return Err(HiltError::InvalidParameter(
            "step size must be positive".into(),
        ));
    }

    // state layout: y = [b_1 .. b_M, d_1 .. d_M]
    let eps = ctrl.eps_haz;
    let sizes = net.sizes.clone();
    let influence = net.influence.clone();
    let dists = net.dists.clone();
    let rhs = move |_t: T, y: &[T], dy: &mut [T]| {
        let (b, d) = y.split_at(m);
        for i in 0..m {
            let mut infl_b = T::zero();
            let mut infl_d = T::zero();
            for j in 0..m {
                infl_b = infl_b + influence[j][i] * b[j];
                infl_d = infl_d + influence[j][i] * d[j];
            }
            let hz = dists[i].hazard_regularized(infl_b, eps);
            dy[i] = d[i];
            dy[m + i] = infl_d * hz * (sizes[i] - b[i] - d[i]) - d[i];
        }
    };

    let mut y = vec![T::zero(); 2 * m];
    y[m..].copy_from_slice(d_init);

    let mut traj = MultiTrajectory {
        times: Vec::new(),
        b: Vec::new(),
        d: Vec::new(),
        terminal: false,
    };
    let record = |traj: &mut MultiTrajectory<T>, t: T, y: &[T]| {
        traj.times.push(t);
        traj.b.push(y[..m].to_vec());
        traj.d.push(y[m..].to_vec());
    };
    record(&mut traj, T::zero(), &y);
    let max_d0 = d_init.iter().fold(T::zero(), |acc, &d| acc.max(d));
    if max_d0 < ctrl.d_stop {
        traj.terminal = true;
        return Ok(traj);
    }

    let simplex_tol = ctrl.simplex_tol;
    let d_stop = ctrl.d_stop;
    let sizes_check = net.sizes.clone();
    let mut on_step = |t: T, y: &[T]| {
        let (b, d) = y.split_at(m);
        let mut max_d = T::zero();
        for i in 0..m {
            let valid = b[i] >= -simplex_tol
                && d[i] >= -simplex_tol
                && b[i] + d[i] <= sizes_check[i] + simplex_tol;
            if !valid {
                return Err(HiltError::StepFailure {
                    t: to_f64(t),
                    b: to_f64(b[i]),
                    d: to_f64(d[i]),
                });
            }
            max_d = max_d.max(d[i]);
        }
        record(&mut traj, t, y);
        Ok(if max_d < d_stop {
            StepVerdict::Terminal
        } else {
            StepVerdict::Continue
        })
    };
    let terminal = match ctrl.adaptive_tol {
        None => drive_fixed(&rhs, &mut y, t_end, ctrl.step, &mut on_step)?,
        Some(tol) => drive_adaptive(&rhs, &mut y, t_end, ctrl.step, tol, &mut on_step)?,
    };
    traj.terminal = terminal;
    Ok(traj)
}

/// A candidate seeding and the total spread it produces.
#[derive(Debug, Clone, Serialize)]
pub struct AllocationCell<T> {
    pub allocation: Vec<T>,
    pub total_spread: T,
}

/// Output of [`optimize_seed`]: the best cell plus the whole value surface.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResult<T> {
    pub best: AllocationCell<T>,
    pub surface: Vec<AllocationCell<T>>,
}

/// Exhaustive grid search for the seed allocation maximizing the total
/// terminal spread under the budget `sum_i d_i(0) = d0_total`.
///
/// The grid places `resolution` points along each of the M-1 free
/// dimensions; the last community absorbs the remainder, and cells whose
/// remainder falls outside [0, n_M] are skipped.
pub fn optimize_seed<T: Real>(
    net: &CommunityNetwork<T>,
    d0_total: T,
    resolution: usize,
    t_end: T,
    ctrl: &StepControl<T>,
) -> Result<OptimizeResult<T>> {
    let total_size = net.sizes.iter().fold(T::zero(), |acc, &s| acc + s);
    if d0_total > total_size + real(1e-12) {
        return Err(HiltError::InvalidParameter(format!(
            "budget {} exceeds the total population fraction {}",
            to_f64(d0_total),
            to_f64(total_size)
        )));
    }
    if !(d0_total > T::zero()) {
        return Err(HiltError::InvalidParameter(
            "budget must be positive".into(),
        ));
    }
    if resolution < 2 {
        return Err(HiltError::InvalidParameter(
            "grid needs at least 2 points per dimension".into(),
        ));
    }

    let mut allocations = Vec::new();
    let mut partial = vec![T::zero(); net.len()];
    enumerate_allocations(net, d0_total, resolution, 0, &mut partial, &mut allocations);
    if allocations.is_empty() {
        return Err(HiltError::NoSolution(
            "no feasible allocation on the grid".into(),
        ));
    }

    let surface: Vec<AllocationCell<T>> = allocations
        .into_par_iter()
        .map(|alloc| {
            let traj = integrate_multiclass(net, &alloc, t_end, ctrl)?;
            Ok(AllocationCell {
                allocation: alloc,
                total_spread: traj.total_final_active(),
            })
        })
        .collect::<Result<_>>()?;

    let best = surface
        .iter()
        .max_by(|a, b| {
            a.total_spread
                .partial_cmp(&b.total_spread)
                .expect("spreads are finite")
        })
        .expect("surface is nonempty")
        .clone();
    Ok(OptimizeResult { best, surface })
}

fn enumerate_allocations<T: Real>(
    net: &CommunityNetwork<T>,
    remaining: T,
    resolution: usize,
    dim: usize,
    partial: &mut Vec<T>,
    out: &mut Vec<Vec<T>>,
) {
    let m = net.len();
    if dim == m - 1 {
        // the last community takes the remainder exactly, so the budget
        // constraint holds to the last bit
        if remaining >= -real::<T>(1e-12) && remaining <= net.sizes[dim] + real(1e-12) {
            partial[dim] = remaining.max(T::zero()).min(net.sizes[dim]);
            out.push(partial.clone());
        }
        return;
    }
    let hi = net.sizes[dim].min(remaining);
    for k in 0..resolution {
        let frac = real::<T>(k as f64 / (resolution - 1) as f64);
        let d = hi * frac;
        partial[dim] = d;
        enumerate_allocations(net, remaining - d, resolution, dim + 1, partial, out);
    }
}
