//! Fluid-limit dynamics.
//!
//! The large-population limit of the scaled cascade is the planar system
//!
//! ```text
//! db/dt = d
//! dd/dt = h(G b) * G * d * (1 - b - d) - d
//! ```
//!
//! where `G` is the total influence scale and `h` the hazard rate of the
//! threshold distribution. This module integrates that system, evaluates the
//! uniform-threshold closed form, computes terminal spreads and their
//! inverses, compares the exponential-threshold case against the classic SIR
//! epidemic, iterates the naive cdf fixed point, and locates the modes of the
//! infectious curve.

use crate::dist::ThresholdDist;
use crate::error::{HiltError, Result};
use crate::rk4::{drive_adaptive, drive_fixed, StepVerdict};
use crate::scalar::{real, to_f64, Real};
use crate::trajectory::{Route, Sample, Trajectory};

/// Snapshot of the fluid state; same layout as a trajectory sample.
pub type FluidState<T> = Sample<T>;

/// Default prominence floor for [`detect_modes`].
pub const DEFAULT_PROMINENCE: f64 = 1e-4;

/// Integrator controls.
///
/// The defaults (fixed step 1e-3, stop when d < 1e-10, hazard clamp 1e-12)
/// suit the bounded hazards exercised throughout; decreasing hazards with
/// shape < 1 are singular at b = 0 and need either a larger `eps_haz` or
/// `adaptive_tol` to survive the initial transient.
#[derive(Debug, Clone, Copy)]
pub struct StepControl<T> {
    /// Fixed step size (initial/maximum step in adaptive mode).
    pub step: T,
    /// Early-stop threshold: d below this declares the cascade terminal.
    pub d_stop: T,
    /// Clamp width for hazard evaluation near singular points.
    pub eps_haz: T,
    /// Allowed excursion outside the unit simplex before a step failure.
    pub simplex_tol: T,
    /// Enables step-doubling error control with this per-step tolerance.
    pub adaptive_tol: Option<T>,
}

impl<T: Real> Default for StepControl<T> {
    fn default() -> Self {
        StepControl {
            step: real(1e-3),
            d_stop: real(1e-10),
            eps_haz: real(1e-12),
            simplex_tol: real(1e-9),
            adaptive_tol: None,
        }
    }
}

fn check_common<T: Real>(dist: &ThresholdDist<T>, gamma: T, d0: T) -> Result<()> {
    if !(gamma >= T::zero() && gamma.is_finite()) {
        return Err(HiltError::InvalidParameter(format!(
            "influence scale must be finite and nonnegative, got {}",
            to_f64(gamma)
        )));
    }
    if !(d0 > T::zero() && d0 <= T::one()) {
        return Err(HiltError::InvalidParameter(format!(
            "initial infectious fraction must lie in (0, 1], got {}",
            to_f64(d0)
        )));
    }
    if matches!(dist, ThresholdDist::Uniform01) && gamma > T::one() {
        return Err(HiltError::InvalidParameter(format!(
            "uniform thresholds require influence scale <= 1, got {}",
            to_f64(gamma)
        )));
    }
    Ok(())
}

/// Integrates the fluid system from (b, d)(0) = (0, d0) up to `t_end`.
///
/// Stops early (with the terminal flag set) once d drops below
/// `ctrl.d_stop`. A state leaving the unit simplex beyond
/// `ctrl.simplex_tol` aborts with [`HiltError::StepFailure`], the signal
/// that the step is too coarse for the hazard at hand.
pub fn integrate<T: Real>(
    dist: &ThresholdDist<T>,
    gamma: T,
    d0: T,
    t_end: T,
    ctrl: &StepControl<T>,
) -> Result<Trajectory<T>> {
    check_common(dist, gamma, d0)?;
    if !(t_end > T::zero()) {
        return Err(HiltError::InvalidParameter(
            "integration horizon must be positive".into(),
        ));
    }
    let eps = ctrl.eps_haz;
    let rhs = move |_t: T, y: &[T], dy: &mut [T]| {
        let (b, d) = (y[0], y[1]);
        let hz = dist.hazard_regularized(gamma * b, eps);
        dy[0] = d;
        dy[1] = hz * gamma * d * (T::one() - b - d) - d;
    };
    let mut traj = integrate_system(&rhs, &[T::zero(), d0], t_end, ctrl, |y| (y[0], y[1]))?;
    traj.route = Route::Ode;
    Ok(traj)
}

/// Integrates a slice-shaped system, recording `(b, d) = project(y)` at every
/// accepted step. Shared by the planar system and the SIR comparator.
pub(crate) fn integrate_system<T, F, P>(
    rhs: &F,
    y0: &[T],
    t_end: T,
    ctrl: &StepControl<T>,
    project: P,
) -> Result<Trajectory<T>>
where
    T: Real,
    F: Fn(T, &[T], &mut [T]),
    P: Fn(&[T]) -> (T, T),
{
    if !(ctrl.step > T::zero()) {
        return Err(HiltError::InvalidParameter(
            "step size must be positive".into(),
        ));
    }
    let mut y = y0.to_vec();
    let mut traj = Trajectory::new(Route::Ode);
    let (b0, d0) = project(&y);
    traj.push(T::zero(), b0, d0);
    if d0 < ctrl.d_stop {
        traj.terminal = true;
        return Ok(traj);
    }
    let simplex_tol = ctrl.simplex_tol;
    let d_stop = ctrl.d_stop;
    let mut on_step = |t: T, y: &[T]| {
        let (b, d) = project(y);
        if !(b >= -simplex_tol && d >= -simplex_tol && b + d <= T::one() + simplex_tol) {
            return Err(HiltError::StepFailure {
                t: to_f64(t),
                b: to_f64(b),
                d: to_f64(d),
            });
        }
        traj.push(t, b, d);
        Ok(if d < d_stop {
            StepVerdict::Terminal
        } else {
            StepVerdict::Continue
        })
    };
    let terminal = match ctrl.adaptive_tol {
        None => drive_fixed(rhs, &mut y, t_end, ctrl.step, &mut on_step)?,
        Some(tol) => drive_adaptive(rhs, &mut y, t_end, ctrl.step, tol, &mut on_step)?,
    };
    traj.terminal = terminal;
    Ok(traj)
}

/// Closed-form solution of the fluid system for uniform thresholds:
/// with `r = 1 - G + G d0`,
///
/// ```text
/// b(t) = (d0 / r) (1 - e^{-rt}),   d(t) = d0 e^{-rt}
/// ```
#[derive(Debug, Clone, Copy)]
pub struct UniformClosedForm<T> {
    pub gamma: T,
    pub d0: T,
    pub r: T,
}

impl<T: Real> UniformClosedForm<T> {
    pub fn new(gamma: T, d0: T) -> Result<Self> {
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(HiltError::InvalidParameter(format!(
                "closed form requires influence scale in [0, 1], got {}",
                to_f64(gamma)
            )));
        }
        if !(d0 > T::zero() && d0 <= T::one()) {
            return Err(HiltError::InvalidParameter(format!(
                "initial infectious fraction must lie in (0, 1], got {}",
                to_f64(d0)
            )));
        }
        let r = T::one() - gamma + gamma * d0;
        Ok(UniformClosedForm { gamma, d0, r })
    }

    pub fn state_at(&self, t: T) -> Result<FluidState<T>> {
        if t < T::zero() {
            return Err(HiltError::Domain(format!(
                "time must be nonnegative, got {}",
                to_f64(t)
            )));
        }
        let decay = (-self.r * t).exp();
        Ok(Sample {
            t,
            b: self.d0 / self.r * (T::one() - decay),
            d: self.d0 * decay,
        })
    }

    /// Active fraction a(t) = b(t) + d(t) = d0 (1/r - (1/r - 1) e^{-rt}).
    pub fn active_at(&self, t: T) -> Result<T> {
        let s = self.state_at(t)?;
        Ok(s.b + s.d)
    }

    /// Limit of b(t) as t grows: d0 / r.
    pub fn terminal(&self) -> T {
        self.d0 / self.r
    }

    /// Evaluates the closed form on a uniform grid.
    pub fn trajectory(&self, t_end: T, dt: T) -> Result<Trajectory<T>> {
        if !(t_end > T::zero() && dt > T::zero()) {
            return Err(HiltError::InvalidParameter(
                "horizon and sampling interval must be positive".into(),
            ));
        }
        let mut traj = Trajectory::new(Route::ClosedForm);
        let mut k = 0u64;
        loop {
            let t = real::<T>(k as f64) * dt;
            let s = self.state_at(t.min(t_end))?;
            traj.push(s.t, s.b, s.d);
            if t >= t_end {
                break;
            }
            k += 1;
        }
        traj.terminal = true;
        Ok(traj)
    }
}

/// Closed-form fluid state at time t under uniform thresholds.
pub fn uniform_closed_form<T: Real>(gamma: T, d0: T, t: T) -> Result<FluidState<T>> {
    UniformClosedForm::new(gamma, d0)?.state_at(t)
}

/// Final active fraction d0 / r for uniform thresholds.
pub fn terminal_spread<T: Real>(gamma: T, d0: T) -> Result<T> {
    Ok(UniformClosedForm::new(gamma, d0)?.terminal())
}

/// Seed fraction that yields the requested terminal spread:
/// d0 = b_inf (1 - G) / (1 - b_inf G). Inverse of [`terminal_spread`].
pub fn required_seed<T: Real>(gamma: T, b_inf: T) -> Result<T> {
    if !(b_inf > T::zero() && b_inf <= T::one()) {
        return Err(HiltError::InvalidParameter(format!(
            "target terminal spread must lie in (0, 1], got {}",
            to_f64(b_inf)
        )));
    }
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(HiltError::InvalidParameter(format!(
            "influence scale must lie in [0, 1], got {}",
            to_f64(gamma)
        )));
    }
    if gamma == T::one() {
        // at full influence scale the terminal spread is 1 for every positive
        // seed; no finite seed produces b_inf < 1 and every seed produces 1
        return Err(HiltError::NoSolution(
            "at influence scale 1 the terminal spread is 1 for any positive seed".into(),
        ));
    }
    Ok(b_inf * (T::one() - gamma) / (T::one() - b_inf * gamma))
}

/// Result of the exponential-threshold vs SIR comparison.
#[derive(Debug, Clone)]
pub struct SirComparison<T> {
    pub hilt: Trajectory<T>,
    pub sir: Trajectory<T>,
    pub sup_distance: T,
}

/// Integrates the classic SIR system (s, i, r) with the given infection rate
/// and unit recovery rate from (1 - d0, d0, 0), reporting (b, d) = (r, i).
pub fn integrate_sir<T: Real>(
    infection_rate: T,
    d0: T,
    t_end: T,
    ctrl: &StepControl<T>,
) -> Result<Trajectory<T>> {
    if !(infection_rate >= T::zero()) {
        return Err(HiltError::InvalidParameter(
            "infection rate must be nonnegative".into(),
        ));
    }
    if !(d0 > T::zero() && d0 <= T::one()) {
        return Err(HiltError::InvalidParameter(
            "initial infectious fraction must lie in (0, 1]".into(),
        ));
    }
    let rhs = move |_t: T, y: &[T], dy: &mut [T]| {
        let (s, i) = (y[0], y[1]);
        dy[0] = -infection_rate * s * i;
        dy[1] = infection_rate * s * i - i;
        dy[2] = i;
    };
    integrate_system(
        &rhs,
        &[T::one() - d0, d0, T::zero()],
        t_end,
        ctrl,
        |y| (y[2], y[1]),
    )
}

/// Integrates the exponential-threshold fluid system and the SIR epidemic
/// with infection rate `rate * gamma` and recovery rate 1 from matching
/// initial conditions; the two right-hand sides are algebraically identical,
/// so the sup distance measures integrator consistency only.
pub fn sir_comparator<T: Real>(
    rate: T,
    gamma: T,
    d0: T,
    t_end: T,
    ctrl: &StepControl<T>,
) -> Result<SirComparison<T>> {
    let dist = ThresholdDist::exponential(rate)?;
    let hilt = integrate(&dist, gamma, d0, t_end, ctrl)?;
    let sir = integrate_sir(rate * gamma, d0, t_end, ctrl)?;
    let times: Vec<T> = hilt.times().collect();
    let sup = crate::trajectory::sup_distance_linear(&hilt, &sir, &times);
    Ok(SirComparison {
        hilt,
        sir,
        sup_distance: sup,
    })
}

/// Iterates the naive cdf fixed point r <- F(r) from r0.
///
/// This is the baseline recurrence that resamples thresholds every step; for
/// uniform thresholds every point is fixed, so it predicts no spread at all.
pub fn granovetter_fixed_point<T: Real>(
    dist: &ThresholdDist<T>,
    r0: T,
    max_iter: usize,
    tol: T,
) -> Result<T> {
    if !(r0 >= T::zero() && r0 <= T::one()) {
        return Err(HiltError::InvalidParameter(format!(
            "starting point must lie in [0, 1], got {}",
            to_f64(r0)
        )));
    }
    let mut r = r0;
    for _ in 0..max_iter {
        let next = dist.cdf(r)?;
        if (next - r).abs() < tol {
            return Ok(next);
        }
        r = next;
    }
    Err(HiltError::NonConvergence {
        last: to_f64(r),
        iterations: max_iter,
    })
}

/// Times of the strict interior local maxima of d(t), filtered by a
/// prominence floor that suppresses integrator noise.
///
/// Prominence of a peak is its height above the higher of the two valley
/// floors separating it from taller terrain (or from the series ends).
pub fn detect_modes<T: Real>(traj: &Trajectory<T>, prominence_floor: T) -> Result<Vec<T>> {
    let n = traj.samples.len();
    if n < 3 {
        return Err(HiltError::TrajectoryTooShort { need: 3, got: n });
    }
    let d: Vec<T> = traj.samples.iter().map(|s| s.d).collect();
    let mut modes = Vec::new();
    for i in 1..n - 1 {
        if !(d[i] > d[i - 1] && d[i] > d[i + 1]) {
            continue;
        }
        let mut left_floor = d[i];
        let mut j = i;
        while j > 0 && d[j - 1] <= d[i] {
            j -= 1;
            left_floor = left_floor.min(d[j]);
        }
        let mut right_floor = d[i];
        let mut j = i;
        while j + 1 < n && d[j + 1] <= d[i] {
            j += 1;
            right_floor = right_floor.min(d[j]);
        }
        let prominence = d[i] - left_floor.max(right_floor);
        if prominence >= prominence_floor {
            modes.push(traj.samples[i].t);
        }
    }
    Ok(modes)
}
