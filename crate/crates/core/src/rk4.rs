//! Classic 4th-order Runge-Kutta stepping and the shared integration loops.

use crate::error::Result;
use crate::scalar::{real, Real};

pub(crate) struct Rk4Workspace<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Real> Rk4Workspace<T> {
    pub(crate) fn new(dim: usize) -> Self {
        Rk4Workspace {
            k1: vec![T::zero(); dim],
            k2: vec![T::zero(); dim],
            k3: vec![T::zero(); dim],
            k4: vec![T::zero(); dim],
            tmp: vec![T::zero(); dim],
        }
    }
}

/// Advances `y` in place by one classic 4th-order step of size `h`.
///
/// `f(t, y, dy)` writes the derivative into `dy`.
pub(crate) fn rk4_step<T, F>(f: &F, t: T, y: &mut [T], h: T, ws: &mut Rk4Workspace<T>)
where
    T: Real,
    F: Fn(T, &[T], &mut [T]),
{
    let half = real::<T>(0.5);
    let two = real::<T>(2.0);
    let sixth = h / real::<T>(6.0);

    f(t, y, &mut ws.k1);
    for i in 0..y.len() {
        ws.tmp[i] = y[i] + half * h * ws.k1[i];
    }
    f(t + half * h, &ws.tmp, &mut ws.k2);
    for i in 0..y.len() {
        ws.tmp[i] = y[i] + half * h * ws.k2[i];
    }
    f(t + half * h, &ws.tmp, &mut ws.k3);
    for i in 0..y.len() {
        ws.tmp[i] = y[i] + h * ws.k3[i];
    }
    f(t + h, &ws.tmp, &mut ws.k4);
    for i in 0..y.len() {
        y[i] = y[i] + sixth * (ws.k1[i] + two * ws.k2[i] + two * ws.k3[i] + ws.k4[i]);
    }
}

/// What the per-step callback decided.
pub(crate) enum StepVerdict {
    Continue,
    /// The trajectory reached its absorbing regime; stop integrating.
    Terminal,
}

/// Fixed-step loop from t = 0 to `t_end`. `on_step(t, y)` runs after every
/// accepted step (validity checks, recording, early stop). Returns the
/// terminal flag.
pub(crate) fn drive_fixed<T, F, S>(
    rhs: &F,
    y: &mut [T],
    t_end: T,
    h: T,
    on_step: &mut S,
) -> Result<bool>
where
    T: Real,
    F: Fn(T, &[T], &mut [T]),
    S: FnMut(T, &[T]) -> Result<StepVerdict>,
{
    let mut ws = Rk4Workspace::new(y.len());
    let mut full_steps = 0u64;
    let mut t = T::zero();
    loop {
        let remaining = t_end - t;
        if remaining <= h * real(1e-12) {
            return Ok(false);
        }
        let h_eff = h.min(remaining);
        rk4_step(rhs, t, y, h_eff, &mut ws);
        if h_eff == h {
            // recompute t from the step count so 50k steps do not drift
            full_steps += 1;
            t = real::<T>(full_steps as f64) * h;
        } else {
            t = t_end;
        }
        if let StepVerdict::Terminal = on_step(t, y)? {
            return Ok(true);
        }
    }
}

/// Step-doubling adaptive loop: one full step is compared against two half
/// steps; their disagreement over 15 estimates the local error of the
/// order-4 scheme. `h_init` is also the maximum step.
pub(crate) fn drive_adaptive<T, F, S>(
    rhs: &F,
    y: &mut [T],
    t_end: T,
    h_init: T,
    tol: T,
    on_step: &mut S,
) -> Result<bool>
where
    T: Real,
    F: Fn(T, &[T], &mut [T]),
    S: FnMut(T, &[T]) -> Result<StepVerdict>,
{
    let h_max = h_init;
    let h_min = h_init * real(1e-9);
    let half = real::<T>(0.5);
    let mut ws = Rk4Workspace::new(y.len());
    let mut full = vec![T::zero(); y.len()];
    let mut halved = vec![T::zero(); y.len()];
    let mut t = T::zero();
    let mut h = h_max;
    while t_end - t > h_max * real(1e-12) {
        let h_eff = h.min(t_end - t);
        full.copy_from_slice(y);
        rk4_step(rhs, t, &mut full, h_eff, &mut ws);
        halved.copy_from_slice(y);
        rk4_step(rhs, t, &mut halved, half * h_eff, &mut ws);
        rk4_step(rhs, t + half * h_eff, &mut halved, half * h_eff, &mut ws);
        let mut err = T::zero();
        for i in 0..y.len() {
            err = err.max((halved[i] - full[i]).abs());
        }
        err = err / real(15.0);
        let accepted = err <= tol || h_eff <= h_min;
        if accepted {
            t = t + h_eff;
            y.copy_from_slice(&halved);
            if let StepVerdict::Terminal = on_step(t, y)? {
                return Ok(true);
            }
        }
        // standard order-5 growth/shrink rule, clamped to [h_min, h_max]
        let ratio = if err > T::zero() {
            (tol / err).powf(real(0.2))
        } else {
            real(2.0)
        };
        h = (h_eff * real::<T>(0.9) * ratio)
            .min(real::<T>(2.0) * h_eff)
            .max(real::<T>(0.1) * h_eff)
            .min(h_max)
            .max(h_min);
    }
    Ok(false)
}
