//! Time series of cascade states, shared by the simulator and the integrators.

use serde::Serialize;

use crate::scalar::Real;

/// Which computational route produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Unscaled discrete-time chain; one step per time unit.
    Exact,
    /// Minislot-scaled chain; one step per 1/N of fluid time.
    Scaled,
    /// Fluid-limit ODE integration.
    Ode,
    /// Closed-form evaluation (uniform thresholds only).
    ClosedForm,
}

/// One `(t, b, d)` record: fractions of exhausted-active and infectious nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample<T> {
    pub t: T,
    pub b: T,
    pub d: T,
}

/// Ordered cascade time series.
///
/// Invariants: times strictly increasing, `b` nondecreasing, and every sample
/// satisfies `b, d >= 0` and `b + d <= 1` up to the producing route's
/// tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory<T> {
    pub route: Route,
    pub samples: Vec<Sample<T>>,
    /// True when the cascade reached its absorbing state (d = 0, or d below
    /// the integrator's stop threshold) rather than a step/horizon limit.
    pub terminal: bool,
    /// Diagnostics recorded along the way (e.g. degenerate-denominator steps).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(route: Route) -> Self {
        Trajectory {
            route,
            samples: Vec::new(),
            terminal: false,
            warnings: Vec::new(),
        }
    }

    pub fn push(&mut self, t: T, b: T, d: T) {
        debug_assert!(
            self.samples.last().is_none_or(|s| t > s.t),
            "times must be strictly increasing"
        );
        self.samples.push(Sample { t, b, d });
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&Sample<T>> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample<T>> {
        self.samples.last()
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Active fraction b + d at the end of the series. For a terminal
    /// trajectory this is the terminal spread (residual infectious mass is
    /// counted as active).
    pub fn final_active(&self) -> T {
        self.samples.last().map_or(T::zero(), |s| s.b + s.d)
    }

    /// Sample-and-hold evaluation: the value at the last sample with
    /// `sample.t <= t` (the first sample before the series starts).
    ///
    /// Exact semantics for chain trajectories, which are step functions.
    pub fn eval_hold(&self, t: T) -> (T, T) {
        assert!(!self.samples.is_empty(), "empty trajectory");
        let idx = self.samples.partition_point(|s| s.t <= t);
        let s = &self.samples[idx.saturating_sub(1)];
        (s.b, s.d)
    }

    /// Linear interpolation between bracketing samples, clamped at the ends.
    ///
    /// Suitable for densely sampled integrator output.
    pub fn eval_linear(&self, t: T) -> (T, T) {
        assert!(!self.samples.is_empty(), "empty trajectory");
        let n = self.samples.len();
        if t <= self.samples[0].t {
            return (self.samples[0].b, self.samples[0].d);
        }
        if t >= self.samples[n - 1].t {
            return (self.samples[n - 1].b, self.samples[n - 1].d);
        }
        // binary search for the bracketing pair
        let idx = self
            .samples
            .partition_point(|s| s.t <= t);
        let (lo, hi) = (&self.samples[idx - 1], &self.samples[idx]);
        let w = (t - lo.t) / (hi.t - lo.t);
        (lo.b + w * (hi.b - lo.b), lo.d + w * (hi.d - lo.d))
    }

    /// Checks the type invariants; used by tests.
    pub fn validate(&self, tol: T) -> bool {
        let mut ok = true;
        let mut prev_t = T::neg_infinity();
        let mut prev_b = T::neg_infinity();
        for s in &self.samples {
            ok &= s.t > prev_t;
            ok &= s.b >= prev_b - tol;
            ok &= s.b >= -tol && s.d >= -tol;
            ok &= s.b + s.d <= T::one() + tol;
            prev_t = s.t;
            prev_b = s.b;
        }
        ok
    }
}

/// Sup-norm distance between two trajectories over the given times, taking
/// the larger of the b- and d-component deviations at each time.
///
/// `a` is evaluated sample-and-hold (chain semantics), `b` linearly
/// (integrator semantics); pass the same trajectory type twice if both sides
/// share semantics.
pub fn sup_distance_hold_vs_linear<T: Real>(
    hold: &Trajectory<T>,
    linear: &Trajectory<T>,
    times: &[T],
) -> T {
    let mut worst = T::zero();
    for &t in times {
        let (hb, hd) = hold.eval_hold(t);
        let (lb, ld) = linear.eval_linear(t);
        worst = worst.max((hb - lb).abs()).max((hd - ld).abs());
    }
    worst
}

/// Sup-norm distance with linear interpolation on both sides.
pub fn sup_distance_linear<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>, times: &[T]) -> T {
    let mut worst = T::zero();
    for &t in times {
        let (ab, ad) = a.eval_linear(t);
        let (bb, bd) = b.eval_linear(t);
        worst = worst.max((ab - bb).abs()).max((ad - bd).abs());
    }
    worst
}
