//! Stochastic simulation of the cascade on the complete graph.
//!
//! The chain never materializes individual thresholds: conditioned on b
//! exhausted and d infectious nodes, each still-inactive node activates
//! independently with probability
//!
//! ```text
//! p = [F(g (b+d)) - F(g b)] / [1 - F(g b)],   g = G / N
//! ```
//!
//! so one step is a single binomial draw. Two routes are provided: the exact
//! chain, where every infectious node exerts its influence in one step, and
//! the minislot-scaled chain, where each infectious node fires with
//! probability 1/N per slot of fluid duration 1/N (the scaling under which
//! the process converges to the fluid ODE).

use rand::{Rng, SeedableRng};
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::dist::ThresholdDist;
use crate::error::{HiltError, Result};
use crate::scalar::{real, to_f64, Real};
use crate::trajectory::{Route, Trajectory};

/// The reproducible generator used by every simulation.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Model configuration: population, influence scale, seeding, thresholds.
#[derive(Debug, Clone)]
pub struct HiltConfig<T: Real> {
    n: u64,
    gamma: T,
    d0: T,
    dist: ThresholdDist<T>,
}

impl<T: Real> HiltConfig<T> {
    /// `gamma` is the limiting influence scale G; the per-edge weight is G/N.
    /// Uniform thresholds require G <= 1 (the influence on a node may not
    /// exceed the largest possible threshold); unbounded-support
    /// distributions place no cap.
    pub fn new(n: u64, gamma: T, d0: T, dist: ThresholdDist<T>) -> Result<Self> {
        if n == 0 {
            return Err(HiltError::InvalidParameter(
                "population size must be positive".into(),
            ));
        }
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
        Ok(HiltConfig { n, gamma, d0, dist })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn d0(&self) -> T {
        self.d0
    }

    pub fn dist(&self) -> &ThresholdDist<T> {
        &self.dist
    }

    /// Initial seed count: round(d0 N), at least 1.
    pub fn seed_count(&self) -> u64 {
        let m = to_f64(self.d0 * real::<T>(self.n as f64)).round() as u64;
        m.clamp(1, self.n)
    }

    pub fn initial_state(&self) -> CascadeState {
        CascadeState {
            b: 0,
            d: self.seed_count(),
            k: 0,
        }
    }

    /// Influence g * count received from `count` exhausted nodes.
    fn influence(&self, count: u64) -> T {
        self.gamma * real::<T>(count as f64) / real::<T>(self.n as f64)
    }
}

/// Chain state: counts of exhausted-active and infectious nodes at step k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadeState {
    /// Active nodes that have exercised their influence.
    pub b: u64,
    /// Active nodes that have not yet exercised their influence.
    pub d: u64,
    /// Time index.
    pub k: u64,
}

impl CascadeState {
    pub fn active(&self) -> u64 {
        self.b + self.d
    }
}

/// Result of one chain step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub state: CascadeState,
    /// d = 0: the chain is absorbed.
    pub terminal: bool,
    /// The conditional law degenerated (F(g b) = 1 with inactive nodes left);
    /// everyone remaining was activated. Probability zero under a valid
    /// configuration, so it is surfaced as a diagnostic rather than an error.
    pub degenerate: bool,
}

fn draw_binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("binomial parameters checked above")
        .sample(rng)
}

/// Activation probability for inactive nodes when the received influence
/// rises from `x0` to `x1`; `None` flags the degenerate denominator.
fn conditional_activation<T: Real>(
    dist: &ThresholdDist<T>,
    x0: T,
    x1: T,
) -> Result<Option<f64>> {
    let f0 = dist.cdf(x0)?;
    let f1 = dist.cdf(x1)?;
    let denom = T::one() - f0;
    if denom <= T::zero() {
        return Ok(None);
    }
    let p = to_f64((f1 - f0) / denom);
    Ok(Some(p.clamp(0.0, 1.0)))
}

/// One step of the exact chain: all infectious nodes exert their influence,
/// newly activated nodes are drawn from Binomial(N - b - d, p).
///
/// A state with d = 0 is absorbing and is returned unchanged.
pub fn step_exact<T: Real>(
    state: CascadeState,
    cfg: &HiltConfig<T>,
    rng: &mut SimRng,
) -> Result<StepOutcome> {
    check_state(state, cfg)?;
    if state.d == 0 {
        return Ok(StepOutcome {
            state,
            terminal: true,
            degenerate: false,
        });
    }
    let inactive = cfg.n - state.b - state.d;
    let x0 = cfg.influence(state.b);
    let x1 = cfg.influence(state.b + state.d);
    let (p, degenerate) = match conditional_activation(&cfg.dist, x0, x1)? {
        Some(p) => (p, false),
        // all remaining thresholds are already exceeded; activate everyone
        None => (1.0, inactive > 0),
    };
    let newly = draw_binomial(rng, inactive, p);
    let next = CascadeState {
        b: state.b + state.d,
        d: newly,
        k: state.k + 1,
    };
    Ok(StepOutcome {
        state: next,
        terminal: next.d == 0,
        degenerate,
    })
}

/// One minislot of the scaled chain: each infectious node fires with
/// probability 1/N; the fired influence recruits new infectious nodes.
/// One call advances fluid time by 1/N.
pub fn step_scaled<T: Real>(
    state: CascadeState,
    cfg: &HiltConfig<T>,
    rng: &mut SimRng,
) -> Result<StepOutcome> {
    check_state(state, cfg)?;
    if state.d == 0 {
        return Ok(StepOutcome {
            state,
            terminal: true,
            degenerate: false,
        });
    }
    let inactive = cfg.n - state.b - state.d;
    let fired = draw_binomial(rng, state.d, 1.0 / cfg.n as f64);
    let x0 = cfg.influence(state.b);
    let x1 = cfg.influence(state.b + fired);
    let (q, degenerate) = match conditional_activation(&cfg.dist, x0, x1)? {
        Some(q) => (q, false),
        None => (1.0, inactive > 0),
    };
    let newly = draw_binomial(rng, inactive, q);
    let next = CascadeState {
        b: state.b + fired,
        d: state.d - fired + newly,
        k: state.k + 1,
    };
    Ok(StepOutcome {
        state: next,
        terminal: next.d == 0,
        degenerate,
    })
}

fn check_state<T: Real>(state: CascadeState, cfg: &HiltConfig<T>) -> Result<()> {
    if state.b + state.d > cfg.n {
        return Err(HiltError::InvalidParameter(format!(
            "state ({}, {}) exceeds population {}",
            state.b, state.d, cfg.n
        )));
    }
    Ok(())
}

/// Runs one cascade to absorption (d = 0) or `max_steps`, whichever first.
///
/// Trajectory timestamps are the step index k for the exact route and k/N
/// (fluid time) for the scaled route. A run cut off by `max_steps` is
/// returned with the terminal flag unset.
pub fn run_cascade<T: Real>(
    cfg: &HiltConfig<T>,
    route: Route,
    seed: u64,
    max_steps: u64,
) -> Result<Trajectory<T>> {
    if max_steps == 0 {
        return Err(HiltError::InvalidParameter(
            "max_steps must be positive".into(),
        ));
    }
    let step: fn(CascadeState, &HiltConfig<T>, &mut SimRng) -> Result<StepOutcome> = match route {
        Route::Exact => step_exact::<T>,
        Route::Scaled => step_scaled::<T>,
        _ => {
            return Err(HiltError::InvalidParameter(
                "simulation route must be exact or scaled".into(),
            ))
        }
    };
    let scale = real::<T>(cfg.n as f64);
    let timestamp = |k: u64| match route {
        Route::Exact => real::<T>(k as f64),
        _ => real::<T>(k as f64) / scale,
    };
    let mut rng = SimRng::seed_from_u64(seed);
    let mut state = cfg.initial_state();
    let mut traj = Trajectory::new(route);
    let push = |traj: &mut Trajectory<T>, s: CascadeState| {
        traj.push(
            timestamp(s.k),
            real::<T>(s.b as f64) / scale,
            real::<T>(s.d as f64) / scale,
        );
    };
    push(&mut traj, state);
    let mut degenerate_steps = 0u64;
    for _ in 0..max_steps {
        let out = step(state, cfg, &mut rng)?;
        if out.degenerate {
            degenerate_steps += 1;
        }
        state = out.state;
        push(&mut traj, state);
        if out.terminal {
            traj.terminal = true;
            break;
        }
    }
    if degenerate_steps > 0 {
        traj.warnings.push(format!(
            "degenerate activation law (F(g b) = 1 with inactive nodes left) on {degenerate_steps} step(s); check the configuration"
        ));
    }
    Ok(traj)
}

/// A replication ensemble with its pointwise mean and standard deviation on
/// the common time grid (runs that absorbed early are extended by their
/// final value, which is exact for these step-function paths).
#[derive(Debug, Clone)]
pub struct Ensemble<T> {
    pub runs: Vec<Trajectory<T>>,
    pub times: Vec<T>,
    pub mean_b: Vec<T>,
    pub mean_d: Vec<T>,
    pub std_b: Vec<T>,
    pub std_d: Vec<T>,
}

impl<T: Real> Ensemble<T> {
    /// Means repackaged as a trajectory (route tag of the underlying runs).
    pub fn mean_trajectory(&self) -> Trajectory<T> {
        let mut traj = Trajectory::new(self.runs[0].route);
        for i in 0..self.times.len() {
            traj.push(self.times[i], self.mean_b[i], self.mean_d[i]);
        }
        traj.terminal = self.runs.iter().all(|r| r.terminal);
        traj
    }
}

/// Derives the seed for run `run_index` from the base seed.
///
/// SplitMix64 finalizer applied to `base + (index+1) * golden-gamma`: a
/// splittable counter scheme, so run seeds are reproducible and independent
/// of scheduling.
pub fn run_seed(base_seed: u64, run_index: u64) -> u64 {
    let mut z = base_seed.wrapping_add(
        run_index
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `n_runs` independent cascades (in parallel) with per-run seeds
/// derived from `seed` via [`run_seed`].
pub fn ensemble<T: Real>(
    cfg: &HiltConfig<T>,
    route: Route,
    n_runs: u64,
    seed: u64,
    max_steps: u64,
) -> Result<Ensemble<T>> {
    if n_runs == 0 {
        return Err(HiltError::InvalidParameter(
            "ensemble needs at least one run".into(),
        ));
    }
    let runs: Vec<Trajectory<T>> = (0..n_runs)
        .into_par_iter()
        .map(|i| run_cascade(cfg, route, run_seed(seed, i), max_steps))
        .collect::<Result<_>>()?;

    let longest = runs
        .iter()
        .max_by_key(|r| r.len())
        .expect("at least one run");
    let times: Vec<T> = longest.times().collect();
    let n_f = real::<T>(n_runs as f64);
    let mut mean_b = Vec::with_capacity(times.len());
    let mut mean_d = Vec::with_capacity(times.len());
    let mut std_b = Vec::with_capacity(times.len());
    let mut std_d = Vec::with_capacity(times.len());
    for &t in &times {
        let mut sb = T::zero();
        let mut sd = T::zero();
        let mut sb2 = T::zero();
        let mut sd2 = T::zero();
        for run in &runs {
            let (b, d) = run.eval_hold(t);
            sb = sb + b;
            sd = sd + d;
            sb2 = sb2 + b * b;
            sd2 = sd2 + d * d;
        }
        let mb = sb / n_f;
        let md = sd / n_f;
        mean_b.push(mb);
        mean_d.push(md);
        if n_runs > 1 {
            let denom = n_f - T::one();
            std_b.push(((sb2 - n_f * mb * mb).max(T::zero()) / denom).sqrt());
            std_d.push(((sd2 - n_f * md * md).max(T::zero()) / denom).sqrt());
        } else {
            std_b.push(T::zero());
            std_d.push(T::zero());
        }
    }
    Ok(Ensemble {
        runs,
        times,
        mean_b,
        mean_d,
        std_b,
        std_d,
    })
}

/// Enough steps for either route to absorb in practice: the exact chain
/// needs at most N+1 steps, the scaled chain gets 500 fluid time units.
pub fn auto_max_steps(route: Route, n: u64) -> u64 {
    match route {
        Route::Exact => n + 2,
        _ => 500 * n,
    }
}

/// One row of a fluid-convergence report.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ConvergenceRow<T> {
    pub n: u64,
    /// Sup-norm distance between the ensemble mean of the scaled chain and
    /// the fluid ODE over the ensemble's time grid.
    pub sup_dist: T,
}

/// Fluid-convergence report across population sizes.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceReport<T> {
    pub rows: Vec<ConvergenceRow<T>>,
    /// True when the distances are nonincreasing in N up to Monte Carlo
    /// noise (10% relative plus 0.005 absolute slack).
    pub nonincreasing: bool,
}

/// Measures how the ensemble mean of the scaled chain approaches the fluid
/// ODE as N grows: for each N, `runs` replications are averaged and compared
/// against the integrated fluid system on the ensemble's own time grid.
pub fn fluid_convergence<T: Real>(
    dist: &ThresholdDist<T>,
    gamma: T,
    d0: T,
    n_list: &[u64],
    runs: u64,
    seed: u64,
    ctrl: &crate::ode::StepControl<T>,
) -> Result<ConvergenceReport<T>> {
    if n_list.is_empty() {
        return Err(HiltError::InvalidParameter(
            "need at least one population size".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let cfg = HiltConfig::new(n, gamma, d0, dist.clone())?;
        let ens = ensemble(&cfg, Route::Scaled, runs, seed, auto_max_steps(Route::Scaled, n))?;
        let mean = ens.mean_trajectory();
        let t_end = mean.last().expect("nonempty ensemble grid").t.max(T::one());
        let ode = crate::ode::integrate(dist, gamma, d0, t_end, ctrl)?;
        let times: Vec<T> = mean.times().collect();
        let sup = crate::trajectory::sup_distance_hold_vs_linear(&mean, &ode, &times);
        rows.push(ConvergenceRow { n, sup_dist: sup });
    }
    let slack_rel = real::<T>(1.1);
    let slack_abs = real::<T>(0.005);
    let nonincreasing = rows
        .windows(2)
        .all(|w| w[1].sup_dist <= w[0].sup_dist * slack_rel + slack_abs);
    Ok(ConvergenceReport {
        rows,
        nonincreasing,
    })
}
