//! Exact expected terminal spread of the discrete uniform-threshold cascade.
//!
//! For N nodes, per-edge weight g and m seeds, the expected terminal set size
//! admits the nested form
//!
//! ```text
//! h(m) = m [ 1 + (N-m) g [ 1 + (N-m-1) g [ 1 + ... ] ] ]
//! ```
//!
//! equivalently the backward recursion h(k) = k [ 1 + g (N-k) h(k+1)/(k+1) ]
//! with h(N) = N. Evaluated innermost-out it is O(N-m) and exact up to
//! floating point. As N grows with g = G/N, h(round(d0 N))/N converges to the
//! fluid terminal spread d0 / (1 - (1-d0) G) for G < 1; at G = 1 a finite-N
//! gap persists.

use serde::Serialize;

use crate::error::{HiltError, Result};
use crate::scalar::{real, to_f64, Real};

/// Expected terminal set sizes h(m) for every seed count m = 0..=N.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectedSpreadTable<T> {
    pub n: u64,
    /// Per-edge influence weight g (unscaled; validity needs g (N-1) <= 1).
    pub gamma_edge: T,
    /// values[m] = h(m).
    pub values: Vec<T>,
}

fn check_edge_weight<T: Real>(n: u64, gamma_edge: T) -> Result<()> {
    if n == 0 {
        return Err(HiltError::InvalidParameter(
            "population size must be positive".into(),
        ));
    }
    if gamma_edge < T::zero() {
        return Err(HiltError::InvalidParameter(
            "edge weight must be nonnegative".into(),
        ));
    }
    // uniform thresholds cap the total influence on a node at 1
    if gamma_edge * real((n - 1) as f64) > T::one() + real(1e-12) {
        return Err(HiltError::Domain(format!(
            "edge weight {} violates g (N-1) <= 1 for N = {}",
            to_f64(gamma_edge),
            n
        )));
    }
    Ok(())
}

/// Expected terminal set size from m seeds, exact up to floating point.
pub fn expected_spread<T: Real>(n: u64, gamma_edge: T, m: u64) -> Result<T> {
    check_edge_weight(n, gamma_edge)?;
    if m > n {
        return Err(HiltError::InvalidParameter(format!(
            "seed count {m} exceeds population {n}"
        )));
    }
    // u_k = h(k)/k evaluated from the innermost bracket (k = N) outward
    let mut u = T::one();
    let mut k = n;
    while k > m {
        k -= 1;
        u = T::one() + gamma_edge * real((n - k) as f64) * u;
    }
    Ok(real::<T>(m as f64) * u)
}

/// h(m) for all m in one backward pass.
pub fn spread_table<T: Real>(n: u64, gamma_edge: T) -> Result<ExpectedSpreadTable<T>> {
    check_edge_weight(n, gamma_edge)?;
    let mut values = vec![T::zero(); (n + 1) as usize];
    let mut u = T::one();
    values[n as usize] = real(n as f64);
    for k in (0..n).rev() {
        u = T::one() + gamma_edge * real((n - k) as f64) * u;
        values[k as usize] = real::<T>(k as f64) * u;
    }
    Ok(ExpectedSpreadTable {
        n,
        gamma_edge,
        values,
    })
}

/// One row of a fluid-limit convergence report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitRow<T> {
    pub n: u64,
    /// h(round(d0 N)) / N.
    pub spread_fraction: T,
    /// Fluid terminal spread d0 / (1 - (1-d0) G).
    pub b_inf: T,
    pub rel_error: T,
}

/// Evaluates h(round(d0 N))/N with g = G/N for each N and reports the
/// relative error against the fluid terminal spread.
pub fn limit_check<T: Real>(gamma: T, d0: T, n_list: &[u64]) -> Result<Vec<LimitRow<T>>> {
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(HiltError::InvalidParameter(
            "influence scale must lie in [0, 1]".into(),
        ));
    }
    if !(d0 > T::zero() && d0 <= T::one()) {
        return Err(HiltError::InvalidParameter(
            "seed fraction must lie in (0, 1]".into(),
        ));
    }
    let b_inf = d0 / (T::one() - (T::one() - d0) * gamma);
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let m = to_f64(d0 * real::<T>(n as f64)).round() as u64;
        let h = expected_spread(n, gamma / real(n as f64), m.min(n))?;
        let frac = h / real(n as f64);
        rows.push(LimitRow {
            n,
            spread_fraction: frac,
            b_inf,
            rel_error: (frac - b_inf).abs() / b_inf,
        });
    }
    Ok(rows)
}
