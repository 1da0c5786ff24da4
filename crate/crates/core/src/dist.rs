//! Threshold distributions and their hazard rates.
//!
//! A node's threshold is the cumulative influence it must receive before it
//! activates. The distribution enters the fluid dynamics only through its
//! hazard rate h(x) = f(x) / (1 - F(x)), so every distribution here exposes
//! `pdf`, `cdf` and `hazard`, plus a clamped `hazard_regularized` for use
//! inside integrators (several hazards are singular at the ends of the
//! support: uniform at x -> 1, Weibull/log-logistic with shape < 1 at x -> 0).

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{HiltError, Result};
use crate::scalar::{real, to_f64, Real};

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied distribution given by its density and cumulative function.
///
/// The hazard is always computed as `pdf / (1 - cdf)` from the supplied pair,
/// so the hazard identity holds by construction; an inconsistent third
/// function cannot be injected. Sampling requires an explicit inverse cdf.
#[derive(Clone)]
pub struct CustomDist<T: Real> {
    pdf: RealFn<T>,
    cdf: RealFn<T>,
    inverse_cdf: Option<RealFn<T>>,
    support_upper: T,
}

impl<T: Real> fmt::Debug for CustomDist<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDist")
            .field("support_upper", &self.support_upper)
            .field("has_inverse_cdf", &self.inverse_cdf.is_some())
            .finish()
    }
}

/// Threshold distribution on `x >= 0`.
#[derive(Debug, Clone)]
pub enum ThresholdDist<T: Real> {
    /// Uniform on [0, 1]; the classic linear-threshold choice.
    Uniform01,
    /// Exponential with the given rate; constant hazard.
    Exponential { rate: T },
    /// Weibull with scale and shape; hazard decreasing (shape < 1),
    /// constant (shape = 1) or increasing (shape > 1).
    Weibull { scale: T, shape: T },
    /// Log-logistic with scale and shape; non-monotone hazard for shape > 1.
    LogLogistic { scale: T, shape: T },
    /// User-supplied pdf/cdf pair.
    Custom(CustomDist<T>),
}

impl<T: Real> ThresholdDist<T> {
    pub fn uniform01() -> Self {
        ThresholdDist::Uniform01
    }

    pub fn exponential(rate: T) -> Result<Self> {
        positive("rate", rate)?;
        Ok(ThresholdDist::Exponential { rate })
    }

    pub fn weibull(scale: T, shape: T) -> Result<Self> {
        positive("scale", scale)?;
        positive("shape", shape)?;
        Ok(ThresholdDist::Weibull { scale, shape })
    }

    pub fn loglogistic(scale: T, shape: T) -> Result<Self> {
        positive("scale", scale)?;
        positive("shape", shape)?;
        Ok(ThresholdDist::LogLogistic { scale, shape })
    }

    /// Builds a custom distribution from a pdf/cdf pair.
    ///
    /// `support_upper` is the least x with F(x) = 1 (`T::infinity()` for
    /// unbounded support). The pair is spot-checked at construction:
    /// F(0) must be 0 and F must be nondecreasing on a coarse grid.
    pub fn custom(
        pdf: impl Fn(T) -> T + Send + Sync + 'static,
        cdf: impl Fn(T) -> T + Send + Sync + 'static,
        support_upper: T,
    ) -> Result<Self> {
        Self::custom_inner(Arc::new(pdf), Arc::new(cdf), None, support_upper)
    }

    /// As [`ThresholdDist::custom`], with an inverse cdf enabling sampling.
    pub fn custom_with_inverse(
        pdf: impl Fn(T) -> T + Send + Sync + 'static,
        cdf: impl Fn(T) -> T + Send + Sync + 'static,
        inverse_cdf: impl Fn(T) -> T + Send + Sync + 'static,
        support_upper: T,
    ) -> Result<Self> {
        Self::custom_inner(
            Arc::new(pdf),
            Arc::new(cdf),
            Some(Arc::new(inverse_cdf)),
            support_upper,
        )
    }

    fn custom_inner(
        pdf: RealFn<T>,
        cdf: RealFn<T>,
        inverse_cdf: Option<RealFn<T>>,
        support_upper: T,
    ) -> Result<Self> {
        if !(support_upper > T::zero()) {
            return Err(HiltError::InvalidParameter(
                "custom support_upper must be positive".into(),
            ));
        }
        if (cdf)(T::zero()).abs() > real(1e-12) {
            return Err(HiltError::InvalidParameter(
                "custom cdf must satisfy F(0) = 0".into(),
            ));
        }
        let probe_end = if support_upper.is_finite() {
            support_upper
        } else {
            real(100.0)
        };
        let mut prev = T::zero();
        for i in 1..=32 {
            let x = probe_end * real(i as f64 / 32.0);
            let fx = (cdf)(x);
            if fx < prev - real(1e-12) || fx > T::one() + real(1e-12) {
                return Err(HiltError::InvalidParameter(
                    "custom cdf must be nondecreasing with values in [0, 1]".into(),
                ));
            }
            prev = fx;
        }
        Ok(ThresholdDist::Custom(CustomDist {
            pdf,
            cdf,
            inverse_cdf,
            support_upper,
        }))
    }

    /// Least x with F(x) = 1; infinity for unbounded support.
    pub fn support_upper(&self) -> T {
        match self {
            ThresholdDist::Uniform01 => T::one(),
            ThresholdDist::Exponential { .. }
            | ThresholdDist::Weibull { .. }
            | ThresholdDist::LogLogistic { .. } => T::infinity(),
            ThresholdDist::Custom(c) => c.support_upper,
        }
    }

    /// Cumulative distribution F(x) for x >= 0.
    pub fn cdf(&self, x: T) -> Result<T> {
        nonneg(x)?;
        Ok(self.cdf_unchecked(x))
    }

    fn cdf_unchecked(&self, x: T) -> T {
        match self {
            ThresholdDist::Uniform01 => x.min(T::one()),
            ThresholdDist::Exponential { rate } => T::one() - (-*rate * x).exp(),
            ThresholdDist::Weibull { scale, shape } => {
                T::one() - (-(x / *scale).powf(*shape)).exp()
            }
            ThresholdDist::LogLogistic { scale, shape } => {
                let z = (x / *scale).powf(*shape);
                z / (T::one() + z)
            }
            ThresholdDist::Custom(c) => (c.cdf)(x),
        }
    }

    /// Probability density f(x) for x >= 0.
    pub fn pdf(&self, x: T) -> Result<T> {
        nonneg(x)?;
        Ok(match self {
            ThresholdDist::Uniform01 => {
                if x < T::one() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            ThresholdDist::Exponential { rate } => *rate * (-*rate * x).exp(),
            ThresholdDist::Weibull { scale, shape } => {
                let z = x / *scale;
                (*shape / *scale) * z.powf(*shape - T::one()) * (-z.powf(*shape)).exp()
            }
            ThresholdDist::LogLogistic { scale, shape } => {
                let z = (x / *scale).powf(*shape - T::one());
                let denom = T::one() + (x / *scale).powf(*shape);
                (*shape / *scale) * z / (denom * denom)
            }
            ThresholdDist::Custom(c) => (c.pdf)(x),
        })
    }

    /// Hazard rate h(x) = f(x) / (1 - F(x)).
    ///
    /// Errors with [`HiltError::HazardSingularity`] at or above a point where
    /// F(x) = 1 (x >= 1 for the uniform distribution). Integrators should use
    /// [`ThresholdDist::hazard_regularized`] instead.
    pub fn hazard(&self, x: T) -> Result<T> {
        nonneg(x)?;
        if x >= self.support_upper() {
            return Err(HiltError::HazardSingularity { x: to_f64(x) });
        }
        Ok(match self {
            ThresholdDist::Uniform01 => T::one() / (T::one() - x),
            ThresholdDist::Exponential { rate } => *rate,
            ThresholdDist::Weibull { scale, shape } => {
                (*shape / *scale) * (x / *scale).powf(*shape - T::one())
            }
            ThresholdDist::LogLogistic { scale, shape } => {
                let z = (x / *scale).powf(*shape);
                (*shape / *scale) * (x / *scale).powf(*shape - T::one()) / (T::one() + z)
            }
            ThresholdDist::Custom(c) => {
                let fx = (c.cdf)(x);
                if fx >= T::one() {
                    return Err(HiltError::HazardSingularity { x: to_f64(x) });
                }
                (c.pdf)(x) / (T::one() - fx)
            }
        })
    }

    /// Hazard evaluated at x clamped into
    /// `[eps_haz, support_upper - eps_haz]` (upper clamp only for finite
    /// support). Total function; equals `hazard(x)` whenever x already lies
    /// inside the clamped range. A custom cdf that saturates strictly inside
    /// its declared support evaluates to infinity there.
    pub fn hazard_regularized(&self, x: T, eps_haz: T) -> T {
        debug_assert!(eps_haz > T::zero());
        let upper = self.support_upper();
        let hi = if upper.is_finite() {
            upper - eps_haz
        } else {
            T::infinity()
        };
        let clamped = x.max(eps_haz).min(hi);
        self.hazard(clamped).unwrap_or_else(|_| T::infinity())
    }

    /// Quantile function F^{-1}(p) for p in [0, 1).
    ///
    /// Custom distributions must have been built with an inverse cdf.
    pub fn inverse_cdf(&self, p: T) -> Result<T> {
        if !(p >= T::zero() && p < T::one()) {
            return Err(HiltError::Domain(format!(
                "quantile argument must lie in [0, 1), got {}",
                to_f64(p)
            )));
        }
        match self {
            ThresholdDist::Uniform01 => Ok(p),
            ThresholdDist::Exponential { rate } => Ok(-(T::one() - p).ln() / *rate),
            ThresholdDist::Weibull { scale, shape } => {
                Ok(*scale * (-(T::one() - p).ln()).powf(T::one() / *shape))
            }
            ThresholdDist::LogLogistic { scale, shape } => {
                Ok(*scale * (p / (T::one() - p)).powf(T::one() / *shape))
            }
            ThresholdDist::Custom(c) => match &c.inverse_cdf {
                Some(q) => Ok(q(p)),
                None => Err(HiltError::InvalidParameter(
                    "custom distribution has no inverse cdf; sampling is unsupported".into(),
                )),
            },
        }
    }

    /// Draws one threshold by inverse-cdf sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<T> {
        let u: f64 = rng.gen();
        self.inverse_cdf(real(u))
    }

    /// Serializable summary of the distribution (for output provenance).
    pub fn descriptor(&self) -> DistDescriptor {
        match self {
            ThresholdDist::Uniform01 => DistDescriptor {
                kind: "uniform".into(),
                rate: None,
                scale: None,
                shape: None,
            },
            ThresholdDist::Exponential { rate } => DistDescriptor {
                kind: "exponential".into(),
                rate: Some(to_f64(*rate)),
                scale: None,
                shape: None,
            },
            ThresholdDist::Weibull { scale, shape } => DistDescriptor {
                kind: "weibull".into(),
                rate: None,
                scale: Some(to_f64(*scale)),
                shape: Some(to_f64(*shape)),
            },
            ThresholdDist::LogLogistic { scale, shape } => DistDescriptor {
                kind: "loglogistic".into(),
                rate: None,
                scale: Some(to_f64(*scale)),
                shape: Some(to_f64(*shape)),
            },
            ThresholdDist::Custom(_) => DistDescriptor {
                kind: "custom".into(),
                rate: None,
                scale: None,
                shape: None,
            },
        }
    }
}

/// Flat, serializable description of a distribution.
#[derive(Debug, Clone, Serialize)]
pub struct DistDescriptor {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
}

fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(HiltError::InvalidParameter(format!(
            "{name} must be strictly positive, got {}",
            to_f64(v)
        )))
    }
}

fn nonneg<T: Real>(x: T) -> Result<()> {
    if x >= T::zero() {
        Ok(())
    } else {
        Err(HiltError::Domain(format!(
            "threshold argument must be nonnegative, got {}",
            to_f64(x)
        )))
    }
}
