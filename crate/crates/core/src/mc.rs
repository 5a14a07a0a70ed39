//! Monte Carlo estimators, an oracle independent of quadrature.
//!
//! Conditional laws are sampled exactly by inverse transform on the
//! conditioning window, so every draw is retained. Draws are generated in
//! batches; batch `i` uses its own ChaCha8 stream `i`, so the sample vector,
//! and hence every estimate, is the same for sequential and parallel runs.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::measures::{Measure, PastContext};
use crate::par::{self, Execution};

/// Recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64(seed), stream = batch index";

pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Draws per RNG stream.
    pub batch: usize,
    pub execution: Execution,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            n_samples: 1_000_000,
            seed: 42,
            batch: 65_536,
            execution: Execution::default(),
        }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                got: self.n_samples,
                required: MIN_SAMPLES,
            });
        }
        if self.batch == 0 {
            return Err(Error::InvalidParameter {
                name: "batch",
                value: 0.0,
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_effective: usize,
}

impl MCEstimate {
    /// `(estimate - reference) / std_error`; infinite when the estimate has
    /// zero spread but misses the reference.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Outcome of comparing a Monte Carlo estimate with a deterministic value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    /// Within 3 standard errors.
    Agree,
    /// Between 3 and 4 standard errors.
    Flagged,
    /// Beyond 4 standard errors.
    Disagree,
}

impl Agreement {
    pub fn classify(estimate: &MCEstimate, reference: f64) -> Self {
        let z = estimate.z_score(reference).abs();
        if z <= 3.0 {
            Agreement::Agree
        } else if z <= 4.0 {
            Agreement::Flagged
        } else {
            Agreement::Disagree
        }
    }

    pub fn passed(self) -> bool {
        self != Agreement::Disagree
    }
}

/// Conditioning window of the sampled law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Full,
    /// `X | X <= t`.
    Past(f64),
    /// `X | X > t`.
    Residual(f64),
}

/// Uniform on the open interval `(0, 1)` from the top 53 bits.
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Fills `n` values `g(x_i)` for exact draws `x_i` from `dist` restricted to
/// `window`, in a layout that does not depend on the execution mode.
fn conditional_draws<G>(dist: &dyn Distribution, window: Window, cfg: &MCConfig, g: G) -> Result<Vec<f64>>
where
    G: Fn(f64) -> f64 + Sync + Send,
{
    cfg.validate()?;
    let (offset, width) = match window {
        Window::Full => (0.0, 1.0),
        Window::Past(t) => (0.0, dist.cdf(t)),
        Window::Residual(t) => (dist.cdf(t), dist.sf(t)),
    };
    if !(width > 0.0) {
        return Err(Error::NullConditioning {
            t: match window {
                Window::Past(t) | Window::Residual(t) => t,
                Window::Full => f64::NAN,
            },
            probability: width,
            threshold: 0.0,
        });
    }
    let mut out = vec![0.0; cfg.n_samples];
    par::fill_chunks(cfg.execution, &mut out, cfg.batch, |chunk, slots| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chunk as u64);
        for slot in slots {
            let u = open_unit(&mut rng);
            *slot = g(dist.quantile(offset + u * width));
        }
    });
    Ok(out)
}

/// Sample mean with its standard error, and sample variance with the
/// standard error of the mean of squared deviations.
fn moments(values: &[f64]) -> Result<(MCEstimate, MCEstimate)> {
    let n = values.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n,
            required: MIN_SAMPLES,
        });
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("Monte Carlo draw produced {bad}")));
    }
    // Shifting by the first draw keeps constant samples exactly constant.
    let pivot = values[0];
    let nf = n as f64;
    let mean_d = values.iter().map(|v| v - pivot).sum::<f64>() / nf;
    let sq: Vec<f64> = values.iter().map(|v| (v - pivot - mean_d).powi(2)).collect();
    let ss: f64 = sq.iter().sum();
    let variance = ss / (nf - 1.0);
    let mean = MCEstimate {
        mean: pivot + mean_d,
        std_error: (variance / nf).sqrt(),
        n_effective: n,
    };
    let m2 = ss / nf;
    let spread = sq.iter().map(|s| (s - m2).powi(2)).sum::<f64>() / (nf - 1.0);
    let var = MCEstimate {
        mean: variance,
        std_error: (spread / nf).sqrt(),
        n_effective: n,
    };
    Ok((mean, var))
}

/// Mean and variance of `-ln f_W(X)` for `X` drawn from the law restricted
/// to `window`, `f_W` its conditional density.
pub fn mc_information_moments(
    dist: &dyn Distribution,
    window: Window,
    cfg: &MCConfig,
) -> Result<(MCEstimate, MCEstimate)> {
    let ln_p = match window {
        Window::Full => 0.0,
        Window::Past(t) => dist.cdf(t).ln(),
        Window::Residual(t) => dist.sf(t).ln(),
    };
    let info = conditional_draws(dist, window, cfg, |x| ln_p - dist.ln_pdf(x))?;
    moments(&info)
}

pub fn mc_past_entropy(ctx: &PastContext<'_>, cfg: &MCConfig) -> Result<MCEstimate> {
    Ok(mc_information_moments(ctx.dist(), Window::Past(ctx.t()), cfg)?.0)
}

pub fn mc_past_varentropy(ctx: &PastContext<'_>, cfg: &MCConfig) -> Result<MCEstimate> {
    Ok(mc_information_moments(ctx.dist(), Window::Past(ctx.t()), cfg)?.1)
}

/// Mean and variance of the inactivity time `t - X | X <= t`.
pub fn mc_inactivity_moments(ctx: &PastContext<'_>, cfg: &MCConfig) -> Result<(MCEstimate, MCEstimate)> {
    let t = ctx.t();
    let gaps = conditional_draws(ctx.dist(), Window::Past(t), cfg, |x| t - x)?;
    moments(&gaps)
}

/// Monte Carlo estimate of `measure` at `t`, for the measures that are
/// expectations under some conditional law.
pub fn mc_measure(measure: Measure, dist: &dyn Distribution, t: f64, cfg: &MCConfig) -> Result<MCEstimate> {
    let past = || PastContext::new(dist, t);
    match measure {
        Measure::Entropy => Ok(mc_information_moments(dist, Window::Full, cfg)?.0),
        Measure::Varentropy => Ok(mc_information_moments(dist, Window::Full, cfg)?.1),
        Measure::PastEntropy => mc_past_entropy(&past()?, cfg),
        Measure::PastVarentropy => mc_past_varentropy(&past()?, cfg),
        Measure::ResidualEntropy => Ok(mc_information_moments(dist, Window::Residual(t), cfg)?.0),
        Measure::ResidualVarentropy => {
            Ok(mc_information_moments(dist, Window::Residual(t), cfg)?.1)
        }
        Measure::MeanInactivityTime => Ok(mc_inactivity_moments(&past()?, cfg)?.0),
        Measure::VarianceInactivityTime => Ok(mc_inactivity_moments(&past()?, cfg)?.1),
        other => Err(Error::Domain(format!(
            "{} has no Monte Carlo estimator",
            other.name()
        ))),
    }
}

/// Kolmogorov distance between the empirical law of `max(X_1..X_m)` over
/// `cfg.n_samples` draws (each from `m` fresh base draws) and `F^m`.
pub fn parallel_system_ks(dist: &dyn Distribution, components: usize, cfg: &MCConfig) -> Result<f64> {
    cfg.validate()?;
    if components == 0 {
        return Err(Error::InvalidParameter {
            name: "components",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let mut maxima = vec![0.0; cfg.n_samples];
    par::fill_chunks(cfg.execution, &mut maxima, cfg.batch, |chunk, slots| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chunk as u64);
        for slot in slots {
            *slot = (0..components)
                .map(|_| dist.quantile(open_unit(&mut rng)))
                .fold(f64::NEG_INFINITY, f64::max);
        }
    });
    maxima.sort_by(f64::total_cmp);
    let n = maxima.len() as f64;
    let m = components as i32;
    Ok(maxima
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let g = dist.cdf(x).powi(m);
            (g - i as f64 / n).max((i + 1) as f64 / n - g)
        })
        .fold(0.0, f64::max))
}
