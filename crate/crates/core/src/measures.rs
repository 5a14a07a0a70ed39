//! Entropy-type and reliability functionals of lifetime distributions.
//!
//! Past quantities condition on `X <= t`, residual ones on `X >= t`. Every
//! integral of the form `int f (ln f)^k` is evaluated on `ln f` directly, so
//! points where the density underflows contribute exactly zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{ClosedForm, Distribution, Prhr};
use crate::error::{Error, Result};
use crate::quadrature::{differentiate, integrate, QuadratureConfig, QuadratureResult};

/// Past measures refuse inspection times with `F(t)` below this value.
pub const MIN_CONDITIONING_PROBABILITY: f64 = 1e-10;

/// Largest probability vector accepted by the discrete measures.
pub const MAX_DISCRETE_LEN: usize = 1_000_000;

/// Number of cells in the cached inner-integral grid of the variance
/// inactivity time.
const INNER_GRID_CELLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    GammaSubstitution,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::GammaSubstitution => "gamma_substitution",
        })
    }
}

/// A computed measure with its estimated numerical error.
///
/// `numerical_error` is zero exactly for closed-form values; numerical routes
/// report at least one ulp-scale rounding floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub value: f64,
    pub numerical_error: f64,
    pub method: Method,
}

impl MeasureValue {
    pub fn closed_form(value: f64) -> Self {
        Self {
            value,
            numerical_error: 0.0,
            method: Method::ClosedForm,
        }
    }

    fn numerical(value: f64, error: f64, method: Method) -> Self {
        let floor = f64::EPSILON * value.abs().max(1.0);
        Self {
            value,
            numerical_error: error.max(floor),
            method,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub quadrature: QuadratureConfig,
    /// Use analytic formulas of built-in families when they exist.
    pub use_closed_forms: bool,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            quadrature: QuadratureConfig::default(),
            use_closed_forms: true,
        }
    }
}

impl MeasureConfig {
    /// Same tolerances, closed forms disabled.
    pub fn numerical_only(&self) -> Self {
        Self {
            use_closed_forms: false,
            ..*self
        }
    }

    fn closed(&self, dist: &dyn Distribution, m: ClosedForm, t: f64) -> Option<f64> {
        if self.use_closed_forms {
            dist.closed_form(m, t).filter(|v| v.is_finite())
        } else {
            None
        }
    }

    /// Quadrature settings for integrals later divided by `mass`.
    fn scaled(&self, mass: f64) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: self.quadrature.abs_tol * mass.min(1.0),
            ..self.quadrature
        }
    }
}

fn quad<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult> {
    integrate(g, lo, hi, cfg)?.require_converged()
}

/// `int_lo^hi f (ln f - shift)^k dx`; windows starting at the lower support
/// endpoint are integrated in offset coordinates.
fn log_density_moment(
    dist: &dyn Distribution,
    lo: f64,
    hi: f64,
    k: i32,
    shift: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    let term = |lf: f64| {
        if lf == f64::NEG_INFINITY {
            0.0
        } else {
            lf.exp() * (lf - shift).powi(k)
        }
    };
    if lo == dist.support().lower && lo != 0.0 {
        quad(|u| term(dist.ln_pdf_above_lower(u)), 0.0, hi - lo, cfg)
    } else {
        quad(|x| term(dist.ln_pdf(x)), lo, hi, cfg)
    }
}

/// Shannon entropy `-int f ln f`.
pub fn entropy(dist: &dyn Distribution, cfg: &MeasureConfig) -> Result<MeasureValue> {
    if let Some(v) = cfg.closed(dist, ClosedForm::Entropy, 0.0) {
        return Ok(MeasureValue::closed_form(v));
    }
    let s = dist.support();
    let r = log_density_moment(dist, s.lower, s.upper_value(), 1, 0.0, &cfg.quadrature)?;
    Ok(MeasureValue::numerical(-r.value, r.error_estimate, Method::Quadrature))
}

/// Varentropy `int f (ln f)^2 - (int f ln f)^2`.
pub fn varentropy(dist: &dyn Distribution, cfg: &MeasureConfig) -> Result<MeasureValue> {
    if let Some(v) = cfg.closed(dist, ClosedForm::Varentropy, 0.0) {
        return Ok(MeasureValue::closed_form(v));
    }
    let s = dist.support();
    let (lo, hi) = (s.lower, s.upper_value());
    let m1 = log_density_moment(dist, lo, hi, 1, 0.0, &cfg.quadrature)?;
    let m2 = log_density_moment(dist, lo, hi, 2, 0.0, &cfg.quadrature)?;
    let value = m2.value - m1.value * m1.value;
    let err = m2.error_estimate + 2.0 * m1.value.abs() * m1.error_estimate;
    Ok(MeasureValue::numerical(value, err, Method::Quadrature))
}

/// The past lifetime `X | X <= t` (equivalently the inactivity time
/// `t - X | X <= t`) of a distribution.
#[derive(Debug, Clone, Copy)]
pub struct PastContext<'a> {
    dist: &'a dyn Distribution,
    t: f64,
    at_t: f64,
}

impl<'a> PastContext<'a> {
    pub fn new(dist: &'a dyn Distribution, t: f64) -> Result<Self> {
        let s = dist.support();
        if !s.contains_interior(t) {
            return Err(Error::Domain(format!(
                "t = {t} is not interior to the support ({}, {})",
                s.lower,
                s.upper_value()
            )));
        }
        let at_t = dist.cdf(t);
        if !(at_t >= MIN_CONDITIONING_PROBABILITY) {
            return Err(Error::NullConditioning {
                t,
                probability: at_t,
                threshold: MIN_CONDITIONING_PROBABILITY,
            });
        }
        Ok(Self { dist, t, at_t })
    }

    pub fn dist(&self) -> &'a dyn Distribution {
        self.dist
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `F(t)`.
    pub fn probability(&self) -> f64 {
        self.at_t
    }

    fn lower(&self) -> f64 {
        self.dist.support().lower
    }

    /// `q(t) = f(t) / F(t)`.
    pub fn reversed_hazard(&self) -> f64 {
        self.dist.pdf(self.t) / self.at_t
    }

    /// `Lambda*(t) = -ln F(t)`.
    pub fn cumulative_reversed_hazard(&self) -> f64 {
        -self.at_t.ln()
    }

    /// `(int_0^t f ln f, int_0^t f (ln f)^2)` over the past window.
    fn log_density_moments(&self, cfg: &MeasureConfig) -> Result<(QuadratureResult, QuadratureResult)> {
        let q = cfg.scaled(self.at_t);
        let m1 = log_density_moment(self.dist, self.lower(), self.t, 1, 0.0, &q)?;
        let m2 = log_density_moment(self.dist, self.lower(), self.t, 2, 0.0, &q)?;
        Ok((m1, m2))
    }

    /// Past entropy; analytic when available, otherwise
    /// [`Self::past_entropy_log_density`].
    pub fn past_entropy(&self, cfg: &MeasureConfig) -> Result<MeasureValue> {
        if let Some(v) = cfg.closed(self.dist, ClosedForm::PastEntropy, self.t) {
            return Ok(MeasureValue::closed_form(v));
        }
        self.past_entropy_log_density(cfg)
    }

    /// `-Lambda*(t) - (1/F(t)) int_0^t f ln f`.
    pub fn past_entropy_log_density(&self, cfg: &MeasureConfig) -> Result<MeasureValue> {
        let m1 = log_density_moment(self.dist, self.lower(), self.t, 1, 0.0, &cfg.scaled(self.at_t))?;
        let value = self.at_t.ln() - m1.value / self.at_t;
        Ok(MeasureValue::numerical(
            value,
            m1.error_estimate / self.at_t,
            Method::Quadrature,
        ))
    }

    /// `-int_0^t (f/F(t)) ln(f/F(t))`.
    pub fn past_entropy_definition(&self, cfg: &MeasureConfig) -> Result<MeasureValue> {
        let shift = self.at_t.ln();
        let r = log_density_moment(self.dist, self.lower(), self.t, 1, shift, &cfg.scaled(self.at_t))?;
        Ok(MeasureValue::numerical(
            -r.value / self.at_t,
            r.error_estimate / self.at_t,
            Method::Quadrature,
        ))
    }

    /// Past varentropy; analytic when available, otherwise
    /// [`Self::past_varentropy_log_density`].
    pub fn past_varentropy(&self, cfg: &MeasureConfig) -> Result<MeasureValue> {
        if let Some(v) = cfg.closed(self.dist, ClosedForm::PastVarentropy, self.t) {
            return Ok(MeasureValue::closed_form(v));
        }
        self.past_varentropy_log_density(cfg)
    }

    /// `(1/F(t)) int_0^t f (ln f)^2 - (Lambda*(t) + H(_tX))^2`.
    pub fn past_varentropy_log_density(&self, cfg: &MeasureConfig) -> Result<MeasureValue> {
        let (m1, m2) = self.log_density_moments(cfg)?;
        let mean = m1.value / self.at_t;
        let value = m2.value / self.at_t - mean * mean;
        let err = (m2.error_estimate + 2.0 * mean.abs() * m1.error_estimate) / self.at_t;
        Ok(MeasureValue::numerical(value, err, Method::Quadrature))
    }

    /// `int_0^t (f/F) (ln(f/F))^2 - H(_tX)^2` with the entropy from
    /// [`Self::past_entropy_definition`].
    pub fn past_varentropy_definition(&self, cfg: &MeasureConfig) -> Result<MeasureValue> {
        let shift = self.at_t.ln();
        let q = cfg.scaled(self.at_t);
        let m1 = log_density_moment(self.dist, self.lower(), self.t, 1, shift, &q)?;
        let m2 = log_density_moment(self.dist, self.lower(), self.t, 2, shift, &q)?;
        let h = -m1.value / self.at_t;
        let value = m2.value / self.at_t - h * h;
        let err = (m2.error_estimate + 2.0 * h.abs() * m1.error_estimate) / self.at_t;
        Ok(MeasureValue::numerical(value, err, Method::Quadrature))
    }

    /// `m*(t) = (1/F(t)) int_0^t F(x) dx`.
    pub fn mean_inactivity_time(&self, cfg: &MeasureConfig) -> Result<MeasureValue> {
        if let Some(v) = cfg.closed(self.dist, ClosedForm::MeanInactivity, self.t) {
            return Ok(MeasureValue::closed_form(v));
        }
        let r = quad(
            |x| self.dist.cdf(x),
            self.lower(),
            self.t,
            &cfg.scaled(self.at_t),
        )?;
        Ok(MeasureValue::numerical(
            r.value / self.at_t,
            r.error_estimate / self.at_t,
            Method::Quadrature,
        ))
    }

    /// `(2/F(t)) int_0^t dy int_0^y F(x) dx - m*(t)^2`.
    ///
    /// The inner integral is tabulated on a uniform grid of cumulative
    /// values; each outer abscissa adds the short remaining piece.
    pub fn variance_inactivity_time(&self, cfg: &MeasureConfig) -> Result<MeasureValue> {
        if let Some(v) = cfg.closed(self.dist, ClosedForm::VarianceInactivity, self.t) {
            return Ok(MeasureValue::closed_form(v));
        }
        let m = self.mean_inactivity_time(cfg)?;
        let lo = self.lower();
        let q = cfg.scaled(self.at_t * (self.t - lo).min(1.0));
        let cdf = |x: f64| self.dist.cdf(x);
        let h = (self.t - lo) / INNER_GRID_CELLS as f64;
        let nodes: Vec<f64> = (0..=INNER_GRID_CELLS).map(|i| lo + i as f64 * h).collect();
        let mut cumulative = vec![0.0; INNER_GRID_CELLS + 1];
        let mut inner_err = 0.0;
        for i in 0..INNER_GRID_CELLS {
            let r = quad(cdf, nodes[i], nodes[i + 1], &q)?;
            cumulative[i + 1] = cumulative[i] + r.value;
            inner_err += r.error_estimate;
        }
        let inner = |y: f64| -> f64 {
            let j = (((y - lo) / h).floor() as usize).min(INNER_GRID_CELLS - 1);
            if y <= nodes[j] {
                return cumulative[j];
            }
            match quad(cdf, nodes[j], y, &q) {
                Ok(r) => cumulative[j] + r.value,
                Err(_) => f64::NAN,
            }
        };
        let outer = quad(inner, lo, self.t, &q)?;
        let value = 2.0 * outer.value / self.at_t - m.value * m.value;
        let err = 2.0 * (outer.error_estimate + (self.t - lo) * inner_err) / self.at_t
            + 2.0 * m.value.abs() * m.numerical_error;
        if value < -err.max(1e-12) {
            return Err(Error::NonConvergence {
                value,
                error_estimate: err,
                subdivisions: outer.subdivisions_used,
            });
        }
        Ok(MeasureValue::numerical(value, err, Method::Quadrature))
    }

    /// `H'(_tX) = q(t) [1 - H(_tX) - ln q(t)]`.
    pub fn past_entropy_derivative(&self, cfg: &MeasureConfig) -> Result<f64> {
        let q = self.reversed_hazard();
        let h = self.past_entropy(cfg)?.value;
        Ok(q * (1.0 - h - q.ln()))
    }

    /// `V'(_tX) = -q(t) [V(_tX) - (H(_tX) + ln q(t))^2]`.
    pub fn past_varentropy_derivative(&self, cfg: &MeasureConfig) -> Result<f64> {
        let q = self.reversed_hazard();
        let h = self.past_entropy(cfg)?.value;
        let v = self.past_varentropy(cfg)?.value;
        Ok(-q * (v - (h + q.ln()).powi(2)))
    }
}

pub fn past_entropy(dist: &dyn Distribution, t: f64, cfg: &MeasureConfig) -> Result<MeasureValue> {
    PastContext::new(dist, t)?.past_entropy(cfg)
}

pub fn past_varentropy(dist: &dyn Distribution, t: f64, cfg: &MeasureConfig) -> Result<MeasureValue> {
    PastContext::new(dist, t)?.past_varentropy(cfg)
}

fn residual_window(dist: &dyn Distribution, t: f64) -> Result<(f64, f64)> {
    let s = dist.support();
    if !(t >= s.lower && t < s.upper_value()) {
        return Err(Error::Domain(format!(
            "t = {t} outside [{}, {})",
            s.lower,
            s.upper_value()
        )));
    }
    let surv = dist.sf(t);
    if !(surv >= MIN_CONDITIONING_PROBABILITY) {
        return Err(Error::NullConditioning {
            t,
            probability: surv,
            threshold: MIN_CONDITIONING_PROBABILITY,
        });
    }
    Ok((surv, s.upper_value()))
}

/// Residual entropy of `X - t | X >= t`.
pub fn residual_entropy(dist: &dyn Distribution, t: f64, cfg: &MeasureConfig) -> Result<MeasureValue> {
    let (surv, hi) = residual_window(dist, t)?;
    let m1 = log_density_moment(dist, t, hi, 1, 0.0, &cfg.scaled(surv))?;
    Ok(MeasureValue::numerical(
        surv.ln() - m1.value / surv,
        m1.error_estimate / surv,
        Method::Quadrature,
    ))
}

/// Residual varentropy `(1/S(t)) int_t f (ln f)^2 - (Lambda(t) + H(X_t))^2`.
pub fn residual_varentropy(dist: &dyn Distribution, t: f64, cfg: &MeasureConfig) -> Result<MeasureValue> {
    let (surv, hi) = residual_window(dist, t)?;
    let q = cfg.scaled(surv);
    let m1 = log_density_moment(dist, t, hi, 1, 0.0, &q)?;
    let m2 = log_density_moment(dist, t, hi, 2, 0.0, &q)?;
    let mean = m1.value / surv;
    let value = m2.value / surv - mean * mean;
    let err = (m2.error_estimate + 2.0 * mean.abs() * m1.error_estimate) / surv;
    Ok(MeasureValue::numerical(value, err, Method::Quadrature))
}

fn positive_cdf(dist: &dyn Distribution, t: f64) -> Result<f64> {
    let at_t = dist.cdf(t);
    if at_t > 0.0 {
        Ok(at_t)
    } else {
        Err(Error::Domain(format!("F({t}) = 0")))
    }
}

/// `q(t) = f(t) / F(t)`.
pub fn reversed_hazard(dist: &dyn Distribution, t: f64) -> Result<f64> {
    Ok(dist.pdf(t) / positive_cdf(dist, t)?)
}

/// `Lambda*(t) = -ln F(t)`.
pub fn cumulative_reversed_hazard(dist: &dyn Distribution, t: f64) -> Result<f64> {
    Ok(-positive_cdf(dist, t)?.ln())
}

/// `int_t^{sup D} q(x) dx`, the integral form of the cumulative reversed hazard.
pub fn integrated_reversed_hazard(dist: &dyn Distribution, t: f64, cfg: &MeasureConfig) -> Result<MeasureValue> {
    positive_cdf(dist, t)?;
    let hi = dist.support().upper_value();
    if t >= hi {
        return Ok(MeasureValue::closed_form(0.0));
    }
    let r = quad(
        |x| {
            let f = dist.pdf(x);
            if f == 0.0 {
                0.0
            } else {
                f / dist.cdf(x)
            }
        },
        t,
        hi,
        &cfg.quadrature,
    )?;
    Ok(MeasureValue::numerical(r.value, r.error_estimate, Method::Quadrature))
}

/// `q_alpha(t) = f(t) / F(t)^{1 - alpha}`.
pub fn generalized_reversed_hazard(dist: &dyn Distribution, t: f64, alpha: f64) -> Result<f64> {
    let at_t = positive_cdf(dist, t)?;
    Ok(dist.pdf(t) / at_t.powf(1.0 - alpha))
}

/// Past entropy of a proportional reversed hazards member through the
/// substitution `y = F(x)^a`:
/// `-a Lambda*(t) - F(t)^{-a} int_0^{F(t)^a} gamma(y; a) dy`,
/// `gamma(y; a) = ln[a y^{1-1/a} f(F^{-1}(y^{1/a}))]`.
pub fn prhr_past_entropy(fam: &Prhr, t: f64, cfg: &MeasureConfig) -> Result<MeasureValue> {
    let (m1, _, mass) = gamma_moments(fam, t, cfg, false)?;
    let value = mass.ln() - m1.value / mass;
    Ok(MeasureValue::numerical(
        value,
        m1.error_estimate / mass,
        Method::GammaSubstitution,
    ))
}

/// Past varentropy of a proportional reversed hazards member via `gamma(y; a)`.
pub fn prhr_past_varentropy(fam: &Prhr, t: f64, cfg: &MeasureConfig) -> Result<MeasureValue> {
    let (m1, m2, mass) = gamma_moments(fam, t, cfg, true)?;
    let m2 = m2.expect("second moment requested");
    let mean = m1.value / mass;
    let value = m2.value / mass - mean * mean;
    let err = (m2.error_estimate + 2.0 * mean.abs() * m1.error_estimate) / mass;
    Ok(MeasureValue::numerical(value, err, Method::GammaSubstitution))
}

/// `gamma(y; a)` for a PRHR member.
pub fn gamma_integrand(fam: &Prhr, y: f64) -> f64 {
    let a = fam.power();
    let base = fam.base();
    let x = base.quantile(y.powf(1.0 / a));
    a.ln() + (1.0 - 1.0 / a) * y.ln() + base.ln_pdf(x)
}

fn gamma_moments(
    fam: &Prhr,
    t: f64,
    cfg: &MeasureConfig,
    second: bool,
) -> Result<(QuadratureResult, Option<QuadratureResult>, f64)> {
    // Validates t and the conditioning mass on the family itself.
    let ctx = PastContext::new(fam, t)?;
    let mass = ctx.probability();
    let q = cfg.scaled(mass);
    let m1 = quad(|y| gamma_integrand(fam, y), 0.0, mass, &q)?;
    let m2 = if second {
        Some(quad(|y| gamma_integrand(fam, y).powi(2), 0.0, mass, &q)?)
    } else {
        None
    };
    Ok((m1, m2, mass))
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.len() > MAX_DISCRETE_LEN {
        return Err(Error::Domain(format!(
            "probability vector length {} outside 1..={MAX_DISCRETE_LEN}",
            p.len()
        )));
    }
    if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeProbability { index, value });
    }
    let sum = neumaier_sum(p.iter().copied());
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// `-sum p ln p`, zero entries skipped.
pub fn discrete_entropy(p: &[f64]) -> Result<f64> {
    check_probabilities(p)?;
    Ok(-neumaier_sum(
        p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()),
    ))
}

/// `sum p (ln p)^2 - H^2`, zero entries skipped.
pub fn discrete_varentropy(p: &[f64]) -> Result<f64> {
    let h = discrete_entropy(p)?;
    let m2 = neumaier_sum(
        p.iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln() * v.ln()),
    );
    Ok(m2 - h * h)
}

/// Pointwise measures addressable by name from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Measure {
    Entropy,
    Varentropy,
    PastEntropy,
    PastVarentropy,
    ResidualEntropy,
    ResidualVarentropy,
    ReversedHazard,
    CumulativeReversedHazard,
    GeneralizedReversedHazard { alpha: f64 },
    MeanInactivityTime,
    VarianceInactivityTime,
    PastEntropyDerivative,
    PastVarentropyDerivative,
    PrhrPastEntropy,
    PrhrPastVarentropy,
}

impl Measure {
    pub const NAMES: [&'static str; 15] = [
        "entropy",
        "varentropy",
        "past-entropy",
        "past-varentropy",
        "residual-entropy",
        "residual-varentropy",
        "reversed-hazard",
        "cumulative-reversed-hazard",
        "generalized-reversed-hazard",
        "mean-inactivity-time",
        "variance-inactivity-time",
        "past-entropy-derivative",
        "past-varentropy-derivative",
        "prhr-past-entropy",
        "prhr-past-varentropy",
    ];

    /// Parses a measure name; `alpha` is only used by the generalized
    /// reversed hazard.
    pub fn parse(name: &str, alpha: f64) -> Result<Self> {
        Ok(match name {
            "entropy" => Measure::Entropy,
            "varentropy" => Measure::Varentropy,
            "past-entropy" => Measure::PastEntropy,
            "past-varentropy" => Measure::PastVarentropy,
            "residual-entropy" => Measure::ResidualEntropy,
            "residual-varentropy" => Measure::ResidualVarentropy,
            "reversed-hazard" => Measure::ReversedHazard,
            "cumulative-reversed-hazard" => Measure::CumulativeReversedHazard,
            "generalized-reversed-hazard" => Measure::GeneralizedReversedHazard { alpha },
            "mean-inactivity-time" => Measure::MeanInactivityTime,
            "variance-inactivity-time" => Measure::VarianceInactivityTime,
            "past-entropy-derivative" => Measure::PastEntropyDerivative,
            "past-varentropy-derivative" => Measure::PastVarentropyDerivative,
            "prhr-past-entropy" => Measure::PrhrPastEntropy,
            "prhr-past-varentropy" => Measure::PrhrPastVarentropy,
            other => {
                return Err(Error::Parse(format!(
                    "unknown measure `{other}`; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Entropy => "entropy",
            Measure::Varentropy => "varentropy",
            Measure::PastEntropy => "past-entropy",
            Measure::PastVarentropy => "past-varentropy",
            Measure::ResidualEntropy => "residual-entropy",
            Measure::ResidualVarentropy => "residual-varentropy",
            Measure::ReversedHazard => "reversed-hazard",
            Measure::CumulativeReversedHazard => "cumulative-reversed-hazard",
            Measure::GeneralizedReversedHazard { .. } => "generalized-reversed-hazard",
            Measure::MeanInactivityTime => "mean-inactivity-time",
            Measure::VarianceInactivityTime => "variance-inactivity-time",
            Measure::PastEntropyDerivative => "past-entropy-derivative",
            Measure::PastVarentropyDerivative => "past-varentropy-derivative",
            Measure::PrhrPastEntropy => "prhr-past-entropy",
            Measure::PrhrPastVarentropy => "prhr-past-varentropy",
        }
    }

    /// Evaluates the measure at `t`. The PRHR measures need the family
    /// itself and fail with a domain error when `prhr` is `None`.
    pub fn evaluate(
        &self,
        dist: &dyn Distribution,
        prhr: Option<&Prhr>,
        t: f64,
        cfg: &MeasureConfig,
    ) -> Result<MeasureValue> {
        let direct = |v: Result<f64>| v.map(MeasureValue::closed_form);
        let value = match *self {
            Measure::Entropy => entropy(dist, cfg),
            Measure::Varentropy => varentropy(dist, cfg),
            Measure::PastEntropy => PastContext::new(dist, t)?.past_entropy(cfg),
            Measure::PastVarentropy => PastContext::new(dist, t)?.past_varentropy(cfg),
            Measure::ResidualEntropy => residual_entropy(dist, t, cfg),
            Measure::ResidualVarentropy => residual_varentropy(dist, t, cfg),
            Measure::ReversedHazard => direct(reversed_hazard(dist, t)),
            Measure::CumulativeReversedHazard => direct(cumulative_reversed_hazard(dist, t)),
            Measure::GeneralizedReversedHazard { alpha } => {
                direct(generalized_reversed_hazard(dist, t, alpha))
            }
            Measure::MeanInactivityTime => PastContext::new(dist, t)?.mean_inactivity_time(cfg),
            Measure::VarianceInactivityTime => {
                PastContext::new(dist, t)?.variance_inactivity_time(cfg)
            }
            Measure::PastEntropyDerivative => {
                let ctx = PastContext::new(dist, t)?;
                let h = ctx.past_entropy(cfg)?;
                let q = ctx.reversed_hazard();
                Ok(MeasureValue {
                    value: ctx.past_entropy_derivative(cfg)?,
                    numerical_error: q * h.numerical_error,
                    method: h.method,
                })
            }
            Measure::PastVarentropyDerivative => {
                let ctx = PastContext::new(dist, t)?;
                let h = ctx.past_entropy(cfg)?;
                let v = ctx.past_varentropy(cfg)?;
                let q = ctx.reversed_hazard();
                let shift = (h.value + q.ln()).abs();
                let method = if h.method == Method::ClosedForm && v.method == Method::ClosedForm {
                    Method::ClosedForm
                } else {
                    Method::Quadrature
                };
                Ok(MeasureValue {
                    value: ctx.past_varentropy_derivative(cfg)?,
                    numerical_error: q * (v.numerical_error + 2.0 * shift * h.numerical_error),
                    method,
                })
            }
            Measure::PrhrPastEntropy | Measure::PrhrPastVarentropy => {
                let fam = prhr.ok_or_else(|| {
                    Error::Domain(format!(
                        "`{}` needs a distribution whose last stage is `prhr`",
                        self.name()
                    ))
                })?;
                if *self == Measure::PrhrPastEntropy {
                    prhr_past_entropy(fam, t, cfg)
                } else {
                    prhr_past_varentropy(fam, t, cfg)
                }
            }
        }?;
        if value.value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Domain(format!(
                "{} is not finite at t = {t}",
                self.name()
            )))
        }
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::parse(s, 0.0)
    }
}

/// Finite-difference slope of `t -> measure(t)` used as an independent check
/// of the analytic derivative formulas.
pub fn numerical_derivative<F>(measure: F, t: f64, step_hint: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    differentiate(|s| measure(s).unwrap_or(f64::NAN), t, step_hint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_builtin, DistRef, InactivityTime};

    fn cfg() -> MeasureConfig {
        MeasureConfig::default()
    }

    fn num() -> MeasureConfig {
        MeasureConfig::default().numerical_only()
    }

    fn d(name: &str, p: &[f64]) -> DistRef {
        make_builtin(name, p).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (diff {:e}, tol {tol:e})", (a - b).abs());
    }

    #[test]
    fn entropy_examples_both_routes() {
        for c in [cfg(), num()] {
            assert_close(entropy(&*d("uniform", &[1.0]), &c).unwrap().value, 0.0, 1e-10);
            assert_close(entropy(&*d("exponential", &[1.0]), &c).unwrap().value, 1.0, 1e-9);
            // int_0^1 2x ln 2x dx = ln 2 - 1/2
            assert_close(
                entropy(&*d("power", &[2.0]), &c).unwrap().value,
                0.5 - 2f64.ln(),
                1e-9,
            );
        }
        let w = entropy(&*d("weibull", &[2.0, 1.5]), &num()).unwrap();
        let wc = entropy(&*d("weibull", &[2.0, 1.5]), &cfg()).unwrap();
        assert_close(w.value, wc.value, 1e-8);
    }

    #[test]
    fn varentropy_examples() {
        for b in [0.5, 1.0, 3.0] {
            assert_close(varentropy(&*d("uniform", &[b]), &num()).unwrap().value, 0.0, 1e-10);
        }
        for l in [0.5, 1.0, 2.0] {
            assert_close(
                varentropy(&*d("exponential", &[l]), &num()).unwrap().value,
                1.0,
                1e-8,
            );
        }
        assert_close(varentropy(&*d("power", &[2.0]), &num()).unwrap().value, 0.25, 1e-9);
    }

    #[test]
    fn method_tag_and_error_semantics() {
        let u = d("uniform", &[1.0]);
        let ctx = PastContext::new(&*u, 0.5).unwrap();
        let c = ctx.past_entropy(&cfg()).unwrap();
        assert_eq!(c.method, Method::ClosedForm);
        assert_eq!(c.numerical_error, 0.0);
        let q = ctx.past_entropy(&num()).unwrap();
        assert_eq!(q.method, Method::Quadrature);
        assert!(q.numerical_error > 0.0);
    }

    #[test]
    fn past_entropy_examples() {
        let lambda = 1.7;
        let e = d("exponential", &[lambda]);
        for t in [0.2, 1.0, 3.0] {
            let u = d("uniform", &[4.0]);
            assert_close(past_entropy(&*u, t, &num()).unwrap().value, t.ln(), 1e-10);
            let el = (-lambda * t).exp();
            let expected = 1.0 + ((1.0 - el) / lambda).ln() - lambda * t * el / (1.0 - el);
            assert_close(past_entropy(&*e, t, &num()).unwrap().value, expected, 1e-9);
            assert_close(past_entropy(&*e, t, &cfg()).unwrap().value, expected, 1e-12);
        }
        let p = d("power", &[2.0]);
        for t in [0.1, 0.5, 0.9] {
            assert_close(past_entropy(&*p, t, &num()).unwrap().value, 0.5 + (t / 2.0).ln(), 1e-9);
        }
    }

    #[test]
    fn past_varentropy_examples() {
        let u = d("uniform", &[2.0]);
        assert_close(past_varentropy(&*u, 1.3, &num()).unwrap().value, 0.0, 1e-10);
        let p = d("power", &[2.0]);
        for t in [0.1, 0.5, 0.9] {
            assert_close(past_varentropy(&*p, t, &num()).unwrap().value, 0.25, 1e-9);
        }
        // Exponential(1) at t = 1: 1 - e^{-1} / (1 - e^{-1})^2.
        let e = d("exponential", &[1.0]);
        let em = (-1.0f64).exp();
        let expected = 1.0 - em / (1.0 - em).powi(2);
        let ctx = PastContext::new(&*e, 1.0).unwrap();
        assert_close(ctx.past_varentropy_definition(&cfg()).unwrap().value, expected, 1e-9);
        assert_close(ctx.past_varentropy(&cfg()).unwrap().value, expected, 1e-14);
    }

    #[test]
    fn routes_agree() {
        let zoo = [
            d("uniform", &[2.0]),
            d("exponential", &[0.7]),
            d("power", &[3.0]),
            d("weibull", &[2.0, 1.0]),
            d("weibull", &[0.5, 1.0]),
        ];
        for dist in &zoo {
            for p in [0.05, 0.3, 0.7, 0.95] {
                let t = dist.quantile(p);
                let ctx = PastContext::new(&**dist, t).unwrap();
                let h1 = ctx.past_entropy_log_density(&cfg()).unwrap().value;
                let h5 = ctx.past_entropy_definition(&cfg()).unwrap().value;
                assert_close(h1, h5, 1e-8);
                let v6 = ctx.past_varentropy_log_density(&cfg()).unwrap().value;
                let v13 = ctx.past_varentropy_definition(&cfg()).unwrap().value;
                assert_close(v6, v13, 1e-8);
                assert!(v6 >= -1e-9);
            }
        }
    }

    #[test]
    fn past_measures_equal_inactivity_time_measures() {
        for dist in [d("exponential", &[1.0]), d("power", &[2.0]), d("weibull", &[2.0, 1.0])] {
            let t = dist.quantile(0.6);
            let ctx = PastContext::new(&*dist, t).unwrap();
            let it = InactivityTime::new(dist.clone(), t).unwrap();
            let h = entropy(&it, &num()).unwrap().value;
            let v = varentropy(&it, &num()).unwrap().value;
            assert_close(h, ctx.past_entropy(&num()).unwrap().value, 1e-8);
            assert_close(v, ctx.past_varentropy(&num()).unwrap().value, 1e-8);
        }
    }

    #[test]
    fn residual_examples() {
        for l in [0.5, 2.0] {
            let e = d("exponential", &[l]);
            for t in [0.0, 0.3, 2.0] {
                assert_close(residual_entropy(&*e, t, &cfg()).unwrap().value, 1.0 - l.ln(), 1e-9);
                assert_close(residual_varentropy(&*e, t, &cfg()).unwrap().value, 1.0, 1e-8);
            }
        }
        let u = d("uniform", &[3.0]);
        for t in [0.0, 1.0, 2.5] {
            assert_close(residual_entropy(&*u, t, &cfg()).unwrap().value, (3.0 - t).ln(), 1e-10);
            assert_close(residual_varentropy(&*u, t, &cfg()).unwrap().value, 0.0, 1e-10);
        }
        let w = d("weibull", &[2.0, 1.0]);
        assert_close(
            residual_entropy(&*w, 0.0, &num()).unwrap().value,
            entropy(&*w, &num()).unwrap().value,
            1e-12,
        );
        assert_close(
            residual_varentropy(&*w, 0.0, &num()).unwrap().value,
            varentropy(&*w, &num()).unwrap().value,
            1e-12,
        );
        assert!(matches!(
            residual_entropy(&*d("exponential", &[1.0]), 40.0, &cfg()),
            Err(Error::NullConditioning { .. })
        ));
    }

    #[test]
    fn hazard_examples() {
        let u = d("uniform", &[2.0]);
        assert_close(reversed_hazard(&*u, 0.5).unwrap(), 2.0, 1e-15);
        let p = d("power", &[2.0]);
        assert_close(reversed_hazard(&*p, 0.4).unwrap(), 5.0, 1e-14);
        let e = d("exponential", &[1.0]);
        let em = (-1.0f64).exp();
        assert_close(reversed_hazard(&*e, 1.0).unwrap(), em / (1.0 - em), 1e-15);
        assert_close(reversed_hazard(&*e, 1.0).unwrap(), 0.5820, 1e-4);
        assert!(reversed_hazard(&*e, 0.0).is_err());

        assert_close(cumulative_reversed_hazard(&*p, 0.5).unwrap(), 2.0 * 2f64.ln(), 1e-15);
        assert_close(cumulative_reversed_hazard(&*u, 2.0).unwrap(), 0.0, 1e-15);
        let u1 = d("uniform", &[1.0]);
        assert_close(cumulative_reversed_hazard(&*u1, (-1.0f64).exp()).unwrap(), 1.0, 1e-15);
        assert!(cumulative_reversed_hazard(&*u1, 0.0).is_err());

        for t in [0.2, 0.7] {
            assert_eq!(
                generalized_reversed_hazard(&*e, t, 0.0).unwrap(),
                reversed_hazard(&*e, t).unwrap()
            );
            assert_close(generalized_reversed_hazard(&*p, t, 0.5).unwrap(), 2.0, 1e-14);
            assert_close(generalized_reversed_hazard(&*u1, t, 1.0).unwrap(), 1.0, 1e-15);
        }
    }

    #[test]
    fn integrated_reversed_hazard_matches_log_cdf() {
        for dist in [d("exponential", &[1.3]), d("power", &[2.0]), d("uniform", &[2.0])] {
            for p in [0.1, 0.5, 0.9] {
                let t = dist.quantile(p);
                let i = integrated_reversed_hazard(&*dist, t, &cfg()).unwrap().value;
                assert_close((-i).exp(), dist.cdf(t), 1e-7);
            }
        }
    }

    #[test]
    fn inactivity_examples() {
        let u = d("uniform", &[2.0]);
        let p = d("power", &[2.0]);
        let lambda = 0.8;
        let e = d("exponential", &[lambda]);
        for t in [0.3, 0.9] {
            let cu = PastContext::new(&*u, t).unwrap();
            assert_close(cu.mean_inactivity_time(&num()).unwrap().value, t / 2.0, 1e-10);
            assert_close(cu.variance_inactivity_time(&num()).unwrap().value, t * t / 12.0, 1e-10);
            let cp = PastContext::new(&*p, t).unwrap();
            assert_close(cp.mean_inactivity_time(&num()).unwrap().value, t / 3.0, 1e-10);
            assert_close(cp.variance_inactivity_time(&num()).unwrap().value, t * t / 18.0, 1e-10);
            let ce = PastContext::new(&*e, t).unwrap();
            let el = (-lambda * t).exp();
            let m = t - (1.0 - el * (lambda * t + 1.0)) / (lambda * (1.0 - el));
            assert_close(ce.mean_inactivity_time(&num()).unwrap().value, m, 1e-10);
            assert_close(ce.mean_inactivity_time(&cfg()).unwrap().value, m, 1e-13);
            assert_close(
                ce.variance_inactivity_time(&num()).unwrap().value,
                ce.variance_inactivity_time(&cfg()).unwrap().value,
                1e-10,
            );
        }
        // Degenerate conditioning as t -> 0+.
        let cu = PastContext::new(&*u, 1e-6).unwrap();
        assert!(cu.variance_inactivity_time(&num()).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn variance_inactivity_swapped_order_route() {
        // int_0^t int_0^y F = int_0^t (t - x) F(x) dx
        let w = d("weibull", &[2.0, 1.0]);
        let t = 1.1;
        let ctx = PastContext::new(&*w, t).unwrap();
        let m = ctx.mean_inactivity_time(&num()).unwrap().value;
        let r = integrate(|x| (t - x) * w.cdf(x), 0.0, t, &QuadratureConfig::default()).unwrap();
        let swapped = 2.0 * r.value / w.cdf(t) - m * m;
        assert_close(ctx.variance_inactivity_time(&num()).unwrap().value, swapped, 1e-10);
    }

    #[test]
    fn derivative_examples() {
        let u = d("uniform", &[1.0]);
        let p = d("power", &[2.0]);
        for t in [0.2, 0.5] {
            let cu = PastContext::new(&*u, t).unwrap();
            assert_close(cu.past_entropy_derivative(&num()).unwrap(), 1.0 / t, 1e-9);
            assert_close(cu.past_varentropy_derivative(&num()).unwrap(), 0.0, 1e-9);
            let cp = PastContext::new(&*p, t).unwrap();
            assert_close(cp.past_entropy_derivative(&num()).unwrap(), 1.0 / t, 1e-8);
            assert_close(cp.past_varentropy_derivative(&num()).unwrap(), 0.0, 1e-8);
        }
        let e = d("exponential", &[1.0]);
        let ctx = PastContext::new(&*e, 1.0).unwrap();
        let fd_h = numerical_derivative(|s| past_entropy(&*e, s, &num()).map(|m| m.value), 1.0, 1e-3).unwrap();
        assert_close(ctx.past_entropy_derivative(&num()).unwrap(), fd_h, 1e-6);
        let fd_v = numerical_derivative(|s| past_varentropy(&*e, s, &num()).map(|m| m.value), 1.0, 1e-3).unwrap();
        assert_close(ctx.past_varentropy_derivative(&num()).unwrap(), fd_v, 1e-5);
    }

    #[test]
    fn past_context_errors() {
        let e = d("exponential", &[1.0]);
        assert!(matches!(PastContext::new(&*e, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            PastContext::new(&*e, 1e-12),
            Err(Error::NullConditioning { .. })
        ));
        let u = d("uniform", &[1.0]);
        assert!(PastContext::new(&*u, 1.5).is_err());
    }

    #[test]
    fn prhr_examples() {
        let u = d("uniform", &[1.0]);
        let e = d("exponential", &[1.0]);
        let fam1 = Prhr::new(e.clone(), 1.0).unwrap();
        let t = 0.8;
        assert_close(
            prhr_past_entropy(&fam1, t, &cfg()).unwrap().value,
            past_entropy(&*e, t, &cfg()).unwrap().value,
            1e-9,
        );
        assert_close(
            prhr_past_varentropy(&fam1, t, &cfg()).unwrap().value,
            past_varentropy(&*e, t, &cfg()).unwrap().value,
            1e-8,
        );
        let sq = Prhr::new(u, 2.0).unwrap();
        for t in [0.2, 0.6] {
            let h = prhr_past_entropy(&sq, t, &cfg()).unwrap();
            assert_eq!(h.method, Method::GammaSubstitution);
            assert_close(h.value, 0.5 + (t / 2.0).ln(), 1e-9);
            assert_close(prhr_past_varentropy(&sq, t, &cfg()).unwrap().value, 0.25, 1e-8);
        }
        let fam3 = Prhr::new(e.clone(), 3.0).unwrap();
        assert_close(
            prhr_past_entropy(&fam3, 2.0, &cfg()).unwrap().value,
            past_entropy(&fam3, 2.0, &cfg()).unwrap().value,
            1e-7,
        );
        let fam2 = Prhr::new(e, 2.0).unwrap();
        assert_close(
            prhr_past_varentropy(&fam2, 1.0, &cfg()).unwrap().value,
            past_varentropy(&fam2, 1.0, &cfg()).unwrap().value,
            1e-6,
        );
    }

    #[test]
    fn discrete_examples() {
        assert_eq!(discrete_entropy(&[1.0]).unwrap(), 0.0);
        assert_eq!(discrete_varentropy(&[1.0]).unwrap(), 0.0);
        assert_close(discrete_entropy(&[0.5, 0.5]).unwrap(), 2f64.ln(), 1e-15);
        assert_close(discrete_varentropy(&[0.5, 0.5]).unwrap(), 0.0, 1e-15);
        assert_close(
            discrete_varentropy(&[0.25, 0.75]).unwrap(),
            3.0 / 16.0 * 3f64.ln().powi(2),
            1e-14,
        );
        assert_close(discrete_entropy(&[0.5, 0.0, 0.5]).unwrap(), 2f64.ln(), 1e-15);
        assert!(matches!(discrete_entropy(&[0.5, 0.4]), Err(Error::NotNormalized { .. })));
        assert!(matches!(
            discrete_entropy(&[1.5, -0.5]),
            Err(Error::NegativeProbability { index: 1, .. })
        ));
        let n = MAX_DISCRETE_LEN;
        let big = vec![1.0 / n as f64; n];
        assert_close(discrete_entropy(&big).unwrap(), (n as f64).ln(), 1e-9);
        assert!(discrete_entropy(&vec![1.0 / (n + 1) as f64; n + 1]).is_err());
    }

    #[test]
    fn measure_names_round_trip() {
        for name in Measure::NAMES {
            assert_eq!(Measure::parse(name, 0.5).unwrap().name(), name);
        }
        assert!(Measure::parse("bogus", 0.0).is_err());
    }
}
