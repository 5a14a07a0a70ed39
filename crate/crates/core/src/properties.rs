//! Executable checks of the identities and bounds linking past entropy, past
//! varentropy, reversed hazards and inactivity-time moments.
//!
//! A check never fails by returning an error because a mathematical claim
//! turned out false: that outcome is recorded in the report. Errors are
//! reserved for numerical breakdowns (non-convergent quadrature, points
//! outside the support).

use serde::{Deserialize, Serialize};

use crate::dist::{
    Direction, DistRef, Distribution, InactivityTime, LinearTransform, MonotonicTransform, Prhr,
};
use crate::error::{Error, Result};
use crate::measures::{
    cumulative_reversed_hazard, entropy, generalized_reversed_hazard, integrated_reversed_hazard,
    numerical_derivative, prhr_past_entropy, prhr_past_varentropy, residual_entropy,
    residual_varentropy, varentropy, MeasureConfig, Method, PastContext,
};
use crate::par::{self, Execution};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub measure: MeasureConfig,
    pub execution: Execution,
    /// Tolerance when every quantity involved is analytic.
    pub closed_tol: f64,
    /// Tolerance when quadrature or finite differences are involved.
    pub numeric_tol: f64,
    /// Step hint for finite-difference derivatives.
    pub fd_step: f64,
    /// Gate for "this function is constant on the grid".
    pub constancy_tol: f64,
    /// Grid size for the omega function.
    pub omega_grid: usize,
    /// Slack allowed on inequalities.
    pub bound_tol: f64,
    /// Agreement required between algebraically equivalent quadrature routes.
    pub route_tol: f64,
    /// Agreement required between the gamma-substitution and direct routes.
    pub dual_route_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            measure: MeasureConfig::default(),
            execution: Execution::default(),
            closed_tol: 1e-7,
            numeric_tol: 1e-5,
            fd_step: 1e-3,
            constancy_tol: 1e-6,
            omega_grid: 1024,
            bound_tol: 1e-6,
            route_tol: 1e-8,
            dual_route_tol: 1e-6,
        }
    }
}

impl VerifyConfig {
    fn tol_for(&self, closed: bool) -> f64 {
        if closed {
            self.closed_tol
        } else {
            self.numeric_tol
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Applicability {
    Applicable,
    NotApplicable(String),
}

impl Applicability {
    pub fn is_applicable(&self) -> bool {
        matches!(self, Applicability::Applicable)
    }
}

/// One line of a verification table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub applicable: bool,
    pub passed: bool,
    pub max_residual: f64,
    pub note: String,
}

impl CheckSummary {
    pub fn from_error(name: impl Into<String>, err: &Error) -> Self {
        Self {
            name: name.into(),
            applicable: true,
            passed: false,
            max_residual: f64::NAN,
            note: format!("numerical failure: {err}"),
        }
    }
}

/// Pointwise residuals of an identity on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub applicability: Applicability,
    pub points: Vec<f64>,
    pub residuals: Vec<f64>,
    pub tolerance: f64,
    pub note: String,
}

impl CheckReport {
    fn new(name: &str, points: Vec<f64>, residuals: Vec<f64>, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            applicability: Applicability::Applicable,
            points,
            residuals,
            tolerance,
            note: String::new(),
        }
    }

    fn not_applicable(name: &str, points: Vec<f64>, reason: String) -> Self {
        Self {
            name: name.to_string(),
            applicability: Applicability::NotApplicable(reason),
            points,
            residuals: Vec::new(),
            tolerance: 0.0,
            note: String::new(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn max_residual(&self) -> f64 {
        max_abs(&self.residuals)
    }

    /// Applicable and every residual within tolerance (NaN fails).
    pub fn passed(&self) -> bool {
        self.applicability.is_applicable()
            && self.residuals.iter().all(|r| r.abs() <= self.tolerance)
    }

    pub fn summary(&self) -> CheckSummary {
        let note = match &self.applicability {
            Applicability::Applicable => self.note.clone(),
            Applicability::NotApplicable(reason) => format!("not-applicable ({reason})"),
        };
        CheckSummary {
            name: self.name.clone(),
            applicable: self.applicability.is_applicable(),
            passed: self.passed(),
            max_residual: self.max_residual(),
            note,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `lhs >= rhs - tolerance`.
    LhsAtLeastRhs,
    /// `lhs <= rhs + tolerance`.
    LhsAtMostRhs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub applicability: Applicability,
    pub orientation: Orientation,
    pub tolerance: f64,
    pub t_grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub satisfied: Vec<bool>,
    /// Signed slack; negative beyond `-tolerance` means violated.
    pub margin: Vec<f64>,
}

impl BoundReport {
    fn build(
        name: &str,
        orientation: Orientation,
        tolerance: f64,
        t_grid: Vec<f64>,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
    ) -> Self {
        let margin: Vec<f64> = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| match orientation {
                Orientation::LhsAtLeastRhs => l - r,
                Orientation::LhsAtMostRhs => r - l,
            })
            .collect();
        let satisfied = margin.iter().map(|m| *m >= -tolerance).collect();
        Self {
            name: name.to_string(),
            applicability: Applicability::Applicable,
            orientation,
            tolerance,
            t_grid,
            lhs,
            rhs,
            satisfied,
            margin,
        }
    }

    pub fn passed(&self) -> bool {
        self.applicability.is_applicable() && self.satisfied.iter().all(|s| *s)
    }

    /// Largest violation (0 when the bound holds everywhere).
    pub fn worst_violation(&self) -> f64 {
        self.margin.iter().fold(0.0f64, |acc, m| acc.max(-m))
    }

    pub fn summary(&self) -> CheckSummary {
        let note = match &self.applicability {
            Applicability::Applicable => {
                let slack = self.margin.iter().copied().fold(f64::INFINITY, f64::min);
                format!("min slack {slack:.3e}")
            }
            Applicability::NotApplicable(reason) => format!("not-applicable ({reason})"),
        };
        CheckSummary {
            name: self.name.clone(),
            applicable: self.applicability.is_applicable(),
            passed: self.passed(),
            max_residual: self.worst_violation(),
            note,
        }
    }
}

fn max_abs(xs: &[f64]) -> f64 {
    if xs.iter().any(|x| x.is_nan()) {
        return f64::NAN;
    }
    xs.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// `(H(_tX), V(_tX), q(t), both analytic?)`.
fn past_pair(dist: &dyn Distribution, t: f64, cfg: &MeasureConfig) -> Result<(f64, f64, f64, bool)> {
    let ctx = PastContext::new(dist, t)?;
    let h = ctx.past_entropy(cfg)?;
    let v = ctx.past_varentropy(cfg)?;
    let closed = h.method == Method::ClosedForm && v.method == Method::ClosedForm;
    Ok((h.value, v.value, ctx.reversed_hazard(), closed))
}

/// `|FD d/dt H(_tX) - q(t)[1 - H(_tX) - ln q(t)]|`.
pub fn check_entropy_derivative(ctx: &PastContext<'_>, step: f64, cfg: &MeasureConfig) -> Result<f64> {
    let dist = ctx.dist();
    let fd = numerical_derivative(
        |s| PastContext::new(dist, s)?.past_entropy(cfg).map(|m| m.value),
        ctx.t(),
        step,
    )?;
    Ok((fd - ctx.past_entropy_derivative(cfg)?).abs())
}

/// `|FD d/dt V(_tX) + q(t)[V(_tX) - (H(_tX) + ln q(t))^2]|`.
pub fn check_varentropy_derivative(ctx: &PastContext<'_>, step: f64, cfg: &MeasureConfig) -> Result<f64> {
    let dist = ctx.dist();
    let fd = numerical_derivative(
        |s| PastContext::new(dist, s)?.past_varentropy(cfg).map(|m| m.value),
        ctx.t(),
        step,
    )?;
    Ok((fd - ctx.past_varentropy_derivative(cfg)?).abs())
}

/// Both derivative identities on a grid: `(entropy, varentropy)` reports.
///
/// Near the lower support endpoint the step shrinks to
/// `fd_step * (t - lower)`, and residuals are taken relative to
/// `max(1, |analytic derivative|)`.
pub fn check_derivative_identities(
    dist: &dyn Distribution,
    t_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<(CheckReport, CheckReport)> {
    let lower = dist.support().lower;
    let rows = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        let ctx = PastContext::new(dist, t)?;
        let step = cfg.fd_step * (t - lower).min(1.0);
        let sh = ctx.past_entropy_derivative(&cfg.measure)?.abs().max(1.0);
        let sv = ctx.past_varentropy_derivative(&cfg.measure)?.abs().max(1.0);
        Ok((
            check_entropy_derivative(&ctx, step, &cfg.measure)? / sh,
            check_varentropy_derivative(&ctx, step, &cfg.measure)? / sv,
        ))
    }))?;
    let (rh, rv): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    Ok((
        CheckReport::new("past-entropy-derivative", t_grid.to_vec(), rh, cfg.numeric_tol),
        CheckReport::new("past-varentropy-derivative", t_grid.to_vec(), rv, cfg.numeric_tol),
    ))
}

/// Constant past varentropy `v` forces `|H(_tX) + ln q(t)| = sqrt(v)`.
pub fn check_constant_varentropy(
    dist: &dyn Distribution,
    t_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<CheckReport> {
    const NAME: &str = "constant-varentropy";
    let rows = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        past_pair(dist, t, &cfg.measure)
    }))?;
    let vs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (lo, hi) = vs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !(hi - lo <= cfg.constancy_tol) {
        return Ok(CheckReport::not_applicable(
            NAME,
            t_grid.to_vec(),
            format!("past varentropy varies by {:.3e}", hi - lo),
        ));
    }
    let v = (vs.iter().sum::<f64>() / vs.len() as f64).max(0.0);
    let residuals = rows
        .iter()
        .map(|(h, _, q, _)| (h + q.ln()).abs() - v.sqrt())
        .collect();
    Ok(CheckReport::new(NAME, t_grid.to_vec(), residuals, cfg.numeric_tol)
        .with_note(format!("v = {v:.12}")))
}

/// `H(_tX) + ln q(t)` on a grid.
pub fn entropy_shift_values(dist: &dyn Distribution, t_grid: &[f64], cfg: &VerifyConfig) -> Result<Vec<f64>> {
    collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        let ctx = PastContext::new(dist, t)?;
        Ok(ctx.past_entropy(&cfg.measure)?.value + ctx.reversed_hazard().ln())
    }))
}

/// If `H(_tX) + ln q(t) = c` on the grid, then
/// `V(_tX) = c^2 + (V(X) - c^2) / F(t)`.
pub fn check_constant_shift_form(
    dist: &dyn Distribution,
    c: f64,
    t_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<CheckReport> {
    const NAME: &str = "constant-entropy-shift-varentropy-form";
    let shifts = entropy_shift_values(dist, t_grid, cfg)?;
    let dev = shifts.iter().fold(0.0f64, |a, s| a.max((s - c).abs()));
    if !(dev <= cfg.constancy_tol) {
        return Ok(CheckReport::not_applicable(
            NAME,
            t_grid.to_vec(),
            format!("H + ln q deviates from c = {c} by {dev:.3e}"),
        ));
    }
    let total = match varentropy(dist, &cfg.measure) {
        Ok(v) if v.value.is_finite() => v.value,
        _ => {
            return Ok(CheckReport::not_applicable(
                NAME,
                t_grid.to_vec(),
                "varentropy of X is not finite".into(),
            ))
        }
    };
    let residuals = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        let ctx = PastContext::new(dist, t)?;
        let v = ctx.past_varentropy(&cfg.measure)?.value;
        Ok(v - (c * c + (total - c * c) / ctx.probability()))
    }))?;
    Ok(CheckReport::new(NAME, t_grid.to_vec(), residuals, cfg.numeric_tol)
        .with_note(format!("c = {c:.12}, V(X) = {total:.12}")))
}

/// Both sides of the equivalence between a constant generalized reversed
/// hazard `q_{1-c} = f / F^c = e^{c - H(X)}` and `H(_tX) + ln q(t) = c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub name: String,
    pub c: f64,
    pub t_grid: Vec<f64>,
    pub generalized_hazard: Vec<f64>,
    /// `e^{c - H(X)}`.
    pub predicted_constant: f64,
    pub entropy_shift: Vec<f64>,
    pub hazard_side_holds: bool,
    pub entropy_side_holds: bool,
    pub hazard_deviation: f64,
    pub entropy_deviation: f64,
}

impl EquivalenceReport {
    /// The two sides hold or fail together.
    pub fn passed(&self) -> bool {
        self.hazard_side_holds == self.entropy_side_holds
    }

    pub fn summary(&self) -> CheckSummary {
        CheckSummary {
            name: self.name.clone(),
            applicable: true,
            passed: self.passed(),
            max_residual: if self.hazard_side_holds {
                self.hazard_deviation
            } else {
                0.0
            },
            note: format!(
                "c = {:.6}: constant q_(1-c) = e^(c-H) {}, H + ln q = c {}",
                self.c,
                if self.hazard_side_holds { "holds" } else { "fails" },
                if self.entropy_side_holds { "holds" } else { "fails" },
            ),
        }
    }
}

pub fn check_q1mc_constancy_equivalence(
    dist: &dyn Distribution,
    c: f64,
    t_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<EquivalenceReport> {
    let h_total = entropy(dist, &cfg.measure)?.value;
    let predicted = (c - h_total).exp();
    let hazard = collect(
        t_grid
            .iter()
            .map(|&t| generalized_reversed_hazard(dist, t, 1.0 - c))
            .collect(),
    )?;
    let shift = entropy_shift_values(dist, t_grid, cfg)?;
    let hazard_deviation = hazard
        .iter()
        .fold(0.0f64, |a, q| a.max((q - predicted).abs() / predicted.max(1.0)));
    let entropy_deviation = shift.iter().fold(0.0f64, |a, s| a.max((s - c).abs()));
    Ok(EquivalenceReport {
        name: "generalized-hazard-constancy-equivalence".into(),
        c,
        t_grid: t_grid.to_vec(),
        generalized_hazard: hazard,
        predicted_constant: predicted,
        entropy_shift: shift,
        hazard_side_holds: hazard_deviation <= cfg.constancy_tol,
        entropy_side_holds: entropy_deviation <= cfg.constancy_tol,
        hazard_deviation,
        entropy_deviation,
    })
}

/// `V(_tY) = V(_sX)` and `H(_tY) = H(_sX) + ln a` for `Y = aX + b`,
/// `t = a s + b`, over a grid of base times `s`.
pub fn check_linear_transform(
    base: &DistRef,
    a: f64,
    b: f64,
    base_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<CheckReport> {
    let y = LinearTransform::new(base.clone(), a, b)?;
    let rows = collect(par::map_indexed(cfg.execution, base_grid, |_, &s| {
        let t = a * s + b;
        let (hx, vx, _, closed_x) = past_pair(&**base, s, &cfg.measure)?;
        let (hy, vy, _, closed_y) = past_pair(&y, t, &cfg.measure)?;
        let r = (vy - vx).abs().max((hy - hx - a.ln()).abs());
        Ok((t, r, closed_x && closed_y))
    }))?;
    let closed = rows.iter().all(|r| r.2);
    Ok(CheckReport::new(
        "linear-transform",
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        cfg.tol_for(closed),
    )
    .with_note(format!("a = {a}, b = {b}")))
}

/// Conditional moments of `A = ln(f/P)` and `B = ln|phi'|` over the window
/// that `Y <= t` pulls back to.
struct PulledBack {
    mean_b: f64,
    mean_b2: f64,
    mean_ab: f64,
}

fn pulled_back_moments(
    tr: &MonotonicTransform,
    s: f64,
    prob: f64,
    cfg: &MeasureConfig,
) -> Result<PulledBack> {
    let base = tr.base();
    let deriv = tr.map().derivative.clone();
    let support = base.support();
    let (lo, hi) = match tr.direction() {
        Direction::Increasing => (support.lower, s),
        Direction::Decreasing => (s, support.upper_value()),
    };
    let ln_prob = prob.ln();
    let q = crate::quadrature::QuadratureConfig {
        abs_tol: cfg.quadrature.abs_tol * prob.min(1.0),
        ..cfg.quadrature
    };
    let moment = |k: u8| -> Result<f64> {
        let r = integrate(
            |x| {
                let lf = base.ln_pdf(x);
                if lf == f64::NEG_INFINITY {
                    return 0.0;
                }
                let lb = deriv(x).abs().ln();
                let w = lf.exp();
                match k {
                    0 => w * lb,
                    1 => w * lb * lb,
                    _ => w * (lf - ln_prob) * lb,
                }
            },
            lo,
            hi,
            &q,
        )?
        .require_converged()?;
        Ok(r.value / prob)
    };
    Ok(PulledBack {
        mean_b: moment(0)?,
        mean_b2: moment(1)?,
        mean_ab: moment(2)?,
    })
}

/// Past entropy and varentropy of `Y = phi(X)` computed through the base
/// distribution: conditional moments of `ln|phi'(X)|` over `X < phi^{-1}(t)`
/// (increasing) or `X > phi^{-1}(t)` (decreasing, with residual measures).
pub fn transformed_past_measures(
    tr: &MonotonicTransform,
    t: f64,
    cfg: &MeasureConfig,
) -> Result<(f64, f64)> {
    let s = tr.to_base(t);
    let base = tr.base();
    let (h, v, prob) = match tr.direction() {
        Direction::Increasing => {
            let ctx = PastContext::new(&**base, s)?;
            (
                ctx.past_entropy(cfg)?.value,
                ctx.past_varentropy(cfg)?.value,
                ctx.probability(),
            )
        }
        Direction::Decreasing => (
            residual_entropy(&**base, s, cfg)?.value,
            residual_varentropy(&**base, s, cfg)?.value,
            base.sf(s),
        ),
    };
    let m = pulled_back_moments(tr, s, prob, cfg)?;
    let var_b = m.mean_b2 - m.mean_b * m.mean_b;
    let hy = h + m.mean_b;
    let vy = v - 2.0 * m.mean_ab + var_b - 2.0 * h * m.mean_b;
    Ok((hy, vy))
}

/// Direct past measures of `Y = phi(X)` against the pulled-back route.
pub fn check_monotonic_transform(
    tr: &MonotonicTransform,
    t_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<CheckReport> {
    let direct_cfg = cfg.measure.numerical_only();
    let residuals = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        let ctx = PastContext::new(tr, t)?;
        let hd = ctx.past_entropy(&direct_cfg)?.value;
        let vd = ctx.past_varentropy_definition(&direct_cfg)?.value;
        let (hp, vp) = transformed_past_measures(tr, t, &cfg.measure)?;
        Ok((vd - vp).abs().max((hd - hp).abs()))
    }))?;
    Ok(
        CheckReport::new("monotonic-transform", t_grid.to_vec(), residuals, cfg.numeric_tol)
            .with_note(format!("phi(x) = {}, {:?}", tr.map().label, tr.direction())),
    )
}

/// The Cacoullos–Papathanasiou weight of the inactivity time on a midpoint
/// grid: `sigma^2 w(x) g(x) = int_0^x (m - z) g(z) dz`, with `g` the
/// inactivity-time density, `m` its mean and `sigma^2` its variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaFunction {
    pub t: f64,
    pub mean: f64,
    pub variance: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// `int_0^x (m - z) g(z) dz` at the grid points.
    pub partial_moment: Vec<f64>,
    pub omega_values: Vec<f64>,
    pub omega_prime_values: Vec<f64>,
    pub spacing: f64,
}

impl OmegaFunction {
    /// `E[w'(X_(t))]` by the midpoint rule on the grid.
    pub fn expected_derivative(&self) -> f64 {
        self.omega_prime_values
            .iter()
            .zip(&self.density)
            .map(|(w, g)| w * g)
            .sum::<f64>()
            * self.spacing
    }

    /// `E[w(X_(t))]`, which equals 1 for a proper weight.
    pub fn expected_value(&self) -> f64 {
        self.omega_values
            .iter()
            .zip(&self.density)
            .map(|(w, g)| w * g)
            .sum::<f64>()
            * self.spacing
    }

    /// Largest violation of the defining relation, recomputing the right-hand
    /// integral from 0 at every `stride`-th grid point.
    pub fn relation_residual(&self, dist: &dyn Distribution, stride: usize, cfg: &MeasureConfig) -> Result<f64> {
        let at_t = dist.cdf(self.t);
        let g = |z: f64| dist.pdf(self.t - z) / at_t;
        let mut worst = 0.0f64;
        for i in (0..self.grid.len()).step_by(stride.max(1)) {
            let x = self.grid[i];
            let r = integrate(|z| (self.mean - z) * g(z), 0.0, x, &cfg.quadrature)?
                .require_converged()?;
            let lhs = self.variance * self.omega_values[i] * self.density[i];
            worst = worst.max((lhs - r.value).abs());
        }
        Ok(worst)
    }
}


/// Tabulates the weight function of the inactivity time at `ctx.t()` on
/// `grid_size` cell midpoints; `w'` uses fourth-order differences.
pub fn omega_function(ctx: &PastContext<'_>, grid_size: usize, cfg: &VerifyConfig) -> Result<OmegaFunction> {
    let n = grid_size.max(8);
    let dist = ctx.dist();
    let t = ctx.t();
    let at_t = ctx.probability();
    let width = t - dist.support().lower;
    let mean = ctx.mean_inactivity_time(&cfg.measure)?.value;
    let variance = ctx.variance_inactivity_time(&cfg.measure)?.value;
    if !(variance > 1e-14 * width * width) {
        return Err(Error::Domain(format!(
            "inactivity time at t = {t} is degenerate (variance {variance:e})"
        )));
    }
    let h = width / n as f64;
    let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let g = |z: f64| dist.pdf(t - z) / at_t;
    let density: Vec<f64> = grid.iter().map(|&x| g(x)).collect();

    // Pieces [0, x0], [x0, x1], ..., [x_{n-1}, width].
    let mut edges = Vec::with_capacity(n + 2);
    edges.push(0.0);
    edges.extend_from_slice(&grid);
    edges.push(width);
    let q = crate::quadrature::QuadratureConfig {
        abs_tol: cfg.measure.quadrature.abs_tol / n as f64,
        ..cfg.measure.quadrature
    };
    let pieces = collect(par::map_range(cfg.execution, n + 1, |i| {
        Ok(integrate(|z| (mean - z) * g(z), edges[i], edges[i + 1], &q)?
            .require_converged()?
            .value)
    }))?;
    let mut forward = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += pieces[i];
        forward[i] = acc;
    }
    let mut backward = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        acc += pieces[i + 1];
        backward[i] = -acc;
    }
    let partial_moment: Vec<f64> = (0..n)
        .map(|i| if grid[i] < 0.5 * width { forward[i] } else { backward[i] })
        .collect();
    // Where the density underflows, w takes its limiting value 0; those cells
    // carry no weight in E w'.
    let omega_values: Vec<f64> = partial_moment
        .iter()
        .zip(&density)
        .map(|(m, &d)| if d > 0.0 { m / (variance * d) } else { 0.0 })
        .collect();
    let omega_prime_values = five_point_derivative(&omega_values, h);
    Ok(OmegaFunction {
        t,
        mean,
        variance,
        grid,
        density,
        partial_moment,
        omega_values,
        omega_prime_values,
        spacing: h,
    })
}

fn five_point_derivative(w: &[f64], h: f64) -> Vec<f64> {
    let n = w.len();
    let s = 12.0 * h;
    (0..n)
        .map(|i| match i {
            0 => (-25.0 * w[0] + 48.0 * w[1] - 36.0 * w[2] + 16.0 * w[3] - 3.0 * w[4]) / s,
            1 => (-3.0 * w[0] - 10.0 * w[1] + 18.0 * w[2] - 6.0 * w[3] + w[4]) / s,
            i if i == n - 2 => {
                (3.0 * w[n - 1] + 10.0 * w[n - 2] - 18.0 * w[n - 3] + 6.0 * w[n - 4] - w[n - 5]) / s
            }
            i if i == n - 1 => {
                (25.0 * w[n - 1] - 48.0 * w[n - 2] + 36.0 * w[n - 3] - 16.0 * w[n - 4]
                    + 3.0 * w[n - 5])
                    / s
            }
            i => (-w[i + 2] + 8.0 * w[i + 1] - 8.0 * w[i - 1] + w[i - 2]) / s,
        })
        .collect()
}

/// `V(_tX) >= sigma^2(t) [E w'(X_(t))]^2` at a single inspection time.
pub fn check_lower_bound(ctx: &PastContext<'_>, cfg: &VerifyConfig) -> Result<BoundReport> {
    let (lhs, rhs) = lower_bound_sides(ctx, cfg)?;
    Ok(BoundReport::build(
        "variance-weight-lower-bound",
        Orientation::LhsAtLeastRhs,
        cfg.bound_tol,
        vec![ctx.t()],
        vec![lhs],
        vec![rhs],
    ))
}

fn lower_bound_sides(ctx: &PastContext<'_>, cfg: &VerifyConfig) -> Result<(f64, f64)> {
    let omega = omega_function(ctx, cfg.omega_grid, cfg)?;
    let lhs = ctx.past_varentropy(&cfg.measure)?.value;
    let rhs = omega.variance * omega.expected_derivative().powi(2);
    Ok((lhs, rhs))
}

/// [`check_lower_bound`] over a grid of inspection times.
pub fn check_lower_bound_grid(dist: &dyn Distribution, t_grid: &[f64], cfg: &VerifyConfig) -> Result<BoundReport> {
    let inner = VerifyConfig {
        execution: Execution::Sequential,
        ..*cfg
    };
    let sides = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        lower_bound_sides(&PastContext::new(dist, t)?, &inner)
    }))?;
    let (lhs, rhs) = sides.into_iter().unzip();
    Ok(BoundReport::build(
        "variance-weight-lower-bound",
        Orientation::LhsAtLeastRhs,
        cfg.bound_tol,
        t_grid.to_vec(),
        lhs,
        rhs,
    ))
}

const LOG_CONCAVITY_POINTS: usize = 256;
const LOG_CONCAVITY_TOL: f64 = 1e-8;

/// Largest second difference of `ln f` on a 256-point grid between the
/// 0.001 and 0.999 quantiles. Non-positive (up to `1e-8`) suggests a
/// log-concave density; this is a numerical screen, not a proof.
pub fn log_concavity_defect(dist: &dyn Distribution) -> f64 {
    let lo = dist.quantile(1e-3);
    let hi = dist.quantile(1.0 - 1e-3);
    let h = (hi - lo) / (LOG_CONCAVITY_POINTS - 1) as f64;
    let lf: Vec<f64> = (0..LOG_CONCAVITY_POINTS)
        .map(|i| dist.ln_pdf(lo + i as f64 * h))
        .collect();
    lf.windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::NEG_INFINITY, |a, d| if d.is_nan() { f64::INFINITY } else { a.max(d) })
}

pub fn is_log_concave(dist: &dyn Distribution) -> bool {
    log_concavity_defect(dist) <= LOG_CONCAVITY_TOL
}

/// `V(_tX) <= 1` for log-concave densities; not applicable otherwise.
pub fn check_upper_bound_logconcave(
    dist: &dyn Distribution,
    t_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<BoundReport> {
    const NAME: &str = "log-concave-upper-bound";
    let defect = log_concavity_defect(dist);
    if !(defect <= LOG_CONCAVITY_TOL) {
        let mut r = BoundReport::build(
            NAME,
            Orientation::LhsAtMostRhs,
            cfg.bound_tol,
            t_grid.to_vec(),
            Vec::new(),
            Vec::new(),
        );
        r.applicability = Applicability::NotApplicable(format!(
            "log-concavity failed: second difference of ln f reaches {defect:.3e}"
        ));
        return Ok(r);
    }
    let lhs = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        Ok(PastContext::new(dist, t)?.past_varentropy(&cfg.measure)?.value)
    }))?;
    let rhs = vec![1.0; t_grid.len()];
    Ok(BoundReport::build(
        NAME,
        Orientation::LhsAtMostRhs,
        cfg.bound_tol,
        t_grid.to_vec(),
        lhs,
        rhs,
    ))
}

/// The two quadrature forms of past entropy, and of past varentropy, agree.
pub fn check_quadrature_routes(
    dist: &dyn Distribution,
    t_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<(CheckReport, CheckReport)> {
    let rows = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        let ctx = PastContext::new(dist, t)?;
        let m = &cfg.measure;
        let dh = ctx.past_entropy_log_density(m)?.value - ctx.past_entropy_definition(m)?.value;
        let dv =
            ctx.past_varentropy_log_density(m)?.value - ctx.past_varentropy_definition(m)?.value;
        Ok((dh, dv))
    }))?;
    let (dh, dv) = rows.into_iter().unzip();
    Ok((
        CheckReport::new("past-entropy-routes", t_grid.to_vec(), dh, cfg.route_tol),
        CheckReport::new("past-varentropy-routes", t_grid.to_vec(), dv, cfg.route_tol),
    ))
}

/// Past varentropy is a variance: `V(_tX) >= -1e-9`.
pub fn check_varentropy_nonnegative(
    dist: &dyn Distribution,
    t_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<BoundReport> {
    let lhs = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        Ok(PastContext::new(dist, t)?
            .past_varentropy_definition(&cfg.measure)?
            .value)
    }))?;
    Ok(BoundReport::build(
        "past-varentropy-nonnegative",
        Orientation::LhsAtLeastRhs,
        1e-9,
        t_grid.to_vec(),
        lhs,
        vec![0.0; t_grid.len()],
    ))
}

/// Entropy and varentropy of the explicit inactivity-time law equal the past
/// measures.
///
/// Not applicable when the density is unbounded at the lower support
/// endpoint: the inactivity density then blows up at `x = t`, where double
/// precision abscissae cannot resolve it.
pub fn check_inactivity_equivalence(dist: &DistRef, t_grid: &[f64], cfg: &VerifyConfig) -> Result<CheckReport> {
    const NAME: &str = "inactivity-time-equivalence";
    if unbounded_at_lower(&**dist) {
        return Ok(CheckReport::not_applicable(
            NAME,
            t_grid.to_vec(),
            "density unbounded at the lower support endpoint".to_string(),
        ));
    }
    let num = cfg.measure.numerical_only();
    let residuals = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        let ctx = PastContext::new(&**dist, t)?;
        let it = InactivityTime::new(dist.clone(), t)?;
        let dh = entropy(&it, &num)?.value - ctx.past_entropy(&num)?.value;
        let dv = varentropy(&it, &num)?.value - ctx.past_varentropy(&num)?.value;
        Ok(dh.abs().max(dv.abs()))
    }))?;
    Ok(CheckReport::new(
        NAME,
        t_grid.to_vec(),
        residuals,
        cfg.route_tol,
    ))
}

/// Density at the `1e-12` quantile exceeds ten times that at the `1e-6`
/// quantile.
pub fn unbounded_at_lower(dist: &dyn Distribution) -> bool {
    dist.pdf(dist.quantile(1e-12)) > 10.0 * dist.pdf(dist.quantile(1e-6))
}

/// `F(t) = exp(-int_t q)` and `q(t) = (1 - m*'(t)) / m*(t)`; the second
/// residual is relative to `max(1, q)`.
pub fn check_reversed_hazard_consistency(
    dist: &dyn Distribution,
    t_grid: &[f64],
    cfg: &VerifyConfig,
) -> Result<(CheckReport, CheckReport)> {
    const MIT_STEP: f64 = 1e-4;
    let rows = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        let ctx = PastContext::new(dist, t)?;
        let integral = integrated_reversed_hazard(dist, t, &cfg.measure)?.value;
        let r1 = (-integral).exp() - ctx.probability();
        let m = ctx.mean_inactivity_time(&cfg.measure)?.value;
        let dm = numerical_derivative(
            |s| PastContext::new(dist, s)?.mean_inactivity_time(&cfg.measure).map(|v| v.value),
            t,
            MIT_STEP,
        )?;
        let q = ctx.reversed_hazard();
        let r2 = (q - (1.0 - dm) / m) / q.max(1.0);
        Ok((r1, r2))
    }))?;
    let (r1, r2) = rows.into_iter().unzip();
    Ok((
        CheckReport::new("cumulative-reversed-hazard-integral", t_grid.to_vec(), r1, 1e-7),
        CheckReport::new("reversed-hazard-from-mean-inactivity", t_grid.to_vec(), r2, cfg.numeric_tol),
    ))
}

/// Gamma-substitution and direct routes for a PRHR member agree.
pub fn check_prhr_dual_route(fam: &Prhr, t_grid: &[f64], cfg: &VerifyConfig) -> Result<CheckReport> {
    let num = cfg.measure.numerical_only();
    let residuals = collect(par::map_indexed(cfg.execution, t_grid, |_, &t| {
        let ctx = PastContext::new(fam, t)?;
        let dh = prhr_past_entropy(fam, t, &num)?.value - ctx.past_entropy(&num)?.value;
        let dv = prhr_past_varentropy(fam, t, &num)?.value - ctx.past_varentropy(&num)?.value;
        Ok(dh.abs().max(dv.abs()))
    }))?;
    Ok(CheckReport::new(
        "prhr-gamma-vs-direct",
        t_grid.to_vec(),
        residuals,
        cfg.dual_route_tol,
    )
    .with_note(format!("a = {}", fam.power())))
}

/// `Lambda*_a(t) = a Lambda*(t)` and `q_a(t) = a q(t)`, relative residuals.
pub fn check_prhr_proportionality(fam: &Prhr, t_grid: &[f64]) -> Result<CheckReport> {
    let a = fam.power();
    let base = fam.base();
    let residuals = collect(
        t_grid
            .iter()
            .map(|&t| {
                let lam = cumulative_reversed_hazard(fam, t)?;
                let lam_base = cumulative_reversed_hazard(&**base, t)?;
                let q = crate::measures::reversed_hazard(fam, t)?;
                let q_base = crate::measures::reversed_hazard(&**base, t)?;
                let r1 = if lam_base == 0.0 { lam } else { lam / (a * lam_base) - 1.0 };
                let r2 = q / (a * q_base) - 1.0;
                Ok(r1.abs().max(r2.abs()))
            })
            .collect(),
    )?;
    Ok(CheckReport::new("prhr-proportionality", t_grid.to_vec(), residuals, 1e-8))
}

/// `|H(_tX) - H(X)|` and `|V(_tX) - V(X)|` at `t = quantile(p)`.
pub fn check_limits(dist: &dyn Distribution, p: f64, tol: f64, cfg: &VerifyConfig) -> Result<CheckReport> {
    let t = dist.quantile(p);
    let ctx = PastContext::new(dist, t)?;
    let dh = ctx.past_entropy(&cfg.measure)?.value - entropy(dist, &cfg.measure)?.value;
    let dv = ctx.past_varentropy(&cfg.measure)?.value - varentropy(dist, &cfg.measure)?.value;
    Ok(CheckReport::new("limit-at-upper-support", vec![t, t], vec![dh, dv], tol)
        .with_note(format!("F(t) = 1 - {:.1e}", 1.0 - p)))
}

/// Inspection times at `n` equally spaced probability levels in `[p_lo, p_hi]`.
pub fn quantile_grid(dist: &dyn Distribution, p_lo: f64, p_hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![dist.quantile(0.5 * (p_lo + p_hi))];
    }
    (0..n)
        .map(|i| dist.quantile(p_lo + (p_hi - p_lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Runs every check that applies to a plain distribution on the 10-point
/// grid of quantile levels 0.05..0.95.
pub fn standard_suite(dist: &DistRef, cfg: &VerifyConfig) -> Vec<CheckSummary> {
    let grid = quantile_grid(&**dist, 0.05, 0.95, 10);
    let d = &**dist;
    let mut out = Vec::new();
    let mut pair = |name: &str, r: Result<(CheckReport, CheckReport)>| match r {
        Ok((a, b)) => {
            out.push(a.summary());
            out.push(b.summary());
        }
        Err(e) => out.push(CheckSummary::from_error(name, &e)),
    };
    pair("quadrature-routes", check_quadrature_routes(d, &grid, cfg));
    pair("derivative-identities", check_derivative_identities(d, &grid, cfg));
    pair(
        "reversed-hazard-consistency",
        check_reversed_hazard_consistency(d, &grid, cfg),
    );

    let one = |name: &str, r: Result<CheckSummary>| match r {
        Ok(s) => s,
        Err(e) => CheckSummary::from_error(name, &e),
    };
    out.push(one(
        "past-varentropy-nonnegative",
        check_varentropy_nonnegative(d, &grid, cfg).map(|r| r.summary()),
    ));
    out.push(one(
        "inactivity-time-equivalence",
        check_inactivity_equivalence(dist, &grid, cfg).map(|r| r.summary()),
    ));
    out.push(one(
        "constant-varentropy",
        check_constant_varentropy(d, &grid, cfg).map(|r| r.summary()),
    ));
    let c = entropy_shift_values(d, &grid[..1], cfg).map(|v| v[0]);
    out.push(one(
        "constant-entropy-shift-varentropy-form",
        c.clone()
            .and_then(|c| check_constant_shift_form(d, c, &grid, cfg))
            .map(|r| r.summary()),
    ));
    out.push(one(
        "generalized-hazard-constancy-equivalence",
        c.and_then(|c| check_q1mc_constancy_equivalence(d, c, &grid, cfg))
            .map(|r| r.summary()),
    ));
    out.push(one(
        "variance-weight-lower-bound",
        check_lower_bound_grid(d, &grid, cfg).map(|r| r.summary()),
    ));
    out.push(one(
        "log-concave-upper-bound",
        check_upper_bound_logconcave(d, &grid, cfg).map(|r| r.summary()),
    ));
    out.push(one(
        "limit-at-upper-support",
        check_limits(d, 1.0 - 1e-8, 1e-4, cfg).map(|r| r.summary()),
    ));
    out
}
