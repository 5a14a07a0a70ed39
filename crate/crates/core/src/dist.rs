//! Lifetime distributions on subsets of `[0, inf)` and the wrappers built on
//! top of them: affine maps, strictly monotonic maps, proportional reversed
//! hazards powers and the inactivity time at a fixed inspection time.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Upper {
    Finite(f64),
    Infinite,
}

/// Support `(lower, upper)` of a lifetime law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lower: f64,
    pub upper: Upper,
}

impl Support {
    pub fn new(lower: f64, upper: Upper) -> Result<Self> {
        if !(lower.is_finite() && lower >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "lower",
                value: lower,
                reason: "support must start at a finite point >= 0",
            });
        }
        if let Upper::Finite(u) = upper {
            if !(u.is_finite() && u > lower) {
                return Err(Error::InvalidParameter {
                    name: "upper",
                    value: u,
                    reason: "support upper bound must be finite and exceed lower",
                });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn bounded(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, Upper::Finite(upper))
    }

    pub fn half_line(lower: f64) -> Result<Self> {
        Self::new(lower, Upper::Infinite)
    }

    /// Upper end as a float, `f64::INFINITY` when unbounded.
    pub fn upper_value(&self) -> f64 {
        match self.upper {
            Upper::Finite(u) => u,
            Upper::Infinite => f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.upper, Upper::Finite(_))
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        x > self.lower && x < self.upper_value()
    }
}

/// Measures that some distributions can report analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedForm {
    Entropy,
    Varentropy,
    PastEntropy,
    PastVarentropy,
    MeanInactivity,
    VarianceInactivity,
}

/// A lifetime law with support inside `[0, inf)`.
///
/// Implementations are immutable and shareable across threads.
pub trait Distribution: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn support(&self) -> Support;

    fn pdf(&self, x: f64) -> f64;

    fn cdf(&self, x: f64) -> f64;

    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// `ln pdf(x)`; `-inf` where the density vanishes.
    fn ln_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }

    /// `ln pdf(lower + u)` for an offset `u` above the lower support endpoint.
    /// Shifted laws override this so that densities singular at the endpoint
    /// stay resolvable when `lower` is large compared with `u`.
    fn ln_pdf_above_lower(&self, u: f64) -> f64 {
        self.ln_pdf(self.support().lower + u)
    }

    fn quantile(&self, p: f64) -> f64 {
        quantile_by_bisection(self, p)
    }

    /// Analytic value of `measure` (at inspection time `t` for past measures).
    fn closed_form(&self, _measure: ClosedForm, _t: f64) -> Option<f64> {
        None
    }
}

pub type DistRef = Arc<dyn Distribution>;

/// Inverts the cdf by bisection to an absolute tolerance of `1e-12`
/// (relative for large abscissae).
pub fn quantile_by_bisection<D: Distribution + ?Sized>(dist: &D, p: f64) -> f64 {
    let support = dist.support();
    if !(p > 0.0) {
        return support.lower;
    }
    if !(p < 1.0) {
        return support.upper_value();
    }
    let mut lo = support.lower;
    let mut hi = match support.upper {
        Upper::Finite(u) => u,
        Upper::Infinite => {
            let mut h = lo + 1.0;
            while dist.cdf(h) < p && h < f64::MAX / 4.0 {
                lo = h;
                h = 2.0 * h + 1.0;
            }
            h
        }
    };
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * hi.abs().max(1.0) || mid <= lo || mid >= hi {
            break;
        }
        if dist.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    b: f64,
}

impl Uniform {
    pub fn new(b: f64) -> Result<Self> {
        Ok(Self {
            b: positive("b", b)?,
        })
    }
}

impl Distribution for Uniform {
    fn name(&self) -> String {
        format!("uniform(0, {})", self.b)
    }

    fn support(&self) -> Support {
        Support {
            lower: 0.0,
            upper: Upper::Finite(self.b),
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if (0.0..=self.b).contains(&x) {
            1.0 / self.b
        } else {
            0.0
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        (x / self.b).clamp(0.0, 1.0)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if (0.0..=self.b).contains(&x) {
            -self.b.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        p.clamp(0.0, 1.0) * self.b
    }

    fn closed_form(&self, measure: ClosedForm, t: f64) -> Option<f64> {
        Some(match measure {
            ClosedForm::Entropy => self.b.ln(),
            ClosedForm::Varentropy | ClosedForm::PastVarentropy => 0.0,
            ClosedForm::PastEntropy => t.ln(),
            ClosedForm::MeanInactivity => t / 2.0,
            ClosedForm::VarianceInactivity => t * t / 12.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    lambda: f64,
}

impl Exponential {
    pub fn new(lambda: f64) -> Result<Self> {
        Ok(Self {
            lambda: positive("lambda", lambda)?,
        })
    }

    pub fn rate(&self) -> f64 {
        self.lambda
    }
}

impl Distribution for Exponential {
    fn name(&self) -> String {
        format!("exponential({})", self.lambda)
    }

    fn support(&self) -> Support {
        Support {
            lower: 0.0,
            upper: Upper::Infinite,
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.lambda * (-self.lambda * x).exp()
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.lambda * x).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.lambda * x).exp()
        }
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.lambda.ln() - self.lambda * x
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        -(-p.clamp(0.0, 1.0)).ln_1p() / self.lambda
    }

    fn closed_form(&self, measure: ClosedForm, t: f64) -> Option<f64> {
        let l = self.lambda;
        let lt = l * t;
        // r = e^{-lt} / (1 - e^{-lt}); e^{-lt} / (1 - e^{-lt})^2 = r (1 + r).
        let r = 1.0 / lt.exp_m1();
        Some(match measure {
            ClosedForm::Entropy => 1.0 - l.ln(),
            ClosedForm::Varentropy => 1.0,
            ClosedForm::PastEntropy => 1.0 + (-(-lt).exp_m1() / l).ln() - lt * r,
            ClosedForm::PastVarentropy => 1.0 - lt * lt * r * (1.0 + r),
            ClosedForm::MeanInactivity => t - (1.0 / l - t * r),
            ClosedForm::VarianceInactivity => 1.0 / (l * l) - t * t * r * (1.0 + r),
        })
    }
}

/// `F(x) = x^k` on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    k: f64,
}

impl PowerLaw {
    pub fn new(k: f64) -> Result<Self> {
        Ok(Self {
            k: positive("k", k)?,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.k
    }
}

impl Distribution for PowerLaw {
    fn name(&self) -> String {
        format!("power({})", self.k)
    }

    fn support(&self) -> Support {
        Support {
            lower: 0.0,
            upper: Upper::Finite(1.0),
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if (0.0..=1.0).contains(&x) {
            self.k * x.powf(self.k - 1.0)
        } else {
            0.0
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        x.clamp(0.0, 1.0).powf(self.k)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if (0.0..=1.0).contains(&x) {
            if self.k == 1.0 {
                0.0
            } else {
                self.k.ln() + (self.k - 1.0) * x.ln()
            }
        } else {
            f64::NEG_INFINITY
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        p.clamp(0.0, 1.0).powf(1.0 / self.k)
    }

    fn closed_form(&self, measure: ClosedForm, t: f64) -> Option<f64> {
        // The past lifetime at t is t times a copy of the law itself.
        let k = self.k;
        let h = 1.0 - 1.0 / k - k.ln();
        let v = (1.0 - 1.0 / k).powi(2);
        Some(match measure {
            ClosedForm::Entropy => h,
            ClosedForm::Varentropy | ClosedForm::PastVarentropy => v,
            ClosedForm::PastEntropy => t.ln() + h,
            ClosedForm::MeanInactivity => t / (k + 1.0),
            ClosedForm::VarianceInactivity => {
                t * t * (k / (k + 2.0) - (k / (k + 1.0)).powi(2))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weibull {
    shape: f64,
    scale: f64,
}

impl Weibull {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self {
            shape: positive("shape", shape)?,
            scale: positive("scale", scale)?,
        })
    }
}

impl Distribution for Weibull {
    fn name(&self) -> String {
        format!("weibull(shape={}, scale={})", self.shape, self.scale)
    }

    fn support(&self) -> Support {
        Support {
            lower: 0.0,
            upper: Upper::Infinite,
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let z = x / self.scale;
        self.shape / self.scale * z.powf(self.shape - 1.0) * (-z.powf(self.shape)).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-(x / self.scale).powf(self.shape)).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-(x / self.scale).powf(self.shape)).exp()
        }
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let z = x / self.scale;
        (self.shape / self.scale).ln() + (self.shape - 1.0) * z.ln() - z.powf(self.shape)
    }

    fn quantile(&self, p: f64) -> f64 {
        self.scale * (-(-p.clamp(0.0, 1.0)).ln_1p()).powf(1.0 / self.shape)
    }

    fn closed_form(&self, measure: ClosedForm, _t: f64) -> Option<f64> {
        match measure {
            ClosedForm::Entropy => {
                Some(EULER_GAMMA * (1.0 - 1.0 / self.shape) + (self.scale / self.shape).ln() + 1.0)
            }
            _ => None,
        }
    }
}

/// Builds one of the built-in families from positional parameters:
/// `uniform [b]`, `exponential [lambda]`, `power [k]`,
/// `weibull [shape]` or `weibull [shape, scale]`.
pub fn make_builtin(name: &str, params: &[f64]) -> Result<DistRef> {
    let arity = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "family `{name}` takes {n} parameter(s), got {}",
                params.len()
            )))
        }
    };
    Ok(match name {
        "uniform" => {
            arity(1)?;
            Arc::new(Uniform::new(params[0])?)
        }
        "exponential" => {
            arity(1)?;
            Arc::new(Exponential::new(params[0])?)
        }
        "power" => {
            arity(1)?;
            Arc::new(PowerLaw::new(params[0])?)
        }
        "weibull" => match params {
            [shape] => Arc::new(Weibull::new(*shape, 1.0)?),
            [shape, scale] => Arc::new(Weibull::new(*shape, *scale)?),
            _ => {
                return Err(Error::Parse(format!(
                    "family `weibull` takes 1 or 2 parameters, got {}",
                    params.len()
                )))
            }
        },
        other => return Err(Error::UnknownFamily(other.to_string())),
    })
}

/// `Y = a X + b` with `a > 0`, `b >= 0`.
#[derive(Debug, Clone)]
pub struct LinearTransform {
    base: DistRef,
    a: f64,
    b: f64,
}

impl LinearTransform {
    pub fn new(base: DistRef, a: f64, b: f64) -> Result<Self> {
        let a = positive("a", a)?;
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "b",
                value: b,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self { base, a, b })
    }

    pub fn base(&self) -> &DistRef {
        &self.base
    }

    pub fn scale(&self) -> f64 {
        self.a
    }

    pub fn shift(&self) -> f64 {
        self.b
    }

    /// Base-time point corresponding to `t` on the transformed scale.
    pub fn to_base(&self, t: f64) -> f64 {
        (t - self.b) / self.a
    }
}

pub fn linear_transform(base: DistRef, a: f64, b: f64) -> Result<DistRef> {
    Ok(Arc::new(LinearTransform::new(base, a, b)?))
}

impl Distribution for LinearTransform {
    fn name(&self) -> String {
        format!("{} * {} + {}", self.a, self.base.name(), self.b)
    }

    fn support(&self) -> Support {
        let s = self.base.support();
        Support {
            lower: self.a * s.lower + self.b,
            upper: match s.upper {
                Upper::Finite(u) => Upper::Finite(self.a * u + self.b),
                Upper::Infinite => Upper::Infinite,
            },
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        self.base.pdf(self.to_base(x)) / self.a
    }

    fn cdf(&self, x: f64) -> f64 {
        self.base.cdf(self.to_base(x))
    }

    fn sf(&self, x: f64) -> f64 {
        self.base.sf(self.to_base(x))
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        self.base.ln_pdf(self.to_base(x)) - self.a.ln()
    }

    fn ln_pdf_above_lower(&self, u: f64) -> f64 {
        self.base.ln_pdf_above_lower(u / self.a) - self.a.ln()
    }

    fn quantile(&self, p: f64) -> f64 {
        self.a * self.base.quantile(p) + self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A strictly monotonic map together with its inverse and derivative.
#[derive(Clone)]
pub struct MonotoneMap {
    pub phi: ScalarFn,
    pub inverse: ScalarFn,
    pub derivative: ScalarFn,
    pub label: String,
}

impl MonotoneMap {
    pub fn new<P, I, D>(label: impl Into<String>, phi: P, inverse: I, derivative: D) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            phi: Arc::new(phi),
            inverse: Arc::new(inverse),
            derivative: Arc::new(derivative),
            label: label.into(),
        }
    }

    pub fn identity() -> Self {
        Self::new("x", |x| x, |y| y, |_| 1.0)
    }

    pub fn affine(a: f64, b: f64) -> Self {
        Self::new(
            format!("{a}x+{b}"),
            move |x| a * x + b,
            move |y| (y - b) / a,
            move |_| a,
        )
    }

    /// `x^p` on `(0, inf)`, `p != 0`; decreasing when `p < 0`.
    pub fn power(p: f64) -> Self {
        Self::new(
            format!("x^{p}"),
            move |x: f64| x.powf(p),
            move |y: f64| y.powf(1.0 / p),
            move |x: f64| p * x.powf(p - 1.0),
        )
    }

    pub fn reciprocal() -> Self {
        Self::new("1/x", |x: f64| 1.0 / x, |y: f64| 1.0 / y, |x: f64| -1.0 / (x * x))
    }

    /// `e^x - 1`, mapping `(0, inf)` onto itself.
    pub fn expm1() -> Self {
        Self::new("exp(x)-1", f64::exp_m1, f64::ln_1p, f64::exp)
    }
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneMap")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

const PROBE_POINTS: usize = 32;

/// `Y = phi(X)` for a strictly monotonic `phi`.
#[derive(Debug, Clone)]
pub struct MonotonicTransform {
    base: DistRef,
    map: MonotoneMap,
    direction: Direction,
    support: Support,
}

impl MonotonicTransform {
    /// Validates the map on a 32-point probe grid of base quantiles and infers
    /// its direction from the sign of the derivative.
    pub fn new(base: DistRef, map: MonotoneMap) -> Result<Self> {
        let probes: Vec<f64> = (0..PROBE_POINTS)
            .map(|i| base.quantile((i as f64 + 0.5) / PROBE_POINTS as f64))
            .collect();
        let reject = |msg: String| Err(Error::InconsistentTransform(msg));

        let direction = match (map.derivative)(probes[0]) {
            d if d > 0.0 => Direction::Increasing,
            d if d < 0.0 => Direction::Decreasing,
            d => return reject(format!("derivative {d} at x = {} has no sign", probes[0])),
        };
        let sign = if direction == Direction::Increasing { 1.0 } else { -1.0 };
        for (i, &x) in probes.iter().enumerate() {
            let d = (map.derivative)(x);
            if !(sign * d > 0.0) {
                return reject(format!("derivative {d} at x = {x} contradicts {direction:?}"));
            }
            let y = (map.phi)(x);
            let back = (map.inverse)(y);
            if !((back - x).abs() <= 1e-8 * (1.0 + x.abs())) {
                return reject(format!("inverse(phi({x})) = {back}"));
            }
            if i > 0 {
                let prev = (map.phi)(probes[i - 1]);
                if probes[i - 1] < x && !(sign * (y - prev) > 0.0) {
                    return reject(format!("phi is not strictly {direction:?} near x = {x}"));
                }
            }
        }

        let s = base.support();
        let at_lower = (map.phi)(s.lower);
        let at_upper = (map.phi)(s.upper_value());
        let (lo, hi) = match direction {
            Direction::Increasing => (at_lower, at_upper),
            Direction::Decreasing => (at_upper, at_lower),
        };
        if lo.is_nan() || hi.is_nan() {
            return reject("phi is undefined at a support endpoint".into());
        }
        let upper = if hi.is_infinite() {
            Upper::Infinite
        } else {
            Upper::Finite(hi)
        };
        let support = Support::new(lo.max(0.0), upper).map_err(|_| {
            Error::InconsistentTransform(format!("image ({lo}, {hi}) is not a lifetime support"))
        })?;
        if lo < 0.0 {
            return reject(format!("image of the support starts at {lo} < 0"));
        }
        Ok(Self {
            base,
            map,
            direction,
            support,
        })
    }

    pub fn base(&self) -> &DistRef {
        &self.base
    }

    pub fn map(&self) -> &MonotoneMap {
        &self.map
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn to_base(&self, y: f64) -> f64 {
        (self.map.inverse)(y)
    }
}

pub fn monotonic_transform(base: DistRef, map: MonotoneMap) -> Result<DistRef> {
    Ok(Arc::new(MonotonicTransform::new(base, map)?))
}

impl Distribution for MonotonicTransform {
    fn name(&self) -> String {
        format!("phi({}) with phi(x) = {}", self.base.name(), self.map.label)
    }

    fn support(&self) -> Support {
        self.support
    }

    fn pdf(&self, y: f64) -> f64 {
        if !(y >= self.support.lower && y <= self.support.upper_value()) {
            return 0.0;
        }
        let x = self.to_base(y);
        let v = self.base.pdf(x) / (self.map.derivative)(x).abs();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    }

    fn cdf(&self, y: f64) -> f64 {
        if y <= self.support.lower {
            return 0.0;
        }
        if y >= self.support.upper_value() {
            return 1.0;
        }
        let x = self.to_base(y);
        match self.direction {
            Direction::Increasing => self.base.cdf(x),
            Direction::Decreasing => self.base.sf(x),
        }
    }

    fn sf(&self, y: f64) -> f64 {
        if y <= self.support.lower {
            return 1.0;
        }
        if y >= self.support.upper_value() {
            return 0.0;
        }
        let x = self.to_base(y);
        match self.direction {
            Direction::Increasing => self.base.sf(x),
            Direction::Decreasing => self.base.cdf(x),
        }
    }

    fn ln_pdf(&self, y: f64) -> f64 {
        if !(y >= self.support.lower && y <= self.support.upper_value()) {
            return f64::NEG_INFINITY;
        }
        let x = self.to_base(y);
        self.base.ln_pdf(x) - (self.map.derivative)(x).abs().ln()
    }

    fn quantile(&self, p: f64) -> f64 {
        match self.direction {
            Direction::Increasing => (self.map.phi)(self.base.quantile(p)),
            Direction::Decreasing => (self.map.phi)(self.base.quantile(1.0 - p)),
        }
    }
}

/// Proportional reversed hazards family member `F_a = F^a`.
#[derive(Debug, Clone)]
pub struct Prhr {
    base: DistRef,
    a: f64,
}

impl Prhr {
    pub fn new(base: DistRef, a: f64) -> Result<Self> {
        Ok(Self {
            base,
            a: positive("a", a)?,
        })
    }

    pub fn base(&self) -> &DistRef {
        &self.base
    }

    pub fn power(&self) -> f64 {
        self.a
    }
}

pub fn prhr(base: DistRef, a: f64) -> Result<Prhr> {
    Prhr::new(base, a)
}

impl Distribution for Prhr {
    fn name(&self) -> String {
        format!("prhr({}, a={})", self.base.name(), self.a)
    }

    fn support(&self) -> Support {
        self.base.support()
    }

    fn pdf(&self, x: f64) -> f64 {
        let f = self.base.pdf(x);
        if f == 0.0 {
            return 0.0;
        }
        self.a * self.base.cdf(x).powf(self.a - 1.0) * f
    }

    fn cdf(&self, x: f64) -> f64 {
        self.base.cdf(x).powf(self.a)
    }

    fn sf(&self, x: f64) -> f64 {
        let big_f = self.base.cdf(x);
        if big_f <= 0.0 {
            return 1.0;
        }
        -(self.a * (-self.base.sf(x)).ln_1p()).exp_m1()
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        let lf = self.base.ln_pdf(x);
        if lf == f64::NEG_INFINITY {
            return lf;
        }
        if self.a == 1.0 {
            return lf;
        }
        self.a.ln() + (self.a - 1.0) * self.base.cdf(x).ln() + lf
    }

    fn quantile(&self, p: f64) -> f64 {
        self.base.quantile(p.clamp(0.0, 1.0).powf(1.0 / self.a))
    }
}

/// Inactivity time `t - X | X <= t` on `(0, t)`.
#[derive(Debug, Clone)]
pub struct InactivityTime {
    base: DistRef,
    t: f64,
    at_t: f64,
}

impl InactivityTime {
    pub fn new(base: DistRef, t: f64) -> Result<Self> {
        let at_t = base.cdf(t);
        if !(at_t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("F({t}) = {at_t}: no past lifetime")));
        }
        Ok(Self { base, t, at_t })
    }

    pub fn inspection_time(&self) -> f64 {
        self.t
    }
}

impl Distribution for InactivityTime {
    fn name(&self) -> String {
        format!("inactivity({}, t={})", self.base.name(), self.t)
    }

    fn support(&self) -> Support {
        let lo = self.base.support().lower;
        Support {
            lower: 0.0,
            upper: Upper::Finite(self.t - lo),
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=self.t).contains(&x) {
            return 0.0;
        }
        self.base.pdf(self.t - x) / self.at_t
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        (1.0 - self.base.cdf(self.t - x) / self.at_t).clamp(0.0, 1.0)
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        (self.base.cdf(self.t - x) / self.at_t).clamp(0.0, 1.0)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=self.t).contains(&x) {
            return f64::NEG_INFINITY;
        }
        self.base.ln_pdf(self.t - x) - self.at_t.ln()
    }

    fn quantile(&self, p: f64) -> f64 {
        self.t - self.base.quantile((1.0 - p.clamp(0.0, 1.0)) * self.at_t)
    }
}
