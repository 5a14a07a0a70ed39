//! Adaptive Gauss–Kronrod integration and a Richardson-extrapolated central
//! difference.
//!
//! The integrator bisects the panel with the largest error estimate until the
//! summed estimate falls below `max(abs_tol, rel_tol * |value|)`. Each panel is
//! evaluated with the nested 7-point Gauss / 15-point Kronrod pair; the panel
//! error is the Gauss–Kronrod discrepancy rescaled the way QUADPACK does it.
//! Intervals of the form `(lo, +inf)` are mapped onto `(0, 1)` through
//! `x = lo + u / (1 - u)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kronrod abscissae on `[-1, 1]`, positive half, descending. Odd indices are
/// shared with the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for `XGK[1]`, `XGK[3]`, `XGK[5]` and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Fraction of the interval length at each finite endpoint inside which a
    /// non-finite integrand value is replaced by the value at the band edge.
    pub endpoint_clip: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
            endpoint_clip: 1e-12,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.abs_tol > 0.0) {
            return bad("abs_tol", self.abs_tol, "must be > 0");
        }
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol", self.rel_tol, "must be > 0");
        }
        if self.max_subdivisions < 1 {
            return bad(
                "max_subdivisions",
                self.max_subdivisions as f64,
                "must be >= 1",
            );
        }
        if !(0.0..0.01).contains(&self.endpoint_clip) {
            return bad("endpoint_clip", self.endpoint_clip, "must lie in [0, 0.01)");
        }
        Ok(())
    }

    /// Tolerance target for a given integral value.
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl QuadratureResult {
    /// Turns a non-converged result into [`Error::NonConvergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                value: self.value,
                error_estimate: self.error_estimate,
                subdivisions: self.subdivisions_used,
            })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Queued {
    error: f64,
    index: usize,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Integrand on the working variable, with endpoint clipping and NaN reporting.
struct Integrand<'a, G> {
    g: &'a G,
    lo: f64,
    /// `None` for the semi-infinite map on `(0, 1)`.
    hi: Option<f64>,
    clip: f64,
}

impl<G: Fn(f64) -> f64> Integrand<'_, G> {
    fn domain(&self) -> (f64, f64) {
        match self.hi {
            Some(hi) => (self.lo, hi),
            None => (0.0, 1.0),
        }
    }

    fn to_x(&self, w: f64) -> f64 {
        match self.hi {
            Some(_) => w,
            None => self.lo + w / (1.0 - w),
        }
    }

    fn raw(&self, w: f64) -> f64 {
        match self.hi {
            Some(_) => (self.g)(w),
            None => {
                let s = 1.0 - w;
                let v = (self.g)(self.lo + w / s);
                // Integrands in scope vanish at infinity; 0 * inf must not poison the sum.
                if v == 0.0 {
                    0.0
                } else {
                    v / (s * s)
                }
            }
        }
    }

    fn eval(&self, w: f64) -> Result<f64> {
        let v = self.raw(w);
        if v.is_finite() {
            return Ok(v);
        }
        let (a, b) = self.domain();
        let band = self.clip * (b - a);
        let edge = if w - a <= band {
            Some(a + band)
        } else if b - w <= band {
            Some(b - band)
        } else {
            None
        };
        if let Some(edge) = edge {
            if edge != w {
                let v = self.raw(edge);
                if v.is_finite() {
                    return Ok(v);
                }
            }
        }
        Err(Error::NonFiniteIntegrand {
            abscissa: self.to_x(w),
            value: v,
        })
    }

    fn panel(&self, a: f64, b: f64) -> Result<Panel> {
        let centre = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = self.eval(centre)?;
        let mut res_g = fc * WG[3];
        let mut res_k = fc * WGK[7];
        let mut res_abs = res_k.abs();
        let mut fv1 = [0.0; 7];
        let mut fv2 = [0.0; 7];
        for j in 0..7 {
            let dx = half * XGK[j];
            let f1 = self.eval(centre - dx)?;
            let f2 = self.eval(centre + dx)?;
            fv1[j] = f1;
            fv2[j] = f2;
            res_k += WGK[j] * (f1 + f2);
            res_abs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                res_g += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
        }
        let value = res_k * half;
        let res_abs = res_abs * half.abs();
        let res_asc = res_asc * half.abs();
        let error = rescale_error((res_k - res_g) * half, res_abs, res_asc);
        Ok(Panel { a, b, value, error })
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// Integrates `g` over `(lo, hi)`; `hi` may be `f64::INFINITY`.
///
/// Non-convergence is reported through `converged = false`, a non-finite
/// integrand value away from the clipped endpoint bands is an error.
pub fn integrate<G>(g: G, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    G: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !lo.is_finite() || hi.is_nan() || !(lo < hi) {
        return Err(Error::Domain(format!(
            "integration interval ({lo}, {hi}) is empty or not left-bounded"
        )));
    }
    let integrand = Integrand {
        g: &g,
        lo,
        hi: hi.is_finite().then_some(hi),
        clip: cfg.endpoint_clip,
    };
    let (a, b) = integrand.domain();

    let first = integrand.panel(a, b)?;
    let mut panels = vec![first];
    let mut heap = BinaryHeap::new();
    heap.push(Queued {
        error: first.error,
        index: 0,
    });
    let mut frozen_error = 0.0;
    let mut total_value = first.value;
    let mut total_error = first.error;
    let mut subdivisions = 0;

    while total_error > cfg.target(total_value) && subdivisions < cfg.max_subdivisions {
        let Some(top) = heap.pop() else {
            break;
        };
        let parent = panels[top.index];
        let mid = 0.5 * (parent.a + parent.b);
        if !(parent.a < mid && mid < parent.b) {
            // Panel cannot be split in floating point; keep its estimate.
            frozen_error += parent.error;
            continue;
        }
        let left = integrand.panel(parent.a, mid)?;
        let right = integrand.panel(mid, parent.b)?;
        total_value += left.value + right.value - parent.value;
        total_error += left.error + right.error - parent.error;
        panels[top.index] = left;
        heap.push(Queued {
            error: left.error,
            index: top.index,
        });
        heap.push(Queued {
            error: right.error,
            index: panels.len(),
        });
        panels.push(right);
        subdivisions += 1;
    }

    // Re-sum in storage order so the result does not depend on accumulated drift.
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error_estimate: f64 = panels.iter().map(|p| p.error).sum::<f64>();
    let converged = error_estimate <= cfg.target(value) && frozen_error <= cfg.target(value);
    Ok(QuadratureResult {
        value,
        error_estimate,
        subdivisions_used: subdivisions,
        converged,
    })
}

/// Central difference at `t` refined by one Richardson step.
///
/// The step is `step_hint * max(1, |t|)`. Any non-finite evaluation of `h`
/// inside the stencil is reported as `t` sitting too close to a domain
/// boundary.
pub fn differentiate<H>(h: H, t: f64, step_hint: f64) -> Result<f64>
where
    H: Fn(f64) -> f64,
{
    if !(step_hint > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter {
            name: "step_hint",
            value: step_hint,
            reason: "must be > 0 with finite t",
        });
    }
    let step = step_hint * t.abs().max(1.0);
    let eval = |x: f64| {
        let v = h(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!(
                "t = {t} is too close to a domain boundary for step {step}"
            )))
        }
    };
    let central = |s: f64| -> Result<f64> { Ok((eval(t + s)? - eval(t - s)?) / (2.0 * s)) };
    let coarse = central(step)?;
    let fine = central(0.5 * step)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
