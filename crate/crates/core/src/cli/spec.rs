//! Distribution spec strings.
//!
//! A spec is a pipeline of stages separated by `|`. Each stage is a kind
//! followed by space-separated `key=value` parameters; the kind is written
//! bare or as `family=NAME` (first stage) / `transform=NAME` (later stages):
//!
//! ```text
//! family=uniform b=1 | prhr a=3 | linear a=2 b=0
//! exponential lambda=0.5 | transform=pow p=2
//! ```
//!
//! Families: `uniform b=1`, `exponential lambda=1` (alias `rate`),
//! `power k`, `weibull shape` (alias `k`) `scale=1`.
//! Transforms: `linear a b=0`, `prhr a`, and the monotone maps `identity`,
//! `affine a b=0`, `pow p`, `reciprocal`, `expm1`; a monotone map may also be
//! written `monotone map=NAME ...`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::dist::{
    make_builtin, DistRef, LinearTransform, MonotoneMap, MonotonicTransform, Prhr,
};
use crate::error::{Error, Result};

/// One parsed stage of a spec.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Family { name: String, params: Vec<f64> },
    Linear { a: f64, b: f64 },
    Prhr { a: f64 },
    Monotone { label: String },
}

/// The outermost construction, kept so that stage-specific checks and
/// measures can reach the base distribution.
#[derive(Debug, Clone)]
pub enum LastStage {
    Family,
    Linear(LinearTransform),
    Prhr(Prhr),
    Monotone(MonotonicTransform),
}

#[derive(Debug, Clone)]
pub struct DistSpec {
    pub text: String,
    pub stages: Vec<Stage>,
    pub dist: DistRef,
    pub last: LastStage,
}

impl DistSpec {
    pub fn prhr(&self) -> Option<&Prhr> {
        match &self.last {
            LastStage::Prhr(p) => Some(p),
            _ => None,
        }
    }
}

struct Params<'a> {
    kind: &'a str,
    /// The only non-numeric parameter, `map=NAME` of a monotone stage.
    map: Option<&'a str>,
    values: BTreeMap<&'a str, f64>,
}

impl<'a> Params<'a> {
    fn take(&mut self, keys: &[&'a str]) -> Option<f64> {
        keys.iter().find_map(|k| self.values.remove(k))
    }

    fn required(&mut self, keys: &[&'a str]) -> Result<f64> {
        self.take(keys)
            .ok_or_else(|| Error::Parse(format!("`{}` needs parameter `{}`", self.kind, keys[0])))
    }

    fn or(&mut self, keys: &[&'a str], default: f64) -> f64 {
        self.take(keys).unwrap_or(default)
    }

    fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::Parse(format!(
                "unknown parameter `{k}` for `{}`",
                self.kind
            ))),
        }
    }
}

fn split_stage(stage: &str, first: bool) -> Result<(&str, Params<'_>)> {
    let mut tokens = stage.split_whitespace();
    let head = tokens
        .next()
        .ok_or_else(|| Error::Parse("empty pipeline stage".into()))?;
    let kind = match head.split_once('=') {
        Some(("family", name)) if first => name,
        Some(("transform", name)) if !first => name,
        Some(("family", _)) => {
            return Err(Error::Parse("`family=` is only allowed in the first stage".into()))
        }
        Some(("transform", _)) => {
            return Err(Error::Parse("the first stage must name a family".into()))
        }
        Some(_) if first => return Err(Error::Parse(format!("stage `{stage}` names no family"))),
        Some(_) => return Err(Error::Parse(format!("stage `{stage}` names no transform"))),
        None => head,
    };
    if kind.is_empty() {
        return Err(Error::Parse(format!("stage `{stage}` has an empty name")));
    }
    let mut map = None;
    let mut values = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))?;
        if k == "map" && kind == "monotone" {
            if map.replace(v).is_some() {
                return Err(Error::Parse("parameter `map` given twice".into()));
            }
            continue;
        }
        let x: f64 = v
            .parse()
            .ok()
            .filter(|x: &f64| x.is_finite())
            .ok_or_else(|| Error::Parse(format!("`{k}` needs a finite number, got `{v}`")))?;
        if values.insert(k, x).is_some() {
            return Err(Error::Parse(format!("parameter `{k}` given twice")));
        }
    }
    Ok((kind, Params { kind, map, values }))
}

fn monotone_map(kind: &str, p: &mut Params<'_>) -> Result<Option<MonotoneMap>> {
    Ok(Some(match kind {
        "identity" => MonotoneMap::identity(),
        "affine" => {
            let a = p.required(&["a"])?;
            MonotoneMap::affine(a, p.or(&["b"], 0.0))
        }
        "pow" => {
            let e = p.required(&["p"])?;
            if e == 0.0 {
                return Err(Error::InvalidParameter {
                    name: "p",
                    value: e,
                    reason: "exponent must be non-zero",
                });
            }
            MonotoneMap::power(e)
        }
        "reciprocal" => MonotoneMap::reciprocal(),
        "expm1" => MonotoneMap::expm1(),
        _ => return Ok(None),
    }))
}

pub fn parse_spec(text: &str) -> Result<DistSpec> {
    let mut stages = Vec::new();
    let mut dist: Option<DistRef> = None;
    let mut last = LastStage::Family;
    for (i, raw) in text.split('|').enumerate() {
        let (kind, mut p) = split_stage(raw.trim(), i == 0)?;
        let Some(cur) = dist.clone() else {
            let params = match kind {
                "uniform" => vec![p.or(&["b"], 1.0)],
                "exponential" => vec![p.or(&["lambda", "rate"], 1.0)],
                "power" => vec![p.required(&["k"])?],
                "weibull" => {
                    let shape = p.required(&["shape", "k"])?;
                    vec![shape, p.or(&["scale"], 1.0)]
                }
                other => return Err(Error::UnknownFamily(other.to_string())),
            };
            p.finish()?;
            dist = Some(make_builtin(kind, &params)?);
            stages.push(Stage::Family {
                name: kind.to_string(),
                params,
            });
            continue;
        };
        let kind = if kind == "monotone" {
            p.map
                .ok_or_else(|| Error::Parse("`monotone` needs `map=NAME`".into()))?
        } else {
            kind
        };
        match kind {
            "linear" => {
                let a = p.required(&["a"])?;
                let b = p.or(&["b"], 0.0);
                p.finish()?;
                let tr = LinearTransform::new(cur, a, b)?;
                dist = Some(Arc::new(tr.clone()));
                last = LastStage::Linear(tr);
                stages.push(Stage::Linear { a, b });
            }
            "prhr" => {
                let a = p.required(&["a"])?;
                p.finish()?;
                let fam = Prhr::new(cur, a)?;
                dist = Some(Arc::new(fam.clone()));
                last = LastStage::Prhr(fam);
                stages.push(Stage::Prhr { a });
            }
            other => {
                let map = monotone_map(other, &mut p)?
                    .ok_or_else(|| Error::Parse(format!("unknown transform `{other}`")))?;
                p.finish()?;
                let label = map.label.clone();
                let tr = MonotonicTransform::new(cur, map)?;
                dist = Some(Arc::new(tr.clone()));
                last = LastStage::Monotone(tr);
                stages.push(Stage::Monotone { label });
            }
        }
    }
    Ok(DistSpec {
        text: text.trim().to_string(),
        stages,
        dist: dist.ok_or_else(|| Error::Parse("empty distribution spec".into()))?,
        last,
    })
}
