#![allow(dead_code)]

use pastvar::dist::{make_builtin, DistRef};

pub fn dist(name: &str, params: &[f64]) -> DistRef {
    make_builtin(name, params).unwrap()
}

/// Uniform(0,1), exponential(1), power-2 and Weibull(2).
pub fn zoo() -> Vec<(&'static str, DistRef)> {
    vec![
        ("uniform", dist("uniform", &[1.0])),
        ("exponential", dist("exponential", &[1.0])),
        ("power-2", dist("power", &[2.0])),
        ("weibull-2", dist("weibull", &[2.0, 1.0])),
    ]
}

/// The zoo plus the heavy-headed Weibull(0.5).
pub fn extended_zoo() -> Vec<(&'static str, DistRef)> {
    let mut z = zoo();
    z.push(("weibull-0.5", dist("weibull", &[0.5, 1.0])));
    z
}
