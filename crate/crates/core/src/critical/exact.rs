use std::f64::consts::PI;

use super::{find_critical_with, CriticalOptions, CriticalPoint};
use crate::complexfield::CPoint;
use crate::epd::{JetSource, SolutionSpec};
use crate::error::Result;
use crate::params::FlowLabel;
use crate::report::ResidualReport;

/// Re-solves for the critical point of `spec` starting from a nearby one.
pub fn track_critical(spec: &SolutionSpec, near: &CriticalPoint, opts: &CriticalOptions) -> Result<CriticalPoint> {
    find_critical_with(spec, near.beta, near.beta_bar, opts)
}

fn basis_value(spec: &SolutionSpec, label: FlowLabel, cp: &CriticalPoint) -> Result<CPoint> {
    Ok(spec.basis(label)?.jet(cp.beta, cp.beta_bar)?.w)
}

/// Cross-derivative asymmetry `|∂_{p_l} W_k(β) - ∂_{p_k} W_l(β)|` over all
/// label pairs, by central differences of the tracked critical point.
pub fn exactness_check(
    spec: &SolutionSpec,
    labels: &[FlowLabel],
    start: &CriticalPoint,
    h: f64,
    opts: &CriticalOptions,
) -> Result<ResidualReport> {
    let base = track_critical(spec, start, opts)?;
    let mut shifted = Vec::with_capacity(labels.len());
    for &l in labels {
        let p = spec.param(l)?;
        let plus = track_critical(&spec.with_param(l, p + h)?, &base, opts)?;
        let minus = track_critical(&spec.with_param(l, p - h)?, &base, opts)?;
        shifted.push((plus, minus));
    }
    let mut values = Vec::new();
    for (i, &k) in labels.iter().enumerate() {
        for (j, &l) in labels.iter().enumerate().skip(i + 1) {
            let (lp, lm) = &shifted[j];
            let (kp, km) = &shifted[i];
            let a = (basis_value(spec, k, lp)? - basis_value(spec, k, lm)?) / (2.0 * h);
            let b = (basis_value(spec, l, kp)? - basis_value(spec, l, km)?) / (2.0 * h);
            values.push((a - b).norm());
        }
    }
    Ok(ResidualReport::from_values("conservation", &values, vec![labels.len()], h))
}

/// `|∮ Σ_k W_k(β) dp_k|` around a circle of the given radius in the plane of
/// two parameters; zero when F(p) = W(p; β(p)) is single-valued.
pub fn loop_closure(
    spec: &SolutionSpec,
    labels: (FlowLabel, FlowLabel),
    radius: f64,
    n: usize,
    start: &CriticalPoint,
    opts: &CriticalOptions,
) -> Result<f64> {
    let (l1, l2) = labels;
    let (p1, p2) = (spec.param(l1)?, spec.param(l2)?);
    let mut cp = track_critical(spec, start, opts)?;
    let mut acc = CPoint::new(0.0, 0.0);
    for j in 0..n {
        let theta = 2.0 * PI * j as f64 / n as f64;
        let (s, co) = theta.sin_cos();
        let local = spec
            .with_param(l1, p1 + radius * co)?
            .with_param(l2, p2 + radius * s)?;
        cp = track_critical(&local, &cp, opts)?;
        let w1 = basis_value(spec, l1, &cp)?;
        let w2 = basis_value(spec, l2, &cp)?;
        acc += w1 * (-radius * s) + w2 * (radius * co);
    }
    Ok((acc * (2.0 * PI / n as f64)).norm())
}
