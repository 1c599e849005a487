//! Characteristic velocities, hodograph continuation of critical points over
//! two-parameter grids and finite-difference residuals of the induced
//! quasilinear systems.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexfield::{c, CPoint, I};
use crate::critical::{find_critical_with, CriticalOptions, CriticalPoint};
use crate::epd::{dual_value, JetSource, SolutionSpec, SpecKind};
use crate::error::{EpdError, Result};
use crate::params::{Family, FlowLabel};
use crate::report::ResidualReport;

/// `(W_β(φ_k)/W_β(φ_l), W_β̄(φ_k)/W_β̄(φ_l))` at `(β, β̄)`.
pub fn velocity_at(
    spec: &SolutionSpec,
    beta: CPoint,
    beta_bar: CPoint,
    k: FlowLabel,
    l: FlowLabel,
) -> Result<(CPoint, CPoint)> {
    let jk = spec.basis(k)?.jet(beta, beta_bar)?;
    let jl = spec.basis(l)?.jet(beta, beta_bar)?;
    Ok((ratio(jk.wz, jl.wz)?, ratio(jk.wzb, jl.wzb)?))
}

/// Characteristic velocity of the `k` flow relative to the `l` flow at a critical point.
pub fn velocity(spec: &SolutionSpec, cp: &CriticalPoint, k: FlowLabel, l: FlowLabel) -> Result<(CPoint, CPoint)> {
    velocity_at(spec, cp.beta, cp.beta_bar, k, l)
}

fn ratio(num: CPoint, den: CPoint) -> Result<CPoint> {
    if !den.is_finite() || den.norm() <= 1e-15 * num.norm().max(1.0) {
        return Err(EpdError::ZeroDenominator);
    }
    Ok(num / den)
}

/// `(∂ω/∂u, ∂ω/∂ū)` for ω = -2(uū)^{-1/2}.
pub fn omega_gradient(u: CPoint, ub: CPoint) -> (CPoint, CPoint) {
    let p = (u * ub).powf(-1.5);
    (ub * p, u * p)
}

/// A uniform grid along one deformation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: FlowLabel,
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(label: FlowLabel, start: f64, step: f64, count: usize) -> Self {
        Axis {
            label,
            start,
            step,
            count,
        }
    }

    /// `count` nodes centred on `center`.
    pub fn centered(label: FlowLabel, center: f64, step: f64, count: usize) -> Self {
        Axis::new(label, center - step * (count.saturating_sub(1)) as f64 / 2.0, step, count)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }
}

/// Critical points over a two-parameter grid; entries are row-major with the
/// first axis as rows.
#[derive(Clone, Debug)]
pub struct HodographField {
    pub template: SolutionSpec,
    pub axes: [Axis; 2],
    pub beta: Vec<CPoint>,
    pub beta_bar: Vec<CPoint>,
    pub converged: Vec<bool>,
}

impl HodographField {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.axes[1].count + j
    }

    pub fn spec_at(&self, i: usize, j: usize) -> Result<SolutionSpec> {
        spec_at(&self.template, &self.axes, i, j)
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&b| b)
    }

    pub fn node(&self, i: usize, j: usize) -> Option<(CPoint, CPoint)> {
        let n = self.index(i, j);
        self.converged[n].then(|| (self.beta[n], self.beta_bar[n]))
    }

    /// Columns `param1, param2, re_beta, im_beta, converged`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["param1", "param2", "re_beta", "im_beta", "converged"])?;
        for i in 0..self.axes[0].count {
            for j in 0..self.axes[1].count {
                let n = self.index(i, j);
                w.write_record([
                    format!("{:.16e}", self.axes[0].value(i)),
                    format!("{:.16e}", self.axes[1].value(j)),
                    format!("{:.16e}", self.beta[n].re),
                    format!("{:.16e}", self.beta[n].im),
                    (self.converged[n] as u8).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    fn axis_of(&self, label: FlowLabel) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.label == label)
            .ok_or_else(|| EpdError::Domain(format!("{label} is not an axis of the field")))
    }
}

fn spec_at(template: &SolutionSpec, axes: &[Axis; 2], i: usize, j: usize) -> Result<SolutionSpec> {
    template
        .with_param(axes[0].label, axes[0].value(i))?
        .with_param(axes[1].label, axes[1].value(j))
}

/// Row-major sweep over an `n0 × n1` grid. Each node is solved from its left
/// neighbor (or the one above on the first column) and retried once from the
/// other; the origin starts from `seed`. Failed nodes stay `None`.
pub(crate) fn continue_over_grid(
    n0: usize,
    n1: usize,
    seed: (CPoint, CPoint),
    mut solve: impl FnMut(usize, usize, (CPoint, CPoint)) -> Option<(CPoint, CPoint)>,
) -> Vec<Option<(CPoint, CPoint)>> {
    let mut out: Vec<Option<(CPoint, CPoint)>> = vec![None; n0 * n1];
    for i in 0..n0 {
        for j in 0..n1 {
            let mut seeds = Vec::with_capacity(2);
            if i == 0 && j == 0 {
                seeds.push(seed);
            }
            if j > 0 {
                seeds.extend(out[i * n1 + j - 1]);
            }
            if i > 0 {
                seeds.extend(out[(i - 1) * n1 + j]);
            }
            out[i * n1 + j] = seeds.into_iter().find_map(|s| solve(i, j, s));
        }
    }
    out
}

/// Continues `seed` over the grid (see [`continue_over_grid`]); nodes whose
/// solve fails, or lands on the mirrored root, are flagged instead of filled in.
pub fn hodograph_solve(
    template: &SolutionSpec,
    axes: [Axis; 2],
    seed: &CriticalPoint,
    opts: &CriticalOptions,
) -> Result<HodographField> {
    for a in &axes {
        if a.count == 0 {
            return Err(EpdError::InsufficientGrid { needed: 1, got: 0 });
        }
        template.param(a.label)?;
    }
    if axes[0].label == axes[1].label {
        return Err(EpdError::Domain("the two axes must be different parameters".into()));
    }
    let (n0, n1) = (axes[0].count, axes[1].count);
    let side = (seed.beta - seed.beta_bar).im.signum();
    let nodes = continue_over_grid(n0, n1, (seed.beta, seed.beta_bar), |i, j, (b, bb)| {
        let spec = spec_at(template, &axes, i, j).ok()?;
        let cp = find_critical_with(&spec, b, bb, opts).ok()?;
        ((cp.beta - cp.beta_bar).im.signum() == side).then_some((cp.beta, cp.beta_bar))
    });
    let nan = c(f64::NAN, f64::NAN);
    Ok(HodographField {
        template: template.clone(),
        axes,
        beta: nodes.iter().map(|n| n.map_or(nan, |p| p.0)).collect(),
        beta_bar: nodes.iter().map(|n| n.map_or(nan, |p| p.1)).collect(),
        converged: nodes.iter().map(Option::is_some).collect(),
    })
}

/// The (β, β̄) values on the five-point stencil around an interior node.
struct Stencil {
    center: (CPoint, CPoint),
    /// `[axis][0 = minus, 1 = plus]`
    side: [[(CPoint, CPoint); 2]; 2],
    h: [f64; 2],
}

impl Stencil {
    fn d(&self, axis: usize) -> (CPoint, CPoint) {
        let [m, p] = self.side[axis];
        let h2 = 2.0 * self.h[axis];
        ((p.0 - m.0) / h2, (p.1 - m.1) / h2)
    }

    /// Central first and second differences of `f` along `axis`.
    fn diff2(&self, axis: usize, f: impl Fn((CPoint, CPoint)) -> CPoint) -> (CPoint, CPoint) {
        let [m, p] = self.side[axis];
        let (fm, f0, fp) = (f(m), f(self.center), f(p));
        let h = self.h[axis];
        ((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
    }
}

fn over_interior(
    field: &HodographField,
    identity: String,
    f: impl Fn(&SolutionSpec, &Stencil) -> Result<f64> + Sync,
) -> Result<ResidualReport> {
    let (n0, n1) = (field.axes[0].count, field.axes[1].count);
    for n in [n0, n1] {
        if n < 3 {
            return Err(EpdError::InsufficientGrid { needed: 3, got: n });
        }
    }
    let interior: Vec<(usize, usize)> = (1..n0 - 1).flat_map(|i| (1..n1 - 1).map(move |j| (i, j))).collect();
    let values: Vec<Option<f64>> = interior
        .par_iter()
        .map(|&(i, j)| {
            let get = |a: usize, b: usize| field.node(a, b);
            let nodes = (
                get(i, j),
                get(i - 1, j),
                get(i + 1, j),
                get(i, j - 1),
                get(i, j + 1),
            );
            let (Some(center), Some(a0), Some(a1), Some(b0), Some(b1)) = nodes else {
                return Ok(None);
            };
            let st = Stencil {
                center,
                side: [[a0, a1], [b0, b1]],
                h: [field.axes[0].step, field.axes[1].step],
            };
            f(&field.spec_at(i, j)?, &st).map(Some)
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = values.into_iter().flatten().collect();
    if values.is_empty() {
        return Err(EpdError::Domain("no interior node has a converged stencil".into()));
    }
    let step = field.axes[0].step.abs().max(field.axes[1].step.abs());
    Ok(ResidualReport::from_values(
        identity,
        &values,
        vec![field.axes[0].count, field.axes[1].count],
        step,
    ))
}

/// `max |β_{p_k} - λ_{k,l} β_{p_l}|` together with the β̄ companion, where
/// `k` and `l` are the two axes of the field.
pub fn pde_residual(field: &HodographField, k: FlowLabel, l: FlowLabel) -> Result<ResidualReport> {
    let (ak, al) = (field.axis_of(k)?, field.axis_of(l)?);
    if ak == al {
        return Err(EpdError::Domain("k and l must be different axes".into()));
    }
    over_interior(field, format!("pde {k} vs {l}"), |spec, st| {
        let (b, bb) = st.center;
        let (v, vb) = velocity_at(spec, b, bb, k, l)?;
        let (dk, dkb) = st.d(ak);
        let (dl, dlb) = st.d(al);
        Ok((dk - v * dl).norm().max((dkb - vb * dlb).norm()))
    })
}

fn dtoda_axes(field: &HodographField) -> Result<(usize, usize)> {
    if !matches!(field.template.kind, SpecKind::Monomial { .. }) {
        return Err(EpdError::Domain("the dToda residuals need a monomial spec".into()));
    }
    Ok((field.axis_of(FlowLabel::x(1))?, field.axis_of(FlowLabel::y(0))?))
}

/// `β_{x₁} = (β - β̄)/2 β_{y₀}` and its conjugate companion, with the
/// velocity written out instead of taken from [`velocity`].
pub fn dtodab_residual(field: &HodographField) -> Result<ResidualReport> {
    let (ax, ay) = dtoda_axes(field)?;
    over_interior(field, "dtoda riemann".into(), |_, st| {
        let (b, bb) = st.center;
        let v = (b - bb) / 2.0;
        let (dx, dxb) = st.d(ax);
        let (dy, dyb) = st.d(ay);
        Ok((dx - v * dy).norm().max((dxb + v * dyb).norm()))
    })
}

/// `φ_{x₁x₁} + (e^φ)_{y₀y₀}` with e^φ = -(β - β̄)²/4, i.e. φ = 2 ln Im β on a real field.
pub fn dtoda_phi_residual(field: &HodographField) -> Result<ResidualReport> {
    let (ax, ay) = dtoda_axes(field)?;
    over_interior(field, "dtoda".into(), |_, st| {
        let e_phi = |(b, bb): (CPoint, CPoint)| -(b - bb) * (b - bb) / 4.0;
        for p in [st.center, st.side[ax][0], st.side[ax][1]] {
            if e_phi(p).norm() == 0.0 {
                return Err(EpdError::CollapseToRealAxis(p.0));
            }
        }
        let (_, phi_xx) = st.diff2(ax, |p| e_phi(p).ln());
        let (_, e_yy) = st.diff2(ay, e_phi);
        Ok((phi_xx + e_yy).norm())
    })
}

/// Residual of `u_t = u^{-3/2}ū^{-1/2} u_{x₀}` (and the ū companion) with
/// u = 1 - λ_t/β, on a field over two delta-x weights: one at λ₀ = 0 (x₀)
/// and one at λ_t ≠ 0 (t).
pub fn delta_flow_residual(field: &HodographField) -> Result<ResidualReport> {
    let SpecKind::Delta { phi, .. } = &field.template.kind else {
        return Err(EpdError::Domain("the delta flow residual needs a delta spec".into()));
    };
    let mut nodes = [0.0; 2];
    for (a, axis) in field.axes.iter().enumerate() {
        if axis.label.family != Family::DeltaX {
            return Err(EpdError::Domain("both axes must be delta-x weights".into()));
        }
        nodes[a] = phi[axis.label.index].1;
    }
    let (ax0, at) = match (nodes[0] == 0.0, nodes[1] == 0.0) {
        (true, false) => (0, 1),
        (false, true) => (1, 0),
        _ => {
            return Err(EpdError::Domain(
                "exactly one axis must be the weight at node 0".into(),
            ))
        }
    };
    let lt = nodes[at];
    over_interior(field, "delta flow".into(), |_, st| {
        let to_u = |(b, bb): (CPoint, CPoint)| -> Result<(CPoint, CPoint)> {
            if b.norm() < 1e-12 || bb.norm() < 1e-12 {
                return Err(EpdError::Domain(format!("beta too close to 0: {b}")));
            }
            let u = (c(1.0, 0.0) - lt / b, c(1.0, 0.0) - lt / bb);
            if u.0.norm() < 1e-12 || u.1.norm() < 1e-12 {
                return Err(EpdError::Domain(format!("u too close to 0 at beta = {b}")));
            }
            Ok(u)
        };
        let (u, ub) = to_u(st.center)?;
        let d = |axis: usize| -> Result<(CPoint, CPoint)> {
            let (m, p) = (to_u(st.side[axis][0])?, to_u(st.side[axis][1])?);
            let h2 = 2.0 * st.h[axis];
            Ok(((p.0 - m.0) / h2, (p.1 - m.1) / h2))
        };
        let (ut, utb) = d(at)?;
        let (ux, uxb) = d(ax0)?;
        let v = u.powf(-1.5) * ub.powf(-0.5);
        let vb = u.powf(-0.5) * ub.powf(-1.5);
        Ok((ut - v * ux).norm().max((utb - vb * uxb).norm()))
    })
}

/// W*_β by a fourth-order central difference of the path-integrated dual.
fn dual_derivative<S: JetSource + ?Sized>(src: &S, beta: CPoint, h: f64) -> Result<CPoint> {
    let diff = |dir: CPoint| -> Result<CPoint> {
        let f = |s: f64| dual_value(src, &[beta, beta + dir * s]);
        Ok((-f(2.0 * h)? + 8.0 * f(h)? - 8.0 * f(-h)? + f(-2.0 * h)?) / (12.0 * h))
    };
    // dW* = W*_z dz + W*_z̄ dz̄ with z̄ = conj(z)
    let (dx, dy) = (diff(c(1.0, 0.0))?, diff(I)?);
    Ok((dx - I * dy) / 2.0)
}

/// Largest discrepancy between the velocities `W_{k,β}/W_{l,β}` and the same
/// ratios of the dual solutions, whose derivatives are differentiated
/// numerically from the path integral. Pairs run over `labels`.
pub fn dual_equivalence(spec: &SolutionSpec, labels: &[FlowLabel], points: &[CPoint]) -> Result<ResidualReport> {
    let bases: Vec<SolutionSpec> = labels.iter().map(|&l| spec.basis(l)).collect::<Result<_>>()?;
    let values: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&beta| {
            let h = 1e-3 * beta.im.abs();
            let direct: Vec<CPoint> = bases
                .iter()
                .map(|b| Ok(b.jet(beta, beta.conj())?.wz))
                .collect::<Result<_>>()?;
            let dual: Vec<CPoint> = bases
                .iter()
                .map(|b| dual_derivative(b, beta, h))
                .collect::<Result<_>>()?;
            let mut out = Vec::new();
            for k in 0..labels.len() {
                for l in 0..labels.len() {
                    if k != l {
                        let r1 = ratio(direct[k], direct[l])?;
                        let r2 = ratio(dual[k], dual[l])?;
                        out.push((r1 - r2).norm() / r1.norm().max(1.0));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = values.into_iter().flatten().collect();
    Ok(ResidualReport::from_values(
        "dual equivalence",
        &values,
        vec![points.len(), labels.len()],
        0.0,
    ))
}
