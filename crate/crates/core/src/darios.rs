//! Quasi-classical Da Rios (dispersionless focusing NLS) system in curvature
//! and torsion, β = -τ + iK: hodograph solutions from the real potential
//!
//! W = x(z + z̄)/2 + s·W_flow + ∫φ k + ∫ψ k ln((z - z̄)/(2i(λ - z)(λ - z̄))),
//! k = (λ - z)^{-1/2}(λ - z̄)^{-1/2},
//!
//! and the t = 0 relations between (τ₀, K₀) and the densities.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexfield::{c, gauss_panels, CPoint, QuadOptions};
use crate::critical::{find_critical_with, scan_critical, CriticalOptions};
use crate::density::Density;
use crate::epd::{Jet2, JetSource, LogNorm, SolutionSpec};
use crate::error::{EpdError, Result};
use crate::hydro::continue_over_grid;
use crate::params::FlowLabel;
use crate::report::ResidualReport;

/// A uniform one-dimensional grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, step: f64, count: usize) -> Self {
        Grid { start, step, count }
    }

    pub fn centered(center: f64, step: f64, count: usize) -> Self {
        Grid::new(center - step * count.saturating_sub(1) as f64 / 2.0, step, count)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// The flows of the hierarchy that are checked here; each is generated by
/// one basis term of the potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flow {
    /// K_t + 2τK_x + Kτ_x = 0, τ_t - KK_x + 2ττ_x = 0
    DaRios,
    /// K_t - (3τ² - 3K²/2)K_x - 3τKτ_x = 0, τ_t + 3τKK_x - (3τ² - 3K²/2)τ_x = 0
    Higher2,
    /// K_t - τ_x/K = 0, τ_t + K_x/K = 0
    DToda,
    /// K_t - (2 + ln K)K_x + (τ/K)τ_x = 0, τ_t - (τ/K)K_x - (2 + ln K)τ_x = 0
    Log2,
}

impl Flow {
    pub const ALL: [Flow; 4] = [Flow::DaRios, Flow::Higher2, Flow::DToda, Flow::Log2];

    /// The monomial coefficient that plays the role of this flow's time.
    pub fn label(self) -> FlowLabel {
        match self {
            Flow::DaRios => FlowLabel::x(2),
            Flow::Higher2 => FlowLabel::x(3),
            Flow::DToda => FlowLabel::y(0),
            Flow::Log2 => FlowLabel::y(1),
        }
    }

    /// Residuals of the two equations from values and first derivatives.
    pub fn residual(self, k: f64, tau: f64, (kx, tx): (f64, f64), (kt, tt): (f64, f64)) -> (f64, f64) {
        match self {
            Flow::DaRios => (kt + 2.0 * tau * kx + k * tx, tt - k * kx + 2.0 * tau * tx),
            Flow::Higher2 => {
                let a = 3.0 * tau * tau - 1.5 * k * k;
                let b = 3.0 * tau * k;
                (kt - a * kx - b * tx, tt + b * kx - a * tx)
            }
            Flow::DToda => (kt - tx / k, tt + kx / k),
            Flow::Log2 => {
                let a = 2.0 + k.ln();
                let b = tau / k;
                (kt - a * kx + b * tx, tt - b * kx - a * tx)
            }
        }
    }
}

/// `β = -τ + iK`
pub fn from_filament(k: f64, tau: f64) -> Result<CPoint> {
    if !(k > 0.0) {
        return Err(EpdError::Domain(format!("curvature must be positive, got {k}")));
    }
    Ok(c(-tau, k))
}

/// `(K, τ) = (Im β, -Re β)`
pub fn to_filament(beta: CPoint) -> Result<(f64, f64)> {
    if !(beta.im > 0.0) {
        return Err(EpdError::CollapseToRealAxis(beta));
    }
    Ok((beta.im, -beta.re))
}

/// Curvature and torsion along x at one time; unconverged nodes hold NaN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilamentState {
    pub x: Grid,
    pub k: Vec<f64>,
    pub tau: Vec<f64>,
    pub converged: Vec<bool>,
}

impl FilamentState {
    pub fn new(x: Grid, k: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        let n = k.len();
        let s = FilamentState {
            x,
            k,
            tau,
            converged: vec![true; n],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_beta(x: Grid, beta: &[CPoint]) -> Result<Self> {
        let (k, tau) = beta.iter().map(|&b| to_filament(b)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
        FilamentState::new(x, k, tau)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.count;
        if self.k.len() != n || self.tau.len() != n || self.converged.len() != n {
            return Err(EpdError::Domain("filament arrays do not match the x grid".into()));
        }
        for j in 0..n {
            if self.converged[j] && !(self.k[j] > 0.0 && self.tau[j].is_finite()) {
                return Err(EpdError::Domain(format!("curvature must be positive, got {}", self.k[j])));
            }
        }
        Ok(())
    }

    fn node(&self, j: usize) -> Option<(f64, f64)> {
        self.converged[j].then(|| (self.k[j], self.tau[j]))
    }
}

/// β = -τ + iK at every node.
pub fn beta_map(s: &FilamentState) -> Result<Vec<CPoint>> {
    s.validate()?;
    (0..s.x.count)
        .map(|j| {
            if s.converged[j] {
                from_filament(s.k[j], s.tau[j])
            } else {
                Ok(c(f64::NAN, f64::NAN))
            }
        })
        .collect()
}

/// States at successive times of one flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DaRiosHistory {
    pub flow: Flow,
    pub t: Grid,
    pub states: Vec<FilamentState>,
}

impl DaRiosHistory {
    pub fn all_converged(&self) -> bool {
        self.states.iter().all(|s| s.converged.iter().all(|&b| b))
    }

    /// Columns `t, x, K, tau`; unconverged nodes are omitted.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "K", "tau"])?;
        for (i, s) in self.states.iter().enumerate() {
            for j in 0..s.x.count {
                if let Some((k, tau)) = s.node(j) {
                    w.write_record([
                        format!("{:.16e}", self.t.value(i)),
                        format!("{:.16e}", s.x.value(j)),
                        format!("{:.16e}", k),
                        format!("{:.16e}", tau),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Central-difference residual of `flow` over interior (t, x) nodes.
pub fn flow_residual(history: &DaRiosHistory, flow: Flow) -> Result<ResidualReport> {
    let nt = history.states.len();
    if nt < 3 {
        return Err(EpdError::InsufficientHistory { needed: 3, got: nt });
    }
    let nx = history.states[0].x.count;
    if nx < 3 {
        return Err(EpdError::InsufficientGrid { needed: 3, got: nx });
    }
    if history.states.iter().any(|s| s.x.count != nx) {
        return Err(EpdError::Domain("time levels have different x grids".into()));
    }
    let (dt, dx) = (history.t.step, history.states[0].x.step);
    let values: Vec<f64> = (1..nt - 1)
        .into_par_iter()
        .flat_map_iter(|i| {
            let st = &history.states;
            (1..nx - 1).filter_map(move |j| {
                let (k, tau) = st[i].node(j)?;
                let (xm, xp) = (st[i].node(j - 1)?, st[i].node(j + 1)?);
                let (tm, tp) = (st[i - 1].node(j)?, st[i + 1].node(j)?);
                let dxs = ((xp.0 - xm.0) / (2.0 * dx), (xp.1 - xm.1) / (2.0 * dx));
                let dts = ((tp.0 - tm.0) / (2.0 * dt), (tp.1 - tm.1) / (2.0 * dt));
                let (r1, r2) = flow.residual(k, tau, dxs, dts);
                Some(r1.abs().max(r2.abs()))
            })
        })
        .collect();
    if values.is_empty() {
        return Err(EpdError::Domain("no interior node has a converged stencil".into()));
    }
    Ok(ResidualReport::from_values(
        format!("{flow:?}"),
        &values,
        vec![nt, nx],
        dt.abs().max(dx.abs()),
    ))
}

/// Where a density is numerically nonzero; `None` for zero or custom densities.
pub fn support_of(d: &Density) -> Option<(f64, f64)> {
    match d {
        Density::Gaussian { center, width, .. } => Some((center - 9.0 * width, center + 9.0 * width)),
        Density::Table { lambda, .. } => Some((lambda[0], lambda[lambda.len() - 1])),
        Density::Sum { terms } => terms
            .iter()
            .filter_map(support_of)
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
        Density::Zero | Density::Custom(_) => None,
    }
}

/// The real potential at fixed (x, s): a monomial part in the 2i-normalized
/// basis plus the sampled density integrals.
#[derive(Clone, Debug)]
pub struct DaRiosPotential {
    pub linear: SolutionSpec,
    pub densities: Option<SolutionSpec>,
}

impl DaRiosPotential {
    pub fn new(densities: Option<&SolutionSpec>, flow: Flow, x: f64, s: f64) -> Result<Self> {
        let linear = SolutionSpec::monomial(vec![x], vec![])
            .with_log_norm(LogNorm::TwoI)
            .with_param(flow.label(), s)?;
        Ok(DaRiosPotential {
            linear,
            densities: densities.cloned(),
        })
    }
}

impl JetSource for DaRiosPotential {
    fn jet(&self, z: CPoint, zb: CPoint) -> Result<Jet2> {
        let mut j = self.linear.jet(z, zb)?;
        if let Some(d) = &self.densities {
            j += d.jet(z, zb)?;
        }
        Ok(j)
    }

    fn is_real(&self) -> bool {
        true
    }

    fn scale(&self) -> f64 {
        self.linear.scale() + self.densities.as_ref().map_or(0.0, |d| d.scale())
    }

    fn pure_derivatives(&self, z: CPoint, zb: CPoint, n: usize) -> Result<(CPoint, CPoint)> {
        let (mut a, mut b) = self.linear.pure_derivatives(z, zb, n)?;
        if let Some(d) = &self.densities {
            let (p, q) = d.pure_derivatives(z, zb, n)?;
            a += p;
            b += q;
        }
        Ok((a, b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DaRiosOptions {
    pub flow: Flow,
    /// Starting point for the first node; a coarse scan is used if it fails.
    pub guess: CPoint,
    /// Integration interval for the densities; derived from them when `None`.
    pub support: Option<(f64, f64)>,
    pub critical: CriticalOptions,
}

impl Default for DaRiosOptions {
    fn default() -> Self {
        DaRiosOptions {
            flow: Flow::DaRios,
            guess: c(0.0, 1.0),
            support: None,
            critical: CriticalOptions::default(),
        }
    }
}

fn resolve_support(phi: &Density, psi: &Density, given: Option<(f64, f64)>) -> Result<Option<(f64, f64)>> {
    if phi.is_zero() && psi.is_zero() {
        return Ok(None);
    }
    let s = given
        .or_else(|| match (support_of(phi), support_of(psi)) {
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
            (a, b) => a.or(b).filter(|_| phi.is_zero() || psi.is_zero()),
        })
        .ok_or_else(|| EpdError::InvalidSpec("custom densities need an explicit support".into()))?;
    Ok(Some(s))
}

fn density_spec(phi: &Density, psi: &Density, support: Option<(f64, f64)>) -> Result<Option<SolutionSpec>> {
    let Some(support) = resolve_support(phi, psi, support)? else {
        return Ok(None);
    };
    let spec = SolutionSpec::sampled(phi.clone(), psi.clone(), support).with_log_norm(LogNorm::TwoI);
    spec.validate()?;
    Ok(Some(spec))
}

/// Solves W_β = 0 at every (t, x) node by continuation from `opts.guess`.
/// Nodes without a root in the upper half-plane are flagged.
pub fn solve_hodograph_darios(
    phi: &Density,
    psi: &Density,
    x: Grid,
    t: Grid,
    opts: &DaRiosOptions,
) -> Result<DaRiosHistory> {
    if x.count == 0 || t.count == 0 {
        return Err(EpdError::InsufficientGrid { needed: 1, got: 0 });
    }
    let dens = density_spec(phi, psi, opts.support)?;
    let potential = |i: usize, j: usize| DaRiosPotential::new(dens.as_ref(), opts.flow, x.value(j), t.value(i));
    let solve = |i: usize, j: usize, (b, bb): (CPoint, CPoint)| -> Option<(CPoint, CPoint)> {
        let cp = find_critical_with(&potential(i, j).ok()?, b, bb, &opts.critical).ok()?;
        (cp.beta.im > 0.0).then_some((cp.beta, cp.beta_bar))
    };
    let seed = solve(0, 0, (opts.guess, opts.guess.conj())).or_else(|| {
        let cp = scan_critical(
            &potential(0, 0).ok()?,
            opts.guess,
            c(-4.0, 0.05),
            c(4.0, 4.0),
            8,
            &opts.critical,
        )
        .ok()?;
        (cp.beta.im > 0.0).then_some((cp.beta, cp.beta_bar))
    });
    let nodes = match seed {
        Some(s) => continue_over_grid(t.count, x.count, s, solve),
        None => vec![None; t.count * x.count],
    };
    let states = (0..t.count)
        .map(|i| {
            let row = &nodes[i * x.count..(i + 1) * x.count];
            FilamentState {
                x,
                k: row.iter().map(|n| n.map_or(f64::NAN, |p| p.0.im)).collect(),
                tau: row.iter().map(|n| n.map_or(f64::NAN, |p| -p.0.re)).collect(),
                converged: row.iter().map(Option::is_some).collect(),
            }
        })
        .collect();
    Ok(DaRiosHistory {
        flow: opts.flow,
        t,
        states,
    })
}

/// The two t = 0 integrals at (τ₀, K₀), returned as `(x, second)` where
///
/// x = -∫ (λ+τ₀)/r³ [φ + ψ ln(e²K₀/r²)] dλ,
/// second = ∫ K₀/r³ [φ + ψ (ln(K₀/r²) + (K₀² - (λ+τ₀)²)/K₀²)] dλ,
///
/// with r² = (λ+τ₀)² + K₀². A state (τ₀, K₀) is the t = 0 data at `x` when
/// `second` vanishes.
pub fn initial_data_map(
    phi: &Density,
    psi: &Density,
    tau0: f64,
    k0: f64,
    support: Option<(f64, f64)>,
) -> Result<(f64, f64)> {
    if !(k0 > 0.0) {
        return Err(EpdError::Domain(format!("K0 must be positive, got {k0}")));
    }
    let Some((a, b)) = resolve_support(phi, psi, support)? else {
        return Ok((0.0, 0.0));
    };
    let mut breaks: Vec<f64> = (0..=16).map(|i| a + (b - a) * i as f64 / 16.0).collect();
    for m in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        breaks.push(-tau0 + m * k0);
    }
    breaks.extend(phi.breakpoints().into_iter().chain(psi.breakpoints()));
    breaks.retain(|&v| v >= a && v <= b);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * (b - a));
    let opts = QuadOptions {
        tol: 1e-12,
        max_doublings: 8,
        abs_tol: 0.0,
    };
    let [first, second] = gauss_panels::<2, _>(&breaks, &opts, |l| {
        let s = l + tau0;
        let r2 = s * s + k0 * k0;
        let r3 = r2 * r2.sqrt();
        let (p, q) = (phi.eval(l), psi.eval(l));
        let lr = (k0 / r2).ln();
        Ok([
            c(s / r3 * (p + q * (2.0 + lr)), 0.0),
            c(k0 / r3 * (p + q * (lr + (k0 * k0 - s * s) / (k0 * k0))), 0.0),
        ])
    })?;
    Ok((-first.re, second.re))
}

/// Damped Newton for the t = 0 state at `x`, keeping K₀ > 0.
pub fn initial_data_root(
    phi: &Density,
    psi: &Density,
    x: f64,
    guess: (f64, f64),
    support: Option<(f64, f64)>,
) -> Result<(f64, f64)> {
    let support = resolve_support(phi, psi, support)?
        .ok_or_else(|| EpdError::NoRoot("both densities vanish".into()))?;
    if psi.is_zero() {
        let n = 2001;
        let samples: Vec<f64> = (0..n)
            .map(|i| phi.eval(support.0 + (support.1 - support.0) * i as f64 / (n - 1) as f64))
            .collect();
        if samples.iter().all(|&v| v >= 0.0) || samples.iter().all(|&v| v <= 0.0) {
            return Err(EpdError::NoRoot(
                "with psi = 0 and phi of one sign the second integral never vanishes".into(),
            ));
        }
    }
    let f = |tau: f64, k: f64| -> Result<[f64; 2]> {
        let (xv, s) = initial_data_map(phi, psi, tau, k, Some(support))?;
        Ok([xv - x, s])
    };
    let (mut tau, mut k) = guess;
    if !(k > 0.0) {
        return Err(EpdError::Domain("the guess needs K0 > 0".into()));
    }
    let mut r = f(tau, k)?;
    let norm = |r: &[f64; 2]| r[0].hypot(r[1]);
    for _ in 0..80 {
        let h = 1e-6 * (1.0 + tau.abs() + k);
        let hk = h.min(0.5 * k);
        let ft = (f(tau + h, k)?, f(tau - h, k)?);
        let fk = (f(tau, k + hk)?, f(tau, k - hk)?);
        let j = [
            [(ft.0[0] - ft.1[0]) / (2.0 * h), (fk.0[0] - fk.1[0]) / (2.0 * hk)],
            [(ft.0[1] - ft.1[1]) / (2.0 * h), (fk.0[1] - fk.1[1]) / (2.0 * hk)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dt = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        let dk = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (nt, mut nk) = (tau - lam * dt, k - lam * dk);
            if nk <= 0.0 {
                nk = 0.25 * k;
            }
            let nr = f(nt, nk)?;
            if norm(&nr) < norm(&r) || norm(&nr) == 0.0 {
                let step = (nt - tau).hypot(nk - k);
                tau = nt;
                k = nk;
                r = nr;
                accepted = true;
                if step <= 1e-14 * (1.0 + tau.abs() + k) {
                    return Ok((tau, k));
                }
                break;
            }
            lam *= 0.5;
        }
        if !accepted {
            // no descent left: converged to rounding or stuck
            let scale = 1e-10 * (1.0 + x.abs());
            return if norm(&r) <= scale {
                Ok((tau, k))
            } else {
                Err(EpdError::NoRoot(format!("Newton stalled with residual {:.3e}", norm(&r))))
            };
        }
    }
    if norm(&r) <= 1e-10 * (1.0 + x.abs()) {
        Ok((tau, k))
    } else {
        Err(EpdError::NoRoot(format!("no t = 0 state found at x = {x}")))
    }
}
