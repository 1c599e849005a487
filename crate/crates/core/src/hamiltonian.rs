//! Hamiltonian operators of the dNLS/dToda hierarchy on a periodic grid, in
//! the variables (ρ, u) with β = u + (i/2)ρ^{1/2}.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{EpdError, Result};
use crate::report::ResidualReport;

/// A pair of grid functions ordered (ρ-component, u-component).
pub type Pair = (Vec<f64>, Vec<f64>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    /// Period length.
    pub length: f64,
}

impl FieldState {
    pub fn new(rho: Vec<f64>, u: Vec<f64>, length: f64) -> Result<Self> {
        let s = FieldState { rho, u, length };
        s.validate()?;
        Ok(s)
    }

    /// Samples `rho(x)` and `u(x)` at x_j = j·L/n.
    pub fn sample(n: usize, length: f64, rho: impl Fn(f64) -> f64, u: impl Fn(f64) -> f64) -> Result<Self> {
        let xs: Vec<f64> = (0..n).map(|j| j as f64 * length / n as f64).collect();
        FieldState::new(xs.iter().map(|&x| rho(x)).collect(), xs.iter().map(|&x| u(x)).collect(), length)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.len() != self.u.len() {
            return Err(EpdError::Domain("rho and u have different lengths".into()));
        }
        if self.rho.len() < 8 {
            return Err(EpdError::InsufficientGrid {
                needed: 8,
                got: self.rho.len(),
            });
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(EpdError::Domain("period length must be positive".into()));
        }
        if let Some(r) = self.rho.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
            return Err(EpdError::Domain(format!("rho must be positive, found {r}")));
        }
        if self.u.iter().any(|v| !v.is_finite()) {
            return Err(EpdError::NonFinite("u"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n() as f64
    }

    /// `(∫ρ, ∫u)` by the periodic rectangle rule.
    pub fn integrals(&self) -> (f64, f64) {
        (self.rho.iter().sum::<f64>() * self.dx(), self.u.iter().sum::<f64>() * self.dx())
    }

    /// Reads columns `x, rho, u`; the period is n·(x₁ - x₀).
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let (mut xs, mut rho, mut u) = (Vec::new(), Vec::new(), Vec::new());
        for rec in r.deserialize() {
            let (x, a, b): (f64, f64, f64) = rec?;
            xs.push(x);
            rho.push(a);
            u.push(b);
        }
        if xs.len() < 2 {
            return Err(EpdError::InsufficientGrid { needed: 8, got: xs.len() });
        }
        let length = (xs[1] - xs[0]) * xs.len() as f64;
        FieldState::new(rho, u, length)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "rho", "u"])?;
        for j in 0..self.n() {
            w.write_record([
                format!("{:.16e}", j as f64 * self.dx()),
                format!("{:.16e}", self.rho[j]),
                format!("{:.16e}", self.u[j]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A functional ∫ h(ρ, u) dx with a pointwise density.
#[derive(Clone)]
pub enum Functional {
    /// h = u
    CasimirU,
    /// h = -ρ(ln ρ - 1) + u²/2
    H1Toda,
    /// h = ρu²/2 - ρ²/2
    DNLSEnergy,
    /// Gradient taken by central differences.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::CasimirU => write!(f, "CasimirU"),
            Functional::H1Toda => write!(f, "H1Toda"),
            Functional::DNLSEnergy => write!(f, "DNLSEnergy"),
            Functional::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Functional {
    pub fn density(&self, rho: f64, u: f64) -> f64 {
        match self {
            Functional::CasimirU => u,
            Functional::H1Toda => -rho * (rho.ln() - 1.0) + u * u / 2.0,
            Functional::DNLSEnergy => rho * u * u / 2.0 - rho * rho / 2.0,
            Functional::Custom(h) => h(rho, u),
        }
    }

    /// `(∂h/∂ρ, ∂h/∂u)`
    pub fn partials(&self, rho: f64, u: f64) -> (f64, f64) {
        match self {
            Functional::CasimirU => (0.0, 1.0),
            Functional::H1Toda => (-rho.ln(), u),
            Functional::DNLSEnergy => (u * u / 2.0 - rho, rho * u),
            Functional::Custom(h) => {
                // fourth-order stencil; the ρ step stays inside ρ > 0
                let d = |f: &dyn Fn(f64) -> f64, x: f64, e: f64| {
                    (-f(x + 2.0 * e) + 8.0 * f(x + e) - 8.0 * f(x - e) + f(x - 2.0 * e)) / (12.0 * e)
                };
                let er = 1e-3 * rho;
                let eu = 1e-3 * u.abs().max(1.0);
                (d(&|r| h(r, u), rho, er), d(&|v| h(rho, v), u, eu))
            }
        }
    }

    pub fn value(&self, s: &FieldState) -> f64 {
        s.rho.iter().zip(&s.u).map(|(&r, &v)| self.density(r, v)).sum::<f64>() * s.dx()
    }
}

/// Variational gradient `(δF/δρ, δF/δu)`.
pub fn grad(f: &Functional, s: &FieldState) -> Result<Pair> {
    s.validate()?;
    Ok(s.rho.iter().zip(&s.u).map(|(&r, &v)| f.partials(r, v)).unzip())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Differencing {
    #[default]
    Spectral,
    /// Fourth-order central differences.
    Central4,
}

/// Periodic first derivative of grid samples over a period `length`.
pub fn derivative(v: &[f64], length: f64, method: Differencing) -> Vec<f64> {
    let n = v.len();
    match method {
        Differencing::Spectral => {
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(n);
            let inv = planner.plan_fft_inverse(n);
            let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fwd.process(&mut buf);
            let k0 = 2.0 * std::f64::consts::PI / length;
            for (j, b) in buf.iter_mut().enumerate() {
                let k = if 2 * j < n {
                    j as f64
                } else if 2 * j == n {
                    0.0
                } else {
                    j as f64 - n as f64
                };
                *b *= Complex64::new(0.0, k * k0 / n as f64);
            }
            inv.process(&mut buf);
            buf.iter().map(|b| b.re).collect()
        }
        Differencing::Central4 => {
            let h = length / n as f64;
            (0..n)
                .map(|j| {
                    let at = |o: isize| v[(j as isize + o).rem_euclid(n as isize) as usize];
                    (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
                })
                .collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    J0,
    J1,
    J1Eps(f64),
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn axpy(out: &mut [f64], a: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += a * v;
    }
}

/// `(a∂ + ∂a) g`
fn sym(a: &[f64], g: &[f64], s: &FieldState, m: Differencing) -> Vec<f64> {
    let mut out = mul(a, &derivative(g, s.length, m));
    axpy(&mut out, 1.0, &derivative(&mul(a, g), s.length, m));
    out
}

/// Applies the matrix operator to a gradient pair.
pub fn apply(op: Operator, g: &Pair, s: &FieldState, m: Differencing) -> Result<Pair> {
    let n = s.n();
    if g.0.len() != n || g.1.len() != n {
        return Err(EpdError::Domain("gradient length differs from the grid".into()));
    }
    let d = |v: &[f64]| derivative(v, s.length, m);
    let (gr, gu) = (&g.0, &g.1);
    Ok(match op {
        Operator::J0 => (d(gu), d(gr)),
        Operator::J1 => {
            let mut top = sym(&s.rho, gr, s, m);
            axpy(&mut top, 1.0, &mul(&s.u, &d(gu)));
            let mut bottom = d(&mul(&s.u, gr));
            axpy(&mut bottom, -2.0, &d(gu));
            (top, bottom)
        }
        Operator::J1Eps(eps) => {
            if !(eps > 0.0) {
                return Err(EpdError::Domain("epsilon must be positive".into()));
            }
            let rho_eps: Vec<f64> = s.rho.iter().map(|r| r.powf(eps)).collect();
            let mut top = sym(&s.rho, gr, s, m);
            axpy(&mut top, 1.0, &mul(&s.u, &d(gu)));
            axpy(&mut top, eps, &d(&mul(&s.u, gu)));
            let mut bottom = d(&mul(&s.u, gr));
            axpy(&mut bottom, eps, &mul(&s.u, &d(gr)));
            axpy(&mut bottom, -1.0, &sym(&rho_eps, gu, s, m));
            (top, bottom)
        }
    })
}

/// `op · ∇F`
pub fn hamiltonian_flow(op: Operator, f: &Functional, s: &FieldState, m: Differencing) -> Result<Pair> {
    apply(op, &grad(f, s)?, s, m)
}

/// `(u_x, -(ln ρ)_x)`, the ε → 0 limit of J1^ε ∇(u/ε).
pub fn limit_reference(s: &FieldState, m: Differencing) -> Pair {
    let ln_rho: Vec<f64> = s.rho.iter().map(|r| r.ln()).collect();
    let lr = derivative(&ln_rho, s.length, m);
    (derivative(&s.u, s.length, m), lr.into_iter().map(|v| -v).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitFlow {
    pub eps: Vec<f64>,
    /// `‖X₁^ε - X₁‖∞` for each ε.
    pub errors: Vec<f64>,
    /// Empirical orders between consecutive ε.
    pub orders: Vec<f64>,
    pub reference: Pair,
}

/// Evaluates X₁^ε = J1^ε ∇(u/ε) along a sequence of ε and compares with the limit flow.
pub fn limit_flow(s: &FieldState, eps: &[f64], m: Differencing) -> Result<LimitFlow> {
    s.validate()?;
    if eps.iter().any(|&e| !(e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(EpdError::Domain("epsilon sequence must be positive and decreasing".into()));
    }
    let reference = limit_reference(s, m);
    let n = s.n();
    let errors = eps
        .iter()
        .map(|&e| {
            let g = (vec![0.0; n], vec![1.0 / e; n]);
            let (a, b) = apply(Operator::J1Eps(e), &g, s, m)?;
            Ok(max_diff(&a, &reference.0).max(max_diff(&b, &reference.1)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let orders = errors
        .windows(2)
        .zip(eps.windows(2))
        .map(|(r, e)| (r[0] / r[1]).ln() / (e[0] / e[1]).ln())
        .collect();
    Ok(LimitFlow {
        eps: eps.to_vec(),
        errors,
        orders,
        reference,
    })
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn inner(a: &Pair, b: &Pair, dx: f64) -> f64 {
    (a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum::<f64>() + a.1.iter().zip(&b.1).map(|(x, y)| x * y).sum::<f64>())
        * dx
}

fn norm(a: &Pair, dx: f64) -> f64 {
    inner(a, a, dx).sqrt()
}

/// A random trigonometric polynomial with modes below n/4.
fn random_smooth(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let modes = (n / 4).max(1);
    let coeffs: Vec<(f64, f64)> = (0..modes)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    (0..n)
        .map(|j| {
            let x = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| a * (k as f64 * x).cos() + b * (k as f64 * x).sin())
                .sum()
        })
        .collect()
}

/// `|⟨g₁, J g₂⟩ + ⟨J g₁, g₂⟩| / (‖g₁‖‖J g₂‖ + ‖J g₁‖‖g₂‖)` over random smooth pairs.
pub fn skew_check(op: Operator, s: &FieldState, trials: usize, seed: u64, m: Differencing) -> Result<ResidualReport> {
    s.validate()?;
    let n = s.n();
    let values = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let g1 = (random_smooth(&mut rng, n), random_smooth(&mut rng, n));
            let g2 = (random_smooth(&mut rng, n), random_smooth(&mut rng, n));
            let (j1, j2) = (apply(op, &g1, s, m)?, apply(op, &g2, s, m)?);
            let dx = s.dx();
            let scale = norm(&g1, dx) * norm(&j2, dx) + norm(&j1, dx) * norm(&g2, dx);
            let asym = (inner(&g1, &j2, dx) + inner(&j1, &g2, dx)).abs();
            Ok(if scale == 0.0 { asym } else { asym / scale })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ResidualReport::from_values(
        format!("skew {op:?}"),
        &values,
        vec![n, trials],
        s.dx(),
    ))
}

/// Largest explicit step allowed by the spectral radius estimate `max(|u| + √ρ)`.
pub fn cfl_step(s: &FieldState, courant: f64) -> f64 {
    let speed = s
        .rho
        .iter()
        .zip(&s.u)
        .fold(0.0f64, |m, (&r, &v)| m.max(v.abs() + r.abs().sqrt().max(1.0)));
    courant * s.dx() / speed
}

/// Classical fourth-order Runge-Kutta integration of `(ρ, u)_t = op ∇F`.
pub fn evolve(
    s: &FieldState,
    f: &Functional,
    op: Operator,
    dt: f64,
    steps: usize,
    m: Differencing,
) -> Result<FieldState> {
    let rhs = |st: &FieldState| hamiltonian_flow(op, f, st, m);
    let shifted = |st: &FieldState, k: &Pair, a: f64| -> Result<FieldState> {
        let mut rho = st.rho.clone();
        let mut u = st.u.clone();
        axpy(&mut rho, a, &k.0);
        axpy(&mut u, a, &k.1);
        FieldState::new(rho, u, st.length)
    };
    let mut cur = s.clone();
    for _ in 0..steps {
        let k1 = rhs(&cur)?;
        let k2 = rhs(&shifted(&cur, &k1, dt / 2.0)?)?;
        let k3 = rhs(&shifted(&cur, &k2, dt / 2.0)?)?;
        let k4 = rhs(&shifted(&cur, &k3, dt)?)?;
        let mut next = cur.clone();
        for (k, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
            axpy(&mut next.rho, dt * w / 6.0, &k.0);
            axpy(&mut next.u, dt * w / 6.0, &k.1);
        }
        next.validate()?;
        cur = next;
    }
    Ok(cur)
}
