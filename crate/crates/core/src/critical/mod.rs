//! Critical points of W: location, Hessian data, clinants, variations and
//! exactness of the induced potential.

mod exact;
pub mod level;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexfield::{c, CPoint, I};
use crate::epd::{Jet2, JetSource};
use crate::error::{EpdError, Result};

pub use exact::{exactness_check, loop_closure, track_critical};
pub use level::{
    crossing_angle, double_point_angle, trace_level_curve, trace_level_curve_with, DualLevel, LevelFunction,
    TraceOptions, TracedCurve, WLevel,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewtonMode {
    /// Real mode when the source reports a real gradient, complex otherwise.
    #[default]
    Auto,
    /// Unknowns (Re β, Im β) with β̄ = conj(β).
    Real,
    /// β and β̄ as independent complex unknowns.
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalOptions {
    pub mode: NewtonMode,
    /// Step-size convergence threshold relative to 1 + |β|.
    pub tol: f64,
    pub max_iter: usize,
    /// |W_ββ| below this times the source scale marks a higher-order point.
    pub degeneracy: f64,
    /// Return higher-order points instead of failing with `DegenerateHessian`.
    pub allow_degenerate: bool,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        CriticalOptions {
            mode: NewtonMode::Auto,
            tol: 1e-13,
            max_iter: 100,
            degeneracy: 1e-8,
            allow_degenerate: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub beta: CPoint,
    pub beta_bar: CPoint,
    /// W_ββ
    pub wbb: CPoint,
    /// W_β̄β̄
    pub wbbb: CPoint,
    /// W_ββ̄
    pub wbmix: CPoint,
    /// 1 for a generic point; N when the derivatives of orders 2..=N vanish.
    pub order: u32,
    /// ∂_β^{N+1} W and ∂_β̄^{N+1} W, the leading non-vanishing derivatives.
    pub lead: CPoint,
    pub lead_bar: CPoint,
    pub iterations: usize,
    /// max(|W_β|, |W_β̄|) at the returned point.
    pub residual: f64,
}

pub fn find_critical<S: JetSource + ?Sized>(src: &S, guess: CPoint) -> Result<CriticalPoint> {
    find_critical_with(src, guess, guess.conj(), &CriticalOptions::default())
}

/// Newton iteration for W_β = W_β̄ = 0 starting from `(guess, guess_bar)`;
/// `guess_bar` is ignored in real mode.
pub fn find_critical_with<S: JetSource + ?Sized>(
    src: &S,
    guess: CPoint,
    guess_bar: CPoint,
    opts: &CriticalOptions,
) -> Result<CriticalPoint> {
    let real = match opts.mode {
        NewtonMode::Auto => src.is_real(),
        NewtonMode::Real => true,
        NewtonMode::Complex => false,
    };
    if real && guess.im == 0.0 {
        return Err(EpdError::Domain("initial guess must lie off the real axis".into()));
    }
    let mut b = guess;
    let mut bb = if real { guess.conj() } else { guess_bar };
    if (b - bb).norm() == 0.0 {
        return Err(EpdError::CoincidentPoints(b));
    }
    let fnorm = |j: &Jet2| if real { j.wz.norm() } else { j.wz.norm().hypot(j.wzb.norm()) };
    let floor = 1e-14 * src.scale();

    let mut jet = src.jet(b, bb)?;
    let mut iterations = 0;
    let mut done = false;
    while iterations < opts.max_iter {
        if fnorm(&jet) <= floor {
            done = true;
            break;
        }
        iterations += 1;
        let step = if real {
            newton_step_real(&jet).map(|d| (d, d.conj()))
        } else {
            newton_step_complex(&jet)
        };
        let (db, dbb) = step.map_err(|_| EpdError::NonConvergence {
            iterations,
            residual: fnorm(&jet),
        })?;
        if !(db.re.is_finite() && db.im.is_finite() && dbb.re.is_finite() && dbb.im.is_finite()) {
            return Err(EpdError::NonConvergence {
                iterations,
                residual: fnorm(&jet),
            });
        }
        let small = db.norm().max(dbb.norm()) <= opts.tol * (1.0 + b.norm());

        // Keep β - β̄ from crossing or approaching zero.
        let gap = b - bb;
        let mut t = 1.0;
        for _ in 0..60 {
            let g = gap + t * (db - dbb);
            let same_side = if real { g.im * gap.im > 0.0 } else { true };
            if same_side && g.norm() >= 0.1 * gap.norm() {
                break;
            }
            t *= 0.5;
        }

        let f0 = fnorm(&jet);
        let mut accepted = None;
        for _ in 0..40 {
            let nb = b + t * db;
            let nbb = if real { nb.conj() } else { bb + t * dbb };
            if let Ok(nj) = src.jet(nb, nbb) {
                let f1 = fnorm(&nj);
                if f1 < f0 * (1.0 - 1e-4 * t) || f1 <= floor || small {
                    accepted = Some((nb, nbb, nj));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((nb, nbb, nj)) = accepted else {
            return Err(EpdError::NonConvergence {
                iterations,
                residual: f0,
            });
        };
        b = nb;
        bb = nbb;
        jet = nj;
        let gap = (b - bb).norm();
        if gap <= 1e-10 * (1.0 + b.norm()) {
            return Err(EpdError::CollapseToRealAxis(b));
        }
        if small {
            done = true;
            break;
        }
    }
    if !done {
        return Err(EpdError::NonConvergence {
            iterations,
            residual: fnorm(&jet),
        });
    }

    let threshold = opts.degeneracy * src.scale();
    let mut order = 1;
    let (mut lead, mut lead_bar) = (jet.wzz, jet.wzbzb);
    if jet.wzz.norm() < threshold {
        order = 0;
        for n in 3..=8 {
            let (d, db) = src.pure_derivatives(b, bb, n)?;
            if d.norm() >= threshold {
                order = (n - 1) as u32;
                lead = d;
                lead_bar = db;
                break;
            }
        }
        if order == 0 {
            order = 7;
        }
        if !opts.allow_degenerate {
            return Err(EpdError::DegenerateHessian { beta: b, order });
        }
    }
    Ok(CriticalPoint {
        beta: b,
        beta_bar: bb,
        wbb: jet.wzz,
        wbbb: jet.wzbzb,
        wbmix: jet.wzzb,
        order,
        lead,
        lead_bar,
        iterations,
        residual: jet.wz.norm().max(jet.wzb.norm()),
    })
}

/// Real Newton step for W_β(β, conj β) = 0 in the unknowns (Re β, Im β).
fn newton_step_real(j: &Jet2) -> Result<CPoint> {
    // ∂/∂a = W_ββ + W_ββ̄,  ∂/∂b = i(W_ββ - W_ββ̄)
    let da = j.wzz + j.wzzb;
    let db = I * (j.wzz - j.wzzb);
    let det = da.re * db.im - db.re * da.im;
    if det == 0.0 || !det.is_finite() || det.abs() <= 1e-15 * da.norm() * db.norm() {
        return Err(EpdError::NonConvergence {
            iterations: 0,
            residual: j.wz.norm(),
        });
    }
    let (fr, fi) = (-j.wz.re, -j.wz.im);
    let x = (fr * db.im - db.re * fi) / det;
    let y = (da.re * fi - da.im * fr) / det;
    Ok(c(x, y))
}

/// Complex Newton step for (W_β, W_β̄) = 0 in the unknowns (β, β̄).
fn newton_step_complex(j: &Jet2) -> Result<(CPoint, CPoint)> {
    let (a, b, d) = (j.wzz, j.wzzb, j.wzbzb);
    let det = a * d - b * b;
    if det.norm() <= 1e-15 * (a.norm() * d.norm() + b.norm() * b.norm()) || det.norm() == 0.0 {
        return Err(EpdError::NonConvergence {
            iterations: 0,
            residual: j.wz.norm().hypot(j.wzb.norm()),
        });
    }
    let x = -(d * j.wz - b * j.wzb) / det;
    let y = -(a * j.wzb - b * j.wz) / det;
    Ok((x, y))
}

/// Runs [`find_critical_with`] from a grid of seeds over the rectangle
/// `lo..hi` and returns the root with Im β > 0 closest to `guess`.
pub fn scan_critical<S: JetSource + ?Sized>(
    src: &S,
    guess: CPoint,
    lo: CPoint,
    hi: CPoint,
    n: usize,
    opts: &CriticalOptions,
) -> Result<CriticalPoint> {
    let n = n.max(2);
    let seeds: Vec<CPoint> = (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            c(
                lo.re + (hi.re - lo.re) * i as f64 / (n - 1) as f64,
                lo.im + (hi.im - lo.im) * j as f64 / (n - 1) as f64,
            )
        })
        .chain(std::iter::once(guess))
        .filter(|s| s.im != 0.0)
        .collect();
    let found: Vec<CriticalPoint> = seeds
        .par_iter()
        .filter_map(|&s| find_critical_with(src, s, s.conj(), opts).ok())
        .collect();
    found
        .into_iter()
        .filter(|cp| cp.beta.im > 0.0)
        .min_by(|a, b| {
            (a.beta - guess)
                .norm()
                .total_cmp(&(b.beta - guess).norm())
        })
        .ok_or(EpdError::NonConvergence {
            iterations: 0,
            residual: f64::NAN,
        })
}

/// Values of dz̄/dz along the level-curve arcs through the critical point:
/// the N+1 roots of c^{N+1} = -∂_β^{N+1}W / ∂_β̄^{N+1}W.
pub fn clinants(cp: &CriticalPoint) -> Result<Vec<CPoint>> {
    let n = cp.order as usize + 1;
    if cp.lead_bar.norm() == 0.0 || cp.lead.norm() == 0.0 {
        return Err(EpdError::DegenerateHessian {
            beta: cp.beta,
            order: cp.order,
        });
    }
    let base = (-cp.lead / cp.lead_bar).powf(1.0 / n as f64);
    Ok((0..n)
        .map(|k| base * CPoint::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect())
}

/// Tangent angles in [0, π) of the arcs through the critical point.
pub fn tangent_angles(cp: &CriticalPoint) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = clinants(cp)?
        .into_iter()
        .map(|c| (-c.arg() / 2.0).rem_euclid(PI))
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// First-order motion `(δβ, δβ̄)` of the critical point when `delta` is added to W.
pub fn vary_critical<D: JetSource + ?Sized>(cp: &CriticalPoint, delta: &D) -> Result<(CPoint, CPoint)> {
    if cp.order != 1 || cp.wbb.norm() == 0.0 || cp.wbbb.norm() == 0.0 {
        return Err(EpdError::DegenerateHessian {
            beta: cp.beta,
            order: cp.order,
        });
    }
    let j = delta.jet(cp.beta, cp.beta_bar)?;
    Ok((-j.wz / cp.wbb, -j.wzb / cp.wbbb))
}
