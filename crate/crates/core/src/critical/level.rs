//! Level curves of W and of its dual W* in the (x, y) plane.

use std::f64::consts::PI;

use crate::complexfield::{CPoint, I};
use crate::epd::{dual_value, JetSource};
use crate::error::{EpdError, Result};

/// A real function of z = x + iy whose level sets are traced.
pub trait LevelFunction: Sync {
    fn value(&self, z: CPoint) -> Result<f64>;
    /// `F_x + i F_y`.
    fn gradient(&self, z: CPoint) -> Result<CPoint>;
}

/// Re W on z̄ = conj(z).
pub struct WLevel<'a, S: ?Sized>(pub &'a S);

impl<S: JetSource + ?Sized> LevelFunction for WLevel<'_, S> {
    fn value(&self, z: CPoint) -> Result<f64> {
        Ok(self.0.jet(z, z.conj())?.w.re)
    }

    fn gradient(&self, z: CPoint) -> Result<CPoint> {
        let j = self.0.jet(z, z.conj())?;
        Ok(CPoint::new((j.wz + j.wzb).re, (I * (j.wz - j.wzb)).re))
    }
}

/// Re W* with W* fixed to `anchor_value` at `anchor`; values are integrated
/// along the straight segment from the anchor.
pub struct DualLevel<'a, S: ?Sized> {
    pub src: &'a S,
    pub anchor: CPoint,
    pub anchor_value: f64,
}

impl<'a, S: JetSource + ?Sized> DualLevel<'a, S> {
    pub fn new(src: &'a S, anchor: CPoint) -> Self {
        DualLevel {
            src,
            anchor,
            anchor_value: 0.0,
        }
    }
}

impl<S: JetSource + ?Sized> LevelFunction for DualLevel<'_, S> {
    fn value(&self, z: CPoint) -> Result<f64> {
        if z == self.anchor {
            return Ok(self.anchor_value);
        }
        Ok(self.anchor_value + dual_value(self.src, &[self.anchor, z])?.re)
    }

    fn gradient(&self, z: CPoint) -> Result<CPoint> {
        let j = self.src.jet(z, z.conj())?;
        let d = z - z.conj();
        // W*_z = (z - z̄)W_z, W*_z̄ = -(z - z̄)W_z̄
        let (sz, szb) = (d * j.wz, -d * j.wzb);
        Ok(CPoint::new((sz + szb).re, (I * (sz - szb)).re))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub steps: usize,
    pub h: f64,
    /// Corrector tolerance on |F - F₀| relative to 1 + |F₀|.
    pub tol: f64,
    pub max_corrector: usize,
    /// Stop with the double-point flag once |∇F| drops below this fraction of its seed value.
    pub double_point_ratio: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            steps: 100,
            h: 1e-2,
            tol: 1e-13,
            max_corrector: 30,
            double_point_ratio: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracedCurve {
    pub level: f64,
    pub points: Vec<CPoint>,
    /// The march stopped because the gradient nearly vanished (a critical point is close).
    pub double_point: bool,
}

/// Traces `F = F(seed)` forward from `seed`.
pub fn trace_level_curve<F: LevelFunction + ?Sized>(f: &F, seed: CPoint, steps: usize, h: f64) -> Result<TracedCurve> {
    let opts = TraceOptions {
        steps,
        h,
        ..Default::default()
    };
    trace_level_curve_with(f, seed, &opts, 1.0)
}

/// Newton projection onto `F = level` along the gradient.
pub fn project_to_level<F: LevelFunction + ?Sized>(f: &F, z: CPoint, level: f64, opts: &TraceOptions) -> Result<CPoint> {
    let mut q = z;
    for it in 0..opts.max_corrector {
        let r = f.value(q)? - level;
        if r.abs() <= opts.tol * (1.0 + level.abs()) {
            return Ok(q);
        }
        let g = f.gradient(q)?;
        let g2 = g.norm_sqr();
        if g2 == 0.0 {
            break;
        }
        let step = g * (r / g2);
        q -= step;
        if step.norm() <= 1e-15 * (1.0 + q.norm()) && it > 0 {
            return Ok(q);
        }
    }
    Err(EpdError::NonConvergence {
        iterations: opts.max_corrector,
        residual: (f.value(q)? - level).abs(),
    })
}

/// Predictor-corrector march; `direction` = ±1 selects the orientation
/// relative to the tangent `i∇F`.
pub fn trace_level_curve_with<F: LevelFunction + ?Sized>(
    f: &F,
    seed: CPoint,
    opts: &TraceOptions,
    direction: f64,
) -> Result<TracedCurve> {
    let level = f.value(seed)?;
    let g0 = f.gradient(seed)?.norm();
    if g0 == 0.0 {
        return Err(EpdError::Domain("seed is a critical point of the level function".into()));
    }
    let mut points = vec![seed];
    let mut p = seed;
    let mut prev_t: Option<CPoint> = None;
    let mut double_point = false;
    for _ in 0..opts.steps {
        let g = f.gradient(p)?;
        if g.norm() < opts.double_point_ratio * g0 {
            double_point = true;
            break;
        }
        let mut t = I * g / g.norm() * direction;
        if let Some(pt) = prev_t {
            if (t * pt.conj()).re < 0.0 {
                t = -t;
            }
        }
        let mut h = opts.h;
        let mut next = None;
        for _ in 0..12 {
            if let Ok(q) = project_to_level(f, p + h * t, level, opts) {
                if (q - p).norm() <= 2.0 * h {
                    next = Some(q);
                    break;
                }
            }
            h *= 0.5;
        }
        let q = next.ok_or(EpdError::NonConvergence {
            iterations: opts.max_corrector,
            residual: f64::NAN,
        })?;
        prev_t = Some(t);
        points.push(q);
        p = q;
    }
    Ok(TracedCurve {
        level,
        points,
        double_point,
    })
}

/// Secant tangent of the level curve through `z` from one step each way.
fn secant(f: &(impl LevelFunction + ?Sized), z: CPoint, h: f64) -> Result<CPoint> {
    let opts = TraceOptions {
        steps: 1,
        h,
        ..Default::default()
    };
    let fwd = trace_level_curve_with(f, z, &opts, 1.0)?;
    let bwd = trace_level_curve_with(f, z, &opts, -1.0)?;
    let (a, b) = (fwd.points.last().unwrap(), bwd.points.last().unwrap());
    Ok(a - b)
}

/// Angle in [0, π/2] between the traced level curves of `f` and `g` through `z`.
pub fn crossing_angle(
    f: &(impl LevelFunction + ?Sized),
    g: &(impl LevelFunction + ?Sized),
    z: CPoint,
    h: f64,
) -> Result<f64> {
    let a = secant(f, z, h)?;
    let b = secant(g, z, h)?;
    let prod = a * b.conj();
    Ok(prod.im.abs().atan2(prod.re.abs()))
}

/// Angle in [0, π/2] between the two arcs of `F = F(β)` through a simple
/// critical point, from the chords joining opposite crossings of a small circle.
pub fn double_point_angle(f: &(impl LevelFunction + ?Sized), beta: CPoint, radius: f64) -> Result<f64> {
    let level = f.value(beta)?;
    let g = |theta: f64| -> Result<f64> { Ok(f.value(beta + CPoint::from_polar(radius, theta))? - level) };
    let m = 720;
    let mut roots = Vec::new();
    let mut prev = g(0.0)?;
    for k in 1..=m {
        let theta = 2.0 * PI * k as f64 / m as f64;
        let cur = g(theta)?;
        if prev == 0.0 || prev * cur < 0.0 {
            let (mut a, mut b) = (theta - 2.0 * PI / m as f64, theta);
            let mut fa = prev;
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let fm = g(mid)?;
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = cur;
    }
    if roots.len() != 4 {
        return Err(EpdError::Domain(format!(
            "expected 4 level crossings around a simple critical point, found {}",
            roots.len()
        )));
    }
    let pt = |t: f64| CPoint::from_polar(radius, t);
    let c1 = pt(roots[2]) - pt(roots[0]);
    let c2 = pt(roots[3]) - pt(roots[1]);
    let prod = c1 * c2.conj();
    Ok(prod.im.abs().atan2(prod.re.abs()))
}
