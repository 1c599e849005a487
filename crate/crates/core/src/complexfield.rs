//! Branch-aware kernels and contour quadrature.
//!
//! Every representation of a solution integrates a density against the kernel
//! `((λ-z)(λ-z̄))^{-1/2}`, optionally multiplied by
//! `ln((z-z̄)/((λ-z)(λ-z̄)))`. On the real axis the principal power of the
//! product is the single-valued choice. On closed circles the principal root
//! of the product is discontinuous (the product winds twice around the origin),
//! so circle contours use the branch that is analytic on the circle itself:
//! factored about `λ = ∞` for large circles and about `λ = 0` for small ones.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EpdError, Result};

pub type CPoint = Complex64;

/// Relative distance below which a node is treated as hitting a kernel singularity.
pub const SINGULAR_TOL: f64 = 1e-12;

pub const I: CPoint = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> CPoint {
    Complex64::new(re, im)
}

pub fn check_finite(p: CPoint, what: &'static str) -> Result<()> {
    if p.re.is_finite() && p.im.is_finite() {
        Ok(())
    } else {
        Err(EpdError::NonFinite(what))
    }
}

fn check_distinct(lambda: CPoint, p: CPoint, which: &'static str) -> Result<()> {
    let scale = 1.0f64.max(lambda.norm()).max(p.norm());
    if (lambda - p).norm() <= SINGULAR_TOL * scale {
        Err(EpdError::SingularPoint {
            lambda,
            point: p,
            which,
        })
    } else {
        Ok(())
    }
}

fn check_split(z: CPoint, zb: CPoint) -> Result<()> {
    let scale = 1.0f64.max(z.norm()).max(zb.norm());
    if (z - zb).norm() <= SINGULAR_TOL * scale {
        Err(EpdError::CoincidentPoints(z))
    } else {
        Ok(())
    }
}

/// Which single-valued determination of the kernels to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Principal powers of the product; real positive for real λ and z̄ = conj(z).
    Principal,
    /// Analytic outside a disc containing z and z̄; behaves like `1/λ` at infinity.
    Outer,
    /// Analytic inside a disc excluding z and z̄; equals `-(z z̄)^{-1/2}` at λ = 0.
    Inner,
}

/// `((λ-z)(λ-z̄))^{-1/2}` with the principal root of the product.
pub fn kernel_pow(lambda: CPoint, z: CPoint, zb: CPoint) -> Result<CPoint> {
    kernel_pow_on(Branch::Principal, lambda, z, zb)
}

/// Principal logarithm of `(z-z̄)/((λ-z)(λ-z̄))`.
pub fn kernel_log(lambda: CPoint, z: CPoint, zb: CPoint) -> Result<CPoint> {
    kernel_log_on(Branch::Principal, lambda, z, zb)
}

pub fn kernel_pow_on(branch: Branch, lambda: CPoint, z: CPoint, zb: CPoint) -> Result<CPoint> {
    check_finite(lambda, "lambda")?;
    check_finite(z, "z")?;
    check_finite(zb, "zb")?;
    check_distinct(lambda, z, "z")?;
    check_distinct(lambda, zb, "zb")?;
    Ok(match branch {
        Branch::Principal => ((lambda - z) * (lambda - zb)).sqrt().inv(),
        Branch::Outer => {
            let q = (1.0 - z / lambda) * (1.0 - zb / lambda);
            (lambda * q.sqrt()).inv()
        }
        Branch::Inner => {
            let q = (1.0 - lambda / z) * (1.0 - lambda / zb);
            -((z * zb).sqrt() * q.sqrt()).inv()
        }
    })
}

pub fn kernel_log_on(branch: Branch, lambda: CPoint, z: CPoint, zb: CPoint) -> Result<CPoint> {
    check_finite(lambda, "lambda")?;
    check_finite(z, "z")?;
    check_finite(zb, "zb")?;
    check_split(z, zb)?;
    check_distinct(lambda, z, "z")?;
    check_distinct(lambda, zb, "zb")?;
    Ok(match branch {
        Branch::Principal => ((z - zb) / ((lambda - z) * (lambda - zb))).ln(),
        Branch::Outer => (z - zb).ln() - ((1.0 - z / lambda) * (1.0 - zb / lambda)).ln(),
        Branch::Inner => {
            ((z - zb) / (z * zb)).ln() - ((1.0 - lambda / z) * (1.0 - lambda / zb)).ln()
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContourKind {
    CircleAtInfinity { radius: f64 },
    CircleAtOrigin { radius: f64 },
    SegmentBetween { z: CPoint, zb: CPoint },
    RealInterval { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub kind: ContourKind,
    pub nodes: usize,
}

pub const MIN_NODES: usize = 16;
pub const DEFAULT_NODES: usize = 256;

impl Contour {
    pub fn new(kind: ContourKind, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(EpdError::InvalidContour(format!(
                "need at least {MIN_NODES} nodes, got {nodes}"
            )));
        }
        match kind {
            ContourKind::CircleAtInfinity { radius } | ContourKind::CircleAtOrigin { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(EpdError::InvalidContour(format!(
                        "radius must be positive, got {radius}"
                    )));
                }
            }
            ContourKind::RealInterval { a, b } => {
                if !(a < b && a.is_finite() && b.is_finite()) {
                    return Err(EpdError::InvalidContour(format!(
                        "real interval needs a < b, got [{a}, {b}]"
                    )));
                }
            }
            ContourKind::SegmentBetween { z, zb } => {
                check_finite(z, "segment z")?;
                check_finite(zb, "segment zb")?;
                check_split(z, zb)?;
            }
        }
        Ok(Contour { kind, nodes })
    }

    pub fn circle_at_infinity(radius: f64, nodes: usize) -> Result<Self> {
        Self::new(ContourKind::CircleAtInfinity { radius }, nodes)
    }

    pub fn circle_at_origin(radius: f64, nodes: usize) -> Result<Self> {
        Self::new(ContourKind::CircleAtOrigin { radius }, nodes)
    }

    pub fn real_interval(a: f64, b: f64, nodes: usize) -> Result<Self> {
        Self::new(ContourKind::RealInterval { a, b }, nodes)
    }

    /// Kernel branch that is single-valued along this contour.
    pub fn branch(&self) -> Branch {
        match self.kind {
            ContourKind::CircleAtInfinity { .. } => Branch::Outer,
            ContourKind::CircleAtOrigin { .. } => Branch::Inner,
            _ => Branch::Principal,
        }
    }

    /// Checks that the contour separates the evaluation points the way its branch requires.
    pub fn check_admissible(&self, z: CPoint, zb: CPoint) -> Result<()> {
        let far = z.norm().max(zb.norm());
        let near = z.norm().min(zb.norm());
        match self.kind {
            ContourKind::CircleAtInfinity { radius } if radius <= far => {
                Err(EpdError::InvalidContour(format!(
                    "circle at infinity of radius {radius} does not enclose |z| = {far}"
                )))
            }
            ContourKind::CircleAtOrigin { radius } if radius >= near => {
                Err(EpdError::InvalidContour(format!(
                    "circle at origin of radius {radius} is not inside |z| = {near}"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    /// Relative agreement required between successive refinements.
    pub tol: f64,
    /// Number of refinements before giving up.
    pub max_doublings: u32,
    /// Absolute agreement that is always accepted, for integrals that cancel to ~0.
    pub abs_tol: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-11,
            max_doublings: 5,
            abs_tol: 0.0,
        }
    }
}

/// `∫_Γ f(λ) dλ` for a scalar integrand.
pub fn integrate<F>(contour: &Contour, opts: &QuadOptions, f: F) -> Result<CPoint>
where
    F: Fn(CPoint) -> Result<CPoint>,
{
    integrate_n::<1, _>(contour, opts, |l| f(l).map(|v| [v])).map(|r| r[0])
}

/// `∫_Γ f(λ) dλ` for an integrand with `M` components, refined until every
/// component is stable under node doubling.
pub fn integrate_n<const M: usize, F>(contour: &Contour, opts: &QuadOptions, f: F) -> Result<[CPoint; M]>
where
    F: Fn(CPoint) -> Result<[CPoint; M]>,
{
    match contour.kind {
        ContourKind::CircleAtInfinity { radius } | ContourKind::CircleAtOrigin { radius } => {
            circle_rule(radius, contour.nodes, opts, f)
        }
        ContourKind::RealInterval { a, b } => {
            let panels = (contour.nodes / GL_ORDER).max(2);
            let breaks: Vec<f64> = (0..=panels)
                .map(|i| a + (b - a) * i as f64 / panels as f64)
                .collect();
            gauss_panels(&breaks, opts, |x| f(c(x, 0.0)))
        }
        ContourKind::SegmentBetween { z, zb } => {
            // λ(α) = cos²α z + sin²α z̄,  dλ = (z̄ - z) sin 2α dα
            tanh_sinh(0.0, PI / 2.0, opts, |alpha| {
                let (s, co) = alpha.sin_cos();
                let lam = z * (co * co) + zb * (s * s);
                let dl = (zb - z) * (2.0 * alpha).sin();
                let mut v = f(lam)?;
                for x in v.iter_mut() {
                    *x *= dl;
                }
                Ok(v)
            })
        }
    }
}

fn converged<const M: usize>(prev: &[CPoint; M], next: &[CPoint; M], mass: &[f64; M], opts: &QuadOptions) -> (bool, f64) {
    let mut ok = true;
    let mut worst = 0.0f64;
    for m in 0..M {
        let diff = (next[m] - prev[m]).norm();
        let bound = opts.tol * next[m].norm() + 1e-14 * mass[m] + opts.abs_tol;
        if diff > bound {
            ok = false;
        }
        let rel = diff / next[m].norm().max(1e-300);
        worst = worst.max(rel);
    }
    (ok, worst)
}

fn circle_rule<const M: usize, F>(radius: f64, nodes: usize, opts: &QuadOptions, f: F) -> Result<[CPoint; M]>
where
    F: Fn(CPoint) -> Result<[CPoint; M]>,
{
    // Trapezoid sum over θ_j = 2π(j + offset)/n, weighted by dλ = iλ dθ.
    let sum = |n: usize, offset: f64| -> Result<([CPoint; M], [f64; M])> {
        let mut acc = [CPoint::new(0.0, 0.0); M];
        let mut mass = [0.0; M];
        let h = 2.0 * PI / n as f64;
        for j in 0..n {
            let theta = h * (j as f64 + offset);
            let lam = CPoint::from_polar(radius, theta);
            let w = I * lam * h;
            let v = f(lam)?;
            for m in 0..M {
                let t = v[m] * w;
                acc[m] += t;
                mass[m] += t.norm();
            }
        }
        Ok((acc, mass))
    };

    let mut n = nodes;
    let (mut est, mut mass) = sum(n, 0.0)?;
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_doublings {
        let (mid, mid_mass) = sum(n, 0.5)?;
        let mut next = [CPoint::new(0.0, 0.0); M];
        for m in 0..M {
            next[m] = (est[m] + mid[m]) * 0.5;
            mass[m] = (mass[m] + mid_mass[m]) * 0.5;
        }
        n *= 2;
        let (ok, worst) = converged(&est, &next, &mass, opts);
        est = next;
        change = worst;
        if ok {
            return Ok(est);
        }
    }
    Err(EpdError::QuadratureNonConvergence { change, nodes: n })
}

pub const GL_ORDER: usize = 8;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut r = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, r);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * r * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = r;
            }
            dp = n as f64 * (r * p1 - p0) / (r * r - 1.0);
            let dr = p1 / dp;
            r -= dr;
            if dr.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -r;
        x[n - 1 - i] = r;
        let wi = 2.0 / ((1.0 - r * r) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

fn gl_panel_sum<const M: usize, F>(breaks: &[f64], f: &F) -> Result<([CPoint; M], [f64; M])>
where
    F: Fn(f64) -> Result<[CPoint; M]>,
{
    let (xs, ws) = gl8();
    let mut acc = [CPoint::new(0.0, 0.0); M];
    let mut mass = [0.0; M];
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in xs.iter().zip(ws) {
            let v = f(mid + half * x)?;
            for m in 0..M {
                let t = v[m] * (w * half);
                acc[m] += t;
                mass[m] += t.norm();
            }
        }
    }
    Ok((acc, mass))
}

/// Composite Gauss-Legendre over the given panel breakpoints, bisecting every
/// panel until the estimate is stable.
pub fn gauss_panels<const M: usize, F>(breaks: &[f64], opts: &QuadOptions, f: F) -> Result<[CPoint; M]>
where
    F: Fn(f64) -> Result<[CPoint; M]>,
{
    let mut breaks = breaks.to_vec();
    let (mut est, _) = gl_panel_sum(&breaks, &f)?;
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_doublings {
        breaks = bisect(&breaks);
        let (next, mass) = gl_panel_sum(&breaks, &f)?;
        let (ok, worst) = converged(&est, &next, &mass, opts);
        est = next;
        change = worst;
        if ok {
            return Ok(est);
        }
    }
    Err(EpdError::QuadratureNonConvergence {
        change,
        nodes: (breaks.len() - 1) * GL_ORDER,
    })
}

fn bisect(breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * breaks.len());
    for pair in breaks.windows(2) {
        out.push(pair[0]);
        out.push(0.5 * (pair[0] + pair[1]));
    }
    out.push(*breaks.last().unwrap());
    out
}

/// Double-exponential quadrature on [a, b]; tolerates integrable endpoint
/// singularities such as logarithms.
pub fn tanh_sinh<const M: usize, F>(a: f64, b: f64, opts: &QuadOptions, f: F) -> Result<[CPoint; M]>
where
    F: Fn(f64) -> Result<[CPoint; M]>,
{
    let half = 0.5 * (b - a);
    let tmax = 3.2;
    // Nodes at t = k h; 1 ± tanh(s) evaluated without cancellation.
    let level = |h: f64, odd_only: bool| -> Result<([CPoint; M], [f64; M])> {
        let mut acc = [CPoint::new(0.0, 0.0); M];
        let mut mass = [0.0; M];
        let kmax = (tmax / h).ceil() as i64;
        for k in -kmax..=kmax {
            if odd_only && k % 2 == 0 {
                continue;
            }
            let t = k as f64 * h;
            let s = 0.5 * PI * t.sinh();
            let from_a = 2.0 / (1.0 + (-2.0 * s).exp());
            let from_b = 2.0 / (1.0 + (2.0 * s).exp());
            let x = if from_a < from_b { a + half * from_a } else { b - half * from_b };
            if x <= a || x >= b {
                continue;
            }
            let cs = s.cosh();
            let w = h * 0.5 * PI * t.cosh() / (cs * cs) * half;
            let v = f(x)?;
            for m in 0..M {
                let term = v[m] * w;
                acc[m] += term;
                mass[m] += term.norm();
            }
        }
        Ok((acc, mass))
    };

    let mut h = 0.25;
    let (mut est, _) = level(h, false)?;
    let mut change = f64::INFINITY;
    for _ in 0..(opts.max_doublings + 2) {
        h *= 0.5;
        let (odd, mass) = level(h, true)?;
        let mut next = [CPoint::new(0.0, 0.0); M];
        for m in 0..M {
            next[m] = est[m] * 0.5 + odd[m];
        }
        let (ok, worst) = converged(&est, &next, &mass, opts);
        est = next;
        change = worst;
        if ok {
            return Ok(est);
        }
    }
    Err(EpdError::QuadratureNonConvergence {
        change,
        nodes: (2.0 * tmax / h) as usize,
    })
}
