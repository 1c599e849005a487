use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{kernel_jets, pure_kernel_derivatives, Jet2, JetSource};
use crate::complexfield::{
    check_finite, c, gauss_panels, integrate_n, Branch, CPoint, Contour, QuadOptions, DEFAULT_NODES, GL_ORDER,
};
use crate::density::Density;
use crate::error::{EpdError, Result};

/// How the logarithm in the ψ-kernel is normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogNorm {
    /// `ln((z-z̄)/((λ-z)(λ-z̄)))`.
    #[default]
    Principal,
    /// `ln((z-z̄)/(2i(λ-z)(λ-z̄)))`, real for real λ and z̄ = conj(z).
    TwoI,
}

impl LogNorm {
    pub(crate) fn shift(self) -> CPoint {
        match self {
            LogNorm::Principal => c(0.0, 0.0),
            LogNorm::TwoI => c(0.0, 2.0).ln(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SpecKind {
    /// φ = Σ x[k-1] λ^k (k ≥ 1), ψ = Σ y[k] λ^k (k ≥ 0), on a circle around infinity.
    Monomial {
        #[serde(default)]
        x: Vec<f64>,
        #[serde(default)]
        y: Vec<f64>,
    },
    /// φ = Σ x[k-1] λ^{-k}, ψ = Σ y[k-1] λ^{-k} (k ≥ 1), on a small circle around 0.
    InversePower {
        #[serde(default)]
        x: Vec<f64>,
        #[serde(default)]
        y: Vec<f64>,
    },
    /// Point masses `(weight, node)` on the real axis.
    Delta {
        #[serde(default, alias = "points_phi")]
        phi: Vec<(f64, f64)>,
        #[serde(default, alias = "points_psi")]
        psi: Vec<(f64, f64)>,
    },
    /// Densities integrated over a real interval.
    Sampled {
        #[serde(default)]
        phi: Density,
        #[serde(default)]
        psi: Density,
        support: (f64, f64),
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionSpec {
    #[serde(flatten)]
    pub kind: SpecKind,
    #[serde(default)]
    pub log_norm: LogNorm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// Starting node count for contour quadrature.
    pub nodes: usize,
    pub quad: QuadOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            nodes: DEFAULT_NODES,
            quad: QuadOptions::default(),
        }
    }
}

/// Raw 2-jet of the spec; circle variants keep the 2πi residue factor.
pub fn eval_jet(spec: &SolutionSpec, z: CPoint, zb: CPoint) -> Result<Jet2> {
    spec.eval_jet(z, zb)
}

impl From<SpecKind> for SolutionSpec {
    fn from(kind: SpecKind) -> Self {
        SolutionSpec {
            kind,
            log_norm: LogNorm::Principal,
        }
    }
}

impl SolutionSpec {
    pub fn monomial(x: Vec<f64>, y: Vec<f64>) -> Self {
        SpecKind::Monomial { x, y }.into()
    }

    pub fn inverse_power(x: Vec<f64>, y: Vec<f64>) -> Self {
        SpecKind::InversePower { x, y }.into()
    }

    pub fn delta(phi: Vec<(f64, f64)>, psi: Vec<(f64, f64)>) -> Self {
        SpecKind::Delta { phi, psi }.into()
    }

    pub fn sampled(phi: Density, psi: Density, support: (f64, f64)) -> Self {
        SpecKind::Sampled { phi, psi, support }.into()
    }

    pub fn with_log_norm(mut self, log_norm: LogNorm) -> Self {
        self.log_norm = log_norm;
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: SolutionSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64], what: &'static str| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(EpdError::NonFinite(what))
            }
        };
        match &self.kind {
            SpecKind::Monomial { x, y } | SpecKind::InversePower { x, y } => {
                finite(x, "x coefficients")?;
                finite(y, "y coefficients")?;
            }
            SpecKind::Delta { phi, psi } => {
                for (pts, what) in [(phi, "phi"), (psi, "psi")] {
                    for (i, (w, node)) in pts.iter().enumerate() {
                        if !(w.is_finite() && node.is_finite()) {
                            return Err(EpdError::NonFinite("delta weight or node"));
                        }
                        if pts[..i].iter().any(|(_, other)| other == node) {
                            return Err(EpdError::InvalidSpec(format!(
                                "{what} delta nodes must be pairwise distinct (repeated {node})"
                            )));
                        }
                    }
                }
            }
            SpecKind::Sampled { phi, psi, support } => {
                phi.validate()?;
                psi.validate()?;
                if !(support.0 < support.1 && support.0.is_finite() && support.1.is_finite()) {
                    return Err(EpdError::InvalidSpec(format!(
                        "support must satisfy a < b, got [{}, {}]",
                        support.0, support.1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Factor separating the raw integral from the tabulated basis functions.
    pub fn normalization(&self) -> CPoint {
        match self.kind {
            SpecKind::Monomial { .. } | SpecKind::InversePower { .. } => c(0.0, 2.0 * PI),
            _ => c(1.0, 0.0),
        }
    }

    /// Whether W_z̄ = conj(W_z) on z̄ = conj(z), so that critical points can be
    /// sought with β̄ = conj(β).
    pub fn has_real_gradient(&self) -> bool {
        if self.log_norm == LogNorm::TwoI {
            return true;
        }
        match &self.kind {
            SpecKind::Monomial { y, .. } => y.iter().skip(1).all(|v| *v == 0.0),
            SpecKind::InversePower { y, .. } => y.iter().all(|v| *v == 0.0),
            SpecKind::Delta { psi, .. } => psi.iter().all(|(w, _)| *w == 0.0),
            SpecKind::Sampled { psi, .. } => psi.is_zero(),
        }
    }

    /// Contour used for `(z, z̄)`, or `None` for point-mass specs.
    pub fn contour_for(&self, z: CPoint, zb: CPoint, nodes: usize) -> Result<Option<Contour>> {
        let far = z.norm().max(zb.norm());
        let near = z.norm().min(zb.norm());
        let contour = match &self.kind {
            SpecKind::Monomial { .. } => Contour::circle_at_infinity(2.0 * far + 1.0, nodes)?,
            SpecKind::InversePower { .. } => {
                if near <= 0.0 {
                    return Err(EpdError::SingularPoint {
                        lambda: c(0.0, 0.0),
                        point: if z.norm() <= zb.norm() { z } else { zb },
                        which: if z.norm() <= zb.norm() { "z" } else { "zb" },
                    });
                }
                Contour::circle_at_origin(near / 3.0, nodes)?
            }
            SpecKind::Sampled { support, .. } => Contour::real_interval(support.0, support.1, nodes)?,
            SpecKind::Delta { .. } => return Ok(None),
        };
        contour.check_admissible(z, zb)?;
        Ok(Some(contour))
    }

    /// Sums `term(branch, λ, φ(λ), ψ(λ))` over the representation of the spec.
    fn combine<const M: usize, F>(&self, z: CPoint, zb: CPoint, opts: &EvalOptions, term: F) -> Result<[CPoint; M]>
    where
        F: Fn(Branch, CPoint, CPoint, CPoint) -> Result<[CPoint; M]>,
    {
        check_finite(z, "z")?;
        check_finite(zb, "zb")?;
        let zero = c(0.0, 0.0);
        match &self.kind {
            SpecKind::Delta { phi, psi } => {
                let mut acc = [zero; M];
                let pts = phi
                    .iter()
                    .map(|&(w, l)| (l, c(w, 0.0), zero))
                    .chain(psi.iter().map(|&(w, l)| (l, zero, c(w, 0.0))));
                for (l, p, q) in pts {
                    let v = term(Branch::Principal, c(l, 0.0), p, q)?;
                    for m in 0..M {
                        acc[m] += v[m];
                    }
                }
                Ok(acc)
            }
            SpecKind::Monomial { x, y } => {
                let contour = self.contour_for(z, zb, opts.nodes)?.unwrap();
                let branch = contour.branch();
                integrate_n(&contour, &opts.quad, |lam| {
                    let p = lam * horner(x, lam);
                    let q = horner(y, lam);
                    term(branch, lam, p, q)
                })
            }
            SpecKind::InversePower { x, y } => {
                let contour = self.contour_for(z, zb, opts.nodes)?.unwrap();
                let branch = contour.branch();
                integrate_n(&contour, &opts.quad, |lam| {
                    let inv = lam.inv();
                    term(branch, lam, inv * horner(x, inv), inv * horner(y, inv))
                })
            }
            SpecKind::Sampled { phi, psi, support } => {
                let (a, b) = *support;
                let panels = (opts.nodes / GL_ORDER).max(4);
                let mut breaks: Vec<f64> = (0..=panels)
                    .map(|i| a + (b - a) * i as f64 / panels as f64)
                    .collect();
                breaks.extend(
                    phi.breakpoints()
                        .into_iter()
                        .chain(psi.breakpoints())
                        .filter(|&v| v > a && v < b),
                );
                breaks.sort_by(f64::total_cmp);
                breaks.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * (b - a));
                gauss_panels(&breaks, &opts.quad, |l| {
                    term(Branch::Principal, c(l, 0.0), c(phi.eval(l), 0.0), c(psi.eval(l), 0.0))
                })
            }
        }
    }

    /// Raw jet with the default quadrature options.
    pub fn eval_jet(&self, z: CPoint, zb: CPoint) -> Result<Jet2> {
        self.eval_jet_with(z, zb, &EvalOptions::default())
    }

    pub fn eval_jet_with(&self, z: CPoint, zb: CPoint, opts: &EvalOptions) -> Result<Jet2> {
        let shift = self.log_norm.shift();
        let zero = c(0.0, 0.0);
        let v = self.combine::<6, _>(z, zb, opts, |branch, lam, p, q| {
            if p == zero && q == zero {
                return Ok([zero; 6]);
            }
            let (kj, gj) = kernel_jets(branch, lam, z, zb, shift, q != zero)?;
            Ok(std::array::from_fn(|i| p * kj[i] + q * gj[i]))
        })?;
        Ok(Jet2::from_array(v))
    }

    /// Jet divided by [`SolutionSpec::normalization`].
    pub fn eval_normalized(&self, z: CPoint, zb: CPoint) -> Result<Jet2> {
        Ok(self.eval_jet(z, zb)? / self.normalization())
    }

    pub fn eval_normalized_with(&self, z: CPoint, zb: CPoint, opts: &EvalOptions) -> Result<Jet2> {
        Ok(self.eval_jet_with(z, zb, opts)? / self.normalization())
    }

    /// Raw `(∂_z^n W, ∂_z̄^n W)`.
    pub fn pure_derivatives_with(&self, z: CPoint, zb: CPoint, n: usize, opts: &EvalOptions) -> Result<(CPoint, CPoint)> {
        let shift = self.log_norm.shift();
        let zero = c(0.0, 0.0);
        let v = self.combine::<2, _>(z, zb, opts, |branch, lam, p, q| {
            if p == zero && q == zero {
                return Ok([zero; 2]);
            }
            let d = pure_kernel_derivatives(branch, lam, z, zb, shift, n, q != zero)?;
            Ok([p * d[0] + q * d[2], p * d[1] + q * d[3]])
        })?;
        Ok((v[0], v[1]))
    }
}

impl JetSource for SolutionSpec {
    fn jet(&self, z: CPoint, zb: CPoint) -> Result<Jet2> {
        self.eval_normalized(z, zb)
    }

    fn is_real(&self) -> bool {
        self.has_real_gradient()
    }

    fn scale(&self) -> f64 {
        let s = match &self.kind {
            SpecKind::Monomial { x, y } | SpecKind::InversePower { x, y } => {
                x.iter().chain(y).map(|v| v.abs()).sum::<f64>()
            }
            SpecKind::Delta { phi, psi } => phi.iter().chain(psi).map(|p| p.0.abs()).sum(),
            SpecKind::Sampled { phi, psi, support } => {
                let n = 64;
                let h = (support.1 - support.0) / n as f64;
                (0..=n)
                    .map(|i| {
                        let l = support.0 + h * i as f64;
                        phi.eval(l).abs() + psi.eval(l).abs()
                    })
                    .sum::<f64>()
                    * h
            }
        };
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    fn pure_derivatives(&self, z: CPoint, zb: CPoint, n: usize) -> Result<(CPoint, CPoint)> {
        let (a, b) = self.pure_derivatives_with(z, zb, n, &EvalOptions::default())?;
        let s = self.normalization();
        Ok((a / s, b / s))
    }
}

fn horner(coeffs: &[f64], x: CPoint) -> CPoint {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * x + k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexfield::I;
    use crate::epd::epd_residual;

    #[test]
    fn monomial_examples() {
        let z = c(1.0, 1.0);
        let w = SolutionSpec::monomial(vec![1.0], vec![]).eval_normalized(z, z.conj()).unwrap();
        assert!((w.w - 1.0).norm() < 1e-12, "{}", w.w);

        let w = SolutionSpec::monomial(vec![0.0, 1.0], vec![]).eval_normalized(I, -I).unwrap();
        assert!((w.w + 0.5).norm() < 1e-12, "{}", w.w);

        let w = SolutionSpec::monomial(vec![], vec![1.0]).eval_normalized(I, -I).unwrap();
        let expect = c(2f64.ln(), PI / 2.0);
        assert!((w.w - expect).norm() < 1e-12, "{}", w.w);
    }

    #[test]
    fn raw_jet_keeps_residue_factor() {
        let spec = SolutionSpec::monomial(vec![1.0], vec![]);
        let raw = eval_jet(&spec, I, -I).unwrap();
        assert!((raw.wz - c(0.0, PI)).norm() < 1e-12);
    }

    #[test]
    fn json_forms() {
        let s = SolutionSpec::from_json(r#"{"variant":"monomial","x":[1,1],"y":[1]}"#).unwrap();
        assert!(matches!(s.kind, SpecKind::Monomial { .. }));
        assert_eq!(s.log_norm, LogNorm::Principal);
        let s = SolutionSpec::from_json(
            r#"{"variant":"delta","points_phi":[[1.0,0.0]],"psi":[[2.0,1.0]],"log_norm":"two_i"}"#,
        )
        .unwrap();
        assert_eq!(s.log_norm, LogNorm::TwoI);
        let round = SolutionSpec::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(round.to_json().unwrap(), s.to_json().unwrap());
        assert!(SolutionSpec::from_json(r#"{"variant":"delta","phi":[[1,0],[2,0]]}"#).is_err());
        assert!(SolutionSpec::from_json(r#"{"variant":"sampled","support":[1,0]}"#).is_err());
        assert!(SolutionSpec::from_json(r#"{"variant":"nope"}"#).is_err());
    }

    #[test]
    fn every_variant_solves_epd() {
        let specs = [
            SolutionSpec::monomial(vec![0.3, -1.0, 0.5], vec![1.0, 0.2]),
            SolutionSpec::inverse_power(vec![1.0, 0.5], vec![0.7, -0.2]),
            SolutionSpec::delta(vec![(1.0, -0.5), (0.4, 0.8)], vec![(0.6, 0.1)]),
            SolutionSpec::sampled(
                Density::gaussian(1.0, 0.0, 0.4),
                Density::gaussian(0.5, 0.3, 0.5),
                (-3.0, 3.0),
            ),
        ];
        let z = c(0.35, 0.8);
        for spec in &specs {
            let j = spec.eval_jet(z, z.conj()).unwrap();
            let r = epd_residual(&j, z, z.conj(), 0.5);
            assert!(r.norm() <= 1e-10 * j.grad_norm(), "{spec:?}: {r}");
        }
    }

    #[test]
    fn two_i_normalization_makes_w_real() {
        let z = c(-0.4, 0.6);
        let specs = [
            SolutionSpec::monomial(vec![0.3, -1.0], vec![1.0, 0.2, 0.4]),
            SolutionSpec::inverse_power(vec![1.0], vec![0.7, -0.2]),
            SolutionSpec::delta(vec![(1.0, -0.5)], vec![(0.6, 0.1)]),
        ];
        for spec in specs {
            let spec = spec.with_log_norm(LogNorm::TwoI);
            let w = spec.eval_normalized(z, z.conj()).unwrap();
            assert!(w.w.im.abs() < 1e-11, "{spec:?} {}", w.w);
            assert!((w.wzb - w.wz.conj()).norm() < 1e-11);
            assert!(w.wzzb.im.abs() < 1e-11);
        }
    }

    #[test]
    fn inverse_power_rejects_origin() {
        let spec = SolutionSpec::inverse_power(vec![1.0], vec![]);
        assert!(spec.eval_jet(c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn pure_derivatives_match_jet() {
        let spec = SolutionSpec::monomial(vec![0.2, 1.0, 0.3], vec![0.5, 0.1]);
        let z = c(0.1, 0.9);
        let j = spec.jet(z, z.conj()).unwrap();
        let (a, b) = spec.pure_derivatives(z, z.conj(), 2).unwrap();
        assert!((a - j.wzz).norm() < 1e-11);
        assert!((b - j.wzbzb).norm() < 1e-11);
    }
}
