//! Solutions of E(1/2,1/2): representations, jets, residuals, Appell
//! covariance and the dual function.

mod appell;
pub mod closed_form;
mod dual;
mod kernel;
mod radon;
mod spec;

use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::complexfield::CPoint;
use crate::error::Result;

pub use appell::Appell;
pub use dual::{dual_gradient, dual_residual, dual_value, dual_value_at, DUAL_BASE};
pub(crate) use kernel::{kernel_jets, pure_kernel_derivatives};
pub use radon::radon_value;
pub use spec::{eval_jet, EvalOptions, LogNorm, SolutionSpec, SpecKind};

/// Value, gradient and second derivatives of W at `(z, z̄)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub w: CPoint,
    pub wz: CPoint,
    pub wzb: CPoint,
    pub wzz: CPoint,
    pub wzbzb: CPoint,
    pub wzzb: CPoint,
}

impl Jet2 {
    pub fn from_array(a: [CPoint; 6]) -> Self {
        Jet2 {
            w: a[0],
            wz: a[1],
            wzb: a[2],
            wzz: a[3],
            wzbzb: a[4],
            wzzb: a[5],
        }
    }

    pub fn to_array(self) -> [CPoint; 6] {
        [self.w, self.wz, self.wzb, self.wzz, self.wzbzb, self.wzzb]
    }

    fn map(self, f: impl Fn(CPoint) -> CPoint) -> Self {
        Jet2::from_array(self.to_array().map(f))
    }

    fn zip(self, o: Self, f: impl Fn(CPoint, CPoint) -> CPoint) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Jet2::from_array(std::array::from_fn(|i| f(a[i], b[i])))
    }

    /// Magnitude of the gradient, used to make residuals relative.
    pub fn grad_norm(&self) -> f64 {
        self.wz.norm().max(self.wzb.norm())
    }

    pub fn max_abs_diff(&self, o: &Jet2) -> f64 {
        self.to_array()
            .iter()
            .zip(o.to_array().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        self.zip(o, |a, b| a + b)
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, o: Jet2) {
        *self = *self + o;
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self.zip(o, |a, b| a - b)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.map(|a| -a)
    }
}

impl Mul<CPoint> for Jet2 {
    type Output = Jet2;
    fn mul(self, s: CPoint) -> Jet2 {
        self.map(|a| a * s)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, s: f64) -> Jet2 {
        self.map(|a| a * s)
    }
}

impl Div<CPoint> for Jet2 {
    type Output = Jet2;
    fn div(self, s: CPoint) -> Jet2 {
        self.map(|a| a / s)
    }
}

impl Sum for Jet2 {
    fn sum<I: Iterator<Item = Jet2>>(iter: I) -> Jet2 {
        iter.fold(Jet2::default(), |a, b| a + b)
    }
}

/// Anything that can produce the 2-jet of a solution at a point.
pub trait JetSource: Sync {
    fn jet(&self, z: CPoint, zb: CPoint) -> Result<Jet2>;

    /// True when W_z̄ = conj(W_z) on z̄ = conj(z).
    fn is_real(&self) -> bool {
        false
    }

    /// Typical magnitude of the solution's coefficients, for relative thresholds.
    fn scale(&self) -> f64 {
        1.0
    }

    /// `(∂_z^n W, ∂_z̄^n W)`; only needed to classify degenerate critical points.
    fn pure_derivatives(&self, _z: CPoint, _zb: CPoint, _n: usize) -> Result<(CPoint, CPoint)> {
        Err(crate::error::EpdError::Domain(
            "higher derivatives are not available for this source".into(),
        ))
    }
}

impl<T: JetSource + ?Sized> JetSource for &T {
    fn jet(&self, z: CPoint, zb: CPoint) -> Result<Jet2> {
        (**self).jet(z, zb)
    }

    fn is_real(&self) -> bool {
        (**self).is_real()
    }

    fn scale(&self) -> f64 {
        (**self).scale()
    }

    fn pure_derivatives(&self, z: CPoint, zb: CPoint, n: usize) -> Result<(CPoint, CPoint)> {
        (**self).pure_derivatives(z, zb, n)
    }
}

/// `(z - z̄) W_zz̄ - k (W_z - W_z̄)`; vanishes for solutions of E(k,k).
pub fn epd_residual(jet: &Jet2, z: CPoint, zb: CPoint, k: f64) -> CPoint {
    (z - zb) * jet.wzzb - k * (jet.wz - jet.wzb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexfield::{c, I};

    #[test]
    fn residual_examples() {
        let z = I;
        let one = Jet2 {
            w: c(1.0, 0.0),
            ..Default::default()
        };
        assert_eq!(epd_residual(&one, z, z.conj(), 0.5), c(0.0, 0.0));

        let d = z - z.conj();
        let log = Jet2 {
            w: d.ln(),
            wz: d.inv(),
            wzb: -d.inv(),
            wzz: -d.powi(-2),
            wzbzb: -d.powi(-2),
            wzzb: d.powi(-2),
        };
        assert!(epd_residual(&log, z, z.conj(), 0.5).norm() < 1e-15);

        let lin = Jet2 {
            w: z,
            wz: c(1.0, 0.0),
            ..Default::default()
        };
        assert_eq!(epd_residual(&lin, z, z.conj(), 0.5), c(-0.5, 0.0));
    }

    #[test]
    fn jet_arithmetic() {
        let a = Jet2::from_array([c(1.0, 0.0); 6]);
        let b = a * c(0.0, 2.0);
        assert_eq!((a + b).wzz, c(1.0, 2.0));
        assert_eq!((b - a).w, c(-1.0, 2.0));
        assert_eq!((b / c(0.0, 2.0)).wzzb, c(1.0, 0.0));
        let s: Jet2 = vec![a, a, a].into_iter().sum();
        assert_eq!(s.wzb, c(3.0, 0.0));
    }
}
