use super::{Jet2, JetSource};
use crate::complexfield::CPoint;
use crate::error::{EpdError, Result};

/// SL(2,ℝ) covariance of E(1/2,1/2):
/// `W ↦ ((cz+d)(cz̄+d))^{-1/2} W((az+b)/(cz+d), (az̄+b)/(cz̄+d))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Appell {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Appell {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det - 1.0).is_finite() || (det - 1.0).abs() > 1e-12 {
            return Err(EpdError::NotUnimodular(det));
        }
        Ok(Appell { a, b, c, d })
    }

    pub fn identity() -> Self {
        Appell {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// z ↦ -1/z.
    pub fn inversion() -> Self {
        Appell {
            a: 0.0,
            b: -1.0,
            c: 1.0,
            d: 0.0,
        }
    }

    pub fn map(&self, z: CPoint) -> Result<CPoint> {
        let den = self.c * z + self.d;
        if den.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Err(EpdError::MobiusPole(z));
        }
        Ok((self.a * z + self.b) / den)
    }

    /// Jet of the transformed solution at `(z, z̄)`.
    pub fn apply<S: JetSource + ?Sized>(&self, src: &S, z: CPoint, zb: CPoint) -> Result<Jet2> {
        let u = self.map(z)?;
        let v = self.map(zb)?;
        let c = self.c;
        let p = c * z + self.d;
        let q = c * zb + self.d;
        let w = src.jet(u, v)?;

        let m = (p * q).sqrt().inv();
        let m_z = -0.5 * c * m / p;
        let m_zb = -0.5 * c * m / q;
        let m_zz = 0.75 * c * c * m / (p * p);
        let m_zbzb = 0.75 * c * c * m / (q * q);
        let m_zzb = 0.25 * c * c * m / (p * q);

        let (du, dv) = ((p * p).inv(), (q * q).inv());
        let (ddu, ddv) = (-2.0 * c / (p * p * p), -2.0 * c / (q * q * q));
        let v_z = w.wz * du;
        let v_zb = w.wzb * dv;
        let v_zz = w.wzz * du * du + w.wz * ddu;
        let v_zbzb = w.wzbzb * dv * dv + w.wzb * ddv;
        let v_zzb = w.wzzb * du * dv;

        Ok(Jet2 {
            w: m * w.w,
            wz: m_z * w.w + m * v_z,
            wzb: m_zb * w.w + m * v_zb,
            wzz: m_zz * w.w + 2.0 * m_z * v_z + m * v_zz,
            wzbzb: m_zbzb * w.w + 2.0 * m_zb * v_zb + m * v_zbzb,
            wzzb: m_zzb * w.w + m_z * v_zb + m_zb * v_z + m * v_zzb,
        })
    }

    /// The transformed solution as a jet source of its own.
    pub fn of<'a, S: JetSource + ?Sized>(&self, src: &'a S) -> AppellSource<'a, S> {
        AppellSource { map: *self, src }
    }
}

pub struct AppellSource<'a, S: ?Sized> {
    map: Appell,
    src: &'a S,
}

impl<S: JetSource + ?Sized> JetSource for AppellSource<'_, S> {
    fn jet(&self, z: CPoint, zb: CPoint) -> Result<Jet2> {
        self.map.apply(self.src, z, zb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexfield::c;
    use crate::epd::{epd_residual, SolutionSpec};

    struct One;
    impl JetSource for One {
        fn jet(&self, _: CPoint, _: CPoint) -> Result<Jet2> {
            Ok(Jet2 {
                w: c(1.0, 0.0),
                ..Default::default()
            })
        }
    }

    #[test]
    fn constant_maps_to_weight_factor() {
        let z = c(0.3, 0.8);
        let j = Appell::inversion().apply(&One, z, z.conj()).unwrap();
        let expect = (z * z.conj()).sqrt().inv();
        assert!((j.w - expect).norm() < 1e-15);
        assert!(epd_residual(&j, z, z.conj(), 0.5).norm() < 1e-14);
    }

    #[test]
    fn identity_is_identity() {
        let spec = SolutionSpec::monomial(vec![1.0, 0.4], vec![0.5]);
        let z = c(-0.2, 1.3);
        let a = Appell::identity().apply(&spec, z, z.conj()).unwrap();
        let b = spec.jet(z, z.conj()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(Appell::new(1.0, 1.0, 1.0, 1.0), Err(EpdError::NotUnimodular(_))));
        assert!(matches!(
            Appell::inversion().apply(&One, c(0.0, 0.0), c(0.0, 0.0)),
            Err(EpdError::MobiusPole(_))
        ));
    }
}
