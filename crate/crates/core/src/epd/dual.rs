use super::{epd_residual, Jet2, JetSource};
use crate::complexfield::{c, gauss_panels, CPoint, QuadOptions};
use crate::error::Result;

/// Base point of the dual function; W*(i) = 0.
pub const DUAL_BASE: CPoint = CPoint { re: 0.0, im: 1.0 };

/// `∫ (z - z̄)(W_z dz - W_z̄ dz̄)` along a polyline with z̄ = conj(z).
pub fn dual_value<S: JetSource + ?Sized>(src: &S, path: &[CPoint]) -> Result<CPoint> {
    let mut total = c(0.0, 0.0);
    for seg in path.windows(2) {
        let (p, q) = (seg[0], seg[1]);
        let dz = q - p;
        // Along a level curve of W* the integrand cancels; accept rounding-level agreement.
        let j0 = src.jet(p, p.conj())?;
        let size = (p - p.conj()).norm() * (j0.wz.norm() + j0.wzb.norm()) * dz.norm();
        let opts = QuadOptions {
            abs_tol: 1e-15 * size,
            ..Default::default()
        };
        let v = gauss_panels::<1, _>(&[0.0, 0.25, 0.5, 0.75, 1.0], &opts, |t| {
            let z = p + dz * t;
            let zb = z.conj();
            let j = src.jet(z, zb)?;
            Ok([(z - zb) * (j.wz * dz - j.wzb * dz.conj())])
        })?;
        total += v[0];
    }
    Ok(total)
}

/// W*(z) along the straight segment from [`DUAL_BASE`].
pub fn dual_value_at<S: JetSource + ?Sized>(src: &S, z: CPoint) -> Result<CPoint> {
    dual_value(src, &[DUAL_BASE, z])
}

/// Derivatives of W* assembled from the jet of W; the `w` slot is left at 0
/// since W* is only defined up to a constant here.
pub fn dual_gradient(jet: &Jet2, z: CPoint, zb: CPoint) -> Jet2 {
    let d = z - zb;
    Jet2 {
        w: c(0.0, 0.0),
        wz: d * jet.wz,
        wzb: -d * jet.wzb,
        wzz: jet.wz + d * jet.wzz,
        wzbzb: jet.wzb - d * jet.wzbzb,
        wzzb: -jet.wz + d * jet.wzzb,
    }
}

/// E(-1/2,-1/2) residual of the dual function at `(z, z̄)`.
pub fn dual_residual<S: JetSource + ?Sized>(src: &S, z: CPoint, zb: CPoint) -> Result<CPoint> {
    let jet = src.jet(z, zb)?;
    Ok(epd_residual(&dual_gradient(&jet, z, zb), z, zb, -0.5))
}
