use std::f64::consts::PI;

use crate::complexfield::{c, tanh_sinh, CPoint, QuadOptions};
use crate::error::Result;

/// The solution written as an integral over the segment from z to z̄:
/// `2i∫φ(λ(α))dα + 2i∫ψ(λ(α)) ln((z̄ - z) sin²2α / 4) dα`,
/// `λ(α) = cos²α z + sin²α z̄`, `α ∈ [0, π/2]`.
pub fn radon_value<F, G>(phi: F, psi: G, z: CPoint, zb: CPoint) -> Result<CPoint>
where
    F: Fn(CPoint) -> CPoint,
    G: Fn(CPoint) -> CPoint,
{
    let log_d = (zb - z).ln();
    let v = tanh_sinh::<1, _>(0.0, PI / 2.0, &QuadOptions::default(), |alpha| {
        let (s, co) = alpha.sin_cos();
        let lam = z * (co * co) + zb * (s * s);
        let s2 = (2.0 * alpha).sin();
        let weight = log_d + (s2 * s2 / 4.0).ln();
        Ok([phi(lam) + psi(lam) * weight])
    })?;
    Ok(c(0.0, 2.0) * v[0])
}
