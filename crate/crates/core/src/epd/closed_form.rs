//! Closed forms of the low-order basis solutions, normalized by 2πi.
//!
//! `w` stands for z̄. Monomial terms come with full 2-jets; the inverse-power
//! terms with value and gradient. They are independent of the quadrature and
//! serve as cross-checks for it.

use super::Jet2;
use crate::complexfield::CPoint;

/// W₁ = (z + z̄)/2, from φ = λ.
pub fn w1(z: CPoint, w: CPoint) -> Jet2 {
    Jet2 {
        w: 0.5 * (z + w),
        wz: 0.5.into(),
        wzb: 0.5.into(),
        ..Default::default()
    }
}

/// W₂ = (3z² + 2zz̄ + 3z̄²)/8, from φ = λ².
pub fn w2(z: CPoint, w: CPoint) -> Jet2 {
    Jet2 {
        w: (3.0 * z * z + 2.0 * z * w + 3.0 * w * w) / 8.0,
        wz: (3.0 * z + w) / 4.0,
        wzb: (z + 3.0 * w) / 4.0,
        wzz: 0.75.into(),
        wzbzb: 0.75.into(),
        wzzb: 0.25.into(),
    }
}

/// W₃ = (5z³ + 3z²z̄ + 3zz̄² + 5z̄³)/16, from φ = λ³.
pub fn w3(z: CPoint, w: CPoint) -> Jet2 {
    Jet2 {
        w: (5.0 * z * z * z + 3.0 * z * z * w + 3.0 * z * w * w + 5.0 * w * w * w) / 16.0,
        wz: 3.0 * (5.0 * z * z + 2.0 * z * w + w * w) / 16.0,
        wzb: 3.0 * (z * z + 2.0 * z * w + 5.0 * w * w) / 16.0,
        wzz: 3.0 * (5.0 * z + w) / 8.0,
        wzbzb: 3.0 * (z + 5.0 * w) / 8.0,
        wzzb: 3.0 * (z + w) / 8.0,
    }
}

/// W̃₀ = ln(z - z̄) - shift, from ψ = 1.
pub fn wt0(z: CPoint, w: CPoint, shift: CPoint) -> Jet2 {
    let d = z - w;
    let d2 = d * d;
    Jet2 {
        w: d.ln() - shift,
        wz: d.inv(),
        wzb: -d.inv(),
        wzz: -d2.inv(),
        wzbzb: -d2.inv(),
        wzzb: d2.inv(),
    }
}

/// W̃₁ = (z + z̄) + (z + z̄)(ln(z - z̄) - shift)/2, from ψ = λ.
pub fn wt1(z: CPoint, w: CPoint, shift: CPoint) -> Jet2 {
    let d = z - w;
    let s = z + w;
    let l = d.ln() - shift;
    let d2 = d * d;
    Jet2 {
        w: s + 0.5 * s * l,
        wz: 1.0 + 0.5 * l + s / (2.0 * d),
        wzb: 1.0 + 0.5 * l - s / (2.0 * d),
        wzz: d.inv() - s / (2.0 * d2),
        wzbzb: -d.inv() - s / (2.0 * d2),
        wzzb: s / (2.0 * d2),
    }
}

/// Value and gradient `(W, W_z, W_z̄)`.
pub type Grad = (CPoint, CPoint, CPoint);

fn s_factor(z: CPoint, w: CPoint) -> CPoint {
    (z * w).sqrt().inv()
}

/// From φ = 1/λ: -(zz̄)^{-1/2}.
pub fn inv_w1(z: CPoint, w: CPoint) -> Grad {
    let s = s_factor(z, w);
    (-s, s / (2.0 * z), s / (2.0 * w))
}

/// From φ = λ⁻²: -(zz̄)^{-1/2}(1/z + 1/z̄)/2.
pub fn inv_w2(z: CPoint, w: CPoint) -> Grad {
    let s = s_factor(z, w);
    let (iz, iw) = (z.inv(), w.inv());
    (
        -0.5 * s * (iz + iw),
        0.25 * s * (3.0 * iz * iz + iz * iw),
        0.25 * s * (3.0 * iw * iw + iz * iw),
    )
}

/// From φ = λ⁻³: -(zz̄)^{-1/2}(3/z² + 2/(zz̄) + 3/z̄²)/8.
pub fn inv_w3(z: CPoint, w: CPoint) -> Grad {
    let s = s_factor(z, w);
    let (iz, iw) = (z.inv(), w.inv());
    let q = 3.0 * iz * iz + 2.0 * iz * iw + 3.0 * iw * iw;
    (
        -s * q / 8.0,
        s / 8.0 * (q * iz / 2.0 + 6.0 * iz * iz * iz + 2.0 * iz * iz * iw),
        s / 8.0 * (q * iw / 2.0 + 6.0 * iw * iw * iw + 2.0 * iw * iw * iz),
    )
}

/// From ψ = 1/λ: -(zz̄)^{-1/2}(ln((z - z̄)/(zz̄)) - shift).
pub fn inv_wt1(z: CPoint, w: CPoint, shift: CPoint) -> Grad {
    let s = s_factor(z, w);
    let (iz, iw) = (z.inv(), w.inv());
    let d = (z - w).inv();
    let l = ((z - w) / (z * w)).ln() - shift;
    (
        -s * l,
        s * iz / 2.0 * l - s * (d - iz),
        s * iw / 2.0 * l - s * (-d - iw),
    )
}

/// From ψ = λ⁻²: -(zz̄)^{-1/2}(2/z + 2/z̄ + (1/z + 1/z̄)(ln((z - z̄)/(zz̄)) - shift))/2.
pub fn inv_wt2(z: CPoint, w: CPoint, shift: CPoint) -> Grad {
    let s = s_factor(z, w);
    let (iz, iw) = (z.inv(), w.inv());
    let d = (z - w).inv();
    let l = ((z - w) / (z * w)).ln() - shift;
    let p = 2.0 * iz + 2.0 * iw + (iz + iw) * l;
    let pz = -2.0 * iz * iz - iz * iz * l + (iz + iw) * (d - iz);
    let pw = -2.0 * iw * iw - iw * iw * l + (iz + iw) * (-d - iw);
    (
        -0.5 * s * p,
        0.5 * s * (p * iz / 2.0 - pz),
        0.5 * s * (p * iw / 2.0 - pw),
    )
}
