//! Derivatives of the kernels `K = ((λ-z)(λ-z̄))^{-1/2}` and `G = K·L`,
//! `L = ln((z-z̄)/((λ-z)(λ-z̄)))`, with respect to z and z̄.
//!
//! Derivatives are expressed through `a = 1/(λ-z)`, `b = 1/(λ-z̄)` and
//! `d = 1/(z-z̄)`, so they do not depend on the branch used for K and L.

use crate::complexfield::{kernel_log_on, kernel_pow_on, Branch, CPoint};
use crate::error::Result;

/// Jets `[f, f_z, f_z̄, f_zz, f_z̄z̄, f_zz̄]` of K and (when requested) G.
pub(crate) fn kernel_jets(
    branch: Branch,
    lam: CPoint,
    z: CPoint,
    zb: CPoint,
    log_shift: CPoint,
    with_log: bool,
) -> Result<([CPoint; 6], [CPoint; 6])> {
    let k = kernel_pow_on(branch, lam, z, zb)?;
    let a = (lam - z).inv();
    let b = (lam - zb).inv();
    let kj = [
        k,
        0.5 * k * a,
        0.5 * k * b,
        0.75 * k * a * a,
        0.75 * k * b * b,
        0.25 * k * a * b,
    ];
    if !with_log {
        return Ok((kj, [CPoint::new(0.0, 0.0); 6]));
    }
    let l = kernel_log_on(branch, lam, z, zb)? - log_shift;
    let d = (z - zb).inv();
    let d2 = d * d;
    let lj = [l, d + a, b - d, a * a - d2, b * b - d2, d2];
    let gj = [
        kj[0] * lj[0],
        kj[1] * lj[0] + kj[0] * lj[1],
        kj[2] * lj[0] + kj[0] * lj[2],
        kj[3] * lj[0] + 2.0 * kj[1] * lj[1] + kj[0] * lj[3],
        kj[4] * lj[0] + 2.0 * kj[2] * lj[2] + kj[0] * lj[4],
        kj[5] * lj[0] + kj[1] * lj[2] + kj[2] * lj[1] + kj[0] * lj[5],
    ];
    Ok((kj, gj))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

/// `[∂_z^n K, ∂_z̄^n K, ∂_z^n G, ∂_z̄^n G]`.
pub(crate) fn pure_kernel_derivatives(
    branch: Branch,
    lam: CPoint,
    z: CPoint,
    zb: CPoint,
    log_shift: CPoint,
    n: usize,
    with_log: bool,
) -> Result<[CPoint; 4]> {
    let k = kernel_pow_on(branch, lam, z, zb)?;
    let a = (lam - z).inv();
    let b = (lam - zb).inv();
    // ∂_z^j K = (1/2)(3/2)...(j - 1/2) K a^j
    let coef = |j: usize| (0..j).fold(1.0, |acc, i| acc * (0.5 + i as f64));
    let kz = |j: usize| k * coef(j) * a.powi(j as i32);
    let kzb = |j: usize| k * coef(j) * b.powi(j as i32);
    if !with_log {
        return Ok([kz(n), kzb(n), CPoint::new(0.0, 0.0), CPoint::new(0.0, 0.0)]);
    }
    let l = kernel_log_on(branch, lam, z, zb)? - log_shift;
    let d = (z - zb).inv();
    let sign = |m: usize| if m % 2 == 1 { 1.0 } else { -1.0 };
    let lz = |m: usize| {
        if m == 0 {
            l
        } else {
            factorial(m - 1) * (a.powi(m as i32) + sign(m) * d.powi(m as i32))
        }
    };
    let lzb = |m: usize| {
        if m == 0 {
            l
        } else {
            factorial(m - 1) * (b.powi(m as i32) - d.powi(m as i32))
        }
    };
    let mut gz = CPoint::new(0.0, 0.0);
    let mut gzb = CPoint::new(0.0, 0.0);
    for j in 0..=n {
        let c = binomial(n, j);
        gz += c * kz(j) * lz(n - j);
        gzb += c * kzb(j) * lzb(n - j);
    }
    Ok([kz(n), kzb(n), gz, gzb])
}
