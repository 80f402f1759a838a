//! Small dense helpers on 4×4 symmetric matrices.

use nalgebra::{Matrix4, Vector4};

pub type Mat4 = Matrix4<f64>;
pub type Vec4 = Vector4<f64>;

/// Lower-triangular `L` with `L·Lᵀ = m` for symmetric PSD `m`.
///
/// Pivots that vanish (relative to the largest diagonal entry) zero the whole
/// column instead of failing, so rank-deficient covariances still factor.
pub fn psd_factor(m: &Mat4) -> Mat4 {
    let scale = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let tiny = scale * 1e-14;
    let mut l = Mat4::zeros();
    for j in 0..4 {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot <= tiny {
            continue;
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..4 {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    l
}

/// Diagonal jitter used when a symmetric matrix fails to factor.
pub fn jitter(m: &Mat4) -> f64 {
    let t = m.trace().abs();
    if t > 0.0 {
        1e-9 * t / 4.0
    } else {
        1e-12
    }
}

/// Cholesky of `m`, retrying with growing diagonal jitter. The flag reports
/// whether jitter was needed.
fn guarded_cholesky(m: &Mat4) -> (nalgebra::Cholesky<f64, nalgebra::U4>, bool) {
    if let Some(c) = m.cholesky() {
        return (c, false);
    }
    let mut eps = jitter(m);
    loop {
        let shifted = m + Mat4::identity() * eps;
        if let Some(c) = shifted.cholesky() {
            return (c, true);
        }
        eps *= 10.0;
    }
}

/// `ln det m` for symmetric positive-definite `m`, with the jitter guard.
pub fn logdet_spd(m: &Mat4) -> (f64, bool) {
    let (c, jittered) = guarded_cholesky(m);
    let ld = c.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    (ld, jittered)
}

pub fn inverse_spd(m: &Mat4) -> (Mat4, bool) {
    let (c, jittered) = guarded_cholesky(m);
    (c.inverse(), jittered)
}

pub fn is_symmetric(m: &Mat4, tol: f64) -> bool {
    let scale = m.abs().max().max(1.0);
    (m - m.transpose()).abs().max() <= tol * scale
}

/// Minimum eigenvalue is at least `-1e-9 · trace`.
pub fn is_psd(m: &Mat4) -> bool {
    let sym = 0.5 * (m + m.transpose());
    let min = sym.symmetric_eigenvalues().min();
    min >= -1e-9 * m.trace().abs().max(f64::MIN_POSITIVE)
}
