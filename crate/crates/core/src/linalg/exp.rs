//! Matrix exponential and the Hermitian positive-definite square root.

use super::{c, eig_general, eig_hermitian, tol, ComplexMatrix};
use crate::error::{Error, Result};

/// Matrix exponential e^M.
///
/// Diagonalizable input goes through the eigendecomposition; when the
/// eigenvector condition number exceeds [`tol::EXP_EIG_CONDITION`] (or the
/// matrix is defective, e.g. at an exceptional point) the computation falls
/// back to scaling-and-squaring with a Taylor core.
pub fn mat_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("non-finite entries".into()));
    }
    if let Ok(spectrum) = eig_general(m) {
        let v = &spectrum.right_vectors;
        if let Ok(vinv) = v.inv() {
            let cond = v.frobenius_norm() * vinv.frobenius_norm();
            if cond < tol::EXP_EIG_CONDITION {
                let expd = ComplexMatrix::diag(
                    &spectrum
                        .eigenvalues
                        .iter()
                        .map(|z| z.exp())
                        .collect::<Vec<_>>(),
                );
                return Ok(v.matmul(&expd).matmul(&vinv));
            }
        }
    }
    Ok(exp_scaling_squaring(m))
}

/// Scaling-and-squaring with a Taylor series core; always succeeds for finite
/// input.
fn exp_scaling_squaring(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let norm = m.frobenius_norm();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m.scale(c(0.5f64.powi(squarings), 0.0));

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..64 {
        term = term.matmul(&scaled).scale(c(1.0 / k as f64, 0.0));
        result = result.add(&term);
        if term.frobenius_norm() <= f64::EPSILON * result.frobenius_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Unique Hermitian positive-definite square root of a Hermitian PD matrix.
pub fn mat_sqrt_pd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("non-finite entries".into()));
    }
    if !m.is_hermitian(tol::HERMITICITY) {
        return Err(Error::MetricInvalid(format!(
            "not Hermitian: defect {:.3e}",
            m.hermiticity_defect()
        )));
    }
    let (vals, u) = eig_hermitian(m);
    // Eigenvalues must be distinguishable from zero at machine precision;
    // severely graded but genuinely positive spectra (e.g. exp(+-2 gamma t))
    // are legitimate inputs.
    let floor = f64::EPSILON * m.dim() as f64 * m.frobenius_norm();
    if let Some(&bad) = vals.iter().find(|&&v| v <= floor) {
        return Err(Error::MetricInvalid(format!(
            "not positive-definite: eigenvalue {bad:.3e}"
        )));
    }
    let sqrt_d = ComplexMatrix::diag(&vals.iter().map(|&v| c(v.sqrt(), 0.0)).collect::<Vec<_>>());
    let root = u.matmul(&sqrt_d).matmul(&u.adjoint());
    // re-hermitize to kill roundoff drift
    Ok(root.hermitian_part())
}

/// Propagator e^{-i h t} for Hermitian h, exactly unitary up to roundoff.
pub fn unitary_from_hermitian(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let (vals, u) = eig_hermitian(h);
    let phases = ComplexMatrix::diag(
        &vals
            .iter()
            .map(|&v| c(0.0, -v * t).exp())
            .collect::<Vec<_>>(),
    );
    u.matmul(&phases).matmul(&u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_y, ComplexMatrix};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn rand_stream(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed;
        move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        }
    }

    fn random_matrix(dim: usize, seed: u64) -> ComplexMatrix {
        let mut next = rand_stream(seed);
        let data = (0..dim * dim).map(|_| c(next(), next())).collect();
        ComplexMatrix::from_vec(dim, data).unwrap()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&ComplexMatrix::zeros(2)).unwrap();
        assert!(e.sub(&ComplexMatrix::identity(2)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn exp_of_real_diagonal() {
        // diag(0.8, -0.8) -> diag(e^0.8, e^-0.8), 5 decimals from scalar exp
        let m = ComplexMatrix::diag(&[c(0.8, 0.0), c(-0.8, 0.0)]);
        let e = mat_exp(&m).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, 2.22554, epsilon = 1e-5);
        assert_abs_diff_eq!(e[(1, 1)].re, 0.44933, epsilon = 1e-5);
        assert_abs_diff_eq!(e[(0, 0)].re, (0.8f64).exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[(1, 1)].re, (-0.8f64).exp(), epsilon = 1e-13);
    }

    #[test]
    fn exp_phase_periodicity() {
        // exp(-i pi diag(1,-1)) = -identity
        let m = ComplexMatrix::diag(&[c(0.0, -PI), c(0.0, PI)]);
        let e = mat_exp(&m).unwrap();
        let minus_id = ComplexMatrix::identity(2).scale(c(-1.0, 0.0));
        assert!(e.sub(&minus_id).frobenius_norm() < 1e-13);
    }

    #[test]
    fn exp_inverse_property() {
        // mat_exp(M) mat_exp(-M) = 1 within 1e-10 for ||M|| <= 10
        for seed in 0..20 {
            let mut m = random_matrix(2, 500 + seed);
            let norm = m.frobenius_norm();
            if norm > 10.0 {
                m = m.scale(c(10.0 / norm, 0.0));
            } else {
                m = m.scale(c(10.0 / norm.max(1.0), 0.0));
            }
            let a = mat_exp(&m).unwrap();
            let b = mat_exp(&m.scale(c(-1.0, 0.0))).unwrap();
            let defect = a
                .matmul(&b)
                .sub(&ComplexMatrix::identity(2))
                .frobenius_norm();
            assert!(defect < 1e-10, "seed {seed}: {defect}");
        }
    }

    #[test]
    fn exp_derivative_residual() {
        // d/ds e^{sM} at s=1 equals M e^M; probe by central difference
        let m = random_matrix(2, 77).scale(c(0.5, 0.0));
        let e = mat_exp(&m).unwrap();
        let h = 1e-6;
        let plus = mat_exp(&m.scale(c(1.0 + h, 0.0))).unwrap();
        let minus = mat_exp(&m.scale(c(1.0 - h, 0.0))).unwrap();
        let deriv = plus.sub(&minus).scale(c(0.5 / h, 0.0));
        let expect = m.matmul(&e);
        assert!(deriv.sub(&expect).frobenius_norm() < 1e-8);
    }

    #[test]
    fn eig_and_series_routes_agree() {
        // the two computation paths are independent; they must coincide on
        // generic (diagonalizable) matrices
        for seed in 0..20 {
            let m = random_matrix(3, 4200 + seed);
            let series = exp_scaling_squaring(&m);
            let full = mat_exp(&m).unwrap();
            let defect = series.sub(&full).frobenius_norm();
            assert!(
                defect < 1e-11 * full.frobenius_norm().max(1.0),
                "seed {seed}: {defect}"
            );
        }
    }

    #[test]
    fn exp_at_exceptional_point_falls_back() {
        // defective matrix: gain-loss at g = gamma
        let m = ComplexMatrix::from_2x2(c(0.0, -1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
        // exact: M^2 = 0, so e^{tM} = 1 + tM
        let e = mat_exp(&m).unwrap();
        let expect = ComplexMatrix::identity(2).add(&m);
        assert!(e.sub(&expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn sqrt_of_identity() {
        let e = mat_sqrt_pd(&ComplexMatrix::identity(2)).unwrap();
        assert!(e.sub(&ComplexMatrix::identity(2)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let m = ComplexMatrix::diag(&[c(4.0, 0.0), c(9.0, 0.0)]);
        let e = mat_sqrt_pd(&m).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[(1, 1)].re, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_of_gain_loss_metric() {
        // eta = 1 - 0.8 sigma_y (g = 0.5, gamma = 0.4):
        // E = (Gp + Gm)/2 * 1 - (Gp - Gm)/2 * sigma_y, Gp = sqrt(1.8), Gm = sqrt(0.2)
        let eta = ComplexMatrix::identity(2).sub(&sigma_y().scale(c(0.8, 0.0)));
        let e = mat_sqrt_pd(&eta).unwrap();
        let gp = 1.8f64.sqrt();
        let gm = 0.2f64.sqrt();
        assert_abs_diff_eq!(gp, 1.34164, epsilon = 1e-5);
        assert_abs_diff_eq!(gm, 0.44721, epsilon = 1e-5);
        let expect = ComplexMatrix::identity(2)
            .scale(c(0.5 * (gp + gm), 0.0))
            .sub(&sigma_y().scale(c(0.5 * (gp - gm), 0.0)));
        assert!(e.sub(&expect).frobenius_norm() < 1e-13);
        // squared back
        let sq = e.matmul(&e);
        assert!(sq.sub(&eta).frobenius_norm() < 1e-12 * eta.frobenius_norm());
        // its inverse satisfies E E^-1 = 1 to 1e-12
        let einv = e.inv().unwrap();
        let defect = e
            .matmul(&einv)
            .sub(&ComplexMatrix::identity(2))
            .frobenius_norm();
        assert!(defect < 1e-12);
    }

    #[test]
    fn sqrt_squares_back_on_random_pd() {
        for seed in 0..15 {
            let a = random_matrix(3, 900 + seed);
            let pd = a
                .adjoint()
                .matmul(&a)
                .add(&ComplexMatrix::identity(3).scale(c(0.1, 0.0)));
            let root = mat_sqrt_pd(&pd).unwrap();
            let defect = root.matmul(&root).sub(&pd).frobenius_norm();
            assert!(
                defect < 1e-12 * pd.frobenius_norm(),
                "seed {seed}: {defect}"
            );
            assert!(root.is_hermitian(1e-12));
        }
    }

    #[test]
    fn sqrt_rejects_non_pd() {
        let m = ComplexMatrix::diag(&[c(1.0, 0.0), c(-2.0, 0.0)]);
        assert!(matches!(mat_sqrt_pd(&m), Err(Error::MetricInvalid(_))));
        let nh = ComplexMatrix::from_2x2(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(mat_sqrt_pd(&nh), Err(Error::MetricInvalid(_))));
    }

    #[test]
    fn unitary_propagator_is_unitary() {
        let h = random_matrix(2, 321).hermitian_part();
        let u = unitary_from_hermitian(&h, 1.7);
        let defect = u
            .adjoint()
            .matmul(&u)
            .sub(&ComplexMatrix::identity(2))
            .frobenius_norm();
        assert!(defect < 1e-13);
        // against mat_exp
        let direct = mat_exp(&h.scale(c(0.0, -1.7))).unwrap();
        assert!(u.sub(&direct).frobenius_norm() < 1e-11);
    }
}
