//! Eigensolvers: cyclic Jacobi for Hermitian matrices, a closed-form 2x2
//! route and Hessenberg/shifted-QR for general complex matrices, plus the
//! null-space extractor built on the Hermitian solver.

use num_complex::Complex64;

use super::{c, tol, ComplexMatrix};
use crate::error::{Error, Result};

/// Spectral data of a general (possibly non-Hermitian) matrix.
///
/// Right columns solve `M v_n = lambda_n v_n` and carry unit standard norm;
/// left columns solve the adjoint problem `M^dag phi_n = conj(lambda_n) phi_n`
/// and are scaled so that `<phi_m | psi_n> = delta_mn` when the spectrum is
/// simple.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub right_vectors: ComplexMatrix,
    pub left_vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn right_column(&self, n: usize) -> Vec<Complex64> {
        column(&self.right_vectors, n)
    }

    pub fn left_column(&self, n: usize) -> Vec<Complex64> {
        column(&self.left_vectors, n)
    }
}

fn column(m: &ComplexMatrix, j: usize) -> Vec<Complex64> {
    (0..m.dim()).map(|i| m[(i, j)]).collect()
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Normalize to unit norm and fix the phase so the largest-magnitude
/// component is real positive. Keeps eigenvector output deterministic.
fn normalize_phase(v: &mut [Complex64]) {
    let norm = vec_norm(v);
    if norm == 0.0 {
        return;
    }
    let mut idx = 0;
    let mut best = 0.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            idx = i;
        }
    }
    let phase = v[idx] / v[idx].norm();
    for z in v.iter_mut() {
        *z /= norm * phase;
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the unitary of eigenvectors as
/// columns: `M = U diag(vals) U^dag`. The input's Hermitian part is used.
pub fn eig_hermitian(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut u = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let stop = f64::EPSILON * scale;

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::EPSILON * scale * 1e-2 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (app - aqq) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let co = 1.0 / (1.0 + t * t).sqrt();
                let si = t * co;
                // column update A <- A J with J_pp = c, J_qp = s e^{-i phi},
                // J_pq = -s e^{i phi}, J_qq = c
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * co + akq * si * phase.conj();
                    a[(k, q)] = -akp * si * phase + akq * co;
                }
                // row update A <- J^dag A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * co + aqk * si * phase;
                    a[(q, k)] = -apk * si * phase.conj() + aqk * co;
                }
                for k in 0..n {
                    let ukp = u[(k, p)];
                    let ukq = u[(k, q)];
                    u[(k, p)] = ukp * co + ukq * si * phase.conj();
                    u[(k, q)] = -ukp * si * phase + ukq * co;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = ComplexMatrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        let mut col = column(&u, old);
        normalize_phase(&mut col);
        for i in 0..n {
            vecs[(i, new)] = col[i];
        }
    }
    (vals, vecs)
}

/// Eigenvalues only; never fails on degeneracy. 2x2 in closed form, larger
/// dimensions via Hessenberg reduction and shifted QR.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("non-finite entries".into()));
    }
    match m.dim() {
        1 => Ok(vec![m[(0, 0)]]),
        2 => Ok(eig2_values(m).to_vec()),
        _ => qr_eigenvalues(m),
    }
}

fn eig2_values(m: &ComplexMatrix) -> [Complex64; 2] {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let half_diff = (m[(0, 0)] - m[(1, 1)]) * 0.5;
    let disc = half_diff * half_diff + m[(0, 1)] * m[(1, 0)];
    let root = disc.sqrt();
    [half_tr + root, half_tr - root]
}

fn eig2_right_vector(m: &ComplexMatrix, lambda: Complex64) -> Vec<Complex64> {
    // candidate rows of (M - lambda); pick the better conditioned one
    let cand1 = [m[(0, 1)], lambda - m[(0, 0)]];
    let cand2 = [lambda - m[(1, 1)], m[(1, 0)]];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let mut v = if n1 >= n2 {
        cand1.to_vec()
    } else {
        cand2.to_vec()
    };
    if vec_norm(&v) == 0.0 {
        v = vec![Complex64::ONE, Complex64::ZERO];
    }
    normalize_phase(&mut v);
    v
}

/// Full spectral data of a general complex matrix (desk scale, dim <= 8).
///
/// Coalesced eigenvalues (within [`tol::EIGEN_DEGENERACY`] relative) yield a
/// [`Error::DegenerateSpectrum`] carrying the eigenvalue data, except for
/// scalar multiples of the identity which are trivially diagonal.
pub fn eig_general(m: &ComplexMatrix) -> Result<Spectrum> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("non-finite entries".into()));
    }
    let n = m.dim();
    if n > 8 {
        return Err(Error::InvalidInput(format!(
            "dim {n} exceeds desk scale (8)"
        )));
    }
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    // scalar matrix: full eigenspace, identity basis
    let mean = m.trace() / n as f64;
    let shifted = m.sub(&ComplexMatrix::identity(n).scale(mean));
    if shifted.frobenius_norm() <= tol::EIGEN_DEGENERACY * scale {
        return Ok(Spectrum {
            eigenvalues: vec![mean; n],
            right_vectors: ComplexMatrix::identity(n),
            left_vectors: ComplexMatrix::identity(n),
        });
    }

    let vals = eigenvalues(m)?;
    for i in 0..n {
        for j in (i + 1)..n {
            if (vals[i] - vals[j]).norm() <= tol::EIGEN_DEGENERACY * scale {
                return Err(Error::DegenerateSpectrum { eigenvalues: vals });
            }
        }
    }

    let mut right = ComplexMatrix::zeros(n);
    let mut left = ComplexMatrix::zeros(n);
    let adj = m.adjoint();
    for (k, &lambda) in vals.iter().enumerate() {
        let rv = if n == 2 {
            eig2_right_vector(m, lambda)
        } else {
            inverse_iteration(m, lambda, scale)?
        };
        let lv = if n == 2 {
            eig2_right_vector(&adj, lambda.conj())
        } else {
            inverse_iteration(&adj, lambda.conj(), scale)?
        };
        for i in 0..n {
            right[(i, k)] = rv[i];
            left[(i, k)] = lv[i];
        }
    }

    // residual check on the right vectors
    for (k, &lambda) in vals.iter().enumerate() {
        let v = column(&right, k);
        let mv = m.matvec(&v);
        let mut res = 0.0f64;
        for i in 0..n {
            res += (mv[i] - lambda * v[i]).norm_sqr();
        }
        if res.sqrt() > 1e-8 * scale {
            return Err(Error::EigNoConvergence(k));
        }
    }

    // biorthogonal pairing: scale left columns so <phi_n|psi_n> = 1
    for k in 0..n {
        let overlap = dot(&column(&left, k), &column(&right, k));
        if overlap.norm() <= tol::EIGEN_DEGENERACY {
            return Err(Error::DegenerateSpectrum { eigenvalues: vals });
        }
        let factor = (Complex64::ONE / overlap).conj();
        for i in 0..n {
            left[(i, k)] *= factor;
        }
    }

    Ok(Spectrum {
        eigenvalues: vals,
        right_vectors: right,
        left_vectors: left,
    })
}

fn inverse_iteration(m: &ComplexMatrix, lambda: Complex64, scale: f64) -> Result<Vec<Complex64>> {
    let n = m.dim();
    for attempt in 0..4 {
        let shift = lambda + c(scale * 1e-11 * 10f64.powi(attempt), scale * 3e-12);
        let a = m.sub(&ComplexMatrix::identity(n).scale(shift));
        let Ok(inv) = a.inv() else { continue };
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| c(1.0 + 0.1 * i as f64, 0.05 * (i as f64 + 1.0)))
            .collect();
        for _ in 0..5 {
            v = inv.matvec(&v);
            let norm = vec_norm(&v);
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            for z in v.iter_mut() {
                *z /= norm;
            }
        }
        let mv = m.matvec(&v);
        let res: f64 = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if res <= 1e-9 * scale {
            normalize_phase(&mut v);
            return Ok(v);
        }
    }
    Err(Error::EigNoConvergence(0))
}

/// Hessenberg reduction followed by shifted QR with deflation.
fn qr_eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = m.dim();
    let mut h = hessenberg(m);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON * scale;
    let mut vals = vec![Complex64::ZERO; n];
    let mut hi = n;
    let mut iters = 0usize;
    let max_iters = 60 * n;

    while hi > 0 {
        if hi == 1 {
            vals[0] = h[(0, 0)];
            break;
        }
        // deflate trailing eigenvalue when the subdiagonal is negligible
        let sub = h[(hi - 1, hi - 2)].norm();
        if sub <= eps.max(f64::EPSILON * (h[(hi - 1, hi - 1)].norm() + h[(hi - 2, hi - 2)].norm()))
        {
            vals[hi - 1] = h[(hi - 1, hi - 1)];
            hi -= 1;
            continue;
        }
        iters += 1;
        if iters > max_iters {
            return Err(Error::EigNoConvergence(max_iters));
        }
        // Wilkinson shift from the trailing 2x2 of the active block
        let a = h[(hi - 2, hi - 2)];
        let b = h[(hi - 2, hi - 1)];
        let cc = h[(hi - 1, hi - 2)];
        let d = h[(hi - 1, hi - 1)];
        let half = (a - d) * 0.5;
        let disc = (half * half + b * cc).sqrt();
        let mu1 = (a + d) * 0.5 + disc;
        let mu2 = (a + d) * 0.5 - disc;
        let mu = if (mu1 - d).norm() <= (mu2 - d).norm() {
            mu1
        } else {
            mu2
        };
        // occasional exceptional shift to break symmetry stalls
        let mu = if iters.is_multiple_of(17) {
            mu + c(sub, sub * 0.5)
        } else {
            mu
        };

        qr_step(&mut h, hi, mu);
    }
    // Deterministic order: descending magnitude, then descending real part.
    vals.sort_by(|x, y| {
        y.norm()
            .partial_cmp(&x.norm())
            .unwrap()
            .then(y.re.partial_cmp(&x.re).unwrap())
            .then(y.im.partial_cmp(&x.im).unwrap())
    });
    Ok(vals)
}

fn hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm <= f64::EPSILON * a.frobenius_norm() {
            continue;
        }
        let alpha = if x[0].norm() > 0.0 {
            -(x[0] / x[0].norm()) * xnorm
        } else {
            c(-xnorm, 0.0)
        };
        x[0] -= alpha;
        let vnorm = vec_norm(&x);
        if vnorm == 0.0 {
            continue;
        }
        for z in x.iter_mut() {
            *z /= vnorm;
        }
        // A <- P A with P = I - 2 v v^dag acting on rows k+1..n
        for j in 0..n {
            let mut proj = Complex64::ZERO;
            for (idx, i) in (k + 1..n).enumerate() {
                proj += x[idx].conj() * a[(i, j)];
            }
            for (idx, i) in (k + 1..n).enumerate() {
                let sub = 2.0 * x[idx] * proj;
                a[(i, j)] -= sub;
            }
        }
        // A <- A P acting on columns k+1..n
        for i in 0..n {
            let mut proj = Complex64::ZERO;
            for (idx, j) in (k + 1..n).enumerate() {
                proj += a[(i, j)] * x[idx];
            }
            for (idx, j) in (k + 1..n).enumerate() {
                let sub = 2.0 * proj * x[idx].conj();
                a[(i, j)] -= sub;
            }
        }
    }
    a
}

/// One implicit single-shift QR sweep on the leading `hi x hi` block.
fn qr_step(h: &mut ComplexMatrix, hi: usize, mu: Complex64) {
    let n = h.dim();
    // Givens rotations eliminating the subdiagonal of H - mu I
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(hi - 1);
    for i in 0..hi {
        let shift = h[(i, i)] - mu;
        h[(i, i)] = shift;
    }
    for i in 0..hi - 1 {
        let a = h[(i, i)];
        let b = h[(i + 1, i)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (co, si) = if r == 0.0 || a.norm() == 0.0 {
            (0.0, Complex64::ONE)
        } else {
            (a.norm() / r, (a / a.norm()) * b.conj() / r)
        };
        rotations.push((co, si));
        // apply G^... rotation to rows i, i+1
        for j in i..n {
            let hij = h[(i, j)];
            let h1j = h[(i + 1, j)];
            h[(i, j)] = hij * co + h1j * si;
            h[(i + 1, j)] = -hij * si.conj() + h1j * co;
        }
    }
    // H <- R Q: apply the conjugated rotations on columns
    for (i, &(co, si)) in rotations.iter().enumerate() {
        for k in 0..(i + 2).min(hi) {
            let hki = h[(k, i)];
            let hk1 = h[(k, i + 1)];
            h[(k, i)] = hki * co + hk1 * si.conj();
            h[(k, i + 1)] = -hki * si + hk1 * co;
        }
    }
    for i in 0..hi {
        let back = h[(i, i)] + mu;
        h[(i, i)] = back;
    }
}

/// Orthonormal basis of the numerical null space `{v : ||Mv|| <= tol ||M||}`.
///
/// An empty result is a valid return. The zero matrix has the whole space as
/// its kernel.
pub fn null_space(m: &ComplexMatrix, tolerance: f64) -> Vec<Vec<Complex64>> {
    let n = m.dim();
    let norm = m.frobenius_norm();
    if norm == 0.0 {
        return (0..n)
            .map(|k| {
                let mut e = vec![Complex64::ZERO; n];
                e[k] = Complex64::ONE;
                e
            })
            .collect();
    }
    let gram = m.adjoint().matmul(m);
    let (vals, vecs) = eig_hermitian(&gram);
    let cutoff = tolerance * norm;
    // The Gram route squares the condition number, so candidates are taken
    // with a relaxed cutoff and polished by shifted inverse iteration before
    // the strict bound is applied.
    let candidate_cutoff = cutoff.max(1e-6 * norm);
    let shift = (1e-10 * norm * norm).max(f64::MIN_POSITIVE);
    let shifted = gram.add(&ComplexMatrix::identity(n).scale(c(shift, 0.0)));
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for (k, &val) in vals.iter().enumerate() {
        if val.max(0.0).sqrt() > candidate_cutoff {
            continue;
        }
        let mut v = column(&vecs, k);
        for _ in 0..3 {
            if let Ok(next) = shifted.solve(&v) {
                let nn = vec_norm(&next);
                if nn > 0.0 && nn.is_finite() {
                    v = next.iter().map(|z| z / nn).collect();
                }
            }
        }
        // orthogonalize against vectors already accepted
        for b in &basis {
            let overlap = dot(b, &v);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
        let nn = vec_norm(&v);
        if nn < 1e-8 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= nn;
        }
        let residual = vec_norm(&m.matvec(&v));
        if residual <= cutoff {
            normalize_phase(&mut v);
            basis.push(v);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sigma_z;
    use approx::assert_abs_diff_eq;

    fn gain_loss_matrix(omega0: f64, g: f64, gamma: f64) -> ComplexMatrix {
        ComplexMatrix::from_2x2(c(omega0, -gamma), c(g, 0.0), c(g, 0.0), c(omega0, gamma))
    }

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
    fn hermitian_eig_reconstructs() {
        for seed in 0..10 {
            let a = random_matrix(4, seed);
            let h = a.hermitian_part();
            let (vals, u) = eig_hermitian(&h);
            let lam = ComplexMatrix::diag(&vals.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>());
            let back = u.matmul(&lam).matmul(&u.adjoint());
            assert!(back.sub(&h).frobenius_norm() < 1e-12 * h.frobenius_norm().max(1.0));
            // unitarity
            let defect = u
                .adjoint()
                .matmul(&u)
                .sub(&ComplexMatrix::identity(4))
                .frobenius_norm();
            assert!(defect < 1e-13);
            // ascending order
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn sigma_z_spectrum() {
        let s = eig_general(&sigma_z()).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1].re, -1.0, epsilon = 1e-14);
        let v0 = s.right_column(0);
        let v1 = s.right_column(1);
        assert!(v0[0].norm() > 0.999 && v0[1].norm() < 1e-12);
        assert!(v1[1].norm() > 0.999 && v1[0].norm() < 1e-12);
    }

    #[test]
    fn gain_loss_real_spectrum() {
        // lambda_pm = +- sqrt(g^2 - gamma^2) at omega0 = 0
        let s = eig_general(&gain_loss_matrix(0.0, 0.5, 0.4)).unwrap();
        let mut eigs: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(eigs[0], -0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(eigs[1], 0.3, epsilon = 1e-14);
        for z in &s.eigenvalues {
            assert!(z.im.abs() < 1e-14);
        }
    }

    #[test]
    fn gain_loss_broken_phase_complex_pair() {
        let s = eig_general(&gain_loss_matrix(0.0, 0.5, 0.6)).unwrap();
        let expect = (0.11f64).sqrt();
        let mut ims: Vec<f64> = s.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(ims[0], -expect, epsilon = 1e-14);
        assert_abs_diff_eq!(ims[1], expect, epsilon = 1e-14);
    }

    #[test]
    fn exceptional_point_is_degenerate() {
        let result = eig_general(&gain_loss_matrix(1.0, 1.0, 1.0));
        match result {
            Err(Error::DegenerateSpectrum { eigenvalues }) => {
                for z in eigenvalues {
                    assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-10);
                    assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-10);
                }
            }
            other => panic!("expected degenerate spectrum, got {other:?}"),
        }
    }

    #[test]
    fn scalar_matrix_is_not_defective() {
        let m = ComplexMatrix::identity(2).scale(c(0.7, 0.1));
        let s = eig_general(&m).unwrap();
        assert!((s.eigenvalues[0] - c(0.7, 0.1)).norm() < 1e-14);
    }

    #[test]
    fn biorthogonality_after_normalization() {
        let m = gain_loss_matrix(0.3, 0.5, 0.4);
        let s = eig_general(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let overlap = dot(&s.left_column(i), &s.right_column(j));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(overlap.re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(overlap.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reconstruction_from_spectrum_2x2() {
        for seed in 0..30 {
            let m = random_matrix(2, 1000 + seed);
            let s = match eig_general(&m) {
                Ok(s) => s,
                Err(Error::DegenerateSpectrum { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let lam = ComplexMatrix::diag(&s.eigenvalues);
            let vinv = s.right_vectors.inv().unwrap();
            let back = s.right_vectors.matmul(&lam).matmul(&vinv);
            let defect = back.sub(&m).frobenius_norm();
            assert!(
                defect < 1e-9 * m.frobenius_norm().max(1.0),
                "seed {seed}: {defect}"
            );
        }
    }

    #[test]
    fn reconstruction_from_spectrum_4x4() {
        for seed in 0..10 {
            let m = random_matrix(4, 2000 + seed);
            let s = match eig_general(&m) {
                Ok(s) => s,
                Err(Error::DegenerateSpectrum { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let lam = ComplexMatrix::diag(&s.eigenvalues);
            let vinv = s.right_vectors.inv().unwrap();
            let back = s.right_vectors.matmul(&lam).matmul(&vinv);
            let defect = back.sub(&m).frobenius_norm();
            assert!(
                defect < 1e-8 * m.frobenius_norm().max(1.0),
                "seed {seed}: {defect}"
            );
        }
    }

    #[test]
    fn eigenvalue_residual_bound() {
        for seed in 0..20 {
            let m = random_matrix(3, 3000 + seed);
            let s = match eig_general(&m) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let scale = m.frobenius_norm();
            for (k, &lam) in s.eigenvalues.iter().enumerate() {
                let v = s.right_column(k);
                let mv = m.matvec(&v);
                let res: f64 = mv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - lam * b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn null_space_zero_matrix() {
        let basis = null_space(&ComplexMatrix::zeros(2), tol::NULL_SPACE);
        assert_eq!(basis.len(), 2);
    }

    #[test]
    fn null_space_rank_one_diagonal() {
        let m = ComplexMatrix::diag(&[c(0.0, 0.0), c(3.0, 0.0)]);
        let basis = null_space(&m, tol::NULL_SPACE);
        assert_eq!(basis.len(), 1);
        assert!(basis[0][0].norm() > 0.999);
        assert!(basis[0][1].norm() < 1e-12);
    }

    #[test]
    fn null_space_vectors_satisfy_bound() {
        for seed in 0..10 {
            // build a singular 4x4: outer structure with a forced kernel vector
            let a = random_matrix(4, 4000 + seed);
            let mut m = a.clone();
            // make last column = sum of the first three => kernel (1,1,1,-1)/2
            for i in 0..4 {
                m[(i, 3)] = m[(i, 0)] + m[(i, 1)] + m[(i, 2)];
            }
            let basis = null_space(&m, tol::NULL_SPACE);
            assert!(!basis.is_empty(), "seed {seed}");
            for v in &basis {
                let mv = m.matvec(v);
                let n: f64 = mv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!(n <= tol::NULL_SPACE * m.frobenius_norm());
            }
        }
    }
}
