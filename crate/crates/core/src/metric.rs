//! Metric-operator machinery: pseudo-Hermiticity verification, the
//! biorthogonal construction, the metric equation of motion, vielbein
//! factorization, Hermitization, and eta-weighted statistics.
//!
//! The biorthogonal metric sums outer products of the left eigenvectors taken
//! at unit standard norm, which pins the otherwise free diagonal rescaling so
//! that Tr eta = dim. For the gain-loss qubit this reproduces
//! eta = 1 - (gamma/g) sigma_y exactly. For the general 2x2 family the same
//! construction gives eta = 1 - (s/tau) sigma_y, proportional to the
//! familiar sec/tan form of that metric with alpha = arcsin(s/tau); the
//! overall sec(alpha) factor is a normalization choice and drops out of every
//! eta-weighted statistic. (That alpha is unrelated to the 2t sqrt(s^2+tau^2)
//! abscissa appearing in the QFI catalog.)

use crate::dynamics::DensityState;
use crate::error::{Error, Result};
use crate::linalg::{c, eig_general, eig_hermitian, mat_sqrt_pd, tol, ComplexMatrix};

/// When the metric operator applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricTime {
    /// Time-independent metric.
    Static,
    /// Sample of a time-dependent metric at the given time.
    At(f64),
}

/// Hermitian positive-definite metric eta together with its Hermitian PD
/// vielbein factor E, E^dag E = E^2 = eta.
#[derive(Debug, Clone)]
pub struct MetricOperator {
    pub eta: ComplexMatrix,
    pub vielbein: ComplexMatrix,
    pub time: MetricTime,
}

impl MetricOperator {
    /// Validates Hermiticity and positive-definiteness, then factorizes.
    pub fn new(eta: ComplexMatrix, time: MetricTime) -> Result<Self> {
        let vielbein = mat_sqrt_pd(&eta)?;
        let defect = vielbein.matmul(&vielbein).sub(&eta).frobenius_norm();
        if defect > 1e-12 * eta.frobenius_norm().max(1.0) {
            return Err(Error::MetricInvalid(format!(
                "vielbein factorization defect {defect:.3e}"
            )));
        }
        Ok(Self {
            eta,
            vielbein,
            time,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            eta: ComplexMatrix::identity(dim),
            vielbein: ComplexMatrix::identity(dim),
            time: MetricTime::Static,
        }
    }
}

/// Metric history on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct MetricTrajectory {
    pub grid: Vec<f64>,
    pub metrics: Vec<MetricOperator>,
}

impl MetricTrajectory {
    /// A static metric viewed as a (single-entry) trajectory.
    pub fn from_static(metric: MetricOperator) -> Self {
        Self {
            grid: vec![0.0],
            metrics: vec![metric],
        }
    }

    pub fn is_static(&self) -> bool {
        self.metrics.len() == 1
    }
}

/// ||eta H eta^-1 - H^dag||_F / ||H||_F.
pub fn pseudo_hermiticity_residual(h: &ComplexMatrix, metric: &MetricOperator) -> Result<f64> {
    if h.dim() != metric.eta.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let eta_inv = metric
        .eta
        .inv()
        .map_err(|_| Error::MetricInvalid("metric is singular".into()))?;
    let conjugated = metric.eta.matmul(h).matmul(&eta_inv);
    let defect = conjugated.sub(&h.adjoint()).frobenius_norm();
    Ok(defect / h.frobenius_norm().max(f64::MIN_POSITIVE))
}

/// Static metric of a quasi-Hermitian Hamiltonian from its biorthogonal
/// system: eta = sum_n |phi_n><phi_n| over unit-norm left eigenvectors.
///
/// Requires simple, real eigenvalues; coalesced or complex spectra are
/// rejected.
pub fn biorthogonal_metric(h: &ComplexMatrix) -> Result<MetricOperator> {
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let spectrum = eig_general(h).map_err(|e| match e {
        Error::DegenerateSpectrum { .. } => {
            Error::NotQuasiHermitian("eigenvalues coalesce (exceptional point)".into())
        }
        other => other,
    })?;
    for lambda in &spectrum.eigenvalues {
        if lambda.im.abs() > tol::EIGEN_DEGENERACY * scale {
            return Err(Error::NotQuasiHermitian(format!(
                "complex eigenvalue {lambda}"
            )));
        }
    }
    let n = h.dim();
    let mut eta = ComplexMatrix::zeros(n);
    for k in 0..n {
        let mut phi = spectrum.left_column(k);
        let norm = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in phi.iter_mut() {
            *z /= norm;
        }
        for i in 0..n {
            for j in 0..n {
                eta[(i, j)] += phi[i] * phi[j].conj();
            }
        }
    }
    MetricOperator::new(eta.hermitian_part(), MetricTime::Static)
}

fn metric_rhs(h: &ComplexMatrix, h_adj: &ComplexMatrix, eta: &ComplexMatrix) -> ComplexMatrix {
    // i d eta/dt = H^dag eta - eta H
    h_adj.matmul(eta).sub(&eta.matmul(h)).scale(c(0.0, -1.0))
}

fn rk4_metric_step(
    h: &ComplexMatrix,
    h_adj: &ComplexMatrix,
    eta: &ComplexMatrix,
    dt: f64,
) -> ComplexMatrix {
    let k1 = metric_rhs(h, h_adj, eta);
    let k2 = metric_rhs(h, h_adj, &eta.add(&k1.scale(c(dt / 2.0, 0.0))));
    let k3 = metric_rhs(h, h_adj, &eta.add(&k2.scale(c(dt / 2.0, 0.0))));
    let k4 = metric_rhs(h, h_adj, &eta.add(&k3.scale(c(dt, 0.0))));
    eta.add(
        &k1.add(&k2.scale(c(2.0, 0.0)))
            .add(&k3.scale(c(2.0, 0.0)))
            .add(&k4)
            .scale(c(dt / 6.0, 0.0)),
    )
}

fn integrate_metric_grid(
    h: &ComplexMatrix,
    eta0: &ComplexMatrix,
    grid: &[f64],
    substeps: usize,
) -> Vec<ComplexMatrix> {
    let h_adj = h.adjoint();
    let mut out = Vec::with_capacity(grid.len());
    let mut eta = eta0.clone();
    out.push(eta.clone());
    for w in grid.windows(2) {
        let dt = (w[1] - w[0]) / substeps as f64;
        for _ in 0..substeps {
            eta = rk4_metric_step(h, &h_adj, &eta, dt);
        }
        eta = eta.hermitian_part();
        out.push(eta.clone());
    }
    out
}

/// Integrate the metric equation of motion i d eta/dt = H^dag eta - eta H on
/// the grid with a fixed-step fourth-order integrator; the substep count is
/// doubled until consecutive refinements agree to 1e-10 relative.
/// Positive-definiteness is monitored at every grid point.
pub fn solve_metric_ode(
    h: &ComplexMatrix,
    eta0: &MetricOperator,
    grid: &[f64],
) -> Result<MetricTrajectory> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "grid must be strictly increasing".into(),
        ));
    }
    let mut substeps = 2usize;
    let mut current = integrate_metric_grid(h, &eta0.eta, grid, substeps);
    loop {
        let finer = integrate_metric_grid(h, &eta0.eta, grid, substeps * 2);
        let mut worst = 0.0f64;
        for (a, b) in current.iter().zip(&finer) {
            let denom = b.frobenius_norm().max(1.0);
            worst = worst.max(a.sub(b).frobenius_norm() / denom);
        }
        current = finer;
        if worst <= 1e-10 || substeps >= 256 {
            break;
        }
        substeps *= 2;
    }

    // PD loss is monitored against the initial metric's scale: the smallest
    // eigenvalue of an exponentially graded but healthy metric (exp(2 gamma t
    // sigma_z)) decays without the metric ever losing positivity, so a floor
    // relative to the current norm would flag it spuriously.
    let floor = tol::POSITIVE_DEFINITE * eta0.eta.frobenius_norm();
    let mut metrics = Vec::with_capacity(grid.len());
    for (k, eta) in current.into_iter().enumerate() {
        let (vals, _) = eig_hermitian(&eta);
        if vals[0] <= floor {
            return Err(Error::MetricDegenerate { time: grid[k] });
        }
        metrics.push(MetricOperator::new(eta, MetricTime::At(grid[k]))?);
    }
    Ok(MetricTrajectory {
        grid: grid.to_vec(),
        metrics,
    })
}

/// Hermiticity target for the Hermitized generator.
pub const HERMITIZATION_TOLERANCE: f64 = 1e-9;

fn relative_hermiticity_residual(h: &ComplexMatrix) -> f64 {
    h.sub(&h.adjoint()).frobenius_norm() / h.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// Hermitization under a static metric: h = E H E^-1.
pub fn hermitize_static(h_tilde: &ComplexMatrix, metric: &MetricOperator) -> Result<ComplexMatrix> {
    let e_inv = metric
        .vielbein
        .inv()
        .map_err(|_| Error::MetricInvalid("vielbein is singular".into()))?;
    let h = metric.vielbein.matmul(h_tilde).matmul(&e_inv);
    let residual = relative_hermiticity_residual(&h);
    if residual > HERMITIZATION_TOLERANCE {
        return Err(Error::HermitizationFailure {
            residual,
            tolerance: HERMITIZATION_TOLERANCE,
        });
    }
    Ok(h)
}

/// Hermitization along a metric trajectory: h(t) = E H E^-1 + i (dE/dt) E^-1
/// at every grid point.
///
/// dE/dt comes from central differences of the vielbein; the stencil width
/// starts at the grid spacing and halves (re-integrating the metric equation
/// of motion locally from the stored sample) until the Hermiticity residual
/// meets [`HERMITIZATION_TOLERANCE`].
pub fn hermitize(h_tilde: &ComplexMatrix, traj: &MetricTrajectory) -> Result<Vec<ComplexMatrix>> {
    if traj.is_static() {
        return Ok(vec![hermitize_static(h_tilde, &traj.metrics[0])?]);
    }
    let h_adj = h_tilde.adjoint();
    let mut out = Vec::with_capacity(traj.grid.len());
    for (k, metric) in traj.metrics.iter().enumerate() {
        let spacing = if k + 1 < traj.grid.len() {
            traj.grid[k + 1] - traj.grid[k]
        } else {
            traj.grid[k] - traj.grid[k - 1]
        };
        let e_inv = metric
            .vielbein
            .inv()
            .map_err(|_| Error::MetricInvalid("vielbein is singular".into()))?;
        let base = metric.vielbein.matmul(h_tilde).matmul(&e_inv);

        let mut delta = spacing.min(1e-2);
        let mut accepted: Option<ComplexMatrix> = None;
        let mut last_residual = f64::INFINITY;
        while delta > 1e-7 {
            // eta(t +- delta) by local integration from the stored sample
            let mut fwd = metric.eta.clone();
            let mut bwd = metric.eta.clone();
            let sub = 4usize;
            for _ in 0..sub {
                fwd = rk4_metric_step(h_tilde, &h_adj, &fwd, delta / sub as f64);
                bwd = rk4_metric_step(h_tilde, &h_adj, &bwd, -delta / sub as f64);
            }
            let e_fwd = mat_sqrt_pd(&fwd.hermitian_part())?;
            let e_bwd = mat_sqrt_pd(&bwd.hermitian_part())?;
            let de = e_fwd.sub(&e_bwd).scale(c(0.5 / delta, 0.0));
            let candidate = base.add(&de.matmul(&e_inv).scale(c(0.0, 1.0)));
            last_residual = relative_hermiticity_residual(&candidate);
            if last_residual <= HERMITIZATION_TOLERANCE {
                accepted = Some(candidate);
                break;
            }
            delta /= 2.0;
        }
        match accepted {
            Some(h) => out.push(h),
            None => {
                return Err(Error::HermitizationFailure {
                    residual: last_residual,
                    tolerance: HERMITIZATION_TOLERANCE,
                })
            }
        }
    }
    Ok(out)
}

/// eta-weighted expectation of a Hermitian observable on a tilde-frame state:
/// Tr[rho~ eta A~] / Tr[eta rho~] with A~ = E^-1 A E, which equals the
/// standard expectation of A on the Hermitized-frame image E rho~ E^dag.
pub fn eta_expectation(
    state: &DensityState,
    metric: &MetricOperator,
    observable: &ComplexMatrix,
) -> Result<f64> {
    if !observable.is_hermitian(tol::HERMITICITY) {
        return Err(Error::ContractViolation(
            "observable must be Hermitian".into(),
        ));
    }
    let weight = metric.eta.matmul(&state.matrix).trace().re;
    if weight <= 0.0 {
        return Err(Error::InvalidMetricTrace(weight));
    }
    let mapped = metric
        .vielbein
        .matmul(&state.matrix)
        .matmul(&metric.vielbein.adjoint());
    Ok(mapped.matmul(observable).trace().re / weight)
}

/// Tr[eta rho] with the real part taken (exact for Hermitian inputs).
pub fn eta_trace(state: &DensityState, metric: &MetricOperator) -> f64 {
    metric.eta.matmul(&state.matrix).trace().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_metric, evolve_normalized, uniform_grid};
    use crate::linalg::{eigenvalues, sigma_x, sigma_y, sigma_z};
    use crate::models::{make_gain_loss, make_general2x2, make_input_state, InputStateParams};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn gain_loss_eta() -> MetricOperator {
        // eta = 1 - 0.8 sigma_y for g = 0.5, gamma = 0.4
        let eta = ComplexMatrix::identity(2).sub(&sigma_y().scale(c(0.8, 0.0)));
        MetricOperator::new(eta, MetricTime::Static).unwrap()
    }

    #[test]
    fn residual_vanishes_for_hermitian_with_identity_metric() {
        let h = sigma_x().scale(c(0.5, 0.0));
        let r = pseudo_hermiticity_residual(&h, &MetricOperator::identity(2)).unwrap();
        assert!(r < 1e-15);
    }

    #[test]
    fn residual_of_gain_loss_with_its_metric() {
        let h = make_gain_loss(0.0, 0.5, 0.4).matrix;
        let r = pseudo_hermiticity_residual(&h, &gain_loss_eta()).unwrap();
        assert!(r <= 1e-13, "residual {r}");
    }

    #[test]
    fn residual_of_gain_loss_with_identity_metric() {
        // ||H - H^dag|| = ||2 i gamma sigma_z|| = 2 gamma sqrt(2)
        let h = make_gain_loss(0.0, 0.5, 0.4).matrix;
        let r = pseudo_hermiticity_residual(&h, &MetricOperator::identity(2)).unwrap();
        let expect = 2.0 * 0.4 * 2.0f64.sqrt() / h.frobenius_norm();
        assert_abs_diff_eq!(r, expect, epsilon = 1e-12);
        assert!(r > 0.0);
    }

    #[test]
    fn biorthogonal_metric_gain_loss_closed_form() {
        let h = make_gain_loss(0.0, 0.5, 0.4).matrix;
        let metric = biorthogonal_metric(&h).unwrap();
        let expect = ComplexMatrix::identity(2).sub(&sigma_y().scale(c(0.8, 0.0)));
        assert!(metric.eta.sub(&expect).frobenius_norm() < 1e-12);
        let (vals, _) = eig_hermitian(&metric.eta);
        assert_abs_diff_eq!(vals[0], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.8, epsilon = 1e-12);
        // vielbein factorization invariant
        let back = metric.vielbein.adjoint().matmul(&metric.vielbein);
        assert!(back.sub(&metric.eta).frobenius_norm() < 1e-12 * metric.eta.frobenius_norm());
    }

    #[test]
    fn biorthogonal_metric_hermitian_limit() {
        let h = make_gain_loss(0.0, 0.5, 1e-12).matrix;
        let metric = biorthogonal_metric(&h).unwrap();
        assert!(metric.eta.sub(&ComplexMatrix::identity(2)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn biorthogonal_metric_rejects_exceptional_point() {
        let h = make_gain_loss(0.0, 0.5, 0.5).matrix;
        assert!(matches!(
            biorthogonal_metric(&h),
            Err(Error::NotQuasiHermitian(_))
        ));
    }

    #[test]
    fn biorthogonal_metric_rejects_complex_spectrum() {
        let h = make_gain_loss(0.0, 0.5, 0.6).matrix;
        assert!(matches!(
            biorthogonal_metric(&h),
            Err(Error::NotQuasiHermitian(_))
        ));
    }

    #[test]
    fn biorthogonal_metric_residual_over_coupling_grid() {
        let gamma = 0.4;
        for k in 0..8 {
            let g = 0.45 + 0.55 * k as f64 / 7.0; // g in (gamma, 1]
            let h = make_gain_loss(0.0, g, gamma).matrix;
            let metric = biorthogonal_metric(&h).unwrap();
            let r = pseudo_hermiticity_residual(&h, &metric).unwrap();
            assert!(r <= 1e-10, "g = {g}: residual {r}");
        }
    }

    #[test]
    fn general_family_metric_matches_sec_tan_form() {
        // For the general 2x2 family the trace-normalized biorthogonal metric
        // is 1 - (s/tau) sigma_y for every phi, i.e. proportional to
        // [[sec a, i tan a], [-i tan a, sec a]] with a = arcsin(s/tau).
        for (s, tau, phi) in [
            (0.3, 0.5, 0.0),
            (0.3, 0.5, 1.2),
            (0.2, 0.9, 2.5),
            (-0.25, 0.6, 0.4),
        ] {
            let h = make_general2x2(0.1, s, tau, phi).matrix;
            let metric = biorthogonal_metric(&h).unwrap();
            let ratio = s / tau;
            let expect = ComplexMatrix::identity(2).sub(&sigma_y().scale(c(ratio, 0.0)));
            assert!(
                metric.eta.sub(&expect).frobenius_norm() < 1e-10,
                "s={s}, tau={tau}, phi={phi}"
            );
            let alpha = ratio.asin();
            let sec_tan = ComplexMatrix::from_2x2(
                c(1.0 / alpha.cos(), 0.0),
                c(0.0, alpha.tan()),
                c(0.0, -alpha.tan()),
                c(1.0 / alpha.cos(), 0.0),
            );
            let rescaled = sec_tan.scale(c(alpha.cos(), 0.0));
            assert!(metric.eta.sub(&rescaled).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn metric_ode_constant_for_hermitian() {
        let h = sigma_x().scale(c(0.5, 0.0));
        let grid = uniform_grid(5.0, 26);
        let traj = solve_metric_ode(&h, &MetricOperator::identity(2), &grid).unwrap();
        for m in &traj.metrics {
            assert!(m.eta.sub(&ComplexMatrix::identity(2)).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn metric_ode_decaying_qubit_closed_form() {
        // decaying-qubit generator (omega - i gamma) sigma_z from the identity initial metric:
        // eta(t) = cosh(2 gamma t) 1 + sinh(2 gamma t) sigma_z
        let gamma = 0.4;
        let h = sigma_z().scale(c(1.0, -gamma));
        let grid = uniform_grid(5.0, 51);
        let traj = solve_metric_ode(&h, &MetricOperator::identity(2), &grid).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let expect = ComplexMatrix::identity(2)
                .scale(c((2.0 * gamma * t).cosh(), 0.0))
                .add(&sigma_z().scale(c((2.0 * gamma * t).sinh(), 0.0)));
            let defect = traj.metrics[k].eta.sub(&expect).frobenius_norm();
            assert!(
                defect < 1e-9 * expect.frobenius_norm(),
                "t = {t}: defect {defect}"
            );
        }
    }

    #[test]
    fn metric_ode_stationary_for_pseudo_hermitian_initial_metric() {
        let h = make_gain_loss(0.0, 0.5, 0.4).matrix;
        let eta0 = biorthogonal_metric(&h).unwrap();
        let grid = uniform_grid(10.0, 51);
        let traj = solve_metric_ode(&h, &eta0, &grid).unwrap();
        for m in &traj.metrics {
            assert!(m.eta.sub(&eta0.eta).frobenius_norm() <= 1e-8);
        }
    }

    #[test]
    fn hermitize_static_gain_loss() {
        // E H E^-1 = [[0, 0.3], [0.3, 0]] at the fig3 parameters
        let h = make_gain_loss(0.0, 0.5, 0.4).matrix;
        let metric = biorthogonal_metric(&h).unwrap();
        let hermitized = hermitize_static(&h, &metric).unwrap();
        let expect = sigma_x().scale(c(0.3, 0.0));
        assert!(hermitized.sub(&expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn hermitize_preserves_spectrum_with_static_metric() {
        for (omega0, g, gamma) in [(0.0, 0.5, 0.4), (0.7, 0.8, 0.3), (0.0, 1.0, 0.9)] {
            let h = make_gain_loss(omega0, g, gamma).matrix;
            let metric = biorthogonal_metric(&h).unwrap();
            let hermitized = hermitize_static(&h, &metric).unwrap();
            let mut a: Vec<f64> = eigenvalues(&h).unwrap().iter().map(|z| z.re).collect();
            let mut b: Vec<f64> = eigenvalues(&hermitized)
                .unwrap()
                .iter()
                .map(|z| z.re)
                .collect();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn hermitize_identity_metric_returns_input() {
        let h = sigma_x().scale(c(0.5, 0.0));
        let out = hermitize_static(&h, &MetricOperator::identity(2)).unwrap();
        assert!(out.sub(&h).frobenius_norm() < 1e-14);
    }

    #[test]
    fn hermitize_time_dependent_decaying_qubit() {
        // (omega - i gamma) sigma_z with eta(t) = exp(2 gamma t sigma_z) must give omega sigma_z
        let omega = 1.0;
        let gamma = 0.4;
        let h = sigma_z().scale(c(omega, -gamma));
        let grid = uniform_grid(2.0, 21);
        let traj = solve_metric_ode(&h, &MetricOperator::identity(2), &grid).unwrap();
        let series = hermitize(&h, &traj).unwrap();
        let expect = sigma_z().scale(c(omega, 0.0));
        for (k, hk) in series.iter().enumerate() {
            let defect = hk.sub(&expect).frobenius_norm();
            assert!(defect < 1e-7, "t = {}: defect {defect}", grid[k]);
            assert!(relative_hermiticity_residual(hk) <= HERMITIZATION_TOLERANCE);
        }
    }

    #[test]
    fn eta_expectation_identity_metric_is_ordinary_average() {
        let rho = make_input_state(&InputStateParams::new(0.6, 0.24).unwrap());
        let val = eta_expectation(&rho, &MetricOperator::identity(2), &sigma_z()).unwrap();
        assert_abs_diff_eq!(val, -0.2, epsilon = 1e-14);
    }

    #[test]
    fn eta_expectation_frame_equivalence() {
        // The eta-weighted average of sigma_z on the tilde-frame state equals
        // the ordinary average on the Hermitized-frame image evolved from
        // E rho0 E^dag (same physical state in both frames).
        let h_tilde = make_gain_loss(0.0, 0.5, 0.4).matrix;
        let metric = biorthogonal_metric(&h_tilde).unwrap();
        let hermitized = hermitize_static(&h_tilde, &metric).unwrap();
        let rho0 = make_input_state(&InputStateParams::new(0.6, 0.24).unwrap());
        let grid = uniform_grid(10.0, 21);

        let tilde = evolve_normalized(&h_tilde, &rho0, &grid).unwrap();
        let mapped0 = metric
            .vielbein
            .matmul(&rho0.matrix)
            .matmul(&metric.vielbein.adjoint());
        let w0 = mapped0.trace();
        let mapped0 = DensityState::standard(mapped0.scale(Complex64::ONE / w0), 0.0).unwrap();
        let hermitized_traj = evolve_metric(&hermitized, &mapped0, &grid).unwrap();

        for i in 0..grid.len() {
            let lhs = eta_expectation(&tilde.states[i], &metric, &sigma_z()).unwrap();
            let rhs = hermitized_traj.states[i]
                .matrix
                .matmul(&sigma_z())
                .trace()
                .re;
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
        }
    }

    #[test]
    fn eta_trace_conserved_static_example() {
        // Tr[eta rho~(t)] = 1 for all t on the gain-loss example
        let h = make_gain_loss(0.0, 0.5, 0.4).matrix;
        let metric = biorthogonal_metric(&h).unwrap();
        let rho0 = make_input_state(&InputStateParams::new(0.6, 0.24).unwrap());
        let grid = uniform_grid(20.0, 201);
        let traj = evolve_normalized(&h, &rho0, &grid).unwrap();
        for i in 0..grid.len() {
            // reconstruct the raw tilde state from the stored normalized one
            let raw = traj.states[i].matrix.scale(c(traj.raw_traces[i], 0.0));
            let raw_state = DensityState {
                matrix: raw,
                ..traj.states[i].clone()
            };
            let w = eta_trace(&raw_state, &metric);
            assert_abs_diff_eq!(w, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn eta_trace_conserved_time_dependent_example() {
        // decaying qubit: metric trajectory from the ODE paired with the
        // tilde-frame propagation keeps Tr[eta(t) rho~(t)] = 1 on [0, 20]
        let gamma = 0.4;
        let h = sigma_z().scale(c(1.0, -gamma));
        let rho0 = make_input_state(&InputStateParams::new(0.4, 0.24).unwrap());
        let grid = uniform_grid(20.0, 201);
        let metric_traj = solve_metric_ode(&h, &MetricOperator::identity(2), &grid).unwrap();
        let state_traj = evolve_normalized(&h, &rho0, &grid).unwrap();
        for i in 0..grid.len() {
            let raw = state_traj.states[i]
                .matrix
                .scale(c(state_traj.raw_traces[i], 0.0));
            let raw_state = DensityState {
                matrix: raw,
                ..state_traj.states[i].clone()
            };
            let w = eta_trace(&raw_state, &metric_traj.metrics[i]);
            assert_abs_diff_eq!(w, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn eta_expectation_rejects_non_positive_weight() {
        // a traceless "state" has zero eta-trace under the identity metric
        let rho = DensityState {
            matrix: sigma_z(),
            convention: crate::dynamics::TraceConvention::Standard,
            time: 0.0,
        };
        assert!(matches!(
            eta_expectation(&rho, &MetricOperator::identity(2), &sigma_x()),
            Err(Error::InvalidMetricTrace(_))
        ));
    }

    #[test]
    fn metric_operator_rejects_bad_eta() {
        let not_pd = ComplexMatrix::diag(&[c(1.0, 0.0), c(-0.5, 0.0)]);
        assert!(MetricOperator::new(not_pd, MetricTime::Static).is_err());
    }
}
