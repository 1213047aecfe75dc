//! Expectation values under each formalism, the decaying-qubit closed-form
//! observable coefficients, and Bloch-vector extraction.
//!
//! Sign convention: basis index 0 is the first row of the input-state family
//! [[1-theta, x], [x, theta]], so bloch_z = Tr[rho sigma_z] = 1 - 2 theta;
//! the (theta, x) = (0.6, 0.24) state sits at Bloch vector (0.48, 0, -0.2).
//!
//! The closed-form coefficient alpha_1 below takes the sign for which the
//! coefficient expressions reproduce the direct trace of the propagated
//! state and its long-time limit `<A>_norm -> -a_3`; the opposite sign is
//! sometimes seen but contradicts both. The metric-frame a_1 coefficient is
//! kept in its commonly stated `2x [1 - cos(2 omega t)]` form even though
//! direct computation of the rotating state gives `2x cos(2 omega t)`; the
//! two agree wherever x = 0, which is where the validation layer compares
//! them.

use crate::dynamics::StateTrajectory;
use crate::error::{Error, Result};
use crate::linalg::{c, pauli, tol, ComplexMatrix};
use crate::metric::{eta_expectation, MetricTrajectory};

/// Which probability-conserving treatment produced a trajectory or series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formalism {
    /// Hermitized-frame unitary dynamics.
    Metric,
    /// Trace-normalized non-Hermitian propagation.
    Norm,
    /// No-jump conditional evolution (normalized under H_eff).
    Nj,
    /// Full master equation.
    Me,
}

impl Formalism {
    pub fn label(&self) -> &'static str {
        match self {
            Formalism::Metric => "metric",
            Formalism::Norm => "norm",
            Formalism::Nj => "nj",
            Formalism::Me => "me",
        }
    }
}

/// Observable in the Pauli basis, A = sum_l a_l sigma_l with real a_l.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observable {
    pub coefficients: [f64; 4],
}

impl Observable {
    pub fn new(coefficients: [f64; 4]) -> Self {
        Self { coefficients }
    }

    /// Decompose a Hermitian matrix: a_l = Tr[A sigma_l]/2.
    pub fn from_matrix(a: &ComplexMatrix) -> Result<Self> {
        if a.dim() != 2 {
            return Err(Error::InvalidInput("observable must be 2x2".into()));
        }
        if !a.is_hermitian(tol::HERMITICITY) {
            return Err(Error::ContractViolation(
                "observable must be Hermitian".into(),
            ));
        }
        let mut coefficients = [0.0; 4];
        for (l, slot) in coefficients.iter_mut().enumerate() {
            *slot = a.matmul(&pauli(l)).trace().re / 2.0;
        }
        Ok(Self { coefficients })
    }

    /// Reassemble the (exactly Hermitian) matrix.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2);
        for (l, &a) in self.coefficients.iter().enumerate() {
            m = m.add(&pauli(l).scale(c(a, 0.0)));
        }
        m
    }

    pub fn sigma_z() -> Self {
        Self::new([0.0, 0.0, 0.0, 1.0])
    }
}

/// Expectation-value series of an observable along a trajectory.
///
/// * `Metric` with `eta_traj` present treats the trajectory as tilde-frame
///   data and applies the eta-weighted average (static metrics are reused at
///   every time; time-dependent trajectories must share the grid).
/// * `Metric` without `eta_traj` expects a Hermitized-frame trajectory and
///   reduces to the plain trace.
/// * `Norm`/`Nj` divide by the stored trace (unity for normalized storage).
/// * `Me` is the plain trace.
pub fn expect(
    formalism: Formalism,
    traj: &StateTrajectory,
    observable: &Observable,
    eta_traj: Option<&MetricTrajectory>,
) -> Result<Vec<f64>> {
    let a = observable.to_matrix();
    let mut out = Vec::with_capacity(traj.len());
    match formalism {
        Formalism::Metric => match eta_traj {
            Some(metrics) => {
                if !metrics.is_static() && metrics.grid.len() != traj.grid.len() {
                    return Err(Error::InvalidInput(
                        "metric trajectory grid does not match state grid".into(),
                    ));
                }
                for (i, state) in traj.states.iter().enumerate() {
                    let metric = if metrics.is_static() {
                        &metrics.metrics[0]
                    } else {
                        &metrics.metrics[i]
                    };
                    out.push(eta_expectation(state, metric, &a)?);
                }
            }
            None => {
                // A trajectory whose raw traces deviate from unity came from
                // the trace non-preserving propagator and needs its metric.
                if traj.raw_traces.iter().any(|&w| (w - 1.0).abs() > 1e-12) {
                    return Err(Error::MetricInvalid(
                        "tilde-frame trajectory requires a metric trajectory".into(),
                    ));
                }
                for state in &traj.states {
                    out.push(state.matrix.matmul(&a).trace().re);
                }
            }
        },
        Formalism::Norm | Formalism::Nj => {
            for state in &traj.states {
                let trace = state.matrix.trace().re;
                if trace.abs() < 1e-14 {
                    return Err(Error::InvalidMetricTrace(trace));
                }
                out.push(state.matrix.matmul(&a).trace().re / trace);
            }
        }
        Formalism::Me => {
            for state in &traj.states {
                out.push(state.matrix.matmul(&a).trace().re);
            }
        }
    }
    Ok(out)
}

/// Closed-form expectation triple (metric, norm, me) for the decaying qubit.
///
/// `<A>_metric = (1 - 2 theta) a3 + 2x [1 - cos(2 omega t)] a1`
/// `            + 2x sin(2 omega t) a2` (a1 form discussed in module docs),
/// `<A>_norm = alpha0 <A>_metric + alpha1 a3`,
/// `<A>_me = beta0 <A>_norm + beta1 a3`.
pub fn closed_form_expectations(
    observable: &Observable,
    theta: f64,
    x: f64,
    omega: f64,
    gamma: f64,
    t: f64,
) -> (f64, f64, f64) {
    let [_, a1, a2, a3] = observable.coefficients;
    let metric = (1.0 - 2.0 * theta) * a3
        + 2.0 * x * (1.0 - (2.0 * omega * t).cos()) * a1
        + 2.0 * x * (2.0 * omega * t).sin() * a2;
    let e2 = (2.0 * gamma * t).exp();
    let e4 = (4.0 * gamma * t).exp();
    let denom = theta * (e4 - 1.0) + 1.0;
    let alpha0 = e2 / denom;
    // sign choice discussed in the module docs
    let alpha1 = -(e2 - 1.0) * (theta * (e2 - 1.0) + 1.0) / denom;
    let norm = alpha0 * metric + alpha1 * a3;
    let beta0 = theta + (1.0 - theta) * (-4.0 * gamma * t).exp();
    let beta1 = -(1.0 - theta) * (1.0 - (-4.0 * gamma * t).exp());
    let me = beta0 * norm + beta1 * a3;
    (metric, norm, me)
}

/// Bloch vector (Tr[rho sigma_x], Tr[rho sigma_y], Tr[rho sigma_z]).
pub fn bloch_vector(rho: &ComplexMatrix) -> (f64, f64, f64) {
    (
        (rho[(0, 1)] + rho[(1, 0)]).re,
        ((rho[(0, 1)] - rho[(1, 0)]) * c(0.0, 1.0)).re,
        (rho[(0, 0)] - rho[(1, 1)]).re,
    )
}
