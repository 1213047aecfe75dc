//! The three propagators (Hermitized unitary, trace-normalized,
//! Lindblad), the Liouvillian steady state, and the single-step quantum-jump
//! Kraus decomposition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c, eig_hermitian, mat_exp, null_space, tol, unitary_from_hermitian, ComplexMatrix,
};
use crate::models::{effective_hamiltonian, OpenModel};

/// Trace convention a density state is carried in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceConvention {
    /// Tr rho = 1 with the standard inner product.
    Standard,
    /// Unit trace with respect to a metric eta.
    EtaWeighted,
}

/// A density matrix tagged with its trace convention and a time label.
#[derive(Debug, Clone)]
pub struct DensityState {
    pub matrix: ComplexMatrix,
    pub convention: TraceConvention,
    pub time: f64,
}

impl DensityState {
    /// Standard-convention state with validation: Hermitian within 1e-12,
    /// trace 1 within 1e-10, eigenvalues >= -1e-10.
    pub fn standard(matrix: ComplexMatrix, time: f64) -> Result<Self> {
        if !matrix.is_hermitian(tol::HERMITICITY) {
            return Err(Error::ContractViolation(format!(
                "density matrix not Hermitian: defect {:.3e}",
                matrix.hermiticity_defect()
            )));
        }
        let trace = matrix.trace();
        if (trace - Complex64::ONE).norm() > 1e-10 {
            return Err(Error::ContractViolation(format!(
                "density matrix trace {trace} differs from 1"
            )));
        }
        let (vals, _) = eig_hermitian(&matrix);
        if vals.iter().any(|&v| v < -1e-10) {
            return Err(Error::ContractViolation(format!(
                "density matrix has negative eigenvalue {:.3e}",
                vals[0]
            )));
        }
        Ok(Self {
            matrix,
            convention: TraceConvention::Standard,
            time,
        })
    }

    /// Standard-convention state without the validation pass; the matrix is
    /// still re-Hermitized. For internal propagation loops where the
    /// invariants hold by construction.
    pub fn standard_unchecked(matrix: ComplexMatrix, time: f64) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
            convention: TraceConvention::Standard,
            time,
        }
    }

    /// Eigenvalues of the state, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.matrix).0
    }

    /// det rho (real for Hermitian input).
    pub fn det(&self) -> f64 {
        self.matrix.det().re
    }
}

/// A state history on a strictly increasing time grid. `raw_traces` records
/// Tr[rho~(t)] where the propagator is trace non-preserving; unitary and
/// Lindblad histories carry 1.0 throughout.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub grid: Vec<f64>,
    pub states: Vec<DensityState>,
    pub raw_traces: Vec<f64>,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// Uniform grid of `points` times on [0, t_max].
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![0.0];
    }
    let dt = t_max / (points - 1) as f64;
    (0..points).map(|k| k as f64 * dt).collect()
}

/// Default trajectory grid: 2001 points on [0, 20].
pub fn default_grid() -> Vec<f64> {
    uniform_grid(20.0, 2001)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid not strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Unitary evolution rho(t) = e^{-i h t} rho0 e^{i h t} under a Hermitian h.
pub fn evolve_metric(
    h: &ComplexMatrix,
    rho0: &DensityState,
    grid: &[f64],
) -> Result<StateTrajectory> {
    if !h.is_hermitian(1e-9) {
        return Err(Error::ContractViolation(format!(
            "evolve_metric requires Hermitian h, defect {:.3e}",
            h.hermiticity_defect()
        )));
    }
    check_grid(grid)?;
    let mut states = Vec::with_capacity(grid.len());
    for &t in grid {
        let u = unitary_from_hermitian(h, t - rho0.time);
        let rho = u.matmul(&rho0.matrix).matmul(&u.adjoint());
        states.push(DensityState::standard_unchecked(rho, t));
    }
    Ok(StateTrajectory {
        grid: grid.to_vec(),
        states,
        raw_traces: vec![1.0; grid.len()],
    })
}

/// Trace floor below which the normalization propagator fails loudly.
pub const TRACE_FLOOR: f64 = 1e-12;

/// Trace-normalized evolution: rho~(t) = e^{-i H~ t} rho0 e^{i H~^dag t},
/// stored as rho~/Tr[rho~] with the raw traces recorded.
pub fn evolve_normalized(
    h_tilde: &ComplexMatrix,
    rho0: &DensityState,
    grid: &[f64],
) -> Result<StateTrajectory> {
    check_grid(grid)?;
    let mut states = Vec::with_capacity(grid.len());
    let mut raw_traces = Vec::with_capacity(grid.len());
    for &t in grid {
        let propagator = mat_exp(&h_tilde.scale(c(0.0, -(t - rho0.time))))?;
        let raw = propagator
            .matmul(&rho0.matrix)
            .matmul(&propagator.adjoint());
        let trace = raw.trace().re;
        if trace <= TRACE_FLOOR {
            return Err(Error::NormCollapse { time: t, trace });
        }
        states.push(DensityState::standard_unchecked(
            raw.scale(c(1.0 / trace, 0.0)),
            t,
        ));
        raw_traces.push(trace);
    }
    Ok(StateTrajectory {
        grid: grid.to_vec(),
        states,
        raw_traces,
    })
}

/// Maximum finite-difference residual of the nonlinear equation of motion
/// obeyed by the trace-normalized state,
/// d rho/dt = -i [H_H, rho] - ({H_S, rho} - 2 Tr[rho H_S] rho),
/// where H~ = H_H - i H_S splits into Hermitian and skew parts.
pub fn nonlinear_eom_residual(h_tilde: &ComplexMatrix, traj: &StateTrajectory) -> f64 {
    let h_h = h_tilde.add(&h_tilde.adjoint()).scale(c(0.5, 0.0));
    let h_s = h_tilde.sub(&h_tilde.adjoint()).scale(c(0.0, 0.5));
    let mut worst = 0.0f64;
    for i in 1..traj.len().saturating_sub(1) {
        let rho = &traj.states[i].matrix;
        let dt = traj.grid[i + 1] - traj.grid[i - 1];
        let drho = traj.states[i + 1]
            .matrix
            .sub(&traj.states[i - 1].matrix)
            .scale(c(1.0 / dt, 0.0));
        let comm = h_h.matmul(rho).sub(&rho.matmul(&h_h));
        let anti = h_s.matmul(rho).add(&rho.matmul(&h_s));
        let feed = rho.scale(rho.matmul(&h_s).trace() * 2.0);
        let rhs = comm.scale(c(0.0, -1.0)).sub(&anti).add(&feed);
        worst = worst.max(drho.sub(&rhs).frobenius_norm());
    }
    worst
}

/// Build the vectorized Liouvillian of an open model, acting on row-major
/// vec(rho):
/// L = -i (H x 1 - 1 x H^T)
///   + sum_l [ G x conj(G) - 1/2 (G^dag G x 1 + 1 x (G^dag G)^T) ].
pub fn liouvillian_matrix(m: &OpenModel) -> ComplexMatrix {
    let n = m.hamiltonian.dim();
    let id = ComplexMatrix::identity(n);
    let mut l = m
        .hamiltonian
        .kron(&id)
        .sub(&id.kron(&m.hamiltonian.transpose()))
        .scale(c(0.0, -1.0));
    for jump in &m.jump_operators {
        let gg = jump.adjoint().matmul(jump);
        l = l
            .add(&jump.kron(&jump.conj()))
            .sub(&gg.kron(&id).scale(c(0.5, 0.0)))
            .sub(&id.kron(&gg.transpose()).scale(c(0.5, 0.0)));
    }
    l
}

fn unvec(dim: usize, v: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_vec(dim, v.to_vec()).expect("vectorized state has dim^2 entries")
}

/// Lindblad evolution by exponentiating the vectorized Liouvillian once per
/// distinct step of the grid. Trace preservation is enforced to 1e-10 and
/// positivity is monitored (eigenvalues below -1e-8 abort; nothing is
/// clipped for computation).
pub fn evolve_lindblad(
    m: &OpenModel,
    rho0: &DensityState,
    grid: &[f64],
) -> Result<StateTrajectory> {
    if rho0.convention != TraceConvention::Standard {
        return Err(Error::ContractViolation(
            "evolve_lindblad requires a standard-convention state".into(),
        ));
    }
    check_grid(grid)?;
    let n = rho0.matrix.dim();
    let liouville = liouvillian_matrix(m);
    // propagators cached per distinct step size
    let mut cache: Vec<(f64, ComplexMatrix)> = Vec::new();
    let mut states = Vec::with_capacity(grid.len());
    let mut v: Vec<Complex64> = rho0.matrix.entries().to_vec();
    let mut prev_t = rho0.time;
    for &t in grid {
        let dt = t - prev_t;
        if dt > 0.0 {
            let step = match cache
                .iter()
                .find(|(d, _)| (d - dt).abs() <= 1e-12 * dt.max(1.0))
            {
                Some((_, p)) => p.clone(),
                None => {
                    let p = mat_exp(&liouville.scale(c(dt, 0.0)))?;
                    cache.push((dt, p.clone()));
                    p
                }
            };
            v = step.matvec(&v);
        }
        prev_t = t;
        let rho = unvec(n, &v).hermitian_part();
        let trace = rho.trace().re;
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::IntegratorFailure(format!(
                "trace drifted to {trace} at t = {t}"
            )));
        }
        let (vals, _) = eig_hermitian(&rho);
        if vals.iter().any(|&x| x < -1e-8) {
            return Err(Error::IntegratorFailure(format!(
                "negative eigenvalue {:.3e} at t = {t}",
                vals[0]
            )));
        }
        states.push(DensityState::standard_unchecked(rho, t));
    }
    Ok(StateTrajectory {
        grid: grid.to_vec(),
        states,
        raw_traces: vec![1.0; grid.len()],
    })
}

/// Fixed-step fourth-order Runge-Kutta integration of the master equation;
/// cross-check for [`evolve_lindblad`].
pub fn evolve_lindblad_rk4(
    m: &OpenModel,
    rho0: &DensityState,
    grid: &[f64],
    substeps: usize,
) -> Result<StateTrajectory> {
    check_grid(grid)?;
    let rhs = |rho: &ComplexMatrix| -> ComplexMatrix {
        let mut out = m
            .hamiltonian
            .matmul(rho)
            .sub(&rho.matmul(&m.hamiltonian))
            .scale(c(0.0, -1.0));
        for jump in &m.jump_operators {
            let gg = jump.adjoint().matmul(jump);
            out = out
                .add(&jump.matmul(rho).matmul(&jump.adjoint()))
                .sub(&gg.matmul(rho).scale(c(0.5, 0.0)))
                .sub(&rho.matmul(&gg).scale(c(0.5, 0.0)));
        }
        out
    };
    let mut states = Vec::with_capacity(grid.len());
    let mut rho = rho0.matrix.clone();
    let mut prev_t = rho0.time;
    for &t in grid {
        let span = t - prev_t;
        if span > 0.0 {
            let steps = substeps.max(1);
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(&rho);
                let k2 = rhs(&rho.add(&k1.scale(c(h / 2.0, 0.0))));
                let k3 = rhs(&rho.add(&k2.scale(c(h / 2.0, 0.0))));
                let k4 = rhs(&rho.add(&k3.scale(c(h, 0.0))));
                let incr = k1
                    .add(&k2.scale(c(2.0, 0.0)))
                    .add(&k3.scale(c(2.0, 0.0)))
                    .add(&k4)
                    .scale(c(h / 6.0, 0.0));
                rho = rho.add(&incr);
            }
        }
        prev_t = t;
        states.push(DensityState::standard_unchecked(rho.clone(), t));
    }
    Ok(StateTrajectory {
        grid: grid.to_vec(),
        states,
        raw_traces: vec![1.0; grid.len()],
    })
}

/// Unique steady state from the one-dimensional kernel of the Liouvillian.
pub fn steady_state(m: &OpenModel) -> Result<DensityState> {
    let n = m.hamiltonian.dim();
    let liouville = liouvillian_matrix(m);
    let kernel = null_space(&liouville, tol::NULL_SPACE);
    if kernel.len() != 1 {
        return Err(Error::NonUniqueSteadyState(kernel.len()));
    }
    let raw = unvec(n, &kernel[0]).hermitian_part();
    let trace = raw.trace();
    if trace.norm() < 1e-10 {
        return Err(Error::NonUniqueSteadyState(0));
    }
    let rho = raw.scale(Complex64::ONE / trace);
    DensityState::standard(rho.hermitian_part(), f64::INFINITY)
}

/// One-step Kraus operators of the jump decomposition: M0 = e^{-i H_eff dt}
/// (exponential form) and M_l = Gamma_l sqrt(dt).
#[derive(Debug, Clone)]
pub struct KrausStep {
    pub dt: f64,
    pub m0: ComplexMatrix,
    pub jumps: Vec<ComplexMatrix>,
}

impl KrausStep {
    /// || sum_l M_l^dag M_l - 1 ||_F; O(dt^2) by the completeness relation.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.m0.dim();
        let mut acc = self.m0.adjoint().matmul(&self.m0);
        for m in &self.jumps {
            acc = acc.add(&m.adjoint().matmul(m));
        }
        acc.sub(&ComplexMatrix::identity(n)).frobenius_norm()
    }
}

pub fn jump_step_operators(m: &OpenModel, dt: f64) -> Result<KrausStep> {
    if dt <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let heff = effective_hamiltonian(m);
    let m0 = mat_exp(&heff.scale(c(0.0, -dt)))?;
    let jumps = m
        .jump_operators
        .iter()
        .map(|g| g.scale(c(dt.sqrt(), 0.0)))
        .collect();
    Ok(KrausStep { dt, m0, jumps })
}

/// Probability floor below which a jump branch is dropped (and counted).
pub const BRANCH_FLOOR: f64 = 1e-14;

/// The master-equation step written as a probabilistic mixture of conditional
/// states: no-jump branch plus one branch per jump operator.
#[derive(Debug, Clone)]
pub struct ConditionalDecomposition {
    pub p0: f64,
    pub rho_nj: DensityState,
    pub branches: Vec<(f64, DensityState)>,
    /// Number of branches dropped for having probability <= BRANCH_FLOOR.
    pub dropped: usize,
}

impl ConditionalDecomposition {
    pub fn probability_sum(&self) -> f64 {
        self.p0 + self.branches.iter().map(|(p, _)| p).sum::<f64>()
    }
}

pub fn conditional_split(k: &KrausStep, rho: &DensityState) -> Result<ConditionalDecomposition> {
    if rho.convention != TraceConvention::Standard {
        return Err(Error::ContractViolation(
            "conditional_split requires a standard-convention state".into(),
        ));
    }
    let t_next = rho.time + k.dt;
    let nj_raw = k.m0.matmul(&rho.matrix).matmul(&k.m0.adjoint());
    let p0 = nj_raw.trace().re;
    if p0 <= 0.0 {
        return Err(Error::DegenerateStep(p0));
    }
    let rho_nj = DensityState::standard_unchecked(nj_raw.scale(c(1.0 / p0, 0.0)), t_next);
    let mut branches = Vec::new();
    let mut dropped = 0usize;
    for m in &k.jumps {
        let raw = m.matmul(&rho.matrix).matmul(&m.adjoint());
        let p = raw.trace().re;
        if p <= BRANCH_FLOOR {
            dropped += 1;
            continue;
        }
        branches.push((
            p,
            DensityState::standard_unchecked(raw.scale(c(1.0 / p, 0.0)), t_next),
        ));
    }
    Ok(ConditionalDecomposition {
        p0,
        rho_nj,
        branches,
        dropped,
    })
}

/// Reassemble p0 rho_nj + sum_l p_l rho_l; matches one Lindblad step to
/// O(dt^2).
pub fn reconstruct_step(d: &ConditionalDecomposition) -> DensityState {
    let mut acc = d.rho_nj.matrix.scale(c(d.p0, 0.0));
    for (p, rho) in &d.branches {
        acc = acc.add(&rho.matrix.scale(c(*p, 0.0)));
    }
    DensityState::standard_unchecked(acc, d.rho_nj.time)
}
