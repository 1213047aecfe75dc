//! Fisher-information engine: SLD-based QFI, the mixed-qubit closed form,
//! classical Fisher information for a POVM, numerical parameter derivatives
//! of the encode-evolve pipeline, and a catalog of closed-form reference
//! expressions.
//!
//! The catalog evaluates each reference expression exactly as stated; the
//! test suite compares them against numerics and reports mismatches with
//! their magnitude instead of silently correcting them. Two catalog entries
//! are deliberate variants kept for comparison: the gain-loss
//! normalization-formalism QFI with an unsquared trace denominator
//! ([`Formula::GainLossNormUnsquared`]), inconsistent with the trace-scaling
//! relation F_norm = F_metric / Tr[rho~]^2 that the numerics confirm
//! ([`Formula::GainLossNormScaled`]); and a decaying-qubit master-equation
//! QFI carrying e^{2 gamma t} factors ([`Formula::DecayMeHalfRate`]), i.e. a
//! relaxation rate a factor two weaker than the 4 gamma dissipator, which is
//! therefore exact at t = 0 and qualitatively right (monotone decay to zero)
//! but not pointwise.

use num_complex::Complex64;

use crate::dynamics::{evolve_lindblad, evolve_metric, evolve_normalized, DensityState};
use crate::error::{Error, Result};
use crate::linalg::{c, eig_hermitian, tol, ComplexMatrix};
use crate::models::{make_input_state, InputStateParams, OpenModel};
use crate::observables::Formalism;

/// How a QFI value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Numeric,
    ClosedForm,
}

/// Symmetric real QFI matrix indexed by named parameters.
#[derive(Debug, Clone)]
pub struct QfiMatrix {
    param_names: Vec<String>,
    entries: Vec<f64>,
    pub provenance: Provenance,
}

impl QfiMatrix {
    /// Validates symmetry (1e-10), non-negative diagonal (-1e-10 slack) and
    /// positive semidefiniteness (-1e-8 slack).
    pub fn new(
        param_names: Vec<String>,
        entries: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = param_names.len();
        if entries.len() != n * n {
            return Err(Error::InvalidInput("QFI matrix size mismatch".into()));
        }
        let scale = entries.iter().map(|v| v.abs()).fold(1.0f64, f64::max);
        for i in 0..n {
            if entries[i * n + i] < -1e-10 {
                return Err(Error::ContractViolation(format!(
                    "negative QFI diagonal {}",
                    entries[i * n + i]
                )));
            }
            for j in 0..n {
                if (entries[i * n + j] - entries[j * n + i]).abs() > 1e-10 * scale {
                    return Err(Error::ContractViolation("QFI matrix not symmetric".into()));
                }
            }
        }
        let as_complex = ComplexMatrix::from_vec(n, entries.iter().map(|&v| c(v, 0.0)).collect())?;
        let (vals, _) = eig_hermitian(&as_complex);
        if vals.iter().any(|&v| v < -1e-8 * scale) {
            return Err(Error::ContractViolation(format!(
                "QFI matrix not positive semidefinite: eigenvalue {:.3e}",
                vals[0]
            )));
        }
        Ok(Self {
            param_names,
            entries,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.param_names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.param_names
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.param_names.len() + j]
    }

    pub fn by_name(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.param_names.iter().position(|n| n == a)?;
        let j = self.param_names.iter().position(|n| n == b)?;
        Some(self.get(i, j))
    }
}

/// Positive-operator-valued measure: effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::InvalidInput("POVM needs at least one effect".into()));
        }
        let n = effects[0].dim();
        let mut sum = ComplexMatrix::zeros(n);
        for e in &effects {
            if !e.is_hermitian(tol::HERMITICITY) {
                return Err(Error::ContractViolation("POVM effect not Hermitian".into()));
            }
            let (vals, _) = eig_hermitian(e);
            if vals.iter().any(|&v| v < -1e-10) {
                return Err(Error::ContractViolation("POVM effect not PSD".into()));
            }
            sum = sum.add(e);
        }
        if sum.sub(&ComplexMatrix::identity(n)).frobenius_norm() > 1e-12 * (n as f64) {
            return Err(Error::ContractViolation(
                "POVM effects do not sum to identity".into(),
            ));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }
}

/// The theta-independent evolution applied after encoding parameters onto the
/// initial state.
#[derive(Debug, Clone)]
pub enum Channel {
    /// Unitary evolution under a Hermitized Hamiltonian.
    Metric(ComplexMatrix),
    /// Trace-normalized evolution under a non-Hermitian Hamiltonian.
    Normalized(ComplexMatrix),
    /// Full Lindblad evolution of an open model.
    Lindblad(OpenModel),
}

impl Channel {
    pub fn formalism(&self) -> Formalism {
        match self {
            Channel::Metric(_) => Formalism::Metric,
            Channel::Normalized(_) => Formalism::Norm,
            Channel::Lindblad(_) => Formalism::Me,
        }
    }
}

/// Encode-evolve pipeline: state parameters in, evolved state at `time` out.
#[derive(Debug, Clone)]
pub struct ParamPipeline {
    pub channel: Channel,
    pub time: f64,
}

impl ParamPipeline {
    pub fn state_at(&self, p: &InputStateParams) -> Result<DensityState> {
        let rho0 = make_input_state(p);
        let grid = [self.time];
        let traj = match &self.channel {
            Channel::Metric(h) => evolve_metric(h, &rho0, &grid)?,
            Channel::Normalized(h) => evolve_normalized(h, &rho0, &grid)?,
            Channel::Lindblad(m) => evolve_lindblad(m, &rho0, &grid)?,
        };
        Ok(traj.states.into_iter().next().expect("single-point grid"))
    }
}

/// State parameter selected for differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateParam {
    Theta,
    X,
}

/// Default finite-difference step for a parameter value.
pub fn default_fd_step(value: f64) -> f64 {
    1e-5 * value.abs().max(1.0)
}

fn shifted(p: &InputStateParams, which: StateParam, delta: f64) -> Result<InputStateParams> {
    match which {
        StateParam::Theta => InputStateParams::new(p.theta() + delta, p.x()),
        StateParam::X => InputStateParams::new(p.theta(), p.x() + delta),
    }
}

/// Largest step h such that both p +- h stay inside the physical domain.
fn max_feasible_step(p: &InputStateParams, which: StateParam, start: f64) -> f64 {
    let mut h = start;
    for _ in 0..60 {
        if shifted(p, which, h).is_ok() && shifted(p, which, -h).is_ok() {
            return h;
        }
        h /= 2.0;
    }
    0.0
}

/// Symmetric-difference derivative of the full encode-evolve pipeline with
/// one Richardson extrapolation level (steps h and h/2); the result is
/// re-Hermitized. Fails with the largest feasible step when p +- h would
/// leave the physical domain.
pub fn param_derivative(
    pipeline: &ParamPipeline,
    p: &InputStateParams,
    which: StateParam,
    step: f64,
) -> Result<ComplexMatrix> {
    if step <= 0.0 {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    if shifted(p, which, step).is_err() || shifted(p, which, -step).is_err() {
        return Err(Error::StepAdjustment {
            max_step: max_feasible_step(p, which, step),
        });
    }
    let diff_at = |h: f64| -> Result<ComplexMatrix> {
        let plus = pipeline.state_at(&shifted(p, which, h)?)?;
        let minus = pipeline.state_at(&shifted(p, which, -h)?)?;
        Ok(plus.matrix.sub(&minus.matrix).scale(c(0.5 / h, 0.0)))
    };
    let coarse = diff_at(step)?;
    let fine = diff_at(step / 2.0)?;
    let extrapolated = fine
        .scale(c(4.0 / 3.0, 0.0))
        .sub(&coarse.scale(c(1.0 / 3.0, 0.0)));
    Ok(extrapolated.hermitian_part())
}

/// Eigenvalue-pair floor of the SLD sum.
pub const SLD_EIGENVALUE_FLOOR: f64 = 1e-12;

fn check_derivative(d: &ComplexMatrix) -> Result<()> {
    if !d.is_hermitian(tol::HERMITICITY * 100.0) {
        return Err(Error::ContractViolation(format!(
            "state derivative not Hermitian: defect {:.3e}",
            d.hermiticity_defect()
        )));
    }
    if d.trace().norm() > 1e-10 * d.frobenius_norm().max(1.0) {
        return Err(Error::ContractViolation(format!(
            "state derivative not traceless: trace {}",
            d.trace()
        )));
    }
    Ok(())
}

/// QFI matrix from the symmetric logarithmic derivative eigen-sum:
/// F_ij = sum_{m,n: lm+ln > eps} 2 Re[<m|d_i|n><n|d_j|m>] / (lm + ln).
pub fn sld_qfi(rho: &DensityState, derivatives: &[(String, ComplexMatrix)]) -> Result<QfiMatrix> {
    for (_, d) in derivatives {
        check_derivative(d)?;
    }
    let (vals, vecs) = eig_hermitian(&rho.matrix);
    let n = rho.matrix.dim();
    let k = derivatives.len();
    // matrix elements <m|d|n> for every derivative
    let mut elems: Vec<ComplexMatrix> = Vec::with_capacity(k);
    for (_, d) in derivatives {
        let mut e = ComplexMatrix::zeros(n);
        for m in 0..n {
            for nn in 0..n {
                let mut acc = Complex64::ZERO;
                for a in 0..n {
                    for b in 0..n {
                        acc += vecs[(a, m)].conj() * d[(a, b)] * vecs[(b, nn)];
                    }
                }
                e[(m, nn)] = acc;
            }
        }
        elems.push(e);
    }
    let mut entries = vec![0.0f64; k * k];
    for i in 0..k {
        for j in i..k {
            let mut f = 0.0;
            for m in 0..n {
                for nn in 0..n {
                    let denom = vals[m] + vals[nn];
                    if denom > SLD_EIGENVALUE_FLOOR {
                        f += 2.0 * (elems[i][(m, nn)] * elems[j][(nn, m)]).re / denom;
                    }
                }
            }
            entries[i * k + j] = f;
            entries[j * k + i] = f;
        }
    }
    QfiMatrix::new(
        derivatives.iter().map(|(name, _)| name.clone()).collect(),
        entries,
        Provenance::Numeric,
    )
}

/// Single-parameter convenience wrapper around [`sld_qfi`].
pub fn sld_qfi_scalar(rho: &DensityState, derivative: &ComplexMatrix) -> Result<f64> {
    let m = sld_qfi(rho, &[("p".to_string(), derivative.clone())])?;
    Ok(m.get(0, 0))
}

/// Mixed-qubit closed form:
/// F_ij = Tr[d_i d_j] + Tr[rho d_i rho d_j] / det(rho).
pub fn qubit_qfi_closed(
    rho: &DensityState,
    d_i: &ComplexMatrix,
    d_j: &ComplexMatrix,
) -> Result<f64> {
    if rho.matrix.dim() != 2 {
        return Err(Error::InvalidInput(
            "mixed-qubit closed form needs dim 2".into(),
        ));
    }
    let det = rho.det();
    if det <= 1e-12 {
        return Err(Error::PureStateLimit(det));
    }
    let first = d_i.matmul(d_j).trace().re;
    let second = rho
        .matrix
        .matmul(d_i)
        .matmul(&rho.matrix)
        .matmul(d_j)
        .trace()
        .re;
    Ok(first + second / det)
}

/// Purity threshold rerouting the closed form to the eigen-sum.
pub const PURITY_SWITCH: f64 = 1e-10;

/// Scalar QFI with the purity switch: mixed states use the closed form,
/// near-pure states fall back to the SLD eigen-sum.
pub fn qfi_from_state(rho: &DensityState, derivative: &ComplexMatrix) -> Result<f64> {
    if rho.matrix.dim() == 2 && rho.det() >= PURITY_SWITCH {
        qubit_qfi_closed(rho, derivative, derivative)
    } else {
        sld_qfi_scalar(rho, derivative)
    }
}

/// Classical Fisher information of a POVM measurement.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalFi {
    pub value: f64,
    /// Outcomes excluded for having probability <= 1e-14.
    pub excluded: usize,
}

pub fn classical_fi(rho: &DensityState, derivative: &ComplexMatrix, povm: &Povm) -> ClassicalFi {
    let mut value = 0.0;
    let mut excluded = 0usize;
    for effect in povm.effects() {
        let p = effect.matmul(&rho.matrix).trace().re;
        if p <= 1e-14 {
            excluded += 1;
            continue;
        }
        let dp = effect.matmul(derivative).trace().re;
        value += dp * dp / p;
    }
    ClassicalFi { value, excluded }
}

/// Symmetric logarithmic derivative L with d rho = (L rho + rho L)/2.
pub fn sld_operator(rho: &DensityState, derivative: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_derivative(derivative)?;
    let (vals, vecs) = eig_hermitian(&rho.matrix);
    let n = rho.matrix.dim();
    let mut l = ComplexMatrix::zeros(n);
    for m in 0..n {
        for nn in 0..n {
            let denom = vals[m] + vals[nn];
            if denom > SLD_EIGENVALUE_FLOOR {
                let mut elem = Complex64::ZERO;
                for a in 0..n {
                    for b in 0..n {
                        elem += vecs[(a, m)].conj() * derivative[(a, b)] * vecs[(b, nn)];
                    }
                }
                let coeff = 2.0 * elem / denom;
                for a in 0..n {
                    for b in 0..n {
                        l[(a, b)] += coeff * vecs[(a, m)] * vecs[(b, nn)].conj();
                    }
                }
            }
        }
    }
    Ok(l.hermitian_part())
}

/// Projective POVM from the eigenvectors of a Hermitian operator.
pub fn eigenprojector_povm(op: &ComplexMatrix) -> Result<Povm> {
    let (_, vecs) = eig_hermitian(op);
    let n = op.dim();
    let mut effects = Vec::with_capacity(n);
    for k in 0..n {
        let mut proj = ComplexMatrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                proj[(a, b)] = vecs[(a, k)] * vecs[(b, k)].conj();
            }
        }
        effects.push(proj.hermitian_part());
    }
    Povm::new(effects)
}

/// Closed-form reference expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    /// F_theta_theta = (1 - 4x^2)/(theta(1-theta) - x^2).
    StateThetaTheta { theta: f64, x: f64 },
    /// F_xx = 4 theta (1-theta)/(theta(1-theta) - x^2).
    StateXX { theta: f64, x: f64 },
    /// F_theta_x = 2x(2 theta - 1)/(theta(1-theta) - x^2).
    StateThetaX { theta: f64, x: f64 },
    /// Full 4x4 Hamiltonian-parameter QFI matrix over (r, s, tau, phi) in the
    /// Hermitized frame at time t; the r row and column vanish.
    HamiltonianBlock {
        s: f64,
        tau: f64,
        phi: f64,
        theta: f64,
        x: f64,
        t: f64,
    },
    /// Tr[rho~(t)] of the gain-loss model.
    GainLossTrace {
        theta: f64,
        g: f64,
        gamma: f64,
        t: f64,
    },
    /// Metric-formalism QFI of the gain-loss example (time-independent).
    GainLossMetric { theta: f64, x: f64 },
    /// Normalization-formalism QFI variant with an unsquared trace
    /// denominator; kept for comparison against the scaling relation.
    GainLossNormUnsquared {
        theta: f64,
        x: f64,
        g: f64,
        gamma: f64,
        t: f64,
    },
    /// Normalization-formalism QFI via the trace-scaling relation
    /// F_metric / Tr[rho~]^2.
    GainLossNormScaled {
        theta: f64,
        x: f64,
        g: f64,
        gamma: f64,
        t: f64,
    },
    /// Metric-formalism QFI of the decaying qubit.
    DecayMetric { theta: f64, x: f64 },
    /// Normalization-formalism QFI of the decaying qubit.
    DecayNorm {
        theta: f64,
        x: f64,
        gamma: f64,
        t: f64,
    },
    /// Master-equation QFI of the decaying qubit with e^{2 gamma t}
    /// factors (half the dissipator rate); qualitative validity only, see
    /// the module docs.
    DecayMeHalfRate {
        theta: f64,
        x: f64,
        gamma: f64,
        t: f64,
    },
}

/// A catalog evaluation result.
#[derive(Debug, Clone)]
pub enum CatalogValue {
    Scalar(f64),
    Matrix(QfiMatrix),
}

impl CatalogValue {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            CatalogValue::Scalar(v) => Some(*v),
            CatalogValue::Matrix(_) => None,
        }
    }

    pub fn matrix(&self) -> Option<&QfiMatrix> {
        match self {
            CatalogValue::Matrix(m) => Some(m),
            CatalogValue::Scalar(_) => None,
        }
    }
}

fn state_denominator(theta: f64, x: f64) -> Result<f64> {
    let d = theta * (1.0 - theta) - x * x;
    if d <= 0.0 {
        return Err(Error::ConstraintViolation(format!(
            "state not mixed: theta(1-theta) - x^2 = {d}"
        )));
    }
    Ok(d)
}

fn require_real_regime(g: f64, gamma: f64) -> Result<()> {
    if g <= gamma {
        return Err(Error::ConstraintViolation(format!(
            "needs g > gamma, got g = {g}, gamma = {gamma}"
        )));
    }
    Ok(())
}

/// Tr[rho~(t)] of the gain-loss model (closed form).
pub fn gain_loss_trace(theta: f64, g: f64, gamma: f64, t: f64) -> Result<f64> {
    require_real_regime(g, gamma)?;
    let disc = (g * g - gamma * gamma).sqrt();
    let beta = 2.0 * t * disc;
    Ok(
        gamma * (2.0 * theta - 1.0) / disc * beta.sin()
            - gamma * gamma / (disc * disc) * beta.cos()
            + g * g / (disc * disc),
    )
}

/// Evaluate a closed-form reference expression.
pub fn closed_form_catalog(formula: &Formula) -> Result<CatalogValue> {
    use CatalogValue::{Matrix, Scalar};
    match *formula {
        Formula::StateThetaTheta { theta, x } => {
            let d = state_denominator(theta, x)?;
            Ok(Scalar((1.0 - 4.0 * x * x) / d))
        }
        Formula::StateXX { theta, x } => {
            let d = state_denominator(theta, x)?;
            Ok(Scalar(4.0 * theta * (1.0 - theta) / d))
        }
        Formula::StateThetaX { theta, x } => {
            let d = state_denominator(theta, x)?;
            Ok(Scalar(2.0 * x * (2.0 * theta - 1.0) / d))
        }
        Formula::HamiltonianBlock {
            s,
            tau,
            phi,
            theta,
            x,
            t,
        } => {
            if s == 0.0 {
                return Err(Error::ConstraintViolation(
                    "ratio identities need s != 0".into(),
                ));
            }
            let lam2 = s * s + tau * tau;
            if lam2 == 0.0 {
                return Err(Error::ConstraintViolation("needs s^2 + tau^2 > 0".into()));
            }
            let alpha = 2.0 * t * lam2.sqrt();
            let kappa_minus = (1.0 - 2.0 * theta).powi(2) - 4.0 * x * x;
            let kappa_plus = (1.0 - 2.0 * theta).powi(2) + 4.0 * x * x;
            let lambda = 4.0 * (2.0 * theta - 1.0) * x;
            let f_ss = 4.0
                * s
                * s
                * t
                * t
                * ((2.0 * theta - 1.0) * phi.sin() + 2.0 * x * phi.cos()).powi(2)
                / lam2;
            let f_sphi = s
                * t
                * alpha.sin()
                * (kappa_minus * (2.0 * phi).sin() + lambda * (2.0 * phi).cos())
                / lam2.sqrt();
            let ratio = tau / s;
            let f_stau = ratio * f_ss;
            let f_tautau = ratio * ratio * f_ss;
            let f_tauphi = ratio * f_sphi;
            let f_phiphi = 0.5
                * alpha.sin().powi(2)
                * (kappa_minus * (2.0 * phi).cos() - lambda * (2.0 * phi).sin())
                - kappa_plus * (alpha / 2.0).sin().powi(2) * (alpha.cos() - 3.0);
            let names = ["r", "s", "tau", "phi"].map(String::from).to_vec();
            #[rustfmt::skip]
            let entries = vec![
                0.0, 0.0,    0.0,      0.0,
                0.0, f_ss,   f_stau,   f_sphi,
                0.0, f_stau, f_tautau, f_tauphi,
                0.0, f_sphi, f_tauphi, f_phiphi,
            ];
            Ok(Matrix(QfiMatrix::new(
                names,
                entries,
                Provenance::ClosedForm,
            )?))
        }
        Formula::GainLossTrace { theta, g, gamma, t } => {
            Ok(Scalar(gain_loss_trace(theta, g, gamma, t)?))
        }
        Formula::GainLossMetric { theta, x } | Formula::DecayMetric { theta, x } => {
            let d = state_denominator(theta, x)?;
            Ok(Scalar((1.0 - 4.0 * x * x) / d))
        }
        Formula::GainLossNormUnsquared {
            theta,
            x,
            g,
            gamma,
            t,
        } => {
            require_real_regime(g, gamma)?;
            let d = state_denominator(theta, x)?;
            let metric = (1.0 - 4.0 * x * x) / d;
            let disc2 = g * g - gamma * gamma;
            let beta = 2.0 * t * disc2.sqrt();
            let denominator = g * g + gamma * (2.0 * theta - 1.0) * disc2.sqrt() * beta.sin()
                - gamma * gamma * beta.cos();
            Ok(Scalar(disc2 * disc2 * metric / denominator))
        }
        Formula::GainLossNormScaled {
            theta,
            x,
            g,
            gamma,
            t,
        } => {
            let d = state_denominator(theta, x)?;
            let metric = (1.0 - 4.0 * x * x) / d;
            let trace = gain_loss_trace(theta, g, gamma, t)?;
            Ok(Scalar(metric / (trace * trace)))
        }
        Formula::DecayNorm { theta, x, gamma, t } => {
            let d = state_denominator(theta, x)?;
            let e4 = (4.0 * gamma * t).exp();
            Ok(Scalar(
                (1.0 - 4.0 * x * x) * e4 / (d * (theta * (e4 - 1.0) + 1.0).powi(2)),
            ))
        }
        Formula::DecayMeHalfRate { theta, x, gamma, t } => {
            let e2 = (2.0 * gamma * t).exp();
            Ok(Scalar(
                (-2.0 * gamma * t).exp() * (4.0 * x * x - e2)
                    / ((1.0 - theta).powi(2) + e2 * (theta + x * x - 1.0)),
            ))
        }
    }
}

/// Dimensionless abscissa conventions of the worked examples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauConvention {
    /// tau = t / (2 sqrt(g^2 - gamma^2)).
    GainLoss { g: f64, gamma: f64 },
    /// tau = t / gamma, the decaying-qubit convention.
    DecayRate { gamma: f64 },
    /// tau = t.
    Identity,
}

impl TauConvention {
    pub fn apply(&self, t: f64) -> f64 {
        match *self {
            TauConvention::GainLoss { g, gamma } => t / (2.0 * (g * g - gamma * gamma).sqrt()),
            TauConvention::DecayRate { gamma } => t / gamma,
            TauConvention::Identity => t,
        }
    }
}

/// One per-formalism QFI series over a time grid.
#[derive(Debug, Clone)]
pub struct QfiSeries {
    pub formalism: Formalism,
    pub grid: Vec<f64>,
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
}

/// theta-QFI of an encode-evolve channel along a time grid, computed through
/// the numerical pipeline derivative and the mixed-qubit closed form (with
/// the SLD fallback near purity).
pub fn qfi_vs_time(
    channel: &Channel,
    formalism: Formalism,
    p: &InputStateParams,
    grid: &[f64],
    tau: &TauConvention,
) -> Result<QfiSeries> {
    let step = default_fd_step(p.theta());
    let mut values = Vec::with_capacity(grid.len());
    let mut taus = Vec::with_capacity(grid.len());
    for &t in grid {
        let pipeline = ParamPipeline {
            channel: channel.clone(),
            time: t,
        };
        let derivative = param_derivative(&pipeline, p, StateParam::Theta, step)?;
        let rho = pipeline.state_at(p)?;
        values.push(qfi_from_state(&rho, &derivative)?);
        taus.push(tau.apply(t));
    }
    Ok(QfiSeries {
        formalism,
        grid: grid.to_vec(),
        tau: taus,
        values,
    })
}
