//! Model zoo: the general 2x2 non-Hermitian family, the gain-loss qubit, the
//! decaying qubit, their open-system counterparts, and the parameter-space
//! region classifier.
//!
//! Rate conventions. The decaying qubit pairs the non-Hermitian generator
//! `(omega - i gamma) sigma_z` with the jump operator `2 sqrt(gamma) sigma_-`
//! (dissipator prefactor `4 gamma`): this is the unique rate for which the
//! effective Hamiltonian reproduces the generator up to `-i gamma * identity`,
//! since `sigma_+ sigma_- = (1 + sigma_z)/2`. A bare `sqrt(gamma) sigma_-`
//! jump would not. The gain-loss master equation keeps the same self-consistent
//! default but exposes the dissipator scale as `me_rate_scale`, measured
//! relative to a `2 gamma` prefactor (default 2.0, i.e. `4 gamma` total; 1.0
//! recovers the weaker convention).

use crate::dynamics::DensityState;
use crate::error::{Error, Result};
use crate::linalg::{c, eigenvalues, sigma_minus, sigma_x, sigma_z, tol, ComplexMatrix};

/// Named parameter record of a non-Hermitian model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    General2x2 { r: f64, s: f64, tau: f64, phi: f64 },
    GainLoss { omega0: f64, g: f64, gamma: f64 },
    DecayingQubit { omega: f64, gamma: f64 },
}

impl ModelParams {
    /// Rebuild the Hamiltonian matrix from the stored parameters.
    pub fn to_matrix(&self) -> ComplexMatrix {
        match *self {
            ModelParams::General2x2 { r, s, tau, phi } => general2x2_matrix(r, s, tau, phi),
            ModelParams::GainLoss { omega0, g, gamma } => gain_loss_matrix(omega0, g, gamma),
            ModelParams::DecayingQubit { omega, gamma } => sigma_z().scale(c(omega, -gamma)),
        }
    }
}

/// A two-level non-Hermitian Hamiltonian with its parameter record.
#[derive(Debug, Clone)]
pub struct NhModel {
    pub matrix: ComplexMatrix,
    pub params: ModelParams,
    /// Set when the parameters predict a real spectrum (|s| <= |tau| for the
    /// general family, g >= gamma for gain-loss, gamma = 0 for the decaying
    /// qubit).
    pub real_spectrum_expected: bool,
}

/// Hermitian Hamiltonian plus jump operators, each carrying its sqrt-rate.
#[derive(Debug, Clone)]
pub struct OpenModel {
    pub hamiltonian: ComplexMatrix,
    pub jump_operators: Vec<ComplexMatrix>,
}

impl OpenModel {
    pub fn new(hamiltonian: ComplexMatrix, jump_operators: Vec<ComplexMatrix>) -> Result<Self> {
        if !hamiltonian.is_hermitian(tol::HERMITICITY) {
            return Err(Error::ContractViolation(
                "open-model Hamiltonian must be Hermitian".into(),
            ));
        }
        Ok(Self {
            hamiltonian,
            jump_operators,
        })
    }
}

/// Spectral regions of the parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    /// Hermitian, real spectrum.
    HermitianReal,
    /// Non-Hermitian, entirely real spectrum.
    NonHermitianReal,
    /// Non-Hermitian with at least one complex eigenvalue.
    NonHermitianComplex,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label = match self {
            RegionLabel::HermitianReal => "Ω_H^R",
            RegionLabel::NonHermitianReal => "Ω_NH^R",
            RegionLabel::NonHermitianComplex => "Ω_NH^C",
        };
        write!(f, "{label}")
    }
}

/// Real parameters (theta, x) of the input state [[1-theta, x], [x, theta]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputStateParams {
    theta: f64,
    x: f64,
}

impl InputStateParams {
    /// Rejects parameters violating positivity, x^2 <= theta (1 - theta).
    pub fn new(theta: f64, x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) || x * x > theta * (1.0 - theta) + 1e-15 {
            return Err(Error::NonphysicalState { theta, x });
        }
        Ok(Self { theta, x })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

fn general2x2_matrix(r: f64, s: f64, tau: f64, phi: f64) -> ComplexMatrix {
    let cp = phi.cos();
    let sp = phi.sin();
    ComplexMatrix::from_2x2(
        c(r + tau * cp, -s * sp),
        c(tau * sp, s * cp),
        c(tau * sp, s * cp),
        c(r - tau * cp, s * sp),
    )
}

fn gain_loss_matrix(omega0: f64, g: f64, gamma: f64) -> ComplexMatrix {
    ComplexMatrix::from_2x2(c(omega0, -gamma), c(g, 0.0), c(g, 0.0), c(omega0, gamma))
}

/// General 2x2 non-Hermitian family with real parameters (r, s, tau, phi).
pub fn make_general2x2(r: f64, s: f64, tau: f64, phi: f64) -> NhModel {
    NhModel {
        matrix: general2x2_matrix(r, s, tau, phi),
        params: ModelParams::General2x2 { r, s, tau, phi },
        real_spectrum_expected: s.abs() <= tau.abs(),
    }
}

/// Hermitian partner family of the general 2x2 model, sharing the parameters
/// (r, s, tau, phi).
///
/// Note this is a parameter-sharing analog, not a similarity image: its
/// spectrum is r +- sqrt(tau^2 + s^2) while the non-Hermitian family has
/// r +- sqrt(tau^2 - s^2); the two coincide only at s = 0. The
/// spectrum-preserving Hermitization of the family is obtained through
/// [`crate::metric::hermitize_static`] instead.
pub fn hermitian_counterpart_general(r: f64, s: f64, tau: f64, phi: f64) -> ComplexMatrix {
    let lam = (tau * tau + s * s).sqrt();
    let cp = phi.cos();
    let sp = phi.sin();
    ComplexMatrix::from_2x2(
        c(r + lam * cp, 0.0),
        c(lam * sp, 0.0),
        c(lam * sp, 0.0),
        c(r - lam * cp, 0.0),
    )
}

/// Gain-loss qubit: levels coupled by g, loss/gain +- i gamma on the diagonal.
pub fn make_gain_loss(omega0: f64, g: f64, gamma: f64) -> NhModel {
    NhModel {
        matrix: gain_loss_matrix(omega0, g, gamma),
        params: ModelParams::GainLoss { omega0, g, gamma },
        real_spectrum_expected: g.abs() >= gamma.abs(),
    }
}

/// Open-system counterpart of the gain-loss qubit: H = omega0 1 + g sigma_x
/// with a single decay channel.
///
/// `rate_scale` multiplies the dissipator prefactor 2 gamma; the default 2.0
/// makes the effective Hamiltonian equal the gain-loss generator up to
/// -i gamma identity.
pub fn gain_loss_open(omega0: f64, g: f64, gamma: f64, rate_scale: f64) -> Result<OpenModel> {
    if gamma < 0.0 {
        return Err(Error::InvalidRate(gamma));
    }
    if rate_scale < 0.0 {
        return Err(Error::InvalidRate(rate_scale));
    }
    let h = ComplexMatrix::identity(2)
        .scale(c(omega0, 0.0))
        .add(&sigma_x().scale(c(g, 0.0)));
    let jump = sigma_minus().scale(c((2.0 * gamma * rate_scale).sqrt(), 0.0));
    OpenModel::new(h, vec![jump])
}

/// Default dissipator scale: 2.0 relative to a 2 gamma prefactor.
pub const DEFAULT_ME_RATE_SCALE: f64 = 2.0;

/// Decaying qubit: generator (omega - i gamma) sigma_z paired with the open
/// model H = omega sigma_z, jump 2 sqrt(gamma) sigma_-.
pub fn make_decaying_qubit(omega: f64, gamma: f64) -> Result<(NhModel, OpenModel)> {
    if gamma < 0.0 {
        return Err(Error::InvalidRate(gamma));
    }
    let nh = NhModel {
        matrix: sigma_z().scale(c(omega, -gamma)),
        params: ModelParams::DecayingQubit { omega, gamma },
        real_spectrum_expected: gamma == 0.0,
    };
    let open = OpenModel::new(
        sigma_z().scale(c(omega, 0.0)),
        vec![sigma_minus().scale(c(2.0 * gamma.sqrt(), 0.0))],
    )?;
    Ok((nh, open))
}

/// H_eff = H - (i/2) sum_l Gamma_l^dag Gamma_l.
pub fn effective_hamiltonian(m: &OpenModel) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(m.hamiltonian.dim());
    for jump in &m.jump_operators {
        acc = acc.add(&jump.adjoint().matmul(jump));
    }
    m.hamiltonian.sub(&acc.scale(c(0.0, 0.5)))
}

/// Classify the spectral region of a Hamiltonian matrix at relative tolerance
/// `tolerance` (callers default to [`tol::EIGEN_DEGENERACY`]).
pub fn classify_matrix(h: &ComplexMatrix, tolerance: f64) -> RegionLabel {
    let scale = h.frobenius_norm().max(1.0);
    if h.is_hermitian(tolerance) {
        return RegionLabel::HermitianReal;
    }
    let eigs = eigenvalues(h).unwrap_or_default();
    let all_real = eigs.iter().all(|z| z.im.abs() <= tolerance * scale);
    if all_real {
        RegionLabel::NonHermitianReal
    } else {
        RegionLabel::NonHermitianComplex
    }
}

/// Classify the spectral region of a model.
pub fn classify_region(m: &NhModel, tolerance: f64) -> RegionLabel {
    classify_matrix(&m.matrix, tolerance)
}

/// Input state [[1-theta, x], [x, theta]] with unit trace at time 0.
pub fn make_input_state(p: &InputStateParams) -> DensityState {
    let m = ComplexMatrix::from_2x2(
        c(1.0 - p.theta, 0.0),
        c(p.x, 0.0),
        c(p.x, 0.0),
        c(p.theta, 0.0),
    );
    DensityState::standard_unchecked(m, 0.0)
}
