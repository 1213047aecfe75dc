//! Scenario execution: build the model, evolve every requested formalism,
//! compute the QFI series, and write the deterministic artifact set
//! (trajectory CSVs, qfi.csv, expectations.csv, summary.json).

use std::path::Path;

use serde::Serialize;

use nhqfi_core::dynamics::{
    evolve_lindblad, evolve_metric, evolve_normalized, steady_state, uniform_grid, DensityState,
    StateTrajectory,
};
use nhqfi_core::error::Error as CoreError;
use nhqfi_core::estimation::{
    default_fd_step, gain_loss_trace, param_derivative, qfi_from_state, Channel, ParamPipeline,
    StateParam, TauConvention,
};
use nhqfi_core::linalg::{c, eigenvalues, ComplexMatrix};
use nhqfi_core::metric::{
    biorthogonal_metric, hermitize, hermitize_static, pseudo_hermiticity_residual,
    solve_metric_ode, MetricOperator,
};
use nhqfi_core::models::{
    classify_matrix, effective_hamiltonian, gain_loss_open, make_decaying_qubit, make_gain_loss,
    make_general2x2, make_input_state, InputStateParams, NhModel, OpenModel, RegionLabel,
};
use nhqfi_core::observables::{closed_form_expectations, expect, Formalism, Observable};

use crate::config::{FormalismId, ModelConfig, ScenarioConfig};
use crate::output::{expectation_rows, qfi_csv, trajectory_csv, write_file, EXPECTATION_HEADER};
use crate::CliError;

fn numerical(stage: &'static str) -> impl FnOnce(CoreError) -> CliError {
    move |source| CliError::Numerical {
        stage,
        message: source.to_string(),
    }
}

/// Region label spelled for JSON output.
fn region_id(label: RegionLabel) -> &'static str {
    match label {
        RegionLabel::HermitianReal => "Omega_H_R",
        RegionLabel::NonHermitianReal => "Omega_NH_R",
        RegionLabel::NonHermitianComplex => "Omega_NH_C",
    }
}

pub struct BuiltModel {
    pub nh: NhModel,
    pub open: Option<OpenModel>,
    /// Metric-formalism generator; built lazily because it does not exist in
    /// the complex-spectrum region.
    pub hermitized: Option<ComplexMatrix>,
    /// Static metric when the biorthogonal construction applies.
    pub static_metric: Option<MetricOperator>,
    pub tau: TauConvention,
}

pub fn build_model(config: &ScenarioConfig, needs_metric: bool) -> Result<BuiltModel, CliError> {
    match config.model {
        ModelConfig::GainLoss { omega0, g, gamma } => {
            let nh = make_gain_loss(omega0, g, gamma);
            let open = gain_loss_open(omega0, g, gamma, config.me_rate_scale())
                .map_err(numerical("open-model construction"))?;
            let (static_metric, hermitized) = match biorthogonal_metric(&nh.matrix) {
                Ok(metric) => {
                    let h = hermitize_static(&nh.matrix, &metric)
                        .map_err(numerical("hermitization"))?;
                    (Some(metric), Some(h))
                }
                Err(e) => {
                    if needs_metric {
                        return Err(numerical("metric construction")(e));
                    }
                    (None, None)
                }
            };
            let tau = if g.abs() > gamma.abs() {
                TauConvention::GainLoss { g, gamma }
            } else {
                TauConvention::Identity
            };
            Ok(BuiltModel {
                nh,
                open: Some(open),
                hermitized,
                static_metric,
                tau,
            })
        }
        ModelConfig::DecayingQubit { omega, gamma } => {
            let (nh, open) =
                make_decaying_qubit(omega, gamma).map_err(numerical("model construction"))?;
            // Hermitized generator from the time-dependent metric on a short
            // grid; it is time-independent for this model, which is verified
            // before the single matrix is reused.
            let probe_grid = uniform_grid(1.0, 11);
            let metric_traj =
                solve_metric_ode(&nh.matrix, &MetricOperator::identity(2), &probe_grid)
                    .map_err(numerical("metric equation of motion"))?;
            let series = hermitize(&nh.matrix, &metric_traj).map_err(numerical("hermitization"))?;
            let h = series[0].hermitian_part();
            for hk in &series {
                if hk.sub(&h).frobenius_norm() > 1e-6 * h.frobenius_norm().max(1.0) {
                    return Err(CliError::Numerical {
                        stage: "hermitization",
                        message: "Hermitized generator drifts along the metric trajectory".into(),
                    });
                }
            }
            let tau = if gamma > 0.0 {
                TauConvention::DecayRate { gamma }
            } else {
                TauConvention::Identity
            };
            Ok(BuiltModel {
                nh,
                open: Some(open),
                hermitized: Some(h),
                static_metric: None,
                tau,
            })
        }
        ModelConfig::General2x2 { r, s, tau, phi } => {
            let nh = make_general2x2(r, s, tau, phi);
            let (static_metric, hermitized) = match biorthogonal_metric(&nh.matrix) {
                Ok(metric) => {
                    let h = hermitize_static(&nh.matrix, &metric)
                        .map_err(numerical("hermitization"))?;
                    (Some(metric), Some(h))
                }
                Err(e) => {
                    if needs_metric {
                        return Err(numerical("metric construction")(e));
                    }
                    (None, None)
                }
            };
            Ok(BuiltModel {
                nh,
                open: None,
                hermitized,
                static_metric,
                tau: TauConvention::Identity,
            })
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SteadyStateSummary {
    /// Row-major [re, im] pairs.
    pub entries: Vec<[f64; 2]>,
    pub integrator_deviation: f64,
    /// Frobenius distance from the trace-normalized textbook form
    /// (gain-loss model only); reported, never asserted.
    pub textbook_form_deviation: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ClosedFormDeviations {
    /// max relative deviation of the numeric F_norm series from
    /// F_metric / Tr[rho~]^2.
    pub norm_qfi_vs_trace_scaling: Option<f64>,
    /// max absolute deviation of the recorded raw traces from the closed-form
    /// Tr[rho~(t)] (gain-loss model).
    pub trace_formula: Option<f64>,
    /// max absolute deviation of <sigma_z> from the closed-form coefficient
    /// expressions (decaying qubit at x = 0).
    pub sigma_z_closed_form: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub config: ScenarioConfig,
    pub region: String,
    /// Eigenvalues of the non-Hermitian generator as [re, im] pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub pseudo_hermiticity_residual: Option<f64>,
    pub eta_trace_max_drift: Option<f64>,
    pub steady_state: Option<SteadyStateSummary>,
    pub steady_state_note: Option<String>,
    pub closed_form_deviations: ClosedFormDeviations,
}

fn qfi_series(channel: &Channel, p: &InputStateParams, grid: &[f64]) -> Result<Vec<f64>, CliError> {
    let step = default_fd_step(p.theta());
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let pipeline = ParamPipeline {
            channel: channel.clone(),
            time: t,
        };
        let d = param_derivative(&pipeline, p, StateParam::Theta, step)
            .map_err(numerical("qfi derivative"))?;
        let rho = pipeline.state_at(p).map_err(numerical("qfi pipeline"))?;
        out.push(qfi_from_state(&rho, &d).map_err(numerical("qfi evaluation"))?);
    }
    Ok(out)
}

pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<Summary, CliError> {
    let needs_metric = config.wants(FormalismId::Metric);
    let model = build_model(config, needs_metric)?;
    let grid = uniform_grid(config.grid.t_max, config.grid.points);
    let p = InputStateParams::new(config.state.theta, config.state.x)
        .map_err(numerical("state construction"))?;
    let rho0 = make_input_state(&p);

    let region = classify_matrix(&model.nh.matrix, config.region_tolerance());
    let eigs = eigenvalues(&model.nh.matrix).map_err(numerical("eigenvalues"))?;

    // trajectories
    let mut metric_traj: Option<StateTrajectory> = None;
    let mut norm_traj: Option<StateTrajectory> = None;
    let mut nj_traj: Option<StateTrajectory> = None;
    let mut me_traj: Option<StateTrajectory> = None;
    if config.wants(FormalismId::Metric) {
        let h = model.hermitized.as_ref().expect("checked by build_model");
        metric_traj =
            Some(evolve_metric(h, &rho0, &grid).map_err(numerical("metric propagation"))?);
    }
    if config.wants(FormalismId::Norm) {
        norm_traj = Some(
            evolve_normalized(&model.nh.matrix, &rho0, &grid)
                .map_err(numerical("normalized propagation"))?,
        );
    }
    if config.wants(FormalismId::Nj) {
        let open = model.open.as_ref().expect("validated by config");
        let heff = effective_hamiltonian(open);
        nj_traj =
            Some(evolve_normalized(&heff, &rho0, &grid).map_err(numerical("no-jump propagation"))?);
    }
    if config.wants(FormalismId::Me) {
        let open = model.open.as_ref().expect("validated by config");
        me_traj = Some(
            evolve_lindblad(open, &rho0, &grid)
                .map_err(numerical("master-equation propagation"))?,
        );
    }

    for (id, traj) in [
        (FormalismId::Metric, &metric_traj),
        (FormalismId::Norm, &norm_traj),
        (FormalismId::Nj, &nj_traj),
        (FormalismId::Me, &me_traj),
    ] {
        if let Some(t) = traj {
            write_file(
                &out_dir.join(format!("trajectory_{}.csv", id.label())),
                &trajectory_csv(t),
            )?;
        }
    }

    // QFI series
    let taus: Vec<f64> = grid.iter().map(|&t| model.tau.apply(t)).collect();
    let metric_qfi = match (&model.hermitized, config.wants(FormalismId::Metric)) {
        (Some(h), true) => Some(qfi_series(&Channel::Metric(h.clone()), &p, &grid)?),
        _ => None,
    };
    let norm_qfi = if config.wants(FormalismId::Norm) {
        Some(qfi_series(
            &Channel::Normalized(model.nh.matrix.clone()),
            &p,
            &grid,
        )?)
    } else {
        None
    };
    let nj_qfi = if config.wants(FormalismId::Nj) {
        let heff = effective_hamiltonian(model.open.as_ref().expect("validated"));
        Some(qfi_series(&Channel::Normalized(heff), &p, &grid)?)
    } else {
        None
    };
    let me_qfi = if config.wants(FormalismId::Me) {
        let open = model.open.clone().expect("validated");
        Some(qfi_series(&Channel::Lindblad(open), &p, &grid)?)
    } else {
        None
    };
    write_file(
        &out_dir.join("qfi.csv"),
        &qfi_csv(
            &grid,
            &taus,
            metric_qfi.as_deref(),
            norm_qfi.as_deref(),
            me_qfi.as_deref(),
            nj_qfi.as_deref(),
        ),
    )?;

    // sigma_z expectation series per formalism, fixed block order
    let sz = Observable::sigma_z();
    let mut expectation_body = String::new();
    expectation_body.push_str(EXPECTATION_HEADER);
    expectation_body.push('\n');
    let mut sz_norm_series: Option<Vec<f64>> = None;
    let mut sz_me_series: Option<Vec<f64>> = None;
    for (id, formalism, traj) in [
        (FormalismId::Metric, Formalism::Metric, &metric_traj),
        (FormalismId::Norm, Formalism::Norm, &norm_traj),
        (FormalismId::Nj, Formalism::Nj, &nj_traj),
        (FormalismId::Me, Formalism::Me, &me_traj),
    ] {
        if let Some(t) = traj {
            let values = expect(formalism, t, &sz, None).map_err(numerical("expectation"))?;
            expectation_body.push_str(&expectation_rows(
                &grid,
                id.label(),
                sz.coefficients,
                &values,
            ));
            match formalism {
                Formalism::Norm => sz_norm_series = Some(values),
                Formalism::Me => sz_me_series = Some(values),
                _ => {}
            }
        }
    }
    write_file(&out_dir.join("expectations.csv"), &expectation_body)?;

    // static metric exported in the plain matrix text format
    if let Some(metric) = &model.static_metric {
        write_file(
            &out_dir.join("metric_eta.txt"),
            &nhqfi_core::linalg::textio::format_matrix(&metric.eta),
        )?;
        write_file(
            &out_dir.join("metric_vielbein.txt"),
            &nhqfi_core::linalg::textio::format_matrix(&metric.vielbein),
        )?;
    }

    // summary diagnostics
    let pseudo_residual = model
        .static_metric
        .as_ref()
        .map(|m| pseudo_hermiticity_residual(&model.nh.matrix, m))
        .transpose()
        .map_err(numerical("pseudo-hermiticity residual"))?;

    let eta_trace_max_drift = match (&norm_traj, &model.static_metric, &config.model) {
        (Some(traj), Some(metric), _) => {
            let mut worst: f64 = 0.0;
            for i in 0..grid.len() {
                let raw = traj.states[i].matrix.scale(c(traj.raw_traces[i], 0.0));
                let w = metric.eta.matmul(&raw).trace().re;
                worst = worst.max((w - 1.0).abs());
            }
            Some(worst)
        }
        (Some(traj), None, ModelConfig::DecayingQubit { .. }) => {
            let metric_traj =
                solve_metric_ode(&model.nh.matrix, &MetricOperator::identity(2), &grid)
                    .map_err(numerical("metric equation of motion"))?;
            let mut worst: f64 = 0.0;
            for i in 0..grid.len() {
                let raw = traj.states[i].matrix.scale(c(traj.raw_traces[i], 0.0));
                let w = metric_traj.metrics[i].eta.matmul(&raw).trace().re;
                worst = worst.max((w - 1.0).abs());
            }
            Some(worst)
        }
        _ => None,
    };

    let (steady, steady_note) = match (&model.open, config.wants(FormalismId::Me)) {
        (Some(open), true) => match steady_state(open) {
            Ok(kernel_state) => {
                let long_time = config.grid.t_max.max(1.0) * 10.0;
                let integrated = evolve_lindblad(open, &rho0, &[long_time])
                    .map_err(numerical("steady-state integration"))?;
                let deviation = kernel_state
                    .matrix
                    .sub(&integrated.states[0].matrix)
                    .frobenius_norm();
                let textbook_form_deviation = match config.model {
                    ModelConfig::GainLoss { g, gamma, .. } if g.abs() > gamma.abs() => {
                        Some(textbook_steady_state_deviation(&kernel_state, g, gamma))
                    }
                    _ => None,
                };
                let entries = kernel_state
                    .matrix
                    .entries()
                    .iter()
                    .map(|z| [z.re, z.im])
                    .collect();
                (
                    Some(SteadyStateSummary {
                        entries,
                        integrator_deviation: deviation,
                        textbook_form_deviation,
                    }),
                    None,
                )
            }
            Err(CoreError::NonUniqueSteadyState(k)) => (
                None,
                Some(format!(
                    "Liouvillian kernel dimension {k}; no unique steady state"
                )),
            ),
            Err(e) => return Err(numerical("steady state")(e)),
        },
        _ => (None, None),
    };

    // closed-form cross-checks
    let norm_qfi_vs_trace_scaling = match (&norm_qfi, &norm_traj, &metric_qfi) {
        (Some(nseries), Some(ntraj), Some(mseries)) => {
            // compare only where the expected value is resolvable at double
            // precision (a fixed fraction of the series peak); the tail of a
            // decaying QFI is finite-difference noise
            let expected: Vec<f64> = (0..grid.len())
                .map(|i| mseries[i] / (ntraj.raw_traces[i] * ntraj.raw_traces[i]))
                .collect();
            let peak = expected.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let floor = 1e-6 * peak;
            let mut worst: f64 = 0.0;
            for i in 0..grid.len() {
                if expected[i].abs() > floor {
                    worst = worst.max(((nseries[i] - expected[i]) / expected[i]).abs());
                }
            }
            Some(worst)
        }
        _ => None,
    };
    let trace_formula = match (&config.model, &norm_traj) {
        (&ModelConfig::GainLoss { g, gamma, .. }, Some(traj)) if g.abs() > gamma.abs() => {
            let mut worst: f64 = 0.0;
            for (i, &t) in grid.iter().enumerate() {
                let closed = gain_loss_trace(config.state.theta, g, gamma, t)
                    .map_err(numerical("trace formula"))?;
                worst = worst.max((traj.raw_traces[i] - closed).abs());
            }
            Some(worst)
        }
        _ => None,
    };
    let sigma_z_closed_form = match (&config.model, &sz_norm_series, &sz_me_series) {
        (&ModelConfig::DecayingQubit { omega, gamma }, Some(norm_vals), Some(me_vals))
            if config.state.x == 0.0 =>
        {
            let mut worst: f64 = 0.0;
            for (i, &t) in grid.iter().enumerate() {
                let (_, n, me) = closed_form_expectations(
                    &sz,
                    config.state.theta,
                    config.state.x,
                    omega,
                    gamma,
                    t,
                );
                worst = worst.max((norm_vals[i] - n).abs());
                worst = worst.max((me_vals[i] - me).abs());
            }
            Some(worst)
        }
        _ => None,
    };

    let summary = Summary {
        config: config.clone(),
        region: region_id(region).to_string(),
        eigenvalues: eigs.iter().map(|z| [z.re, z.im]).collect(),
        pseudo_hermiticity_residual: pseudo_residual,
        eta_trace_max_drift,
        steady_state: steady,
        steady_state_note: steady_note,
        closed_form_deviations: ClosedFormDeviations {
            norm_qfi_vs_trace_scaling,
            trace_formula,
            sigma_z_closed_form,
        },
    };
    let json =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&out_dir.join("summary.json"), &format!("{json}\n"))?;
    Ok(summary)
}

fn textbook_steady_state_deviation(kernel_state: &DensityState, g: f64, gamma: f64) -> f64 {
    let pref = g * g / (2.0 * (g * g - gamma * gamma));
    let textbook = ComplexMatrix::from_2x2(
        c(pref, 0.0),
        c(0.0, -pref * gamma / g),
        c(0.0, pref * gamma / g),
        c(pref * (1.0 + (gamma / g) * (gamma / g)), 0.0),
    );
    let normalized = textbook.scale(num_complex::Complex64::ONE / textbook.trace());
    kernel_state.matrix.sub(&normalized).frobenius_norm()
}
