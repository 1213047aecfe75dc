//! Deterministic text output: 17-significant-digit floats, '\n' line
//! endings, fixed column orders.

use std::fs;
use std::io::Write;
use std::path::Path;

use nhqfi_core::dynamics::StateTrajectory;
use nhqfi_core::observables::bloch_vector;

use crate::CliError;

/// 17 significant digits; NaN spelled out for inapplicable columns.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CliError::Io)?;
    }
    let mut file = fs::File::create(path).map_err(CliError::Io)?;
    file.write_all(contents.as_bytes()).map_err(CliError::Io)?;
    Ok(())
}

pub const TRAJECTORY_HEADER: &str = "t,re_rho00,im_rho00,re_rho01,im_rho01,re_rho10,im_rho10,re_rho11,im_rho11,raw_trace,bloch_x,bloch_y,bloch_z";

/// Trajectory CSV: one row per grid point, deterministic column order.
pub fn trajectory_csv(traj: &StateTrajectory) -> String {
    let mut out = String::with_capacity(traj.len() * 256);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (i, state) in traj.states.iter().enumerate() {
        let m = &state.matrix;
        let (bx, by, bz) = bloch_vector(m);
        let row = [
            traj.grid[i],
            m[(0, 0)].re,
            m[(0, 0)].im,
            m[(0, 1)].re,
            m[(0, 1)].im,
            m[(1, 0)].re,
            m[(1, 0)].im,
            m[(1, 1)].re,
            m[(1, 1)].im,
            traj.raw_traces[i],
            bx,
            by,
            bz,
        ];
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub const QFI_HEADER: &str = "t,tau,F_metric,F_norm,F_me,F_nj";

/// QFI CSV with NaN for formalisms that were not requested or unavailable.
pub fn qfi_csv(
    grid: &[f64],
    tau: &[f64],
    metric: Option<&[f64]>,
    norm: Option<&[f64]>,
    me: Option<&[f64]>,
    nj: Option<&[f64]>,
) -> String {
    let mut out = String::with_capacity(grid.len() * 128);
    out.push_str(QFI_HEADER);
    out.push('\n');
    let pick = |series: Option<&[f64]>, i: usize| series.map_or(f64::NAN, |s| s[i]);
    for i in 0..grid.len() {
        let row = [
            grid[i],
            tau[i],
            pick(metric, i),
            pick(norm, i),
            pick(me, i),
            pick(nj, i),
        ];
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub const EXPECTATION_HEADER: &str = "t,formalism,a0,a1,a2,a3,value";

/// Expectation CSV block for one formalism; blocks are concatenated in the
/// caller's (fixed) formalism order.
pub fn expectation_rows(
    grid: &[f64],
    formalism: &str,
    coefficients: [f64; 4],
    values: &[f64],
) -> String {
    let mut out = String::with_capacity(grid.len() * 96);
    for (i, &t) in grid.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(t),
            formalism,
            fmt_f64(coefficients[0]),
            fmt_f64(coefficients[1]),
            fmt_f64(coefficients[2]),
            fmt_f64(coefficients[3]),
            fmt_f64(values[i]),
        ));
    }
    out
}
