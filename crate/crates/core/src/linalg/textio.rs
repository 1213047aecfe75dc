//! Plain-text matrix format used by the CLI for ad-hoc input.
//!
//! First line holds the dimension, followed by dim^2 lines of "re im" in
//! row-major order.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let dim_line = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty matrix file".into()))?;
    let dim: usize = dim_line
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad dimension line: {dim_line:?}")))?;
    let mut entries = Vec::with_capacity(dim * dim);
    for line in lines {
        let mut parts = line.split_whitespace();
        let re: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::InvalidInput(format!("bad entry line: {line:?}")))?;
        let im: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::InvalidInput(format!("bad entry line: {line:?}")))?;
        if parts.next().is_some() {
            return Err(Error::InvalidInput(format!(
                "trailing data on line: {line:?}"
            )));
        }
        entries.push(Complex64::new(re, im));
    }
    if entries.len() != dim * dim {
        return Err(Error::InvalidInput(format!(
            "expected {} entries, found {}",
            dim * dim,
            entries.len()
        )));
    }
    ComplexMatrix::from_vec(dim, entries)
}

pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", m.dim()));
    for z in m.entries() {
        out.push_str(&format!("{:.16e} {:.16e}\n", z.re, z.im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn round_trip() {
        let m = ComplexMatrix::from_2x2(c(0.0, -0.4), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.4));
        let text = format_matrix(&m);
        let back = parse_matrix(&text).unwrap();
        assert!(back.sub(&m).frobenius_norm() < 1e-15);
        assert_eq!(format_matrix(&back), text);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2\n1 0\n0 1\n").is_err());
        assert!(parse_matrix("x\n").is_err());
        assert!(parse_matrix("1\n1 0 extra\n").is_err());
    }
}
