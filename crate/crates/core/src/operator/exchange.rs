//! Line-oriented matrix exchange format.
//!
//! ```text
//! dim=N kind=hermitian|density
//! row col re im        (N² lines)
//! ```
//!
//! Numbers are written in shortest round-trip exponent form, so a written
//! matrix reads back bit-identical.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex;

use super::{DensityOperator, HermitianOperator};
use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Hermitian,
    Density,
}

impl MatrixKind {
    fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Hermitian => "hermitian",
            MatrixKind::Density => "density",
        }
    }
}

/// Parsed file contents, validated against the declared kind.
#[derive(Clone, Debug)]
pub enum MatrixRecord<T: Real> {
    Hermitian(HermitianOperator<T>),
    Density(DensityOperator<T>),
}

impl<T: Real> MatrixRecord<T> {
    pub fn matrix(&self) -> &CMatrix<T> {
        match self {
            MatrixRecord::Hermitian(h) => h.matrix(),
            MatrixRecord::Density(d) => d.matrix(),
        }
    }

    pub fn into_density(self) -> Result<DensityOperator<T>> {
        match self {
            MatrixRecord::Density(d) => Ok(d),
            MatrixRecord::Hermitian(h) => DensityOperator::new(h),
        }
    }

    pub fn into_hermitian(self) -> HermitianOperator<T> {
        match self {
            MatrixRecord::Density(d) => d.as_hermitian().clone(),
            MatrixRecord::Hermitian(h) => h,
        }
    }
}

pub fn write_matrix<T: Real>(m: &CMatrix<T>, kind: MatrixKind) -> String {
    let n = m.nrows();
    let mut out = format!("dim={} kind={}\n", n, kind.as_str());
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            writeln!(out, "{} {} {:e} {:e}", i, j, z.re, z.im).expect("write to String");
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num<T: Real>(tok: &str, line: usize) -> Result<T> {
    T::from_str(tok).map_err(|_| parse_err(line, format!("bad number `{tok}`")))
}

pub fn read_matrix<T: Real>(text: &str) -> Result<MatrixRecord<T>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let mut dim = None;
    let mut kind = None;
    for tok in header.split_whitespace() {
        match tok.split_once('=') {
            Some(("dim", v)) => dim = Some(usize::from_str(v).map_err(|_| parse_err(1, "bad dim"))?),
            Some(("kind", "hermitian")) => kind = Some(MatrixKind::Hermitian),
            Some(("kind", "density")) => kind = Some(MatrixKind::Density),
            _ => return Err(parse_err(1, format!("unexpected header token `{tok}`"))),
        }
    }
    let n = dim.ok_or_else(|| parse_err(1, "header lacks dim"))?;
    let kind = kind.ok_or_else(|| parse_err(1, "header lacks kind"))?;

    let mut m = CMatrix::<T>::zeros(n, n);
    let mut seen = vec![false; n * n];
    let mut count = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(parse_err(lineno, "expected `row col re im`"));
        }
        let i = usize::from_str(toks[0]).map_err(|_| parse_err(lineno, "bad row"))?;
        let j = usize::from_str(toks[1]).map_err(|_| parse_err(lineno, "bad col"))?;
        if i >= n || j >= n {
            return Err(parse_err(lineno, "index out of range"));
        }
        if seen[i * n + j] {
            return Err(parse_err(lineno, "duplicate entry"));
        }
        seen[i * n + j] = true;
        m[(i, j)] = Complex::new(parse_num(toks[2], lineno)?, parse_num(toks[3], lineno)?);
        count += 1;
    }
    if count != n * n {
        return Err(parse_err(0, format!("expected {} entries, found {}", n * n, count)));
    }
    Ok(match kind {
        MatrixKind::Hermitian => MatrixRecord::Hermitian(HermitianOperator::new(m)?),
        MatrixKind::Density => MatrixRecord::Density(DensityOperator::from_matrix(m)?),
    })
}
