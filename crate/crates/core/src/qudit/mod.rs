//! Dense state-vector engine for registers of named qudits sharing one
//! dimension `d`.
//!
//! Basis indices follow the big-endian convention: the leftmost qudit in
//! [`QuantumState::names`] is the most significant base-`d` digit. States are
//! immutable; every operation returns a fresh value.

mod bell;
mod gate;
mod measure;

pub use bell::bell_state;
pub use gate::{apply_gate, GateSpec};
pub use measure::{measure, MeasurementOutcome};

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Norm tolerance enforced on every constructed state.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Tolerance used for single-gate algebra.
pub const GATE_TOLERANCE: f64 = 1e-12;

/// Measurement outcomes at or below this weight are rounding residue of
/// exact zeros and are dropped.
pub const ZERO_WEIGHT: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuditError {
    #[error("invalid dimension {0}: qudits need d >= 2")]
    InvalidDimension(usize),
    #[error("duplicate qudit name `{0}`")]
    DuplicateName(String),
    #[error("unknown qudit `{0}`")]
    UnknownName(String),
    #[error("qudit `{0}` is listed more than once among the targets")]
    RepeatedTarget(String),
    #[error("gate {gate} acts on {expected} qudit(s), got {found}")]
    ArityMismatch {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("registers share the qudit name `{0}`")]
    NameCollision(String),
    #[error("empty target list")]
    EmptyTargets,
    #[error("index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
    #[error("expected {expected} amplitudes, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("the kept qudits are entangled with the discarded ones (purity {0})")]
    NonSeparable(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub type Result<T, E = QuditError> = std::result::Result<T, E>;

/// `exp(2 pi i power / d)`.
pub fn omega(d: usize, power: i64) -> Result<Complex64> {
    if d < 2 {
        return Err(QuditError::InvalidDimension(d));
    }
    let reduced = power.rem_euclid(d as i64) as f64;
    Ok(Complex64::from_polar(1.0, 2.0 * PI * reduced / d as f64))
}

/// Reduces an exponent into `[0, d)`.
pub fn reduce_mod(value: i64, d: usize) -> usize {
    value.rem_euclid(d as i64) as usize
}

/// Global state of a register of named qudits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    dimension: usize,
    names: Vec<String>,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// Builds a state from raw amplitudes, checking length and normalization.
    pub fn from_amplitudes<S: Into<String>>(
        dimension: usize,
        names: impl IntoIterator<Item = S>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let names = checked_names(dimension, names)?;
        let expected = dimension.pow(names.len() as u32);
        if amplitudes.len() != expected {
            return Err(QuditError::LengthMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        let state = QuantumState {
            dimension,
            names,
            amplitudes,
        };
        state.assert_normalized()?;
        Ok(state)
    }

    /// Basis state `|digits>` over `names`.
    pub fn basis<S: Into<String>>(
        dimension: usize,
        names: impl IntoIterator<Item = S>,
        digits: &[usize],
    ) -> Result<Self> {
        let names = checked_names(dimension, names)?;
        if digits.len() != names.len() {
            return Err(QuditError::ShapeMismatch(format!(
                "{} digits for {} qudits",
                digits.len(),
                names.len()
            )));
        }
        let mut index = 0;
        for &digit in digits {
            if digit >= dimension {
                return Err(QuditError::IndexOutOfRange {
                    index: digit,
                    dimension,
                });
            }
            index = index * dimension + digit;
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dimension.pow(names.len() as u32)];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            dimension,
            names,
            amplitudes,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn num_qudits(&self) -> usize {
        self.names.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude of the basis state with the given digits (in name order).
    pub fn amplitude(&self, digits: &[usize]) -> Complex64 {
        let index = digits.iter().fold(0, |acc, &dg| acc * self.dimension + dg);
        self.amplitudes[index]
    }

    pub(crate) fn assert_normalized(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE || !norm.is_finite() {
            return Err(QuditError::NotNormalized(norm));
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(
        dimension: usize,
        names: Vec<String>,
        amplitudes: Vec<Complex64>,
    ) -> Self {
        QuantumState {
            dimension,
            names,
            amplitudes,
        }
    }

    pub(crate) fn positions_of(&self, targets: &[String]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        targets
            .iter()
            .map(|t| {
                if !seen.insert(t.as_str()) {
                    return Err(QuditError::RepeatedTarget(t.clone()));
                }
                self.position(t)
                    .ok_or_else(|| QuditError::UnknownName(t.clone()))
            })
            .collect()
    }

    /// Returns the same vector with its tensor factors reordered to `order`,
    /// which must be a permutation of the current names.
    pub fn permuted(&self, order: &[String]) -> Result<Self> {
        if order.len() != self.names.len() {
            return Err(QuditError::ShapeMismatch(format!(
                "permutation of {} names over {} qudits",
                order.len(),
                self.names.len()
            )));
        }
        let positions = self.positions_of(order)?;
        if positions.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let d = self.dimension;
        let n = self.names.len();
        let old_strides = strides(d, n);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        let mut digits = vec![0usize; n];
        for (new_index, slot) in amplitudes.iter_mut().enumerate() {
            decompose(new_index, d, &mut digits);
            let old_index: usize = digits
                .iter()
                .zip(&positions)
                .map(|(&digit, &old_pos)| digit * old_strides[old_pos])
                .sum();
            *slot = self.amplitudes[old_index];
        }
        Ok(QuantumState {
            dimension: d,
            names: order.to_vec(),
            amplitudes,
        })
    }

    /// Renames a qudit, keeping the amplitudes untouched.
    pub fn renamed(&self, from: &str, to: &str) -> Result<Self> {
        let pos = self
            .position(from)
            .ok_or_else(|| QuditError::UnknownName(from.to_string()))?;
        if from != to && self.contains(to) {
            return Err(QuditError::DuplicateName(to.to_string()));
        }
        let mut next = self.clone();
        next.names[pos] = to.to_string();
        Ok(next)
    }
}

impl fmt::Display for QuantumState {
    /// Ket notation listing the non-negligible basis terms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.names.len();
        let mut digits = vec![0usize; n];
        let mut first = true;
        for (index, amp) in self.amplitudes.iter().enumerate() {
            if amp.norm() < 1e-9 {
                continue;
            }
            decompose(index, self.dimension, &mut digits);
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let ket: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
            write!(f, "({:.6}{:+.6}i)|{}>", amp.re, amp.im, ket.join(","))?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " over [{}]", self.names.join(","))
    }
}

fn checked_names<S: Into<String>>(
    dimension: usize,
    names: impl IntoIterator<Item = S>,
) -> Result<Vec<String>> {
    if dimension < 2 {
        return Err(QuditError::InvalidDimension(dimension));
    }
    let names: Vec<String> = names.into_iter().map(Into::into).collect();
    let mut seen = HashSet::new();
    for name in &names {
        if !seen.insert(name.as_str()) {
            return Err(QuditError::DuplicateName(name.clone()));
        }
    }
    Ok(names)
}

/// Strides of each factor in a register of `n` qudits.
pub(crate) fn strides(d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        out[k] = out[k + 1] * d;
    }
    out
}

/// Writes the base-`d` digits of `index` into `digits`, most significant first.
pub(crate) fn decompose(mut index: usize, d: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
}

/// Fresh register `|0...0>` over `names`.
pub fn make_state<S: Into<String>>(
    dimension: usize,
    names: impl IntoIterator<Item = S>,
) -> Result<QuantumState> {
    let names = checked_names(dimension, names)?;
    let digits = vec![0; names.len()];
    QuantumState::basis(dimension, names, &digits)
}

/// Tensor product `a ⊗ b`; names are `a`'s followed by `b`'s.
pub fn join(a: &QuantumState, b: &QuantumState) -> Result<QuantumState> {
    if a.dimension != b.dimension {
        return Err(QuditError::DimensionMismatch(a.dimension, b.dimension));
    }
    if let Some(clash) = b.names.iter().find(|n| a.contains(n)) {
        return Err(QuditError::NameCollision(clash.clone()));
    }
    let mut amplitudes = Vec::with_capacity(a.amplitudes.len() * b.amplitudes.len());
    for x in &a.amplitudes {
        for y in &b.amplitudes {
            amplitudes.push(x * y);
        }
    }
    let mut names = a.names.clone();
    names.extend(b.names.iter().cloned());
    Ok(QuantumState {
        dimension: a.dimension,
        names,
        amplitudes,
    })
}

/// Inner product `<a|b>`, positional over the tensor factors.
pub fn inner(a: &QuantumState, b: &QuantumState) -> Result<Complex64> {
    if a.dimension != b.dimension {
        return Err(QuditError::DimensionMismatch(a.dimension, b.dimension));
    }
    if a.names.len() != b.names.len() {
        return Err(QuditError::ShapeMismatch(format!(
            "{} qudits vs {} qudits",
            a.names.len(),
            b.names.len()
        )));
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `|<a|b>|^2`. Insensitive to global phase; factor order is positional.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr())
}

/// Reduced density matrix on `keep` (row-major, `d^k x d^k`), in the order
/// given by `keep`.
pub fn reduced_density_matrix(state: &QuantumState, keep: &[String]) -> Result<Vec<Complex64>> {
    let (block, rows, cols) = split_matrix(state, keep)?;
    let mut rho = vec![Complex64::new(0.0, 0.0); rows * rows];
    for r in 0..rows {
        for s in 0..rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..cols {
                acc += block[r * cols + c] * block[s * cols + c].conj();
            }
            rho[r * rows + s] = acc;
        }
    }
    Ok(rho)
}

/// Reshapes the state into a `d^|keep| x d^(n-|keep|)` matrix with the kept
/// factors indexing rows.
fn split_matrix(state: &QuantumState, keep: &[String]) -> Result<(Vec<Complex64>, usize, usize)> {
    state.positions_of(keep)?;
    let mut order: Vec<String> = keep.to_vec();
    order.extend(state.names.iter().filter(|n| !keep.contains(n)).cloned());
    let moved = state.permuted(&order)?;
    let rows = state.dimension.pow(keep.len() as u32);
    let cols = moved.amplitudes.len() / rows;
    Ok((moved.amplitudes, rows, cols))
}

/// Drops `names` from the register, returning the pure state of the rest.
/// Fails when the discarded factors are entangled with the kept ones.
pub fn discard(state: &QuantumState, names: &[String]) -> Result<QuantumState> {
    state.positions_of(names)?;
    let keep: Vec<String> = state
        .names
        .iter()
        .filter(|n| !names.contains(n))
        .cloned()
        .collect();
    let (block, rows, cols) = split_matrix(state, &keep)?;

    // Pure reduced state iff the reshaped matrix has rank one; the column
    // with the largest weight then spans it.
    let rho = reduced_density_matrix(state, &keep)?;
    let mut purity = 0.0;
    for r in 0..rows {
        for s in 0..rows {
            purity += (rho[r * rows + s] * rho[s * rows + r]).re;
        }
    }
    if (purity - 1.0).abs() > NORM_TOLERANCE {
        return Err(QuditError::NonSeparable(purity));
    }
    let best = (0..cols)
        .max_by(|&a, &b| {
            let wa: f64 = (0..rows).map(|r| block[r * cols + a].norm_sqr()).sum();
            let wb: f64 = (0..rows).map(|r| block[r * cols + b].norm_sqr()).sum();
            wa.total_cmp(&wb)
        })
        .unwrap_or(0);
    let column: Vec<Complex64> = (0..rows).map(|r| block[r * cols + best]).collect();
    let norm = column.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let amplitudes = column.into_iter().map(|a| a / norm).collect();
    QuantumState::from_amplitudes(state.dimension, keep, amplitudes)
}
