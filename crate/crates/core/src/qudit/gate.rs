use std::fmt;

use num_complex::Complex64;

use super::{decompose, omega, reduce_mod, strides, QuantumState, QuditError, Result};

/// Symbolic description of a generalized qudit gate. Exponents are reduced
/// modulo `d` when the gate is applied, so `ShiftX(-m)` is `X^(d - m mod d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateSpec {
    /// `X^j |m> = |m + j mod d>`.
    ShiftX(i64),
    /// `Z^k |m> = w^(km) |m>`.
    PhaseZ(i64),
    /// `H |j> = d^(-1/2) sum_m w^(-jm) |m>`.
    Hadamard,
    /// Conjugate transpose of [`GateSpec::Hadamard`].
    HadamardInv,
    /// `R_C |m>|n> = |m>|n + m mod d>`, control first.
    CnotRight,
    /// `L_C |m>|n> = |m>|n - m mod d>`, control first.
    CnotLeft,
    /// `U_jk = sum_m w^(km) |m + j><m|`.
    PauliU(i64, i64),
}

impl GateSpec {
    pub fn arity(&self) -> usize {
        match self {
            GateSpec::CnotRight | GateSpec::CnotLeft => 2,
            _ => 1,
        }
    }

    /// Image of a basis state as a sparse column: `(output index, amplitude)`.
    fn column(&self, d: usize, input: usize) -> Vec<(usize, Complex64)> {
        let w = |p: i64| omega(d, p).expect("dimension checked by caller");
        let one = Complex64::new(1.0, 0.0);
        match *self {
            GateSpec::ShiftX(j) => vec![((input + reduce_mod(j, d)) % d, one)],
            GateSpec::PhaseZ(k) => vec![(input, w(reduce_mod(k, d) as i64 * input as i64))],
            GateSpec::PauliU(j, k) => vec![(
                (input + reduce_mod(j, d)) % d,
                w(reduce_mod(k, d) as i64 * input as i64),
            )],
            GateSpec::Hadamard | GateSpec::HadamardInv => {
                let sign = if *self == GateSpec::Hadamard { -1 } else { 1 };
                let scale = 1.0 / (d as f64).sqrt();
                (0..d)
                    .map(|m| (m, w(sign * (input * m) as i64) * scale))
                    .collect()
            }
            GateSpec::CnotRight | GateSpec::CnotLeft => {
                let (control, target) = (input / d, input % d);
                let shifted = if *self == GateSpec::CnotRight {
                    (target + control) % d
                } else {
                    (target + d - control) % d
                };
                vec![(control * d + shifted, one)]
            }
        }
    }

    /// Dense row-major matrix of the gate at dimension `d`.
    pub fn matrix(&self, d: usize) -> Result<Vec<Complex64>> {
        if d < 2 {
            return Err(QuditError::InvalidDimension(d));
        }
        let size = d.pow(self.arity() as u32);
        let mut m = vec![Complex64::new(0.0, 0.0); size * size];
        for input in 0..size {
            for (output, amp) in self.column(d, input) {
                m[output * size + input] += amp;
            }
        }
        Ok(m)
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSpec::ShiftX(j) => write!(f, "X^{j}"),
            GateSpec::PhaseZ(k) => write!(f, "Z^{k}"),
            GateSpec::Hadamard => write!(f, "H"),
            GateSpec::HadamardInv => write!(f, "Hinv"),
            GateSpec::CnotRight => write!(f, "Rc"),
            GateSpec::CnotLeft => write!(f, "Lc"),
            GateSpec::PauliU(j, k) => write!(f, "U^({j},{k})"),
        }
    }
}

/// Applies `gate` to the named factors (in the given order), identity elsewhere.
pub fn apply_gate(
    state: &QuantumState,
    targets: &[String],
    gate: &GateSpec,
) -> Result<QuantumState> {
    if targets.len() != gate.arity() {
        return Err(QuditError::ArityMismatch {
            gate: gate.to_string(),
            expected: gate.arity(),
            found: targets.len(),
        });
    }
    let positions = state.positions_of(targets)?;
    let d = state.dimension();
    let n = state.num_qudits();
    let r = positions.len();
    let stride = strides(d, n);
    let local_size = d.pow(r as u32);

    let columns: Vec<Vec<(usize, Complex64)>> =
        (0..local_size).map(|i| gate.column(d, i)).collect();
    // Offset of each local index within the global register.
    let local_offsets: Vec<usize> = (0..local_size)
        .map(|local| {
            let mut digits = vec![0; r];
            decompose(local, d, &mut digits);
            digits
                .iter()
                .zip(&positions)
                .map(|(&dg, &p)| dg * stride[p])
                .sum()
        })
        .collect();

    let old = state.amplitudes();
    let mut new = vec![Complex64::new(0.0, 0.0); old.len()];
    let mut digits = vec![0; n];
    for (index, amp) in old.iter().enumerate() {
        if *amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        decompose(index, d, &mut digits);
        let local = positions.iter().fold(0, |acc, &p| acc * d + digits[p]);
        let base = index - local_offsets[local];
        for &(out, coeff) in &columns[local] {
            new[base + local_offsets[out]] += coeff * amp;
        }
    }
    let next = QuantumState::from_parts_unchecked(d, state.names().to_vec(), new);
    next.assert_normalized()?;
    Ok(next)
}
