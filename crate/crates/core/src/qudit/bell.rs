use num_complex::Complex64;

use super::{omega, QuantumState, QuditError, Result};

/// Generalized Bell state `|Psi^{nm}> = d^(-1/2) sum_j w^(-jn) |j>|j + m>`.
pub fn bell_state<S: Into<String>>(
    d: usize,
    n: usize,
    m: usize,
    names: [S; 2],
) -> Result<QuantumState> {
    if d < 2 {
        return Err(QuditError::InvalidDimension(d));
    }
    for index in [n, m] {
        if index >= d {
            return Err(QuditError::IndexOutOfRange {
                index,
                dimension: d,
            });
        }
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        amps[j * d + (j + m) % d] = omega(d, -((j * n) as i64))? * scale;
    }
    QuantumState::from_amplitudes(d, names, amps)
}
