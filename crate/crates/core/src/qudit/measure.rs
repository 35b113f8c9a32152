use num_complex::Complex64;

use super::{QuantumState, QuditError, Result};

/// One branch of a standard-basis measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    /// Outcome in `[0, d^r)`, digits ordered as the measured targets.
    pub outcome: usize,
    pub weight: f64,
    pub post_state: QuantumState,
}

impl MeasurementOutcome {
    /// Base-`d` digits of the outcome, one per measured qudit.
    pub fn digits(&self, d: usize, r: usize) -> Vec<usize> {
        let mut digits = vec![0; r];
        super::decompose(self.outcome, d, &mut digits);
        digits
    }
}

/// Measures `targets` in the standard basis.
///
/// The targets are first moved to the leading tensor positions, so outcome
/// `m` owns the contiguous block `[d^(n-r) m, d^(n-r) (m+1) - 1]`. Each
/// block is renormalized by `1/sqrt(g_m)` and the register is moved back to
/// its original order. Zero-weight outcomes are omitted.
pub fn measure(state: &QuantumState, targets: &[String]) -> Result<Vec<MeasurementOutcome>> {
    if targets.is_empty() {
        return Err(QuditError::EmptyTargets);
    }
    state.positions_of(targets)?;
    let mut order = targets.to_vec();
    order.extend(
        state
            .names()
            .iter()
            .filter(|n| !targets.contains(n))
            .cloned(),
    );
    let leading = state.permuted(&order)?;
    let d = state.dimension();
    let r = targets.len();
    let block = d.pow((state.num_qudits() - r) as u32);
    let amps = leading.amplitudes();

    let mut outcomes = Vec::new();
    for m in 0..d.pow(r as u32) {
        let (lower, upper) = (block * m, block * (m + 1) - 1);
        let weight: f64 = amps[lower..=upper].iter().map(|a| a.norm_sqr()).sum();
        if weight <= super::ZERO_WEIGHT {
            continue;
        }
        let scale = 1.0 / weight.sqrt();
        let mut post = vec![Complex64::new(0.0, 0.0); amps.len()];
        for i in lower..=upper {
            post[i] = amps[i] * scale;
        }
        let post = QuantumState::from_parts_unchecked(d, order.clone(), post);
        let post_state = post.permuted(state.names())?;
        outcomes.push(MeasurementOutcome {
            outcome: m,
            weight,
            post_state,
        });
    }
    let total: f64 = outcomes.iter().map(|o| o.weight).sum();
    if (total - 1.0).abs() > super::NORM_TOLERANCE {
        return Err(QuditError::NotNormalized(total));
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{apply_gate, make_state, GateSpec};

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn uniform_qutrit() {
        let s = apply_gate(
            &make_state(3, ["q"]).unwrap(),
            &names(&["q"]),
            &GateSpec::Hadamard,
        )
        .unwrap();
        let out = measure(&s, &names(&["q"])).unwrap();
        assert_eq!(out.len(), 3);
        for (m, o) in out.iter().enumerate() {
            assert_eq!(o.outcome, m);
            assert!((o.weight - 1.0 / 3.0).abs() < 1e-12);
            assert!((o.post_state.amplitude(&[m]).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_blocks_on_qubits() {
        let (a, b) = (0.6, 0.8);
        let s = QuantumState::from_amplitudes(
            2,
            ["p", "q"],
            vec![
                Complex64::new(a, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(b, 0.0),
            ],
        )
        .unwrap();
        let out = measure(&s, &names(&["p"])).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out[0].weight - a * a).abs() < 1e-12);
        assert!((out[0].post_state.amplitude(&[0, 0]).re - 1.0).abs() < 1e-12);
        assert!((out[1].weight - b * b).abs() < 1e-12);
        assert!((out[1].post_state.amplitude(&[1, 1]).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_outcomes_are_dropped() {
        let s = QuantumState::basis(3, ["a", "b"], &[2, 1]).unwrap();
        let out = measure(&s, &names(&["b"])).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].outcome, 1);
        assert_eq!(out[0].post_state, s);
    }

    #[test]
    fn outcome_digits_follow_target_order() {
        let s = QuantumState::basis(3, ["a", "b", "c"], &[2, 0, 1]).unwrap();
        let out = measure(&s, &names(&["c", "a"])).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].digits(3, 2), vec![1, 2]);
    }

    #[test]
    fn errors() {
        let s = make_state(2, ["a"]).unwrap();
        assert_eq!(measure(&s, &[]), Err(QuditError::EmptyTargets));
        assert!(matches!(
            measure(&s, &names(&["b"])),
            Err(QuditError::UnknownName(_))
        ));
    }
}
