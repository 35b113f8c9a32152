use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::qudit::QuantumState;
use crate::semantics::EnvValue;
use crate::syntax::{parse, Program};

/// How far a literal's squared norm may stray from 1 before it is rejected
/// rather than renormalized. Four-digit amplitudes such as `0.7071` miss by
/// about `2e-5`.
pub const LITERAL_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiteralError {
    #[error("malformed state literal `{0}`")]
    Malformed(String),
    #[error("malformed amplitude `{0}`")]
    BadAmplitude(String),
    #[error("basis index {index} is out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
    #[error("basis index {0} appears twice")]
    DuplicateIndex(usize),
    #[error("state has squared norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("expected `name=value`, got `{0}`")]
    MalformedBinding(String),
}

fn parse_amplitude(text: &str) -> Result<Complex64, LiteralError> {
    let bad = || LiteralError::BadAmplitude(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // Split `a+bi` at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    let im = im
        .trim_start_matches('+')
        .parse::<f64>()
        .map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Parses `|k>` or `amp:index,amp:index,...` into a one-qudit state named
/// `name`. Amplitudes are real or `a+bi`; a state within
/// [`LITERAL_TOLERANCE`] of unit norm is rescaled exactly.
pub fn parse_state_literal(text: &str, d: usize, name: &str) -> Result<QuantumState, LiteralError> {
    if d < 2 {
        return Err(LiteralError::InvalidDimension(d));
    }
    let t = text.trim();
    let mut amps = vec![Complex64::new(0.0, 0.0); d];
    if let Some(inner) = t.strip_prefix('|').and_then(|r| r.strip_suffix('>')) {
        let index: usize = inner
            .trim()
            .parse()
            .map_err(|_| LiteralError::Malformed(text.to_string()))?;
        if index >= d {
            return Err(LiteralError::IndexOutOfRange {
                index,
                dimension: d,
            });
        }
        amps[index] = Complex64::new(1.0, 0.0);
    } else {
        let mut seen = vec![false; d];
        for entry in t.split(',') {
            let (amp, index) = entry
                .rsplit_once(':')
                .ok_or_else(|| LiteralError::Malformed(text.to_string()))?;
            let index: usize = index
                .trim()
                .parse()
                .map_err(|_| LiteralError::Malformed(text.to_string()))?;
            if index >= d {
                return Err(LiteralError::IndexOutOfRange {
                    index,
                    dimension: d,
                });
            }
            if std::mem::replace(&mut seen[index], true) {
                return Err(LiteralError::DuplicateIndex(index));
            }
            amps[index] = parse_amplitude(amp)?;
        }
    }
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > LITERAL_TOLERANCE {
        return Err(LiteralError::NotNormalized(norm));
    }
    let scale = 1.0 / norm.sqrt();
    let amps = amps.into_iter().map(|a| a * scale).collect();
    QuantumState::from_amplitudes(d, [name], amps).map_err(|_| LiteralError::NotNormalized(norm))
}

/// Parses a `name=value` input binding: an integer or a state literal.
pub fn parse_binding(text: &str, d: usize) -> Result<(String, EnvValue), LiteralError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| LiteralError::MalformedBinding(text.to_string()))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(LiteralError::MalformedBinding(text.to_string()));
    }
    let value = value.trim();
    if let Ok(i) = value.parse::<i64>() {
        return Ok((name.to_string(), EnvValue::Int(i)));
    }
    Ok((
        name.to_string(),
        EnvValue::State(parse_state_literal(value, d, name)?),
    ))
}

/// Haar-random single-qudit state: `d` complex Gaussians, normalized.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R, name: &str) -> QuantumState {
    loop {
        let amps: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            let amps = amps.into_iter().map(|a| a / norm).collect();
            return QuantumState::from_amplitudes(d, [name], amps).expect("normalized");
        }
    }
}

pub const TELEPORT_SOURCE: &str = include_str!("../../../../corpus/teleport.cqp");
pub const SDC_SOURCE: &str = include_str!("../../../../corpus/sdc.cqp");

/// Source text of a shipped protocol (`teleport` or `sdc`).
pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "teleport" => Some(TELEPORT_SOURCE),
        "sdc" => Some(SDC_SOURCE),
        _ => None,
    }
}

pub fn builtin_program(name: &str) -> Option<Program> {
    builtin_source(name).map(|src| parse(src).expect("shipped protocols parse"))
}
