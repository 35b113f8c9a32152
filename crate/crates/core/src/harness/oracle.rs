//! Dense-matrix reference pipelines for the two protocols. Everything here
//! is built from explicit matrices and Kronecker products; nothing goes
//! through the index-arithmetic gate engine.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.n + col] = v;
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn pow(&self, e: usize) -> Matrix {
        (0..e).fold(Matrix::identity(self.n), |acc, _| acc.mul(self))
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let n = self.n * other.n;
        let mut out = Matrix::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                let a = self.get(i, j);
                for k in 0..other.n {
                    for l in 0..other.n {
                        out.set(i * other.n + k, j * other.n + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Matrix {
        let mut out = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Largest entrywise distance.
    pub fn distance(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn root(d: usize, k: i64) -> Complex64 {
    let k = k.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * k / d as f64)
}

/// One-step shift `|m> -> |m+1>`.
pub fn shift(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d);
    for col in 0..d {
        m.set((col + 1) % d, col, Complex64::new(1.0, 0.0));
    }
    m
}

/// Diagonal phase `|m> -> w^m |m>`.
pub fn clock(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        m.set(i, i, root(d, i as i64));
    }
    m
}

pub fn x_power(d: usize, power: i64) -> Matrix {
    shift(d).pow(power.rem_euclid(d as i64) as usize)
}

pub fn z_power(d: usize, power: i64) -> Matrix {
    clock(d).pow(power.rem_euclid(d as i64) as usize)
}

/// Fourier-type matrix with entries `w^(-jm) / sqrt(d)`.
pub fn fourier(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d);
    let s = 1.0 / (d as f64).sqrt();
    for row in 0..d {
        for col in 0..d {
            m.set(row, col, root(d, -((row * col) as i64)) * s);
        }
    }
    m
}

/// Two-qudit adder `|m, n> -> |m, n + m>`, control first.
pub fn adder(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d * d);
    for c in 0..d {
        for t in 0..d {
            m.set(c * d + (t + c) % d, c * d + t, Complex64::new(1.0, 0.0));
        }
    }
    m
}

/// The subtracting adder, obtained as `adder^(d-1)`.
pub fn subtractor(d: usize) -> Matrix {
    adder(d).pow(d - 1)
}

/// `|digit><digit|`.
pub fn projector(d: usize, digit: usize) -> Matrix {
    let mut m = Matrix::zeros(d);
    m.set(digit, digit, Complex64::new(1.0, 0.0));
    m
}

/// Kronecker product of a list of factors.
pub fn kron_all(factors: &[Matrix]) -> Matrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kron(f))
}

fn ket(d: usize, digit: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    v[digit] = Complex64::new(1.0, 0.0);
    v
}

fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// One measurement branch of the teleport pipeline: the values Alice sends
/// (`m1` from `z`, `m2` from `x`), the branch weight and Bob's corrected
/// qudit.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportBranch {
    pub m1: usize,
    pub m2: usize,
    pub weight: f64,
    pub bob: Vec<Complex64>,
}

/// Teleports `psi` with register order `(x, z, y)`: Bell pair on `z, y`,
/// subtractor on `x, z`, Fourier on `x`, projection of `z` and `x`, then
/// `X^-m1` and `Z^m2` on `y`.
pub fn teleport_branches(d: usize, psi: &[Complex64]) -> Vec<TeleportBranch> {
    let id = Matrix::identity(d);
    let start = kron_vec(&kron_vec(psi, &ket(d, 0)), &ket(d, 0));
    let pipeline = [
        kron_all(&[id.clone(), fourier(d), id.clone()]),
        id.kron(&adder(d)),
        subtractor(d).kron(&id),
        kron_all(&[fourier(d), id.clone(), id.clone()]),
    ];
    let state = pipeline.iter().fold(start, |v, m| m.apply(&v));
    let mut out = Vec::new();
    for m1 in 0..d {
        for m2 in 0..d {
            let proj = kron_all(&[projector(d, m2), projector(d, m1), id.clone()]);
            let projected = proj.apply(&state);
            let weight = norm_sqr(&projected);
            let bob: Vec<Complex64> = (0..d)
                .map(|y| projected[(m2 * d + m1) * d + y] / weight.sqrt())
                .collect();
            let corrected = z_power(d, m2 as i64).apply(&x_power(d, -(m1 as i64)).apply(&bob));
            out.push(TeleportBranch {
                m1,
                m2,
                weight,
                bob: corrected,
            });
        }
    }
    out
}

/// Superdense-coding states over `(q1, q2)`: after pair preparation, after
/// `X^b`, after `Z^a`, after the subtractor and after the final Fourier.
pub fn sdc_states(d: usize, a: i64, b: i64) -> [Vec<Complex64>; 5] {
    let id = Matrix::identity(d);
    let zero = kron_vec(&ket(d, 0), &ket(d, 0));
    let psi1 = adder(d).apply(&fourier(d).kron(&id).apply(&zero));
    let psi2 = x_power(d, b).kron(&id).apply(&psi1);
    let psi3 = z_power(d, a).kron(&id).apply(&psi2);
    let psi4 = subtractor(d).apply(&psi3);
    let psi5 = fourier(d).kron(&id).apply(&psi4);
    [psi1, psi2, psi3, psi4, psi5]
}

/// `|<a|b>|^2` for unit vectors.
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm_sqr()
}
