//! Shared oracles for the integration suites. Everything here goes through
//! dense Kronecker-product matrices and explicit index sums, independent of
//! the library's in-place update paths.

#![allow(dead_code)]

use densecode::statevector::Outcome;
use densecode::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Matrix = Vec<Vec<Complex64>>;

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cre(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> Matrix {
    let mut m = vec![vec![czero(); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = cre(1.0);
    }
    m
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut out = vec![vec![czero(); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Embed a 2x2 matrix acting on 1-based `qubit` of an n-qubit register
/// (qubit 1 = most significant) as a full 2^n matrix via Kronecker products.
pub fn embed_one_qubit(u: &[[Complex64; 2]; 2], qubit: usize, num_qubits: usize) -> Matrix {
    let local: Matrix = vec![vec![u[0][0], u[0][1]], vec![u[1][0], u[1][1]]];
    let mut full = identity(1);
    for q in 1..=num_qubits {
        let factor = if q == qubit {
            local.clone()
        } else {
            identity(2)
        };
        full = kron(&full, &factor);
    }
    full
}

/// Rank-1 projector |v><v| onto the rotated-basis vector.
pub fn rotated_projector(theta: f64, outcome: Outcome) -> [[Complex64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    let v = match outcome {
        Outcome::Plus => [c, s],
        Outcome::Minus => [s, -c],
    };
    [
        [cre(v[0] * v[0]), cre(v[0] * v[1])],
        [cre(v[1] * v[0]), cre(v[1] * v[1])],
    ]
}

/// Rebuild the pre-removal register by inserting the measured qubit's basis
/// vector back at its slot: the inverse of collapse-with-removal.
pub fn insert_qubit(
    collapsed: &[Complex64],
    qubit: usize,
    num_qubits_after: usize,
    v: [f64; 2],
) -> Vec<Complex64> {
    let n = num_qubits_after + 1;
    let bit = n - qubit;
    let mut out = vec![czero(); 1 << n];
    for (r, &amp) in collapsed.iter().enumerate() {
        let low = r & ((1 << bit) - 1);
        let base = ((r >> bit) << (bit + 1)) | low;
        out[base] += amp * v[0];
        out[base | (1 << bit)] += amp * v[1];
    }
    out
}

/// Density matrix of the register with 1-based `qubit` traced out.
pub fn partial_trace_qubit(amps: &[Complex64], num_qubits: usize, qubit: usize) -> Matrix {
    let bit = num_qubits - qubit;
    let rest = 1usize << (num_qubits - 1);
    let expand = |r: usize, b: usize| -> usize {
        let low = r & ((1 << bit) - 1);
        (((r >> bit) << (bit + 1)) | low) | (b << bit)
    };
    let mut rho = vec![vec![czero(); rest]; rest];
    for r in 0..rest {
        for rp in 0..rest {
            let mut acc = czero();
            for b in 0..2 {
                acc += amps[expand(r, b)] * amps[expand(rp, b)].conj();
            }
            rho[r][rp] = acc;
        }
    }
    rho
}

pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Random normalized complex amplitudes.
pub fn random_state(rng: &mut ChaCha8Rng, num_qubits: usize) -> Vec<Complex64> {
    loop {
        let amps: Vec<Complex64> = (0..(1 << num_qubits))
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let n = norm_sq(&amps);
        if n > 1e-3 {
            let scale = 1.0 / n.sqrt();
            return amps.into_iter().map(|a| a * scale).collect();
        }
    }
}

/// Random element of U(2) from three Euler angles and a global phase.
pub fn random_one_qubit_unitary(rng: &mut ChaCha8Rng) -> [[Complex64; 2]; 2] {
    let theta: f64 = rng.gen::<f64>() * std::f64::consts::PI;
    let phi: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let lambda: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let delta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let g = Complex64::from_polar(1.0, delta);
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [g * c, -g * Complex64::from_polar(s, lambda)],
        [
            g * Complex64::from_polar(s, phi),
            g * Complex64::from_polar(c, phi + lambda),
        ],
    ]
}

/// Random normalized real channel coefficients with every magnitude at
/// least `min_coeff`.
pub fn random_spec_coefficients(rng: &mut ChaCha8Rng, min_coeff: f64, signed: bool) -> [f64; 4] {
    loop {
        let mut raw = [0.0f64; 4];
        for slot in raw.iter_mut() {
            let magnitude = 0.2 + 0.8 * rng.gen::<f64>();
            let sign = if signed && rng.gen::<bool>() {
                -1.0
            } else {
                1.0
            };
            *slot = sign * magnitude;
        }
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        for slot in raw.iter_mut() {
            *slot /= norm;
        }
        if raw.iter().all(|x| x.abs() >= min_coeff) {
            return raw;
        }
    }
}

/// Random angle bounded away from the degenerate multiples of pi/2.
pub fn random_generic_angle(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let theta: f64 = rng.gen::<f64>() * std::f64::consts::FRAC_PI_2;
        if theta > 1e-3 && theta < std::f64::consts::FRAC_PI_2 - 1e-3 {
            return theta;
        }
    }
}
