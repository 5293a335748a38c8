//! Brute-force verification of the protocol's structural claims: which
//! sender/receiver pair assignments admit dense coding after the remaining
//! parties measure, full branch-tree enumeration, and capacity sweeps over
//! the measurement angles.

use crate::protocol::{
    measure_cascade, outcome_tuple, pair_coefficients, Branch, ChannelSpec, FilterParams,
    ProtocolError, Support,
};
use crate::statevector::{Outcome, RotatedBasis, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalysisError {
    #[error("{found} angles supplied for {expected} controllers")]
    AngleCount { expected: usize, found: usize },
    #[error("assignment indices must partition 1..={num_qubits}")]
    BadAssignment { num_qubits: usize },
    #[error("sender and receiver must differ")]
    SenderReceiverClash,
    #[error("need at least one angle sample")]
    NoSamples,
    #[error("capacity sweep needs at least 2 grid points per axis")]
    GridTooSmall,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl AnalysisError {
    pub fn is_impossible_branch(&self) -> bool {
        matches!(self, AnalysisError::Protocol(p) if p.is_impossible_branch())
    }
}

/// A way of distributing the channel qubits: one sender, one receiver, and
/// the remaining qubits measured as controllers (in the listed order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAssignment {
    pub sender: usize,
    pub receiver: usize,
    pub controllers: Vec<usize>,
}

impl PairAssignment {
    pub fn new(
        sender: usize,
        receiver: usize,
        controllers: Vec<usize>,
    ) -> Result<Self, AnalysisError> {
        if sender == receiver {
            return Err(AnalysisError::SenderReceiverClash);
        }
        let num_qubits = controllers.len() + 2;
        let mut seen = vec![false; num_qubits + 1];
        for &q in controllers.iter().chain([&sender, &receiver]) {
            if q == 0 || q > num_qubits || seen[q] {
                return Err(AnalysisError::BadAssignment { num_qubits });
            }
            seen[q] = true;
        }
        Ok(PairAssignment {
            sender,
            receiver,
            controllers,
        })
    }

    /// Assignment for a sender/receiver pair with the remaining qubits as
    /// controllers in ascending order.
    pub fn for_pair(
        num_qubits: usize,
        sender: usize,
        receiver: usize,
    ) -> Result<Self, AnalysisError> {
        let controllers = (1..=num_qubits)
            .filter(|&q| q != sender && q != receiver)
            .collect();
        PairAssignment::new(sender, receiver, controllers)
    }

    /// All unordered sender/receiver pairs of an n-qubit register.
    pub fn all_pairs(num_qubits: usize) -> Vec<PairAssignment> {
        let mut out = Vec::new();
        for sender in 1..=num_qubits {
            for receiver in (sender + 1)..=num_qubits {
                out.push(PairAssignment::for_pair(num_qubits, sender, receiver).expect("valid"));
            }
        }
        out
    }
}

/// Walk every outcome path of the controller tree. Impossible paths are
/// returned with probability 0 and no pair state; probabilities over the
/// full tree sum to 1. The surviving pair register keeps the original label
/// order (lower label first).
pub fn enumerate_branches(
    channel: &StateVector,
    assignment: &PairAssignment,
    angles: &[f64],
) -> Result<Vec<Branch>, AnalysisError> {
    let n = assignment.controllers.len();
    if angles.len() != n {
        return Err(AnalysisError::AngleCount {
            expected: n,
            found: angles.len(),
        });
    }
    let mut branches = Vec::with_capacity(1 << n);
    for k in 0..(1usize << n) {
        let outcomes = outcome_tuple(k, n);
        match measure_cascade(channel, &assignment.controllers, angles, &outcomes) {
            Ok((probability, pair_state)) => branches.push(Branch {
                outcomes,
                probability,
                pair_state: Some(pair_state),
            }),
            Err(err) if err.is_impossible_branch() => branches.push(Branch {
                outcomes,
                probability: 0.0,
                pair_state: None,
            }),
            Err(err) => return Err(err.into()),
        }
    }
    Ok(branches)
}

/// Support classification of a collapsed pair state; diag and anti are the
/// codable classes.
pub fn dense_codable(pair: &StateVector) -> Support {
    pair_coefficients(pair).2
}

/// Aggregated codability of one assignment over the sampled angle tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodabilityVerdict {
    pub codable: bool,
    pub support_class: Support,
    pub witness_angles: Vec<Vec<f64>>,
}

/// Verdict for one sender/receiver assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub assignment: PairAssignment,
    pub verdict: CodabilityVerdict,
}

fn sample_generic_angle(rng: &mut ChaCha8Rng) -> f64 {
    // A coincidental angle at a multiple of pi/2 can hide an amplitude and
    // make an invalid pairing look codable, so keep a margin around those.
    loop {
        let theta: f64 = rng.gen::<f64>() * FRAC_PI_2;
        if theta > 1e-6 && theta < FRAC_PI_2 - 1e-6 {
            return theta;
        }
    }
}

/// Check all 6 sender/receiver pairs of the four-particle channel: a pair
/// is valid iff every branch's collapsed pair state is codable for every
/// sampled controller angle tuple.
pub fn check_distributions(
    spec: &ChannelSpec,
    angle_samples: usize,
    seed: u64,
) -> Result<Vec<PairVerdict>, AnalysisError> {
    if angle_samples == 0 {
        return Err(AnalysisError::NoSamples);
    }
    let channel = crate::protocol::build_channel(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verdicts = Vec::new();
    for assignment in PairAssignment::all_pairs(4) {
        let mut codable = true;
        let mut support_class: Option<Support> = None;
        let mut witness_angles = Vec::with_capacity(angle_samples);
        for _ in 0..angle_samples {
            let angles: Vec<f64> = (0..assignment.controllers.len())
                .map(|_| sample_generic_angle(&mut rng))
                .collect();
            for branch in enumerate_branches(&channel, &assignment, &angles)? {
                let Some(pair) = branch.pair_state else {
                    continue;
                };
                let support = dense_codable(&pair);
                if !support.codable() {
                    codable = false;
                    support_class = Some(Support::Other);
                } else if support_class.is_none() {
                    support_class = Some(support);
                }
            }
            witness_angles.push(angles);
        }
        verdicts.push(PairVerdict {
            assignment,
            verdict: CodabilityVerdict {
                codable,
                support_class: support_class.unwrap_or(Support::Other),
                witness_angles,
            },
        });
    }
    Ok(verdicts)
}

/// The valid (sender, receiver) pairs out of a verdict list.
pub fn valid_pairs(verdicts: &[PairVerdict]) -> Vec<(usize, usize)> {
    verdicts
        .iter()
        .filter(|v| v.verdict.codable)
        .map(|v| (v.assignment.sender, v.assignment.receiver))
        .collect()
}

/// Unnormalized pair amplitudes for one outcome path, derived by direct
/// summation over the channel's raw amplitudes instead of the collapse
/// cascade. Index order is (sender bit, receiver bit); the squared norm
/// equals the joint branch probability. This is the slow independent route
/// used to cross-check the branch enumeration.
pub fn raw_pair_support(
    channel: &StateVector,
    assignment: &PairAssignment,
    angles: &[f64],
    outcomes: &[Outcome],
) -> [Complex64; 4] {
    let n = channel.num_qubits();
    let mut pair_amps = [Complex64::new(0.0, 0.0); 4];
    for (idx, &amp) in channel.amplitudes().iter().enumerate() {
        let mut weight = 1.0;
        for ((&q, &theta), &outcome) in assignment.controllers.iter().zip(angles).zip(outcomes) {
            let bit = (idx >> (n - q)) & 1;
            weight *= RotatedBasis::new(theta).components(outcome)[bit];
        }
        let sender_bit = (idx >> (n - assignment.sender)) & 1;
        let receiver_bit = (idx >> (n - assignment.receiver)) & 1;
        pair_amps[(sender_bit << 1) | receiver_bit] += amp * weight;
    }
    pair_amps
}

/// One cell of a capacity sweep. Degenerate cells are outcome paths of
/// probability 0, where the filter parameters are undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub theta1: f64,
    pub theta2: f64,
    pub degenerate: bool,
    pub gamma: Option<f64>,
    pub p_success: Option<f64>,
    pub capacity: Option<f64>,
}

/// Evaluate the all-plus branch pipeline on a uniform grid over
/// [0, pi/2] x [0, pi/2] (inclusive ends), row-major in (theta1, theta2).
pub fn sweep_capacity(
    spec: &ChannelSpec,
    grid_size: usize,
) -> Result<Vec<SweepCell>, AnalysisError> {
    if grid_size < 2 {
        return Err(AnalysisError::GridTooSmall);
    }
    let channel = crate::protocol::build_channel(spec);
    let step = FRAC_PI_2 / (grid_size - 1) as f64;
    let outcomes = [Outcome::Plus, Outcome::Plus];
    let mut cells = Vec::with_capacity(grid_size * grid_size);
    for i in 0..grid_size {
        let theta1 = i as f64 * step;
        for j in 0..grid_size {
            let theta2 = j as f64 * step;
            let cell = match measure_cascade(&channel, &[4, 1], &[theta1, theta2], &outcomes) {
                Ok((probability, pair)) => {
                    let (alpha, beta, support) = pair_coefficients(&pair);
                    if support.codable() {
                        let scale = probability.sqrt();
                        let params = FilterParams::from_raw(alpha * scale, beta * scale)?;
                        SweepCell {
                            theta1,
                            theta2,
                            degenerate: false,
                            gamma: Some(params.gamma),
                            p_success: Some(params.success_probability()),
                            capacity: Some(1.0 + params.success_probability()),
                        }
                    } else {
                        SweepCell {
                            theta1,
                            theta2,
                            degenerate: true,
                            gamma: None,
                            p_success: None,
                            capacity: None,
                        }
                    }
                }
                Err(err) if err.is_impossible_branch() => SweepCell {
                    theta1,
                    theta2,
                    degenerate: true,
                    gamma: None,
                    p_success: None,
                    capacity: None,
                },
                Err(err) => return Err(err.into()),
            };
            cells.push(cell);
        }
    }
    Ok(cells)
}
