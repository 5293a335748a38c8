//! The end-to-end controlled dense-coding pipeline: channel construction,
//! controller measurement rounds, entanglement concentration by local
//! filtering, channel capacity, Pauli encode / Bell decode, and a seeded
//! Monte-Carlo check of the whole chain.

mod coding;
mod filter;
mod montecarlo;

pub use coding::{decode, encode, Message};
pub use filter::{
    bell_target, capacity, concentrate, filter_params, filter_unitary, CapacityReport,
    ConcentrationResult, FilterParams,
};
pub use montecarlo::{monte_carlo, BranchStats, EmpiricalReport};

use crate::statevector::{Outcome, RotatedBasis, StateError, StateVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProtocolError {
    #[error(
        "channel coefficients not normalized: squared norm is {norm_sq} (deficit {deficit:.3e})"
    )]
    UnnormalizedSpec { norm_sq: f64, deficit: f64 },
    #[error("a GHZ-family channel needs at least one controller")]
    EmptyGhz,
    #[error("measurement plan has {found} angles for {expected} controllers")]
    PlanLength { expected: usize, found: usize },
    #[error("measurement angle must be finite, got {value}")]
    NonFiniteAngle { value: f64 },
    #[error("branch selector has {found} outcomes for {expected} controllers")]
    BranchLength { expected: usize, found: usize },
    #[error("pair coefficients are both zero")]
    ZeroPair,
    #[error("pair coefficients not normalized: |alpha|^2 + |beta|^2 = {norm_sq}")]
    UnnormalizedPair { norm_sq: f64 },
    #[error("filter ratio {tan_gamma} outside [0, 1]")]
    BadFilterRatio { tan_gamma: f64 },
    #[error("pair state is not supported on a complementary basis pair")]
    UnsupportedPair,
    #[error("input is not the expected Bell channel (fidelity {fidelity:.6})")]
    NotBellChannel { fidelity: f64 },
    #[error("no Bell outcome is certain (max probability {max_probability:.6}): ambiguous decode")]
    AmbiguousDecode { max_probability: f64 },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error(transparent)]
    State(#[from] StateError),
}

impl ProtocolError {
    /// True when the error is (or wraps) an impossible-branch condition.
    pub fn is_impossible_branch(&self) -> bool {
        matches!(
            self,
            ProtocolError::State(StateError::ImpossibleBranch { .. })
        )
    }
}

/// Real coefficients (a, b, c, d) of the four-particle channel
/// a|0000> + b|1001> + c|0110> + d|1111> over qubits (1, 2, 3, 4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl ChannelSpec {
    /// Validates a^2 + b^2 + c^2 + d^2 = 1 within 1e-9.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, ProtocolError> {
        let norm_sq = a * a + b * b + c * c + d * d;
        let deficit = (norm_sq - 1.0).abs();
        if !deficit.is_finite() || deficit > 1e-9 {
            return Err(ProtocolError::UnnormalizedSpec { norm_sq, deficit });
        }
        Ok(ChannelSpec { a, b, c, d })
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// The balanced channel with all coefficients 1/2.
    pub fn balanced() -> Self {
        ChannelSpec {
            a: 0.5,
            b: 0.5,
            c: 0.5,
            d: 0.5,
        }
    }
}

/// Size parameter of an (N+2)-particle GHZ-family channel: N controllers
/// hold qubits 1..N, sender and receiver hold qubits N+1 and N+2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhzChannelSpec {
    n_controllers: usize,
}

impl GhzChannelSpec {
    pub fn new(n_controllers: usize) -> Result<Self, ProtocolError> {
        if n_controllers < 1 {
            return Err(ProtocolError::EmptyGhz);
        }
        Ok(GhzChannelSpec { n_controllers })
    }

    pub fn n_controllers(&self) -> usize {
        self.n_controllers
    }
}

/// Either channel family accepted by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    FourParticle(ChannelSpec),
    Ghz(GhzChannelSpec),
}

impl Channel {
    pub fn build(&self) -> StateVector {
        match self {
            Channel::FourParticle(spec) => build_channel(spec),
            Channel::Ghz(spec) => ghz_channel(spec),
        }
    }

    /// Controller qubits in measurement order. The four-particle protocol
    /// measures party 4 first, then party 1; GHZ controllers go in order.
    pub fn controller_qubits(&self) -> Vec<usize> {
        match self {
            Channel::FourParticle(_) => vec![4, 1],
            Channel::Ghz(spec) => (1..=spec.n_controllers).collect(),
        }
    }

    /// (sender, receiver) qubit labels in the original register.
    pub fn pair_qubits(&self) -> (usize, usize) {
        match self {
            Channel::FourParticle(_) => (2, 3),
            Channel::Ghz(spec) => (spec.n_controllers + 1, spec.n_controllers + 2),
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            Channel::FourParticle(_) => 4,
            Channel::Ghz(spec) => spec.n_controllers + 2,
        }
    }
}

/// Controller measurement angles, one per controller in measurement order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub angles: Vec<f64>,
}

impl MeasurementPlan {
    pub fn new(angles: Vec<f64>) -> Self {
        MeasurementPlan { angles }
    }

    /// Plan for the four-particle channel: theta1 for party 4, theta2 for party 1.
    pub fn pair(theta1: f64, theta2: f64) -> Self {
        MeasurementPlan {
            angles: vec![theta1, theta2],
        }
    }
}

/// Which outcome paths of the controller tree to evaluate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchPolicy {
    AllBranches,
    Single(Vec<Outcome>),
}

impl BranchPolicy {
    pub fn label(&self) -> String {
        match self {
            BranchPolicy::AllBranches => "all".to_string(),
            BranchPolicy::Single(outcomes) => outcome_string(outcomes),
        }
    }
}

/// Render an outcome path as a +/- string.
pub fn outcome_string(outcomes: &[Outcome]) -> String {
    outcomes.iter().map(|o| o.symbol()).collect()
}

/// The outcome tuple for path index `k` over `n` controllers, counting
/// lexicographically with plus before minus (k = 0 is the all-plus path).
pub fn outcome_tuple(k: usize, n: usize) -> Vec<Outcome> {
    (0..n)
        .map(|i| {
            if (k >> (n - 1 - i)) & 1 == 0 {
                Outcome::Plus
            } else {
                Outcome::Minus
            }
        })
        .collect()
}

/// One path of the controller-measurement tree. `pair_state` is None for
/// impossible paths (probability 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub outcomes: Vec<Outcome>,
    pub probability: f64,
    pub pair_state: Option<StateVector>,
}

/// Support classification of a two-qubit state against the complementary
/// basis pairs {|00>, |11>} and {|01>, |10>}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Diag,
    Anti,
    Other,
}

impl Support {
    /// Diag and anti supports admit concentration followed by dense coding.
    pub fn codable(self) -> bool {
        !matches!(self, Support::Other)
    }
}

/// Amplitude-magnitude tolerance for classifying pair support.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Build the four-particle channel state from its coefficients.
pub fn build_channel(spec: &ChannelSpec) -> StateVector {
    let [a, b, c, d] = spec.coefficients();
    StateVector::make_state(
        4,
        &[
            ("0000", Complex64::new(a, 0.0)),
            ("1001", Complex64::new(b, 0.0)),
            ("0110", Complex64::new(c, 0.0)),
            ("1111", Complex64::new(d, 0.0)),
        ],
    )
    .expect("fixed labels are valid")
}

/// Build the (N+2)-qubit GHZ state (|0..0> + |1..1>)/sqrt(2).
pub fn ghz_channel(spec: &GhzChannelSpec) -> StateVector {
    let n = spec.n_controllers + 2;
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let zeros = "0".repeat(n);
    let ones = "1".repeat(n);
    StateVector::make_state(n, &[(zeros.as_str(), r), (ones.as_str(), r)])
        .expect("fixed labels are valid")
}

/// One controller measurement: project `qubit` onto the rotated basis at
/// `theta` and collapse, removing the measured qubit from the register.
pub fn controller_round(
    state: &StateVector,
    qubit: usize,
    theta: f64,
    outcome: Outcome,
) -> Result<(f64, StateVector), ProtocolError> {
    Ok(state.project_rotated(qubit, RotatedBasis::new(theta), outcome)?)
}

/// Measure the listed qubits (labels in the *original* register numbering)
/// in order, tracking the index shifts as measured qubits are removed.
/// Returns the joint probability of the outcome path and the final state.
pub fn measure_cascade(
    state: &StateVector,
    qubits: &[usize],
    angles: &[f64],
    outcomes: &[Outcome],
) -> Result<(f64, StateVector), ProtocolError> {
    if angles.len() != qubits.len() {
        return Err(ProtocolError::PlanLength {
            expected: qubits.len(),
            found: angles.len(),
        });
    }
    if outcomes.len() != qubits.len() {
        return Err(ProtocolError::BranchLength {
            expected: qubits.len(),
            found: outcomes.len(),
        });
    }
    if let Some(&value) = angles.iter().find(|a| !a.is_finite()) {
        return Err(ProtocolError::NonFiniteAngle { value });
    }
    let mut current = state.clone();
    let mut joint = 1.0;
    let mut measured: Vec<usize> = Vec::with_capacity(qubits.len());
    for ((&label, &theta), &outcome) in qubits.iter().zip(angles).zip(outcomes) {
        let position = label - measured.iter().filter(|&&m| m < label).count();
        let (p, next) = controller_round(&current, position, theta, outcome)?;
        joint *= p;
        current = next;
        measured.push(label);
    }
    Ok((joint, current))
}

/// Read off the two coefficients of a two-qubit state supported on a
/// complementary basis pair. For diag support alpha is the |00> amplitude
/// and beta the |11> amplitude; for anti support they are the |01> and |10>
/// amplitudes. Returns zeros with `Support::Other` when the state has weight
/// on both pairs.
pub fn pair_coefficients(pair: &StateVector) -> (Complex64, Complex64, Support) {
    assert_eq!(
        pair.num_qubits(),
        2,
        "pair_coefficients needs a 2-qubit state"
    );
    let amps = pair.amplitudes();
    let off = amps[0b01].norm().max(amps[0b10].norm());
    let diag = amps[0b00].norm().max(amps[0b11].norm());
    if off < SUPPORT_TOL {
        (amps[0b00], amps[0b11], Support::Diag)
    } else if diag < SUPPORT_TOL {
        (amps[0b01], amps[0b10], Support::Anti)
    } else {
        let zero = Complex64::new(0.0, 0.0);
        (zero, zero, Support::Other)
    }
}

/// Everything the pipeline derives for one outcome path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub outcomes: Vec<Outcome>,
    pub probability: f64,
    pub impossible: bool,
    pub support: Option<Support>,
    pub alpha: Option<Complex64>,
    pub beta: Option<Complex64>,
    pub pair_amplitudes: Option<Vec<Complex64>>,
    pub filter: Option<FilterParams>,
    pub capacity: Option<CapacityReport>,
    pub bell_state: Option<crate::statevector::BellOutcome>,
    pub bell_fidelity: Option<f64>,
}

impl BranchRecord {
    fn impossible(outcomes: Vec<Outcome>) -> Self {
        BranchRecord {
            outcomes,
            probability: 0.0,
            impossible: true,
            support: None,
            alpha: None,
            beta: None,
            pair_amplitudes: None,
            filter: None,
            capacity: None,
            bell_state: None,
            bell_fidelity: None,
        }
    }
}

/// Full pipeline result under a branch policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub channel: Channel,
    pub angles: Vec<f64>,
    pub policy: String,
    pub branches: Vec<BranchRecord>,
    /// Sum of listed branch probabilities (1 under the all-branches policy).
    pub total_probability: f64,
    /// Capacity averaged over the listed branches, weighted by branch
    /// probability and conditioned on the listed probability mass.
    pub expected_capacity_bits: Option<f64>,
}

fn evaluate_branch(
    state: &StateVector,
    controllers: &[usize],
    angles: &[f64],
    outcomes: &[Outcome],
) -> Result<BranchRecord, ProtocolError> {
    let (probability, pair) = measure_cascade(state, controllers, angles, outcomes)?;
    let (alpha, beta, support) = pair_coefficients(&pair);
    if support == Support::Other {
        return Ok(BranchRecord {
            outcomes: outcomes.to_vec(),
            probability,
            impossible: false,
            support: Some(Support::Other),
            alpha: None,
            beta: None,
            pair_amplitudes: Some(pair.amplitudes().to_vec()),
            filter: None,
            capacity: None,
            bell_state: None,
            bell_fidelity: None,
        });
    }
    // Scale the normalized pair coefficients back up by the branch weight so
    // the filter parameters carry the branch normalizer e.
    let scale = probability.sqrt();
    let params = FilterParams::from_raw(alpha * scale, beta * scale)?;
    let cap = capacity(&params);
    let concentration = concentrate(&pair)?;
    let (bell_label, target) = bell_target(support, &params);
    let bell_fidelity = concentration
        .success_state
        .as_ref()
        .map(|s| target.fidelity(s).expect("target and state are 2-qubit"));
    let bell_state = concentration.success_state.as_ref().and(bell_label);
    Ok(BranchRecord {
        outcomes: outcomes.to_vec(),
        probability,
        impossible: false,
        support: Some(support),
        alpha: Some(alpha),
        beta: Some(beta),
        pair_amplitudes: Some(pair.amplitudes().to_vec()),
        filter: Some(params),
        capacity: Some(cap),
        bell_state,
        bell_fidelity,
    })
}

/// Run the whole pipeline: controller rounds in protocol order, pair
/// readout, filter parameters, concentration and capacity, for the branches
/// selected by `policy`.
///
/// Under [`BranchPolicy::AllBranches`] impossible paths are recorded with
/// probability 0 and excluded from the capacity expectation; requesting a
/// single impossible branch is an error.
///
/// ```
/// use densecode::{run_protocol, BranchPolicy, Channel, ChannelSpec, MeasurementPlan, Outcome};
/// use std::f64::consts::FRAC_PI_4;
///
/// let channel = Channel::FourParticle(ChannelSpec::balanced());
/// let plan = MeasurementPlan::pair(FRAC_PI_4, FRAC_PI_4);
/// let policy = BranchPolicy::Single(vec![Outcome::Plus, Outcome::Plus]);
/// let report = run_protocol(&channel, &plan, &policy).unwrap();
/// let capacity = report.branches[0].capacity.as_ref().unwrap().capacity_bits;
/// assert!((capacity - 2.0).abs() < 1e-12);
/// ```
pub fn run_protocol(
    channel: &Channel,
    plan: &MeasurementPlan,
    policy: &BranchPolicy,
) -> Result<ProtocolReport, ProtocolError> {
    let controllers = channel.controller_qubits();
    if plan.angles.len() != controllers.len() {
        return Err(ProtocolError::PlanLength {
            expected: controllers.len(),
            found: plan.angles.len(),
        });
    }
    let state = channel.build();
    let mut branches = Vec::new();
    match policy {
        BranchPolicy::Single(outcomes) => {
            if outcomes.len() != controllers.len() {
                return Err(ProtocolError::BranchLength {
                    expected: controllers.len(),
                    found: outcomes.len(),
                });
            }
            branches.push(evaluate_branch(
                &state,
                &controllers,
                &plan.angles,
                outcomes,
            )?);
        }
        BranchPolicy::AllBranches => {
            for k in 0..(1usize << controllers.len()) {
                let outcomes = outcome_tuple(k, controllers.len());
                match evaluate_branch(&state, &controllers, &plan.angles, &outcomes) {
                    Ok(record) => branches.push(record),
                    Err(err) if err.is_impossible_branch() => {
                        branches.push(BranchRecord::impossible(outcomes));
                    }
                    Err(err) => return Err(err),
                }
            }
        }
    }
    let total_probability = branches.iter().map(|b| b.probability).sum();
    let mut weighted = 0.0;
    let mut mass = 0.0;
    for branch in &branches {
        if let Some(cap) = &branch.capacity {
            weighted += branch.probability * cap.capacity_bits;
            mass += branch.probability;
        }
    }
    let expected_capacity_bits = if mass > 0.0 {
        Some(weighted / mass)
    } else {
        None
    };
    Ok(ProtocolReport {
        channel: *channel,
        angles: plan.angles.clone(),
        policy: policy.label(),
        branches,
        total_probability,
        expected_capacity_bits,
    })
}
