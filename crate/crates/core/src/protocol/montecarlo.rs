//! Seeded Monte-Carlo sampling of the full protocol chain: controller
//! outcomes, the filter's ancilla outcome, a random message, Pauli encoding,
//! a sampled Bell measurement, and decoding.
//!
//! Each trial draws from its own ChaCha substream selected by the trial
//! index, so results are bit-identical for a given (seed, trials) no matter
//! how the trials are scheduled across threads.

use super::{
    concentrate, measure_cascade, outcome_tuple, pair_coefficients, Channel, FilterParams,
    MeasurementPlan, Message, ProtocolError,
};
use crate::statevector::{BellOutcome, Outcome, RotatedBasis, StateError, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sampled statistics for one controller-outcome path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStats {
    pub outcomes: Vec<Outcome>,
    pub analytic_probability: f64,
    pub count: u64,
    pub frequency: f64,
    pub frequency_std_error: f64,
    /// Exact concentration success probability for this path, when defined.
    pub analytic_success_probability: Option<f64>,
    pub success_count: u64,
    /// Success frequency conditional on landing in this branch.
    pub success_frequency: Option<f64>,
    pub success_std_error: Option<f64>,
    pub decode_count: u64,
    pub decode_correct: u64,
    pub decode_accuracy: Option<f64>,
}

/// Aggregate of a Monte-Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub trials: u64,
    pub seed: u64,
    pub branches: Vec<BranchStats>,
    pub success_count: u64,
    pub success_frequency: f64,
    pub success_std_error: f64,
    pub decode_count: u64,
    pub decode_correct: u64,
    pub decode_accuracy: Option<f64>,
}

struct TrialResult {
    branch: usize,
    success: bool,
    decode_ok: Option<bool>,
}

#[derive(Clone)]
struct Tally {
    count: Vec<u64>,
    success: Vec<u64>,
    decode_count: Vec<u64>,
    decode_correct: Vec<u64>,
}

impl Tally {
    fn new(branches: usize) -> Self {
        Tally {
            count: vec![0; branches],
            success: vec![0; branches],
            decode_count: vec![0; branches],
            decode_correct: vec![0; branches],
        }
    }

    fn record(&mut self, trial: &TrialResult) {
        self.count[trial.branch] += 1;
        if trial.success {
            self.success[trial.branch] += 1;
        }
        if let Some(ok) = trial.decode_ok {
            self.decode_count[trial.branch] += 1;
            if ok {
                self.decode_correct[trial.branch] += 1;
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.count.iter_mut().zip(other.count) {
            *a += b;
        }
        for (a, b) in self.success.iter_mut().zip(other.success) {
            *a += b;
        }
        for (a, b) in self.decode_count.iter_mut().zip(other.decode_count) {
            *a += b;
        }
        for (a, b) in self.decode_correct.iter_mut().zip(other.decode_correct) {
            *a += b;
        }
        self
    }
}

fn proportion_std_error(f: f64, n: u64) -> f64 {
    (f * (1.0 - f) / n as f64).sqrt()
}

fn run_trial(
    state: &StateVector,
    controllers: &[usize],
    angles: &[f64],
    seed: u64,
    trial: u64,
) -> Result<TrialResult, ProtocolError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);

    let mut current = state.clone();
    let mut measured: Vec<usize> = Vec::with_capacity(controllers.len());
    let mut branch = 0usize;
    for (&label, &theta) in controllers.iter().zip(angles) {
        let position = label - measured.iter().filter(|&&m| m < label).count();
        let basis = RotatedBasis::new(theta);
        let u: f64 = rng.gen();
        let (outcome, next) = match current.project_rotated(position, basis, Outcome::Plus) {
            Ok((p_plus, s_plus)) => {
                if u < p_plus {
                    (Outcome::Plus, s_plus)
                } else {
                    match current.project_rotated(position, basis, Outcome::Minus) {
                        Ok((_, s_minus)) => (Outcome::Minus, s_minus),
                        // the drawn outcome has vanished numerically: plus is certain
                        Err(StateError::ImpossibleBranch { .. }) => (Outcome::Plus, s_plus),
                        Err(err) => return Err(err.into()),
                    }
                }
            }
            Err(StateError::ImpossibleBranch { .. }) => {
                let (_, s_minus) = current.project_rotated(position, basis, Outcome::Minus)?;
                (Outcome::Minus, s_minus)
            }
            Err(err) => return Err(err.into()),
        };
        branch = (branch << 1) | usize::from(outcome == Outcome::Minus);
        current = next;
        measured.push(label);
    }

    let concentration = match concentrate(&current) {
        Ok(result) => result,
        Err(ProtocolError::UnsupportedPair) => {
            return Ok(TrialResult {
                branch,
                success: false,
                decode_ok: None,
            })
        }
        Err(err) => return Err(err),
    };
    let u_anc: f64 = rng.gen();
    let heralded = match concentration.success_state {
        Some(s) if u_anc < concentration.success_probability => s,
        _ => {
            return Ok(TrialResult {
                branch,
                success: false,
                decode_ok: None,
            })
        }
    };

    // One dense-coding round over whichever Bell state was heralded. The
    // receiver's codebook is the encode table of that state, known to both
    // parties from the broadcast measurement results.
    let message = Message::from_bits(rng.gen_range(0..4u8)).expect("two bits");
    let encoded = heralded.apply_one_qubit(1, &message.pauli())?;
    let dist = encoded.bell_probabilities()?;
    let u_bell: f64 = rng.gen();
    let mut sampled = BellOutcome::PsiMinus;
    let mut cumulative = 0.0;
    for (outcome, p) in dist.iter() {
        cumulative += p;
        if u_bell < cumulative {
            sampled = outcome;
            break;
        }
    }
    let mut decoded = None;
    for candidate in Message::ALL {
        let reference = heralded.apply_one_qubit(1, &candidate.pauli())?;
        let (certain, _) = reference.bell_probabilities()?.most_likely();
        if certain == sampled {
            decoded = Some(candidate);
            break;
        }
    }
    Ok(TrialResult {
        branch,
        success: true,
        decode_ok: Some(decoded == Some(message)),
    })
}

/// Sample `trials` full protocol rounds with a deterministic seeded
/// generator and report per-branch frequencies with standard errors.
pub fn monte_carlo(
    channel: &Channel,
    plan: &MeasurementPlan,
    trials: u64,
    seed: u64,
) -> Result<EmpiricalReport, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::NoTrials);
    }
    let controllers = channel.controller_qubits();
    if plan.angles.len() != controllers.len() {
        return Err(ProtocolError::PlanLength {
            expected: controllers.len(),
            found: plan.angles.len(),
        });
    }
    let state = channel.build();
    let num_branches = 1usize << controllers.len();

    let tally = (0..trials)
        .into_par_iter()
        .try_fold(
            || Tally::new(num_branches),
            |mut tally, trial| -> Result<Tally, ProtocolError> {
                let result = run_trial(&state, &controllers, &plan.angles, seed, trial)?;
                tally.record(&result);
                Ok(tally)
            },
        )
        .try_reduce(|| Tally::new(num_branches), |a, b| Ok(a.merge(b)))?;

    let mut branches = Vec::with_capacity(num_branches);
    for k in 0..num_branches {
        let outcomes = outcome_tuple(k, controllers.len());
        let (analytic_probability, analytic_success) =
            match measure_cascade(&state, &controllers, &plan.angles, &outcomes) {
                Ok((p, pair)) => {
                    let (alpha, beta, support) = pair_coefficients(&pair);
                    let success = if support.codable() {
                        FilterParams::from_raw(alpha, beta)
                            .ok()
                            .map(|fp| fp.success_probability())
                    } else {
                        None
                    };
                    (p, success)
                }
                Err(err) if err.is_impossible_branch() => (0.0, None),
                Err(err) => return Err(err),
            };
        let count = tally.count[k];
        let frequency = count as f64 / trials as f64;
        let success_count = tally.success[k];
        let (success_frequency, success_std_error) = if count > 0 {
            let f = success_count as f64 / count as f64;
            (Some(f), Some(proportion_std_error(f, count)))
        } else {
            (None, None)
        };
        let decode_count = tally.decode_count[k];
        let decode_correct = tally.decode_correct[k];
        let decode_accuracy = if decode_count > 0 {
            Some(decode_correct as f64 / decode_count as f64)
        } else {
            None
        };
        branches.push(BranchStats {
            outcomes,
            analytic_probability,
            count,
            frequency,
            frequency_std_error: proportion_std_error(frequency, trials),
            analytic_success_probability: analytic_success,
            success_count,
            success_frequency,
            success_std_error,
            decode_count,
            decode_correct,
            decode_accuracy,
        });
    }

    let success_count: u64 = tally.success.iter().sum();
    let success_frequency = success_count as f64 / trials as f64;
    let decode_count: u64 = tally.decode_count.iter().sum();
    let decode_correct: u64 = tally.decode_correct.iter().sum();
    let decode_accuracy = if decode_count > 0 {
        Some(decode_correct as f64 / decode_count as f64)
    } else {
        None
    };
    Ok(EmpiricalReport {
        trials,
        seed,
        branches,
        success_count,
        success_frequency,
        success_std_error: proportion_std_error(success_frequency, trials),
        decode_count,
        decode_correct,
        decode_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{ChannelSpec, GhzChannelSpec};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn same_seed_gives_identical_reports() {
        let channel = Channel::FourParticle(ChannelSpec::new(0.7, 0.1, 0.1, 0.7).unwrap());
        let plan = MeasurementPlan::pair(0.9, 0.4);
        let first = monte_carlo(&channel, &plan, 2000, 42).unwrap();
        let second = monte_carlo(&channel, &plan, 2000, 42).unwrap();
        assert_eq!(first, second);
        let other_seed = monte_carlo(&channel, &plan, 2000, 43).unwrap();
        assert_ne!(first.branches, other_seed.branches);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let channel = Channel::Ghz(GhzChannelSpec::new(2).unwrap());
        let plan = MeasurementPlan::pair(FRAC_PI_4, 0.7);
        let baseline = monte_carlo(&channel, &plan, 3000, 7).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo(&channel, &plan, 3000, 7).unwrap());
        assert_eq!(baseline, single);
    }

    #[test]
    fn product_channel_never_concentrates() {
        let channel = Channel::FourParticle(ChannelSpec::new(1.0, 0.0, 0.0, 0.0).unwrap());
        let plan = MeasurementPlan::pair(0.3, 0.3);
        let report = monte_carlo(&channel, &plan, 500, 5).unwrap();
        assert_eq!(report.success_count, 0);
        assert_eq!(report.decode_count, 0);
        assert!(report.decode_accuracy.is_none());
    }

    #[test]
    fn balanced_channel_always_succeeds_and_decodes() {
        let channel = Channel::FourParticle(ChannelSpec::balanced());
        let plan = MeasurementPlan::pair(FRAC_PI_4, FRAC_PI_4);
        let report = monte_carlo(&channel, &plan, 2000, 11).unwrap();
        assert_eq!(report.success_count, 2000);
        assert_eq!(report.decode_correct, 2000);
        // only the (+,+) and (-,-) paths carry probability here
        assert_eq!(report.branches[1].count, 0);
        assert_eq!(report.branches[2].count, 0);
    }

    #[test]
    fn zero_trials_rejected() {
        let channel = Channel::FourParticle(ChannelSpec::balanced());
        let plan = MeasurementPlan::pair(0.1, 0.2);
        assert!(matches!(
            monte_carlo(&channel, &plan, 0, 1),
            Err(ProtocolError::NoTrials)
        ));
    }
}
