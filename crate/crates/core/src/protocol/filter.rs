//! Entanglement concentration by local filtering: an ancilla is attached to
//! the sender's qubit and a non-balanced two-qubit unitary routes the
//! "already balanced" component onto ancilla outcome 0, heralding a
//! maximally entangled pair with probability 2 sin^2(gamma).

use super::{pair_coefficients, ProtocolError, Support};
use crate::statevector::{BellOutcome, StateError, StateVector, TwoQubitUnitary};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Parameters of the concentration filter derived from pair amplitudes.
///
/// `gamma` is the magnitude angle: tan(gamma) is the smaller-to-larger
/// amplitude magnitude ratio, so it always lies in [0, 1]. When the raw
/// ratio beta/alpha exceeds 1 in modulus the roles of the system qubit's
/// |0> and |1> are exchanged and `reflected` is set, making the filter
/// attenuate whichever amplitude is larger. The unit phases of alpha and
/// beta are recorded so gamma stays a magnitude; for real channels they are
/// +-1. `e` is the squared norm of the raw amplitudes (the branch weight
/// when the amplitudes come unnormalized out of a measurement cascade).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub gamma: f64,
    pub tan_gamma: f64,
    pub e: f64,
    pub reflected: bool,
    pub alpha_phase: Complex64,
    pub beta_phase: Complex64,
}

impl FilterParams {
    /// Derive filter parameters from pair amplitudes of any scale.
    pub fn from_raw(alpha: Complex64, beta: Complex64) -> Result<Self, ProtocolError> {
        let ma = alpha.norm();
        let mb = beta.norm();
        let e = ma * ma + mb * mb;
        if e <= 0.0 {
            return Err(ProtocolError::ZeroPair);
        }
        let reflected = mb > ma;
        let (small, large) = if reflected { (ma, mb) } else { (mb, ma) };
        let tan_gamma = small / large;
        let gamma = small.atan2(large);
        let unit = |z: Complex64, m: f64| {
            if m > 0.0 {
                z / m
            } else {
                Complex64::new(1.0, 0.0)
            }
        };
        Ok(FilterParams {
            gamma,
            tan_gamma,
            e,
            reflected,
            alpha_phase: unit(alpha, ma),
            beta_phase: unit(beta, mb),
        })
    }

    pub fn sin_gamma(&self) -> f64 {
        self.gamma.sin()
    }

    pub fn cos_gamma(&self) -> f64 {
        self.gamma.cos()
    }

    /// Probability that the filter heralds a maximally entangled pair.
    pub fn success_probability(&self) -> f64 {
        let s = self.sin_gamma();
        2.0 * s * s
    }
}

/// Filter parameters for normalized pair coefficients
/// (|alpha|^2 + |beta|^2 = 1 within 1e-9).
pub fn filter_params(alpha: Complex64, beta: Complex64) -> Result<FilterParams, ProtocolError> {
    let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
    if norm_sq <= 0.0 {
        return Err(ProtocolError::ZeroPair);
    }
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(ProtocolError::UnnormalizedPair { norm_sq });
    }
    FilterParams::from_raw(alpha, beta)
}

/// The two-qubit filter over (system qubit, ancilla) in the local basis
/// (|00>, |10>, |01>, |11>).
///
/// With t = tan(gamma) and s = sqrt(1 - t^2), the non-reflected form is
///
/// ```text
///   [ t  0  s  0 ]
///   [ 0  1  0  0 ]
///   [ s  0 -t  0 ]
///   [ 0  0  0 -1 ]
/// ```
///
/// which attenuates the system-qubit |0> component. The reflected form
/// exchanges the roles of |0> and |1> on the system qubit so the larger
/// amplitude is always the attenuated one.
pub fn filter_unitary(params: &FilterParams) -> Result<TwoQubitUnitary, ProtocolError> {
    let t = params.tan_gamma;
    if !(0.0..=1.0).contains(&t) {
        return Err(ProtocolError::BadFilterRatio { tan_gamma: t });
    }
    let s = (1.0 - t * t).max(0.0).sqrt();
    let t = Complex64::new(t, 0.0);
    let s = Complex64::new(s, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let entries = if params.reflected {
        [[o, z, z, z], [z, t, z, s], [z, z, -o, z], [z, s, z, -t]]
    } else {
        [[t, z, s, z], [z, o, z, z], [s, z, -t, z], [z, z, z, -o]]
    };
    Ok(TwoQubitUnitary::new(entries)?)
}

/// Outcome of the filtering step on a pair state.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationResult {
    /// Probability of ancilla outcome 0 (the heralded Bell pair).
    pub success_probability: f64,
    /// Pair state after a successful herald; None when success is impossible.
    pub success_state: Option<StateVector>,
    /// Pair state after the failed herald (a product state); None when the
    /// filter succeeds with certainty.
    pub failure_state: Option<StateVector>,
}

/// Attach an ancilla to the pair, apply the filter on (first pair qubit,
/// ancilla), and measure the ancilla in the computational basis.
///
/// ```
/// use densecode::{concentrate, Complex64, StateVector};
///
/// let e = 0.365f64;
/// let pair = StateVector::make_state(
///     2,
///     &[
///         ("00", Complex64::new(0.25 / e.sqrt(), 0.0)),
///         ("11", Complex64::new(0.55 / e.sqrt(), 0.0)),
///     ],
/// )
/// .unwrap();
/// let result = concentrate(&pair).unwrap();
/// assert!((result.success_probability - 0.125 / 0.365).abs() < 1e-11);
/// ```
pub fn concentrate(pair: &StateVector) -> Result<ConcentrationResult, ProtocolError> {
    let (alpha, beta, support) = pair_coefficients(pair);
    if support == Support::Other {
        return Err(ProtocolError::UnsupportedPair);
    }
    let params = FilterParams::from_raw(alpha, beta)?;
    let filter = filter_unitary(&params)?;
    let extended = pair.attach_ancilla();
    let filtered = extended.apply_two_qubit(1, 3, &filter)?;
    let success = match filtered.project_computational(3, 0) {
        Ok((p, state)) => Some((p, state)),
        Err(StateError::ImpossibleBranch { .. }) => None,
        Err(err) => return Err(err.into()),
    };
    let failure = match filtered.project_computational(3, 1) {
        Ok((_, state)) => Some(state),
        Err(StateError::ImpossibleBranch { .. }) => None,
        Err(err) => return Err(err.into()),
    };
    let (success_probability, success_state) = match success {
        Some((p, state)) => (p, Some(state)),
        None => (0.0, None),
    };
    Ok(ConcentrationResult {
        success_probability,
        success_state,
        failure_state: failure,
    })
}

/// Average classical bits per protocol round: a heralded pair carries two
/// bits by dense coding, a failed herald falls back to one bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub capacity_bits: f64,
    pub success_probability: f64,
}

pub fn capacity(params: &FilterParams) -> CapacityReport {
    let success_probability = params.success_probability();
    CapacityReport {
        capacity_bits: 1.0 + success_probability,
        success_probability,
    }
}

/// The Bell state a successful herald leaves behind, with the recorded
/// amplitude phases folded in: (u alpha_ket + v beta_ket)/sqrt(2) where the
/// kets are |00>, |11> for diag support and |01>, |10> for anti support.
/// The label is reported when the phases are real signs.
pub fn bell_target(support: Support, params: &FilterParams) -> (Option<BellOutcome>, StateVector) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let u = params.alpha_phase * r;
    let v = params.beta_phase * r;
    let (kets, plus, minus) = match support {
        Support::Anti => (["01", "10"], BellOutcome::PsiPlus, BellOutcome::PsiMinus),
        _ => (["00", "11"], BellOutcome::PhiPlus, BellOutcome::PhiMinus),
    };
    let state =
        StateVector::make_state(2, &[(kets[0], u), (kets[1], v)]).expect("fixed labels are valid");
    let real = params.alpha_phase.im.abs() < 1e-9 && params.beta_phase.im.abs() < 1e-9;
    let label = if real {
        if params.alpha_phase.re * params.beta_phase.re > 0.0 {
            Some(plus)
        } else {
            Some(minus)
        }
    } else {
        None
    };
    (label, state)
}
