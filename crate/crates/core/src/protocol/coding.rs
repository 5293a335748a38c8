//! Dense-coding message layer: Pauli encoding on the sender's qubit and
//! decoding by Bell measurement.

use super::ProtocolError;
use crate::statevector::{BellOutcome, OneQubitUnitary, StateVector};
use serde::{Deserialize, Serialize};

/// A two-bit classical message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Message {
    #[serde(rename = "00")]
    M00,
    #[serde(rename = "01")]
    M01,
    #[serde(rename = "10")]
    M10,
    #[serde(rename = "11")]
    M11,
}

impl Message {
    pub const ALL: [Message; 4] = [Message::M00, Message::M01, Message::M10, Message::M11];

    pub fn from_bits(bits: u8) -> Option<Message> {
        match bits {
            0b00 => Some(Message::M00),
            0b01 => Some(Message::M01),
            0b10 => Some(Message::M10),
            0b11 => Some(Message::M11),
            _ => None,
        }
    }

    pub fn bits(self) -> u8 {
        match self {
            Message::M00 => 0b00,
            Message::M01 => 0b01,
            Message::M10 => 0b10,
            Message::M11 => 0b11,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Message::M00 => "00",
            Message::M01 => "01",
            Message::M10 => "10",
            Message::M11 => "11",
        }
    }

    /// The Pauli the sender applies for this message.
    pub fn pauli(self) -> OneQubitUnitary {
        match self {
            Message::M00 => OneQubitUnitary::identity(),
            Message::M01 => OneQubitUnitary::pauli_x(),
            Message::M10 => OneQubitUnitary::pauli_y(),
            Message::M11 => OneQubitUnitary::pauli_z(),
        }
    }

    /// The Bell outcome a decoder maps back to this message.
    pub fn bell_outcome(self) -> BellOutcome {
        match self {
            Message::M00 => BellOutcome::PhiPlus,
            Message::M01 => BellOutcome::PsiPlus,
            Message::M10 => BellOutcome::PsiMinus,
            Message::M11 => BellOutcome::PhiMinus,
        }
    }

    pub fn from_bell_outcome(outcome: BellOutcome) -> Message {
        match outcome {
            BellOutcome::PhiPlus => Message::M00,
            BellOutcome::PsiPlus => Message::M01,
            BellOutcome::PsiMinus => Message::M10,
            BellOutcome::PhiMinus => Message::M11,
        }
    }
}

impl std::str::FromStr for Message {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "00" => Ok(Message::M00),
            "01" => Ok(Message::M01),
            "10" => Ok(Message::M10),
            "11" => Ok(Message::M11),
            other => Err(format!("message must be two bits, got `{other}`")),
        }
    }
}

impl std::fmt::Display for Message {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Encode a message on the shared pair by applying the matching Pauli to the
/// sender's qubit (qubit 1). The input must be the |phi+> channel up to
/// global phase (fidelity within 1e-9).
pub fn encode(bell: &StateVector, message: Message) -> Result<StateVector, ProtocolError> {
    let phi = StateVector::bell(BellOutcome::PhiPlus);
    let fidelity = phi.fidelity(bell)?;
    if (fidelity - 1.0).abs() > 1e-9 {
        return Err(ProtocolError::NotBellChannel { fidelity });
    }
    Ok(bell.apply_one_qubit(1, &message.pauli())?)
}

/// Decode a two-qubit state by Bell measurement: the message whose outcome
/// is certain. Errors with [`ProtocolError::AmbiguousDecode`] when no
/// outcome reaches probability 1 - 1e-6.
pub fn decode(state: &StateVector) -> Result<Message, ProtocolError> {
    let dist = state.bell_probabilities()?;
    let (outcome, probability) = dist.most_likely();
    if probability < 1.0 - 1e-6 {
        return Err(ProtocolError::AmbiguousDecode {
            max_probability: probability,
        });
    }
    Ok(Message::from_bell_outcome(outcome))
}
