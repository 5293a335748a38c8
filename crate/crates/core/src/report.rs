//! Machine-readable report documents for the command-line front end.
//!
//! Every command emits one top-level document that echoes its inputs and
//! carries a version string. JSON floats are written with 17 significant
//! digits so a document re-parses to exactly the values that produced it
//! and reruns are diff-clean.

use crate::analysis::{PairVerdict, SweepCell};
use crate::protocol::{Channel, ChannelSpec, EmpiricalReport, Message, ProtocolReport};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Pretty,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "pretty" => Ok(OutputFormat::Pretty),
            other => Err(format!("unknown output format `{other}`")),
        }
    }
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        // 17 significant digits round-trip any f64 exactly
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any document as a JSON line with fixed-precision floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser).expect("report types serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits utf-8")
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    match x {
        Some(v) => num(v),
        None => "NaN".to_string(),
    }
}

fn channel_line(channel: &Channel) -> String {
    match channel {
        Channel::FourParticle(spec) => {
            let [a, b, c, d] = spec.coefficients();
            format!(
                "four-particle channel a={} b={} c={} d={}",
                num(a),
                num(b),
                num(c),
                num(d)
            )
        }
        Channel::Ghz(spec) => format!("GHZ channel with {} controllers", spec.n_controllers()),
    }
}

fn angles_line(angles: &[f64]) -> String {
    angles.iter().map(|&a| num(a)).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub version: String,
    pub command: String,
    pub report: ProtocolReport,
}

impl RunDocument {
    pub fn new(report: ProtocolReport) -> Self {
        RunDocument {
            version: VERSION.to_string(),
            command: "run".to_string(),
            report,
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from(
                    "outcomes,probability,support,gamma,p_success,capacity_bits,bell_fidelity\n",
                );
                for b in &self.report.branches {
                    let support = match b.support {
                        Some(s) => format!("{s:?}").to_lowercase(),
                        None => String::new(),
                    };
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        crate::protocol::outcome_string(&b.outcomes),
                        num(b.probability),
                        support,
                        opt_num(b.filter.as_ref().map(|f| f.gamma)),
                        opt_num(b.capacity.as_ref().map(|c| c.success_probability)),
                        opt_num(b.capacity.as_ref().map(|c| c.capacity_bits)),
                        opt_num(b.bell_fidelity),
                    ));
                }
                out
            }
            OutputFormat::Pretty => {
                let r = &self.report;
                let mut out = String::new();
                out.push_str(&format!("run v{}\n", self.version));
                out.push_str(&format!("{}\n", channel_line(&r.channel)));
                out.push_str(&format!("angles: {}\n", angles_line(&r.angles)));
                out.push_str(&format!("policy: {}\n", r.policy));
                for b in &r.branches {
                    if b.impossible {
                        out.push_str(&format!(
                            "branch {}: impossible (probability 0)\n",
                            crate::protocol::outcome_string(&b.outcomes)
                        ));
                        continue;
                    }
                    let bell = b
                        .bell_state
                        .map(|s| s.label().to_string())
                        .unwrap_or_else(|| "-".to_string());
                    out.push_str(&format!(
                        "branch {}: p={} gamma={} p_success={} capacity={} bell={} fidelity={}\n",
                        crate::protocol::outcome_string(&b.outcomes),
                        num(b.probability),
                        opt_num(b.filter.as_ref().map(|f| f.gamma)),
                        opt_num(b.capacity.as_ref().map(|c| c.success_probability)),
                        opt_num(b.capacity.as_ref().map(|c| c.capacity_bits)),
                        bell,
                        opt_num(b.bell_fidelity),
                    ));
                }
                out.push_str(&format!(
                    "total probability: {}\n",
                    num(r.total_probability)
                ));
                out.push_str(&format!(
                    "expected capacity: {}\n",
                    opt_num(r.expected_capacity_bits)
                ));
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub version: String,
    pub command: String,
    pub channel: ChannelSpec,
    pub grid_size: usize,
    pub cells: Vec<SweepCell>,
}

impl SweepDocument {
    pub fn new(channel: ChannelSpec, grid_size: usize, cells: Vec<SweepCell>) -> Self {
        SweepDocument {
            version: VERSION.to_string(),
            command: "sweep".to_string(),
            channel,
            grid_size,
            cells,
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from("theta1,theta2,gamma,p_success,capacity\n");
                for c in &self.cells {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        num(c.theta1),
                        num(c.theta2),
                        opt_num(c.gamma),
                        opt_num(c.p_success),
                        opt_num(c.capacity),
                    ));
                }
                out
            }
            OutputFormat::Pretty => {
                let [a, b, c, d] = self.channel.coefficients();
                let mut out = format!(
                    "sweep v{} over a={} b={} c={} d={} (grid {})\n",
                    self.version,
                    num(a),
                    num(b),
                    num(c),
                    num(d),
                    self.grid_size
                );
                for cell in &self.cells {
                    if cell.degenerate {
                        out.push_str(&format!(
                            "theta1={} theta2={}: degenerate\n",
                            num(cell.theta1),
                            num(cell.theta2)
                        ));
                    } else {
                        out.push_str(&format!(
                            "theta1={} theta2={}: gamma={} p_success={} capacity={}\n",
                            num(cell.theta1),
                            num(cell.theta2),
                            opt_num(cell.gamma),
                            opt_num(cell.p_success),
                            opt_num(cell.capacity),
                        ));
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionsDocument {
    pub version: String,
    pub command: String,
    pub channel: ChannelSpec,
    pub samples: usize,
    pub seed: u64,
    /// Set when some channel coefficient vanishes; the two-pair claim only
    /// applies to fully generic channels.
    pub degenerate_spec: bool,
    pub valid: Vec<(usize, usize)>,
    pub verdicts: Vec<PairVerdict>,
}

impl DistributionsDocument {
    pub fn new(
        channel: ChannelSpec,
        samples: usize,
        seed: u64,
        verdicts: Vec<PairVerdict>,
    ) -> Self {
        let degenerate_spec = channel
            .coefficients()
            .iter()
            .any(|c| c.abs() < crate::protocol::SUPPORT_TOL);
        let valid = crate::analysis::valid_pairs(&verdicts);
        DistributionsDocument {
            version: VERSION.to_string(),
            command: "distributions".to_string(),
            channel,
            samples,
            seed,
            degenerate_spec,
            valid,
            verdicts,
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from("sender,receiver,codable,support_class\n");
                for v in &self.verdicts {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        v.assignment.sender,
                        v.assignment.receiver,
                        v.verdict.codable,
                        format!("{:?}", v.verdict.support_class).to_lowercase(),
                    ));
                }
                out
            }
            OutputFormat::Pretty => {
                let [a, b, c, d] = self.channel.coefficients();
                let mut out = format!(
                    "distributions v{} for a={} b={} c={} d={} ({} angle samples, seed {})\n",
                    self.version,
                    num(a),
                    num(b),
                    num(c),
                    num(d),
                    self.samples,
                    self.seed
                );
                if self.degenerate_spec {
                    out.push_str(
                        "warning: degenerate channel (a coefficient vanishes); \
                         every pairing is trivially codable\n",
                    );
                }
                for v in &self.verdicts {
                    out.push_str(&format!(
                        "pair ({},{}) controllers {:?}: {}\n",
                        v.assignment.sender,
                        v.assignment.receiver,
                        v.assignment.controllers,
                        if v.verdict.codable {
                            "valid"
                        } else {
                            "invalid"
                        },
                    ));
                }
                let valid = self
                    .valid
                    .iter()
                    .map(|(s, r)| format!("({s},{r})"))
                    .collect::<Vec<_>>()
                    .join(" ");
                out.push_str(&format!("valid pairs: {valid}\n"));
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloDocument {
    pub version: String,
    pub command: String,
    pub channel: Channel,
    pub angles: Vec<f64>,
    pub report: EmpiricalReport,
}

impl MonteCarloDocument {
    pub fn new(channel: Channel, angles: Vec<f64>, report: EmpiricalReport) -> Self {
        MonteCarloDocument {
            version: VERSION.to_string(),
            command: "montecarlo".to_string(),
            channel,
            angles,
            report,
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from(
                    "outcomes,analytic_probability,count,frequency,frequency_std_error,\
                     analytic_success_probability,success_count,success_frequency,\
                     success_std_error,decode_count,decode_correct,decode_accuracy\n",
                );
                for b in &self.report.branches {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                        crate::protocol::outcome_string(&b.outcomes),
                        num(b.analytic_probability),
                        b.count,
                        num(b.frequency),
                        num(b.frequency_std_error),
                        opt_num(b.analytic_success_probability),
                        b.success_count,
                        opt_num(b.success_frequency),
                        opt_num(b.success_std_error),
                        b.decode_count,
                        b.decode_correct,
                        opt_num(b.decode_accuracy),
                    ));
                }
                out
            }
            OutputFormat::Pretty => {
                let r = &self.report;
                let mut out = format!(
                    "montecarlo v{}: {} trials, seed {}\n{}\nangles: {}\n",
                    self.version,
                    r.trials,
                    r.seed,
                    channel_line(&self.channel),
                    angles_line(&self.angles),
                );
                for b in &r.branches {
                    out.push_str(&format!(
                        "branch {}: count={} freq={} (se {}) analytic={} success={} decode_ok={}/{}\n",
                        crate::protocol::outcome_string(&b.outcomes),
                        b.count,
                        num(b.frequency),
                        num(b.frequency_std_error),
                        num(b.analytic_probability),
                        opt_num(b.success_frequency),
                        b.decode_correct,
                        b.decode_count,
                    ));
                }
                out.push_str(&format!(
                    "overall: success={} (se {}) decode accuracy={}\n",
                    num(r.success_frequency),
                    num(r.success_std_error),
                    opt_num(r.decode_accuracy),
                ));
                out
            }
        }
    }
}

/// How the message crossed the channel: a full dense-coding round over the
/// heralded pair, or the one-bit fallback after a failed herald.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodePath {
    Dense,
    FallbackOneBit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeDocument {
    pub version: String,
    pub command: String,
    pub channel: Channel,
    pub angles: Vec<f64>,
    pub branch: String,
    pub seed: u64,
    pub message: Message,
    pub branch_probability: f64,
    pub success_probability: f64,
    pub path: CodePath,
    pub decoded: Option<Message>,
    pub bits_delivered: u8,
}

impl CodeDocument {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let decoded = self.decoded.map(|m| m.to_string()).unwrap_or_default();
                format!(
                    "message,path,decoded,bits_delivered,branch_probability,success_probability\n\
                     {},{},{},{},{},{}\n",
                    self.message,
                    match self.path {
                        CodePath::Dense => "dense",
                        CodePath::FallbackOneBit => "fallback_one_bit",
                    },
                    decoded,
                    self.bits_delivered,
                    num(self.branch_probability),
                    num(self.success_probability),
                )
            }
            OutputFormat::Pretty => {
                let mut out = format!(
                    "code v{}\n{}\nangles: {} branch: {} seed: {}\n",
                    self.version,
                    channel_line(&self.channel),
                    angles_line(&self.angles),
                    self.branch,
                    self.seed,
                );
                match self.path {
                    CodePath::Dense => out.push_str(&format!(
                        "dense-coding round: message {} decoded as {} (2 bits)\n",
                        self.message,
                        self.decoded.map(|m| m.to_string()).unwrap_or_default(),
                    )),
                    CodePath::FallbackOneBit => out.push_str(&format!(
                        "concentration failed (success probability {}): \
                         1-bit fallback path taken\n",
                        num(self.success_probability),
                    )),
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_floats_use_17_significant_digits() {
        #[derive(Serialize)]
        struct Sample {
            x: f64,
        }
        let text = to_json(&Sample {
            x: std::f64::consts::FRAC_PI_4,
        });
        assert_eq!(text, "{\"x\":7.8539816339744828e-1}\n");
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["x"].as_f64().unwrap(), std::f64::consts::FRAC_PI_4);
    }

    #[test]
    fn json_round_trips_exactly() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct Sample {
            values: Vec<f64>,
        }
        let sample = Sample {
            values: vec![0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, -0.0],
        };
        let text = to_json(&sample);
        let back: Sample = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sample);
    }
}
