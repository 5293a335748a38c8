//! Command-line front end: configuration parsing, deterministic runs, and
//! machine-readable reports.
//!
//! Exit codes: 0 on success, 2 on validation failure, 3 when an explicitly
//! requested branch is impossible.

use crate::analysis::{self, AnalysisError};
use crate::protocol::{
    concentrate, measure_cascade, BranchPolicy, Channel, ChannelSpec, GhzChannelSpec,
    MeasurementPlan, Message, ProtocolError,
};
use crate::report::{
    CodeDocument, CodePath, DistributionsDocument, MonteCarloDocument, OutputFormat, RunDocument,
    SweepDocument, VERSION,
};
use crate::statevector::Outcome;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad configuration or precondition failure; exit code 2.
    Validation(String),
    /// An explicitly requested branch has probability 0; exit code 3.
    ImpossibleBranch(String),
}

impl From<ProtocolError> for CliError {
    fn from(err: ProtocolError) -> Self {
        if err.is_impossible_branch() {
            CliError::ImpossibleBranch(err.to_string())
        } else {
            CliError::Validation(err.to_string())
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(err: AnalysisError) -> Self {
        if err.is_impossible_branch() {
            CliError::ImpossibleBranch(err.to_string())
        } else {
            CliError::Validation(err.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "densecode", version = VERSION)]
#[command(about = "Controlled dense coding over small entangled channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the measurement and concentration pipeline, reporting per-branch
    /// filter parameters and capacities
    Run(CommonArgs),
    /// Evaluate the all-plus pipeline on a uniform angle grid
    Sweep(CommonArgs),
    /// Check which sender/receiver pairs admit dense coding
    Distributions(CommonArgs),
    /// Sample the stochastic pipeline with a seeded generator
    Montecarlo(CommonArgs),
    /// Send a two-bit message across the concentrated channel
    Code(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Run(a)
            | Command::Sweep(a)
            | Command::Distributions(a)
            | Command::Montecarlo(a)
            | Command::Code(a) => a,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Channel coefficients a,b,c,d (must be normalized)
    #[arg(long, value_name = "a,b,c,d", allow_hyphen_values = true)]
    pub coeffs: Option<String>,

    /// GHZ-family channel with N controllers (N+2 qubits)
    #[arg(long, value_name = "N")]
    pub ghz: Option<usize>,

    /// Controller angles in radians; accepts decimals and fractions like
    /// pi/4 or 3pi/8
    #[arg(long, value_name = "list", allow_hyphen_values = true)]
    pub angles: Option<String>,

    /// Outcome branch as a string over {+,-}, or "all"
    #[arg(long, allow_hyphen_values = true)]
    pub branch: Option<String>,

    /// Monte-Carlo trial count
    #[arg(long)]
    pub trials: Option<u64>,

    /// Seed for every stochastic step
    #[arg(long)]
    pub seed: Option<u64>,

    /// Angle samples per pairing (distributions)
    #[arg(long)]
    pub samples: Option<usize>,

    /// Grid points per axis (sweep)
    #[arg(long)]
    pub grid: Option<usize>,

    /// Two-bit message to send (code)
    #[arg(long)]
    pub message: Option<String>,

    /// Output format: json, csv or pretty
    #[arg(long)]
    pub out: Option<String>,

    /// File of key=value defaults; command-line flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parse an angle given as a decimal or a pi fraction ("pi", "pi/4",
/// "3pi/8", "-pi/6").
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if let Some(pos) = t.find("pi") {
        let prefix = &t[..pos];
        let suffix = &t[pos + 2..];
        let multiplier = match prefix {
            "" => 1.0,
            "-" => -1.0,
            p => p
                .parse::<i64>()
                .map_err(|_| format!("bad angle multiplier `{p}` in `{t}`"))?
                as f64,
        };
        let divisor = if suffix.is_empty() {
            1.0
        } else if let Some(d) = suffix.strip_prefix('/') {
            let d: i64 = d
                .parse()
                .map_err(|_| format!("bad angle divisor `{d}` in `{t}`"))?;
            if d == 0 {
                return Err(format!("zero divisor in angle `{t}`"));
            }
            d as f64
        } else {
            return Err(format!("malformed angle `{t}`"));
        };
        Ok(multiplier * std::f64::consts::PI / divisor)
    } else {
        let value: f64 = t.parse().map_err(|_| format!("malformed angle `{t}`"))?;
        if !value.is_finite() {
            return Err(format!("angle `{t}` is not finite"));
        }
        Ok(value)
    }
}

pub fn parse_angles(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(parse_angle).collect()
}

pub fn parse_coeffs(text: &str) -> Result<ChannelSpec, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Validation(format!(
            "--coeffs needs 4 comma-separated values, got {}",
            parts.len()
        )));
    }
    let mut values = [0.0f64; 4];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad coefficient `{part}`")))?;
    }
    ChannelSpec::new(values[0], values[1], values[2], values[3]).map_err(CliError::from)
}

/// Branch selection before it is tied to a channel's controller count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchSelector {
    All,
    Outcomes(Vec<Outcome>),
}

pub fn parse_branch(text: &str) -> Result<BranchSelector, String> {
    if text == "all" {
        return Ok(BranchSelector::All);
    }
    let outcomes = text
        .chars()
        .map(|ch| match ch {
            '+' => Ok(Outcome::Plus),
            '-' => Ok(Outcome::Minus),
            other => Err(format!("branch characters must be + or -, got `{other}`")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if outcomes.is_empty() {
        return Err("empty branch selector".to_string());
    }
    Ok(BranchSelector::Outcomes(outcomes))
}

const CONFIG_KEYS: [&str; 10] = [
    "coeffs", "ghz", "angles", "branch", "trials", "seed", "samples", "grid", "message", "out",
];

/// Fill unset flags from a key=value config file. Lines may be blank or
/// start with '#'.
fn merge_config_file(args: &mut CommonArgs, path: &PathBuf) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Validation(format!(
                "config line {} is not key=value: `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim().to_string();
        if !CONFIG_KEYS.contains(&key) {
            return Err(CliError::Validation(format!(
                "unknown config key `{key}` (expected one of {})",
                CONFIG_KEYS.join(", ")
            )));
        }
        let parse_u64 = |v: &str, k: &str| {
            v.parse::<u64>()
                .map_err(|_| CliError::Validation(format!("config {k} must be an integer")))
        };
        let parse_usize = |v: &str, k: &str| {
            v.parse::<usize>()
                .map_err(|_| CliError::Validation(format!("config {k} must be an integer")))
        };
        match key {
            "coeffs" if args.coeffs.is_none() => args.coeffs = Some(value),
            "ghz" if args.ghz.is_none() => args.ghz = Some(parse_usize(&value, "ghz")?),
            "angles" if args.angles.is_none() => args.angles = Some(value),
            "branch" if args.branch.is_none() => args.branch = Some(value),
            "trials" if args.trials.is_none() => args.trials = Some(parse_u64(&value, "trials")?),
            "seed" if args.seed.is_none() => args.seed = Some(parse_u64(&value, "seed")?),
            "samples" if args.samples.is_none() => {
                args.samples = Some(parse_usize(&value, "samples")?)
            }
            "grid" if args.grid.is_none() => args.grid = Some(parse_usize(&value, "grid")?),
            "message" if args.message.is_none() => args.message = Some(value),
            "out" if args.out.is_none() => args.out = Some(value),
            _ => {} // flag already set on the command line
        }
    }
    Ok(())
}

/// Fully merged and parsed configuration, before per-command requiredness
/// checks.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub channel: Option<Channel>,
    pub angles: Option<Vec<f64>>,
    pub branch: Option<BranchSelector>,
    pub trials: u64,
    pub seed: u64,
    pub samples: usize,
    pub grid: usize,
    pub message: Option<Message>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self, CliError> {
        let mut args = args.clone();
        if let Some(path) = args.config.clone() {
            merge_config_file(&mut args, &path)?;
        }
        let channel = match (&args.coeffs, args.ghz) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "give either --coeffs or --ghz, not both".to_string(),
                ))
            }
            (Some(text), None) => Some(Channel::FourParticle(parse_coeffs(text)?)),
            (None, Some(n)) => Some(Channel::Ghz(
                GhzChannelSpec::new(n).map_err(CliError::from)?,
            )),
            (None, None) => None,
        };
        let angles = match &args.angles {
            Some(text) => Some(parse_angles(text).map_err(CliError::Validation)?),
            None => None,
        };
        let branch = match &args.branch {
            Some(text) => Some(parse_branch(text).map_err(CliError::Validation)?),
            None => None,
        };
        let message = match &args.message {
            Some(text) => Some(text.parse::<Message>().map_err(CliError::Validation)?),
            None => None,
        };
        let format = match &args.out {
            Some(text) => text.parse::<OutputFormat>().map_err(CliError::Validation)?,
            None => OutputFormat::Json,
        };
        Ok(RunConfig {
            channel,
            angles,
            branch,
            trials: args.trials.unwrap_or(100_000),
            seed: args.seed.unwrap_or(0),
            samples: args.samples.unwrap_or(16),
            grid: args.grid.unwrap_or(9),
            message,
            format,
        })
    }

    fn require_channel(&self) -> Result<Channel, CliError> {
        self.channel
            .ok_or_else(|| CliError::Validation("missing --coeffs or --ghz".to_string()))
    }

    fn require_four_particle(&self) -> Result<ChannelSpec, CliError> {
        match self.require_channel()? {
            Channel::FourParticle(spec) => Ok(spec),
            Channel::Ghz(_) => Err(CliError::Validation(
                "this command works on the four-particle channel; use --coeffs".to_string(),
            )),
        }
    }

    fn require_angles(&self, channel: &Channel) -> Result<Vec<f64>, CliError> {
        let angles = self
            .angles
            .clone()
            .ok_or_else(|| CliError::Validation("missing --angles".to_string()))?;
        let expected = channel.controller_qubits().len();
        if angles.len() != expected {
            return Err(CliError::Validation(format!(
                "{} angles supplied for {} controllers",
                angles.len(),
                expected
            )));
        }
        Ok(angles)
    }
}

fn cmd_run(config: &RunConfig) -> Result<String, CliError> {
    let channel = config.require_channel()?;
    let angles = config.require_angles(&channel)?;
    let policy = match config.branch.clone().unwrap_or(BranchSelector::All) {
        BranchSelector::All => BranchPolicy::AllBranches,
        BranchSelector::Outcomes(outcomes) => BranchPolicy::Single(outcomes),
    };
    let report = crate::protocol::run_protocol(&channel, &MeasurementPlan::new(angles), &policy)?;
    Ok(RunDocument::new(report).render(config.format))
}

fn cmd_sweep(config: &RunConfig) -> Result<String, CliError> {
    let spec = config.require_four_particle()?;
    let cells = analysis::sweep_capacity(&spec, config.grid)?;
    Ok(SweepDocument::new(spec, config.grid, cells).render(config.format))
}

fn cmd_distributions(config: &RunConfig) -> Result<String, CliError> {
    let spec = config.require_four_particle()?;
    let verdicts = analysis::check_distributions(&spec, config.samples, config.seed)?;
    Ok(
        DistributionsDocument::new(spec, config.samples, config.seed, verdicts)
            .render(config.format),
    )
}

fn cmd_montecarlo(config: &RunConfig) -> Result<String, CliError> {
    let channel = config.require_channel()?;
    let angles = config.require_angles(&channel)?;
    let report = crate::protocol::monte_carlo(
        &channel,
        &MeasurementPlan::new(angles.clone()),
        config.trials,
        config.seed,
    )?;
    Ok(MonteCarloDocument::new(channel, angles, report).render(config.format))
}

fn cmd_code(config: &RunConfig) -> Result<String, CliError> {
    let message = config
        .message
        .ok_or_else(|| CliError::Validation("missing --message".to_string()))?;
    // The ideal balanced channel at pi/4 angles is the default round.
    let channel = config
        .channel
        .unwrap_or(Channel::FourParticle(ChannelSpec::balanced()));
    let controllers = channel.controller_qubits();
    let angles = match &config.angles {
        Some(_) => config.require_angles(&channel)?,
        None => vec![std::f64::consts::FRAC_PI_4; controllers.len()],
    };
    let outcomes = match config.branch.clone() {
        None => vec![Outcome::Plus; controllers.len()],
        Some(BranchSelector::Outcomes(outcomes)) => {
            if outcomes.len() != controllers.len() {
                return Err(CliError::Validation(format!(
                    "branch selector has {} outcomes for {} controllers",
                    outcomes.len(),
                    controllers.len()
                )));
            }
            outcomes
        }
        Some(BranchSelector::All) => {
            return Err(CliError::Validation(
                "code sends over one branch; give --branch as a +/- string".to_string(),
            ))
        }
    };
    let state = channel.build();
    let (branch_probability, pair) = measure_cascade(&state, &controllers, &angles, &outcomes)?;
    let concentration = concentrate(&pair)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let herald: f64 = rng.gen();
    let document = match concentration.success_state {
        Some(heralded) if herald < concentration.success_probability => {
            // Dense-coding round over the heralded Bell state; the decoder's
            // codebook is that state's own encode table.
            let encoded = heralded
                .apply_one_qubit(1, &message.pauli())
                .map_err(ProtocolError::from)?;
            let (observed, _) = encoded
                .bell_probabilities()
                .map_err(ProtocolError::from)?
                .most_likely();
            let mut decoded = None;
            for candidate in Message::ALL {
                let reference = heralded
                    .apply_one_qubit(1, &candidate.pauli())
                    .map_err(ProtocolError::from)?;
                let (certain, _) = reference
                    .bell_probabilities()
                    .map_err(ProtocolError::from)?
                    .most_likely();
                if certain == observed {
                    decoded = Some(candidate);
                    break;
                }
            }
            CodeDocument {
                version: VERSION.to_string(),
                command: "code".to_string(),
                channel,
                angles,
                branch: crate::protocol::outcome_string(&outcomes),
                seed: config.seed,
                message,
                branch_probability,
                success_probability: concentration.success_probability,
                path: CodePath::Dense,
                decoded,
                bits_delivered: 2,
            }
        }
        _ => CodeDocument {
            version: VERSION.to_string(),
            command: "code".to_string(),
            channel,
            angles,
            branch: crate::protocol::outcome_string(&outcomes),
            seed: config.seed,
            message,
            branch_probability,
            success_probability: concentration.success_probability,
            path: CodePath::FallbackOneBit,
            decoded: None,
            bits_delivered: 1,
        },
    };
    Ok(document.render(config.format))
}

/// Execute a parsed command, returning the rendered report.
pub fn execute(command: &Command) -> Result<String, CliError> {
    let config = RunConfig::from_args(command.args())?;
    match command {
        Command::Run(_) => cmd_run(&config),
        Command::Sweep(_) => cmd_sweep(&config),
        Command::Distributions(_) => cmd_distributions(&config),
        Command::Montecarlo(_) => cmd_montecarlo(&config),
        Command::Code(_) => cmd_code(&config),
    }
}

/// Entry point for the binary: parse, execute, map errors to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::ImpossibleBranch(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_syntax() {
        assert!((parse_angle("pi/4").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((parse_angle("3pi/8").unwrap() - 3.0 * PI / 8.0).abs() < 1e-15);
        assert!((parse_angle("pi").unwrap() - PI).abs() < 1e-15);
        assert!((parse_angle("-pi/6").unwrap() + PI / 6.0).abs() < 1e-15);
        assert!((parse_angle("0.25").unwrap() - 0.25).abs() < 1e-15);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("twopi").is_err());
        let list = parse_angles("pi/4,0.5").unwrap();
        assert_eq!(list.len(), 2);
    }

    #[test]
    fn branch_syntax() {
        assert_eq!(parse_branch("all").unwrap(), BranchSelector::All);
        assert_eq!(
            parse_branch("+-").unwrap(),
            BranchSelector::Outcomes(vec![Outcome::Plus, Outcome::Minus])
        );
        assert!(parse_branch("+x").is_err());
        assert!(parse_branch("").is_err());
    }

    #[test]
    fn coeffs_validation_names_the_deficit() {
        let err = parse_coeffs("1,1,0,0").unwrap_err();
        match err {
            CliError::Validation(msg) => {
                assert!(msg.contains("deficit"), "message was: {msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_file_fills_missing_flags_only() {
        let dir = std::env::temp_dir().join(format!("densecode-cli-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(
            &path,
            "# defaults\ncoeffs=0.5,0.5,0.5,0.5\nseed=9\nangles=pi/4,pi/4\n",
        )
        .unwrap();
        let args = CommonArgs {
            seed: Some(3),
            config: Some(path.clone()),
            ..CommonArgs::default()
        };
        let config = RunConfig::from_args(&args).unwrap();
        assert_eq!(config.seed, 3); // flag wins over file
        assert!(config.channel.is_some());
        assert_eq!(config.angles.as_ref().unwrap().len(), 2);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        let dir = std::env::temp_dir().join(format!("densecode-cli-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.conf");
        std::fs::write(&path, "turbo=1\n").unwrap();
        let args = CommonArgs {
            config: Some(path.clone()),
            ..CommonArgs::default()
        };
        assert!(matches!(
            RunConfig::from_args(&args),
            Err(CliError::Validation(_))
        ));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn run_command_reports_capacity() {
        let args = CommonArgs {
            coeffs: Some("0.5,0.5,0.5,0.5".to_string()),
            angles: Some("pi/4,pi/4".to_string()),
            branch: Some("++".to_string()),
            ..CommonArgs::default()
        };
        let out = execute(&Command::Run(args)).unwrap();
        let doc: crate::report::RunDocument = serde_json::from_str(&out).unwrap();
        let cap = doc.report.branches[0].capacity.as_ref().unwrap();
        assert!((cap.capacity_bits - 2.0).abs() < 1e-12);
    }

    #[test]
    fn code_command_round_trips_the_message() {
        let args = CommonArgs {
            message: Some("10".to_string()),
            ..CommonArgs::default()
        };
        let out = execute(&Command::Code(args)).unwrap();
        let doc: crate::report::CodeDocument = serde_json::from_str(&out).unwrap();
        assert_eq!(doc.path, CodePath::Dense);
        assert_eq!(doc.decoded, Some(Message::M10));
        assert_eq!(doc.bits_delivered, 2);
    }

    #[test]
    fn code_command_reports_fallback_on_dead_channel() {
        let args = CommonArgs {
            coeffs: Some("1,0,0,0".to_string()),
            message: Some("01".to_string()),
            ..CommonArgs::default()
        };
        let out = execute(&Command::Code(args)).unwrap();
        let doc: crate::report::CodeDocument = serde_json::from_str(&out).unwrap();
        assert_eq!(doc.path, CodePath::FallbackOneBit);
        assert_eq!(doc.decoded, None);
        assert_eq!(doc.bits_delivered, 1);
    }

    #[test]
    fn impossible_branch_request_is_distinguished() {
        let args = CommonArgs {
            coeffs: Some("1,0,0,0".to_string()),
            angles: Some("0,0".to_string()),
            branch: Some("-+".to_string()),
            ..CommonArgs::default()
        };
        assert!(matches!(
            execute(&Command::Run(args)),
            Err(CliError::ImpossibleBranch(_))
        ));
    }

    #[test]
    fn sweep_rejects_ghz_channels() {
        let args = CommonArgs {
            ghz: Some(2),
            ..CommonArgs::default()
        };
        assert!(matches!(
            execute(&Command::Sweep(args)),
            Err(CliError::Validation(_))
        ));
    }
}
