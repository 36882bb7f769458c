//! Command-line arguments and the matching TOML config file.
//!
//! Every flag has a config key of the same name: global flags at the top
//! level, subcommand flags in a table named after the subcommand. Values
//! given on the command line win over the file.
//!
//! ```toml
//! seed = 7
//! format = "csv"
//!
//! [sweep]
//! n-list = [10, 12, 14]
//! offsets = [-0.02, 0.0, 0.02]
//! trials = 2000
//! ```

use std::path::{Path, PathBuf};

use apl_core::harness::{Fault, OffsetMode, OutputFormat};
use apl_core::nk::WalkRule;
use apl_core::sequence::GoodnessMode;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "apl",
    version,
    about = "Accessibility percolation and NK landscape experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, env = "APL_THREADS")]
    pub threads: Option<usize>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML file with defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the phase-transition constants as JSON
    Constants(ConstantsArgs),
    /// Print generating-function coefficients M(n, ell) as CSV
    Series(SeriesArgs),
    /// Sample one fitness field and decide accessibility
    Trial(TrialArgs),
    /// Run the oracle cross-checks; exits 1 on any failure
    OracleValidate(OracleArgs),
    /// Score continuous-model sequences against the good-path predicate
    Seqmodel(SeqmodelArgs),
    /// Accessibility sweep over N and offsets from x_c(N)
    Sweep(SweepArgs),
    /// Estimates at x_c(N) +- delta/N; exits 1 if any interval leaves the bounds
    Window(WindowArgs),
    /// NK landscape maxima and adaptive walks
    Nk(NkArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Antipodal,
    General,
}

impl From<Mode> for GoodnessMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Antipodal => GoodnessMode::Antipodal,
            Mode::General => GoodnessMode::General,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetModeArg {
    Absolute,
    Scaled,
}

impl From<OffsetModeArg> for OffsetMode {
    fn from(m: OffsetModeArg) -> Self {
        match m {
            OffsetModeArg::Absolute => OffsetMode::Absolute,
            OffsetModeArg::Scaled => OffsetMode::Scaled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultArg {
    ParityOffByOne,
}

impl From<FaultArg> for Fault {
    fn from(_: FaultArg) -> Self {
        Fault::ParityOffByOne
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NkMode {
    Exhaustive,
    Greedy,
    Walk,
    Iidcheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkRuleArg {
    Random,
    Steepest,
}

impl From<WalkRuleArg> for WalkRule {
    fn from(r: WalkRuleArg) -> Self {
        match r {
            WalkRuleArg::Random => WalkRule::Random,
            WalkRuleArg::Steepest => WalkRule::Steepest,
        }
    }
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConstantsArgs {
    /// Fraction of coordinates at which source and target differ
    #[arg(long)]
    pub beta: Option<f64>,
    /// Dimension N (adds x_c(N) to the output)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SeriesArgs {
    /// Dimension N
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of odd coordinates; all 0..=N when absent
    #[arg(long)]
    pub distance: Option<usize>,
    #[arg(long)]
    pub max_ell: Option<usize>,
    /// Arbitrary-precision counts
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub big: Option<bool>,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TrialArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Hamming distance of the target; N when absent
    #[arg(long)]
    pub distance: Option<usize>,
    /// Fitness gap in (0, 1]
    #[arg(long)]
    pub x: Option<f64>,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct OracleArgs {
    /// Inject a known defect to check that the suite catches it
    #[arg(long, value_enum)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SeqmodelArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    /// Dimension N
    #[arg(long)]
    pub n: Option<usize>,
    /// Gap; x0(beta) when absent
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// antipodal when beta = 1, general otherwise
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepArgs {
    /// Dimensions, comma separated
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Offsets from x_c(N), comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub offset_mode: Option<OffsetModeArg>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Leave wall_time empty so reruns are byte-identical
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub redact_timing: Option<bool>,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct WindowArgs {
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Every interval must lie above this
    #[arg(long)]
    pub lower: Option<f64>,
    /// Every interval must lie below this
    #[arg(long)]
    pub upper: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub redact_timing: Option<bool>,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct NkArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of landscapes
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<NkMode>,
    #[arg(long, value_enum)]
    pub walk_rule: Option<WalkRuleArg>,
}

/// Field-wise `self.or(file)`.
pub trait Overlay {
    fn overlay(self, file: Self) -> Self;
}

macro_rules! overlay {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl Overlay for $t {
            fn overlay(self, file: Self) -> Self {
                Self { $($f: self.$f.or(file.$f)),* }
            }
        }
    };
}

overlay!(ConstantsArgs { beta, n, eps });
overlay!(SeriesArgs {
    n,
    distance,
    max_ell,
    big
});
overlay!(TrialArgs { n, distance, x });
overlay!(OracleArgs { inject_fault });
overlay!(SeqmodelArgs {
    beta,
    n,
    x,
    trials,
    eps,
    mode
});
overlay!(SweepArgs {
    n_list,
    beta,
    offsets,
    offset_mode,
    trials,
    redact_timing
});
overlay!(WindowArgs {
    n_list,
    beta,
    delta,
    trials,
    lower,
    upper,
    redact_timing
});
overlay!(NkArgs {
    n,
    k,
    seeds,
    mode,
    walk_rule
});

impl GlobalArgs {
    fn overlay(self, file: &FileConfig) -> Self {
        Self {
            seed: self.seed.or(file.seed),
            threads: self.threads.or(file.threads),
            out: self.out.or(file.out.clone()),
            format: self.format.or(file.format),
            config: self.config,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub constants: ConstantsArgs,
    pub series: SeriesArgs,
    pub trial: TrialArgs,
    pub oracle_validate: OracleArgs,
    pub seqmodel: SeqmodelArgs,
    pub sweep: SweepArgs,
    pub window: WindowArgs,
    pub nk: NkArgs,
}

pub fn load(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Applies the config file (if any) under the command-line values.
pub fn resolve(cli: Cli) -> Result<(GlobalArgs, Command), String> {
    let file = match &cli.global.config {
        Some(path) => load(path)?,
        None => FileConfig::default(),
    };
    let global = cli.global.overlay(&file);
    let command = match cli.command {
        Command::Constants(a) => Command::Constants(a.overlay(file.constants)),
        Command::Series(a) => Command::Series(a.overlay(file.series)),
        Command::Trial(a) => Command::Trial(a.overlay(file.trial)),
        Command::OracleValidate(a) => Command::OracleValidate(a.overlay(file.oracle_validate)),
        Command::Seqmodel(a) => Command::Seqmodel(a.overlay(file.seqmodel)),
        Command::Sweep(a) => Command::Sweep(a.overlay(file.sweep)),
        Command::Window(a) => Command::Window(a.overlay(file.window)),
        Command::Nk(a) => Command::Nk(a.overlay(file.nk)),
    };
    Ok((global, command))
}
