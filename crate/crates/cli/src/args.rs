//! Command-line grammar and its conversion into library types.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nnbounds::bounds::{DecayRate, SizeRule, WeightRule};
use nnbounds::entropy::Metric;
use nnbounds::lipschitz::PairSampling;
use nnbounds::{Activation, Architecture, Grid, Nonlinearity, Result};

#[derive(Parser, Debug)]
#[command(
    name = "nnbounds",
    version,
    about = "Lipschitz certificates, entropy numbers and approximation lower bounds for feed-forward networks",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// File of `key = value` lines applied before the command-line flags.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Number of parameters of an architecture.
    Count(CountArgs),
    /// Certified Lipschitz constant of the parameter-to-function map.
    LipBound(LipBoundArgs),
    /// Try to break the certified constant with sampled parameter pairs.
    LipVerify(LipVerifyArgs),
    /// Entropy numbers of a point cloud, an interval or a discretised Lipschitz ball.
    Entropy(EntropyArgs),
    /// Approximation-error lower bound at one or more parameter counts.
    Bound(BoundArgs),
    /// Depth-versus-width table at a fixed parameter budget.
    Tradeoff(TradeoffArgs),
    /// Ratio of the lower bound to the entropy rate along a family of networks.
    Super(SuperArgs),
    /// Best grid approximation error found by seeded random search.
    Approx(ApproxArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ArchArgs {
    /// Input dimension.
    #[arg(long = "d", default_value_t = 1)]
    pub d: usize,
    /// Width (units per hidden layer).
    #[arg(long = "W")]
    pub width: usize,
    /// Depth (number of hidden layers).
    #[arg(long = "l")]
    pub depth: usize,
}

impl ArchArgs {
    pub fn arch(&self) -> Result<Architecture> {
        Architecture::new(self.d, self.width, self.depth)
    }
}

#[derive(Args, Debug, Clone)]
pub struct ActArgs {
    /// relu, clip, leaky_relu[:slope], tanh[:amplitude,rate], or custom (formula-only commands).
    #[arg(long = "act", default_value = "relu")]
    pub act: String,
    /// Declared Lipschitz constant; may only raise a builtin's constant.
    #[arg(long = "lip")]
    pub lip: Option<f64>,
    /// Value at zero of a custom activation.
    #[arg(long = "at-zero")]
    pub at_zero: Option<f64>,
}

impl ActArgs {
    /// The activation, which must be evaluable unless `declared_only`.
    pub fn nonlinearity(&self, declared_only: bool) -> Result<Nonlinearity> {
        if self.act.eq_ignore_ascii_case("custom") {
            if !declared_only {
                return Err(nnbounds::Error::Input(
                    "a custom activation has no formula here; it is accepted only by count, lip-bound, bound, tradeoff and super".into(),
                ));
            }
            let lip = self
                .lip
                .ok_or_else(|| nnbounds::Error::Input("--act custom needs --lip".into()))?;
            let at_zero = self.at_zero.unwrap_or(0.0);
            // only the declared constants are ever read
            return Ok(Activation::custom("custom", lip, move |_| at_zero)?.into());
        }
        if self.at_zero.is_some() {
            return Err(nnbounds::Error::Input(
                "--at-zero applies only to --act custom".into(),
            ));
        }
        let mut act = Activation::from_name(&self.act)?;
        if let Some(lip) = self.lip {
            act = act.with_declared_lipschitz(lip)?;
        }
        Ok(act.into())
    }
}

#[derive(Args, Debug, Clone)]
pub struct WeightArgs {
    /// Constant weight bound.
    #[arg(long = "w", default_value_t = 1.0, conflicts_with = "delta")]
    pub w: f64,
    /// Growing weight bound w = scale * n^delta.
    #[arg(long = "delta")]
    pub delta: Option<f64>,
    /// Scale of the growing weight bound.
    #[arg(long = "w-scale", default_value_t = 1.0, requires = "delta")]
    pub w_scale: f64,
}

impl WeightArgs {
    pub fn rule(&self) -> Result<WeightRule> {
        match self.delta {
            Some(delta) => WeightRule::power_of_n(delta, self.w_scale),
            None => WeightRule::constant(self.w),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateKind {
    #[value(name = "polylog")]
    PolyLog,
    #[value(name = "logonly")]
    LogOnly,
}

#[derive(Args, Debug, Clone)]
pub struct RateArgs {
    /// Assumed entropy decay: polylog (log n)^beta / n^alpha, or logonly (log n)^-alpha.
    #[arg(long = "rate", value_enum, default_value_t = RateKind::PolyLog)]
    pub rate: RateKind,
    #[arg(long = "alpha", default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long = "beta", default_value_t = 0.0)]
    pub beta: f64,
}

impl RateArgs {
    pub fn rate(&self) -> Result<DecayRate> {
        match self.rate {
            RateKind::PolyLog => DecayRate::poly_log(self.alpha, self.beta),
            RateKind::LogOnly => DecayRate::log_only(self.alpha),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; relative paths resolve against $NNBOUNDS_OUT_DIR when set.
    #[arg(long = "out", value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long = "format", value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Grid points per axis (default: 1024 for d=1, 64 for d=2, 16 otherwise).
    #[arg(long = "grid")]
    pub grid: Option<usize>,
}

impl GridArgs {
    pub fn grid(&self, dim: usize) -> Result<Grid> {
        match self.grid {
            Some(m) => Grid::new(dim, m),
            None => Grid::default_for(dim),
        }
    }
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub arch: ArchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct LipBoundArgs {
    #[command(flatten)]
    pub arch: ArchArgs,
    #[command(flatten)]
    pub act: ActArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    /// Constant c in phi(n) = c * l * log2(W(w+1)).
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct LipVerifyArgs {
    #[command(flatten)]
    pub arch: ArchArgs,
    #[command(flatten)]
    pub act: ActArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of sampled parameter pairs.
    #[arg(long = "pairs", default_value_t = 10_000)]
    pub pairs: usize,
    #[arg(long = "seed", default_value_t = 0)]
    pub seed: u64,
    /// Fraction of pairs that are small perturbations of one draw.
    #[arg(long = "directional-fraction", default_value_t = PairSampling::default().directional_fraction)]
    pub directional_fraction: f64,
    /// Perturbation size relative to w.
    #[arg(long = "relative-step", default_value_t = PairSampling::default().relative_step)]
    pub relative_step: f64,
    /// Pairs closer than this in parameter space are skipped.
    #[arg(long = "cutoff", default_value_t = PairSampling::default().degeneracy_cutoff)]
    pub cutoff: f64,
    /// Check this constant instead of the certified one.
    #[arg(long = "claim")]
    pub claim: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl LipVerifyArgs {
    pub fn sampling(&self) -> PairSampling {
        PairSampling {
            directional_fraction: self.directional_fraction,
            relative_step: self.relative_step,
            degeneracy_cutoff: self.cutoff,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricArg {
    Sup,
    Euclidean,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Sup => Metric::Sup,
            MetricArg::Euclidean => Metric::Euclidean,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyMethod {
    /// Exact where the budget allows, greedy otherwise.
    Curve,
    Exact,
    Greedy,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["cloud", "values", "interval", "ball"]))]
pub struct EntropyArgs {
    /// CSV file with one point per row (a header row is allowed).
    #[arg(long = "cloud", value_name = "PATH")]
    pub cloud: Option<PathBuf>,
    /// Scalar points, comma separated.
    #[arg(long = "values", value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    /// Interval a,b (analytic entropy numbers).
    #[arg(long = "interval", value_delimiter = ',', allow_hyphen_values = true)]
    pub interval: Option<Vec<f64>>,
    /// Discretised Lipschitz ball M,B,m,q.
    #[arg(long = "ball", value_delimiter = ',')]
    pub ball: Option<Vec<f64>>,
    #[arg(long = "metric", value_enum, default_value_t = MetricArg::Sup)]
    pub metric: MetricArg,
    /// Largest n; entries cover n = 0..=n-max.
    #[arg(long = "n-max", default_value_t = 3)]
    pub n_max: u32,
    #[arg(long = "method", value_enum, default_value_t = EntropyMethod::Curve)]
    pub method: EntropyMethod,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaArg {
    /// General bound for any weight rule.
    General,
    /// Specialisation to constant weights.
    ConstantWeight,
    /// Width transfer at phi from the architecture and --c.
    Width,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[command(flatten)]
    pub arch: ArchArgs,
    #[command(flatten)]
    pub act: ActArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[command(flatten)]
    pub rate: RateArgs,
    /// Parameter counts, comma separated (default: the architecture's own count).
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<f64>,
    #[arg(long = "formula", value_enum, default_value_t = FormulaArg::General)]
    pub formula: FormulaArg,
    /// Constant c in phi(n), used by --formula width.
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TradeoffArgs {
    #[arg(long = "d", default_value_t = 1)]
    pub d: usize,
    /// Parameter budget.
    #[arg(long = "budget")]
    pub budget: usize,
    /// Depths to tabulate, comma separated.
    #[arg(long = "depths", value_delimiter = ',', default_values_t = [1, 2, 4, 8, 16])]
    pub depths: Vec<usize>,
    #[command(flatten)]
    pub act: ActArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[command(flatten)]
    pub rate: RateArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SuperArgs {
    /// Width rule W(n) = factor * n^exponent, as factor,exponent.
    #[arg(long = "W-rule", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1.0, 1.0])]
    pub width_rule: Vec<f64>,
    /// Depth rule l(n) = factor * n^exponent, as factor,exponent.
    #[arg(long = "l-rule", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1.0, 0.0])]
    pub depth_rule: Vec<f64>,
    /// Parameter counts are 2^e for e in [n-exp-min, n-exp-max].
    #[arg(long = "n-exp-min", default_value_t = 8)]
    pub n_exp_min: u32,
    #[arg(long = "n-exp-max", default_value_t = 24)]
    pub n_exp_max: u32,
    /// Classification threshold on the fitted power-law exponent.
    #[arg(long = "threshold", default_value_t = nnbounds::bounds::GAP_SLOPE_THRESHOLD, allow_negative_numbers = true)]
    pub threshold: f64,
    #[command(flatten)]
    pub act: ActArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[command(flatten)]
    pub rate: RateArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl SuperArgs {
    pub fn rules(&self) -> Result<(SizeRule, SizeRule)> {
        let rule = |v: &[f64], flag: &str| match v {
            [factor, exponent] => Ok(SizeRule {
                factor: *factor,
                exponent: *exponent,
            }),
            _ => Err(nnbounds::Error::Input(format!("{flag} takes factor,exponent"))),
        };
        Ok((
            rule(&self.width_rule, "--W-rule")?,
            rule(&self.depth_rule, "--l-rule")?,
        ))
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetFn {
    /// |2 x_1 - 1|
    Abs,
    /// sin(2 pi x_1)
    Sine,
    /// Product of x_k (1 - x_k) over coordinates, scaled by 4^d.
    Bump,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("target_source").required(true).args(["target", "target_fn"]))]
pub struct ApproxArgs {
    #[command(flatten)]
    pub arch: ArchArgs,
    #[command(flatten)]
    pub act: ActArgs,
    #[arg(long = "w", default_value_t = 1.0)]
    pub w: f64,
    /// Target values as CSV: coordinates then value per row, on a full grid.
    #[arg(long = "target", value_name = "PATH")]
    pub target: Option<PathBuf>,
    /// Built-in target sampled on --grid.
    #[arg(long = "target-fn", value_enum)]
    pub target_fn: Option<TargetFn>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Uniform random samples from the parameter box.
    #[arg(long = "samples", default_value_t = 10_000)]
    pub samples: usize,
    /// Coordinate-search sweeps per refinement phase.
    #[arg(long = "refine", default_value_t = 1000)]
    pub refine: usize,
    /// Number of best samples refined.
    #[arg(long = "refine-starts", default_value_t = 1)]
    pub refine_starts: usize,
    #[arg(long = "seed", default_value_t = 0)]
    pub seed: u64,
    /// Widths for a warm-started widening run, comma separated.
    #[arg(long = "widths", value_delimiter = ',')]
    pub widths: Vec<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}
