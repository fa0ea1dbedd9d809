use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "convex-enclose",
    version,
    args_conflicts_with_subcommands = true,
    about = "Certified two-sided bounds for integrals, means, CDFs and divergences of convex functions"
)]
pub struct Cli {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Cross-check results against the independent reference integrator.
    #[arg(long, global = true)]
    pub oracle: bool,

    /// Run the seeded randomized battery (seed from CONVEX_ENCLOSE_SEED).
    #[arg(long)]
    pub self_test: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds on ∫f - (b-a)f(x) and on the midpoint gap.
    #[command(allow_negative_numbers = true)]
    Enclose(EncloseArgs),
    /// Adaptive midpoint integration with a certified interval.
    #[command(allow_negative_numbers = true)]
    Integrate(IntegrateArgs),
    /// Compare the mean of f over [a, b] with its mean over [c, d].
    #[command(allow_negative_numbers = true)]
    Means(MeansArgs),
    /// Arithmetic, logarithmic, identric and p-logarithmic means.
    #[command(name = "special-means", allow_negative_numbers = true)]
    SpecialMeans(SpecialMeansArgs),
    /// CDF and expectation bounds for a nondecreasing density.
    #[command(allow_negative_numbers = true)]
    Prob(ProbArgs),
    /// Csiszár, Lin-Wong and Hermite-Hadamard divergences.
    #[command(allow_negative_numbers = true)]
    Divergence(DivergenceArgs),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct FnArgs {
    /// Convex function of t, e.g. "t^2" or "abs(t - 1/2)".
    #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
    #[serde(rename = "fn")]
    pub func: String,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct EncloseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub f: FnArgs,
    /// Evaluation point in [a, b].
    #[arg(long)]
    pub x: f64,
    /// Also bound the window [x - h/2, x + h/2].
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct IntegrateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub f: FnArgs,
    /// Target width of the certified interval.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = convex_enclose::quadrature::DEFAULT_MAX_CELLS)]
    pub max_cells: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct MeansArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub f: FnArgs,
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub d: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SpecialMeansArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// With --d, also check the mean inequalities for [c, d] inside [a, b].
    #[arg(long, requires = "d")]
    pub c: Option<f64>,
    #[arg(long, requires = "c")]
    pub d: Option<f64>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ProbArgs {
    /// uniform, power, exponential, step, or an expression in t.
    #[arg(long, allow_hyphen_values = true)]
    pub density: String,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    /// Point at which to bound the CDF.
    #[arg(long)]
    pub x: Option<f64>,
    /// Exponent of the power density t^k.
    #[arg(long)]
    pub k: Option<f64>,
    /// Rate of the exponential density exp(rate t).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Interior jump points of the step density.
    #[arg(long, value_delimiter = ',')]
    pub breaks: Vec<f64>,
    /// Piece values of the step density, one more than the breaks.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct DivergenceArgs {
    /// One of chi2, kl, tv, reverse-kl, hellinger, or an expression in t.
    #[arg(long, allow_hyphen_values = true)]
    pub kernel: String,
    /// Comma-separated weights.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<f64>,
}
