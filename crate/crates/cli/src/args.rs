//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{at_least_one, finite, float_list, grid, nonnegative, positive, size_list, FloatList, Grid, SizeList};

const SCHEMAS: &str = "\
CSV schemas (reals are written with 17 significant digits):
  sample nu, sample mu         sample,component,slope,i,value
  sample bridge, sample horizon sample,component,slope,x,value,scaled,gap
                               scaled = value/beta; gap = value minus the previous
                               component at the same x (0 for component 1)
  evolve sde, evolve dual      replica,t,component,slope,i,value
  evolve chain, evolve multiline
                               replica,step,component,slope,i,value
  verify *                     suite,check,statistic,threshold,samples,pass
  estimate sigma2              beta,sigma2_hat,stderr
  estimate r-covariance        theta,R_hat,stderr
  kernels table                n,tau,y,pn,rho,abs_error

Configuration: --config FILE reads key=value lines naming long flags of the
chosen subcommand (seed=3, n_grid=64, ...). Flags given on the command line win
over the file, and the file wins over PERIODIC_PITMAN_SEED.

Exit codes: 0 success or all checks passed, 1 a check failed or a run error,
2 usage error.";

#[derive(Parser, Debug)]
#[command(
    name = "periodic-pitman",
    version,
    about = "Periodic geometric Pitman transforms: samplers, dynamics and verification",
    after_long_help = SCHEMAS,
    propagate_version = true
)]
pub struct Cli {
    /// Flat key=value file; explicit flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Base seed of every random stream
    #[arg(long, global = true, env = "PERIODIC_PITMAN_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Worker threads [default: available parallelism]
    #[arg(long, global = true, value_parser = at_least_one)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw from the invariant measures and bridge constructions
    #[command(subcommand)]
    Sample(SampleCmd),
    /// Run the SDEs or the discrete chains
    #[command(subcommand)]
    Evolve(EvolveCmd),
    /// Run verification suites; exit 1 when any check fails
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Monte Carlo estimates of the limiting variance and covariance
    #[command(subcommand)]
    Estimate(EstimateCmd),
    /// Heat-kernel tables
    #[command(subcommand)]
    Kernels(KernelsCmd),
}

#[derive(Args, Debug, Clone)]
pub struct OutArg {
    /// Output CSV path (written atomically); stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct McmcArgs {
    /// Metropolis burn-in sweeps per chain
    #[arg(long, default_value_t = 400)]
    pub burn_in: usize,
    /// Sweeps between retained draws
    #[arg(long, default_value_t = 10, value_parser = at_least_one)]
    pub thin: usize,
}

#[derive(Subcommand, Debug)]
#[command(allow_negative_numbers = true)]
pub enum SampleCmd {
    /// Conditioned log-inverse-gamma vectors
    Nu(NuArgs),
    /// Stacked transforms of independent conditioned vectors
    Mu(MuArgs),
    /// Sloped Brownian bridges
    Bridge(BridgeArgs),
    /// Bridge families mapped to the horizon
    Horizon(HorizonArgs),
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct NuArgs {
    #[arg(long, default_value_t = 2, value_parser = at_least_one)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, value_parser = finite)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    pub samples: usize,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct MuArgs {
    #[arg(long, default_value_t = 2, value_parser = at_least_one)]
    pub n: usize,
    /// Comma-separated slopes, one per component
    #[arg(long, default_value = "0,1", value_parser = float_list, allow_hyphen_values = true)]
    pub slopes: FloatList,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    pub samples: usize,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct BridgeArgs {
    /// Grid size M (M+1 points on [0,1])
    #[arg(long, default_value_t = 1024, value_parser = at_least_one)]
    pub n_grid: usize,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite)]
    pub theta: f64,
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct HorizonArgs {
    #[arg(long, default_value_t = 1024, value_parser = at_least_one)]
    pub n_grid: usize,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value = "-1,1", value_parser = float_list, allow_hyphen_values = true)]
    pub slopes: FloatList,
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Subcommand, Debug)]
pub enum EvolveCmd {
    /// Coupled Burgers system started from the stacked measure
    Sde(SdeArgs),
    /// Dual system started from independent conditioned vectors
    Dual(SdeArgs),
    /// Coupled chain started from the stacked measure
    Chain(ChainArgs),
    /// Multiline chain started from independent conditioned vectors
    Multiline(ChainArgs),
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct SdeArgs {
    #[arg(long, default_value_t = 2, value_parser = at_least_one)]
    pub n: usize,
    #[arg(long, default_value = "0,1", value_parser = float_list, allow_hyphen_values = true)]
    pub slopes: FloatList,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0, value_parser = nonnegative)]
    pub horizon: f64,
    /// Steps between snapshots
    #[arg(long, default_value_t = 100, value_parser = at_least_one)]
    pub stride: usize,
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    pub replicas: usize,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    /// i.i.d. log-inverse-gamma weights with shape --gamma
    Iid,
    /// Weights conditioned to sum to --alpha
    Conditioned,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct WeightArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Conditioned)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub gamma: f64,
    #[arg(long, default_value_t = -1.0, value_parser = finite)]
    pub alpha: f64,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 2, value_parser = at_least_one)]
    pub n: usize,
    #[arg(long, default_value = "0,1", value_parser = float_list, allow_hyphen_values = true)]
    pub slopes: FloatList,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    pub replicas: usize,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Exact identities over random families
    Algebra(AlgebraArgs),
    /// Output marginals of the two-component map on product inputs
    Burke(BurkeArgs),
    /// Invariance of the stacked measure under the coupled chain
    ChainInvariance(ChainInvArgs),
    /// Invariance under the coupled Burgers and dual SDEs
    SdeInvariance(SdeInvArgs),
    /// Convergence of the transformed Burgers flow to the dual flow
    Duality(DualityArgs),
    /// Heat-kernel convergence and the Dirichlet integral
    Kernels(KernelsVerifyArgs),
    /// Unit Jacobian determinant of the two-component map
    Jacobian(JacobianArgs),
    /// Polymer ratio recursion against the two-component map
    Polymer(PolymerArgs),
    /// Monotone sandwich and marginal variance of the horizon
    Horizon(HorizonVerifyArgs),
    /// Small and large beta limits of the horizon
    Limits(LimitsArgs),
    /// Variance and covariance estimators
    Covariance(CovarianceArgs),
    /// Every suite at its default size
    All(OutArg),
}

#[derive(Args, Debug, Clone)]
pub struct AlgebraArgs {
    /// Random families per (N, k)
    #[arg(long, default_value_t = 1000, value_parser = at_least_one)]
    pub families: usize,
    #[arg(long, default_value_t = 8, value_parser = at_least_one)]
    pub n_max: usize,
    #[arg(long, default_value_t = 5, value_parser = at_least_one)]
    pub k_max: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
pub struct BurkeArgs {
    #[arg(long, default_value_t = 3, value_parser = at_least_one)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    pub gamma1: f64,
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    pub gamma2: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 100_000, value_parser = at_least_one)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialArg {
    /// The stacked measure
    Mu,
    /// Independent conditioned vectors (a negative control)
    Nu,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct ChainInvArgs {
    #[arg(long, default_value_t = 2, value_parser = at_least_one)]
    pub n: usize,
    #[arg(long, default_value = "0,1", value_parser = float_list, allow_hyphen_values = true)]
    pub slopes: FloatList,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long, default_value_t = 100_000, value_parser = at_least_one)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = InitialArg::Mu)]
    pub initial: InitialArg,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct SdeInvArgs {
    #[arg(long, default_value_t = 2, value_parser = at_least_one)]
    pub n: usize,
    #[arg(long, default_value = "0,1", value_parser = float_list, allow_hyphen_values = true)]
    pub slopes: FloatList,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0, value_parser = nonnegative)]
    pub horizon: f64,
    #[arg(long, default_value_t = 10_000, value_parser = at_least_one)]
    pub samples: usize,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct DualityArgs {
    #[arg(long, default_value_t = 3, value_parser = at_least_one)]
    pub n: usize,
    #[arg(long, default_value = "0,1", value_parser = float_list, allow_hyphen_values = true)]
    pub slopes: FloatList,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5, value_parser = positive)]
    pub horizon: f64,
    /// Step sizes; each must be a multiple of the smallest
    #[arg(long, default_value = "4e-3,2e-3,1e-3", value_parser = float_list)]
    pub dts: FloatList,
    #[arg(long, default_value_t = 100, value_parser = at_least_one)]
    pub paths: usize,
    #[arg(long, default_value_t = 0.8, value_parser = finite)]
    pub min_order: f64,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
pub struct KernelsVerifyArgs {
    #[arg(long, default_value = "100,300,1000", value_parser = size_list)]
    pub sizes: SizeList,
    #[arg(long, default_value_t = 64, value_parser = at_least_one)]
    pub quadrature_points: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
pub struct JacobianArgs {
    #[arg(long, default_value_t = 100, value_parser = at_least_one)]
    pub points: usize,
    #[arg(long, default_value_t = 6, value_parser = at_least_one)]
    pub n_max: usize,
    /// Central-difference step
    #[arg(long, default_value_t = 1e-5, value_parser = positive)]
    pub h: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
pub struct PolymerArgs {
    #[arg(long, default_value_t = 1000, value_parser = at_least_one)]
    pub samples: usize,
    #[arg(long, default_value_t = 8, value_parser = at_least_one)]
    pub n_max: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct HorizonVerifyArgs {
    #[arg(long, default_value_t = 1024, value_parser = at_least_one)]
    pub n_grid: usize,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value = "-1,1", value_parser = float_list, allow_hyphen_values = true)]
    pub slopes: FloatList,
    #[arg(long, default_value_t = 1000, value_parser = at_least_one)]
    pub sandwich_draws: usize,
    #[arg(long, default_value_t = 10_000, value_parser = at_least_one)]
    pub variance_draws: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
pub struct LimitsArgs {
    #[arg(long, default_value_t = 1024, value_parser = at_least_one)]
    pub n_grid: usize,
    /// Grid of the large-beta check
    #[arg(long, default_value_t = 4096, value_parser = at_least_one)]
    pub tropical_grid: usize,
    #[arg(long, default_value_t = 1000, value_parser = at_least_one)]
    pub draws: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
pub struct CovarianceArgs {
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.01, value_parser = positive)]
    pub small_beta: f64,
    #[arg(long, default_value_t = 1024, value_parser = at_least_one)]
    pub n_grid: usize,
    #[arg(long, default_value_t = 10_000, value_parser = at_least_one)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Subcommand, Debug)]
pub enum EstimateCmd {
    /// Limiting variance estimate at one beta
    Sigma2(Sigma2Args),
    /// Covariance estimate over a grid of slope differences
    RCovariance(RCovArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Sigma2Args {
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 1024, value_parser = at_least_one)]
    pub n_grid: usize,
    #[arg(long, default_value_t = 10_000, value_parser = at_least_one)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct RCovArgs {
    /// start:end:step, endpoints included within half a step
    #[arg(long, default_value = "0:2:0.5", value_parser = grid, allow_hyphen_values = true)]
    pub theta_grid: Grid,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, default_value_t = 1024, value_parser = at_least_one)]
    pub n_grid: usize,
    #[arg(long, default_value_t = 10_000, value_parser = at_least_one)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Subcommand, Debug)]
pub enum KernelsCmd {
    /// p_N against the Gaussian kernel on the convergence grid
    Table(KernelTableArgs),
}

#[derive(Args, Debug, Clone)]
pub struct KernelTableArgs {
    #[arg(long, default_value = "100,300,1000", value_parser = size_list)]
    pub sizes: SizeList,
    #[command(flatten)]
    pub out: OutArg,
}
