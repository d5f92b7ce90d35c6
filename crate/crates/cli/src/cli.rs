use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ricciforge", version, about = "Numerical certificates for the metrics h_k on the three-sphere")]
pub struct Cli {
    /// `key = value` file; entries fill in flags not given on the command line.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Also write the reports to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Record wall-clock runtimes; without it `runtime_ms` is 0 so reports
    /// are byte-identical across runs.
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one verification suite.
    #[command(subcommand)]
    Verify(Verify),
    /// Heisenberg group computations.
    #[command(subcommand)]
    Group(Group),
    /// Run the standard suites over a range of k and write reports to a directory.
    Sweep(SweepArgs),
    /// Re-emit saved JSON reports in the selected format.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Ricci eigenvalue band of h_k on a sample grid.
    Ricci(RicciArgs),
    /// Chern integrals over the pole spheres or the Clifford torus.
    Chern(ChernArgs),
    /// Graph estimate of the diameter of the base.
    Diameter(DiameterArgs),
    /// Radial equation and pole behaviour of the Green's function.
    Green,
    /// Conformal change identity and the perturbation transformation law.
    Conformal(ConformalArgs),
    /// Ricci positivity criterion for the frame bundle.
    Framebundle(FrameBundleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaArg {
    Auto,
    Value(f64),
}

impl FromStr for LambdaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(LambdaArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 1.0 && v.is_finite() => Ok(LambdaArg::Value(v)),
            _ => Err(format!("expected `auto` or a number > 1, got `{s}`")),
        }
    }
}

#[derive(Debug, Args)]
pub struct RicciArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value = "auto")]
    pub lambda: LambdaArg,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.05)]
    pub exclusion: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ChernArgs {
    #[arg(long)]
    pub k: u32,
    /// Geodesic radius of the pole spheres.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Integrate over the Clifford torus instead of the pole spheres.
    #[arg(long)]
    pub clifford: bool,
}

#[derive(Debug, Args)]
pub struct DiameterArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value = "auto")]
    pub lambda: LambdaArg,
    #[arg(long, default_value_t = 5000)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0xD1A)]
    pub seed: u64,
    /// Control run with the round metric.
    #[arg(long)]
    pub round: bool,
}

#[derive(Debug, Args)]
pub struct ConformalArgs {
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value = "auto")]
    pub lambda: LambdaArg,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FrameBundleArgs {
    #[arg(long)]
    pub ric_lower: f64,
    #[arg(long)]
    pub rm: f64,
    #[arg(long)]
    pub drm: f64,
    /// Fibre scale to test; chosen automatically when absent.
    #[arg(long)]
    pub dk: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Smallest index of an abelian subgroup of H₃(ℤ/k).
    Index {
        #[arg(long)]
        k: u32,
    },
    /// Defining relations and group axioms, exhaustively.
    Relations {
        #[arg(long)]
        k: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KRange {
    pub start: u32,
    pub end: u32,
}

impl FromStr for KRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got `{s}`"))?;
        let inclusive = b.starts_with('=');
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("bad bound `{t}` in `{s}`"));
        let start = parse(a)?;
        let end = parse(b.trim_start_matches('='))?;
        let end = if inclusive { end } else { end.checked_sub(1).ok_or("empty range")? };
        if start == 0 || end < start {
            return Err(format!("range `{s}` must be non-empty and start at k >= 1"));
        }
        Ok(KRange { start, end })
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `a..b` (exclusive) or `a..=b`.
    #[arg(long)]
    pub k_range: KRange,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A JSON report file, or a directory whose `*.json` files are read in name order.
    #[arg(long)]
    pub input: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn k_ranges() {
        assert_eq!("1..4".parse::<KRange>().unwrap(), KRange { start: 1, end: 3 });
        assert_eq!("2..=5".parse::<KRange>().unwrap(), KRange { start: 2, end: 5 });
        assert!("0..3".parse::<KRange>().is_err());
        assert!("3..3".parse::<KRange>().is_err());
        assert!("x".parse::<KRange>().is_err());
    }

    #[test]
    fn lambda_values() {
        assert_eq!("auto".parse::<LambdaArg>().unwrap(), LambdaArg::Auto);
        assert_eq!("64".parse::<LambdaArg>().unwrap(), LambdaArg::Value(64.0));
        assert!("0.5".parse::<LambdaArg>().is_err());
    }

    #[test]
    fn parses_documented_invocations() {
        Cli::try_parse_from(["ricciforge", "verify", "chern", "--k", "1", "--clifford"]).unwrap();
        Cli::try_parse_from(["ricciforge", "group", "index", "--k", "3"]).unwrap();
        Cli::try_parse_from([
            "ricciforge",
            "verify",
            "ricci",
            "--k",
            "2",
            "--lambda",
            "auto",
            "--samples",
            "10000",
            "--seed",
            "7",
        ])
        .unwrap();
        Cli::try_parse_from(["ricciforge", "report", "--format", "csv", "--input", "x.json"]).unwrap();
        assert!(Cli::try_parse_from(["ricciforge", "verify", "ricci"]).is_err());
    }
}
