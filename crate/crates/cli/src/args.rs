use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use gramian_bounds::capacity::Region;

const REGION_HELP: &str = "Region: interval:a,b | disk:cx,cy,r | ngon:n,h | twointervals:a,b | halfdisk:r | \
ellipse:a,b | square:l | triangle:l | polygon:x1,y1;x2,y2;... | curve:x1,y1;... | points:x1,y1;... \
or @FILE holding the region as JSON";

/// Controllability Gramians, control energy and eigenvalue-clustering bounds.
#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "gramian-bounds", version, about)]
pub struct RunConfig {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct Global {
    /// Base seed; batch trial i uses seed + i.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Starting precision of the Gramian escalation ladder, in bits.
    #[arg(long, global = true, env = "GRAMIAN_BOUNDS_PRECISION", default_value_t = 53)]
    pub precision_bits: u32,
    /// Worker threads for batch runs (default: one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (default: stdout). CSV output also writes PATH.json with full values.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the parsed configuration as JSON and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Recompute the four reference numbers of the clustering bounds.
    Reproduce,
    /// Logarithmic capacity: closed form where known, Fekete estimate otherwise.
    Capacity {
        #[arg(long, value_parser = parse_region, help = REGION_HELP)]
        region: Region,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
    },
    /// Minimax error of z^l on a region by polynomials of degree below l.
    Err {
        #[arg(long, value_parser = parse_region, help = REGION_HELP)]
        region: Region,
        #[arg(long)]
        l: usize,
        /// Emit (l, Err(l)^(1/l)) for every l up to the given one.
        #[arg(long)]
        trend: bool,
    },
    /// Extreme eigenvalues of W(t) for a system file ({"n","k","A","B"}).
    Gramian {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        t: usize,
        /// Emit every horizon 0..=t.
        #[arg(long)]
        series: bool,
    },
    /// Check lambda_min(W(t_min)) against cond(V)^2 Err^2 ||B||_F^2.
    VerifyThm1 {
        /// Clustering region X.
        #[arg(long, value_parser = parse_region, help = REGION_HELP)]
        region: Region,
        /// System file; without it, systems are generated.
        #[arg(long)]
        system: Option<PathBuf>,
        /// Region the generated eigenvalues are drawn from (default: X).
        #[arg(long, value_parser = parse_region)]
        eigen_region: Option<Region>,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        cond: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Check lambda_min(W(t)) for Hermitian A against 4 t_quad e^-q ||B||_F^2.
    VerifyThm2 {
        #[arg(long)]
        q: f64,
        /// Horizon (default: min(floor(t_quad), 2000)).
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long, default_value_t = 24)]
        n: usize,
        /// Eigenvalues in [-1,1] of generated systems (default: n).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Largest lambda_min(W(t)) for symmetric systems with spectrum in [-1,1].
    Conjecture {
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8])]
        n: Vec<usize>,
        /// t = round(multiplier * n^2).
        #[arg(long, value_delimiter = ',', default_values_t = [0.5f64, 1.0, 2.0, 5.0])]
        multipliers: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        trials: usize,
    },
}

fn parse_region(s: &str) -> Result<Region, String> {
    if let Some(path) = s.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
        let region: Region = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
        region.validate().map_err(|e| e.to_string())?;
        Ok(region)
    } else {
        s.parse().map_err(|e: gramian_bounds::capacity::RegionError| e.to_string())
    }
}
