//! Command-line interface and value parsers.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use speclab::spaceform::SpaceKind;

#[derive(Parser, Debug)]
#[command(name = "speclab", version, about = "Batch experiment runner for spectral geometry checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// First Dirichlet eigenvalue, boundary slope and torsion of geodesic balls (CSV).
    CapEigen(CapEigenArgs),
    /// η table of the shifted Dirichlet-to-Neumann operator and gap checks (CSV + summary).
    GapScan(GapScanArgs),
    /// ACF monotonicity, deficit inequality and stability reports per pair (JSON).
    AcfRun(AcfRunArgs),
    /// Quantitative Faber-Krahn deficits along a perturbation ladder (JSON).
    FkDeficit(FkDeficitArgs),
    /// Eigenvalue and torsion deficit curves against reference balls (CSV + summary).
    KjCurves(KjCurvesArgs),
    /// Characteristic constants of caps by volume fraction and convexity at ½ (JSON).
    AlphaHat(AlphaHatArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CapEigen(_) => "cap-eigen",
            Self::GapScan(_) => "gap-scan",
            Self::AcfRun(_) => "acf-run",
            Self::FkDeficit(_) => "fk-deficit",
            Self::KjCurves(_) => "kj-curves",
            Self::AlphaHat(_) => "alpha-hat",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CapEigenArgs {
    /// sphere, euclidean or hyperbolic
    #[arg(long, default_value = "sphere", value_parser = parse_space)]
    pub space: SpaceKind,
    /// Dimension m of the space form.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// A single radius (accepts forms like 1.2, pi/3, 2pi/3).
    #[arg(long, value_parser = parse_scalar, conflicts_with = "rho_grid")]
    pub rho: Option<f64>,
    /// Radii as a comma list or a:b:count; empty for an empty sweep.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub rho_grid: Option<FloatList>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GapScanArgs {
    /// Dimension n of the sphere S^n.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_parser = parse_list, default_value = "pi/3,pi/2,2pi/3")]
    pub rho_grid: FloatList,
    /// Largest degree in the η table.
    #[arg(long, default_value_t = speclab::dtn::DEFAULT_K_MAX)]
    pub modes: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AcfRunArgs {
    /// Built-in corpus or pair name; defaults to the planar corpus.
    #[arg(long, conflicts_with = "field_csv")]
    pub corpus: Option<String>,
    /// Sampled pair with header r,theta,u1,u2 (or r,phi,u1,u2 with --dim ≥ 3).
    #[arg(long)]
    pub field_csv: Option<PathBuf>,
    /// Ambient dimension of a --field-csv pair.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Angular × radial samples of generated pairs.
    #[arg(long, value_parser = parse_grid, default_value = "512x256")]
    pub grid: (usize, usize),
    /// Number of ×2 refinements re-emitted after the base grid.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    /// Largest dyadic scale k of the blowup fit; when given the fit runs on every pair,
    /// otherwise only on pairs that are not subharmonic (with k = 10).
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FkDeficitArgs {
    #[arg(long, default_value = "sphere", value_parser = parse_space)]
    pub space: SpaceKind,
    /// Dimension n of the space form (the solver handles n = 2).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_parser = parse_scalar, default_value = "1")]
    pub rho: f64,
    /// Perturbation direction: degree[:index[:coeff]] entries, or `translate` for the
    /// translated-cap family.
    #[arg(long, default_value = "2")]
    pub modes: String,
    #[arg(long, value_parser = parse_list, default_value = "0.04,0.02,0.01")]
    pub t_ladder: FloatList,
    /// φ × θ samples of the solver grid.
    #[arg(long, value_parser = parse_grid, default_value = "256x128")]
    pub grid: (usize, usize),
    /// With 1 or more, also solve on the half grid for error estimates.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    /// Draw the coefficients of the listed modes uniformly in [−1, 1] (then normalize).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct KjCurvesArgs {
    #[arg(long, default_value = "sphere", value_parser = parse_space)]
    pub space: SpaceKind,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Reference radius R.
    #[arg(long, value_parser = parse_scalar, conflicts_with = "rho_grid")]
    pub rho: Option<f64>,
    /// Several reference radii.
    #[arg(long, value_parser = parse_list)]
    pub rho_grid: Option<FloatList>,
    /// Number of radii r = R·i/N, i = 1..N.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Number of ×2 refinements of the r grid used for the stability of C_est.
    #[arg(long, default_value_t = 1)]
    pub refine: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AlphaHatArgs {
    /// Ambient dimension n ≥ 3 (caps in S^{n−1}).
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, value_parser = parse_list, default_value = "0.05:0.95:19")]
    pub t_ladder: FloatList,
    /// Number of halvings of the ladder step around ½ used for the stability of c_est.
    #[arg(long, default_value_t = 1)]
    pub refine: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A parsed list of floats (a newtype so clap does not treat it as repeated values).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

pub fn parse_space(s: &str) -> Result<SpaceKind, String> {
    s.parse()
}

/// A real number, optionally a multiple or fraction of π: 1.5, pi, pi/3, 2pi/3, 2*pi/3.
pub fn parse_scalar(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let bad = || format!("cannot parse '{s}' as a number");
    let v = if let Some(i) = t.find("pi") {
        let coeff = t[..i].trim().trim_end_matches('*').trim();
        let c = match coeff {
            "" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let rest = t[i + 2..].trim();
        let d = match rest.strip_prefix('/') {
            Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        c * PI / d
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Comma list of scalars, or `a:b:count` for equispaced values including both ends.
pub fn parse_list(s: &str) -> Result<FloatList, String> {
    let t = s.trim();
    if t.is_empty() {
        return Ok(FloatList(Vec::new()));
    }
    let parts: Vec<&str> = t.split(':').collect();
    if parts.len() == 3 {
        let (a, b) = (parse_scalar(parts[0])?, parse_scalar(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad count in '{s}'"))?;
        return Ok(FloatList(match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }));
    }
    if parts.len() != 1 {
        return Err(format!("expected a comma list or a:b:count, got '{s}'"));
    }
    t.split(',').map(parse_scalar).collect::<Result<Vec<_>, _>>().map(FloatList)
}

/// `AxB` with positive integers.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected a grid like 512x256, got '{s}'");
    let (a, b) = s.trim().to_ascii_lowercase().split_once('x').map(|(a, b)| (a.to_string(), b.to_string())).ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}
