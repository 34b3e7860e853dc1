//! Flag parsing and config resolution.
//!
//! Every knob can arrive three ways, strongest first: command-line flag (or
//! its PEDFORCE_* environment mirror, which clap folds into the same slot),
//! then a `key=value` line in the `--config` file keyed by the long flag
//! name, then the built-in default.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, ValueEnum};
use pedforce::{
    ColumnOrder, Error, ForceParams, FormatConfig, GoalMode, GroupingParams, Result, Separator,
};

#[derive(clap::Args, Debug, Clone)]
pub struct CommonArgs {
    /// Directory holding <subset>.txt trajectory files; bundled synthetic
    /// subsets are used when omitted
    #[arg(long, env = "PEDFORCE_DATASET_DIR", value_name = "DIR")]
    pub dataset_dir: Option<PathBuf>,

    /// Subset names to process, comma-separated or repeated; default all
    #[arg(long, env = "PEDFORCE_SUBSET", value_delimiter = ',')]
    pub subset: Vec<String>,

    /// Input layout, e.g. `cols=frame,id,x,y` or `cols=frame,id,y,x;sep=comma`
    #[arg(long, env = "PEDFORCE_FORMAT")]
    pub format: Option<String>,

    /// Flat key=value config file; flags and environment take precedence
    #[arg(long, env = "PEDFORCE_CONFIG", value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Relaxation time of the driving force, seconds
    #[arg(long, env = "PEDFORCE_TAU")]
    pub tau: Option<f64>,

    /// Fallback desired speed for near-stationary walkers, m/s
    #[arg(long, env = "PEDFORCE_V0")]
    pub v0: Option<f64>,

    /// Repulsion amplitude, m^2/s^2; 0 disables repulsion
    #[arg(long = "V0", env = "PEDFORCE_V0_AMPLITUDE")]
    pub v0_amplitude: Option<f64>,

    /// Repulsion decay length, meters
    #[arg(long = "sigma-v", env = "PEDFORCE_SIGMA_V")]
    pub sigma_v: Option<f64>,

    /// Full field-of-view width, degrees
    #[arg(long = "two-eps-deg", env = "PEDFORCE_TWO_EPS_DEG")]
    pub two_eps_deg: Option<f64>,

    /// Scale applied to forces from outside the field of view, in (0, 1]
    #[arg(long, env = "PEDFORCE_C")]
    pub c: Option<f64>,

    /// Clustering radius for group detection, meters
    #[arg(long, env = "PEDFORCE_EPS")]
    pub eps: Option<f64>,

    /// Minimum cluster size, the point itself included
    #[arg(long = "min-pts", env = "PEDFORCE_MIN_PTS")]
    pub min_pts: Option<usize>,

    /// Frames of the observed 8 a pair must co-cluster in (strictly more than)
    #[arg(long, env = "PEDFORCE_SIGMA")]
    pub sigma: Option<usize>,

    /// Trajectory samples per window
    #[arg(long = "K", env = "PEDFORCE_K")]
    pub k: Option<usize>,

    /// Near-collision distance, meters
    #[arg(long, env = "PEDFORCE_GAMMA")]
    pub gamma: Option<f64>,

    /// RNG seed; every sample stream is derived from it
    #[arg(long, env = "PEDFORCE_SEED")]
    pub seed: Option<u64>,

    /// Where rollout goals come from
    #[arg(long, env = "PEDFORCE_GOAL", value_enum)]
    pub goal: Option<GoalArg>,

    /// Gate the view cone on the force sender instead of the receiver
    #[arg(long = "fov-on-source", env = "PEDFORCE_FOV_ON_SOURCE", action = ArgAction::SetTrue)]
    pub fov_on_source: bool,

    /// Count each colliding pair once per step instead of twice
    #[arg(long = "unordered-nc", env = "PEDFORCE_UNORDERED_NC", action = ArgAction::SetTrue)]
    pub unordered_nc: bool,

    /// Simulate all agents together instead of replaying neighbors
    #[arg(long, env = "PEDFORCE_JOINT", action = ArgAction::SetTrue)]
    pub joint: bool,

    /// Integrator substeps per frame
    #[arg(long, env = "PEDFORCE_SUBSTEPS", value_name = "N")]
    pub substeps: Option<usize>,

    /// Window stride in frames
    #[arg(long, env = "PEDFORCE_STRIDE", value_name = "N")]
    pub stride: Option<usize>,

    /// Output directory
    #[arg(long, env = "PEDFORCE_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalArg {
    /// Ground-truth final position
    Oracle,
    /// Last observed position plus mean observed velocity
    Extrapolate,
}

/// Everything resolved; the manifest is rendered from this.
#[derive(Debug, Clone)]
pub struct Settings {
    pub dataset_dir: Option<PathBuf>,
    pub subsets: Vec<String>,
    pub format: FormatConfig,
    pub params: ForceParams,
    pub grouping: GroupingParams,
    pub k: usize,
    pub gamma: f64,
    pub seed: u64,
    pub goal_mode: GoalMode,
    pub unordered_nc: bool,
    pub joint: bool,
    pub substeps: usize,
    pub stride: usize,
    pub out: PathBuf,
}

fn parse_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config("config", format!("line {}: expected key=value, got `{line}`", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// `cols=frame,id,x,y` with an optional `;sep=comma` (or `sep=whitespace`).
pub fn parse_format(spec: &str) -> Result<FormatConfig> {
    let mut columns: Option<ColumnOrder> = None;
    let mut separator = Separator::Whitespace;
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('=') {
            Some(("cols", order)) => columns = Some(ColumnOrder::parse(order)?),
            Some(("sep", "comma")) => separator = Separator::Comma,
            Some(("sep", "whitespace")) | Some(("sep", "ws")) => {
                separator = Separator::Whitespace;
            }
            _ => {
                return Err(Error::config(
                    "format",
                    format!("unrecognized segment `{part}` (expected cols=... or sep=...)"),
                ));
            }
        }
    }
    Ok(FormatConfig { columns: columns.unwrap_or(FormatConfig::default().columns), separator })
}

fn from_config<T: FromStr>(config: &BTreeMap<String, String>, key: &'static str) -> Result<Option<T>> {
    match config.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::config(key, format!("cannot parse `{raw}`"))),
    }
}

fn config_flag(config: &BTreeMap<String, String>, key: &'static str) -> Result<bool> {
    Ok(from_config::<bool>(config, key)?.unwrap_or(false))
}

// Negated comparisons so NaN inputs fail validation too.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn resolve(args: &CommonArgs) -> Result<Settings> {
    let config = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };

    let pick = |cli: Option<f64>, key: &'static str, default: f64| -> Result<f64> {
        Ok(cli.or(from_config(&config, key)?).unwrap_or(default))
    };
    let pick_count = |cli: Option<usize>, key: &'static str, default: usize| -> Result<usize> {
        Ok(cli.or(from_config(&config, key)?).unwrap_or(default))
    };

    let defaults = ForceParams::default();
    let params = ForceParams {
        tau: pick(args.tau, "tau", defaults.tau)?,
        v0_default: pick(args.v0, "v0", defaults.v0_default)?,
        v0_amplitude: pick(args.v0_amplitude, "V0", defaults.v0_amplitude)?,
        sigma_v: pick(args.sigma_v, "sigma-v", defaults.sigma_v)?,
        two_epsilon_deg: pick(args.two_eps_deg, "two-eps-deg", defaults.two_epsilon_deg)?,
        c: pick(args.c, "c", defaults.c)?,
        fov_on_source: args.fov_on_source || config_flag(&config, "fov-on-source")?,
        ..defaults
    };
    params.validate()?;

    let grouping_defaults = GroupingParams::default();
    let grouping = GroupingParams {
        eps: pick(args.eps, "eps", grouping_defaults.eps)?,
        min_pts: pick_count(args.min_pts, "min-pts", grouping_defaults.min_pts)?,
        sigma: pick_count(args.sigma, "sigma", grouping_defaults.sigma)?,
    };
    if !(grouping.eps > 0.0) {
        return Err(Error::config("eps", "must be positive"));
    }
    if grouping.min_pts < 1 {
        return Err(Error::config("min-pts", "must be at least 1"));
    }

    let k = pick_count(args.k, "K", 20)?;
    if k < 1 {
        return Err(Error::config("K", "must be at least 1"));
    }
    let gamma = pick(args.gamma, "gamma", 0.1)?;
    if !(gamma > 0.0) {
        return Err(Error::config("gamma", "must be positive"));
    }
    let substeps = pick_count(args.substeps, "substeps", 1)?;
    if substeps < 1 {
        return Err(Error::config("substeps", "must be at least 1"));
    }
    let stride = pick_count(args.stride, "stride", 1)?;
    if stride < 1 {
        return Err(Error::config("stride", "must be at least 1"));
    }

    let seed = args.seed.or(from_config(&config, "seed")?).unwrap_or(0);

    let goal_mode = match args.goal {
        Some(GoalArg::Oracle) => GoalMode::Oracle,
        Some(GoalArg::Extrapolate) => GoalMode::Extrapolate,
        None => match config.get("goal").map(String::as_str) {
            None => GoalMode::Oracle,
            Some("oracle") => GoalMode::Oracle,
            Some("extrapolate") => GoalMode::Extrapolate,
            Some(other) => {
                return Err(Error::config(
                    "goal",
                    format!("expected oracle or extrapolate, got `{other}`"),
                ));
            }
        },
    };

    let format_spec = args.format.clone().or_else(|| config.get("format").cloned());
    let format = match format_spec {
        Some(spec) => parse_format(&spec)?,
        None => FormatConfig::default(),
    };

    let dataset_dir = args.dataset_dir.clone().or_else(|| config.get("dataset-dir").map(PathBuf::from));
    let subsets = if args.subset.is_empty() {
        config
            .get("subset")
            .map(|s| s.split(',').map(|p| p.trim().to_string()).collect())
            .unwrap_or_default()
    } else {
        args.subset.clone()
    };

    let out = args
        .out
        .clone()
        .or_else(|| config.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    Ok(Settings {
        dataset_dir,
        subsets,
        format,
        params,
        grouping,
        k,
        gamma,
        seed,
        goal_mode,
        unordered_nc: args.unordered_nc || config_flag(&config, "unordered-nc")?,
        joint: args.joint || config_flag(&config, "joint")?,
        substeps,
        stride,
        out,
    })
}

impl Settings {
    pub fn format_spec(&self) -> String {
        let c = self.format.columns;
        let mut names = [""; 4];
        names[c.frame] = "frame";
        names[c.id] = "id";
        names[c.x] = "x";
        names[c.y] = "y";
        let sep = match self.format.separator {
            Separator::Whitespace => "whitespace",
            Separator::Comma => "comma",
        };
        format!("cols={};sep={sep}", names.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_spec_round_trips() {
        let parsed = parse_format("cols=frame,id,y,x;sep=comma").unwrap();
        assert_eq!(parsed.separator, Separator::Comma);
        assert_eq!(parsed.columns, ColumnOrder { frame: 0, id: 1, x: 3, y: 2 });
    }

    #[test]
    fn format_rejects_junk_segment() {
        let err = parse_format("cols=frame,id,x,y;delim=tab").unwrap_err();
        assert!(err.to_string().contains("format"));
    }

    #[test]
    fn bare_sep_segment_keeps_default_columns() {
        let parsed = parse_format("sep=comma").unwrap();
        assert_eq!(parsed.columns, FormatConfig::default().columns);
        assert_eq!(parsed.separator, Separator::Comma);
    }
}
