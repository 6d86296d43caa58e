//! Flat `key = value` run configuration with `#` comments.
//!
//! ```text
//! g = 2
//! nu = 1
//! hbar = 1
//! spectrum = 1, -1
//! c0 = 0.5, 0
//! c1 = 0.8660254037844386, 0
//! t_start = 0
//! t_end = 6.283185307179586
//! n_steps = 80
//! ```
//!
//! Amplitudes `c<k>` pair with the k-th spectrum entry as written; they are
//! reordered together with the spectrum, which the model stores descending.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::fock::DEFAULT_N_MAX;
use crate::model::{ModelParams, PrincipalAmplitudes};
use crate::precs::{Grid, DEFAULT_EPS};

/// Amplitudes farther than this from unit norm are rejected rather than
/// silently rescaled.
const AMPLITUDE_NORM_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Explicit grid bounds and node counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOverride {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub amplitudes: PrincipalAmplitudes,
    pub times: Vec<f64>,
    pub grid: Option<GridOverride>,
    pub eps: f64,
    pub n_max: usize,
    /// RK4 step used by `verify`; default 2π/(2000ν).
    pub step: Option<f64>,
    pub gap_cells: usize,
    pub out: PathBuf,
    /// Adds Fock-oracle columns to `evolve`.
    pub oracle: bool,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::global(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let entries = tokenize(text)?;
        let get = |key: &str| entries.get(key);

        let real = |key: &str| -> Result<Option<f64>, ConfigError> {
            get(key).map(|(line, v)| parse_real(*line, key, v)).transpose()
        };
        let integer = |key: &str| -> Result<Option<usize>, ConfigError> {
            get(key)
                .map(|(line, v)| {
                    v.parse::<usize>().map_err(|_| {
                        ConfigError::at(*line, format!("`{key}` expects a non-negative integer, got `{v}`"))
                    })
                })
                .transpose()
        };
        let required = |key: &str| -> Result<f64, ConfigError> {
            real(key)?.ok_or_else(|| ConfigError::global(format!("missing required key `{key}`")))
        };

        let g = required("g")?;
        let nu = required("nu")?;
        let hbar = real("hbar")?.unwrap_or(1.0);
        let (spec_line, spec_text) = get("spectrum")
            .ok_or_else(|| ConfigError::global("missing required key `spectrum`"))?;
        let spectrum = parse_list(*spec_line, "spectrum", spec_text)?;

        let mut amps = Vec::with_capacity(spectrum.len());
        for k in 0..spectrum.len() {
            let key = format!("c{k}");
            let (line, v) = get(&key)
                .ok_or_else(|| ConfigError::global(format!("missing amplitude `{key}`")))?;
            let parts = parse_list(*line, &key, v)?;
            match parts.as_slice() {
                [re] => amps.push(Complex64::new(*re, 0.0)),
                [re, im] => amps.push(Complex64::new(*re, *im)),
                _ => return Err(ConfigError::at(*line, format!("`{key}` expects `re, im`"))),
            }
        }
        if let Some((key, (line, _))) = entries.iter().find(|(k, _)| {
            k.strip_prefix('c')
                .and_then(|n| n.parse::<usize>().ok())
                .is_some_and(|n| n >= spectrum.len())
        }) {
            return Err(ConfigError::at(
                *line,
                format!("`{key}` has no matching spectrum entry ({} levels)", spectrum.len()),
            ));
        }

        let params = ModelParams::new(g, nu, hbar, &spectrum)
            .map_err(|e| ConfigError::at(*spec_line, e.to_string()))?;
        // Reorder amplitudes to the descending spectrum.
        let mut order: Vec<usize> = (0..spectrum.len()).collect();
        order.sort_by(|&a, &b| spectrum[b].total_cmp(&spectrum[a]));
        let amps: Vec<Complex64> = order.iter().map(|&k| amps[k]).collect();
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if !((norm - 1.0).abs() <= AMPLITUDE_NORM_SLACK) {
            return Err(ConfigError::global(format!(
                "amplitudes are not normalized: sum |c|^2 = {norm}"
            )));
        }
        let amplitudes = PrincipalAmplitudes::normalized(amps)
            .map_err(|e| ConfigError::global(e.to_string()))?;

        let times = if let Some((line, v)) = get("times") {
            for key in ["t_start", "t_end", "n_steps"] {
                if let Some((l, _)) = get(key) {
                    return Err(ConfigError::at(*l, format!("`{key}` conflicts with `times` (line {line})")));
                }
            }
            parse_list(*line, "times", v)?
        } else {
            let t_start = real("t_start")?.unwrap_or(0.0);
            let t_end = required("t_end")?;
            let n_steps = integer("n_steps")?
                .ok_or_else(|| ConfigError::global("missing required key `n_steps` (or give `times`)"))?;
            if n_steps == 0 {
                vec![t_start]
            } else {
                (0..=n_steps)
                    .map(|k| t_start + (t_end - t_start) * k as f64 / n_steps as f64)
                    .collect()
            }
        };
        let times_line = get("times").or(get("t_end")).map(|(l, _)| *l);
        if times.is_empty()
            || times.iter().any(|t| !t.is_finite() || *t < 0.0)
            || times.windows(2).any(|w| w[1] <= w[0])
        {
            let msg = "times must be non-empty, non-negative and strictly increasing";
            return Err(match times_line {
                Some(l) => ConfigError::at(l, msg),
                None => ConfigError::global(msg),
            });
        }

        let grid_keys = ["grid_re_min", "grid_re_max", "grid_im_min", "grid_im_max", "grid_n_re", "grid_n_im"];
        let present = grid_keys.iter().filter(|k| get(k).is_some()).count();
        let grid = match present {
            0 => None,
            6 => Some(GridOverride {
                re_min: required("grid_re_min")?,
                re_max: required("grid_re_max")?,
                im_min: required("grid_im_min")?,
                im_max: required("grid_im_max")?,
                n_re: integer("grid_n_re")?.unwrap_or(0),
                n_im: integer("grid_n_im")?.unwrap_or(0),
            }),
            _ => {
                return Err(ConfigError::global(format!(
                    "grid override needs all of {}",
                    grid_keys.join(", ")
                )))
            }
        };

        let eps = real("eps")?.unwrap_or(DEFAULT_EPS);
        if !(eps > 0.0 && eps < 1.0) {
            let line = get("eps").map(|(l, _)| *l).unwrap_or(0);
            return Err(ConfigError::at(line, format!("eps must lie in (0, 1), got {eps}")));
        }
        let step = real("step")?;
        if let (Some(s), Some((line, _))) = (step, get("step")) {
            if !(s > 0.0) {
                return Err(ConfigError::at(*line, "step must be positive"));
            }
        }
        let oracle = match get("oracle") {
            None => false,
            Some((line, v)) => match v.as_str() {
                "1" | "true" | "yes" => true,
                "0" | "false" | "no" => false,
                _ => return Err(ConfigError::at(*line, format!("`oracle` expects a boolean, got `{v}`"))),
            },
        };

        let config = Self {
            params,
            amplitudes,
            times,
            grid,
            eps,
            n_max: integer("n_max")?.unwrap_or(DEFAULT_N_MAX),
            step,
            gap_cells: integer("gap_cells")?.unwrap_or(0),
            out: get("out").map(|(_, v)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from(".")),
            oracle,
        };
        config.grid_for(config.t_max())?;
        Ok(config)
    }

    pub fn t_max(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// The configured grid override, or the automatic grid covering the
    /// orbits up to `t_max`.
    pub fn grid_for(&self, t_max: f64) -> Result<Grid, ConfigError> {
        match self.grid {
            None => Ok(Grid::auto(&self.params, t_max)),
            Some(o) => Grid::new(o.re_min, o.re_max, o.im_min, o.im_max, o.n_re, o.n_im, self.params.hbar())
                .map_err(|e| ConfigError::global(format!("grid override: {e}"))),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "g", "nu", "hbar", "spectrum", "times", "t_start", "t_end", "n_steps", "grid_re_min", "grid_re_max",
    "grid_im_min", "grid_im_max", "grid_n_re", "grid_n_im", "eps", "n_max", "step", "gap_cells", "out",
    "oracle",
];

fn tokenize(text: &str) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let is_amplitude = key
            .strip_prefix('c')
            .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()));
        if !is_amplitude && !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::at(line, format!("unknown key `{key}`")));
        }
        if let Some((first, _)) = entries.get(&key) {
            return Err(ConfigError::at(line, format!("duplicate key `{key}` (first set on line {first})")));
        }
        entries.insert(key, (line, value));
    }
    Ok(entries)
}

fn parse_real(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = v
        .parse::<f64>()
        .map_err(|_| ConfigError::at(line, format!("`{key}` expects a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(ConfigError::at(line, format!("`{key}` must be finite")));
    }
    Ok(x)
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .map(|s| parse_real(line, key, s.trim()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "\
# qubit-boson, Fig. 1 parameters
g = 2
nu = 1
hbar = 1
spectrum = 1, -1
c0 = 0.5, 0
c1 = 0.8660254037844386, 0
t_start = 0
t_end = 6.283185307179586
n_steps = 80
";

    #[test]
    fn parses_reference_config() {
        let cfg = RunConfig::parse(FIG1).unwrap();
        assert_eq!(cfg.params.spectrum(), &[1.0, -1.0]);
        assert_eq!(cfg.times.len(), 81);
        assert_eq!(cfg.times[0], 0.0);
        assert!((cfg.times[80] - std::f64::consts::TAU).abs() < 1e-15);
        assert_eq!(cfg.eps, DEFAULT_EPS);
        assert_eq!(cfg.n_max, 128);
        assert!((cfg.amplitudes.weights()[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn amplitudes_follow_spectrum_sort() {
        let text = FIG1.replace("spectrum = 1, -1", "spectrum = -1, 1");
        let cfg = RunConfig::parse(&text).unwrap();
        assert!((cfg.amplitudes.weights()[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn explicit_times_and_overrides() {
        let text = format!(
            "{}times = 0, 0.5, 1\neps = 0.05\nn_max = 64\ngap_cells = 2\nout = results\n",
            FIG1.lines().filter(|l| !l.starts_with("t_") && !l.starts_with("n_steps")).collect::<Vec<_>>().join("\n") + "\n"
        );
        let cfg = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg.times, vec![0.0, 0.5, 1.0]);
        assert_eq!(cfg.eps, 0.05);
        assert_eq!(cfg.n_max, 64);
        assert_eq!(cfg.gap_cells, 2);
        assert_eq!(cfg.out, PathBuf::from("results"));
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let err = RunConfig::parse(&FIG1.replace("nu = 1", "nu = one")).unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.to_string().starts_with("line 3:"));

        let err = RunConfig::parse(&FIG1.replace("spectrum = 1, -1", "spectrum = 1, 1")).unwrap_err();
        assert_eq!(err.line, Some(5));
        assert!(err.message.contains("degenerate"));

        let err = RunConfig::parse(&format!("{FIG1}bogus = 3\n")).unwrap_err();
        assert_eq!(err.line, Some(11));

        let err = RunConfig::parse(&format!("{FIG1}g = 3\n")).unwrap_err();
        assert!(err.message.contains("duplicate"));

        let err = RunConfig::parse(&format!("{FIG1}c2 = 1, 0\n")).unwrap_err();
        assert!(err.message.contains("no matching spectrum entry"));

        let err = RunConfig::parse(&FIG1.replace("c1 = 0.8660254037844386, 0", "c1 = 0.5, 0")).unwrap_err();
        assert!(err.message.contains("normalized"));

        let err = RunConfig::parse(&FIG1.replace("c1 = 0.8660254037844386, 0\n", "")).unwrap_err();
        assert!(err.message.contains("c1"));
    }

    #[test]
    fn rejects_bad_times_and_grid() {
        let text = FIG1.replace("t_end = 6.283185307179586", "t_end = -1");
        assert!(RunConfig::parse(&text).is_err());
        let err = RunConfig::parse(&format!("{FIG1}grid_re_min = -3\n")).unwrap_err();
        assert!(err.message.contains("grid override"));
        let err = RunConfig::parse(&format!("{FIG1}times = 0, 1\n")).unwrap_err();
        assert!(err.message.contains("conflicts"));
    }
}
