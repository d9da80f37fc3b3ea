//! Flat `section.key = value` run configuration.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use sqg_core::{Grid, InitialCondition, Preset, SolverConfig};

use crate::error::ConfigError;

/// Which separations the modulus monitor checks.
#[derive(Debug, Clone, PartialEq)]
pub enum OffsetSpec {
    /// Axis separations of 1…8 cells plus log-spaced axis and diagonal ones.
    Default,
    /// Every lattice vector with `max(|d₁|, |d₂|) ≤ k`, on top of the defaults.
    Dense(i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusSettings {
    pub enabled: bool,
    pub delta3: f64,
    /// Largest tabulated separation; `None` means the box length.
    pub r_max: Option<f64>,
    pub table_size: usize,
    pub offsets: OffsetSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub directory: PathBuf,
    /// Extra `Ḣ^{1+β}` columns in `norms.csv`.
    pub betas: Vec<f64>,
    pub snapshot_dt: Option<f64>,
    /// Also sample at log-spaced times `log_t_min · 10^{k/log_per_decade}`.
    pub log_sampling: bool,
    pub log_t_min: f64,
    pub log_per_decade: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub length: f64,
    pub solver: SolverConfig,
    pub t_end: f64,
    pub sample_dt: f64,
    pub checkpoint_dt: Option<f64>,
    pub initial: InitialCondition,
    pub modulus: ModulusSettings,
    pub output: OutputSettings,
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.n, self.length).expect("validated at parse time")
    }
}

const KEYS: &[&str] = &[
    "grid.n",
    "grid.length",
    "dynamics.gamma",
    "dynamics.kappa",
    "dynamics.cfl",
    "dynamics.dt_max",
    "dynamics.dt_min",
    "dynamics.dealias",
    "dynamics.nonlinear",
    "dynamics.max_steps",
    "time.t_end",
    "time.sample_dt",
    "time.checkpoint_dt",
    "initial.preset",
    "initial.seed",
    "initial.amplitude",
    "initial.sigma",
    "modulus.enabled",
    "modulus.delta3",
    "modulus.r_max",
    "modulus.table_size",
    "modulus.offsets",
    "output.directory",
    "output.betas",
    "output.snapshot_dt",
    "output.log_sampling",
    "output.log_t_min",
    "output.log_per_decade",
];

const REQUIRED: &[&str] = &["grid.n", "grid.length", "dynamics.gamma", "time.t_end"];

struct Entries {
    values: HashMap<String, (String, usize)>,
    last_line: usize,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.values.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn parsed<T>(&self, key: &str, expected: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<(T, usize)>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => parse(v).map(|x| Some((x, line))).ok_or_else(|| ConfigError::Type {
                line,
                key: key.to_string(),
                expected: expected.to_string(),
                found: v.to_string(),
            }),
        }
    }

    fn float(&self, key: &str) -> Result<Option<(f64, usize)>, ConfigError> {
        self.parsed(key, "a number", parse_float)
    }

    fn uint(&self, key: &str) -> Result<Option<(u64, usize)>, ConfigError> {
        self.parsed(key, "a non-negative integer", |v| v.replace('_', "").parse::<u64>().ok())
    }

    fn boolean(&self, key: &str) -> Result<Option<(bool, usize)>, ConfigError> {
        self.parsed(key, "true or false", |v| match v {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    fn required_float(&self, key: &str) -> Result<(f64, usize), ConfigError> {
        self.float(key)?.ok_or_else(|| self.missing(key))
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::Missing {
            line: self.last_line + 1,
            key: key.to_string(),
        }
    }
}

fn parse_float(v: &str) -> Option<f64> {
    let v = v.trim();
    let with_pi = |prefix: &str| -> Option<f64> {
        if prefix.is_empty() {
            Some(1.0)
        } else {
            prefix.trim_end_matches('*').trim().parse::<f64>().ok()
        }
    };
    let x = if let Some(prefix) = v.strip_suffix("pi") {
        with_pi(prefix)? * PI
    } else {
        v.replace('_', "").parse::<f64>().ok()?
    };
    x.is_finite().then_some(x)
}

fn range(line: usize, key: &str, ok: bool, requirement: &str, value: impl std::fmt::Display) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Range {
            line,
            key: key.to_string(),
            requirement: requirement.to_string(),
            value: value.to_string(),
        })
    }
}

fn scan(text: &str) -> Result<Entries, ConfigError> {
    let mut values: HashMap<String, (String, usize)> = HashMap::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                message: format!("expected `section.key = value`, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        if let Some((_, first)) = values.get(key) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
                first: *first,
            });
        }
        values.insert(key.to_string(), (value.to_string(), line));
    }
    Ok(Entries { values, last_line })
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let e = scan(text)?;
    for key in REQUIRED {
        if e.raw(key).is_none() {
            return Err(e.missing(key));
        }
    }

    let (n, line) = e.uint("grid.n")?.ok_or_else(|| e.missing("grid.n"))?;
    range(line, "grid.n", n >= 8 && n % 2 == 0 && n <= 1 << 16, "an even integer in [8, 65536]", n)?;
    let n = n as usize;
    let (length, line) = e.required_float("grid.length")?;
    range(line, "grid.length", length > 0.0, "> 0", length)?;

    let defaults = SolverConfig::default();
    let (gamma, line) = e.required_float("dynamics.gamma")?;
    range(line, "dynamics.gamma", gamma > 0.0 && gamma <= 2.0, "in (0, 2]", gamma)?;
    let kappa = match e.float("dynamics.kappa")? {
        Some((k, line)) => {
            range(line, "dynamics.kappa", k >= 0.0, ">= 0", k)?;
            k
        }
        None => defaults.kappa,
    };
    let cfl = match e.float("dynamics.cfl")? {
        Some((c, line)) => {
            range(line, "dynamics.cfl", c > 0.0 && c <= 1.0, "in (0, 1]", c)?;
            c
        }
        None => defaults.cfl,
    };
    let dt_max = match e.float("dynamics.dt_max")? {
        Some((d, line)) => {
            range(line, "dynamics.dt_max", d > 0.0, "> 0", d)?;
            d
        }
        None => defaults.dt_max,
    };
    let dt_min = match e.float("dynamics.dt_min")? {
        Some((d, line)) => {
            range(line, "dynamics.dt_min", d > 0.0 && d <= dt_max, "in (0, dt_max]", d)?;
            d
        }
        None => defaults.dt_min.min(dt_max),
    };
    let dealias = e.boolean("dynamics.dealias")?.map_or(defaults.dealias, |v| v.0);
    let nonlinear = e.boolean("dynamics.nonlinear")?.map_or(defaults.nonlinear, |v| v.0);
    let max_steps = match e.uint("dynamics.max_steps")? {
        Some((m, line)) => {
            range(line, "dynamics.max_steps", m > 0, "> 0", m)?;
            m
        }
        None => defaults.max_steps,
    };

    let (t_end, line) = e.required_float("time.t_end")?;
    range(line, "time.t_end", t_end > 0.0, "> 0", t_end)?;
    let sample_dt = match e.float("time.sample_dt")? {
        Some((d, line)) => {
            range(line, "time.sample_dt", d > 0.0, "> 0", d)?;
            d
        }
        None => t_end / 100.0,
    };
    let positive_optional = |key: &str| -> Result<Option<f64>, ConfigError> {
        match e.float(key)? {
            Some((d, line)) => {
                range(line, key, d > 0.0, "> 0", d)?;
                Ok(Some(d))
            }
            None => Ok(None),
        }
    };
    let checkpoint_dt = positive_optional("time.checkpoint_dt")?;

    let preset = match e.raw("initial.preset") {
        Some((name, line)) => name.parse::<Preset>().map_err(|_| ConfigError::Range {
            line,
            key: "initial.preset".into(),
            requirement: format!(
                "one of {}",
                Preset::ALL.map(|p| p.name()).join(", ")
            ),
            value: name.to_string(),
        })?,
        None => Preset::Cmt,
    };
    let seed = e.uint("initial.seed")?.map_or(0, |v| v.0);
    let amplitude = e.float("initial.amplitude")?.map_or(1.0, |v| v.0);
    let sigma = positive_optional("initial.sigma")?;

    let modulus = ModulusSettings {
        enabled: e.boolean("modulus.enabled")?.is_some_and(|v| v.0),
        delta3: match e.float("modulus.delta3")? {
            Some((d, line)) => {
                range(line, "modulus.delta3", d > 0.0, "> 0", d)?;
                d
            }
            None => 0.1,
        },
        r_max: positive_optional("modulus.r_max")?,
        table_size: match e.uint("modulus.table_size")? {
            Some((t, line)) => {
                range(line, "modulus.table_size", (64..=1 << 20).contains(&t), "in [64, 1048576]", t)?;
                t as usize
            }
            None => 1024,
        },
        offsets: match e.raw("modulus.offsets") {
            None | Some(("default", _)) => OffsetSpec::Default,
            Some((v, line)) => {
                let k = v
                    .strip_prefix("dense:")
                    .and_then(|k| k.trim().parse::<i64>().ok())
                    .ok_or_else(|| ConfigError::Type {
                        line,
                        key: "modulus.offsets".into(),
                        expected: "`default` or `dense:K`".into(),
                        found: v.to_string(),
                    })?;
                range(line, "modulus.offsets", k >= 1 && k <= (n / 2) as i64, "dense:K with 1 <= K <= n/2", k)?;
                OffsetSpec::Dense(k)
            }
        },
    };

    let betas = match e.raw("output.betas") {
        None => vec![0.5, 1.0],
        Some(("none", _)) => Vec::new(),
        Some((v, line)) => {
            let list = v
                .split(',')
                .map(|b| parse_float(b).filter(|b| *b >= 0.0))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| ConfigError::Type {
                    line,
                    key: "output.betas".into(),
                    expected: "a comma-separated list of numbers >= 0, or `none`".into(),
                    found: v.to_string(),
                })?;
            let mut sorted = list.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            range(line, "output.betas", sorted.len() == list.len(), "distinct values", v)?;
            list
        }
    };
    let output = OutputSettings {
        directory: e.raw("output.directory").map_or_else(|| PathBuf::from("output"), |v| PathBuf::from(v.0)),
        betas,
        snapshot_dt: positive_optional("output.snapshot_dt")?,
        log_sampling: e.boolean("output.log_sampling")?.is_some_and(|v| v.0),
        log_t_min: match e.float("output.log_t_min")? {
            Some((t, line)) => {
                range(line, "output.log_t_min", t > 0.0 && t < t_end, "in (0, t_end)", t)?;
                t
            }
            None => (1e-3f64).min(t_end / 10.0),
        },
        log_per_decade: match e.uint("output.log_per_decade")? {
            Some((k, line)) => {
                range(line, "output.log_per_decade", (1..=1000).contains(&k), "in [1, 1000]", k)?;
                k as u32
            }
            None => 10,
        },
    };

    Ok(RunConfig {
        n,
        length,
        solver: SolverConfig {
            gamma,
            kappa,
            cfl,
            dt_max,
            dt_min,
            dealias,
            nonlinear,
            max_steps,
        },
        t_end,
        sample_dt,
        checkpoint_dt,
        initial: InitialCondition {
            preset,
            seed,
            amplitude,
            sigma,
        },
        modulus,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "grid.n = 32\ngrid.length = 2pi\ndynamics.gamma = 1\ntime.t_end = 1\n";

    #[test]
    fn minimal_file_uses_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.n, 32);
        assert!((c.length - 2.0 * PI).abs() < 1e-15);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.sample_dt, 0.01);
        assert_eq!(c.initial.preset, Preset::Cmt);
        assert!(!c.modulus.enabled);
        assert_eq!(c.output.betas, vec![0.5, 1.0]);
    }

    #[test]
    fn gamma_out_of_range() {
        let text = MINIMAL.replace("gamma = 1", "gamma = 2.5");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.line(), 3);
        assert!(err.to_string().contains("(0, 2]"), "{err}");
    }

    #[test]
    fn misspelled_key() {
        let text = format!("# comment\n{MINIMAL}grd.n = 4\n");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 6, .. }), "{err}");
    }

    #[test]
    fn type_mismatch_and_missing() {
        let err = parse_config(&MINIMAL.replace("t_end = 1", "t_end = soon")).unwrap_err();
        assert!(matches!(err, ConfigError::Type { line: 4, .. }), "{err}");
        let err = parse_config("grid.n = 32\ngrid.length = 1\ndynamics.gamma = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Missing { line: 4, .. }), "{err}");
        assert!(err.to_string().contains("time.t_end"));
    }

    #[test]
    fn duplicates_and_syntax() {
        let err = parse_config(&format!("{MINIMAL}grid.n = 64\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { line: 5, first: 1, .. }));
        let err = parse_config(&format!("{MINIMAL}just words\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 5, .. }));
    }

    #[test]
    fn full_file() {
        let text = "\
grid.n = 64
grid.length = 6.283185307179586
dynamics.gamma = 1.5   # subcritical
dynamics.kappa = 0.5
dynamics.dealias = false
time.t_end = 2
time.sample_dt = 0.1
time.checkpoint_dt = 0.5
initial.preset = gaussian_bump
initial.sigma = 0.7
modulus.enabled = true
modulus.offsets = dense:3
output.betas = 0.25, 0.75
output.log_sampling = true
output.log_per_decade = 5
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.solver.gamma, 1.5);
        assert!(!c.solver.dealias);
        assert_eq!(c.checkpoint_dt, Some(0.5));
        assert_eq!(c.initial.sigma, Some(0.7));
        assert_eq!(c.modulus.offsets, OffsetSpec::Dense(3));
        assert_eq!(c.output.betas, vec![0.25, 0.75]);
        assert_eq!(c.output.log_per_decade, 5);
    }

    #[test]
    fn unknown_preset_is_a_range_error() {
        let err = parse_config(&format!("{MINIMAL}initial.preset = vortex\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Range { line: 5, .. }));
        assert!(err.to_string().contains("random_h1"));
    }
}
