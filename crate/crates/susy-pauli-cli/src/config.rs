//! Flat `section.key = value` configuration with strict unknown-key checking.
//!
//! The format is deliberately minimal: one assignment per line, `#` comments,
//! no section headers. Every key the schema does not recognize is an error,
//! so a typo in a tolerance name cannot silently fall back to a default.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use susy_pauli::fields::{FieldProfile, PhysicalConfig, TabulatedProfile};
use susy_pauli::solutions::Spin;

#[derive(Debug, Default)]
pub struct RawConfig {
    values: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", idx + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                bail!("config line {}: empty key or value", idx + 1);
            }
            if values.insert(key.clone(), (value, idx + 1)).is_some() {
                bail!("config line {}: duplicate key `{key}`", idx + 1);
            }
        }
        Ok(Self { values })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key).map(|(v, _)| v)
    }

    fn finish(self) -> Result<()> {
        if let Some((key, (_, line))) = self.values.into_iter().next() {
            bail!("unknown config key `{key}` (line {line})");
        }
        Ok(())
    }
}

/// Grid selection: explicit `(N, L)` or delegated to the solutions module.
#[derive(Clone, Copy, Debug)]
pub enum GridChoice {
    Auto,
    Manual { n: usize, l: f64 },
}

#[derive(Clone, Debug)]
pub struct TimeSection {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub enum OdeInit {
    Canonical,
    Explicit { f0: Complex64, f0_dot: Complex64 },
}

#[derive(Clone, Debug)]
pub struct OdeSection {
    pub tol: f64,
    pub init: OdeInit,
    pub normalize: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct StateSection {
    pub n: u32,
    pub m: i32,
    pub s: Spin,
    pub t: f64,
}

/// Fully-resolved run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub physical: PhysicalConfig,
    pub profile: FieldProfile,
    pub grid: GridChoice,
    pub time: TimeSection,
    pub ode: OdeSection,
    pub state: StateSection,
    pub out_dir: PathBuf,
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .with_context(|| format!("key `{key}`: `{value}` is not a number"))
}

fn parse_complex(key: &str, value: &str) -> Result<Complex64> {
    let (re, im) = value
        .split_once(',')
        .ok_or_else(|| anyhow!("key `{key}`: expected `re,im`, got `{value}`"))?;
    Ok(Complex64::new(
        parse_f64(key, re.trim())?,
        parse_f64(key, im.trim())?,
    ))
}

fn parse_spin(value: &str) -> Result<Spin> {
    match value {
        "+1/2" | "0.5" | "+0.5" | "up" => Ok(Spin::Up),
        "-1/2" | "-0.5" | "down" => Ok(Spin::Down),
        other => bail!("state.s must be +1/2 or -1/2, got `{other}`"),
    }
}

impl RunConfig {
    /// Loads and validates a config file; `None` gives the built-in defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?,
            None => String::new(),
        };
        let base_dir = path.and_then(|p| p.parent()).unwrap_or(Path::new("."));
        Self::from_text(&text, base_dir)
    }

    pub fn from_text(text: &str, base_dir: &Path) -> Result<Self> {
        let mut raw = RawConfig::parse(text)?;

        let e = match raw.take("physical.e") {
            Some(v) => parse_f64("physical.e", &v)?,
            None => 1.0,
        };
        let physical = PhysicalConfig::new(e)?;

        let kind = raw.take("profile.kind").unwrap_or_else(|| "constant".into());
        let take_f64 = |raw: &mut RawConfig, key: &str, default: f64| -> Result<f64> {
            match raw.take(key) {
                Some(v) => parse_f64(key, &v),
                None => Ok(default),
            }
        };
        let profile = match kind.as_str() {
            "constant" => FieldProfile::Constant {
                b0: take_f64(&mut raw, "profile.b0", 1.0)?,
                d0: take_f64(&mut raw, "profile.d0", 0.0)?,
            },
            "linear_d" => FieldProfile::LinearD {
                b0: take_f64(&mut raw, "profile.b0", 1.0)?,
                d_rate: take_f64(&mut raw, "profile.d_rate", 1.0)?,
            },
            "sinusoidal" => FieldProfile::Sinusoidal {
                b_mean: take_f64(&mut raw, "profile.b_mean", 1.0)?,
                b_amp: take_f64(&mut raw, "profile.b_amp", 0.5)?,
                omega: take_f64(&mut raw, "profile.omega", 1.0)?,
                d_mean: take_f64(&mut raw, "profile.d_mean", 0.0)?,
                d_amp: take_f64(&mut raw, "profile.d_amp", 0.0)?,
            },
            "tabulated" => {
                let rel = raw
                    .take("profile.table")
                    .ok_or_else(|| anyhow!("profile.kind = tabulated needs profile.table"))?;
                let path = base_dir.join(rel);
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading table {}", path.display()))?;
                FieldProfile::Tabulated(TabulatedProfile::from_csv(&text)?)
            }
            other => bail!("unknown profile.kind `{other}`"),
        };

        let grid = match raw.take("grid.auto").as_deref() {
            Some("true") | None if raw.values.keys().all(|k| !k.starts_with("grid.")) => {
                GridChoice::Auto
            }
            Some("true") => bail!("grid.auto = true conflicts with explicit grid.n / grid.l"),
            _ => {
                let n = raw
                    .take("grid.n")
                    .ok_or_else(|| anyhow!("missing section `grid` (grid.n / grid.l or grid.auto)"))?
                    .parse::<usize>()
                    .context("grid.n must be an integer")?;
                let l = parse_f64(
                    "grid.l",
                    &raw.take("grid.l")
                        .ok_or_else(|| anyhow!("missing key `grid.l`"))?,
                )?;
                GridChoice::Manual { n, l }
            }
        };

        let time = TimeSection {
            t0: take_f64(&mut raw, "time.t0", 0.0)?,
            t1: take_f64(&mut raw, "time.t1", 2.0)?,
            dt: take_f64(&mut raw, "time.dt", 1e-3)?,
            samples: match raw.take("time.samples") {
                Some(v) => v.parse().context("time.samples must be an integer")?,
                None => 200,
            },
        };
        let time_ok = time.t0.is_finite() && time.t1 > time.t0 && time.dt > 0.0;
        if !time_ok {
            bail!("time section needs t1 > t0 and dt > 0");
        }

        let tol = take_f64(&mut raw, "ode.tol", 1e-12)?;
        let tol_ok = tol.is_finite() && tol > 0.0;
        if !tol_ok {
            bail!("ode.tol must be positive");
        }
        let init = match (raw.take("ode.f0"), raw.take("ode.f0_dot")) {
            (None, None) => OdeInit::Canonical,
            (Some(a), Some(b)) if a == "canonical" && b == "canonical" => OdeInit::Canonical,
            (Some(a), Some(b)) => OdeInit::Explicit {
                f0: parse_complex("ode.f0", &a)?,
                f0_dot: parse_complex("ode.f0_dot", &b)?,
            },
            _ => bail!("ode.f0 and ode.f0_dot must be given together"),
        };
        let normalize = match raw.take("ode.normalize").as_deref() {
            None | Some("true") => true,
            Some("false") => false,
            Some(other) => bail!("ode.normalize must be true or false, got `{other}`"),
        };
        let ode = OdeSection { tol, init, normalize };

        let state = StateSection {
            n: match raw.take("state.n") {
                Some(v) => v.parse().context("state.n must be a nonnegative integer")?,
                None => 1,
            },
            m: match raw.take("state.m") {
                Some(v) => v.parse().context("state.m must be an integer")?,
                None => 0,
            },
            s: match raw.take("state.s") {
                Some(v) => parse_spin(&v)?,
                None => Spin::Down,
            },
            t: take_f64(&mut raw, "state.t", time.t0)?,
        };

        let out_dir = PathBuf::from(raw.take("output.dir").unwrap_or_else(|| "out".into()));

        raw.finish()?;
        Ok(Self {
            physical,
            profile,
            grid,
            time,
            ode,
            state,
            out_dir,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let cfg = RunConfig::from_text("", Path::new(".")).unwrap();
        assert_eq!(cfg.physical.charge(), 1.0);
        assert!(matches!(cfg.profile, FieldProfile::Constant { b0, d0 } if b0 == 1.0 && d0 == 0.0));
        assert!(matches!(cfg.grid, GridChoice::Auto));
        assert_eq!(cfg.time.dt, 1e-3);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::from_text("ode.tolerance = 1e-9\n", Path::new("."))
            .unwrap_err()
            .to_string();
        assert!(err.contains("ode.tolerance"), "{err}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = RawConfig::parse("time.t0 = 0\ntime.t0 = 1\n").unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn sinusoidal_profile_and_manual_grid() {
        let text = "\
profile.kind = sinusoidal
profile.b_mean = 1.0
profile.b_amp = 0.5
profile.omega = 1.0
grid.n = 64
grid.l = 20.0
state.s = +1/2
";
        let cfg = RunConfig::from_text(text, Path::new(".")).unwrap();
        assert!(matches!(cfg.profile, FieldProfile::Sinusoidal { .. }));
        assert!(matches!(cfg.grid, GridChoice::Manual { n: 64, .. }));
        assert_eq!(cfg.state.s, Spin::Up);
    }

    #[test]
    fn mixed_auto_and_manual_grid_conflicts() {
        let err = RunConfig::from_text("grid.auto = true\ngrid.n = 64\n", Path::new("."))
            .unwrap_err()
            .to_string();
        assert!(err.contains("grid.auto"), "{err}");
    }

    #[test]
    fn spin_forms() {
        for (text, spin) in [("+1/2", Spin::Up), ("down", Spin::Down), ("-0.5", Spin::Down)] {
            assert_eq!(parse_spin(text).unwrap(), spin);
        }
        assert!(parse_spin("3/2").is_err());
    }
}
