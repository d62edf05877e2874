//! Flat `key = value` text used for config files and summary blocks.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model::InputPhases;

use super::{Overrides, ScenarioName};

/// Splits `key = value` lines; blank lines and `#` comments are skipped.
/// A `#` after a value starts a trailing comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: `{value}` is not a finite number")))
}

pub fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{key}: `{value}` is not a non-negative integer")))
}

/// Parses `θs,θp,φs,φp` in radians.
pub fn parse_phases(value: &str) -> Result<InputPhases> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "phases: expected four comma-separated values, got `{value}`"
        )));
    }
    let mut p = [0.0; 4];
    for (slot, part) in p.iter_mut().zip(&parts) {
        *slot = parse_f64("phases", part)?;
    }
    Ok(InputPhases::from_array(p))
}

/// Contents of a config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub scenario: Option<ScenarioName>,
    pub overrides: Overrides,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Accepted keys mirror the long CLI flags, with `-` or `_` separators.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::default();
    for (key, value) in parse_key_values(text)? {
        let k = key.replace('_', "-");
        let o = &mut cfg.overrides;
        match k.as_str() {
            "scenario" => cfg.scenario = Some(value.parse()?),
            "kappa" => o.kappa = Some(parse_f64(&key, &value)?),
            "ratio" => o.ratio = Some(parse_f64(&key, &value)?),
            "coupling" => o.coupling = Some(parse_f64(&key, &value)?),
            "nonlinearity" => o.nonlinearity = Some(parse_f64(&key, &value)?),
            "zeta-max" => o.zeta_max = Some(parse_f64(&key, &value)?),
            "steps-per-unit" => o.steps_per_unit = Some(parse_usize(&key, &value)?),
            "phases" => o.phases = Some(parse_phases(&value)?),
            "out" => cfg.out = Some(PathBuf::from(value)),
            "jobs" => cfg.jobs = Some(parse_usize(&key, &value)?),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_with_comments() {
        let kv = parse_key_values("# header\n\nkappa = 1.5 # trailing\n zeta_max=3\n").unwrap();
        assert_eq!(
            kv,
            vec![
                ("kappa".to_string(), "1.5".to_string()),
                ("zeta_max".to_string(), "3".to_string())
            ]
        );
        assert!(parse_key_values("kappa 1.5").is_err());
        assert!(parse_key_values(" = 2").is_err());
    }

    #[test]
    fn config_fields() {
        let cfg = parse_config(
            "scenario = fig5\nkappa = 2.5\nsteps-per-unit = 1024\nphases = 0, 0.5, 0, 0.5\njobs = 2\nout = here\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, Some(ScenarioName::Fig5));
        assert_eq!(cfg.overrides.kappa, Some(2.5));
        assert_eq!(cfg.overrides.steps_per_unit, Some(1024));
        assert_eq!(cfg.overrides.phases.unwrap().theta_p, 0.5);
        assert_eq!(cfg.jobs, Some(2));
        assert_eq!(cfg.out, Some(PathBuf::from("here")));
    }

    #[test]
    fn config_rejections() {
        assert!(parse_config("colour = blue").is_err());
        assert!(parse_config("kappa = fast").is_err());
        assert!(parse_config("kappa = inf").is_err());
        assert!(parse_config("phases = 1,2,3").is_err());
        assert!(parse_config("scenario = fig9").is_err());
        assert!(parse_config("jobs = -1").is_err());
    }
}
