//! `key = value` run configuration, merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use mapode::stability::{parse_rational, rational_to_f64};
use num_rational::BigRational;

/// Every key a config file may set. Keys mirror the long flag names with `_`
/// in place of `-`.
pub const KEYS: &[&str] = &[
    "abs_tol",
    "alpha",
    "at",
    "chaos_tol",
    "continuation",
    "divergence_bound",
    "format",
    "fp_tol",
    "h",
    "hi",
    "lambda",
    "lambda_range",
    "lo",
    "map",
    "max_period",
    "method",
    "min_maxima",
    "nu",
    "nu_range",
    "order",
    "p",
    "param",
    "peak_tol",
    "rel_tol",
    "renorm_interval",
    "sample_stride",
    "seed",
    "steps",
    "system",
    "t",
    "t_end",
    "t_measure",
    "t_transient",
    "threads",
    "x0",
    "xi0",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Values from a config file, keyed by name, with the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, (String, usize)>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {line_no}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError(format!("line {line_no}: expected `key = value`")));
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError(format!(
                    "line {line_no}: unknown key `{key}`; valid keys: {}",
                    KEYS.join(", ")
                )));
            }
            values.insert(key.to_string(), (value.to_string(), line_no));
        }
        Ok(RunConfig { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.values.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn context(&self, key: &str) -> String {
        match self.values.get(key) {
            Some((_, l)) => format!("config line {l} (`{key}`)"),
            None => format!("`{key}`"),
        }
    }

    /// Flag value if given, else the config value, else `None`.
    pub fn string(&self, flag: &Option<String>, key: &str) -> Option<String> {
        flag.clone().or_else(|| self.raw(key).map(|(v, _)| v.to_string()))
    }

    pub fn number(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.number_opt(flag, key)?.unwrap_or(default))
    }

    pub fn number_opt(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>, ConfigError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|(v, _)| parse_number(v).map_err(|e| ConfigError(format!("{}: {e}", self.context(key)))))
            .transpose()
    }

    pub fn integer(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize, ConfigError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            None => Ok(default),
            Some((v, _)) => v
                .parse()
                .map_err(|_| ConfigError(format!("{}: `{v}` is not a non-negative integer", self.context(key)))),
        }
    }

    pub fn rational(&self, flag: &Option<String>, key: &str) -> Result<Option<BigRational>, ConfigError> {
        self.string(flag, key)
            .map(|v| parse_rational(&v).map_err(|e| ConfigError(format!("{}: {e}", self.context(key)))))
            .transpose()
    }

    pub fn list(&self, flag: &Option<Vec<f64>>, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        if flag.is_some() {
            return Ok(flag.clone());
        }
        self.raw(key)
            .map(|(v, _)| parse_list(v).map_err(|e| ConfigError(format!("{}: {e}", self.context(key)))))
            .transpose()
    }
}

/// Decimal real or exact rational `a/b`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let r = parse_rational(s.trim()).map_err(|e| e.to_string())?;
    Ok(rational_to_f64(&r))
}

/// Comma-separated numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_number).collect()
}

/// `lo,hi,steps`.
pub fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("range `{s}` must be lo,hi,steps"));
    }
    let steps = parts[2]
        .parse()
        .map_err(|_| format!("bad step count `{}`", parts[2]))?;
    Ok((parse_number(parts[0])?, parse_number(parts[1])?, steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.number(None, "divergence_bound", 1e8).unwrap(), 1e8);
        let c = RunConfig::parse("# only a comment\n\n   \n").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn values_and_precedence() {
        let c = RunConfig::parse("divergence_bound = 1e6  # tighter\nalpha = 5/3\nx0 = 0.1, 0, 0\n").unwrap();
        assert_eq!(c.number(None, "divergence_bound", 1e8).unwrap(), 1e6);
        assert_eq!(c.number(Some(2.0), "divergence_bound", 1e8).unwrap(), 2.0);
        assert_eq!(c.rational(&None, "alpha").unwrap().unwrap().to_string(), "5/3");
        assert_eq!(c.list(&None, "x0").unwrap().unwrap(), vec![0.1, 0.0, 0.0]);
    }

    #[test]
    fn errors_name_the_line() {
        let e = RunConfig::parse("h = 0.01\nthis is not a pair\n").unwrap_err();
        assert!(e.0.starts_with("line 2"), "{e}");
        let e = RunConfig::parse("h = 0.01\nstep_size = 3\n").unwrap_err();
        assert!(e.0.contains("line 2") && e.0.contains("valid keys"), "{e}");
        let c = RunConfig::parse("\nh = fast\n").unwrap();
        let e = c.number(None, "h", 0.01).unwrap_err();
        assert!(e.0.contains("line 2"), "{e}");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.3, 1.2, 200").unwrap(), (0.3, 1.2, 200));
        assert!(parse_range("0.3,1.2").is_err());
        assert_eq!(parse_number("-1/3").unwrap(), -1.0 / 3.0);
    }
}
