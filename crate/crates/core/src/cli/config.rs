//! `key = value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Keys a configuration file may set. Each mirrors the flag of the same name.
pub const KEYS: &[&str] = &[
    "sites", "nbar", "nmax", "u", "tmax", "dt", "particles", "scenario", "format", "out",
];

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    /// One `key = value` per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected `key = value`", n + 1))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(format!("config line {}: unknown key `{key}`", n + 1));
            }
            if values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(format!("config line {}: `{key}` set twice", n + 1));
            }
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("config key `{key}`: {e}")))
            .transpose()
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse::<T>().map_err(|e| format!("config key `{key}`: {e}")))
                    .collect()
            })
            .transpose()
    }
}

/// Flag value, else config value, else the default.
pub fn resolve<T: FromStr>(flag: Option<T>, config: &Config, key: &str, default: T) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(v),
        None => Ok(config.get(key)?.unwrap_or(default)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_lists() {
        let c = Config::parse("# run\nsites = 11\n\nu = 6, 10 ,40  # sweep\n").unwrap();
        assert_eq!(c.get::<usize>("sites").unwrap(), Some(11));
        assert_eq!(c.get_list::<f64>("u").unwrap(), Some(vec![6.0, 10.0, 40.0]));
        assert_eq!(c.get::<f64>("dt").unwrap(), None);
    }

    #[test]
    fn flags_win_over_config() {
        let c = Config::parse("sites = 11").unwrap();
        assert_eq!(resolve(Some(5), &c, "sites", 9).unwrap(), 5);
        assert_eq!(resolve(None, &c, "sites", 9).unwrap(), 11);
        assert_eq!(resolve(None, &Config::default(), "sites", 9).unwrap(), 9);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("sites 11").is_err());
        assert!(Config::parse("sites = 1\nsites = 2").is_err());
        assert!(Config::parse("sites = many").unwrap().get::<usize>("sites").is_err());
    }
}
