//! Parameter resolution: explicit command-line flags win over `--config`
//! file entries, which win over built-in defaults.
//!
//! A config file holds one `key=value` pair per line, keys matching the long
//! option names of the subcommand; `#` lines are comments.

use std::collections::HashMap;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::ArgMatches;

use crate::error::CliError;

pub struct Params<'a> {
    matches: &'a ArgMatches,
    file: HashMap<String, String>,
}

impl<'a> Params<'a> {
    /// Build the resolver, loading the `--config` file when given.
    pub fn new(matches: &'a ArgMatches) -> Result<Self, CliError> {
        let mut file = HashMap::new();
        if let Some(path) = matches.get_one::<String>("config") {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                match line.split_once('=') {
                    Some((k, v)) => {
                        file.insert(k.trim().to_string(), v.trim().to_string());
                    }
                    None => {
                        return Err(CliError::Parse {
                            path: path.clone(),
                            line: lineno + 1,
                            message: format!("expected key=value, got '{line}'"),
                        })
                    }
                }
            }
        }
        Ok(Self { matches, file })
    }

    fn given_on_cli(&self, key: &str) -> bool {
        self.matches.value_source(key) == Some(ValueSource::CommandLine)
    }

    fn raw(&self, key: &str) -> Option<String> {
        if self.given_on_cli(key) {
            return self.matches.get_one::<String>(key).cloned();
        }
        if let Some(v) = self.file.get(key) {
            return Some(v.clone());
        }
        self.matches.get_one::<String>(key).cloned()
    }

    fn parse<T: FromStr>(&self, key: &str, value: &str) -> Result<T, CliError> {
        value
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid value '{value}' for --{key}")))
    }

    pub fn string(&self, key: &str) -> Result<String, CliError> {
        self.raw(key)
            .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
    }

    pub fn opt_string(&self, key: &str) -> Option<String> {
        self.raw(key)
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v = self.string(key)?;
        self.parse(key, &v)
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        let v = self.string(key)?;
        self.parse(key, &v)
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        let v = self.string(key)?;
        self.parse(key, &v)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw(key) {
            Some(v) => Ok(Some(self.parse(key, &v)?)),
            None => Ok(None),
        }
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.raw(key) {
            Some(v) => Ok(Some(self.parse(key, &v)?)),
            None => Ok(None),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        if self.matches.value_source(key) == Some(ValueSource::CommandLine) {
            return self.matches.get_flag(key);
        }
        match self.file.get(key).map(|s| s.as_str()) {
            Some("true") | Some("1") => true,
            Some(_) => false,
            None => self.matches.get_flag(key),
        }
    }

    /// A grid: either `start:end:count` (inclusive linspace) or a comma list.
    pub fn f64_grid(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.string(key)?;
        parse_f64_grid(&v).map_err(|m| CliError::Usage(format!("--{key}: {m}")))
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, CliError> {
        let v = self.string(key)?;
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("--{key}: invalid entry '{s}'")))
            })
            .collect()
    }
}

pub fn parse_f64_grid(spec: &str) -> Result<Vec<f64>, String> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:end:count, got '{spec}'"));
        }
        let start: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| format!("invalid start '{}'", parts[0]))?;
        let end: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| format!("invalid end '{}'", parts[1]))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("invalid count '{}'", parts[2]))?;
        if count == 0 {
            return Err("grid count must be positive".into());
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (end - start) / (count - 1) as f64;
        Ok((0..count).map(|k| start + step * k as f64).collect())
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| format!("invalid entry '{s}'")))
            .collect()
    }
}
