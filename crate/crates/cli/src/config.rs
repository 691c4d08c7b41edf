use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

/// `key = value` settings read from a config file; `#` starts a comment.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text =
            fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
            values.insert(key.trim().replace('_', "-"), value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// The flag value if given, else the parsed file value.
    pub fn pick<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| format!("config key '{key}': {e}"))
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let cfg = FileConfig::parse("# run\nsteps = 50\nsolver=bpgm  # trailing\n").unwrap();
        assert_eq!(cfg.pick::<usize>("steps", None).unwrap(), Some(50));
        assert_eq!(cfg.pick("steps", Some(7usize)).unwrap(), Some(7));
        assert_eq!(
            cfg.pick::<String>("solver", None).unwrap().as_deref(),
            Some("bpgm")
        );
        assert_eq!(cfg.pick::<u64>("seed", None).unwrap(), None);
    }

    #[test]
    fn malformed_lines_are_reported() {
        assert!(FileConfig::parse("steps 50")
            .unwrap_err()
            .contains("line 1"));
        let cfg = FileConfig::parse("n = many").unwrap();
        assert!(cfg.pick::<usize>("n", None).is_err());
    }
}
