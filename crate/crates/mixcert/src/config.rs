//! key=value configuration files. Values fill in defaults; command-line
//! flags always win.

use crate::error::{Error, Result};

/// Overrides read from a config file. Every field mirrors a CLI flag.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub threshold: Option<f64>,
    pub t_max: Option<usize>,
    pub backend: Option<String>,
    pub mode: Option<String>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub tau: Option<String>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub m: Option<usize>,
}

impl ConfigOverrides {
    /// Parse `key=value` lines; `#` starts a comment. Unknown keys are
    /// errors so typos cannot silently change a run.
    pub fn parse(text: &str) -> Result<ConfigOverrides> {
        let mut cfg = ConfigOverrides::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("expected key=value, got {line:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| Error::Parse {
                line: idx + 1,
                msg: format!("invalid {what}: {value:?}"),
            };
            match key {
                "threshold" => cfg.threshold = Some(value.parse().map_err(|_| bad("threshold"))?),
                "t_max" => cfg.t_max = Some(value.parse().map_err(|_| bad("t_max"))?),
                "backend" => cfg.backend = Some(value.to_string()),
                "mode" => cfg.mode = Some(value.to_string()),
                "threads" => cfg.threads = Some(value.parse().map_err(|_| bad("threads"))?),
                "seed" => cfg.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "tau" => cfg.tau = Some(value.to_string()),
                "delta" => cfg.delta = Some(value.parse().map_err(|_| bad("delta"))?),
                "eps" => cfg.eps = Some(value.parse().map_err(|_| bad("eps"))?),
                "M" | "m" => cfg.m = Some(value.parse().map_err(|_| bad("M"))?),
                other => return Err(Error::UnknownConfigKey(other.to_string())),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &str) -> Result<ConfigOverrides> {
        ConfigOverrides::parse(&std::fs::read_to_string(path)?)
    }
}
