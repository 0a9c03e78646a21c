//! The effective run configuration: defaults, overlaid by a JSON config file,
//! overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use mather_core::modulus::parse_modulus;
use mather_core::{Modulus, Tolerances};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub k: usize,
    /// `holder:S`, `omegaz:SIGMA,TAU` or `file:<path>` to a modulus JSON.
    pub alpha: String,
    #[serde(rename = "A")]
    pub a: u32,
    /// Initial node count for maps the CLI samples itself, and row count of
    /// sampled tables.
    pub grid_n: usize,
    pub seed: u64,
    /// Output file or directory; see [`RunConfig::output_path`].
    pub out: PathBuf,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: 2,
            alpha: "holder:0.5".into(),
            a: 1,
            grid_n: 65,
            seed: 7,
            out: PathBuf::from("out"),
            tolerances: Tolerances::default(),
        }
    }
}

/// Flags that override the config file when present.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub k: Option<usize>,
    pub alpha: Option<String>,
    pub a: Option<u32>,
    pub grid_n: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// `(field, value)` pairs from `--tol-<name> <value>`.
    pub tolerances: Vec<(String, String)>,
}

impl RunConfig {
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(k) = flags.k {
            cfg.k = k;
        }
        if let Some(alpha) = &flags.alpha {
            cfg.alpha = alpha.clone();
        }
        if let Some(a) = flags.a {
            cfg.a = a;
        }
        if let Some(n) = flags.grid_n {
            cfg.grid_n = n;
        }
        if let Some(seed) = flags.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &flags.out {
            cfg.out = out.clone();
        }
        cfg.tolerances = apply_tolerances(&cfg.tolerances, &flags.tolerances)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > mather_core::jetcalc::MAX_ORDER {
            bail!("--k must lie in 1..={}", mather_core::jetcalc::MAX_ORDER);
        }
        if self.a == 0 {
            bail!("--A must be a positive integer");
        }
        if self.grid_n < 2 {
            bail!("--grid-n must be at least 2");
        }
        self.tolerances.validate()?;
        self.modulus()?;
        Ok(())
    }

    pub fn modulus(&self) -> Result<Modulus> {
        match self.alpha.strip_prefix("file:") {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading modulus file {path}"))?;
                serde_json::from_str(&text).with_context(|| format!("parsing modulus file {path}"))
            }
            None => Ok(parse_modulus(&self.alpha)?),
        }
    }

    /// Where a command that writes one file puts it: `out` itself when it
    /// names a `.json` or `.csv` file, otherwise `out/default_name`.
    pub fn output_path(&self, default_name: &str) -> PathBuf {
        match self.out.extension().and_then(|e| e.to_str()) {
            Some("json") | Some("csv") => self.out.clone(),
            _ => self.out.join(default_name),
        }
    }

    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("run config serializes")
    }
}

/// Every tolerance field name, for help text and error messages.
pub fn tolerance_names() -> Vec<String> {
    match serde_json::to_value(Tolerances::default()) {
        Ok(Value::Object(map)) => map.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

fn apply_tolerances(base: &Tolerances, pairs: &[(String, String)]) -> Result<Tolerances> {
    let mut value = serde_json::to_value(base)?;
    let map = value.as_object_mut().expect("tolerances serialize to an object");
    for (name, raw) in pairs {
        let snake = name.replace('-', "_");
        let field = [snake.clone(), format!("tol_{snake}")]
            .into_iter()
            .find(|f| map.contains_key(f))
            .ok_or_else(|| anyhow!("unknown tolerance --tol-{name}; known: {}", tolerance_names().join(", ")))?;
        let parsed = if map[&field].is_u64() {
            Value::from(raw.parse::<u64>().with_context(|| format!("--tol-{name} takes a non-negative integer"))?)
        } else {
            Value::from(raw.parse::<f64>().with_context(|| format!("--tol-{name} takes a number"))?)
        };
        map.insert(field, parsed);
    }
    Ok(serde_json::from_value(value)?)
}

/// Removes every `--tol-<name> <value>` and `--tol-<name>=<value>` from
/// `args`, returning the remaining arguments and the pairs.
pub fn split_tolerance_flags(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>)> {
    let mut rest = Vec::with_capacity(args.len());
    let mut pairs = Vec::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let Some(body) = arg.strip_prefix("--tol-") else {
            rest.push(arg);
            continue;
        };
        match body.split_once('=') {
            Some((name, value)) => pairs.push((name.to_string(), value.to_string())),
            None => {
                let value = iter.next().ok_or_else(|| anyhow!("--tol-{body} needs a value"))?;
                pairs.push((body.to_string(), value));
            }
        }
    }
    Ok((rest, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_flags_are_split_and_applied() {
        let args = ["mather", "--tol-b=1e-6", "verify", "--tol-max-nodes", "1024", "--seed", "3"]
            .map(String::from)
            .to_vec();
        let (rest, pairs) = split_tolerance_flags(args).unwrap();
        assert_eq!(rest, ["mather", "verify", "--seed", "3"]);
        let tol = apply_tolerances(&Tolerances::default(), &pairs).unwrap();
        assert_eq!(tol.tol_b, 1e-6);
        assert_eq!(tol.max_nodes, 1024);
    }

    #[test]
    fn bad_tolerances_are_rejected() {
        let t = Tolerances::default();
        assert!(apply_tolerances(&t, &[("nonsense".into(), "1".into())]).is_err());
        assert!(apply_tolerances(&t, &[("max-nodes".into(), "1.5".into())]).is_err());
        assert!(apply_tolerances(&t, &[("certificate".into(), "x".into())]).is_err());
    }

    #[test]
    fn output_path_treats_extensions_as_files() {
        let mut cfg = RunConfig { out: PathBuf::from("res"), ..RunConfig::default() };
        assert_eq!(cfg.output_path("a.json"), PathBuf::from("res/a.json"));
        cfg.out = PathBuf::from("res/chain.json");
        assert_eq!(cfg.output_path("a.json"), PathBuf::from("res/chain.json"));
    }
}
