//! Run configuration: a JSON tree (file + dotted-path flag overrides) with
//! typed accessors, plus the shared physical defaults table embedded in
//! every report.

use serde_json::{json, Map, Value};
use std::fmt;

/// Configuration or usage problem; maps to exit code 2.
#[derive(Debug)]
pub struct CliErr(pub String);

impl fmt::Display for CliErr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<fracq_core::FracqError> for CliErr {
    fn from(e: fracq_core::FracqError) -> Self {
        CliErr(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliErr>;

fn err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliErr(msg.into()))
}

/// Version tag of the defaults below; bump when a default changes.
pub const DEFAULTS_VERSION: u64 = 1;

/// Shared physical defaults, embedded verbatim in every report so the
/// numbers behind a run remain traceable. `box` is a full side length.
pub fn defaults_table() -> Value {
    json!({
        "version": DEFAULTS_VERSION,
        "box": 40.0,
        "grid": 64,
        "tol": 1e-6,
    })
}

pub struct Cfg {
    root: Value,
}

impl Cfg {
    /// Build the configuration for one command: optional JSON file, then
    /// `--set key=value` overrides applied in order. A `command` field in
    /// the file must agree with the invoked subcommand.
    pub fn load(
        command: &str,
        config_path: Option<&String>,
        sets: impl Iterator<Item = impl AsRef<str>>,
    ) -> CliResult<Self> {
        let mut root = match config_path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliErr(format!("cannot read config {path}: {e}")))?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| CliErr(format!("config {path} is not valid JSON: {e}")))?;
                if !v.is_object() {
                    return err(format!("config {path} must be a JSON object"));
                }
                v
            }
            None => json!({}),
        };
        if let Some(named) = root.get("command").and_then(Value::as_str) {
            if named != command {
                return err(format!(
                    "config names command {named:?} but {command:?} was invoked"
                ));
            }
        }
        for set in sets {
            apply_set(&mut root, set.as_ref())?;
        }
        Ok(Self { root })
    }

    fn get(&self, dotted: &str) -> Option<&Value> {
        let mut cur = &self.root;
        for part in dotted.split('.') {
            cur = cur.as_object()?.get(part)?;
        }
        Some(cur)
    }

    /// Key present and not null.
    pub fn has(&self, dotted: &str) -> bool {
        self.get(dotted).is_some_and(|v| !v.is_null())
    }

    pub fn f64_or(&self, dotted: &str, default: f64) -> CliResult<f64> {
        match self.get(dotted) {
            None | Some(Value::Null) => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| CliErr(format!("{dotted} must be a number, got {v}"))),
        }
    }

    pub fn usize_or(&self, dotted: &str, default: usize) -> CliResult<usize> {
        match self.get(dotted) {
            None | Some(Value::Null) => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| CliErr(format!("{dotted} must be a nonnegative integer, got {v}"))),
        }
    }

    pub fn bool_or(&self, dotted: &str, default: bool) -> CliResult<bool> {
        match self.get(dotted) {
            None | Some(Value::Null) => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| CliErr(format!("{dotted} must be a boolean, got {v}"))),
        }
    }

    pub fn string_or(&self, dotted: &str, default: &str) -> CliResult<String> {
        match self.get(dotted) {
            None | Some(Value::Null) => Ok(default.to_string()),
            Some(v) => v
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| CliErr(format!("{dotted} must be a string, got {v}"))),
        }
    }

    pub fn u32_list_or(&self, dotted: &str, default: &[u32]) -> CliResult<Vec<u32>> {
        match self.get(dotted) {
            None | Some(Value::Null) => Ok(default.to_vec()),
            Some(v) => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| CliErr(format!("{dotted} must be an array, got {v}")))?;
                arr.iter()
                    .map(|e| {
                        e.as_u64()
                            .and_then(|n| u32::try_from(n).ok())
                            .ok_or_else(|| CliErr(format!("{dotted} entries must be integers, got {e}")))
                    })
                    .collect()
            }
        }
    }

    pub fn f64_list_or(&self, dotted: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.get(dotted) {
            None | Some(Value::Null) => Ok(default.to_vec()),
            Some(v) => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| CliErr(format!("{dotted} must be an array, got {v}")))?;
                arr.iter()
                    .map(|e| {
                        e.as_f64()
                            .ok_or_else(|| CliErr(format!("{dotted} entries must be numbers, got {e}")))
                    })
                    .collect()
            }
        }
    }

    pub fn bool_list(&self, dotted: &str) -> CliResult<Option<Vec<bool>>> {
        match self.get(dotted) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| CliErr(format!("{dotted} must be an array, got {v}")))?;
                arr.iter()
                    .map(|e| {
                        e.as_bool()
                            .ok_or_else(|| CliErr(format!("{dotted} entries must be booleans, got {e}")))
                    })
                    .collect::<CliResult<Vec<bool>>>()
                    .map(Some)
            }
        }
    }

    /// A list of 3-vectors, e.g. candidate points.
    pub fn points_or(&self, dotted: &str, default: &[[f64; 3]]) -> CliResult<Vec<[f64; 3]>> {
        match self.get(dotted) {
            None | Some(Value::Null) => Ok(default.to_vec()),
            Some(v) => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| CliErr(format!("{dotted} must be an array of points, got {v}")))?;
                arr.iter()
                    .map(|p| {
                        let xs: Vec<f64> = p
                            .as_array()
                            .map(|a| a.iter().filter_map(Value::as_f64).collect())
                            .unwrap_or_default();
                        if xs.len() == 3 {
                            Ok([xs[0], xs[1], xs[2]])
                        } else {
                            err(format!("{dotted} entries must be 3-vectors, got {p}"))
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn point4_or(&self, dotted: &str, default: [f64; 4]) -> CliResult<[f64; 4]> {
        match self.get(dotted) {
            None | Some(Value::Null) => Ok(default),
            Some(v) => {
                let xs: Vec<f64> = v
                    .as_array()
                    .map(|a| a.iter().filter_map(Value::as_f64).collect())
                    .unwrap_or_default();
                if xs.len() == 4 {
                    Ok([xs[0], xs[1], xs[2], xs[3]])
                } else {
                    err(format!("{dotted} must be a 4-vector, got {v}"))
                }
            }
        }
    }

    pub fn raw(&self, dotted: &str) -> Option<Value> {
        self.get(dotted).cloned()
    }

    pub fn seed(&self) -> CliResult<u64> {
        match self.get("seed") {
            None | Some(Value::Null) => Ok(7),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| CliErr(format!("seed must be a nonnegative integer, got {v}"))),
        }
    }

    pub fn out_dir(&self) -> CliResult<std::path::PathBuf> {
        Ok(std::path::PathBuf::from(self.string_or("out_dir", ".")?))
    }
}

/// `key.path=value`: parse the value as JSON when possible (numbers, bools,
/// arrays, null), as a bare string otherwise, and store it at the dotted
/// path, creating intermediate objects.
fn apply_set(root: &mut Value, set: &str) -> CliResult<()> {
    let Some((path, raw)) = set.split_once('=') else {
        return err(format!("--set needs key=value, got {set:?}"));
    };
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return err(format!("--set key must be a dotted path, got {path:?}"));
    }
    let value: Value =
        serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));

    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliErr(format!("--set {path}: {part} is not an object")))?;
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    let leaf = parts[parts.len() - 1];
    let obj = cur
        .as_object_mut()
        .ok_or_else(|| CliErr(format!("--set {path}: parent of {leaf} is not an object")))?;
    obj.insert(leaf.to_string(), value);
    Ok(())
}

/// FFT-backed commands require power-of-two grids.
pub fn require_power_of_two(resolution: usize, what: &str) -> CliResult<()> {
    if resolution == 0 || !resolution.is_power_of_two() {
        return err(format!(
            "{what} uses FFT transforms and needs a power-of-two resolution, got {resolution}"
        ));
    }
    Ok(())
}

/// Tolerances must be positive.
pub fn require_positive(value: f64, what: &str) -> CliResult<f64> {
    if !(value > 0.0) || !value.is_finite() {
        return err(format!("{what} must be > 0, got {value}"));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_from(sets: &[&str]) -> CliResult<Cfg> {
        Cfg::load("bubble", None, sets.iter())
    }

    #[test]
    fn dotted_sets_parse_json_scalars_and_arrays() {
        let cfg = cfg_from(&[
            "bubble.lambda=2.5",
            "bubble.k_list=[2,4]",
            "bubble.name=gaussian",
            "bubble.flag=true",
        ])
        .unwrap();
        assert_eq!(cfg.f64_or("bubble.lambda", 1.0).unwrap(), 2.5);
        assert_eq!(cfg.u32_list_or("bubble.k_list", &[8]).unwrap(), vec![2, 4]);
        assert_eq!(cfg.string_or("bubble.name", "x").unwrap(), "gaussian");
        assert!(cfg.bool_or("bubble.flag", false).unwrap());
        assert_eq!(cfg.f64_or("bubble.other", 3.0).unwrap(), 3.0);
    }

    #[test]
    fn null_override_restores_the_default() {
        let cfg = cfg_from(&["bubble.lambda=null"]).unwrap();
        assert_eq!(cfg.f64_or("bubble.lambda", 1.0).unwrap(), 1.0);
        assert!(!cfg.has("bubble.lambda"));
    }

    #[test]
    fn malformed_sets_are_rejected() {
        assert!(cfg_from(&["no-equals"]).is_err());
        assert!(cfg_from(&["=5"]).is_err());
        assert!(cfg_from(&["a..b=5"]).is_err());
        // Setting through a scalar fails.
        assert!(cfg_from(&["bubble.lambda=1", "bubble.lambda.x=2"]).is_err());
    }

    #[test]
    fn type_errors_are_reported() {
        let cfg = cfg_from(&["bubble.lambda=oops"]).unwrap();
        assert!(cfg.f64_or("bubble.lambda", 1.0).is_err());
    }

    #[test]
    fn validators() {
        assert!(require_power_of_two(64, "x").is_ok());
        assert!(require_power_of_two(48, "x").is_err());
        assert!(require_positive(1e-9, "tol").is_ok());
        assert!(require_positive(0.0, "tol").is_err());
    }
}
