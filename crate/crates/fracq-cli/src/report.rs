//! Report assembly. Every command emits one JSON document on stdout with a
//! fixed schema: the versioned defaults table, the effective configuration,
//! a list of checks (value/target/tolerance/pass), command-specific results,
//! and the artifact files written. Serialization is deterministic (sorted
//! keys, shortest round-trip floats), so identical configurations produce
//! byte-identical reports.

use crate::config::defaults_table;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u64 = 1;

pub struct Report {
    command: String,
    seed: u64,
    config: Value,
    checks: Vec<Value>,
    results: Vec<(String, Value)>,
    artifacts: Vec<String>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            seed,
            config: json!({}),
            checks: Vec::new(),
            results: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    /// Record the fully resolved configuration the command actually used.
    pub fn set_config(&mut self, config: Value) {
        self.config = config;
    }

    /// Numeric check: |value − target| ≤ tolerance.
    pub fn check(&mut self, name: &str, value: f64, target: f64, tolerance: f64) -> bool {
        let pass = (value - target).abs() <= tolerance;
        self.checks.push(json!({
            "name": name,
            "value": value,
            "target": target,
            "tolerance": tolerance,
            "pass": pass,
        }));
        if !pass {
            eprintln!(
                "FAIL {name}: value {value:.6e}, target {target:.6e}, tolerance {tolerance:.1e}"
            );
        }
        pass
    }

    /// Boolean check with a free-form expectation description.
    pub fn check_flag(&mut self, name: &str, pass: bool, expected: &str) -> bool {
        self.checks.push(json!({
            "name": name,
            "expected": expected,
            "pass": pass,
        }));
        if !pass {
            eprintln!("FAIL {name}: expected {expected}");
        }
        pass
    }

    pub fn result(&mut self, key: &str, value: Value) {
        self.results.push((key.to_string(), value));
    }

    pub fn artifact(&mut self, name: &str) {
        self.artifacts.push(name.to_string());
    }

    pub fn all_pass(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c["pass"].as_bool().unwrap_or(false))
    }

    pub fn to_json_string(&self) -> String {
        let results: serde_json::Map<String, Value> =
            self.results.iter().cloned().collect();
        let doc = json!({
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "seed": self.seed,
            "defaults": defaults_table(),
            "config": self.config,
            "checks": self.checks,
            "results": results,
            "artifacts": self.artifacts,
            "pass": self.all_pass(),
        });
        serde_json::to_string_pretty(&doc).expect("report serialization cannot fail")
    }
}
