//! Scenario resolution: catalog defaults, then a JSON config file, then
//! command-line overrides.

use std::path::Path;

use serde_json::Value;

use super::scenario::{catalog, find_scenario, ScenarioSpec};
use crate::error::{Error, Result};

/// Command-line overrides; `None` leaves the resolved value untouched.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ScenarioSpec) {
        if let Some(s) = self.seed {
            spec.ensemble.master_seed = s;
        }
        if let Some(n) = self.realizations {
            spec.ensemble.realizations = n;
        }
        if let Some(t) = self.t_max {
            spec.integrator.t_max = t;
        }
        if let Some(k) = self.points {
            spec.integrator.grid_points = k;
        }
        if let Some(t) = self.threads {
            spec.ensemble.threads = Some(t);
        }
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}

/// Parses config text. If its `name` (or `base`) matches a catalog scenario,
/// fields missing from the file are taken from that scenario.
pub fn parse_config(text: &str, base: Option<&str>) -> Result<ScenarioSpec> {
    let patch: Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
    if !patch.is_object() {
        return Err(Error::Config(
            "line 1: top level must be a JSON object".into(),
        ));
    }
    let base_name = base.map(str::to_string).or_else(|| {
        patch
            .get("name")
            .and_then(Value::as_str)
            .map(str::to_string)
    });
    let mut merged = match base_name
        .as_deref()
        .and_then(|n| catalog().into_iter().find(|s| s.name == n))
    {
        Some(spec) => serde_json::to_value(spec).expect("scenario serializes"),
        None => Value::Object(Default::default()),
    };
    merge(&mut merged, patch);

    let spec: ScenarioSpec = serde_path_to_error::deserialize(merged).map_err(|e| {
        let path = e.path().to_string();
        let key = e.path().iter().rev().find_map(|seg| match seg {
            serde_path_to_error::Segment::Map { key } => Some(key.clone()),
            _ => None,
        });
        let line = key
            .as_deref()
            .and_then(|k| line_of_key(text, k))
            .map(|l| format!("line {l}: "))
            .unwrap_or_default();
        Error::Config(format!("{line}field `{path}`: {}", e.inner()))
    })?;
    spec.validate()?;
    Ok(spec)
}

/// Resolves a scenario with precedence flags > file > catalog defaults.
pub fn resolve(
    scenario: Option<&str>,
    config: Option<&Path>,
    overrides: &Overrides,
) -> Result<ScenarioSpec> {
    let mut spec = match (scenario, config) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text, scenario)?
        }
        (Some(name), None) => find_scenario(name)?,
        (None, None) => {
            return Err(Error::Config(
                "need a scenario name or --config FILE".into(),
            ));
        }
    };
    overrides.apply(&mut spec);
    spec.validate()?;
    Ok(spec)
}
