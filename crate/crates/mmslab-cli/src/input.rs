use std::path::Path;

use mmslab::mms_core::{Correspondence, FiniteMMS, PointedMMS, SpaceJson};
use serde_json::Value;

use crate::failure::Failure;

const SPACE_SCHEMA: &str = include_str!("../../../schemas/space.schema.json");
const CORRESPONDENCE_SCHEMA: &str = include_str!("../../../schemas/correspondence.schema.json");

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn validate(path: &Path, schema: &str, value: &Value) -> Result<(), Failure> {
    let schema: Value = serde_json::from_str(schema).expect("shipped schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("shipped schema compiles");
    let problems: Vec<String> = validator
        .iter_errors(value)
        .map(|e| format!("{} at '{}'", e, e.instance_path()))
        .collect();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::schema(format!("{}: {}", path.display(), problems.join("; "))))
    }
}

/// A space file checked against the schema and the size guard.
pub fn space(path: &Path, max_points: usize) -> anyhow::Result<(FiniteMMS, Option<usize>)> {
    let value = read_json(path)?;
    validate(path, SPACE_SCHEMA, &value)?;
    let n = value["n"].as_u64().unwrap_or(0);
    if n > max_points as u64 {
        return Err(Failure::size_guard(format!("{}: {n} points exceeds --max-points {max_points}", path.display())).into());
    }
    let parsed: SpaceJson = serde_json::from_value(value).map_err(|e| Failure::schema(e.to_string()))?;
    parsed
        .into_space()
        .map_err(|e| Failure::schema(format!("{}: {e}", path.display())).into())
}

/// A space with its base: the explicit override, the file's base, or point 0.
pub fn pointed(path: &Path, base: Option<usize>, max_points: usize) -> anyhow::Result<PointedMMS> {
    let (space, stored) = space(path, max_points)?;
    Ok(PointedMMS::new(space, base.or(stored).unwrap_or(0))?)
}

pub fn correspondence(path: &Path) -> anyhow::Result<Correspondence> {
    let value = read_json(path)?;
    validate(path, CORRESPONDENCE_SCHEMA, &value)?;
    Ok(serde_json::from_value(value).map_err(|e| Failure::schema(e.to_string()))?)
}
