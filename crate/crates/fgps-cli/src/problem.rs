//! Problem sources: the built-in registry and JSON files.
//!
//! JSON schema:
//!
//! ```json
//! {
//!   "period": 3.14159,
//!   "alpha": 0.99999,
//!   "memory": 30.0,
//!   "g": "u1^2 - y1^2",
//!   "f": ["y2", "-4*y1 - 0.3*y2 + u1"],
//!   "c": [],
//!   "state_bounds": [[-5, 5], [-5, 5]],
//!   "control_bounds": [[-1, 1]]
//! }
//! ```

use std::path::Path;

use fgps::exprdsl;
use fgps::ocp::{registry, OcpProblem};
use fgps::FractionalOrder;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    period: f64,
    alpha: f64,
    memory: f64,
    g: String,
    f: Vec<String>,
    #[serde(default)]
    c: Vec<String>,
    state_bounds: Vec<[f64; 2]>,
    control_bounds: Vec<[f64; 2]>,
}

/// Loads a problem from a registry name or a JSON file path. CLI
/// `--alpha` / `--memory` override the file's values and are required
/// for registry names.
pub fn load(
    source: &str,
    alpha: Option<f64>,
    memory: Option<f64>,
) -> Result<OcpProblem, CliError> {
    let looks_like_file = source.ends_with(".json") || Path::new(source).exists();
    if !looks_like_file {
        let alpha = alpha.ok_or_else(|| {
            CliError::input("registry problems need --alpha")
        })?;
        let memory = memory.ok_or_else(|| {
            CliError::input("registry problems need --memory")
        })?;
        let order = FractionalOrder::new(alpha, memory).map_err(CliError::input)?;
        return registry::lookup(source, order).ok_or_else(|| {
            CliError::input(format!(
                "unknown problem {source:?}; registry has: {}",
                registry::NAMES.join(", ")
            ))
        });
    }

    let text = std::fs::read_to_string(source)
        .map_err(|e| CliError::input(format!("reading {source}: {e}")))?;
    let file: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("parsing {source}: {e}")))?;

    let n_x = file.f.len();
    let n_u = file.control_bounds.len();
    let parse = |which: &str, s: &str| {
        exprdsl::parse(s, n_x, n_u)
            .map_err(|e| CliError::input(format!("{source}: {which}: {e}")))
    };
    let cost = parse("g", &file.g)?;
    let mut dynamics = Vec::with_capacity(n_x);
    for (i, s) in file.f.iter().enumerate() {
        dynamics.push(parse(&format!("f[{i}]"), s)?);
    }
    let mut path = Vec::with_capacity(file.c.len());
    for (i, s) in file.c.iter().enumerate() {
        path.push(parse(&format!("c[{i}]"), s)?);
    }
    let order = FractionalOrder::new(
        alpha.unwrap_or(file.alpha),
        memory.unwrap_or(file.memory),
    )
    .map_err(CliError::input)?;
    OcpProblem::new(
        file.period,
        order,
        cost,
        dynamics,
        path,
        file.state_bounds.iter().map(|b| (b[0], b[1])).collect(),
        file.control_bounds.iter().map(|b| (b[0], b[1])).collect(),
    )
    .map_err(CliError::input)
}
