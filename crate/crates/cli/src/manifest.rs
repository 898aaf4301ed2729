//! Run manifests: parsing and up-front validation.

use crate::Failure;
use flowlab_core::{
    preset, Corruption, Expr, FamilySpec, FlowError, LabelGrid, LabeledFlow, PresetOptions,
    ToleranceConfig,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

const TOP_LEVEL: [&str; 9] = [
    "flow",
    "grid",
    "times",
    "labels",
    "outputs",
    "tolerances",
    "seed",
    "seeds",
    "corruption",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Times {
    List(Vec<f64>),
    Range { t0: f64, t1: f64, n: usize },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub trajectories: Option<PathBuf>,
    pub fields: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// A manifest that passed every check that can be made before computing.
#[derive(Debug)]
pub struct Manifest {
    /// the `flow` object exactly as written
    pub flow_echo: Value,
    pub flow: LabeledFlow,
    pub grid: LabelGrid,
    pub times: Vec<f64>,
    pub labels: Vec<(f64, f64)>,
    pub outputs: Outputs,
    pub tolerances: ToleranceConfig,
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::Validation(format!("invalid {field}: {reason}"))
}

fn field<T: DeserializeOwned>(name: &str, v: Value) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| invalid(name, e))
}

/// Construction errors are the manifest's fault, except for validity.
fn flow_error(prefix: &str, e: FlowError) -> Failure {
    match e {
        FlowError::OutsideValidity { .. } => Failure::Outside(e.to_string()),
        FlowError::Invalid { field, reason } => invalid(&format!("{prefix}.{field}"), reason),
        other => invalid(prefix, other),
    }
}

fn build_times(v: Value) -> Result<Vec<f64>, Failure> {
    let times = match field::<Times>("times", v)? {
        Times::List(ts) => ts,
        Times::Range { t0, t1, n } => {
            if n < 1 {
                return Err(invalid("times.n", "need at least one time"));
            }
            if n == 1 {
                vec![t0]
            } else {
                (0..n)
                    .map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64)
                    .collect()
            }
        }
    };
    if times.is_empty() {
        return Err(invalid("times", "need at least one time"));
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Err(invalid("times", format!("non-finite time {t}")));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(invalid(
            "times",
            format!("not strictly increasing at {} -> {}", w[0], w[1]),
        ));
    }
    Ok(times)
}

struct FlowParts {
    spec: FamilySpec,
    f0: Expr,
    g0: Expr,
    domain: Option<LabelGrid>,
}

fn build_flow(v: &Value) -> Result<FlowParts, Failure> {
    let mut obj: Map<String, Value> = match v {
        Value::Object(m) => m.clone(),
        _ => return Err(invalid("flow", "expected an object")),
    };
    if let Some(name) = obj.remove("preset") {
        let name: String = field("flow.preset", name)?;
        let opts: PresetOptions = field("flow", Value::Object(obj))?;
        let p = preset(&name, &opts).map_err(|e| match e {
            FlowError::UnknownPreset(_) => invalid("flow.preset", e),
            FlowError::Invalid { field, reason } => invalid(&field, reason),
            other => invalid("flow", other),
        })?;
        return Ok(FlowParts {
            spec: p.spec,
            f0: p.f0,
            g0: p.g0,
            domain: Some(p.domain),
        });
    }
    let f0 = obj
        .remove("f0")
        .ok_or_else(|| invalid("flow.f0", "missing initial derivative"))?;
    let g0 = obj
        .remove("g0")
        .ok_or_else(|| invalid("flow.g0", "missing initial derivative"))?;
    Ok(FlowParts {
        f0: field("flow.f0", f0)?,
        g0: field("flow.g0", g0)?,
        spec: field("flow", Value::Object(obj))?,
        domain: None,
    })
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
        let root: Value = serde_json::from_str(&text).map_err(|e| invalid("manifest", e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Manifest::from_value(root, base)
    }

    /// Validates everything; relative output paths resolve against `base`.
    pub fn from_value(root: Value, base: &Path) -> Result<Manifest, Failure> {
        let mut obj = match root {
            Value::Object(m) => m,
            _ => return Err(invalid("manifest", "expected a JSON object")),
        };
        if let Some(k) = obj.keys().find(|k| !TOP_LEVEL.contains(&k.as_str())) {
            return Err(invalid(k, "unknown field"));
        }
        if obj.contains_key("seed") && obj.contains_key("seeds") {
            return Err(invalid("seeds", "give either seed or seeds"));
        }

        let flow_echo = obj
            .remove("flow")
            .ok_or_else(|| invalid("flow", "missing field"))?;
        let parts = build_flow(&flow_echo)?;
        let grid = match obj.remove("grid") {
            Some(v) => field::<LabelGrid>("grid", v)?,
            None => parts
                .domain
                .ok_or_else(|| invalid("grid", "required unless flow is a preset"))?,
        };
        grid.validate().map_err(|e| flow_error("grid", e))?;

        let times = build_times(
            obj.remove("times")
                .ok_or_else(|| invalid("times", "missing field"))?,
        )?;

        let labels = match obj.remove("labels") {
            Some(v) => {
                let ls: Vec<[f64; 2]> = field("labels", v)?;
                if ls.is_empty() {
                    return Err(invalid("labels", "empty label list"));
                }
                if ls.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(invalid("labels", "non-finite label"));
                }
                ls.into_iter().map(|[a, b]| (a, b)).collect()
            }
            None => grid.points().into_iter().map(|z| (z.re, z.im)).collect(),
        };

        let mut outputs: Outputs =
            field("outputs", obj.remove("outputs").unwrap_or(Value::Null))
                .map_err(|_| invalid("outputs", "expected {trajectories?, fields?, report?}"))?;
        if outputs.trajectories.is_none() && outputs.fields.is_none() && outputs.report.is_none() {
            return Err(invalid("outputs", "no output requested"));
        }
        for p in [
            &mut outputs.trajectories,
            &mut outputs.fields,
            &mut outputs.report,
        ]
        .into_iter()
        .flatten()
        {
            if p.as_os_str().is_empty() {
                return Err(invalid("outputs", "empty path"));
            }
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }

        let tol_value = obj
            .remove("tolerances")
            .unwrap_or(Value::Object(Map::new()));
        let explicit = |key: &str| tol_value.get(key).is_some();
        let (has_window, has_grid) = (explicit("window"), explicit("grid"));
        let mut tolerances: ToleranceConfig = field("tolerances", tol_value)?;
        if !has_window && times.len() >= 2 {
            tolerances.window = [times[0], times[times.len() - 1]];
        }
        if !has_grid {
            tolerances.grid = [grid.na, grid.nb];
        }
        if let Some(v) = obj.remove("seed").or_else(|| obj.remove("seeds")) {
            tolerances.seed = field("seed", v)?;
        }
        tolerances.validate().map_err(|e| match e {
            FlowError::Invalid { field, reason } => invalid(&field, reason),
            other => invalid("tolerances", other),
        })?;

        let corruption: Option<Corruption> = match obj.remove("corruption") {
            Some(v) => Some(field("corruption", v)?),
            None => None,
        };

        let (t0, t1) = (times[0], times[times.len() - 1]);
        parts.spec.validate().map_err(|e| flow_error("flow", e))?;
        parts
            .spec
            .validate_paths(t0, t1)
            .map_err(|e| flow_error("flow", e))?;
        for &t in times.iter().chain(&tolerances.window) {
            parts
                .spec
                .check_time(t)
                .map_err(|e| flow_error("times", e))?;
        }

        let mut flow = LabeledFlow::new(parts.spec, parts.f0, parts.g0, grid)
            .map_err(|e| flow_error("flow", e))?;
        if let Some(c) = corruption {
            flow = flow.with_corruption(c);
        }
        Ok(Manifest {
            flow_echo,
            flow,
            grid,
            times,
            labels,
            outputs,
            tolerances,
        })
    }
}
