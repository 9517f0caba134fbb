//! JSON documents read and written by the tool. Every document carries
//! `"schema": "pba-extend/1"`.
//!
//! Atom keys are strings `ε_1 ε_2 … ε_k` over a context's generators in
//! the order the context lists them: `"10"` is `A ∩ B^c` for context
//! `[A, B]`. Intersection keys join generator names with `&`.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use pba_core::boolean_core::{measure_from_intersections, Measure};
use pba_core::ppt::{Pba, Ppt, State};
use pba_core::quantum::{CMatrix, ProjectionMatrix, QuantumState};
use pba_core::scalar::{rational_from_decimal_str, Rational};
use pba_core::Scalar;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "pba-extend/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Exact,
    Float,
}

/// Scalars as they appear in documents: exact values as `"num/den"`
/// strings, floats as numbers.
pub trait Number: Scalar {
    const ARITHMETIC: Arithmetic;
    fn parse_json(v: &Value) -> CliResult<Self>;
    fn to_json(&self) -> Value;
}

impl Number for Rational {
    const ARITHMETIC: Arithmetic = Arithmetic::Exact;

    fn parse_json(v: &Value) -> CliResult<Self> {
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            other => return Err(CliError::Parse(format!("expected a number, got {other}"))),
        };
        rational_from_decimal_str(&text).ok_or_else(|| CliError::Parse(format!("not a rational: {text:?}")))
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
}

impl Number for f64 {
    const ARITHMETIC: Arithmetic = Arithmetic::Float;

    fn parse_json(v: &Value) -> CliResult<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| CliError::Parse(format!("not a float: {n}"))),
            Value::String(s) => rational_from_decimal_str(s)
                .map(|r| Scalar::to_f64(&r))
                .ok_or_else(|| CliError::Parse(format!("not a number: {s:?}"))),
            other => Err(CliError::Parse(format!("expected a number, got {other}"))),
        }
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self).map(Value::Number).unwrap_or(Value::Null)
    }
}

pub fn check_schema(v: &Value) -> CliResult<()> {
    match v.get("schema").and_then(Value::as_str) {
        Some(SCHEMA) => Ok(()),
        Some(other) => Err(CliError::Parse(format!("unsupported schema {other:?} (expected {SCHEMA:?})"))),
        None => Err(CliError::Parse(format!("missing \"schema\": {SCHEMA:?}"))),
    }
}

pub fn read_json(path: &std::path::Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)?;
    check_schema(&v)?;
    Ok(v)
}

fn from_value<T: serde::de::DeserializeOwned>(v: &Value) -> CliResult<T> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::Parse(e.to_string()))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<BTreeMap<String, Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersections: Option<BTreeMap<String, Value>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PptDocument {
    pub schema: String,
    pub generators: Vec<String>,
    pub contexts: Vec<Vec<String>>,
    pub measures: Vec<MeasureEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arithmetic: Option<Arithmetic>,
}

pub fn atom_key(atom: usize, k: usize) -> String {
    (0..k).map(|j| if atom >> j & 1 == 1 { '1' } else { '0' }).collect()
}

fn generator_ids(names: &[String], wanted: &[String], what: &str) -> CliResult<Vec<usize>> {
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    wanted
        .iter()
        .map(|w| index.get(w.trim()).copied().ok_or_else(|| CliError::Input(format!("{what}: unknown generator {w:?}"))))
        .collect()
}

impl PptDocument {
    pub fn parse(v: &Value) -> CliResult<Self> {
        check_schema(v)?;
        from_value(v)
    }

    pub fn to_pba(&self) -> CliResult<Pba> {
        let contexts = self
            .contexts
            .iter()
            .enumerate()
            .map(|(i, c)| generator_ids(&self.generators, c, &format!("context {i}")))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Pba::with_names(self.generators.clone(), contexts)?)
    }

    pub fn to_ppt<S: Number>(&self) -> CliResult<Ppt<S>> {
        let pba = self.to_pba()?;
        if self.measures.len() != self.contexts.len() {
            return Err(CliError::Input(format!(
                "{} measures for {} contexts",
                self.measures.len(),
                self.contexts.len()
            )));
        }
        let mut measures = Vec::new();
        for (i, (names, entry)) in self.contexts.iter().zip(&self.measures).enumerate() {
            let ids = generator_ids(&self.generators, names, &format!("context {i}"))?;
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            // listed position -> bit in the sorted local order
            let bit: Vec<usize> = ids.iter().map(|g| sorted.iter().position(|s| s == g).unwrap()).collect();
            let k = ids.len();
            let where_ = |msg: String| CliError::Input(format!("context {i} ({}): {msg}", names.join(", ")));
            let m = match (&entry.atoms, &entry.intersections) {
                (Some(atoms), None) => {
                    let mut w = vec![S::zero(); 1 << k];
                    for (key, v) in atoms {
                        if key.len() != k || !key.chars().all(|c| c == '0' || c == '1') {
                            return Err(where_(format!("atom key {key:?} is not a {k}-bit string")));
                        }
                        let atom = key.chars().enumerate().filter(|(_, c)| *c == '1').fold(0, |a, (j, _)| a | 1 << bit[j]);
                        w[atom] = S::parse_json(v)?;
                    }
                    Measure::new(k, w).map_err(|e| where_(e.to_string()))?
                }
                (None, Some(values)) => {
                    let mut map = BTreeMap::new();
                    for (key, v) in values {
                        let parts: Vec<String> = key.split('&').map(|s| s.trim().to_string()).collect();
                        let gens = generator_ids(&self.generators, &parts, &format!("context {i}"))?;
                        let mut mask = 0usize;
                        for g in gens {
                            let pos = ids.iter().position(|&x| x == g).ok_or_else(|| {
                                where_(format!("intersection {key:?} leaves the context"))
                            })?;
                            mask |= 1 << bit[pos];
                        }
                        map.insert(mask, S::parse_json(v)?);
                    }
                    measure_from_intersections(&map, k).map_err(|e| where_(e.to_string()))?
                }
                _ => return Err(where_("give exactly one of \"atoms\" or \"intersections\"".into())),
            };
            measures.push(m);
        }
        Ok(Ppt::new(pba, State::new(measures))?)
    }

    /// Atom form with contexts in sorted generator order.
    pub fn from_ppt<S: Number>(ppt: &Ppt<S>) -> Self {
        let names = ppt.pba.names().to_vec();
        let contexts = ppt.pba.contexts().iter().map(|c| c.generators().iter().map(|&g| names[g].clone()).collect()).collect();
        let measures = (0..ppt.pba.contexts().len())
            .map(|i| {
                let m = ppt.measure(i);
                let atoms = m.weights().iter().enumerate().map(|(a, w)| (atom_key(a, m.arity()), w.to_json())).collect();
                MeasureEntry { atoms: Some(atoms), intersections: None }
            })
            .collect();
        PptDocument { schema: SCHEMA.into(), generators: names, contexts, measures, arithmetic: Some(S::ARITHMETIC) }
    }
}

/// Nonzero atoms of a measure over all generators.
pub fn measure_json<S: Number>(m: &Measure<S>, names: &[String]) -> Value {
    let atoms: serde_json::Map<String, Value> = m
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_negligible())
        .map(|(a, w)| (atom_key(a, m.arity()), w.to_json()))
        .collect();
    serde_json::json!({ "generators": names, "atoms": atoms })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixDocument {
    pub fn to_matrix(&self) -> CliResult<CMatrix> {
        let d = self.dim;
        let rows_ok = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
        if !rows_ok(&self.re) || self.im.as_ref().is_some_and(|im| !rows_ok(im)) {
            return Err(CliError::Input(format!("matrix entries do not form a {d}×{d} array")));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| {
            Complex64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionEntry {
    pub label: String,
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorDocument {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum StateEntry {
    Vector(VectorDocument),
    Density(MatrixDocument),
}

impl StateEntry {
    pub fn to_state(&self) -> CliResult<QuantumState> {
        match self {
            StateEntry::Vector(v) => {
                if v.im.as_ref().is_some_and(|im| im.len() != v.re.len()) {
                    return Err(CliError::Input("state vector re/im lengths differ".into()));
                }
                let amps = (0..v.re.len())
                    .map(|i| Complex64::new(v.re[i], v.im.as_ref().map_or(0.0, |im| im[i])))
                    .collect();
                Ok(QuantumState::vector(amps)?)
            }
            StateEntry::Density(m) => Ok(QuantumState::density(m.to_matrix()?)?),
        }
    }
}

/// Projections and, optionally, states.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumDocument {
    #[serde(rename = "schema")]
    _schema: String,
    pub projections: Vec<ProjectionEntry>,
    #[serde(default)]
    pub states: Vec<StateEntry>,
}

impl QuantumDocument {
    pub fn parse(v: &Value) -> CliResult<Self> {
        check_schema(v)?;
        from_value(v)
    }

    pub fn projections(&self) -> CliResult<Vec<ProjectionMatrix>> {
        self.projections
            .iter()
            .map(|p| {
                let m = MatrixDocument { dim: p.dim, re: p.re.clone(), im: p.im.clone() }.to_matrix()?;
                ProjectionMatrix::new(p.label.clone(), m).map_err(CliError::from)
            })
            .collect()
    }

    pub fn states(&self) -> CliResult<Vec<QuantumState>> {
        self.states.iter().map(StateEntry::to_state).collect()
    }
}

/// A single state: `{"schema", "vector": …}` or `{"schema", "density": …}`.
pub fn parse_state_document(v: &Value) -> CliResult<QuantumState> {
    check_schema(v)?;
    let mut obj = v.as_object().cloned().unwrap_or_default();
    obj.remove("schema");
    let entry: StateEntry = from_value(&Value::Object(obj))?;
    entry.to_state()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeSpecDocument {
    #[serde(rename = "schema")]
    _schema: String,
    pub three: BTreeMap<String, Value>,
    #[serde(default)]
    pub chi: Option<Value>,
    #[serde(default)]
    pub eta: Option<Value>,
    /// Read from the raw document; see [`declared_arithmetic`].
    #[serde(default, rename = "arithmetic")]
    _arithmetic: Option<Arithmetic>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionEntry {
    pub element: String,
    pub value: Value,
}

/// A partial function on the free algebra over `generators`; elements are
/// Boolean expressions (see [`crate::expr`]).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDocument {
    #[serde(rename = "schema")]
    _schema: String,
    pub generators: Vec<String>,
    pub entries: Vec<FunctionEntry>,
    #[serde(default)]
    pub queries: Vec<String>,
    /// Read from the raw document; see [`declared_arithmetic`].
    #[serde(default, rename = "arithmetic")]
    _arithmetic: Option<Arithmetic>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    #[serde(rename = "schema")]
    _schema: String,
    pub generators: Vec<String>,
    pub monomials: Vec<Vec<String>>,
}

impl SpecDocument {
    pub fn monomials(&self) -> CliResult<Vec<Vec<usize>>> {
        self.monomials
            .iter()
            .enumerate()
            .map(|(i, m)| generator_ids(&self.generators, m, &format!("monomial {i}")))
            .collect()
    }
}

pub fn parse_as<T: serde::de::DeserializeOwned>(v: &Value) -> CliResult<T> {
    check_schema(v)?;
    from_value(v)
}

/// The `arithmetic` field of a document, if any.
pub fn declared_arithmetic(v: &Value) -> CliResult<Option<Arithmetic>> {
    match v.get("arithmetic") {
        None | Some(Value::Null) => Ok(None),
        Some(a) => from_value(a).map(Some),
    }
}
