//! Run configuration: JSON file, command-line overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gammaexp::benchmark::{BuiltinModel, ModelKind};
use gammaexp::expansion::{ModelSpec, MAX_ORDER};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA: u32 = 1;

/// Monitoring interval written as a decimal or a ratio of integers such as `1/252`.
#[derive(Clone, Debug, PartialEq)]
pub struct Delta {
    literal: String,
    value: f64,
}

impl Delta {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn literal(&self) -> &str {
        &self.literal
    }
}

impl FromStr for Delta {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |m: &str| CliError::config("delta", format!("'{s}': {m}"));
        let value = match s.split_once('/') {
            Some((n, d)) => {
                let n: u64 = n.trim().parse().map_err(|_| bad("numerator is not an integer"))?;
                let d: u64 = d.trim().parse().map_err(|_| bad("denominator is not an integer"))?;
                if d == 0 {
                    return Err(bad("zero denominator"));
                }
                n as f64 / d as f64
            }
            None => s.parse::<f64>().map_err(|_| bad("not a number"))?,
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(bad("must be positive"));
        }
        Ok(Self {
            literal: s.to_string(),
            value,
        })
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal)
    }
}

/// Comma-separated list of intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Deltas(pub Vec<Delta>);

impl FromStr for Deltas {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let list = s.split(',').map(Delta::from_str).collect::<Result<Vec<_>>>()?;
        Ok(Self(list))
    }
}

impl TryFrom<String> for Deltas {
    type Error = CliError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Deltas> for String {
    fn from(d: Deltas) -> String {
        d.to_string()
    }
}

impl fmt::Display for Deltas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.0.iter().map(Delta::literal).collect();
        f.write_str(&parts.join(","))
    }
}

/// Uniform grid `xmin:xmax:n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.xmax - self.xmin) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.xmin + step * i as f64).collect()
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| CliError::config("grid", format!("'{s}': {m}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(bad("expected xmin:xmax:n"));
        };
        let xmin: f64 = lo.trim().parse().map_err(|_| bad("xmin is not a number"))?;
        let xmax: f64 = hi.trim().parse().map_err(|_| bad("xmax is not a number"))?;
        let n: usize = n.trim().parse().map_err(|_| bad("n is not a count"))?;
        if !(xmin.is_finite() && xmax.is_finite() && xmax > xmin) {
            return Err(bad("need finite xmin < xmax"));
        }
        if n < 2 {
            return Err(bad("n must be at least 2"));
        }
        Ok(Self { xmin, xmax, n })
    }
}

impl TryFrom<String> for Grid {
    type Error = CliError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        format!("{}:{}:{}", g.xmin, g.xmax, g.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Expansion,
    Fourier,
    Mc,
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "expansion" => Ok(Method::Expansion),
            "fourier" => Ok(Method::Fourier),
            "mc" => Ok(Method::Mc),
            other => Err(CliError::config(
                "methods",
                format!("unknown method '{other}' (expected expansion, fourier or mc)"),
            )),
        }
    }
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    s.split(',').map(Method::from_str).collect()
}

/// `M` selects orders `0..=M`; a comma list selects those orders only.
pub fn parse_orders(s: &str) -> Result<Vec<usize>> {
    let bad = |p: &str| CliError::config("orders", format!("'{p}' is not an order"));
    if s.contains(',') {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad(p))).collect()
    } else {
        let m: usize = s.trim().parse().map_err(|_| bad(s))?;
        Ok((0..=m).collect())
    }
}

/// Parameters of a built-in model; missing entries take the reference values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
}

/// A model given by the derivatives of its coefficients at `x0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub x0: f64,
    pub mu_derivs: Vec<f64>,
    pub sigma_derivs: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub paths: usize,
    pub steps: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            steps: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Deltas>,
    #[serde(default = "default_orders")]
    pub orders: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub mc: McConfig,
}

fn default_orders() -> Vec<usize> {
    (0..=2).collect()
}

fn default_methods() -> Vec<Method> {
    vec![Method::Expansion]
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA,
            model: None,
            params: None,
            custom: None,
            delta: None,
            orders: default_orders(),
            grid: None,
            methods: default_methods(),
            seed: 0,
            out: None,
            mc: McConfig::default(),
        }
    }
}

/// The model a run evaluates.
#[derive(Clone, Debug)]
pub enum ResolvedModel {
    Builtin(BuiltinModel),
    Custom(ModelSpec),
}

impl ResolvedModel {
    pub fn spec(&self) -> ModelSpec {
        match self {
            ResolvedModel::Builtin(m) => m.spec(),
            ResolvedModel::Custom(s) => s.clone(),
        }
    }

    pub fn builtin(&self) -> Option<&BuiltinModel> {
        match self {
            ResolvedModel::Builtin(m) => Some(m),
            ResolvedModel::Custom(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ResolvedModel::Builtin(m) => m.kind.id().to_string(),
            ResolvedModel::Custom(_) => "custom".to_string(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.schema != SCHEMA {
            return Err(CliError::config("schema", format!("unsupported version {}", cfg.schema)));
        }
        Ok(cfg)
    }

    /// Sorted, deduplicated orders.
    pub fn validated_orders(&self) -> Result<Vec<usize>> {
        let mut orders = self.orders.clone();
        orders.sort_unstable();
        orders.dedup();
        if orders.is_empty() {
            return Err(CliError::config("orders", "at least one order is required"));
        }
        if let Some(&m) = orders.iter().find(|&&m| m > MAX_ORDER) {
            return Err(CliError::config("orders", format!("order {m} exceeds the maximum {MAX_ORDER}")));
        }
        Ok(orders)
    }

    pub fn deltas(&self) -> Result<&[Delta]> {
        match &self.delta {
            Some(d) if !d.0.is_empty() => Ok(&d.0),
            _ => Err(CliError::config("delta", "required")),
        }
    }

    pub fn single_delta(&self) -> Result<&Delta> {
        match self.deltas()? {
            [d] => Ok(d),
            _ => Err(CliError::config("delta", "this command takes exactly one interval")),
        }
    }

    pub fn validated_methods(&self) -> Result<Vec<Method>> {
        let mut methods = self.methods.clone();
        methods.sort_unstable();
        methods.dedup();
        if methods.is_empty() {
            return Err(CliError::config("methods", "at least one method is required"));
        }
        Ok(methods)
    }

    pub fn resolve_model(&self) -> Result<ResolvedModel> {
        match (&self.model, &self.custom) {
            (Some(_), Some(_)) => Err(CliError::config("model", "give either a built-in model or a custom model")),
            (None, None) => Err(CliError::config("model", "required")),
            (None, Some(c)) => {
                if self.params.is_some() {
                    return Err(CliError::config("params", "only applies to built-in models"));
                }
                ModelSpec::new(c.x0, c.mu_derivs.clone(), c.sigma_derivs.clone(), c.a, c.b)
                    .map(ResolvedModel::Custom)
                    .map_err(|e| CliError::config("custom", e.to_string()))
            }
            (Some(id), None) => {
                let kind: ModelKind = id.parse().map_err(|e: gammaexp::Error| CliError::config("model", e.to_string()))?;
                let r = BuiltinModel::reference(kind);
                let p = self.params.clone().unwrap_or_default();
                BuiltinModel::new(
                    kind,
                    p.kappa.unwrap_or(r.kappa),
                    p.theta.unwrap_or(r.theta),
                    p.sigma.unwrap_or(r.sigma),
                    p.a.unwrap_or(r.a),
                    p.b.unwrap_or(r.b),
                    p.x0.unwrap_or(r.x0),
                )
                .map(ResolvedModel::Builtin)
                .map_err(|e| CliError::config("params", e.to_string()))
            }
        }
    }

    pub fn validate_mc(&self) -> Result<()> {
        if self.mc.paths == 0 {
            return Err(CliError::config("mc.paths", "must be positive"));
        }
        if self.mc.steps == 0 {
            return Err(CliError::config("mc.steps", "must be positive"));
        }
        Ok(())
    }
}
