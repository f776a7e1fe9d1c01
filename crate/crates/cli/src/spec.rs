//! Metric spec files (`specVersion` 1).

use std::fmt;
use std::path::Path;

use confein_core::chart::{ChartDescription, MetricChart, Signature};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignatureSpec {
    /// Only `"riemannian"` is accepted.
    Named(String),
    /// `[p, q]`: counts of negative and positive eigenvalues.
    Counts([usize; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct MetricSpecFile {
    pub spec_version: u32,
    pub name: String,
    pub dimension: usize,
    pub signature: SignatureSpec,
    pub coordinates: Vec<String>,
    /// Lower-triangular rows: row `i` holds `g_i0 .. g_ii`.
    pub metric: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub parameters: IndexMap<String, f64>,
    pub domain: IndexMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    #[serde(default, rename = "conformal_factor", skip_serializing_if = "Option::is_none")]
    pub conformal_factor: Option<String>,
}

/// A spec that failed to load; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{field}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for SpecError {}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError { field: Some(field.into()), message: message.into() }
}

impl MetricSpecFile {
    pub fn from_json(text: &str) -> Result<MetricSpecFile, SpecError> {
        serde_json::from_str(text).map_err(|e| SpecError { field: None, message: format!("invalid spec JSON: {e}") })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serialises");
        s.push('\n');
        s
    }

    pub fn from_description(d: &ChartDescription) -> MetricSpecFile {
        let signature = match d.signature {
            Some(s) if !s.is_riemannian() => SignatureSpec::Counts([s.negative, s.positive]),
            _ => SignatureSpec::Named("riemannian".into()),
        };
        MetricSpecFile {
            spec_version: SPEC_VERSION,
            name: d.name.clone(),
            dimension: d.coordinates.len(),
            signature,
            coordinates: d.coordinates.clone(),
            metric: d.metric.clone(),
            parameters: d.parameters.iter().cloned().collect(),
            domain: d.coordinates.iter().cloned().zip(d.domain.iter().map(|&(lo, hi)| [lo, hi])).collect(),
            scale: d.scale.clone(),
            conformal_factor: d.conformal_factor.clone(),
        }
    }

    pub fn from_chart(chart: &MetricChart) -> MetricSpecFile {
        MetricSpecFile::from_description(&chart.to_description())
    }

    /// Structural checks, then parsing and the midpoint signature check.
    pub fn to_chart(&self) -> Result<MetricChart, SpecError> {
        if self.spec_version != SPEC_VERSION {
            return Err(invalid("specVersion", format!("unsupported version {}, expected {SPEC_VERSION}", self.spec_version)));
        }
        let n = self.dimension;
        if self.coordinates.len() != n {
            return Err(invalid("coordinates", format!("{} names for dimension {n}", self.coordinates.len())));
        }
        if self.metric.len() != n {
            return Err(invalid("metric", format!("{} rows for dimension {n}", self.metric.len())));
        }
        let signature = match &self.signature {
            SignatureSpec::Named(s) if s == "riemannian" => Signature::riemannian(n),
            SignatureSpec::Named(s) => return Err(invalid("signature", format!("unknown signature {s:?}"))),
            SignatureSpec::Counts([p, q]) => Signature { negative: *p, positive: *q },
        };
        for name in self.domain.keys() {
            if !self.coordinates.contains(name) {
                return Err(invalid(format!("domain.{name}"), "not a coordinate"));
            }
        }
        let mut domain = Vec::with_capacity(n);
        for c in &self.coordinates {
            let [lo, hi] = *self.domain.get(c).ok_or_else(|| invalid(format!("domain.{c}"), "missing interval"))?;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(format!("domain.{c}"), format!("interval [{lo}, {hi}] is empty or not finite")));
            }
            domain.push((lo, hi));
        }
        for (p, v) in &self.parameters {
            if !v.is_finite() {
                return Err(invalid(format!("parameters.{p}"), "not a finite number"));
            }
        }
        let chart = MetricChart::new(ChartDescription {
            name: self.name.clone(),
            signature: Some(signature),
            coordinates: self.coordinates.clone(),
            metric: self.metric.clone(),
            parameters: self.parameters.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            domain,
            scale: self.scale.clone(),
            conformal_factor: self.conformal_factor.clone(),
        })
        .map_err(|e| SpecError { field: None, message: e.to_string() })?;
        chart
            .check_signature(&chart.midpoint())
            .map_err(|e| invalid("signature", format!("at domain midpoint: {e}")))?;
        Ok(chart)
    }
}

pub fn load_spec(path: &Path) -> Result<MetricChart, SpecError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpecError { field: None, message: format!("cannot read {}: {e}", path.display()) })?;
    MetricSpecFile::from_json(&text)?.to_chart()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn catalog_entries_round_trip() {
        for e in catalog::ENTRIES {
            let spec = MetricSpecFile::from_description(&e.description());
            let chart = spec.to_chart().unwrap_or_else(|err| panic!("{}: {err}", e.name));
            let again = MetricSpecFile::from_json(&spec.to_json()).unwrap().to_chart().unwrap();
            assert_eq!(chart, again, "{}", e.name);
        }
    }

    #[test]
    fn missing_metric_names_the_field() {
        let mut v: serde_json::Value =
            serde_json::from_str(&MetricSpecFile::from_description(&catalog::get("flat_3").unwrap().description()).to_json())
                .unwrap();
        v.as_object_mut().unwrap().remove("metric");
        let err = MetricSpecFile::from_json(&v.to_string()).unwrap_err();
        assert!(err.message.contains("`metric`"), "{err}");
    }

    #[test]
    fn wrong_signature_is_rejected() {
        let mut spec = MetricSpecFile::from_description(&catalog::get("flat_4").unwrap().description());
        spec.signature = SignatureSpec::Counts([1, 3]);
        assert_eq!(spec.to_chart().unwrap_err().field.as_deref(), Some("signature"));
    }
}
