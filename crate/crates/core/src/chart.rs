//! Coordinate charts carrying a metric given by component expressions.

use thiserror::Error;

use crate::expr::{self, EvalError, Expr, ParseError, Symbols};
use crate::jet::Jet;
use crate::linalg;
use crate::tensor::{JetTensor, Slot};

/// Eigenvalue sign counts `(negative, positive)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub negative: usize,
    pub positive: usize,
}

impl Signature {
    pub fn riemannian(n: usize) -> Signature {
        Signature { negative: 0, positive: n }
    }

    pub fn is_riemannian(&self) -> bool {
        self.negative == 0
    }

    pub fn dimension(&self) -> usize {
        self.negative + self.positive
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("dimension must be at least 3, got {0}")]
    Dimension(usize),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{field}: {source}")]
    Parse { field: String, source: ParseError },
    #[error("metric component {field}: {source}")]
    Eval { field: String, source: EvalError },
    #[error("metric is singular at {point:?} (|det| = {det:e})")]
    Singular { point: Vec<f64>, det: f64 },
    #[error("signature mismatch at {point:?}: declared {declared:?}, found {found:?}")]
    SignatureMismatch { point: Vec<f64>, declared: Signature, found: Signature },
    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },
}

/// A metric on a coordinate box. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricChart {
    pub name: String,
    pub signature: Signature,
    pub coordinates: Vec<String>,
    /// Full symmetric `n×n` component matrix, row-major.
    pub components: Vec<Expr>,
    /// Component source text, lower triangle rows (`row i` has `i + 1` entries).
    pub sources: Vec<Vec<String>>,
    pub parameters: Vec<(String, f64)>,
    pub domain: Vec<(f64, f64)>,
    pub scale: Option<Expr>,
    pub conformal_factor: Option<Expr>,
}

/// Builder input for [`MetricChart::new`]; strings are parsed on construction.
#[derive(Debug, Clone, Default)]
pub struct ChartDescription {
    pub name: String,
    pub signature: Option<Signature>,
    pub coordinates: Vec<String>,
    pub metric: Vec<Vec<String>>,
    pub parameters: Vec<(String, f64)>,
    pub domain: Vec<(f64, f64)>,
    pub scale: Option<String>,
    pub conformal_factor: Option<String>,
}

impl MetricChart {
    pub fn new(desc: ChartDescription) -> Result<MetricChart, ChartError> {
        let n = desc.coordinates.len();
        if n < 3 {
            return Err(ChartError::Dimension(n));
        }
        let signature = desc.signature.unwrap_or(Signature::riemannian(n));
        if signature.dimension() != n {
            return Err(ChartError::Invalid {
                field: "signature".into(),
                message: format!("p + q = {} does not match dimension {n}", signature.dimension()),
            });
        }
        for (i, c) in desc.coordinates.iter().enumerate() {
            if desc.coordinates[..i].contains(c) {
                return Err(ChartError::Invalid { field: "coordinates".into(), message: format!("duplicate '{c}'") });
            }
            if desc.parameters.iter().any(|(p, _)| p == c) {
                return Err(ChartError::Invalid {
                    field: "parameters".into(),
                    message: format!("'{c}' is also a coordinate"),
                });
            }
        }
        if desc.metric.len() != n {
            return Err(ChartError::Invalid {
                field: "metric".into(),
                message: format!("expected {n} rows, got {}", desc.metric.len()),
            });
        }
        if desc.domain.len() != n {
            return Err(ChartError::Invalid {
                field: "domain".into(),
                message: format!("expected {n} intervals, got {}", desc.domain.len()),
            });
        }
        for (i, (lo, hi)) in desc.domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(ChartError::Invalid {
                    field: format!("domain.{}", desc.coordinates[i]),
                    message: format!("empty or non-finite interval [{lo}, {hi}]"),
                });
            }
        }
        let symbols = Symbols {
            coordinates: desc.coordinates.clone(),
            parameters: desc.parameters.iter().map(|(p, _)| p.clone()).collect(),
        };
        let mut lower = Vec::with_capacity(n);
        for (i, row) in desc.metric.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(ChartError::Invalid {
                    field: format!("metric[{i}]"),
                    message: format!("lower-triangular row {i} needs {} entries, got {}", i + 1, row.len()),
                });
            }
            let mut parsed = Vec::with_capacity(i + 1);
            for (j, text) in row.iter().enumerate() {
                let e = expr::parse(text, &symbols)
                    .map_err(|source| ChartError::Parse { field: format!("metric[{i}][{j}]"), source })?;
                parsed.push(e);
            }
            lower.push(parsed);
        }
        let components =
            (0..n * n).map(|k| (k / n, k % n)).map(|(i, j)| lower[i.max(j)][i.min(j)].clone()).collect();
        let parse_opt = |field: &str, text: &Option<String>| -> Result<Option<Expr>, ChartError> {
            text.as_ref()
                .map(|t| expr::parse(t, &symbols).map_err(|source| ChartError::Parse { field: field.into(), source }))
                .transpose()
        };
        Ok(MetricChart {
            name: desc.name,
            signature,
            scale: parse_opt("scale", &desc.scale)?,
            conformal_factor: parse_opt("conformal_factor", &desc.conformal_factor)?,
            coordinates: desc.coordinates,
            components,
            sources: desc.metric,
            parameters: desc.parameters,
            domain: desc.domain,
        })
    }

    pub fn dimension(&self) -> usize {
        self.coordinates.len()
    }

    /// Builder input that rebuilds this chart.
    pub fn to_description(&self) -> ChartDescription {
        ChartDescription {
            name: self.name.clone(),
            signature: Some(self.signature),
            coordinates: self.coordinates.clone(),
            metric: self.sources.clone(),
            parameters: self.parameters.clone(),
            domain: self.domain.clone(),
            scale: self.scale.as_ref().map(|e| e.to_string()),
            conformal_factor: self.conformal_factor.as_ref().map(|e| e.to_string()),
        }
    }

    pub fn symbols(&self) -> Symbols {
        Symbols {
            coordinates: self.coordinates.clone(),
            parameters: self.parameters.iter().map(|(p, _)| p.clone()).collect(),
        }
    }

    pub fn parameter_values(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.1).collect()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dimension() && point.iter().zip(&self.domain).all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    /// Parse an expression against this chart's coordinates and parameters.
    pub fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        expr::parse(text, &self.symbols())
    }

    /// Plain metric components at a point.
    pub fn metric_values(&self, point: &[f64]) -> Result<Vec<f64>, ChartError> {
        let params = self.parameter_values();
        let n = self.dimension();
        self.components
            .iter()
            .enumerate()
            .map(|(k, e)| {
                e.eval(point, &params).map_err(|source| ChartError::Eval {
                    field: format!("metric[{}][{}]", (k / n).max(k % n), (k / n).min(k % n)),
                    source,
                })
            })
            .collect()
    }

    /// Eigenvalue sign counts of the metric at a point.
    pub fn signature_at(&self, point: &[f64]) -> Result<Signature, ChartError> {
        let g = self.metric_values(point)?;
        let (vals, _) = linalg::symmetric_eigen(&g, self.dimension());
        Ok(Signature {
            negative: vals.iter().filter(|v| **v < 0.0).count(),
            positive: vals.iter().filter(|v| **v > 0.0).count(),
        })
    }

    /// Check that the declared signature holds at a point.
    pub fn check_signature(&self, point: &[f64]) -> Result<(), ChartError> {
        let found = self.signature_at(point)?;
        if found != self.signature {
            return Err(ChartError::SignatureMismatch { point: point.to_vec(), declared: self.signature, found });
        }
        Ok(())
    }

    /// Metric and inverse-metric jets to `order` at `point`.
    pub fn metric_at(&self, point: &[f64], order: usize) -> Result<MetricJets, ChartError> {
        let n = self.dimension();
        let params = self.parameter_values();
        let vars: Vec<Jet> = (0..n).map(|i| Jet::variable(n, order, i, point[i])).collect();
        let mut g: Vec<Jet> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    g.push(g[j * n + i].clone());
                    continue;
                }
                let e = &self.components[i * n + j];
                let v = e.eval_jet_with(&vars, &params).map_err(|source| ChartError::Eval {
                    field: format!("metric[{j}][{i}]"),
                    source,
                })?;
                g.push(v);
            }
        }
        let values: Vec<f64> = g.iter().map(Jet::value).collect();
        let d = linalg::det(&values, n);
        let row_scale: f64 =
            (0..n).map(|i| (0..n).map(|j| values[i * n + j].powi(2)).sum::<f64>().sqrt()).product();
        if !(d.abs() > 1e-12 * row_scale) {
            return Err(ChartError::Singular { point: point.to_vec(), det: d });
        }
        let (eig, _) = linalg::symmetric_eigen(&values, n);
        let found = Signature {
            negative: eig.iter().filter(|v| **v < 0.0).count(),
            positive: eig.iter().filter(|v| **v > 0.0).count(),
        };
        if found != self.signature {
            return Err(ChartError::SignatureMismatch { point: point.to_vec(), declared: self.signature, found });
        }
        let ginv = linalg::jet_inverse(&g, n).ok_or(ChartError::Singular { point: point.to_vec(), det: d })?;
        Ok(MetricJets {
            point: point.to_vec(),
            g: JetTensor::from_fn(n, &[Slot::Down, Slot::Down], |i| g[i[0] * n + i[1]].clone()),
            ginv: JetTensor::from_fn(n, &[Slot::Up, Slot::Up], |i| ginv[i[0] * n + i[1]].clone()),
        })
    }

    /// Jet of a scalar expression on this chart.
    pub fn scalar_jet(&self, e: &Expr, point: &[f64], order: usize) -> Result<Jet, EvalError> {
        e.eval_jet(point, &self.parameter_values(), order)
    }
}

/// Metric jets at one point.
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub point: Vec<f64>,
    pub g: JetTensor,
    pub ginv: JetTensor,
}

impl MetricJets {
    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn order(&self) -> usize {
        self.g.order()
    }

    pub fn g_values(&self) -> Vec<f64> {
        self.g.value().data
    }

    pub fn ginv_values(&self) -> Vec<f64> {
        self.ginv.value().data
    }
}
