//! Einstein scales, the scale tractor and parallel transport.

use thiserror::Error;

use crate::chart::{ChartError, MetricChart};
use crate::curvature::{CurvatureJets, CurvatureStack};
use crate::expr::{self, EvalError, Expr, ParseError, Symbols};
use crate::jet::Jet;
use crate::tensor::{JetTensor, Slot, TensorValue};
use crate::tractor::{self, StandardTractor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScaleError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("cannot evaluate {what}: {source}")]
    Eval { what: String, source: EvalError },
    #[error("cannot parse {what}: {source}")]
    Parse { what: String, source: ParseError },
    #[error("curve leaves the domain at t = {t} (point {point:?})")]
    OutsideDomain { t: f64, point: Vec<f64> },
    #[error("curve has {found} coordinates, chart has {expected}")]
    CurveDimension { expected: usize, found: usize },
    #[error("{0}")]
    Invalid(String),
}

fn trace_free(t: &TensorValue, g: &[f64], ginv: &[f64]) -> TensorValue {
    let n = t.n;
    let tr: f64 = (0..n * n).map(|k| ginv[k] * t.data[k]).sum();
    let mut out = t.clone();
    for k in 0..n * n {
        out.data[k] -= tr / n as f64 * g[k];
    }
    out
}

/// `TF(P)`; vanishes exactly at Einstein points.
pub fn einstein_residual(stack: &CurvatureStack) -> TensorValue {
    trace_free(&stack.schouten, &stack.g, &stack.ginv)
}

/// `TF(∇_a∇_bσ + P_abσ)` for a weight-1 scale given by its jet (order ≥ 2).
pub fn conformal_einstein_residual(curv: &CurvatureJets, sigma: &Jet) -> TensorValue {
    let n = curv.n();
    let field = JetTensor::from_fn(n, &[], |_| sigma.clone());
    let hess = curv.connection.nabla(&curv.connection.nabla(&field)).value();
    let stack = curv.stack();
    let s = sigma.value();
    let raw = TensorValue::from_fn(n, &[Slot::Down, Slot::Down], |i| {
        0.5 * (hess.get(i) + hess.get(&[i[1], i[0]])) + stack.schouten.get(i) * s
    });
    trace_free(&raw, &stack.g, &stack.ginv)
}

/// Scale tractor at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleTractor {
    pub tractor: StandardTractor,
    /// Upper slot vector `(σ, μ^a, ρ)`.
    pub slots: Vec<f64>,
    /// `σ` vanishes at the point (scale singularity).
    pub scale_singular: bool,
}

/// Magnitude of `σ` below which a point is flagged as a scale singularity.
pub const SCALE_ZERO_TOL: f64 = 1e-12;

/// `I = (1/n)Dσ = (σ, ∇^aσ, −(Δσ + Jσ)/n)`. Needs `σ` to order ≥ 2.
pub fn build_scale_tractor(curv: &CurvatureJets, sigma: &Jet) -> ScaleTractor {
    let conn = tractor::coupled_connection(curv);
    let field = tractor::scale_tractor(sigma, curv, &conn).value();
    let g = curv.metric.g_values();
    let tractor = tractor::standard_from_upper(&field, &g);
    ScaleTractor { scale_singular: tractor.sigma.abs() <= SCALE_ZERO_TOL, tractor, slots: field.data }
}

/// `∇_a I^B` for the scale tractor of `σ` (slots Down, TractorUp). Needs `σ` to order ≥ 3.
pub fn scale_tractor_gradient(curv: &CurvatureJets, sigma: &Jet) -> TensorValue {
    let conn = tractor::coupled_connection(curv);
    let field = tractor::scale_tractor(sigma, curv, &conn);
    conn.nabla(&field).value()
}

/// Raw component norm of `∇I` at a point.
pub fn parallel_residual_at(curv: &CurvatureJets, sigma: &Jet) -> f64 {
    scale_tractor_gradient(curv, sigma).raw_norm()
}

/// Jet of a scale expression at a point.
pub fn scale_jet(chart: &MetricChart, sigma: &Expr, point: &[f64], order: usize) -> Result<Jet, ScaleError> {
    chart.scalar_jet(sigma, point, order).map_err(|source| ScaleError::Eval { what: "scale".into(), source })
}

/// `‖∇I‖` per point for the scale tractor of `σ`.
pub fn parallel_residual(chart: &MetricChart, sigma: &Expr, points: &[Vec<f64>]) -> Result<Vec<f64>, ScaleError> {
    points
        .iter()
        .map(|p| {
            let curv = CurvatureJets::compute(chart, p, 3)?;
            let s = scale_jet(chart, sigma, p, 3)?;
            Ok(parallel_residual_at(&curv, &s))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarExtension {
    /// `−(n/2) h(I, I)`.
    pub extended: f64,
    pub j: f64,
    pub deviation: f64,
}

/// Compare `−(n/2)h(I,I)` with `J` in the current scale.
pub fn scalar_extension_check(i: &StandardTractor, j: f64, ginv: &[f64]) -> ScalarExtension {
    let extended = -(i.n() as f64) / 2.0 * i.norm_sq(ginv);
    ScalarExtension { extended, j, deviation: (extended - j).abs() }
}

/// The chart `ĝ = e^{2ω}g`. A declared scale `σ` becomes `σe^ω`, and `ω` is
/// added to any existing conformal factor.
pub fn rescale(chart: &MetricChart, omega: &str) -> Result<MetricChart, ScaleError> {
    let w = chart.parse(omega).map_err(|source| ScaleError::Parse { what: "omega".into(), source })?;
    let w_text = w.to_string();
    let mut desc = chart.to_description();
    desc.name = format!("{}_rescaled", chart.name);
    for (i, row) in desc.metric.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            if !chart.components[i * chart.dimension() + j].is_literal_zero() {
                *entry = format!("exp(2*{w_text})*({entry})");
            }
        }
    }
    desc.scale = desc.scale.map(|s| format!("({s})*exp({w_text})"));
    desc.conformal_factor = Some(match desc.conformal_factor {
        Some(c) => format!("({c}) + {w_text}"),
        None => w_text,
    });
    Ok(MetricChart::new(desc)?)
}

/// A curve on the chart.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    /// Straight coordinate segments through the vertices, one unit of parameter each.
    Polyline(Vec<Vec<f64>>),
    /// One expression per coordinate in the parameter `t ∈ [0, 1]`.
    Parametric(Vec<Expr>),
}

impl Curve {
    /// Parse coordinate expressions in `t`, using the chart's parameters.
    pub fn parametric(chart: &MetricChart, exprs: &[&str]) -> Result<Curve, ScaleError> {
        let n = chart.dimension();
        if exprs.len() != n {
            return Err(ScaleError::CurveDimension { expected: n, found: exprs.len() });
        }
        let params: Vec<&str> = chart.parameters.iter().map(|(p, _)| p.as_str()).collect();
        let symbols = Symbols::new(&["t"], &params);
        let parsed = exprs
            .iter()
            .enumerate()
            .map(|(k, e)| expr::parse(e, &symbols).map_err(|source| ScaleError::Parse { what: format!("curve[{k}]"), source }))
            .collect::<Result<_, _>>()?;
        Ok(Curve::Parametric(parsed))
    }

    /// Square of side `ε` centred at `center` in the `(u, v)` coordinate plane,
    /// traversed `+u`, `+v`, `−u`, `−v`.
    pub fn coordinate_loop(center: &[f64], u: usize, v: usize, eps: f64) -> Curve {
        let corner = |su: f64, sv: f64| {
            let mut p = center.to_vec();
            p[u] += 0.5 * su * eps;
            p[v] += 0.5 * sv * eps;
            p
        };
        Curve::Polyline(vec![
            corner(-1.0, -1.0),
            corner(1.0, -1.0),
            corner(1.0, 1.0),
            corner(-1.0, 1.0),
            corner(-1.0, -1.0),
        ])
    }

    fn segments(&self) -> usize {
        match self {
            Curve::Polyline(v) => v.len().saturating_sub(1),
            Curve::Parametric(_) => 1,
        }
    }

    /// Point and velocity at local parameter `f ∈ [0, 1]` of segment `k`.
    fn eval(&self, k: usize, f: f64, params: &[f64]) -> Result<(Vec<f64>, Vec<f64>), ScaleError> {
        match self {
            Curve::Polyline(v) => {
                let (a, b) = (&v[k], &v[k + 1]);
                let p = a.iter().zip(b).map(|(x, y)| x + f * (y - x)).collect();
                let vel = a.iter().zip(b).map(|(x, y)| y - x).collect();
                Ok((p, vel))
            }
            Curve::Parametric(exprs) => {
                let mut p = Vec::with_capacity(exprs.len());
                let mut vel = Vec::with_capacity(exprs.len());
                for (k, e) in exprs.iter().enumerate() {
                    let j = e
                        .eval_jet(&[f], params, 1)
                        .map_err(|source| ScaleError::Eval { what: format!("curve[{k}]"), source })?;
                    p.push(j.value());
                    vel.push(j.derivative(&[1]));
                }
                Ok((p, vel))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Curve::Polyline(v) => format!("polyline with {} vertices", v.len()),
            Curve::Parametric(e) => {
                format!("({})", e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub curve: String,
    /// RK4 steps per unit of curve parameter.
    pub steps: usize,
    pub start: Vec<f64>,
    /// Transported tractor, upper slots.
    pub end: Vec<f64>,
    /// `I_start − I_end` when the curve is closed.
    pub closure_deviation: Option<Vec<f64>>,
    /// `max |h(I,I) − h(I₀,I₀)|` along the curve.
    pub h_drift: f64,
    pub parameter_length: f64,
}

/// Tractor connection matrix `Γ̃_a^B_D` at a point, flattened `[a][B][D]`.
pub fn connection_at(chart: &MetricChart, point: &[f64]) -> Result<Vec<f64>, ChartError> {
    let curv = CurvatureJets::compute(chart, point, 2)?;
    Ok(tractor::connection_matrix(&curv).value().data)
}

fn tractor_norm_at(chart: &MetricChart, point: &[f64], i: &[f64]) -> Result<f64, ChartError> {
    let n = chart.dimension();
    let h = tractor::tractor_metric(&chart.metric_values(point)?, n);
    let d = n + 2;
    Ok((0..d).map(|a| (0..d).map(|b| h[a * d + b] * i[a] * i[b]).sum::<f64>()).sum())
}

/// Integrate `∇_ċ I = 0` with classic RK4 at a fixed number of steps per unit
/// of curve parameter.
pub fn parallel_transport(chart: &MetricChart, i0: &[f64], curve: &Curve, steps: usize) -> Result<TransportResult, ScaleError> {
    let n = chart.dimension();
    let d = n + 2;
    if i0.len() != d {
        return Err(ScaleError::Invalid(format!("initial tractor needs {d} slots, got {}", i0.len())));
    }
    if steps == 0 || curve.segments() == 0 {
        return Err(ScaleError::Invalid("empty curve or zero steps".into()));
    }
    if let Curve::Polyline(v) = curve {
        if let Some(bad) = v.iter().find(|p| p.len() != n) {
            return Err(ScaleError::CurveDimension { expected: n, found: bad.len() });
        }
    }
    if let Curve::Parametric(e) = curve {
        if e.len() != n {
            return Err(ScaleError::CurveDimension { expected: n, found: e.len() });
        }
    }
    let params = chart.parameter_values();
    let rhs = |seg: usize, f: f64, i: &[f64]| -> Result<Vec<f64>, ScaleError> {
        let (p, vel) = curve.eval(seg, f, &params)?;
        if !chart.contains(&p) {
            return Err(ScaleError::OutsideDomain { t: seg as f64 + f, point: p });
        }
        let gamma = connection_at(chart, &p)?;
        let mut out = vec![0.0; d];
        for a in 0..n {
            if vel[a] == 0.0 {
                continue;
            }
            for r in 0..d {
                let row = &gamma[(a * d + r) * d..(a * d + r + 1) * d];
                out[r] -= vel[a] * row.iter().zip(i).map(|(x, y)| x * y).sum::<f64>();
            }
        }
        Ok(out)
    };
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let total = curve.segments();
    let h = 1.0 / steps as f64;
    let (p0, _) = curve.eval(0, 0.0, &params)?;
    if !chart.contains(&p0) {
        return Err(ScaleError::OutsideDomain { t: 0.0, point: p0 });
    }
    let h0 = tractor_norm_at(chart, &p0, i0)?;
    let mut state = i0.to_vec();
    let mut drift: f64 = 0.0;
    for seg in 0..total {
        for k in 0..steps {
            let s = k as f64 * h;
            let next = if k + 1 == steps { 1.0 } else { s + h };
            let k1 = rhs(seg, s, &state)?;
            let k2 = rhs(seg, s + 0.5 * h, &axpy(&state, &k1, 0.5 * h))?;
            let k3 = rhs(seg, s + 0.5 * h, &axpy(&state, &k2, 0.5 * h))?;
            let k4 = rhs(seg, next, &axpy(&state, &k3, h))?;
            for r in 0..d {
                state[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
            }
            let (p, _) = curve.eval(seg, next, &params)?;
            drift = drift.max((tractor_norm_at(chart, &p, &state)? - h0).abs());
        }
    }
    let (p1, _) = curve.eval(total - 1, 1.0, &params)?;
    let closed = p0.iter().zip(&p1).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    Ok(TransportResult {
        curve: curve.describe(),
        steps,
        start: i0.to_vec(),
        closure_deviation: closed.then(|| i0.iter().zip(&state).map(|(a, b)| a - b).collect()),
        end: state,
        h_drift: drift,
        parameter_length: total as f64,
    })
}
