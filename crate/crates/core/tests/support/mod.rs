//! High-precision finite-difference oracles.
//!
//! Expressions are re-evaluated in MPFR from the public AST, and derivatives
//! come from a fourth-order central stencil with step `STEP` on a memoised
//! lattice around the base point. Curvature is rebuilt from those values by
//! its textbook formulas, one finite difference per derivative level.

#![allow(dead_code)]

pub mod charts;

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use confein_core::chart::MetricChart;
use confein_core::expr::{BinOp, Expr, Func};
use rug::ops::Pow;
use rug::Float;

pub const PREC: u32 = 160;
pub const STEP: f64 = 1e-4;

pub fn mp(x: f64) -> Float {
    Float::with_val(PREC, x)
}

pub fn eval_mp(e: &Expr, point: &[Float], params: &[f64]) -> Float {
    match e {
        Expr::Const(c) => mp(*c),
        Expr::Coord { index, .. } => point[*index].clone(),
        Expr::Param { index, .. } => mp(params[*index]),
        Expr::Neg(a) => -eval_mp(a, point, params),
        Expr::Binary { op, lhs, rhs } => {
            let a = eval_mp(lhs, point, params);
            match (op, rhs.as_ref()) {
                (BinOp::Pow, Expr::Const(k)) if k.fract() == 0.0 => a.pow(*k as i32),
                _ => {
                    let b = eval_mp(rhs, point, params);
                    match op {
                        BinOp::Add => a + b,
                        BinOp::Sub => a - b,
                        BinOp::Mul => a * b,
                        BinOp::Div => a / b,
                        BinOp::Pow => a.pow(b),
                    }
                }
            }
        }
        Expr::Call { func, arg } => {
            let x = eval_mp(arg, point, params);
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Log => x.ln(),
                Func::Sqrt => x.sqrt(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Atan => x.atan(),
            }
        }
    }
}

type Cache = RefCell<HashMap<Vec<i32>, Rc<Vec<Float>>>>;

fn memo(cache: &Cache, o: &[i32], f: impl FnOnce() -> Vec<Float>) -> Rc<Vec<Float>> {
    if let Some(v) = cache.borrow().get(o) {
        return v.clone();
    }
    let v = Rc::new(f());
    cache.borrow_mut().insert(o.to_vec(), v.clone());
    v
}

/// Lattice `base + STEP·o` with integer offsets `o`.
pub struct Lattice {
    pub base: Vec<Float>,
    pub h: Float,
}

impl Lattice {
    pub fn new(base: &[f64]) -> Lattice {
        Lattice { base: base.iter().map(|&x| mp(x)).collect(), h: mp(STEP) }
    }

    pub fn point(&self, o: &[i32]) -> Vec<Float> {
        self.base.iter().zip(o).map(|(x, &k)| Float::with_val(PREC, x + Float::with_val(PREC, &self.h * k))).collect()
    }

    /// `∂_axis` of a vector-valued lattice function at `o`.
    pub fn diff(&self, o: &[i32], axis: usize, f: impl Fn(&[i32]) -> Rc<Vec<Float>>) -> Vec<Float> {
        let at = |k: i32| {
            let mut p = o.to_vec();
            p[axis] += k;
            f(&p)
        };
        let (m2, m1, p1, p2) = (at(-2), at(-1), at(1), at(2));
        let denom = Float::with_val(PREC, &self.h * 12);
        (0..m1.len())
            .map(|i| {
                let s = Float::with_val(PREC, &m2[i] - &p2[i]) + Float::with_val(PREC, &p1[i] - &m1[i]) * 8;
                s / &denom
            })
            .collect()
    }
}

/// Mixed partial `∂^α f` at the base point, for a scalar expression.
pub struct ScalarOracle<'a> {
    expr: &'a Expr,
    params: &'a [f64],
    lattice: Lattice,
    values: Cache,
}

impl<'a> ScalarOracle<'a> {
    pub fn new(expr: &'a Expr, params: &'a [f64], base: &[f64]) -> ScalarOracle<'a> {
        ScalarOracle { expr, params, lattice: Lattice::new(base), values: RefCell::new(HashMap::new()) }
    }

    fn value(&self, o: &[i32]) -> Rc<Vec<Float>> {
        memo(&self.values, o, || vec![eval_mp(self.expr, &self.lattice.point(o), self.params)])
    }

    fn partial_at(&self, o: &[i32], alpha: &[u8]) -> Rc<Vec<Float>> {
        match alpha.iter().position(|&k| k > 0) {
            None => self.value(o),
            Some(axis) => {
                let mut rest = alpha.to_vec();
                rest[axis] -= 1;
                Rc::new(self.lattice.diff(o, axis, |p| self.partial_at(p, &rest)))
            }
        }
    }

    pub fn partial(&self, alpha: &[u8]) -> f64 {
        let o = vec![0; alpha.len()];
        self.partial_at(&o, alpha)[0].to_f64()
    }
}

fn zeros(len: usize) -> Vec<Float> {
    vec![mp(0.0); len]
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(m: &[Float], n: usize) -> Vec<Float> {
    let mut a: Vec<Float> = m.to_vec();
    let mut inv = zeros(n * n);
    for i in 0..n {
        inv[i * n + i] = mp(1.0);
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].clone().abs().partial_cmp(&a[j * n + col].clone().abs()).unwrap())
            .unwrap();
        for k in 0..n {
            a.swap(col * n + k, piv * n + k);
            inv.swap(col * n + k, piv * n + k);
        }
        let d = a[col * n + col].clone();
        for k in 0..n {
            a[col * n + k] /= &d;
            inv[col * n + k] /= &d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            for k in 0..n {
                let (x, y) = (Float::with_val(PREC, &f * &a[col * n + k]), Float::with_val(PREC, &f * &inv[col * n + k]));
                a[r * n + k] -= x;
                inv[r * n + k] -= y;
            }
        }
    }
    inv
}

/// Curvature stack rebuilt from finite differences of the metric.
pub struct CurvatureOracle<'c> {
    chart: &'c MetricChart,
    exprs: Vec<Expr>,
    params: Vec<f64>,
    pub n: usize,
    lattice: Lattice,
    metric: Cache,
    gamma: Cache,
    schouten: Cache,
    cotton: Cache,
}

/// Oracle values rounded to `f64`, laid out like the jet tensors.
#[derive(Debug, Clone)]
pub struct OracleStack {
    pub christoffel: Vec<f64>,
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub schouten: Vec<f64>,
    pub weyl: Vec<f64>,
    pub cotton: Vec<f64>,
    pub bach: Vec<f64>,
}

impl<'c> CurvatureOracle<'c> {
    pub fn new(chart: &'c MetricChart, base: &[f64]) -> CurvatureOracle<'c> {
        let n = chart.dimension();
        let desc = chart.to_description();
        let mut exprs = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let text = if b <= a { &desc.metric[a][b] } else { &desc.metric[b][a] };
                exprs.push(chart.parse(text).expect("metric entry parses"));
            }
        }
        let fresh = || RefCell::new(HashMap::new());
        CurvatureOracle {
            chart,
            exprs,
            params: chart.parameter_values(),
            n,
            lattice: Lattice::new(base),
            metric: fresh(),
            gamma: fresh(),
            schouten: fresh(),
            cotton: fresh(),
        }
    }

    pub fn chart(&self) -> &MetricChart {
        self.chart
    }

    fn g(&self, o: &[i32]) -> Rc<Vec<Float>> {
        memo(&self.metric, o, || {
            let p = self.lattice.point(o);
            self.exprs.iter().map(|e| eval_mp(e, &p, &self.params)).collect()
        })
    }

    /// `Γ^a_bc`, index `[a, b, c]`.
    fn christoffel(&self, o: &[i32]) -> Rc<Vec<Float>> {
        memo(&self.gamma, o, || {
            let n = self.n;
            let g = self.g(o);
            let ginv = inverse(&g, n);
            let dg: Vec<Vec<Float>> = (0..n).map(|e| self.lattice.diff(o, e, |p| self.g(p))).collect();
            let mut out = zeros(n * n * n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut s = mp(0.0);
                        for d in 0..n {
                            let t = Float::with_val(PREC, &dg[b][d * n + c] + &dg[c][b * n + d]) - &dg[d][b * n + c];
                            s += Float::with_val(PREC, &ginv[a * n + d] * &t);
                        }
                        out[(a * n + b) * n + c] = s / 2;
                    }
                }
            }
            out
        })
    }

    /// `R_ab^c_d`, index `[a, b, c, d]`.
    fn riemann(&self, o: &[i32]) -> Vec<Float> {
        let n = self.n;
        let gam = self.christoffel(o);
        let dgam: Vec<Vec<Float>> = (0..n).map(|e| self.lattice.diff(o, e, |p| self.christoffel(p))).collect();
        let gi = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let mut out = zeros(n * n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut s = Float::with_val(PREC, &dgam[a][gi(c, b, d)] - &dgam[b][gi(c, a, d)]);
                        for e in 0..n {
                            s += Float::with_val(PREC, &gam[gi(c, a, e)] * &gam[gi(e, b, d)]);
                            s -= Float::with_val(PREC, &gam[gi(c, b, e)] * &gam[gi(e, a, d)]);
                        }
                        out[((a * n + b) * n + c) * n + d] = s;
                    }
                }
            }
        }
        out
    }

    /// `(Ric, P, J)` at `o`.
    fn ricci_schouten(&self, o: &[i32]) -> (Vec<Float>, Vec<Float>, Float) {
        let n = self.n;
        let r = self.riemann(o);
        let g = self.g(o);
        let ginv = inverse(&g, n);
        let mut ric = zeros(n * n);
        for b in 0..n {
            for d in 0..n {
                let mut s = mp(0.0);
                for c in 0..n {
                    s += &r[((c * n + b) * n + c) * n + d];
                }
                ric[b * n + d] = s;
            }
        }
        let mut scal = mp(0.0);
        for i in 0..n * n {
            scal += Float::with_val(PREC, &ginv[i] * &ric[i]);
        }
        let nf = n as f64;
        let j = scal / (2.0 * (nf - 1.0));
        let p = (0..n * n).map(|i| (Float::with_val(PREC, &ric[i] - Float::with_val(PREC, &j * &g[i]))) / (nf - 2.0)).collect();
        (ric, p, j)
    }

    fn p(&self, o: &[i32]) -> Rc<Vec<Float>> {
        memo(&self.schouten, o, || self.ricci_schouten(o).1)
    }

    /// `∇_e T_bc` for a lattice 2-tensor, index `[e, b, c]`.
    fn nabla2(&self, o: &[i32], t: &[Float], f: impl Fn(&[i32]) -> Rc<Vec<Float>>) -> Vec<Float> {
        let n = self.n;
        let gam = self.christoffel(o);
        let dt: Vec<Vec<Float>> = (0..n).map(|e| self.lattice.diff(o, e, &f)).collect();
        let mut out = zeros(n * n * n);
        for e in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = dt[e][b * n + c].clone();
                    for k in 0..n {
                        s -= Float::with_val(PREC, &gam[(k * n + e) * n + b] * &t[k * n + c]);
                        s -= Float::with_val(PREC, &gam[(k * n + e) * n + c] * &t[b * n + k]);
                    }
                    out[(e * n + b) * n + c] = s;
                }
            }
        }
        out
    }

    /// `A_abc = ∇_b P_ca − ∇_c P_ba`.
    fn a(&self, o: &[i32]) -> Rc<Vec<Float>> {
        memo(&self.cotton, o, || {
            let n = self.n;
            let p = self.p(o);
            let dp = self.nabla2(o, &p, |q| self.p(q));
            let mut out = zeros(n * n * n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        out[(a * n + b) * n + c] = Float::with_val(PREC, &dp[(b * n + c) * n + a] - &dp[(c * n + b) * n + a]);
                    }
                }
            }
            out
        })
    }

    /// Everything at the base point.
    pub fn evaluate(&self) -> OracleStack {
        let n = self.n;
        let o = vec![0; n];
        let g = self.g(&o);
        let ginv = inverse(&g, n);
        let gam = self.christoffel(&o);
        let riem = self.riemann(&o);
        let (ric, p, _) = self.ricci_schouten(&o);

        // R_abcd = g_ce R_ab^e_d
        let idx4 = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        let mut weyl = zeros(n * n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut s = mp(0.0);
                        for e in 0..n {
                            s += Float::with_val(PREC, &g[c * n + e] * &riem[idx4(a, b, e, d)]);
                        }
                        // C = R − 2g_{c[a}P_{b]d} − 2g_{d[b}P_{a]c}
                        s -= Float::with_val(PREC, &g[c * n + a] * &p[b * n + d]);
                        s += Float::with_val(PREC, &g[c * n + b] * &p[a * n + d]);
                        s -= Float::with_val(PREC, &g[d * n + b] * &p[a * n + c]);
                        s += Float::with_val(PREC, &g[d * n + a] * &p[b * n + c]);
                        weyl[idx4(a, b, c, d)] = s;
                    }
                }
            }
        }

        let a = self.a(&o);
        // ∇_d A_acb: partials plus three Christoffel corrections.
        let da: Vec<Vec<Float>> = (0..n).map(|e| self.lattice.diff(&o, e, |q| self.a(q))).collect();
        let gi = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let grad_a = |d: usize, x: usize, y: usize, z: usize| {
            let mut s = da[d][gi(x, y, z)].clone();
            for k in 0..n {
                s -= Float::with_val(PREC, &gam[gi(k, d, x)] * &a[gi(k, y, z)]);
                s -= Float::with_val(PREC, &gam[gi(k, d, y)] * &a[gi(x, k, z)]);
                s -= Float::with_val(PREC, &gam[gi(k, d, z)] * &a[gi(x, y, k)]);
            }
            s
        };
        let mut p_up = zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut s = mp(0.0);
                for k in 0..n {
                    for l in 0..n {
                        s += Float::with_val(PREC, &ginv[i * n + k] * &ginv[j * n + l]) * &p[k * n + l];
                    }
                }
                p_up[i * n + j] = s;
            }
        }
        let mut bach = zeros(n * n);
        for x in 0..n {
            for y in 0..n {
                let mut s = mp(0.0);
                for c in 0..n {
                    for d in 0..n {
                        if !ginv[c * n + d].is_zero() {
                            s += Float::with_val(PREC, &ginv[c * n + d] * grad_a(d, x, c, y));
                        }
                        s += Float::with_val(PREC, &p_up[d * n + c] * &weyl[idx4(d, x, c, y)]);
                    }
                }
                bach[x * n + y] = s;
            }
        }

        let f = |v: &[Float]| v.iter().map(Float::to_f64).collect::<Vec<f64>>();
        OracleStack {
            christoffel: f(&gam),
            riemann: f(&riem),
            ricci: f(&ric),
            schouten: f(&p),
            weyl: f(&weyl),
            cotton: f(&a),
            bach: f(&bach),
        }
    }
}

/// Largest violation of `|x − y| ≤ rel·max(|y|, floor·max|y|) + abs`, as a
/// ratio to the allowance; `≤ 1` passes.
pub fn worst_ratio(actual: &[f64], oracle: &[f64], rel: f64, floor: f64, abs: f64) -> f64 {
    assert_eq!(actual.len(), oracle.len());
    let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    actual
        .iter()
        .zip(oracle)
        .map(|(x, y)| (x - y).abs() / (rel * y.abs().max(floor * scale) + abs))
        .fold(0.0, f64::max)
}

/// Compare every tensor of a jet stack with the oracle; returns the worst
/// `(name, ratio)`.
pub fn compare_stack(stack: &confein_core::curvature::CurvatureStack, oracle: &OracleStack, rel: f64) -> Vec<(&'static str, f64)> {
    let pairs: [(&'static str, &[f64], &[f64]); 7] = [
        ("christoffel", &stack.christoffel.data, &oracle.christoffel),
        ("riemann", &stack.riemann.data, &oracle.riemann),
        ("ricci", &stack.ricci.data, &oracle.ricci),
        ("schouten", &stack.schouten.data, &oracle.schouten),
        ("weyl", &stack.weyl.data, &oracle.weyl),
        ("cotton", &stack.cotton.as_ref().expect("cotton at order 4").data, &oracle.cotton),
        ("bach", &stack.bach.as_ref().expect("bach at order 4").data, &oracle.bach),
    ];
    // Tensors that vanish identically are compared against an absolute floor
    // tied to the Riemann scale of the point.
    let r_scale = oracle.riemann.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    pairs.iter().map(|(name, a, o)| (*name, worst_ratio(a, o, rel, 1e-6, 1e-10 * (1.0 + r_scale)))).collect()
}
