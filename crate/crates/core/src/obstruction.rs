//! Conformally-Einstein obstructions at a point.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::curvature::{raise_all, CurvatureJets, CurvatureStack};
use crate::jet::Jet;
use crate::linalg;
use crate::tensor::{JetTensor, Slot, TensorValue};
use crate::tractor::{self, BoxW, StandardTractor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObstructionError {
    #[error("not weakly generic: det L = {det:e} below threshold {threshold:e}")]
    NotWeaklyGeneric { det: f64, threshold: f64 },
    #[error("operation needs dimension {needed}, chart has {found}")]
    Dimension { needed: usize, found: usize },
    #[error("operation needs metric jets of order {needed}, have {found}")]
    Order { needed: usize, found: usize },
    #[error("kernel candidate is degenerate: {0}")]
    Degenerate(String),
}

fn require_order(curv: &CurvatureJets, needed: usize) -> Result<(), ObstructionError> {
    if curv.order() < needed {
        return Err(ObstructionError::Order { needed, found: curv.order() });
    }
    Ok(())
}

fn raise_vec(v: &[f64], ginv: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|a| (0..n).map(|b| ginv[a * n + b] * v[b]).sum()).collect()
}

fn lower_vec(v: &[f64], g: &[f64]) -> Vec<f64> {
    raise_vec(v, g)
}

/// `σ A^c_ab + μ^d C_ab^c_d` with slots `(Up c, Down a, Down b)`.
pub fn c_space_residual(stack: &CurvatureStack, i: &StandardTractor) -> TensorValue {
    let n = stack.n;
    let a_t = stack.cotton.as_ref().expect("needs the Cotton tensor");
    let mu_up = raise_vec(&i.mu, &stack.ginv);
    // lower form: σ A_cab + μ^d C_abcd
    let lower = TensorValue::from_fn(n, &[Slot::Down; 3], |x| {
        let (c, a, b) = (x[0], x[1], x[2]);
        let mut s = i.sigma * a_t.get(&[c, a, b]);
        for d in 0..n {
            s += mu_up[d] * stack.weyl.get(&[a, b, c, d]);
        }
        s
    });
    TensorValue::from_fn(n, &[Slot::Up, Slot::Down, Slot::Down], |x| {
        (0..n).map(|e| stack.ginv[x[0] * n + e] * lower.get(&[e, x[1], x[2]])).sum()
    })
}

/// `Ω_ab^C_D I^D` from the assembled curvature matrix.
pub fn omega_contraction(omega: &TensorValue, i_slots: &[f64]) -> TensorValue {
    tractor::contract_last(omega, i_slots)
}

/// `I^D ∇_e Ω_ab^C_D`.
pub fn d_residual(grad_omega: &TensorValue, i_slots: &[f64]) -> TensorValue {
    tractor::contract_last(grad_omega, i_slots)
}

/// `B_ab + (n−4) K^d K^c C_dabc`.
pub fn b_residual(stack: &CurvatureStack, k_up: &[f64]) -> TensorValue {
    let n = stack.n;
    let b = stack.bach.as_ref().expect("needs the Bach tensor");
    let c4 = n as f64 - 4.0;
    TensorValue::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let mut s = 0.0;
        if c4 != 0.0 {
            for d in 0..n {
                for c in 0..n {
                    s += k_up[d] * k_up[c] * stack.weyl.get(&[d, x[0], x[1], c]);
                }
            }
        }
        b.get(x) + c4 * s
    })
}

/// `[C]` in its `K` form: `A_dab + K^c C_cdab` (slots Down³).
pub fn c_residual_with_k(stack: &CurvatureStack, k_up: &[f64]) -> TensorValue {
    let n = stack.n;
    let a_t = stack.cotton.as_ref().expect("needs the Cotton tensor");
    TensorValue::from_fn(n, &[Slot::Down; 3], |x| {
        let (d, a, b) = (x[0], x[1], x[2]);
        a_t.get(x) + (0..n).map(|c| k_up[c] * stack.weyl.get(&[c, d, a, b])).sum::<f64>()
    })
}

/// Rows of the `(Ω, ∇Ω)` map: one per `(a<b, C)` then `(e, a<b, C)`; columns `D`.
pub fn rank_matrix(omega: &TensorValue, grad_omega: &TensorValue) -> DMatrix<f64> {
    let n = omega.n;
    let d = n + 2;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let rows = pairs.len() * d * (1 + n);
    let mut m = DMatrix::zeros(rows, d);
    let mut r = 0;
    for &(a, b) in &pairs {
        for c in 0..d {
            for col in 0..d {
                m[(r, col)] = omega.get(&[a, b, c, col]);
            }
            r += 1;
        }
    }
    for e in 0..n {
        for &(a, b) in &pairs {
            for c in 0..d {
                for col in 0..d {
                    m[(r, col)] = grad_omega.get(&[e, a, b, c, col]);
                }
                r += 1;
            }
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTest {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Singular values above this count toward the rank.
    pub threshold: f64,
    /// Orthonormal kernel basis, as upper tractor slot vectors.
    pub kernel: Vec<Vec<f64>>,
    /// `rank ≤ n + 1`, i.e. all skew invariants vanish.
    pub skew_invariants_vanish: bool,
}

/// Rank of the `(Ω, ∇Ω)` map. A singular value counts when it exceeds
/// `tol · max(σ_max, floor)`; `floor` keeps roundoff-level matrices at rank 0.
pub fn rank_skew_test(omega: &TensorValue, grad_omega: &TensorValue, tol: f64, floor: f64) -> RankTest {
    let n = omega.n;
    let m = rank_matrix(omega, grad_omega);
    let smax = linalg::singular_values(&m).first().copied().unwrap_or(0.0);
    let threshold = tol * smax.max(floor);
    let (rank, singular_values, kernel) = linalg::rank_and_kernel(&m, threshold);
    RankTest { rank, singular_values, threshold, kernel, skew_invariants_vanish: rank <= n + 1 }
}

/// Jets of the `(Ω, ∇Ω)` matrix, row layout as in [`rank_matrix`].
fn rank_matrix_jets(omega: &JetTensor, grad_omega: &JetTensor) -> Vec<Vec<Jet>> {
    let n = omega.n();
    let d = n + 2;
    let order = grad_omega.order();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut rows = Vec::new();
    for &(a, b) in &pairs {
        for c in 0..d {
            rows.push((0..d).map(|col| omega.get(&[a, b, c, col]).truncate(order)).collect());
        }
    }
    for e in 0..n {
        for &(a, b) in &pairs {
            for c in 0..d {
                rows.push((0..d).map(|col| grad_omega.get(&[e, a, b, c, col]).clone()).collect());
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCheck {
    /// Kernel tractor normalised to `σ = 1`, upper slots.
    pub tractor: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `max_a ‖∇_aI − α_aI − β_aX‖` (raw components).
    pub residual: f64,
    /// `max_a ‖∇_aI‖`, for scale.
    pub gradient_norm: f64,
}

/// Extend the kernel direction to a field by solving the `(Ω, ∇Ω)` system
/// with `σ = 1` in least squares at jet level, then project `∇_aI` onto
/// `span{I, X}`. Needs metric jets of order ≥ 5.
pub fn candidate_parallel_check(curv: &CurvatureJets) -> Result<CandidateCheck, ObstructionError> {
    require_order(curv, 5)?;
    let n = curv.n();
    let d = n + 2;
    let conn = tractor::coupled_connection(curv);
    // the field needs one derivative of ∇Ω
    let omega = tractor::tractor_curvature(curv).truncate(2);
    let grad = conn.nabla(&omega);
    let rows = rank_matrix_jets(&omega, &grad);
    let order = grad.order();
    // M_r v = −m_0 in least squares: (M_rᵀM_r) v = −M_rᵀ m_0
    let k = d - 1;
    let mut normal = vec![Jet::zero(n, order); k * k];
    let mut rhs = vec![Jet::zero(n, order); k];
    for row in &rows {
        for i in 0..k {
            rhs[i].add_product(&-&row[1 + i], &row[0]);
            for j in 0..k {
                normal[i * k + j].add_product(&row[1 + i], &row[1 + j]);
            }
        }
    }
    let normal_vals: Vec<f64> = normal.iter().map(Jet::value).collect();
    let nmax = normal_vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let det = linalg::det(&normal_vals, k);
    if !(det.abs() > (1e-12 * nmax).powi(k as i32)) || nmax == 0.0 {
        return Err(ObstructionError::Degenerate("normal equations are singular".into()));
    }
    let inv = linalg::jet_inverse(&normal, k).ok_or_else(|| ObstructionError::Degenerate("singular".into()))?;
    let mut field = vec![Jet::constant(n, order, 1.0)];
    for i in 0..k {
        let mut acc = Jet::zero(n, order);
        for j in 0..k {
            acc.add_product(&inv[i * k + j], &rhs[j]);
        }
        field.push(acc);
    }
    let i_field = JetTensor::from_fn(n, &[Slot::TractorUp], |x| field[x[0]].clone());
    let grad_i = conn.nabla(&i_field).value();
    let i_val: Vec<f64> = field.iter().map(Jet::value).collect();
    let mut x = vec![0.0; d];
    x[d - 1] = 1.0;
    let basis = DMatrix::from_fn(d, 2, |r, c| if c == 0 { i_val[r] } else { x[r] });
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut residual: f64 = 0.0;
    let mut gradient_norm: f64 = 0.0;
    let svd = basis.clone().svd(true, true);
    for a in 0..n {
        let target = nalgebra::DVector::from_fn(d, |r, _| grad_i.get(&[a, r]));
        let coef = svd.solve(&target, 1e-14).map_err(|e| ObstructionError::Degenerate(e.to_string()))?;
        let res = &target - &basis * &coef;
        alpha.push(coef[0]);
        beta.push(coef[1]);
        residual = residual.max(res.norm());
        gradient_norm = gradient_norm.max(target.norm());
    }
    Ok(CandidateCheck { tractor: i_val, alpha, beta, residual, gradient_norm })
}

/// `L^a_b = C^acde C_bcde`, its adjugate and `D^acde = −L̃^a_b C^bcde`.
#[derive(Debug, Clone)]
pub struct WeaklyGenericCheck {
    pub n: usize,
    pub l: Vec<f64>,
    pub det: f64,
    pub adjugate: Vec<f64>,
    /// `D^acde`, all indices up.
    pub d: TensorValue,
    pub min_singular_value: f64,
    pub operator_norm: f64,
    pub threshold: f64,
    /// `‖C‖ ≤ WEYL_FLOOR·‖R‖`: the Weyl tensor is roundoff and `L` carries no information.
    pub weyl_negligible: bool,
    pub weakly_generic: bool,
}

/// Relative size below which a computed Weyl tensor is treated as zero.
pub const WEYL_FLOOR: f64 = 1e-10;

fn l_matrix<T: linalg::Ring>(c_up: &dyn Fn(&[usize]) -> T, c_low: &dyn Fn(&[usize]) -> T, n: usize) -> Vec<T> {
    let mut l = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut acc: Option<T> = None;
            for c in 0..n {
                for d in 0..n {
                    for e in 0..n {
                        let term = c_up(&[a, c, d, e]).mul(&c_low(&[b, c, d, e]));
                        acc = Some(match acc {
                            None => term,
                            Some(s) => s.add(&term),
                        });
                    }
                }
            }
            l.push(acc.unwrap());
        }
    }
    l
}

fn d_tensor<T: linalg::Ring>(adj: &[T], c_up: &dyn Fn(&[usize]) -> T, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n.pow(4));
    for a in 0..n {
        for c in 0..n {
            for d in 0..n {
                for e in 0..n {
                    let mut acc: Option<T> = None;
                    for b in 0..n {
                        let term = adj[a * n + b].mul(&c_up(&[b, c, d, e]));
                        acc = Some(match acc {
                            None => term,
                            Some(s) => s.add(&term),
                        });
                    }
                    out.push(acc.unwrap().neg());
                }
            }
        }
    }
    out
}

/// Weak genericity at a point: `|det L| > (1e-6 ‖L‖_op)^n` and a Weyl
/// tensor above roundoff.
pub fn weakly_generic_check(stack: &CurvatureStack) -> WeaklyGenericCheck {
    let n = stack.n;
    let ginv = &stack.ginv;
    let c_up_t = raise_values(&stack.weyl, ginv);
    let c_up = |i: &[usize]| c_up_t.get(i);
    let c_low = |i: &[usize]| stack.weyl.get(i);
    let l = l_matrix(&c_up, &c_low, n);
    let det = linalg::det(&l, n);
    let adjugate = linalg::adjugate(&l, n);
    let d = TensorValue { data: d_tensor(&adjugate, &c_up, n), ..TensorValue::zeros(n, &[Slot::Up; 4]) };
    let sv = linalg::singular_values(&linalg::to_dmatrix(&l, n, n));
    let operator_norm = sv.first().copied().unwrap_or(0.0);
    let threshold = (1e-6 * operator_norm).powi(n as i32);
    let weyl_negligible = stack.norm(&stack.weyl) <= WEYL_FLOOR * stack.riemann_norm();
    WeaklyGenericCheck {
        weyl_negligible,
        n,
        det,
        adjugate,
        d,
        min_singular_value: sv.last().copied().unwrap_or(0.0),
        operator_norm,
        threshold,
        weakly_generic: !weyl_negligible && operator_norm > 0.0 && det.abs() > threshold,
        l,
    }
}

fn raise_values(t: &TensorValue, ginv: &[f64]) -> TensorValue {
    let n = t.n;
    let mut data = t.data.clone();
    let rank = t.rank();
    for k in 0..rank {
        let inner = n.pow((rank - k - 1) as u32);
        let outer = n.pow(k as u32);
        let mut out = vec![0.0; data.len()];
        for o in 0..outer {
            for r in 0..n {
                for c in 0..n {
                    let w = ginv[r * n + c];
                    if w == 0.0 {
                        continue;
                    }
                    for s in 0..inner {
                        out[(o * n + r) * inner + s] += w * data[(o * n + c) * inner + s];
                    }
                }
            }
        }
        data = out;
    }
    TensorValue { data, slots: vec![Slot::Up; rank], ..t.clone() }
}

/// `K^e = det(L)^{-1} D^edab A_dab` (upper index).
pub fn conformal_k(check: &WeaklyGenericCheck, stack: &CurvatureStack) -> Result<Vec<f64>, ObstructionError> {
    if !check.weakly_generic {
        return Err(ObstructionError::NotWeaklyGeneric { det: check.det, threshold: check.threshold });
    }
    let da = d_dot_a(&check.d, stack.cotton.as_ref().expect("needs the Cotton tensor"));
    Ok(da.iter().map(|v| v / check.det).collect())
}

/// `(D·A)^e = D^edab A_dab`.
pub fn d_dot_a(d: &TensorValue, a: &TensorValue) -> Vec<f64> {
    let n = d.n;
    (0..n)
        .map(|e| {
            let mut s = 0.0;
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        s += d.get(&[e, x, y, z]) * a.get(&[x, y, z]);
                    }
                }
            }
            s
        })
        .collect()
}

/// Jet-level weak-genericity data for `G` and the exactness of `K`.
pub struct GenericJets {
    pub det: Jet,
    /// `(D·A)_e`, lower index.
    pub d_dot_a: JetTensor,
}

/// Jets carry one order, enough for `∇(D·A)`, `∂ det L` and `curl K`.
pub fn generic_jets(curv: &CurvatureJets) -> Result<GenericJets, ObstructionError> {
    require_order(curv, 4)?;
    let n = curv.n();
    let weyl = curv.weyl.truncate(1);
    let c_up_t = raise_all(&weyl, &curv.metric.ginv.truncate(1));
    let c_up = |i: &[usize]| c_up_t.get(i).clone();
    let c_low = |i: &[usize]| weyl.get(i).clone();
    let l = l_matrix(&c_up, &c_low, n);
    let det = linalg::det(&l, n);
    let adj = linalg::adjugate(&l, n);
    let d = d_tensor(&adj, &c_up, n);
    let a_t = curv.cotton.as_ref().unwrap().truncate(1);
    let order = 1;
    let da_up: Vec<Jet> = (0..n)
        .map(|e| {
            let mut s = Jet::zero(n, order);
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        s.add_product(&d[((e * n + x) * n + y) * n + z], a_t.get(&[x, y, z]));
                    }
                }
            }
            s
        })
        .collect();
    let d_dot_a = JetTensor::from_fn(n, &[Slot::Down], |i| {
        let mut s = Jet::zero(n, order);
        for e in 0..n {
            s.add_product(curv.metric.g.get(&[i[0], e]), &da_up[e]);
        }
        s
    });
    Ok(GenericJets { det, d_dot_a })
}

/// `G_ab` and diagnostics.
#[derive(Debug, Clone)]
pub struct GInvariant {
    /// Symmetric trace-free part.
    pub g: TensorValue,
    /// Norm of the antisymmetric remainder of the bracket.
    pub antisymmetric_norm: f64,
    /// `|g^ab G_ab|` of the returned tensor.
    pub trace: f64,
    pub det_l: f64,
    pub d_dot_a_norm: f64,
}

/// `G = TF_sym[det L² P − det L ∇_a(D·A)_b + ∂_a det L (D·A)_b + (D·A)_a(D·A)_b]`.
pub fn g_invariant(curv: &CurvatureJets) -> Result<GInvariant, ObstructionError> {
    g_invariant_from(curv, &generic_jets(curv)?)
}

pub fn g_invariant_from(curv: &CurvatureJets, gj: &GenericJets) -> Result<GInvariant, ObstructionError> {
    let n = curv.n();
    let stack = curv.stack();
    let grad_da = curv.connection.nabla(&gj.d_dot_a).value();
    let da: Vec<f64> = (0..n).map(|a| gj.d_dot_a.get(&[a]).value()).collect();
    let det = gj.det.value();
    let ddet: Vec<f64> = (0..n).map(|a| gj.det.partial(a).value()).collect();
    let raw = TensorValue::from_fn(n, &[Slot::Down, Slot::Down], |i| {
        let (a, b) = (i[0], i[1]);
        det * det * stack.schouten.get(i) - det * grad_da.get(&[a, b]) + ddet[a] * da[b] + da[a] * da[b]
    });
    let sym = TensorValue::from_fn(n, &[Slot::Down, Slot::Down], |i| 0.5 * (raw.get(i) + raw.get(&[i[1], i[0]])));
    let anti = TensorValue::from_fn(n, &[Slot::Down, Slot::Down], |i| 0.5 * (raw.get(i) - raw.get(&[i[1], i[0]])));
    let tr: f64 = (0..n * n).map(|k| stack.ginv[k] * sym.data[k]).sum();
    let mut g = sym;
    for k in 0..n * n {
        g.data[k] -= tr / n as f64 * stack.g[k];
    }
    let trace = (0..n * n).map(|k| stack.ginv[k] * g.data[k]).sum::<f64>().abs();
    let da_t = TensorValue { data: da, ..TensorValue::zeros(n, &[Slot::Down]) };
    Ok(GInvariant { antisymmetric_norm: stack.norm(&anti), trace, det_l: det, d_dot_a_norm: stack.norm(&da_t), g })
}

/// Curl of the jet-level `K_e = (D·A)_e / det L`, with `‖∇K‖` for scale.
pub fn k_curl(curv: &CurvatureJets) -> Result<(f64, f64), ObstructionError> {
    k_curl_from(curv, &generic_jets(curv)?)
}

pub fn k_curl_from(curv: &CurvatureJets, gj: &GenericJets) -> Result<(f64, f64), ObstructionError> {
    let n = curv.n();
    let inv = gj.det.try_recip().map_err(|_| ObstructionError::NotWeaklyGeneric { det: 0.0, threshold: 0.0 })?;
    let k = gj.d_dot_a.map(|j| j * &inv);
    let grad = curv.connection.nabla(&k).value();
    let stack = curv.stack();
    let curl = TensorValue::from_fn(n, &[Slot::Down, Slot::Down], |i| grad.get(i) - grad.get(&[i[1], i[0]]));
    Ok((stack.norm(&curl), stack.norm(&grad)))
}

/// `⧠W` bottom slot and structure diagnostics.
#[derive(Debug, Clone)]
pub struct B6Extraction {
    /// `B^(6)_eb = ⧠W(X, Z_b, X, Z_e)`.
    pub b6: TensorValue,
    pub off_slot_norm: f64,
    pub scale: f64,
    pub w_norm: f64,
    /// Sign applied to `¼W♯♯W`.
    pub sharp_sign: f64,
    pub trace: f64,
    pub symmetric_norm: f64,
    pub antisymmetric_norm: f64,
}

/// Residual ratio below which the block structure of `⧠W` is accepted.
pub const STRUCTURE_TOL: f64 = 1e-6;

/// Pick the `♯♯` sign: `+1` unless only `−1` passes the structure check.
pub fn choose_sharp_sign(bw: &BoxW, n: usize) -> f64 {
    let scale = bw.scale();
    let off = |s: f64| tractor::off_bottom_norm(&bw.assemble(s), n);
    if off(1.0) <= STRUCTURE_TOL * scale || off(1.0) <= off(-1.0) {
        1.0
    } else {
        -1.0
    }
}

pub fn b6_extract(curv: &CurvatureJets, sign: Option<f64>) -> Result<B6Extraction, ObstructionError> {
    let n = curv.n();
    if n != 6 {
        return Err(ObstructionError::Dimension { needed: 6, found: n });
    }
    require_order(curv, 6)?;
    let bw = BoxW::compute(curv);
    let sign = sign.unwrap_or_else(|| choose_sharp_sign(&bw, n));
    Ok(b6_from_box(&bw, &curv.stack(), sign))
}

/// Extract `B^(6)` from precomputed `⧠W` pieces with a fixed `♯♯` sign.
pub fn b6_from_box(bw: &BoxW, stack: &CurvatureStack, sharp_sign: f64) -> B6Extraction {
    let n = stack.n;
    let full = bw.assemble(sharp_sign);
    let b6 = tractor::bottom_slot(&full, n);
    let trace = (0..n * n).map(|k| stack.ginv[k] * b6.data[k]).sum::<f64>().abs();
    let sym = TensorValue::from_fn(n, &[Slot::Down, Slot::Down], |i| 0.5 * (b6.get(i) + b6.get(&[i[1], i[0]])));
    let anti = TensorValue::from_fn(n, &[Slot::Down, Slot::Down], |i| 0.5 * (b6.get(i) - b6.get(&[i[1], i[0]])));
    B6Extraction {
        off_slot_norm: tractor::off_bottom_norm(&full, n),
        scale: bw.scale(),
        w_norm: bw.w.raw_norm(),
        sharp_sign,
        trace,
        symmetric_norm: stack.norm(&sym),
        antisymmetric_norm: stack.norm(&anti),
        b6,
    }
}

/// Helper for consumers holding a `K` with a lower index.
pub fn raise_k(k_low: &[f64], ginv: &[f64]) -> Vec<f64> {
    raise_vec(k_low, ginv)
}

pub fn lower_k(k_up: &[f64], g: &[f64]) -> Vec<f64> {
    lower_vec(k_up, g)
}
