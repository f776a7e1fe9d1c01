//! Standard tractor calculus in the chart's own scale.
//!
//! Tractor slots are ordered `(Y, Z_1..Z_n, X)`. An upper tractor `I^A` is
//! stored as `(σ, μ^a, ρ)`; a lower tractor `u_A` is stored by pairing, so its
//! position 0 is the `X_A` coefficient and position `n+1` the `Y_A` one. The
//! tractor metric is `h = [[0,0,1],[0,g,0],[1,0,0]]`, giving
//! `h(I, I) = 2σρ + μ_aμ^a`.

use crate::curvature::{trace_first_pair, Connection, CurvatureJets};
use crate::jet::Jet;
use crate::tensor::{multi_indices, JetTensor, Slot, TensorValue};

/// `(σ, μ_a, ρ)` with `μ` a covector.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardTractor {
    pub sigma: f64,
    pub mu: Vec<f64>,
    pub rho: f64,
}

impl StandardTractor {
    pub fn new(sigma: f64, mu: Vec<f64>, rho: f64) -> StandardTractor {
        StandardTractor { sigma, mu, rho }
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// Upper slot vector `(σ, μ^a, ρ)`.
    pub fn to_slots(&self, ginv: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut v = Vec::with_capacity(n + 2);
        v.push(self.sigma);
        for a in 0..n {
            v.push((0..n).map(|b| ginv[a * n + b] * self.mu[b]).sum());
        }
        v.push(self.rho);
        v
    }

    pub fn from_slots(slots: &[f64], g: &[f64]) -> StandardTractor {
        let n = slots.len() - 2;
        let mu = (0..n).map(|a| (0..n).map(|b| g[a * n + b] * slots[1 + b]).sum()).collect();
        StandardTractor { sigma: slots[0], mu, rho: slots[n + 1] }
    }

    /// `h(I, I) = 2σρ + g^ab μ_a μ_b`.
    pub fn norm_sq(&self, ginv: &[f64]) -> f64 {
        let n = self.n();
        let mut s = 2.0 * self.sigma * self.rho;
        for a in 0..n {
            for b in 0..n {
                s += ginv[a * n + b] * self.mu[a] * self.mu[b];
            }
        }
        s
    }

    /// `X_A I^A`.
    pub fn x_pairing(&self) -> f64 {
        self.sigma
    }
}

/// Tractor metric `h_AB` from `g_ab`.
pub fn tractor_metric(g: &[f64], n: usize) -> Vec<f64> {
    let d = n + 2;
    let mut h = vec![0.0; d * d];
    h[n + 1] = 1.0;
    h[(n + 1) * d] = 1.0;
    for a in 0..n {
        for b in 0..n {
            h[(1 + a) * d + 1 + b] = g[a * n + b];
        }
    }
    h
}

/// Inverse tractor metric `h^AB` from `g^ab`; same block form.
pub fn tractor_metric_inverse(ginv: &[f64], n: usize) -> Vec<f64> {
    tractor_metric(ginv, n)
}

pub fn tractor_metric_jets(g: &JetTensor) -> JetTensor {
    let n = g.n();
    let zero = g.get(&[0, 0]).zero_like();
    JetTensor::from_fn(n, &[Slot::TractorDown, Slot::TractorDown], |i| match (i[0], i[1]) {
        (0, b) if b == n + 1 => zero.constant_like(1.0),
        (a, 0) if a == n + 1 => zero.constant_like(1.0),
        (a, b) if (1..=n).contains(&a) && (1..=n).contains(&b) => g.get(&[a - 1, b - 1]).clone(),
        _ => zero.clone(),
    })
}

/// Connection matrix `Γ̃_a^B_D` (slots Down, TractorUp, TractorDown) so that
/// `∇_a I^B = ∂_a I^B + Γ̃_a^B_D I^D`.
pub fn connection_matrix(curv: &CurvatureJets) -> JetTensor {
    let n = curv.n();
    let g = &curv.metric.g;
    let ginv = &curv.metric.ginv;
    let p = &curv.schouten;
    let order = p.order();
    let zero = Jet::zero(n, order);
    let p_mixed = JetTensor::from_fn(n, &[Slot::Down, Slot::Up], |i| {
        let mut acc = zero.clone();
        for c in 0..n {
            acc.add_product(ginv.get(&[i[1], c]), p.get(&[i[0], c]));
        }
        acc
    });
    JetTensor::from_fn(n, &[Slot::Down, Slot::TractorUp, Slot::TractorDown], |i| {
        let (a, row, col) = (i[0], i[1], i[2]);
        let mid = |k: usize| (1..=n).contains(&k);
        if row == 0 && mid(col) {
            -g.get(&[a, col - 1])
        } else if mid(row) && col == 0 {
            p_mixed.get(&[a, row - 1]).clone()
        } else if mid(row) && mid(col) {
            curv.christoffel.get(&[row - 1, a, col - 1]).clone()
        } else if mid(row) && col == n + 1 {
            zero.constant_like(if row - 1 == a { 1.0 } else { 0.0 })
        } else if row == n + 1 && mid(col) {
            -p.get(&[a, col - 1])
        } else {
            zero.clone()
        }
    })
}

/// Levi-Civita connection coupled to the tractor connection.
pub fn coupled_connection(curv: &CurvatureJets) -> Connection {
    curv.connection.clone().with_tractor(&connection_matrix(curv))
}

/// Tractor-D of a weight-`w` field (scalar or tractor-valued), with the new
/// `TractorUp` slot prepended:
/// `D^A V = ((n+2w−2)w V, (n+2w−2) ∇^a V, −(ΔV + wJV))`.
pub fn tractor_d(v: &JetTensor, weight: f64, curv: &CurvatureJets, conn: &Connection) -> JetTensor {
    let n = curv.n();
    let nf = n as f64;
    let grad = conn.nabla(v);
    let lap = trace_first_pair(&conn.nabla(&grad), &curv.metric.ginv);
    let lead = (nf + 2.0 * weight - 2.0) * weight;
    let mid = nf + 2.0 * weight - 2.0;
    let mut slots = vec![Slot::TractorUp];
    slots.extend_from_slice(v.slots());
    let mut scratch = Vec::new();
    JetTensor::from_fn(n, &slots, |idx| {
        let rest = &idx[1..];
        match idx[0] {
            0 => v.get(rest).scale(lead),
            k if k == n + 1 => {
                let mut acc = lap.get(rest).clone();
                acc.add_product(&curv.j.scale(weight), v.get(rest));
                -acc
            }
            k => {
                let a = k - 1;
                let mut acc = lap.get(rest).zero_like();
                for b in 0..n {
                    scratch.clear();
                    scratch.push(b);
                    scratch.extend_from_slice(rest);
                    acc.add_product(curv.metric.ginv.get(&[a, b]), grad.get(&scratch));
                }
                acc.scale(mid)
            }
        }
    })
}

/// Scale tractor `(1/n) D σ = (σ, ∇^aσ, −(Δσ + Jσ)/n)` as an upper tractor field.
pub fn scale_tractor(sigma: &Jet, curv: &CurvatureJets, conn: &Connection) -> JetTensor {
    let n = curv.n();
    let field = JetTensor::from_fn(n, &[], |_| sigma.clone());
    tractor_d(&field, 1.0, curv, conn).map(|j| j.scale(1.0 / n as f64))
}

/// Read a `[TractorUp]` value as `(σ, μ_a, ρ)`.
pub fn standard_from_upper(t: &TensorValue, g: &[f64]) -> StandardTractor {
    StandardTractor::from_slots(&t.data, g)
}

/// Tractor curvature `Ω_ab^C_D` (slots Down, Down, TractorUp, TractorDown)
/// assembled from Weyl and Cotton:
/// rows `(0, 0, 0)`, `(A^c_ab, C_ab^c_d, 0)`, `(0, −A_dab, 0)`.
pub fn tractor_curvature(curv: &CurvatureJets) -> JetTensor {
    let n = curv.n();
    let a_t = curv.cotton.as_ref().expect("tractor curvature needs the Cotton tensor (metric order ≥ 3)");
    let ginv = &curv.metric.ginv;
    let zero = Jet::zero(n, a_t.order());
    JetTensor::from_fn(n, &[Slot::Down, Slot::Down, Slot::TractorUp, Slot::TractorDown], |i| {
        let (a, b, row, col) = (i[0], i[1], i[2], i[3]);
        let mid = |k: usize| (1..=n).contains(&k);
        if mid(row) && col == 0 {
            let c = row - 1;
            let mut acc = zero.clone();
            for e in 0..n {
                acc.add_product(ginv.get(&[c, e]), a_t.get(&[e, a, b]));
            }
            acc
        } else if mid(row) && mid(col) {
            let (c, d) = (row - 1, col - 1);
            let mut acc = Jet::zero(n, curv.weyl.order());
            for e in 0..n {
                acc.add_product(ginv.get(&[c, e]), curv.weyl.get(&[a, b, e, d]));
            }
            acc
        } else if row == n + 1 && mid(col) {
            -a_t.get(&[col - 1, a, b])
        } else {
            zero.clone()
        }
    })
}

/// `∂_aΓ̃_b − ∂_bΓ̃_a + [Γ̃_a, Γ̃_b]`, the curvature computed straight from the
/// connection matrix. Independent of the block formula; used to check it.
pub fn curvature_from_connection(matrix: &JetTensor) -> JetTensor {
    let n = matrix.n();
    let d = n + 2;
    let dm: Vec<JetTensor> = (0..n).map(|a| matrix.partial(a)).collect();
    JetTensor::from_fn(n, &[Slot::Down, Slot::Down, Slot::TractorUp, Slot::TractorDown], |i| {
        let (a, b, r, c) = (i[0], i[1], i[2], i[3]);
        let mut acc = dm[a].get(&[b, r, c]) - dm[b].get(&[a, r, c]);
        for k in 0..d {
            acc.add_product(matrix.get(&[a, r, k]), matrix.get(&[b, k, c]));
            acc.add_product(&-matrix.get(&[b, r, k]), matrix.get(&[a, k, c]));
        }
        acc
    })
}

/// Contract an `Ω`-type tensor's last `TractorDown` slot with an upper tractor value.
pub fn contract_last(t: &TensorValue, v: &[f64]) -> TensorValue {
    let last = *t.dims.last().unwrap();
    assert_eq!(last, v.len());
    let slots = &t.slots[..t.rank() - 1];
    let mut out = TensorValue::from_fn(t.n, slots, |_| 0.0);
    for (k, chunk) in t.data.chunks(last).enumerate() {
        out.data[k] = chunk.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

/// W-tractor `W_ABCE` (four `TractorDown` slots):
/// `(n−4)(ZZZZ C − 2 ZZ X_[C Z_E] A − 2 X_[A Z_B] ZZ A) + 4 X_[A Z_B] X_[C Z_E] B`.
pub fn w_tractor(curv: &CurvatureJets) -> JetTensor {
    let n = curv.n();
    let c4 = n as f64 - 4.0;
    let a_t = curv.cotton.as_ref().expect("W-tractor needs the Cotton tensor");
    let b_t = curv.bach.as_ref().expect("W-tractor needs the Bach tensor (metric order ≥ 4)");
    let zero = Jet::zero(n, b_t.order());
    // X_A is position 0; Z_A^a is position 1 + a
    let z = |k: usize| if (1..=n).contains(&k) { Some(k - 1) } else { None };
    JetTensor::from_fn(n, &[Slot::TractorDown; 4], |i| {
        let (p, q, r, s) = (i[0], i[1], i[2], i[3]);
        match (z(p), z(q), z(r), z(s)) {
            (Some(a), Some(b), Some(c), Some(e)) => curv.weyl.get(&[a, b, c, e]).scale(c4),
            (Some(a), Some(b), None, Some(e)) if r == 0 => a_t.get(&[e, a, b]).scale(-c4),
            (Some(a), Some(b), Some(e), None) if s == 0 => a_t.get(&[e, a, b]).scale(c4),
            (None, Some(b), Some(c), Some(e)) if p == 0 => a_t.get(&[b, c, e]).scale(-c4),
            (Some(b), None, Some(c), Some(e)) if q == 0 => a_t.get(&[b, c, e]).scale(c4),
            (None, Some(b), None, Some(e)) if p == 0 && r == 0 => b_t.get(&[e, b]).clone(),
            (Some(b), None, None, Some(e)) if q == 0 && r == 0 => -b_t.get(&[e, b]),
            (None, Some(b), Some(e), None) if p == 0 && s == 0 => -b_t.get(&[e, b]),
            (Some(b), None, Some(e), None) if q == 0 && s == 0 => b_t.get(&[e, b]).clone(),
            _ => zero.clone(),
        }
    })
}

/// `ω`, `Υ_a = ∂_aω` and `T = J − ∇^aΥ_a + Υ^aΥ_a` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactorData {
    pub omega: f64,
    pub upsilon: Vec<f64>,
    pub t: f64,
}

impl ConformalFactorData {
    /// From an `ω` jet of order ≥ 2 and the curvature of the unrescaled chart.
    pub fn new(omega: &Jet, curv: &CurvatureJets) -> ConformalFactorData {
        let n = curv.n();
        let field = JetTensor::from_fn(n, &[], |_| omega.clone());
        let grad = curv.connection.nabla(&field);
        let hess = curv.connection.nabla(&grad);
        let s = curv.stack();
        let upsilon: Vec<f64> = (0..n).map(|a| grad.get(&[a]).value()).collect();
        let mut t = s.j;
        for a in 0..n {
            for b in 0..n {
                let gi = s.ginv[a * n + b];
                t += gi * (upsilon[a] * upsilon[b] - hess.get(&[a, b]).value());
            }
        }
        ConformalFactorData { omega: omega.value(), upsilon, t }
    }
}

/// Re-express `I` in the splitting of `ĝ = e^{2ω}g`, in `ĝ`'s own trivialisation:
/// `(σ, μ_a, ρ) ↦ (e^ω σ, e^ω(μ_a + σΥ_a), e^{−ω}(ρ − Υ^bμ_b − ½σΥ^bΥ_b))`.
/// Indices are raised with the unrescaled `g^ab`.
pub fn splitting_change(i: &StandardTractor, data: &ConformalFactorData, ginv: &[f64]) -> StandardTractor {
    let n = i.n();
    let ups = &data.upsilon;
    let raise = |v: &[f64]| -> Vec<f64> { (0..n).map(|a| (0..n).map(|b| ginv[a * n + b] * v[b]).sum()).collect() };
    let ups_up = raise(ups);
    let ups_mu: f64 = ups_up.iter().zip(&i.mu).map(|(a, b)| a * b).sum();
    let ups_sq: f64 = ups_up.iter().zip(ups).map(|(a, b)| a * b).sum();
    let e = data.omega.exp();
    StandardTractor {
        sigma: e * i.sigma,
        mu: i.mu.iter().zip(ups).map(|(m, u)| e * (m + i.sigma * u)).collect(),
        rho: (i.rho - ups_mu - 0.5 * i.sigma * ups_sq) / e,
    }
}

/// `Σ_{i≠j} W_{C_i}^P_{C_j}^Q U_{..P..Q..}` for a 4-slot lower tractor tensor
/// `U`, with `W`'s second and fourth indices raised by `h`. The same-slot
/// terms carry the trace `W_C^P_P^Q`, which vanishes.
pub fn w_sharp_sharp(w: &TensorValue, u: &TensorValue, hinv: &[f64]) -> TensorValue {
    let d = w.dims[0];
    // W_A^P_C^Q
    let w_mixed = TensorValue::from_fn(w.n, &[Slot::TractorDown, Slot::TractorUp, Slot::TractorDown, Slot::TractorUp], |i| {
        let (a, p, c, q) = (i[0], i[1], i[2], i[3]);
        let mut s = 0.0;
        for b in 0..d {
            let hb = hinv[p * d + b];
            if hb == 0.0 {
                continue;
            }
            for e in 0..d {
                let he = hinv[q * d + e];
                if he != 0.0 {
                    s += hb * he * w.get(&[a, b, c, e]);
                }
            }
        }
        s
    });
    let rank = u.rank();
    let mut out = TensorValue::from_fn(u.n, &u.slots, |_| 0.0);
    let dims = u.dims.clone();
    for idx in multi_indices(&dims) {
        let mut acc = 0.0;
        let mut probe = idx.clone();
        for si in 0..rank {
            for sj in 0..rank {
                if si == sj {
                    continue;
                }
                for p in 0..d {
                    for q in 0..d {
                        let c = w_mixed.get(&[idx[si], p, idx[sj], q]);
                        if c == 0.0 {
                            continue;
                        }
                        probe.copy_from_slice(&idx);
                        probe[si] = p;
                        probe[sj] = q;
                        acc += c * u.get(&probe);
                    }
                }
            }
        }
        out.set(&idx, acc);
    }
    out
}

/// Pieces of `⧠W = ΔW − 2JW + s·¼ W♯♯W` in dimension 6.
#[derive(Debug, Clone)]
pub struct BoxW {
    pub laplacian: TensorValue,
    pub j_term: TensorValue,
    pub sharp: TensorValue,
    pub w: TensorValue,
}

impl BoxW {
    pub fn compute(curv: &CurvatureJets) -> BoxW {
        let n = curv.n();
        let conn = coupled_connection(curv);
        // ΔW at the point only needs W to second order
        let w = w_tractor(curv).truncate(2);
        let lap = conn.laplacian(&w, &curv.metric.ginv).value();
        let wv = w.value();
        let jv = curv.j.value();
        let j_term = TensorValue { data: wv.data.iter().map(|x| -2.0 * jv * x).collect(), ..wv.clone() };
        let hinv = tractor_metric_inverse(&curv.metric.ginv_values(), n);
        let sharp = w_sharp_sharp(&wv, &wv, &hinv);
        BoxW { laplacian: lap, j_term, sharp, w: wv }
    }

    /// `ΔW − 2JW + sign·¼ W♯♯W`.
    pub fn assemble(&self, sign: f64) -> TensorValue {
        let data = self
            .laplacian
            .data
            .iter()
            .zip(&self.j_term.data)
            .zip(&self.sharp.data)
            .map(|((l, j), s)| l + j + 0.25 * sign * s)
            .collect();
        TensorValue { data, ..self.w.clone() }
    }

    /// Magnitude used to judge the off-slot residual.
    pub fn scale(&self) -> f64 {
        self.laplacian.raw_norm() + self.j_term.raw_norm() + 0.25 * self.sharp.raw_norm()
    }
}

/// True for positions of the bottom slot `X_[A Z_B] X_[C Z_E]`.
pub fn is_bottom_slot(idx: &[usize], n: usize) -> bool {
    let z = |k: usize| (1..=n).contains(&k);
    let pair = |a: usize, b: usize| (a == 0 && z(b)) || (z(a) && b == 0);
    pair(idx[0], idx[1]) && pair(idx[2], idx[3])
}

/// Norm of everything outside the bottom slot.
pub fn off_bottom_norm(t: &TensorValue, n: usize) -> f64 {
    multi_indices(&t.dims)
        .zip(&t.data)
        .filter(|(i, _)| !is_bottom_slot(i, n))
        .map(|(_, v)| v * v)
        .sum::<f64>()
        .sqrt()
}

/// The symmetric 2-tensor in the bottom slot, `T_eb = t(X, Z_b, X, Z_e)`.
pub fn bottom_slot(t: &TensorValue, n: usize) -> TensorValue {
    TensorValue::from_fn(n, &[Slot::Down, Slot::Down], |i| t.get(&[0, 1 + i[1], 0, 1 + i[0]]))
}
