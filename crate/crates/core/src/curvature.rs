//! Levi-Civita curvature stack as jets, and the coupled covariant derivative.
//!
//! Conventions: `(∇_a∇_b − ∇_b∇_a)V^c = R_ab^c_d V^d`, `Ric_ab = R_ca^c_b`,
//! `R_ab = (n−2)P_ab + J g_ab`, `A_abc = ∇_b P_ca − ∇_c P_ba`,
//! `B_ab = ∇^c A_acb + P^dc C_dacb`. A derivative index is always prepended.

use crate::chart::{ChartError, MetricChart, MetricJets};
use crate::jet::Jet;
use crate::tensor::{multi_indices, Frame, JetTensor, Slot, TensorValue};

/// Sparse connection coefficients used by [`Connection::nabla`].
///
/// `up[(e, i)]` lists `(m, Γ^i_em)`, `down[(e, i)]` lists `(m, Γ^m_ei)`, and
/// likewise for the tractor connection matrix `Γ̃_e^I_M`.
#[derive(Debug, Clone)]
pub struct Connection {
    n: usize,
    up: Vec<Vec<(usize, Jet)>>,
    down: Vec<Vec<(usize, Jet)>>,
    tractor_up: Vec<Vec<(usize, Jet)>>,
    tractor_down: Vec<Vec<(usize, Jet)>>,
}

fn sparse_tables(gamma: &JetTensor, dim: usize) -> (Vec<Vec<(usize, Jet)>>, Vec<Vec<(usize, Jet)>>) {
    // gamma has slots (form e, up i, down m)
    let n = gamma.dims()[0];
    let mut up = vec![Vec::new(); n * dim];
    let mut down = vec![Vec::new(); n * dim];
    for e in 0..n {
        for i in 0..dim {
            for m in 0..dim {
                let c = gamma.get(&[e, i, m]);
                if !c.is_zero() {
                    up[e * dim + i].push((m, c.clone()));
                    down[e * dim + m].push((i, c.clone()));
                }
            }
        }
    }
    (up, down)
}

impl Connection {
    /// Levi-Civita connection from `Γ^a_bc` (slots Up, Down, Down).
    pub fn levi_civita(christoffel: &JetTensor) -> Connection {
        let n = christoffel.n();
        // reorder to (form, up, down): Γ_e^i_m = Γ^i_em
        let g = JetTensor::from_fn(n, &[Slot::Down, Slot::Up, Slot::Down], |i| christoffel.get(&[i[1], i[0], i[2]]).clone());
        let (up, down) = sparse_tables(&g, n);
        Connection { n, up, down, tractor_up: Vec::new(), tractor_down: Vec::new() }
    }

    /// Couple a tractor connection matrix (slots Down, TractorUp, TractorDown).
    pub fn with_tractor(mut self, matrix: &JetTensor) -> Connection {
        let (tu, td) = sparse_tables(matrix, self.n + 2);
        self.tractor_up = tu;
        self.tractor_down = td;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Connection tables at `order` with the sign folded in, for the slots of `t`.
    fn prepared(&self, slots: &[Slot], order: usize) -> [Vec<Vec<(usize, Jet)>>; 4] {
        let prepare = |table: &Vec<Vec<(usize, Jet)>>, sign: f64, slot: Slot| -> Vec<Vec<(usize, Jet)>> {
            if !slots.contains(&slot) {
                return Vec::new();
            }
            assert!(!table.is_empty(), "tractor slot without a tractor connection");
            table.iter().map(|row| row.iter().map(|(m, c)| (*m, c.truncate(order).scale(sign))).collect()).collect()
        };
        [
            prepare(&self.up, 1.0, Slot::Up),
            prepare(&self.down, -1.0, Slot::Down),
            prepare(&self.tractor_up, 1.0, Slot::TractorUp),
            prepare(&self.tractor_down, -1.0, Slot::TractorDown),
        ]
    }

    /// `(∇_e T)_rest` given `∂_e T`.
    fn component(
        &self,
        tables: &[Vec<Vec<(usize, Jet)>>; 4],
        t: &JetTensor,
        partial: &JetTensor,
        e: usize,
        rest: &[usize],
        scratch: &mut Vec<usize>,
    ) -> Jet {
        let n = self.n;
        let mut acc = partial.get(rest).clone();
        for (k, slot) in t.slots().iter().enumerate() {
            let (table, dim) = match slot {
                Slot::Up => (&tables[0], n),
                Slot::Down => (&tables[1], n),
                Slot::TractorUp => (&tables[2], n + 2),
                Slot::TractorDown => (&tables[3], n + 2),
            };
            for (m, c) in &table[e * dim + rest[k]] {
                scratch.clear();
                scratch.extend_from_slice(rest);
                scratch[k] = *m;
                acc.add_product(c, t.get(scratch));
            }
        }
        acc
    }

    /// `∇_e T` with `e` prepended; the result has one jet order less than `t`.
    pub fn nabla(&self, t: &JetTensor) -> JetTensor {
        let n = self.n;
        let mut slots = vec![Slot::Down];
        slots.extend_from_slice(t.slots());
        let partials: Vec<JetTensor> = (0..n).map(|e| t.partial(e)).collect();
        let tables = self.prepared(t.slots(), t.order().saturating_sub(1));
        let mut scratch = Vec::new();
        JetTensor::from_fn(n, &slots, |idx| self.component(&tables, t, &partials[idx[0]], idx[0], &idx[1..], &mut scratch))
    }

    /// `g^ab ∇_a∇_b T`, two jet orders below `t`; only pairs with `g^ab ≠ 0`
    /// of the second derivative are formed.
    pub fn laplacian(&self, t: &JetTensor, ginv: &JetTensor) -> JetTensor {
        let n = self.n;
        let grad = self.nabla(t);
        let out_order = grad.order().saturating_sub(1);
        let partials: Vec<JetTensor> = (0..n).map(|e| grad.partial(e)).collect();
        let tables = self.prepared(grad.slots(), out_order);
        let pairs: Vec<(usize, usize, Jet)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| !ginv.get(&[a, b]).is_zero())
            .map(|(a, b)| (a, b, ginv.get(&[a, b]).truncate(out_order)))
            .collect();
        let mut scratch = Vec::new();
        let mut full = Vec::new();
        JetTensor::from_fn(n, t.slots(), |rest| {
            let mut acc = Jet::zero(n, out_order);
            for (a, b, w) in &pairs {
                full.clear();
                full.push(*b);
                full.extend_from_slice(rest);
                let v = self.component(&tables, &grad, &partials[*a], *a, &full, &mut scratch);
                acc.add_product(w, &v);
            }
            acc
        })
    }
}

/// Contract the first two slots of a tensor (both Down) with `g^{ab}`.
pub fn trace_first_pair(t: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let n = t.n();
    let slots = &t.slots()[2..];
    let mut full = Vec::new();
    JetTensor::from_fn(n, slots, |rest| {
        let mut acc: Option<Jet> = None;
        for a in 0..n {
            for b in 0..n {
                let w = ginv.get(&[a, b]);
                if w.is_zero() {
                    continue;
                }
                full.clear();
                full.push(a);
                full.push(b);
                full.extend_from_slice(rest);
                let v = t.get(&full);
                match acc.as_mut() {
                    Some(s) => s.add_product(w, v),
                    None => acc = Some(w * v),
                }
            }
        }
        acc.unwrap_or_else(|| t.data()[0].zero_like())
    })
}

/// Curvature quantities as jets at one point.
#[derive(Debug, Clone)]
pub struct CurvatureJets {
    pub metric: MetricJets,
    /// `Γ^a_bc`
    pub christoffel: JetTensor,
    /// `R_ab^c_d`
    pub riemann: JetTensor,
    /// `R_abcd = g_ce R_ab^e_d`
    pub riemann_lower: JetTensor,
    pub ricci: JetTensor,
    pub scalar: Jet,
    pub schouten: JetTensor,
    pub j: Jet,
    pub weyl: JetTensor,
    /// Present from metric order 3.
    pub cotton: Option<JetTensor>,
    /// Present from metric order 4.
    pub bach: Option<JetTensor>,
    pub connection: Connection,
}

fn sum_products<'a>(init: Jet, terms: impl Iterator<Item = (f64, &'a Jet, &'a Jet)>) -> Jet {
    let mut acc = init;
    for (s, a, b) in terms {
        if s == 1.0 {
            acc.add_product(a, b);
        } else {
            acc.add_product(&a.scale(s), b);
        }
    }
    acc
}

/// `Γ^a_bc = ½ g^ad (∂_b g_dc + ∂_c g_bd − ∂_d g_bc)`.
pub fn christoffel(metric: &MetricJets) -> JetTensor {
    let n = metric.n();
    let dg: Vec<JetTensor> = (0..n).map(|a| metric.g.partial(a)).collect();
    let lower = JetTensor::from_fn(n, &[Slot::Down, Slot::Down, Slot::Down], |i| {
        let (d, b, c) = (i[0], i[1], i[2]);
        (&(dg[b].get(&[d, c]) + dg[c].get(&[b, d])) - dg[d].get(&[b, c])).scale(0.5)
    });
    JetTensor::from_fn(n, &[Slot::Up, Slot::Down, Slot::Down], |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        let mut acc = Jet::zero(n, lower.order());
        for d in 0..n {
            acc.add_product(metric.ginv.get(&[a, d]), lower.get(&[d, b, c]));
        }
        acc
    })
}

/// `R_ab^c_d = ∂_aΓ^c_bd − ∂_bΓ^c_ad + Γ^c_ae Γ^e_bd − Γ^c_be Γ^e_ad`.
pub fn riemann(christoffel: &JetTensor) -> JetTensor {
    let n = christoffel.n();
    let dgam: Vec<JetTensor> = (0..n).map(|a| christoffel.partial(a)).collect();
    let zero = Jet::zero(n, christoffel.order().saturating_sub(1));
    let mut r = JetTensor::from_fn(n, &[Slot::Down, Slot::Down, Slot::Up, Slot::Down], |_| zero.clone());
    for a in 0..n {
        for b in a + 1..n {
            for c in 0..n {
                for d in 0..n {
                    let base = dgam[a].get(&[c, b, d]) - dgam[b].get(&[c, a, d]);
                    let v = sum_products(
                        base,
                        (0..n).flat_map(|e| {
                            [
                                (1.0, christoffel.get(&[c, a, e]), christoffel.get(&[e, b, d])),
                                (-1.0, christoffel.get(&[c, b, e]), christoffel.get(&[e, a, d])),
                            ]
                        }),
                    );
                    r.set(&[b, a, c, d], -&v);
                    r.set(&[a, b, c, d], v);
                }
            }
        }
    }
    r
}

/// Weyl tensor from `R_abcd`, `P` and `g`.
pub fn weyl(riemann_lower: &JetTensor, schouten: &JetTensor, g: &JetTensor) -> JetTensor {
    let n = g.n();
    JetTensor::from_fn(n, &[Slot::Down; 4], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let mut acc = riemann_lower.get(i).clone();
        acc.add_product(&-g.get(&[c, a]), schouten.get(&[b, d]));
        acc.add_product(g.get(&[c, b]), schouten.get(&[a, d]));
        acc.add_product(&-g.get(&[d, b]), schouten.get(&[a, c]));
        acc.add_product(g.get(&[d, a]), schouten.get(&[b, c]));
        acc
    })
}

/// Project a covariant 4-tensor onto algebraic Weyl tensors: impose the
/// curvature symmetries, then strip all traces. Applied to `R − P∧g` it only
/// removes roundoff. In dimension 3 there are no algebraic Weyl tensors.
pub fn project_weyl(t: &JetTensor, g: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let n = g.n();
    let nf = n as f64;
    if n == 3 {
        return JetTensor::from_fn(n, &[Slot::Down; 4], |_| Jet::zero(n, t.order()));
    }
    let pairs = JetTensor::from_fn(n, &[Slot::Down; 4], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let s = |a, b, c, d| {
            let mut x = t.get(&[a, b, c, d]) - t.get(&[b, a, c, d]);
            x -= t.get(&[a, b, d, c]);
            x += t.get(&[b, a, d, c]);
            x
        };
        (s(a, b, c, d) + s(c, d, a, b)).scale(0.125)
    });
    let perms = signed_permutations();
    let curv = JetTensor::from_fn(n, &[Slot::Down; 4], |i| {
        let mut x = pairs.get(i).clone();
        let mut alt = Jet::zero(n, x.order());
        for (p, sign) in &perms {
            let j = [i[p[0]], i[p[1]], i[p[2]], i[p[3]]];
            if *sign > 0.0 {
                alt += pairs.get(&j);
            } else {
                alt -= pairs.get(&j);
            }
        }
        x -= &alt.scale(1.0 / 24.0);
        x
    });
    let ricci = JetTensor::from_fn(n, &[Slot::Down, Slot::Down], |i| {
        let mut acc = Jet::zero(n, curv.order());
        for a in 0..n {
            for c in 0..n {
                acc.add_product(ginv.get(&[a, c]), curv.get(&[a, i[0], c, i[1]]));
            }
        }
        acc
    });
    let mut scalar = Jet::zero(n, curv.order());
    for a in 0..n {
        for b in 0..n {
            scalar.add_product(ginv.get(&[a, b]), ricci.get(&[a, b]));
        }
    }
    let j = scalar.scale(1.0 / (2.0 * (nf - 1.0)));
    let p = JetTensor::from_fn(n, &[Slot::Down, Slot::Down], |i| {
        let mut x = ricci.get(i).clone();
        x.add_product(&-&j, g.get(i));
        x.scale(1.0 / (nf - 2.0))
    });
    weyl(&curv, &p, g)
}

/// The 24 permutations of four slots with their signs.
fn signed_permutations() -> Vec<([usize; 4], f64)> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let distinct = (0..4).all(|x| (x + 1..4).all(|y| p[x] != p[y]));
                    if distinct {
                        let inversions = (0..4).flat_map(|x| (x + 1..4).map(move |y| (x, y))).filter(|&(x, y)| p[x] > p[y]).count();
                        out.push((p, if inversions % 2 == 0 { 1.0 } else { -1.0 }));
                    }
                }
            }
        }
    }
    out
}

/// Remove the `g^ab` trace of a tensor antisymmetric in its last two slots.
fn remove_cotton_trace(a: &JetTensor, g: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let n = g.n();
    let t: Vec<Jet> = (0..n)
        .map(|c| {
            let mut acc = Jet::zero(n, a.order());
            for x in 0..n {
                for y in 0..n {
                    acc.add_product(ginv.get(&[x, y]), a.get(&[x, y, c]));
                }
            }
            acc.scale(1.0 / (n as f64 - 1.0))
        })
        .collect();
    JetTensor::from_fn(n, &[Slot::Down; 3], |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        let mut v = a.get(i).clone();
        v.add_product(&-g.get(&[x, y]), &t[z]);
        v.add_product(g.get(&[x, z]), &t[y]);
        v
    })
}

fn remove_trace(b: &JetTensor, g: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let n = g.n();
    let mut tr = Jet::zero(n, b.order());
    for x in 0..n {
        for y in 0..n {
            tr.add_product(ginv.get(&[x, y]), b.get(&[x, y]));
        }
    }
    let tr = tr.scale(1.0 / n as f64);
    JetTensor::from_fn(n, &[Slot::Down, Slot::Down], |i| {
        let mut v = b.get(i).clone();
        v.add_product(&-&tr, g.get(i));
        v
    })
}

/// Raise every index of a covariant tensor.
pub fn raise_all(t: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let mut cur = t.clone();
    for k in 0..t.rank() {
        cur = raise_slot(&cur, ginv, k);
    }
    cur
}

/// Raise slot `k` (Down → Up).
pub fn raise_slot(t: &JetTensor, ginv: &JetTensor, k: usize) -> JetTensor {
    assert_eq!(t.slots()[k], Slot::Down);
    let n = t.n();
    let mut slots = t.slots().to_vec();
    slots[k] = Slot::Up;
    let mut scratch = Vec::new();
    JetTensor::from_fn(n, &slots, |idx| {
        let mut acc: Option<Jet> = None;
        for m in 0..n {
            let w = ginv.get(&[idx[k], m]);
            if w.is_zero() {
                continue;
            }
            scratch.clear();
            scratch.extend_from_slice(idx);
            scratch[k] = m;
            match acc.as_mut() {
                Some(s) => s.add_product(w, t.get(&scratch)),
                None => acc = Some(w * t.get(&scratch)),
            }
        }
        acc.unwrap_or_else(|| t.data()[0].zero_like())
    })
}

/// Lower slot `k` (Up → Down).
pub fn lower_slot(t: &JetTensor, g: &JetTensor, k: usize) -> JetTensor {
    assert_eq!(t.slots()[k], Slot::Up);
    let n = t.n();
    let mut slots = t.slots().to_vec();
    slots[k] = Slot::Down;
    let mut scratch = Vec::new();
    JetTensor::from_fn(n, &slots, |idx| {
        let mut acc: Option<Jet> = None;
        for m in 0..n {
            let w = g.get(&[idx[k], m]);
            if w.is_zero() {
                continue;
            }
            scratch.clear();
            scratch.extend_from_slice(idx);
            scratch[k] = m;
            match acc.as_mut() {
                Some(s) => s.add_product(w, t.get(&scratch)),
                None => acc = Some(w * t.get(&scratch)),
            }
        }
        acc.unwrap_or_else(|| t.data()[0].zero_like())
    })
}

impl CurvatureJets {
    /// Full stack from metric jets of order `≥ 2`.
    pub fn from_metric(metric: MetricJets) -> CurvatureJets {
        let n = metric.n();
        let order = metric.order();
        assert!(order >= 2, "curvature needs metric jets of order at least 2");
        let nf = n as f64;
        let christoffel = christoffel(&metric);
        let riemann = riemann(&christoffel);
        let riemann_lower = lower_slot(&riemann, &metric.g, 2);
        let ricci = JetTensor::from_fn(n, &[Slot::Down, Slot::Down], |i| {
            let mut acc = Jet::zero(n, order - 2);
            for c in 0..n {
                acc += riemann.get(&[c, i[0], c, i[1]]);
            }
            acc
        });
        let mut scalar = Jet::zero(n, order - 2);
        for a in 0..n {
            for b in 0..n {
                scalar.add_product(metric.ginv.get(&[a, b]), ricci.get(&[a, b]));
            }
        }
        let j = scalar.scale(1.0 / (2.0 * (nf - 1.0)));
        let schouten = JetTensor::from_fn(n, &[Slot::Down, Slot::Down], |i| {
            let mut p = ricci.get(i).clone();
            p.add_product(&-&j, metric.g.get(i));
            p.scale(1.0 / (nf - 2.0))
        });
        let weyl = project_weyl(&weyl(&riemann_lower, &schouten, &metric.g), &metric.g, &metric.ginv);
        let connection = Connection::levi_civita(&christoffel);
        let cotton = (order >= 3).then(|| remove_cotton_trace(&cotton(&connection.nabla(&schouten)), &metric.g, &metric.ginv));
        let bach = cotton.as_ref().filter(|_| order >= 4).map(|a| {
            let grad_a = connection.nabla(a);
            remove_trace(&bach(&grad_a, &schouten, &weyl, &metric.ginv), &metric.g, &metric.ginv)
        });
        CurvatureJets { metric, christoffel, riemann, riemann_lower, ricci, scalar, schouten, j, weyl, cotton, bach, connection }
    }

    pub fn compute(chart: &MetricChart, point: &[f64], order: usize) -> Result<CurvatureJets, ChartError> {
        Ok(CurvatureJets::from_metric(chart.metric_at(point, order)?))
    }

    pub fn n(&self) -> usize {
        self.metric.n()
    }

    pub fn order(&self) -> usize {
        self.metric.order()
    }

    pub fn stack(&self) -> CurvatureStack {
        let g = self.metric.g_values();
        CurvatureStack {
            n: self.n(),
            point: self.metric.point.clone(),
            frame: Frame::new(&g, self.n()),
            ginv: self.metric.ginv_values(),
            g,
            christoffel: self.christoffel.value(),
            riemann: self.riemann.value(),
            riemann_lower: self.riemann_lower.value(),
            ricci: self.ricci.value(),
            scalar: self.scalar.value(),
            schouten: self.schouten.value(),
            j: self.j.value(),
            weyl: self.weyl.value(),
            cotton: self.cotton.as_ref().map(JetTensor::value),
            bach: self.bach.as_ref().map(JetTensor::value),
        }
    }
}

/// `A_abc = ∇_b P_ca − ∇_c P_ba` from `(∇P)_ebc = ∇_e P_bc`.
pub fn cotton(grad_p: &JetTensor) -> JetTensor {
    JetTensor::from_fn(grad_p.n(), &[Slot::Down; 3], |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        grad_p.get(&[b, c, a]) - grad_p.get(&[c, b, a])
    })
}

/// `B_ab = g^cd ∇_d A_acb + P^dc C_dacb` from `(∇A)_dacb = ∇_d A_acb`.
pub fn bach(grad_a: &JetTensor, schouten: &JetTensor, weyl: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let n = schouten.n();
    let p_up = raise_all(schouten, ginv);
    JetTensor::from_fn(n, &[Slot::Down, Slot::Down], |i| {
        let (a, b) = (i[0], i[1]);
        let mut acc = Jet::zero(n, grad_a.order());
        for c in 0..n {
            for d in 0..n {
                let w = ginv.get(&[c, d]);
                if !w.is_zero() {
                    acc.add_product(w, grad_a.get(&[d, a, c, b]));
                }
                acc.add_product(p_up.get(&[d, c]), weyl.get(&[d, a, c, b]));
            }
        }
        acc
    })
}

/// Pointwise values of the curvature stack.
#[derive(Debug, Clone)]
pub struct CurvatureStack {
    pub n: usize,
    pub point: Vec<f64>,
    pub g: Vec<f64>,
    pub ginv: Vec<f64>,
    pub frame: Frame,
    pub christoffel: TensorValue,
    pub riemann: TensorValue,
    pub riemann_lower: TensorValue,
    pub ricci: TensorValue,
    pub scalar: f64,
    pub schouten: TensorValue,
    pub j: f64,
    pub weyl: TensorValue,
    pub cotton: Option<TensorValue>,
    pub bach: Option<TensorValue>,
}

impl CurvatureStack {
    pub fn norm(&self, t: &TensorValue) -> f64 {
        t.norm(&self.frame)
    }

    /// `R − (C + g_ca P_bd − g_cb P_ad + g_db P_ac − g_da P_bc)` for `R_abcd`.
    pub fn decomposition_defect(&self) -> TensorValue {
        let n = self.n;
        let g = |a: usize, b: usize| self.g[a * n + b];
        let p = |a: usize, b: usize| self.schouten.get(&[a, b]);
        TensorValue::from_fn(n, &[Slot::Down; 4], |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let recon = self.weyl.get(i) + g(c, a) * p(b, d) - g(c, b) * p(a, d) + g(d, b) * p(a, c)
                - g(d, a) * p(b, c);
            self.riemann_lower.get(i) - recon
        })
    }

    /// Largest norm over the six single traces of `C_abcd`.
    pub fn weyl_trace_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                m = m.max(self.norm(&self.weyl.trace(i, j, &self.g, &self.ginv)));
            }
        }
        m
    }

    /// Einstein residual `P − (J/n) g`.
    pub fn trace_free_schouten(&self) -> TensorValue {
        let n = self.n;
        let mut t = self.schouten.clone();
        for k in 0..n * n {
            t.data[k] -= self.j / n as f64 * self.g[k];
        }
        t
    }

    /// `‖R_abcd‖` in the norm frame.
    pub fn riemann_norm(&self) -> f64 {
        self.norm(&self.riemann_lower)
    }
}

/// Indices of all components of a tangent tensor of the given rank.
pub fn tangent_indices(n: usize, rank: usize) -> Vec<Vec<usize>> {
    multi_indices(&vec![n; rank]).collect()
}
