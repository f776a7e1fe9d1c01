//! Dense tensors with per-slot variance, valued in jets or in reals.
//!
//! Tangent slots have dimension `n`, tractor slots `n + 2`. Components are
//! stored row-major with the first slot varying slowest.

use crate::jet::Jet;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Up,
    Down,
    TractorUp,
    TractorDown,
}

impl Slot {
    pub fn dim(self, n: usize) -> usize {
        match self {
            Slot::Up | Slot::Down => n,
            Slot::TractorUp | Slot::TractorDown => n + 2,
        }
    }

    pub fn is_tractor(self) -> bool {
        matches!(self, Slot::TractorUp | Slot::TractorDown)
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Iterate all multi-indices of a shape in storage order.
pub fn multi_indices(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = dims.iter().product();
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            idx[k] = flat % dims[k];
            flat /= dims[k];
        }
        idx
    })
}

#[derive(Debug, Clone)]
pub struct JetTensor {
    n: usize,
    slots: Vec<Slot>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<Jet>,
}

impl JetTensor {
    pub fn zeros(n: usize, slots: &[Slot], nvars: usize, order: usize) -> JetTensor {
        let dims: Vec<usize> = slots.iter().map(|s| s.dim(n)).collect();
        let len = dims.iter().product();
        JetTensor {
            n,
            slots: slots.to_vec(),
            strides: strides(&dims),
            dims,
            data: vec![Jet::zero(nvars, order); len],
        }
    }

    pub fn from_fn(n: usize, slots: &[Slot], mut f: impl FnMut(&[usize]) -> Jet) -> JetTensor {
        let dims: Vec<usize> = slots.iter().map(|s| s.dim(n)).collect();
        let data = multi_indices(&dims).map(|i| f(&i)).collect();
        JetTensor { n, slots: slots.to_vec(), strides: strides(&dims), dims, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn data(&self) -> &[Jet] {
        &self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.data[self.flat_index(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut Jet {
        let k = self.flat_index(idx);
        &mut self.data[k]
    }

    pub fn set(&mut self, idx: &[usize], v: Jet) {
        let k = self.flat_index(idx);
        self.data[k] = v;
    }

    pub fn truncate(&self, order: usize) -> JetTensor {
        JetTensor { data: self.data.iter().map(|j| j.truncate(order)).collect(), ..self.clone() }
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JetTensor {
        JetTensor { data: self.data.iter().map(f).collect(), ..self.clone() }
    }

    /// Component-wise first partial derivative in coordinate `var`.
    pub fn partial(&self, var: usize) -> JetTensor {
        self.map(|j| j.partial(var))
    }

    /// Values at the base point.
    pub fn value(&self) -> TensorValue {
        TensorValue {
            n: self.n,
            slots: self.slots.clone(),
            dims: self.dims.clone(),
            weight: 0,
            data: self.data.iter().map(Jet::value).collect(),
        }
    }
}

/// Real-valued tensor at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    pub n: usize,
    pub slots: Vec<Slot>,
    pub dims: Vec<usize>,
    pub weight: i32,
    pub data: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(n: usize, slots: &[Slot]) -> TensorValue {
        let dims: Vec<usize> = slots.iter().map(|s| s.dim(n)).collect();
        let len = dims.iter().product();
        TensorValue { n, slots: slots.to_vec(), dims, weight: 0, data: vec![0.0; len] }
    }

    pub fn from_fn(n: usize, slots: &[Slot], mut f: impl FnMut(&[usize]) -> f64) -> TensorValue {
        let dims: Vec<usize> = slots.iter().map(|s| s.dim(n)).collect();
        let data = multi_indices(&dims).map(|i| f(&i)).collect();
        TensorValue { n, slots: slots.to_vec(), dims, weight: 0, data }
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (i, d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let k = self.flat_index(idx);
        self.data[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Plain Frobenius norm of the stored components.
    pub fn raw_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &TensorValue) -> TensorValue {
        assert_eq!(self.dims, other.dims);
        TensorValue { data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(), ..self.clone() }
    }

    /// Norm in an orthonormal frame of `frame`; tractor slots use raw components.
    pub fn norm(&self, frame: &Frame) -> f64 {
        let mut data = self.data.clone();
        for (k, slot) in self.slots.iter().enumerate() {
            let m = match slot {
                Slot::Down => &frame.down,
                Slot::Up => &frame.up,
                _ => continue,
            };
            data = apply_slot(&data, &self.dims, k, m);
        }
        data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Contract slots `i < j` with `g^{..}` (both down), `g_{..}` (both up) or
    /// directly (mixed variance).
    pub fn trace(&self, i: usize, j: usize, g: &[f64], ginv: &[f64]) -> TensorValue {
        assert!(i < j && j < self.rank());
        let (si, sj) = (self.slots[i], self.slots[j]);
        assert!(!si.is_tractor() && !sj.is_tractor());
        let n = self.n;
        let weight: Box<dyn Fn(usize, usize) -> f64> = match (si, sj) {
            (Slot::Down, Slot::Down) => Box::new(|a, b| ginv[a * n + b]),
            (Slot::Up, Slot::Up) => Box::new(|a, b| g[a * n + b]),
            _ => Box::new(|a, b| if a == b { 1.0 } else { 0.0 }),
        };
        let slots: Vec<Slot> =
            self.slots.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, s)| *s).collect();
        TensorValue::from_fn(n, &slots, |rest| {
            let mut full = vec![0; rest.len() + 2];
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let w = weight(a, b);
                    if w == 0.0 {
                        continue;
                    }
                    let mut it = rest.iter();
                    for (k, slot) in full.iter_mut().enumerate() {
                        *slot = if k == i {
                            a
                        } else if k == j {
                            b
                        } else {
                            *it.next().unwrap()
                        };
                    }
                    acc += w * self.get(&full);
                }
            }
            acc
        })
    }
}

/// Apply the `d×d` matrix `m` (row-major) to slot `k` of a dense array.
fn apply_slot(data: &[f64], dims: &[usize], k: usize, m: &[f64]) -> Vec<f64> {
    let d = dims[k];
    let inner: usize = dims[k + 1..].iter().product();
    let outer: usize = dims[..k].iter().product();
    let mut out = vec![0.0; data.len()];
    for o in 0..outer {
        for r in 0..d {
            for c in 0..d {
                let w = m[r * d + c];
                if w == 0.0 {
                    continue;
                }
                let src = (o * d + c) * inner;
                let dst = (o * d + r) * inner;
                for t in 0..inner {
                    out[dst + t] += w * data[src + t];
                }
            }
        }
    }
    out
}

/// Orthonormal frame of the auxiliary Riemannian metric `|g|` used for norms.
///
/// `|g|` flips the sign of the negative eigenvalues of `g`; in Riemannian
/// signature it is `g` itself.
#[derive(Debug, Clone)]
pub struct Frame {
    pub n: usize,
    /// Maps covector components to frame components.
    pub down: Vec<f64>,
    /// Maps vector components to frame components.
    pub up: Vec<f64>,
}

impl Frame {
    pub fn new(g: &[f64], n: usize) -> Frame {
        let (vals, vecs) = linalg::symmetric_eigen(g, n);
        let mut down = vec![0.0; n * n];
        let mut up = vec![0.0; n * n];
        for e in 0..n {
            let s = vals[e].abs().sqrt();
            for a in 0..n {
                // frame vector E_e = v_e / s, frame covector θ^e = s v_e^T
                down[e * n + a] = vecs[(a, e)] / s;
                up[e * n + a] = vecs[(a, e)] * s;
            }
        }
        Frame { n, down, up }
    }

    pub fn identity(n: usize) -> Frame {
        let mut id = vec![0.0; n * n];
        for a in 0..n {
            id[a * n + a] = 1.0;
        }
        Frame { n, down: id.clone(), up: id }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn storage_order_is_row_major() {
        let t = TensorValue::from_fn(2, &[Slot::Down, Slot::Up], |i| (10 * i[0] + i[1]) as f64);
        assert_eq!(t.data, vec![0.0, 1.0, 10.0, 11.0]);
        assert_eq!(t.get(&[1, 0]), 10.0);
    }

    #[test]
    fn frame_norm_matches_contraction_with_metric() {
        let g = [2.0, 0.3, 0.3, 1.0];
        let gi = {
            let d = 2.0 - 0.09;
            [1.0 / d, -0.3 / d, -0.3 / d, 2.0 / d]
        };
        let t = TensorValue::from_fn(2, &[Slot::Down, Slot::Down], |i| [1.0, -2.0, 0.5, 3.0][2 * i[0] + i[1]]);
        let mut want = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        want += gi[a * 2 + c] * gi[b * 2 + d] * t.get(&[a, b]) * t.get(&[c, d]);
                    }
                }
            }
        }
        assert_relative_eq!(t.norm(&Frame::new(&g, 2)), want.sqrt(), epsilon = 1e-13);
        let v = TensorValue::from_fn(2, &[Slot::Up], |i| [0.7, -1.1][i[0]]);
        let want_v = (0..4).map(|k| g[k] * v.data[k / 2] * v.data[k % 2]).sum::<f64>().sqrt();
        assert_relative_eq!(v.norm(&Frame::new(&g, 2)), want_v, epsilon = 1e-13);
    }

    #[test]
    fn lorentzian_frame_uses_absolute_eigenvalues() {
        let g = [-1.0, 0.0, 0.0, 1.0];
        let v = TensorValue::from_fn(2, &[Slot::Up], |i| [3.0, 4.0][i[0]]);
        assert_relative_eq!(v.norm(&Frame::new(&g, 2)), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_of_mixed_tensor() {
        let t = TensorValue::from_fn(3, &[Slot::Up, Slot::Down], |i| if i[0] == i[1] { 2.0 } else { 1.0 });
        let tr = t.trace(0, 1, &[], &[]);
        assert_eq!(tr.rank(), 0);
        assert_eq!(tr.data, vec![6.0]);
    }
}
