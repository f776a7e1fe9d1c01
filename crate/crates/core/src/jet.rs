//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] of order `K` in `n` variables stores the Taylor coefficients
//! `∂^α f / α!` of a scalar function at an (implicit) base point for every
//! multi-index `|α| ≤ K`. Arithmetic is exact truncated power-series
//! arithmetic, so derivatives obtained from a jet are exact up to roundoff.
//!
//! # Coefficient ordering
//!
//! Coefficients are stored densely over the simplex `|α| ≤ K` in graded
//! lexicographic order: first by total degree, then, within one degree,
//! lexicographically *descending* in `(α_0, α_1, …)`. For two variables and
//! order 2 the order is
//!
//! ```text
//! 1, x0, x1, x0², x0·x1, x1²
//! ```
//!
//! Because the ordering is graded, truncating a jet to a lower order is a
//! prefix of the coefficient vector.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Largest supported jet order.
pub const MAX_ORDER: usize = 8;
/// Largest supported number of variables.
pub const MAX_VARS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("division by a jet with zero value part")]
    DivisionByZero,
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },
}

/// Multi-index tables shared by all jets with the same `(nvars, order)`.
#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    degree_start: Vec<usize>,
    // (out, lhs, rhs), sorted by `out`.
    mul_table: Vec<(u32, u32, u32)>,
    // raise[p * nvars + i] = position of α_p + e_i, or u32::MAX when |α_p| == order.
    raise: Vec<u32>,
}

fn push_degree(nvars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == nvars {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first as u8);
        push_degree(nvars, degree - first, prefix, out);
        prefix.pop();
    }
}

/// Number of multi-indices `|α| ≤ order` in `nvars` variables.
pub fn simplex_len(nvars: usize, order: usize) -> usize {
    // C(nvars + order, order)
    let mut r: usize = 1;
    for k in 1..=order {
        r = r * (nvars + k) / k;
    }
    r
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Layout {
        assert!(nvars >= 1 && nvars <= MAX_VARS, "unsupported variable count {nvars}");
        assert!(order <= MAX_ORDER, "unsupported jet order {order}");
        let mut exps = Vec::with_capacity(simplex_len(nvars, order));
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(exps.len());
            push_degree(nvars, d, &mut Vec::with_capacity(nvars), &mut exps);
        }
        degree_start.push(exps.len());
        let index: HashMap<&[u8], usize> =
            exps.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect();

        let degree = |p: usize| exps[p].iter().map(|&v| v as usize).sum::<usize>();
        let mut mul_table = Vec::new();
        let mut sum = vec![0u8; nvars];
        for i in 0..exps.len() {
            let di = degree(i);
            for j in 0..degree_start[order - di + 1] {
                for v in 0..nvars {
                    sum[v] = exps[i][v] + exps[j][v];
                }
                let out = index[sum.as_slice()];
                mul_table.push((out as u32, i as u32, j as u32));
            }
        }
        mul_table.sort_by_key(|e| e.0);

        let mut raise = vec![u32::MAX; exps.len() * nvars];
        for p in 0..exps.len() {
            if degree(p) == order {
                continue;
            }
            for v in 0..nvars {
                sum.copy_from_slice(&exps[p]);
                sum[v] += 1;
                raise[p * nvars + v] = index[sum.as_slice()] as u32;
            }
        }

        Layout { nvars, order, exps, degree_start, mul_table, raise }
    }

    /// Shared layout for `(nvars, order)`, built on first use.
    pub fn get(nvars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(l) = cache.lock().expect("layout cache poisoned").get(&(nvars, order)) {
            return l.clone();
        }
        let built = Arc::new(Layout::build(nvars, order));
        cache
            .lock()
            .expect("layout cache poisoned")
            .entry((nvars, order))
            .or_insert(built)
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Multi-index stored at position `p`.
    pub fn multi_index(&self, p: usize) -> &[u8] {
        &self.exps[p]
    }

    /// Position of a multi-index, if it belongs to this layout.
    pub fn position(&self, alpha: &[u8]) -> Option<usize> {
        let d: usize = alpha.iter().map(|&v| v as usize).sum();
        if alpha.len() != self.nvars || d > self.order {
            return None;
        }
        (self.degree_start[d]..self.degree_start[d + 1]).find(|&p| self.exps[p] == alpha)
    }
}

/// Truncated Taylor expansion of a scalar function at a point.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.layout.nvars)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.nvars == other.layout.nvars
            && self.layout.order == other.layout.order
            && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Jet {
        let layout = Layout::get(nvars, order);
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Jet { layout, coeffs }
    }

    pub fn zero(nvars: usize, order: usize) -> Jet {
        Jet::constant(nvars, order, 0.0)
    }

    /// The coordinate function `x_var` expanded at a point where it equals `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: f64) -> Jet {
        assert!(var < nvars);
        let mut j = Jet::constant(nvars, order, value);
        if order >= 1 {
            // degree-one block is e_0, e_1, … in that order
            j.coeffs[1 + var] = 1.0;
        }
        j
    }

    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<f64>) -> Jet {
        let layout = Layout::get(nvars, order);
        assert_eq!(coeffs.len(), layout.len(), "coefficient count mismatch");
        Jet { layout, coeffs }
    }

    /// Same layout, different constant.
    pub fn constant_like(&self, value: f64) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[0] = value;
        Jet { layout: self.layout.clone(), coeffs }
    }

    pub fn zero_like(&self) -> Jet {
        self.constant_like(0.0)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.layout.position(alpha).map_or(0.0, |p| self.coeffs[p])
    }

    /// Partial derivative `∂^α f` at the base point.
    pub fn derivative(&self, alpha: &[u8]) -> f64 {
        let fact: f64 = alpha.iter().map(|&k| (1..=k as u64).product::<u64>() as f64).product();
        self.coeff(alpha) * fact
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drop all coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = Layout::get(self.nvars(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs }
    }

    /// `∂f/∂x_var` as a jet of one order less.
    ///
    /// # Panics
    ///
    /// If the jet has order zero.
    pub fn partial(&self, var: usize) -> Jet {
        let order = self.order();
        assert!(order >= 1, "cannot differentiate an order-0 jet");
        let n = self.nvars();
        let layout = Layout::get(n, order - 1);
        let coeffs = (0..layout.len())
            .map(|p| {
                let k = self.layout.exps[p][var] as f64 + 1.0;
                k * self.coeffs[self.layout.raise[p * n + var] as usize]
            })
            .collect();
        Jet { layout, coeffs }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut r = self.clone();
        r.coeffs[0] += s;
        r
    }

    /// `self += s * other`, truncating `other` to this jet's order.
    pub fn add_scaled(&mut self, other: &Jet, s: f64) {
        let len = self.coeffs.len().min(other.coeffs.len());
        if other.order() < self.order() {
            self.truncate_in_place(other.order());
        }
        for (a, b) in self.coeffs[..len].iter_mut().zip(&other.coeffs[..len]) {
            *a += s * b;
        }
    }

    /// `self += a * b` without allocating the product.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        let order = self.order().min(a.order()).min(b.order());
        if order < self.order() {
            self.truncate_in_place(order);
        }
        let len = self.layout.len();
        let table = &a.layout_for(order).mul_table;
        for &(o, i, j) in table.iter() {
            let o = o as usize;
            if o >= len {
                break;
            }
            self.coeffs[o] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
    }

    fn truncate_in_place(&mut self, order: usize) {
        let layout = Layout::get(self.nvars(), order);
        self.coeffs.truncate(layout.len());
        self.layout = layout;
    }

    fn layout_for(&self, order: usize) -> Arc<Layout> {
        if order == self.order() {
            self.layout.clone()
        } else {
            Layout::get(self.nvars(), order)
        }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        assert_eq!(self.nvars(), other.nvars(), "jets over different variable counts");
        let order = self.order().min(other.order());
        let layout = self.layout_for(order);
        let len = layout.len();
        let mut coeffs = vec![0.0; len];
        for &(o, i, j) in layout.mul_table.iter() {
            let o = o as usize;
            if o >= len {
                break;
            }
            coeffs[o] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Jet { layout, coeffs }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.nvars(), other.nvars(), "jets over different variable counts");
        let order = self.order().min(other.order());
        let layout = self.layout_for(order);
        let coeffs = self.coeffs[..layout.len()]
            .iter()
            .zip(&other.coeffs[..layout.len()])
            .map(|(&a, &b)| f(a, b))
            .collect();
        Jet { layout, coeffs }
    }

    /// Evaluate `Σ_k series[k] · (self − self.value())^k` (Horner).
    pub fn compose(&self, series: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = self.constant_like(*series.last().unwrap_or(&0.0));
        for &a in series.iter().rev().skip(1) {
            acc = acc.mul_jet(&h);
            acc.coeffs[0] += a;
        }
        acc
    }

    pub fn try_recip(&self) -> Result<Jet, JetError> {
        let c0 = self.value();
        if c0 == 0.0 || !c0.is_finite() {
            return Err(JetError::DivisionByZero);
        }
        let k = self.order();
        let mut s = Vec::with_capacity(k + 1);
        let mut t = 1.0 / c0;
        for _ in 0..=k {
            s.push(t);
            t *= -1.0 / c0;
        }
        Ok(self.compose(&s))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        Ok(self.mul_jet(&other.try_recip()?))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut s = Vec::with_capacity(self.order() + 1);
        let mut f = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                f /= k as f64;
            }
            s.push(e * f);
        }
        self.compose(&s)
    }

    pub fn sin(&self) -> Jet {
        let (sv, cv) = self.value().sin_cos();
        self.compose(&cyclic_series([sv, cv, -sv, -cv], self.order()))
    }

    pub fn cos(&self) -> Jet {
        let (sv, cv) = self.value().sin_cos();
        self.compose(&cyclic_series([cv, -sv, -cv, sv], self.order()))
    }

    pub fn sinh(&self) -> Jet {
        let (sh, ch) = (self.value().sinh(), self.value().cosh());
        self.compose(&cyclic_series([sh, ch, sh, ch], self.order()))
    }

    pub fn cosh(&self) -> Jet {
        let (sh, ch) = (self.value().sinh(), self.value().cosh());
        self.compose(&cyclic_series([ch, sh, ch, sh], self.order()))
    }

    pub fn tan(&self) -> Result<Jet, JetError> {
        let (sv, cv) = self.value().sin_cos();
        if cv == 0.0 {
            return Err(JetError::Domain { function: "tan", value: self.value() });
        }
        let k = self.order();
        let num = cyclic_series([sv, cv, -sv, -cv], k);
        let den = cyclic_series([cv, -sv, -cv, sv], k);
        Ok(self.compose(&series_div(&num, &den)))
    }

    pub fn tanh(&self) -> Jet {
        let (sh, ch) = (self.value().sinh(), self.value().cosh());
        let k = self.order();
        let num = cyclic_series([sh, ch, sh, ch], k);
        let den = cyclic_series([ch, sh, ch, sh], k);
        self.compose(&series_div(&num, &den))
    }

    pub fn atan(&self) -> Jet {
        let c0 = self.value();
        let k = self.order();
        // d/dt atan(c0 + t) = 1 / (1 + (c0 + t)^2)
        let mut q = vec![0.0; k.max(2) + 1];
        q[0] = 1.0 + c0 * c0;
        q[1] = 2.0 * c0;
        q[2] = 1.0;
        q.truncate(k + 1);
        let mut one = vec![0.0; k + 1];
        one[0] = 1.0;
        let d = series_div(&one, &q);
        let mut s = vec![c0.atan()];
        for j in 1..=k {
            s.push(d[j - 1] / j as f64);
        }
        self.compose(&s)
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let c0 = self.value();
        if !(c0 > 0.0) {
            return Err(JetError::Domain { function: "log", value: c0 });
        }
        let mut s = vec![c0.ln()];
        let mut p = 1.0;
        for j in 1..=self.order() {
            p /= c0;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            s.push(sign * p / j as f64);
        }
        Ok(self.compose(&s))
    }

    /// `self^r` for real `r`; requires a positive value part unless `r` is a
    /// non-negative integer.
    pub fn powf(&self, r: f64) -> Result<Jet, JetError> {
        if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
            return self.powi(r as i32);
        }
        let c0 = self.value();
        if !(c0 > 0.0) {
            return Err(JetError::Domain { function: "pow", value: c0 });
        }
        let mut s = Vec::with_capacity(self.order() + 1);
        let mut a = c0.powf(r);
        for j in 0..=self.order() {
            if j > 0 {
                a *= (r - (j - 1) as f64) / (j as f64 * c0);
            }
            s.push(a);
        }
        Ok(self.compose(&s))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let c0 = self.value();
        if !(c0 > 0.0) {
            return Err(JetError::Domain { function: "sqrt", value: c0 });
        }
        self.powf(0.5)
    }

    pub fn powi(&self, k: i32) -> Result<Jet, JetError> {
        if k < 0 {
            return self.try_recip()?.powi(-k);
        }
        let mut result = self.constant_like(1.0);
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        Ok(result)
    }
}

fn cyclic_series(derivs: [f64; 4], order: usize) -> Vec<f64> {
    let mut f = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                f /= k as f64;
            }
            derivs[k % 4] * f
        })
        .collect()
}

/// Univariate power-series quotient `p / q` truncated to `p.len()` terms.
fn series_div(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; p.len()];
    for k in 0..p.len() {
        let mut acc = p[k];
        for j in 1..=k.min(q.len() - 1) {
            acc -= q[j] * r[k - j];
        }
        r[k] = acc / q[0];
    }
    r
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.add_scaled(rhs, 1.0);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.add_scaled(rhs, -1.0);
    }
}
