//! Built-in metrics.

use confein_core::chart::{ChartDescription, Signature};

/// One catalog metric.
#[derive(Debug, Clone)]
pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    /// Einstein in its declared scale.
    pub einstein: bool,
    build: fn() -> ChartDescription,
}

impl Entry {
    pub fn description(&self) -> ChartDescription {
        (self.build)()
    }
}

fn diag(entries: &[String]) -> Vec<Vec<String>> {
    let n = entries.len();
    (0..n).map(|i| (0..=i).map(|j| if i == j { entries[i].clone() } else { "0".into() }).collect()).collect()
}

fn coords(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("x{k}")).collect()
}

fn conformal_to_euclidean(name: &str, n: usize, factor: &str, half_width: f64) -> ChartDescription {
    ChartDescription {
        name: name.into(),
        signature: Some(Signature::riemannian(n)),
        coordinates: coords(n),
        metric: diag(&vec![factor.to_string(); n]),
        domain: vec![(-half_width, half_width); n],
        scale: Some("1".into()),
        ..Default::default()
    }
}

fn square_sum(n: usize) -> String {
    (1..=n).map(|k| format!("x{k}^2")).collect::<Vec<_>>().join(" + ")
}

fn flat(n: usize) -> ChartDescription {
    conformal_to_euclidean(&format!("flat_{n}"), n, "1", 1.0)
}

/// Unit round sphere in stereographic coordinates.
fn sphere(n: usize) -> ChartDescription {
    let f = format!("4/(1 + {})^2", square_sum(n));
    conformal_to_euclidean(&format!("sphere_{n}"), n, &f, 1.0)
}

/// Unit hyperbolic space in the Poincaré ball.
fn hyperbolic(n: usize) -> ChartDescription {
    let f = format!("4/(1 - ({}))^2", square_sum(n));
    conformal_to_euclidean(&format!("hyperbolic_{n}"), n, &f, 0.4)
}

fn schwarzschild_with(name: &str, time_sign: &str, signature: Signature) -> ChartDescription {
    ChartDescription {
        name: name.into(),
        signature: Some(signature),
        coordinates: ["t", "r", "theta", "phi"].map(String::from).to_vec(),
        metric: diag(&[
            format!("{time_sign}(1 - 2*m/r)"),
            "1/(1 - 2*m/r)".into(),
            "r^2".into(),
            "r^2*sin(theta)^2".into(),
        ]),
        parameters: vec![("m".into(), 1.0)],
        domain: vec![(0.0, 1.0), (3.0, 10.0), (0.5, 2.5), (0.0, 6.0)],
        scale: Some("1".into()),
        ..Default::default()
    }
}

fn schwarzschild() -> ChartDescription {
    schwarzschild_with("schwarzschild", "-", Signature { negative: 1, positive: 3 })
}

fn schwarzschild_riemannian() -> ChartDescription {
    schwarzschild_with("schwarzschild_riemannian", "", Signature::riemannian(4))
}

/// Riemannian Schwarzschild with a non-conformal perturbation of `g_rr`.
fn bumped_schwarzschild() -> ChartDescription {
    let mut d = schwarzschild_riemannian();
    d.name = "bumped_schwarzschild".into();
    d.metric[1][1] = "(1 + b*sin(t)*cos(theta))/(1 - 2*m/r)".into();
    d.metric[3][2] = "b*r*sin(theta)*t/4".into();
    d.parameters.push(("b".into(), 0.3));
    d.scale = None;
    d
}

/// Vacuum plane wave `2 du dv + H du² + dx² + dy²`, `H` harmonic in `(x, y)`.
fn pp_wave() -> ChartDescription {
    ChartDescription {
        name: "pp_wave".into(),
        signature: Some(Signature { negative: 1, positive: 3 }),
        coordinates: ["u", "v", "x", "y"].map(String::from).to_vec(),
        metric: vec![
            vec!["(x^2 - y^2)*(1 + u^2/2)".into()],
            vec!["1".into(), "0".into()],
            vec!["0".into(), "0".into(), "1".into()],
            vec!["0".into(), "0".into(), "0".into(), "1".into()],
        ],
        domain: vec![(-1.0, 1.0); 4],
        scale: Some("1".into()),
        ..Default::default()
    }
}

fn s2xs2_equal() -> ChartDescription {
    ChartDescription {
        name: "s2xs2_equal".into(),
        signature: Some(Signature::riemannian(4)),
        coordinates: ["theta", "phi", "alpha", "beta"].map(String::from).to_vec(),
        metric: diag(&["1".into(), "sin(theta)^2".into(), "1".into(), "sin(alpha)^2".into()]),
        domain: vec![(0.5, 2.5), (0.0, 6.0), (0.5, 2.5), (0.0, 6.0)],
        scale: Some("1".into()),
        ..Default::default()
    }
}

/// `S²(1) × S⁴(√3)`: both factors have Ricci equal to the metric.
fn s2xs4_einstein() -> ChartDescription {
    let f = "12/(1 + y1^2 + y2^2 + y3^2 + y4^2)^2";
    ChartDescription {
        name: "s2xs4_einstein".into(),
        signature: Some(Signature::riemannian(6)),
        coordinates: ["theta", "phi", "y1", "y2", "y3", "y4"].map(String::from).to_vec(),
        metric: diag(&["1".into(), "sin(theta)^2".into(), f.into(), f.into(), f.into(), f.into()]),
        domain: vec![(0.5, 2.5), (0.0, 6.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
        scale: Some("1".into()),
        ..Default::default()
    }
}

/// `e^{2ω}δ` on R⁴ with `ω = sin(x1)·x2`; Einstein scale `e^ω`.
fn conformally_flat_generic() -> ChartDescription {
    let mut d = conformal_to_euclidean("conformally_flat_generic", 4, "exp(2*sin(x1)*x2)", 1.0);
    d.scale = Some("exp(sin(x1)*x2)".into());
    d.conformal_factor = Some("sin(x1)*x2".into());
    d
}

macro_rules! entry {
    ($name:expr, $einstein:expr, $summary:expr, $build:expr) => {
        Entry { name: $name, summary: $summary, einstein: $einstein, build: $build }
    };
}

pub static ENTRIES: &[Entry] = &[
    entry!("flat_3", true, "Euclidean R³", || flat(3)),
    entry!("flat_4", true, "Euclidean R⁴", || flat(4)),
    entry!("flat_6", true, "Euclidean R⁶", || flat(6)),
    entry!("sphere_3", true, "unit S³, stereographic", || sphere(3)),
    entry!("sphere_4", true, "unit S⁴, stereographic", || sphere(4)),
    entry!("sphere_6", true, "unit S⁶, stereographic", || sphere(6)),
    entry!("hyperbolic_3", true, "unit H³, Poincaré ball", || hyperbolic(3)),
    entry!("hyperbolic_4", true, "unit H⁴, Poincaré ball", || hyperbolic(4)),
    entry!("schwarzschild", true, "Lorentzian Schwarzschild exterior, m = 1", schwarzschild),
    entry!("schwarzschild_riemannian", true, "Riemannian Schwarzschild, m = 1", schwarzschild_riemannian),
    entry!("pp_wave", true, "vacuum plane wave: Ricci-flat with type N Weyl, never weakly generic", pp_wave),
    entry!("s2xs2_equal", true, "S²(1) × S²(1)", s2xs2_equal),
    entry!("s2xs4_einstein", true, "S²(1) × S⁴(√3), Einstein with Ric = g", s2xs4_einstein),
    entry!("bumped_schwarzschild", false, "Riemannian Schwarzschild with a non-conformal bump, not conformally Einstein", bumped_schwarzschild),
    entry!("conformally_flat_generic", false, "e^{2ω}δ on R⁴, ω = sin(x1)·x2", conformally_flat_generic),
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn get(name: &str) -> Option<&'static Entry> {
    ENTRIES.iter().find(|e| e.name == name)
}
