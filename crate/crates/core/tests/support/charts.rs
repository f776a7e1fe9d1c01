//! Charts shared by the integration tests.

use confein_core::chart::{ChartDescription, MetricChart, Signature};

pub fn chart(name: &str, coords: &[&str], rows: &[&[&str]], params: &[(&str, f64)], domain: &[(f64, f64)]) -> MetricChart {
    MetricChart::new(ChartDescription {
        name: name.into(),
        signature: None,
        coordinates: coords.iter().map(|s| s.to_string()).collect(),
        metric: rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        domain: domain.to_vec(),
        ..Default::default()
    })
    .unwrap()
}

fn diagonal(name: &str, coords: &[&str], entries: &[String], domain: &[(f64, f64)]) -> MetricChart {
    let n = entries.len();
    let rows: Vec<Vec<String>> =
        (0..n).map(|i| (0..=i).map(|j| if i == j { entries[i].clone() } else { "0".into() }).collect()).collect();
    let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
    let rows: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
    chart(name, coords, &rows, &[], domain)
}

fn xs(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("x{k}")).collect()
}

/// A non-diagonal 4-metric with no symmetry, positive definite on `[-1, 1]⁴`.
pub fn lumpy4() -> MetricChart {
    chart(
        "lumpy",
        &["x1", "x2", "x3", "x4"],
        &[
            &["1 + 0.2*sin(x2)"],
            &["0.1*x3*x1", "2 + 0.3*cos(x1*x4)"],
            &["0", "0.05*sin(x4)", "exp(0.2*x1)"],
            &["0.1*x2^2", "0", "0.1*cos(x3)", "1.5 + 0.1*x1*x2"],
        ],
        &[],
        &[(-1.0, 1.0); 4],
    )
}

/// A generic 6-metric: diagonal plus small off-diagonal couplings.
pub fn lumpy6() -> MetricChart {
    let c = xs(6);
    let names: Vec<&str> = c.iter().map(String::as_str).collect();
    chart(
        "lumpy6",
        &names,
        &[
            &["1 + 0.2*sin(x2)*x3"],
            &["0.1*x3", "1.3 + 0.2*cos(x1)"],
            &["0", "0.05*x4*x5", "0.9 + 0.1*x6^2"],
            &["0.05*sin(x6)", "0", "0", "1.1 + 0.1*x1*x2"],
            &["0", "0", "0.1*x1", "0", "1 + 0.2*sin(x4)"],
            &["0", "0.05*x3^2", "0", "0.05*cos(x5)", "0", "1.2 - 0.1*x2*x4"],
        ],
        &[],
        &[(-1.0, 1.0); 6],
    )
}

pub fn schwarzschild() -> MetricChart {
    let mut d = chart(
        "schwarzschild",
        &["t", "r", "theta", "phi"],
        &[&["-(1 - 2*m/r)"], &["0", "1/(1 - 2*m/r)"], &["0", "0", "r^2"], &["0", "0", "0", "r^2*sin(theta)^2"]],
        &[("m", 1.0)],
        &[(0.0, 1.0), (3.0, 10.0), (0.5, 2.5), (0.0, 6.0)],
    )
    .to_description();
    d.signature = Some(Signature { negative: 1, positive: 3 });
    d.scale = Some("1".into());
    MetricChart::new(d).unwrap()
}

/// Unit round `Sⁿ` in stereographic coordinates.
pub fn sphere(n: usize) -> MetricChart {
    let c = xs(n);
    let names: Vec<&str> = c.iter().map(String::as_str).collect();
    let sum = c.iter().map(|x| format!("{x}^2")).collect::<Vec<_>>().join(" + ");
    diagonal(&format!("sphere_{n}"), &names, &vec![format!("4/(1 + {sum})^2"); n], &vec![(-1.0, 1.0); n])
}

pub fn flat(n: usize) -> MetricChart {
    let c = xs(n);
    let names: Vec<&str> = c.iter().map(String::as_str).collect();
    diagonal(&format!("flat_{n}"), &names, &vec!["1".to_string(); n], &vec![(-1.0, 1.0); n])
}

/// `e^{2 sin(x1) x2} δ` on `Rⁿ`.
pub fn conformally_flat(n: usize) -> MetricChart {
    let c = xs(n);
    let names: Vec<&str> = c.iter().map(String::as_str).collect();
    diagonal(&format!("cf_{n}"), &names, &vec!["exp(2*sin(x1)*x2)".to_string(); n], &vec![(-1.0, 1.0); n])
}
