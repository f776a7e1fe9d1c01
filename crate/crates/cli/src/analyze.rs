//! The full per-point pipeline and the report it produces.

use confein_core::chart::MetricChart;
use confein_core::curvature::{CurvatureJets, CurvatureStack};
use confein_core::obstruction::{self, B6Extraction};
use confein_core::scales;
use confein_core::tensor::TensorValue;
use confein_core::tractor::{self, BoxW};
use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

pub const TOOL_NAME: &str = "confein";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub points: usize,
    pub seed: u64,
    pub order: usize,
    pub tol: f64,
    pub skip_b6: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { points: 20, seed: 42, order: 4, tol: 1e-8, skip_b6: false }
    }
}

impl AnalyzeOptions {
    fn computes_b6(&self, n: usize) -> bool {
        n == 6 && !self.skip_b6
    }

    /// Jet order actually used: the kernel-candidate check needs 5, ⧠W needs 6.
    pub fn effective_order(&self, n: usize) -> usize {
        self.order.max(if self.computes_b6(n) { 6 } else { 5 })
    }
}

const PRIMES: [u8; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Halton points over the domain box; point `i` uses sequence index `seed + i + 1`.
pub fn sample_points(chart: &MetricChart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let index = seed as usize + i + 1;
            chart
                .domain
                .iter()
                .zip(PRIMES)
                .map(|(&(lo, hi), base)| lo + (hi - lo) * halton::number(base, index))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureRecord {
    pub riemann_norm: f64,
    pub weyl_norm: f64,
    pub cotton_norm: f64,
    pub bach_norm: f64,
    pub scalar: f64,
    pub j: f64,
    pub einstein_residual: f64,
    pub decomposition_defect: f64,
    pub weyl_trace: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarExtensionRecord {
    pub extended: f64,
    pub j: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaleRecord {
    pub sigma: f64,
    pub scale_singular: bool,
    /// Upper slots `(σ, μ^a, ρ)`.
    pub tractor: Vec<f64>,
    pub x_pairing: f64,
    pub parallel_residual: f64,
    pub conformal_einstein_residual: f64,
    pub c_space_residual: f64,
    /// Block formula against the `Ω I` matrix contraction.
    pub c_space_representation_gap: f64,
    pub d_residual: f64,
    pub scalar_extension: ScalarExtensionRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankRecord {
    pub rank: usize,
    pub threshold: f64,
    pub singular_values: Vec<f64>,
    pub kernel: Vec<Vec<f64>>,
    pub skew_invariants_vanish: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericRecord {
    pub det_l: f64,
    pub operator_norm: f64,
    pub min_singular_value: f64,
    pub threshold: f64,
    pub weyl_negligible: bool,
    pub weakly_generic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KRecord {
    /// `K^e`, upper index.
    pub k: Vec<f64>,
    pub k_norm: f64,
    pub c_residual: f64,
    pub b_residual: f64,
    pub curl: f64,
    pub gradient_norm: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GRecord {
    pub norm: f64,
    /// `det L²·‖R‖ + ‖D·A‖²`, the natural size of `G`.
    pub scale: f64,
    pub vanishes: bool,
    /// `1e-6·(det L²·‖P‖ + ‖D·A‖²)`.
    pub schouten_bound: f64,
    pub antisymmetric_norm: f64,
    pub trace: f64,
    pub d_dot_a_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRecord {
    pub residual: f64,
    pub gradient_norm: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub tractor: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct B6Record {
    pub b6: Vec<f64>,
    pub norm: f64,
    pub off_slot_norm: f64,
    pub scale: f64,
    pub w_norm: f64,
    pub sharp_sign: f64,
    pub trace: f64,
    pub symmetric_norm: f64,
    pub antisymmetric_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub point: Vec<f64>,
    pub error: Option<String>,
    pub curvature: Option<CurvatureRecord>,
    pub scale: Option<ScaleRecord>,
    pub rank: Option<RankRecord>,
    pub weakly_generic: Option<GenericRecord>,
    pub k_candidate: Option<KRecord>,
    pub k_error: Option<String>,
    pub g_invariant: Option<GRecord>,
    pub kernel_candidate: Option<CandidateRecord>,
    pub kernel_candidate_error: Option<String>,
    pub b6: Option<B6Record>,
}

impl PointRecord {
    fn failed(index: usize, point: Vec<f64>, error: String) -> PointRecord {
        PointRecord {
            index,
            point,
            error: Some(error),
            curvature: None,
            scale: None,
            rank: None,
            weakly_generic: None,
            k_candidate: None,
            k_error: None,
            g_invariant: None,
            kernel_candidate: None,
            kernel_candidate_error: None,
            b6: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub chart: String,
    pub dimension: usize,
    pub signature: [usize; 2],
    pub seed: u64,
    pub points: usize,
    pub order: usize,
    pub order_used: usize,
    pub tol: f64,
    pub skip_b6: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub curvature: String,
    pub rank_threshold: String,
    pub sharp_sharp_sign: Option<f64>,
    pub g_symmetrisation: String,
    pub g_vanishing: String,
    pub norms: String,
    pub einstein_scale: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stat {
    pub max: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub evaluated_points: usize,
    pub failed_points: usize,
    pub einstein: bool,
    pub conformally_einstein_candidate: bool,
    pub weakly_generic_fraction: f64,
    pub max_rank: usize,
    pub full_rank_fraction: f64,
    pub norms: IndexMap<String, Stat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub run: RunMetadata,
    pub conventions: Conventions,
    pub points: Vec<PointRecord>,
    pub aggregate: Aggregate,
}

impl Report {
    pub fn to_json(&self) -> String {
        crate::json::to_string(self)
    }
}

fn stack_norm(stack: &CurvatureStack, t: &Option<TensorValue>) -> f64 {
    t.as_ref().map_or(0.0, |t| stack.norm(t))
}

fn scale_record(
    chart: &MetricChart,
    curv: &CurvatureJets,
    stack: &CurvatureStack,
    omega: &TensorValue,
    grad_omega: &TensorValue,
    point: &[f64],
) -> Result<Option<ScaleRecord>, String> {
    let Some(sigma_expr) = &chart.scale else { return Ok(None) };
    let sigma = scales::scale_jet(chart, sigma_expr, point, 3).map_err(|e| e.to_string())?;
    let built = scales::build_scale_tractor(curv, &sigma);
    let n = stack.n;
    let cs = obstruction::c_space_residual(stack, &built.tractor);
    let direct = obstruction::omega_contraction(omega, &built.slots);
    let mut gap: f64 = 0.0;
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                gap = gap.max((cs.get(&[c, a, b]) - direct.get(&[a, b, 1 + c])).abs());
            }
        }
    }
    let d = obstruction::d_residual(grad_omega, &built.slots);
    let ext = scales::scalar_extension_check(&built.tractor, stack.j, &stack.ginv);
    Ok(Some(ScaleRecord {
        sigma: built.tractor.sigma,
        scale_singular: built.scale_singular,
        x_pairing: built.tractor.x_pairing(),
        parallel_residual: scales::parallel_residual_at(curv, &sigma),
        conformal_einstein_residual: stack.norm(&scales::conformal_einstein_residual(curv, &sigma)),
        c_space_residual: stack.norm(&cs),
        c_space_representation_gap: gap,
        d_residual: d.raw_norm(),
        scalar_extension: ScalarExtensionRecord { extended: ext.extended, j: ext.j, deviation: ext.deviation },
        tractor: built.slots,
    }))
}

fn norm_of(v: &[f64], stack: &CurvatureStack) -> f64 {
    let t = TensorValue { data: v.to_vec(), ..TensorValue::zeros(stack.n, &[confein_core::tensor::Slot::Up]) };
    stack.norm(&t)
}

struct PointWork {
    record: PointRecord,
    boxw: Option<(BoxW, CurvatureStack)>,
}

fn analyze_point(chart: &MetricChart, index: usize, point: Vec<f64>, opts: &AnalyzeOptions) -> PointWork {
    let n = chart.dimension();
    let curv = match CurvatureJets::compute(chart, &point, opts.effective_order(n)) {
        Ok(c) => c,
        Err(e) => return PointWork { record: PointRecord::failed(index, point, e.to_string()), boxw: None },
    };
    let stack = curv.stack();
    let curvature = CurvatureRecord {
        riemann_norm: stack.riemann_norm(),
        weyl_norm: stack.norm(&stack.weyl),
        cotton_norm: stack_norm(&stack, &stack.cotton),
        bach_norm: stack_norm(&stack, &stack.bach),
        scalar: stack.scalar,
        j: stack.j,
        einstein_residual: stack.norm(&scales::einstein_residual(&stack)),
        decomposition_defect: stack.norm(&stack.decomposition_defect()),
        weyl_trace: stack.weyl_trace_norm(),
    };
    let omega_jets = tractor::tractor_curvature(&curv).truncate(1);
    let conn = tractor::coupled_connection(&curv);
    let omega = omega_jets.value();
    let grad_omega = conn.nabla(&omega_jets).value();
    let mut record = PointRecord::failed(index, point.clone(), String::new());
    record.error = None;
    record.curvature = Some(curvature);
    match scale_record(chart, &curv, &stack, &omega, &grad_omega, &point) {
        Ok(s) => record.scale = s,
        Err(e) => record.error = Some(format!("scale: {e}")),
    }
    let rt = obstruction::rank_skew_test(&omega, &grad_omega, opts.tol, stack.riemann_norm());
    let rank = rt.rank;
    record.rank = Some(RankRecord {
        rank: rt.rank,
        threshold: rt.threshold,
        singular_values: rt.singular_values,
        kernel: rt.kernel,
        skew_invariants_vanish: rt.skew_invariants_vanish,
    });
    let wg = obstruction::weakly_generic_check(&stack);
    record.weakly_generic = Some(GenericRecord {
        det_l: wg.det,
        operator_norm: wg.operator_norm,
        min_singular_value: wg.min_singular_value,
        threshold: wg.threshold,
        weyl_negligible: wg.weyl_negligible,
        weakly_generic: wg.weakly_generic,
    });
    if wg.weakly_generic {
        let generic = obstruction::generic_jets(&curv);
        match obstruction::conformal_k(&wg, &stack) {
            Ok(k) => {
                let (curl, gradient_norm) = generic
                    .as_ref()
                    .ok()
                    .and_then(|gj| obstruction::k_curl_from(&curv, gj).ok())
                    .unwrap_or((f64::NAN, f64::NAN));
                let k_norm = norm_of(&k, &stack);
                record.k_candidate = Some(KRecord {
                    k_norm,
                    c_residual: stack.norm(&obstruction::c_residual_with_k(&stack, &k)),
                    b_residual: stack.norm(&obstruction::b_residual(&stack, &k)),
                    curl,
                    gradient_norm,
                    exact: curl <= 1e-6 * k_norm,
                    k,
                });
            }
            Err(e) => record.k_error = Some(e.to_string()),
        }
        match generic.as_ref().map_err(Clone::clone).and_then(|gj| obstruction::g_invariant_from(&curv, gj)) {
            Ok(g) => {
                let norm = stack.norm(&g.g);
                let det2 = g.det_l * g.det_l;
                let da2 = g.d_dot_a_norm * g.d_dot_a_norm;
                let scale = det2 * stack.riemann_norm() + da2;
                record.g_invariant = Some(GRecord {
                    norm,
                    scale,
                    vanishes: norm <= opts.tol * scale,
                    schouten_bound: 1e-6 * (det2 * stack.norm(&stack.schouten) + da2),
                    antisymmetric_norm: g.antisymmetric_norm,
                    trace: g.trace,
                    d_dot_a_norm: g.d_dot_a_norm,
                });
            }
            Err(e) => record.k_error = Some(e.to_string()),
        }
        if rank == n + 1 {
            match obstruction::candidate_parallel_check(&curv) {
                Ok(c) => {
                    record.kernel_candidate = Some(CandidateRecord {
                        residual: c.residual,
                        gradient_norm: c.gradient_norm,
                        alpha: c.alpha,
                        beta: c.beta,
                        tractor: c.tractor,
                    })
                }
                Err(e) => record.kernel_candidate_error = Some(e.to_string()),
            }
        }
    }
    let boxw = opts.computes_b6(n).then(|| (BoxW::compute(&curv), stack));
    PointWork { record, boxw }
}

fn b6_record(b: B6Extraction) -> B6Record {
    B6Record {
        norm: b.b6.raw_norm(),
        b6: b.b6.data,
        off_slot_norm: b.off_slot_norm,
        scale: b.scale,
        w_norm: b.w_norm,
        sharp_sign: b.sharp_sign,
        trace: b.trace,
        symmetric_norm: b.symmetric_norm,
        antisymmetric_norm: b.antisymmetric_norm,
    }
}

fn stat(mut v: Vec<f64>) -> Option<Stat> {
    v.retain(|x| x.is_finite());
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len();
    let median = if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) };
    Some(Stat { max: v[m - 1], median })
}

fn aggregate(points: &[PointRecord], n: usize, tol: f64) -> Aggregate {
    let ok: Vec<&PointRecord> = points.iter().filter(|p| p.curvature.is_some()).collect();
    let count = ok.len();
    let frac = |f: &dyn Fn(&PointRecord) -> bool| {
        if count == 0 {
            0.0
        } else {
            ok.iter().filter(|p| f(p)).count() as f64 / count as f64
        }
    };
    let einstein = count > 0
        && count == points.len()
        && ok.iter().all(|p| {
            let c = p.curvature.as_ref().unwrap();
            c.einstein_residual <= tol * (c.riemann_norm + 1.0)
        });
    let candidate = count > 0
        && ok.iter().all(|p| {
            p.rank.as_ref().is_some_and(|r| r.skew_invariants_vanish)
                && p.g_invariant.as_ref().is_none_or(|g| g.vanishes)
                && p.b6.as_ref().is_none_or(|b| b.norm <= 1e-5 * b.scale)
        });
    let mut norms = IndexMap::new();
    let mut add = |name: &str, f: &dyn Fn(&PointRecord) -> Option<f64>| {
        if let Some(s) = stat(ok.iter().filter_map(|p| f(p)).collect()) {
            norms.insert(name.to_string(), s);
        }
    };
    add("einstein_residual", &|p| p.curvature.as_ref().map(|c| c.einstein_residual));
    add("weyl", &|p| p.curvature.as_ref().map(|c| c.weyl_norm));
    add("cotton", &|p| p.curvature.as_ref().map(|c| c.cotton_norm));
    add("bach", &|p| p.curvature.as_ref().map(|c| c.bach_norm));
    add("parallel_residual", &|p| p.scale.as_ref().map(|s| s.parallel_residual));
    add("c_space_residual", &|p| p.scale.as_ref().map(|s| s.c_space_residual));
    add("d_residual", &|p| p.scale.as_ref().map(|s| s.d_residual));
    add("k_c_residual", &|p| p.k_candidate.as_ref().map(|k| k.c_residual));
    add("b_residual", &|p| p.k_candidate.as_ref().map(|k| k.b_residual));
    add("k_curl", &|p| p.k_candidate.as_ref().map(|k| k.curl));
    add("g_invariant", &|p| p.g_invariant.as_ref().map(|g| g.norm));
    add("kernel_candidate_residual", &|p| p.kernel_candidate.as_ref().map(|c| c.residual));
    add("b6", &|p| p.b6.as_ref().map(|b| b.norm));
    Aggregate {
        evaluated_points: count,
        failed_points: points.len() - count,
        einstein,
        conformally_einstein_candidate: candidate,
        weakly_generic_fraction: frac(&|p| p.weakly_generic.as_ref().is_some_and(|w| w.weakly_generic)),
        max_rank: ok.iter().filter_map(|p| p.rank.as_ref().map(|r| r.rank)).max().unwrap_or(0),
        full_rank_fraction: frac(&|p| p.rank.as_ref().is_some_and(|r| r.rank == n + 2)),
        norms,
    }
}

/// Run the pipeline at the sampled points. Points are processed in parallel
/// and reassembled in index order.
pub fn analyze(chart: &MetricChart, opts: &AnalyzeOptions) -> Report {
    let n = chart.dimension();
    let pts = sample_points(chart, opts.points, opts.seed);
    let work: Vec<PointWork> =
        pts.into_par_iter().enumerate().map(|(i, p)| analyze_point(chart, i, p, opts)).collect();
    // one ♯♯ sign for the whole run, fixed at the first evaluated point
    let sign = work.iter().find_map(|w| w.boxw.as_ref().map(|(bw, _)| obstruction::choose_sharp_sign(bw, n)));
    let points: Vec<PointRecord> = work
        .into_iter()
        .map(|w| {
            let mut r = w.record;
            if let (Some((bw, stack)), Some(s)) = (w.boxw, sign) {
                r.b6 = Some(b6_record(obstruction::b6_from_box(&bw, &stack, s)));
            }
            r
        })
        .collect();
    let aggregate = aggregate(&points, n, opts.tol);
    Report {
        run: RunMetadata {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            chart: chart.name.clone(),
            dimension: n,
            signature: [chart.signature.negative, chart.signature.positive],
            seed: opts.seed,
            points: opts.points,
            order: opts.order,
            order_used: opts.effective_order(n),
            tol: opts.tol,
            skip_b6: opts.skip_b6,
        },
        conventions: Conventions {
            curvature: "R_ab^c_d = ∂_aΓ^c_bd − ∂_bΓ^c_ad + Γ^c_aeΓ^e_bd − Γ^c_beΓ^e_ad; Ric_bd = R_ab^a_d; \
                        J = Scal/(2(n−1)); P = (Ric − Jg)/(n−2)"
                .into(),
            rank_threshold: "singular value counts if > tol·max(σ_max, ‖Riemann‖)".into(),
            sharp_sharp_sign: sign,
            g_symmetrisation: "symmetric trace-free part; antisymmetric remainder reported separately".into(),
            g_vanishing: "‖G‖ ≤ tol·(det L²·‖Riemann‖ + ‖D·A‖²)".into(),
            norms: "tangent indices in the orthonormal frame of |g|; tractor slots raw".into(),
            einstein_scale: "g_E = σ^{-2}·g in the chart's trivialisation".into(),
        },
        points,
        aggregate,
    }
}
