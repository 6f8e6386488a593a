use std::time::Instant;

use rayon::prelude::*;

use crate::connection::whittaker_eval;
use crate::cs_confluence::{c_function_limit_error, confluence_error};
use crate::dd::Dd;
use crate::domain::{cone_level, PositionPoint, SpectralPoint};
use crate::dual_ops::{dde_residual, residue_probe, Hyperplane, ProbeTarget};
use crate::error::Result;
use crate::hc_series::{phi_eval, toda_laplacian_residual, TruncationPlan};
use crate::scalar::{cx, Cx, Real};
use crate::univariate::{bessel_phi, whittaker_m_phi};

use super::args::{RunConfig, Suite};
use super::draws;
use super::report::Record;
use super::CliError;

const PDE_DRAWS: usize = 10;
const DDE_DRAWS: usize = 5;
const PDE_TOL: f64 = 1e-8;
const DDE_TOL: f64 = 1e-8;
const M_FUNCTION_TOL: f64 = 1e-10;
const BESSEL_TOL: f64 = 1e-8;
const RESIDUE_TOL: f64 = 1e-6;
const SLOPE_TOL: f64 = 0.2;
const CONFLUENCE_GRID: [f64; 3] = [4.0, 6.0, 8.0];

/// What a check measured. Passes when `value ≤ threshold` unless `pass`
/// overrides the comparison.
struct Measure {
    value: f64,
    bound: Option<f64>,
    condition: Option<f64>,
    pass: Option<bool>,
    detail: Option<String>,
}

impl Measure {
    fn value(value: f64) -> Self {
        Measure { value, bound: None, condition: None, pass: None, detail: None }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

type Job = Box<dyn Fn() -> Vec<Record> + Send + Sync>;

struct Ctx {
    suite: &'static str,
    bits: u32,
}

impl Ctx {
    fn record(&self, check: String, anchor: &str, threshold: f64, start: Instant, measured: Result<Measure>) -> Record {
        let millis = start.elapsed().as_secs_f64() * 1e3;
        let (value, bound, condition, pass, detail) = match measured {
            Ok(m) => {
                let pass = m.pass.unwrap_or(m.value <= threshold);
                (m.value, m.bound, m.condition, pass, m.detail)
            }
            Err(e) => (f64::NAN, None, None, false, Some(e.to_string())),
        };
        Record {
            suite: self.suite.into(),
            check,
            anchor: anchor.into(),
            value_re: value,
            value_im: 0.0,
            bound,
            threshold: Some(threshold),
            pass,
            millis,
            condition,
            bits: Some(self.bits),
            detail,
        }
    }
}

fn ranks(cfg: &RunConfig, default: &[usize]) -> Vec<usize> {
    cfg.n.map_or_else(|| default.to_vec(), |n| vec![n])
}

fn plan(cfg: &RunConfig) -> TruncationPlan {
    TruncationPlan::new(cfg.max_level).with_eta(cfg.eta)
}

fn in_precision<R>(bits: u32, double: impl FnOnce() -> R, wide: impl FnOnce() -> R) -> R {
    if bits == 53 {
        double()
    } else {
        wide()
    }
}

fn pde_residual<T: Real>(xi: &SpectralPoint, x: &PositionPoint, g: Cx<f64>, plan: &TruncationPlan) -> Result<f64> {
    toda_laplacian_residual(&xi.cast::<T>(), &x.cast::<T>(), cx::from_c64(g), plan)
}

fn dde<T: Real>(
    ell: usize,
    xi: &SpectralPoint,
    x: &PositionPoint,
    g: Cx<f64>,
    plan: &TruncationPlan,
) -> Result<(f64, f64)> {
    dde_residual(ell, &xi.cast::<T>(), &x.cast::<T>(), cx::from_c64(g), plan)
}

fn pde_jobs(cfg: &RunConfig) -> Result<Vec<Job>> {
    let ctx = std::sync::Arc::new(Ctx { suite: "pde", bits: cfg.bits_or(53) });
    let threshold = cfg.tol.unwrap_or(PDE_TOL);
    let plan = plan(cfg);
    let mut rng = draws::rng(cfg.seed);
    let mut jobs: Vec<Job> = Vec::new();
    for n in ranks(cfg, &[2, 3]) {
        for d in 0..PDE_DRAWS {
            let xi = draws::spectral(&mut rng, n);
            let x = draws::position(&mut rng, n);
            let g = cfg.g.unwrap_or_else(|| draws::coupling(&mut rng));
            let ctx = ctx.clone();
            jobs.push(Box::new(move || {
                let start = Instant::now();
                let r = in_precision(
                    ctx.bits,
                    || pde_residual::<f64>(&xi, &x, g, &plan),
                    || pde_residual::<Dd>(&xi, &x, g, &plan),
                );
                let check = format!("hc_series::toda_laplacian_residual n={n} draw={d}");
                vec![ctx.record(
                    check,
                    "eigenvalue equation L phi = <xi,xi> phi",
                    threshold,
                    start,
                    r.map(Measure::value),
                )]
            }));
        }
    }
    Ok(jobs)
}

fn dde_jobs(cfg: &RunConfig) -> Result<Vec<Job>> {
    let ctx = std::sync::Arc::new(Ctx { suite: "dde", bits: cfg.bits_or(53) });
    let threshold = cfg.tol.unwrap_or(DDE_TOL);
    let plan = plan(cfg);
    let mut rng = draws::rng(cfg.seed);
    let mut jobs: Vec<Job> = Vec::new();
    for n in ranks(cfg, &[2, 3]) {
        for d in 0..DDE_DRAWS {
            let xi = draws::spectral(&mut rng, n);
            let x = draws::position(&mut rng, n);
            let g = cfg.g.unwrap_or_else(|| draws::coupling(&mut rng));
            for ell in 1..=n {
                let (ctx, xi, x) = (ctx.clone(), xi.clone(), x.clone());
                jobs.push(Box::new(move || {
                    let start = Instant::now();
                    let r = in_precision(
                        ctx.bits,
                        || dde::<f64>(ell, &xi, &x, g, &plan),
                        || dde::<Dd>(ell, &xi, &x, g, &plan),
                    );
                    let check = format!("dual_ops::dde_residual n={n} draw={d} l={ell}");
                    let anchor = "difference equation D_l Phi_xi = exp(x_1 + ... + x_l) Phi_xi";
                    let m = r.map(|(res, cond)| Measure { condition: Some(cond), ..Measure::value(res) });
                    vec![ctx.record(check, anchor, threshold, start, m)]
                }));
            }
        }
    }
    Ok(jobs)
}

/// Twenty `(ξ, x, g)` triples covering `ξ ∈ {0.1i, …, 0.9i} ∪ {0.2, …, 0.45}`,
/// `x ∈ [0.5, 3]`, `g ∈ {0, 0.7, 1.5}`.
pub fn univariate_grid() -> Vec<(Cx<f64>, f64, Cx<f64>)> {
    let mut xis: Vec<Cx<f64>> = (1..=9).map(|k| Cx::new(0.0, 0.1 * k as f64)).collect();
    xis.extend((0..6).map(|k| Cx::new(0.2 + 0.05 * k as f64, 0.0)));
    let gs = [0.0, 0.7, 1.5];
    (0..20).map(|k| (xis[k % xis.len()], 0.5 + 2.5 * k as f64 / 19.0, Cx::new(gs[k % 3], 0.0))).collect()
}

fn univariate_jobs(cfg: &RunConfig) -> Result<Vec<Job>> {
    let ctx = std::sync::Arc::new(Ctx { suite: "univariate", bits: cfg.bits_or(53) });
    let plan = plan(cfg);
    let mut jobs: Vec<Job> = Vec::new();
    for (k, (xi, x, g)) in univariate_grid().into_iter().enumerate() {
        let ctx = ctx.clone();
        let m_tol = cfg.tol.unwrap_or(M_FUNCTION_TOL);
        let k_tol = cfg.tol.unwrap_or(BESSEL_TOL);
        jobs.push(Box::new(move || {
            let spectral = SpectralPoint::new(vec![xi]).expect("rank one");
            let pos = PositionPoint::new(vec![Cx::new(x, 0.0)]).expect("rank one");
            let tag = format!("point={k} xi={xi} x={x:.4} g={}", g.re);

            let start = Instant::now();
            let m = (|| {
                let oracle = whittaker_m_phi(xi, Cx::new(x, 0.0), g)?;
                let series = in_precision(
                    ctx.bits,
                    || phi_eval(&spectral, &pos, g, &plan).map(|v| (v.value, v.tail_bound)),
                    || {
                        phi_eval(&spectral.cast::<Dd>(), &pos.cast::<Dd>(), cx::from_c64(g), &plan)
                            .map(|v| (cx::to_c64(v.value), v.tail_bound))
                    },
                )?;
                Ok(Measure { bound: Some(series.1), ..Measure::value((series.0 - oracle).norm() / oracle.norm()) })
            })();
            let mut out = vec![ctx.record(
                format!("hc_series::phi_eval vs univariate::whittaker_m_phi {tag}"),
                "rank-one reduction to the Whittaker M-function",
                m_tol,
                start,
                m,
            )];

            let start = Instant::now();
            let b = (|| {
                let oracle = bessel_phi(xi, Cx::new(x, 0.0))?;
                let zero = Cx::new(0.0, 0.0);
                let value = in_precision(
                    ctx.bits,
                    || whittaker_eval(&spectral, &pos, zero, &plan).map(|v| v.value),
                    || {
                        whittaker_eval(&spectral.cast::<Dd>(), &pos.cast::<Dd>(), cx::from_c64(zero), &plan)
                            .map(|v| cx::to_c64(v.value))
                    },
                )?;
                Ok(Measure::value((value - oracle).norm() / oracle.norm()))
            })();
            out.push(ctx.record(
                format!("connection::whittaker_eval vs univariate::bessel_phi point={k} xi={xi} x={x:.4} g=0"),
                "g = 0 rank-one reduction to the Macdonald function",
                k_tol,
                start,
                b,
            ));
            out
        }));
    }
    Ok(jobs)
}

/// A base point on the hyperplane, regular off it.
pub fn residue_base(plane: Hyperplane, n: usize) -> SpectralPoint {
    let h = Cx::new(0.23, 0.19);
    let mut v = match plane {
        Hyperplane::Single(m) => vec![Cx::new(m as f64 / 2.0, 0.0), Cx::new(0.31, 0.17)],
        Hyperplane::Pair(m) => vec![Cx::new(m as f64, 0.0) - h, h],
    };
    v.extend([Cx::new(-0.21, 0.58)].iter().copied().take(n.saturating_sub(2)));
    SpectralPoint::new(v).expect("nonempty")
}

fn residue_position(n: usize) -> PositionPoint {
    let x = [2.4, 1.5, 0.6];
    PositionPoint::real(&x[3 - n..]).expect("nonempty")
}

fn residue_jobs(cfg: &RunConfig) -> std::result::Result<Vec<Job>, CliError> {
    let n = cfg.n.unwrap_or(2);
    if !(2..=3).contains(&n) {
        return Err(CliError::Usage(format!("the residues suite runs at n = 2 or 3, not {n}")));
    }
    let ctx = std::sync::Arc::new(Ctx { suite: "residues", bits: cfg.bits_or(106) });
    let threshold = cfg.tol.unwrap_or(RESIDUE_TOL);
    let plan = plan(cfg);
    let g = cfg.g.unwrap_or(Cx::new(0.4, 0.0));
    let mut jobs: Vec<Job> = Vec::new();
    for m in cfg.m.clone() {
        for plane in [Hyperplane::Single(m), Hyperplane::Pair(m)] {
            let ctx = ctx.clone();
            jobs.push(Box::new(move || {
                let start = Instant::now();
                let base = residue_base(plane, n);
                let x = residue_position(n);
                let probe = in_precision(
                    ctx.bits,
                    || residue_probe(plane, &base, &x, g, 1e-3, 3, ProbeTarget::Symmetrized, &plan),
                    || {
                        residue_probe(
                            plane,
                            &base.cast::<Dd>(),
                            &x.cast::<Dd>(),
                            cx::from_c64(g),
                            1e-3,
                            3,
                            ProbeTarget::Symmetrized,
                            &plan,
                        )
                    },
                );
                let family = match plane {
                    Hyperplane::Single(_) => "2xi_1",
                    Hyperplane::Pair(_) => "xi_1+xi_2",
                };
                let anchor = "Phi has no residue on the hyperplanes 2 xi_1 = m and xi_1 + xi_2 = m";
                let check = format!("dual_ops::residue_probe {family}={m} n={n}");
                let (residue, slope) = match probe {
                    Ok(p) => {
                        let cond = Some(p.condition);
                        let detail = format!("|residue| = {:e}, |Phi| = {:e}", p.extrapolated.norm(), p.reference);
                        (
                            Ok(Measure { condition: cond, ..Measure::value(p.extrapolated.norm() / p.reference) }
                                .with_detail(detail)),
                            Ok(Measure::value((p.slope - 1.0).abs()).with_detail(format!("slope = {}", p.slope))),
                        )
                    }
                    Err(e) => (Err(e.clone()), Err(e)),
                };
                vec![
                    ctx.record(format!("{check} relative residue"), anchor, threshold, start, residue),
                    ctx.record(format!("{check} |slope - 1|"), anchor, SLOPE_TOL, start, slope),
                ]
            }));
        }
    }
    Ok(jobs)
}

/// Fixed regular points for the confluence suite.
pub fn confluence_point(n: usize) -> (SpectralPoint, PositionPoint, Cx<f64>) {
    let spectral = [Cx::new(0.12, 0.35), Cx::new(-0.2, 0.8), Cx::new(0.3, 1.3)];
    let position = [2.5, 1.6, 0.7];
    let xi = if n == 1 { vec![Cx::new(0.0, 0.3)] } else { spectral[..n].to_vec() };
    let x = if n == 1 { vec![1.0] } else { position[3 - n..].to_vec() };
    let g = if n == 1 { 1.0 } else { 0.5 };
    (SpectralPoint::new(xi).expect("nonempty"), PositionPoint::in_chamber(&x).expect("chamber"), Cx::new(g, 0.0))
}

/// Largest ratio of consecutive entries; below 1 iff strictly decreasing.
fn worst_ratio(errors: &[f64]) -> f64 {
    errors.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn decreasing(errors: Vec<f64>) -> Measure {
    let ratio = worst_ratio(&errors);
    Measure { pass: Some(ratio < 1.0), ..Measure::value(ratio) }.with_detail(format!(
        "errors {} at c = {CONFLUENCE_GRID:?}",
        errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")
    ))
}

fn confluence_jobs(cfg: &RunConfig) -> std::result::Result<Vec<Job>, CliError> {
    let ns = ranks(cfg, &[1, 2]);
    if let Some(&n) = ns.iter().find(|&&n| n > 3) {
        return Err(CliError::Usage(format!("the confluence suite runs at n <= 3, not {n}")));
    }
    let ctx = std::sync::Arc::new(Ctx { suite: "confluence", bits: cfg.bits_or(53) });
    let plan = plan(cfg);
    let mut jobs: Vec<Job> = Vec::new();
    for n in ns {
        let (xi, x, g0) = confluence_point(n);
        let g = cfg.g.unwrap_or(g0);
        let ctx = ctx.clone();
        jobs.push(Box::new(move || {
            let start = Instant::now();
            let rows = in_precision(
                ctx.bits,
                || confluence_error(&xi, &x, g, &CONFLUENCE_GRID, &plan),
                || confluence_error(&xi.cast::<Dd>(), &x.cast::<Dd>(), cx::from_c64(g), &CONFLUENCE_GRID, &plan),
            );
            let (phi, big) = match rows {
                Ok(rows) => {
                    let dominated = rows.iter().any(|r| r.truncation_dominated);
                    let note = |mut m: Measure| {
                        if dominated {
                            m.detail = m.detail.map(|d| format!("{d}; truncation not negligible"));
                        }
                        m.bound = rows.iter().map(|r| r.truncation).reduce(f64::max);
                        m
                    };
                    (
                        Ok(note(decreasing(rows.iter().map(|r| r.err_phi).collect()))),
                        Ok(note(decreasing(rows.iter().map(|r| r.err_big_phi).collect()))),
                    )
                }
                Err(e) => (Err(e.clone()), Err(e)),
            };
            let cstart = Instant::now();
            let cfun = CONFLUENCE_GRID
                .iter()
                .map(|&c| c_function_limit_error(&xi, g, c, plan.eta))
                .collect::<Result<Vec<f64>>>()
                .map(decreasing);
            vec![
                ctx.record(
                    format!("cs_confluence::confluence_error n={n} phi"),
                    "confluent limit of the CS series to phi",
                    1.0,
                    start,
                    phi,
                ),
                ctx.record(
                    format!("cs_confluence::confluence_error n={n} Phi"),
                    "confluent limit of the CS orbit sum to Phi",
                    1.0,
                    start,
                    big,
                ),
                ctx.record(
                    format!("cs_confluence::c_function_limit_error n={n}"),
                    "confluent limit of the CS c-function to C",
                    1.0,
                    cstart,
                    cfun,
                ),
            ]
        }));
    }
    Ok(jobs)
}

/// `C(n+m−1, m)` in exact integer arithmetic.
pub fn binomial_count(n: usize, m: u32) -> u128 {
    (1..=m as u128).fold(1u128, |acc, i| acc * (n as u128 - 1 + i) / i)
}

fn counts_jobs(cfg: &RunConfig) -> Result<Vec<Job>> {
    let ctx = std::sync::Arc::new(Ctx { suite: "counts", bits: 53 });
    let max_level = cfg.max_level;
    let mut jobs: Vec<Job> = Vec::new();
    for n in ranks(cfg, &[1, 2, 3, 4]) {
        let ctx = ctx.clone();
        jobs.push(Box::new(move || {
            let start = Instant::now();
            let bad: Vec<u32> =
                (0..=max_level).filter(|&m| cone_level(n, m).len() as u128 != binomial_count(n, m)).collect();
            let detail = if bad.is_empty() {
                format!("levels 0..={max_level} match")
            } else {
                format!("mismatched levels {bad:?}")
            };
            let m = Measure::value(bad.len() as f64).with_detail(detail);
            vec![ctx.record(
                format!("domain::cone_level n={n} M={max_level}"),
                "level counts C(n+m-1, m) of the dominance cone",
                0.0,
                start,
                Ok(m),
            )]
        }));
    }
    Ok(jobs)
}

/// Runs every check of `suite`; records come back in definition order.
pub fn cmd_verify(suite: Suite, cfg: &RunConfig) -> std::result::Result<Vec<Record>, CliError> {
    if cfg.n.is_some_and(|n| suite == Suite::Univariate && n != 1) {
        return Err(CliError::Usage("the univariate suite runs at n = 1".into()));
    }
    let jobs = match suite {
        Suite::Pde => pde_jobs(cfg)?,
        Suite::Dde => dde_jobs(cfg)?,
        Suite::Univariate => univariate_jobs(cfg)?,
        Suite::Residues => residue_jobs(cfg)?,
        Suite::Confluence => confluence_jobs(cfg)?,
        Suite::Counts => counts_jobs(cfg)?,
    };
    let records: Vec<Vec<Record>> = jobs.par_iter().map(|job| job()).collect();
    Ok(records.into_iter().flatten().collect())
}
