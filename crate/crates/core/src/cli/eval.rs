use std::time::Instant;

use crate::connection::{whittaker_eval, whittaker_eval_adaptive, WhittakerValue};
use crate::cs_confluence::{cs_phi_translated, cs_whittaker_normalized};
use crate::dd::Dd;
use crate::domain::{PositionPoint, SpectralPoint};
use crate::error::Result;
use crate::hc_series::{phi_eval, TruncationPlan};
use crate::scalar::{cx, Cx, Real};
use crate::univariate::{bessel_phi, whittaker_m_phi, whittaker_w_phi};

use super::args::{EvalTarget, RunConfig};
use super::report::Record;
use super::CliError;

const DEFAULT_G: f64 = 0.5;

struct Evaluation {
    value: Cx<f64>,
    bound: Option<f64>,
    condition: Option<f64>,
    bits: u32,
    detail: Option<String>,
}

impl EvalTarget {
    fn check(self) -> &'static str {
        match self {
            EvalTarget::Phi => "hc_series::phi_eval",
            EvalTarget::BigPhi => "connection::whittaker_eval",
            EvalTarget::CsPhi => "cs_confluence::cs_phi_translated",
            EvalTarget::CsBigPhi => "cs_confluence::cs_whittaker_normalized",
            EvalTarget::M => "univariate::whittaker_m_phi",
            EvalTarget::W => "univariate::whittaker_w_phi",
            EvalTarget::K => "univariate::bessel_phi",
        }
    }

    fn anchor(self) -> &'static str {
        match self {
            EvalTarget::Phi => "fundamental series phi_xi(x) = sum a_nu exp<xi - nu, x>",
            EvalTarget::BigPhi => "orbit sum Phi_xi = sum_w C(w xi) phi_{w xi}",
            EvalTarget::CsPhi => "translated CS series exp(-c<xi,rho>) phi^cs_xi(x + c rho; k(c))",
            EvalTarget::CsBigPhi => "normalized CS function gamma(k(c)) Phi^cs_xi(x + c rho; k(c))",
            EvalTarget::M => "rank-one M-function exp(xi x - exp(-x)/2) 1F1(1/2 + g - xi; 1 - 2 xi; exp(-x))",
            EvalTarget::W => "rank-one W-function, the two-term orbit sum of M-functions",
            EvalTarget::K => "Macdonald function K_xi(exp(-x)/2) / sqrt(pi)",
        }
    }

    fn is_cs(self) -> bool {
        matches!(self, EvalTarget::CsPhi | EvalTarget::CsBigPhi)
    }

    fn is_rank_one(self) -> bool {
        matches!(self, EvalTarget::M | EvalTarget::W | EvalTarget::K)
    }
}

fn from_whittaker<T: Real>(v: WhittakerValue<T>) -> Evaluation {
    Evaluation {
        value: cx::to_c64(v.value),
        bound: Some(v.tail_bound),
        condition: Some(v.condition),
        bits: v.bits,
        detail: v.flagged.then(|| "orbit sum cancellation exceeds the target accuracy".to_owned()),
    }
}

fn run_series<T: Real>(
    target: EvalTarget,
    xi: &SpectralPoint,
    x: &PositionPoint,
    g: Cx<f64>,
    c: f64,
    plan: &TruncationPlan,
) -> Result<Evaluation> {
    let (xi, x, g) = (xi.cast::<T>(), x.cast::<T>(), cx::from_c64::<T>(g));
    Ok(match target {
        EvalTarget::Phi => {
            let v = phi_eval(&xi, &x, g, plan)?;
            Evaluation {
                value: cx::to_c64(v.value),
                bound: Some(v.tail_bound),
                condition: None,
                bits: T::BITS,
                detail: None,
            }
        }
        EvalTarget::BigPhi => from_whittaker(whittaker_eval(&xi, &x, g, plan)?),
        EvalTarget::CsPhi => {
            let v = cs_phi_translated(&xi, &x, g, T::from_f64(c), plan)?;
            Evaluation {
                value: cx::to_c64(v.value),
                bound: Some(v.tail_estimate),
                condition: None,
                bits: T::BITS,
                detail: Some("bound is an empirical tail estimate".into()),
            }
        }
        EvalTarget::CsBigPhi => {
            let mut e = from_whittaker(cs_whittaker_normalized(&xi, &x, g, T::from_f64(c), plan)?);
            e.detail.get_or_insert_with(|| "bound is an empirical tail estimate".into());
            e
        }
        _ => unreachable!("rank-one targets are evaluated in double precision"),
    })
}

fn rank_one(target: EvalTarget, xi: Cx<f64>, x: Cx<f64>, g: Cx<f64>) -> Result<Evaluation> {
    let value = match target {
        EvalTarget::M => whittaker_m_phi(xi, x, g)?,
        EvalTarget::W => whittaker_w_phi(xi, x, g)?,
        _ => bessel_phi(xi, x)?,
    };
    Ok(Evaluation { value, bound: None, condition: None, bits: 53, detail: None })
}

fn position(target: EvalTarget, x: &[Cx<f64>]) -> Result<PositionPoint> {
    if target.is_cs() {
        if let Some(z) = x.iter().find(|z| z.im != 0.0) {
            return Err(crate::Error::ChamberViolation(format!("CS positions must be real, got {z}")));
        }
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        return PositionPoint::in_chamber(&re);
    }
    PositionPoint::new(x.to_vec())
}

/// Evaluates `target` at the configured `(ξ, x, g)`.
pub fn cmd_eval(target: EvalTarget, cfg: &RunConfig) -> std::result::Result<Record, CliError> {
    let xi = cfg.xi.clone().ok_or_else(|| CliError::Usage("eval needs --xi".into()))?;
    let x = cfg.x.clone().ok_or_else(|| CliError::Usage("eval needs --x".into()))?;
    if xi.len() != x.len() {
        return Err(CliError::Usage(format!("--xi has {} entries but --x has {}", xi.len(), x.len())));
    }
    if let Some(n) = cfg.n {
        if n != xi.len() {
            return Err(CliError::Usage(format!("--n {n} does not match the {} entries of --xi", xi.len())));
        }
    }
    if target.is_rank_one() {
        if xi.len() != 1 {
            return Err(CliError::Usage(format!("target {} is rank one", target.check())));
        }
        if cfg.precision.is_some_and(|b| b > 53) {
            return Err(CliError::Usage(format!("target {} is available in 53-bit precision only", target.check())));
        }
    }
    let g = cfg.g.unwrap_or(Cx::new(DEFAULT_G, 0.0));
    let mut plan = TruncationPlan::new(cfg.max_level).with_eta(cfg.eta);
    if let Some(tol) = cfg.tol {
        plan = plan.with_tol(tol);
    }
    let start = Instant::now();
    let evaluation = if target.is_rank_one() {
        rank_one(target, xi[0], x[0], g)
    } else {
        let spectral = SpectralPoint::new(xi)?;
        let pos = position(target, &x)?;
        match (target, cfg.precision) {
            (EvalTarget::BigPhi, None) => whittaker_eval_adaptive(&spectral, &pos, g, &plan).map(from_whittaker),
            (_, None | Some(53)) => run_series::<f64>(target, &spectral, &pos, g, cfg.c, &plan),
            _ => run_series::<Dd>(target, &spectral, &pos, g, cfg.c, &plan),
        }
    }?;
    let millis = start.elapsed().as_secs_f64() * 1e3;
    let finite = evaluation.value.re.is_finite() && evaluation.value.im.is_finite();
    Ok(Record {
        suite: "eval".into(),
        check: target.check().into(),
        anchor: target.anchor().into(),
        value_re: evaluation.value.re,
        value_im: evaluation.value.im,
        bound: evaluation.bound,
        threshold: cfg.tol,
        pass: finite,
        millis,
        condition: evaluation.condition,
        bits: Some(evaluation.bits),
        detail: evaluation.detail,
    })
}
