//! Compactness verdicts for a finite family, reached three independent ways:
//!
//! * the Laplace route: L2-boundedness, Laplace equicontinuity and Laplace
//!   equivanishing at `x`;
//! * the Riesz–Kolmogorov route: L2-boundedness, exponential equicontinuity
//!   and exponential equivanishing at `x`;
//! * an epsilon-net oracle on the weighted members.
//!
//! A finite sample is always compact in the strict sense, so verdicts are
//! relative to a resolution window: the sweep ladders in [`SweepConfig`].
//! A criterion *passes* when some rung is below its threshold and *fails*
//! when every rung stays at or above a fixed floor (`plateau_factor` times
//! the threshold). In between, the sweep is inconclusive.

mod chains;

pub use chains::{
    check_lemma_exp_equicont, check_thm_bounded_reverse, check_thm_equicont_to_equivanish,
    check_thm_equicont_to_laplace_vanish, check_thm_laplace_vanish_reverse, run_chain_checks, ChainCheck, ChainLeg,
    ChainScales, Theorem,
};

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{Criterion, FamilyEvaluator, DEFAULT_SHIFTS};
use crate::error::{PegoError, Result};
use crate::halfline::{Label, PegoFamily, TimeGrid};
use crate::transform::FrequencyGrid;

pub const SCHEMA: &str = "pego-lab/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Compact,
    NonCompact,
    Inconclusive,
}

impl Verdict {
    pub fn matches(self, label: Label) -> bool {
        matches!((self, label), (Verdict::Compact, Label::Compact) | (Verdict::NonCompact, Label::NonCompact))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// Scale ladders and decision constants.
///
/// The defaults pair rung by rung: real-part shifts `sigma` with time
/// tails `T` (`sigma T = 0.12`), and frequency cutoffs `Y` with time shifts
/// `delta` (`delta Y = 0.256`), so both routes look at the same window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Increasing tail starts for exponential equivanishing.
    pub time_tails: Vec<f64>,
    /// Decreasing real-part shifts for Laplace equicontinuity.
    pub real_shifts: Vec<f64>,
    /// Decreasing shift bounds for exponential equicontinuity.
    pub time_shifts: Vec<f64>,
    /// Increasing frequency cutoffs for Laplace equivanishing.
    pub freq_cutoffs: Vec<f64>,
    pub plateau_factor: f64,
    pub net_radius: f64,
    pub n_shifts: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            time_tails: vec![0.5, 1.0, 2.0, 4.0],
            real_shifts: vec![0.24, 0.12, 0.06, 0.03],
            time_shifts: vec![0.032, 0.016, 0.008, 0.004, 0.002],
            freq_cutoffs: vec![8.0, 16.0, 32.0, 64.0, 128.0],
            plateau_factor: 2.0,
            net_radius: 0.3,
            n_shifts: DEFAULT_SHIFTS,
        }
    }
}

impl SweepConfig {
    pub fn ladder(&self, c: Criterion) -> &[f64] {
        match c {
            Criterion::ExpEquivanish => &self.time_tails,
            Criterion::LaplaceEquicont => &self.real_shifts,
            Criterion::ExpEquicont => &self.time_shifts,
            Criterion::LaplaceEquivanish => &self.freq_cutoffs,
            Criterion::L2Bound => &[],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.plateau_factor.is_finite() && self.plateau_factor > 1.0) {
            return Err(PegoError::Parameter(format!("plateau factor must exceed 1, got {}", self.plateau_factor)));
        }
        if !(self.net_radius.is_finite() && self.net_radius > 0.0) {
            return Err(PegoError::Parameter(format!("net radius must be > 0, got {}", self.net_radius)));
        }
        for c in
            [Criterion::ExpEquivanish, Criterion::LaplaceEquicont, Criterion::ExpEquicont, Criterion::LaplaceEquivanish]
        {
            let l = self.ladder(c);
            if l.is_empty() {
                return Err(PegoError::Scale(format!("{} sweep is empty", c.name())));
            }
            let ok = if c.sweeps_truncation() {
                l.windows(2).all(|w| w[0] < w[1])
            } else {
                l.windows(2).all(|w| w[0] > w[1])
            };
            if !ok {
                let dir = if c.sweeps_truncation() { "increasing" } else { "decreasing" };
                return Err(PegoError::Scale(format!("{} sweep must be strictly {dir}", c.name())));
            }
        }
        Ok(())
    }
}

/// Pass level for each criterion at tolerance `eps`.
///
/// Squared-norm quantities compare against `eps` directly; the root-valued
/// shift modulus against `sqrt(eps)`; the Laplace tail, which lacks the
/// `1/2pi` of its Plancherel partner, against `2 pi eps`.
pub fn threshold(c: Criterion, eps: f64) -> f64 {
    match c {
        Criterion::ExpEquivanish | Criterion::LaplaceEquicont => eps,
        Criterion::ExpEquicont => eps.sqrt(),
        Criterion::LaplaceEquivanish => 2.0 * PI * eps,
        Criterion::L2Bound => f64::MAX,
    }
}

/// Failure floor: `plateau_factor` times the threshold in squared units.
pub fn floor(c: Criterion, eps: f64, plateau_factor: f64) -> f64 {
    threshold(c, plateau_factor * eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub criterion: Criterion,
    pub threshold: f64,
    pub floor: f64,
    pub scales: Vec<f64>,
    pub suprema: Vec<f64>,
    pub status: Status,
}

impl SweepOutcome {
    fn classify(criterion: Criterion, threshold: f64, floor: f64, scales: Vec<f64>, suprema: Vec<f64>) -> Self {
        let status = if suprema.iter().any(|s| *s < threshold) {
            Status::Pass
        } else if suprema.iter().all(|s| *s >= floor) {
            Status::Fail
        } else {
            Status::Inconclusive
        };
        SweepOutcome { criterion, threshold, floor, scales, suprema, status }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteOutcome {
    pub criteria: Vec<SweepOutcome>,
    pub verdict: Verdict,
}

impl RouteOutcome {
    fn from_criteria(criteria: Vec<SweepOutcome>) -> Self {
        let verdict = if criteria.iter().any(|c| c.status == Status::Fail) {
            Verdict::NonCompact
        } else if criteria.iter().all(|c| c.status == Status::Pass) {
            Verdict::Compact
        } else {
            Verdict::Inconclusive
        };
        RouteOutcome { criteria, verdict }
    }

    pub fn status(&self, c: Criterion) -> Option<Status> {
        self.criteria.iter().find(|o| o.criterion == c).map(|o| o.status)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetOracle {
    pub radius: f64,
    /// Sizes of the nested subsamples (every 4th member, every 2nd, all).
    pub sample_sizes: Vec<usize>,
    pub net_sizes: Vec<usize>,
    pub saturated: bool,
}

impl NetOracle {
    pub fn verdict(&self) -> Verdict {
        if self.saturated {
            Verdict::Compact
        } else {
            Verdict::NonCompact
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessVerdict {
    pub laplace_route: RouteOutcome,
    pub rk_route: RouteOutcome,
    pub oracle: NetOracle,
    pub verdict: Verdict,
    pub agreement: bool,
}

/// Weighted-L2 distance between two sample vectors.
pub fn weighted_distance(a: &[Complex64], b: &[Complex64], dt: f64) -> f64 {
    (a.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>() * dt).sqrt()
}

/// Greedy farthest-point net of `members` at `radius`: seeded with the
/// first member, ties broken by lowest index. Returns the center indices.
pub fn greedy_net(members: &[&[Complex64]], radius: f64, dt: f64) -> Vec<usize> {
    if members.is_empty() {
        return Vec::new();
    }
    let mut centers = vec![0];
    let mut gap: Vec<f64> = members.iter().map(|m| weighted_distance(m, members[0], dt)).collect();
    loop {
        let (far, d) =
            gap.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        if d <= radius {
            return centers;
        }
        centers.push(far);
        let c = members[far];
        gap.par_iter_mut().zip(members.par_iter()).for_each(|(g, m)| {
            *g = g.min(weighted_distance(m, c, dt));
        });
    }
}

fn net_of_samples(weighted: &[Vec<Complex64>], radius: f64, dt: f64) -> NetOracle {
    let mut sample_sizes = Vec::new();
    let mut net_sizes = Vec::new();
    for stride in [4, 2, 1] {
        let sub: Vec<&[Complex64]> = weighted.iter().step_by(stride).map(|v| v.as_slice()).collect();
        sample_sizes.push(sub.len());
        net_sizes.push(greedy_net(&sub, radius, dt).len());
    }
    let saturated = net_sizes[1] == net_sizes[2];
    NetOracle { radius, sample_sizes, net_sizes, saturated }
}

/// Net sizes at `radius` on nested subsamples of the family; saturated when
/// the last two agree.
pub fn epsilon_net_oracle(family: &PegoFamily, radius: f64) -> Result<NetOracle> {
    let w = family.weighted_members()?;
    Ok(net_of_samples(&w, radius, family.grid.dt()))
}

/// Evaluates one criterion over its ladder.
pub fn sweep_criterion(ev: &FamilyEvaluator<'_>, c: Criterion, eps: f64, sweep: &SweepConfig) -> Result<SweepOutcome> {
    let thr = threshold(c, eps);
    let scales = sweep.ladder(c).to_vec();
    let suprema = ev.sweep(c, &scales, thr)?.into_iter().map(|r| r.supremum).collect();
    Ok(SweepOutcome::classify(c, thr, floor(c, eps, sweep.plateau_factor), scales, suprema))
}

fn l2_outcome(ev: &FamilyEvaluator<'_>) -> Result<SweepOutcome> {
    let r = ev.l2_bound();
    if !r.supremum.is_finite() {
        return Err(PegoError::Refused(format!(
            "family is not L2-bounded at order {} (supremum {})",
            ev.family.x(),
            r.supremum
        )));
    }
    Ok(SweepOutcome {
        criterion: Criterion::L2Bound,
        threshold: f64::MAX,
        floor: f64::MAX,
        scales: Vec::new(),
        suprema: vec![r.supremum],
        status: Status::Pass,
    })
}

fn evaluator<'a>(family: &'a PegoFamily, ygrid: FrequencyGrid, n_shifts: usize) -> Result<FamilyEvaluator<'a>> {
    FamilyEvaluator::new(family, ygrid, n_shifts).map_err(|e| match e {
        PegoError::NonFinite { .. } => PegoError::Refused(format!("family is not L2-bounded: {e}")),
        other => other,
    })
}

pub fn diagnose(
    family: &PegoFamily,
    eps: f64,
    ygrid: &FrequencyGrid,
    sweep: &SweepConfig,
) -> Result<CompactnessVerdict> {
    if family.is_empty() {
        return Err(PegoError::Parameter("cannot diagnose an empty family".into()));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(PegoError::Parameter(format!("eps must be > 0, got {eps}")));
    }
    sweep.validate()?;
    let ev = evaluator(family, *ygrid, sweep.n_shifts)?;
    let l2 = l2_outcome(&ev)?;

    let order =
        [Criterion::LaplaceEquicont, Criterion::LaplaceEquivanish, Criterion::ExpEquicont, Criterion::ExpEquivanish];
    let outcomes: Vec<SweepOutcome> =
        order.par_iter().map(|&c| sweep_criterion(&ev, c, eps, sweep)).collect::<Result<_>>()?;
    let oracle = net_of_samples(ev.weighted(), sweep.net_radius, family.grid.dt());

    let laplace_route = RouteOutcome::from_criteria(vec![l2.clone(), outcomes[0].clone(), outcomes[1].clone()]);
    let rk_route = RouteOutcome::from_criteria(vec![l2, outcomes[2].clone(), outcomes[3].clone()]);
    let votes = [laplace_route.verdict, rk_route.verdict, oracle.verdict()];
    let agreement = votes.iter().all(|v| *v == votes[0]);
    let verdict = if agreement { votes[0] } else { Verdict::Inconclusive };
    Ok(CompactnessVerdict { laplace_route, rk_route, oracle, verdict, agreement })
}

/// Everything needed to reproduce a diagnosis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub family: String,
    pub order: f64,
    pub eps: f64,
    pub grid: TimeGrid,
    pub frequency_grid: FrequencyGrid,
    pub sweep: SweepConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_scales: Option<ChainScales>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub schema: String,
    pub config: ResolvedConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<CompactnessVerdict>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub chains: Vec<ChainCheck>,
}

impl DiagnosisReport {
    pub fn new(config: ResolvedConfig) -> Self {
        DiagnosisReport { schema: SCHEMA.to_string(), config, label: None, diagnosis: None, chains: Vec::new() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
