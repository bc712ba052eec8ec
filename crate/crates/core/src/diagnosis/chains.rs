//! Numerical replays of the implication chains between the criteria, each
//! with the explicit constants of its proof.
//!
//! Every check measures its premise, derives the companion scale the proof
//! prescribes, measures the conclusion and compares it against the proof's
//! bound at tolerance `eps` plus a slack of three times the propagated
//! quadrature-error estimate. A check whose premise is not met at `eps` is
//! reported as vacuous. With `tighten`, `eps` is raised just enough to meet
//! the premise, which makes the bound as demanding as possible.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{
    grid_shifts, make_mollifier, shift_modulus, weighted_shift_modulus, FamilyEvaluator, DEFAULT_SHIFTS,
};
use crate::error::{PegoError, Result};
use crate::halfline::{l2_sq, norm_error_estimate, PegoFamily};
use crate::transform::FrequencyGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Laplace equicontinuity implies exponential equivanishing.
    EquicontToEquivanish,
    /// Under L2-boundedness, exponential equivanishing implies Laplace equicontinuity.
    BoundedReverse,
    /// Exponential equicontinuity versus L2-equicontinuity of the weighted family.
    LemmaExpEquicont,
    /// Exponential equicontinuity implies Laplace equivanishing.
    EquicontToLaplaceVanish,
    /// Laplace equivanishing implies exponential equicontinuity.
    LaplaceVanishReverse,
}

/// Scales handed to the five checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainScales {
    /// Real-part shift for the Laplace-equicontinuity premise.
    pub equicont_delta: f64,
    /// Time tail start for the exponential-equivanishing premise.
    pub time_tail: f64,
    /// Shift bound for the exponential-equicontinuity premise.
    pub shift_delta: f64,
    /// Frequency cutoff for the Laplace-equivanishing premise.
    pub freq_cutoff: f64,
}

impl Default for ChainScales {
    fn default() -> Self {
        ChainScales { equicont_delta: 0.1, time_tail: 2.0, shift_delta: 0.01, freq_cutoff: 20.0 }
    }
}

/// One direction of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLeg {
    pub direction: String,
    /// Scale used for the premise.
    pub premise_scale: f64,
    /// Scale the proof derives for the conclusion.
    pub conclusion_scale: f64,
    pub premise_measured: f64,
    pub conclusion_value: f64,
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub theorem: Theorem,
    /// Level the premise is certified at (the tolerance `eps` used).
    pub premise_value: f64,
    pub premise_measured: f64,
    pub conclusion_value: f64,
    /// `bound / premise_value`; the proof constant for linear bounds.
    pub constant: f64,
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
    pub vacuous: bool,
    pub legs: Vec<ChainLeg>,
}

impl ChainCheck {
    /// A non-vacuous leg whose conclusion exceeds its bound plus slack.
    pub fn violated(&self) -> bool {
        self.legs.iter().any(|l| !l.vacuous && !l.holds)
    }

    fn from_legs(theorem: Theorem, eps: f64, legs: Vec<ChainLeg>) -> Self {
        let ratio = |l: &ChainLeg| l.conclusion_value / (l.bound + l.slack).max(f64::MIN_POSITIVE);
        let worst =
            legs.iter().enumerate().fold(0, |best, (i, l)| if ratio(l) > ratio(&legs[best]) { i } else { best });
        let w = &legs[worst];
        ChainCheck {
            theorem,
            premise_value: eps,
            premise_measured: w.premise_measured,
            conclusion_value: w.conclusion_value,
            constant: w.bound / eps,
            bound: w.bound,
            slack: w.slack,
            holds: legs.iter().all(|l| l.holds),
            vacuous: legs.iter().any(|l| l.vacuous),
            legs,
        }
    }
}

/// Raises `eps` to just above `level` when tightening.
fn effective_eps(eps: f64, level: f64, tighten: bool) -> f64 {
    if tighten {
        eps.max(level * (1.0 + 1e-6) + 1e-300)
    } else {
        eps
    }
}

/// Shared samples and the family's relative quadrature-error estimate.
pub(crate) struct ChainContext<'a> {
    ev: FamilyEvaluator<'a>,
    /// Largest `int e^{-2xt} |f|^2` over members.
    m_sq: f64,
    /// Largest relative Richardson error of the members' weighted norms.
    rel_err: f64,
}

impl<'a> ChainContext<'a> {
    pub(crate) fn new(family: &'a PegoFamily, ygrid: &FrequencyGrid) -> Result<Self> {
        let ev = FamilyEvaluator::new(family, *ygrid, DEFAULT_SHIFTS)?;
        let dt = family.grid.dt();
        let m_sq = ev.weighted().iter().map(|w| l2_sq(w, dt)).fold(0.0, f64::max);
        let rel: Vec<f64> = family
            .members
            .par_iter()
            .zip(ev.weighted().par_iter())
            .map(|(f, w)| {
                let norm = l2_sq(w, dt);
                if norm == 0.0 {
                    Ok(0.0)
                } else {
                    norm_error_estimate(f, family.order, &family.grid).map(|e| e / norm)
                }
            })
            .collect::<Result<_>>()?;
        let rel_err = rel.into_iter().fold(0.0, f64::max);
        Ok(ChainContext { ev, m_sq, rel_err })
    }

    fn dt(&self) -> f64 {
        self.ev.grid().dt()
    }

    fn x(&self) -> f64 {
        self.ev.family.x()
    }

    /// Slack for `conclusion <= k * premise`-type bounds; `root` marks
    /// quantities that are square roots of quadratic ones.
    fn slack(&self, conclusion: f64, premise: f64, k: f64, root: bool, bound: f64) -> f64 {
        let r = if root { self.rel_err / 2.0 } else { self.rel_err };
        3.0 * r * (conclusion + k * premise) + 1e-12 * (1.0 + bound)
    }
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

#[allow(clippy::too_many_arguments)]
fn leg(
    direction: &str,
    premise_scale: f64,
    conclusion_scale: f64,
    premise_measured: f64,
    conclusion_value: f64,
    bound: f64,
    slack: f64,
    premise_met: bool,
) -> ChainLeg {
    ChainLeg {
        direction: direction.to_string(),
        premise_scale,
        conclusion_scale,
        premise_measured,
        conclusion_value,
        bound,
        slack,
        holds: conclusion_value <= bound + slack,
        vacuous: !premise_met,
    }
}

pub(crate) fn equicont_to_equivanish(
    ctx: &ChainContext<'_>,
    eps: f64,
    delta: f64,
    tighten: bool,
) -> Result<ChainCheck> {
    let dt = ctx.dt();
    let t_max = ctx.ev.grid().t_max();
    let premise = sup(ctx.ev.laplace_equicont_values(delta)?);
    // smallest grid T with |e^{-delta T} - 1|^2 >= 1/2
    let mut t = (-(1.0 - 0.5f64.sqrt()).ln() / delta / dt).ceil() * dt;
    while (1.0 - (-delta * t).exp()).powi(2) < 0.5 {
        t += dt;
    }
    if t >= t_max {
        return Err(PegoError::Scale(format!("delta = {delta} needs a tail start T = {t} beyond t_max = {t_max}")));
    }
    let conclusion = ctx.ev.exp_equivanish_tail(t, f64::MAX)?.supremum;
    let eps = effective_eps(eps, premise, tighten);
    let bound = 2.0 * eps;
    let slack = ctx.slack(conclusion, premise, 2.0, false, bound);
    let l = leg("laplace-equicont => exp-equivanish", delta, t, premise, conclusion, bound, slack, premise < eps);
    Ok(ChainCheck::from_legs(Theorem::EquicontToEquivanish, eps, vec![l]))
}

pub(crate) fn bounded_reverse(ctx: &ChainContext<'_>, eps: f64, t: f64, tighten: bool) -> Result<ChainCheck> {
    let dt = ctx.dt();
    let t = (t / dt).round().max(1.0) * dt;
    let premise = ctx.ev.exp_equivanish_tail(t, f64::MAX)?.supremum;
    let eps = effective_eps(eps, premise, tighten);
    let m = ctx.m_sq;
    // largest delta on the dt-lattice with |e^{-delta T} - 1|^2 M < eps
    let delta = if m < eps {
        1.0
    } else {
        let exact = -(1.0 - (eps / m).sqrt()).ln() / t;
        let snapped = (exact / dt * (1.0 - 1e-12)).floor() * dt;
        if snapped > 0.0 {
            snapped.min(1.0)
        } else {
            exact * (1.0 - 1e-9)
        }
    };
    let conclusion = sup(ctx.ev.laplace_equicont_values(delta)?);
    let bound = 2.0 * eps;
    let slack = ctx.slack(conclusion, premise + (1.0 - (-delta * t).exp()).powi(2) * m, 1.0, false, bound);
    let l = leg("exp-equivanish => laplace-equicont", t, delta, premise, conclusion, bound, slack, premise < eps);
    Ok(ChainCheck::from_legs(Theorem::BoundedReverse, eps, vec![l]))
}

/// Per-shift lemma quantities, maximized over members.
struct ShiftTable {
    /// Exponential shift modulus (root).
    a: f64,
    /// Weighted-family shift modulus (squared).
    b: f64,
    /// `int_0^s e^{-2xt} |f|^2`.
    head: f64,
}

fn shift_table(ctx: &ChainContext<'_>, m: usize) -> ShiftTable {
    let (dt, x) = (ctx.dt(), ctx.x());
    let rows: Vec<(f64, f64, f64)> = ctx
        .ev
        .weighted()
        .par_iter()
        .map(|w| {
            let head = l2_sq(&w[..m.min(w.len())], dt);
            (shift_modulus(w, m, x, dt), weighted_shift_modulus(w, m, dt).powi(2), head)
        })
        .collect();
    ShiftTable {
        a: sup(rows.iter().map(|r| r.0)),
        b: sup(rows.iter().map(|r| r.1)),
        head: sup(rows.iter().map(|r| r.2)),
    }
}

pub(crate) fn lemma(ctx: &ChainContext<'_>, eps: f64, tighten: bool) -> Result<ChainCheck> {
    let (dt, x) = (ctx.dt(), ctx.x());
    let m_root = ctx.m_sq.sqrt();
    let m_cap = ((0.1 / dt).round() as usize).max(1);
    let mut candidates = vec![1usize];
    while candidates.last().unwrap() * 2 <= m_cap {
        candidates.push(candidates.last().unwrap() * 2);
    }
    let shifts_of = |m: usize| grid_shifts(m as f64 * dt, DEFAULT_SHIFTS, ctx.ev.grid());
    let mut all: Vec<usize> = Vec::new();
    for &c in &candidates {
        all.extend(shifts_of(c)?);
    }
    all.sort_unstable();
    all.dedup();
    let table: Vec<(usize, ShiftTable)> = all.iter().map(|&m| (m, shift_table(ctx, m))).collect();
    let at = |m: usize| &table.iter().find(|(k, _)| *k == m).expect("tabulated shift").1;

    let fwd_level = |m: usize| {
        let r = at(m);
        let s = m as f64 * dt;
        r.b.max(r.head).max((1.0 - (-x * s).exp()) * m_root)
    };
    let rev_level = |m: usize| {
        let s = m as f64 * dt;
        if (x * s).exp() > 2.0 {
            return f64::INFINITY;
        }
        at(m).a.max(((x * s).exp() - 1.0) * m_root)
    };
    let eps = effective_eps(eps, fwd_level(1).max(rev_level(1)), tighten);

    // largest candidate delta whose sampled shifts all meet the premise
    let pick = |level: &dyn Fn(usize) -> f64| -> Result<Option<usize>> {
        let mut best = None;
        for &c in &candidates {
            if shifts_of(c)?.iter().all(|&m| level(m) < eps) {
                best = Some(c);
            } else {
                break;
            }
        }
        Ok(best)
    };

    let fwd = pick(&fwd_level)?;
    let mf = fwd.unwrap_or(1);
    let fs = shifts_of(mf)?;
    let premise = sup(fs.iter().map(|&m| fwd_level(m)));
    let conclusion = sup(fs.iter().map(|&m| at(m).a));
    let bound = (2.0 * eps).sqrt() + eps;
    let slack = ctx.slack(conclusion, premise, 2.0, true, bound);
    let forward = leg(
        "weighted L2-equicont => exp-equicont",
        mf as f64 * dt,
        mf as f64 * dt,
        premise,
        conclusion,
        bound,
        slack,
        fwd.is_some(),
    );

    let rev = pick(&rev_level)?;
    let mr = rev.unwrap_or(1);
    let rs = shifts_of(mr)?;
    let premise = sup(rs.iter().map(|&m| rev_level(m)));
    let conclusion = sup(rs.iter().map(|&m| at(m).b.sqrt()));
    let bound = 3.0 * eps;
    let slack = ctx.slack(conclusion, premise, 3.0, true, bound);
    let reverse = leg(
        "exp-equicont => weighted L2-equicont",
        mr as f64 * dt,
        mr as f64 * dt,
        premise,
        conclusion,
        bound,
        slack,
        rev.is_some(),
    );
    Ok(ChainCheck::from_legs(Theorem::LemmaExpEquicont, eps, vec![forward, reverse]))
}

/// Smallest `T` with `|L{g}(x+iy)| <= 1/2` for all `|y| >= T`, by scanning
/// up to the point where the integration-by-parts bound `2 max g / |y|`
/// takes over.
pub fn mollifier_cutoff(g: &crate::criteria::MollifierSpec, x: f64) -> f64 {
    let f = g.function();
    let gmax = g.eval(g.delta / 2.0);
    let stop = 4.0 * gmax;
    let h = 0.01 / g.delta;
    let steps = (stop / h).ceil() as usize;
    let mut last_above = None;
    for k in 0..=steps {
        let y = k as f64 * h;
        let v = f.laplace(Complex64::new(x, y)).expect("closed form").norm();
        if v > 0.5 {
            last_above = Some(y);
        }
    }
    last_above.map_or(0.0, |y| y + h)
}

pub(crate) fn equicont_to_laplace_vanish(
    ctx: &ChainContext<'_>,
    eps: f64,
    delta: f64,
    tighten: bool,
) -> Result<ChainCheck> {
    let premise = sup(ctx.ev.exp_equicont_values(delta)?);
    let g = make_mollifier(delta, ctx.ev.grid())?;
    let t = mollifier_cutoff(&g, ctx.x());
    if t >= ctx.ev.ygrid.y_max() {
        return Err(PegoError::Scale(format!("mollifier cutoff {t} lies beyond y_max = {}", ctx.ev.ygrid.y_max())));
    }
    let conclusion = ctx.ev.laplace_equivanish_tail(t, f64::MAX)?.supremum.sqrt();
    let eps = effective_eps(eps, premise, tighten);
    let k = 2.0 * (2.0 * PI).sqrt();
    let bound = k * eps;
    let slack = ctx.slack(conclusion, premise, k, true, bound);
    let l = leg("exp-equicont => laplace-equivanish", delta, t, premise, conclusion, bound, slack, premise < eps);
    Ok(ChainCheck::from_legs(Theorem::EquicontToLaplaceVanish, eps, vec![l]))
}

/// Analytic bound on `|1 - e^{-s(x+iy)}|^2` for `s` in the shift lattice
/// up to `m` steps.
fn shift_factor_sup(s: f64, x: f64, y: f64) -> f64 {
    let d = (-s * x).exp();
    if s * y >= PI {
        (1.0 + d).powi(2)
    } else {
        1.0 - 2.0 * d * (s * y).cos() + d * d
    }
}

pub(crate) fn laplace_vanish_reverse(ctx: &ChainContext<'_>, eps: f64, t: f64, tighten: bool) -> Result<ChainCheck> {
    let (dt, x) = (ctx.dt(), ctx.x());
    let premise = ctx.ev.laplace_equivanish_tail(t, f64::MAX)?.supremum;
    let eps = effective_eps(eps, premise, tighten);
    // cells straddling the cutoff count as inside
    let y = t + ctx.ev.ygrid.dy();
    let m_cap = ((0.1 / dt).round() as usize).max(1);
    let mut running = 0.0f64;
    let mut best = None;
    for m in 1..=m_cap {
        running = running.max(shift_factor_sup(m as f64 * dt, x, y));
        if running < eps {
            best = Some(m);
        } else {
            break;
        }
    }
    let m = best.unwrap_or(1);
    let delta = m as f64 * dt;
    let conclusion = sup(ctx.ev.exp_equicont_values(delta)?).powi(2);
    let k = ctx.m_sq + 4.0 / (2.0 * PI);
    let bound = k * eps;
    let slack = ctx.slack(conclusion, premise, k, false, bound);
    let l = leg(
        "laplace-equivanish => exp-equicont",
        t,
        delta,
        premise,
        conclusion,
        bound,
        slack,
        premise < eps && best.is_some(),
    );
    Ok(ChainCheck::from_legs(Theorem::LaplaceVanishReverse, eps, vec![l]))
}

pub fn check_thm_equicont_to_equivanish(
    family: &PegoFamily,
    eps: f64,
    delta: f64,
    ygrid: &FrequencyGrid,
) -> Result<ChainCheck> {
    equicont_to_equivanish(&ChainContext::new(family, ygrid)?, eps, delta, false)
}

pub fn check_thm_bounded_reverse(family: &PegoFamily, eps: f64, t: f64, ygrid: &FrequencyGrid) -> Result<ChainCheck> {
    bounded_reverse(&ChainContext::new(family, ygrid)?, eps, t, false)
}

pub fn check_lemma_exp_equicont(family: &PegoFamily, eps: f64, ygrid: &FrequencyGrid) -> Result<ChainCheck> {
    lemma(&ChainContext::new(family, ygrid)?, eps, false)
}

pub fn check_thm_equicont_to_laplace_vanish(
    family: &PegoFamily,
    eps: f64,
    delta: f64,
    ygrid: &FrequencyGrid,
) -> Result<ChainCheck> {
    equicont_to_laplace_vanish(&ChainContext::new(family, ygrid)?, eps, delta, false)
}

pub fn check_thm_laplace_vanish_reverse(
    family: &PegoFamily,
    eps: f64,
    t: f64,
    ygrid: &FrequencyGrid,
) -> Result<ChainCheck> {
    laplace_vanish_reverse(&ChainContext::new(family, ygrid)?, eps, t, false)
}

/// All five checks on one family, sharing samples and spectra.
pub fn run_chain_checks(
    family: &PegoFamily,
    eps: f64,
    ygrid: &FrequencyGrid,
    scales: &ChainScales,
    tighten: bool,
) -> Result<Vec<ChainCheck>> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(PegoError::Parameter(format!("eps must be > 0, got {eps}")));
    }
    let ctx = ChainContext::new(family, ygrid)?;
    Ok(vec![
        equicont_to_equivanish(&ctx, eps, scales.equicont_delta, tighten)?,
        bounded_reverse(&ctx, eps, scales.time_tail, tighten)?,
        lemma(&ctx, eps, tighten)?,
        equicont_to_laplace_vanish(&ctx, eps, scales.shift_delta, tighten)?,
        laplace_vanish_reverse(&ctx, eps, scales.freq_cutoff, tighten)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfline::{HalfLineFunction, Order, TimeGrid};

    fn fam(members: Vec<HalfLineFunction>, x: f64) -> PegoFamily {
        PegoFamily::new(members, Order::new(x).unwrap(), TimeGrid::default()).unwrap()
    }

    fn ygrid() -> FrequencyGrid {
        FrequencyGrid::for_time_grid(&TimeGrid::default())
    }

    fn exp(a: f64) -> HalfLineFunction {
        HalfLineFunction::exponential(a).unwrap()
    }

    #[test]
    fn zero_family_holds_everywhere() {
        let f = fam(vec![HalfLineFunction::zero()], 0.0);
        for c in run_chain_checks(&f, 1e-2, &ygrid(), &ChainScales::default(), false).unwrap() {
            assert!(c.holds && !c.vacuous, "{c:?}");
            assert_eq!(c.conclusion_value, 0.0);
        }
    }

    #[test]
    fn exponential_singleton_matches_analytic_sides() {
        let f = fam(vec![exp(1.0)], 0.0);
        let c = check_thm_equicont_to_equivanish(&f, 1e-2, 0.1, &ygrid()).unwrap();
        // premise: 1/2 - 2/2.1 + 1/2.2; conclusion: e^{-2T}/2 at T = 12.279..
        let p = 0.5 - 2.0 / 2.1 + 1.0 / 2.2;
        assert!((c.premise_measured - p).abs() < 1e-7);
        let t = c.legs[0].conclusion_scale;
        assert!((t - 12.28).abs() < 1e-9, "{t}");
        assert!((c.conclusion_value - (-2.0 * t).exp() / 2.0).abs() < 1e-12);
        assert!(c.holds && !c.vacuous);

        let c = check_thm_bounded_reverse(&f, 1e-2, 2.0, &ygrid()).unwrap();
        assert!((c.premise_measured - (-4.0f64).exp() / 2.0).abs() < 1e-7);
        let d = c.legs[0].conclusion_scale;
        let q = 0.5 - 2.0 / (2.0 + d) + 1.0 / (2.0 + 2.0 * d);
        assert!((c.conclusion_value - q).abs() < 1e-6);
        assert!(c.holds && !c.vacuous);

        let c = check_thm_laplace_vanish_reverse(&f, 1e-1, 20.0, &ygrid()).unwrap();
        assert!((c.premise_measured - 2.0 * (PI / 2.0 - 20f64.atan())).abs() < 1e-3);
        assert!(c.holds && !c.vacuous, "{c:?}");
    }

    #[test]
    fn indicator_lemma_uses_symmetric_difference() {
        // shifting 1_(0,1) by s moves mass 2s
        let f = fam(vec![HalfLineFunction::indicator(0.0, 1.0).unwrap()], 0.0);
        let c = check_lemma_exp_equicont(&f, 0.05, &ygrid()).unwrap();
        for l in &c.legs {
            assert!(!l.vacuous && l.holds, "{l:?}");
        }
        let s = c.legs[0].premise_scale;
        assert!((c.legs[0].conclusion_value - (2.0 * s).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn indicator_laplace_vanish_chain() {
        let f = fam(vec![HalfLineFunction::indicator(0.0, 1.0).unwrap()], 0.0);
        let c = check_thm_equicont_to_laplace_vanish(&f, 0.2, 0.01, &ygrid()).unwrap();
        assert!((c.premise_measured - 0.02f64.sqrt()).abs() < 1e-9);
        assert!(c.holds && !c.vacuous, "{c:?}");
    }

    #[test]
    fn modulated_family_reports_vacuous_premises() {
        let members = (0..=20).map(|k| exp(1.0).modulate(10.0 * k as f64)).collect();
        let f = fam(members, 0.0);
        let checks = run_chain_checks(&f, 1e-2, &ygrid(), &ChainScales::default(), false).unwrap();
        let rev = &checks[4];
        assert!(rev.vacuous, "{rev:?}");
        assert!(checks.iter().all(|c| !c.violated()));
        let tight = run_chain_checks(&f, 1e-2, &ygrid(), &ChainScales::default(), true).unwrap();
        assert!(tight.iter().all(|c| !c.violated()), "{tight:#?}");
    }

    #[test]
    fn mollifier_cutoff_is_outside_band() {
        let g = make_mollifier(0.01, &TimeGrid::default()).unwrap();
        let t = mollifier_cutoff(&g, 0.0);
        assert!(t > 0.0 && t < 3000.0, "{t}");
        let f = g.function();
        for k in 0..2000 {
            let y = t + k as f64 * 0.5;
            assert!(f.laplace(Complex64::new(0.0, y)).unwrap().norm() <= 0.5 + 1e-12);
        }
        assert!(f.laplace(Complex64::new(0.0, t * 0.9)).unwrap().norm() > 0.3);
    }
}
