//! The compactness functionals evaluated over a finite family.
//!
//! | criterion            | quantity per member                                      |
//! |----------------------|----------------------------------------------------------|
//! | `ExpEquivanish`      | `int_T^inf e^{-2xt} |f|^2 dt`                             |
//! | `LaplaceEquicont`    | `(1/2pi) int |L{f}(x+delta+iy) - L{f}(x+iy)|^2 dy`        |
//! | `ExpEquicont`        | `max_s (int e^{-2xt} |f(t) - f(t-s)|^2 dt)^{1/2}`, `s <= delta` |
//! | `LaplaceEquivanish`  | `int_{|y|>T} |L{f}(x+iy)|^2 dy` (no `1/2pi`)              |
//! | `L2Bound`            | `int e^{-2xt} |f|^2 dt`                                  |
//!
//! The normalizations are kept exactly as written above; in particular the
//! Laplace-equicontinuity modulus carries `1/2pi` and the Laplace tail does
//! not. Callers that compare criteria against a common tolerance must
//! rescale thresholds per criterion (see `diagnosis`).

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PegoError, Result};
use crate::halfline::{l2_sq, HalfLineFunction, PegoFamily, TimeGrid};
use crate::transform::{slice_from_samples, spectrum_of_samples, FrequencyGrid, SpectrumSlice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    ExpEquivanish,
    LaplaceEquicont,
    ExpEquicont,
    LaplaceEquivanish,
    L2Bound,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::ExpEquivanish,
        Criterion::LaplaceEquicont,
        Criterion::ExpEquicont,
        Criterion::LaplaceEquivanish,
        Criterion::L2Bound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::ExpEquivanish => "exp-equivanish",
            Criterion::LaplaceEquicont => "laplace-equicont",
            Criterion::ExpEquicont => "exp-equicont",
            Criterion::LaplaceEquivanish => "laplace-equivanish",
            Criterion::L2Bound => "l2-bound",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| PegoError::Parameter(format!("unknown criterion `{name}`")))
    }

    /// Whether the swept scale is a truncation point (increasing sweep) rather
    /// than a step size (decreasing sweep).
    pub fn sweeps_truncation(self) -> bool {
        matches!(self, Criterion::ExpEquivanish | Criterion::LaplaceEquivanish)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionScales {
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub scales: CriterionScales,
    pub per_member: Vec<f64>,
    pub supremum: f64,
    pub pass: bool,
}

impl CriterionReport {
    fn new(criterion: Criterion, scales: CriterionScales, per_member: Vec<f64>) -> Self {
        let supremum = per_member.iter().copied().fold(0.0, f64::max);
        let pass = supremum < scales.eps;
        CriterionReport { criterion, scales, per_member, supremum, pass }
    }

    /// The swept scale (`delta` or `T`).
    pub fn scale(&self) -> f64 {
        self.scales.delta.or(self.scales.t).unwrap_or(0.0)
    }
}

/// Default number of sampled shifts in `(0, delta]`.
pub const DEFAULT_SHIFTS: usize = 8;

/// Grid-aligned shifts `m dt` in `(0, delta]`, geometrically spaced,
/// always including `1` and the largest admissible step.
pub fn grid_shifts(delta: f64, n_shifts: usize, grid: &TimeGrid) -> Result<Vec<usize>> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(PegoError::Scale(format!("delta must be > 0, got {delta}")));
    }
    let m_max = (delta / grid.dt() + 1e-9).floor() as usize;
    if m_max < 1 {
        return Err(PegoError::Scale(format!("delta = {delta} is below the grid step {}", grid.dt())));
    }
    let k = n_shifts.max(1);
    let mut out: Vec<usize> = if k == 1 {
        vec![m_max]
    } else {
        (0..k).map(|i| (m_max as f64).powf(i as f64 / (k - 1) as f64).round() as usize).collect()
    };
    out.push(m_max);
    out.sort_unstable();
    out.dedup();
    out.retain(|m| *m >= 1);
    Ok(out)
}

/// `(dt sum_k |w_k - e^{-x m dt} w_{k-m}|^2)^{1/2}` for weighted samples `w`,
/// the exact-grid form of `(int e^{-2xt} |f(t) - f(t - m dt)|^2 dt)^{1/2}`.
pub fn shift_modulus(w: &[Complex64], m: usize, x: f64, dt: f64) -> f64 {
    let damp = (-x * m as f64 * dt).exp();
    let mut acc = 0.0;
    for (k, wk) in w.iter().enumerate() {
        let prev = if k >= m { w[k - m] * damp } else { Complex64::new(0.0, 0.0) };
        acc += (wk - prev).norm_sqr();
    }
    (acc * dt).sqrt()
}

/// `(dt sum_j |w_{j+m} - w_j|^2)^{1/2}`: the plain L2 shift modulus of the
/// weighted family (terms with `j + m` past the grid are dropped).
pub fn weighted_shift_modulus(w: &[Complex64], m: usize, dt: f64) -> f64 {
    let n = w.len();
    let acc: f64 = (0..n.saturating_sub(m)).map(|j| (w[j + m] - w[j]).norm_sqr()).sum();
    (acc * dt).sqrt()
}

/// Precomputed samples and spectra of a family, shared by every criterion.
pub struct FamilyEvaluator<'a> {
    pub family: &'a PegoFamily,
    pub ygrid: FrequencyGrid,
    pub n_shifts: usize,
    weighted: Vec<Vec<Complex64>>,
    slices: OnceLock<Vec<SpectrumSlice>>,
}

impl<'a> FamilyEvaluator<'a> {
    pub fn new(family: &'a PegoFamily, ygrid: FrequencyGrid, n_shifts: usize) -> Result<Self> {
        let weighted = family.weighted_members()?;
        Ok(FamilyEvaluator { family, ygrid, n_shifts, weighted, slices: OnceLock::new() })
    }

    pub fn weighted(&self) -> &[Vec<Complex64>] {
        &self.weighted
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.family.grid
    }

    fn x(&self) -> f64 {
        self.family.x()
    }

    pub fn slices(&self) -> &[SpectrumSlice] {
        self.slices.get_or_init(|| {
            self.family
                .members
                .par_iter()
                .zip(self.weighted.par_iter())
                .map(|(f, w)| slice_from_samples(f, self.x(), w, self.grid(), &self.ygrid))
                .collect()
        })
    }

    pub fn l2_bound(&self) -> CriterionReport {
        let dt = self.grid().dt();
        let per = self.weighted.iter().map(|w| l2_sq(w, dt)).collect();
        let mut r =
            CriterionReport::new(Criterion::L2Bound, CriterionScales { eps: f64::MAX, delta: None, t: None }, per);
        r.pass = r.supremum.is_finite();
        r
    }

    pub fn exp_equivanish_tail(&self, t: f64, eps: f64) -> Result<CriterionReport> {
        let grid = *self.grid();
        if !(t.is_finite() && t > 0.0) || t >= grid.t_max() {
            return Err(PegoError::Scale(format!("tail start T = {t} must lie in (0, t_max = {})", grid.t_max())));
        }
        let start = (t / grid.dt()).floor() as usize;
        let per = self
            .weighted
            .iter()
            .map(|w| w.iter().enumerate().skip(start).map(|(j, v)| grid.cell_weight_beyond(j, t) * v.norm_sqr()).sum())
            .collect();
        Ok(CriterionReport::new(Criterion::ExpEquivanish, CriterionScales { eps, delta: None, t: Some(t) }, per))
    }

    /// Per-member modulus with the real part shifted by `delta`.
    pub fn laplace_equicont_values(&self, delta: f64) -> Result<Vec<f64>> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(PegoError::Scale(format!("delta must be > 0, got {delta}")));
        }
        let grid = *self.grid();
        let slices = self.slices();
        Ok(self
            .weighted
            .par_iter()
            .zip(slices.par_iter())
            .map(|(w, base)| {
                let shifted: Vec<Complex64> =
                    w.iter().enumerate().map(|(j, v)| v * (-delta * grid.node(j)).exp()).collect();
                let moved = spectrum_of_samples(&shifted, &grid, &self.ygrid);
                moved
                    .iter()
                    .zip(&base.values)
                    .enumerate()
                    .map(|(i, (a, b))| self.ygrid.weight(i) * (a - b).norm_sqr())
                    .sum::<f64>()
                    / (2.0 * PI)
            })
            .collect())
    }

    pub fn laplace_equicont_modulus(&self, delta: f64, eps: f64) -> Result<CriterionReport> {
        let per = self.laplace_equicont_values(delta)?;
        Ok(CriterionReport::new(Criterion::LaplaceEquicont, CriterionScales { eps, delta: Some(delta), t: None }, per))
    }

    /// Per-member maximum of [`shift_modulus`] over the sampled shifts.
    pub fn exp_equicont_values(&self, delta: f64) -> Result<Vec<f64>> {
        let grid = *self.grid();
        let shifts = grid_shifts(delta, self.n_shifts, &grid)?;
        let x = self.x();
        Ok(self
            .weighted
            .par_iter()
            .map(|w| shifts.iter().map(|&m| shift_modulus(w, m, x, grid.dt())).fold(0.0, f64::max))
            .collect())
    }

    pub fn exp_equicont_modulus(&self, delta: f64, eps: f64) -> Result<CriterionReport> {
        let per = self.exp_equicont_values(delta)?;
        Ok(CriterionReport::new(Criterion::ExpEquicont, CriterionScales { eps, delta: Some(delta), t: None }, per))
    }

    pub fn laplace_equivanish_tail(&self, t: f64, eps: f64) -> Result<CriterionReport> {
        if !(t.is_finite() && t >= 0.0) || t >= self.ygrid.y_max() {
            return Err(PegoError::Scale(format!(
                "frequency cutoff T = {t} must lie in [0, y_max = {})",
                self.ygrid.y_max()
            )));
        }
        let per = self.slices().iter().map(|s| s.mass_beyond(t) + s.unfolded_tail()).collect();
        Ok(CriterionReport::new(Criterion::LaplaceEquivanish, CriterionScales { eps, delta: None, t: Some(t) }, per))
    }

    pub fn evaluate(&self, criterion: Criterion, scale: f64, eps: f64) -> Result<CriterionReport> {
        match criterion {
            Criterion::ExpEquivanish => self.exp_equivanish_tail(scale, eps),
            Criterion::LaplaceEquicont => self.laplace_equicont_modulus(scale, eps),
            Criterion::ExpEquicont => self.exp_equicont_modulus(scale, eps),
            Criterion::LaplaceEquivanish => self.laplace_equivanish_tail(scale, eps),
            Criterion::L2Bound => Ok(self.l2_bound()),
        }
    }

    /// One report per scale. Truncation criteria need increasing scales,
    /// step-size criteria decreasing ones.
    pub fn sweep(&self, criterion: Criterion, scales: &[f64], eps: f64) -> Result<Vec<CriterionReport>> {
        check_sweep_order(criterion, scales)?;
        scales.iter().map(|&s| self.evaluate(criterion, s, eps)).collect()
    }
}

fn check_sweep_order(criterion: Criterion, scales: &[f64]) -> Result<()> {
    let ordered = if criterion.sweeps_truncation() {
        scales.windows(2).all(|w| w[0] < w[1])
    } else {
        scales.windows(2).all(|w| w[0] > w[1])
    };
    if !ordered {
        let dir = if criterion.sweeps_truncation() { "increasing" } else { "decreasing" };
        return Err(PegoError::Scale(format!("{} sweep must be strictly {dir}", criterion.name())));
    }
    Ok(())
}

pub fn exp_equivanish_tail(family: &PegoFamily, t: f64, eps: f64) -> Result<CriterionReport> {
    FamilyEvaluator::new(family, FrequencyGrid::for_time_grid(&family.grid), DEFAULT_SHIFTS)?
        .exp_equivanish_tail(t, eps)
}

pub fn laplace_equicont_modulus(
    family: &PegoFamily,
    delta: f64,
    ygrid: &FrequencyGrid,
    eps: f64,
) -> Result<CriterionReport> {
    FamilyEvaluator::new(family, *ygrid, DEFAULT_SHIFTS)?.laplace_equicont_modulus(delta, eps)
}

pub fn exp_equicont_modulus(family: &PegoFamily, delta: f64, n_shifts: usize, eps: f64) -> Result<CriterionReport> {
    FamilyEvaluator::new(family, FrequencyGrid::for_time_grid(&family.grid), n_shifts)?.exp_equicont_modulus(delta, eps)
}

pub fn laplace_equivanish_tail(
    family: &PegoFamily,
    t: f64,
    ygrid: &FrequencyGrid,
    eps: f64,
) -> Result<CriterionReport> {
    FamilyEvaluator::new(family, *ygrid, DEFAULT_SHIFTS)?.laplace_equivanish_tail(t, eps)
}

pub fn l2_bound(family: &PegoFamily) -> Result<CriterionReport> {
    Ok(FamilyEvaluator::new(family, FrequencyGrid::for_time_grid(&family.grid), DEFAULT_SHIFTS)?.l2_bound())
}

pub fn scale_sweep(
    family: &PegoFamily,
    criterion: Criterion,
    scales: &[f64],
    ygrid: &FrequencyGrid,
    eps: f64,
) -> Result<Vec<CriterionReport>> {
    FamilyEvaluator::new(family, *ygrid, DEFAULT_SHIFTS)?.sweep(criterion, scales, eps)
}

/// Nonnegative unit-mass bump `c (s (delta - s))^2` supported in `(0, delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub delta: f64,
    /// Normalizer making the midpoint integral on the working grid equal 1.
    pub c: f64,
}

impl MollifierSpec {
    pub fn function(&self) -> HalfLineFunction {
        HalfLineFunction::PolynomialBump { delta: self.delta, c: Some(self.c) }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.function().eval(s).re
    }
}

pub fn make_mollifier(delta: f64, grid: &TimeGrid) -> Result<MollifierSpec> {
    if !(delta.is_finite() && delta >= 4.0 * grid.dt() * (1.0 - 1e-12)) {
        return Err(PegoError::Scale(format!(
            "mollifier support {delta} needs at least 4 grid steps of {}",
            grid.dt()
        )));
    }
    let raw: f64 = grid
        .nodes()
        .take_while(|t| *t < delta)
        .map(|t| {
            let q = t * (delta - t);
            q * q
        })
        .sum::<f64>()
        * grid.dt();
    Ok(MollifierSpec { delta, c: 1.0 / raw })
}

/// Both sides of the Minkowski integral inequality for
/// `F(t, s) = e^{-xt} (f(t) - f(t - s)) g(s)` with `p = 2`:
/// `|| int F(., s) ds ||_2` and `int ||F(., s)||_2 ds`, using grid-aligned
/// shifts `s = m dt` inside the mollifier's support.
pub fn minkowski_spot_check(w: &[Complex64], x: f64, g: &MollifierSpec, grid: &TimeGrid) -> (f64, f64) {
    let dt = grid.dt();
    let m_max = (g.delta / dt).ceil() as usize;
    let mut inner = vec![Complex64::new(0.0, 0.0); w.len()];
    let mut rhs = 0.0;
    for m in 1..m_max {
        let gs = g.eval(m as f64 * dt) * dt;
        if gs == 0.0 {
            continue;
        }
        let damp = (-x * m as f64 * dt).exp();
        for (k, acc) in inner.iter_mut().enumerate() {
            let prev = if k >= m { w[k - m] * damp } else { Complex64::new(0.0, 0.0) };
            *acc += (w[k] - prev) * gs;
        }
        rhs += gs * shift_modulus(w, m, x, dt);
    }
    let lhs = (inner.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt).sqrt();
    (lhs, rhs)
}

/// `(1/2pi) int |1 - e^{-s(x+iy)}|^2 |L{f}(x+iy)|^2 dy` on the slice grid:
/// the frequency-side expression of the squared shift modulus.
pub fn shift_modulus_from_spectrum(slice: &SpectrumSlice, s: f64) -> f64 {
    slice
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let z = Complex64::new(slice.order, slice.nodes.node(i));
            slice.nodes.weight(i) * (1.0 - (-z * s).exp()).norm_sqr() * v.norm_sqr()
        })
        .sum::<f64>()
        / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfline::Order;
    use approx::assert_abs_diff_eq;

    fn single(f: HalfLineFunction, x: f64) -> PegoFamily {
        PegoFamily::new(vec![f], Order::new(x).unwrap(), TimeGrid::default()).unwrap()
    }

    fn exp(a: f64) -> HalfLineFunction {
        HalfLineFunction::exponential(a).unwrap()
    }

    fn ind(a: f64, b: f64) -> HalfLineFunction {
        HalfLineFunction::indicator(a, b).unwrap()
    }

    fn ygrid() -> FrequencyGrid {
        FrequencyGrid::for_time_grid(&TimeGrid::default())
    }

    /// Composite Simpson on `[a, b]`; test-side oracle.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn exp_equivanish_examples() {
        let r = exp_equivanish_tail(&single(exp(1.0), 0.0), 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(r.supremum, (-2.0f64).exp() / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.supremum, 0.067668, epsilon = 1e-6);
        let r = exp_equivanish_tail(&single(ind(0.0, 1.0), 0.0), 1.0, 1.0).unwrap();
        assert_eq!(r.supremum, 0.0);
        let r = exp_equivanish_tail(&single(ind(0.0, 1.0).translate(5.0).unwrap(), 0.0), 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(r.supremum, 1.0, epsilon = 1e-9);
        assert!(matches!(exp_equivanish_tail(&single(exp(1.0), 0.0), 40.0, 1.0), Err(PegoError::Scale(_))));
    }

    #[test]
    fn laplace_equicont_examples() {
        let y = ygrid();
        let r = laplace_equicont_modulus(&single(HalfLineFunction::zero(), 0.0), 0.1, &y, 1.0).unwrap();
        assert_eq!(r.supremum, 0.0);
        // oracle: frequency-side integrand of the analytic transforms
        let gap = |v: f64| {
            let a = 1.0 / Complex64::new(1.1, v);
            let b = 1.0 / Complex64::new(1.0, v);
            (a - b).norm_sqr() / (2.0 * PI)
        };
        let oracle = 2.0 * simpson(|u| gap(u.tan()) / u.cos().powi(2), 0.0, PI / 2.0 - 1e-9, 200_000);
        let r = laplace_equicont_modulus(&single(exp(1.0), 0.0), 0.1, &y, 1.0).unwrap();
        assert_abs_diff_eq!(r.supremum, oracle, epsilon = 1e-7);
        assert_abs_diff_eq!(oracle, 0.5 - 2.0 / 2.1 + 1.0 / 2.2, epsilon = 1e-8);
    }

    #[test]
    fn laplace_equicont_shrinks_with_delta() {
        let y = ygrid();
        for f in [exp(1.0), ind(0.0, 1.0), ind(1.0, 2.0), exp(2.0).modulate(3.0)] {
            let fam = single(f, 0.0);
            let r = scale_sweep(&fam, Criterion::LaplaceEquicont, &[0.4, 0.2, 0.1, 0.05], &y, 1.0).unwrap();
            assert!(r.windows(2).all(|w| w[1].supremum < w[0].supremum), "{r:?}");
        }
    }

    #[test]
    fn exp_equicont_examples() {
        let r = exp_equicont_modulus(&single(ind(0.0, 1.0), 0.0), 0.02, 8, 1.0).unwrap();
        assert_abs_diff_eq!(r.supremum, 0.2, epsilon = 1e-9);
        let r = exp_equicont_modulus(&single(HalfLineFunction::zero(), 0.0), 0.02, 8, 1.0).unwrap();
        assert_eq!(r.supremum, 0.0);
        // oracle: Simpson on the analytic integrand of e^{i 50 t} e^{-t} at s = delta
        let s = 0.1;
        let lhs = |t: f64| {
            let f =
                |u: f64| if u < 0.0 { Complex64::new(0.0, 0.0) } else { Complex64::from_polar((-u).exp(), 50.0 * u) };
            (f(t) - f(t - s)).norm_sqr()
        };
        let oracle = (simpson(lhs, 0.0, s, 2000) + simpson(lhs, s, 40.0, 400_000)).sqrt();
        let r = exp_equicont_modulus(&single(exp(1.0).modulate(50.0), 0.0), 0.1, 8, 1.0).unwrap();
        assert!(oracle > 0.5 && r.supremum > 0.5, "{oracle} {}", r.supremum);
        assert!(r.supremum >= oracle - 1e-3);
        assert!(matches!(exp_equicont_modulus(&single(exp(1.0), 0.0), 5e-4, 8, 1.0), Err(PegoError::Scale(_))));
    }

    #[test]
    fn laplace_equivanish_examples() {
        let y = ygrid();
        let r = laplace_equivanish_tail(&single(ind(0.0, 1.0), 0.0), 100.0, &y, 1.0).unwrap();
        assert!(r.supremum <= 0.08, "{}", r.supremum);
        let r = laplace_equivanish_tail(&single(HalfLineFunction::zero(), 0.0), 100.0, &y, 1.0).unwrap();
        assert_eq!(r.supremum, 0.0);
        let r = laplace_equivanish_tail(&single(exp(1.0), 0.0), 10.0, &y, 1.0).unwrap();
        let expect = 2.0 * (PI / 2.0 - 10f64.atan());
        assert_abs_diff_eq!(r.supremum, expect, epsilon = 1e-3);
        assert_abs_diff_eq!(expect, 0.19933, epsilon = 1e-5);
        assert!(laplace_equivanish_tail(&single(exp(1.0), 0.0), 4000.0, &y, 1.0).is_err());
    }

    #[test]
    fn l2_bound_examples() {
        let r = l2_bound(&single(exp(1.0), 0.0)).unwrap();
        assert_abs_diff_eq!(r.supremum, 0.5, epsilon = 1e-6);
        assert!(r.pass);
        assert_eq!(l2_bound(&single(HalfLineFunction::zero(), 0.0)).unwrap().supremum, 0.0);
        let fam = PegoFamily::new(vec![ind(0.0, 1.0), ind(0.0, 2.0)], Order::ZERO, TimeGrid::default()).unwrap();
        assert_abs_diff_eq!(l2_bound(&fam).unwrap().supremum, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn mollifier_examples() {
        let g = TimeGrid::default();
        let m = make_mollifier(0.5, &g).unwrap();
        let f = m.function();
        let mass: f64 = f.sample(&g).iter().map(|v| v.re).sum::<f64>() * g.dt();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);
        assert_eq!(m.eval(0.0), 0.0);
        assert_eq!(m.eval(0.5), 0.0);
        assert_abs_diff_eq!(m.c, 30.0 / 0.5f64.powi(5), epsilon = 1e-6);
        assert_abs_diff_eq!(m.eval(0.25), 3.75, epsilon = 1e-9);
        assert_eq!(m.eval(0.7), 0.0);
        assert!(f.sample(&g).iter().all(|v| v.re >= 0.0));
        assert!(make_mollifier(0.003, &g).is_err());
    }

    #[test]
    fn sweep_examples() {
        let y = ygrid();
        let fam = single(exp(1.0), 0.0);
        let r = scale_sweep(&fam, Criterion::ExpEquivanish, &[1.0, 2.0, 4.0, 8.0], &y, 1.0).unwrap();
        for (rep, t) in r.iter().zip([1.0f64, 2.0, 4.0, 8.0]) {
            assert_abs_diff_eq!(rep.supremum, (-2.0 * t).exp() / 2.0, epsilon = 1e-7);
        }
        assert!(r.windows(2).all(|w| w[1].supremum < w[0].supremum));
        let zero = single(HalfLineFunction::zero(), 0.0);
        for c in [Criterion::ExpEquivanish, Criterion::LaplaceEquivanish] {
            let r = scale_sweep(&zero, c, &[1.0, 2.0], &y, 1e-9).unwrap();
            assert!(r.iter().all(|r| r.pass));
        }
        let ray: Vec<_> = (0..=8).map(|s| ind(0.0, 1.0).translate(s as f64).unwrap()).collect();
        let ray = PegoFamily::new(ray, Order::ZERO, TimeGrid::default()).unwrap();
        let r = scale_sweep(&ray, Criterion::ExpEquivanish, &[1.0, 2.0, 4.0, 8.0], &y, 1.0).unwrap();
        for rep in &r {
            assert_abs_diff_eq!(rep.supremum, 1.0, epsilon = 1e-9);
        }
        assert!(scale_sweep(&fam, Criterion::ExpEquicont, &[0.01, 0.02], &y, 1.0).is_err());
        assert!(scale_sweep(&fam, Criterion::ExpEquivanish, &[2.0, 1.0], &y, 1.0).is_err());
    }

    #[test]
    fn report_invariants() {
        let r = CriterionReport::new(
            Criterion::ExpEquivanish,
            CriterionScales { eps: 0.5, delta: None, t: Some(1.0) },
            vec![0.1, 0.7, 0.3],
        );
        assert_eq!(r.supremum, 0.7);
        assert!(!r.pass);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"criterion\":\"exp-equivanish\"") && json.contains("\"T\":1.0"));
    }

    #[test]
    fn shifts_are_grid_aligned() {
        let g = TimeGrid::default();
        let s = grid_shifts(0.1, 8, &g).unwrap();
        assert_eq!(*s.first().unwrap(), 1);
        assert_eq!(*s.last().unwrap(), 100);
        assert!(s.len() <= 9);
        assert_eq!(grid_shifts(0.0025, 8, &g).unwrap(), vec![1, 2]);
    }

    #[test]
    fn translation_identity_route() {
        let g = TimeGrid::default();
        let y = ygrid();
        let x = 0.5;
        for f in [exp(1.0), ind(0.5, 2.0), exp(2.0).modulate(5.0)] {
            let fam = single(f, x);
            let ev = FamilyEvaluator::new(&fam, y, 8).unwrap();
            for m in [5usize, 40, 300] {
                let s = m as f64 * g.dt();
                let time = shift_modulus(&ev.weighted()[0], m, x, g.dt()).powi(2);
                let freq = shift_modulus_from_spectrum(&ev.slices()[0], s);
                assert!((time - freq).abs() < 1e-9, "m = {m}: {time} vs {freq}");
            }
        }
    }

    #[test]
    fn minkowski_examples() {
        let g = TimeGrid::default();
        let moll = make_mollifier(0.05, &g).unwrap();
        for f in [exp(1.0), ind(0.2, 1.3), exp(1.0).modulate(40.0)] {
            for x in [0.0, 1.0] {
                let w = crate::halfline::weighted_samples(&f, Order::new(x).unwrap(), &g).unwrap();
                let (lhs, rhs) = minkowski_spot_check(&w, x, &moll, &g);
                assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
                assert!(lhs > 0.0);
            }
        }
    }
}
