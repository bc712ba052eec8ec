//! Laplace transform along vertical lines `Re z = x`, the Fourier special
//! case, half-line convolution and the numerical identity checks built on
//! them (Plancherel, Riemann–Lebesgue, convolution theorem).
//!
//! Transforms are midpoint sums over the time grid. When the frequency step
//! is `2 pi / (n dt)` the sums are evaluated with one FFT; the midpoint sum
//! is periodic in `y` with period `2 pi / dt`, so over the default grid
//! (`|y| <= pi / dt`, end nodes half-weighted) the discrete Parseval identity
//! holds to rounding. Mass of the continuous transform beyond `y_max` is
//! folded back into the grid by that periodicity; `tail_bound` reports how
//! large it can be.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{PegoError, Result};
use crate::halfline::{
    norm_error_estimate, verify_pego, weighted_l2_norm_sq, weighted_samples, HalfLineFunction, Order, TimeGrid,
};

/// Symmetric uniform frequency nodes `y_k = k dy`, `|k| <= K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrequencyConfig", into = "FrequencyConfig")]
pub struct FrequencyGrid {
    dy: f64,
    k_max: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrequencyConfig {
    pub dy: f64,
    pub y_max: f64,
}

impl TryFrom<FrequencyConfig> for FrequencyGrid {
    type Error = PegoError;
    fn try_from(c: FrequencyConfig) -> Result<Self> {
        FrequencyGrid::new(c.dy, c.y_max)
    }
}

impl From<FrequencyGrid> for FrequencyConfig {
    fn from(g: FrequencyGrid) -> Self {
        FrequencyConfig { dy: g.dy, y_max: g.y_max() }
    }
}

impl FrequencyGrid {
    /// `y_max` is rounded down to a multiple of `dy`.
    pub fn new(dy: f64, y_max: f64) -> Result<Self> {
        if !(dy.is_finite() && dy > 0.0) {
            return Err(PegoError::Grid(format!("dy must be > 0, got {dy}")));
        }
        if !(y_max.is_finite() && y_max >= 10.0 * dy * (1.0 - 1e-12)) {
            return Err(PegoError::Grid(format!("y_max must be >= 10 dy, got y_max = {y_max}, dy = {dy}")));
        }
        let k_max = (y_max / dy + 1e-9).floor() as usize;
        Ok(FrequencyGrid { dy, k_max })
    }

    /// The FFT-native grid: `dy = 2 pi / (n dt)`, `y_max = pi / dt` (for even `n`).
    pub fn for_time_grid(grid: &TimeGrid) -> Self {
        let n = grid.len();
        FrequencyGrid { dy: 2.0 * PI / (n as f64 * grid.dt()), k_max: n / 2 }
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn y_max(&self) -> f64 {
        self.k_max as f64 * self.dy
    }

    pub fn len(&self) -> usize {
        2 * self.k_max + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 - self.k_max as f64) * self.dy
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Trapezoid weights: `dy` inside, `dy / 2` at `+-y_max`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.len() {
            0.5 * self.dy
        } else {
            self.dy
        }
    }

    /// Length of node `i`'s cell lying in `|y| > t`.
    pub fn weight_beyond(&self, i: usize, t: f64) -> f64 {
        let y = self.node(i);
        let half = 0.5 * self.dy;
        let y_max = self.y_max();
        let lo = (y - half).max(-y_max);
        let hi = (y + half).min(y_max);
        let t = t.max(0.0);
        let right = (hi - lo.max(t)).max(0.0);
        let left = (hi.min(-t) - lo).max(0.0);
        right + left
    }

    fn matches_fft(&self, grid: &TimeGrid) -> bool {
        let native = 2.0 * PI / (grid.len() as f64 * grid.dt());
        (self.dy - native).abs() <= 1e-9 * native
    }

    /// True when the nodes cover one full period `2 pi / dt` of the midpoint sum.
    pub fn spans_period(&self, grid: &TimeGrid) -> bool {
        self.matches_fft(grid) && 2 * self.k_max == grid.len()
    }
}

/// `L{f}(x + i y_k)` on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSlice {
    pub order: f64,
    pub nodes: FrequencyGrid,
    pub values: Vec<Complex64>,
    /// Bound on `int_{|y| > y_max} |L{f}(x+iy)|^2 dy`.
    pub tail_bound: f64,
    /// The grid spans a full period, so the mass beyond `y_max` is already
    /// folded into the values and `tail_bound` is informational only.
    pub folded: bool,
}

impl SpectrumSlice {
    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.nodes()
    }

    /// `(1/2pi) int |L|^2 dy` over the grid.
    pub fn energy(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| self.nodes.weight(i) * v.norm_sqr()).sum::<f64>() / (2.0 * PI)
    }

    /// `int_{|y| > t} |L|^2 dy` over the grid (no `1/2pi`).
    pub fn mass_beyond(&self, t: f64) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| self.nodes.weight_beyond(i, t) * v.norm_sqr()).sum()
    }

    /// Mass beyond `y_max` not represented on the grid.
    pub fn unfolded_tail(&self) -> f64 {
        if self.folded {
            0.0
        } else {
            self.tail_bound
        }
    }

    /// CSV with columns `y,re,im,abs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,re,im,abs\n");
        for (y, v) in self.ys().zip(&self.values) {
            out.push_str(&format!("{y},{},{},{}\n", v.re, v.im, v.norm()));
        }
        out
    }
}

/// Midpoint sums `dt sum_j w_j e^{-i y_k t_j}` for weighted samples `w`.
pub fn spectrum_of_samples(w: &[Complex64], grid: &TimeGrid, ygrid: &FrequencyGrid) -> Vec<Complex64> {
    let dt = grid.dt();
    let n = grid.len();
    assert_eq!(w.len(), n, "samples must cover the grid");
    if ygrid.matches_fft(grid) {
        let mut buf = w.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let k_max = ygrid.k_max as i64;
        (-k_max..=k_max)
            .map(|k| {
                let y = k as f64 * ygrid.dy;
                let bin = k.rem_euclid(n as i64) as usize;
                dt * Complex64::from_polar(1.0, -0.5 * y * dt) * buf[bin]
            })
            .collect()
    } else {
        (0..ygrid.len()).into_par_iter().map(|i| direct_sum(w, grid, ygrid.node(i))).collect()
    }
}

fn direct_sum(w: &[Complex64], grid: &TimeGrid, y: f64) -> Complex64 {
    let dt = grid.dt();
    w.iter().enumerate().map(|(j, v)| v * Complex64::from_polar(1.0, -y * grid.node(j))).sum::<Complex64>() * dt
}

pub(crate) fn tail_bound_for(f: &HalfLineFunction, x: f64, ygrid: &FrequencyGrid, values: &[Complex64]) -> f64 {
    let y_max = ygrid.y_max();
    match f.decay_constant(x) {
        Some((c, w)) if y_max > w => 2.0 * c * c / (y_max - w),
        _ => {
            let band_sup = ygrid
                .nodes()
                .zip(values)
                .filter(|(y, _)| y.abs() >= 0.5 * y_max)
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max);
            2.0 * band_sup * band_sup * y_max
        }
    }
}

/// `L{f}(x + i y_k)` for every node of `ygrid`.
pub fn laplace_line(f: &HalfLineFunction, x: Order, tgrid: &TimeGrid, ygrid: &FrequencyGrid) -> Result<SpectrumSlice> {
    verify_pego(f, x, tgrid)?;
    let w = weighted_samples(f, x, tgrid)?;
    Ok(slice_from_samples(f, x.value(), &w, tgrid, ygrid))
}

pub(crate) fn slice_from_samples(
    f: &HalfLineFunction,
    x: f64,
    w: &[Complex64],
    tgrid: &TimeGrid,
    ygrid: &FrequencyGrid,
) -> SpectrumSlice {
    let values = spectrum_of_samples(w, tgrid, ygrid);
    let tail_bound = tail_bound_for(f, x, ygrid, &values);
    SpectrumSlice { order: x, nodes: *ygrid, values, tail_bound, folded: ygrid.spans_period(tgrid) }
}

/// `f^(y) = L{f}(2 pi i y)`.
pub fn fourier(f: &HalfLineFunction, y: f64, tgrid: &TimeGrid) -> Result<Complex64> {
    verify_pego(f, Order::ZERO, tgrid)?;
    let w = weighted_samples(f, Order::ZERO, tgrid)?;
    Ok(direct_sum(&w, tgrid, 2.0 * PI * y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlancherelCheck {
    /// `(1/2pi) int |L{f}(x+iy)|^2 dy` over the frequency grid.
    pub lhs: f64,
    /// `int e^{-2xt} |f|^2 dt` over the time grid.
    pub rhs: f64,
    pub rel_err: f64,
    pub tail_bound: f64,
    /// Error-model prediction for `|lhs - rhs|`.
    pub predicted_gap: f64,
}

pub fn plancherel_check(
    f: &HalfLineFunction,
    x: Order,
    tgrid: &TimeGrid,
    ygrid: &FrequencyGrid,
) -> Result<PlancherelCheck> {
    let slice = laplace_line(f, x, tgrid, ygrid)?;
    let lhs = slice.energy() + slice.unfolded_tail() / (2.0 * PI);
    let rhs = weighted_l2_norm_sq(f, x, tgrid)?;
    let rel_err = (lhs - rhs).abs() / rhs.max(1e-300);
    let predicted_gap = slice.tail_bound / (2.0 * PI) + 1e-13 * rhs;
    Ok(PlancherelCheck { lhs, rhs, rel_err, tail_bound: slice.tail_bound, predicted_gap })
}

const BAND_SAMPLES: usize = 8192;

/// Supremum of `|L{f}(x +- iy)|` over each dyadic band `[Y, 2Y]`.
///
/// Closed-form functions use their exact transform. Sampled ones fall back
/// to midpoint sums, which alias beyond `pi / dt`; bands past that point are
/// refused.
pub fn riemann_lebesgue_profile(
    f: &HalfLineFunction,
    x: Order,
    tgrid: &TimeGrid,
    checkpoints: &[f64],
) -> Result<Vec<f64>> {
    if checkpoints.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
        return Err(PegoError::Parameter("checkpoints must be positive".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PegoError::Parameter("checkpoints must be increasing".into()));
    }
    verify_pego(f, x, tgrid)?;
    let xv = x.value();
    let closed = f.is_closed_form();
    let w = if closed { Vec::new() } else { weighted_samples(f, x, tgrid)? };
    let nyquist = PI / tgrid.dt();
    let mut out = Vec::with_capacity(checkpoints.len());
    for &big_y in checkpoints {
        if !closed && 2.0 * big_y > nyquist {
            return Err(PegoError::Scale(format!(
                "band [{big_y}, {}] exceeds the grid's alias-free range {nyquist}",
                2.0 * big_y
            )));
        }
        let sup = (0..=BAND_SAMPLES)
            .into_par_iter()
            .map(|i| {
                let y = big_y * (1.0 + i as f64 / BAND_SAMPLES as f64);
                let (a, b) = if closed {
                    (f.laplace(Complex64::new(xv, y)).unwrap(), f.laplace(Complex64::new(xv, -y)).unwrap())
                } else {
                    (direct_sum(&w, tgrid, y), direct_sum(&w, tgrid, -y))
                };
                a.norm().max(b.norm())
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max);
        out.push(sup);
    }
    Ok(out)
}

fn check_sampled_steps(f: &HalfLineFunction, grid: &TimeGrid) -> Result<()> {
    use HalfLineFunction::*;
    match f {
        Sampled { dt, .. } => {
            if (dt - grid.dt()).abs() > 1e-12 * dt.max(grid.dt()) {
                return Err(PegoError::GridMismatch(format!(
                    "sampled input has step {dt}, grid step is {}",
                    grid.dt()
                )));
            }
            Ok(())
        }
        Translate { base, .. }
        | Modulate { base, .. }
        | Scale { base, .. }
        | Dilate { base, .. }
        | Damp { base, .. } => check_sampled_steps(base, grid),
        Sum { terms } => terms.iter().try_for_each(|t| check_sampled_steps(t, grid)),
        _ => Ok(()),
    }
}

fn finite_samples(f: &HalfLineFunction, grid: &TimeGrid) -> Result<Vec<Complex64>> {
    weighted_samples(f, Order::ZERO, grid)
}

/// `(f * g)(t) = int_0^t f(s) g(t - s) ds` sampled on the grid nodes.
///
/// The discrete linear convolution `c_m = dt sum_{i+j=m} f_i g_j` lives on
/// `(m + 1) dt`; node values are the average of the two neighbours, which
/// keeps the midpoint error second order. Output is truncated at `t_max`.
pub fn convolve(f: &HalfLineFunction, g: &HalfLineFunction, tgrid: &TimeGrid) -> Result<HalfLineFunction> {
    check_sampled_steps(f, tgrid)?;
    check_sampled_steps(g, tgrid)?;
    let fs = finite_samples(f, tgrid)?;
    let gs = finite_samples(g, tgrid)?;
    let c = linear_convolution(&fs, &gs, tgrid.dt());
    let n = tgrid.len();
    let values = (0..n)
        .map(|k| {
            let prev = if k == 0 { Complex64::new(0.0, 0.0) } else { c[k - 1] };
            0.5 * (prev + c[k])
        })
        .collect();
    HalfLineFunction::sampled(tgrid.dt(), values)
}

fn linear_convolution(a: &[Complex64], b: &[Complex64], dt: f64) -> Vec<Complex64> {
    let len = a.len() + b.len();
    let mut pa = a.to_vec();
    pa.resize(len, Complex64::new(0.0, 0.0));
    let mut pb = b.to_vec();
    pb.resize(len, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut pa);
    fwd.process(&mut pb);
    for (x, y) in pa.iter_mut().zip(&pb) {
        *x *= y;
    }
    inv.process(&mut pa);
    let scale = dt / len as f64;
    pa.iter().map(|v| v * scale).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionGap {
    pub max_abs_gap: f64,
    /// Frequency where the gap is attained.
    pub at_y: f64,
}

/// `max_k |L{f*g}(x+iy_k) - L{f}(x+iy_k) L{g}(x+iy_k)|`.
pub fn convolution_theorem_check(
    f: &HalfLineFunction,
    g: &HalfLineFunction,
    x: Order,
    tgrid: &TimeGrid,
    ygrid: &FrequencyGrid,
) -> Result<ConvolutionGap> {
    let h = convolve(f, g, tgrid)?;
    let lf = laplace_line(f, x, tgrid, ygrid)?;
    let lg = laplace_line(g, x, tgrid, ygrid)?;
    let lh = laplace_line(&h, x, tgrid, ygrid)?;
    let mut gap = ConvolutionGap { max_abs_gap: 0.0, at_y: 0.0 };
    for (i, ((a, b), c)) in lf.values.iter().zip(&lg.values).zip(&lh.values).enumerate() {
        let d = (c - a * b).norm();
        if d > gap.max_abs_gap {
            gap = ConvolutionGap { max_abs_gap: d, at_y: ygrid.node(i) };
        }
    }
    Ok(gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionL1 {
    /// Truncated `int e^{-xt} |f*g(t)| dt`.
    pub value: f64,
    /// `||f_x||_1 ||g_x||_1`.
    pub bound: f64,
    pub tolerance: f64,
}

/// Checks `||(f*g)_x||_1 <= ||f_x||_1 ||g_x||_1`.
///
/// Neighbour averaging in [`convolve`] inflates the weighted sum by at most
/// `cosh(x dt / 2)`, which sets the tolerance.
pub fn l1_bound_of_convolution(
    f: &HalfLineFunction,
    g: &HalfLineFunction,
    x: Order,
    tgrid: &TimeGrid,
) -> Result<ConvolutionL1> {
    let nf = verify_pego(f, x, tgrid)?;
    let ng = verify_pego(g, x, tgrid)?;
    let h = convolve(f, g, tgrid)?;
    let value = verify_pego(&h, x, tgrid)?.l1;
    let bound = nf.l1 * ng.l1;
    let xd = x.value() * tgrid.dt();
    let tolerance = bound * (xd * xd / 4.0 + 1e-12) + 1e-14;
    if value > bound + tolerance {
        return Err(PegoError::Invariant { what: "L1 norm of weighted convolution".into(), value, bound });
    }
    Ok(ConvolutionL1 { value, bound, tolerance })
}

/// Richardson estimate of the midpoint error for `||f_x||^2`, re-exported
/// here for callers that only deal with spectra.
pub fn quadrature_error(f: &HalfLineFunction, x: Order, tgrid: &TimeGrid) -> Result<f64> {
    norm_error_estimate(f, x, tgrid)
}
