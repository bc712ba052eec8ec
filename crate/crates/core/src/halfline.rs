//! Functions on the half-line, midpoint grids and weighted norms.
//!
//! Every [`HalfLineFunction`] is zero-extended to negative arguments, so
//! `f(t - s)` is well defined for all `t` and `s >= 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PegoError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Closed-form or sampled model of `f: (0, inf) -> C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HalfLineFunction {
    /// `e^{-a t}`.
    Exponential {
        a: f64,
    },
    /// Indicator of the open interval `(a, b)`.
    Indicator {
        a: f64,
        b: f64,
    },
    /// `c (s (delta - s))^2` on `(0, delta)`. Without `c` the analytic
    /// unit-mass normalizer `30 / delta^5` is used.
    PolynomialBump {
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    /// Values at the midpoint nodes `(j + 1/2) dt`, linearly interpolated.
    Sampled {
        dt: f64,
        values: Vec<Complex64>,
    },
    /// `base(t - s)`.
    Translate {
        s: f64,
        base: Box<HalfLineFunction>,
    },
    /// `e^{i omega t} base(t)`.
    Modulate {
        omega: f64,
        base: Box<HalfLineFunction>,
    },
    /// `c base(t)`.
    Scale {
        c: Complex64,
        base: Box<HalfLineFunction>,
    },
    /// L2-normalized dilation `sqrt(c) base(c t)`.
    Dilate {
        c: f64,
        base: Box<HalfLineFunction>,
    },
    /// `e^{-x t} base(t)`.
    Damp {
        x: f64,
        base: Box<HalfLineFunction>,
    },
    Sum {
        terms: Vec<HalfLineFunction>,
    },
}

impl HalfLineFunction {
    pub fn zero() -> Self {
        HalfLineFunction::Sum { terms: Vec::new() }
    }

    pub fn exponential(a: f64) -> Result<Self> {
        let f = HalfLineFunction::Exponential { a };
        f.validate()?;
        Ok(f)
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        let f = HalfLineFunction::Indicator { a, b };
        f.validate()?;
        Ok(f)
    }

    pub fn polynomial_bump(delta: f64) -> Result<Self> {
        let f = HalfLineFunction::PolynomialBump { delta, c: None };
        f.validate()?;
        Ok(f)
    }

    pub fn sampled(dt: f64, values: Vec<Complex64>) -> Result<Self> {
        let f = HalfLineFunction::Sampled { dt, values };
        f.validate()?;
        Ok(f)
    }

    pub fn translate(self, s: f64) -> Result<Self> {
        let f = HalfLineFunction::Translate { s, base: Box::new(self) };
        f.validate()?;
        Ok(f)
    }

    pub fn modulate(self, omega: f64) -> Self {
        HalfLineFunction::Modulate { omega, base: Box::new(self) }
    }

    pub fn scale(self, c: Complex64) -> Self {
        HalfLineFunction::Scale { c, base: Box::new(self) }
    }

    pub fn dilate(self, c: f64) -> Result<Self> {
        let f = HalfLineFunction::Dilate { c, base: Box::new(self) };
        f.validate()?;
        Ok(f)
    }

    pub fn sum(terms: Vec<HalfLineFunction>) -> Self {
        HalfLineFunction::Sum { terms }
    }

    /// Checks parameter constraints recursively. Deserialized functions
    /// should pass through here before use.
    pub fn validate(&self) -> Result<()> {
        use HalfLineFunction::*;
        let bad = |msg: String| Err(PegoError::Parameter(msg));
        match self {
            Exponential { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return bad(format!("exponential decay rate must be > 0, got {a}"));
                }
            }
            Indicator { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a >= 0.0 && a < b) {
                    return bad(format!("indicator needs 0 <= a < b, got ({a}, {b})"));
                }
            }
            PolynomialBump { delta, c } => {
                if !(delta.is_finite() && *delta > 0.0) {
                    return bad(format!("bump support must be > 0, got {delta}"));
                }
                if let Some(c) = c {
                    if !(c.is_finite() && *c > 0.0) {
                        return bad(format!("bump normalizer must be > 0, got {c}"));
                    }
                }
            }
            Sampled { dt, values } => {
                if !(dt.is_finite() && *dt > 0.0) {
                    return bad(format!("sample step must be > 0, got {dt}"));
                }
                if values.is_empty() {
                    return bad("sampled function needs at least one value".into());
                }
            }
            Translate { s, base } => {
                if !(s.is_finite() && *s >= 0.0) {
                    return bad(format!("translation must be >= 0, got {s}"));
                }
                base.validate()?;
            }
            Modulate { omega, base } => {
                if !omega.is_finite() {
                    return bad(format!("modulation frequency must be finite, got {omega}"));
                }
                base.validate()?;
            }
            Scale { c, base } => {
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return bad(format!("scale factor must be finite, got {c}"));
                }
                base.validate()?;
            }
            Dilate { c, base } => {
                if !(c.is_finite() && *c > 0.0) {
                    return bad(format!("dilation factor must be > 0, got {c}"));
                }
                base.validate()?;
            }
            Damp { x, base } => {
                if !(x.is_finite() && *x >= 0.0) {
                    return bad(format!("damping rate must be >= 0, got {x}"));
                }
                base.validate()?;
            }
            Sum { terms } => {
                for t in terms {
                    t.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: HalfLineFunction = serde_json::from_str(text).map_err(|e| PegoError::Dsl(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("function serializes")
    }

    /// True when no `Sampled` node appears in the expression tree.
    pub fn is_closed_form(&self) -> bool {
        use HalfLineFunction::*;
        match self {
            Sampled { .. } => false,
            Translate { base, .. }
            | Modulate { base, .. }
            | Scale { base, .. }
            | Dilate { base, .. }
            | Damp { base, .. } => base.is_closed_form(),
            Sum { terms } => terms.iter().all(|t| t.is_closed_form()),
            _ => true,
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        use HalfLineFunction::*;
        if t < 0.0 {
            return ZERO;
        }
        match self {
            Exponential { a } => Complex64::new((-a * t).exp(), 0.0),
            Indicator { a, b } => {
                if *a < t && t < *b {
                    Complex64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            }
            PolynomialBump { delta, .. } => {
                if 0.0 < t && t < *delta {
                    let q = t * (delta - t);
                    Complex64::new(self.bump_normalizer() * q * q, 0.0)
                } else {
                    ZERO
                }
            }
            Sampled { dt, values } => interpolate(*dt, values, t),
            Translate { s, base } => base.eval(t - s),
            Modulate { omega, base } => Complex64::from_polar(1.0, omega * t) * base.eval(t),
            Scale { c, base } => c * base.eval(t),
            Dilate { c, base } => c.sqrt() * base.eval(c * t),
            Damp { x, base } => (-x * t).exp() * base.eval(t),
            Sum { terms } => terms.iter().map(|f| f.eval(t)).sum(),
        }
    }

    fn bump_normalizer(&self) -> f64 {
        match self {
            HalfLineFunction::PolynomialBump { delta, c } => c.unwrap_or(30.0 / delta.powi(5)),
            _ => unreachable!("normalizer requested for non-bump"),
        }
    }

    /// Values at the midpoint nodes of `grid`. Grid-aligned translations and
    /// sampled functions on the same step are handled by index shifting, so
    /// they carry no interpolation error.
    pub fn sample(&self, grid: &TimeGrid) -> Vec<Complex64> {
        use HalfLineFunction::*;
        let n = grid.len();
        match self {
            Sampled { dt, values } if same_step(*dt, grid.dt) => {
                let mut out = vec![ZERO; n];
                for (o, v) in out.iter_mut().zip(values) {
                    *o = *v;
                }
                out
            }
            Translate { s, base } if grid.shift_steps(*s).is_some() => {
                let m = grid.shift_steps(*s).unwrap();
                let inner = base.sample(grid);
                let mut out = vec![ZERO; n];
                if m < n {
                    out[m..].copy_from_slice(&inner[..n - m]);
                }
                out
            }
            Modulate { omega, base } => {
                let mut v = base.sample(grid);
                for (j, o) in v.iter_mut().enumerate() {
                    *o *= Complex64::from_polar(1.0, omega * grid.node(j));
                }
                v
            }
            Scale { c, base } => {
                let mut v = base.sample(grid);
                v.iter_mut().for_each(|o| *o *= c);
                v
            }
            Damp { x, base } => {
                let mut v = base.sample(grid);
                for (j, o) in v.iter_mut().enumerate() {
                    *o *= (-x * grid.node(j)).exp();
                }
                v
            }
            Sum { terms } => {
                let mut acc = vec![ZERO; n];
                for term in terms {
                    for (a, v) in acc.iter_mut().zip(term.sample(grid)) {
                        *a += v;
                    }
                }
                acc
            }
            _ => (0..n).map(|j| self.eval(grid.node(j))).collect(),
        }
    }

    /// Closed-form `L{f}(z)`; `None` when the tree contains sampled data.
    pub fn laplace(&self, z: Complex64) -> Option<Complex64> {
        use HalfLineFunction::*;
        match self {
            Exponential { a } => Some(1.0 / (z + a)),
            Indicator { a, b } => Some(indicator_laplace(*a, *b, z)),
            PolynomialBump { delta, .. } => Some(self.bump_normalizer() * bump_profile_laplace(*delta, z)),
            Sampled { .. } => None,
            Translate { s, base } => base.laplace(z).map(|v| (-z * s).exp() * v),
            Modulate { omega, base } => base.laplace(z - Complex64::new(0.0, *omega)),
            Scale { c, base } => base.laplace(z).map(|v| c * v),
            Dilate { c, base } => base.laplace(z / c).map(|v| v / c.sqrt()),
            Damp { x, base } => base.laplace(z + x),
            Sum { terms } => terms.iter().map(|t| t.laplace(z)).sum(),
        }
    }

    /// Constants `(C, w)` with `|L{f}(x + iy)| <= C / (|y| - w)` for `|y| > w`.
    pub fn decay_constant(&self, x: f64) -> Option<(f64, f64)> {
        use HalfLineFunction::*;
        match self {
            Exponential { .. } => Some((1.0, 0.0)),
            Indicator { a, b } => Some(((-x * a).exp() + (-x * b).exp(), 0.0)),
            PolynomialBump { delta, .. } => {
                // total variation of the unimodal bump
                let peak = self.bump_normalizer() * (delta * delta / 4.0).powi(2);
                Some((2.0 * peak, 0.0))
            }
            Sampled { .. } => None,
            Translate { s, base } => base.decay_constant(x).map(|(c, w)| ((-x * s).exp() * c, w)),
            Modulate { omega, base } => base.decay_constant(x).map(|(c, w)| (c, w + omega.abs())),
            Scale { c, base } => base.decay_constant(x).map(|(k, w)| (c.norm() * k, w)),
            Dilate { c, base } => base.decay_constant(x / c).map(|(k, w)| (c.sqrt() * k, c * w)),
            Damp { x: d, base } => base.decay_constant(x + d),
            Sum { terms } => terms
                .iter()
                .try_fold((0.0, 0.0), |(c, w), t| t.decay_constant(x).map(|(ct, wt)| (c + ct, f64::max(w, wt)))),
        }
    }

    /// Upper bound on `int_T^inf e^{-2xt} |f(t)|^2 dt` (exact for the
    /// exponential and indicator kinds).
    pub fn tail_mass(&self, x: f64, t: f64) -> Option<f64> {
        use HalfLineFunction::*;
        let t = t.max(0.0);
        match self {
            Exponential { a } => {
                let r = 2.0 * (a + x);
                Some((-r * t).exp() / r)
            }
            Indicator { a, b } => {
                let lo = a.max(t);
                if lo >= *b {
                    Some(0.0)
                } else if x == 0.0 {
                    Some(b - lo)
                } else {
                    Some(((-2.0 * x * lo).exp() - (-2.0 * x * b).exp()) / (2.0 * x))
                }
            }
            PolynomialBump { delta, .. } => {
                let peak = self.bump_normalizer() * (delta * delta / 4.0).powi(2);
                Some(peak * peak * (delta - t).max(0.0))
            }
            Sampled { dt, values } => {
                if t >= dt * values.len() as f64 {
                    Some(0.0)
                } else {
                    None
                }
            }
            Translate { s, base } => base.tail_mass(x, t - s).map(|m| (-2.0 * x * s).exp() * m),
            Modulate { base, .. } => base.tail_mass(x, t),
            Scale { c, base } => base.tail_mass(x, t).map(|m| c.norm_sqr() * m),
            Dilate { c, base } => base.tail_mass(x / c, c * t),
            Damp { x: d, base } => base.tail_mass(x + d, t),
            Sum { terms } => {
                terms.iter().try_fold(0.0, |acc, f| f.tail_mass(x, t).map(|m| acc + m.sqrt())).map(|r| r * r)
            }
        }
    }
}

fn same_step(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn interpolate(dt: f64, values: &[Complex64], t: f64) -> Complex64 {
    let n = values.len();
    let last = (n as f64) * dt;
    if t >= last {
        return ZERO;
    }
    let u = t / dt - 0.5;
    if u <= 0.0 {
        return values[0];
    }
    let i = u.floor() as usize;
    if i + 1 >= n {
        return values[n - 1];
    }
    let frac = u - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

fn indicator_laplace(a: f64, b: f64, z: Complex64) -> Complex64 {
    let w = b - a;
    let zw = z * w;
    let head = (-z * a).exp();
    if zw.norm() < 1e-4 {
        // (1 - e^{-zw}) / z without cancellation
        head * w * (1.0 - zw / 2.0 + zw * zw / 6.0)
    } else {
        head * (1.0 - (-zw).exp()) / z
    }
}

/// `int_0^delta (s (delta - s))^2 e^{-zs} ds`.
fn bump_profile_laplace(delta: f64, z: Complex64) -> Complex64 {
    let zd = z * delta;
    if zd.norm() < 2.0 {
        // power series in -z delta; moments of the profile in closed form
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..80 {
            let kf = k as f64;
            let moment = 1.0 / (kf + 3.0) - 2.0 / (kf + 4.0) + 1.0 / (kf + 5.0);
            sum += term * moment;
            term *= -zd / (kf + 1.0);
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum * delta.powi(5)
    } else {
        // repeated integration by parts; only the 2nd..4th derivatives survive
        let e = (-zd).exp();
        let z3 = z * z * z;
        let d2 = 2.0 * delta * delta * (1.0 - e) / z3;
        let d3 = -12.0 * delta * (1.0 + e) / (z3 * z);
        let d4 = 24.0 * (1.0 - e) / (z3 * z * z);
        d2 + d3 + d4
    }
}

/// Exponential weight rate `x >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Order(f64);

impl Order {
    pub const ZERO: Order = Order(0.0);

    pub fn new(x: f64) -> Result<Self> {
        if x.is_finite() && x >= 0.0 {
            Ok(Order(x))
        } else {
            Err(PegoError::Parameter(format!("order must be finite and >= 0, got {x}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Order {
    type Error = PegoError;
    fn try_from(x: f64) -> Result<Self> {
        Order::new(x)
    }
}

impl From<Order> for f64 {
    fn from(o: Order) -> f64 {
        o.0
    }
}

/// Uniform midpoint grid on `(0, t_max)` with nodes `(j + 1/2) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridConfig", into = "GridConfig")]
pub struct TimeGrid {
    dt: f64,
    t_max: f64,
    n: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridConfig {
    pub dt: f64,
    pub t_max: f64,
}

impl TryFrom<GridConfig> for TimeGrid {
    type Error = PegoError;
    fn try_from(c: GridConfig) -> Result<Self> {
        TimeGrid::new(c.dt, c.t_max)
    }
}

impl From<TimeGrid> for GridConfig {
    fn from(g: TimeGrid) -> Self {
        GridConfig { dt: g.dt, t_max: g.t_max }
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid::new(1e-3, 40.0).expect("default grid is valid")
    }
}

impl TimeGrid {
    pub fn new(dt: f64, t_max: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(PegoError::Grid(format!("dt must be > 0, got {dt}")));
        }
        if !(t_max.is_finite() && t_max > dt) {
            return Err(PegoError::Grid(format!("t_max must exceed dt, got t_max = {t_max}, dt = {dt}")));
        }
        let n = (t_max / dt - 1e-9).ceil() as usize;
        Ok(TimeGrid { dt, t_max, n })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dt
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }

    /// `Some(m)` when `s = m dt` up to rounding.
    pub fn shift_steps(&self, s: f64) -> Option<usize> {
        let m = (s / self.dt).round();
        if m >= 0.0 && (s - m * self.dt).abs() <= 1e-9 * self.dt {
            Some(m as usize)
        } else {
            None
        }
    }

    /// Same truncation point, twice the step.
    pub fn coarsened(&self) -> TimeGrid {
        TimeGrid::new(2.0 * self.dt, self.t_max).expect("coarsened grid")
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        same_step(self.dt, other.dt) && self.n == other.n
    }

    /// Overlap length of node `j`'s cell `[j dt, (j+1) dt]` with `[t, inf)`.
    pub fn cell_weight_beyond(&self, j: usize, t: f64) -> f64 {
        let lo = j as f64 * self.dt;
        let hi = lo + self.dt;
        (hi - lo.max(t)).clamp(0.0, self.dt)
    }
}

/// Ground truth attached to a family, when one is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Compact,
    NonCompact,
    Unknown,
}

/// Finite family of functions sharing an order and a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PegoFamily {
    pub members: Vec<HalfLineFunction>,
    pub order: Order,
    pub grid: TimeGrid,
    pub label: Label,
}

impl PegoFamily {
    pub fn new(members: Vec<HalfLineFunction>, order: Order, grid: TimeGrid) -> Result<Self> {
        if members.is_empty() {
            return Err(PegoError::Parameter("family needs at least one member".into()));
        }
        for m in &members {
            m.validate()?;
        }
        Ok(PegoFamily { members, order, grid, label: Label::Unknown })
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }

    pub fn x(&self) -> f64 {
        self.order.value()
    }

    /// Weighted samples `f_x(t_j)` of every member.
    pub fn weighted_members(&self) -> Result<Vec<Vec<Complex64>>> {
        self.members.iter().map(|f| weighted_samples(f, self.order, &self.grid)).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `f_x(t) = f(t) e^{-xt}`.
pub fn weight(f: &HalfLineFunction, x: Order) -> HalfLineFunction {
    HalfLineFunction::Damp { x: x.value(), base: Box::new(f.clone()) }
}

/// Samples of `f_x` on the grid, rejecting NaN and infinities.
pub fn weighted_samples(f: &HalfLineFunction, x: Order, grid: &TimeGrid) -> Result<Vec<Complex64>> {
    let mut v = f.sample(grid);
    let xv = x.value();
    for (j, s) in v.iter_mut().enumerate() {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(PegoError::NonFinite { index: j, t: grid.node(j), value: s.to_string() });
        }
        if xv != 0.0 {
            *s *= (-xv * grid.node(j)).exp();
        }
    }
    Ok(v)
}

pub(crate) fn l2_sq(samples: &[Complex64], dt: f64) -> f64 {
    samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt
}

/// Midpoint approximation of `int_0^{t_max} e^{-2xt} |f(t)|^2 dt`.
pub fn weighted_l2_norm_sq(f: &HalfLineFunction, x: Order, grid: &TimeGrid) -> Result<f64> {
    let w = weighted_samples(f, x, grid)?;
    Ok(l2_sq(&w, grid.dt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PegoNorms {
    pub l1: f64,
    pub l2: f64,
}

/// Truncated `||f_x||_1` and `||f_x||_2`; both finite means `f` is accepted
/// as Laplace-Pego of order `x` at this resolution.
pub fn verify_pego(f: &HalfLineFunction, x: Order, grid: &TimeGrid) -> Result<PegoNorms> {
    let xv = x.value();
    let (mut l1, mut l2) = (0.0, 0.0);
    for (j, v) in f.sample(grid).into_iter().enumerate() {
        let w = v * (-xv * grid.node(j)).exp();
        l1 += w.norm();
        l2 += w.norm_sqr();
    }
    l1 *= grid.dt();
    l2 *= grid.dt();
    if !l1.is_finite() {
        return Err(PegoError::NotPego { order: xv, norm: "L1" });
    }
    if !l2.is_finite() {
        return Err(PegoError::NotPego { order: xv, norm: "L2" });
    }
    Ok(PegoNorms { l1, l2: l2.sqrt() })
}

/// Richardson estimate of the midpoint error of [`weighted_l2_norm_sq`]:
/// `|Q(dt) - Q(2 dt)| / 3`.
pub fn norm_error_estimate(f: &HalfLineFunction, x: Order, grid: &TimeGrid) -> Result<f64> {
    let fine = weighted_l2_norm_sq(f, x, grid)?;
    let coarse = weighted_l2_norm_sq(f, x, &grid.coarsened())?;
    Ok((fine - coarse).abs() / 3.0)
}
