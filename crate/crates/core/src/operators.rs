//! Operators on ℝⁿ (n = 1, 2, 3) acting on radial step profiles and on
//! unions of intervals: the Riesz potential, Hardy–Littlewood and fractional
//! maximal operators, and the Hilbert transform.
//!
//! The Riesz potential of a ball is reduced to one angular integral by polar
//! coordinates centred at the evaluation point. Along each ray the radial
//! integral `∫ s^{γ-n} s^{n-1} ds` is exact, so the kernel singularity never
//! reaches the quadrature. The maximal operators and the Hilbert transform are
//! evaluated in closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::measure::{Piece, StepFunction};
use crate::norms::pow_diff;
use crate::quad;

const QUAD_REL_TOL: f64 = 1e-8;
const QUAD_MAX_DEPTH: u32 = 20;

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: u32) -> Result<f64> {
    match n {
        1 => Ok(2.0),
        2 => Ok(PI),
        3 => Ok(4.0 * PI / 3.0),
        _ => Err(Error::param(format!("dimension must be 1, 2 or 3, got {n}"))),
    }
}

#[derive(Deserialize)]
struct RawRadial {
    n: u32,
    profile: StepFunction,
}

/// A radial function on ℝⁿ: `f(y) = profile(|y|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRadial")]
pub struct RadialFunction {
    n: u32,
    profile: StepFunction,
}

impl TryFrom<RawRadial> for RadialFunction {
    type Error = Error;

    fn try_from(raw: RawRadial) -> Result<Self> {
        RadialFunction::new(raw.n, raw.profile)
    }
}

impl RadialFunction {
    pub fn new(n: u32, profile: StepFunction) -> Result<Self> {
        unit_ball_volume(n)?;
        if profile.origin() < 0.0 {
            return Err(Error::param("radial profile must start at a nonnegative radius"));
        }
        Ok(RadialFunction { n, profile })
    }

    /// `value · χ_{B(0, radius)}`.
    pub fn ball(n: u32, radius: f64, value: f64) -> Result<Self> {
        RadialFunction::new(n, StepFunction::indicator(radius, value)?)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn profile(&self) -> &StepFunction {
        &self.profile
    }

    /// Radius of the smallest ball containing the support.
    pub fn support_radius(&self) -> f64 {
        self.profile.origin() + self.profile.total_length()
    }

    pub fn support_measure(&self) -> f64 {
        let omega = unit_ball_volume(self.n).expect("dimension validated on construction");
        let inner = self.profile.origin().powi(self.n as i32);
        omega * (self.support_radius().powi(self.n as i32) - inner)
    }

    /// `x ↦ f(x/λ)`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        RadialFunction::new(self.n, self.profile.dilate(lambda)?)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        RadialFunction::new(self.n, self.profile.scaled(c)?)
    }
}

/// Nonincreasing rearrangement of a radial function on ℝⁿ.
///
/// The shell `{r_a ≤ |y| < r_b}` has measure `ω_n (r_b^n − r_a^n)`, so mapping
/// every piece to a shell and sorting by value is exact for any profile. For a
/// nonincreasing profile this is the substitution `t = ω_n r^n`.
pub fn rearrange_radial(f: &RadialFunction) -> StepFunction {
    let omega = unit_ball_volume(f.n).expect("dimension validated on construction");
    let n = f.n as i32;
    let pieces = f.profile.cells().map(|(a, b, v)| Piece::new(omega * (b.powi(n) - a.powi(n)), v)).collect();
    StepFunction::new(pieces).expect("shell measures are positive").rearrange()
}

/// `c_γ = π^{n/2} 2^γ Γ(γ/2) / Γ((n−γ)/2)`.
pub fn riesz_constant(n: u32, gamma: f64) -> Result<f64> {
    check_gamma(n, gamma)?;
    let n = n as f64;
    Ok(PI.powf(n / 2.0) * gamma.exp2() * gamma_fn(gamma / 2.0) / gamma_fn((n - gamma) / 2.0))
}

fn check_gamma(n: u32, gamma: f64) -> Result<()> {
    unit_ball_volume(n)?;
    if !(gamma > 0.0 && gamma < n as f64) {
        return Err(Error::param(format!("gamma must lie in (0, {n}), got {gamma}")));
    }
    Ok(())
}

/// `∫_{B(0,ρ)} |x − y|^{γ−n} dy` for `|x| = x`.
pub fn ball_potential(n: u32, gamma: f64, rho: f64, x: f64) -> Result<f64> {
    check_gamma(n, gamma)?;
    if !(rho >= 0.0 && x >= 0.0) {
        return Err(Error::param(format!("radii must be nonnegative, got rho = {rho}, x = {x}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    if n == 1 {
        let v =
            if x <= rho { (x + rho).powf(gamma) + (rho - x).powf(gamma) } else { pow_diff(x + rho, x - rho, gamma) };
        return Ok(v / gamma);
    }
    // n = 2: (2/γ)∫ dθ over a half-plane of directions; n = 3: (2π/γ)∫ sin θ dθ.
    let (prefactor, weight): (f64, fn(f64) -> f64) =
        if n == 2 { (2.0 / gamma, |_| 1.0) } else { (2.0 * PI / gamma, f64::sin) };
    let integral = if x < rho {
        // θ measured from the direction of x; the ray leaves the ball at L₊.
        let d = rho * rho - x * x;
        quad::integrate(
            |theta: f64| {
                let (s, c) = theta.sin_cos();
                let root = (rho * rho - x * x * s * s).max(0.0).sqrt();
                let exit = if c > 0.0 { d / (x * c + root) } else { root - x * c };
                weight(theta) * exit.powf(gamma)
            },
            0.0,
            PI,
            QUAD_REL_TOL,
            QUAD_MAX_DEPTH,
        )?
    } else {
        // Rays towards the origin that meet the ball, parametrized by
        // sin θ = (ρ/x) sin ψ so the square-root edge at the tangent disappears.
        let k = rho / x;
        let d = x * x - rho * rho;
        quad::integrate(
            |psi: f64| {
                let (sp, cp) = psi.sin_cos();
                let st = k * sp;
                // cos θ = √(cos²ψ + (1 − k²) sin²ψ), free of cancellation near the tangent
                let ct = (cp * cp + (d / (x * x)) * sp * sp).sqrt();
                let far = x * ct + rho * cp;
                let near = if far > 0.0 { d / far } else { 0.0 };
                let jac = if ct > 0.0 { k * cp / ct } else { 1.0 };
                let w = if n == 2 { 1.0 } else { st };
                w * jac * pow_diff(far, near, gamma)
            },
            0.0,
            PI / 2.0,
            QUAD_REL_TOL,
            QUAD_MAX_DEPTH,
        )?
    };
    Ok(prefactor * integral)
}

/// `I_γ f(x) = ∫ f(y) |x − y|^{γ−n} dy` at `|x| = x_radius`, optionally
/// multiplied by [`riesz_constant`].
pub fn riesz_radial(gamma: f64, f: &RadialFunction, x_radius: f64, use_constant: bool) -> Result<f64> {
    check_gamma(f.n, gamma)?;
    if !(x_radius >= 0.0 && x_radius.is_finite()) {
        return Err(Error::param(format!("x_radius must be finite and nonnegative, got {x_radius}")));
    }
    // f = Σ (v_i − v_{i+1}) χ_{B(b_i)} − v_1 χ_{B(origin)}
    let cells: Vec<(f64, f64, f64)> = f.profile.cells().collect();
    let mut total = 0.0;
    if let Some(&(a0, _, v0)) = cells.first() {
        if a0 > 0.0 {
            total -= v0 * ball_potential(f.n, gamma, a0, x_radius)?;
        }
    }
    for (i, &(_, b, v)) in cells.iter().enumerate() {
        let next = cells.get(i + 1).map_or(0.0, |c| c.2);
        if v != next {
            total += (v - next) * ball_potential(f.n, gamma, b, x_radius)?;
        }
    }
    let total = total.max(0.0);
    Ok(if use_constant { total * riesz_constant(f.n, gamma)? } else { total })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    pub coef: f64,
}

#[derive(Deserialize)]
struct RawUnion {
    intervals: Vec<Interval>,
}

/// `Σ c_i χ_{[a_i, b_i]}` on ℝ with disjoint, sorted intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawUnion")]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl TryFrom<RawUnion> for IntervalUnion {
    type Error = Error;

    fn try_from(raw: RawUnion) -> Result<Self> {
        IntervalUnion::new(raw.intervals)
    }
}

impl IntervalUnion {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            if !(iv.a.is_finite() && iv.b.is_finite() && iv.a < iv.b && iv.coef.is_finite()) {
                return Err(Error::param(format!("bad interval [{}, {}] with coefficient {}", iv.a, iv.b, iv.coef)));
            }
        }
        if intervals.windows(2).any(|w| w[0].b > w[1].a) {
            return Err(Error::param("intervals must be sorted and disjoint"));
        }
        Ok(IntervalUnion { intervals })
    }

    pub fn single(a: f64, b: f64, coef: f64) -> Result<Self> {
        IntervalUnion::new(vec![Interval { a, b, coef }])
    }

    /// The even extension of a one-dimensional radial profile.
    pub fn from_radial(f: &RadialFunction) -> Result<Self> {
        if f.n != 1 {
            return Err(Error::param(format!("interval unions need n = 1, got n = {}", f.n)));
        }
        let cells: Vec<(f64, f64, f64)> = f.profile.cells().filter(|c| c.2 != 0.0).collect();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &(a, b, v) in &cells {
            if a == 0.0 {
                right.push(Interval { a: -b, b, coef: v });
            } else {
                left.push(Interval { a: -b, b: -a, coef: v });
                right.push(Interval { a, b, coef: v });
            }
        }
        left.reverse();
        left.extend(right);
        IntervalUnion::new(left)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn mass(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.coef.abs() * (iv.b - iv.a)).sum()
    }

    /// `∫_{lo}^{hi} |f|`.
    fn abs_integral(&self, lo: f64, hi: f64) -> f64 {
        self.intervals.iter().map(|iv| iv.coef.abs() * (hi.min(iv.b) - lo.max(iv.a)).max(0.0)).sum()
    }

    fn abs_value(&self, x: f64) -> f64 {
        // Half-open [a, b) so that one-sided limits below are unambiguous.
        self.intervals.iter().find(|iv| iv.a <= x && x < iv.b).map_or(0.0, |iv| iv.coef.abs())
    }

    fn abs_value_left(&self, x: f64) -> f64 {
        self.intervals.iter().find(|iv| iv.a < x && x <= iv.b).map_or(0.0, |iv| iv.coef.abs())
    }
}

/// Normalization of the averaging ball in the one-dimensional maximal operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `r^{α−1} ∫_{x−r}^{x+r} |f|`
    Radius,
    /// `(2r)^{α−1} ∫_{x−r}^{x+r} |f|`, the usual average when `α = 0`.
    Diameter,
}

/// `sup_{r>0} w(r) ∫_{B(x,r)} |f|` in one dimension, computed exactly.
///
/// Between consecutive distances from `x` to interval endpoints the integral
/// is affine, `A + B r`, and `r^{α−1}(A + B r)` has no interior maximum there.
/// The supremum is therefore a breakpoint value or the `r → 0⁺` limit.
pub fn maximal_1d(alpha: f64, u: &IntervalUnion, x: f64, norm: Normalization) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::param(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !x.is_finite() {
        return Err(Error::param("x must be finite"));
    }
    let k = match norm {
        Normalization::Radius => 1.0,
        Normalization::Diameter => 2f64.powf(alpha - 1.0),
    };
    let mut best: f64 = 0.0;
    if alpha == 0.0 {
        best = k * (u.abs_value_left(x) + u.abs_value(x));
    }
    for iv in &u.intervals {
        for e in [iv.a, iv.b] {
            let r = (x - e).abs();
            if r > 0.0 {
                best = best.max(k * r.powf(alpha - 1.0) * u.abs_integral(x - r, x + r));
            }
        }
    }
    Ok(best)
}

/// Principal-value Hilbert transform `(1/π) Σ c_i ln|(x − a_i)/(x − b_i)|`.
pub fn hilbert_char(u: &IntervalUnion, x: f64) -> Result<f64> {
    let mut sum = 0.0;
    for iv in &u.intervals {
        if x == iv.a || x == iv.b {
            return Err(Error::Singular(x));
        }
        let l = iv.b - iv.a;
        let log = if x > iv.b {
            (l / (x - iv.b)).ln_1p()
        } else if x < iv.a {
            -(l / (iv.a - x)).ln_1p()
        } else {
            ((x - iv.a) / (iv.b - x)).ln()
        };
        sum += iv.coef * log;
    }
    Ok(sum / PI)
}

/// `(|c| H χ_E)^*(t) = (|c|/π) asinh(2|E|/t)` for a single interval `E`.
///
/// The set where `|ln|(x−a)/(x−b)|| > s` is a pair of Apollonius intervals of
/// total length `2|E| / sinh s`; inverting gives the formula.
pub fn hilbert_char_rearranged(len: f64, coef: f64, t: f64) -> Result<f64> {
    if !(len > 0.0 && t > 0.0) {
        return Err(Error::param(format!("need len > 0 and t > 0, got len = {len}, t = {t}")));
    }
    Ok(coef.abs() * (2.0 * len / t).asinh() / PI)
}

/// Operators acting on radial functions, selected on the command line as
/// `riesz`, `maximal`, `hl` or `hilbert`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum RnOperator {
    Riesz { gamma: f64, with_constant: bool },
    Maximal { alpha: f64 },
    Hl,
    Hilbert,
}

impl RnOperator {
    pub fn name(&self) -> &'static str {
        match self {
            RnOperator::Riesz { .. } => "riesz",
            RnOperator::Maximal { .. } => "maximal",
            RnOperator::Hl => "hl",
            RnOperator::Hilbert => "hilbert",
        }
    }

    /// Radially nonincreasing inputs give radially nonincreasing outputs.
    pub fn preserves_radial_monotonicity(&self) -> bool {
        !matches!(self, RnOperator::Hilbert)
    }

    /// `|T f|` at radius `r`.
    pub fn eval_radial(&self, f: &RadialFunction, r: f64) -> Result<f64> {
        match *self {
            RnOperator::Riesz { gamma, with_constant } => riesz_radial(gamma, f, r, with_constant),
            RnOperator::Maximal { alpha } => {
                maximal_1d(alpha, &IntervalUnion::from_radial(f)?, r, Normalization::Radius)
            }
            RnOperator::Hl => maximal_1d(0.0, &IntervalUnion::from_radial(f)?, r, Normalization::Diameter),
            RnOperator::Hilbert => Ok(hilbert_char(&IntervalUnion::from_radial(f)?, r)?.abs()),
        }
    }

    /// Like [`eval_radial`](Self::eval_radial) on many radii, reusing the
    /// interval form of `f`.
    pub fn eval_many(&self, f: &RadialFunction, radii: &[f64], exec: Exec) -> Result<Vec<f64>> {
        match *self {
            RnOperator::Riesz { .. } => exec.try_map(radii, |&r| self.eval_radial(f, r)),
            RnOperator::Maximal { alpha } => {
                let u = IntervalUnion::from_radial(f)?;
                exec.try_map(radii, |&r| maximal_1d(alpha, &u, r, Normalization::Radius))
            }
            RnOperator::Hl => {
                let u = IntervalUnion::from_radial(f)?;
                exec.try_map(radii, |&r| maximal_1d(0.0, &u, r, Normalization::Diameter))
            }
            RnOperator::Hilbert => {
                let u = IntervalUnion::from_radial(f)?;
                exec.try_map(radii, |&r| hilbert_char(&u, r).map(f64::abs))
            }
        }
    }
}

/// Radii on which operator outputs are sampled.
///
/// Nodes are `0` and `ρ·10^{k/per_decade}` for `ρ` the support radius, from
/// `ρ·inner` up to `ρ·outer`, or up to the absolute radius `outer_abs` when
/// set. The relative window makes the sampled output exactly dilation
/// covariant; the absolute one keeps a fixed observation region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputWindow {
    pub per_decade: u32,
    pub inner: f64,
    pub outer: f64,
    pub outer_abs: Option<f64>,
}

impl Default for OutputWindow {
    fn default() -> Self {
        OutputWindow { per_decade: 32, inner: 1e-3, outer: 1e3, outer_abs: None }
    }
}

impl OutputWindow {
    pub fn nodes(&self, support_radius: f64) -> Result<Vec<f64>> {
        if self.per_decade == 0 || !(self.inner > 0.0 && self.inner < 1.0 && self.outer > 1.0) {
            return Err(Error::param("output window needs per_decade > 0 and inner < 1 < outer"));
        }
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::param("output window needs a positive support radius"));
        }
        let pd = self.per_decade as f64;
        let k_lo = (self.inner.log10() * pd).round() as i64;
        let end = match self.outer_abs {
            Some(r) if r > support_radius * self.inner => r,
            Some(r) => return Err(Error::param(format!("outer_abs = {r} lies inside the inner window"))),
            None => support_radius * self.outer,
        };
        let mut nodes = vec![0.0];
        let mut k = k_lo;
        loop {
            let r = support_radius * 10f64.powf(k as f64 / pd);
            if r >= end * (1.0 - 1e-12) {
                break;
            }
            nodes.push(r);
            k += 1;
        }
        nodes.push(end);
        Ok(nodes)
    }
}

/// Samples `|T f|` into a radial step profile and returns it.
///
/// Monotone-preserving operators use the left node of each cell, which is the
/// upper step of a nonincreasing output. The Hilbert transform is sampled at
/// cell midpoints because its modulus blows up at interval endpoints.
pub fn sample_output(op: &RnOperator, f: &RadialFunction, window: &OutputWindow, exec: Exec) -> Result<RadialFunction> {
    if f.profile.is_zero() {
        return RadialFunction::new(f.n, StepFunction::zero());
    }
    let nodes = window.nodes(f.support_radius())?;
    let cells = nodes.len() - 1;
    let points: Vec<f64> = if op.preserves_radial_monotonicity() {
        nodes[..cells].to_vec()
    } else {
        (0..cells).map(|i| if i == 0 { 0.5 * nodes[1] } else { (nodes[i] * nodes[i + 1]).sqrt() }).collect()
    };
    let values = op.eval_many(f, &points, exec)?;
    let mut pieces = Vec::with_capacity(cells);
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("{} output not finite at r = {}", op.name(), points[i])));
        }
        pieces.push(Piece::new(nodes[i + 1] - nodes[i], v));
    }
    RadialFunction::new(f.n, StepFunction::new(pieces)?)
}
