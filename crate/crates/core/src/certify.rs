//! Numerical certificates for lower-bound conditions of the form
//!
//! ```text
//! (T χ_{E_j})*(t) ≥ C · T_σ(χ_{(0, a_j)})(c t),   a_j = μ(E_j),
//! ```
//!
//! weak-type ratio sweeps, the nonimprovability experiment for the Riesz
//! potential, and truncation-based membership and Fatou probes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::calderon::{char_closed_form, CalderonOp, SigmaTriple};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::measure::{Piece, StepFunction};
use crate::norms::{fundamental_function, lorentz_norm_rearr, root, LorentzIndex};
use crate::operators::{
    hilbert_char_rearranged, rearrange_radial, sample_output, unit_ball_volume, OutputWindow, RadialFunction,
    RnOperator,
};
use crate::report::{extended, extended_vec};

/// Relative slack applied to the optimal `C` so that the certificate survives
/// grid refinement.
pub const C_BACKOFF: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Valid,
    Invalid,
    /// Too few data points for the trend checks.
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "VALID",
            Verdict::Invalid => "INVALID",
            Verdict::Degenerate => "DEGENERATE",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Shrinking,
    Growing,
    Single,
}

/// Balls `E_j = B(0, ρ_j)` in ℝⁿ and the normalized functions
/// `f_j = a_j^{-1/p} χ_{E_j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSequence {
    pub p: f64,
    pub n: u32,
    pub radii: Vec<f64>,
}

impl ExtremalSequence {
    pub fn new(p: f64, n: u32, radii: Vec<f64>) -> Result<Self> {
        unit_ball_volume(n)?;
        if !(p > 0.0) {
            return Err(Error::param(format!("extremal sequence needs p > 0, got {p}")));
        }
        if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::param("radii must be a nonempty list of positive numbers"));
        }
        let seq = ExtremalSequence { p, n, radii };
        if seq.radii.len() > 1 && seq.direction_raw().is_none() {
            return Err(Error::param("radii must be strictly monotone"));
        }
        Ok(seq)
    }

    /// Radii `1/j`, `j = 1..=j_max`.
    pub fn shrinking(p: f64, n: u32, j_max: usize) -> Result<Self> {
        ExtremalSequence::new(p, n, (1..=j_max).map(|j| 1.0 / j as f64).collect())
    }

    /// Radii `j`, `j = 1..=j_max`.
    pub fn growing(p: f64, n: u32, j_max: usize) -> Result<Self> {
        ExtremalSequence::new(p, n, (1..=j_max).map(|j| j as f64).collect())
    }

    fn direction_raw(&self) -> Option<Direction> {
        if self.radii.len() == 1 {
            Some(Direction::Single)
        } else if self.radii.windows(2).all(|w| w[1] < w[0]) {
            Some(Direction::Shrinking)
        } else if self.radii.windows(2).all(|w| w[1] > w[0]) {
            Some(Direction::Growing)
        } else {
            None
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction_raw().expect("monotonicity checked on construction")
    }

    /// `a_j = ω_n ρ_j^n`.
    pub fn measures(&self) -> Vec<f64> {
        let omega = unit_ball_volume(self.n).expect("dimension checked on construction");
        self.radii.iter().map(|r| omega * r.powi(self.n as i32)).collect()
    }

    pub fn indicator(&self, j: usize) -> Result<RadialFunction> {
        RadialFunction::ball(self.n, self.radii[j], 1.0)
    }

    /// `f_j = a_j^{-1/p} χ_{E_j}`.
    pub fn function(&self, j: usize) -> Result<RadialFunction> {
        let a = self.measures()[j];
        RadialFunction::ball(self.n, self.radii[j], a.powf(-1.0 / self.p))
    }

    /// `‖f_j‖_{idx}` computed from the rearrangement.
    pub fn norm(&self, j: usize, idx: LorentzIndex) -> Result<f64> {
        Ok(lorentz_norm_rearr(&rearrange_radial(&self.function(j)?), idx))
    }

    /// `φ(a_j) a_j^{-1/p}` for the Lorentz fundamental function `φ`.
    pub fn expected_norm(&self, j: usize, idx: LorentzIndex) -> Result<f64> {
        let a = self.measures()[j];
        Ok(fundamental_function(idx, a)? * a.powf(-1.0 / self.p))
    }
}

/// Inputs of a lower-bound search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub op: RnOperator,
    pub calderon: CalderonOp,
    pub sigma: SigmaTriple,
    pub family: ExtremalSequence,
    pub t_min: f64,
    pub t_max: f64,
    pub grid_size: usize,
    /// Finite-measure variant for `H`/`S^∞`: only `t < min{t₀, (a_j/2)^{1/m}/c}`
    /// is tested.
    pub t0: Option<f64>,
}

impl CertifyConfig {
    pub fn new(
        op: RnOperator,
        calderon: CalderonOp,
        sigma: SigmaTriple,
        family: ExtremalSequence,
        t_range: (f64, f64),
        grid_size: usize,
    ) -> Result<Self> {
        let cfg =
            CertifyConfig { op, calderon, sigma, family, t_min: t_range.0, t_max: t_range.1, grid_size, t0: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        self.t0 = Some(t0);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::param(format!("need 0 < t_min < t_max < inf, got ({}, {})", self.t_min, self.t_max)));
        }
        if self.grid_size < 2 {
            return Err(Error::param("grid_size must be at least 2"));
        }
        let near_zero = self.calderon.acts_near_zero();
        if near_zero && self.sigma.p.is_infinite() {
            return Err(Error::config("sigma-mismatch", format!("{} requires p < inf", self.calderon)));
        }
        match (near_zero, self.family.direction()) {
            (true, Direction::Growing) => {
                return Err(Error::config(
                    "family-direction",
                    format!("{} tests behaviour near zero and needs a shrinking family", self.calderon),
                ))
            }
            (false, Direction::Shrinking) => {
                return Err(Error::config(
                    "family-direction",
                    format!("{} tests behaviour at infinity and needs a growing family", self.calderon),
                ))
            }
            _ => {}
        }
        if let Some(t0) = self.t0 {
            if near_zero {
                return Err(Error::config("finite-range", "t0 applies only to H and Sinf"));
            }
            if !(t0 > 0.0) {
                return Err(Error::param("t0 must be positive"));
            }
        }
        if matches!(self.op, RnOperator::Hilbert | RnOperator::Maximal { .. } | RnOperator::Hl) && self.family.n != 1 {
            return Err(Error::config("dimension", format!("{} is implemented for n = 1 only", self.op.name())));
        }
        if let RnOperator::Riesz { gamma, .. } = self.op {
            if !(gamma > 0.0 && gamma < self.family.n as f64) {
                return Err(Error::param(format!("gamma must lie in (0, {}), got {gamma}", self.family.n)));
            }
        }
        Ok(())
    }

    /// Geometric grid of `grid_size` points on `[t_min, t_max]`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_size - 1;
        let ratio = (self.t_max / self.t_min).ln();
        let mut g: Vec<f64> = (0..=n).map(|i| self.t_min * (ratio * i as f64 / n as f64).exp()).collect();
        g[n] = self.t_max;
        g
    }

    /// Same range with `factor` times as many cells; the old nodes are kept.
    pub fn refined(&self, factor: usize) -> Self {
        CertifyConfig { grid_size: (self.grid_size - 1) * factor + 1, ..self.clone() }
    }
}

/// `(T χ_{E_j})*` along the t-axis.
struct Lhs<'a> {
    cfg: &'a CertifyConfig,
    omega: f64,
}

impl Lhs<'_> {
    fn eval(&self, j: usize, t: f64) -> Result<f64> {
        let fam = &self.cfg.family;
        match self.cfg.op {
            RnOperator::Hilbert => hilbert_char_rearranged(2.0 * fam.radii[j], 1.0, t),
            op => {
                // Radially nonincreasing output: f*(t) = F(r) with t = ω_n r^n.
                let r = (t / self.omega).powf(1.0 / fam.n as f64);
                op.eval_radial(&fam.indicator(j)?, r)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstPoint {
    pub j: usize,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Set when `rhs` is the left limit at a jump of `S^∞`.
    pub left_limit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub n: u32,
    pub direction: Direction,
    pub radii: Vec<f64>,
    pub measures: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub operator: RnOperator,
    pub calderon: CalderonOp,
    pub sigma: SigmaTriple,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub c: f64,
    pub t_grid: Vec<f64>,
    pub margin: f64,
    pub verdict: Verdict,
    pub family: FamilySummary,
    pub worst_per_j: Vec<WorstPoint>,
    pub witness: Option<WorstPoint>,
}

/// A sample of the right-hand side: value and whether it is a left limit.
#[derive(Clone, Copy)]
struct Node {
    t: f64,
    rhs: f64,
    left_limit: bool,
}

struct Problem<'a> {
    cfg: &'a CertifyConfig,
    lhs: Lhs<'a>,
    measures: Vec<f64>,
    grid: Vec<f64>,
    /// LHS on `grid`, per family member.
    lhs_grid: Vec<Vec<f64>>,
}

impl<'a> Problem<'a> {
    fn new(cfg: &'a CertifyConfig, exec: Exec) -> Result<Self> {
        cfg.validate()?;
        let omega = unit_ball_volume(cfg.family.n)?;
        let lhs = Lhs { cfg, omega };
        let grid = cfg.grid();
        let js: Vec<usize> = (0..cfg.family.radii.len()).collect();
        let lhs_grid = exec.try_map(&js, |&j| grid.iter().map(|&t| lhs.eval(j, t)).collect::<Result<Vec<f64>>>())?;
        for (j, vals) in lhs_grid.iter().enumerate() {
            if let Some(i) = (1..vals.len()).find(|&i| vals[i] > vals[i - 1] * (1.0 + 1e-9)) {
                return Err(Error::Numeric(format!(
                    "rearranged output for member {j} increases between t = {} and t = {}",
                    grid[i - 1],
                    grid[i]
                )));
            }
        }
        Ok(Problem { cfg, lhs, measures: cfg.family.measures(), grid, lhs_grid })
    }

    fn rhs(&self, a: f64, c: f64, t: f64) -> Result<f64> {
        char_closed_form(self.cfg.calderon, self.cfg.sigma, a, c * t)
    }

    /// Upper end of the tested range for member `j`.
    fn t_upper(&self, a: f64, c: f64) -> f64 {
        match self.cfg.t0 {
            Some(t0) => self.cfg.t_max.min(t0.min((a / 2.0).powf(1.0 / self.cfg.sigma.m) / c)),
            None => self.cfg.t_max,
        }
    }

    /// Grid nodes plus the kink `(ct)^m = a`, with the `S^∞` left limit there.
    fn nodes(&self, j: usize, c: f64) -> Result<Vec<(Node, Option<usize>)>> {
        let a = self.measures[j];
        let upper = self.t_upper(a, c);
        let mut out = Vec::with_capacity(self.grid.len() + 2);
        for (i, &t) in self.grid.iter().enumerate() {
            if t <= upper {
                out.push((Node { t, rhs: self.rhs(a, c, t)?, left_limit: false }, Some(i)));
            }
        }
        let kink = a.powf(1.0 / self.cfg.sigma.m) / c;
        if kink > self.cfg.t_min && kink < upper {
            out.push((Node { t: kink, rhs: self.rhs(a, c, kink)?, left_limit: false }, None));
            if self.cfg.calderon == CalderonOp::Sinf {
                let left = self.cfg.sigma.scale(a.powf(1.0 / self.cfg.sigma.m)) * root(a, self.cfg.sigma.p);
                out.push((Node { t: kink, rhs: left, left_limit: true }, None));
            }
        }
        out.sort_by(|x, y| x.0.t.total_cmp(&y.0.t).then(y.0.left_limit.cmp(&x.0.left_limit)));
        Ok(out)
    }

    fn lhs_at(&self, j: usize, node: &(Node, Option<usize>)) -> Result<f64> {
        match node.1 {
            Some(i) => Ok(self.lhs_grid[j][i]),
            None => self.lhs.eval(j, node.0.t),
        }
    }

    fn ratio(&self, j: usize, c: f64, t: f64) -> Result<f64> {
        let rhs = self.rhs(self.measures[j], c, t)?;
        if rhs <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.lhs.eval(j, t)? / rhs)
    }

    /// `min_t LHS/RHS` for member `j`: node minimum, then golden-section
    /// refinement between the neighbours of the minimizing node.
    fn min_ratio(&self, j: usize, c: f64) -> Result<f64> {
        let nodes = self.nodes(j, c)?;
        let mut best = f64::INFINITY;
        let mut arg = None;
        for (k, node) in nodes.iter().enumerate() {
            if node.0.rhs > 0.0 {
                let r = self.lhs_at(j, node)? / node.0.rhs;
                if r < best {
                    best = r;
                    arg = Some(k);
                }
            }
        }
        let Some(k) = arg else { return Ok(f64::INFINITY) };
        let lo = nodes[k.saturating_sub(1)].0.t;
        let hi = nodes[(k + 1).min(nodes.len() - 1)].0.t;
        let refined = golden_min(|t| self.ratio(j, c, t), lo, hi, 48)?;
        Ok(best.min(refined))
    }

    /// `C*(c) = min_j min_t LHS/RHS`.
    fn best_constant(&self, c: f64) -> Result<f64> {
        let mut best = f64::INFINITY;
        for j in 0..self.measures.len() {
            best = best.min(self.min_ratio(j, c)?);
        }
        Ok(best)
    }

    fn evaluate(&self, big_c: f64, c: f64) -> Result<BoundCertificate> {
        let mut worst_per_j = Vec::with_capacity(self.measures.len());
        for j in 0..self.measures.len() {
            let mut worst: Option<WorstPoint> = None;
            for node in self.nodes(j, c)? {
                let lhs = self.lhs_at(j, &node)?;
                let margin = lhs - big_c * node.0.rhs;
                if worst.is_none_or(|w| margin < w.margin) {
                    worst = Some(WorstPoint {
                        j,
                        t: node.0.t,
                        lhs,
                        rhs: node.0.rhs,
                        margin,
                        left_limit: node.0.left_limit,
                    });
                }
            }
            if let Some(w) = worst {
                worst_per_j.push(w);
            }
        }
        let margin = worst_per_j.iter().map(|w| w.margin).fold(f64::INFINITY, f64::min);
        let valid = big_c > 0.0 && margin >= 0.0;
        let witness =
            if valid { None } else { worst_per_j.iter().copied().min_by(|a, b| a.margin.total_cmp(&b.margin)) };
        Ok(BoundCertificate {
            operator: self.cfg.op,
            calderon: self.cfg.calderon,
            sigma: self.cfg.sigma,
            big_c,
            c,
            t_grid: self.grid.clone(),
            margin,
            verdict: if valid { Verdict::Valid } else { Verdict::Invalid },
            family: FamilySummary {
                n: self.cfg.family.n,
                direction: self.cfg.family.direction(),
                radii: self.cfg.family.radii.clone(),
                measures: self.measures.clone(),
            },
            worst_per_j,
            witness,
        })
    }
}

/// Minimizes `f` on `[lo, hi]` by golden-section search; returns the smallest
/// value seen.
fn golden_min<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, iters: usize) -> Result<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    let mut best = f1.min(f2);
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
            best = best.min(f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
            best = best.min(f2);
        }
    }
    Ok(best)
}

/// Searches `(C, c)` for the largest `C` such that the lower bound holds on
/// the grid, then backs `C` off by [`C_BACKOFF`].
///
/// `c` ranges over 25 log-spaced points in `[10⁻³, 10³]` followed by a
/// golden-section search in `ln c` around the best one.
pub fn certify_lower_bound(cfg: &CertifyConfig, exec: Exec) -> Result<BoundCertificate> {
    let problem = Problem::new(cfg, exec)?;
    let cs: Vec<f64> = (0..25).map(|k| 10f64.powf(-3.0 + 0.25 * k as f64)).collect();
    let values = exec.try_map(&cs, |&c| problem.best_constant(c))?;
    let finite = |x: f64| if x.is_finite() { x } else { f64::NEG_INFINITY };
    let (k, _) = values
        .iter()
        .enumerate()
        .max_by(|a, b| finite(*a.1).total_cmp(&finite(*b.1)).then(b.0.cmp(&a.0)))
        .expect("25 candidates");
    if !values[k].is_finite() {
        return Err(Error::Numeric("the right-hand side vanishes on the whole grid for every c".into()));
    }
    let (mut best_c, mut best_val) = (cs[k], values[k]);
    let lo = cs[k.saturating_sub(1)].ln();
    let hi = cs[(k + 1).min(cs.len() - 1)].ln();
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..40 {
        let x1 = b - gr * (b - a);
        let x2 = a + gr * (b - a);
        let f1 = finite(problem.best_constant(x1.exp())?);
        let f2 = finite(problem.best_constant(x2.exp())?);
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best_val {
                best_val = v;
                best_c = x.exp();
            }
        }
        if f1 >= f2 {
            b = x2;
        } else {
            a = x1;
        }
    }
    problem.evaluate(best_val * (1.0 - C_BACKOFF), best_c)
}

/// Evaluates a given `(C, c)` on the configured grid.
pub fn evaluate_certificate(cfg: &CertifyConfig, big_c: f64, c: f64, exec: Exec) -> Result<BoundCertificate> {
    if !(big_c >= 0.0 && big_c.is_finite() && c > 0.0 && c.is_finite()) {
        return Err(Error::param(format!("need C >= 0 and c > 0, got C = {big_c}, c = {c}")));
    }
    Problem::new(cfg, exec)?.evaluate(big_c, c)
}

/// Re-evaluates a certificate on a grid `factor` times finer.
pub fn recheck(cfg: &CertifyConfig, cert: &BoundCertificate, factor: usize, exec: Exec) -> Result<BoundCertificate> {
    evaluate_certificate(&cfg.refined(factor), cert.big_c, cert.c, exec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Bounded,
    Diverging,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub support_measure: f64,
    pub domain_norm: f64,
    #[serde(serialize_with = "extended")]
    pub target_norm: f64,
    #[serde(serialize_with = "extended")]
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub operator: RnOperator,
    pub domain: LorentzIndex,
    pub target: LorentzIndex,
    pub rows: Vec<SweepRow>,
    #[serde(serialize_with = "extended")]
    pub sup: f64,
    /// Least-squares slope of the ratio against `ln(1/μ(supp f))`, divided by
    /// the mean ratio.
    pub relative_slope: f64,
    pub trend: Trend,
}

/// Relative slope above which a sweep is reported as diverging.
pub const DIVERGENCE_SLOPE: f64 = 0.02;

/// Ordinary least-squares slope; `None` when `xs` has no spread.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-12 * mx.abs().max(1.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// `‖T f‖_target / ‖f‖_domain` over a corpus of radial functions.
pub fn weak_type_sweep(
    op: &RnOperator,
    domain: LorentzIndex,
    target: LorentzIndex,
    corpus: &[RadialFunction],
    window: &OutputWindow,
    exec: Exec,
) -> Result<SweepReport> {
    if corpus.is_empty() {
        return Err(Error::param("corpus must not be empty"));
    }
    let indexed: Vec<(usize, &RadialFunction)> = corpus.iter().enumerate().collect();
    let rows = exec.try_map(&indexed, |&(index, f)| -> Result<SweepRow> {
        let domain_norm = lorentz_norm_rearr(&rearrange_radial(f), domain);
        let out = sample_output(op, f, window, Exec::Sequential)?;
        let target_norm = lorentz_norm_rearr(&rearrange_radial(&out), target);
        let ratio = if domain_norm > 0.0 {
            target_norm / domain_norm
        } else if target_norm > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Ok(SweepRow { index, support_measure: f.support_measure(), domain_norm, target_norm, ratio })
    })?;
    let sup = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.support_measure > 0.0).map(|r| (-r.support_measure.ln(), r.ratio)).unzip();
    let relative_slope = if sup.is_finite() {
        let mean = ys.iter().sum::<f64>() / ys.len().max(1) as f64;
        match ls_slope(&xs, &ys) {
            Some(s) if mean > 0.0 => s / mean,
            _ => 0.0,
        }
    } else {
        f64::INFINITY
    };
    let trend = if relative_slope > DIVERGENCE_SLOPE { Trend::Diverging } else { Trend::Bounded };
    Ok(SweepReport { operator: *op, domain, target, rows, sup, relative_slope, trend })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonimproveConfig {
    pub n: u32,
    pub gamma: f64,
    pub q_domain: f64,
    pub r_target: f64,
    pub j_max: usize,
    pub window: OutputWindow,
    /// Lower bound required of the least-squares log-slope.
    pub min_slope: f64,
}

impl NonimproveConfig {
    /// One-dimensional setup observed on the fixed region `|x| < 10`.
    pub fn new(gamma: f64, q_domain: f64, r_target: f64, j_max: usize) -> Self {
        NonimproveConfig {
            n: 1,
            gamma,
            q_domain,
            r_target,
            j_max,
            window: OutputWindow { outer_abs: Some(10.0), ..OutputWindow::default() },
            min_slope: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonimproveRow {
    pub j: usize,
    pub a: f64,
    pub domain_norm: f64,
    pub target_norm: f64,
    pub weak_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonimproveReport {
    pub config: NonimproveConfig,
    pub target_p: f64,
    pub rows: Vec<NonimproveRow>,
    pub domain_spread: f64,
    pub domain_constant: bool,
    pub target_increasing: Option<bool>,
    pub log_slope: Option<f64>,
    pub weak_ratio: f64,
    pub weak_bounded: bool,
    pub verdict: Verdict,
}

/// Riesz potential applied to `f_j = a_j^{-1} χ_{B(0,1/j)}`.
///
/// The domain norms `‖f_j‖_{1,q}` stay constant, the target norms
/// `‖I_γ f_j‖_{n/(n−γ), r}` grow like `log j` for `r < ∞`, and the weak
/// norms stay bounded.
pub fn nonimprove_experiment(cfg: &NonimproveConfig, exec: Exec) -> Result<NonimproveReport> {
    let n = cfg.n as f64;
    if !(cfg.gamma > 0.0 && cfg.gamma < n) {
        return Err(Error::param(format!("gamma must lie in (0, {n}), got {}", cfg.gamma)));
    }
    if !(cfg.q_domain > 0.0 && cfg.q_domain <= 1.0) {
        return Err(Error::param(format!("q_domain must lie in (0, 1], got {}", cfg.q_domain)));
    }
    if cfg.r_target.is_infinite() {
        return Err(Error::config(
            "weak-target",
            "r_target = inf is the bounded endpoint; the divergence experiment needs r_target < inf",
        ));
    }
    if cfg.j_max == 0 {
        return Err(Error::param("j_max must be at least 1"));
    }
    let target_p = n / (n - cfg.gamma);
    let domain = LorentzIndex::new(1.0, cfg.q_domain)?;
    let target = LorentzIndex::new(target_p, cfg.r_target)?;
    let weak = LorentzIndex::new(target_p, f64::INFINITY)?;
    let family = ExtremalSequence::shrinking(1.0, cfg.n, cfg.j_max)?;
    let op = RnOperator::Riesz { gamma: cfg.gamma, with_constant: false };
    let js: Vec<usize> = (0..cfg.j_max).collect();
    let measures = family.measures();
    let rows = exec.try_map(&js, |&j| -> Result<NonimproveRow> {
        let f = family.function(j)?;
        let out = rearrange_radial(&sample_output(&op, &f, &cfg.window, Exec::Sequential)?);
        Ok(NonimproveRow {
            j: j + 1,
            a: measures[j],
            domain_norm: lorentz_norm_rearr(&rearrange_radial(&f), domain),
            target_norm: lorentz_norm_rearr(&out, target),
            weak_norm: lorentz_norm_rearr(&out, weak),
        })
    })?;

    let d0 = rows[0].domain_norm;
    let domain_spread = rows.iter().map(|r| ((r.domain_norm - d0) / d0).abs()).fold(0.0, f64::max);
    let domain_constant = domain_spread <= 1e-8;
    let (wmax, wmin) =
        rows.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), r| (hi.max(r.weak_norm), lo.min(r.weak_norm)));
    let weak_ratio = wmax / wmin;
    let weak_bounded = weak_ratio <= 1.5;

    if cfg.j_max < 2 {
        return Ok(NonimproveReport {
            config: cfg.clone(),
            target_p,
            rows,
            domain_spread,
            domain_constant,
            target_increasing: None,
            log_slope: None,
            weak_ratio,
            weak_bounded,
            verdict: Verdict::Degenerate,
        });
    }
    let target_increasing = rows.windows(2).filter(|w| w[0].j >= 4).all(|w| w[1].target_norm > w[0].target_norm);
    let first = cfg.j_max.div_ceil(10);
    let tail: Vec<&NonimproveRow> = rows.iter().filter(|r| r.j >= first).collect();
    let xs: Vec<f64> = tail.iter().map(|r| -r.a.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|r| r.target_norm).collect();
    let log_slope = ls_slope(&xs, &ys).unwrap_or(0.0);
    let ok = domain_constant && target_increasing && log_slope >= cfg.min_slope && weak_bounded;
    Ok(NonimproveReport {
        config: cfg.clone(),
        target_p,
        rows,
        domain_spread,
        domain_constant,
        target_increasing: Some(target_increasing),
        log_slope: Some(log_slope),
        weak_ratio,
        weak_bounded,
        verdict: if ok { Verdict::Valid } else { Verdict::Invalid },
    })
}

/// Points per decade of the anchored grid used by [`truncated_power`].
pub const TRUNCATION_PER_DECADE: f64 = 64.0;

/// Smallest anchored node `10^{k/64}` that is `≥ x`.
fn anchor_above(x: f64) -> f64 {
    let node = |k: f64| 10f64.powf(k / TRUNCATION_PER_DECADE);
    let mut k = (x.log10() * TRUNCATION_PER_DECADE).ceil();
    while node(k) < x {
        k += 1.0;
    }
    while node(k - 1.0) >= x {
        k -= 1.0;
    }
    node(k)
}

/// Lower step approximation of `t^{-1/q} χ_{(ε, T)}`.
///
/// Cells are cut at `ε`, `T` and the anchored nodes `10^{k/64}`; each cell
/// carries `t^{-1/q}` at the first anchored node at or beyond its right end.
/// Because every truncation takes its values from the same anchored step
/// function, enlarging `(ε, T)` gives a pointwise larger function.
pub fn truncated_power(q: f64, eps: f64, t_cut: f64) -> Result<StepFunction> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::param(format!("q must be positive and finite, got {q}")));
    }
    if !(eps > 0.0 && t_cut.is_finite()) {
        return Err(Error::param(format!("need 0 < eps and finite T, got eps = {eps}, T = {t_cut}")));
    }
    if eps >= t_cut {
        return Ok(StepFunction::zero());
    }
    let mut bounds = vec![eps];
    let mut node = anchor_above(eps);
    if node == eps {
        node = anchor_above(eps * (1.0 + 1e-12));
    }
    while node < t_cut {
        bounds.push(node);
        node = anchor_above(node * (1.0 + 1e-12));
    }
    bounds.push(t_cut);
    let pieces = bounds.windows(2).map(|w| Piece::new(w[1] - w[0], anchor_above(w[1]).powf(-1.0 / q))).collect();
    StepFunction::new(pieces)?.with_origin(eps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipRow {
    pub eps: f64,
    pub t_cut: f64,
    pub norm: f64,
}

/// `‖t^{-1/q} χ_{(ε,T)}‖_{q,r}` for every pair of `eps` and `t_cut`.
pub fn membership_divergence(q: f64, r: f64, eps: &[f64], t_cut: &[f64]) -> Result<Vec<MembershipRow>> {
    let idx = LorentzIndex::new(q, r)?;
    let mut rows = Vec::with_capacity(eps.len() * t_cut.len());
    for &e in eps {
        for &t in t_cut {
            let h = truncated_power(q, e, t)?;
            rows.push(MembershipRow { eps: e, t_cut: t, norm: lorentz_norm_rearr(&h, idx) });
        }
    }
    Ok(rows)
}

/// The pointwise limit of a monotone family, or just its norm when the limit
/// is not a finite step function.
#[derive(Clone, Debug, PartialEq)]
pub enum FatouLimit {
    Function(StepFunction),
    Norm(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FatouReport {
    pub index: LorentzIndex,
    #[serde(serialize_with = "extended_vec")]
    pub norms: Vec<f64>,
    pub sup_norm: f64,
    #[serde(serialize_with = "extended")]
    pub limit_norm: f64,
    /// `‖limit‖ / sup_n ‖f_n‖`.
    #[serde(serialize_with = "extended")]
    pub constant: f64,
    pub holds: bool,
}

/// Checks `‖lim f_n‖ ≤ C sup_n ‖f_n‖` for a pointwise nondecreasing family and
/// reports the empirical `C`; `holds` means `C ≤ 1 + tolerance`.
pub fn weak_fatou_probe(
    idx: LorentzIndex,
    family: &[StepFunction],
    limit: &FatouLimit,
    tolerance: f64,
) -> Result<FatouReport> {
    if family.is_empty() {
        return Err(Error::param("family must not be empty"));
    }
    if let Some(k) = family.windows(2).position(|w| !w[0].le_pointwise(&w[1])) {
        return Err(Error::param(format!("family is not pointwise nondecreasing at member {}", k + 1)));
    }
    let limit_norm = match limit {
        FatouLimit::Function(g) => {
            if !family.last().expect("nonempty").le_pointwise(g) {
                return Err(Error::param("limit does not dominate the family"));
            }
            lorentz_norm_rearr(g, idx)
        }
        FatouLimit::Norm(v) if *v >= 0.0 => *v,
        FatouLimit::Norm(v) => return Err(Error::param(format!("limit norm must be nonnegative, got {v}"))),
    };
    let norms: Vec<f64> = family.iter().map(|f| lorentz_norm_rearr(f, idx)).collect();
    let sup_norm = norms.iter().copied().fold(0.0, f64::max);
    let constant = if sup_norm > 0.0 {
        limit_norm / sup_norm
    } else if limit_norm > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(FatouReport { index: idx, norms, sup_norm, limit_norm, constant, holds: constant <= 1.0 + tolerance })
}
