//! Calderón-type operators on `(0, ∞)` with parameters `σ = [p, q, m]`.
//!
//! * `R_σ g(t)  = t^{-1/q} ∫_0^{t^m} g(s) s^{1/p-1} ds`
//! * `S⁰_σ g(t) = t^{-1/q} sup_{0<s≤t^m} g(s) s^{1/p}`
//! * `H_σ g(t)  = t^{-1/q} ∫_{t^m}^∞ g(s) s^{1/p-1} ds`
//! * `S^∞_σ g(t) = t^{-1/q} sup_{t^m≤s} g(s) s^{1/p}`
//!
//! Step inputs are integrated piece by piece with exact antiderivatives.
//! Suprema over half-open pieces are taken as right-end limits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::StepFunction;
use crate::norms::{format_extended, parse_extended, root, Extended};

#[derive(Clone, Copy, Serialize, Deserialize)]
struct RawSigma {
    p: Extended,
    q: Extended,
    m: f64,
}

impl TryFrom<RawSigma> for SigmaTriple {
    type Error = Error;

    fn try_from(raw: RawSigma) -> Result<Self> {
        SigmaTriple::new(raw.p.0, raw.q.0, raw.m)
    }
}

impl From<SigmaTriple> for RawSigma {
    fn from(s: SigmaTriple) -> Self {
        RawSigma { p: Extended(s.p), q: Extended(s.q), m: s.m }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSigma", into = "RawSigma")]
pub struct SigmaTriple {
    pub p: f64,
    pub q: f64,
    pub m: f64,
}

impl SigmaTriple {
    pub fn new(p: f64, q: f64, m: f64) -> Result<Self> {
        if !(p > 0.0) || !(q > 0.0) {
            return Err(Error::param(format!("sigma needs p, q in (0, inf], got p = {p}, q = {q}")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::param(format!("sigma needs m in (0, inf), got {m}")));
        }
        Ok(SigmaTriple { p, q, m })
    }

    /// `t^{-1/q}`, equal to 1 when `q = ∞`.
    pub(crate) fn scale(&self, t: f64) -> f64 {
        if self.q.is_infinite() {
            1.0
        } else {
            t.powf(-1.0 / self.q)
        }
    }
}

impl fmt::Display for SigmaTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", format_extended(self.p), format_extended(self.q), format_extended(self.m))
    }
}

impl FromStr for SigmaTriple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::param(format!("expected \"p,q,m\", got {s:?}")));
        }
        SigmaTriple::new(parse_extended(parts[0])?, parse_extended(parts[1])?, parse_extended(parts[2])?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CalderonOp {
    R,
    S0,
    H,
    Sinf,
}

impl CalderonOp {
    pub const ALL: [CalderonOp; 4] = [CalderonOp::R, CalderonOp::S0, CalderonOp::H, CalderonOp::Sinf];

    /// Hardy-side operators act near zero and pair with shrinking families.
    pub fn acts_near_zero(self) -> bool {
        matches!(self, CalderonOp::R | CalderonOp::S0)
    }

    pub fn eval(self, sigma: SigmaTriple, g: &StepFunction, t: f64) -> Result<f64> {
        match self {
            CalderonOp::R => eval_r(sigma, g, t),
            CalderonOp::S0 => eval_s0(sigma, g, t),
            CalderonOp::H => eval_h(sigma, g, t),
            CalderonOp::Sinf => eval_sinf(sigma, g, t),
        }
    }
}

impl fmt::Display for CalderonOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CalderonOp::R => "R",
            CalderonOp::S0 => "S0",
            CalderonOp::H => "H",
            CalderonOp::Sinf => "Sinf",
        };
        f.write_str(s)
    }
}

impl FromStr for CalderonOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" => Ok(CalderonOp::R),
            "s0" => Ok(CalderonOp::S0),
            "h" => Ok(CalderonOp::H),
            "sinf" | "s_inf" => Ok(CalderonOp::Sinf),
            _ => Err(Error::param(format!("unknown Calderón operator {s:?} (expected R, S0, H, Sinf)"))),
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!("t must be positive and finite, got {t}")));
    }
    Ok(())
}

fn check_hardy(sigma: SigmaTriple) -> Result<()> {
    if sigma.p.is_infinite() {
        return Err(Error::param("R and S0 require p < inf"));
    }
    Ok(())
}

/// Pieces of `g` clipped to `(0, ∞)`, as `(a, b, value)` with `value > 0`.
fn positive_cells(g: &StepFunction) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
    g.cells().filter(|&(_, b, v)| v > 0.0 && b > 0.0).map(|(a, b, v)| (a.max(0.0), b, v))
}

pub fn eval_r(sigma: SigmaTriple, g: &StepFunction, t: f64) -> Result<f64> {
    check_t(t)?;
    check_hardy(sigma)?;
    let upper = t.powf(sigma.m);
    let inv_p = 1.0 / sigma.p;
    let mut sum = 0.0;
    for (a, b, v) in positive_cells(g) {
        if a >= upper {
            break;
        }
        let hi = b.min(upper);
        sum += v * (sigma.p * (hi.powf(inv_p) - a.powf(inv_p)));
    }
    Ok(sigma.scale(t) * sum)
}

pub fn eval_s0(sigma: SigmaTriple, g: &StepFunction, t: f64) -> Result<f64> {
    check_t(t)?;
    check_hardy(sigma)?;
    let upper = t.powf(sigma.m);
    let inv_p = 1.0 / sigma.p;
    let mut best: f64 = 0.0;
    for (a, b, v) in positive_cells(g) {
        if a >= upper {
            break;
        }
        best = best.max(v * b.min(upper).powf(inv_p));
    }
    Ok(sigma.scale(t) * best)
}

pub fn eval_h(sigma: SigmaTriple, g: &StepFunction, t: f64) -> Result<f64> {
    check_t(t)?;
    let lower = t.powf(sigma.m);
    let mut sum = 0.0;
    for (a, b, v) in positive_cells(g) {
        if b <= lower {
            continue;
        }
        let lo = a.max(lower);
        sum += if sigma.p.is_infinite() {
            v * (b / lo).ln()
        } else {
            let inv_p = 1.0 / sigma.p;
            v * (sigma.p * (b.powf(inv_p) - lo.powf(inv_p)))
        };
    }
    Ok(sigma.scale(t) * sum)
}

pub fn eval_sinf(sigma: SigmaTriple, g: &StepFunction, t: f64) -> Result<f64> {
    check_t(t)?;
    let lower = t.powf(sigma.m);
    let best =
        positive_cells(g).filter(|&(_, b, _)| b > lower).map(|(_, b, v)| v * root(b, sigma.p)).fold(0.0, f64::max);
    Ok(sigma.scale(t) * best)
}

/// Closed forms of the four operators applied to `χ_(0,a)`.
pub fn char_closed_form(op: CalderonOp, sigma: SigmaTriple, a: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::param(format!("a must be positive and finite, got {a}")));
    }
    let scale = sigma.scale(t);
    let upper = t.powf(sigma.m);
    let cut = a.min(upper);
    let (p, inv_p) = (sigma.p, 1.0 / sigma.p);
    Ok(match op {
        CalderonOp::R => {
            check_hardy(sigma)?;
            scale * (p * cut.powf(inv_p))
        }
        CalderonOp::S0 => {
            check_hardy(sigma)?;
            scale * cut.powf(inv_p)
        }
        CalderonOp::H if p.is_infinite() => scale * (a / cut).ln(),
        CalderonOp::H => scale * (p * (a.powf(inv_p) - cut.powf(inv_p))),
        CalderonOp::Sinf => {
            if upper < a {
                scale * root(a, p)
            } else {
                0.0
            }
        }
    })
}

/// Left limit in `t` of [`char_closed_form`]. Only `S^∞` jumps (at `t^m = a`);
/// the other three are continuous in `t`.
pub fn char_closed_form_left(op: CalderonOp, sigma: SigmaTriple, a: f64, t: f64) -> Result<f64> {
    if op == CalderonOp::Sinf && t.powf(sigma.m) <= a {
        check_t(t)?;
        return Ok(sigma.scale(t) * root(a, sigma.p));
    }
    char_closed_form(op, sigma, a, t)
}
