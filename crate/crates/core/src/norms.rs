//! Lorentz quasi-norms, fundamental functions and Lorentz endpoint norms.
//!
//! All evaluations are closed-form sums over the pieces of `f*` (or of the
//! distribution function), so there is no quadrature error. The two Lorentz
//! forms are computed independently and serve as each other's oracle.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::StepFunction;

/// Parses a positive number, accepting `inf`/`∞` for +∞.
pub fn parse_extended(s: &str) -> Result<f64> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" | "∞" => Ok(f64::INFINITY),
        _ => t.parse::<f64>().map_err(|_| Error::param(format!("not a number: {s:?}"))),
    }
}

pub fn format_extended(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}

/// An extended real in JSON: a number, or the string `"inf"` for +∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extended(pub f64);

impl Serialize for Extended {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::report::extended(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Extended(x)),
            Raw::Text(t) => parse_extended(&t).map(Extended).map_err(serde::de::Error::custom),
        }
    }
}

/// Lorentz parameters `(p, q)` with `p, q ∈ (0, ∞]`; `p = ∞` forces `q = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(Extended, Extended)", into = "(Extended, Extended)")]
pub struct LorentzIndex {
    p: f64,
    q: f64,
}

impl TryFrom<(Extended, Extended)> for LorentzIndex {
    type Error = Error;

    fn try_from((p, q): (Extended, Extended)) -> Result<Self> {
        LorentzIndex::new(p.0, q.0)
    }
}

impl From<LorentzIndex> for (Extended, Extended) {
    fn from(idx: LorentzIndex) -> Self {
        (Extended(idx.p), Extended(idx.q))
    }
}

impl LorentzIndex {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0) || !(q > 0.0) {
            return Err(Error::param(format!("Lorentz index needs p, q > 0, got ({p}, {q})")));
        }
        if p == f64::INFINITY && q != f64::INFINITY {
            return Err(Error::param("Lorentz index with p = inf requires q = inf"));
        }
        Ok(LorentzIndex { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The constant `c` in `φ(t) = c·t^{1/p}`: `(p/q)^{1/q}`, or 1 for `q = ∞`.
    pub fn fundamental_constant(&self) -> f64 {
        if self.q.is_infinite() {
            1.0
        } else {
            (self.p / self.q).powf(1.0 / self.q)
        }
    }
}

impl fmt::Display for LorentzIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", format_extended(self.p), format_extended(self.q))
    }
}

impl FromStr for LorentzIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::param(format!("expected \"p,q\", got {s:?}")));
        }
        LorentzIndex::new(parse_extended(parts[0])?, parse_extended(parts[1])?)
    }
}

/// `x^{1/p}` with the conventions `x^{1/∞} = 1` for `x > 0` and `0^{1/∞} = 0`.
pub(crate) fn root(x: f64, p: f64) -> f64 {
    if p.is_infinite() {
        if x > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        x.powf(1.0 / p)
    }
}

/// `a^r − b^r` for `a ≥ b ≥ 0`, without cancellation when `a ≈ b`.
pub(crate) fn pow_diff(a: f64, b: f64, r: f64) -> f64 {
    if b <= 0.0 {
        a.powf(r)
    } else {
        b.powf(r) * (r * (a / b).ln()).exp_m1()
    }
}

/// `(p ∫₀^∞ [s f_*(s)^{1/p}]^q ds/s)^{1/q}`, or the weak form for `q = ∞`.
pub fn lorentz_norm_dist(f: &StepFunction, idx: LorentzIndex) -> f64 {
    let df = f.distribution_function();
    let (v, m) = (&df.thresholds, &df.measures);
    let (p, q) = (idx.p, idx.q);
    if v.is_empty() {
        return 0.0;
    }
    if q.is_infinite() {
        // sup over [v_{k+1}, v_k) of s·m_k^{1/p} is the right-end limit
        return v.iter().zip(m).map(|(&vk, &mk)| vk * root(mk, p)).fold(0.0, f64::max);
    }
    let mut sum = 0.0;
    for k in 0..v.len() {
        let lower = v.get(k + 1).copied().unwrap_or(0.0);
        sum += m[k].powf(q / p) * pow_diff(v[k], lower, q);
    }
    (p / q * sum).powf(1.0 / q)
}

/// `‖t^{1/p − 1/q} f*(t)‖_{L^q(0,∞)}`.
pub fn lorentz_norm_rearr(f: &StepFunction, idx: LorentzIndex) -> f64 {
    let fs = f.rearrange();
    let (p, q) = (idx.p, idx.q);
    if q.is_infinite() {
        let mut c = 0.0;
        let mut best: f64 = 0.0;
        for piece in fs.pieces() {
            c += piece.len;
            best = best.max(piece.value * root(c, p));
        }
        return best;
    }
    let mut sum = 0.0;
    let mut c = 0.0;
    for piece in fs.pieces() {
        let next = c + piece.len;
        sum += piece.value.powf(q) * pow_diff(next, c, q / p);
        c = next;
    }
    (p / q * sum).powf(1.0 / q)
}

/// `φ_{L^{p,q}}(t) = ‖χ_E‖_{p,q}` for `μ(E) = t`.
pub fn fundamental_function(idx: LorentzIndex, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param(format!("measure must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(lorentz_norm_rearr(&StepFunction::indicator(t, 1.0)?, idx))
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawPhi {
    Power { exponent: f64 },
    Tabulated { breakpoints: Vec<f64>, values: Vec<f64> },
}

/// Concave nondecreasing `φ` with `φ(0) = 0` generating a Lorentz endpoint space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawPhi")]
pub enum PhiFunction {
    /// `t^exponent`, `exponent ∈ (0, 1]`.
    Power { exponent: f64 },
    /// Piecewise-linear interpolation through `(breakpoints, values)`, which
    /// start at `(0, 0)`; the last segment is extended with its slope.
    Tabulated { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<RawPhi> for PhiFunction {
    type Error = Error;

    fn try_from(raw: RawPhi) -> Result<Self> {
        match raw {
            RawPhi::Power { exponent } => PhiFunction::power(exponent),
            RawPhi::Tabulated { breakpoints, values } => PhiFunction::tabulated(breakpoints, values),
        }
    }
}

const CONCAVITY_SLACK: f64 = 1e-12;

impl PhiFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::param(format!("t^e is concave and nontrivial only for e in (0, 1], got {exponent}")));
        }
        Ok(PhiFunction::Power { exponent })
    }

    /// Validates concavity and monotonicity; prepends `(0, 0)` when missing.
    pub fn tabulated(mut breakpoints: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() || breakpoints.is_empty() {
            return Err(Error::param("tabulated phi needs equally many breakpoints and values"));
        }
        if breakpoints.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::param("tabulated phi must be finite"));
        }
        if breakpoints[0] > 0.0 {
            breakpoints.insert(0, 0.0);
            values.insert(0, 0.0);
        }
        if breakpoints[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::param("tabulated phi must start at (0, 0)"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("phi breakpoints must be strictly increasing"));
        }
        let slopes: Vec<f64> =
            breakpoints.windows(2).zip(values.windows(2)).map(|(b, v)| (v[1] - v[0]) / (b[1] - b[0])).collect();
        if slopes.iter().any(|&s| s < 0.0) {
            return Err(Error::param("phi must be nondecreasing"));
        }
        if slopes.windows(2).any(|w| w[1] > w[0] * (1.0 + CONCAVITY_SLACK) + CONCAVITY_SLACK) {
            return Err(Error::param("phi must be concave"));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::param("phi must be nontrivial"));
        }
        Ok(PhiFunction::Tabulated { breakpoints, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PhiFunction::Power { exponent } => t.powf(*exponent),
            PhiFunction::Tabulated { breakpoints, values } => {
                let n = breakpoints.len();
                if n == 1 {
                    return values[0];
                }
                let k = breakpoints.partition_point(|&b| b <= t).clamp(1, n - 1);
                let (b0, b1) = (breakpoints[k - 1], breakpoints[k]);
                let (v0, v1) = (values[k - 1], values[k]);
                v0 + (v1 - v0) * (t - b0) / (b1 - b0)
            }
        }
    }
}

/// `∫ f* dφ = Σ α_k φ(μ(E_k))` over the layer-cake decomposition of `f`.
pub fn lambda_phi_norm(f: &StepFunction, phi: &PhiFunction) -> f64 {
    let lc = f.layer_cake();
    lc.alphas.iter().zip(&lc.cum).map(|(&a, &c)| a * phi.eval(c)).sum()
}

/// `‖f‖_{p,r} / ‖f‖_{p,q}` for `q ≤ r`; `0/0` is reported as 0.
pub fn embedding_ratio(f: &StepFunction, p: f64, q: f64, r: f64) -> Result<f64> {
    if q > r {
        return Err(Error::param(format!("embedding needs q <= r, got q = {q}, r = {r}")));
    }
    let num = lorentz_norm_rearr(f, LorentzIndex::new(p, r)?);
    let den = lorentz_norm_rearr(f, LorentzIndex::new(p, q)?);
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step() -> StepFunction {
        StepFunction::from_pairs(&[(1.0, 2.0), (3.0, 1.0)]).unwrap()
    }

    fn idx(p: f64, q: f64) -> LorentzIndex {
        LorentzIndex::new(p, q).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn index_validation() {
        assert!(LorentzIndex::new(f64::INFINITY, 1.0).is_err());
        assert!(LorentzIndex::new(0.0, 1.0).is_err());
        assert!(LorentzIndex::new(1.0, -1.0).is_err());
        assert!(LorentzIndex::new(f64::NAN, 1.0).is_err());
        assert!(LorentzIndex::new(f64::INFINITY, f64::INFINITY).is_ok());
        assert_eq!("2,inf".parse::<LorentzIndex>().unwrap(), idx(2.0, f64::INFINITY));
        assert!("2".parse::<LorentzIndex>().is_err());
    }

    #[test]
    fn lebesgue_case_both_forms() {
        let f = two_step();
        let expect = 7f64.sqrt();
        assert!(close(lorentz_norm_dist(&f, idx(2.0, 2.0)), expect, 1e-14));
        assert!(close(lorentz_norm_rearr(&f, idx(2.0, 2.0)), expect, 1e-14));
    }

    #[test]
    fn weak_norm_of_indicator() {
        let chi = StepFunction::indicator(4.0, 1.0).unwrap();
        assert_eq!(lorentz_norm_dist(&chi, idx(2.0, f64::INFINITY)), 2.0);
        assert_eq!(lorentz_norm_rearr(&chi, idx(2.0, f64::INFINITY)), 2.0);
    }

    #[test]
    fn quasi_norm_below_one() {
        // oracle: midpoint rule on t^{q/p-1} f*(t)^q after t = u^2 substitution
        let f = two_step();
        let oracle = {
            let n = 2_000_000;
            let mut s = 0.0;
            for i in 0..n {
                let u = 2.0 * (i as f64 + 0.5) / n as f64;
                let t = u * u;
                let fv = if t < 1.0 {
                    2.0
                } else if t < 4.0 {
                    1.0
                } else {
                    0.0
                };
                // t^{-1/2} f^{1/2} dt = 2 f^{1/2} du
                s += 2.0 * f64::sqrt(fv) * (2.0 / n as f64);
            }
            s.powi(2)
        };
        let expect = (2.0 + 2.0 * 2f64.sqrt()).powi(2);
        assert!(close(oracle, expect, 1e-6), "oracle {oracle}");
        assert!(close(lorentz_norm_dist(&f, idx(1.0, 0.5)), expect, 1e-13));
        assert!(close(lorentz_norm_rearr(&f, idx(1.0, 0.5)), expect, 1e-13));
    }

    #[test]
    fn unit_indicator_l1() {
        let chi = StepFunction::indicator(1.0, 1.0).unwrap();
        assert_eq!(lorentz_norm_rearr(&chi, idx(1.0, 1.0)), 1.0);
        assert_eq!(lorentz_norm_dist(&chi, idx(1.0, 1.0)), 1.0);
    }

    #[test]
    fn l_infinity() {
        let f = two_step();
        let inf = idx(f64::INFINITY, f64::INFINITY);
        assert_eq!(lorentz_norm_dist(&f, inf), 2.0);
        assert_eq!(lorentz_norm_rearr(&f, inf), 2.0);
    }

    #[test]
    fn fundamental_function_examples() {
        for p in [0.5, 1.0, 2.0, 3.0] {
            for t in [0.1, 1.0, 7.5] {
                let v = fundamental_function(idx(p, p), t).unwrap();
                assert!(close(v, t.powf(1.0 / p), 1e-14));
            }
        }
        assert_eq!(fundamental_function(idx(2.0, f64::INFINITY), 4.0).unwrap(), 2.0);
        // ∫₀¹ t^{-1/2} dt = 2, squared
        assert!(close(fundamental_function(idx(1.0, 0.5), 1.0).unwrap(), 4.0, 1e-14));
        assert_eq!(fundamental_function(idx(1.0, 0.5), 0.0).unwrap(), 0.0);
        assert!(fundamental_function(idx(1.0, 0.5), -1.0).is_err());
        assert_eq!(idx(1.0, 0.5).fundamental_constant(), 4.0);
    }

    #[test]
    fn lambda_phi_examples() {
        let f = StepFunction::from_pairs(&[(2.0, 3.0), (3.0, 1.0)]).unwrap();
        assert_eq!(lambda_phi_norm(&f, &PhiFunction::power(1.0).unwrap()), 9.0);

        // oracle: Stieltjes sum ∫ f* d(t^{1/2}) = Σ v_k (√c_k − √c_{k−1})
        let stieltjes = 3.0 * 2f64.sqrt() + 1.0 * (5f64.sqrt() - 2f64.sqrt());
        let v = lambda_phi_norm(&f, &PhiFunction::power(0.5).unwrap());
        assert!(close(v, stieltjes, 1e-14));
        assert!(close(v, 2.0 * 2f64.sqrt() + 5f64.sqrt(), 1e-14));

        let phi = PhiFunction::tabulated(vec![1.0, 3.0], vec![2.0, 3.0]).unwrap();
        let chi = StepFunction::indicator(2.0, 1.0).unwrap();
        assert_eq!(lambda_phi_norm(&chi, &phi), phi.eval(2.0));
        assert_eq!(phi.eval(2.0), 2.5);
        assert_eq!(phi.eval(5.0), 4.0);
    }

    #[test]
    fn phi_validation() {
        assert!(PhiFunction::power(1.5).is_err());
        assert!(PhiFunction::power(0.0).is_err());
        assert!(PhiFunction::tabulated(vec![1.0, 2.0], vec![1.0, 3.0]).is_err());
        assert!(PhiFunction::tabulated(vec![1.0, 2.0], vec![1.0, 0.5]).is_err());
        assert!(PhiFunction::tabulated(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(PhiFunction::tabulated(vec![0.0], vec![0.0]).is_err());
        let json = r#"{"kind":"tabulated","breakpoints":[1,2],"values":[1,3]}"#;
        assert!(serde_json::from_str::<PhiFunction>(json).is_err());
        let json = r#"{"kind":"power","exponent":0.5}"#;
        assert_eq!(serde_json::from_str::<PhiFunction>(json).unwrap(), PhiFunction::Power { exponent: 0.5 });
    }

    #[test]
    fn embedding_ratio_examples() {
        let f = two_step();
        assert!(close(embedding_ratio(&f, 2.0, 1.5, 1.5).unwrap(), 1.0, 1e-15));
        assert!(embedding_ratio(&f, 2.0, 2.0, 1.0).is_err());
        assert_eq!(embedding_ratio(&StepFunction::zero(), 2.0, 1.0, 2.0).unwrap(), 0.0);
        for (p, q, r) in [(2.0, 1.0, f64::INFINITY), (1.0, 0.5, 2.0), (3.0, 0.25, 4.0)] {
            let expect = idx(p, r).fundamental_constant() / idx(p, q).fundamental_constant();
            for m in [0.01, 1.0, 300.0] {
                let chi = StepFunction::indicator(m, 1.0).unwrap();
                assert!(close(embedding_ratio(&chi, p, q, r).unwrap(), expect, 1e-13));
            }
        }
    }

    #[test]
    fn pow_diff_is_accurate() {
        let h = 2f64.powi(-40);
        let d = pow_diff(1.0 + h, 1.0, 0.5);
        assert!(close(d, 0.5 * h, 1e-11));
        assert_eq!(pow_diff(4.0, 0.0, 0.5), 2.0);
    }

    #[test]
    fn extended_parsing() {
        assert_eq!(parse_extended("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_extended(" 2.5 ").unwrap(), 2.5);
        assert!(parse_extended("x").is_err());
        assert_eq!(format_extended(f64::INFINITY), "inf");
    }
}
