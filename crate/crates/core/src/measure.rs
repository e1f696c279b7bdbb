//! Step functions on a half-line and the rearrangement machinery built on
//! them: distribution functions, nonincreasing rearrangements and layer-cake
//! decompositions.
//!
//! Sets enter only through their measures. A [`StepFunction`] is a finite run
//! of `(len, value)` pieces laid end to end from `origin`; it vanishes past the
//! last piece. Representations are kept canonical (equal neighbours merged,
//! trailing zeros dropped) so that structural equality is semantic equality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub len: f64,
    pub value: f64,
}

impl Piece {
    pub fn new(len: f64, value: f64) -> Self {
        Piece { len, value }
    }
}

#[derive(Deserialize)]
struct RawStep {
    pieces: Vec<Piece>,
    #[serde(default)]
    origin: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Nonnegative piecewise-constant function with finitely many pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct StepFunction {
    pieces: Vec<Piece>,
    #[serde(default, skip_serializing_if = "is_zero")]
    origin: f64,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.pieces)?.with_origin(raw.origin)
    }
}

impl Default for StepFunction {
    fn default() -> Self {
        StepFunction::zero()
    }
}

impl StepFunction {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        for (k, p) in pieces.iter().enumerate() {
            if !(p.len.is_finite() && p.len > 0.0) {
                return Err(Error::param(format!("piece {k}: length must be finite and positive, got {}", p.len)));
            }
            if !(p.value.is_finite() && p.value >= 0.0) {
                return Err(Error::param(format!("piece {k}: value must be finite and nonnegative, got {}", p.value)));
            }
        }
        let mut f = StepFunction { pieces, origin: 0.0 };
        f.canonicalize();
        Ok(f)
    }

    /// Builds from `(len, value)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(l, v)| Piece::new(l, v)).collect())
    }

    pub fn zero() -> Self {
        StepFunction { pieces: Vec::new(), origin: 0.0 }
    }

    /// `value · χ_[0, len)`.
    pub fn indicator(len: f64, value: f64) -> Result<Self> {
        Self::from_pairs(&[(len, value)])
    }

    pub fn with_origin(mut self, origin: f64) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::param("origin must be finite"));
        }
        self.origin = origin;
        Ok(self)
    }

    fn canonicalize(&mut self) {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces.drain(..) {
            match out.last_mut() {
                Some(last) if last.value == p.value => last.len += p.len,
                _ => out.push(p),
            }
        }
        while out.last().is_some_and(|p| p.value == 0.0) {
            out.pop();
        }
        self.pieces = out;
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Measure of the carrier `[origin, origin + total_length)`.
    pub fn total_length(&self) -> f64 {
        self.pieces.iter().map(|p| p.len).sum()
    }

    pub fn max_value(&self) -> f64 {
        self.pieces.iter().fold(0.0, |m, p| m.max(p.value))
    }

    /// Iterates `(start, end, value)` in absolute coordinates.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let mut start = self.origin;
        self.pieces.iter().map(move |p| {
            let a = start;
            start += p.len;
            (a, start, p.value)
        })
    }

    /// Right-continuous evaluation; zero outside the carrier.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.origin {
            return 0.0;
        }
        for (_, b, v) in self.cells() {
            if x < b {
                return v;
            }
        }
        0.0
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].value >= w[1].value)
    }

    /// `c · f` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::param(format!("scale factor must be finite and nonnegative, got {c}")));
        }
        let pieces = self.pieces.iter().map(|p| Piece::new(p.len, p.value * c)).collect();
        Self::new(pieces)?.with_origin(self.origin)
    }

    /// Measure of `{f > lambda}`.
    pub fn distribution(&self, lambda: f64) -> f64 {
        self.pieces.iter().filter(|p| p.value > lambda).map(|p| p.len).sum()
    }

    /// The nonincreasing rearrangement `f*` on `[0, ∞)`.
    pub fn rearrange(&self) -> StepFunction {
        let mut pieces: Vec<Piece> = self.pieces.iter().copied().filter(|p| p.value > 0.0).collect();
        // Ties broken by length so that merged lengths do not depend on input order.
        pieces.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.len.total_cmp(&b.len)));
        let mut f = StepFunction { pieces, origin: 0.0 };
        f.canonicalize();
        f
    }

    /// Nested-layer form `Σ α_k χ_[0, μ(E_k))` of `f*`.
    pub fn layer_cake(&self) -> LayerDecomposition {
        let fs = self.rearrange();
        let n = fs.pieces.len();
        let mut alphas = Vec::with_capacity(n);
        let mut cum = Vec::with_capacity(n);
        let mut acc = 0.0;
        for (k, p) in fs.pieces.iter().enumerate() {
            let next = fs.pieces.get(k + 1).map_or(0.0, |q| q.value);
            acc += p.len;
            alphas.push(p.value - next);
            cum.push(acc);
        }
        LayerDecomposition { alphas, cum }
    }

    pub fn distribution_function(&self) -> DistributionFunction {
        let fs = self.rearrange();
        let mut acc = 0.0;
        let mut thresholds = Vec::with_capacity(fs.pieces.len());
        let mut measures = Vec::with_capacity(fs.pieces.len());
        for p in &fs.pieces {
            acc += p.len;
            thresholds.push(p.value);
            measures.push(acc);
        }
        DistributionFunction { thresholds, measures }
    }

    /// `x ↦ f(x/λ)`: every length (and the origin) is multiplied by `lambda`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::param(format!("dilation factor must be positive, got {lambda}")));
        }
        let pieces = self.pieces.iter().map(|p| Piece::new(p.len * lambda, p.value)).collect();
        Self::new(pieces)?.with_origin(self.origin * lambda)
    }

    /// Sorted absolute breakpoints, including the origin and the end.
    fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![self.origin];
        out.extend(self.cells().map(|(_, b, _)| b));
        out
    }

    /// `self ≤ other` everywhere, compared on the common refinement.
    pub fn le_pointwise(&self, other: &StepFunction) -> bool {
        let mut pts = self.breakpoints();
        pts.extend(other.breakpoints());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.iter().all(|&x| self.eval(x) <= other.eval(x))
    }
}

#[derive(Deserialize)]
struct RawLayers {
    alphas: Vec<f64>,
    cum: Vec<f64>,
}

impl TryFrom<RawLayers> for LayerDecomposition {
    type Error = Error;

    fn try_from(raw: RawLayers) -> Result<Self> {
        LayerDecomposition::new(raw.alphas, raw.cum)
    }
}

/// `f* = Σ α_k χ_[0, cum_k)` with nested level sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayers")]
pub struct LayerDecomposition {
    pub alphas: Vec<f64>,
    pub cum: Vec<f64>,
}

impl LayerDecomposition {
    pub fn new(alphas: Vec<f64>, cum: Vec<f64>) -> Result<Self> {
        if alphas.len() != cum.len() {
            return Err(Error::param("alphas and cumulative measures differ in length"));
        }
        if alphas.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
            return Err(Error::param("layer coefficients must be positive"));
        }
        if cum.first().is_some_and(|&c| !(c > 0.0)) || cum.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("cumulative measures must be positive and strictly increasing"));
        }
        Ok(LayerDecomposition { alphas, cum })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Sums the layers back into a nonincreasing step function.
    pub fn reconstruct(&self) -> StepFunction {
        let n = self.alphas.len();
        let mut values = vec![0.0; n];
        let mut acc = 0.0;
        for k in (0..n).rev() {
            acc += self.alphas[k];
            values[k] = acc;
        }
        let mut prev = 0.0;
        let pieces = values
            .into_iter()
            .zip(&self.cum)
            .map(|(v, &c)| {
                let p = Piece::new(c - prev, v);
                prev = c;
                p
            })
            .collect();
        StepFunction::new(pieces).expect("layer decomposition invariants give a valid step function")
    }
}

/// Right-continuous step form of `λ ↦ μ{f > λ}`.
///
/// `measures[k]` is the value on `[thresholds[k+1], thresholds[k])`, with an
/// implicit final threshold of 0; the function vanishes from `thresholds[0]` on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionFunction {
    pub thresholds: Vec<f64>,
    pub measures: Vec<f64>,
}

impl DistributionFunction {
    pub fn eval(&self, lambda: f64) -> f64 {
        // thresholds decrease: find the last k with lambda < thresholds[k]
        let k = self.thresholds.partition_point(|&v| lambda < v);
        if k == 0 {
            0.0
        } else {
            self.measures[k - 1]
        }
    }
}
