//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Segment {
    lo: f64,
    hi: f64,
    val: f64,
    err: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` to relative accuracy `rel_tol`.
///
/// Globally adaptive: the segment with the largest error estimate is bisected
/// until the summed estimate meets the tolerance. No segment is bisected more
/// than `max_depth` times.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, max_depth: u32) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let segment = |lo: f64, hi: f64, depth: u32| -> Result<Segment> {
        let (val, err) = gk15(&f, lo, hi);
        if !val.is_finite() {
            return Err(Error::Numeric(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        // Below rounding level the estimate carries no information.
        let err = if err <= 64.0 * f64::EPSILON * val.abs() { 0.0 } else { err };
        Ok(Segment { lo, hi, val, err, depth })
    };
    let mut heap = std::collections::BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    let first = segment(a, b, 0)?;
    let (mut total, mut error) = (first.val, first.err);
    heap.push(first);
    loop {
        let tol = rel_tol * total.abs();
        if error <= tol || error <= 64.0 * f64::EPSILON * total.abs() {
            return Ok(total);
        }
        let Some(worst) = heap.pop() else {
            let stuck = frozen.iter().max().expect("an unconverged estimate leaves a frozen segment");
            return Err(Error::Numeric(format!(
                "quadrature did not converge within {max_depth} bisections: error {error:.3e} > {tol:.3e}, worst segment [{}, {}]",
                stuck.lo, stuck.hi
            )));
        };
        if worst.depth >= max_depth {
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = segment(worst.lo, mid, worst.depth + 1)?;
        let right = segment(mid, worst.hi, worst.depth + 1)?;
        total += left.val + right.val - worst.val;
        error += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
}
