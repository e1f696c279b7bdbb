//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use riesz_endpoint::quad;
use riesz_endpoint::StepFunction;

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫_{B(0,ρ)} |x−y|^{γ−3} dy` in ℝ³ from the closed-form shell average
/// `2π[(s+x)^{γ−1} − |s−x|^{γ−1}]/((γ−1) s x)`, integrated in `s` by Simpson
/// after `s = x ∓ c u^k` substitutions with `kγ ≥ 2` that smooth the
/// `|s−x|^{γ−1}` singularity. Requires `γ ≠ 1`.
pub fn ball_potential_3d(gamma: f64, rho: f64, x: f64) -> f64 {
    let shell = |s: f64| -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return 4.0 * PI * s * s * s.powf(gamma - 3.0);
        }
        let d = (s - x).abs();
        2.0 * PI * s * ((s + x).powf(gamma - 1.0) - d.powf(gamma - 1.0)) / ((gamma - 1.0) * x)
    };
    let panels = 4000;
    if x == 0.0 {
        // s = u^{1/γ} turns 4π s^{γ−1} ds into the constant density 4π/γ
        return simpson(|_: f64| 4.0 * PI / gamma, 0.0, rho.powf(gamma), panels);
    }
    if x >= rho {
        return simpson(shell, 0.0, rho, panels);
    }
    let k = (2.0 / gamma).ceil().max(2.0);
    let sub = |c: f64, sign: f64| {
        move |u: f64| if u == 0.0 { 0.0 } else { shell(x + sign * c * u.powf(k)) * c * k * u.powf(k - 1.0) }
    };
    let left = simpson(sub(x, -1.0), 0.0, 1.0, panels);
    let right = simpson(sub(rho - x, 1.0), 0.0, 1.0, panels);
    left + right
}

/// `∫_{B(0,ρ)} |x−y|^{γ−2} dy` in ℝ² for ρ = 1, evaluated at 30 digits in
/// Cartesian form: the inner integral over `y₂` is `2h a^{γ−2} ₂F₁(1−γ/2, 1/2; 3/2; −h²/a²)`
/// with `a = |y₁ − x|`, `h = √(1 − y₁²)`, and the outer one is taken after
/// `y₁ = x ∓ c v¹⁰` to flatten the `a^{γ−1}` singularity.
pub const BALL_POTENTIAL_2D: [(f64, f64, f64); 6] = [
    (0.7, 0.3, 8.7875557648935151832),
    (0.7, 0.999, 5.2175676119560476655),
    (0.7, 1.5, 2.0769087267843154273),
    (1.5, 0.5, 3.9882662637596797147),
    (1.5, 2.0, 2.2400641051854379518),
    (0.2, 0.9, 27.270850993879643),
];

/// Principal value `(1/π) PV∫ Σ c_i χ_{[a_i,b_i]}(y) / (x − y) dy` by adaptive
/// quadrature; the symmetric window around `x` cancels and is dropped.
pub fn hilbert_pv(intervals: &[(f64, f64, f64)], x: f64) -> f64 {
    let mut total = 0.0;
    for &(a, b, c) in intervals {
        let f = |y: f64| 1.0 / (x - y);
        let v = if x <= a || x >= b {
            quad::integrate(f, a, b, 1e-13, 60).unwrap()
        } else {
            let d = (x - a).min(b - x);
            let lo = quad::integrate(f, a, x - d, 1e-13, 60).unwrap();
            let hi = quad::integrate(f, x + d, b, 1e-13, 60).unwrap();
            lo + hi
        };
        total += c * v;
    }
    total / PI
}

/// Midpoint rule for `∫₀^∞ t^{q/p−1} f*(t)^q dt` on each piece of `f*`.
pub fn lorentz_quadrature(f: &StepFunction, p: f64, q: f64) -> f64 {
    let fs = f.rearrange();
    let mut total = 0.0;
    for (a, b, v) in fs.cells() {
        // substitution t = s^k flattens the t^{q/p−1} endpoint behaviour
        let k = 4.0;
        let (sa, sb) = (a.powf(1.0 / k), b.powf(1.0 / k));
        let n = 20_000;
        let h = (sb - sa) / n as f64;
        for i in 0..n {
            let s = sa + (i as f64 + 0.5) * h;
            let t = s.powf(k);
            total += t.powf(q / p - 1.0) * v.powf(q) * k * s.powf(k - 1.0) * h;
        }
    }
    total.powf(1.0 / q)
}

/// `∫₀^{T−ε} s^{1/q−1}(s+ε)^{−1/q} ds`, the (q, 1) norm of `t^{−1/q}χ_{(ε,T)}`.
pub fn truncation_norm_q1(q: f64, eps: f64, t_cut: f64) -> f64 {
    // s = u^q removes the endpoint singularity
    let upper = (t_cut - eps).powf(1.0 / q);
    simpson(|u: f64| q * (u.powf(q) + eps).powf(-1.0 / q), 0.0, upper, 200_000)
}

/// Maximum of `LHS/RHS` over all two-piece nonincreasing step functions,
/// `(h+1)χ_{[0,s)} + χ_{[s,1)}` (scale and dilation invariance fix the rest),
/// by a coarse grid followed by local refinement.
pub fn two_piece_embedding_sup(ratio: impl Fn(&StepFunction) -> f64) -> f64 {
    let eval = |ls: f64, lh: f64| {
        let s = 1.0 / (1.0 + (-ls).exp());
        let h = lh.exp();
        let f = StepFunction::from_pairs(&[(s, 1.0 + h), (1.0 - s, 1.0)]).unwrap();
        ratio(&f)
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in -40..=40 {
        for k in -40..=40 {
            let (ls, lh) = (i as f64 * 0.5, k as f64 * 0.5);
            let v = eval(ls, lh);
            if v > best.0 {
                best = (v, ls, lh);
            }
        }
    }
    let mut step = 0.25;
    while step > 1e-9 {
        let (v0, ls, lh) = best;
        let mut moved = false;
        for (ds, dh) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = eval(ls + ds, lh + dh);
            if v > v0 {
                best = (v, ls + ds, lh + dh);
                moved = true;
                break;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    // single-level functions are the h → 0 limit
    best.0.max(ratio(&StepFunction::indicator(1.0, 1.0).unwrap()))
}
