//! Resonance detection for the mode-density integrands.
//!
//! Guided and cavity modes show up as zeros (or deep minima) of the
//! multiple-reflection denominator `D_q(k∥)`. At the absorption levels the
//! device studies use (`γ/ω₀` down to 1e-12 after regularization) the
//! associated peaks of the integrands are far too narrow for any fixed grid,
//! but `|D|²` itself stays smooth: each zero sits at the bottom of a wide
//! parabolic basin that a coarse scan can see. The strategy is therefore:
//! scan `|D_q|²` coarsely, refine each local minimum by golden-section
//! search, estimate the local half-width, and hand the integrator a ladder
//! of panel boundaries spanning the window around each peak.

const GOLDEN_RATIO_CONJ: f64 = 0.618_033_988_749_894_9;

/// Ladder multipliers covering the refined window around each minimum.
/// The outermost rung defines the window (~100 half-widths).
const LADDER: [f64; 6] = [0.3, 1.0, 3.0, 10.0, 30.0, 100.0];

/// Maximum number of windows seeded per scan; deepest minima win.
const MAX_WINDOWS: usize = 64;

/// Scans `sample` (returning one metric value per channel) on a uniform
/// grid over `[lo, hi]`, refines every local minimum of every channel and
/// returns sorted, deduplicated breakpoints inside `(lo, hi)` bracketing
/// each minimum at several scales.
#[allow(clippy::needless_range_loop)]
pub(crate) fn seed_breakpoints<const C: usize>(
    sample: &mut dyn FnMut(f64) -> [f64; C],
    lo: f64,
    hi: f64,
    samples: usize,
) -> Vec<f64> {
    debug_assert!(samples >= 8);
    if !(hi > lo) {
        return Vec::new();
    }
    let step = (hi - lo) / samples as f64;
    let grid: Vec<[f64; C]> = (0..=samples)
        .map(|i| sample(lo + step * i as f64))
        .collect();

    // (metric value at minimum, refined position, half-width)
    let mut minima: Vec<(f64, f64, f64)> = Vec::new();
    for c in 0..C {
        for i in 1..samples {
            let (prev, here, next) = (grid[i - 1][c], grid[i][c], grid[i + 1][c]);
            if here < prev && here <= next {
                let a = lo + step * (i - 1) as f64;
                let b = lo + step * (i + 1) as f64;
                let mut g = |x: f64| sample(x)[c];
                let (x0, f0) = golden_min(&mut g, a, b);
                let hw = half_width(&mut g, x0, f0, step);
                minima.push((f0, x0, hw));
            }
        }
    }

    // Deepest minima win the window budget.
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.truncate(MAX_WINDOWS);

    let mut points = Vec::new();
    for &(_, x0, hw) in &minima {
        // Resolvability floor: with vanishing absorption the physical
        // half-widths drop below the f64 spacing around x0; ladder rungs
        // inside that zone would ask the integrator to resolve sub-ulp
        // structure, which only burns panels on evaluation noise.
        let hw = hw.max(1e-13 * x0.abs().max(0.1));
        points.push(x0);
        for m in LADDER {
            points.push(x0 - hw * m);
            points.push(x0 + hw * m);
        }
    }
    points.retain(|x| *x > lo && *x < hi && x.is_finite());
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Golden-section minimization over `[a, b]`; returns `(x_min, f_min)`.
fn golden_min(g: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - GOLDEN_RATIO_CONJ * (hi - lo);
    let mut x2 = lo + GOLDEN_RATIO_CONJ * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    let scale = hi.abs().max(lo.abs()).max(1e-300);
    for _ in 0..200 {
        if hi - lo <= scale * 1e-15 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN_RATIO_CONJ * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN_RATIO_CONJ * (hi - lo);
            f2 = g(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Distance from `x0` at which the metric doubles relative to its minimum;
/// a factor-few estimate is all the panel ladder needs.
fn half_width(g: &mut dyn FnMut(f64) -> f64, x0: f64, f0: f64, coarse_step: f64) -> f64 {
    let floor = f0.max(1e-300) * 2.0;
    let mut d = coarse_step;
    if g(x0 + d).max(g(x0 - d)) <= floor {
        return d; // broad minimum: the coarse step already resolves it
    }
    let tiny = coarse_step * 1e-16;
    while d > tiny {
        let next = d * 0.25;
        if g(x0 + next).max(g(x0 - next)) <= floor {
            return d; // within a factor 4
        }
        d = next;
    }
    d
}
