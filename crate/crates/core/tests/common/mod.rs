#![allow(dead_code)] // each test target compiles its own copy
#![allow(clippy::needless_range_loop)]

//! Shared helpers for the integration suites: the dense trapezoid oracle
//! for the decay-rate integral, and the canonical device builders.
//!
//! The oracle integrates the same public integrand as the production path
//! but through a completely different quadrature route: a fixed dense grid
//! (plus locally refined windows around denominator minima it detects on
//! its own), summed by the non-uniform trapezoid rule. Nothing from the
//! adaptive engine is reused.

use braggem::{
    coefficients, rate_integrand, DispersionModel, EmitterConfig, LayerStack, Polarization,
};

pub fn eps_high(omega_p: f64, gamma: f64) -> DispersionModel {
    DispersionModel::drude_lorentz(omega_p, 20.0, gamma)
}

pub fn canonical_device(defect: bool, periods_down: usize, gamma: f64) -> LayerStack {
    braggem::build_bragg(
        5,
        periods_down,
        defect,
        DispersionModel::vacuum(),
        eps_high(34.598, gamma),
        DispersionModel::vacuum(),
    )
    .unwrap()
}

/// `|D_q(k∥)|²` for both polarizations via the public coefficients.
fn denominator_metric(stack: &LayerStack, omega: f64, k_par: f64) -> [f64; 2] {
    let ds = coefficients(stack, omega, k_par, Polarization::S)
        .unwrap()
        .d;
    let dp = coefficients(stack, omega, k_par, Polarization::P)
        .unwrap()
        .d;
    [ds.norm_sqr(), dp.norm_sqr()]
}

/// Non-uniform trapezoid over sorted nodes with precomputed values.
fn trapezoid(nodes: &[f64], values: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 1..nodes.len() {
        sum += 0.5 * (values[i] + values[i - 1]) * (nodes[i] - nodes[i - 1]);
    }
    sum
}

/// Total decay rate by the dense trapezoid oracle.
///
/// * `n_base` uniform points over the propagating range (1e6 and up for
///   acceptance-grade runs);
/// * an end-cap near `k∥ = k_j` integrated in the normal-component
///   variable, where the integrand is bounded;
/// * the evanescent range on a uniform grid in the `cosh` parameter with
///   sinh-spaced refinement windows around every denominator minimum the
///   oracle finds by itself.
pub fn trapezoid_rate_oracle(stack: &LayerStack, emitter: &EmitterConfig, n_base: usize) -> f64 {
    let omega = emitter.omega_a;
    let k_j = omega; // emitter layer is vacuum in every oracle device
    let f = |k: f64| rate_integrand(stack, emitter, k).unwrap();

    // Propagating bulk: uniform in k up to the end-cap boundary.
    let cap_start = k_j * (1.0 - 1e-4);
    let bulk: f64 = {
        let n = n_base;
        let h = cap_start / n as f64;
        let mut sum = 0.5 * (f(0.0) + f(cap_start));
        for i in 1..n {
            sum += f(h * i as f64);
        }
        sum * h
    };

    // End cap in beta coordinates: k = sqrt(k_j^2 - beta^2),
    // dk = -(beta/k) dbeta, so the 1/beta singularity cancels in
    // f(k) * beta / k, which stays bounded.
    let cap: f64 = {
        let beta_max = (k_j * k_j - cap_start * cap_start).sqrt();
        let n = 20_000usize;
        let h = beta_max / n as f64;
        let g = |beta: f64| {
            if beta == 0.0 {
                return 0.0; // removable: f * beta stays bounded at the light line
            }
            let k = ((k_j - beta) * (k_j + beta))
                .sqrt()
                .min(k_j * (1.0 - 1e-15));
            f(k) * beta / k
        };
        let mut sum = 0.5 * (g(0.0) + g(beta_max));
        for i in 1..n {
            sum += g(h * i as f64);
        }
        sum * h
    };

    // Evanescent tail in u with independent peak refinement.
    let tail: f64 = {
        let u_max = 6.0f64; // the canonical devices decay long before this
        let n = 200_000usize;
        let h = u_max / n as f64;

        // Metric scan on the same grid.
        let metric: Vec<[f64; 2]> = (0..=n)
            .map(|i| denominator_metric(stack, omega, k_j * (h * i as f64).cosh()))
            .collect();

        // Locate minima per channel, refine, and build sinh windows.
        let mut windows: Vec<(f64, f64)> = Vec::new(); // (u0, half-width)
        for c in 0..2 {
            for i in 1..n {
                if metric[i][c] < metric[i - 1][c] && metric[i][c] <= metric[i + 1][c] {
                    let m = |u: f64| denominator_metric(stack, omega, k_j * u.cosh())[c];
                    let (mut a, mut b) = (h * (i - 1) as f64, h * (i + 1) as f64);
                    for _ in 0..160 {
                        let m1 = a + 0.381_966 * (b - a);
                        let m2 = a + 0.618_034 * (b - a);
                        if m(m1) < m(m2) {
                            b = m2;
                        } else {
                            a = m1;
                        }
                    }
                    let u0 = 0.5 * (a + b);
                    let f0 = m(u0);
                    let mut hw = h;
                    while hw > 1e-18 && m(u0 + hw).max(m(u0 - hw)) > 2.0 * f0 {
                        hw *= 0.25;
                    }
                    windows.push((u0, hw));
                }
            }
        }

        // Node set: uniform grid plus sinh-spaced window nodes. The u = 0
        // endpoint maps to k = k_j exactly, a removable 0/0 of the raw
        // integrand, and cosh(u) only exceeds 1.0 in f64 beyond ~2e-8;
        // start where the parametrization resolves. The skipped strip
        // carries O(1e-7) of a bounded integrand, far below the oracle
        // tolerance.
        let mut nodes: Vec<f64> = (0..=n).map(|i| h * i as f64).collect();
        nodes[0] = 1e-7;
        for &(u0, hw) in &windows {
            let reach = (1e4 * hw).max(4.0 * h);
            let v_max = (reach / hw).asinh();
            let m = 4001usize;
            for i in 0..=m {
                let v = -v_max + 2.0 * v_max * i as f64 / m as f64;
                let u = u0 + hw * v.sinh();
                if u > 0.0 && u < u_max {
                    nodes.push(u);
                }
            }
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();

        let values: Vec<f64> = nodes
            .iter()
            .map(|&u| f(k_j * u.cosh()) * k_j * u.sinh())
            .collect();
        trapezoid(&nodes, &values)
    };

    bulk + cap + tail
}

/// Radiative part only (propagating range), same oracle construction.
pub fn trapezoid_radiative_oracle(
    stack: &LayerStack,
    emitter: &EmitterConfig,
    n_base: usize,
) -> f64 {
    let omega = emitter.omega_a;
    let k_j = omega;
    let f = |k: f64| rate_integrand(stack, emitter, k).unwrap();
    let cap_start = k_j * (1.0 - 1e-4);
    let bulk: f64 = {
        let h = cap_start / n_base as f64;
        let mut sum = 0.5 * (f(0.0) + f(cap_start));
        for i in 1..n_base {
            sum += f(h * i as f64);
        }
        sum * h
    };
    let cap: f64 = {
        let beta_max = (k_j * k_j - cap_start * cap_start).sqrt();
        let n = 20_000usize;
        let h = beta_max / n as f64;
        let g = |beta: f64| {
            if beta == 0.0 {
                return 0.0;
            }
            let k = ((k_j - beta) * (k_j + beta))
                .sqrt()
                .min(k_j * (1.0 - 1e-15));
            f(k) * beta / k
        };
        let mut sum = 0.5 * (g(0.0) + g(beta_max));
        for i in 1..n {
            sum += g(h * i as f64);
        }
        sum * h
    };
    bulk + cap
}
