//! Planar multilayer geometry and transfer-matrix coefficients.
//!
//! A [`LayerStack`] is an ordered list of layers `0..=n` along the z axis:
//! layer `0` is the lower half-space, layer `n` the upper half-space, and
//! the emitter sits inside interior layer `j`. Interior layers carry a
//! thickness in units of `λ₀ = 2πc/ω₀`.
//!
//! For a given `(ω, k∥, q)` the module computes, by numerically stable
//! layer-by-layer recursion, the stack reflection coefficients `r_±` seen
//! from inside layer `j`, the generalized transmissions into both
//! half-spaces, and the multiple-reflection denominator
//! `D = 1 − r₊ r₋ e^{2iβ_j d_j}`.
//!
//! Conventions, pinned by testable identities rather than by bookkeeping:
//!
//! * Normal component `β_m = √(k_m² − k∥²)` on the branch `Im β ≥ 0`
//!   (and `Re β ≥ 0` when `Im β = 0`), so evanescent waves decay and
//!   propagating waves are outgoing.
//! * Interface coefficients for incidence from layer `a` into layer `b`:
//!   s: `r = (β_a − β_b)/(β_a + β_b)`, `t = 2β_a/(β_a + β_b)`;
//!   p: `r = (ε_b β_a − ε_a β_b)/(ε_b β_a + ε_a β_b)`,
//!   `t = 2 k_a k_b β_a / [ω²(ε_b β_a + ε_a β_b)]`.
//!   At normal incidence both give `|r| = |n_a − n_b|/(n_a + n_b)`.
//! * The generalized transmissions describe incidence from the half-space
//!   toward the emitter layer. With the normalizations above, every
//!   lossless one-sided coefficient set satisfies
//!   `(β_j/β_out)|t|² + |r|² = 1` for propagating waves — the flux
//!   identity the emission formulas rely on.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{DispersionError, DispersionModel};

/// Radians of optical phase per unit length, with lengths in `λ₀` units.
pub(crate) const RAD_PER_LAMBDA0: f64 = std::f64::consts::TAU;

/// log-scale threshold on `|Im β|·d` beyond which per-layer propagation
/// factors underflow; flagged as a diagnostic, never silent.
const DEEP_EVANESCENT_LOG: f64 = 700.0;

/// Field polarization with respect to the plane of incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    /// Transverse electric (TE).
    S,
    /// Transverse magnetic (TM).
    P,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Polarization::S => write!(f, "s"),
            Polarization::P => write!(f, "p"),
        }
    }
}

/// Which Bragg material sits next to the emitter layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdjacentMaterial {
    High,
    Low,
}

/// One planar layer: a dispersion model plus, for interior layers, a
/// thickness in units of `λ₀`. Half-space layers carry no thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub dispersion: DispersionModel,
    pub thickness: Option<f64>,
}

impl Layer {
    pub fn half_space(dispersion: DispersionModel) -> Self {
        Layer {
            dispersion,
            thickness: None,
        }
    }

    pub fn slab(dispersion: DispersionModel, thickness: f64) -> Self {
        Layer {
            dispersion,
            thickness: Some(thickness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StackError {
    #[error("periods must be >= 1, got up={up}, down={down}")]
    InvalidPeriods { up: usize, down: usize },
    #[error("a stack needs at least three layers (two half-spaces and one interior), got {len}")]
    TooFewLayers { len: usize },
    #[error("emitter layer index {j} must name an interior layer of a stack with {len} layers")]
    InvalidEmitterIndex { j: usize, len: usize },
    #[error("layer {index}: interior layers need a positive thickness")]
    InvalidThickness { index: usize },
    #[error("layer {index}: half-space layers must not carry a thickness")]
    HalfSpaceWithThickness { index: usize },
    #[error("layer {index}: {source}")]
    Material {
        index: usize,
        source: DispersionError,
    },
    #[error("quarter-wave design needs Re sqrt(eps(omega_0)) > 0, got {value} for layer material")]
    NonRefractiveDesignIndex { value: f64 },
}

/// Ordered planar multilayer with a designated emitter layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    layers: Vec<Layer>,
    emitter_index: usize,
}

impl LayerStack {
    /// Validates and builds a stack from explicit layers. `emitter_index`
    /// must name an interior layer.
    pub fn new(layers: Vec<Layer>, emitter_index: usize) -> Result<Self, StackError> {
        if layers.len() < 3 {
            return Err(StackError::TooFewLayers { len: layers.len() });
        }
        let n = layers.len() - 1;
        if emitter_index == 0 || emitter_index >= n {
            return Err(StackError::InvalidEmitterIndex {
                j: emitter_index,
                len: layers.len(),
            });
        }
        for (index, layer) in layers.iter().enumerate() {
            layer
                .dispersion
                .validate()
                .map_err(|source| StackError::Material { index, source })?;
            let interior = index != 0 && index != n;
            match (interior, layer.thickness) {
                (true, Some(d)) if d > 0.0 && d.is_finite() => {}
                (true, _) => return Err(StackError::InvalidThickness { index }),
                (false, None) => {}
                (false, Some(_)) => {
                    return Err(StackError::HalfSpaceWithThickness { index });
                }
            }
        }
        Ok(LayerStack {
            layers,
            emitter_index,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Index of the upper half-space (`n`).
    pub fn top_index(&self) -> usize {
        self.layers.len() - 1
    }

    /// Index of the emitter layer (`j`).
    pub fn emitter_index(&self) -> usize {
        self.emitter_index
    }

    /// Thickness `d_j` of the emitter layer in `λ₀` units.
    pub fn emitter_thickness(&self) -> f64 {
        self.layers[self.emitter_index]
            .thickness
            .expect("emitter layer is interior by construction")
    }

    /// The stack with layer order reversed (top half-space becomes bottom).
    pub fn reversed(&self) -> LayerStack {
        let mut layers = self.layers.clone();
        layers.reverse();
        LayerStack {
            emitter_index: layers.len() - 1 - self.emitter_index,
            layers,
        }
    }
}

/// Builds the canonical band-gap geometry: `periods_up` and `periods_down`
/// quarter-wave (H, L) pairs above and below the emitter layer, the
/// high-index material adjacent to the emitter, and vacuum half-spaces.
///
/// Plate thicknesses are quarter-wave in optical length at the design
/// frequency, `d_k = λ₀ / (4 Re√ε_k(ω₀))`; the emitter layer is
/// half-wave-equivalent when `defect` is set and quarter-wave otherwise.
pub fn build_bragg(
    periods_up: usize,
    periods_down: usize,
    defect: bool,
    eps_low: DispersionModel,
    eps_high: DispersionModel,
    eps_emitter: DispersionModel,
) -> Result<LayerStack, StackError> {
    build_bragg_with(
        periods_up,
        periods_down,
        defect,
        AdjacentMaterial::High,
        eps_low,
        eps_high,
        eps_emitter,
    )
}

/// [`build_bragg`] with an explicit choice of the material adjacent to the
/// emitter layer.
pub fn build_bragg_with(
    periods_up: usize,
    periods_down: usize,
    defect: bool,
    adjacent: AdjacentMaterial,
    eps_low: DispersionModel,
    eps_high: DispersionModel,
    eps_emitter: DispersionModel,
) -> Result<LayerStack, StackError> {
    let d_low = quarter_wave_thickness(&eps_low)?;
    let d_high = quarter_wave_thickness(&eps_high)?;
    let d_emitter = {
        let quarter = quarter_wave_thickness(&eps_emitter)?;
        if defect {
            2.0 * quarter
        } else {
            quarter
        }
    };
    build_bragg_explicit(
        periods_up,
        periods_down,
        adjacent,
        (eps_low, d_low),
        (eps_high, d_high),
        (eps_emitter, d_emitter),
    )
}

/// The canonical geometry with explicit plate thicknesses (`λ₀` units).
/// Useful when the permittivities are tuned away from the values the
/// device was fabricated for: the geometry stays fixed while the
/// dispersion changes.
pub fn build_bragg_explicit(
    periods_up: usize,
    periods_down: usize,
    adjacent: AdjacentMaterial,
    low: (DispersionModel, f64),
    high: (DispersionModel, f64),
    emitter: (DispersionModel, f64),
) -> Result<LayerStack, StackError> {
    if periods_up < 1 || periods_down < 1 {
        return Err(StackError::InvalidPeriods {
            up: periods_up,
            down: periods_down,
        });
    }
    let (eps_emitter, d_emitter) = emitter;
    let (first, second) = match adjacent {
        AdjacentMaterial::High => (high, low),
        AdjacentMaterial::Low => (low, high),
    };

    let vacuum = DispersionModel::vacuum();
    let mut layers = Vec::with_capacity(2 * (periods_up + periods_down) + 3);
    layers.push(Layer::half_space(vacuum));
    // Lower mirror, built bottom-up so the pass closest to the emitter ends
    // with the adjacent material.
    for _ in 0..periods_down {
        layers.push(Layer::slab(second.0, second.1));
        layers.push(Layer::slab(first.0, first.1));
    }
    let emitter_index = layers.len();
    layers.push(Layer::slab(eps_emitter, d_emitter));
    // Upper mirror, adjacent material first.
    for _ in 0..periods_up {
        layers.push(Layer::slab(first.0, first.1));
        layers.push(Layer::slab(second.0, second.1));
    }
    layers.push(Layer::half_space(vacuum));

    LayerStack::new(layers, emitter_index)
}

/// Quarter-wave optical thickness at the design frequency,
/// `d = λ₀ / (4 Re√ε(ω₀))`, in `λ₀` units.
pub fn quarter_wave_thickness(model: &DispersionModel) -> Result<f64, StackError> {
    model
        .validate()
        .map_err(|source| StackError::Material { index: 0, source })?;
    let n = model
        .permittivity(1.0)
        .map_err(|source| StackError::Material { index: 0, source })?
        .sqrt()
        .re;
    if !(n > 0.0) {
        return Err(StackError::NonRefractiveDesignIndex { value: n });
    }
    Ok(0.25 / n)
}

/// Per-layer wave numbers at a given `(ω, k∥)`, in units of `ω₀/c`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveNumbers {
    /// `k_m = √ε_m(ω) · ω/c` per layer.
    pub k: Vec<Complex64>,
    /// Normal components `β_m = √(k_m² − k∥²)`, branch `Im β ≥ 0`.
    pub beta: Vec<Complex64>,
}

/// Stack reflection/transmission quantities for one polarization at a
/// given `(ω, k∥)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedCoefficients {
    pub q: Polarization,
    /// Total reflection of the upper stack, seen from inside layer `j`.
    pub r_plus: Complex64,
    /// Total reflection of the lower stack, seen from inside layer `j`.
    pub r_minus: Complex64,
    /// Generalized transmission between layer `j` and the upper half-space
    /// (phase referenced so identical-media stacks give exactly 1; the
    /// emission formulas consume the modulus only).
    pub t_up: Complex64,
    /// Generalized transmission between layer `j` and the lower half-space.
    pub t_down: Complex64,
    /// Multiple-reflection denominator `D = 1 − r₊ r₋ e^{2iβ_j d_j}`.
    pub d: Complex64,
    /// Set when a propagation factor ran past the underflow guard
    /// (`|Im β|·d > 700`); the clamped value is still returned.
    pub overflow_guard: bool,
}

/// Branch fix: `Im β ≥ 0`, and `Re β ≥ 0` when `Im β = 0`.
#[inline]
fn principal_up(z: Complex64) -> Complex64 {
    if z.im < 0.0 || (z.im == 0.0 && z.re < 0.0) {
        -z
    } else {
        z
    }
}

#[inline]
pub(crate) fn beta_from_ksq(k_sq: Complex64, k_par: f64) -> Complex64 {
    principal_up((k_sq - k_par * k_par).sqrt())
}

/// A stack frozen at one angular frequency: permittivities evaluated once,
/// thicknesses converted to phase-radian units. All per-`k∥` work happens
/// against this view.
#[derive(Debug, Clone)]
pub(crate) struct OmegaStack {
    pub omega: f64,
    pub eps: Vec<Complex64>,
    pub k: Vec<Complex64>,
    pub k_sq: Vec<Complex64>,
    /// `2π · thickness` per layer; zero for the half-spaces.
    pub d_rad: Vec<f64>,
    pub j: usize,
    /// Layer indices from `j` outward to each half-space, precomputed for
    /// the per-`k∥` hot path.
    path_up: Vec<usize>,
    path_down: Vec<usize>,
}

impl OmegaStack {
    /// Freezes `stack` at `omega`. When `min_gamma > 0`, resonant materials
    /// with a smaller linewidth are evaluated at `gamma = min_gamma`
    /// (contour regularization for exactly lossless media).
    pub fn new(stack: &LayerStack, omega: f64, min_gamma: f64) -> Result<Self, DispersionError> {
        if !(omega > 0.0) {
            return Err(DispersionError::NonPositiveFrequency { omega });
        }
        let count = stack.layers().len();
        let mut eps = Vec::with_capacity(count);
        let mut k = Vec::with_capacity(count);
        let mut k_sq = Vec::with_capacity(count);
        let mut d_rad = Vec::with_capacity(count);
        for layer in stack.layers() {
            let model = if min_gamma > 0.0 {
                layer.dispersion.with_min_gamma(min_gamma)
            } else {
                layer.dispersion
            };
            let e = model.permittivity_unchecked(omega);
            eps.push(e);
            let ksq = e * (omega * omega);
            k_sq.push(ksq);
            k.push(principal_up(ksq.sqrt()));
            d_rad.push(layer.thickness.unwrap_or(0.0) * RAD_PER_LAMBDA0);
        }
        let j = stack.emitter_index();
        Ok(OmegaStack {
            omega,
            path_up: (j..count).collect(),
            path_down: (0..=j).rev().collect(),
            eps,
            k,
            k_sq,
            d_rad,
            j,
        })
    }

    pub fn top(&self) -> usize {
        self.eps.len() - 1
    }

    /// Emitter-layer thickness in phase-radian units.
    pub fn d_j_rad(&self) -> f64 {
        self.d_rad[self.j]
    }

    fn betas(&self, k_par: f64) -> Vec<Complex64> {
        self.k_sq
            .iter()
            .map(|&ksq| beta_from_ksq(ksq, k_par))
            .collect()
    }

    /// Interface coefficients for incidence from layer `a` into layer `b`.
    fn interface(
        &self,
        q: Polarization,
        a: usize,
        b: usize,
        beta_a: Complex64,
        beta_b: Complex64,
    ) -> (Complex64, Complex64) {
        let (eps_a, eps_b) = (self.eps[a], self.eps[b]);
        if eps_a == eps_b {
            // Identical media: no interface. Short-circuiting also avoids
            // 0/0 at grazing k∥ where both β vanish together.
            return (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        }
        match q {
            Polarization::S => {
                let den = beta_a + beta_b;
                ((beta_a - beta_b) / den, 2.0 * beta_a / den)
            }
            Polarization::P => {
                let den = eps_b * beta_a + eps_a * beta_b;
                let r = (eps_b * beta_a - eps_a * beta_b) / den;
                let norm = self.k[a] * self.k[b] / (self.omega * self.omega);
                let t = 2.0 * norm * beta_a / den;
                (r, t)
            }
        }
    }

    /// Reflection of one side of the stack as seen from inside layer `j`,
    /// plus the generalized transmission for incidence from that side's
    /// half-space into layer `j`.
    ///
    /// `outward` lists layer indices starting at `j` and ending at the
    /// half-space; `betas` is indexed by layer.
    fn one_sided(
        &self,
        q: Polarization,
        outward: &[usize],
        betas: &[Complex64],
        want_t: bool,
    ) -> SideCoefficients {
        let last = outward.len() - 1; // number of interfaces
        debug_assert!(last >= 1);
        let mut guard = false;
        let mut phase_2i = |pos: usize| -> Complex64 {
            let layer = outward[pos];
            let b = betas[layer];
            let d = self.d_rad[layer];
            if b.im * d > DEEP_EVANESCENT_LOG {
                guard = true;
            }
            (Complex64::I * 2.0 * d * b).exp()
        };

        // Reflection seen from j: fold interfaces from the outermost inward.
        let mut r = {
            let (a, b) = (outward[last - 1], outward[last]);
            self.interface(q, a, b, betas[a], betas[b]).0
        };
        for pos in (0..last - 1).rev() {
            let (a, b) = (outward[pos], outward[pos + 1]);
            let r_ab = self.interface(q, a, b, betas[a], betas[b]).0;
            let ph = phase_2i(pos + 1);
            r = (r_ab + r * ph) / (1.0 + r_ab * r * ph);
        }

        let t = if want_t {
            // Transmission for incidence from the half-space into layer j.
            // Needs, per interior layer, the generalized reflection looking
            // back toward j (layer j acting as a half-space).
            //
            // Phase reference: each interior layer's one-way propagation
            // phase Re(β_m) d_m is stripped. The modulus — all the emission
            // formulas use — is untouched, interference phases inside the
            // denominators are kept, and a stack of identical media yields
            // exactly t = 1.
            if last == 1 {
                let (a, b) = (outward[1], outward[0]);
                self.interface(q, a, b, betas[a], betas[b]).1
            } else {
                let mut inner_refl = Vec::with_capacity(last);
                // inner_refl[m] = generalized reflection looking toward j
                // from interior position m (1-based along `outward`).
                inner_refl.push(Complex64::new(0.0, 0.0)); // unused slot 0
                let (a, b) = (outward[1], outward[0]);
                inner_refl.push(self.interface(q, a, b, betas[a], betas[b]).0);
                for m in 2..last {
                    let (a, b) = (outward[m], outward[m - 1]);
                    let r_ab = self.interface(q, a, b, betas[a], betas[b]).0;
                    let ph = phase_2i(m - 1);
                    let prev = inner_refl[m - 1];
                    inner_refl.push((r_ab + prev * ph) / (1.0 + r_ab * prev * ph));
                }

                let mut t = Complex64::new(1.0, 0.0);
                for m in (1..last).rev() {
                    let (a, b) = (outward[m + 1], outward[m]);
                    let (r_back, t_in) = self.interface(q, a, b, betas[a], betas[b]);
                    let layer = outward[m];
                    let beta_m = betas[layer];
                    let d_m = self.d_rad[layer];
                    if beta_m.im * d_m > DEEP_EVANESCENT_LOG {
                        guard = true;
                    }
                    let ph1_stripped = (Complex64::I * d_m * (beta_m - beta_m.re)).exp();
                    let ph2 = (Complex64::I * 2.0 * d_m * beta_m).exp();
                    t *= t_in * ph1_stripped / (1.0 + r_back * inner_refl[m] * ph2);
                }
                let (a, b) = (outward[1], outward[0]);
                t * self.interface(q, a, b, betas[a], betas[b]).1
            }
        } else {
            Complex64::new(0.0, 0.0)
        };

        SideCoefficients { r, t, guard }
    }

    /// Both one-sided coefficient sets and the denominator for one
    /// polarization.
    pub fn coefficients(&self, k_par: f64, q: Polarization, want_t: bool) -> PolarizedCoefficients {
        let betas = self.betas(k_par);
        let up = self.one_sided(q, &self.path_up, &betas, want_t);
        let down = self.one_sided(q, &self.path_down, &betas, want_t);
        let beta_j = betas[self.j];
        let d = 1.0 - up.r * down.r * (Complex64::I * 2.0 * self.d_j_rad() * beta_j).exp();
        PolarizedCoefficients {
            q,
            r_plus: up.r,
            r_minus: down.r,
            t_up: up.t,
            t_down: down.t,
            d,
            overflow_guard: up.guard || down.guard,
        }
    }

    /// Upper- and lower-side reflections only, for both polarizations at
    /// once — the decay-rate hot path.
    pub fn reflections_both(&self, k_par: f64) -> ReflectionPair {
        let betas = self.betas(k_par);
        let s_up = self.one_sided(Polarization::S, &self.path_up, &betas, false);
        let s_down = self.one_sided(Polarization::S, &self.path_down, &betas, false);
        let p_up = self.one_sided(Polarization::P, &self.path_up, &betas, false);
        let p_down = self.one_sided(Polarization::P, &self.path_down, &betas, false);
        ReflectionPair {
            s_plus: s_up.r,
            s_minus: s_down.r,
            p_plus: p_up.r,
            p_minus: p_down.r,
            guard: s_up.guard || s_down.guard || p_up.guard || p_down.guard,
        }
    }
}

pub(crate) struct SideCoefficients {
    pub r: Complex64,
    pub t: Complex64,
    pub guard: bool,
}

/// Stack reflections for both polarizations at one `(ω, k∥)`.
pub(crate) struct ReflectionPair {
    pub s_plus: Complex64,
    pub s_minus: Complex64,
    pub p_plus: Complex64,
    pub p_minus: Complex64,
    pub guard: bool,
}

/// Per-layer wave numbers `k_m`, `β_m` at `(ω, k∥)`. `k_par` is the
/// magnitude of the in-plane wave vector and must be non-negative.
pub fn wave_numbers(
    stack: &LayerStack,
    omega: f64,
    k_par: f64,
) -> Result<WaveNumbers, DispersionError> {
    debug_assert!(k_par >= 0.0, "k_par is a magnitude");
    let os = OmegaStack::new(stack, omega, 0.0)?;
    let beta = os.betas(k_par);
    Ok(WaveNumbers { k: os.k, beta })
}

/// Stack coefficients `r_±`, `t`, `D` for polarization `q` at `(ω, k∥)`.
/// `k_par` is the magnitude of the in-plane wave vector (non-negative).
pub fn coefficients(
    stack: &LayerStack,
    omega: f64,
    k_par: f64,
    q: Polarization,
) -> Result<PolarizedCoefficients, DispersionError> {
    debug_assert!(k_par >= 0.0, "k_par is a magnitude");
    let os = OmegaStack::new(stack, omega, 0.0)?;
    Ok(os.coefficients(k_par, q, true))
}
