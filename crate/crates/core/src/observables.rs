//! Derived quantities: excited population, reduced internal state, degree
//! of mixing, visibilities and photon intensities.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{critical_wavenumber, omega_prime, LaserParams, PhysicalConstants};
use crate::num::{lit, Real};
use crate::packet::{EigenExpansion, TwoComponentField, WindowPopulations};
use crate::stationary::scattering_amplitudes;

/// Normalized internal density matrix of the atoms inside the laser,
/// `ρ_ij = ∫₀ conj(ψ⁽ⁱ⁾) ψ⁽ʲ⁾ dx / ∫₀ (|ψ⁽¹⁾|² + |ψ⁽²⁾|²) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InternalDensity<T> {
    pub rho: [[Complex<T>; 2]; 2],
}

impl<T: Real> InternalDensity<T> {
    /// From in-laser populations and the coherence `∫₀ conj(ψ1) ψ2`.
    pub fn from_moments(ground: T, excited: T, coherence: Complex<T>) -> Result<Self> {
        let total = ground + excited;
        let floor = lit::<T>(1e-8);
        if !(total >= floor) {
            return Err(Error::EmptyLaserRegion(total.to_f64().unwrap_or(f64::NAN)));
        }
        let c = coherence / total;
        Ok(InternalDensity {
            rho: [
                [Complex::new(ground / total, T::zero()), c],
                [c.conj(), Complex::new(excited / total, T::zero())],
            ],
        })
    }

    pub fn trace(&self) -> T {
        self.rho[0][0].re + self.rho[1][1].re
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> T {
        let r = &self.rho;
        r[0][0].norm_sqr() + r[1][1].norm_sqr() + lit::<T>(2.0) * r[0][1].norm_sqr()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [T; 2] {
        let half = lit::<T>(0.5);
        let a = self.rho[0][0].re;
        let d = self.rho[1][1].re;
        let m = (a + d) * half;
        let r = (((a - d) * half).powi(2) + self.rho[0][1].norm_sqr()).sqrt();
        [m - r, m + r]
    }
}

/// `∫|ψ⁽²⁾|²` over the whole grid.
pub fn excited_population(field: &TwoComponentField) -> f64 {
    field.component_norms().1
}

/// Reduced internal state of the part of `field` with `x ≥ 0`.
pub fn reduced_internal_state(field: &TwoComponentField) -> Result<InternalDensity<f64>> {
    let dx = field.dx();
    let (mut g, mut e) = (0.0, 0.0);
    let mut c = Complex::new(0.0, 0.0);
    for i in 0..field.len() {
        if field.x[i] >= 0.0 {
            let [a, b] = [field.psi1[i], field.psi2[i]];
            g += a.norm_sqr();
            e += b.norm_sqr();
            c += a.conj() * b;
        }
    }
    InternalDensity::from_moments(g * dx, e * dx, c * dx)
}

/// Reduced internal state from exact window populations.
pub fn reduced_internal_state_from(p: &WindowPopulations) -> Result<InternalDensity<f64>> {
    InternalDensity::from_moments(p.ground_right, p.excited_right, p.coherence_right)
}

/// Linear entropy `2(1 − Tr ρ²)`: 0 for a pure state, 1 for `I/2`.
pub fn degree_of_mixing<T: Real>(rho: &InternalDensity<T>) -> T {
    let v = lit::<T>(2.0) * (T::one() - rho.purity());
    v.max(T::zero()).min(T::one())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityResult {
    /// `(max − min)/(max + min)`
    pub value: f64,
    /// Refined `(position, value)` of the local maxima used.
    pub maxima: Vec<(f64, f64)>,
    pub minima: Vec<(f64, f64)>,
    /// Start of the analysed window.
    pub cutoff: f64,
    /// Mean spacing of consecutive maxima, if there are at least two.
    pub period: Option<f64>,
    /// Set when no interior extrema exist and the window's global range was used.
    pub from_global_range: bool,
}

/// Vertex of the parabola through three equally spaced samples.
fn parabolic_peak(t: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let h = t[1] - t[0];
    let denom = y[0] - 2.0 * y[1] + y[2];
    if denom == 0.0 {
        return (t[1], y[1]);
    }
    let off = 0.5 * (y[0] - y[2]) / denom;
    let off = off.clamp(-1.0, 1.0);
    (t[1] + off * h, y[1] - 0.25 * (y[0] - y[2]) * off)
}

/// Visibility of a sampled signal beyond `cutoff`, from its interior
/// extrema with three-point parabolic refinement. Samples must be
/// uniformly spaced.
pub fn visibility_of_series(t: &[f64], y: &[f64], cutoff: f64) -> VisibilityResult {
    let start = t.iter().position(|&ti| ti >= cutoff).unwrap_or(t.len());
    let (t, y) = (&t[start..], &y[start..y.len().min(t.len())]);
    let n = t.len().min(y.len());
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        let tt = [t[i - 1], t[i], t[i + 1]];
        if b > a && b >= c {
            maxima.push(parabolic_peak(tt, [a, b, c]));
        } else if b < a && b <= c {
            minima.push(parabolic_peak(tt, [a, b, c]));
        }
    }
    let period = if maxima.len() >= 2 {
        Some((maxima[maxima.len() - 1].0 - maxima[0].0) / (maxima.len() - 1) as f64)
    } else {
        None
    };
    let (hi, lo, global) = if !maxima.is_empty() && !minima.is_empty() {
        let hi = maxima.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let lo = minima.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        (hi, lo, false)
    } else {
        let hi = y[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = y[..n].iter().copied().fold(f64::INFINITY, f64::min);
        (hi, lo, true)
    };
    let value = if n == 0 || !(hi + lo > 0.0) {
        0.0
    } else {
        ((hi - lo) / (hi + lo)).clamp(0.0, 1.0)
    };
    VisibilityResult {
        value,
        maxima,
        minima,
        cutoff,
        period,
        from_global_range: global,
    }
}

/// Temporal visibility of `P2(t)` beyond `transient_cutoff`.
pub fn temporal_visibility(times: &[f64], p2: &[f64], transient_cutoff: f64) -> VisibilityResult {
    let r = visibility_of_series(times, p2, transient_cutoff);
    if r.from_global_range {
        log::debug!("no interior extrema after t = {transient_cutoff:e}; using the global range");
    }
    r
}

/// Transient cutoff `t₀ + 5Δx/⟨v⟩` with `t₀ = −⟨x⟩/⟨v⟩`.
pub fn transient_cutoff(spec: &crate::packet::GaussianSpec) -> f64 {
    spec.entrance_time() + 5.0 * spec.delta_x / spec.v0
}

/// Spatial visibility of `|φ⁽²⁾_k(x)|²` for the stationary state at `k`.
///
/// The window starts where the evanescent λ₋ channel has decayed by
/// `e^{−16}` in amplitude (and never before `5/k_c`) and spans four beat
/// periods `2π/|k₊ − k₋|`.
pub fn spatial_visibility(
    k: f64,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
) -> Result<VisibilityResult> {
    let s = scattering_amplitudes(k, params, consts, 0.0)?;
    let kc = critical_wavenumber(params, consts);
    let w = &s.wavenumbers;
    let mut start = 5.0 / kc;
    if w.k_minus.im > 0.0 {
        start = start.max(16.0 / w.k_minus.im);
    }
    let beat = std::f64::consts::TAU / (w.k_plus - w.k_minus).norm();
    let n = 801;
    let len = 4.0 * beat;
    let xs: Vec<f64> = (0..n).map(|i| start + len * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| s.eigenfunction(x)[1].norm_sqr()).collect();
    Ok(visibility_of_series(&xs, &ys, start))
}

/// `∫dt |ψ⁽²⁾(x,t)|²` on `x` by the trapezoid rule over `[0, t_max]` with
/// `n_steps` intervals; `I(x)` for γ = 0 and `I₀(x)` for γ > 0. The result
/// is compared against a run to `2 t_max` and an error is returned if the
/// relative change of `∫ I dx` exceeds `tol`.
pub fn intensity_profile(
    expansion: &EigenExpansion,
    x: &[f64],
    t_max: f64,
    n_steps: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let integrate = |t_end: f64, steps: usize| -> Vec<f64> {
        let h = t_end / steps as f64;
        let mut acc = vec![0.0; x.len()];
        for j in 0..=steps {
            let w = if j == 0 || j == steps { 0.5 * h } else { h };
            let c = expansion.coefficients(j as f64 * h);
            for (a, &xi) in acc.iter_mut().zip(x) {
                let mut s = Complex::new(0.0, 0.0);
                for (cj, sol) in c.iter().zip(&expansion.solutions) {
                    s += cj * sol.eigenfunction(xi)[1];
                }
                *a += w * s.norm_sqr();
            }
        }
        acc
    };
    let one = integrate(t_max, n_steps);
    let two = integrate(2.0 * t_max, 2 * n_steps);
    let (s1, s2): (f64, f64) = (one.iter().sum(), two.iter().sum());
    let change = (s2 - s1).abs() / s2.abs().max(f64::MIN_POSITIVE);
    if change > tol {
        return Err(Error::IntensityNotConverged(change));
    }
    Ok(two)
}

/// First-photon density beyond the transient for `k ≪ k_c` and strong
/// driving, `I₀(x) ≈ ⟨v⟩ e^{−γ (m/Ωħ)^{1/2} x/2} / v_c²`.
pub fn first_photon_decay_estimate<T: Real>(
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
    v: T,
    x: T,
) -> T {
    let kc = critical_wavenumber(params, consts);
    let vc = consts.velocity(kc);
    if params.omega_rabi < lit::<T>(3.0) * params.gamma || consts.wavenumber(v) > lit::<T>(0.5) * kc {
        log::warn!("first-photon estimate used outside strong driving with k << k_c");
    }
    let rate = params.gamma * (consts.mass / (params.omega_rabi * consts.hbar)).sqrt() * lit::<T>(0.5);
    v * (-rate * x).exp() / (vc * vc)
}

/// Low-k limiting internal state `(1, −(δ + Ω')/Ω)` and its normalized form.
pub fn semiclassical_pure_state<T: Real>(params: &LaserParams<T>) -> ([T; 2], [T; 2]) {
    let wp = omega_prime(params);
    let b = -(params.detuning + wp) / params.omega_rabi;
    let n = (T::one() + b * b).sqrt();
    ([T::one(), b], [T::one() / n, b / n])
}

/// Degree of mixing of the internal state in the laser region at time `t`,
/// from split-step propagation of `spec` (the no-jump state when `γ > 0`).
pub fn packet_mixing(
    spec: &crate::packet::GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    t: f64,
) -> Result<f64> {
    let f = crate::gridprop::packet_state_at(spec, params, consts, t)?;
    Ok(degree_of_mixing(&reduced_internal_state(&f)?))
}
