//! Approximations: the semiclassical phase-space ensemble, high-energy
//! eigenfunctions, Raman–Nath dynamics and the random-kick validity
//! estimates of the one-dimensional model.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{omega_prime, LaserParams, PhysicalConstants};
use crate::num::{lit, Real};
use crate::packet::GaussianSpec;
use crate::quadrature::{panel_edges, CompositeRule};

type C64 = Complex<f64>;

/// Minimum-uncertainty Gaussian Wigner function of the initial packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceGaussian {
    pub q0: f64,
    pub p0: f64,
    pub sigma_q: f64,
    pub sigma_p: f64,
}

impl PhaseSpaceGaussian {
    pub fn from_spec(spec: &GaussianSpec, consts: &PhysicalConstants<f64>) -> Self {
        PhaseSpaceGaussian {
            q0: spec.x0,
            p0: consts.mass * spec.v0,
            sigma_q: spec.delta_x,
            sigma_p: consts.hbar / (2.0 * spec.delta_x),
        }
    }

    /// `W(q, p)`, normalized to one over the plane.
    pub fn density(&self, q: f64, p: f64) -> f64 {
        let a = (q - self.q0) / self.sigma_q;
        let b = (p - self.p0) / self.sigma_p;
        (-0.5 * (a * a + b * b)).exp() / (std::f64::consts::TAU * self.sigma_q * self.sigma_p)
    }
}

/// Width of the integration box in standard deviations.
const BOX: f64 = 8.0;

fn semiclassical_at(
    w: &PhaseSpaceGaussian,
    wp: f64,
    amp: f64,
    mass: f64,
    t: f64,
    refinement: usize,
) -> f64 {
    let g = |z: f64| (-0.5 * z * z).exp() / (std::f64::consts::TAU).sqrt();
    let p_lo = (w.p0 - BOX * w.sigma_p).max(0.0);
    let p_hi = w.p0 + BOX * w.sigma_p;
    if p_hi <= 0.0 {
        return 0.0;
    }
    let q_hi = w.q0 + BOX * w.sigma_q;
    // the Θ cut q > -pt/m moves with p; it is the only non-smooth feature
    let cut_p = if q_hi < 0.0 { -q_hi * mass / t } else { p_lo };
    let outer = CompositeRule::from_edges(&panel_edges(p_lo, p_hi, 8 * refinement, &[cut_p], 4), 16);
    let mut total = 0.0;
    for (&p, &wpk) in outer.nodes.iter().zip(&outer.weights) {
        if p <= 0.0 {
            continue;
        }
        let v = p / mass;
        let q_lo = (w.q0 - BOX * w.sigma_q).max(-v * t);
        if q_lo >= q_hi {
            continue;
        }
        let cycles = (q_hi - q_lo) * wp / v / std::f64::consts::TAU;
        let panels = ((cycles / 1.2).ceil() as usize + 2) * refinement;
        let inner = CompositeRule::from_edges(&panel_edges(q_lo, q_hi, panels, &[], 0), 16);
        let s = inner.integrate(|q| {
            let s = (0.5 * wp * (t + q / v)).sin();
            g((q - w.q0) / w.sigma_q) / w.sigma_q * s * s
        });
        total += wpk * g((p - w.p0) / w.sigma_p) / w.sigma_p * s;
    }
    amp * total
}

/// Excited population of the classical-trajectory ensemble at time `t`,
///
/// `P₂(t) = ∫dq₀ ∫_{p₀>0} dp₀ W(q₀,p₀) (Ω/Ω')² sin²[Ω'(t + q₀m/p₀)/2] Θ(t + q₀m/p₀)`.
///
/// Nested Gauss–Legendre quadrature over an `8σ` box, doubling panel counts
/// until two successive estimates differ by less than `tol`.
pub fn semiclassical_p2(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    t: f64,
    tol: f64,
) -> Result<f64> {
    if params.gamma != 0.0 {
        return Err(Error::DampingNotSupported(params.gamma));
    }
    if !(t > 0.0) {
        return Err(crate::error::invalid("t", format!("must be positive, got {t}")));
    }
    let wp = omega_prime(params);
    if wp == 0.0 {
        return Ok(0.0);
    }
    let amp = (params.omega_rabi / wp).powi(2);
    let w = PhaseSpaceGaussian::from_spec(spec, consts);
    let mut prev = semiclassical_at(&w, wp, amp, consts.mass, t, 1);
    let mut change = f64::INFINITY;
    for r in [2, 4, 8] {
        let next = semiclassical_at(&w, wp, amp, consts.mass, t, r);
        change = (next - prev).abs();
        prev = next;
        if change <= tol {
            return Ok(next);
        }
    }
    Err(Error::QuadratureNotConverged { change, tolerance: tol })
}

/// [`semiclassical_p2`] on many times, in parallel.
pub fn semiclassical_p2_series(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    times: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    times
        .par_iter()
        .map(|&t| semiclassical_p2(spec, params, consts, t, tol))
        .collect()
}

/// High-energy approximant of the stationary state (with `1/√(2π)`):
/// a plane wave times the atom-at-rest amplitudes at `t = xm/(ħk)`.
pub fn highenergy_field<T: Real>(
    k: T,
    x: T,
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
) -> [Complex<T>; 2] {
    let wp = omega_prime(params);
    let scale = consts.mass * (wp + params.detuning.abs()) / consts.hbar;
    if k * k < lit::<T>(20.0) * scale {
        log::warn!("high-energy approximation used with k^2 < 20 m(Omega' + |delta|)/hbar");
    }
    let wave = Complex::from_polar(T::one() / T::TAU().sqrt(), k * x);
    let t = x * consts.mass / (consts.hbar * k);
    let [a, b] = raman_nath_internal(t, params);
    [wave * a, wave * b]
}

/// Internal factor of the Raman–Nath state `Φ_RN(t)` for an atom starting
/// in the ground state, without the transverse `e^{ik_L y}` of the excited
/// component. Requires no damping; γ is ignored.
pub fn raman_nath_internal<T: Real>(t: T, params: &LaserParams<T>) -> [Complex<T>; 2] {
    let wp = omega_prime(params);
    let zero = Complex::new(T::zero(), T::zero());
    if wp == T::zero() {
        return [Complex::new(T::one(), T::zero()), zero];
    }
    let half = lit::<T>(0.5);
    let delta = params.detuning;
    let lp = -half * (delta + wp);
    let lm = -half * (delta - wp);
    let ep = Complex::from_polar(T::one(), -lp * t);
    let em = Complex::from_polar(T::one(), -lm * t);
    let two_wp = wp + wp;
    let g = ep * ((wp - delta) / two_wp) + em * ((wp + delta) / two_wp);
    let e = (em - ep) * (params.omega_rabi / two_wp);
    [g, e]
}

/// Raman–Nath evolution of a transverse amplitude `ψ₀(y)` sampled on `y`,
/// starting in the ground state.
pub fn raman_nath_state<T: Real>(
    y: &[T],
    psi0: &[Complex<T>],
    t: T,
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
    if params.gamma != T::zero() {
        return Err(Error::DampingNotSupported(params.gamma.to_f64().unwrap_or(f64::NAN)));
    }
    if y.len() != psi0.len() {
        return Err(crate::error::invalid("psi0", "length differs from the y grid"));
    }
    let [a, b] = raman_nath_internal(t, params);
    let g = psi0.iter().map(|&p| p * a).collect();
    let e = psi0
        .iter()
        .zip(y)
        .map(|(&p, &yy)| p * b * Complex::from_polar(T::one(), consts.k_laser * yy))
        .collect();
    Ok((g, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumDistributions {
    pub p: Vec<f64>,
    pub ground: Vec<f64>,
    pub excited: Vec<f64>,
}

/// Normalized transverse momentum distributions of the two Raman–Nath
/// components, `|⟨p|ψ₀⟩|²` and the transform of `e^{ik_L y}ψ₀`, evaluated
/// at `p` by direct summation over the uniform grid `y`.
///
/// The internal factors are spatially constant, so the distributions do
/// not depend on time or on the laser parameters.
pub fn raman_nath_momentum(
    y: &[f64],
    psi0: &[C64],
    p: &[f64],
    consts: &PhysicalConstants<f64>,
) -> Result<MomentumDistributions> {
    if y.len() != psi0.len() || y.len() < 2 {
        return Err(crate::error::invalid("psi0", "needs at least two samples matching the y grid"));
    }
    let dy = y[1] - y[0];
    let pref = dy / (std::f64::consts::TAU * consts.hbar).sqrt();
    let transform = |pp: f64, kick: f64| -> f64 {
        let s: C64 = y
            .iter()
            .zip(psi0)
            .map(|(&yy, &f)| f * C64::from_polar(1.0, (kick - pp / consts.hbar) * yy))
            .sum();
        (s * pref).norm_sqr()
    };
    let (ground, excited) = p
        .par_iter()
        .map(|&pp| (transform(pp, 0.0), transform(pp, consts.k_laser)))
        .unzip();
    Ok(MomentumDistributions {
        p: p.to_vec(),
        ground,
        excited,
    })
}

/// Transverse spread after `n` spontaneous kicks spaced by `Δt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkVariance<T> {
    /// `n(n+1)(2n+1)/6 · Δt² · ⟨Δv_y²⟩`
    pub exact: T,
    /// `n³/3 · Δt² · ⟨Δv_y²⟩`
    pub large_n: T,
}

/// `⟨y²⟩` of the random walk with `⟨Δv_y²⟩ = 2Δv²/5` per kick.
pub fn recoil_walk_variance<T: Real>(n: T, dt_kick: T, dv: T) -> WalkVariance<T> {
    let vy2 = lit::<T>(0.4) * dv * dv;
    let base = dt_kick * dt_kick * vy2;
    let six = lit::<T>(6.0);
    WalkVariance {
        exact: n * (n + T::one()) * (n + n + T::one()) / six * base,
        large_n: n * n * n / lit::<T>(3.0) * base,
    }
}

/// Real `n` at which `k_L √⟨y²⟩` (exact-sum form) reaches `threshold`.
pub fn critical_kicks<T: Real>(dt_kick: T, dv: T, k_laser: T, threshold: T) -> T {
    let target = (threshold / k_laser).powi(2);
    let f = |n: T| recoil_walk_variance(n, dt_kick, dv).exact - target;
    let (mut lo, mut hi) = (T::zero(), T::one());
    while f(hi) < T::zero() {
        lo = hi;
        hi = hi + hi;
        if hi > lit::<T>(1e300) {
            return T::infinity();
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) * lit::<T>(0.5);
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    (lo + hi) * lit::<T>(0.5)
}

/// Time at which free spreading `Δy² = Δy₀²[1 + ħ²t²/(4m²Δy₀⁴)]` brings
/// `k_L Δy` up to `threshold`.
pub fn dispersion_time<T: Real>(delta_y0: T, consts: &PhysicalConstants<T>, threshold: T) -> Result<T> {
    let initial = consts.k_laser * delta_y0;
    if !(initial < threshold) {
        return Err(Error::ThresholdViolated {
            initial: initial.to_f64().unwrap_or(f64::NAN),
            threshold: threshold.to_f64().unwrap_or(f64::NAN),
        });
    }
    let ratio = threshold / initial;
    let two = lit::<T>(2.0);
    Ok(two * consts.mass * delta_y0 * delta_y0 / consts.hbar * (ratio * ratio - T::one()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidityOptions {
    /// Mean time between spontaneous kicks; `2/γ` when absent.
    pub kick_interval: Option<f64>,
    /// Bound on `k_L Δy` beyond which the y-independence fails.
    pub threshold: f64,
    /// Initial `k_L Δy₀` for the dispersion estimate.
    pub initial_kl_dy: f64,
}

impl Default for ValidityOptions {
    fn default() -> Self {
        ValidityOptions {
            kick_interval: None,
            threshold: 0.1,
            initial_kl_dy: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    pub n_critical: f64,
    pub t_recoil: f64,
    pub t_dispersion: f64,
    pub kick_interval: f64,
    pub recoil_velocity: f64,
    pub threshold: f64,
    pub delta_y0: f64,
}

pub fn validity_report(
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    opts: &ValidityOptions,
) -> Result<ValidityReport> {
    consts.validate()?;
    let dt = match opts.kick_interval {
        Some(dt) => dt,
        None if params.gamma > 0.0 => 2.0 / params.gamma,
        None => return Err(crate::error::invalid("gamma", "needs gamma > 0 or an explicit kick_interval")),
    };
    if !(dt > 0.0) {
        return Err(crate::error::invalid("kick_interval", "must be positive"));
    }
    let dv = consts.recoil_velocity();
    let n = critical_kicks(dt, dv, consts.k_laser, opts.threshold);
    let dy0 = opts.initial_kl_dy / consts.k_laser;
    Ok(ValidityReport {
        n_critical: n,
        t_recoil: n * dt,
        t_dispersion: dispersion_time(dy0, consts, opts.threshold)?,
        kick_interval: dt,
        recoil_velocity: dv,
        threshold: opts.threshold,
        delta_y0: dy0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{critical_wavenumber, rabi_at_rest};
    use crate::stationary::scattering_amplitudes;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn raman_nath_matches_rest_solution() {
        for p in [LaserParams::<f64>::resonant(2.0), LaserParams::new(2.0, -1.3, 0.0).unwrap()] {
            for t in [0.0, 0.4, 2.1, 7.0] {
                let rn = raman_nath_internal(t, &p);
                let rest = rabi_at_rest(&p, t).unwrap();
                for i in 0..2 {
                    assert!((rn[i] - rest[i]).norm() < 1e-14, "{t} {i}");
                }
            }
        }
        let p = LaserParams::resonant(3.0);
        let e = raman_nath_internal(std::f64::consts::PI / 3.0, &p)[1];
        assert_relative_eq!(e.norm_sqr(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn raman_nath_state_rejects_damping() {
        let c = PhysicalConstants::<f64>::cesium();
        let p = LaserParams::new(1.0, 0.0, 1.0).unwrap();
        assert!(raman_nath_state(&[0.0], &[C64::new(1.0, 0.0)], 1.0, &p, &c).is_err());
    }

    #[test]
    fn highenergy_half_period() {
        let c = PhysicalConstants::<f64>::cesium();
        let p = LaserParams::resonant(3.307e6);
        let k = 10.0 * critical_wavenumber(&p, &c);
        let x = std::f64::consts::PI * c.hbar * k / (c.mass * p.omega_rabi);
        let f = highenergy_field(k, x, &p, &c);
        assert_relative_eq!(f[1].norm() * std::f64::consts::TAU.sqrt(), 1.0, max_relative = 1e-12);
        let f0 = highenergy_field(k, 0.0, &p, &c);
        assert_relative_eq!(f0[0].re * std::f64::consts::TAU.sqrt(), 1.0, max_relative = 1e-14);
    }

    fn highenergy_deviation(ratio: f64, params: &LaserParams<f64>) -> f64 {
        let c = PhysicalConstants::<f64>::cesium();
        let kc = critical_wavenumber(params, &c);
        let k = ratio * kc;
        let s = scattering_amplitudes(k, params, &c, 0.0).unwrap();
        // one spatial Rabi wavelength
        let span = std::f64::consts::TAU * k / (kc * kc);
        let norm = std::f64::consts::TAU.sqrt();
        (0..=400)
            .map(|i| {
                let x = span * i as f64 / 400.0;
                let a = s.eigenfunction(x);
                let b = highenergy_field(k, x, params, &c);
                ((a[0] - b[0]).norm().max((a[1] - b[1]).norm())) * norm
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn highenergy_error_scales_as_inverse_square() {
        let p = LaserParams::resonant(3.307e6);
        let e10 = highenergy_deviation(10.0, &p);
        let e100 = highenergy_deviation(100.0, &p);
        assert!(e10 <= 5.0 * 0.01, "{e10}");
        let slope = (e100 / e10).log10();
        assert!((slope + 2.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn momentum_distribution_shift() {
        let c = PhysicalConstants::<f64>::cesium();
        let dy = 0.3 / c.k_laser;
        let n = 1201;
        let y: Vec<f64> = (0..n).map(|i| (i as f64 - 600.0) * dy * 0.02).collect();
        let norm = (2.0 * std::f64::consts::PI * dy * dy).powf(-0.25);
        let psi: Vec<C64> = y
            .iter()
            .map(|&v| C64::new(norm * (-(v * v) / (4.0 * dy * dy)).exp(), 0.0))
            .collect();
        let pk = c.hbar * c.k_laser;
        let sp = c.hbar / (2.0 * dy);
        let p: Vec<f64> = (0..801).map(|i| -10.0 * sp + 20.0 * sp * i as f64 / 800.0).collect();
        let d = raman_nath_momentum(&y, &psi, &p, &c).unwrap();
        let dp = p[1] - p[0];
        let i1: f64 = d.ground.iter().sum::<f64>() * dp;
        assert_relative_eq!(i1, 1.0, max_relative = 1e-6);
        let mean = |w: &[f64]| p.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
        assert!(mean(&d.ground).abs() < 1e-9 * pk);
        assert_relative_eq!(mean(&d.excited), pk, max_relative = 1e-6);
    }

    #[test]
    fn single_kick_and_large_n() {
        let w = recoil_walk_variance(1.0f64, 2.0, 3.0);
        assert_relative_eq!(w.exact, 4.0 * 2.0 * 9.0 / 5.0, max_relative = 1e-15);
        let w = recoil_walk_variance(100.0f64, 1.0, 1.0);
        assert!((w.exact / w.large_n - 1.0).abs() < 0.02);
    }

    #[test]
    fn exact_sum_identity() {
        let mut sum = 0.0f64;
        for n in 1..=10_000u64 {
            sum += (n * n) as f64;
            let w = recoil_walk_variance(n as f64, 1.0, 1.0);
            assert_relative_eq!(w.exact, 0.4 * sum, max_relative = 1e-13);
        }
    }

    #[test]
    fn dispersion_inversion() {
        let c = PhysicalConstants::<f64>::cesium();
        let dy = 0.05 / c.k_laser;
        let t = dispersion_time(dy, &c, 0.1).unwrap();
        let spread = dy * (1.0 + (c.hbar * t).powi(2) / (4.0 * c.mass.powi(2) * dy.powi(4))).sqrt();
        assert_relative_eq!(c.k_laser * spread, 0.1, max_relative = 1e-12);
        assert!(dispersion_time(0.100001 / c.k_laser, &c, 0.1).is_err());
        // doubling Δy₀ at threshold 1/5: t ∝ Δy₀² √((θ/k_LΔy₀)² − 1)
        let t1 = dispersion_time(dy, &c, 0.2).unwrap();
        let t2 = dispersion_time(2.0 * dy, &c, 0.2).unwrap();
        assert_relative_eq!(t2 / t1, 4.0 * (3.0f64 / 15.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn semiclassical_without_coupling_is_zero() {
        let c = PhysicalConstants::<f64>::cesium();
        let spec = GaussianSpec::new(0.24e-6, -1.32e-6, 9.03);
        let p = LaserParams::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(semiclassical_p2(&spec, &p, &c, 1e-7, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn semiclassical_wide_packet_closed_form() {
        // negligible momentum spread and every trajectory already inside:
        // P2 = ½[1 − exp(−(Ω'Δx/v)²/2) cos Ω'(t + x0/v)]
        let c = PhysicalConstants::<f64>::cesium();
        let spec = GaussianSpec::new(5e-6, -40e-6, 50.0);
        let p = LaserParams::resonant(1.0e7);
        let damp = (-0.5 * (p.omega_rabi * spec.delta_x / spec.v0).powi(2)).exp();
        for t in [2.0e-6, 2.13e-6, 2.71e-6] {
            let want = 0.5 * (1.0 - damp * (p.omega_rabi * (t + spec.x0 / spec.v0)).cos());
            let got = semiclassical_p2(&spec, &p, &c, t, 1e-10).unwrap();
            assert!((got - want).abs() < 1e-7, "{t}: {got} vs {want}");
        }
    }

    #[test]
    fn semiclassical_before_entrance_is_zero() {
        let c = PhysicalConstants::<f64>::cesium();
        let spec = GaussianSpec::new(0.24e-6, -10e-6, 10.0);
        let p = LaserParams::resonant(1.0e7);
        assert!(semiclassical_p2(&spec, &p, &c, 0.1e-6, 1e-10).unwrap() < 1e-12);
    }

    proptest! {
        #[test]
        fn raman_nath_preserves_norm(t in 0.0f64..1e-5, om in 1e5f64..1e8, d in -1e8f64..1e8) {
            let p = LaserParams::new(om, d, 0.0).unwrap();
            let [a, b] = raman_nath_internal(t, &p);
            prop_assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
