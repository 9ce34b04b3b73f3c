//! Physical constants, laser parameters, derived scales and the closed-form
//! solutions for an atom at rest.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::num::{lit, Real};
use crate::ode::{self, Tolerances};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Mass of a caesium-133 atom (kg).
pub const CS_MASS: f64 = 2.2069e-25;
/// Wavelength of the caesium D2 line (m).
pub const CS_WAVELENGTH: f64 = 852e-9;
/// Decay rate of the caesium excited level used by the damped presets (1/s).
pub const CS_GAMMA: f64 = 33.3e6;
/// Prefactor in the sudden-entrance wavenumber estimate.
pub const ENTRANCE_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants<T> {
    pub hbar: T,
    pub mass: T,
    /// Laser wavenumber `k_L` (1/m).
    pub k_laser: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn new(hbar: T, mass: T, k_laser: T) -> Result<Self> {
        let c = PhysicalConstants { hbar, mass, k_laser };
        c.validate()?;
        Ok(c)
    }

    pub fn cesium() -> Self {
        PhysicalConstants {
            hbar: lit(HBAR),
            mass: lit(CS_MASS),
            k_laser: lit(2.0 * std::f64::consts::PI / CS_WAVELENGTH),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("mass", self.mass), ("k_laser", self.k_laser)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `ħ/m` (m²/s).
    #[inline]
    pub fn hbar_over_m(&self) -> T {
        self.hbar / self.mass
    }

    #[inline]
    pub fn velocity(&self, k: T) -> T {
        self.hbar * k / self.mass
    }

    #[inline]
    pub fn wavenumber(&self, v: T) -> T {
        self.mass * v / self.hbar
    }

    /// Single-photon recoil velocity `ħ k_L / m`.
    pub fn recoil_velocity(&self) -> T {
        self.velocity(self.k_laser)
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::cesium()
    }
}

/// Laser coupling Ω, detuning δ = ω_L − ω and decay rate γ, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserParams<T> {
    pub omega_rabi: T,
    pub detuning: T,
    pub gamma: T,
}

impl<T: Real> LaserParams<T> {
    pub fn new(omega_rabi: T, detuning: T, gamma: T) -> Result<Self> {
        let p = LaserParams {
            omega_rabi,
            detuning,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn resonant(omega_rabi: T) -> Self {
        LaserParams {
            omega_rabi,
            detuning: T::zero(),
            gamma: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_rabi >= T::zero()) || !self.omega_rabi.is_finite() {
            return Err(invalid("omega_rabi", format!("must be >= 0, got {}", self.omega_rabi)));
        }
        if !(self.gamma >= T::zero()) || !self.gamma.is_finite() {
            return Err(invalid("gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        if !self.detuning.is_finite() {
            return Err(invalid("detuning", "must be finite"));
        }
        Ok(())
    }

    pub fn omega_prime(&self) -> T {
        omega_prime(self)
    }

    pub fn undamped(&self) -> Self {
        LaserParams {
            gamma: T::zero(),
            ..*self
        }
    }
}

/// Generalized Rabi frequency `Ω' = (Ω² + δ²)^{1/2}`.
pub fn omega_prime<T: Real>(params: &LaserParams<T>) -> T {
    params.omega_rabi.hypot(params.detuning)
}

/// Critical wavenumber `k_c = [m(Ω' − δ)/ħ]^{1/2}` below which the λ₋
/// channel is evanescent.
pub fn critical_wavenumber<T: Real>(params: &LaserParams<T>, consts: &PhysicalConstants<T>) -> T {
    let arg = consts.mass * (omega_prime(params) - params.detuning) / consts.hbar;
    arg.max(T::zero()).sqrt()
}

/// Wavenumber of the crossover between adiabatic and sudden entrance,
/// `k_R = f Δx m Ω' / (2πħ)` with `f` the entrance factor (5 by default).
pub fn transition_wavenumber<T: Real>(
    delta_x: T,
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
    entrance_factor: T,
) -> Result<T> {
    if !(delta_x > T::zero()) {
        return Err(invalid("delta_x", format!("must be positive, got {delta_x}")));
    }
    Ok(entrance_factor * delta_x * consts.mass * omega_prime(params) / (T::TAU() * consts.hbar))
}

/// `k_R` with the default entrance factor.
pub fn transition_wavenumber_kr<T: Real>(
    delta_x: T,
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
) -> Result<T> {
    transition_wavenumber(delta_x, params, consts, lit(ENTRANCE_FACTOR))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales<T> {
    pub omega_prime: T,
    pub k_c: T,
    pub v_c: T,
    /// `T_R = 2π/Ω'`; infinite without coupling and detuning.
    pub rabi_period: T,
}

impl<T: Real> DerivedScales<T> {
    pub fn new(params: &LaserParams<T>, consts: &PhysicalConstants<T>) -> Self {
        let omega_prime = omega_prime(params);
        let k_c = critical_wavenumber(params, consts);
        DerivedScales {
            omega_prime,
            k_c,
            v_c: consts.velocity(k_c),
            rabi_period: T::TAU() / omega_prime,
        }
    }

    /// Spatial period of the Rabi oscillation at incident wavenumber `k`,
    /// `λ_R(k) = 2πk/k_c²`.
    pub fn rabi_wavelength(&self, k: T) -> T {
        T::TAU() * k / (self.k_c * self.k_c)
    }

    pub fn de_broglie(&self, k: T) -> T {
        T::TAU() / k
    }
}

/// Internal amplitudes of an atom at rest that starts in the ground state.
pub fn rabi_at_rest<T: Real>(params: &LaserParams<T>, t: T) -> Result<[Complex<T>; 2]> {
    if params.gamma != T::zero() {
        return Err(Error::DampingNotSupported(params.gamma.to_f64().unwrap_or(f64::NAN)));
    }
    let delta = params.detuning;
    let wp = omega_prime(params);
    let half = lit::<T>(0.5);
    let phase = Complex::from_polar(T::one(), delta * t * half);
    if wp == T::zero() {
        return Ok([phase, Complex::new(T::zero(), T::zero())]);
    }
    let (s, c) = (wp * t * half).sin_cos();
    let g = phase * Complex::new(c, -(delta / wp) * s);
    let e = phase * Complex::new(T::zero(), -(params.omega_rabi / wp) * s);
    Ok([g, e])
}

/// Excited population of an atom at rest, starting in the ground state,
/// from the optical Bloch equations including spontaneous decay.
pub fn bloch_at_rest<T: Real>(params: &LaserParams<T>, times: &[T]) -> Result<Vec<T>> {
    bloch_at_rest_with(params, times, Tolerances::default())
}

pub fn bloch_at_rest_with<T: Real>(
    params: &LaserParams<T>,
    times: &[T],
    tol: Tolerances<T>,
) -> Result<Vec<T>> {
    params.validate()?;
    let omega = params.omega_rabi;
    let delta = params.detuning;
    let gamma = params.gamma;
    let half = lit::<T>(0.5);
    // y = (ρ22, Re ρ12, Im ρ12) with ρ11 = 1 − ρ22
    let rhs = move |_t: T, y: &[T; 3]| {
        let (p22, re, im) = (y[0], y[1], y[2]);
        let inversion = T::one() - p22 - p22; // ρ11 − ρ22
        let d22 = omega * im - gamma * p22;
        // dρ12/dt = i(Ω/2)(ρ11 − ρ22) − iδρ12 − (γ/2)ρ12
        let dre = delta * im - gamma * half * re;
        let dim = omega * half * inversion - delta * re - gamma * half * im;
        [d22, dre, dim]
    };
    let states = ode::integrate(rhs, T::zero(), [T::zero(); 3], times, tol)?;
    Ok(states.into_iter().map(|y| y[0]).collect())
}

/// Stationary excited population of the damped two-level atom at rest.
pub fn bloch_steady_state<T: Real>(params: &LaserParams<T>) -> T {
    let q = params.omega_rabi * params.omega_rabi / lit(4.0);
    q / (params.detuning * params.detuning + q + q + params.gamma * params.gamma / lit(4.0))
}
