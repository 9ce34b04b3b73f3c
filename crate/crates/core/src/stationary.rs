//! Stationary scattering states of the half-space laser problem, with and
//! without decay of the excited level.
//!
//! For an atom incident from the left in the ground state with wavenumber
//! `k > 0` the eigenfunction is (up to the common factor `1/√(2π)`)
//!
//! ```text
//! x ≤ 0:  (e^{ikx} + R1 e^{-ikx},  R2 e^{-iqx})
//! x ≥ 0:  C+ |λ+⟩ e^{ik+ x} + C- |λ-⟩ e^{ik- x}
//! ```
//!
//! with `|λ±⟩ = (1, 2λ± e^{i k_L y}/Ω)`. Value and derivative matching at
//! `x = 0` gives `R2 = kΩ(k- − k+) e^{i k_L y}/D`, using `λ+λ- = −Ω²/4`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{LaserParams, PhysicalConstants};
use crate::num::{cr, i_unit, lit, sqrt_principal, sqrt_upper, Real};

/// Eigenvalue (rad/s) and unnormalized eigenvector `(1, 2λ e^{i k_L y}/Ω)`
/// of the internal matrix inside the laser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InternalEigenpair<T> {
    pub lambda: Complex<T>,
    pub vector: [Complex<T>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelWavenumbers<T> {
    pub k: T,
    pub k_plus: Complex<T>,
    pub k_minus: Complex<T>,
    pub q: Complex<T>,
}

impl<T: Real> ChannelWavenumbers<T> {
    pub fn minus_is_evanescent(&self) -> bool {
        self.k_minus.im > T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringSolution<T> {
    pub plus: InternalEigenpair<T>,
    pub minus: InternalEigenpair<T>,
    pub wavenumbers: ChannelWavenumbers<T>,
    pub r1: Complex<T>,
    pub r2: Complex<T>,
    pub c_plus: Complex<T>,
    pub c_minus: Complex<T>,
    /// Matching denominator `(k+k-)(q+k+)λ+ − (k+k+)(q+k-)λ-`.
    pub d: Complex<T>,
    pub y: T,
    /// Set when `|D|` is small compared with its two terms.
    pub ill_conditioned: bool,
}

/// Internal matrix `(1/2)[[0, Ω e^{-i k_L y}], [Ω e^{i k_L y}, −2δ − iγ]]` in rad/s.
pub fn internal_matrix<T: Real>(
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
    y: T,
) -> [[Complex<T>; 2]; 2] {
    let half = lit::<T>(0.5);
    let w = params.omega_rabi * half;
    let ph = Complex::from_polar(T::one(), consts.k_laser * y);
    [
        [cr(T::zero()), ph.conj() * w],
        [ph * w, Complex::new(-params.detuning, -params.gamma * half)],
    ]
}

/// Eigenpairs `(λ+, λ-)` of the internal matrix in the laser region.
///
/// `λ± = −½[δ + iγ/2 ± ((δ + iγ/2)² + Ω²)^{1/2}]` with the principal root,
/// which reduces to `−(δ ± Ω')/2` at `γ = 0`.
pub fn eigenpairs<T: Real>(
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
    y: T,
) -> Result<(InternalEigenpair<T>, InternalEigenpair<T>)> {
    params.validate()?;
    if params.omega_rabi <= T::zero() {
        return Err(Error::ZeroCoupling);
    }
    let half = lit::<T>(0.5);
    let shift = Complex::new(params.detuning, params.gamma * half);
    let root = sqrt_principal(shift * shift + cr(params.omega_rabi * params.omega_rabi));
    let lp = -(shift + root) * half;
    let lm = -(shift - root) * half;
    let ph = Complex::from_polar(T::one(), consts.k_laser * y);
    let two_over_omega = lit::<T>(2.0) / params.omega_rabi;
    let pair = |l: Complex<T>| InternalEigenpair {
        lambda: l,
        vector: [cr(T::one()), l * ph * two_over_omega],
    };
    Ok((pair(lp), pair(lm)))
}

fn wavenumbers_from<T: Real>(
    k: T,
    lambda_plus: Complex<T>,
    lambda_minus: Complex<T>,
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
) -> ChannelWavenumbers<T> {
    let two_m_hbar = lit::<T>(2.0) * consts.mass / consts.hbar;
    let k2 = cr(k * k);
    let half = lit::<T>(0.5);
    ChannelWavenumbers {
        k,
        k_plus: sqrt_upper(k2 - lambda_plus * two_m_hbar),
        k_minus: sqrt_upper(k2 - lambda_minus * two_m_hbar),
        q: sqrt_upper(k2 + Complex::new(params.detuning, params.gamma * half) * two_m_hbar),
    }
}

/// Channel wavenumbers `k±² = k² − 2mλ±/ħ` and `q² = k² + (2m/ħ)(δ + iγ/2)`,
/// all on the branch `Im ≥ 0`.
pub fn channel_wavenumbers<T: Real>(
    k: T,
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
) -> Result<ChannelWavenumbers<T>> {
    if !(k > T::zero()) {
        return Err(invalid("k", format!("incident wavenumber must be positive, got {k}")));
    }
    let (p, m) = eigenpairs(params, consts, T::zero())?;
    Ok(wavenumbers_from(k, p.lambda, m.lambda, params, consts))
}

/// Reflection, transmission amplitudes and the matching denominator.
pub fn scattering_amplitudes<T: Real>(
    k: T,
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
    y: T,
) -> Result<ScatteringSolution<T>> {
    if !(k > T::zero()) {
        return Err(invalid("k", format!("incident wavenumber must be positive, got {k}")));
    }
    let (plus, minus) = eigenpairs(params, consts, y)?;
    let w = wavenumbers_from(k, plus.lambda, minus.lambda, params, consts);
    // Work in units of k and Ω so that single precision does not overflow.
    let inv_k = T::one() / k;
    let inv_w = T::one() / params.omega_rabi;
    let (kp, km, q) = (w.k_plus * inv_k, w.k_minus * inv_k, w.q * inv_k);
    let one = cr(T::one());
    let (lp, lm) = (plus.lambda * inv_w, minus.lambda * inv_w);
    let term_a = (one + km) * (q + kp) * lp;
    let term_b = (one + kp) * (q + km) * lm;
    let d = term_a - term_b;
    let two = cr(lit::<T>(2.0));
    let c_plus = -two * (q + km) * lm / d;
    let c_minus = two * (q + kp) * lp / d;
    let r1 = (lp * (q + kp) * (one - km) - lm * (q + km) * (one - kp)) / d;
    let ph = Complex::from_polar(T::one(), consts.k_laser * y);
    let r2 = (km - kp) * ph / d;
    let scale = term_a.norm().max(term_b.norm());
    let ill_conditioned = !(d.norm() >= T::epsilon() * lit::<T>(4096.0) * scale);
    let d = d * (k * k * params.omega_rabi);
    if ill_conditioned {
        log::warn!("scattering denominator |D| = {} is small relative to its terms ({})", d.norm(), scale);
    }
    Ok(ScatteringSolution {
        plus,
        minus,
        wavenumbers: w,
        r1,
        r2,
        c_plus,
        c_minus,
        d,
        y,
        ill_conditioned,
    })
}

impl<T: Real> ScatteringSolution<T> {
    fn norm_factor() -> T {
        T::one() / T::TAU().sqrt()
    }

    /// Eigenfunction components at `x`, including the `1/√(2π)` factor.
    pub fn eigenfunction(&self, x: T) -> [Complex<T>; 2] {
        let i = i_unit::<T>();
        let n = Self::norm_factor();
        let w = &self.wavenumbers;
        if x <= T::zero() {
            let g = (i * w.k * x).exp() + self.r1 * (-i * w.k * x).exp();
            let e = self.r2 * (-i * w.q * x).exp();
            [g * n, e * n]
        } else {
            let ep = self.c_plus * (i * w.k_plus * x).exp();
            let em = self.c_minus * (i * w.k_minus * x).exp();
            [
                (ep + em) * n,
                (ep * self.plus.vector[1] + em * self.minus.vector[1]) * n,
            ]
        }
    }

    /// Spatial derivative of [`Self::eigenfunction`].
    pub fn eigenfunction_derivative(&self, x: T) -> [Complex<T>; 2] {
        let i = i_unit::<T>();
        let n = Self::norm_factor();
        let w = &self.wavenumbers;
        if x <= T::zero() {
            let g = i * w.k * ((i * w.k * x).exp() - self.r1 * (-i * w.k * x).exp());
            let e = -i * w.q * self.r2 * (-i * w.q * x).exp();
            [g * n, e * n]
        } else {
            let ep = i * w.k_plus * self.c_plus * (i * w.k_plus * x).exp();
            let em = i * w.k_minus * self.c_minus * (i * w.k_minus * x).exp();
            [
                (ep + em) * n,
                (ep * self.plus.vector[1] + em * self.minus.vector[1]) * n,
            ]
        }
    }

    /// Right-side representation as `Σ coef · e^{i κ x}` per component,
    /// without the `1/√(2π)` factor.
    pub fn right_terms(&self) -> [[(Complex<T>, Complex<T>); 2]; 2] {
        let w = &self.wavenumbers;
        [
            [(self.c_plus, w.k_plus), (self.c_minus, w.k_minus)],
            [
                (self.c_plus * self.plus.vector[1], w.k_plus),
                (self.c_minus * self.minus.vector[1], w.k_minus),
            ],
        ]
    }

    /// Left-side ground terms `e^{ikx} + R1 e^{-ikx}` and excited term `R2 e^{-iqx}`.
    pub fn left_terms(&self) -> ([(Complex<T>, Complex<T>); 2], (Complex<T>, Complex<T>)) {
        let w = &self.wavenumbers;
        (
            [(cr(T::one()), cr(w.k)), (self.r1, cr(-w.k))],
            (self.r2, -w.q),
        )
    }

    pub fn reflection(&self) -> ReflectionProbabilities<T> {
        let w = &self.wavenumbers;
        let excited = if w.q.im == T::zero() && w.q.re > T::zero() {
            w.q.re / w.k * self.r2.norm_sqr()
        } else {
            T::zero()
        };
        ReflectionProbabilities {
            k: w.k,
            ground: self.r1.norm_sqr(),
            excited,
        }
    }

    /// Probability current carried to `x → +∞` per unit incident current.
    /// Evanescent channels carry exactly zero.
    pub fn transmission(&self) -> T {
        let w = &self.wavenumbers;
        let mut total = T::zero();
        for (c, kk, v) in [
            (self.c_plus, w.k_plus, self.plus.vector),
            (self.c_minus, w.k_minus, self.minus.vector),
        ] {
            if kk.im == T::zero() {
                total += kk.re * c.norm_sqr() * (v[0].norm_sqr() + v[1].norm_sqr());
            }
        }
        total / w.k
    }
}

/// Evaluates the stationary eigenfunction at `x` (transverse position `y = 0`).
pub fn eigenfunction<T: Real>(
    k: T,
    x: T,
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
) -> Result<[Complex<T>; 2]> {
    Ok(scattering_amplitudes(k, params, consts, T::zero())?.eigenfunction(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReflectionProbabilities<T> {
    pub k: T,
    /// `|R1|²`
    pub ground: T,
    /// `Re(q)/k · |R2|²` for a propagating excited channel, else 0.
    pub excited: T,
}

pub fn reflection_probabilities<T: Real>(
    k_grid: &[T],
    params: &LaserParams<T>,
    consts: &PhysicalConstants<T>,
) -> Result<Vec<ReflectionProbabilities<T>>> {
    k_grid
        .iter()
        .map(|&k| Ok(scattering_amplitudes(k, params, consts, T::zero())?.reflection()))
        .collect()
}

/// Wavenumber at which the reflected excited channel turns from
/// evanescent to propagating, `(−2mδ/ħ)^{1/2}` for negative detuning.
pub fn excited_channel_threshold<T: Real>(params: &LaserParams<T>, consts: &PhysicalConstants<T>) -> Option<T> {
    if params.detuning < T::zero() && params.gamma == T::zero() {
        Some((-lit::<T>(2.0) * consts.mass * params.detuning / consts.hbar).sqrt())
    } else {
        None
    }
}
