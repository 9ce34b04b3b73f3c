//! Scalar abstraction shared by the closed-form parts of the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Square root on the branch with non-negative imaginary part.
///
/// Real arguments produce results with an exactly zero imaginary part: a
/// non-negative real maps to its positive root and a negative real maps to
/// a purely imaginary root in the upper half plane.
pub fn sqrt_upper<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.im == T::zero() {
        if z.re >= T::zero() {
            Complex::new(z.re.sqrt(), T::zero())
        } else {
            Complex::new(T::zero(), (-z.re).sqrt())
        }
    } else {
        let s = z.sqrt();
        let s = if s.im < T::zero() { -s } else { s };
        if s.im == T::zero() {
            Complex::new(s.re, T::zero())
        } else {
            s
        }
    }
}

/// Principal square root with the cut along the negative real axis; a
/// negative real argument maps to the upper half plane.
pub fn sqrt_principal<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.im == T::zero() {
        sqrt_upper(z)
    } else {
        z.sqrt()
    }
}

#[inline]
pub fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

#[inline]
pub fn cr<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `(e^{i s b} - e^{i s a}) / (i s)`, the integral of `e^{i s x}` over `[a, b]`,
/// stable as `s → 0`.
pub fn exp_integral<T: Real>(s: Complex<T>, a: T, b: T) -> Complex<T> {
    let scale = a.abs().max(b.abs());
    if s.norm() * scale < lit(1e-3) {
        // Σ (is)^n (b^{n+1} - a^{n+1}) / (n+1)!
        let is = i_unit::<T>() * s;
        let mut term_pow = Complex::new(T::one(), T::zero());
        let mut bn = b;
        let mut an = a;
        let mut fact = T::one();
        let mut acc = Complex::new(T::zero(), T::zero());
        for n in 0..8 {
            fact *= T::from_usize(n + 1).unwrap();
            acc += term_pow * cr((bn - an) / fact);
            term_pow *= is;
            bn *= b;
            an *= a;
        }
        acc
    } else {
        let is = i_unit::<T>() * s;
        ((is * cr(b)).exp() - (is * cr(a)).exp()) / is
    }
}

/// Same as [`exp_integral`] with precomputed endpoint exponentials.
#[inline]
pub fn exp_integral_with<T: Real>(
    s: Complex<T>,
    a: T,
    b: T,
    exp_isb: Complex<T>,
    exp_isa: Complex<T>,
) -> Complex<T> {
    let scale = a.abs().max(b.abs());
    if s.norm() * scale < lit(1e-3) {
        exp_integral(s, a, b)
    } else {
        (exp_isb - exp_isa) / (i_unit::<T>() * s)
    }
}

/// Sine integral `Si(x) = ∫₀ˣ sin t / t dt`.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= 24.0 {
        // composite Gauss–Legendre, exact to rounding on this range
        let (nodes, weights) = crate::quadrature::gauss_legendre::<f64>(20);
        let panels = (ax / 2.0).ceil().max(1.0) as usize;
        let h = ax / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (t, w) in nodes.iter().zip(&weights) {
                let u = mid + 0.5 * h * t;
                acc += 0.5 * h * w * if u == 0.0 { 1.0 } else { u.sin() / u };
            }
        }
        acc
    } else {
        // Si = π/2 − f cos x − g sin x with asymptotic auxiliary functions
        let inv2 = 1.0 / (ax * ax);
        let (mut f, mut g) = (0.0, 0.0);
        let (mut tf, mut tg) = (1.0 / ax, inv2);
        for n in 0..12 {
            f += tf;
            g += tg;
            let k = 2.0 * n as f64;
            tf *= -(k + 1.0) * (k + 2.0) * inv2;
            tg *= -(k + 2.0) * (k + 3.0) * inv2;
        }
        std::f64::consts::FRAC_PI_2 - f * ax.cos() - g * ax.sin()
    };
    v.copysign(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn real_arguments_have_exact_zero_imaginary_part() {
        let r = sqrt_upper(Complex::new(4.0_f64, -0.0));
        assert_eq!(r, Complex::new(2.0, 0.0));
        assert!(r.im.is_sign_positive());
        let r = sqrt_upper(Complex::new(-9.0_f64, 0.0));
        assert_eq!(r, Complex::new(0.0, 3.0));
        assert!(r.re.is_sign_positive());
    }

    #[test]
    fn exp_integral_small_argument_matches_direct() {
        let s = Complex::new(1e-2_f64, 3e-3);
        let series = exp_integral(s, -0.01, 0.02);
        let is = i_unit::<f64>() * s;
        let direct = ((is * 0.02).exp() - (is * -0.01).exp()) / is;
        assert!((series - direct).norm() < 1e-12 * direct.norm());
        assert!((exp_integral(Complex::new(0.0_f64, 0.0), 1.0, 3.0) - cr(2.0)).norm() < 1e-15);
    }

    #[test]
    fn sine_integral_values() {
        // reference values to 1e-15
        assert!((sine_integral(1.0) - 0.946_083_070_367_183_0).abs() < 1e-14);
        assert!((sine_integral(10.0) - 1.658_347_594_218_874).abs() < 1e-14);
        assert!((sine_integral(-30.0) + 1.566_756_540_030_351_7).abs() < 1e-13);
        assert!((sine_integral(24.0) - sine_integral(24.000_000_1)).abs() < 1e-8);
        assert!((sine_integral(1e6) - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn sqrt_upper_squares_back_with_nonnegative_imaginary(re in -1e3f64..1e3, im in -1e3f64..1e3) {
            let z = Complex::new(re, im);
            let s = sqrt_upper(z);
            prop_assert!(s.im >= 0.0);
            prop_assert!((s * s - z).norm() <= 1e-12 * (1.0 + z.norm()));
        }
    }
}
