//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};
use crate::num::{lit, Real};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            rtol: lit(1e-11),
            atol: lit(1e-12),
            max_steps: 10_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` and returns the state at each of the
/// (nondecreasing) `outputs`, landing exactly on every output time.
pub fn integrate<T, const N: usize, F>(
    f: F,
    t0: T,
    y0: [T; N],
    outputs: &[T],
    tol: Tolerances<T>,
) -> Result<Vec<[T; N]>>
where
    T: Real,
    F: Fn(T, &[T; N]) -> [T; N],
{
    let mut t = t0;
    let mut y = y0;
    let mut h: Option<T> = None;
    let mut out = Vec::with_capacity(outputs.len());
    let mut steps = 0usize;
    for &target in outputs {
        if target < t {
            return Err(Error::OdeFailure("output times must be nondecreasing".into()));
        }
        while t < target {
            let span = target - t;
            let mut step = h.unwrap_or_else(|| span.min(lit::<T>(1e-3) * (target - t0).max(span)));
            let mut last = false;
            if step >= span {
                step = span;
                last = true;
            }
            let (y_new, err) = dp_step(&f, t, &y, step);
            let mut norm = T::zero();
            for i in 0..N {
                let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                let e = err[i] / sc;
                norm += e * e;
            }
            norm = (norm / T::from_usize(N).unwrap()).sqrt();
            if !norm.is_finite() {
                return Err(Error::OdeFailure(format!("non-finite error estimate at t = {t}")));
            }
            let factor = if norm == T::zero() {
                lit(5.0)
            } else {
                (lit::<T>(0.9) * norm.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0))
            };
            if norm <= T::one() {
                t = if last { target } else { t + step };
                y = y_new;
                h = Some(if last { h.unwrap_or(step) } else { step * factor });
            } else {
                h = Some(step * factor.min(T::one()));
            }
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::OdeFailure(format!("exceeded {} steps", tol.max_steps)));
            }
            if let Some(hh) = h {
                if hh <= T::epsilon() * t.abs().max(T::one()) {
                    return Err(Error::OdeFailure(format!("step size underflow at t = {t}")));
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn dp_step<T, const N: usize, F>(f: &F, t: T, y: &[T; N], h: T) -> ([T; N], [T; N])
where
    T: Real,
    F: Fn(T, &[T; N]) -> [T; N],
{
    let mut k = [[T::zero(); N]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = lit::<T>(A[s][j]);
            if a != T::zero() {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(t + h * lit(C[s]), &ys);
    }
    let mut y5 = *y;
    let mut err = [T::zero(); N];
    for s in 0..7 {
        let b5 = lit::<T>(B5[s]);
        let db = b5 - lit(B4[s]);
        for i in 0..N {
            y5[i] += h * b5 * k[s][i];
            err[i] += h * db * k[s][i];
        }
    }
    (y5, err)
}
