//! Split-step propagation of the two-component field under the conditional
//! Hamiltonian `p²/2m + (ħ/2)[[0, ΩΘ(x)], [ΩΘ(x), −2δ − iγ]]`.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{critical_wavenumber, omega_prime, LaserParams, PhysicalConstants};
use crate::packet::{GaussianSpec, TwoComponentField, C64};
use crate::stationary::internal_matrix;

/// Build-time options of a [`PropagatorPlan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanOptions {
    /// Time step (s).
    pub dt: f64,
    /// Carrier wavenumber of the stored arrays (1/m).
    pub carrier: f64,
    /// Fraction of the grid at each end covered by the absorbing layer.
    pub absorber_fraction: f64,
    /// Peak absorption rate at the outer edge (1/s); 0 picks a rate from the
    /// fastest velocity the grid represents well.
    pub absorber_rate: f64,
    /// Sampling of the laser edge Θ(x).
    pub edge: EdgeProfile,
    /// Largest spread (rad) of the kinetic phase across the represented
    /// momenta in one step.
    pub kinetic_phase_limit: f64,
}

/// How the step Θ(x) is represented on the grid.
///
/// Point samples of a sharp step misrepresent its Fourier components near
/// the grid's Nyquist wavenumber, which is where reflection from `+k` to
/// `−k` happens for fast packets. The band-limited form `½ + Si(k_N x)/π`
/// reproduces the step's coupling exactly for wavenumber transfers below
/// `k_N`, so reflection is correct when `k_N` exceeds twice the packet's
/// largest wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeProfile {
    Sharp,
    BandLimited,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            dt: 0.0,
            carrier: 0.0,
            absorber_fraction: 0.1,
            absorber_rate: 0.0,
            edge: EdgeProfile::BandLimited,
            kinetic_phase_limit: std::f64::consts::TAU,
        }
    }
}

#[derive(Clone)]
pub struct PropagatorPlan {
    x: Vec<f64>,
    dt: f64,
    carrier: f64,
    params: LaserParams<f64>,
    consts: PhysicalConstants<f64>,
    opts: PlanOptions,
    kinetic: Vec<C64>,
    outside: C64,
    inside: [[C64; 2]; 2],
    theta: Vec<f64>,
    edge_steps: Vec<[[C64; 2]; 2]>,
    damping: Vec<f64>,
    absorb_rate: Vec<f64>,
    layer: Vec<bool>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PropagatorPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PropagatorPlan")
            .field("n", &self.x.len())
            .field("x_min", &self.x[0])
            .field("dx", &self.dx())
            .field("dt", &self.dt)
            .field("carrier", &self.carrier)
            .finish()
    }
}

/// `exp(A)` for a 2×2 complex matrix via the Cayley–Hamilton form
/// `e^s [cosh Δ · I + sinh Δ/Δ · (A − sI)]`, `s = tr A/2`, `Δ² = s² − det A`.
pub fn expm2(a: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let s = (a[0][0] + a[1][1]) * 0.5;
    let h = (a[0][0] - a[1][1]) * 0.5;
    let d2 = h * h + a[0][1] * a[1][0];
    let d = d2.sqrt();
    let (ch, shc) = if d.norm() < 1e-4 {
        (
            C64::new(1.0, 0.0) + d2 * 0.5 + d2 * d2 / 24.0,
            C64::new(1.0, 0.0) + d2 / 6.0 + d2 * d2 / 120.0,
        )
    } else {
        (d.cosh(), d.sinh() / d)
    };
    let es = s.exp();
    [
        [es * (ch + shc * h), es * shc * a[0][1]],
        [es * shc * a[1][0], es * (ch - shc * h)],
    ]
}

/// Half-step factor `exp(−i M τ)` of the internal matrix inside the laser.
fn internal_propagator(
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    theta: f64,
    tau: f64,
) -> [[C64; 2]; 2] {
    let m = internal_matrix(params, consts, 0.0);
    let f = C64::new(0.0, -tau);
    expm2([
        [m[0][0] * f, m[0][1] * f * theta],
        [m[1][0] * f * theta, m[1][1] * f],
    ])
}

/// Θ(x) on the grid; exact 0 and 1 are kept where the profile saturates.
fn edge_samples(x: &[f64], edge: EdgeProfile) -> Vec<f64> {
    let k_nyq = std::f64::consts::PI / (x[1] - x[0]);
    x.iter()
        .map(|&xi| match edge {
            EdgeProfile::Sharp => {
                if xi >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            EdgeProfile::BandLimited => 0.5 + crate::num::sine_integral(k_nyq * xi) / std::f64::consts::PI,
        })
        .collect()
}

impl PropagatorPlan {
    /// Builds a plan on the uniform grid `x`. Fails if `dt` exceeds
    /// `0.02 T_R` or `0.02/γ`, if the kinetic phase advance across the
    /// represented momenta exceeds 2π per step, or if the absorbing layer is
    /// thinner than ten shortest represented wavelengths.
    pub fn new(
        x: Vec<f64>,
        params: &LaserParams<f64>,
        consts: &PhysicalConstants<f64>,
        opts: PlanOptions,
    ) -> Result<Self> {
        params.validate()?;
        consts.validate()?;
        let n = x.len();
        if n < 8 {
            return Err(Error::Resolution(format!("grid of {n} points is too small")));
        }
        let dx = x[1] - x[0];
        if !(dx > 0.0) || ((x[n - 1] - x[0]) / (n - 1) as f64 - dx).abs() > 1e-9 * dx {
            return Err(Error::GridMismatch("propagator grid must be uniform and increasing".into()));
        }
        let dt = opts.dt;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        if !(0.0..0.5).contains(&opts.absorber_fraction) {
            return Err(invalid("absorber_fraction", "must lie in [0, 0.5)"));
        }
        let wp = omega_prime(params);
        if wp > 0.0 && dt > 0.02 * std::f64::consts::TAU / wp * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "dt = {dt:e} s exceeds 0.02 Rabi periods ({:e} s)",
                0.02 * std::f64::consts::TAU / wp
            )));
        }
        if params.gamma > 0.0 && dt > 0.02 / params.gamma * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "dt = {dt:e} s exceeds 0.02/gamma ({:e} s)",
                0.02 / params.gamma
            )));
        }
        let k_nyq = std::f64::consts::PI / dx;
        let hm = 0.5 * consts.hbar_over_m();
        let kc = opts.carrier;
        let (klo, khi) = (kc - k_nyq, kc + k_nyq);
        let e_max = klo.abs().max(khi.abs()).powi(2);
        let e_min = if klo <= 0.0 && khi >= 0.0 { 0.0 } else { klo.abs().min(khi.abs()).powi(2) };
        let span = hm * (e_max - e_min) * dt;
        if span > opts.kinetic_phase_limit {
            return Err(Error::Resolution(format!(
                "kinetic phase advances by {span:.3} rad per step across the grid; reduce dt below {:e} s",
                dt * opts.kinetic_phase_limit / span
            )));
        }
        let layer_width = opts.absorber_fraction * (x[n - 1] - x[0]);
        let k_max = kc.abs() + k_nyq;
        if opts.absorber_fraction > 0.0 && layer_width < 10.0 * std::f64::consts::TAU / k_max {
            return Err(Error::Resolution(format!(
                "absorbing layer of {layer_width:e} m is thinner than ten wavelengths ({:e} m)",
                10.0 * std::f64::consts::TAU / k_max
            )));
        }
        let rate = if opts.absorber_rate > 0.0 {
            opts.absorber_rate
        } else if layer_width > 0.0 {
            // fast enough to stop the quickest well-resolved component within the layer
            let v_ref = consts.hbar_over_m() * (kc.abs() + 0.5 * k_nyq);
            30.0 * v_ref / layer_width
        } else {
            0.0
        };
        let mut absorb_rate = vec![0.0; n];
        let mut layer = vec![false; n];
        if layer_width > 0.0 {
            for (i, &xi) in x.iter().enumerate() {
                let depth = (x[0] + layer_width - xi).max(xi - (x[n - 1] - layer_width));
                if depth > 0.0 {
                    let s = depth / layer_width;
                    absorb_rate[i] = rate * s * s;
                    layer[i] = true;
                }
            }
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let mut plan = PropagatorPlan {
            theta: edge_samples(&x, opts.edge),
            edge_steps: Vec::new(),
            x,
            dt,
            carrier: kc,
            params: *params,
            consts: *consts,
            opts,
            kinetic: Vec::new(),
            outside: C64::new(1.0, 0.0),
            inside: [[C64::new(0.0, 0.0); 2]; 2],
            damping: Vec::new(),
            absorb_rate,
            layer,
            fft,
            ifft,
        };
        plan.set_dt(dt);
        Ok(plan)
    }

    fn set_dt(&mut self, dt: f64) {
        let n = self.x.len();
        let dx = self.dx();
        let hm = 0.5 * self.consts.hbar_over_m();
        let dk = std::f64::consts::TAU / (n as f64 * dx);
        let inv_n = 1.0 / n as f64;
        self.kinetic = (0..n)
            .map(|j| {
                let kj = if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 } * dk;
                let k = self.carrier + kj;
                C64::from_polar(inv_n, -hm * k * k * dt)
            })
            .collect();
        let tau = 0.5 * dt;
        // outside the laser only the excited level has a diagonal entry −δ − iγ/2
        self.outside = C64::new(-0.5 * self.params.gamma * tau, self.params.detuning * tau).exp();
        self.inside = internal_propagator(&self.params, &self.consts, 1.0, tau);
        self.edge_steps = self
            .theta
            .iter()
            .map(|&th| {
                if th == 0.0 || th == 1.0 {
                    [[C64::new(0.0, 0.0); 2]; 2]
                } else {
                    internal_propagator(&self.params, &self.consts, th, tau)
                }
            })
            .collect();
        self.damping = self.absorb_rate.iter().map(|w| (-w * tau).exp()).collect();
        self.dt = dt;
    }

    /// Same grid and physics with a different time step; used for sub-steps.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || dt > self.dt * (1.0 + 1e-12) {
            return Err(invalid("dt", "sub-step must be positive and no longer than the plan's step"));
        }
        let mut p = self.clone();
        p.opts.dt = dt;
        p.set_dt(dt);
        Ok(p)
    }

    pub fn grid(&self) -> &[f64] {
        &self.x
    }

    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn params(&self) -> &LaserParams<f64> {
        &self.params
    }

    pub fn consts(&self) -> &PhysicalConstants<f64> {
        &self.consts
    }

    pub fn options(&self) -> &PlanOptions {
        &self.opts
    }

    /// True for grid points inside the absorbing layer.
    pub fn layer_mask(&self) -> &[bool] {
        &self.layer
    }

    /// Zero field on the plan's grid in its carrier frame.
    pub fn zero_field(&self) -> TwoComponentField {
        let n = self.x.len();
        let z = vec![C64::new(0.0, 0.0); n];
        let mut f = TwoComponentField::new(self.x.clone(), z.clone(), z, 0.0).expect("plan grid is valid");
        f.carrier = self.carrier;
        f
    }

    pub fn check(&self, field: &TwoComponentField) -> Result<()> {
        if field.len() != self.x.len() || (field.x[0] - self.x[0]).abs() > 1e-9 * self.dx() {
            return Err(Error::GridMismatch(format!(
                "field of {} points from {:e} m, plan of {} points from {:e} m",
                field.len(),
                field.x[0],
                self.x.len(),
                self.x[0]
            )));
        }
        if field.carrier != self.carrier {
            return Err(Error::GridMismatch(format!(
                "field carrier {:e} differs from plan carrier {:e}",
                field.carrier, self.carrier
            )));
        }
        Ok(())
    }

    fn half_potential(&self, f: &mut TwoComponentField) {
        let u = &self.inside;
        for i in 0..f.len() {
            let d = self.damping[i];
            let (a, b) = (f.psi1[i], f.psi2[i]);
            let th = self.theta[i];
            if th == 1.0 {
                f.psi1[i] = (u[0][0] * a + u[0][1] * b) * d;
                f.psi2[i] = (u[1][0] * a + u[1][1] * b) * d;
            } else if th == 0.0 {
                f.psi1[i] = a * d;
                f.psi2[i] = b * self.outside * d;
            } else {
                let v = &self.edge_steps[i];
                f.psi1[i] = (v[0][0] * a + v[0][1] * b) * d;
                f.psi2[i] = (v[1][0] * a + v[1][1] * b) * d;
            }
        }
    }

    fn kinetic(&self, psi: &mut [C64]) {
        self.fft.process(psi);
        for (z, k) in psi.iter_mut().zip(&self.kinetic) {
            *z *= k;
        }
        self.ifft.process(psi);
    }

    /// Advances the field by one step without checking its grid.
    pub fn step_unchecked(&self, f: &mut TwoComponentField) {
        self.half_potential(f);
        self.kinetic(&mut f.psi1);
        self.kinetic(&mut f.psi2);
        self.half_potential(f);
        f.time += self.dt;
    }

    pub fn evolve(&self, f: &mut TwoComponentField, steps: usize) -> Result<()> {
        self.check(f)?;
        for _ in 0..steps {
            self.step_unchecked(f);
        }
        Ok(())
    }

    /// Squared norm outside the absorbing layer.
    pub fn no_jump_norm(&self, f: &TwoComponentField) -> f64 {
        let mut acc = 0.0;
        for i in 0..f.len() {
            if !self.layer[i] {
                acc += f.psi1[i].norm_sqr() + f.psi2[i].norm_sqr();
            }
        }
        acc * f.dx()
    }

    /// Squared norm inside the absorbing layer.
    pub fn layer_norm(&self, f: &TwoComponentField) -> f64 {
        let mut acc = 0.0;
        for i in 0..f.len() {
            if self.layer[i] {
                acc += f.psi1[i].norm_sqr() + f.psi2[i].norm_sqr();
            }
        }
        acc * f.dx()
    }
}

/// One symmetric split step: half potential, full kinetic, half potential.
pub fn step(field: &mut TwoComponentField, plan: &PropagatorPlan) -> Result<()> {
    plan.check(field)?;
    plan.step_unchecked(field);
    Ok(())
}

/// See [`PropagatorPlan::no_jump_norm`].
pub fn no_jump_norm(field: &TwoComponentField, plan: &PropagatorPlan) -> f64 {
    plan.no_jump_norm(field)
}

/// Grid and carrier sized for a Gaussian packet up to `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketGrid {
    pub x: Vec<f64>,
    pub carrier: f64,
    /// Largest step allowed by the Rabi, damping and kinetic-phase limits.
    pub dt_max: f64,
}

fn smooth_size(n: usize) -> usize {
    let p2 = n.next_power_of_two();
    let p3 = 3 * (n.div_ceil(3)).next_power_of_two();
    p2.min(p3).max(256)
}

/// Sizes a grid for `spec` evolving to `t_end`.
///
/// Packets whose slowest significant component is within ten critical
/// wavenumbers can reflect, so they are stored without a carrier and with a
/// Nyquist wavenumber above twice their fastest component. Faster packets
/// are stored relative to their mean wavenumber.
pub fn packet_grid(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    t_end: f64,
) -> Result<PacketGrid> {
    packet_grid_with_margin(spec, params, consts, t_end, 0.0)
}

/// [`packet_grid`] widened by `margin` (m) on both sides, for states that
/// spread faster than the packet itself (after quantum jumps).
pub fn packet_grid_with_margin(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    t_end: f64,
    margin: f64,
) -> Result<PacketGrid> {
    spec.validate(consts)?;
    if !(margin >= 0.0) {
        return Err(invalid("margin", "must be non-negative"));
    }
    let sk = spec.sigma_k();
    let k0 = spec.mean_wavenumber(consts);
    let kc = critical_wavenumber(params, consts);
    let k_hi = k0 + 8.0 * sk;
    let k_lo = (k0 - 8.0 * sk).max(0.0);
    let reflective = k_lo < 10.0 * kc;
    let (carrier, k_need) = if reflective {
        (0.0, 2.2 * k_hi)
    } else {
        (k0, 2.5 * 8.0 * sk + kc)
    };
    let v_hi = consts.velocity(k_hi);
    let w_end = spec.width_at(t_end, consts);
    let right = (spec.x0 + v_hi * t_end).max(0.0) + 8.0 * w_end + margin;
    let left = if reflective {
        spec.x0.min(-(v_hi * t_end + spec.x0)) - 8.0 * w_end
    } else {
        spec.x0 - 8.0 * w_end
    } - margin;
    let frac = PlanOptions::default().absorber_fraction;
    let length = (right - left) / (1.0 - 2.0 * frac);
    let n = smooth_size((length * k_need / std::f64::consts::PI).ceil() as usize);
    let dx = length / n as f64;
    let x0 = left - frac * length;
    let x: Vec<f64> = (0..n).map(|i| x0 + (i as f64 + 0.5) * dx).collect();

    let k_nyq = std::f64::consts::PI / dx;
    let (klo, khi) = (carrier - k_nyq, carrier + k_nyq);
    let e_max = klo.abs().max(khi.abs()).powi(2);
    let e_min = if klo <= 0.0 { 0.0 } else { klo * klo };
    let mut dt_max = 0.9 * std::f64::consts::TAU / (0.5 * consts.hbar_over_m() * (e_max - e_min));
    let wp = omega_prime(params);
    if wp > 0.0 {
        dt_max = dt_max.min(0.02 * std::f64::consts::TAU / wp);
    }
    if params.gamma > 0.0 {
        dt_max = dt_max.min(0.02 / params.gamma);
    }
    Ok(PacketGrid { x, carrier, dt_max })
}

/// Excited population `∫|ψ⁽²⁾|²` of an undamped Gaussian packet at each of
/// the non-decreasing `times`, by split-step propagation from `t = 0` on a
/// [`packet_grid`].
pub fn packet_excited_population(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    times: &[f64],
) -> Result<Vec<f64>> {
    if params.gamma != 0.0 {
        return Err(Error::DampingNotSupported(params.gamma));
    }
    let Some(&t_end) = times.last() else {
        return Ok(Vec::new());
    };
    if times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "must be non-negative and non-decreasing"));
    }
    let grid = packet_grid(spec, params, consts, t_end)?;
    let mut f = TwoComponentField::gaussian(spec, consts, grid.x.clone(), grid.carrier)?;
    let mut plans: Vec<PropagatorPlan> = Vec::new();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let gap = t - now;
        if gap > 0.0 {
            let steps = (gap / grid.dt_max).ceil() as usize;
            let dt = gap / steps as f64;
            let idx = match plans.iter().position(|p| (p.dt() - dt).abs() <= 1e-9 * dt) {
                Some(i) => i,
                None => {
                    let opts = PlanOptions {
                        dt,
                        carrier: grid.carrier,
                        ..Default::default()
                    };
                    plans.push(PropagatorPlan::new(grid.x.clone(), params, consts, opts)?);
                    plans.len() - 1
                }
            };
            plans[idx].evolve(&mut f, steps)?;
            now = t;
        }
        out.push(f.component_norms().1);
    }
    let lost = 1.0 - f.norm();
    if lost > 1e-6 {
        log::warn!("{lost:e} of the packet was absorbed at the grid ends");
    }
    Ok(out)
}

/// Split-step state of a Gaussian packet at time `t`, started in the ground
/// state at `t = 0`. With `γ > 0` this is the unnormalized no-jump state.
pub fn packet_state_at(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    t: f64,
) -> Result<TwoComponentField> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be non-negative, got {t}")));
    }
    let grid = packet_grid(spec, params, consts, t)?;
    let mut f = TwoComponentField::gaussian(spec, consts, grid.x.clone(), grid.carrier)?;
    if t > 0.0 {
        let steps = (t / grid.dt_max).ceil() as usize;
        let opts = PlanOptions {
            dt: t / steps as f64,
            carrier: grid.carrier,
            ..Default::default()
        };
        PropagatorPlan::new(grid.x, params, consts, opts)?.evolve(&mut f, steps)?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rabi_at_rest;
    use crate::packet::{uniform_grid, GaussianSpec};
    use crate::stationary::eigenpairs;

    fn cs() -> PhysicalConstants<f64> {
        PhysicalConstants::cesium()
    }

    #[test]
    fn expm2_agrees_with_eigendecomposition() {
        let c = cs();
        let params = LaserParams::new(166.5e6, -30e6, 20e6).unwrap();
        let tau = 3e-9;
        let u = internal_propagator(&params, &c, 1.0, tau);
        let (p, m) = eigenpairs(&params, &c, 0.0).unwrap();
        // V diag(e^{−iλτ}) V⁻¹ with V = [[1, 1], [a+, a−]]
        let (ap, am) = (p.vector[1], m.vector[1]);
        let det = am - ap;
        let ep = (C64::new(0.0, -tau) * p.lambda).exp();
        let em = (C64::new(0.0, -tau) * m.lambda).exp();
        let want = [
            [(ep * am - em * ap) / det, (em - ep) / det],
            [ap * am * (ep - em) / det, (em * am - ep * ap) / det],
        ];
        for r in 0..2 {
            for col in 0..2 {
                assert!((u[r][col] - want[r][col]).norm() < 1e-12, "{r}{col}");
            }
        }
    }

    #[test]
    fn expm2_near_exceptional_point() {
        // nilpotent matrix: exp(N) = I + N
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let e = expm2([[z, o], [z, z]]);
        assert!((e[0][0] - o).norm() < 1e-15 && (e[0][1] - o).norm() < 1e-15 && e[1][0].norm() < 1e-15);
    }

    #[test]
    fn rejects_coarse_steps() {
        let c = cs();
        let params = LaserParams::resonant(166.5e6);
        let x = uniform_grid(-1e-7, 1e-10, 2048);
        let t_r = std::f64::consts::TAU / 166.5e6;
        let opts = PlanOptions { dt: 0.05 * t_r, ..PlanOptions::default() };
        assert!(matches!(PropagatorPlan::new(x.clone(), &params, &c, opts), Err(Error::Resolution(_))));
        let opts = PlanOptions { dt: 0.01 * t_r, ..PlanOptions::default() };
        // ħk_N²/2m · dt is far above 2π for 0.1 nm spacing
        assert!(matches!(PropagatorPlan::new(x, &params, &c, opts), Err(Error::Resolution(_))));
    }

    #[test]
    fn internal_dynamics_at_rest_follow_rabi() {
        let c = cs();
        let params = LaserParams::resonant(166.5e6);
        let x = uniform_grid(0.5e-6, 2e-8, 256);
        let spec = GaussianSpec::new(0.4e-6, 3.05e-6, 1e-9);
        let mut f = TwoComponentField::gaussian(&spec, &c, x.clone(), 0.0).unwrap();
        let dt = 0.01 * std::f64::consts::TAU / 166.5e6;
        let plan = PropagatorPlan::new(x, &params, &c, PlanOptions { dt, ..PlanOptions::default() }).unwrap();
        let n0 = f.norm();
        plan.evolve(&mut f, 150).unwrap();
        let want = rabi_at_rest(&params, 150.0 * dt).unwrap();
        let (g, e) = f.component_norms();
        assert!((g / n0 - want[0].norm_sqr()).abs() < 1e-4, "{g} {e}");
        assert!((e / n0 - want[1].norm_sqr()).abs() < 1e-4);
    }

    #[test]
    fn undamped_norm_is_conserved() {
        let c = cs();
        let params = LaserParams::resonant(166.5e6);
        let x = uniform_grid(-3e-6, 1e-8, 600);
        let spec = GaussianSpec::new(0.24e-6, -0.5e-6, 0.9);
        let k0 = spec.mean_wavenumber(&c);
        let mut f = TwoComponentField::gaussian(&spec, &c, x.clone(), k0).unwrap();
        let dt = 0.01 * std::f64::consts::TAU / 166.5e6;
        let opts = PlanOptions { dt, carrier: k0, absorber_fraction: 0.0, ..PlanOptions::default() };
        let plan = PropagatorPlan::new(x, &params, &c, opts).unwrap();
        let n0 = f.norm();
        plan.evolve(&mut f, 10_000).unwrap();
        assert!((f.norm() - n0).abs() < 1e-6);
    }

    #[test]
    fn damped_norm_decreases() {
        let c = cs();
        let gamma = 33.3e6;
        let params = LaserParams::new(5.0 * gamma, 0.0, gamma).unwrap();
        let x = uniform_grid(0.0, 1.6e-8, 256);
        let spec = GaussianSpec::new(0.2e-6, 2e-6, 1e-9);
        let mut f = TwoComponentField::gaussian(&spec, &c, x.clone(), 0.0).unwrap();
        let dt = 0.01 / gamma;
        let plan = PropagatorPlan::new(x, &params, &c, PlanOptions { dt, ..PlanOptions::default() }).unwrap();
        let mut norms = vec![plan.no_jump_norm(&f)];
        let mut excited = vec![f.component_norms().1];
        for _ in 0..200 {
            plan.step_unchecked(&mut f);
            norms.push(plan.no_jump_norm(&f));
            excited.push(f.component_norms().1);
            assert!(norms[norms.len() - 1] < norms[norms.len() - 2]);
        }
        // rate identity −dN/dt = γ∫|ψ2|², integrated over step pairs by Simpson's rule
        for i in (0..198).step_by(2) {
            let loss = norms[i] - norms[i + 2];
            let want = gamma * 2.0 * dt * (excited[i] + 4.0 * excited[i + 1] + excited[i + 2]) / 6.0;
            assert!((loss - want).abs() < 1e-3 * want, "{loss} {want}");
        }
    }

    #[test]
    fn margin_widens_both_sides() {
        let c = cs();
        let params = LaserParams::resonant(166.5e6);
        let spec = GaussianSpec::new(0.12e-6, -1.322e-6, 0.18);
        let a = packet_grid(&spec, &params, &c, 5e-6).unwrap();
        let b = packet_grid_with_margin(&spec, &params, &c, 5e-6, 1e-6).unwrap();
        let span = |g: &PacketGrid| (g.x[0], g.x[g.x.len() - 1]);
        let ((a0, a1), (b0, b1)) = (span(&a), span(&b));
        assert!(b0 < a0 - 1e-6 && b1 > a1 + 1e-6);
        assert_eq!(a.carrier, b.carrier);
        let k_hi = spec.mean_wavenumber(&c) + 8.0 * spec.sigma_k();
        assert!(std::f64::consts::PI / (b.x[1] - b.x[0]) >= 2.2 * k_hi);
        assert!(packet_grid_with_margin(&spec, &params, &c, 5e-6, -1.0).is_err());
    }
}
