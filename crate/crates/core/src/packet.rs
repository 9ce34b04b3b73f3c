//! Gaussian wave packets and their exact evolution as a superposition of
//! stationary scattering states.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{critical_wavenumber, LaserParams, PhysicalConstants};
use crate::num::exp_integral_with;
use crate::quadrature::{panel_edges, CompositeRule};
use crate::stationary::{excited_channel_threshold, scattering_amplitudes, ScatteringSolution};

pub type C64 = Complex<f64>;

/// Minimum-uncertainty Gaussian for the centre of mass, in the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    /// Position spread Δx at t = 0 (m).
    pub delta_x: f64,
    /// Mean position ⟨x⟩ at t = 0 (m).
    pub x0: f64,
    /// Mean velocity ⟨v⟩ (m/s).
    pub v0: f64,
}

impl GaussianSpec {
    pub fn new(delta_x: f64, x0: f64, v0: f64) -> Self {
        GaussianSpec { delta_x, x0, v0 }
    }

    pub fn mean_wavenumber(&self, consts: &PhysicalConstants<f64>) -> f64 {
        consts.wavenumber(self.v0)
    }

    /// Momentum-space spread `1/(2Δx)`.
    pub fn sigma_k(&self) -> f64 {
        0.5 / self.delta_x
    }

    /// `⟨v⟩ / (ħ/(2mΔx))`: mean momentum in units of its spread.
    pub fn momentum_ratio(&self, consts: &PhysicalConstants<f64>) -> f64 {
        self.mean_wavenumber(consts) / self.sigma_k()
    }

    /// Mean entrance time `t₀ = −⟨x⟩/⟨v⟩`.
    pub fn entrance_time(&self) -> f64 {
        -self.x0 / self.v0
    }

    /// Free-flight spread `Δx(t)`.
    pub fn width_at(&self, t: f64, consts: &PhysicalConstants<f64>) -> f64 {
        let tau = consts.hbar * t / (2.0 * consts.mass * self.delta_x * self.delta_x);
        self.delta_x * (1.0 + tau * tau).sqrt()
    }

    pub fn validate(&self, consts: &PhysicalConstants<f64>) -> Result<()> {
        if !(self.delta_x > 0.0) || !self.delta_x.is_finite() {
            return Err(invalid("delta_x", format!("must be positive, got {}", self.delta_x)));
        }
        if !self.x0.is_finite() {
            return Err(invalid("x0", "must be finite"));
        }
        if !(self.v0 > 0.0) || !self.v0.is_finite() {
            return Err(invalid("v0", format!("must be positive, got {}", self.v0)));
        }
        let ratio = self.momentum_ratio(consts);
        if ratio < 4.0 {
            return Err(invalid(
                "v0",
                format!("mean momentum is only {ratio:.2} momentum spreads; negative momenta are not negligible"),
            ));
        }
        if ratio < 6.0 {
            log::warn!("mean momentum is {ratio:.2} spreads; truncation at k = 0 drops a visible tail");
        }
        Ok(())
    }

    /// `ψ̃(k) = (2Δx²/π)^{1/4} e^{−(k−k₀)²Δx²} e^{−ikx₀}`.
    pub fn amplitude(&self, k: f64, consts: &PhysicalConstants<f64>) -> C64 {
        let dx2 = self.delta_x * self.delta_x;
        let k0 = self.mean_wavenumber(consts);
        let n = (2.0 * dx2 / std::f64::consts::PI).powf(0.25);
        C64::from_polar(n * (-(k - k0) * (k - k0) * dx2).exp(), -k * self.x0)
    }

    /// Free Gaussian in position space at `t = 0`.
    pub fn position_amplitude(&self, x: f64, consts: &PhysicalConstants<f64>) -> C64 {
        let dx2 = self.delta_x * self.delta_x;
        let n = (2.0 * std::f64::consts::PI * dx2).powf(-0.25);
        let u = x - self.x0;
        C64::from_polar(n * (-u * u / (4.0 * dx2)).exp(), self.mean_wavenumber(consts) * u)
    }
}

/// Incident amplitude ψ̃(k) on a positive-k quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitude {
    pub k_nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub psi_tilde: Vec<C64>,
}

impl SpectralAmplitude {
    pub fn len(&self) -> usize {
        self.k_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_nodes.is_empty()
    }

    /// `Σ w |ψ̃|²`
    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.psi_tilde)
            .map(|(w, a)| w * a.norm_sqr())
            .sum()
    }

    /// `Σ w k |ψ̃|²`
    pub fn mean_k(&self) -> f64 {
        self.k_nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.psi_tilde)
            .map(|((k, w), a)| k * w * a.norm_sqr())
            .sum()
    }
}

/// Controls the positive-k quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumOptions {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Half-width of the k window in units of σ_k.
    pub sigma_window: f64,
    /// Largest phase change of `e^{i(kx − ħk²t/2m)}` across one panel (rad).
    pub max_phase_per_panel: f64,
    /// Largest |x − ⟨x⟩| at which the superposition must be faithful (m).
    pub x_reach: f64,
    /// Latest time at which the superposition is evaluated (s).
    pub t_max: f64,
    /// Panel multiplier, doubled by convergence checks.
    pub refinement: usize,
    /// Graded panel levels around branch points.
    pub grading: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            order: 16,
            sigma_window: 8.0,
            max_phase_per_panel: 8.0,
            x_reach: 0.0,
            t_max: 0.0,
            refinement: 1,
            grading: 6,
        }
    }
}

/// Analytic momentum representation of a Gaussian packet with a window
/// sized for its own extent.
pub fn gaussian_spectrum(spec: &GaussianSpec, consts: &PhysicalConstants<f64>) -> Result<SpectralAmplitude> {
    gaussian_spectrum_with(spec, consts, &[], &SpectrumOptions::default())
}

/// Gaussian spectrum on a composite rule with panel edges at `breakpoints`.
pub fn gaussian_spectrum_with(
    spec: &GaussianSpec,
    consts: &PhysicalConstants<f64>,
    breakpoints: &[f64],
    opts: &SpectrumOptions,
) -> Result<SpectralAmplitude> {
    spec.validate(consts)?;
    if opts.order == 0 || opts.refinement == 0 {
        return Err(invalid("order", "quadrature order and refinement must be positive"));
    }
    let k0 = spec.mean_wavenumber(consts);
    let sk = spec.sigma_k();
    let a = (k0 - opts.sigma_window * sk).max(1e-6 * sk);
    let b = k0 + opts.sigma_window * sk;
    // bound on |d/dk| of the phase kx − ħk²t/2m − kx₀ over the window
    let slope = opts.x_reach.max(6.0 * spec.delta_x) + spec.x0.abs() + consts.hbar_over_m() * b * opts.t_max;
    let by_phase = ((b - a) * slope / opts.max_phase_per_panel).ceil() as usize;
    let by_shape = ((b - a) / sk).ceil() as usize;
    let panels = by_phase.max(by_shape).max(1) * opts.refinement;
    let edges = panel_edges(a, b, panels, breakpoints, opts.grading);
    let rule = CompositeRule::<f64>::from_edges(&edges, opts.order);
    let psi_tilde = rule.nodes.iter().map(|&k| spec.amplitude(k, consts)).collect();
    Ok(SpectralAmplitude {
        k_nodes: rule.nodes,
        weights: rule.weights,
        psi_tilde,
    })
}

/// Wavenumbers where the scattering amplitudes have square-root kinks.
pub fn branch_points(params: &LaserParams<f64>, consts: &PhysicalConstants<f64>) -> Vec<f64> {
    let mut bps = Vec::new();
    if params.gamma == 0.0 {
        bps.push(critical_wavenumber(params, consts));
        if let Some(kq) = excited_channel_threshold(params, consts) {
            bps.push(kq);
        }
    }
    bps
}

/// Two-component wavefunction on a uniform grid.
///
/// With a nonzero `carrier` the stored arrays are `e^{−i k_c x} ψ(x)`, which
/// lets a coarse grid represent a fast packet; the modulus is unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoComponentField {
    pub x: Vec<f64>,
    pub psi1: Vec<C64>,
    pub psi2: Vec<C64>,
    pub time: f64,
    pub carrier: f64,
}

impl TwoComponentField {
    pub fn new(x: Vec<f64>, psi1: Vec<C64>, psi2: Vec<C64>, time: f64) -> Result<Self> {
        if x.len() < 2 || psi1.len() != x.len() || psi2.len() != x.len() {
            return Err(Error::GridMismatch(format!(
                "grid of {} points with components of {} and {}",
                x.len(),
                psi1.len(),
                psi2.len()
            )));
        }
        let dx = x[1] - x[0];
        if !(dx > 0.0) {
            return Err(Error::GridMismatch("grid must be increasing".into()));
        }
        let span = x[x.len() - 1] - x[0];
        if ((span / (x.len() - 1) as f64) - dx).abs() > 1e-9 * dx {
            return Err(Error::GridMismatch("grid must be uniform".into()));
        }
        Ok(TwoComponentField {
            x,
            psi1,
            psi2,
            time,
            carrier: 0.0,
        })
    }

    /// Ground-state Gaussian sampled on `x` at `t = 0`, stored relative to `carrier`.
    pub fn gaussian(
        spec: &GaussianSpec,
        consts: &PhysicalConstants<f64>,
        x: Vec<f64>,
        carrier: f64,
    ) -> Result<Self> {
        let psi1 = x
            .iter()
            .map(|&xi| spec.position_amplitude(xi, consts) * C64::from_polar(1.0, -carrier * xi))
            .collect();
        let psi2 = vec![C64::new(0.0, 0.0); x.len()];
        let mut f = Self::new(x, psi1, psi2, 0.0)?;
        f.carrier = carrier;
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// `(∫|ψ1|², ∫|ψ2|²)`
    pub fn component_norms(&self) -> (f64, f64) {
        let dx = self.dx();
        let n1: f64 = self.psi1.iter().map(|z| z.norm_sqr()).sum();
        let n2: f64 = self.psi2.iter().map(|z| z.norm_sqr()).sum();
        (n1 * dx, n2 * dx)
    }

    pub fn norm(&self) -> f64 {
        let (a, b) = self.component_norms();
        a + b
    }

    /// Physical amplitudes at grid index `i`, undoing the carrier.
    pub fn physical(&self, i: usize) -> [C64; 2] {
        let ph = C64::from_polar(1.0, self.carrier * self.x[i]);
        [self.psi1[i] * ph, self.psi2[i] * ph]
    }

    /// Re-expresses the stored arrays relative to a new carrier wavenumber.
    pub fn set_carrier(&mut self, carrier: f64) {
        let shift = self.carrier - carrier;
        if shift != 0.0 {
            for ((x, a), b) in self.x.iter().zip(&mut self.psi1).zip(&mut self.psi2) {
                let ph = C64::from_polar(1.0, shift * x);
                *a *= ph;
                *b *= ph;
            }
        }
        self.carrier = carrier;
    }

    pub fn scale(&mut self, s: f64) {
        for z in self.psi1.iter_mut().chain(self.psi2.iter_mut()) {
            *z *= s;
        }
    }

    /// `(∫|Δψ1|² + ∫|Δψ2|²)^{1/2}` in physical amplitudes.
    pub fn l2_distance(&self, other: &TwoComponentField) -> Result<f64> {
        if self.len() != other.len() || (self.x[0] - other.x[0]).abs() > 1e-9 * self.dx() {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        let mut acc = 0.0;
        for i in 0..self.len() {
            let (a, b) = (self.physical(i), other.physical(i));
            acc += (a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr();
        }
        Ok((acc * self.dx()).sqrt())
    }
}

/// Uniform grid of `n` points starting at `x_min` with spacing `dx`.
pub fn uniform_grid(x_min: f64, dx: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| x_min + dx * i as f64).collect()
}

/// Squared norm of the field: the no-emission probability for the
/// conditional dynamics.
pub fn survival_probability(field: &TwoComponentField) -> f64 {
    field.norm()
}

/// `Π(t) = −dP₀/dt` by centred differences (one-sided at the ends).
pub fn emission_density(times: &[f64], p0: &[f64]) -> Vec<f64> {
    let n = times.len().min(p0.len());
    (0..n)
        .map(|i| {
            if n < 2 {
                return 0.0;
            }
            let (l, r) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            -(p0[r] - p0[l]) / (times[r] - times[l])
        })
        .collect()
}

/// Time-evolved packet as a quadrature sum over scattering states,
/// `Ψ(x,t) = Σ w e^{−iħk²t/2m} Φ_k(x) ψ̃(k)`.
#[derive(Debug, Clone)]
pub struct EigenExpansion {
    pub spectrum: SpectralAmplitude,
    pub solutions: Vec<ScatteringSolution<f64>>,
    pub params: LaserParams<f64>,
    pub consts: PhysicalConstants<f64>,
}

/// Time-independent overlap matrices on the windows `[−left, 0]` and `[0, right]`.
#[derive(Debug, Clone)]
pub struct WindowGram {
    pub left: f64,
    pub right: f64,
    n: usize,
    ground_left: Vec<C64>,
    excited_left: Vec<C64>,
    ground_right: Vec<C64>,
    excited_right: Vec<C64>,
    coherence_right: Vec<C64>,
}

/// Populations of the evolved packet on the two sides of the laser edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowPopulations {
    pub time: f64,
    pub ground_left: f64,
    pub excited_left: f64,
    pub ground_right: f64,
    pub excited_right: f64,
    /// `∫₀ conj(ψ1) ψ2 dx`
    pub coherence_right: C64,
}

impl WindowPopulations {
    pub fn excited(&self) -> f64 {
        self.excited_left + self.excited_right
    }

    pub fn norm(&self) -> f64 {
        self.ground_left + self.excited_left + self.ground_right + self.excited_right
    }

    pub fn in_laser(&self) -> f64 {
        self.ground_right + self.excited_right
    }
}

impl EigenExpansion {
    pub fn new(
        spectrum: SpectralAmplitude,
        params: &LaserParams<f64>,
        consts: &PhysicalConstants<f64>,
    ) -> Result<Self> {
        let solutions = spectrum
            .k_nodes
            .par_iter()
            .map(|&k| scattering_amplitudes(k, params, consts, 0.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(EigenExpansion {
            spectrum,
            solutions,
            params: *params,
            consts: *consts,
        })
    }

    /// Builds the expansion for `spec` resolved on `[x_min, x_max]` up to
    /// `t_max`, doubling the panel count until field samples agree to `tol`
    /// relative to their peak.
    pub fn converged(
        spec: &GaussianSpec,
        params: &LaserParams<f64>,
        consts: &PhysicalConstants<f64>,
        x_range: (f64, f64),
        t_max: f64,
        tol: f64,
    ) -> Result<Self> {
        let reach = (x_range.0 - spec.x0).abs().max((x_range.1 - spec.x0).abs());
        let bps = branch_points(params, consts);
        let build = |refinement| -> Result<Self> {
            let opts = SpectrumOptions {
                x_reach: reach,
                t_max,
                refinement,
                ..SpectrumOptions::default()
            };
            Self::new(gaussian_spectrum_with(spec, consts, &bps, &opts)?, params, consts)
        };
        let probe_x: Vec<f64> = (0..97)
            .map(|i| x_range.0 + (x_range.1 - x_range.0) * i as f64 / 96.0)
            .collect();
        let probe_t: Vec<f64> = (0..5).map(|i| t_max * i as f64 / 4.0).collect();
        let sample = |e: &Self| -> Vec<C64> {
            probe_t
                .iter()
                .flat_map(|&t| {
                    let c = e.coefficients(t);
                    probe_x
                        .iter()
                        .flat_map(|&x| e.field_with(&c, x))
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        let mut coarse = build(1)?;
        let mut coarse_s = sample(&coarse);
        let mut change = f64::INFINITY;
        for r in [2usize, 4] {
            let fine = build(r)?;
            let fine_s = sample(&fine);
            let peak = fine_s.iter().map(|z| z.norm()).fold(0.0, f64::max);
            change = coarse_s
                .iter()
                .zip(&fine_s)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / peak.max(f64::MIN_POSITIVE);
            if change <= tol {
                return Ok(coarse);
            }
            coarse = fine;
            coarse_s = fine_s;
        }
        Err(Error::QuadratureNotConverged { change, tolerance: tol })
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Quadrature coefficients `w ψ̃(k) e^{−iħk²t/2m}`.
    pub fn coefficients(&self, t: f64) -> Vec<C64> {
        let hm = 0.5 * self.consts.hbar_over_m();
        let s = &self.spectrum;
        s.k_nodes
            .iter()
            .zip(&s.weights)
            .zip(&s.psi_tilde)
            .map(|((&k, &w), &a)| a * w * C64::from_polar(1.0, -hm * k * k * t))
            .collect()
    }

    fn field_with(&self, coeffs: &[C64], x: f64) -> [C64; 2] {
        let mut acc = [C64::new(0.0, 0.0); 2];
        for (c, sol) in coeffs.iter().zip(&self.solutions) {
            let phi = sol.eigenfunction(x);
            acc[0] += c * phi[0];
            acc[1] += c * phi[1];
        }
        acc
    }

    pub fn field_at(&self, t: f64, x: f64) -> [C64; 2] {
        self.field_with(&self.coefficients(t), x)
    }

    /// Field on `x` at time `t`, stored relative to `carrier`.
    pub fn field_on_grid(&self, t: f64, x: &[f64], carrier: f64) -> Result<TwoComponentField> {
        let c = self.coefficients(t);
        let vals: Vec<[C64; 2]> = x
            .par_iter()
            .map(|&xi| {
                let v = self.field_with(&c, xi);
                let ph = C64::from_polar(1.0, -carrier * xi);
                [v[0] * ph, v[1] * ph]
            })
            .collect();
        let (psi1, psi2) = vals.into_iter().map(|v| (v[0], v[1])).unzip();
        let mut f = TwoComponentField::new(x.to_vec(), psi1, psi2, t)?;
        f.carrier = carrier;
        Ok(f)
    }

    /// Overlap matrices of the scattering states over `[−left, 0]` and `[0, right]`.
    pub fn gram(&self, left: f64, right: f64) -> WindowGram {
        let n = self.len();
        let sols = &self.solutions;
        // Endpoint exponentials e^{iκx} per node and term.
        struct Terms {
            // left ground (+k, −k), left excited (−q), right (k+, k−)
            lg: [(C64, C64); 2],
            le: (C64, C64),
            r1: [(C64, C64); 2],
            r2: [(C64, C64); 2],
        }
        let terms: Vec<Terms> = sols
            .iter()
            .map(|s| {
                let (lg, le) = s.left_terms();
                let r = s.right_terms();
                Terms { lg, le, r1: r[0], r2: r[1] }
            })
            .collect();
        let inv2pi = 1.0 / std::f64::consts::TAU;
        let overlap = |a: &[(C64, C64)], b: &[(C64, C64)], lo: f64, hi: f64| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for &(ca, ka) in a {
                for &(cb, kb) in b {
                    let s = kb - ka.conj();
                    let i = C64::new(0.0, 1.0);
                    let ehi = (i * s * hi).exp();
                    let elo = (i * s * lo).exp();
                    acc += ca.conj() * cb * exp_integral_with(s, lo, hi, ehi, elo);
                }
            }
            acc * inv2pi
        };
        let mut g = WindowGram {
            left,
            right,
            n,
            ground_left: vec![C64::new(0.0, 0.0); n * n],
            excited_left: vec![C64::new(0.0, 0.0); n * n],
            ground_right: vec![C64::new(0.0, 0.0); n * n],
            excited_right: vec![C64::new(0.0, 0.0); n * n],
            coherence_right: vec![C64::new(0.0, 0.0); n * n],
        };
        let rows: Vec<[Vec<C64>; 5]> = (0..n)
            .into_par_iter()
            .map(|a| {
                let ta = &terms[a];
                let mut out: [Vec<C64>; 5] = Default::default();
                for o in out.iter_mut() {
                    o.reserve(n);
                }
                for tb in &terms {
                    out[0].push(overlap(&ta.lg, &tb.lg, -left, 0.0));
                    out[1].push(overlap(&[ta.le], &[tb.le], -left, 0.0));
                    out[2].push(overlap(&ta.r1, &tb.r1, 0.0, right));
                    out[3].push(overlap(&ta.r2, &tb.r2, 0.0, right));
                    out[4].push(overlap(&ta.r1, &tb.r2, 0.0, right));
                }
                out
            })
            .collect();
        for (a, row) in rows.into_iter().enumerate() {
            let r = a * n..(a + 1) * n;
            g.ground_left[r.clone()].copy_from_slice(&row[0]);
            g.excited_left[r.clone()].copy_from_slice(&row[1]);
            g.ground_right[r.clone()].copy_from_slice(&row[2]);
            g.excited_right[r.clone()].copy_from_slice(&row[3]);
            g.coherence_right[r].copy_from_slice(&row[4]);
        }
        g
    }

    /// Window populations at each time, exact for the quadrature superposition.
    pub fn populations(&self, gram: &WindowGram, times: &[f64]) -> Vec<WindowPopulations> {
        assert_eq!(gram.n, self.len(), "gram built for a different expansion");
        times
            .par_iter()
            .map(|&t| {
                let c = self.coefficients(t);
                let form = |m: &[C64]| -> C64 {
                    let mut acc = C64::new(0.0, 0.0);
                    for (a, row) in m.chunks_exact(gram.n).enumerate() {
                        let mut s = C64::new(0.0, 0.0);
                        for (g, cb) in row.iter().zip(&c) {
                            s += g * cb;
                        }
                        acc += c[a].conj() * s;
                    }
                    acc
                };
                WindowPopulations {
                    time: t,
                    ground_left: form(&gram.ground_left).re,
                    excited_left: form(&gram.excited_left).re,
                    ground_right: form(&gram.ground_right).re,
                    excited_right: form(&gram.excited_right).re,
                    coherence_right: form(&gram.coherence_right),
                }
            })
            .collect()
    }

    /// Time-integrated excited density `∫dt |ψ⁽²⁾(x,t)|²` over all times,
    /// evaluated on the energy shell:
    /// `(2πm/ħ) Σ w |ψ̃(k)|² |φ⁽²⁾_k(x)|² / k`.
    pub fn energy_shell_intensity(&self, x: f64) -> f64 {
        let pref = std::f64::consts::TAU / self.consts.hbar_over_m();
        let s = &self.spectrum;
        self.solutions
            .iter()
            .zip(s.k_nodes.iter().zip(&s.weights).zip(&s.psi_tilde))
            .map(|(sol, ((&k, &w), a))| w * a.norm_sqr() * sol.eigenfunction(x)[1].norm_sqr() / k)
            .sum::<f64>()
            * pref
    }
}

/// Field at time `t` on `x_grid`, with the quadrature checked by node doubling.
pub fn evolve_eigenexpansion(
    spec: &GaussianSpec,
    t: f64,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    x_grid: &[f64],
    tol: f64,
) -> Result<TwoComponentField> {
    if x_grid.len() < 2 {
        return Err(Error::GridMismatch("grid needs at least two points".into()));
    }
    let range = (x_grid[0], x_grid[x_grid.len() - 1]);
    EigenExpansion::converged(spec, params, consts, range, t, tol)?.field_on_grid(t, x_grid, 0.0)
}

/// Window populations of `spec` at the non-decreasing `times`, from an
/// expansion converged over everything the packet can reach by the last
/// time (twelve widths beyond the classical extent, including reflection).
pub fn exact_populations(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    times: &[f64],
    tol: f64,
) -> Result<Vec<WindowPopulations>> {
    let Some(&t_end) = times.last() else {
        return Ok(Vec::new());
    };
    let w = spec.width_at(t_end, consts);
    let travel = spec.v0 * t_end;
    let right = (spec.x0 + travel).max(0.0) + 12.0 * w;
    let left = spec.x0.abs().max(travel - spec.x0.abs()) + 12.0 * w;
    let e = EigenExpansion::converged(spec, params, consts, (-left, right), t_end, tol)?;
    let g = e.gram(left, right);
    Ok(e.populations(&g, times))
}
