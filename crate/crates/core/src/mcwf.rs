//! Quantum-jump Monte Carlo unravelling of the one-dimensional master
//! equation with dipole-distributed recoil.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gridprop::{expm2, packet_grid_with_margin, PlanOptions, PropagatorPlan};
use crate::model::{critical_wavenumber, LaserParams, PhysicalConstants};
use crate::packet::{EigenExpansion, GaussianSpec, TwoComponentField, C64};
use crate::stationary::internal_matrix;

/// CDF of the recoil direction cosine, `(u³ + 3u + 4)/8` on `[−1, 1]`.
pub fn recoil_cdf(u: f64) -> f64 {
    let u = u.clamp(-1.0, 1.0);
    (u * u * u + 3.0 * u + 4.0) / 8.0
}

/// Inverse of [`recoil_cdf`]: Cardano's root of `u³ + 3u + 4 − 8r = 0`
/// followed by one Newton step.
pub fn recoil_quantile(r: f64) -> f64 {
    let q = 4.0 - 8.0 * r;
    let disc = (0.25 * q * q + 1.0).sqrt();
    let mut u = (-0.5 * q + disc).cbrt() + (-0.5 * q - disc).cbrt();
    u -= (u * u * u + 3.0 * u + q) / (3.0 * u * u + 3.0);
    u.clamp(-1.0, 1.0)
}

/// Direction cosine with density `(3/8)(1 + u²)`.
pub fn sample_recoil<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    recoil_quantile(rng.gen::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub time: f64,
    pub recoil_u: f64,
    /// `∫|ψ⁽²⁾|²` of the unnormalized state just before the jump.
    pub excited_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McwfOptions {
    pub t_max: f64,
    /// Spacing of the P2 and I(x) samples; a whole number of steps.
    pub sample_interval: f64,
    /// Bisection levels for the jump time; 4 locates it to dt/16.
    pub bisection_depth: u32,
    /// Layer population (relative) above which a trajectory is abandoned.
    pub layer_abort: f64,
    /// Accumulate the time-integrated excited density.
    pub record_intensity: bool,
}

impl Default for McwfOptions {
    fn default() -> Self {
        McwfOptions {
            t_max: 0.0,
            sample_interval: 0.0,
            bisection_depth: 4,
            layer_abort: 1e-3,
            record_intensity: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub jumps: Vec<JumpRecord>,
    /// Normalized excited population at each sample time.
    pub p2: Vec<f64>,
    /// `∫dt |ψ⁽²⁾(x,t)|²` of the normalized state, per grid point (1/m · s).
    pub intensity: Vec<f64>,
    pub aborted: bool,
}

/// Step schedule shared by every trajectory of a run.
struct Schedule {
    steps_per_sample: usize,
    samples: usize,
    /// Plans with steps dt/2, dt/4, … dt/2^{depth+1}.
    sub: Vec<PropagatorPlan>,
}

impl Schedule {
    fn new(plan: &PropagatorPlan, opts: &McwfOptions) -> Result<Self> {
        if !(opts.t_max > 0.0) {
            return Err(invalid("t_max", "must be positive"));
        }
        if !(opts.sample_interval > 0.0) {
            return Err(invalid("sample_interval", "must be positive"));
        }
        let ratio = opts.sample_interval / plan.dt();
        let steps_per_sample = ratio.round() as usize;
        if steps_per_sample == 0 || (ratio - steps_per_sample as f64).abs() > 1e-6 * ratio {
            return Err(invalid(
                "sample_interval",
                format!("must be a whole number of steps (dt = {:e} s)", plan.dt()),
            ));
        }
        let samples = (opts.t_max / opts.sample_interval + 1e-9).floor() as usize;
        let sub = (1..=opts.bisection_depth + 1)
            .map(|l| plan.with_dt(plan.dt() / f64::from(1u32 << l)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Schedule {
            steps_per_sample,
            samples,
            sub,
        })
    }

    fn times(&self, interval: f64) -> Vec<f64> {
        (0..=self.samples).map(|j| j as f64 * interval).collect()
    }
}

fn jump<R: Rng + ?Sized>(
    f: &mut TwoComponentField,
    k_laser: f64,
    rng: &mut R,
    time: f64,
) -> JumpRecord {
    let u = sample_recoil(rng);
    let excited_norm = f.component_norms().1;
    let s = 1.0 / excited_norm.sqrt();
    // e^{−i k_L u x} shifts the momentum amplitude by ħ k_L u
    for i in 0..f.len() {
        f.psi1[i] = f.psi2[i] * C64::from_polar(s, -k_laser * u * f.x[i]);
        f.psi2[i] = C64::new(0.0, 0.0);
    }
    JumpRecord {
        time,
        recoil_u: u,
        excited_norm,
    }
}

/// Runs one quantum-jump trajectory from `initial` (which must live on the
/// plan's grid and be normalized).
pub fn run_trajectory<R: Rng + ?Sized>(
    initial: &TwoComponentField,
    plan: &PropagatorPlan,
    opts: &McwfOptions,
    rng: &mut R,
) -> Result<TrajectoryResult> {
    let sched = Schedule::new(plan, opts)?;
    run_scheduled(initial, plan, opts, &sched, rng)
}

fn draw_threshold<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

fn run_scheduled<R: Rng + ?Sized>(
    initial: &TwoComponentField,
    plan: &PropagatorPlan,
    opts: &McwfOptions,
    sched: &Schedule,
    rng: &mut R,
) -> Result<TrajectoryResult> {
    if plan.params().gamma <= 0.0 {
        return Err(invalid("gamma", "quantum jumps need a positive decay rate"));
    }
    plan.check(initial)?;
    let n0 = initial.norm();
    if (n0 - 1.0).abs() > 1e-6 {
        return Err(invalid("initial", format!("state must be normalized, norm = {n0}")));
    }
    let k_laser = plan.consts().k_laser;
    let dt = plan.dt();
    let depth = opts.bisection_depth as usize;
    let mut f = initial.clone();
    f.time = 0.0;
    let mut r = draw_threshold(rng);
    let mut jumps = Vec::new();
    let mut p2 = Vec::with_capacity(sched.samples + 1);
    let npts = f.len();
    let mut intensity = vec![0.0; if opts.record_intensity { npts } else { 0 }];
    let mut aborted = false;

    let record = |f: &TwoComponentField, weight: f64, p2: &mut Vec<f64>, intensity: &mut [f64]| {
        let (g, e) = f.component_norms();
        let total = g + e;
        p2.push(e / total);
        if !intensity.is_empty() {
            let w = weight / total;
            for (acc, z) in intensity.iter_mut().zip(&f.psi2) {
                *acc += w * z.norm_sqr();
            }
        }
    };
    let interval = sched.steps_per_sample as f64 * dt;
    record(&f, 0.5 * interval, &mut p2, &mut intensity);

    'outer: for sample in 1..=sched.samples {
        for _ in 0..sched.steps_per_sample {
            let t_start = f.time;
            let saved = f.clone();
            plan.step_unchecked(&mut f);
            if plan.no_jump_norm(&f) > r {
                continue;
            }
            // bisect inside [t_start, t_start + dt] down to dt/2^depth
            let mut lo = saved;
            let mut units = 0usize; // elapsed in units of dt/2^{depth+1}
            for (level, sub) in sched.sub.iter().take(depth).enumerate() {
                let mut trial = lo.clone();
                sub.step_unchecked(&mut trial);
                if plan.no_jump_norm(&trial) > r {
                    lo = trial;
                    units += 1 << (depth - level);
                }
            }
            // midpoint of the final bracket
            sched.sub[depth].step_unchecked(&mut lo);
            units += 1;
            f = lo;
            let t = f.time;
                        jumps.push(jump(&mut f, k_laser, rng, t));
            r = draw_threshold(rng);
            // finish the step with binary sub-steps
            let total_units = 1usize << (depth + 1);
            let mut rest = total_units - units;
            for (level, sub) in sched.sub.iter().enumerate() {
                let size = 1usize << (depth - level);
                if rest >= size {
                    sub.step_unchecked(&mut f);
                    rest -= size;
                    if plan.no_jump_norm(&f) <= r {
                        let t = f.time;
                        jumps.push(jump(&mut f, k_laser, rng, t));
                        r = draw_threshold(rng);
                    }
                }
            }
            f.time = t_start + dt;
        }
        let norm = f.norm();
        if plan.layer_norm(&f) > opts.layer_abort * norm {
            aborted = true;
            break 'outer;
        }
        let w = if sample == sched.samples { 0.5 } else { 1.0 } * interval;
        record(&f, w, &mut p2, &mut intensity);
    }
    Ok(TrajectoryResult {
        jumps,
        p2,
        intensity,
        aborted,
    })
}

/// Settings of an ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleOptions {
    pub n_traj: usize,
    pub seed_base: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Trajectories per task; results are folded in index order.
    pub chunk: usize,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            n_traj: 1000,
            seed_base: 0,
            threads: None,
            chunk: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryEnsemble {
    pub n_traj: usize,
    pub seed_base: u64,
    /// Trajectories that completed (aborted ones are excluded from averages).
    pub n_used: usize,
    pub aborted: usize,
    pub times: Vec<f64>,
    pub p2_mean: Vec<f64>,
    pub p2_stderr: Vec<f64>,
    pub x: Vec<f64>,
    /// Mean photon count density `γ I(x)` (1/m).
    pub gamma_i: Vec<f64>,
    pub gamma_i_stderr: Vec<f64>,
    /// First-photon density `γ I₀(x)` from the no-jump evolution.
    pub gamma_i0: Vec<f64>,
    pub total_jumps: usize,
    /// Time of the first jump of every trajectory that jumped, in index order.
    pub first_jump_times: Vec<f64>,
}

/// Per-trajectory RNG: ChaCha8 keyed by the base seed, one stream per index.
pub fn trajectory_rng(seed_base: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_base);
    rng.set_stream(index);
    rng
}

#[derive(Clone)]
struct Partial {
    used: usize,
    aborted: usize,
    p2: Vec<f64>,
    p2_sq: Vec<f64>,
    i: Vec<f64>,
    i_sq: Vec<f64>,
    jumps: usize,
    first: Vec<f64>,
}

impl Partial {
    fn new(samples: usize, npts: usize) -> Self {
        Partial {
            used: 0,
            aborted: 0,
            p2: vec![0.0; samples],
            p2_sq: vec![0.0; samples],
            i: vec![0.0; npts],
            i_sq: vec![0.0; npts],
            jumps: 0,
            first: Vec::new(),
        }
    }

    fn add(&mut self, t: &TrajectoryResult) {
        if let Some(j) = t.jumps.first() {
            self.first.push(j.time);
        }
        self.jumps += t.jumps.len();
        if t.aborted {
            self.aborted += 1;
            return;
        }
        self.used += 1;
        for (k, v) in t.p2.iter().enumerate() {
            self.p2[k] += v;
            self.p2_sq[k] += v * v;
        }
        for (k, v) in t.intensity.iter().enumerate() {
            self.i[k] += v;
            self.i_sq[k] += v * v;
        }
    }

    fn merge(&mut self, o: Partial) {
        self.used += o.used;
        self.aborted += o.aborted;
        self.jumps += o.jumps;
        self.first.extend(o.first);
        for (a, b) in self.p2.iter_mut().zip(o.p2) {
            *a += b;
        }
        for (a, b) in self.p2_sq.iter_mut().zip(o.p2_sq) {
            *a += b;
        }
        for (a, b) in self.i.iter_mut().zip(o.i) {
            *a += b;
        }
        for (a, b) in self.i_sq.iter_mut().zip(o.i_sq) {
            *a += b;
        }
    }
}

fn mean_and_stderr(sum: &[f64], sum_sq: &[f64], n: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    sum.iter()
        .zip(sum_sq)
        .map(|(s, q)| {
            if n == 0 {
                return (f64::NAN, f64::NAN);
            }
            let m = s / nf;
            let var = if n > 1 { ((q / nf - m * m) * nf / (nf - 1.0)).max(0.0) } else { 0.0 };
            (m * scale, (var / nf).sqrt() * scale)
        })
        .unzip()
}

/// Averages `n_traj` trajectories. Results depend only on
/// `(seed_base, n_traj, chunk)`, never on the number of threads.
pub fn ensemble_run(
    initial: &TwoComponentField,
    plan: &PropagatorPlan,
    opts: &McwfOptions,
    ens: &EnsembleOptions,
) -> Result<TrajectoryEnsemble> {
    if ens.n_traj == 0 {
        return Err(invalid("n_traj", "need at least one trajectory"));
    }
    let sched = Schedule::new(plan, opts)?;
    let times = sched.times(sched.steps_per_sample as f64 * plan.dt());
    let npts = if opts.record_intensity { initial.len() } else { 0 };
    let chunk = ens.chunk.max(1);
    let n_chunks = ens.n_traj.div_ceil(chunk);
    let work = || -> Result<Vec<Partial>> {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut part = Partial::new(times.len(), npts);
                for idx in c * chunk..((c + 1) * chunk).min(ens.n_traj) {
                    let mut rng = trajectory_rng(ens.seed_base, idx as u64);
                    let t = run_scheduled(initial, plan, opts, &sched, &mut rng)?;
                    if t.aborted {
                        log::warn!("trajectory {idx} left the grid and was discarded");
                    }
                    let mut t = t;
                    t.p2.resize(times.len(), f64::NAN);
                    part.add(&t);
                }
                Ok(part)
            })
            .collect()
    };
    let parts = match ens.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| invalid("threads", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let mut total = Partial::new(times.len(), npts);
    for p in parts {
        total.merge(p);
    }
    let gamma = plan.params().gamma;
    let (p2_mean, p2_stderr) = mean_and_stderr(&total.p2, &total.p2_sq, total.used, 1.0);
    let (gamma_i, gamma_i_stderr) = mean_and_stderr(&total.i, &total.i_sq, total.used, gamma);
    let gamma_i0 = if opts.record_intensity {
        first_photon_intensity(initial, plan, opts)?
    } else {
        Vec::new()
    };
    if total.used == 0 {
        return Err(Error::Resolution("every trajectory left the grid".into()));
    }
    Ok(TrajectoryEnsemble {
        n_traj: ens.n_traj,
        seed_base: ens.seed_base,
        n_used: total.used,
        aborted: total.aborted,
        times,
        p2_mean,
        p2_stderr,
        x: initial.x.clone(),
        gamma_i,
        gamma_i_stderr,
        gamma_i0,
        total_jumps: total.jumps,
        first_jump_times: total.first,
    })
}

/// `γ I₀(x) = γ ∫dt |ψ⁽²⁾(x,t)|²` of the unnormalized no-jump state, by the
/// trapezoid rule over the sampling times.
pub fn first_photon_intensity(
    initial: &TwoComponentField,
    plan: &PropagatorPlan,
    opts: &McwfOptions,
) -> Result<Vec<f64>> {
    let sched = Schedule::new(plan, opts)?;
    plan.check(initial)?;
    let interval = sched.steps_per_sample as f64 * plan.dt();
    let gamma = plan.params().gamma;
    let mut f = initial.clone();
    let mut acc: Vec<f64> = f.psi2.iter().map(|z| 0.5 * interval * z.norm_sqr()).collect();
    for sample in 1..=sched.samples {
        plan.evolve(&mut f, sched.steps_per_sample)?;
        let w = if sample == sched.samples { 0.5 } else { 1.0 } * interval;
        for (a, z) in acc.iter_mut().zip(&f.psi2) {
            *a += w * z.norm_sqr();
        }
    }
    Ok(acc.into_iter().map(|v| gamma * v).collect())
}

/// No-jump survival `P₀(t) = ‖Ψ_c(t)‖²` (excluding the absorbing layer) at
/// the sampling times.
pub fn no_jump_survival(initial: &TwoComponentField, plan: &PropagatorPlan, opts: &McwfOptions) -> Result<Vec<f64>> {
    let sched = Schedule::new(plan, opts)?;
    plan.check(initial)?;
    let mut f = initial.clone();
    let mut out = vec![plan.no_jump_norm(&f)];
    for _ in 1..=sched.samples {
        plan.evolve(&mut f, sched.steps_per_sample)?;
        out.push(plan.no_jump_norm(&f));
    }
    Ok(out)
}

/// Initial state, propagator and options of a packet run.
#[derive(Debug, Clone)]
pub struct PacketRun {
    pub initial: TwoComponentField,
    pub plan: PropagatorPlan,
    pub opts: McwfOptions,
    /// Physical time of the run's `t = 0`.
    pub t_start: f64,
}

/// Sets up a quantum-jump run of `spec` up to the physical time `t_end`.
///
/// The packet is started eight widths before entry (or at `t = 0` if that
/// is earlier) from the undamped expansion, which is exact while the packet
/// is still outside the laser. The step divides `sample_interval`.
pub fn packet_run(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    t_end: f64,
    sample_interval: f64,
    record_intensity: bool,
) -> Result<PacketRun> {
    if !(sample_interval > 0.0) {
        return Err(invalid("sample_interval", "must be positive"));
    }
    let t_start = (spec.entrance_time() - 8.0 * spec.delta_x / spec.v0).max(0.0);
    if !(t_end > t_start) {
        return Err(invalid("t_end", format!("must exceed the start time {t_start:e} s")));
    }
    // a jump leaves the atom within ~1/k_c of the edge, from where it
    // spreads at speeds up to a few v_c
    let margin = if params.gamma > 0.0 {
        1.5 * consts.velocity(critical_wavenumber(params, consts)) * (t_end - t_start)
    } else {
        0.0
    };
    let grid = packet_grid_with_margin(spec, params, consts, t_end, margin)?;
    let steps = (sample_interval / grid.dt_max).ceil().max(1.0);
    let mut initial = if t_start > 0.0 {
        let xr = (grid.x[0], grid.x[grid.x.len() - 1]);
        let free = EigenExpansion::converged(spec, &params.undamped(), consts, xr, t_start, 1e-7)?;
        free.field_on_grid(t_start, &grid.x, grid.carrier)?
    } else {
        TwoComponentField::gaussian(spec, consts, grid.x.clone(), grid.carrier)?
    };
    initial.time = 0.0;
    let plan = PropagatorPlan::new(
        grid.x,
        params,
        consts,
        PlanOptions {
            dt: sample_interval / steps,
            carrier: grid.carrier,
            ..Default::default()
        },
    )?;
    let opts = McwfOptions {
        t_max: t_end - t_start,
        sample_interval,
        record_intensity,
        ..Default::default()
    };
    Ok(PacketRun {
        initial,
        plan,
        opts,
        t_start,
    })
}

/// Normalized excited population of the no-jump (first-photon) state of an
/// atom at rest, started in the ground state.
pub fn conditional_p2_at_rest(
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    times: &[f64],
) -> Vec<f64> {
    let m = internal_matrix(params, consts, 0.0);
    times
        .iter()
        .map(|&t| {
            let s = C64::new(0.0, -t);
            let u = expm2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]);
            let (g, e) = (u[0][0].norm_sqr(), u[1][0].norm_sqr());
            e / (g + e)
        })
        .collect()
}
