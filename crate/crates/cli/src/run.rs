//! Computations behind each subcommand. Every function returns a [`Run`]:
//! the data table plus metadata entries; writing is left to the caller.

use std::f64::consts::TAU;

use anyhow::{anyhow, bail, Context, Result};
use halfspace_rabi::approx::{raman_nath_internal, raman_nath_momentum, semiclassical_p2_series, validity_report};
use halfspace_rabi::gridprop::packet_excited_population;
use halfspace_rabi::mcwf::{conditional_p2_at_rest, ensemble_run, packet_run, EnsembleOptions, TrajectoryEnsemble};
use halfspace_rabi::model::{
    bloch_at_rest, critical_wavenumber, omega_prime, transition_wavenumber_kr, LaserParams, PhysicalConstants,
};
use halfspace_rabi::observables::{
    degree_of_mixing, packet_mixing, reduced_internal_state_from, spatial_visibility, temporal_visibility,
    transient_cutoff,
};
use halfspace_rabi::packet::{exact_populations, EigenExpansion, GaussianSpec, C64};
use halfspace_rabi::stationary::scattering_amplitudes;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{need, Config};
use crate::output::Table;

pub struct Run {
    pub stem: String,
    pub table: Table,
    pub meta: Map<String, Value>,
    /// Further tables written as `<stem>_<suffix>.csv`.
    pub extra: Vec<(String, Table)>,
}

impl Run {
    fn new(stem: impl Into<String>, table: Table) -> Self {
        Run {
            stem: stem.into(),
            table,
            meta: Map::new(),
            extra: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Visibility,
    Mixing,
    Reflection,
    SpatialVisibility,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Visibility => "visibility",
            Quantity::Mixing => "mixing",
            Quantity::Reflection => "reflection",
            Quantity::SpatialVisibility => "spatial_visibility",
        }
    }
}

/// `v_c`, `k_c`, `Ω'`, `T_R` and, when the packet width is known, `v_R`.
pub fn derived_scales(cfg: &Config) -> Result<Map<String, Value>> {
    let c = cfg.consts()?;
    let p = cfg.laser()?;
    let mut m = Map::new();
    let kc = critical_wavenumber(&p, &c);
    let wp = omega_prime(&p);
    m.insert("omega_prime".into(), json!(wp));
    m.insert("k_c".into(), json!(kc));
    m.insert("v_c".into(), json!(c.velocity(kc)));
    m.insert("rabi_period".into(), json!(TAU / wp));
    if let Some(dx) = cfg.packet.delta_x {
        if let Ok(kr) = transition_wavenumber_kr(dx, &p, &c) {
            m.insert("k_R".into(), json!(kr));
            m.insert("v_R".into(), json!(c.velocity(kr)));
        }
    }
    m.insert("recoil_velocity".into(), json!(c.recoil_velocity()));
    Ok(m)
}

fn sampled(start: f64, end: f64, step: f64) -> Vec<f64> {
    if !(end >= start) || !(step > 0.0) {
        return Vec::new();
    }
    let n = ((end - start) / step * (1.0 + 1e-12)).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn sample_step(cfg: &Config, params: &LaserParams<f64>) -> Result<f64> {
    let spp = cfg.numerics.samples_per_period.unwrap_or(40.0);
    if !(spp > 0.0) {
        bail!("numerics.samples_per_period must be positive, got {spp}");
    }
    Ok(TAU / omega_prime(params) / spp)
}

fn x_axis(cfg: &Config) -> Result<Vec<f64>> {
    let n = &cfg.numerics;
    let (a, b) = (need(n.x_min, "numerics.x_min")?, need(n.x_max, "numerics.x_max")?);
    let pts = need(n.x_points, "numerics.x_points")?;
    if !(b > a) || pts < 2 {
        bail!("numerics.x_min < numerics.x_max and numerics.x_points >= 2 are required");
    }
    Ok((0..pts).map(|i| a + (b - a) * i as f64 / (pts - 1) as f64).collect())
}

fn with_omega(params: &LaserParams<f64>, omega: f64) -> Result<LaserParams<f64>> {
    Ok(LaserParams::new(omega, params.detuning, params.gamma)?)
}

fn with_detuning_factor(params: &LaserParams<f64>, f: f64) -> Result<LaserParams<f64>> {
    Ok(LaserParams::new(params.omega_rabi, f * params.omega_rabi, params.gamma)?)
}

/// Short label of a number for column names.
fn label(v: f64) -> String {
    format!("{v}")
}

/// Converts a sweep axis value to a velocity.
fn axis_velocity(
    axis: &str,
    x: f64,
    cfg: &Config,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
) -> Result<f64> {
    Ok(match axis {
        "v" => x,
        "k" => consts.velocity(x),
        "v_over_vc" => x * consts.velocity(critical_wavenumber(params, consts)),
        "v_over_vr" => {
            let dx = need(cfg.packet.delta_x, "packet.delta_x")?;
            x * consts.velocity(transition_wavenumber_kr(dx, params, consts)?)
        }
        other => bail!("unknown sweep.axis `{other}` (expected v, k, v_over_vc or v_over_vr)"),
    })
}

/// Evaluates `f` at every axis point in parallel. A point whose columns
/// fail keeps NaN there and records the errors in the reason column.
fn sweep_rows<F>(table: &mut Table, lead: Vec<Vec<f64>>, f: F)
where
    F: Fn(usize) -> Vec<Result<f64>> + Sync,
{
    let rows: Vec<Vec<Result<f64>>> = (0..lead.len()).into_par_iter().map(&f).collect();
    for (head, vals) in lead.into_iter().zip(rows) {
        let mut row = head;
        let mut why = Vec::new();
        for v in vals {
            match v {
                Ok(x) => row.push(x),
                Err(e) => {
                    row.push(f64::NAN);
                    why.push(format!("{e:#}"));
                }
            }
        }
        table.push_with_reason(row, why.join("; "));
    }
}

fn temporal_visibilities(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    cfg: &Config,
    semiclassical: bool,
) -> Result<(f64, Option<f64>)> {
    let step = sample_step(cfg, params)?;
    let periods = cfg.numerics.periods.unwrap_or(8.0);
    let cut = transient_cutoff(spec);
    let times = sampled(cut, cut + periods * TAU / omega_prime(params), step);
    let exact = packet_excited_population(spec, params, consts, &times)?;
    let ve = temporal_visibility(&times, &exact, cut).value;
    let vs = if semiclassical {
        let sc = semiclassical_p2_series(spec, params, consts, &times, cfg.tolerance())?;
        Some(temporal_visibility(&times, &sc, cut).value)
    } else {
        None
    };
    Ok((ve, vs))
}

fn mixing_at(spec: &GaussianSpec, params: &LaserParams<f64>, consts: &PhysicalConstants<f64>, cfg: &Config) -> Result<f64> {
    let w = cfg.numerics.mixing_widths.unwrap_or(10.0);
    let t = spec.entrance_time() + w * spec.delta_x / spec.v0;
    Ok(packet_mixing(spec, params, consts, t)?)
}

/// `sweep <quantity>` over the configured axis.
pub fn sweep(cfg: &Config, q: Quantity) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let axis = cfg.sweep.axis.clone().unwrap_or_else(|| "v".into());
    let xs = cfg.axis_points()?;
    let factors = cfg.sweep.detuning_factors.clone();
    let mut cols = vec![axis.clone()];
    if axis != "v" {
        cols.push("v".into());
    }
    let lead_len = cols.len();
    let variants: Vec<(String, LaserParams<f64>)> = match &factors {
        Some(fs) => fs
            .iter()
            .map(|&f| Ok((format!("_delta_{}Omega", label(f)), with_detuning_factor(&params, f)?)))
            .collect::<Result<_>>()?,
        None => vec![(String::new(), params)],
    };
    match q {
        Quantity::Visibility => {
            for (s, _) in &variants {
                cols.push(format!("V_t{s}"));
            }
        }
        Quantity::Mixing => {
            for (s, _) in &variants {
                cols.push(format!("mixing{s}"));
            }
        }
        Quantity::Reflection => {
            for (s, _) in &variants {
                cols.push(format!("R1{s}"));
                cols.push(format!("R2_excited{s}"));
            }
        }
        Quantity::SpatialVisibility => {
            cols.push("k".into());
            for (s, _) in &variants {
                cols.push(format!("V_x{s}"));
            }
        }
    }
    let mut table = Table::with_reasons(cols);
    let mut lead = Vec::with_capacity(xs.len());
    let mut vels = Vec::with_capacity(xs.len());
    for &x in &xs {
        let v = axis_velocity(&axis, x, cfg, &params, &consts)?;
        let mut head = vec![x];
        if lead_len == 2 {
            head.push(v);
        }
        lead.push(head);
        vels.push(v);
    }
    sweep_rows(&mut table, lead, |i| {
        let v = vels[i];
        let k = consts.wavenumber(v);
        let mut out = Vec::new();
        if q == Quantity::SpatialVisibility {
            out.push(Ok(k));
        }
        for (_, p) in &variants {
            match q {
                Quantity::Visibility => out.push(
                    cfg.packet(Some(v))
                        .and_then(|spec| Ok(temporal_visibilities(&spec, p, &consts, cfg, false)?.0)),
                ),
                Quantity::Mixing => out.push(cfg.packet(Some(v)).and_then(|spec| mixing_at(&spec, p, &consts, cfg))),
                Quantity::Reflection => match scattering_amplitudes(k, p, &consts, 0.0) {
                    Ok(s) => {
                        let r = s.reflection();
                        out.push(Ok(r.ground));
                        out.push(Ok(r.excited));
                    }
                    Err(e) => {
                        let msg = e.to_string();
                        out.push(Err(anyhow!(msg.clone())));
                        out.push(Err(anyhow!(msg)));
                    }
                },
                Quantity::SpatialVisibility => out.push(spatial_visibility(k, p, &consts).map(|r| r.value).map_err(Into::into)),
            }
        }
        out
    });
    let mut run = Run::new(format!("sweep_{}", q.name()), table);
    run.meta.insert("quantity".into(), json!(q.name()));
    Ok(run)
}

fn ensure_packet_ok(spec: &GaussianSpec, consts: &PhysicalConstants<f64>) -> Result<()> {
    spec.validate(consts).context("packet")?;
    Ok(())
}

/// Excited population from the exact expansion at physical times `times`;
/// negative times give NaN.
fn exact_p2(
    spec: &GaussianSpec,
    params: &LaserParams<f64>,
    consts: &PhysicalConstants<f64>,
    times: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    let first = times.iter().position(|&t| t >= 0.0).unwrap_or(times.len());
    let pops = exact_populations(spec, params, consts, &times[first..], tol)?;
    let mut out = vec![f64::NAN; first];
    out.extend(pops.iter().map(|p| p.excited()));
    Ok(out)
}

fn figure_1(cfg: &Config) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let vels = cfg.velocities()?;
    let step = sample_step(cfg, &params)?;
    let rel = sampled(
        need(cfg.numerics.t_min, "numerics.t_min")?,
        need(cfg.numerics.t_max, "numerics.t_max")?,
        step,
    );
    let mut cols = vec!["t_minus_t0".to_string()];
    let mut curves = Vec::new();
    for &v in &vels {
        cols.push(format!("P2_v{}", label(v)));
        let spec = cfg.packet(Some(v))?;
        ensure_packet_ok(&spec, &consts)?;
        let t0 = spec.entrance_time();
        let times: Vec<f64> = rel.iter().map(|r| r + t0).collect();
        curves.push(exact_p2(&spec, &params, &consts, &times, cfg.tolerance())?);
    }
    let mut table = Table::new(cols);
    for (i, &r) in rel.iter().enumerate() {
        let mut row = vec![r];
        row.extend(curves.iter().map(|c| c[i]));
        table.push(row);
    }
    Ok(Run::new("fig1", table))
}

fn figure_2(cfg: &Config) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let xs = x_axis(cfg)?;
    let mut cols = vec!["x".to_string()];
    let mut curves = Vec::new();
    for v in cfg.velocities()? {
        cols.push(format!("I_v{}", label(v)));
        let spec = cfg.packet(Some(v))?;
        ensure_packet_ok(&spec, &consts)?;
        let range = (xs[0].min(spec.x0 - 4.0 * spec.delta_x), xs[xs.len() - 1]);
        let e = EigenExpansion::converged(&spec, &params, &consts, range, spec.entrance_time(), cfg.tolerance())?;
        curves.push(xs.par_iter().map(|&x| e.energy_shell_intensity(x)).collect::<Vec<_>>());
    }
    let mut table = Table::new(cols);
    for (i, &x) in xs.iter().enumerate() {
        let mut row = vec![x];
        row.extend(curves.iter().map(|c| c[i]));
        table.push(row);
    }
    Ok(Run::new("fig2", table))
}

fn figure_3(cfg: &Config) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let xs = x_axis(cfg)?;
    let spec = cfg.packet(None)?;
    ensure_packet_ok(&spec, &consts)?;
    let t = need(cfg.numerics.time, "numerics.time")?;
    let e = EigenExpansion::converged(&spec, &params, &consts, (xs[0], xs[xs.len() - 1]), t, cfg.tolerance())?;
    let mut table = Table::new(["x", "ground_density", "excited_density"]);
    let vals: Vec<[C64; 2]> = xs.par_iter().map(|&x| e.field_at(t, x)).collect();
    for (x, f) in xs.iter().zip(vals) {
        table.push(vec![*x, f[0].norm_sqr(), f[1].norm_sqr()]);
    }
    Ok(Run::new("fig3", table))
}

fn figure_4(cfg: &Config) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let omegas = need(cfg.sweep.omegas.clone(), "sweep.omegas")?;
    let axis = cfg.sweep.axis.clone().unwrap_or_else(|| "v_over_vr".into());
    let xs = cfg.axis_points()?;
    let mut lead = Vec::new();
    let mut pts = Vec::new();
    for &om in &omegas {
        let p = with_omega(&params, om)?;
        for &x in &xs {
            let v = axis_velocity(&axis, x, cfg, &p, &consts)?;
            lead.push(vec![om, x, v]);
            pts.push((p, v));
        }
    }
    let mut table = Table::with_reasons(["omega".to_string(), axis, "v".into(), "V_exact".into(), "V_semiclassical".into()]);
    sweep_rows(&mut table, lead, |i| {
        let (p, v) = pts[i];
        match cfg
            .packet(Some(v))
            .and_then(|spec| Ok(temporal_visibilities(&spec, &p, &consts, cfg, true)?))
        {
            Ok((ve, vs)) => vec![Ok(ve), Ok(vs.unwrap_or(f64::NAN))],
            Err(e) => {
                let m = format!("{e:#}");
                vec![Err(anyhow!(m.clone())), Err(anyhow!(m))]
            }
        }
    });
    let mut run = Run::new("fig4", table);
    let vr: Vec<Value> = omegas
        .iter()
        .filter_map(|&om| {
            let p = with_omega(&params, om).ok()?;
            let dx = cfg.packet.delta_x?;
            let kr = transition_wavenumber_kr(dx, &p, &consts).ok()?;
            Some(json!({"omega": om, "v_R": consts.velocity(kr)}))
        })
        .collect();
    run.meta.insert("transition_velocities".into(), Value::Array(vr));
    Ok(run)
}

/// Mixing versus velocity, one column per Rabi frequency.
fn mixing_by_omega(cfg: &Config, stem: &str) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let omegas = need(cfg.sweep.omegas.clone(), "sweep.omegas")?;
    let xs = cfg.axis_points()?;
    let axis = cfg.sweep.axis.clone().unwrap_or_else(|| "v".into());
    let mut cols = vec![axis.clone()];
    let variants: Vec<LaserParams<f64>> = omegas.iter().map(|&o| with_omega(&params, o)).collect::<Result<_>>()?;
    for &o in &omegas {
        cols.push(format!("mixing_Omega_{}", label(o)));
    }
    let mut table = Table::with_reasons(cols);
    let lead: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    sweep_rows(&mut table, lead, |i| {
        variants
            .iter()
            .map(|p| {
                let v = axis_velocity(&axis, xs[i], cfg, p, &consts)?;
                mixing_at(&cfg.packet(Some(v))?, p, &consts, cfg)
            })
            .collect()
    });
    let mut run = Run::new(stem, table);
    let vc: Vec<Value> = variants
        .iter()
        .map(|p| json!({"omega": p.omega_rabi, "v_c": consts.velocity(critical_wavenumber(p, &consts))}))
        .collect();
    run.meta.insert("critical_velocities".into(), Value::Array(vc));
    Ok(run)
}

fn rename(mut run: Run, stem: &str) -> Run {
    run.stem = stem.into();
    run
}

fn figure_9(cfg: &Config) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let step = sample_step(cfg, &params)?;
    let t = sampled(
        need(cfg.numerics.t_min, "numerics.t_min")?.max(0.0),
        need(cfg.numerics.t_max, "numerics.t_max")?,
        step,
    );
    let master = bloch_at_rest(&params, &t)?;
    let cond = conditional_p2_at_rest(&params, &consts, &t);
    let mut table = Table::new(["t", "P2_master", "P2_conditional"]);
    for i in 0..t.len() {
        table.push(vec![t[i], master[i], cond[i]]);
    }
    Ok(Run::new("fig9", table))
}

fn mcwf_ensemble(cfg: &Config, record_intensity: bool) -> Result<(TrajectoryEnsemble, f64, Map<String, Value>)> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let spec = cfg.packet(None)?;
    ensure_packet_ok(&spec, &consts)?;
    let m = &cfg.mcwf;
    let t_end = need(m.t_max, "mcwf.t_max")?;
    let step = sample_step(cfg, &params)?;
    let run = packet_run(&spec, &params, &consts, t_end, step, record_intensity)?;
    let ens = EnsembleOptions {
        n_traj: need(m.n_traj, "mcwf.n_traj")?,
        seed_base: need(m.seed, "mcwf.seed")?,
        threads: m.threads,
        chunk: m.chunk.unwrap_or(16),
    };
    let res = ensemble_run(&run.initial, &run.plan, &run.opts, &ens)?;
    if res.aborted > 0 {
        log::warn!("{} of {} trajectories left the grid", res.aborted, res.n_traj);
    }
    let mut meta = Map::new();
    meta.insert(
        "mcwf".into(),
        json!({
            "n_traj": res.n_traj,
            "seed_base": res.seed_base,
            "n_used": res.n_used,
            "aborted": res.aborted,
            "total_jumps": res.total_jumps,
            "t_start": run.t_start,
            "dt": run.plan.dt(),
            "grid_points": run.plan.grid().len(),
            "dx": run.plan.dx(),
            "carrier": run.plan.carrier(),
        }),
    );
    Ok((res, run.t_start, meta))
}

fn mcwf_p2_table(res: &TrajectoryEnsemble, t_start: f64) -> Table {
    let mut table = Table::new(["t", "P2_mcwf", "P2_stderr"]);
    for i in 0..res.times.len() {
        table.push(vec![res.times[i] + t_start, res.p2_mean[i], res.p2_stderr[i]]);
    }
    table
}

fn intensity_table(res: &TrajectoryEnsemble, x_range: Option<(f64, f64)>) -> Table {
    let mut table = Table::new(["x", "gamma_I", "gamma_I_stderr", "gamma_I0"]);
    for i in 0..res.x.len() {
        let x = res.x[i];
        if let Some((a, b)) = x_range {
            if x < a || x > b {
                continue;
            }
        }
        table.push(vec![x, res.gamma_i[i], res.gamma_i_stderr[i], res.gamma_i0[i]]);
    }
    table
}

fn figure_10(cfg: &Config) -> Result<Run> {
    let (res, t0, meta) = mcwf_ensemble(cfg, false)?;
    let mut run = Run::new("fig10", mcwf_p2_table(&res, t0));
    run.meta = meta;
    Ok(run)
}

fn figure_12(cfg: &Config) -> Result<Run> {
    let params = cfg.laser()?;
    let spec = cfg.packet(None)?;
    let (res, t_start, meta) = mcwf_ensemble(cfg, false)?;
    let t_entry = spec.entrance_time();
    let t: Vec<f64> = res.times.iter().map(|t| t + t_start).collect();
    let shifted: Vec<f64> = t.iter().map(|&t| (t - t_entry).max(0.0)).collect();
    let bloch = bloch_at_rest(&params, &shifted)?;
    let mut table = Table::new(["t", "P2_mcwf", "P2_stderr", "P2_bloch_shifted"]);
    for i in 0..t.len() {
        table.push(vec![t[i], res.p2_mean[i], res.p2_stderr[i], bloch[i]]);
    }
    let mut run = Run::new("fig12", table);
    run.meta = meta;
    let cut = transient_cutoff(&spec);
    let vis = temporal_visibility(&t, &res.p2_mean, cut);
    run.meta.insert("visibility".into(), json!({"V_t": vis.value, "transient_cutoff": cut}));
    Ok(run)
}

fn figure_intensity(cfg: &Config, stem: &str) -> Result<Run> {
    let (res, _, meta) = mcwf_ensemble(cfg, true)?;
    let range = match (cfg.numerics.x_min, cfg.numerics.x_max) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    let mut run = Run::new(stem, intensity_table(&res, range));
    run.meta = meta;
    Ok(run)
}

pub fn figure(n: u32, cfg: &Config) -> Result<Run> {
    match n {
        1 => figure_1(cfg),
        2 => figure_2(cfg),
        3 => figure_3(cfg),
        4 => figure_4(cfg),
        5 => Ok(rename(sweep(cfg, Quantity::Mixing)?, "fig5")),
        6 | 7 => {
            let mut run = sweep(cfg, Quantity::Reflection)?;
            // keep |R1|² for Fig. 6 and the excited channel for Fig. 7
            let keep = if n == 6 { "R1" } else { "R2_excited" };
            let t = &run.table;
            let idx: Vec<usize> = (0..t.columns.len())
                .filter(|&i| i == 0 || t.columns[i].starts_with(keep))
                .collect();
            let mut out = Table::with_reasons(idx.iter().map(|&i| t.columns[i].clone()));
            for (r, row) in t.rows.iter().enumerate() {
                let reason = t.reasons.as_ref().map(|v| v[r].clone()).unwrap_or_default();
                out.push_with_reason(idx.iter().map(|&i| row[i]).collect(), reason);
            }
            run.table = out;
            Ok(rename(run, &format!("fig{n}")))
        }
        8 => Ok(rename(sweep(cfg, Quantity::SpatialVisibility)?, "fig8")),
        9 => figure_9(cfg),
        10 => figure_10(cfg),
        11 => mixing_by_omega(cfg, "fig11"),
        12 => figure_12(cfg),
        13 | 14 => figure_intensity(cfg, &format!("fig{n}")),
        _ => bail!("no figure {n}"),
    }
}

/// Stationary scattering state at `packet.v0`.
pub fn stationary(cfg: &Config) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let v = need(cfg.packet.v0, "packet.v0")?;
    let k = consts.wavenumber(v);
    let s = scattering_amplitudes(k, &params, &consts, 0.0)?;
    let xs = x_axis(cfg)?;
    let mut table = Table::new(["x", "re_phi1", "im_phi1", "re_phi2", "im_phi2", "density_ground", "density_excited"]);
    for &x in &xs {
        let [a, b] = s.eigenfunction(x);
        table.push(vec![x, a.re, a.im, b.re, b.im, a.norm_sqr(), b.norm_sqr()]);
    }
    let r = s.reflection();
    let t = s.transmission();
    let mut run = Run::new("stationary", table);
    run.meta.insert(
        "solution".into(),
        json!({
            "k": k,
            "v": v,
            "amplitudes": serde_json::to_value(s)?,
            "reflection_ground": r.ground,
            "reflection_excited": r.excited,
            "transmission": t,
            "flux_defect": 1.0 - r.ground - r.excited - t,
        }),
    );
    Ok(run)
}

/// Exact packet evolution: window populations and mixing versus time.
pub fn packet(cfg: &Config) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let spec = cfg.packet(None)?;
    ensure_packet_ok(&spec, &consts)?;
    let step = sample_step(cfg, &params)?;
    let t = sampled(
        need(cfg.numerics.t_min, "numerics.t_min")?.max(0.0),
        need(cfg.numerics.t_max, "numerics.t_max")?,
        step,
    );
    let pops = exact_populations(&spec, &params, &consts, &t, cfg.tolerance())?;
    let mut table = Table::new([
        "t",
        "P2",
        "ground_left",
        "excited_left",
        "ground_right",
        "excited_right",
        "mixing",
    ]);
    for p in &pops {
        let mix = reduced_internal_state_from(p)
            .map(|r| degree_of_mixing(&r))
            .unwrap_or(f64::NAN);
        table.push(vec![
            p.time,
            p.excited(),
            p.ground_left,
            p.excited_left,
            p.ground_right,
            p.excited_right,
            mix,
        ]);
    }
    let mut run = Run::new("packet", table);
    run.meta.insert("transient_cutoff".into(), json!(transient_cutoff(&spec)));
    Ok(run)
}

/// Quantum-jump ensemble of the configured packet.
pub fn mcwf(cfg: &Config) -> Result<Run> {
    let (res, t_start, meta) = mcwf_ensemble(cfg, true)?;
    let mut run = Run::new("mcwf", mcwf_p2_table(&res, t_start));
    run.meta = meta;
    run.extra.push(("intensity".into(), intensity_table(&res, None)));
    Ok(run)
}

pub fn validity(cfg: &Config) -> Result<(halfspace_rabi::approx::ValidityReport, Map<String, Value>)> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let report = validity_report(&params, &consts, &cfg.validity_options())?;
    Ok((report, Map::new()))
}

/// Raman–Nath internal populations and transverse momentum distributions.
pub fn raman_nath(cfg: &Config) -> Result<Run> {
    let consts = cfg.consts()?;
    let params = cfg.laser()?;
    let r = &cfg.rn;
    let t_max = need(r.t_max, "rn.t_max")?;
    let nt = need(r.t_points, "rn.t_points")?;
    let dy0 = need(r.delta_y0, "rn.delta_y0")?;
    let np = need(r.p_points, "rn.p_points")?;
    if !(dy0 > 0.0) || !(t_max >= 0.0) {
        bail!("rn.delta_y0 must be positive and rn.t_max non-negative");
    }
    let mut table = Table::new(["t", "P1", "P2"]);
    for i in 0..nt {
        let t = if nt > 1 { t_max * i as f64 / (nt - 1) as f64 } else { 0.0 };
        let [a, b] = raman_nath_internal(t, &params);
        table.push(vec![t, a.norm_sqr(), b.norm_sqr()]);
    }
    let ny = 1024;
    let half = 10.0 * dy0;
    let y: Vec<f64> = (0..ny).map(|i| -half + 2.0 * half * i as f64 / ny as f64).collect();
    let norm = (TAU * dy0 * dy0).powf(-0.25);
    let psi0: Vec<C64> = y
        .iter()
        .map(|&yy| C64::new(norm * (-yy * yy / (4.0 * dy0 * dy0)).exp(), 0.0))
        .collect();
    let sp = consts.hbar / (2.0 * dy0);
    let pk = consts.hbar * consts.k_laser;
    let (lo, hi) = (-8.0 * sp, pk + 8.0 * sp);
    let p: Vec<f64> = (0..np)
        .map(|i| if np > 1 { lo + (hi - lo) * i as f64 / (np - 1) as f64 } else { 0.0 })
        .collect();
    let dist = raman_nath_momentum(&y, &psi0, &p, &consts)?;
    let mut mom = Table::new(["p", "ground", "excited"]);
    for i in 0..p.len() {
        mom.push(vec![p[i], dist.ground[i], dist.excited[i]]);
    }
    let mut run = Run::new("rn", table);
    run.extra.push(("momentum".into(), mom));
    run.meta.insert("momentum_shift".into(), json!(pk));
    Ok(run)
}
