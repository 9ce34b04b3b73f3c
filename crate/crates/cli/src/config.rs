//! Experiment configuration: one JSON document with a flat namespace per
//! section. Every field is optional so that a file only has to name what it
//! changes; presets fill in the rest.

use std::path::Path;

use anyhow::{bail, Context, Result};
use halfspace_rabi::approx::ValidityOptions;
use halfspace_rabi::model::{LaserParams, PhysicalConstants};
use halfspace_rabi::packet::GaussianSpec;
use serde::{Deserialize, Serialize};

macro_rules! section {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fm])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            /// Fields set in `other` replace ours.
            pub fn overlay(&mut self, other: &Self) {
                $(
                    if other.$field.is_some() {
                        self.$field = other.$field.clone();
                    }
                )*
            }
        }
    };
}

section!(
    /// Laser parameters in rad/s.
    LaserSection {
        omega_rabi: f64,
        detuning: f64,
        gamma: f64,
    }
);

section!(ConstantsSection {
    hbar: f64,
    /// kg
    mass: f64,
    /// 1/m
    k_laser: f64,
});

section!(
    /// Initial minimum-uncertainty Gaussian, SI units.
    PacketSection {
        delta_x: f64,
        x0: f64,
        v0: f64,
        /// Mean velocities of multi-curve figures; replaces `v0`.
        velocities: Vec<f64>,
    }
);

section!(
    /// Grid, sampling and quadrature overrides.
    NumericsSection {
        /// Relative tolerance of quadratures and expansions.
        tolerance: f64,
        /// Time samples per Rabi period.
        samples_per_period: f64,
        /// Rabi periods recorded after the entrance transient.
        periods: f64,
        t_min: f64,
        t_max: f64,
        x_min: f64,
        x_max: f64,
        x_points: usize,
        /// Snapshot time of density profiles (s).
        time: f64,
        /// Mixing is evaluated at `t0 + mixing_widths·Δx/v`.
        mixing_widths: f64,
    }
);

section!(McwfSection {
    n_traj: usize,
    seed: u64,
    /// Physical end time (s).
    t_max: f64,
    threads: usize,
    chunk: usize,
});

section!(
    /// Axis of a sweep. `axis` is one of `v`, `k`, `v_over_vc`, `v_over_vr`.
    SweepSection {
        axis: String,
        from: f64,
        to: f64,
        points: usize,
        log: bool,
        /// Detunings as multiples of Ω; one output column each.
        detuning_factors: Vec<f64>,
        /// Rabi frequencies (rad/s); one curve each.
        omegas: Vec<f64>,
    }
);

section!(ValiditySection {
    /// Time between kicks (s); defaults to 2/γ.
    kick_interval: f64,
    threshold: f64,
    initial_kl_dy: f64,
});

section!(
    /// Raman–Nath run: transverse Gaussian of width `delta_y0`.
    RamanNathSection {
        delta_y0: f64,
        t_max: f64,
        t_points: usize,
        p_points: usize,
    }
);

section!(OutputSection { dir: String });

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default)]
    pub laser: LaserSection,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub packet: PacketSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub mcwf: McwfSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub validity: ValiditySection,
    #[serde(default)]
    pub rn: RamanNathSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Run metadata written next to the data; ignored when read back.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut c: Config = serde_json::from_str(text)?;
        c.meta = None;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn overlay(&mut self, o: &Config) {
        if o.scenario.is_some() {
            self.scenario = o.scenario.clone();
        }
        self.laser.overlay(&o.laser);
        self.constants.overlay(&o.constants);
        self.packet.overlay(&o.packet);
        self.numerics.overlay(&o.numerics);
        self.mcwf.overlay(&o.mcwf);
        self.sweep.overlay(&o.sweep);
        self.validity.overlay(&o.validity);
        self.rn.overlay(&o.rn);
        self.output.overlay(&o.output);
    }

    pub fn consts(&self) -> Result<PhysicalConstants<f64>> {
        let c = &self.constants;
        PhysicalConstants::new(
            need(c.hbar, "constants.hbar")?,
            need(c.mass, "constants.mass")?,
            need(c.k_laser, "constants.k_laser")?,
        )
        .context("constants")
    }

    pub fn laser(&self) -> Result<LaserParams<f64>> {
        let l = &self.laser;
        LaserParams::new(
            need(l.omega_rabi, "laser.omega_rabi")?,
            need(l.detuning, "laser.detuning")?,
            need(l.gamma, "laser.gamma")?,
        )
        .context("laser")
    }

    /// Packet with mean velocity `v`, or `packet.v0` when `v` is `None`.
    pub fn packet(&self, v: Option<f64>) -> Result<GaussianSpec> {
        let p = &self.packet;
        let v0 = match v {
            Some(v) => v,
            None => need(p.v0, "packet.v0")?,
        };
        let delta_x = need(p.delta_x, "packet.delta_x")?;
        if !(delta_x > 0.0) {
            bail!("packet.delta_x must be positive, got {delta_x}");
        }
        Ok(GaussianSpec::new(delta_x, need(p.x0, "packet.x0")?, v0))
    }

    pub fn velocities(&self) -> Result<Vec<f64>> {
        match (&self.packet.velocities, self.packet.v0) {
            (Some(v), _) => Ok(v.clone()),
            (None, Some(v)) => Ok(vec![v]),
            (None, None) => bail!("missing key packet.velocities (or packet.v0)"),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.numerics.tolerance.unwrap_or(1e-6)
    }

    pub fn validity_options(&self) -> ValidityOptions {
        let d = ValidityOptions::default();
        let v = &self.validity;
        ValidityOptions {
            kick_interval: v.kick_interval.or(d.kick_interval),
            threshold: v.threshold.unwrap_or(d.threshold),
            initial_kl_dy: v.initial_kl_dy.unwrap_or(d.initial_kl_dy),
        }
    }

    /// Points of the sweep axis in the axis' own unit.
    pub fn axis_points(&self) -> Result<Vec<f64>> {
        let s = &self.sweep;
        let points = need(s.points, "sweep.points")?;
        if points == 0 {
            return Ok(Vec::new());
        }
        let (a, b) = (need(s.from, "sweep.from")?, need(s.to, "sweep.to")?);
        if !(a.is_finite() && b.is_finite()) {
            bail!("sweep.from and sweep.to must be finite");
        }
        if points == 1 {
            return Ok(vec![a]);
        }
        let log = s.log.unwrap_or(false);
        if log && !(a > 0.0 && b > 0.0) {
            bail!("sweep.log needs positive sweep.from and sweep.to");
        }
        let n = (points - 1) as f64;
        Ok((0..points)
            .map(|i| {
                let f = i as f64 / n;
                if i == 0 {
                    a
                } else if i == points - 1 {
                    b
                } else if log {
                    (a.ln() + f * (b.ln() - a.ln())).exp()
                } else {
                    a + f * (b - a)
                }
            })
            .collect())
    }
}

pub fn need<T: Clone>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| anyhow::anyhow!("missing key {key}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::from_json(r#"{"laser": {"omega": 1.0}}"#).unwrap_err();
        assert!(format!("{err:#}").contains("omega"), "{err:#}");
        assert!(Config::from_json(r#"{"lazer": {}}"#).is_err());
    }

    #[test]
    fn meta_is_accepted_and_dropped() {
        let c = Config::from_json(r#"{"meta": {"runtime_s": 3}, "laser": {"gamma": 0.0}}"#).unwrap();
        assert!(c.meta.is_none());
        assert_eq!(c.laser.gamma, Some(0.0));
    }

    #[test]
    fn overlay_keeps_unset_fields() {
        let mut base = Config::default();
        base.laser.omega_rabi = Some(1.0);
        base.laser.gamma = Some(2.0);
        let mut top = Config::default();
        top.laser.gamma = Some(3.0);
        base.overlay(&top);
        assert_eq!(base.laser.omega_rabi, Some(1.0));
        assert_eq!(base.laser.gamma, Some(3.0));
    }

    #[test]
    fn axis_spacing() {
        let mut c = Config::default();
        c.sweep = SweepSection {
            from: Some(0.01),
            to: Some(10.0),
            points: Some(4),
            log: Some(true),
            ..Default::default()
        };
        let p = c.axis_points().unwrap();
        for (a, b) in p.iter().zip([0.01, 0.1, 1.0, 10.0]) {
            assert!((a - b).abs() < 1e-12 * b);
        }
        c.sweep.points = Some(0);
        assert!(c.axis_points().unwrap().is_empty());
    }

    #[test]
    fn missing_key_is_named() {
        let err = Config::default().laser().unwrap_err();
        assert!(err.to_string().contains("laser.omega_rabi"));
    }
}
