//! Named parameter sets. Figure presets carry the caption values of the
//! corresponding plot; numerics that a caption leaves open are chosen here.

use anyhow::{bail, Result};
use halfspace_rabi::model::{PhysicalConstants, CS_GAMMA};

use crate::config::{
    Config, ConstantsSection, LaserSection, McwfSection, NumericsSection, PacketSection, RamanNathSection,
    SweepSection,
};

pub const FIGURES: std::ops::RangeInclusive<u32> = 1..=14;

fn cesium() -> ConstantsSection {
    let c = PhysicalConstants::<f64>::cesium();
    ConstantsSection {
        hbar: Some(c.hbar),
        mass: Some(c.mass),
        k_laser: Some(c.k_laser),
    }
}

fn laser(omega: f64, detuning: f64, gamma: f64) -> LaserSection {
    LaserSection {
        omega_rabi: Some(omega),
        detuning: Some(detuning),
        gamma: Some(gamma),
    }
}

fn packet(delta_x: f64, x0: f64, v0: Option<f64>) -> PacketSection {
    PacketSection {
        delta_x: Some(delta_x),
        x0: Some(x0),
        v0,
        velocities: None,
    }
}

fn sweep(axis: &str, from: f64, to: f64, points: usize, log: bool) -> SweepSection {
    SweepSection {
        axis: Some(axis.into()),
        from: Some(from),
        to: Some(to),
        points: Some(points),
        log: Some(log),
        ..Default::default()
    }
}

fn numerics() -> NumericsSection {
    NumericsSection {
        tolerance: Some(1e-6),
        samples_per_period: Some(40.0),
        ..Default::default()
    }
}

fn base(scenario: &str) -> Config {
    Config {
        scenario: Some(scenario.into()),
        constants: cesium(),
        numerics: numerics(),
        ..Default::default()
    }
}

fn mcwf(n_traj: usize, seed: u64, t_max: f64) -> McwfSection {
    McwfSection {
        n_traj: Some(n_traj),
        seed: Some(seed),
        t_max: Some(t_max),
        threads: None,
        chunk: Some(16),
    }
}

/// What the laser damping of a preset must be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damping {
    Zero,
    Positive,
    Any,
}

pub fn figure_damping(n: u32) -> Damping {
    match n {
        1..=4 => Damping::Zero,
        9..=14 => Damping::Positive,
        _ => Damping::Any,
    }
}

pub fn figure(n: u32) -> Result<Config> {
    let g = CS_GAMMA;
    let mut c = base(&format!("figure{n}"));
    match n {
        1 => {
            c.laser = laser(166.5e6, 0.0, 0.0);
            c.packet = packet(0.24e-6, -1.32e-6, None);
            c.packet.velocities = Some(vec![9.03, 36.13, 49.68]);
            c.numerics.t_min = Some(-0.02e-6);
            c.numerics.t_max = Some(0.4e-6);
        }
        2 => {
            c.laser = laser(166.5e6, 0.0, 0.0);
            c.packet = packet(0.24e-6, -1.32e-6, None);
            c.packet.velocities = Some(vec![0.0090, 9.03]);
            c.numerics.x_min = Some(0.0);
            c.numerics.x_max = Some(3e-6);
            c.numerics.x_points = Some(601);
        }
        3 => {
            c.laser = laser(166.5e6, 0.0, 0.0);
            c.packet = packet(0.2436e-6, -1.32e-6, Some(9.03));
            c.numerics.time = Some(0.5e-6);
            c.numerics.x_min = Some(-4e-6);
            c.numerics.x_max = Some(6e-6);
            c.numerics.x_points = Some(1001);
        }
        4 => {
            c.laser = laser(3.307e6, 0.0, 0.0);
            c.packet = packet(0.2438e-6, -1.32e-6, None);
            c.sweep = sweep("v_over_vr", 0.25, 4.0, 12, true);
            c.sweep.omegas = Some(vec![0.413e6, 0.827e6, 1.654e6, 2.480e6, 3.307e6]);
            c.numerics.periods = Some(6.0);
        }
        5 => {
            c.laser = laser(3.3e6, 0.0, 0.0);
            c.packet = packet(0.2436e-6, -1.34e-6, None);
            c.sweep = sweep("v", 0.005, 2.0, 40, true);
            c.sweep.detuning_factors = Some(vec![0.0, -0.5, -1.0]);
            c.numerics.mixing_widths = Some(10.0);
        }
        6 | 7 => {
            c.laser = laser(166.5e6, 0.0, 0.0);
            c.sweep = sweep("v", 0.01, 10.0, 200, true);
            c.sweep.detuning_factors = Some(if n == 6 {
                vec![-0.25, 0.0, 0.25]
            } else {
                vec![0.25, 0.0, -0.25]
            });
        }
        8 => {
            c.laser = laser(3.307e6, 0.0, 0.0);
            c.sweep = sweep("v", 0.001, 0.2, 200, false);
        }
        9 => {
            c.laser = laser(5.0 * g, 0.0, g);
            c.numerics.t_min = Some(0.0);
            c.numerics.t_max = Some(12.0 / g);
        }
        10 => {
            c.laser = laser(5.0 * g, 0.0, g);
            c.packet = packet(0.2436e-6, -1.322e-6, Some(9.03));
            c.mcwf = mcwf(1000, 10, 0.6e-6);
        }
        11 => {
            c.laser = laser(10.0 * g, 0.0, g);
            c.packet = packet(0.2436e-6, -1.322e-6, None);
            c.sweep = sweep("v", 0.1, 5.0, 30, true);
            c.sweep.omegas = Some(vec![10.0 * g, 5.0 * g]);
            c.numerics.mixing_widths = Some(1.0);
        }
        12 => {
            c.laser = laser(5.0 * g, 0.0, g);
            c.packet = packet(0.12e-6, -1.322e-6, Some(3.61));
            c.mcwf = mcwf(10_000, 12, 0.85e-6);
        }
        13 => {
            c.laser = laser(5.0 * g, 0.0, g);
            c.packet = packet(0.12e-6, -1.322e-6, Some(3.613));
            c.mcwf = mcwf(160, 13, 1.1e-6);
            c.numerics.x_min = Some(-0.5e-6);
            c.numerics.x_max = Some(2e-6);
        }
        14 => {
            c.laser = laser(5.0 * g, 0.0, g);
            c.packet = packet(0.12e-6, -1.322e-6, Some(0.18));
            c.mcwf = mcwf(40, 14, 11e-6);
            c.numerics.x_min = Some(-0.2e-6);
            c.numerics.x_max = Some(0.5e-6);
        }
        _ => bail!("no figure {n}; figures are numbered 1 to 14"),
    }
    Ok(c)
}

/// Defaults of the non-figure subcommands.
pub fn command(name: &str) -> Config {
    let g = CS_GAMMA;
    let mut c = base(name);
    match name {
        "stationary" => {
            c.laser = laser(166.5e6, 0.0, 0.0);
            c.packet.v0 = Some(9.03);
            c.numerics.x_min = Some(-2e-6);
            c.numerics.x_max = Some(2e-6);
            c.numerics.x_points = Some(401);
        }
        "packet" => {
            c.laser = laser(166.5e6, 0.0, 0.0);
            c.packet = packet(0.24e-6, -1.32e-6, Some(9.03));
            c.numerics.t_min = Some(0.0);
            c.numerics.t_max = Some(0.5e-6);
        }
        "mcwf" => {
            c.laser = laser(5.0 * g, 0.0, g);
            c.packet = packet(0.12e-6, -1.322e-6, Some(3.61));
            c.mcwf = mcwf(1000, 0, 0.85e-6);
        }
        "validity" => {
            c.laser = laser(5.0 * g, 0.0, g);
        }
        "rn" => {
            let kl = PhysicalConstants::<f64>::cesium().k_laser;
            c.laser = laser(166.5e6, 0.0, 0.0);
            c.rn = RamanNathSection {
                delta_y0: Some(0.05 / kl),
                t_max: Some(0.2e-6),
                t_points: Some(201),
                p_points: Some(401),
            };
        }
        _ => {
            // sweeps
            c.laser = laser(166.5e6, 0.0, 0.0);
            c.packet = packet(0.24e-6, -1.32e-6, None);
            c.sweep = sweep("v", 0.01, 10.0, 50, true);
            c.numerics.periods = Some(8.0);
            c.numerics.mixing_widths = Some(10.0);
        }
    }
    c
}
