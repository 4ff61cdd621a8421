//! Bundled example channels with known or independently derived capacities.

use nalgebra::Complex;

use crate::channel::CqChannel;
use crate::error::{Error, Result};
use crate::operator::{C64, DensityMatrix};

/// A named example channel. `known_capacity` is the closed-form value in
/// nats where one exists.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub channel: CqChannel,
    pub known_capacity: Option<f64>,
}

pub const PRESET_NAMES: &[&str] = &[
    "orthogonal-pure",
    "identical-states",
    "bsc",
    "two-pure-overlap",
    "trine",
];

fn binary_entropy_nats(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

fn real_pure(amplitudes: &[f64]) -> DensityMatrix {
    let amps: Vec<C64> = amplitudes.iter().map(|&x| Complex::new(x, 0.0)).collect();
    DensityMatrix::from_pure(&amps).expect("nonzero state vector")
}

/// Looks up a preset by name. `param` is `p` for `bsc` (default 0.1) and
/// `theta` for `two-pure-overlap` (default pi/6); other presets ignore it.
pub fn preset(name: &str, param: Option<f64>) -> Result<Preset> {
    match name {
        "orthogonal-pure" => Ok(Preset {
            name: name.into(),
            description: "two orthogonal pure qubit states; capacity ln 2".into(),
            channel: CqChannel::new(vec![
                ("x0".into(), real_pure(&[1.0, 0.0])),
                ("x1".into(), real_pure(&[0.0, 1.0])),
            ])?,
            known_capacity: Some(std::f64::consts::LN_2),
        }),
        "identical-states" => {
            let s = DensityMatrix::from_diagonal(&[0.65, 0.35])?;
            Ok(Preset {
                name: name.into(),
                description: "two identical states; capacity 0".into(),
                channel: CqChannel::new(vec![("x0".into(), s.clone()), ("x1".into(), s)])?,
                known_capacity: Some(0.0),
            })
        }
        "bsc" => {
            let p = param.unwrap_or(0.1);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "bsc flip probability must lie in [0,1], got {p}"
                )));
            }
            Ok(Preset {
                name: name.into(),
                description: format!(
                    "binary symmetric channel embedded in commuting qubit states (p = {p}); \
                     capacity ln 2 - h(p)"
                ),
                channel: CqChannel::new(vec![
                    ("x0".into(), DensityMatrix::from_diagonal(&[1.0 - p, p])?),
                    ("x1".into(), DensityMatrix::from_diagonal(&[p, 1.0 - p])?),
                ])?,
                known_capacity: Some(std::f64::consts::LN_2 - binary_entropy_nats(p)),
            })
        }
        "two-pure-overlap" => {
            let theta = param.unwrap_or(std::f64::consts::FRAC_PI_6);
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
                return Err(Error::InvalidParameter(format!(
                    "two-pure-overlap angle must lie in [0, pi/2], got {theta}"
                )));
            }
            // Two pure states with inner product sin(theta); the optimal
            // input is uniform and the capacity is h((1 + sin theta)/2).
            // At theta = 0 the states are orthogonal, at theta = pi/2
            // identical.
            let beta = (std::f64::consts::FRAC_PI_2 - theta) / 2.0;
            Ok(Preset {
                name: name.into(),
                description: format!(
                    "two pure qubit states with overlap sin(theta), theta = {theta}; \
                     capacity h((1 + sin theta)/2)"
                ),
                channel: CqChannel::new(vec![
                    ("x0".into(), real_pure(&[beta.cos(), beta.sin()])),
                    ("x1".into(), real_pure(&[beta.cos(), -beta.sin()])),
                ])?,
                known_capacity: Some(binary_entropy_nats((1.0 + theta.sin()) / 2.0)),
            })
        }
        "trine" => {
            // Three pure states at 120 degrees on the Bloch equator. The
            // uniform input averages to I/2, so the capacity is ln 2.
            let state = |bloch_angle: f64| {
                let half = bloch_angle / 2.0;
                real_pure(&[half.cos(), half.sin()])
            };
            let third = 2.0 * std::f64::consts::PI / 3.0;
            Ok(Preset {
                name: name.into(),
                description: "three symmetric pure qubit states (trine); capacity ln 2".into(),
                channel: CqChannel::new(vec![
                    ("x0".into(), state(0.0)),
                    ("x1".into(), state(third)),
                    ("x2".into(), state(2.0 * third)),
                ])?,
                known_capacity: Some(std::f64::consts::LN_2),
            })
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown preset `{other}` (available: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}
