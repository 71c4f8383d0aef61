//! The six built-in simulation setups. Parameters and initial data are
//! hard-coded so study and acceptance runs cannot drift from the reference
//! configuration.

use crate::error::Error;
use crate::mesh::{self, DomainTag, Mesh};
use crate::scheme::SchemeParams;
use std::f64::consts::PI;

/// A named simulation setup: domain, coefficients, time horizon, and the
/// default resolution used by the CLI when the config does not override it.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub domain: DomainTag,
    pub default_n: usize,
    pub params: SchemeParams,
    pub t_final: f64,
    pub default_steps: usize,
}

fn params(kappa1: f64, kappa2: f64, gamma: f64, mu: f64, epsilon: f64) -> SchemeParams {
    SchemeParams::new(kappa1, kappa2, gamma, mu, epsilon).expect("preset parameters are valid")
}

/// Look up a preset by name (sim1 .. sim6).
pub fn preset(name: &str) -> Option<Preset> {
    let p = match name {
        // square domain, eps > 0
        "sim1" => Preset {
            name: "sim1",
            domain: DomainTag::UnitSquare,
            default_n: 64,
            params: params(5.0, 2.0, 50.0, 1.0, 1e-3),
            t_final: 0.5,
            default_steps: 200,
        },
        // cube domain, eps > 0
        "sim2" => Preset {
            name: "sim2",
            domain: DomainTag::UnitCube,
            default_n: 8,
            params: params(5.0, 2.0, 50.0, 1.0, 1e-3),
            t_final: 0.5,
            default_steps: 200,
        },
        // slow-coefficient setup for the time-step study; h of about 8e-3
        // corresponds to n = 177 on the structured square grid
        "sim3" => Preset {
            name: "sim3",
            domain: DomainTag::UnitSquare,
            default_n: 177,
            params: params(0.02, 0.04, 0.05, 0.5, 1e-3),
            t_final: 0.5,
            default_steps: 200,
        },
        // sim1 with eps = 0 (plain LLBE scheme)
        "sim4" => Preset {
            name: "sim4",
            domain: DomainTag::UnitSquare,
            default_n: 64,
            params: params(5.0, 2.0, 50.0, 1.0, 0.0),
            t_final: 0.5,
            default_steps: 200,
        },
        // L-shaped domain with the re-entrant corner
        "sim5" => Preset {
            name: "sim5",
            domain: DomainTag::LShape,
            default_n: 64,
            params: params(0.5, 2.0, 50.0, 1.0, 1e-3),
            t_final: 0.5,
            default_steps: 200,
        },
        // Fichera-corner domain
        "sim6" => Preset {
            name: "sim6",
            domain: DomainTag::Fichera,
            default_n: 8,
            params: params(0.5, 2.0, 50.0, 1.0, 1e-3),
            t_final: 0.5,
            default_steps: 200,
        },
        _ => return None,
    };
    Some(p)
}

/// Initial data of a preset.
pub fn preset_initial(name: &str) -> Option<fn([f64; 3]) -> [f64; 3]> {
    match name {
        "sim1" | "sim4" => Some(|p| {
            let (x, y) = (p[0], p[1]);
            [
                (2.0 * PI * x).cos(),
                (2.0 * PI * y).sin(),
                2.0 * (2.0 * PI * x).cos() * (2.0 * PI * y).sin(),
            ]
        }),
        "sim2" => Some(|p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            [
                2.0 * (2.0 * PI * x).cos(),
                (2.0 * PI * y).sin(),
                2.0 * (2.0 * PI * y).cos() * (2.0 * PI * z).sin(),
            ]
        }),
        "sim3" => Some(|p| {
            let (x, y) = (p[0], p[1]);
            let s = |v: f64| v.sin() * v.sin();
            [
                2.0 * s(PI * x) * s(PI * y),
                4.0 * s(2.0 * PI * x) * s(PI * y),
                8.0 * s(PI * x) * s(2.0 * PI * y),
            ]
        }),
        "sim5" => Some(|p| {
            let (x, y) = (p[0], p[1]);
            [2.0 * x * x, 2.0 * y, x * x - 2.0 * y * y]
        }),
        "sim6" => Some(|p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            [2.0 * x * x, 2.0 * z, x * x - 2.0 * y * y]
        }),
        _ => None,
    }
}

/// Build the generator mesh for a domain at subdivision n.
pub fn build_mesh(domain: DomainTag, n: usize) -> Result<Mesh, Error> {
    match domain {
        DomainTag::UnitSquare => mesh::unit_square_mesh(n),
        DomainTag::UnitCube => mesh::unit_cube_mesh(n),
        DomainTag::LShape => mesh::l_shape_mesh(n),
        DomainTag::Fichera => mesh::fichera_mesh(n),
        DomainTag::Interval => Err(Error::InvalidArgument(
            "interval domains are not generated by this build".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_resolve() {
        for name in ["sim1", "sim2", "sim3", "sim4", "sim5", "sim6"] {
            let p = preset(name).unwrap();
            assert_eq!(p.name, name);
            assert!(preset_initial(name).is_some());
            assert!((p.t_final - 0.5).abs() < 1e-15);
        }
        assert!(preset("sim7").is_none());
    }

    #[test]
    fn sim1_parameters() {
        let p = preset("sim1").unwrap();
        assert_eq!(p.params.kappa1, 5.0);
        assert_eq!(p.params.kappa2, 2.0);
        assert_eq!(p.params.gamma, 50.0);
        assert_eq!(p.params.mu, 1.0);
        assert_eq!(p.params.epsilon, 1e-3);
        assert_eq!(p.default_steps, 200);
        // default k = T/N = 2.5e-3
        assert!((p.t_final / p.default_steps as f64 - 2.5e-3).abs() < 1e-18);
    }

    #[test]
    fn sim4_is_sim1_without_regularisation() {
        let s1 = preset("sim1").unwrap();
        let s4 = preset("sim4").unwrap();
        assert_eq!(s4.params.epsilon, 0.0);
        assert_eq!(s1.params.kappa1, s4.params.kappa1);
        assert_eq!(s1.params.gamma, s4.params.gamma);
    }

    #[test]
    fn initial_data_values() {
        let u0 = preset_initial("sim1").unwrap();
        let v = u0([0.0, 0.25, 0.0]);
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!((v[1] - 1.0).abs() < 1e-15);
        assert!((v[2] - 2.0).abs() < 1e-15);

        let u0 = preset_initial("sim3").unwrap();
        let v = u0([0.5, 0.5, 0.0]);
        assert!((v[0] - 2.0).abs() < 1e-12);
        assert!(v[1].abs() < 1e-12);
        assert!(v[2].abs() < 1e-12);

        let u0 = preset_initial("sim5").unwrap();
        let v = u0([-1.0, 0.5, 0.0]);
        assert!((v[0] - 2.0).abs() < 1e-15);
        assert!((v[1] - 1.0).abs() < 1e-15);
        assert!((v[2] - 0.5).abs() < 1e-15);
    }
}
