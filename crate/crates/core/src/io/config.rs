//! TOML run configuration.
//!
//! A config either names a preset (sim1 .. sim6), possibly overriding
//! individual fields, or spells out everything explicitly. Unknown keys are
//! rejected. Initial data is a preset name or a triple of expressions in
//! x, y, z (standard functions and the constant pi are available).
//!
//! ```toml
//! preset = "sim1"
//!
//! [domain]
//! n = 32
//!
//! [output]
//! snapshot_stride = 10
//! vtk = true
//! ```

use crate::error::Error;
use crate::mesh::DomainTag;
use crate::presets;
use crate::scheme::{SchemeParams, TimeGrid};
use crate::sparse::SolverOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    domain: Option<RawDomain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<RawParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<RawTime>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial: Option<RawInitial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<RawSolver>,
    #[serde(skip_serializing_if = "Option::is_none")]
    study: Option<RawStudy>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    #[serde(skip_serializing_if = "Option::is_none")]
    tag: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    #[serde(skip_serializing_if = "Option::is_none")]
    t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expr: Option<[String; 3]>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshot_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vtk: Option<bool>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    restart: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_sequence: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_sequence: Option<Vec<f64>>,
}

/// Where the initial data comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Preset(String),
    Expressions([String; 3]),
}

/// Output controls for the simulate/decay commands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutputConfig {
    pub snapshot_stride: usize,
    pub vtk: bool,
}

/// Study block of a config.
#[derive(Clone, Debug, PartialEq)]
pub enum StudyConfig {
    H { levels: usize },
    K { n_sequence: Vec<usize> },
    Eps { eps_sequence: Vec<f64> },
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub domain: DomainTag,
    pub n: usize,
    pub params: SchemeParams,
    pub grid: TimeGrid,
    pub initial: InitialSpec,
    pub output: OutputConfig,
    pub solver: SolverOptions,
    pub study: Option<StudyConfig>,
}

fn domain_tag_from_str(s: &str) -> Result<DomainTag, Error> {
    match s {
        "unit_square" => Ok(DomainTag::UnitSquare),
        "unit_cube" => Ok(DomainTag::UnitCube),
        "l_shape" => Ok(DomainTag::LShape),
        "fichera" => Ok(DomainTag::Fichera),
        "interval" => Ok(DomainTag::Interval),
        other => Err(Error::Config(format!(
            "domain.tag: unknown domain '{other}' (expected unit_square, unit_cube, l_shape, fichera or interval)"
        ))),
    }
}

fn domain_tag_to_str(tag: DomainTag) -> &'static str {
    match tag {
        DomainTag::UnitSquare => "unit_square",
        DomainTag::UnitCube => "unit_cube",
        DomainTag::LShape => "l_shape",
        DomainTag::Fichera => "fichera",
        DomainTag::Interval => "interval",
    }
}

/// Parse and validate a TOML config document.
pub fn parse_config(text: &str) -> Result<RunConfig, Error> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<RunConfig, Error> {
    let preset = match &raw.preset {
        Some(name) => Some(
            presets::preset(name)
                .ok_or_else(|| Error::Config(format!("preset: unknown preset '{name}'")))?,
        ),
        None => None,
    };

    let d = raw.domain.unwrap_or_default();
    let domain = match (d.tag.as_deref(), &preset) {
        (Some(tag), _) => domain_tag_from_str(tag)?,
        (None, Some(p)) => p.domain,
        (None, None) => return Err(Error::Config("domain.tag is required without a preset".into())),
    };
    let n = match (d.n, &preset) {
        (Some(n), _) => n,
        (None, Some(p)) => p.default_n,
        (None, None) => return Err(Error::Config("domain.n is required without a preset".into())),
    };
    if n == 0 {
        return Err(Error::Config("domain.n must be at least 1".into()));
    }

    let p = raw.params.unwrap_or_default();
    let pick = |field: Option<f64>, fallback: Option<f64>, name: &str| -> Result<f64, Error> {
        field
            .or(fallback)
            .ok_or_else(|| Error::Config(format!("params.{name} is required without a preset")))
    };
    let base = preset.as_ref().map(|p| p.params);
    let params = SchemeParams::new(
        pick(p.kappa1, base.map(|b| b.kappa1), "kappa1")?,
        pick(p.kappa2, base.map(|b| b.kappa2), "kappa2")?,
        pick(p.gamma, base.map(|b| b.gamma), "gamma")?,
        pick(p.mu, base.map(|b| b.mu), "mu")?,
        pick(p.epsilon, base.map(|b| b.epsilon), "epsilon")?,
    )
    .map_err(|e| Error::Config(format!("params: {e}")))?;

    let t = raw.time.unwrap_or_default();
    let t_final = match (t.t_final, &preset) {
        (Some(v), _) => v,
        (None, Some(p)) => p.t_final,
        (None, None) => return Err(Error::Config("time.t_final is required without a preset".into())),
    };
    let num_steps = match (t.num_steps, &preset) {
        (Some(v), _) => v,
        (None, Some(p)) => p.default_steps,
        (None, None) => return Err(Error::Config("time.num_steps is required without a preset".into())),
    };
    let grid = TimeGrid::new(t_final, num_steps).map_err(|e| Error::Config(format!("time: {e}")))?;

    let i = raw.initial.unwrap_or_default();
    let initial = match (i.preset, i.expr) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "initial: give either a preset or expressions, not both".into(),
            ))
        }
        (Some(name), None) => {
            if presets::preset_initial(&name).is_none() {
                return Err(Error::Config(format!("initial.preset: unknown preset '{name}'")));
            }
            InitialSpec::Preset(name)
        }
        (None, Some(expr)) => {
            compile_triple(&expr)?; // fail early on bad expressions
            InitialSpec::Expressions(expr)
        }
        (None, None) => match &raw.preset {
            Some(name) => InitialSpec::Preset(name.clone()),
            None => return Err(Error::Config("initial data is required without a preset".into())),
        },
    };

    let o = raw.output.unwrap_or_default();
    let output = OutputConfig {
        snapshot_stride: o.snapshot_stride.unwrap_or_else(|| (num_steps / 50).max(1)),
        vtk: o.vtk.unwrap_or(true),
    };
    if output.snapshot_stride == 0 {
        return Err(Error::Config("output.snapshot_stride must be at least 1".into()));
    }

    let s = raw.solver.unwrap_or_default();
    let solver = SolverOptions {
        tol: s.tol.unwrap_or(1e-10),
        max_iter: s.max_iter.unwrap_or(10_000),
        restart: s.restart.unwrap_or(100),
    };
    if !(solver.tol > 0.0) {
        return Err(Error::Config("solver.tol must be positive".into()));
    }

    let study = match raw.study {
        None => None,
        Some(st) => {
            let axis = st
                .axis
                .as_deref()
                .ok_or_else(|| Error::Config("study.axis is required in a study block".into()))?;
            Some(match axis {
                "h" => StudyConfig::H {
                    levels: st
                        .levels
                        .ok_or_else(|| Error::Config("study.levels is required for an h-study".into()))?,
                },
                "k" => StudyConfig::K {
                    n_sequence: st.n_sequence.ok_or_else(|| {
                        Error::Config("study.n_sequence is required for a k-study".into())
                    })?,
                },
                "eps" => StudyConfig::Eps {
                    eps_sequence: st.eps_sequence.ok_or_else(|| {
                        Error::Config("study.eps_sequence is required for an eps-study".into())
                    })?,
                },
                other => {
                    return Err(Error::Config(format!(
                        "study.axis: unknown axis '{other}' (expected h, k or eps)"
                    )))
                }
            })
        }
    };

    Ok(RunConfig {
        domain,
        n,
        params,
        grid,
        initial,
        output,
        solver,
        study,
    })
}

fn compile_triple(exprs: &[String; 3]) -> Result<Vec<Box<dyn Fn(f64, f64, f64) -> f64>>, Error> {
    exprs
        .iter()
        .map(|text| {
            let expr: meval::Expr = text
                .parse()
                .map_err(|e| Error::Config(format!("initial.expr: cannot parse '{text}': {e}")))?;
            let f = expr
                .bind3("x", "y", "z")
                .map_err(|e| Error::Config(format!("initial.expr: '{text}': {e}")))?;
            Ok(Box::new(f) as Box<dyn Fn(f64, f64, f64) -> f64>)
        })
        .collect()
}

impl RunConfig {
    /// The initial data as an evaluable field.
    pub fn initial_fn(&self) -> Result<Box<dyn Fn([f64; 3]) -> [f64; 3]>, Error> {
        match &self.initial {
            InitialSpec::Preset(name) => {
                let f = presets::preset_initial(name)
                    .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?;
                Ok(Box::new(f))
            }
            InitialSpec::Expressions(exprs) => {
                let fns = compile_triple(exprs)?;
                let [f0, f1, f2] = <[_; 3]>::try_from(fns).ok().expect("three components");
                Ok(Box::new(move |p: [f64; 3]| {
                    [f0(p[0], p[1], p[2]), f1(p[0], p[1], p[2]), f2(p[0], p[1], p[2])]
                }))
            }
        }
    }

    /// Serialise back to TOML. Parsing the output yields an equal config.
    pub fn to_toml_string(&self) -> String {
        let raw = RawConfig {
            preset: None,
            domain: Some(RawDomain {
                tag: Some(domain_tag_to_str(self.domain).to_string()),
                n: Some(self.n),
            }),
            params: Some(RawParams {
                kappa1: Some(self.params.kappa1),
                kappa2: Some(self.params.kappa2),
                gamma: Some(self.params.gamma),
                mu: Some(self.params.mu),
                epsilon: Some(self.params.epsilon),
            }),
            time: Some(RawTime {
                t_final: Some(self.grid.t_final()),
                num_steps: Some(self.grid.num_steps()),
            }),
            initial: Some(match &self.initial {
                InitialSpec::Preset(name) => RawInitial {
                    preset: Some(name.clone()),
                    expr: None,
                },
                InitialSpec::Expressions(e) => RawInitial {
                    preset: None,
                    expr: Some(e.clone()),
                },
            }),
            output: Some(RawOutput {
                snapshot_stride: Some(self.output.snapshot_stride),
                vtk: Some(self.output.vtk),
            }),
            solver: Some(RawSolver {
                tol: Some(self.solver.tol),
                max_iter: Some(self.solver.max_iter),
                restart: Some(self.solver.restart),
            }),
            study: self.study.as_ref().map(|s| match s {
                StudyConfig::H { levels } => RawStudy {
                    axis: Some("h".into()),
                    levels: Some(*levels),
                    n_sequence: None,
                    eps_sequence: None,
                },
                StudyConfig::K { n_sequence } => RawStudy {
                    axis: Some("k".into()),
                    levels: None,
                    n_sequence: Some(n_sequence.clone()),
                    eps_sequence: None,
                },
                StudyConfig::Eps { eps_sequence } => RawStudy {
                    axis: Some("eps".into()),
                    levels: None,
                    n_sequence: None,
                    eps_sequence: Some(eps_sequence.clone()),
                },
            }),
        };
        toml::to_string_pretty(&raw).expect("config serialises")
    }
}
