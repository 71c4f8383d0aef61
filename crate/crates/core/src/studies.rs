//! Extrapolated convergence studies. The exact solution is unknown, so
//! errors are differences between runs at adjacent resolutions:
//!
//! - h-studies compare nested mesh levels at a fixed time grid, with the
//!   coarse solution prolonged (exactly, P1 nesting) to the finer mesh;
//! - k-studies compare runs with N and 2N steps on one mesh at the shared
//!   coarse time nodes, the only times where both are defined without
//!   interpolation;
//! - eps-studies compare regularised runs against the eps = 0 reference on
//!   one mesh and time grid.
//!
//! The error per level is the maximum over the shared step indices
//! (including step 0) of the L2 / H1 / Linf norms of the difference,
//! measured on the finer mesh. The observed order between levels i, i+1 is
//! log2(e_i / e_{i+1}); the summary is the median of the last two ratios.

use crate::assembly::{assemble_mass, assemble_stiffness, NodalField};
use crate::diagnostics::{norm_linf, NormEvaluator};
use crate::error::Error;
use crate::mesh::{refine_uniform, Mesh};
use crate::scheme::{run_recorded, SchemeParams, TimeGrid};
use crate::sparse::SolverOptions;

/// Which parameter a study varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyAxis {
    H,
    K,
    Eps,
}

impl StudyAxis {
    pub fn label(&self) -> &'static str {
        match self {
            StudyAxis::H => "h",
            StudyAxis::K => "k",
            StudyAxis::Eps => "eps",
        }
    }
}

/// Max-over-time difference norms at one refinement level.
#[derive(Clone, Copy, Debug)]
pub struct LevelError {
    /// The varied parameter (coarse h, k, or eps).
    pub param: f64,
    pub l2: f64,
    pub h1: f64,
    pub linf: f64,
}

/// Per-level errors of a study, sorted by decreasing parameter.
#[derive(Clone, Debug)]
pub struct ErrorTable {
    pub axis: StudyAxis,
    pub levels: Vec<LevelError>,
}

/// Observed orders for one norm: consecutive log2 ratios and the summary
/// (median of the last two ratios; equal to the single ratio when only one
/// exists; absent when errors vanish).
#[derive(Clone, Debug, Default)]
pub struct RateSequence {
    pub ratios: Vec<f64>,
    pub summary: Option<f64>,
}

/// Rates for the three tracked norms.
#[derive(Clone, Debug)]
pub struct RateReport {
    pub l2: RateSequence,
    pub h1: RateSequence,
    pub linf: RateSequence,
}

/// Observed orders of a strictly positive error sequence.
pub fn compute_rate(errors: &[f64]) -> Result<RateSequence, Error> {
    if errors.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidArgument(
            "convergence rates require strictly positive errors".into(),
        ));
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let summary = match ratios.len() {
        0 => None,
        1 => Some(ratios[0]),
        n => Some(0.5 * (ratios[n - 2] + ratios[n - 1])),
    };
    Ok(RateSequence { ratios, summary })
}

fn rate_or_empty(errors: &[f64]) -> RateSequence {
    if errors.iter().any(|&e| e <= 0.0) {
        RateSequence::default()
    } else {
        compute_rate(errors).expect("positive errors")
    }
}

fn rate_report(table: &ErrorTable) -> RateReport {
    let l2: Vec<f64> = table.levels.iter().map(|l| l.l2).collect();
    let h1: Vec<f64> = table.levels.iter().map(|l| l.h1).collect();
    let linf: Vec<f64> = table.levels.iter().map(|l| l.linf).collect();
    RateReport {
        l2: rate_or_empty(&l2),
        h1: rate_or_empty(&h1),
        linf: rate_or_empty(&linf),
    }
}

struct DiffNorms {
    l2: f64,
    h1: f64,
    linf: f64,
}

fn max_diff_norms(
    ev: &NormEvaluator,
    pairs: impl Iterator<Item = (NodalField, NodalField)>,
) -> DiffNorms {
    let mut out = DiffNorms {
        l2: 0.0,
        h1: 0.0,
        linf: 0.0,
    };
    for (a, b) in pairs {
        let diff = a.sub(&b);
        let l2 = ev.l2(&diff);
        let h1s = ev.h1_semi(&diff);
        out.l2 = out.l2.max(l2);
        out.h1 = out.h1.max((l2 * l2 + h1s * h1s).sqrt());
        out.linf = out.linf.max(norm_linf(&diff));
    }
    out
}

/// Spatial refinement study on a nested hierarchy grown from `base` by
/// uniform refinement. All levels share the time grid. `levels` counts the
/// meshes (so `levels - 1` error entries are produced).
pub fn h_study<F>(
    base: &Mesh,
    params: &SchemeParams,
    grid: &TimeGrid,
    u0: F,
    levels: usize,
    solver: &SolverOptions,
) -> Result<(ErrorTable, RateReport), Error>
where
    F: Fn([f64; 3]) -> [f64; 3],
{
    if levels < 2 {
        return Err(Error::InvalidArgument(
            "an h-study needs at least two mesh levels".into(),
        ));
    }
    let mut table = ErrorTable {
        axis: StudyAxis::H,
        levels: Vec::new(),
    };
    let mut coarse_mesh = base.clone();
    let mut coarse_run = run_recorded(&coarse_mesh, params, grid, &u0, solver, Some(1))?;
    for _ in 1..levels {
        let coarse_h = coarse_mesh.mesh_size();
        let (fine_mesh, prolongation) = refine_uniform(&coarse_mesh);
        let fine_run = run_recorded(&fine_mesh, params, grid, &u0, solver, Some(1))?;

        let mass = assemble_mass(&fine_mesh);
        let stiffness = assemble_stiffness(&fine_mesh);
        let ev = NormEvaluator::new(&fine_mesh, &mass, &stiffness);
        let pairs = coarse_run
            .store
            .states
            .iter()
            .zip(&fine_run.store.states)
            .map(|((sc, uc), (sf, uf))| {
                debug_assert_eq!(sc, sf);
                let lifted = NodalField::from_values(prolongation.apply(uc.values(), 3))
                    .expect("prolonged field is finite");
                (lifted, uf.clone())
            });
        let norms = max_diff_norms(&ev, pairs);
        table.levels.push(LevelError {
            param: coarse_h,
            l2: norms.l2,
            h1: norms.h1,
            linf: norms.linf,
        });

        coarse_mesh = fine_mesh;
        coarse_run = fine_run;
    }
    let rates = rate_report(&table);
    Ok((table, rates))
}

/// Time-step study on a fixed mesh: `n_sequence` must double each entry.
/// Runs with N and 2N steps are compared at the N-run's time nodes.
pub fn k_study<F>(
    mesh: &Mesh,
    params: &SchemeParams,
    t_final: f64,
    n_sequence: &[usize],
    u0: F,
    solver: &SolverOptions,
) -> Result<(ErrorTable, RateReport), Error>
where
    F: Fn([f64; 3]) -> [f64; 3],
{
    if n_sequence.len() < 2 {
        return Err(Error::InvalidArgument(
            "a k-study needs at least two step counts".into(),
        ));
    }
    for w in n_sequence.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::InvalidArgument(format!(
                "k-study step counts must double: got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let mass = assemble_mass(mesh);
    let stiffness = assemble_stiffness(mesh);
    let ev = NormEvaluator::new(mesh, &mass, &stiffness);

    let mut table = ErrorTable {
        axis: StudyAxis::K,
        levels: Vec::new(),
    };
    let mut coarse = run_recorded(
        mesh,
        params,
        &TimeGrid::new(t_final, n_sequence[0])?,
        &u0,
        solver,
        Some(1),
    )?;
    let mut coarse_n = n_sequence[0];
    for &fine_n in &n_sequence[1..] {
        let fine = run_recorded(
            mesh,
            params,
            &TimeGrid::new(t_final, fine_n)?,
            &u0,
            solver,
            Some(1),
        )?;
        let ratio = fine_n / coarse_n; // = 2
        let pairs = coarse.store.states.iter().map(|(j, uc)| {
            let uf = fine
                .store
                .at_step(j * ratio)
                .expect("fine run stores every step");
            (uc.clone(), uf.clone())
        });
        let norms = max_diff_norms(&ev, pairs);
        table.levels.push(LevelError {
            param: t_final / coarse_n as f64,
            l2: norms.l2,
            h1: norms.h1,
            linf: norms.linf,
        });
        coarse = fine;
        coarse_n = fine_n;
    }
    let rates = rate_report(&table);
    Ok((table, rates))
}

/// Regularisation study: runs at each eps in `eps_sequence` are compared
/// against the eps = 0 reference on the same mesh and time grid.
pub fn eps_study<F>(
    mesh: &Mesh,
    base_params: &SchemeParams,
    grid: &TimeGrid,
    u0: F,
    eps_sequence: &[f64],
    solver: &SolverOptions,
) -> Result<(ErrorTable, RateReport), Error>
where
    F: Fn([f64; 3]) -> [f64; 3],
{
    if eps_sequence.is_empty() {
        return Err(Error::InvalidArgument("eps-study needs at least one epsilon".into()));
    }
    if eps_sequence.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidArgument("eps-study epsilons must be positive".into()));
    }
    let mass = assemble_mass(mesh);
    let stiffness = assemble_stiffness(mesh);
    let ev = NormEvaluator::new(mesh, &mass, &stiffness);

    let reference_params = base_params.with_epsilon(0.0)?;
    let reference = run_recorded(mesh, &reference_params, grid, &u0, solver, Some(1))?;

    let mut table = ErrorTable {
        axis: StudyAxis::Eps,
        levels: Vec::new(),
    };
    for &eps in eps_sequence {
        let params = base_params.with_epsilon(eps)?;
        let run = run_recorded(mesh, &params, grid, &u0, solver, Some(1))?;
        let pairs = run
            .store
            .states
            .iter()
            .zip(&reference.store.states)
            .map(|((_, ue), (_, u0))| (ue.clone(), u0.clone()));
        let norms = max_diff_norms(&ev, pairs);
        table.levels.push(LevelError {
            param: eps,
            l2: norms.l2,
            h1: norms.h1,
            linf: norms.linf,
        });
    }
    let rates = rate_report(&table);
    Ok((table, rates))
}
