//! Discrete norms and the identities they enter: the exact per-step energy
//! balance of the scheme, the discrete exponential decay bound, and the
//! (monitored, unasserted) L-infinity decay of the continuous problem.
//!
//! Norms come in two independent flavours: matrix-based (through the
//! consistent mass/stiffness matrices) and direct per-cell quadrature. The
//! two must agree to near machine precision, which the tests exploit.
//!
//! The L-infinity norm of a P1 vector field is evaluated as the maximum of
//! the Euclidean vertex values. The componentwise maximum is attained at
//! vertices; the vector magnitude over an element can exceed the vertex
//! values only by the interpolation wiggle, which is negligible here.

use crate::assembly::NodalField;
use crate::error::Error;
use crate::mesh::Mesh;
use crate::quadrature::{for_each_quad_point, simplex_rule, QuadRule};
use crate::scheme::SchemeParams;
use crate::sparse::{spmv_blockdiag3, CsrMatrix};

/// Norms of a field at one instant.
#[derive(Clone, Copy, Debug)]
pub struct NormSample {
    pub t: f64,
    pub l2: f64,
    pub h1_semi: f64,
    pub h1: f64,
    pub linf: f64,
    pub l4: f64,
}

/// Matrix-backed norm evaluation for fields on one fixed mesh.
pub struct NormEvaluator<'a> {
    mesh: &'a Mesh,
    mass: &'a CsrMatrix,
    stiffness: &'a CsrMatrix,
    quartic_rule: QuadRule,
    scratch: std::cell::RefCell<Vec<f64>>,
}

impl<'a> NormEvaluator<'a> {
    pub fn new(mesh: &'a Mesh, mass: &'a CsrMatrix, stiffness: &'a CsrMatrix) -> Self {
        let quartic_rule = simplex_rule(mesh.dim(), 4).expect("degree-4 rule exists");
        NormEvaluator {
            mesh,
            mass,
            stiffness,
            quartic_rule,
            scratch: std::cell::RefCell::new(Vec::new()),
        }
    }

    fn quadratic_form(&self, op: &CsrMatrix, u: &NodalField) -> f64 {
        let mut y = self.scratch.borrow_mut();
        y.resize(u.values().len(), 0.0);
        spmv_blockdiag3(op, u.values(), &mut y);
        u.values().iter().zip(y.iter()).map(|(a, b)| a * b).sum()
    }

    /// sqrt(u^T blockdiag3(M) u); exact for P1 data.
    pub fn l2(&self, u: &NodalField) -> f64 {
        self.quadratic_form(self.mass, u).max(0.0).sqrt()
    }

    /// sqrt(u^T blockdiag3(S) u).
    pub fn h1_semi(&self, u: &NodalField) -> f64 {
        self.quadratic_form(self.stiffness, u).max(0.0).sqrt()
    }

    /// Maximum Euclidean vertex value.
    pub fn linf(&self, u: &NodalField) -> f64 {
        norm_linf(u)
    }

    /// Fourth root of the degree-4 quadrature of |u|^4 (exact for P1 data).
    pub fn l4(&self, u: &NodalField) -> f64 {
        let mut acc = 0.0;
        for c in 0..self.mesh.num_cells() {
            let cell = self.mesh.cell(c);
            let uv: Vec<[f64; 3]> = cell.iter().map(|&i| u.vec3(i)).collect();
            for_each_quad_point(self.mesh, c, &self.quartic_rule, |_x, wq, lambda| {
                let mut ux = [0.0f64; 3];
                for (l, val) in uv.iter().enumerate() {
                    for d in 0..3 {
                        ux[d] += lambda[l] * val[d];
                    }
                }
                let sq = ux[0] * ux[0] + ux[1] * ux[1] + ux[2] * ux[2];
                acc += wq * sq * sq;
            });
        }
        acc.max(0.0).powf(0.25)
    }

    /// int |w|^2 |u|^2 by degree-4 quadrature; the mixed term of the energy
    /// identity.
    pub fn weighted_cross_norm_sq(&self, w: &NodalField, u: &NodalField) -> f64 {
        let mut acc = 0.0;
        for c in 0..self.mesh.num_cells() {
            let cell = self.mesh.cell(c);
            let wv: Vec<[f64; 3]> = cell.iter().map(|&i| w.vec3(i)).collect();
            let uv: Vec<[f64; 3]> = cell.iter().map(|&i| u.vec3(i)).collect();
            for_each_quad_point(self.mesh, c, &self.quartic_rule, |_x, wq, lambda| {
                let mut wx = [0.0f64; 3];
                let mut ux = [0.0f64; 3];
                for l in 0..cell.len() {
                    for d in 0..3 {
                        wx[d] += lambda[l] * wv[l][d];
                        ux[d] += lambda[l] * uv[l][d];
                    }
                }
                acc += wq
                    * (wx[0] * wx[0] + wx[1] * wx[1] + wx[2] * wx[2])
                    * (ux[0] * ux[0] + ux[1] * ux[1] + ux[2] * ux[2]);
            });
        }
        acc
    }

    pub fn sample(&self, t: f64, u: &NodalField) -> NormSample {
        let l2 = self.l2(u);
        let h1_semi = self.h1_semi(u);
        NormSample {
            t,
            l2,
            h1_semi,
            h1: (l2 * l2 + h1_semi * h1_semi).sqrt(),
            linf: self.linf(u),
            l4: self.l4(u),
        }
    }

    /// Signed defect LHS - RHS of the per-step energy balance obtained by
    /// testing the scheme with its own solution,
    ///
    ///   1/2 |u^j|^2 + 1/2 |u^j - u^{j-1}|^2
    ///   + eps/2 |grad u^j|^2 + eps/2 |grad(u^j - u^{j-1})|^2
    ///   + k k1 |grad u^j|^2 + k k2 |u^j|^2 + k k2 mu | |u^{j-1}||u^j| |^2
    ///   = 1/2 |u^{j-1}|^2 + eps/2 |grad u^{j-1}|^2,
    ///
    /// valid for eps = 0 and eps > 0 alike. The cross term drops out
    /// because (w x dv) . dv = 0 pointwise.
    pub fn energy_residual(
        &self,
        prev: &NodalField,
        cur: &NodalField,
        params: &SchemeParams,
        k: f64,
    ) -> f64 {
        let eps = params.epsilon;
        let diff = cur.sub(prev);
        let l2_cur_sq = self.quadratic_form(self.mass, cur);
        let l2_prev_sq = self.quadratic_form(self.mass, prev);
        let l2_diff_sq = self.quadratic_form(self.mass, &diff);
        let h1_cur_sq = self.quadratic_form(self.stiffness, cur);
        let h1_prev_sq = self.quadratic_form(self.stiffness, prev);
        let h1_diff_sq = self.quadratic_form(self.stiffness, &diff);
        let mixed = self.weighted_cross_norm_sq(prev, cur);

        let lhs = 0.5 * l2_cur_sq
            + 0.5 * l2_diff_sq
            + 0.5 * eps * h1_cur_sq
            + 0.5 * eps * h1_diff_sq
            + k * params.kappa1 * h1_cur_sq
            + k * params.kappa2 * l2_cur_sq
            + k * params.kappa2 * params.mu * mixed;
        let rhs = 0.5 * l2_prev_sq + 0.5 * eps * h1_prev_sq;
        lhs - rhs
    }

    /// Energy-balance defect relative to the right-hand side magnitude.
    pub fn energy_residual_relative(
        &self,
        prev: &NodalField,
        cur: &NodalField,
        params: &SchemeParams,
        k: f64,
    ) -> f64 {
        let rhs = 0.5 * self.quadratic_form(self.mass, prev)
            + 0.5 * params.epsilon * self.quadratic_form(self.stiffness, prev);
        let defect = self.energy_residual(prev, cur, params, k);
        if rhs > 0.0 {
            defect / rhs
        } else {
            defect
        }
    }
}

/// Maximum Euclidean vertex value of a nodal field.
pub fn norm_linf(u: &NodalField) -> f64 {
    (0..u.num_vertices())
        .map(|i| {
            let v = u.vec3(i);
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
        })
        .fold(0.0, f64::max)
}

/// L2 norm by direct per-cell quadrature (independent of the mass matrix).
pub fn norm_l2_quadrature(mesh: &Mesh, u: &NodalField) -> f64 {
    let rule = simplex_rule(mesh.dim(), 2).expect("degree-2 rule exists");
    let mut acc = 0.0;
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let uv: Vec<[f64; 3]> = cell.iter().map(|&i| u.vec3(i)).collect();
        for_each_quad_point(mesh, c, &rule, |_x, wq, lambda| {
            let mut ux = [0.0f64; 3];
            for l in 0..cell.len() {
                for d in 0..3 {
                    ux[d] += lambda[l] * uv[l][d];
                }
            }
            acc += wq * (ux[0] * ux[0] + ux[1] * ux[1] + ux[2] * ux[2]);
        });
    }
    acc.max(0.0).sqrt()
}

/// H1 seminorm by direct per-cell evaluation of the constant gradients.
pub fn seminorm_h1_quadrature(mesh: &Mesh, u: &NodalField) -> f64 {
    let mut acc = 0.0;
    for c in 0..mesh.num_cells() {
        let (grads, meas) = mesh.grad_basis(c);
        let cell = mesh.cell(c);
        let mut du = [[0.0f64; 3]; 3];
        for (l, &vi) in cell.iter().enumerate() {
            let v = u.vec3(vi);
            for i in 0..mesh.dim() {
                for comp in 0..3 {
                    du[i][comp] += grads[l][i] * v[comp];
                }
            }
        }
        let mut g = 0.0;
        for i in 0..mesh.dim() {
            for comp in 0..3 {
                g += du[i][comp] * du[i][comp];
            }
        }
        acc += meas * g;
    }
    acc.max(0.0).sqrt()
}

/// One step of the decay check: the bound, the measured value and their
/// difference (nonnegative margins mean the bound holds).
#[derive(Clone, Copy, Debug)]
pub struct DecayMargin {
    pub t: f64,
    pub bound: f64,
    pub value: f64,
    pub margin: f64,
}

/// Discrete exponential decay report against the envelope
/// (|u^0|^2 + eps |grad u^0|^2) exp(-lambda t_n), lambda = 2 k2 / (1 + 2 k2 k).
#[derive(Clone, Debug)]
pub struct DecayReport {
    pub lambda: f64,
    /// The bound is proved under eps < kappa1 / kappa2.
    pub hypothesis_satisfied: bool,
    pub margins: Vec<DecayMargin>,
}

impl DecayReport {
    pub fn min_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(|m| m.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Evaluate the decay envelope on a trajectory of norm samples (the first
/// sample must be the initial state).
pub fn decay_report(samples: &[NormSample], params: &SchemeParams, k: f64) -> Result<DecayReport, Error> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("decay report needs at least the initial sample".into()));
    }
    let lambda = 2.0 * params.kappa2 / (1.0 + 2.0 * params.kappa2 * k);
    let eps = params.epsilon;
    let energy = |s: &NormSample| s.l2 * s.l2 + eps * s.h1_semi * s.h1_semi;
    let initial = energy(&samples[0]);
    let margins = samples
        .iter()
        .map(|s| {
            let bound = initial * (-lambda * s.t).exp();
            let value = energy(s);
            DecayMargin {
                t: s.t,
                bound,
                value,
                margin: bound - value,
            }
        })
        .collect();
    Ok(DecayReport {
        lambda,
        hypothesis_satisfied: eps < params.kappa1 / params.kappa2,
        margins,
    })
}

/// Samples of |u^n|_Linf * exp(+kappa2 t_n). Monitored only: the continuous
/// theory bounds |u(t)|_Lp by exp(-kappa2 t) |u0|_Lp, but no discrete
/// analogue is proved, so nothing is asserted here.
pub fn linf_decay_monitor(samples: &[NormSample], params: &SchemeParams) -> Vec<(f64, f64)> {
    samples
        .iter()
        .map(|s| (s.t, s.linf * (params.kappa2 * s.t).exp()))
        .collect()
}
