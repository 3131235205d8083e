//! Backward Euler: `(E/τ + H) Xⁿ = Lⁿ + (E/τ) Xⁿ⁻¹`.

use crate::assembly::{apply_dirichlet, ConstrainedMatrix, CoupledSystem, DirichletData, Unknown};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

use super::Factorization;

#[derive(Clone, Debug)]
pub struct TransientState {
    pub t: f64,
    pub x: Vec<f64>,
    pub step: usize,
}

/// Per-step checks computed from the unconstrained equations.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepDiagnostics {
    /// `‖A x − b‖ / ‖b‖` of the constrained system.
    pub residual: f64,
    /// Largest multiplier-row residual, i.e. the mismatch of the interface
    /// mass balance `b_Γ(u_f, u_r, d_τ y_s; μ)` against its data.
    pub interface_residual: f64,
    /// Largest solid-velocity row residual `ρ_p(u_s − d_τ y_s, v_s)`, relative
    /// to the largest entry of `ρ_p(u_s, v_s)`.
    pub kinematic_residual: f64,
    pub norm_x: f64,
}

/// Factorized step operator for one mesh, one `τ` and one set of constrained dofs.
pub struct Stepper {
    pub system: CoupledSystem,
    pub tau: f64,
    e_over_tau: CsrMatrix,
    full: CsrMatrix,
    constrained: ConstrainedMatrix,
    lu: Factorization,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl Stepper {
    pub fn new(system: CoupledSystem, tau: f64, constrained_dofs: &[usize]) -> Result<Stepper> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Argument(format!("time step {tau} must be positive")));
        }
        let e_over_tau = system.e.combine(1.0 / tau, &system.h, 0.0);
        let full = system.e.combine(1.0 / tau, &system.h, 1.0);
        let constrained = apply_dirichlet(&full, constrained_dofs)?;
        let lu = Factorization::new(&constrained.matrix)?;
        Ok(Stepper {
            system,
            tau,
            e_over_tau,
            full,
            constrained,
            lu,
        })
    }

    pub fn constrained_dofs(&self) -> &[usize] {
        self.constrained.constrained_dofs()
    }

    /// One step from `state` with load `Lⁿ` and boundary data at `tⁿ`.
    pub fn step(&self, state: &TransientState, load: &[f64], bc: &DirichletData) -> Result<(TransientState, StepDiagnostics)> {
        let n = self.full.nrows();
        if state.x.len() != n || load.len() != n {
            return Err(Error::Argument(format!(
                "state/load lengths {}/{} for system dimension {n}",
                state.x.len(),
                load.len()
            )));
        }
        let mut rhs = load.to_vec();
        self.e_over_tau.mul_vec_add(1.0, &state.x, &mut rhs);
        let mut rc = rhs.clone();
        self.constrained.constrain_rhs(&mut rc, bc)?;
        let x = self.lu.solve(&rc)?;

        let ax = self.constrained.matrix.mul_vec(&x);
        let res: Vec<f64> = ax.iter().zip(&rc).map(|(a, b)| a - b).collect();
        let residual = norm(&res) / norm(&rc).max(f64::MIN_POSITIVE);
        let r_full: Vec<f64> = self.full.mul_vec(&x).iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let sp = &self.system.spaces;
        let interface_residual = max_abs(&r_full[sp.range(Unknown::Multiplier)]);
        let us = sp.range(Unknown::SolidVelocity);
        let m_us = self
            .system
            .h
            .block(Unknown::SolidVelocity, Unknown::SolidVelocity)
            .mul_vec(&x[us.clone()]);
        let kinematic_residual = max_abs(&r_full[us]) / max_abs(&m_us).max(f64::MIN_POSITIVE);
        let diag = StepDiagnostics {
            residual,
            interface_residual,
            kinematic_residual,
            norm_x: norm(&x),
        };
        Ok((
            TransientState {
                t: state.t + self.tau,
                x,
                step: state.step + 1,
            },
            diag,
        ))
    }
}

/// Free-function form of [`Stepper::step`].
pub fn backward_euler_step(
    stepper: &Stepper,
    state: &TransientState,
    load: &[f64],
    bc: &DirichletData,
) -> Result<(TransientState, StepDiagnostics)> {
    stepper.step(state, load, bc)
}

/// Runs `steps` backward Euler steps. `load(t)` and `bc(t)` supply the data at
/// the new time level; `observe` sees every new state.
pub fn run_transient(
    stepper: &Stepper,
    initial: TransientState,
    steps: usize,
    load: &mut dyn FnMut(f64) -> Result<Vec<f64>>,
    bc: &mut dyn FnMut(f64) -> Result<DirichletData>,
    observe: &mut dyn FnMut(&TransientState, &TransientState, &StepDiagnostics) -> Result<()>,
) -> Result<TransientState> {
    let mut state = initial;
    for _ in 0..steps {
        let t = state.t + stepper.tau;
        let l = load(t)?;
        let b = bc(t)?;
        let (next, diag) = stepper.step(&state, &l, &b)?;
        observe(&state, &next, &diag)?;
        state = next;
    }
    Ok(state)
}
