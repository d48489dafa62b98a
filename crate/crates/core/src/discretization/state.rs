//! States of the first-order system `U' = A_h U` and the energy functionals
//! on them.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::assembly::{AssembledSystem, Field};
use crate::error::{BresseError, Result};
use crate::linalg::{chol_solve_complex, mul_real, quad_form, sesq_form, CVector};

/// Discrete `U = (v¹, …, v⁶)`: displacements `q ↔ (φ, ψ, w)` and velocities
/// `v ↔ (φ_t, ψ_t, w_t)` at interior nodes, node-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub q: CVector,
    pub v: CVector,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            q: CVector::zeros(n),
            v: CVector::zeros(n),
        }
    }

    pub fn from_real(q: DVector<f64>, v: DVector<f64>) -> Self {
        Self {
            q: q.map(Complex64::from),
            v: v.map(Complex64::from),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Stacks `(q, v)` into a single vector of length `2n`.
    pub fn stacked(&self) -> CVector {
        let n = self.dim();
        CVector::from_fn(2 * n, |i, _| if i < n { self.q[i] } else { self.v[i - n] })
    }

    pub fn from_stacked(x: &CVector) -> Self {
        let n = x.len() / 2;
        Self {
            q: x.rows(0, n).into_owned(),
            v: x.rows(n, n).into_owned(),
        }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            q: &self.q * a,
            v: &self.v * a,
        }
    }

    pub fn axpy(&self, a: Complex64, other: &StateVector) -> Self {
        Self {
            q: &self.q + &other.q * a,
            v: &self.v + &other.v * a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyComponents {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub dissipation_rate: f64,
}

/// Closed-form initial fields; each must vanish at both ends of the beam.
pub struct InitialFields<'a> {
    pub phi0: &'a dyn Fn(f64) -> f64,
    pub phi1: &'a dyn Fn(f64) -> f64,
    pub psi0: &'a dyn Fn(f64) -> f64,
    pub psi1: &'a dyn Fn(f64) -> f64,
    pub w0: &'a dyn Fn(f64) -> f64,
    pub w1: &'a dyn Fn(f64) -> f64,
}

const BOUNDARY_TOL: f64 = 1e-12;

impl AssembledSystem {
    fn check_dim(&self, u: &StateVector) -> Result<()> {
        let n = self.n_dofs();
        for len in [u.q.len(), u.v.len()] {
            if len != n {
                return Err(BresseError::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        Ok(())
    }

    /// `A_h U = (v, −M⁻¹(K q + C v))`.
    pub fn apply_generator(&self, u: &StateVector) -> Result<StateVector> {
        self.check_dim(u)?;
        let force = mul_real(self.stiffness(), &u.q) + mul_real(self.damping(), &u.v);
        let accel = -chol_solve_complex(self.mass_cholesky(), &force);
        Ok(StateVector {
            q: u.v.clone(),
            v: accel,
        })
    }

    pub fn energy(&self, u: &StateVector) -> Result<EnergyComponents> {
        self.check_dim(u)?;
        let kinetic = 0.5 * quad_form(self.mass(), &u.v);
        let potential = 0.5 * quad_form(self.stiffness(), &u.q);
        Ok(EnergyComponents {
            kinetic,
            potential,
            total: kinetic + potential,
            dissipation_rate: quad_form(self.damping(), &u.v),
        })
    }

    /// `⟨U, V⟩_G = V* G U` with `G = blockdiag(K, M)`.
    pub fn inner_product_h(&self, u: &StateVector, v: &StateVector) -> Result<Complex64> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(sesq_form(self.stiffness(), &u.q, &v.q) + sesq_form(self.mass(), &u.v, &v.v))
    }

    pub fn norm_h_sq(&self, u: &StateVector) -> Result<f64> {
        self.check_dim(u)?;
        Ok(quad_form(self.stiffness(), &u.q) + quad_form(self.mass(), &u.v))
    }

    /// Squared graph norm `‖U‖²_G + ‖A_h U‖²_G`.
    pub fn domain_norm(&self, u: &StateVector) -> Result<f64> {
        let au = self.apply_generator(u)?;
        Ok(self.norm_h_sq(u)? + self.norm_h_sq(&au)?)
    }

    /// Nodal interpolation of the six initial fields.
    pub fn project_initial_data(&self, fields: &InitialFields<'_>) -> Result<StateVector> {
        let length = self.mesh().length();
        let named: [(&str, &dyn Fn(f64) -> f64); 6] = [
            ("phi0", fields.phi0),
            ("phi1", fields.phi1),
            ("psi0", fields.psi0),
            ("psi1", fields.psi1),
            ("w0", fields.w0),
            ("w1", fields.w1),
        ];
        for (name, f) in named {
            for x in [0.0, length] {
                let value = f(x);
                if !(value.abs() <= BOUNDARY_TOL) {
                    return Err(BresseError::IncompatibleBoundary {
                        field: name.to_string(),
                        x,
                        value,
                    });
                }
            }
        }
        let n = self.n_dofs();
        let nodes = self.mesh().nodes();
        let mut q = DVector::zeros(n);
        let mut v = DVector::zeros(n);
        for dof in 0..n {
            let (node, field) = self.dofs().node_of(dof);
            let x = nodes[node];
            let (disp, vel) = match field {
                Field::Phi => (fields.phi0, fields.phi1),
                Field::Psi => (fields.psi0, fields.psi1),
                Field::W => (fields.w0, fields.w1),
            };
            q[dof] = disp(x);
            v[dof] = vel(x);
        }
        Ok(StateVector::from_real(q, v))
    }
}
