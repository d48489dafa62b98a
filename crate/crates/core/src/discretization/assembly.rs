//! P1 assembly of the mass, damping and stiffness forms.
//!
//! Local ordering on an element is `[φ_a, ψ_a, w_a, φ_b, ψ_b, w_b]` for its
//! left node `a` and right node `b`. The three strains
//!
//! ```text
//! shear   e1 = φ' + ψ + l w
//! bending e2 = ψ'
//! axial   e3 = w' − l φ
//! ```
//!
//! are linear maps of the local dofs at each point of the element, so every
//! form is `∫ B(x)ᵀ D B(x) dx` with a polynomial integrand of degree at most
//! two. Two-point Gauss–Legendre integrates these exactly.

use nalgebra::{Cholesky, DMatrix, Dyn, SMatrix, SVector};
use serde::Serialize;

use super::mesh::Mesh;
use crate::error::{BresseError, Result};
use crate::model::ModelParams;

type Local = SMatrix<f64, 6, 6>;
type Row = SVector<f64, 6>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Field {
    Phi,
    Psi,
    W,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Phi, Field::Psi, Field::W];

    fn offset(self) -> usize {
        match self {
            Field::Phi => 0,
            Field::Psi => 1,
            Field::W => 2,
        }
    }
}

/// Maps `(node, field)` to a global degree of freedom. Boundary nodes carry
/// no dofs (homogeneous Dirichlet conditions on all three fields); interior
/// node `i` (1-based) owns indices `3(i-1) .. 3(i-1)+3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DofMap {
    n_elements: usize,
}

impl DofMap {
    pub fn new(n_elements: usize) -> Self {
        Self { n_elements }
    }

    pub fn len(&self) -> usize {
        3 * (self.n_elements - 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dof(&self, node: usize, field: Field) -> Option<usize> {
        (node >= 1 && node < self.n_elements).then(|| 3 * (node - 1) + field.offset())
    }

    /// `(interior node index, field)` for a global dof.
    pub fn node_of(&self, dof: usize) -> (usize, Field) {
        (dof / 3 + 1, Field::ALL[dof % 3])
    }

    /// All dofs belonging to one field, in node order.
    pub fn field_dofs(&self, field: Field) -> Vec<usize> {
        (1..self.n_elements)
            .filter_map(|node| self.dof(node, field))
            .collect()
    }
}

/// The three real symmetric matrices of the semi-discrete system
/// `M q'' + C q' + K q = 0` before any factorization.
#[derive(Debug, Clone)]
pub struct Forms {
    pub mass: DMatrix<f64>,
    pub damping: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
}

struct Strains {
    shear: Row,
    bending: Row,
    axial: Row,
    phi: Row,
    psi: Row,
    w: Row,
}

fn strains_at(l: f64, width: f64, xi: f64) -> Strains {
    let shape = [1.0 - xi, xi];
    let slope = [-1.0 / width, 1.0 / width];
    let mut s = Strains {
        shear: Row::zeros(),
        bending: Row::zeros(),
        axial: Row::zeros(),
        phi: Row::zeros(),
        psi: Row::zeros(),
        w: Row::zeros(),
    };
    for a in 0..2 {
        let (phi, psi, w) = (3 * a, 3 * a + 1, 3 * a + 2);
        s.phi[phi] = shape[a];
        s.psi[psi] = shape[a];
        s.w[w] = shape[a];

        s.shear[phi] += slope[a];
        s.shear[psi] += shape[a];
        s.shear[w] += l * shape[a];

        s.bending[psi] += slope[a];

        s.axial[w] += slope[a];
        s.axial[phi] -= l * shape[a];
    }
    s
}

/// Element matrices `(mass, damping, stiffness)` for an element of the given
/// width and damping coefficient.
pub fn element_matrices(p: &ModelParams, width: f64, damping: f64) -> (Local, Local, Local) {
    let g = 0.5 / 3f64.sqrt();
    let points = [0.5 - g, 0.5 + g];
    let weight = 0.5 * width;

    let mut m = Local::zeros();
    let mut c = Local::zeros();
    let mut k = Local::zeros();
    for xi in points {
        let s = strains_at(p.l, width, xi);
        k += weight
            * (p.k1 * s.shear * s.shear.transpose()
                + p.k2 * s.bending * s.bending.transpose()
                + p.k3 * s.axial * s.axial.transpose());
        m += weight
            * (p.rho1 * s.phi * s.phi.transpose()
                + p.rho2 * s.psi * s.psi.transpose()
                + p.rho1 * s.w * s.w.transpose());
        if damping != 0.0 {
            c += (weight * damping) * s.axial * s.axial.transpose();
        }
    }
    (m, c, k)
}

/// Assembles the global forms with Dirichlet dofs eliminated. The element
/// damping coefficient is `d0` on elements inside `[alpha, beta]` and zero
/// elsewhere; parameters are not validated, so limiting cases can be built.
pub fn assemble_forms(p: &ModelParams, mesh: &Mesh) -> Forms {
    let n = mesh.n_elements();
    let dofs = DofMap::new(n);
    let size = dofs.len();
    let mut mass = DMatrix::zeros(size, size);
    let mut damping = DMatrix::zeros(size, size);
    let mut stiffness = DMatrix::zeros(size, size);

    for e in 0..n {
        let (a, b) = mesh.element(e);
        let d = if mesh.element_is_damped(e) { p.d0 } else { 0.0 };
        let (me, ce, ke) = element_matrices(p, b - a, d);
        let global: Vec<Option<usize>> = [e, e + 1]
            .iter()
            .flat_map(|&node| Field::ALL.iter().map(move |&f| dofs.dof(node, f)))
            .collect();
        for (i, gi) in global.iter().enumerate() {
            let Some(gi) = *gi else { continue };
            for (j, gj) in global.iter().enumerate() {
                let Some(gj) = *gj else { continue };
                mass[(gi, gj)] += me[(i, j)];
                damping[(gi, gj)] += ce[(i, j)];
                stiffness[(gi, gj)] += ke[(i, j)];
            }
        }
    }
    Forms {
        mass,
        damping,
        stiffness,
    }
}

/// Discrete Bresse system on a mesh: the forms, their Cholesky factors and
/// the dof layout. Immutable after construction.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    params: ModelParams,
    mesh: Mesh,
    dofs: DofMap,
    forms: Forms,
    mass_chol: Cholesky<f64, Dyn>,
    stiffness_chol: Cholesky<f64, Dyn>,
}

impl AssembledSystem {
    /// Assembles and factors. Fails if the mass or stiffness matrix is not
    /// positive definite.
    pub fn new(p: &ModelParams, mesh: &Mesh) -> Result<Self> {
        let forms = assemble_forms(p, mesh);
        let mass_chol = Cholesky::new(forms.mass.clone())
            .ok_or_else(|| BresseError::FactorizationFailed("mass matrix is not SPD".into()))?;
        let stiffness_chol = Cholesky::new(forms.stiffness.clone()).ok_or_else(|| {
            BresseError::FactorizationFailed("stiffness matrix is not SPD".into())
        })?;
        Ok(Self {
            params: *p,
            mesh: mesh.clone(),
            dofs: DofMap::new(mesh.n_elements()),
            forms,
            mass_chol,
            stiffness_chol,
        })
    }

    /// Validates `p`, builds the mesh and assembles.
    pub fn build(p: &ModelParams, n_elements: usize) -> Result<Self> {
        let p = p.validate()?;
        let mesh = Mesh::build(&p, n_elements)?;
        Self::new(&p, &mesh)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    /// Number of displacement dofs; the state has twice as many entries.
    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn forms(&self) -> &Forms {
        &self.forms
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.forms.mass
    }

    pub fn damping(&self) -> &DMatrix<f64> {
        &self.forms.damping
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.forms.stiffness
    }

    pub fn mass_cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.mass_chol
    }

    pub fn stiffness_cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.stiffness_chol
    }

    /// Energy metric `G = blockdiag(K, M)` on states `(q, v)`.
    pub fn metric(&self) -> DMatrix<f64> {
        let n = self.n_dofs();
        let mut g = DMatrix::zeros(2 * n, 2 * n);
        g.view_mut((0, 0), (n, n)).copy_from(&self.forms.stiffness);
        g.view_mut((n, n), (n, n)).copy_from(&self.forms.mass);
        g
    }
}
