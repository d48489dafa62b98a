use serde::Serialize;

use crate::error::{BresseError, Result};
use crate::model::ModelParams;

pub const MIN_ELEMENTS: usize = 4;

/// Uniform 1D mesh of `(0, L)` with the two damping jump points snapped
/// onto nodes, so every element has a constant damping coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    nodes: Vec<f64>,
    alpha_index: usize,
    beta_index: usize,
}

impl Mesh {
    /// Builds the mesh for `p`. The nearest uniform node to each jump point is
    /// moved onto it, so no node moves by more than half an element width.
    ///
    /// The interval endpoints are only checked for ordering here, which lets
    /// callers build meshes for limiting configurations (`alpha = 0`,
    /// `beta = L`) that [`ModelParams::validate`] rejects.
    pub fn build(p: &ModelParams, n_elements: usize) -> Result<Self> {
        if n_elements < MIN_ELEMENTS {
            return Err(BresseError::TooCoarse(format!(
                "{n_elements} elements requested, at least {MIN_ELEMENTS} required"
            )));
        }
        let length = p.length;
        if !(0.0 <= p.alpha && p.alpha < p.beta && p.beta <= length) {
            return Err(BresseError::BadInterval {
                alpha: p.alpha,
                beta: p.beta,
                length,
            });
        }
        let h = length / n_elements as f64;
        let mut nodes: Vec<f64> = (0..=n_elements).map(|i| i as f64 * h).collect();
        nodes[n_elements] = length;

        let snap = |x: f64| -> usize { (x / h).round() as usize };
        let alpha_index = snap(p.alpha);
        let beta_index = snap(p.beta);

        let interior = |idx: usize, x: f64, name: &str| -> Result<()> {
            let at_end = (idx == 0 && x != 0.0) || (idx == n_elements && x != length);
            if at_end {
                return Err(BresseError::TooCoarse(format!(
                    "{name}={x} lies within half an element of the boundary (h={h})"
                )));
            }
            Ok(())
        };
        interior(alpha_index, p.alpha, "alpha")?;
        interior(beta_index, p.beta, "beta")?;
        if beta_index <= alpha_index {
            return Err(BresseError::TooCoarse(format!(
                "damping interval ({}, {}) contains no complete element at h={h}",
                p.alpha, p.beta
            )));
        }
        nodes[alpha_index] = p.alpha;
        nodes[beta_index] = p.beta;
        // two opposite half-width moves can squeeze one element
        if let Some(w) = nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .find(|&w| w < 0.5 * h * (1.0 - 1e-12))
        {
            return Err(BresseError::TooCoarse(format!(
                "snapping alpha={} and beta={} leaves an element of width {w} (h={h})",
                p.alpha, p.beta
            )));
        }
        Ok(Mesh {
            nodes,
            alpha_index,
            beta_index,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn alpha_index(&self) -> usize {
        self.alpha_index
    }

    pub fn beta_index(&self) -> usize {
        self.beta_index
    }

    pub fn length(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Nominal (pre-snapping) element width `L / n`.
    pub fn nominal_width(&self) -> f64 {
        self.length() / self.n_elements() as f64
    }

    /// `(left, right)` end points of element `e`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    /// Whether element `e` lies inside the damping interval.
    pub fn element_is_damped(&self, e: usize) -> bool {
        e >= self.alpha_index && e < self.beta_index
    }

    /// Positions of the nodes carrying degrees of freedom.
    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }
}
