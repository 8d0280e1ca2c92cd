//! One assembled problem instance: lattice, index set, grid, linear spectrum
//! with the Dirac pair, nonlinearity model, and the perturbation report.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::fields::{inner_product, pointwise_apply, BlochField, RealGrid};
use crate::lattice::{IndexSet, LatticeBasis};
use crate::linear_spectrum::{apply_matrix, dirac_basis, SpectralBasis};
use crate::nonlinearity::{HoneycombPotential, NonlinearityKind, NonlinearityModel};
use crate::perturbation::{complex_interaction, ParameterPair, PerturbationReport};

pub struct System {
    pub lattice: LatticeBasis,
    pub index_set: Arc<IndexSet>,
    pub grid: RealGrid,
    pub potential: HoneycombPotential,
    pub hamiltonian: DMatrix<f64>,
    pub basis: SpectralBasis,
    pub model: NonlinearityModel,
    pub report: PerturbationReport,
    /// Cached grid samples of the Dirac pair.
    pub phi_a_samples: Vec<Complex64>,
    pub phi_b_samples: Vec<Complex64>,
}

impl System {
    /// Assemble the full pipeline. The potential's `amplitude` is the εV used
    /// in the linear Hamiltonian and in the saturable denominators.
    pub fn assemble(
        potential: HoneycombPotential,
        kind: NonlinearityKind,
        cutoff: u32,
    ) -> Result<System> {
        let lattice = LatticeBasis::honeycomb();
        let index_set = IndexSet::build(cutoff)?;
        let grid = RealGrid::for_index_set(&index_set, lattice.cell_area);
        let potential = potential.validated()?;
        let (hamiltonian, basis) = dirac_basis(&lattice, &index_set, &potential, potential.amplitude)?;
        let vl = potential.sample_scaled(&grid);
        let model = NonlinearityModel::new(kind, &grid, vl)?;
        let report = complex_interaction(&grid, &basis, model.k_field(), model.m_field())?;
        let phi_a_samples = grid.to_grid(basis.phi_a());
        let phi_b_samples = grid.to_grid(basis.phi_b());
        Ok(System {
            lattice,
            index_set,
            grid,
            potential,
            hamiltonian,
            basis,
            model,
            report,
            phi_a_samples,
            phi_b_samples,
        })
    }

    /// (−Δ_K + εV·V_L) f via the assembled matrix.
    pub fn apply_linear(&self, f: &BlochField) -> BlochField {
        apply_matrix(&self.hamiltonian, f)
    }

    /// Relative residual ‖(−Δ_K + V_L + v(|φ|²))φ − Eφ‖ / ‖φ‖ of the full
    /// nonlinear equation, with v evaluated self-consistently at |φ|².
    pub fn nonlinear_residual(&self, phi: &BlochField, energy: f64) -> Result<f64> {
        let norm = phi.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let density = self.grid.density(phi);
        let v = self.model.evaluate_v(&density)?;
        let vphi = pointwise_apply(&self.grid, phi, &v);
        let mut r = self.apply_linear(phi);
        r.axpy(Complex64::new(1.0, 0.0), &vphi);
        r.axpy(Complex64::new(-energy, 0.0), phi);
        Ok(r.norm() / norm)
    }

    /// Read off (pair, ε) from the parallel component of a field:
    /// ε = ‖M_∥φ‖ and (a, b) the normalized Dirac-pair coefficients.
    pub fn measure_pair(&self, phi: &BlochField) -> Result<(ParameterPair, f64)> {
        let ca = inner_product(self.basis.phi_a(), phi)?;
        let cb = inner_product(self.basis.phi_b(), phi)?;
        let eps = (ca.norm_sqr() + cb.norm_sqr()).sqrt();
        let pair = ParameterPair::new(ca, cb);
        Ok((pair, eps))
    }

    /// The same system with the Dirac-pair gauge rotated by e^{iγ}; the
    /// perturbation report and cached samples follow the new gauge.
    pub fn with_gauge(&self, gamma: f64) -> Result<System> {
        let basis = self.basis.gauge_rotated(gamma);
        let report = complex_interaction(&self.grid, &basis, self.model.k_field(), self.model.m_field())?;
        let phi_a_samples = self.grid.to_grid(basis.phi_a());
        let phi_b_samples = self.grid.to_grid(basis.phi_b());
        Ok(System {
            lattice: self.lattice.clone(),
            index_set: self.index_set.clone(),
            grid: self.grid.clone(),
            potential: self.potential.clone(),
            hamiltonian: self.hamiltonian.clone(),
            basis,
            model: self.model.clone(),
            report,
            phi_a_samples,
            phi_b_samples,
        })
    }

    /// ε·(a·φ₀ᵃ + b·φ₀ᵇ), the fixed parallel part of a bootstrap ansatz.
    pub fn parallel_field(&self, pair: &ParameterPair, epsilon: f64) -> BlochField {
        let mut f = BlochField::zeros(self.index_set.clone());
        f.axpy(pair.a * epsilon, self.basis.phi_a());
        f.axpy(pair.b * epsilon, self.basis.phi_b());
        f
    }
}
