//! The truncated linear Bloch Hamiltonian H(K) = −Δ_K + εV·V_L and its
//! symmetry-classified spectrum: the degenerate Dirac pair, the projectors
//! onto its span and complement, and the resolvent applied as a spectral sum.
//!
//! Honeycomb realness and inversion symmetry force all potential Fourier
//! coefficients to be real, so H is a real symmetric matrix in the plane-wave
//! basis; symmetry-adapted eigenvectors become complex only through the Z₃
//! character projectors.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{inner_product, BlochField};
use crate::lattice::{FourierIndex, IndexSet, LatticeBasis};
use crate::nonlinearity::HoneycombPotential;

/// Relative eigensolver residual allowance, in units of max|E|.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;
/// Default degeneracy clustering tolerance, in units of max|E|.
pub const DEGENERACY_TOL_FACTOR: f64 = 1e-8;
/// Acceptable distance of a rotation eigenvalue from {1, ω, ω̄}.
pub const CLASS_DEFECT_TOL: f64 = 1e-6;

/// Eigenvalue of the discrete rotation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SymmetryClass {
    One,
    Omega,
    OmegaBar,
}

impl SymmetryClass {
    pub fn label(self) -> Complex64 {
        match self {
            SymmetryClass::One => Complex64::new(1.0, 0.0),
            SymmetryClass::Omega => Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0),
            SymmetryClass::OmegaBar => {
                Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI / 3.0)
            }
        }
    }

    pub fn all() -> [SymmetryClass; 3] {
        [SymmetryClass::One, SymmetryClass::Omega, SymmetryClass::OmegaBar]
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryClass::One => "1",
            SymmetryClass::Omega => "omega",
            SymmetryClass::OmegaBar => "omega_bar",
        }
    }
}

/// Phase convention pinning the U(1)×U(1) gauge of the Dirac pair.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GaugeRecord {
    pub anchor_m1: i32,
    pub anchor_m2: i32,
    pub convention: String,
}

/// Dense H(K) over the index set: diagonal |K+G|², off-diagonal εV·V̂(m−m′).
pub fn build_hamiltonian(
    lattice: &LatticeBasis,
    set: &IndexSet,
    potential: &HoneycombPotential,
    epsilon_v: f64,
) -> DMatrix<f64> {
    build_hamiltonian_at(lattice, set, potential, epsilon_v, [0.0, 0.0])
}

/// H(K + offset) for dispersion sweeps near the Dirac point. Away from K the
/// rotation closure no longer commutes with the kinetic part, so this variant
/// feeds plain eigenvalue sweeps only.
pub fn build_hamiltonian_at(
    lattice: &LatticeBasis,
    set: &IndexSet,
    potential: &HoneycombPotential,
    epsilon_v: f64,
    k_offset: [f64; 2],
) -> DMatrix<f64> {
    let dim = set.len();
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = lattice.momentum_sq_at(k_offset, set.index(i));
    }
    for (&d, &v) in potential.coeffs() {
        if v == 0.0 {
            continue;
        }
        for (j, &mj) in set.indices().iter().enumerate() {
            let target = FourierIndex::new(mj.m1 + d.m1, mj.m2 + d.m2);
            if let Some(i) = set.position(target) {
                h[(i, j)] += epsilon_v * v;
            }
        }
    }
    h
}

/// H applied to a field: two real mat-vecs over the coefficient halves.
pub fn apply_matrix(h: &DMatrix<f64>, f: &BlochField) -> BlochField {
    let n = f.coeffs().len();
    let re = DVector::from_iterator(n, f.coeffs().iter().map(|c| c.re));
    let im = DVector::from_iterator(n, f.coeffs().iter().map(|c| c.im));
    let hre = h * re;
    let him = h * im;
    let coeffs = hre
        .iter()
        .zip(him.iter())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    BlochField::from_coeffs(f.index_set().clone(), coeffs)
}

/// Cyclic Jacobi diagonalization of a symmetric matrix. QL-style solvers
/// deflate early inside the tightly clustered shells of the plane-wave
/// spectrum and can leave per-pair residuals near 1e−6; Jacobi drives every
/// off-diagonal element to eps·‖H‖, meeting the residual contract even on
/// exactly degenerate clusters.
fn jacobi_eigen(h: &DMatrix<f64>, max_sweeps: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let fro = h.norm().max(f64::MIN_POSITIVE);
    let target = 1e-14 * fro;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if (2.0 * off).sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && n > 1 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        return Err(Error::EigenResidual {
            residual: (2.0 * off).sqrt(),
            allowed: target,
        });
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    Ok((eigenvalues, v))
}

/// Dense symmetric eigendecomposition with ascending eigenvalues and a
/// per-pair residual certificate.
pub fn solve_spectrum(h: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (raw_vals, raw_vecs) = jacobi_eigen(h, 60)?;
    let dim = h.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| raw_vals[a].partial_cmp(&raw_vals[b]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw_vals[i]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &raw_vecs.column(i));
    }
    let scale = eigenvalues
        .iter()
        .fold(0.0_f64, |a, &v| a.max(v.abs()))
        .max(1.0);
    let hv = h * &vectors;
    for j in 0..dim {
        let mut residual = 0.0_f64;
        for i in 0..dim {
            residual += (hv[(i, j)] - eigenvalues[j] * vectors[(i, j)]).powi(2);
        }
        let residual = residual.sqrt();
        if residual > EIGEN_RESIDUAL_TOL * scale {
            return Err(Error::EigenResidual {
                residual,
                allowed: EIGEN_RESIDUAL_TOL * scale,
            });
        }
    }
    Ok((eigenvalues, vectors))
}

/// Eigenpairs re-expressed in the symmetry-adapted basis, each carrying a
/// definite rotation eigenvalue.
#[derive(Debug, Clone)]
pub struct ClassifiedSpectrum {
    pub eigenvalues: Vec<f64>,
    pub fields: Vec<BlochField>,
    pub classes: Vec<SymmetryClass>,
}

/// Character projector (1/3)·Σ_j conj(χ)^j R̃^j applied to f.
fn class_project(f: &BlochField, class: SymmetryClass) -> BlochField {
    let chi = class.label();
    let r1 = f.rotated();
    let r2 = r1.rotated();
    let third = Complex64::new(1.0 / 3.0, 0.0);
    let mut out = f.clone();
    out.axpy(chi.conj(), &r1);
    out.axpy(chi.conj() * chi.conj(), &r2);
    out.scale(third);
    out
}

/// Group eigenvalues into degenerate clusters and split each cluster into
/// rotation eigenspaces by character projection. Projected vectors remain
/// eigenvectors because the rotation permutation commutes with H on a
/// rotation-closed index set.
pub fn classify_and_adapt(
    set: &Arc<IndexSet>,
    h: &DMatrix<f64>,
    eigenvalues: &[f64],
    eigenvectors: &DMatrix<f64>,
    tol_degeneracy: f64,
) -> Result<ClassifiedSpectrum> {
    let dim = eigenvalues.len();
    let mut adapted: Vec<(f64, BlochField, SymmetryClass)> = Vec::with_capacity(dim);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && eigenvalues[end] - eigenvalues[end - 1] <= tol_degeneracy {
            end += 1;
        }
        let members: Vec<BlochField> = (start..end)
            .map(|j| {
                let coeffs = (0..dim)
                    .map(|i| Complex64::new(eigenvectors[(i, j)], 0.0))
                    .collect();
                BlochField::from_coeffs(set.clone(), coeffs)
            })
            .collect();
        let mut accepted_in_cluster = 0usize;
        for class in SymmetryClass::all() {
            let mut kept: Vec<BlochField> = Vec::new();
            for member in &members {
                let mut p = class_project(member, class);
                for k in &kept {
                    let overlap = inner_product(k, &p).expect("same set");
                    p.axpy(-overlap, k);
                }
                let norm = p.norm();
                if norm > 1e-4 {
                    p.scale(Complex64::new(1.0 / norm, 0.0));
                    let defect = p.rotated().sub(&p.scaled(class.label())).norm();
                    if defect > CLASS_DEFECT_TOL {
                        return Err(Error::Symmetry(format!(
                            "rotation eigenvalue defect {defect:.3e} for class {} near E = {:.6}",
                            class.name(),
                            eigenvalues[start]
                        )));
                    }
                    let rayleigh = inner_product(&p, &apply_matrix(h, &p)).expect("same set").re;
                    kept.push(p.clone());
                    adapted.push((rayleigh, p, class));
                    accepted_in_cluster += 1;
                }
            }
        }
        if accepted_in_cluster != end - start {
            return Err(Error::Symmetry(format!(
                "cluster near E = {:.6} has dimension {} but {} symmetry-adapted vectors",
                eigenvalues[start],
                end - start,
                accepted_in_cluster
            )));
        }
        start = end;
    }
    adapted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out = ClassifiedSpectrum {
        eigenvalues: Vec::with_capacity(dim),
        fields: Vec::with_capacity(dim),
        classes: Vec::with_capacity(dim),
    };
    for (val, field, class) in adapted {
        out.eigenvalues.push(val);
        out.fields.push(field);
        out.classes.push(class);
    }
    Ok(out)
}

/// The symmetry-classified spectral basis with the distinguished Dirac pair in
/// slots 0 (φ₀ᵃ, class ω) and 1 (φ₀ᵇ = conj_invert(φ₀ᵃ), class ω̄).
#[derive(Debug)]
pub struct SpectralBasis {
    pub eigenvalues: Vec<f64>,
    pub fields: Vec<BlochField>,
    pub classes: Vec<SymmetryClass>,
    pub e0: f64,
    /// Distance from E₀ to the next distinct eigenvalue.
    pub degeneracy_gap: f64,
    pub gauge: GaugeRecord,
    /// Columns = non-Dirac eigenfields, for the resolvent spectral sum.
    excited: DMatrix<Complex64>,
    excited_vals: Vec<f64>,
}

impl SpectralBasis {
    pub fn phi_a(&self) -> &BlochField {
        &self.fields[0]
    }

    pub fn phi_b(&self) -> &BlochField {
        &self.fields[1]
    }

    pub fn n_excited(&self) -> usize {
        self.excited_vals.len()
    }

    /// Iterator over non-Dirac states as (eigenvalue, field, class).
    pub fn excited_states(&self) -> impl Iterator<Item = (f64, &BlochField, SymmetryClass)> {
        (2..self.fields.len()).map(move |i| (self.eigenvalues[i], &self.fields[i], self.classes[i]))
    }

    /// The same basis with φ₀ᵃ multiplied by e^{iγ} (and φ₀ᵇ following the
    /// conjugation convention). Probes gauge covariance of downstream angles.
    pub fn gauge_rotated(&self, gamma: f64) -> SpectralBasis {
        let mut out = SpectralBasis {
            eigenvalues: self.eigenvalues.clone(),
            fields: self.fields.clone(),
            classes: self.classes.clone(),
            e0: self.e0,
            degeneracy_gap: self.degeneracy_gap,
            gauge: GaugeRecord {
                anchor_m1: self.gauge.anchor_m1,
                anchor_m2: self.gauge.anchor_m2,
                convention: format!("{}; extra phase {gamma}", self.gauge.convention),
            },
            excited: self.excited.clone(),
            excited_vals: self.excited_vals.clone(),
        };
        out.fields[0] = self.fields[0].scaled(Complex64::from_polar(1.0, gamma));
        out.fields[1] = out.fields[0].conj_inverted();
        out
    }
}

/// Select and gauge-fix the Dirac pair from a classified spectrum.
///
/// The lowest cluster must be exactly two-dimensional with classes {ω, ω̄};
/// the ω member is phase-fixed so its largest-magnitude coefficient is real
/// positive, and φ₀ᵇ is *defined* as conj_invert(φ₀ᵃ).
pub fn select_dirac(
    set: &Arc<IndexSet>,
    h: &DMatrix<f64>,
    classified: ClassifiedSpectrum,
    tol_degeneracy: f64,
) -> Result<SpectralBasis> {
    let vals = &classified.eigenvalues;
    if vals.len() < 3 {
        return Err(Error::Symmetry("spectrum too small".into()));
    }
    let cluster_size = vals.iter().take_while(|&&v| v - vals[0] <= tol_degeneracy).count();
    if cluster_size != 2 {
        return Err(Error::Degeneracy { found: cluster_size });
    }
    if vals[2] - vals[0] <= 10.0 * tol_degeneracy {
        return Err(Error::Degeneracy { found: 3 });
    }
    let (ia, ib) = match (classified.classes[0], classified.classes[1]) {
        (SymmetryClass::Omega, SymmetryClass::OmegaBar) => (0, 1),
        (SymmetryClass::OmegaBar, SymmetryClass::Omega) => (1, 0),
        (ca, cb) => {
            return Err(Error::Symmetry(format!(
                "Dirac pair classes are ({}, {}), expected (omega, omega_bar)",
                ca.name(),
                cb.name()
            )))
        }
    };

    // Gauge fix: largest-magnitude coefficient real positive. Orbit members
    // tie in magnitude, so accept anything within 1e−9 of the maximum and
    // take the first in index order.
    let mut phi_a = classified.fields[ia].clone();
    let max_mag = phi_a.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    let anchor = phi_a
        .coeffs()
        .iter()
        .position(|c| c.norm() >= (1.0 - 1e-9) * max_mag)
        .expect("nonzero field");
    let c = phi_a.coeffs()[anchor];
    phi_a.scale(c.conj() / c.norm());
    let phi_b = phi_a.conj_inverted();

    let cross = inner_product(&phi_a, &phi_b)?.norm();
    if cross > 1e-10 {
        return Err(Error::Symmetry(format!(
            "Dirac pair not orthogonal (|<a,b>| = {cross:.3e})"
        )));
    }
    let ea = inner_product(&phi_a, &apply_matrix(h, &phi_a))?.re;
    let eb = inner_product(&phi_b, &apply_matrix(h, &phi_b))?.re;
    if (ea - eb).abs() > 1e-12 * ea.abs().max(1.0) {
        return Err(Error::Symmetry(format!(
            "conjugation-inversion eigenvalue mismatch: {ea} vs {eb}"
        )));
    }
    let e0 = 0.5 * (ea + eb);

    let anchor_idx = set.index(anchor);
    let gauge = GaugeRecord {
        anchor_m1: anchor_idx.m1,
        anchor_m2: anchor_idx.m2,
        convention: "anchor coefficient real positive; phi_b = conj_invert(phi_a)".to_string(),
    };

    let mut eigenvalues = vec![ea, eb];
    let mut fields = vec![phi_a, phi_b];
    let mut classes = vec![SymmetryClass::Omega, SymmetryClass::OmegaBar];
    let _ = ib;
    for i in 2..vals.len() {
        eigenvalues.push(classified.eigenvalues[i]);
        fields.push(classified.fields[i].clone());
        classes.push(classified.classes[i]);
    }

    let dim = set.len();
    let n_exc = fields.len() - 2;
    let excited = DMatrix::from_fn(dim, n_exc, |i, j| fields[j + 2].coeffs()[i]);
    let excited_vals = eigenvalues[2..].to_vec();
    let degeneracy_gap = eigenvalues[2] - e0;

    Ok(SpectralBasis {
        eigenvalues,
        fields,
        classes,
        e0,
        degeneracy_gap,
        gauge,
        excited,
        excited_vals,
    })
}

/// Σ_{n∉Dirac} φ₀ⁿ⟨φ₀ⁿ, f⟩/(E₀ⁿ − E₀ − shift); the discrete (L − shift)⁻¹M_⊥.
pub fn resolvent_apply(basis: &SpectralBasis, f: &BlochField, shift: f64) -> Result<BlochField> {
    let window = basis.degeneracy_gap / 2.0;
    if shift.is_nan() || shift.abs() >= window {
        return Err(Error::ShiftWindow { shift, window });
    }
    let v = DVector::from_column_slice(f.coeffs());
    let mut g = basis.excited.ad_mul(&v);
    for (gi, &lam) in g.iter_mut().zip(&basis.excited_vals) {
        *gi /= Complex64::new(lam - basis.e0 - shift, 0.0);
    }
    let out = &basis.excited * g;
    Ok(BlochField::from_coeffs(
        f.index_set().clone(),
        out.as_slice().to_vec(),
    ))
}

/// M_∥f = ⟨φ₀ᵃ,f⟩φ₀ᵃ + ⟨φ₀ᵇ,f⟩φ₀ᵇ.
pub fn project_parallel(basis: &SpectralBasis, f: &BlochField) -> Result<BlochField> {
    let ca = inner_product(basis.phi_a(), f)?;
    let cb = inner_product(basis.phi_b(), f)?;
    let mut out = BlochField::zeros(f.index_set().clone());
    out.axpy(ca, basis.phi_a());
    out.axpy(cb, basis.phi_b());
    Ok(out)
}

/// M_⊥ = I − M_∥.
pub fn project_perp(basis: &SpectralBasis, f: &BlochField) -> Result<BlochField> {
    let par = project_parallel(basis, f)?;
    Ok(f.sub(&par))
}

/// Build spectrum and classification for a potential in one step.
pub fn classified_spectrum(
    lattice: &LatticeBasis,
    set: &Arc<IndexSet>,
    potential: &HoneycombPotential,
    epsilon_v: f64,
) -> Result<(DMatrix<f64>, ClassifiedSpectrum)> {
    let h = build_hamiltonian(lattice, set, potential, epsilon_v);
    let (vals, vecs) = solve_spectrum(&h)?;
    let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs())).max(1.0);
    let classified = classify_and_adapt(set, &h, &vals, &vecs, DEGENERACY_TOL_FACTOR * scale)?;
    Ok((h, classified))
}

/// Full pipeline to a gauge-fixed Dirac basis.
pub fn dirac_basis(
    lattice: &LatticeBasis,
    set: &Arc<IndexSet>,
    potential: &HoneycombPotential,
    epsilon_v: f64,
) -> Result<(DMatrix<f64>, SpectralBasis)> {
    let h = build_hamiltonian(lattice, set, potential, epsilon_v);
    let (vals, vecs) = solve_spectrum(&h)?;
    let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs())).max(1.0);
    let tol = DEGENERACY_TOL_FACTOR * scale;
    let classified = classify_and_adapt(set, &h, &vals, &vecs, tol)?;
    let basis = select_dirac(set, &h, classified, tol)?;
    Ok((h, basis))
}
