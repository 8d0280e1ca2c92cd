//! K-quasi-periodic fields as Fourier coefficients on an `IndexSet`, plus the
//! pseudospectral machinery: inner products, FFT transforms to a real-space
//! grid over one unit cell, pointwise multiplication with dealiasing by
//! spectral truncation, and the symmetry operators (rotation and
//! conjugation-inversion).
//!
//! Convention: coefficient c(m1,m2) multiplies the orthonormal plane wave
//! e^{i(K+G)·x}/√|cell|, so ‖f‖²_{L²} = Σ|c|² with no area factors.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::IndexSet;

/// Compensated (Kahan) summation; grid reductions hit symmetry budgets of
/// 1e−10·ε³ and below, which plain summation noise can graze.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Kahan-compensated complex reduction.
pub fn kahan_complex<I: IntoIterator<Item = Complex64>>(terms: I) -> Complex64 {
    let mut re = KahanSum::default();
    let mut im = KahanSum::default();
    for t in terms {
        re.add(t.re);
        im.add(t.im);
    }
    Complex64::new(re.value(), im.value())
}

pub fn kahan_real<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut s = KahanSum::default();
    for t in terms {
        s.add(t);
    }
    s.value()
}

/// Fourier coefficients of a K-quasi-periodic function, aligned with a shared
/// `IndexSet`. Immutable value semantics; all operations are pure.
#[derive(Debug, Clone)]
pub struct BlochField {
    coeffs: Vec<Complex64>,
    index_set: Arc<IndexSet>,
}

impl BlochField {
    pub fn zeros(index_set: Arc<IndexSet>) -> Self {
        let coeffs = vec![Complex64::default(); index_set.len()];
        BlochField { coeffs, index_set }
    }

    pub fn from_coeffs(index_set: Arc<IndexSet>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), index_set.len(), "coefficient length mismatch");
        BlochField { coeffs, index_set }
    }

    /// Single orthonormal plane wave at `position`.
    pub fn unit(index_set: Arc<IndexSet>, position: usize) -> Self {
        let mut f = Self::zeros(index_set);
        f.coeffs[position] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.index_set
    }

    pub fn same_index_set(&self, other: &BlochField) -> bool {
        Arc::ptr_eq(&self.index_set, &other.index_set)
            || self.index_set.indices() == other.index_set.indices()
    }

    pub fn norm_sq(&self) -> f64 {
        kahan_real(self.coeffs.iter().map(|c| c.norm_sqr()))
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&mut self, s: Complex64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// self += s·other (panics on mismatched sets; internal hot path).
    pub fn axpy(&mut self, s: Complex64, other: &BlochField) {
        assert!(self.same_index_set(other), "index set mismatch");
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += s * o;
        }
    }

    pub fn sub(&self, other: &BlochField) -> BlochField {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        out
    }

    pub fn distance(&self, other: &BlochField) -> f64 {
        self.sub(other).norm()
    }

    /// Rotation image: the coefficient at rotate_index(idx) of the output is
    /// the coefficient at idx of the input — a pure basis permutation, exactly
    /// unitary because the index set is rotation-closed.
    pub fn rotated(&self) -> BlochField {
        let perm = self.index_set.rotation_perm();
        let mut out = vec![Complex64::default(); self.coeffs.len()];
        for (i, &p) in perm.iter().enumerate() {
            out[p] = self.coeffs[i];
        }
        BlochField::from_coeffs(self.index_set.clone(), out)
    }

    /// x ↦ conj(f(−x)). In coefficients this is plain conjugation at the same
    /// index, since conj(e^{i(K+G)·(−x)}) = e^{i(K+G)·x}.
    pub fn conj_inverted(&self) -> BlochField {
        let out = self.coeffs.iter().map(|c| c.conj()).collect();
        BlochField::from_coeffs(self.index_set.clone(), out)
    }
}

/// ⟨f, g⟩ = Σ conj(c_f)·c_g; conjugate-linear in the first argument.
pub fn inner_product(f: &BlochField, g: &BlochField) -> Result<Complex64> {
    if !f.same_index_set(g) {
        return Err(Error::IndexSetMismatch);
    }
    Ok(kahan_complex(
        f.coeffs()
            .iter()
            .zip(g.coeffs())
            .map(|(a, b)| a.conj() * b),
    ))
}

/// Uniform n×n sampling of one unit cell in lattice coordinates
/// x = (j1·r1 + j2·r2)/n, with FFT plans for the transform pair.
///
/// The grid must satisfy n ≥ 3(2N+1) so that cubic (and, by truncation,
/// quintic) pointwise products leave spectral truncation as the only error
/// source, and so that no two set indices collide modulo n.
#[derive(Clone)]
pub struct RealGrid {
    n: usize,
    cell_area: f64,
    /// e^{2πi(j1−j2)/(3n)} — the K-offset carried by every plane wave.
    phase: Vec<Complex64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for RealGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RealGrid")
            .field("n", &self.n)
            .field("cell_area", &self.cell_area)
            .finish()
    }
}

impl RealGrid {
    /// Smallest admissible square grid for the set: n = 3(2N+1).
    pub fn for_index_set(index_set: &IndexSet, cell_area: f64) -> Self {
        let n = 3 * (2 * index_set.cutoff() as usize + 1);
        Self::with_resolution(n, index_set, cell_area).expect("canonical grid is admissible")
    }

    pub fn with_resolution(n: usize, index_set: &IndexSet, cell_area: f64) -> Result<Self> {
        let required = 3 * (2 * index_set.cutoff() as usize + 1);
        if n < required {
            return Err(Error::GridTooCoarse { n, required });
        }
        // Wraparound safety: distinct set indices must stay distinct mod n.
        debug_assert!(2 * (index_set.max_component() as usize) < n);
        let mut planner = FftPlanner::new();
        let fft_inv = planner.plan_fft_inverse(n);
        let fft_fwd = planner.plan_fft_forward(n);
        let mut phase = Vec::with_capacity(n * n);
        for j1 in 0..n {
            for j2 in 0..n {
                let arg = 2.0 * std::f64::consts::PI * (j1 as f64 - j2 as f64) / (3.0 * n as f64);
                phase.push(Complex64::from_polar(1.0, arg));
            }
        }
        Ok(RealGrid {
            n,
            cell_area,
            phase,
            fft_fwd,
            fft_inv,
        })
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n, self.n)
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }

    /// Quadrature weight |cell|/(n·n); exact for trig polynomials the grid resolves.
    pub fn weight(&self) -> f64 {
        self.cell_area / (self.n * self.n) as f64
    }

    fn fft_2d(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let fft = if inverse { &self.fft_inv } else { &self.fft_fwd };
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for row in data.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
        let mut col = vec![Complex64::default(); n];
        for j2 in 0..n {
            for j1 in 0..n {
                col[j1] = data[j1 * n + j2];
            }
            fft.process_with_scratch(&mut col, &mut scratch);
            for j1 in 0..n {
                data[j1 * n + j2] = col[j1];
            }
        }
    }

    /// Samples of f on the grid, row-major over (j1, j2).
    pub fn to_grid(&self, f: &BlochField) -> Vec<Complex64> {
        let n = self.n;
        let mut data = vec![Complex64::default(); n * n];
        for (i, &idx) in f.index_set().indices().iter().enumerate() {
            let b1 = idx.m1.rem_euclid(n as i32) as usize;
            let b2 = idx.m2.rem_euclid(n as i32) as usize;
            data[b1 * n + b2] = f.coeffs()[i];
        }
        self.fft_2d(&mut data, true);
        let scale = 1.0 / self.cell_area.sqrt();
        for (d, p) in data.iter_mut().zip(&self.phase) {
            *d *= p * scale;
        }
        data
    }

    /// Inverse of `to_grid`; frequencies outside the index set are discarded
    /// (spectral truncation).
    pub fn from_grid(&self, samples: &[Complex64], index_set: &Arc<IndexSet>) -> BlochField {
        let n = self.n;
        assert_eq!(samples.len(), n * n, "sample length mismatch");
        let scale = self.cell_area.sqrt() / (n * n) as f64;
        let mut data: Vec<Complex64> = samples
            .iter()
            .zip(&self.phase)
            .map(|(s, p)| s * p.conj() * scale)
            .collect();
        self.fft_2d(&mut data, false);
        let coeffs = index_set
            .indices()
            .iter()
            .map(|idx| {
                let b1 = idx.m1.rem_euclid(n as i32) as usize;
                let b2 = idx.m2.rem_euclid(n as i32) as usize;
                data[b1 * n + b2]
            })
            .collect();
        BlochField::from_coeffs(index_set.clone(), coeffs)
    }

    /// |f|² samples.
    pub fn density(&self, f: &BlochField) -> Vec<f64> {
        self.to_grid(f).iter().map(|z| z.norm_sqr()).collect()
    }

    /// Quadrature of complex samples over the cell.
    pub fn integrate(&self, samples: &[Complex64]) -> Complex64 {
        kahan_complex(samples.iter().copied()) * self.weight()
    }

    pub fn integrate_real(&self, samples: &[f64]) -> f64 {
        kahan_real(samples.iter().copied()) * self.weight()
    }

    /// Pullback of cell-periodic sampled data under the 2π/3 rotation:
    /// out(x) = in(Rx). Rotation acts on lattice coordinates as
    /// (s1,s2) ↦ (s2, −s1−s2), an automorphism of the square grid, so the
    /// pullback is exact for periodic multipliers (potentials, K, M).
    pub fn rotate_samples(&self, samples: &[f64]) -> Vec<f64> {
        let n = self.n as i64;
        let mut out = vec![0.0; samples.len()];
        for j1 in 0..n {
            for j2 in 0..n {
                let p1 = j2;
                let p2 = (-j1 - j2).rem_euclid(n);
                out[(j1 * n + j2) as usize] = samples[(p1 * n + p2) as usize];
            }
        }
        out
    }

    /// Pullback of cell-periodic sampled data under inversion: out(x) = in(−x).
    pub fn invert_samples(&self, samples: &[f64]) -> Vec<f64> {
        let n = self.n as i64;
        let mut out = vec![0.0; samples.len()];
        for j1 in 0..n {
            for j2 in 0..n {
                let p1 = (-j1).rem_euclid(n);
                let p2 = (-j2).rem_euclid(n);
                out[(j1 * n + j2) as usize] = samples[(p1 * n + p2) as usize];
            }
        }
        out
    }
}

/// Pointwise product of a real multiplier with a field, truncated back onto
/// the field's index set.
pub fn pointwise_apply(grid: &RealGrid, f: &BlochField, multiplier: &[f64]) -> BlochField {
    assert_eq!(multiplier.len(), grid.len(), "multiplier length mismatch");
    let mut samples = grid.to_grid(f);
    for (s, &m) in samples.iter_mut().zip(multiplier) {
        *s *= m;
    }
    grid.from_grid(&samples, f.index_set())
}
