//! Honeycomb potential (Fourier representation + symmetry validation) and the
//! nonlinearity models v(x, |φ|²), with analytic extraction of the |φ|² and
//! |φ|⁴ expansion coefficients K(x), M(x).

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::RealGrid;
use crate::lattice::{rotate_dual_index, FourierIndex};

/// Maximum relative violation of each honeycomb symmetry condition.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SymmetryReport {
    pub realness: f64,
    pub inversion: f64,
    pub rotation: f64,
}

impl SymmetryReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.realness <= tol && self.inversion <= tol && self.rotation <= tol
    }

    pub fn max_violation(&self) -> f64 {
        self.realness.max(self.inversion).max(self.rotation)
    }
}

pub const SYMMETRY_TOL: f64 = 1e-10;

/// Fourier-space description of the linear lattice potential: real
/// coefficients V̂(m1,m2) on plain dual-lattice indices (no K offset), plus a
/// scalar amplitude multiplier. Realness of V(x) is enforced by the real
/// coefficient type together with the inversion condition V̂(−m) = V̂(m).
#[derive(Debug, Clone)]
pub struct HoneycombPotential {
    coeffs: BTreeMap<FourierIndex, f64>,
    pub amplitude: f64,
}

impl HoneycombPotential {
    /// V(x) = cos(k1·x) + cos(k2·x) + cos((k1+k2)·x); its (1,1) coefficient is
    /// 1/2 in the orthogonal-coefficient convention, so positive amplitudes
    /// sit in the two-fold-degenerate regime.
    pub fn standard() -> Self {
        let mut coeffs = BTreeMap::new();
        for (m1, m2) in [(1, 0), (0, 1), (1, 1)] {
            coeffs.insert(FourierIndex::new(m1, m2), 0.5);
            coeffs.insert(FourierIndex::new(-m1, -m2), 0.5);
        }
        HoneycombPotential {
            coeffs,
            amplitude: 1.0,
        }
    }

    pub fn from_coeffs(coeffs: BTreeMap<FourierIndex, f64>, amplitude: f64) -> Self {
        HoneycombPotential { coeffs, amplitude }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn coeffs(&self) -> &BTreeMap<FourierIndex, f64> {
        &self.coeffs
    }

    /// Shape coefficient V̂(d) without the amplitude factor.
    pub fn coefficient(&self, d: FourierIndex) -> f64 {
        self.coeffs.get(&d).copied().unwrap_or(0.0)
    }

    /// Max violation of the honeycomb conditions: realness (free for real
    /// storage), inversion V̂(−m) = V̂(m), rotation V̂((−m2, m1−m2)) = V̂(m).
    pub fn validate(&self) -> SymmetryReport {
        let scale = self
            .coeffs
            .values()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut inversion = 0.0_f64;
        let mut rotation = 0.0_f64;
        for (&m, &v) in &self.coeffs {
            let neg = self.coefficient(FourierIndex::new(-m.m1, -m.m2));
            inversion = inversion.max((v - neg).abs());
            let rot = self.coefficient(rotate_dual_index(m));
            rotation = rotation.max((v - rot).abs());
        }
        SymmetryReport {
            realness: 0.0,
            inversion: inversion / scale,
            rotation: rotation / scale,
        }
    }

    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.passes(SYMMETRY_TOL) {
            Ok(self)
        } else {
            Err(Error::PotentialSymmetry {
                realness: report.realness,
                inversion: report.inversion,
                rotation: report.rotation,
            })
        }
    }

    /// Samples of the shape Σ V̂(m)·e^{iG·x} on the grid (amplitude excluded).
    /// G·x is exactly 2π(m1·j1 + m2·j2)/n at grid points.
    pub fn sample_shape(&self, grid: &RealGrid) -> Vec<f64> {
        let (n, _) = grid.resolution();
        let mut out = vec![0.0; grid.len()];
        for (&m, &v) in &self.coeffs {
            for j1 in 0..n {
                for j2 in 0..n {
                    let arg = 2.0 * std::f64::consts::PI
                        * (m.m1 as f64 * j1 as f64 + m.m2 as f64 * j2 as f64)
                        / n as f64;
                    // imaginary parts cancel pairwise for inversion-symmetric
                    // real coefficients; only the cosine survives
                    out[j1 * n + j2] += v * arg.cos();
                }
            }
        }
        out
    }

    /// Physical linear potential amplitude·V(x) on the grid.
    pub fn sample_scaled(&self, grid: &RealGrid) -> Vec<f64> {
        let mut s = self.sample_shape(grid);
        for v in &mut s {
            *v *= self.amplitude;
        }
        s
    }
}

/// Honeycomb symmetry checks for grid-sampled complex data.
pub fn validate_complex_samples(grid: &RealGrid, samples: &[Complex64]) -> SymmetryReport {
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let scale = samples
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()))
        .max(f64::MIN_POSITIVE);
    let realness = samples.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs())) / scale;
    let mut report = validate_real_samples(grid, &re);
    report.realness = realness;
    report
}

/// Honeycomb symmetry checks for grid-sampled real data.
pub fn validate_real_samples(grid: &RealGrid, samples: &[f64]) -> SymmetryReport {
    let scale = samples
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let rotated = grid.rotate_samples(samples);
    let inverted = grid.invert_samples(samples);
    let mut rotation = 0.0_f64;
    let mut inversion = 0.0_f64;
    for i in 0..samples.len() {
        rotation = rotation.max((samples[i] - rotated[i]).abs());
        inversion = inversion.max((samples[i] - inverted[i]).abs());
    }
    SymmetryReport {
        realness: 0.0,
        inversion: inversion / scale,
        rotation: rotation / scale,
    }
}

/// Which nonlinear response to use. The Custom variant is the exact truncated
/// polynomial v = K(x)s + M(x)s².
#[derive(Debug, Clone)]
pub enum NonlinearityKind {
    Kerr { k0: f64 },
    Saturable { k0: f64 },
    Custom { k: Vec<f64>, m: Vec<f64> },
}

/// The map |φ|² ↦ v(x, |φ|²) together with its grid-sampled Taylor
/// coefficients K(x) (|φ|² order) and M(x) (|φ|⁴ order).
///
/// The solver always evaluates the exact v; K and M feed only the closed-form
/// perturbation integrals.
#[derive(Debug, Clone)]
pub struct NonlinearityModel {
    kind: NonlinearityKind,
    k_field: Vec<f64>,
    m_field: Vec<f64>,
    /// Physical linear potential samples (needed by the saturable model).
    vl_samples: Vec<f64>,
}

impl NonlinearityModel {
    /// Build the model over a grid. `vl_samples` is the scaled linear
    /// potential amplitude·V_L(x) sampled on the same grid.
    pub fn new(kind: NonlinearityKind, grid: &RealGrid, vl_samples: Vec<f64>) -> Result<Self> {
        assert_eq!(vl_samples.len(), grid.len(), "potential sample mismatch");
        let (k_field, m_field) = match &kind {
            NonlinearityKind::Kerr { k0 } => {
                (vec![*k0; grid.len()], vec![0.0; grid.len()])
            }
            NonlinearityKind::Saturable { k0 } => {
                let min = vl_samples.iter().fold(f64::INFINITY, |a, &v| a.min(1.0 + v));
                if min <= 0.0 {
                    return Err(Error::SaturableDomain { min });
                }
                let k = vl_samples.iter().map(|&v| -k0 / (1.0 + v).powi(2)).collect();
                let m = vl_samples.iter().map(|&v| k0 / (1.0 + v).powi(3)).collect();
                (k, m)
            }
            NonlinearityKind::Custom { k, m } => {
                assert_eq!(k.len(), grid.len(), "custom K length mismatch");
                assert_eq!(m.len(), grid.len(), "custom M length mismatch");
                (k.clone(), m.clone())
            }
        };
        for field in [&k_field, &m_field] {
            let all_zero = field.iter().all(|&v| v == 0.0);
            if !all_zero {
                let report = validate_real_samples(grid, field);
                if !report.passes(SYMMETRY_TOL) {
                    return Err(Error::PotentialSymmetry {
                        realness: report.realness,
                        inversion: report.inversion,
                        rotation: report.rotation,
                    });
                }
            }
        }
        Ok(NonlinearityModel {
            kind,
            k_field,
            m_field,
            vl_samples,
        })
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn k_field(&self) -> &[f64] {
        &self.k_field
    }

    pub fn m_field(&self) -> &[f64] {
        &self.m_field
    }

    /// Exact model evaluation v(x, density(x)); v(x, 0) = 0 by construction.
    pub fn evaluate_v(&self, density: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(density.len(), self.vl_samples.len(), "density length mismatch");
        if let Some(&bad) = density.iter().find(|&&d| d < 0.0) {
            return Err(Error::NegativeDensity { value: bad });
        }
        let out = match &self.kind {
            NonlinearityKind::Kerr { k0 } => density.iter().map(|&d| k0 * d).collect(),
            NonlinearityKind::Saturable { k0 } => density
                .iter()
                .zip(&self.vl_samples)
                .map(|(&d, &v)| k0 / (1.0 + v + d) - k0 / (1.0 + v))
                .collect(),
            NonlinearityKind::Custom { k, m } => density
                .iter()
                .zip(k.iter().zip(m))
                .map(|(&d, (&kx, &mx))| kx * d + mx * d * d)
                .collect(),
        };
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{IndexSet, LatticeBasis};

    fn grid() -> RealGrid {
        let lat = LatticeBasis::honeycomb();
        let set = IndexSet::build(2).unwrap();
        RealGrid::for_index_set(&set, lat.cell_area)
    }

    #[test]
    fn standard_potential_is_honeycomb() {
        let pot = HoneycombPotential::standard();
        let report = pot.validate();
        assert!(report.passes(SYMMETRY_TOL), "{report:?}");
        // sampled version passes too
        let g = grid();
        let samples = pot.sample_shape(&g);
        let sampled = validate_real_samples(&g, &samples);
        assert!(sampled.passes(SYMMETRY_TOL), "{sampled:?}");
    }

    #[test]
    fn standard_potential_value_at_origin() {
        let g = grid();
        let samples = HoneycombPotential::standard().sample_shape(&g);
        assert!((samples[0] - 3.0).abs() < 1e-12);
    }

    /// The (1,1) coefficient via the cell-integral quadrature oracle:
    /// (1/|cell|)·∫ e^{−i(k1+k2)·x} V(x) dx = 1/2.
    #[test]
    fn coefficient_1_1_by_quadrature() {
        let g = grid();
        let (n, _) = g.resolution();
        let samples = HoneycombPotential::standard().sample_shape(&g);
        let mut acc = Vec::with_capacity(g.len());
        for j1 in 0..n {
            for j2 in 0..n {
                let arg = -2.0 * std::f64::consts::PI * (j1 as f64 + j2 as f64) / n as f64;
                acc.push(Complex64::from_polar(1.0, arg) * samples[j1 * n + j2]);
            }
        }
        let integral = g.integrate(&acc);
        let v11 = integral / g.cell_area();
        assert!((v11 - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        // The raw cell integral itself is area·(1/2) > 0.
        assert!(integral.re > 0.0);
    }

    #[test]
    fn broken_orbit_fails_rotation_check() {
        let mut pot = HoneycombPotential::standard();
        // one member of the (1,−1) orbit alone: rotation symmetry breaks,
        // inversion and realness stay intact
        pot.coeffs.insert(FourierIndex::new(1, -1), 0.05);
        pot.coeffs.insert(FourierIndex::new(-1, 1), 0.05);
        let report = pot.validate();
        assert!(report.inversion <= SYMMETRY_TOL);
        assert!(report.rotation > SYMMETRY_TOL);
        assert!(pot.validated().is_err());
    }

    #[test]
    fn zero_potential_passes() {
        let pot = HoneycombPotential::from_coeffs(BTreeMap::new(), 1.0);
        assert!(pot.validate().passes(SYMMETRY_TOL));
    }

    #[test]
    fn kerr_expansion_is_constant() {
        let g = grid();
        let vl = vec![0.0; g.len()];
        let model = NonlinearityModel::new(NonlinearityKind::Kerr { k0: 1.0 }, &g, vl).unwrap();
        assert!(model.k_field().iter().all(|&k| (k - 1.0).abs() < 1e-15));
        assert!(model.m_field().iter().all(|&m| m == 0.0));
    }

    /// Saturable with V_L ≡ 0: v(s) = 1/(1+s) − 1 = −s + s² − …, so K ≡ −1,
    /// M ≡ +1 (geometric-series oracle).
    #[test]
    fn saturable_flat_background_series() {
        let g = grid();
        let vl = vec![0.0; g.len()];
        let model =
            NonlinearityModel::new(NonlinearityKind::Saturable { k0: 1.0 }, &g, vl).unwrap();
        assert!(model.k_field().iter().all(|&k| (k + 1.0).abs() < 1e-14));
        assert!(model.m_field().iter().all(|&m| (m - 1.0).abs() < 1e-14));
    }

    /// Finite-difference oracle: K(x) = ∂v/∂s at s = 0 within O(h²), and
    /// M(x) = ½·∂²v/∂s² within O(h²).
    #[test]
    fn expansion_matches_finite_differences() {
        let g = grid();
        let pot = HoneycombPotential::standard().with_amplitude(0.4);
        let vl = pot.sample_scaled(&g);
        let model =
            NonlinearityModel::new(NonlinearityKind::Saturable { k0: 0.7 }, &g, vl).unwrap();
        let h = 1e-5;
        let zero = vec![0.0; g.len()];
        let plus = model.evaluate_v(&vec![h; g.len()]).unwrap();
        let plus2 = model.evaluate_v(&vec![2.0 * h; g.len()]).unwrap();
        let at_zero = model.evaluate_v(&zero).unwrap();
        for i in 0..g.len() {
            // one-sided first derivative of O(h²): (4v(h) − v(2h))/(2h)
            let fd_k = (4.0 * plus[i] - plus2[i]) / (2.0 * h);
            assert!((fd_k - model.k_field()[i]).abs() < 1e-7, "K at {i}");
            let fd_m = (plus2[i] - 2.0 * plus[i] + at_zero[i]) / (2.0 * h * h);
            assert!((fd_m - model.m_field()[i]).abs() < 1e-3, "M at {i}");
            assert_eq!(at_zero[i], 0.0);
        }
    }

    #[test]
    fn saturable_domain_violation_is_rejected() {
        let g = grid();
        let vl = vec![-1.5; g.len()];
        assert!(matches!(
            NonlinearityModel::new(NonlinearityKind::Saturable { k0: 1.0 }, &g, vl),
            Err(Error::SaturableDomain { .. })
        ));
    }

    #[test]
    fn evaluate_v_examples() {
        let g = grid();
        let n = g.len();
        let kerr = NonlinearityModel::new(NonlinearityKind::Kerr { k0: 2.0 }, &g, vec![0.0; n])
            .unwrap();
        assert!(kerr.evaluate_v(&vec![0.0; n]).unwrap().iter().all(|&v| v == 0.0));
        assert!(kerr
            .evaluate_v(&vec![0.3; n])
            .unwrap()
            .iter()
            .all(|&v| (v - 0.6).abs() < 1e-15));
        // saturable scalar check: K₀=1, V_L=0, d=1 → 1/2 − 1 = −1/2
        let sat = NonlinearityModel::new(NonlinearityKind::Saturable { k0: 1.0 }, &g, vec![0.0; n])
            .unwrap();
        let v = sat.evaluate_v(&vec![1.0; n]).unwrap();
        assert!(v.iter().all(|&x| (x + 0.5).abs() < 1e-15));
        assert!(matches!(
            sat.evaluate_v(&vec![-1e-3; n]),
            Err(Error::NegativeDensity { .. })
        ));
    }

    /// Cubic-decay check of the Taylor remainder: halving a test density must
    /// shrink ‖v − (K·d + M·d²)‖∞ by ≈ 8×.
    #[test]
    fn taylor_remainder_decays_cubically() {
        let g = grid();
        let pot = HoneycombPotential::standard().with_amplitude(0.3);
        let vl = pot.sample_scaled(&g);
        let model =
            NonlinearityModel::new(NonlinearityKind::Saturable { k0: 1.0 }, &g, vl).unwrap();
        let base: Vec<f64> = (0..g.len()).map(|i| 0.02 * (1.0 + (i % 7) as f64 / 7.0)).collect();
        let remainder = |scale: f64| -> f64 {
            let d: Vec<f64> = base.iter().map(|&b| b * scale).collect();
            let v = model.evaluate_v(&d).unwrap();
            let mut worst = 0.0_f64;
            for i in 0..d.len() {
                let taylor = model.k_field()[i] * d[i] + model.m_field()[i] * d[i] * d[i];
                worst = worst.max((v[i] - taylor).abs());
            }
            worst
        };
        let r1 = remainder(1.0);
        let r2 = remainder(0.5);
        let r4 = remainder(0.25);
        let ratio1 = r1 / r2;
        let ratio2 = r2 / r4;
        assert!((6.0..10.0).contains(&ratio1), "ratio1 = {ratio1}");
        assert!((6.0..10.0).contains(&ratio2), "ratio2 = {ratio2}");
    }
}
