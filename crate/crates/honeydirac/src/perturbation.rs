//! Closed-form perturbation quantities built from the Dirac pair: the quartic
//! overlap integrals, the class-1 resolvent double-overlap sum T₂, the complex
//! interaction term whose argument fixes the equator bifurcation angles, and
//! the necessary-condition landscape over the parameter sphere.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{kahan_complex, kahan_real, BlochField, RealGrid};
use crate::linear_spectrum::{SpectralBasis, SymmetryClass};

/// Normalized Dirac-pair coefficients (a, b) with |a|² + |b|² = 1.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParameterPair {
    pub a: Complex64,
    pub b: Complex64,
}

impl ParameterPair {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        assert!(norm > 0.0, "zero parameter pair");
        ParameterPair {
            a: a / norm,
            b: b / norm,
        }
    }

    pub fn polar_a() -> Self {
        ParameterPair {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn polar_b() -> Self {
        ParameterPair {
            a: Complex64::new(0.0, 0.0),
            b: Complex64::new(1.0, 0.0),
        }
    }

    /// Equator representative (1/√2, e^{iβ}/√2).
    pub fn equator(beta: f64) -> Self {
        let r = 1.0 / 2.0_f64.sqrt();
        ParameterPair {
            a: Complex64::new(r, 0.0),
            b: Complex64::from_polar(r, beta),
        }
    }

    /// (cos θ, sin θ·e^{iβ}); θ = 0 is the a-pole, θ = π/4 the equator.
    pub fn from_angles(theta: f64, beta: f64) -> Self {
        ParameterPair {
            a: Complex64::new(theta.cos(), 0.0),
            b: Complex64::from_polar(theta.sin(), beta),
        }
    }

    /// Quotient-sphere representative: global phase chosen so a is real
    /// nonnegative (b real positive on the b-pole).
    pub fn canonicalized(self) -> Self {
        let phase = if self.a.norm() > 1e-14 {
            self.a.conj() / self.a.norm()
        } else if self.b.norm() > 1e-14 {
            self.b.conj() / self.b.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        ParameterPair {
            a: self.a * phase,
            b: self.b * phase,
        }
    }

    /// Equator coordinate arg(b) in the canonical gauge.
    pub fn beta(&self) -> f64 {
        self.canonicalized().b.arg()
    }

    pub fn norm_defect(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() - 1.0).abs()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuarticIntegrals {
    pub i_a: f64,
    pub i_b: f64,
    pub i_one: f64,
    pub i_int: f64,
}

/// ∫K|φₐ|⁴, ∫K|φ_b|⁴ and ∫K|φₐ|²|φ_b|² by grid quadrature, on explicit fields.
pub fn quartic_integrals_fields(
    grid: &RealGrid,
    phi_a: &BlochField,
    phi_b: &BlochField,
    k_field: &[f64],
) -> QuarticIntegrals {
    let sa = grid.to_grid(phi_a);
    let sb = grid.to_grid(phi_b);
    let w = grid.weight();
    let i_a = kahan_real((0..sa.len()).map(|j| k_field[j] * sa[j].norm_sqr().powi(2))) * w;
    let i_b = kahan_real((0..sb.len()).map(|j| k_field[j] * sb[j].norm_sqr().powi(2))) * w;
    let i_int =
        kahan_real((0..sa.len()).map(|j| k_field[j] * sa[j].norm_sqr() * sb[j].norm_sqr())) * w;
    QuarticIntegrals {
        i_a,
        i_b,
        i_one: 0.5 * (i_a + i_b),
        i_int,
    }
}

/// Quartic integrals of the Dirac pair; I_a = I_b is enforced as a symmetry
/// regression check.
pub fn quartic_integrals(
    grid: &RealGrid,
    basis: &SpectralBasis,
    k_field: &[f64],
) -> Result<QuarticIntegrals> {
    let q = quartic_integrals_fields(grid, basis.phi_a(), basis.phi_b(), k_field);
    if (q.i_a - q.i_b).abs() > 1e-10 * q.i_one.abs().max(1e-300) {
        return Err(Error::Symmetry(format!(
            "quartic integrals broke conjugation symmetry: I_a = {}, I_b = {}",
            q.i_a, q.i_b
        )));
    }
    Ok(q)
}

/// The class-1 resolvent double-overlap sum and its diagnostics.
#[derive(Debug, Clone)]
pub struct T2Sum {
    /// Sum restricted to class-1 states (the defining expression).
    pub restricted: Complex64,
    /// Same sum over every non-Dirac state; the rotation selection rule makes
    /// the extra terms vanish, so this must agree with `restricted`.
    pub unrestricted: Complex64,
    pub n_terms: usize,
    /// (E₀ⁿ − E₀, |term|) per class-1 state, for decay reporting.
    pub term_decay: Vec<(f64, f64)>,
}

/// T₂ = −Σ_{n∈i₁} (1/(E₀ⁿ−E₀)) ∫K φ_b conj(φₐ)² φₙ · ∫K conj(φₐ) φ_b² conj(φₙ)
/// evaluated with an explicit pair (the roles of a and b may be swapped to
/// probe conjugation consistency).
pub fn t2_sum_with_pair(
    grid: &RealGrid,
    phi_a: &BlochField,
    phi_b: &BlochField,
    basis: &SpectralBasis,
    k_field: &[f64],
) -> T2Sum {
    let sa = grid.to_grid(phi_a);
    let sb = grid.to_grid(phi_b);
    let w = grid.weight();
    let npts = sa.len();
    let mut restricted = Vec::new();
    let mut unrestricted = Vec::new();
    let mut term_decay = Vec::new();
    for (lam, phi_n, class) in basis.excited_states() {
        let sn = grid.to_grid(phi_n);
        let x1 = kahan_complex(
            (0..npts).map(|j| k_field[j] * sb[j] * sa[j].conj() * sa[j].conj() * sn[j]),
        ) * w;
        let x2 = kahan_complex(
            (0..npts).map(|j| k_field[j] * sa[j].conj() * sb[j] * sb[j] * sn[j].conj()),
        ) * w;
        let term = -x1 * x2 / Complex64::new(lam - basis.e0, 0.0);
        unrestricted.push(term);
        if class == SymmetryClass::One {
            restricted.push(term);
            term_decay.push((lam - basis.e0, term.norm()));
        }
    }
    T2Sum {
        restricted: kahan_complex(restricted.iter().copied()),
        unrestricted: kahan_complex(unrestricted.iter().copied()),
        n_terms: restricted.len(),
        term_decay,
    }
}

pub fn t2_sum(grid: &RealGrid, basis: &SpectralBasis, k_field: &[f64]) -> T2Sum {
    t2_sum_with_pair(grid, basis.phi_a(), basis.phi_b(), basis, k_field)
}

/// Hypothesis flags go up when a theorem precondition drops below this scale.
pub const DEGENERACY_WARN_TOL: f64 = 1e-8;

/// All closed-form perturbation scalars in one record.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PerturbationReport {
    pub i_one: f64,
    pub i_int: f64,
    pub i_a_minus_i_b: f64,
    pub t2: Complex64,
    /// ∫M·(conj(φₐ)φ_b)³.
    pub m_integral: Complex64,
    /// 3T₂ + ∫M(conj(φₐ)φ_b)³.
    pub i_c_int: Complex64,
    /// Predicted bifurcation angle arg(I_c-int)/3.
    pub theta_pred: f64,
    /// |I_one − 2·I_int|; the eight-mode prediction needs this nonzero.
    pub nondegeneracy: f64,
    pub n_terms_t2: usize,
    /// Set when |I_one − 2 I_int| < 1e−8: the landscape argument is void.
    pub warn_degenerate: bool,
    /// Set when |I_c-int| < 1e−8: the six equator angles are undetermined.
    pub warn_interaction: bool,
    #[serde(skip)]
    pub t2_unrestricted: Complex64,
    #[serde(skip)]
    pub term_decay: Vec<(f64, f64)>,
}

/// Assemble the full report from the spectral basis and nonlinearity fields.
pub fn complex_interaction(
    grid: &RealGrid,
    basis: &SpectralBasis,
    k_field: &[f64],
    m_field: &[f64],
) -> Result<PerturbationReport> {
    let q = quartic_integrals(grid, basis, k_field)?;
    let t2 = t2_sum(grid, basis, k_field);
    let sa = grid.to_grid(basis.phi_a());
    let sb = grid.to_grid(basis.phi_b());
    let m_integral = kahan_complex((0..sa.len()).map(|j| {
        let cross = sa[j].conj() * sb[j];
        m_field[j] * cross * cross * cross
    })) * grid.weight();
    let i_c_int = 3.0 * t2.restricted + m_integral;
    let nondegeneracy = (q.i_one - 2.0 * q.i_int).abs();
    Ok(PerturbationReport {
        i_one: q.i_one,
        i_int: q.i_int,
        i_a_minus_i_b: q.i_a - q.i_b,
        t2: t2.restricted,
        m_integral,
        i_c_int,
        theta_pred: i_c_int.arg() / 3.0,
        nondegeneracy,
        n_terms_t2: t2.n_terms,
        warn_degenerate: nondegeneracy < DEGENERACY_WARN_TOL,
        warn_interaction: i_c_int.norm() < DEGENERACY_WARN_TOL,
        t2_unrestricted: t2.unrestricted,
        term_decay: t2.term_decay,
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LandscapeRow {
    pub theta: f64,
    pub phase: f64,
    pub value: f64,
}

/// |a·b·(|b|²−|a|²)·(I_one−2I_int)| over a (θ, relative-phase) grid on the
/// quotient sphere; its zero set is exactly the poles and the equator.
pub fn necessary_condition_landscape(
    report: &PerturbationReport,
    n_theta: usize,
    n_phase: usize,
) -> Vec<LandscapeRow> {
    let mut rows = Vec::with_capacity(n_theta * n_phase);
    for it in 0..n_theta {
        let theta = 0.5 * std::f64::consts::PI * it as f64 / (n_theta - 1).max(1) as f64;
        for ip in 0..n_phase {
            let phase = 2.0 * std::f64::consts::PI * ip as f64 / n_phase as f64;
            let pair = ParameterPair::from_angles(theta, phase);
            rows.push(LandscapeRow {
                theta,
                phase,
                value: landscape_value(report, &pair),
            });
        }
    }
    rows
}

/// Landscape magnitude at one parameter pair.
pub fn landscape_value(report: &PerturbationReport, pair: &ParameterPair) -> f64 {
    let a = pair.a;
    let b = pair.b;
    (a * b).norm() * (b.norm_sqr() - a.norm_sqr()).abs() * report.nondegeneracy
}
