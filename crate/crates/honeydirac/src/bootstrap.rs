//! Fixed-point bootstrap construction of nonlinear (pseudo-)eigenpairs.
//!
//! One bootstrap run freezes the density |φ_t|² inside the nonlinearity,
//! solves the orthogonal-correction equation
//!     (L − ℜE₁)φ̃ + M_⊥[v(|φ_t|²)(φ̃ + ε(aφ₀ᵃ+bφ₀ᵇ))] = 0
//! together with the projected consistency condition fixing E₁, then thaws
//! the density and repeats until the iterates settle. True eigenpairs appear
//! at the poles of the parameter sphere and at the six equator angles where
//! the pseudo-eigenvalue becomes real.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{kahan_complex, BlochField};
use crate::linear_spectrum::{project_perp, resolvent_apply};
use crate::perturbation::{landscape_value, ParameterPair};
use crate::system::System;

/// Where the resolvent shift sits during the correction solve. Both modes
/// target the same equation; `RealE1` folds ℜE₁ into the denominators, `Zero`
/// keeps the resolvent unshifted and iterates the shift term on the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ShiftMode {
    Zero,
    RealE1,
}

#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    /// Amplitude of the parallel part: ‖M_∥φ‖ = ε.
    pub epsilon: f64,
    /// Convergence of the inner energy fixed point, relative to ε²·(leading value).
    pub inner_tol: f64,
    /// L² distance between consecutive outer iterates.
    pub outer_tol: f64,
    /// True-eigenpair threshold for |ℑE′|, relative to ε⁴·|I_c-int|.
    pub pseudo_tol: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    pub shift_mode: ShiftMode,
    /// Upper end of the contractive regime accepted by `validate`.
    pub eps_max: f64,
    /// Initial β samples for the bifurcation scan.
    pub beta_scan_samples: usize,
}

impl BootstrapConfig {
    pub fn new(epsilon: f64) -> Self {
        BootstrapConfig {
            epsilon,
            inner_tol: 1e-9,
            outer_tol: 1e-9,
            pseudo_tol: 1e-3,
            max_inner: 400,
            max_outer: 80,
            shift_mode: ShiftMode::RealE1,
            eps_max: 0.25,
            beta_scan_samples: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < self.eps_max) {
            return Err(Error::Config(format!(
                "epsilon {} outside (0, {})",
                self.epsilon, self.eps_max
            )));
        }
        for (name, tol) in [
            ("inner_tol", self.inner_tol),
            ("outer_tol", self.outer_tol),
            ("pseudo_tol", self.pseudo_tol),
        ] {
            if tol.is_nan() || tol <= f64::EPSILON {
                return Err(Error::Config(format!("{name} must exceed machine epsilon")));
            }
        }
        if self.beta_scan_samples < 12 {
            return Err(Error::Config("beta_scan_samples must be at least 12".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarMode {
    APole,
    BPole,
}

/// Diagnostics of one correction (Picard) solve.
#[derive(Debug, Clone, Default)]
pub struct CorrectionStats {
    pub sweeps: usize,
    /// Per-sweep distance ratios; the contraction rate of the map, O(ε²).
    pub ratios: Vec<f64>,
}

/// A converged (pseudo-)eigenpair.
#[derive(Debug, Clone)]
pub struct ModeResult {
    pub pair: ParameterPair,
    pub epsilon: f64,
    /// Full field ε(aφ₀ᵃ + bφ₀ᵇ) + φ̃.
    pub phi: BlochField,
    /// E′ = E − E₀ (complex for pseudo-eigenpairs).
    pub e_shift: Complex64,
    /// Relative residual of the full nonlinear equation at E = E₀ + ℜE′.
    pub residual: f64,
    pub im_energy: f64,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub is_true_eigenpair: bool,
    pub correction_norm: f64,
    /// Distance ratios of consecutive outer steps; bounded by C·ε².
    pub outer_contraction: Vec<f64>,
    /// Residual of the defining pseudo-eigenpair equations at convergence.
    pub consistency_residual: f64,
    /// Defect of the un-projected consistency row.
    pub second_consistency: Complex64,
    pub beta: Option<f64>,
}

/// Budget for the rotation-cancelled second consistency row of polar modes.
const CANCELLATION_FACTOR: f64 = 1e-10;
/// Bisection width on β for equator root location.
const BETA_BISECT_TOL: f64 = 1e-6;

struct Runner<'a> {
    sys: &'a System,
    cfg: &'a BootstrapConfig,
    pair: ParameterPair,
    eps: f64,
    par_field: BlochField,
    par_samples: Vec<Complex64>,
    /// Projection row for E₁: the pair member with the larger coefficient.
    proj_samples: &'a [Complex64],
    proj_coeff: Complex64,
    other_samples: &'a [Complex64],
    other_coeff: Complex64,
    /// ε²-scale leading energy coefficient for the μ parametrization.
    e_lead: f64,
    is_polar: bool,
}

impl<'a> Runner<'a> {
    fn new(sys: &'a System, cfg: &'a BootstrapConfig, pair: ParameterPair) -> Result<Self> {
        cfg.validate()?;
        let pair = pair.canonicalized();
        let eps = cfg.epsilon;
        let par_field = sys.parallel_field(&pair, eps);
        let par_samples: Vec<Complex64> = (0..sys.grid.len())
            .map(|j| {
                (pair.a * sys.phi_a_samples[j] + pair.b * sys.phi_b_samples[j]) * eps
            })
            .collect();
        // Projection row follows the larger coefficient. The margin keeps the
        // equator tie |a| = |b| deterministically on the φ₀ᵃ row: the two rows
        // define conjugate pseudo-eigenvalues, so a last-bit tie-break would
        // flip the sign of ℑE₁ with the rounding of β.
        let project_on_a = pair.a.norm() >= pair.b.norm() - 1e-9;
        let (proj_samples, proj_coeff, other_samples, other_coeff) = if project_on_a {
            (&sys.phi_a_samples[..], pair.a, &sys.phi_b_samples[..], pair.b)
        } else {
            (&sys.phi_b_samples[..], pair.b, &sys.phi_a_samples[..], pair.a)
        };
        let (wa, wb) = (proj_coeff.norm_sqr(), other_coeff.norm_sqr());
        let e_lead = wa * sys.report.i_one + 2.0 * wb * sys.report.i_int;
        let is_polar = other_coeff.norm() < 1e-12;
        Ok(Runner {
            sys,
            cfg,
            pair,
            eps,
            par_field,
            par_samples,
            proj_samples,
            proj_coeff,
            other_samples,
            other_coeff,
            e_lead,
            is_polar,
        })
    }

    /// E₁ from the projected consistency row:
    /// E₁ = ⟨φ_proj, v·(φ_par + φ̃)⟩ / (ε·p).
    fn consistency(&self, v: &[f64], corr_samples: &[Complex64]) -> Complex64 {
        let w = self.sys.grid.weight();
        let total = kahan_complex((0..v.len()).map(|j| {
            self.proj_samples[j].conj() * v[j] * (self.par_samples[j] + corr_samples[j])
        })) * w;
        total / (self.proj_coeff * self.eps)
    }

    /// Defect of the other consistency row: ⟨φ_other, v·φ⟩ − ε·q·E₁.
    fn second_row_defect(&self, v: &[f64], corr_samples: &[Complex64], e1: Complex64) -> Complex64 {
        let w = self.sys.grid.weight();
        let row = kahan_complex((0..v.len()).map(|j| {
            self.other_samples[j].conj() * v[j] * (self.par_samples[j] + corr_samples[j])
        })) * w;
        row - self.other_coeff * self.eps * e1
    }

    /// Picard solve of (L − s)φ̃ + M_⊥[v(φ̃ + φ_par)] = 0 at fixed v and s.
    fn solve_correction(
        &self,
        v: &[f64],
        shift: f64,
        start: BlochField,
        tol: f64,
    ) -> Result<(BlochField, CorrectionStats)> {
        let grid = &self.sys.grid;
        let basis = &self.sys.basis;
        let resolvent_shift = match self.cfg.shift_mode {
            ShiftMode::RealE1 => shift,
            ShiftMode::Zero => 0.0,
        };
        let mut corr = start;
        let mut stats = CorrectionStats::default();
        let mut prev_dist = f64::NAN;
        let mut rising = 0usize;
        loop {
            if stats.sweeps >= self.cfg.max_inner {
                return Err(Error::InnerMaxIter {
                    max: self.cfg.max_inner,
                });
            }
            let corr_samples = grid.to_grid(&corr);
            let mut prod: Vec<Complex64> = (0..v.len())
                .map(|j| -(self.par_samples[j] + corr_samples[j]) * v[j])
                .collect();
            // prod = −v·(φ_par + φ̃); in Zero mode the shift term joins the RHS
            let mut rhs = grid.from_grid(&prod, &self.sys.index_set);
            prod.clear();
            if matches!(self.cfg.shift_mode, ShiftMode::Zero) && shift != 0.0 {
                rhs.axpy(Complex64::new(shift, 0.0), &corr);
            }
            let next = resolvent_apply(basis, &rhs, resolvent_shift)?;
            let dist = next.distance(&corr);
            stats.sweeps += 1;
            if prev_dist.is_finite() && prev_dist > 0.0 {
                let ratio = dist / prev_dist;
                stats.ratios.push(ratio);
                if ratio >= 1.0 && dist > tol {
                    rising += 1;
                    if rising >= 2 {
                        return Err(Error::InnerDiverged { ratio });
                    }
                } else {
                    rising = 0;
                }
            }
            prev_dist = dist;
            corr = next;
            if dist <= tol {
                return Ok((corr, stats));
            }
        }
    }

    /// Inner fixed point for (φ̃, E₁) at frozen v: damped Picard on the
    /// relative energy correction μ, re-solving the correction equation at
    /// each shift update.
    fn solve_inner(
        &self,
        v: &[f64],
        corr_start: BlochField,
        e1_start: Complex64,
    ) -> Result<(BlochField, Vec<Complex64>, Complex64, usize)> {
        let scale = (self.eps * self.eps * self.e_lead).abs().max(1e-300);
        let corr_tol = 0.01 * self.cfg.outer_tol;
        let mut e1 = e1_start;
        let mut corr = corr_start;
        let mut updates = 0usize;
        loop {
            if updates >= self.cfg.max_inner {
                return Err(Error::InnerMaxIter {
                    max: self.cfg.max_inner,
                });
            }
            let (next, _) = self.solve_correction(v, e1.re, corr, corr_tol)?;
            corr = next;
            let corr_samples = self.sys.grid.to_grid(&corr);
            let e1_meas = self.consistency(v, &corr_samples);
            updates += 1;
            if self.e_lead.abs() > 1e-300 {
                let mu = e1_meas / Complex64::new(self.eps * self.eps * self.e_lead, 0.0)
                    - Complex64::new(1.0, 0.0);
                if mu.norm() > 1.0 {
                    return Err(Error::MuOutOfRange { mu: mu.norm() });
                }
            }
            let delta = (e1_meas - e1).norm();
            if delta <= self.cfg.inner_tol * scale {
                return Ok((corr, corr_samples, e1_meas, updates));
            }
            // damping 0.5
            e1 += 0.5 * (e1_meas - e1);
        }
    }

    /// The outer bootstrap loop: freeze |φ_t|², solve the inner pair, thaw.
    fn run(&self, initial_correction: Option<BlochField>) -> Result<ModeResult> {
        let grid = &self.sys.grid;
        let mut corr = initial_correction.unwrap_or_else(|| BlochField::zeros(self.sys.index_set.clone()));
        let mut phi_t = self.par_field.clone();
        phi_t.axpy(Complex64::new(1.0, 0.0), &corr);
        let mut e1 = Complex64::new(self.eps * self.eps * self.e_lead, 0.0);
        let mut outer_dists: Vec<f64> = Vec::new();
        let mut ratios: Vec<f64> = Vec::new();
        let mut total_inner = 0usize;
        let mut outer_iterations = 0usize;
        let mut converged = false;
        while outer_iterations < self.cfg.max_outer {
            outer_iterations += 1;
            let density = grid.density(&phi_t);
            let v = self.sys.model.evaluate_v(&density)?;
            let (corr_new, _, e1_new, inner) = self.solve_inner(&v, corr, e1)?;
            total_inner += inner;
            let mut phi_next = self.par_field.clone();
            phi_next.axpy(Complex64::new(1.0, 0.0), &corr_new);
            let dist = phi_next.distance(&phi_t);
            if let Some(&prev) = outer_dists.last() {
                if prev > 0.0 {
                    ratios.push(dist / prev);
                }
            }
            outer_dists.push(dist);
            phi_t = phi_next;
            corr = corr_new;
            e1 = e1_new;
            if dist <= self.cfg.outer_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::OuterMaxIter {
                max: self.cfg.max_outer,
            });
        }

        // Final certificates with the self-consistent density.
        let density = grid.density(&phi_t);
        let v = self.sys.model.evaluate_v(&density)?;
        let corr_samples = grid.to_grid(&corr);
        let e_final = self.consistency(&v, &corr_samples);
        let c2 = self.second_row_defect(&v, &corr_samples, e_final);

        // orthogonality of the correction to the Dirac pair
        let ortho = crate::fields::inner_product(self.sys.basis.phi_a(), &corr)?.norm()
            + crate::fields::inner_product(self.sys.basis.phi_b(), &corr)?.norm();
        if ortho > 1e-12 * corr.norm().max(1e-300) {
            return Err(Error::Symmetry(format!(
                "correction leaked onto the Dirac pair: {ortho:.3e}"
            )));
        }

        // residual of the defining pair of equations
        let eq_residual = {
            let phi_samples: Vec<Complex64> = (0..v.len())
                .map(|j| (self.par_samples[j] + corr_samples[j]) * v[j])
                .collect();
            let vphi = grid.from_grid(&phi_samples, &self.sys.index_set);
            let vphi_perp = project_perp(&self.sys.basis, &vphi)?;
            let mut r = self.sys.apply_linear(&corr);
            r.axpy(Complex64::new(-(self.sys.basis.e0 + e_final.re), 0.0), &corr);
            r.axpy(Complex64::new(1.0, 0.0), &vphi_perp);
            r.norm()
        };
        if eq_residual > self.cfg.outer_tol {
            return Err(Error::Certification(format!(
                "defining equations not satisfied at convergence: {eq_residual:.3e}"
            )));
        }

        if self.is_polar {
            let budget = CANCELLATION_FACTOR * self.eps.powi(3);
            if c2.norm() > budget {
                return Err(Error::Cancellation {
                    defect: c2.norm(),
                    budget,
                });
            }
            let e_total = (self.sys.basis.e0 + e_final.re).abs();
            if e_final.im.abs() > 1e-10 * e_total {
                return Err(Error::Symmetry(format!(
                    "polar eigenvalue has imaginary part {:.3e}",
                    e_final.im
                )));
            }
        }

        let energy = self.sys.basis.e0 + e_final.re;
        let residual = self.sys.nonlinear_residual(&phi_t, energy)?;
        if self.is_polar && residual > 10.0 * self.cfg.outer_tol {
            return Err(Error::Certification(format!(
                "polar mode residual {residual:.3e} above 10·outer_tol"
            )));
        }

        let icint = self.sys.report.i_c_int.norm();
        let threshold = self.cfg.pseudo_tol * self.eps.powi(4) * icint;
        let is_true = e_final.im.abs() <= threshold;

        let beta = if self.is_polar {
            None
        } else {
            Some(self.pair.beta())
        };
        Ok(ModeResult {
            pair: self.pair,
            epsilon: self.eps,
            phi: phi_t,
            e_shift: e_final,
            residual,
            im_energy: e_final.im,
            inner_iterations: total_inner,
            outer_iterations,
            converged,
            is_true_eigenpair: is_true,
            correction_norm: corr.norm(),
            outer_contraction: ratios,
            consistency_residual: eq_residual,
            second_consistency: c2,
            beta,
        })
    }
}

/// Solve (L − E₁)φ̃ + M_⊥[v(|φ_t|²)(φ̃ + ε(aφ₀ᵃ+bφ₀ᵇ))] = 0 for φ̃ at a given
/// real shift, starting from zero.
pub fn orthogonal_correction(
    sys: &System,
    phi_t: &BlochField,
    e1_real: f64,
    pair: &ParameterPair,
    config: &BootstrapConfig,
) -> Result<(BlochField, CorrectionStats)> {
    let runner = Runner::new(sys, config, *pair)?;
    let density = sys.grid.density(phi_t);
    let v = sys.model.evaluate_v(&density)?;
    let start = BlochField::zeros(sys.index_set.clone());
    runner.solve_correction(&v, e1_real, start, 0.01 * config.outer_tol)
}

/// The projected consistency energy E₁ for a frozen test function and a given
/// correction; the projection row follows the larger pair coefficient.
pub fn consistency_energy(
    sys: &System,
    phi_t: &BlochField,
    phi_correction: &BlochField,
    pair: &ParameterPair,
    config: &BootstrapConfig,
) -> Result<Complex64> {
    let runner = Runner::new(sys, config, *pair)?;
    let density = sys.grid.density(phi_t);
    let v = sys.model.evaluate_v(&density)?;
    let corr_samples = sys.grid.to_grid(phi_correction);
    Ok(runner.consistency(&v, &corr_samples))
}

/// Bootstrap a true eigenpair at one of the two poles.
pub fn bootstrap_polar(sys: &System, which: PolarMode, config: &BootstrapConfig) -> Result<ModeResult> {
    let pair = match which {
        PolarMode::APole => ParameterPair::polar_a(),
        PolarMode::BPole => ParameterPair::polar_b(),
    };
    Runner::new(sys, config, pair)?.run(None)
}

/// Bootstrap the pseudo-eigenpair at equator angle β.
pub fn bootstrap_equator(sys: &System, beta: f64, config: &BootstrapConfig) -> Result<ModeResult> {
    Runner::new(sys, config, ParameterPair::equator(beta))?.run(None)
}

/// Bootstrap at an arbitrary parameter pair (separability probes).
pub fn bootstrap_at(sys: &System, pair: ParameterPair, config: &BootstrapConfig) -> Result<ModeResult> {
    Runner::new(sys, config, pair)?.run(None)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CurvePoint {
    pub beta: f64,
    pub im_e: f64,
    pub re_e: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum ScanStatus {
    EightModes,
    /// Theorem hypotheses fail (degenerate integrals); 8-mode prediction void.
    PredictionVoid,
    CountMismatch {
        found: usize,
    },
}

pub struct BifurcationScan {
    pub status: ScanStatus,
    pub curve: Vec<CurvePoint>,
    pub roots: Vec<f64>,
    /// Two polar modes followed by the six equator roots in ascending β.
    pub modes: Vec<ModeResult>,
    /// Max circular distance between located roots and (nπ − arg I_c-int)/3.
    pub root_deviation: f64,
}

/// The six leading-order root positions (nπ − arg I_c-int)/3 in [−π, π).
pub fn predicted_roots(i_c_int: Complex64) -> [f64; 6] {
    let arg = i_c_int.arg();
    let mut out = [0.0; 6];
    for (n, slot) in out.iter_mut().enumerate() {
        let mut beta = (n as f64 * std::f64::consts::PI - arg) / 3.0;
        while beta < -std::f64::consts::PI {
            beta += 2.0 * std::f64::consts::PI;
        }
        while beta >= std::f64::consts::PI {
            beta -= 2.0 * std::f64::consts::PI;
        }
        *slot = beta;
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    if d > std::f64::consts::PI {
        d = 2.0 * std::f64::consts::PI - d;
    }
    d
}

/// Scan ℑE′(β) over the equator, bisect its six sign changes, and certify the
/// eight bifurcation modes (two poles + six equator roots).
pub fn find_bifurcation_modes(sys: &System, config: &BootstrapConfig) -> Result<BifurcationScan> {
    config.validate()?;
    let n = config.beta_scan_samples;
    let mut curve = Vec::with_capacity(n);
    for i in 0..n {
        let beta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let mode = bootstrap_equator(sys, beta, config)?;
        curve.push(CurvePoint {
            beta,
            im_e: mode.e_shift.im,
            re_e: mode.e_shift.re,
        });
    }

    if sys.report.warn_degenerate || sys.report.warn_interaction {
        return Ok(BifurcationScan {
            status: ScanStatus::PredictionVoid,
            curve,
            roots: Vec::new(),
            modes: Vec::new(),
            root_deviation: f64::NAN,
        });
    }

    // brackets from sign changes, wrapping around the circle
    let mut roots: Vec<f64> = Vec::new();
    let mut brackets: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..n {
        let p0 = &curve[i];
        let p1 = &curve[(i + 1) % n];
        let b1 = if i + 1 == n {
            p1.beta + 2.0 * std::f64::consts::PI
        } else {
            p1.beta
        };
        if p0.im_e == 0.0 {
            roots.push(p0.beta);
        } else if p0.im_e * p1.im_e < 0.0 {
            brackets.push((p0.beta, b1, p0.im_e));
        }
    }
    let found = roots.len() + brackets.len();
    if found != 6 {
        return Ok(BifurcationScan {
            status: ScanStatus::CountMismatch { found },
            curve,
            roots,
            modes: Vec::new(),
            root_deviation: f64::NAN,
        });
    }

    for &(mut lo, mut hi, flo) in &brackets {
        let mut flo = flo;
        while hi - lo > BETA_BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            let fm = bootstrap_equator(sys, mid, config)?.e_shift.im;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let mut root = 0.5 * (lo + hi);
        if root >= std::f64::consts::PI {
            root -= 2.0 * std::f64::consts::PI;
        }
        roots.push(root);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let predicted = predicted_roots(sys.report.i_c_int);
    let root_deviation = roots
        .iter()
        .map(|&r| {
            predicted
                .iter()
                .map(|&p| circular_distance(r, p))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    let mut modes = Vec::with_capacity(8);
    modes.push(bootstrap_polar(sys, PolarMode::APole, config)?);
    modes.push(bootstrap_polar(sys, PolarMode::BPole, config)?);
    let threshold = config.pseudo_tol * config.epsilon.powi(4) * sys.report.i_c_int.norm();
    for &root in &roots {
        let mode = bootstrap_equator(sys, root, config)?;
        if !mode.is_true_eigenpair {
            return Err(Error::Certification(format!(
                "equator root at beta = {root:.6} kept imaginary energy {:.3e} (threshold {threshold:.3e})",
                mode.e_shift.im
            )));
        }
        if mode.residual > 10.0 * config.outer_tol {
            return Err(Error::Certification(format!(
                "equator root at beta = {root:.6} has residual {:.3e}",
                mode.residual
            )));
        }
        modes.push(mode);
    }

    Ok(BifurcationScan {
        status: ScanStatus::EightModes,
        curve,
        roots,
        modes,
        root_deviation,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct UniquenessReport {
    pub n_restarts: usize,
    pub max_distance: f64,
    /// All restarts converged back to the reference mode.
    pub all_returned: bool,
    /// ‖Δφ̃‖/(|Δa|+|Δb|) for a nearby parameter pair; O(ε³).
    pub lipschitz_ratio: f64,
    pub distances: Vec<f64>,
}

/// Re-run the bootstrap from randomly perturbed initial corrections (scale·ε³)
/// and from a nearby parameter pair.
pub fn uniqueness_probe(
    sys: &System,
    mode: &ModeResult,
    n_restarts: usize,
    perturbation_scale: f64,
    seed: u64,
    config: &BootstrapConfig,
) -> Result<UniquenessReport> {
    uniqueness_probe_at(sys, mode.pair, &mode.phi, n_restarts, perturbation_scale, seed, config)
}

/// Uniqueness probe against an explicit reference field (re-certification of
/// stored modes).
pub fn uniqueness_probe_at(
    sys: &System,
    pair: ParameterPair,
    reference: &BlochField,
    n_restarts: usize,
    perturbation_scale: f64,
    seed: u64,
    config: &BootstrapConfig,
) -> Result<UniquenessReport> {
    let runner = Runner::new(sys, config, pair)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut distances = Vec::with_capacity(n_restarts);
    for _ in 0..n_restarts {
        let mut pert = BlochField::zeros(sys.index_set.clone());
        for c in pert.coeffs_mut() {
            *c = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let mut pert = project_perp(&sys.basis, &pert)?;
        let norm = pert.norm();
        if norm > 0.0 {
            pert.scale(Complex64::new(
                perturbation_scale * config.epsilon.powi(3) / norm,
                0.0,
            ));
        }
        let restarted = runner.run(Some(pert))?;
        distances.push(restarted.phi.distance(reference));
    }
    let max_distance = distances.iter().fold(0.0_f64, |a, &d| a.max(d));
    let all_returned = max_distance <= 10.0 * config.outer_tol;

    // continuity in the parameters: re-solve at a slightly rotated pair
    let delta = 1e-3;
    let theta = pair.b.norm().atan2(pair.a.norm());
    let beta = pair.beta();
    let nearby = if theta < delta {
        ParameterPair::from_angles(theta + delta, beta)
    } else if theta > std::f64::consts::FRAC_PI_2 - delta {
        ParameterPair::from_angles(theta - delta, beta)
    } else {
        ParameterPair::from_angles(theta, beta + delta)
    };
    let other = Runner::new(sys, config, nearby)?.run(None)?;
    let corr_ref = project_perp(&sys.basis, reference)?;
    let corr_other = project_perp(&sys.basis, &other.phi)?;
    let dparam = (nearby.a - pair.a).norm() + (nearby.b - pair.b).norm();
    let lipschitz_ratio = corr_other.distance(&corr_ref) / dparam;

    Ok(UniquenessReport {
        n_restarts,
        max_distance,
        all_returned,
        lipschitz_ratio,
        distances,
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SeparabilityRow {
    pub theta: f64,
    /// Minimum attainable defect of the second consistency row, in energy
    /// units (|row defect| / ε).
    pub consistency_residual: f64,
    /// Necessary-condition landscape value |ab(|b|²−|a|²)|·|I_one − 2I_int|.
    pub landscape: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SeparabilityReport {
    pub rows: Vec<SeparabilityRow>,
    /// min over off-manifold rows of residual/(ε²·landscape); positive when
    /// the radial exclusion holds.
    pub fitted_c: f64,
}

/// Constrained bootstrap attempts at off-equator, off-pole pairs: the second
/// consistency row must stay bounded below by the landscape value.
pub fn radial_separability_probe(
    sys: &System,
    config: &BootstrapConfig,
    theta_grid: &[f64],
) -> Result<SeparabilityReport> {
    let eps = config.epsilon;
    let mut rows = Vec::with_capacity(theta_grid.len());
    let mut fitted_c = f64::INFINITY;
    for &theta in theta_grid {
        let pair = ParameterPair::from_angles(theta, 0.0);
        let mode = bootstrap_at(sys, pair, config)?;
        let cres = mode.second_consistency.norm() / eps;
        let ell = landscape_value(&sys.report, &pair);
        if ell > 1e-10 * sys.report.nondegeneracy.max(1e-300) {
            fitted_c = fitted_c.min(cres / (eps * eps * ell));
        }
        rows.push(SeparabilityRow {
            theta,
            consistency_residual: cres,
            landscape: ell,
        });
    }
    if !fitted_c.is_finite() {
        fitted_c = 0.0;
    }
    Ok(SeparabilityReport { rows, fitted_c })
}
