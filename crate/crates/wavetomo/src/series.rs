//! Neumann-series reconstruction.
//!
//! One pass of the averaged time reversal, `𝒜₀`, applied to measured data
//! `h = Λf` recovers `f` up to an error operator `𝒦₀ = Id − 𝒜₀Λ` that is a
//! contraction in the zero-trace energy norm whenever the observation window
//! and boundary set satisfy the visibility condition. The series
//! `f = Σₘ 𝒦₀ᵐ 𝒜₀ h` then converges geometrically, and is evaluated here in
//! its fixed-point-iteration form
//!
//! ```text
//! f₁ = 𝒜₀ h,      f_n = f_{n−1} − 𝒜₀ Λ f_{n−1} + f₁,
//! ```
//!
//! which is the same algebra with half the bookkeeping. Each iteration costs
//! one forward (sound-hard) solve to simulate `Λ f_{n−1}` and one backward
//! reversal pass.
//!
//! The iteration count is fixed up front; per-iteration errors against a
//! known ground truth are logged for diagnostics but never used as a
//! stopping rule.

use crate::elliptic::DEFAULT_CG_TOL;
use crate::error::{Error, Result};
use crate::float::Float;
use crate::grid::{norm_hd, ScalarField};
use crate::region::{GammaSpec, SubdomainSpec};
use crate::reversal::{AveragingWeight, TimeReversal};
use crate::wave::{cfl_dt, lambda_forward, BoundaryTrace, TimeAxis};

/// Which data geometry the reconstruction assumes.
#[derive(Clone, Debug)]
pub enum Variant<T> {
    /// Measurements on the whole boundary.
    Full,
    /// Measurements on a proper subset Γ of the boundary.
    Partial(GammaSpec<T>),
}

/// Everything the reconstruction needs besides the measured trace.
#[derive(Clone, Debug)]
pub struct ReconstructionConfig<T: Float> {
    /// Number of series terms (iterations). The default is 10.
    pub n_terms: usize,
    pub variant: Variant<T>,
    pub w: AveragingWeight<T>,
    pub omega0: SubdomainSpec<T>,
    /// Sound speed on the reconstruction grid.
    pub c: ScalarField<T>,
    /// Observation window; must match both the weight and the trace.
    pub t_final: T,
    /// CFL number used when this config generates a time axis of its own
    /// (e.g. for synthesizing forward data); the iteration itself always
    /// reuses the trace's time axis.
    pub cfl: T,
    /// Tolerance of the elliptic solves inside the reversal.
    pub cg_tol: T,
}

impl<T: Float> ReconstructionConfig<T> {
    /// A full-data config with the defaults: 10 terms, CFL 0.9, standard
    /// elliptic tolerance, window taken from the weight.
    pub fn new(c: ScalarField<T>, w: AveragingWeight<T>, omega0: SubdomainSpec<T>) -> Self {
        let t_final = w.t_final();
        Self {
            n_terms: 10,
            variant: Variant::Full,
            w,
            omega0,
            c,
            t_final,
            cfl: T::cast(0.9),
            cg_tol: T::cast(DEFAULT_CG_TOL),
        }
    }

    /// The time axis this config prescribes for forward simulation.
    pub fn time_axis(&self) -> Result<TimeAxis<T>> {
        cfl_dt(self.c.grid(), &self.c, self.cfl, self.t_final)
    }

    /// The boundary set measurements live on.
    pub fn gamma(&self) -> GammaSpec<T> {
        match &self.variant {
            Variant::Full => GammaSpec::full_boundary(),
            Variant::Partial(g) => g.clone(),
        }
    }

    fn validate(&self, trace: &BoundaryTrace<T>) -> Result<()> {
        if self.n_terms < 1 {
            return Err(Error::InvalidParameter("n_terms must be at least 1".into()));
        }
        if trace.grid() != self.c.grid() {
            return Err(Error::GridMismatch("trace grid differs from the speed grid".into()));
        }
        let dur = trace.duration();
        if ((dur - self.t_final) / self.t_final).abs() > T::cast(1e-9) {
            return Err(Error::TraceMismatch(format!(
                "trace duration {dur} does not match configured window {}",
                self.t_final
            )));
        }
        let full = trace.gamma().is_full();
        match &self.variant {
            Variant::Full if !full => Err(Error::TraceMismatch(
                "full-data reconstruction given a partial-boundary trace".into(),
            )),
            Variant::Partial(g)
                if g.boundary_nodes(trace.grid()) != trace.gamma().boundary_nodes(trace.grid()) =>
            {
                Err(Error::TraceMismatch(
                    "configured boundary set does not match the trace's".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// One logged iteration. Error columns are `NaN` when no ground truth was
/// supplied; `ratio` is the step-to-step ratio of the energy-norm error
/// (`NaN` on the first row).
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow<T> {
    pub n: usize,
    pub rel_l2: T,
    pub rel_hd: T,
    pub rel_linf: T,
    pub ratio: T,
}

/// Per-iteration error record of a reconstruction run.
#[derive(Clone, Debug)]
pub struct ConvergenceLog<T> {
    rows: Vec<ConvergenceRow<T>>,
    diverging: bool,
}

impl<T> Default for ConvergenceLog<T> {
    fn default() -> Self {
        Self { rows: Vec::new(), diverging: false }
    }
}

impl<T: Float> ConvergenceLog<T> {
    pub fn rows(&self) -> &[ConvergenceRow<T>] {
        &self.rows
    }

    /// True if the energy-norm error ratio exceeded 1.5 on three consecutive
    /// iterations — a diagnostic only; the iteration always runs to its
    /// configured length.
    pub fn diverging(&self) -> bool {
        self.diverging
    }

    fn push(&mut self, n: usize, approx: &ScalarField<T>, truth: Option<&ScalarField<T>>) {
        let nan = T::nan();
        let (rel_l2, rel_hd, rel_linf) = match truth {
            Some(t) => (
                rel_error_l2(approx, t).unwrap_or(nan),
                rel_error_hd(approx, t).unwrap_or(nan),
                rel_error_linf(approx, t).unwrap_or(nan),
            ),
            None => (nan, nan, nan),
        };
        let ratio = match self.rows.last() {
            Some(prev) if prev.rel_hd.is_finite() && prev.rel_hd > T::zero() => {
                rel_hd / prev.rel_hd
            }
            _ => nan,
        };
        self.rows.push(ConvergenceRow { n, rel_l2, rel_hd, rel_linf, ratio });
        let guard = T::cast(1.5);
        let bad = self.rows.iter().rev().take_while(|r| r.ratio > guard).count();
        if bad >= 3 {
            self.diverging = true;
        }
    }
}

/// Runs the series to `cfg.n_terms` terms and returns the final iterate with
/// its convergence log. `truth`, when given, only feeds the log.
pub fn reconstruct<T: Float>(
    trace: &BoundaryTrace<T>,
    cfg: &ReconstructionConfig<T>,
    truth: Option<&ScalarField<T>>,
) -> Result<(ScalarField<T>, ConvergenceLog<T>)> {
    cfg.validate(trace)?;
    if let Some(t) = truth {
        if t.grid() != trace.grid() {
            return Err(Error::GridMismatch("truth grid differs from the trace grid".into()));
        }
    }
    let reversal = TimeReversal::new(&cfg.c, &cfg.omega0).with_cg_tol(cfg.cg_tol);
    let apply_a0 = |data: &BoundaryTrace<T>| -> Result<ScalarField<T>> {
        match (&cfg.variant, cfg.w.is_sharp()) {
            (Variant::Full, false) => reversal.averaged_full(data, &cfg.w, false),
            (Variant::Full, true) => reversal.sharp_full(data),
            (Variant::Partial(_), false) => reversal.averaged_partial(data, &cfg.w),
            (Variant::Partial(_), true) => reversal.sharp_partial(data),
        }
    };
    let time = TimeAxis { dt: trace.dt(), n_steps: trace.n_samples() - 1 };

    let f1 = apply_a0(trace)?;
    let mut f = f1.clone();
    let mut log = ConvergenceLog::default();
    log.push(1, &f, truth);

    for n in 2..=cfg.n_terms {
        let lam = lambda_forward(&f, &cfg.c, trace.gamma(), time)?;
        let correction = apply_a0(&lam)?;
        f.add_scaled(&correction, -T::one())?;
        f.add_scaled(&f1, T::one())?;
        log.push(n, &f, truth);
    }
    Ok((f, log))
}

/// `‖approx − truth‖₂ / ‖truth‖₂` in the unweighted nodal 2-norm.
pub fn rel_error_l2<T: Float>(approx: &ScalarField<T>, truth: &ScalarField<T>) -> Result<T> {
    let denom = truth.norm_l2_nodal();
    if denom == T::zero() {
        return Err(Error::ZeroNorm);
    }
    Ok(approx.diff(truth)?.norm_l2_nodal() / denom)
}

/// Relative error in the zero-trace energy norm (the norm the series
/// contracts in).
pub fn rel_error_hd<T: Float>(approx: &ScalarField<T>, truth: &ScalarField<T>) -> Result<T> {
    let denom = norm_hd(truth);
    if denom == T::zero() {
        return Err(Error::ZeroNorm);
    }
    Ok(norm_hd(&approx.diff(truth)?) / denom)
}

/// `max|approx − truth| / max|truth|`.
pub fn rel_error_linf<T: Float>(approx: &ScalarField<T>, truth: &ScalarField<T>) -> Result<T> {
    let denom = truth.abs_max();
    if denom == T::zero() {
        return Err(Error::ZeroNorm);
    }
    Ok(approx.diff(truth)?.abs_max() / denom)
}
