//! Sharp and averaged time reversal.
//!
//! Given boundary measurements `Λf = u|_{[0,T]×Γ}` of a wave launched by
//! initial pressure `(f, 0)`, a *sharp* time reversal solves the wave
//! equation backward from time `T` with the measured boundary values and
//! reads off the state at `t = 0`. Averaging sharp reversals over final
//! times `τ ∈ [0, T]` with a weight `χ` (unit integral) collapses — after an
//! integration by parts in `τ` — into a *single* backward solve whose
//! Dirichlet data is the averaged boundary data
//!
//! ```text
//! h(t) = φ(t)·Λf(t) − ∫_t^T χ(τ) Λf(τ) dτ,    φ(t) = ∫_t^T χ(τ) dτ.
//! ```
//!
//! That identity is the core of this module: the per-τ loop never exists in
//! code. `h(T) = 0` holds exactly, so the backward solve's zero Cauchy data
//! at `t = T` is consistent with its Dirichlet data.
//!
//! The sharp reversal is the degenerate case `χ = δ_T` (realized by
//! [`AveragingWeight::sharp`]): `φ ≡ 1` before `T` and the tail integral is
//! `Λf(T)`, so `h = Λf − Λf(T)`. Its full-data variant adds back the
//! harmonic extension of `Λf(T)`; the averaged variant may add the harmonic
//! extension of `∫ χ Λf dτ`, but the final projection onto the
//! reconstruction subdomain annihilates any harmonic field, so that term is
//! optional (and off by default).
//!
//! Partial data (Γ a proper boundary subset) changes two things: the
//! backward solve imposes the data on Γ only (sound-hard elsewhere), and the
//! sharp variant starts from the mixed harmonic extension of `Λf(T)` instead
//! of zero. With Γ the full boundary each partial operator degenerates to
//! its full-data sibling.

use crate::elliptic::{
    harmonic_extension, harmonic_extension_mixed, project_onto_subdomain, DEFAULT_CG_TOL,
};
use crate::error::{Error, Result};
use crate::float::Float;
use crate::grid::ScalarField;
use crate::region::SubdomainSpec;
use crate::wave::{propagate, BoundaryCondition, BoundaryTrace, TimeAxis};

/// A nonnegative averaging weight `χ` on `[0, T]` with unit integral,
/// together with the derived decay profile `φ(t) = ∫_t^T χ`.
///
/// `φ` is extended to negative times as an even function (`φ(−t) = φ(t)`),
/// which is how the ray-symbol computations consume it.
#[derive(Clone, Debug)]
pub struct AveragingWeight<T> {
    kind: WeightKind<T>,
    t_final: T,
}

#[derive(Clone, Debug)]
enum WeightKind<T> {
    /// `χ = 1/T` on `[0, T]`; `φ(t) = (T − t)/T`.
    Uniform,
    /// The degenerate point mass at `τ = T`; `φ = 1` on `[0, T)`, `φ(T) = 0`.
    Sharp,
    /// `χ` sampled uniformly on `[0, T]`, interpolated linearly.
    Custom { chi: Vec<T>, tail: Vec<T> },
}

impl<T: Float> AveragingWeight<T> {
    /// The uniform weight `χ = 1/T`.
    pub fn uniform(t_final: T) -> Result<Self> {
        Self::check_t(t_final)?;
        Ok(Self { kind: WeightKind::Uniform, t_final })
    }

    /// The degenerate sharp weight (all mass at `τ = T`).
    pub fn sharp(t_final: T) -> Result<Self> {
        Self::check_t(t_final)?;
        Ok(Self { kind: WeightKind::Sharp, t_final })
    }

    /// A sampled weight: `chi[k]` is `χ` at `k·T/(len−1)`. Validates `χ ≥ 0`
    /// and a unit trapezoid integral (within `1e-10`).
    pub fn custom(t_final: T, chi: Vec<T>) -> Result<Self> {
        Self::check_t(t_final)?;
        if chi.len() < 2 {
            return Err(Error::InvalidWeight("custom weight needs at least 2 samples".into()));
        }
        if chi.iter().any(|&v| v < T::zero() || !v.is_finite()) {
            return Err(Error::InvalidWeight("weight samples must be finite and >= 0".into()));
        }
        let dt = t_final / T::cast_usize(chi.len() - 1);
        // Tail integrals at the sample times, by trapezoid from the right.
        let mut tail = vec![T::zero(); chi.len()];
        for k in (0..chi.len() - 1).rev() {
            tail[k] = tail[k + 1] + dt * (chi[k] + chi[k + 1]) * T::cast(0.5);
        }
        let defect = (tail[0] - T::one()).abs();
        if defect > T::cast(1e-10) {
            return Err(Error::InvalidWeight(format!(
                "weight integral is {} (must be 1 within 1e-10)",
                tail[0]
            )));
        }
        Ok(Self { kind: WeightKind::Custom { chi, tail }, t_final })
    }

    fn check_t(t_final: T) -> Result<()> {
        if !(t_final > T::zero()) {
            return Err(Error::InvalidWeight(format!(
                "averaging window must be positive, got {t_final}"
            )));
        }
        Ok(())
    }

    /// End of the averaging window.
    pub fn t_final(&self) -> T {
        self.t_final
    }

    /// True for the degenerate sharp weight.
    pub fn is_sharp(&self) -> bool {
        matches!(self.kind, WeightKind::Sharp)
    }

    /// `φ(t) = ∫_{|t|}^T χ(τ) dτ`, evenly extended; zero for `|t| ≥ T`.
    pub fn phi(&self, t: T) -> T {
        let s = t.abs();
        if s >= self.t_final {
            return T::zero();
        }
        match &self.kind {
            WeightKind::Uniform => (self.t_final - s) / self.t_final,
            WeightKind::Sharp => T::one(),
            WeightKind::Custom { chi, tail } => {
                let dt = self.t_final / T::cast_usize(chi.len() - 1);
                let u = s / dt;
                let k = u.floor().to_usize().unwrap_or(0).min(chi.len() - 2);
                let frac = u - T::cast_usize(k);
                let chi_s = chi[k] + frac * (chi[k + 1] - chi[k]);
                let rest = (T::one() - frac) * dt * (chi_s + chi[k + 1]) * T::cast(0.5);
                rest + tail[k + 1]
            }
        }
    }

    /// `χ` at the `n` uniform sample times spanning `[0, T]`. `None` for the
    /// sharp weight, which has no density.
    fn chi_samples(&self, n: usize) -> Option<Vec<T>> {
        let dt = self.t_final / T::cast_usize(n - 1);
        match &self.kind {
            WeightKind::Uniform => Some(vec![T::one() / self.t_final; n]),
            WeightKind::Sharp => None,
            WeightKind::Custom { chi, .. } => {
                let dtc = self.t_final / T::cast_usize(chi.len() - 1);
                Some(
                    (0..n)
                        .map(|k| {
                            let u = (T::cast_usize(k) * dt) / dtc;
                            let j = u.floor().to_usize().unwrap_or(0).min(chi.len() - 2);
                            let frac = u - T::cast_usize(j);
                            chi[j] + frac * (chi[j + 1] - chi[j])
                        })
                        .collect(),
                )
            }
        }
    }

    fn check_matches(&self, trace: &BoundaryTrace<T>) -> Result<()> {
        let dur = trace.duration();
        let rel = ((self.t_final - dur) / dur).abs();
        if rel > T::cast(1e-9) {
            return Err(Error::TraceMismatch(format!(
                "weight window T = {} does not match trace duration {dur}",
                self.t_final
            )));
        }
        Ok(())
    }
}

/// Builds the averaged boundary data `h(t) = φ(t)Λf(t) − ∫_t^T χΛf dτ` on
/// the trace's own time samples (tail integral by trapezoid). The final
/// sample of `h` is exactly zero.
pub fn averaged_boundary_data<T: Float>(
    trace: &BoundaryTrace<T>,
    w: &AveragingWeight<T>,
) -> Result<BoundaryTrace<T>> {
    w.check_matches(trace)?;
    let n = trace.n_samples();
    let nn = trace.n_nodes();
    if n < 2 {
        return Err(Error::TraceMismatch("trace needs at least two time samples".into()));
    }
    let mut values = vec![T::zero(); n * nn];

    match w.chi_samples(n) {
        None => {
            // Sharp: h = Λf − Λf(T); the last row cancels exactly.
            let last = trace.sample(n - 1).to_vec();
            for k in 0..n {
                let row = trace.sample(k);
                let out = &mut values[k * nn..(k + 1) * nn];
                for m in 0..nn {
                    out[m] = row[m] - last[m];
                }
            }
        }
        Some(chi) => {
            let dt = trace.dt();
            let half_dt = dt * T::cast(0.5);
            // φ at the sample times, by the same trapezoid used for the tail,
            // so that h(T) = 0 and constant-in-time traces cancel exactly.
            let mut phi = vec![T::zero(); n];
            for k in (0..n - 1).rev() {
                phi[k] = phi[k + 1] + half_dt * (chi[k] + chi[k + 1]);
            }
            let mut tail = vec![T::zero(); nn];
            // Last row of h stays zero; walk backward accumulating the tail.
            for k in (0..n - 1).rev() {
                let row = trace.sample(k);
                let next = trace.sample(k + 1);
                let out_row = &mut values[k * nn..(k + 1) * nn];
                for m in 0..nn {
                    tail[m] += half_dt * (chi[k] * row[m] + chi[k + 1] * next[m]);
                    out_row[m] = phi[k] * row[m] - tail[m];
                }
            }
        }
    }

    BoundaryTrace::from_values(*trace.grid(), trace.gamma().clone(), trace.dt(), n, values)
}

/// The weighted time average `∫₀ᵀ χ(τ) Λf(τ) dτ` of a trace, scattered onto
/// the trace's boundary nodes as a field (zero elsewhere). For the sharp
/// weight this is the final sample.
pub fn weighted_time_average<T: Float>(
    trace: &BoundaryTrace<T>,
    w: &AveragingWeight<T>,
) -> Result<ScalarField<T>> {
    w.check_matches(trace)?;
    let n = trace.n_samples();
    let nn = trace.n_nodes();
    match w.chi_samples(n) {
        None => Ok(trace.sample_as_field(n - 1)),
        Some(chi) => {
            let half_dt = trace.dt() * T::cast(0.5);
            let mut avg = vec![T::zero(); nn];
            for k in 0..n - 1 {
                let row = trace.sample(k);
                let next = trace.sample(k + 1);
                for m in 0..nn {
                    avg[m] += half_dt * (chi[k] * row[m] + chi[k + 1] * next[m]);
                }
            }
            let mut f = ScalarField::zeros(*trace.grid());
            for (v, &(i, j)) in avg.iter().zip(trace.nodes()) {
                *f.at_mut(i, j) = *v;
            }
            Ok(f)
        }
    }
}

/// Time-reversal operators over a fixed speed field, reconstruction
/// subdomain, and elliptic solver tolerance.
pub struct TimeReversal<'a, T: Float> {
    c: &'a ScalarField<T>,
    omega0: &'a SubdomainSpec<T>,
    cg_tol: T,
}

impl<'a, T: Float> TimeReversal<'a, T> {
    pub fn new(c: &'a ScalarField<T>, omega0: &'a SubdomainSpec<T>) -> Self {
        Self { c, omega0, cg_tol: T::cast(DEFAULT_CG_TOL) }
    }

    /// Overrides the conjugate-gradient tolerance used by the extensions and
    /// the final projection.
    pub fn with_cg_tol(mut self, tol: T) -> Self {
        self.cg_tol = tol;
        self
    }

    /// Runs the backward solve: zero (or given) Cauchy data at `t = T`,
    /// Dirichlet `data` on its Γ (everywhere if `full`), sound-hard walls
    /// elsewhere; returns the state at `t = 0`. Implemented by feeding the
    /// reversed trace to the forward stepper — the leapfrog is
    /// time-symmetric, so no separate backward scheme exists.
    fn backward(
        &self,
        data: &BoundaryTrace<T>,
        initial: Option<&ScalarField<T>>,
        full: bool,
    ) -> Result<ScalarField<T>> {
        let time = TimeAxis { dt: data.dt(), n_steps: data.n_samples() - 1 };
        let rev = data.reversed();
        let zero = ScalarField::zeros(*data.grid());
        let u0 = initial.unwrap_or(&zero);
        let bc = if full {
            BoundaryCondition::DirichletData(&rev)
        } else {
            BoundaryCondition::Mixed(&rev)
        };
        let (state, _) = propagate(u0, &zero, bc, self.c, time, None)?;
        Ok(state.u)
    }

    /// Averaged time reversal from full-boundary data: backward solve with
    /// Dirichlet data `h`, then projection onto the subdomain. With
    /// `include_harmonic_term` the harmonic extension of `∫χΛf dτ` is added
    /// before projecting; the projection annihilates it, so this is a
    /// consistency knob, not a tuning knob.
    pub fn averaged_full(
        &self,
        trace: &BoundaryTrace<T>,
        w: &AveragingWeight<T>,
        include_harmonic_term: bool,
    ) -> Result<ScalarField<T>> {
        if !trace.gamma().is_full() {
            return Err(Error::TraceMismatch(
                "full-data reversal needs a full-boundary trace".into(),
            ));
        }
        let h = averaged_boundary_data(trace, w)?;
        let mut v0 = self.backward(&h, None, true)?;
        if include_harmonic_term {
            let avg = weighted_time_average(trace, w)?;
            let p = harmonic_extension(&avg, self.cg_tol)?;
            v0.add_scaled(&p, T::one())?;
        }
        project_onto_subdomain(&v0, self.omega0, self.cg_tol)
    }

    /// Sharp time reversal from full-boundary data: backward solve with
    /// Dirichlet data `Λf − Λf(T)` from zero Cauchy data, plus the harmonic
    /// extension of `Λf(T)`, projected onto the subdomain.
    pub fn sharp_full(&self, trace: &BoundaryTrace<T>) -> Result<ScalarField<T>> {
        if !trace.gamma().is_full() {
            return Err(Error::TraceMismatch(
                "full-data reversal needs a full-boundary trace".into(),
            ));
        }
        let w = AveragingWeight::sharp(trace.duration())?;
        let h = averaged_boundary_data(trace, &w)?;
        let mut v0 = self.backward(&h, None, true)?;
        let p = harmonic_extension(&weighted_time_average(trace, &w)?, self.cg_tol)?;
        v0.add_scaled(&p, T::one())?;
        project_onto_subdomain(&v0, self.omega0, self.cg_tol)
    }

    /// Averaged time reversal from partial data: Dirichlet `h` on the
    /// trace's Γ, sound-hard elsewhere, zero Cauchy data at `t = T`,
    /// projection of the state at `t = 0`. No harmonic term exists in this
    /// variant.
    pub fn averaged_partial(
        &self,
        trace: &BoundaryTrace<T>,
        w: &AveragingWeight<T>,
    ) -> Result<ScalarField<T>> {
        let h = averaged_boundary_data(trace, w)?;
        let v0 = self.backward(&h, None, false)?;
        project_onto_subdomain(&v0, self.omega0, self.cg_tol)
    }

    /// Sharp time reversal from partial data: the backward solve starts from
    /// the mixed harmonic extension of `Λf(T)` (Dirichlet on Γ, zero
    /// one-sided normal difference elsewhere) and imposes the raw trace on Γ.
    pub fn sharp_partial(&self, trace: &BoundaryTrace<T>) -> Result<ScalarField<T>> {
        let n = trace.n_samples();
        let final_values = trace.sample_as_field(n - 1);
        let ext = harmonic_extension_mixed(&final_values, trace.gamma(), self.cg_tol)?;
        let v0 = self.backward(trace, Some(&ext), false)?;
        project_onto_subdomain(&v0, self.omega0, self.cg_tol)
    }
}
