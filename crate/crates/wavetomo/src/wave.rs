//! Variable-speed acoustic wave propagation on the grid rectangle.
//!
//! The scheme is the classical second-order leapfrog
//!
//! ```text
//! u<sup>n+1</sup> = 2uⁿ − uⁿ⁻¹ + dt² c² Δ₅ uⁿ
//! ```
//!
//! with the 5-point Laplacian and *mirror ghosts* for homogeneous Neumann
//! walls (the ghost value outside a wall equals the first interior value, so
//! the centered normal difference vanishes). Dirichlet data on a boundary
//! subset is imposed strongly: after each update the subset's nodes are
//! overwritten with the prescribed trace sample. Where a Dirichlet subset
//! meets a Neumann wall the shared node is Dirichlet.
//!
//! The first step from Cauchy data `(u⁰, u̇⁰)` is the Taylor step
//! `u¹ = u⁰ + dt u̇⁰ + (dt²/2) c² Δ₅ u⁰`. All later steps use the leapfrog
//! relation, which is symmetric in time: swapping `(u, u_prev)` of a finished
//! run and continuing recovers the earlier states to rounding accuracy. The
//! time-reversal operators exploit exactly this — there is no separate
//! backward stepper, the boundary trace is simply fed in reversed order.
//!
//! Stability: `dt · c_max · sqrt(1/hx² + 1/hy²) ≤ 1`. [`cfl_dt`] picks
//! `dt = cfl · min(hx, hy) / (√2 c_max)` and then shrinks it minimally so the
//! requested duration is an integer number of steps.

use crate::error::{Error, Result};
use crate::float::Float;
use crate::grid::{check_speed_positive, Grid2D, ScalarField};
use crate::region::GammaSpec;

/// A uniform time axis: `n_steps` steps of length `dt` covering
/// `[0, dt · n_steps]`, with `n_steps + 1` sample times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeAxis<T> {
    pub dt: T,
    pub n_steps: usize,
}

impl<T: Float> TimeAxis<T> {
    /// Total covered duration `dt · n_steps`.
    pub fn duration(&self) -> T {
        self.dt * T::cast_usize(self.n_steps)
    }

    /// Number of sample times (including both endpoints).
    pub fn n_samples(&self) -> usize {
        self.n_steps + 1
    }
}

/// Chooses a stable time step for a run of duration `t_final`.
///
/// The raw step is `cfl · min(hx, hy) / (√2 · max c)`; it is then shrunk
/// minimally so that `t_final` is an integer number of steps. `cfl` must lie
/// in `(0, 1]`.
pub fn cfl_dt<T: Float>(
    grid: &Grid2D<T>,
    c: &ScalarField<T>,
    cfl: T,
    t_final: T,
) -> Result<TimeAxis<T>> {
    if c.grid() != grid {
        return Err(Error::GridMismatch("cfl_dt speed field".into()));
    }
    check_speed_positive(c)?;
    if !(cfl > T::zero() && cfl <= T::one()) {
        return Err(Error::InvalidTimeStep(format!("cfl must be in (0, 1], got {cfl}")));
    }
    if !(t_final > T::zero()) {
        return Err(Error::InvalidTimeStep(format!("duration must be positive, got {t_final}")));
    }
    let (_, c_max) = c.min_max();
    let dt_raw = cfl * grid.min_h() / (T::cast(std::f64::consts::SQRT_2) * c_max);
    let n = (t_final / dt_raw).ceil().to_usize().unwrap_or(0).max(1);
    Ok(TimeAxis { dt: t_final / T::cast_usize(n), n_steps: n })
}

/// Snapshot of a propagating field: `u` at time `t` and `u_prev` at `t - dt`.
#[derive(Clone, Debug)]
pub struct WaveState<T> {
    pub u: ScalarField<T>,
    pub u_prev: ScalarField<T>,
    pub t: T,
    pub dt: T,
}

impl<T: Float> WaveState<T> {
    /// Second-order one-sided estimate of the time derivative at `t`:
    /// `(u − u_prev)/dt + (dt/2) c² Δ₅ u`. Used by energy diagnostics.
    pub fn velocity(&self, c: &ScalarField<T>) -> Result<ScalarField<T>> {
        let g = self.u.grid();
        if c.grid() != g {
            return Err(Error::GridMismatch("velocity speed field".into()));
        }
        let mut lap = vec![T::zero(); g.n_nodes()];
        laplacian_mirror(self.u.values(), g, &mut lap);
        let half_dt = self.dt * T::cast(0.5);
        let inv_dt = T::one() / self.dt;
        let mut out = Vec::with_capacity(g.n_nodes());
        let (uv, pv, cv) = (self.u.values(), self.u_prev.values(), c.values());
        for k in 0..g.n_nodes() {
            out.push((uv[k] - pv[k]) * inv_dt + half_dt * cv[k] * cv[k] * lap[k]);
        }
        ScalarField::from_values(*g, out)
    }
}

/// Recorded boundary values on Γ: one row of `n_nodes` values per time
/// sample, `dt` apart, nodes in deterministic scan order.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace<T> {
    grid: Grid2D<T>,
    gamma: GammaSpec<T>,
    nodes: Vec<(usize, usize)>,
    dt: T,
    values: Vec<T>,
}

impl<T: Float> BoundaryTrace<T> {
    /// An all-zero trace with `n_samples` rows.
    pub fn zeros(grid: Grid2D<T>, gamma: GammaSpec<T>, dt: T, n_samples: usize) -> Self {
        let nodes = gamma.boundary_nodes(&grid);
        let values = vec![T::zero(); n_samples * nodes.len()];
        Self { grid, gamma, nodes, dt, values }
    }

    /// Builds a trace from raw row-per-sample values (length must be
    /// `n_samples · n_nodes` for the gamma laid out on this grid).
    pub fn from_values(
        grid: Grid2D<T>,
        gamma: GammaSpec<T>,
        dt: T,
        n_samples: usize,
        values: Vec<T>,
    ) -> Result<Self> {
        let nodes = gamma.boundary_nodes(&grid);
        if values.len() != n_samples * nodes.len() {
            return Err(Error::TraceMismatch(format!(
                "expected {} x {} values, got {}",
                n_samples,
                nodes.len(),
                values.len()
            )));
        }
        Ok(Self { grid, gamma, nodes, dt, values })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn gamma(&self) -> &GammaSpec<T> {
        &self.gamma
    }

    /// Boundary nodes in recording order.
    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_samples(&self) -> usize {
        if self.nodes.is_empty() { 0 } else { self.values.len() / self.nodes.len() }
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Covered duration `dt · (n_samples − 1)`.
    pub fn duration(&self) -> T {
        self.dt * T::cast_usize(self.n_samples().saturating_sub(1))
    }

    /// Values at sample `k` (time `k · dt`), one per node.
    pub fn sample(&self, k: usize) -> &[T] {
        let n = self.n_nodes();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn sample_mut(&mut self, k: usize) -> &mut [T] {
        let n = self.n_nodes();
        &mut self.values[k * n..(k + 1) * n]
    }

    /// Raw values, row per sample.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// The final sample (values at the end of the recording window).
    pub fn final_sample(&self) -> &[T] {
        self.sample(self.n_samples() - 1)
    }

    /// The trace with its time axis flipped; feeding this to a fresh solve
    /// realizes the time-reversed boundary data.
    pub fn reversed(&self) -> Self {
        let n = self.n_nodes();
        let mut values = Vec::with_capacity(self.values.len());
        for k in (0..self.n_samples()).rev() {
            values.extend_from_slice(&self.values[k * n..(k + 1) * n]);
        }
        Self { grid: self.grid, gamma: self.gamma.clone(), nodes: self.nodes.clone(), dt: self.dt, values }
    }

    /// Scatters sample `k` into a zero field on the trace's grid.
    pub fn sample_as_field(&self, k: usize) -> ScalarField<T> {
        let mut f = ScalarField::zeros(self.grid);
        let row = self.sample(k);
        for (v, &(i, j)) in row.iter().zip(&self.nodes) {
            *f.at_mut(i, j) = *v;
        }
        f
    }

    /// `self += s · other` (same grid, gamma and shape).
    pub fn add_scaled(&mut self, other: &Self, s: T) -> Result<()> {
        if self.grid != other.grid
            || self.nodes != other.nodes
            || self.values.len() != other.values.len()
        {
            return Err(Error::TraceMismatch("add_scaled operands differ in layout".into()));
        }
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }

    /// `self *= s`.
    pub fn scale(&mut self, s: T) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Largest absolute recorded value.
    pub fn abs_max(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    fn check_against(&self, grid: &Grid2D<T>, time: &TimeAxis<T>) -> Result<()> {
        if &self.grid != grid {
            return Err(Error::TraceMismatch("trace recorded on a different grid".into()));
        }
        if self.n_samples() != time.n_samples() {
            return Err(Error::TraceMismatch(format!(
                "trace has {} samples, run needs {}",
                self.n_samples(),
                time.n_samples()
            )));
        }
        let rel = ((self.dt - time.dt) / time.dt).abs();
        if rel > T::cast(1e-9) {
            return Err(Error::TraceMismatch(format!(
                "trace dt {} differs from run dt {}",
                self.dt, time.dt
            )));
        }
        Ok(())
    }
}

/// Boundary condition for a propagation run.
pub enum BoundaryCondition<'a, T> {
    /// Homogeneous Neumann on the whole boundary.
    NeumannAll,
    /// Dirichlet data from a trace covering the full boundary.
    DirichletData(&'a BoundaryTrace<T>),
    /// Dirichlet data from a trace on its Γ, homogeneous Neumann elsewhere.
    Mixed(&'a BoundaryTrace<T>),
}

impl<'a, T: Float> BoundaryCondition<'a, T> {
    fn trace(&self) -> Option<&'a BoundaryTrace<T>> {
        match self {
            Self::NeumannAll => None,
            Self::DirichletData(t) | Self::Mixed(t) => Some(t),
        }
    }
}

/// 5-point Laplacian with mirror ghosts on all four walls.
fn laplacian_mirror<T: Float>(u: &[T], g: &Grid2D<T>, out: &mut [T]) {
    let nx = g.nx;
    let ny = g.ny;
    let hx = g.hx();
    let hy = g.hy();
    let ihx2 = T::one() / (hx * hx);
    let ihy2 = T::one() / (hy * hy);
    let two = T::cast(2.0);
    for j in 0..ny {
        let row = j * nx;
        let rm = if j == 0 { nx } else { row - nx };
        let rp = if j == ny - 1 { row - nx } else { row + nx };
        for i in 0..nx {
            let im = if i == 0 { row + 1 } else { row + i - 1 };
            let ip = if i == nx - 1 { row + nx - 2 } else { row + i + 1 };
            let uc = u[row + i];
            out[row + i] =
                (u[im] - two * uc + u[ip]) * ihx2 + (u[rm + i] - two * uc + u[rp + i]) * ihy2;
        }
    }
}

/// One leapfrog update `out = 2u − u_prev + c²dt² Δ₅u` with mirror ghosts.
fn leapfrog_step<T: Float>(u: &[T], u_prev: &[T], c2dt2: &[T], g: &Grid2D<T>, out: &mut [T]) {
    let nx = g.nx;
    let ny = g.ny;
    let hx = g.hx();
    let hy = g.hy();
    let ihx2 = T::one() / (hx * hx);
    let ihy2 = T::one() / (hy * hy);
    let two = T::cast(2.0);
    for j in 0..ny {
        let row = j * nx;
        let rm = if j == 0 { nx } else { row - nx };
        let rp = if j == ny - 1 { row - nx } else { row + nx };
        // Left wall node.
        {
            let uc = u[row];
            let lap = (two * u[row + 1] - two * uc) * ihx2
                + (u[rm] - two * uc + u[rp]) * ihy2;
            out[row] = two * uc - u_prev[row] + c2dt2[row] * lap;
        }
        // Interior of the row: branch-free stencil.
        for i in 1..nx - 1 {
            let k = row + i;
            let uc = u[k];
            let lap = (u[k - 1] - two * uc + u[k + 1]) * ihx2
                + (u[rm + i] - two * uc + u[rp + i]) * ihy2;
            out[k] = two * uc - u_prev[k] + c2dt2[k] * lap;
        }
        // Right wall node.
        {
            let k = row + nx - 1;
            let uc = u[k];
            let lap = (two * u[k - 1] - two * uc) * ihx2
                + (u[rm + nx - 1] - two * uc + u[rp + nx - 1]) * ihy2;
            out[k] = two * uc - u_prev[k] + c2dt2[k] * lap;
        }
    }
}

struct Run<'a, T: Float> {
    grid: Grid2D<T>,
    c2dt2: Vec<T>,
    dirichlet_nodes: Option<Vec<usize>>, // flat indices, same order as trace nodes
    trace_in: Option<&'a BoundaryTrace<T>>,
    record_nodes: Option<Vec<usize>>,
    recorded: Vec<T>,
}

impl<'a, T: Float> Run<'a, T> {
    fn new(
        grid: &Grid2D<T>,
        c: &ScalarField<T>,
        bc: &BoundaryCondition<'a, T>,
        time: &TimeAxis<T>,
        record: Option<&GammaSpec<T>>,
    ) -> Result<Self> {
        if c.grid() != grid {
            return Err(Error::GridMismatch("propagate speed field".into()));
        }
        check_speed_positive(c)?;
        if time.n_steps == 0 || !(time.dt > T::zero()) {
            return Err(Error::InvalidTimeStep(format!(
                "need a positive dt and at least one step, got dt={} n_steps={}",
                time.dt, time.n_steps
            )));
        }
        // Strict stability bound for the leapfrog/5-point pair.
        let (_, c_max) = c.min_max();
        let hx = grid.hx();
        let hy = grid.hy();
        let bound = (T::one() / (hx * hx) + T::one() / (hy * hy)).sqrt() * c_max * time.dt;
        if bound > T::one() + T::cast(1e-12) {
            return Err(Error::InvalidTimeStep(format!(
                "dt {} violates the stability bound (dt c_max sqrt(1/hx^2+1/hy^2) = {bound} > 1)",
                time.dt
            )));
        }

        let dirichlet_nodes = match bc {
            BoundaryCondition::NeumannAll => None,
            BoundaryCondition::DirichletData(trace) => {
                trace.check_against(grid, time)?;
                if !trace.gamma().is_full() {
                    return Err(Error::TraceMismatch(
                        "DirichletData needs a trace covering the full boundary".into(),
                    ));
                }
                Some(trace.nodes().iter().map(|&(i, j)| grid.idx(i, j)).collect())
            }
            BoundaryCondition::Mixed(trace) => {
                trace.check_against(grid, time)?;
                Some(trace.nodes().iter().map(|&(i, j)| grid.idx(i, j)).collect())
            }
        };

        let c2dt2 = c
            .values()
            .iter()
            .map(|&cv| cv * cv * time.dt * time.dt)
            .collect();

        let record_nodes = record.map(|gamma| {
            gamma.boundary_nodes(grid).iter().map(|&(i, j)| grid.idx(i, j)).collect::<Vec<_>>()
        });
        let recorded = match &record_nodes {
            Some(nodes) => Vec::with_capacity(nodes.len() * time.n_samples()),
            None => Vec::new(),
        };

        Ok(Self { grid: *grid, c2dt2, dirichlet_nodes, trace_in: bc.trace(), record_nodes, recorded })
    }

    fn impose(&self, k: usize, u: &mut [T]) {
        if let (Some(nodes), Some(trace)) = (&self.dirichlet_nodes, self.trace_in) {
            let row = trace.sample(k);
            for (&n, &v) in nodes.iter().zip(row) {
                u[n] = v;
            }
        }
    }

    fn record(&mut self, u: &[T]) {
        if let Some(nodes) = &self.record_nodes {
            for &n in nodes {
                self.recorded.push(u[n]);
            }
        }
    }

    fn check_finite(&self, u: &[T], step: usize) -> Result<()> {
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverDiverged(format!(
                "non-finite field value at step {step}"
            )));
        }
        Ok(())
    }

    fn into_trace(
        self,
        record: Option<&GammaSpec<T>>,
        dt: T,
    ) -> Result<Option<BoundaryTrace<T>>> {
        match record {
            None => Ok(None),
            Some(gamma) => {
                let n_nodes = self.record_nodes.as_ref().map_or(0, |n| n.len());
                let n_samples = if n_nodes == 0 { 0 } else { self.recorded.len() / n_nodes };
                Ok(Some(BoundaryTrace::from_values(
                    self.grid,
                    gamma.clone(),
                    dt,
                    n_samples,
                    self.recorded,
                )?))
            }
        }
    }
}

/// Propagates Cauchy data `(u0, ut0)` for `time.n_steps` steps under the
/// given boundary condition, optionally recording boundary values on a
/// subset after every step (including the initial state).
///
/// When the boundary condition carries a trace, sample `k` is imposed at step
/// `k`; the initial state is overwritten with sample 0 for consistency, which
/// is a no-op for compatible data. Non-finite field values abort the run.
pub fn propagate<T: Float>(
    u0: &ScalarField<T>,
    ut0: &ScalarField<T>,
    bc: BoundaryCondition<'_, T>,
    c: &ScalarField<T>,
    time: TimeAxis<T>,
    record: Option<&GammaSpec<T>>,
) -> Result<(WaveState<T>, Option<BoundaryTrace<T>>)> {
    let grid = *u0.grid();
    if ut0.grid() != &grid {
        return Err(Error::GridMismatch("propagate Cauchy data".into()));
    }
    let mut run = Run::new(&grid, c, &bc, &time, record)?;

    let n = grid.n_nodes();
    let mut prev = u0.values().to_vec();
    run.impose(0, &mut prev);
    run.record(&prev);

    // Taylor first step: u¹ = u⁰ + dt u̇⁰ + (dt²/2) c² Δ₅ u⁰.
    let mut cur = vec![T::zero(); n];
    laplacian_mirror(&prev, &grid, &mut cur);
    let half = T::cast(0.5);
    {
        let utv = ut0.values();
        for k in 0..n {
            cur[k] = prev[k] + time.dt * utv[k] + half * run.c2dt2[k] * cur[k];
        }
    }
    run.impose(1, &mut cur);
    run.record(&cur);

    let mut next = vec![T::zero(); n];
    for step in 2..=time.n_steps {
        leapfrog_step(&cur, &prev, &run.c2dt2, &grid, &mut next);
        run.impose(step, &mut next);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        run.record(&cur);
        if step % 64 == 0 {
            run.check_finite(&cur, step)?;
        }
    }
    run.check_finite(&cur, time.n_steps)?;

    let trace = run.into_trace(record, time.dt)?;
    let state = WaveState {
        u: ScalarField::from_values(grid, cur)?,
        u_prev: ScalarField::from_values(grid, prev)?,
        t: time.dt * T::cast_usize(time.n_steps),
        dt: time.dt,
    };
    Ok((state, trace))
}

/// Continues plain leapfrog stepping from an existing state (no Taylor
/// start). With the state's `u`/`u_prev` swapped this walks a finished run
/// backward — the scheme is exactly time-symmetric.
pub fn continue_leapfrog<T: Float>(
    state: &WaveState<T>,
    bc: BoundaryCondition<'_, T>,
    c: &ScalarField<T>,
    n_steps: usize,
) -> Result<WaveState<T>> {
    let grid = *state.u.grid();
    let time = TimeAxis { dt: state.dt, n_steps: n_steps.max(1) };
    let run = Run::new(&grid, c, &bc, &time, None)?;
    if run.trace_in.is_some() {
        return Err(Error::TraceMismatch(
            "continue_leapfrog does not support trace boundary data".into(),
        ));
    }

    let mut prev = state.u_prev.values().to_vec();
    let mut cur = state.u.values().to_vec();
    let mut next = vec![T::zero(); grid.n_nodes()];
    for step in 1..=n_steps {
        leapfrog_step(&cur, &prev, &run.c2dt2, &grid, &mut next);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        if step % 64 == 0 {
            run.check_finite(&cur, step)?;
        }
    }
    run.check_finite(&cur, n_steps)?;
    Ok(WaveState {
        u: ScalarField::from_values(grid, cur)?,
        u_prev: ScalarField::from_values(grid, prev)?,
        t: state.t + state.dt * T::cast_usize(n_steps),
        dt: state.dt,
    })
}

/// Forward observation map: propagates `(f, 0)` with Neumann walls and
/// records the boundary values on Γ at every step. Linear in `f`; the
/// initial sample of the trace is `f`'s own boundary values.
pub fn lambda_forward<T: Float>(
    f: &ScalarField<T>,
    c: &ScalarField<T>,
    gamma: &GammaSpec<T>,
    time: TimeAxis<T>,
) -> Result<BoundaryTrace<T>> {
    let zero = ScalarField::zeros(*f.grid());
    let (_, trace) = propagate(f, &zero, BoundaryCondition::NeumannAll, c, time, Some(gamma))?;
    Ok(trace.expect("recording was requested"))
}
