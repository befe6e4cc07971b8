//! Discrete harmonic extensions and energy-orthogonal projections.
//!
//! All solvers here invert the plain 5-point Laplacian `Δ₅` on subsets of the
//! grid with conjugate gradients. They exist because the reconstruction
//! theory lives in the energy space H: the seminorm behind
//! [`norm_hd`](crate::grid::norm_hd) is built from first differences along
//! grid edges, and summation by parts turns it into `−Σ u Δ₅v` whenever one
//! factor vanishes on the boundary ring. Three consequences are used
//! throughout and hold *exactly* (up to the CG residual):
//!
//! * discrete-harmonic fields are energy-orthogonal to fields vanishing on
//!   the boundary, so subtracting the harmonic extension of the boundary
//!   values ([`project_onto_zero_boundary`]) is an orthogonal projection and
//!   the Pythagoras split of the energy norm is exact;
//! * solving `Δ₅h = Δ₅f` inside a subdomain with zero exterior data
//!   ([`project_onto_subdomain`]) is the energy-orthogonal projection onto
//!   fields supported in that subdomain — self-adjoint, idempotent, and a
//!   contraction;
//! * both projections reproduce their range exactly.
//!
//! [`harmonic_extension_mixed`] solves the mixed (Zaremba) problem: Dirichlet
//! values on an observed boundary subset Γ, zero one-sided normal difference
//! on the rest. It produces the stationary state used to initialize
//! time reversal from partial boundary data.

use crate::error::{Error, Result};
use crate::float::Float;
use crate::grid::{Grid2D, ScalarField};
use crate::region::{GammaSpec, SubdomainSpec};

/// Default relative-residual tolerance for the conjugate-gradient solves.
pub const DEFAULT_CG_TOL: f64 = 1e-8;

const NO_SLOT: u32 = u32::MAX;

/// How a grid node enters a masked Laplace system.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Role {
    /// Solved for.
    Unknown,
    /// Held at a prescribed value.
    Fixed,
    /// Takes the value of its unique interior neighbor (zero one-sided
    /// normal difference). Only boundary-ring nodes may be mirrors; they are
    /// eliminated from the system, which keeps it symmetric positive
    /// definite.
    Mirror,
}

/// A masked SPD system `−Δ₅ w = s` over the `Unknown` nodes of a grid.
struct LaplaceSystem<T> {
    grid: Grid2D<T>,
    roles: Vec<Role>,
    /// Flat node index per unknown slot.
    unknowns: Vec<usize>,
    /// Unknown slot per node (`NO_SLOT` where not an unknown).
    slot: Vec<u32>,
    /// Diagonal per slot (mirror neighbors fold into it).
    diag: Vec<T>,
    /// Neighbor slots per unknown: west, east, south, north.
    nbr: Vec<[u32; 4]>,
    inv_hx2: T,
    inv_hy2: T,
}

impl<T: Float> LaplaceSystem<T> {
    /// Builds the system from per-node roles. Every unknown must lie strictly
    /// inside the grid (all four neighbors exist); mirrors must sit on the
    /// boundary ring.
    fn new(grid: Grid2D<T>, roles: Vec<Role>) -> Result<Self> {
        let mut slot = vec![NO_SLOT; grid.n_nodes()];
        let mut unknowns = Vec::new();
        for (k, role) in roles.iter().enumerate() {
            if *role == Role::Unknown {
                slot[k] = unknowns.len() as u32;
                unknowns.push(k);
            }
        }
        if unknowns.is_empty() {
            return Err(Error::InvalidRegion("no unknowns in elliptic system".into()));
        }

        let hx = grid.hx();
        let hy = grid.hy();
        let inv_hx2 = T::one() / (hx * hx);
        let inv_hy2 = T::one() / (hy * hy);
        let base_diag = T::cast(2.0) * (inv_hx2 + inv_hy2);

        let mut diag = Vec::with_capacity(unknowns.len());
        let mut nbr = Vec::with_capacity(unknowns.len());
        for &k in &unknowns {
            let i = k % grid.nx;
            let j = k / grid.nx;
            debug_assert!(i > 0 && i < grid.nx - 1 && j > 0 && j < grid.ny - 1);
            let neighbors = [k - 1, k + 1, k - grid.nx, k + grid.nx];
            let coefs = [inv_hx2, inv_hx2, inv_hy2, inv_hy2];
            let mut d = base_diag;
            let mut slots = [NO_SLOT; 4];
            for (a, (&n, &coef)) in neighbors.iter().zip(&coefs).enumerate() {
                match roles[n] {
                    Role::Unknown => slots[a] = slot[n],
                    Role::Fixed => {}
                    Role::Mirror => d -= coef,
                }
            }
            diag.push(d);
            nbr.push(slots);
        }

        Ok(Self { grid, roles, unknowns, slot, diag, nbr, inv_hx2, inv_hy2 })
    }

    /// `y = A x` for the reduced SPD matrix.
    fn matvec(&self, x: &[T], y: &mut [T]) {
        for m in 0..x.len() {
            let s = self.nbr[m];
            let mut acc = self.diag[m] * x[m];
            if s[0] != NO_SLOT {
                acc -= self.inv_hx2 * x[s[0] as usize];
            }
            if s[1] != NO_SLOT {
                acc -= self.inv_hx2 * x[s[1] as usize];
            }
            if s[2] != NO_SLOT {
                acc -= self.inv_hy2 * x[s[2] as usize];
            }
            if s[3] != NO_SLOT {
                acc -= self.inv_hy2 * x[s[3] as usize];
            }
            y[m] = acc;
        }
    }

    /// Right-hand side from an optional volume source (`s` at unknown nodes)
    /// plus the Dirichlet couplings of `fixed` node values.
    fn rhs(&self, source: Option<&ScalarField<T>>, fixed: &ScalarField<T>) -> Vec<T> {
        let nx = self.grid.nx;
        let fv = fixed.values();
        let mut b = Vec::with_capacity(self.unknowns.len());
        for &k in &self.unknowns {
            let mut acc = match source {
                Some(s) => s.values()[k],
                None => T::zero(),
            };
            let neighbors = [k - 1, k + 1, k - nx, k + nx];
            let coefs = [self.inv_hx2, self.inv_hx2, self.inv_hy2, self.inv_hy2];
            for (&n, &coef) in neighbors.iter().zip(&coefs) {
                if self.roles[n] == Role::Fixed {
                    acc += coef * fv[n];
                }
            }
            b.push(acc);
        }
        b
    }

    /// Jacobi-preconditioned conjugate gradients from a zero start. The
    /// convergence test is on the unpreconditioned relative residual.
    fn solve_cg(&self, b: &[T], tol: T) -> Result<Vec<T>> {
        let n = b.len();
        let norm_b = b.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm_b == T::zero() {
            return Ok(vec![T::zero(); n]);
        }
        let target = tol * norm_b;

        let mut x = vec![T::zero(); n];
        let mut r = b.to_vec();
        let mut z: Vec<T> = r.iter().zip(&self.diag).map(|(&rv, &d)| rv / d).collect();
        let mut p = z.clone();
        let mut ap = vec![T::zero(); n];
        let mut rz: T = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
        let mut rr: T = r.iter().map(|&v| v * v).sum();

        let max_iter = 10 * n;
        for _ in 0..max_iter {
            if rr.sqrt() <= target {
                return Ok(x);
            }
            self.matvec(&p, &mut ap);
            let pap: T = p.iter().zip(&ap).map(|(&a, &b)| a * b).sum();
            if !(pap > T::zero()) {
                return Err(Error::SolverDiverged(format!(
                    "conjugate gradients lost positive definiteness (pAp = {pap})"
                )));
            }
            let alpha = rz / pap;
            rr = T::zero();
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
                rr += r[k] * r[k];
            }
            for k in 0..n {
                z[k] = r[k] / self.diag[k];
            }
            let rz_new: T = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        if rr.sqrt() <= target {
            Ok(x)
        } else {
            Err(Error::SolverDiverged(format!(
                "conjugate gradients did not reach {tol} in {max_iter} iterations \
                 (relative residual {})",
                rr.sqrt() / norm_b
            )))
        }
    }

    /// Assembles the full field: unknowns from `x`, fixed nodes from
    /// `fixed`, mirrors copied from their interior neighbor (corners from
    /// the diagonal interior node).
    fn assemble(&self, x: &[T], fixed: &ScalarField<T>) -> Result<ScalarField<T>> {
        let g = self.grid;
        let mut out = vec![T::zero(); g.n_nodes()];
        for (m, &k) in self.unknowns.iter().enumerate() {
            out[k] = x[m];
        }
        for k in 0..g.n_nodes() {
            match self.roles[k] {
                Role::Unknown => {}
                Role::Fixed => out[k] = fixed.values()[k],
                Role::Mirror => {
                    let i = k % g.nx;
                    let j = k / g.nx;
                    let ii = i.clamp(1, g.nx - 2);
                    let jj = j.clamp(1, g.ny - 2);
                    let src = g.idx(ii, jj);
                    debug_assert!(self.slot[src] != NO_SLOT || self.roles[src] == Role::Unknown);
                    out[k] = x[self.slot[src] as usize];
                }
            }
        }
        ScalarField::from_values(g, out)
    }
}

/// Solves `Δ₅w = 0` with `w` equal to `boundary`'s values on the whole
/// boundary ring (interior values of `boundary` are ignored).
pub fn harmonic_extension<T: Float>(boundary: &ScalarField<T>, tol: T) -> Result<ScalarField<T>> {
    harmonic_extension_mixed(boundary, &GammaSpec::full_boundary(), tol)
}

/// Solves the mixed extension problem: `Δ₅w = 0` in the interior, `w` equal
/// to `data`'s values on the boundary nodes of Γ, and zero one-sided normal
/// difference (`w(boundary node) = w(interior neighbor)`) on the remaining
/// boundary nodes. With Γ the full boundary this is [`harmonic_extension`].
pub fn harmonic_extension_mixed<T: Float>(
    data: &ScalarField<T>,
    gamma: &GammaSpec<T>,
    tol: T,
) -> Result<ScalarField<T>> {
    let g = *data.grid();
    let mut roles = vec![Role::Mirror; g.n_nodes()];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            roles[g.idx(i, j)] = Role::Unknown;
        }
    }
    for (i, j) in gamma.boundary_nodes(&g) {
        roles[g.idx(i, j)] = Role::Fixed;
    }
    let system = LaplaceSystem::new(g, roles)?;
    let b = system.rhs(None, data);
    let x = system.solve_cg(&b, tol)?;
    system.assemble(&x, data)
}

/// Energy-orthogonal projection onto fields vanishing on the boundary:
/// `f − (harmonic extension of f's boundary values)`. The result is exactly
/// zero on the boundary ring.
pub fn project_onto_zero_boundary<T: Float>(f: &ScalarField<T>, tol: T) -> Result<ScalarField<T>> {
    let ext = harmonic_extension(f, tol)?;
    let mut out = f.clone();
    out.add_scaled(&ext, -T::one())?;
    // The extension matches f on the ring by construction; pin the zeros.
    let g = *f.grid();
    for (i, j) in g.boundary_nodes() {
        *out.at_mut(i, j) = T::zero();
    }
    Ok(out)
}

/// Energy-orthogonal projection onto fields supported in `omega0`: solves
/// `Δ₅h = Δ₅f` at the nodes strictly inside the subdomain with `h = 0`
/// everywhere else and returns the zero-extended `h`.
///
/// The subdomain must keep at least one cell of clearance from the grid
/// boundary so every unknown's 5-point stencil stays inside the grid.
pub fn project_onto_subdomain<T: Float>(
    f: &ScalarField<T>,
    omega0: &SubdomainSpec<T>,
    tol: T,
) -> Result<ScalarField<T>> {
    let g = *f.grid();
    omega0.validate(&g)?;
    let margin = T::cast(1e-9) * g.min_h();

    let mut roles = vec![Role::Fixed; g.n_nodes()];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            if omega0.contains_strict(g.x(i), g.y(j), margin) {
                roles[g.idx(i, j)] = Role::Unknown;
            }
        }
    }

    // Source: Δ₅f at the unknowns (their full stencils are interior). The
    // trailing sign matches `−Δ₅h = −Δ₅f`.
    let hx = g.hx();
    let hy = g.hy();
    let ihx2 = T::one() / (hx * hx);
    let ihy2 = T::one() / (hy * hy);
    let two = T::cast(2.0);
    let fv = f.values();
    let mut source = ScalarField::zeros(g);
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let k = g.idx(i, j);
            if roles[k] == Role::Unknown {
                let lap = (fv[k - 1] - two * fv[k] + fv[k + 1]) * ihx2
                    + (fv[k - g.nx] - two * fv[k] + fv[k + g.nx]) * ihy2;
                *source.at_mut(i, j) = -lap;
            }
        }
    }

    let system = LaplaceSystem::new(g, roles)?;
    let zero = ScalarField::zeros(g);
    let b = system.rhs(Some(&source), &zero);
    let x = system.solve_cg(&b, tol)?;
    system.assemble(&x, &zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_hd, norm_hd};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid2D<f64> {
        Grid2D::square(n).unwrap()
    }

    const TIGHT: f64 = 1e-12;

    #[test]
    fn extension_reproduces_discrete_harmonic_fields() {
        // Constants, x, y, xy and x² − y² all have vanishing 5-point
        // Laplacians (second differences of quadratics are exact), so the
        // extension of their ring values must recover them to solver accuracy.
        let g = grid(51);
        for f in [
            ScalarField::constant(g, 3.0),
            ScalarField::from_fn(g, |x, _| x),
            ScalarField::from_fn(g, |_, y| 2.0 * y - 0.3),
            ScalarField::from_fn(g, |x, y| x * y),
            ScalarField::from_fn(g, |x, y| x * x - y * y),
        ] {
            let ext = harmonic_extension(&f, TIGHT).unwrap();
            let err = ext.diff(&f).unwrap().abs_max();
            assert!(err < 1e-9, "extension error {err}");
        }
    }

    #[test]
    fn extension_error_shrinks_at_second_order() {
        // Re (x+iy)⁴ is harmonic but not discretely so (its 5-point Laplacian
        // is 4h², a pure O(h²) defect), making it a clean probe of the
        // scheme's convergence order.
        let f_exact = |x: f64, y: f64| x.powi(4) - 6.0 * x * x * y * y + y.powi(4);
        let mut errs = Vec::new();
        for n in [51usize, 101, 201] {
            let g = grid(n);
            let f = ScalarField::from_fn(g, f_exact);
            let ext = harmonic_extension(&f, TIGHT).unwrap();
            errs.push(ext.diff(&f).unwrap().abs_max());
        }
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((1.7..=2.3).contains(&slope), "slope {slope}, errors {errs:?}");
        }
    }

    #[test]
    fn subdomain_projection_annihilates_harmonic_fields() {
        // Δ₅(xy) = 0 everywhere, so the interior solve has zero source.
        let g = grid(51);
        let omega0 = SubdomainSpec::centered_square(0.9).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x * y);
        let pf = project_onto_subdomain(&f, &omega0, TIGHT).unwrap();
        assert!(pf.abs_max() < 1e-12, "leftover {}", pf.abs_max());
    }

    #[test]
    fn extension_matches_dense_gaussian_elimination() {
        // Independent oracle: assemble the full interior system as a dense
        // matrix and solve it by Gaussian elimination with partial pivoting.
        let g = grid(51);
        let data = ScalarField::from_fn(g, |x, y| (2.0 * x).sin() + 0.7 * (3.0 * y).cos());
        let ext = harmonic_extension(&data, TIGHT).unwrap();

        let n_in = (g.nx - 2) * (g.ny - 2);
        let slot = |i: usize, j: usize| (j - 1) * (g.nx - 2) + (i - 1);
        let ihx2 = 1.0 / (g.hx() * g.hx());
        let ihy2 = 1.0 / (g.hy() * g.hy());
        let mut a = vec![0.0f64; n_in * n_in];
        let mut b = vec![0.0f64; n_in];
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let m = slot(i, j);
                a[m * n_in + m] = 2.0 * (ihx2 + ihy2);
                for (ni, nj, coef) in
                    [(i - 1, j, ihx2), (i + 1, j, ihx2), (i, j - 1, ihy2), (i, j + 1, ihy2)]
                {
                    if g.is_boundary(ni, nj) {
                        b[m] += coef * data.at(ni, nj);
                    } else {
                        a[m * n_in + slot(ni, nj)] = -coef;
                    }
                }
            }
        }
        let x = dense_solve(&mut a, &mut b, n_in);
        let mut err = 0.0f64;
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                err = err.max((ext.at(i, j) - x[slot(i, j)]).abs());
            }
        }
        assert!(err < 1e-8, "CG vs dense solve differ by {err}");
    }

    #[test]
    fn mixed_extension_matches_dense_gaussian_elimination() {
        // Same oracle for the mixed problem on a partial Γ (left wall and
        // bottom wall): non-Γ boundary nodes mirror their interior neighbor,
        // which folds into the diagonal.
        let g = grid(51);
        let gamma = GammaSpec::new(vec![
            crate::region::GammaSegment::new(crate::region::Edge::Left, 0.0, 1.0),
            crate::region::GammaSegment::new(crate::region::Edge::Bottom, 0.0, 1.0),
        ])
        .unwrap();
        let data = ScalarField::from_fn(g, |x, y| x + 0.5 * (2.0 * y).sin());
        let ext = harmonic_extension_mixed(&data, &gamma, TIGHT).unwrap();

        let on_gamma = {
            let mut mask = vec![false; g.n_nodes()];
            for (i, j) in gamma.boundary_nodes(&g) {
                mask[g.idx(i, j)] = true;
            }
            mask
        };
        let n_in = (g.nx - 2) * (g.ny - 2);
        let slot = |i: usize, j: usize| (j - 1) * (g.nx - 2) + (i - 1);
        let ihx2 = 1.0 / (g.hx() * g.hx());
        let ihy2 = 1.0 / (g.hy() * g.hy());
        let mut a = vec![0.0f64; n_in * n_in];
        let mut b = vec![0.0f64; n_in];
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let m = slot(i, j);
                a[m * n_in + m] = 2.0 * (ihx2 + ihy2);
                for (ni, nj, coef) in
                    [(i - 1, j, ihx2), (i + 1, j, ihx2), (i, j - 1, ihy2), (i, j + 1, ihy2)]
                {
                    if !g.is_boundary(ni, nj) {
                        a[m * n_in + slot(ni, nj)] = -coef;
                    } else if on_gamma[g.idx(ni, nj)] {
                        b[m] += coef * data.at(ni, nj);
                    } else {
                        // Mirror: neighbor value equals this unknown.
                        a[m * n_in + m] -= coef;
                    }
                }
            }
        }
        let x = dense_solve(&mut a, &mut b, n_in);
        let mut err = 0.0f64;
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                err = err.max((ext.at(i, j) - x[slot(i, j)]).abs());
            }
        }
        assert!(err < 1e-8, "CG vs dense solve differ by {err}");
        // Non-Γ boundary nodes must equal their interior neighbor.
        let i_mid = (g.nx - 1) / 2;
        assert_eq!(ext.at(i_mid, g.ny - 1), ext.at(i_mid, g.ny - 2));
        assert_eq!(ext.at(g.nx - 1, i_mid), ext.at(g.nx - 2, i_mid));
    }

    /// Gaussian elimination with partial pivoting (row-major `a`).
    fn dense_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Vec<f64> {
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r1, &r2| {
                    a[r1 * n + col].abs().partial_cmp(&a[r2 * n + col].abs()).unwrap()
                })
                .unwrap();
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                b.swap(col, pivot);
            }
            let d = a[col * n + col];
            assert!(d.abs() > 1e-14, "singular oracle matrix");
            for row in col + 1..n {
                let factor = a[row * n + col] / d;
                if factor != 0.0 {
                    for k in col..n {
                        a[row * n + k] -= factor * a[col * n + k];
                    }
                    b[row] -= factor * b[col];
                }
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = b[row];
            for k in row + 1..n {
                acc -= a[row * n + k] * x[k];
            }
            x[row] = acc / a[row * n + row];
        }
        x
    }

    #[test]
    fn extension_obeys_the_maximum_principle() {
        let g = grid(51);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut data = ScalarField::zeros(g);
        for (i, j) in g.boundary_nodes() {
            *data.at_mut(i, j) = rng.gen_range(-1.0..1.0);
        }
        let (lo, hi) = {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (i, j) in g.boundary_nodes() {
                lo = lo.min(data.at(i, j));
                hi = hi.max(data.at(i, j));
            }
            (lo, hi)
        };
        let ext = harmonic_extension(&data, TIGHT).unwrap();
        let (mn, mx) = ext.min_max();
        assert!(mn >= lo - 1e-9 && mx <= hi + 1e-9, "range [{mn}, {mx}] vs [{lo}, {hi}]");
    }

    #[test]
    fn zero_boundary_projection_is_an_exact_orthogonal_split() {
        // Summation by parts makes harmonic fields energy-orthogonal to
        // fields vanishing on the ring, so the Pythagoras split is exact up
        // to the solver tolerance.
        let g = grid(101);
        let f = ScalarField::from_fn(g, |x, y| (1.7 * x + 0.4).sin() * (0.9 * y - 0.2).cos() + 0.3 * x);
        let pf = project_onto_zero_boundary(&f, TIGHT).unwrap();
        for (i, j) in g.boundary_nodes() {
            assert_eq!(pf.at(i, j), 0.0);
        }
        let mut ext = f.clone();
        ext.add_scaled(&pf, -1.0).unwrap();
        let total = inner_hd(&f, &f).unwrap();
        let split = inner_hd(&pf, &pf).unwrap() + inner_hd(&ext, &ext).unwrap();
        assert!((total - split).abs() <= 1e-9 * total, "defect {}", (total - split).abs() / total);
        // Cross term vanishes.
        let cross = inner_hd(&pf, &ext).unwrap();
        assert!(cross.abs() <= 1e-9 * total, "cross term {cross}");
        // Orthogonal projections never grow the energy norm.
        assert!(norm_hd(&pf) <= norm_hd(&f) * (1.0 + 1e-8));
    }

    #[test]
    fn subdomain_projection_rejects_tiny_regions() {
        let g = grid(51);
        let f = ScalarField::from_fn(g, |x, y| x + y);
        // Spans fewer than five nodes across (h = 0.04).
        let tiny = SubdomainSpec::rect(-0.05, 0.05, -0.05, 0.05).unwrap();
        assert!(matches!(
            project_onto_subdomain(&f, &tiny, TIGHT),
            Err(Error::InvalidRegion(_))
        ));
    }

    #[test]
    fn subdomain_projection_reproduces_interior_fields() {
        let g = grid(101);
        let omega0 = SubdomainSpec::rect(-0.9, 0.9, -0.9, 0.9).unwrap();
        // Supported strictly inside the subdomain.
        let f = ScalarField::from_fn(g, |x, y| {
            if x.abs() < 0.7 && y.abs() < 0.7 {
                let bx = (0.7f64 * 0.7 - x * x).powi(2);
                let by = (0.7f64 * 0.7 - y * y).powi(2);
                bx * by
            } else {
                0.0
            }
        });
        let pf = project_onto_subdomain(&f, &omega0, TIGHT).unwrap();
        let err = pf.diff(&f).unwrap().abs_max();
        assert!(err < 1e-9 * f.abs_max(), "reproduction error {err}");
    }

    #[test]
    fn subdomain_projection_is_supported_self_adjoint_and_contractive() {
        let g = grid(101);
        let omega0 = SubdomainSpec::rect(-0.8, 0.6, -0.7, 0.9).unwrap();
        let f = ScalarField::from_fn(g, |x, y| ((x - 0.3) * 2.2).sin() + 0.5 * (y * 1.4).cos());
        let w = ScalarField::from_fn(g, |x, y| (-(x * x + (y + 0.4) * (y + 0.4)) / 0.08).exp());
        let pf = project_onto_subdomain(&f, &omega0, TIGHT).unwrap();
        let pw = project_onto_subdomain(&w, &omega0, TIGHT).unwrap();

        // Support.
        let margin = 1e-9 * g.min_h();
        for j in 0..g.ny {
            for i in 0..g.nx {
                if !omega0.contains_strict(g.x(i), g.y(j), margin) {
                    assert_eq!(pf.at(i, j), 0.0);
                }
            }
        }
        // Self-adjointness in the energy product.
        let lhs = inner_hd(&pf, &w).unwrap();
        let rhs = inner_hd(&f, &pw).unwrap();
        let scale = norm_hd(&f) * norm_hd(&w);
        assert!((lhs - rhs).abs() <= 1e-9 * scale, "asymmetry {}", (lhs - rhs).abs() / scale);
        // Idempotence.
        let ppf = project_onto_subdomain(&pf, &omega0, TIGHT).unwrap();
        let idem = ppf.diff(&pf).unwrap().abs_max();
        assert!(idem <= 1e-8 * pf.abs_max().max(1.0), "idempotence defect {idem}");
        // Contraction.
        assert!(norm_hd(&pf) <= norm_hd(&f) * (1.0 + 1e-10));
        assert!(norm_hd(&pw) <= norm_hd(&w) * (1.0 + 1e-10));
    }

    #[test]
    fn subdomain_projection_handles_disks() {
        let g = grid(101);
        let omega0 = SubdomainSpec::disk(0.1, -0.2, 0.55).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (x + y).sin());
        let pf = project_onto_subdomain(&f, &omega0, TIGHT).unwrap();
        let margin = 1e-9 * g.min_h();
        for j in 0..g.ny {
            for i in 0..g.nx {
                if !omega0.contains_strict(g.x(i), g.y(j), margin) {
                    assert_eq!(pf.at(i, j), 0.0);
                }
            }
        }
        assert!(norm_hd(&pf) > 0.0);
        assert!(norm_hd(&pf) <= norm_hd(&f) * (1.0 + 1e-10));
    }

    #[test]
    fn zero_data_yields_zero_solutions_exactly() {
        let g = grid(51);
        let zero = ScalarField::zeros(g);
        let ext = harmonic_extension(&zero, TIGHT).unwrap();
        assert_eq!(ext.abs_max(), 0.0);
        let omega0 = SubdomainSpec::centered_square(0.9).unwrap();
        let p = project_onto_subdomain(&zero, &omega0, TIGHT).unwrap();
        assert_eq!(p.abs_max(), 0.0);
    }

    #[test]
    fn mixed_extension_with_full_gamma_equals_plain_extension() {
        let g = grid(51);
        let data = ScalarField::from_fn(g, |x, y| x * x + (3.0 * y).sin());
        let full = harmonic_extension(&data, TIGHT).unwrap();
        let mixed =
            harmonic_extension_mixed(&data, &GammaSpec::full_boundary(), TIGHT).unwrap();
        assert_eq!(full.diff(&mixed).unwrap().abs_max(), 0.0);
    }
}
