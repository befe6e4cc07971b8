//! Uniform tensor-product grid on a rectangle, nodal scalar fields, and the
//! discrete inner products and norms shared by every solver in the crate.
//!
//! Fields are stored row-major: node `(i, j)` (with `i` the x index) lives at
//! flat index `j * nx + i`. Nodal quadrature uses the trapezoid rule — weight
//! 1 in the interior, 1/2 on edges, 1/4 at corners — whose weights sum to the
//! domain area exactly, so constants integrate exactly.
//!
//! Two bilinear forms are provided:
//!
//! * [`inner_l2_weighted`] — the weighted L² pairing `Σ a b c⁻² w hx hy`
//!   (acoustic energy density pairs velocities with weight c⁻²).
//! * [`inner_hd`] / [`norm_hd`] — the Dirichlet form, assembled from squared
//!   *forward differences along grid edges* with trapezoid weights transverse
//!   to each edge. This is exactly the energy form of the 5-point Laplacian
//!   used by the wave and elliptic solvers: discrete harmonic functions are
//!   orthogonal in this form to fields vanishing on the boundary, up to the
//!   iterative-solver tolerance only. The projection identities in the test
//!   suite (Pythagoras, self-adjointness) rely on that exactness; a nodal
//!   centered-difference gradient would satisfy them only to O(h²). On smooth
//!   fields the two conventions agree to O(h²), and linear fields are exact:
//!   `f = x` on [-1,1]² has `norm_hd(f) = 2`, the square root of the area.

use crate::error::{Error, Result};
use crate::float::Float;

/// Uniform grid on the rectangle `[x_min, x_max] × [y_min, y_max]`.
///
/// Node counts are odd and at least 51 per axis so that the domain center and
/// edge midpoints are grid nodes and coarse test grids still resolve the
/// stencils; constructors enforce this.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D<T> {
    pub nx: usize,
    pub ny: usize,
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Float> Grid2D<T> {
    /// Creates a grid, validating node counts (odd, ≥ 51) and extents.
    pub fn new(nx: usize, ny: usize, x_min: T, x_max: T, y_min: T, y_max: T) -> Result<Self> {
        if nx < 51 || ny < 51 {
            return Err(Error::InvalidGrid(format!(
                "node counts must be at least 51, got {nx} x {ny}"
            )));
        }
        if nx % 2 == 0 || ny % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "node counts must be odd, got {nx} x {ny}"
            )));
        }
        if !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::InvalidGrid(format!(
                "extents must be increasing and finite, got x [{x_min}, {x_max}] y [{y_min}, {y_max}]"
            )));
        }
        Ok(Self { nx, ny, x_min, x_max, y_min, y_max })
    }

    /// The standard computational domain `[-1, 1]²` with `n × n` nodes.
    pub fn square(n: usize) -> Result<Self> {
        let one = T::one();
        Self::new(n, n, -one, one, -one, one)
    }

    /// Grid spacing in x.
    #[inline]
    pub fn hx(&self) -> T {
        (self.x_max - self.x_min) / T::cast_usize(self.nx - 1)
    }

    /// Grid spacing in y.
    #[inline]
    pub fn hy(&self) -> T {
        (self.y_max - self.y_min) / T::cast_usize(self.ny - 1)
    }

    /// Smaller of the two spacings (CFL bounds, ray steps).
    #[inline]
    pub fn min_h(&self) -> T {
        self.hx().min(self.hy())
    }

    /// Total node count.
    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat index of node `(i, j)`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// x coordinate of column `i`.
    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x_min + T::cast_usize(i) * self.hx()
    }

    /// y coordinate of row `j`.
    #[inline]
    pub fn y(&self, j: usize) -> T {
        self.y_min + T::cast_usize(j) * self.hy()
    }

    /// Position of node `(i, j)`.
    #[inline]
    pub fn pos(&self, i: usize, j: usize) -> (T, T) {
        (self.x(i), self.y(j))
    }

    /// Whether node `(i, j)` lies on the grid boundary.
    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    /// Trapezoid quadrature weight of node `(i, j)`: 1 interior, 1/2 edge,
    /// 1/4 corner. Multiplied by `hx·hy` these sum to the domain area.
    #[inline]
    pub fn trapezoid_weight(&self, i: usize, j: usize) -> T {
        let half = T::cast(0.5);
        let mut w = T::one();
        if i == 0 || i == self.nx - 1 {
            w = w * half;
        }
        if j == 0 || j == self.ny - 1 {
            w = w * half;
        }
        w
    }

    /// Boundary nodes in deterministic row-major scan order.
    pub fn boundary_nodes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(2 * (self.nx + self.ny) - 4);
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.is_boundary(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn require_same(&self, other: &Self, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.nx, self.ny, other.nx, other.ny
            )))
        }
    }
}

/// Nodal scalar field on a [`Grid2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid2D<T>,
    values: Vec<T>,
}

impl<T: Float> ScalarField<T> {
    /// Zero field.
    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self { grid, values: vec![T::zero(); grid.n_nodes()] }
    }

    /// Constant field.
    pub fn constant(grid: Grid2D<T>, v: T) -> Self {
        Self { grid, values: vec![v; grid.n_nodes()] }
    }

    /// Field sampled from a function of position.
    pub fn from_fn(grid: Grid2D<T>, mut f: impl FnMut(T, T) -> T) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                values.push(f(grid.x(i), y));
            }
        }
        Self { grid, values }
    }

    /// Wraps an existing value vector (length must match the grid).
    pub fn from_values(grid: Grid2D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::GridMismatch(format!(
                "value vector of length {} on a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(Self { grid, values })
    }

    /// The grid this field lives on.
    #[inline]
    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    /// Value at node `(i, j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.idx(i, j)]
    }

    /// Mutable value at node `(i, j)`.
    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        let k = self.grid.idx(i, j);
        &mut self.values[k]
    }

    /// Raw values, row-major.
    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Mutable raw values, row-major.
    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Self, s: T) -> Result<()> {
        self.grid.require_same(&other.grid, "add_scaled")?;
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }

    /// `self *= s`.
    pub fn scale(&mut self, s: T) {
        for a in &mut self.values {
            *a *= s;
        }
    }

    /// Returns `self - other`.
    pub fn diff(&self, other: &Self) -> Result<Self> {
        self.grid.require_same(&other.grid, "diff")?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// Largest absolute nodal value.
    pub fn abs_max(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Smallest and largest nodal values.
    pub fn min_max(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Plain (unweighted) nodal Euclidean norm, used by relative-error
    /// metrics.
    pub fn norm_l2_nodal(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// True if any value is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.values.iter().any(|v| !v.is_finite())
    }

    /// Bicubic interpolation at an arbitrary point, with the 4x4 node
    /// stencil shifted (never duplicated) at the walls so cubic accuracy
    /// holds uniformly up to the boundary. Points outside the rectangle are
    /// clamped onto it. Used to evaluate gridded speed fields along rays;
    /// returns the value and the gradient.
    pub fn sample_bicubic_with_grad(&self, x: T, y: T) -> (T, (T, T)) {
        let g = &self.grid;
        let hx = g.hx();
        let hy = g.hy();
        let nmax_x = T::cast_usize(g.nx - 1);
        let nmax_y = T::cast_usize(g.ny - 1);
        let sx = ((x - g.x_min) / hx).max(T::zero()).min(nmax_x);
        let sy = ((y - g.y_min) / hy).max(T::zero()).min(nmax_y);
        let base = |s: T, n: usize| -> usize {
            // Start of the 4-node window: the cell's left neighbor, pulled
            // inside so the window fits.
            (s.floor().to_isize().unwrap_or(0) - 1).clamp(0, n as isize - 4) as usize
        };
        let bx = base(sx, g.nx);
        let by = base(sy, g.ny);

        let (wx, dwx) = lagrange_cubic_weights(sx - T::cast_usize(bx));
        let (wy, dwy) = lagrange_cubic_weights(sy - T::cast_usize(by));

        let mut v = T::zero();
        let mut dx = T::zero();
        let mut dy = T::zero();
        for (b, wyb) in wy.iter().enumerate() {
            let j = by + b;
            let mut row = T::zero();
            let mut drow = T::zero();
            for (a, wxa) in wx.iter().enumerate() {
                let u = self.values[g.idx(bx + a, j)];
                row += *wxa * u;
                drow += dwx[a] * u;
            }
            v += *wyb * row;
            dx += *wyb * drow;
            dy += dwy[b] * row;
        }
        (v, (dx / hx, dy / hy))
    }
}

/// Cubic Lagrange weights and their parameter derivatives for nodes at
/// local coordinates `0, 1, 2, 3`, evaluated at `xi ∈ [0, 3]`.
fn lagrange_cubic_weights<T: Float>(xi: T) -> ([T; 4], [T; 4]) {
    let sixth = T::cast(1.0 / 6.0);
    let half = T::cast(0.5);
    let m0 = xi;
    let m1 = xi - T::one();
    let m2 = xi - T::cast(2.0);
    let m3 = xi - T::cast(3.0);
    let w = [
        -sixth * m1 * m2 * m3,
        half * m0 * m2 * m3,
        -half * m0 * m1 * m3,
        sixth * m0 * m1 * m2,
    ];
    let dw = [
        -sixth * (m2 * m3 + m1 * m3 + m1 * m2),
        half * (m2 * m3 + m0 * m3 + m0 * m2),
        -half * (m1 * m3 + m0 * m3 + m0 * m1),
        sixth * (m1 * m2 + m0 * m1 + m0 * m2),
    ];
    (w, dw)
}

/// Validates that a speed field is strictly positive, returning the offending
/// node otherwise.
pub(crate) fn check_speed_positive<T: Float>(c: &ScalarField<T>) -> Result<()> {
    let g = c.grid();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let v = c.at(i, j);
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::NonpositiveSpeed { i, j, value: v.as_f64() });
            }
        }
    }
    Ok(())
}

/// Weighted L² inner product `Σ a·b·c⁻²·w·hx·hy` with trapezoid weights `w`.
///
/// The weight `c⁻²` makes this the natural pairing for time derivatives of
/// acoustic fields with sound speed `c`; `c` must be strictly positive.
pub fn inner_l2_weighted<T: Float>(
    a: &ScalarField<T>,
    b: &ScalarField<T>,
    c: &ScalarField<T>,
) -> Result<T> {
    let g = a.grid();
    g.require_same(b.grid(), "inner_l2_weighted operands")?;
    g.require_same(c.grid(), "inner_l2_weighted speed")?;
    check_speed_positive(c)?;

    let half = T::cast(0.5);
    let mut acc = T::zero();
    for j in 0..g.ny {
        let wy = if j == 0 || j == g.ny - 1 { half } else { T::one() };
        let row = j * g.nx;
        let (av, bv, cv) = (a.values(), b.values(), c.values());
        for i in 0..g.nx {
            let wx = if i == 0 || i == g.nx - 1 { half } else { T::one() };
            let k = row + i;
            acc += wx * wy * av[k] * bv[k] / (cv[k] * cv[k]);
        }
    }
    Ok(acc * g.hx() * g.hy())
}

/// Dirichlet inner product: the energy form of the 5-point Laplacian.
///
/// `Σ_x-edges (δₓa)(δₓb)·w_y·hx·hy + Σ_y-edges (δᵧa)(δᵧb)·w_x·hx·hy`, where
/// `δ` are forward differences along edges and the trapezoid weight applies
/// transverse to the edge direction. Independent of the sound speed.
pub fn inner_hd<T: Float>(a: &ScalarField<T>, b: &ScalarField<T>) -> Result<T> {
    let g = a.grid();
    g.require_same(b.grid(), "inner_hd operands")?;
    let nx = g.nx;
    let ny = g.ny;
    let hx = g.hx();
    let hy = g.hy();
    let half = T::cast(0.5);
    let (av, bv) = (a.values(), b.values());

    // x-directed edges: (i,j) -> (i+1,j), transverse weight in y.
    let mut sx = T::zero();
    for j in 0..ny {
        let wy = if j == 0 || j == ny - 1 { half } else { T::one() };
        let row = j * nx;
        let mut rowsum = T::zero();
        for i in 0..nx - 1 {
            let da = av[row + i + 1] - av[row + i];
            let db = bv[row + i + 1] - bv[row + i];
            rowsum += da * db;
        }
        sx += wy * rowsum;
    }
    // y-directed edges: (i,j) -> (i,j+1), transverse weight in x.
    let mut sy = T::zero();
    for j in 0..ny - 1 {
        let row = j * nx;
        let mut rowsum = T::zero();
        for i in 0..nx {
            let wx = if i == 0 || i == nx - 1 { half } else { T::one() };
            let da = av[row + nx + i] - av[row + i];
            let db = bv[row + nx + i] - bv[row + i];
            rowsum += wx * da * db;
        }
        sy += rowsum;
    }
    // Each squared difference carries 1/h² and the edge carries hx·hy.
    Ok(sx * hy / hx + sy * hx / hy)
}

/// Dirichlet seminorm `inner_hd(f, f).sqrt()`; vanishes exactly on constants.
pub fn norm_hd<T: Float>(f: &ScalarField<T>) -> T {
    inner_hd(f, f).expect("same field").max(T::zero()).sqrt()
}

/// Discrete acoustic energy `‖u‖²_{H_D} + ‖ut‖²_{L², c⁻²}`.
pub fn energy<T: Float>(
    u: &ScalarField<T>,
    ut: &ScalarField<T>,
    c: &ScalarField<T>,
) -> Result<T> {
    Ok(inner_hd(u, u)? + inner_l2_weighted(ut, ut, c)?)
}
