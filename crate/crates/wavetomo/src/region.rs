//! Subdomains of the computational rectangle and subsets of its boundary.
//!
//! [`SubdomainSpec`] describes the region Ω₀ that reconstructions are
//! projected onto (an axis-aligned rectangle or a disk, strictly inside the
//! grid rectangle). [`GammaSpec`] describes the observation subset Γ of the
//! boundary as a union of per-edge fraction intervals.
//!
//! Boundary geometry is handled in arc-length coordinates: the boundary is
//! parameterized counterclockwise from the lower-left corner, segments become
//! intervals on that circle, and overlapping or corner-adjacent segments
//! merge. Distances along the boundary to the endpoints of Γ then classify
//! points as inside Γ, outside it, or within tolerance of an endpoint — the
//! last case is what the ray analyzer flags as degenerate. A corner shared by
//! two covered edges is interior to Γ on the circle, so corner reflections on
//! a fully covered boundary are ordinary Γ contacts.

use crate::error::{Error, Result};
use crate::float::Float;
use crate::grid::Grid2D;

/// Region Ω₀ ⊂ Ω that initial data is supported in and reconstructions are
/// projected onto.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SubdomainSpec<T> {
    /// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    Rect { x0: T, x1: T, y0: T, y1: T },
    /// Closed disk of radius `r` centered at `(cx, cy)`.
    Disk { cx: T, cy: T, r: T },
}

impl<T: Float> SubdomainSpec<T> {
    /// Rectangle constructor with basic ordering checks.
    pub fn rect(x0: T, x1: T, y0: T, y1: T) -> Result<Self> {
        if !(x1 > x0) || !(y1 > y0) {
            return Err(Error::InvalidRegion(format!(
                "rectangle extents must be increasing: [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Self::Rect { x0, x1, y0, y1 })
    }

    /// Disk constructor with positivity check on the radius.
    pub fn disk(cx: T, cy: T, r: T) -> Result<Self> {
        if !(r > T::zero()) {
            return Err(Error::InvalidRegion(format!("disk radius must be positive: {r}")));
        }
        Ok(Self::Disk { cx, cy, r })
    }

    /// The square `[-m, m]²`, the conventional Ω₀ for the unit-square runs.
    pub fn centered_square(m: T) -> Result<Self> {
        Self::rect(-m, m, -m, m)
    }

    /// Closed membership test.
    pub fn contains(&self, x: T, y: T) -> bool {
        match *self {
            Self::Rect { x0, x1, y0, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
            Self::Disk { cx, cy, r } => {
                let (dx, dy) = (x - cx, y - cy);
                dx * dx + dy * dy <= r * r
            }
        }
    }

    /// Membership with the boundary shrunk inward by `margin`; used to pick
    /// interior unknowns so that nodes landing on the region boundary (up to
    /// rounding) are treated as boundary nodes.
    pub fn contains_strict(&self, x: T, y: T, margin: T) -> bool {
        match *self {
            Self::Rect { x0, x1, y0, y1 } => {
                x > x0 + margin && x < x1 - margin && y > y0 + margin && y < y1 - margin
            }
            Self::Disk { cx, cy, r } => {
                let (dx, dy) = (x - cx, y - cy);
                let rm = r - margin;
                rm > T::zero() && dx * dx + dy * dy < rm * rm
            }
        }
    }

    /// Axis-aligned bounding box `(x0, x1, y0, y1)`.
    pub fn bbox(&self) -> (T, T, T, T) {
        match *self {
            Self::Rect { x0, x1, y0, y1 } => (x0, x1, y0, y1),
            Self::Disk { cx, cy, r } => (cx - r, cx + r, cy - r, cy + r),
        }
    }

    /// Checks that the region closure lies strictly inside the grid rectangle
    /// with at least one grid cell of clearance (the projection solvers need
    /// a ring of exterior nodes), and that it spans at least five nodes
    /// across in each direction so an interior solve makes sense.
    pub fn validate(&self, grid: &Grid2D<T>) -> Result<()> {
        let m = grid.hx().max(grid.hy());
        let (x0, x1, y0, y1) = self.bbox();
        let inside = x0 >= grid.x_min + m
            && x1 <= grid.x_max - m
            && y0 >= grid.y_min + m
            && y1 <= grid.y_max - m;
        if !inside {
            return Err(Error::InvalidRegion(format!(
                "subdomain bbox [{x0}, {x1}] x [{y0}, {y1}] must lie at least one cell inside \
                 the grid rectangle [{}, {}] x [{}, {}]",
                grid.x_min, grid.x_max, grid.y_min, grid.y_max
            )));
        }
        let four = T::cast(4.0);
        if x1 - x0 < four * grid.hx() || y1 - y0 < four * grid.hy() {
            return Err(Error::InvalidRegion(format!(
                "subdomain bbox [{x0}, {x1}] x [{y0}, {y1}] spans fewer than five nodes \
                 across on this grid"
            )));
        }
        Ok(())
    }
}

/// One of the four edges of the grid rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

/// A fraction interval `[lo, hi] ⊆ [0, 1]` of one edge. Fractions are
/// measured from the end with the smaller coordinate: from `y_min` on the
/// vertical edges and from `x_min` on the horizontal ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaSegment<T> {
    pub edge: Edge,
    pub lo: T,
    pub hi: T,
}

impl<T> GammaSegment<T> {
    pub fn new(edge: Edge, lo: T, hi: T) -> Self {
        Self { edge, lo, hi }
    }
}

/// Observation subset Γ ⊆ ∂Ω: a nonempty union of edge segments.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSpec<T> {
    segments: Vec<GammaSegment<T>>,
}

/// How a boundary point sits relative to Γ, given an along-boundary
/// tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryClass {
    /// Inside Γ, farther than the tolerance from any endpoint of Γ.
    OnGamma,
    /// Outside the closure of Γ by more than the tolerance.
    OffGamma,
    /// Within the tolerance of an endpoint of Γ.
    NearEdge,
}

impl<T: Float> GammaSpec<T> {
    /// Builds Γ from segments, validating fractions. Overlapping or touching
    /// segments on the same edge are legal and are merged when the spec is
    /// laid out on a grid.
    pub fn new(segments: Vec<GammaSegment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidRegion("gamma must contain at least one segment".into()));
        }
        for s in &segments {
            let ok = s.lo >= T::zero() && s.hi <= T::one() && s.lo < s.hi;
            if !ok {
                return Err(Error::InvalidRegion(format!(
                    "gamma segment fractions must satisfy 0 <= lo < hi <= 1, got [{}, {}]",
                    s.lo, s.hi
                )));
            }
        }
        Ok(Self { segments })
    }

    /// The whole boundary.
    pub fn full_boundary() -> Self {
        let seg = |edge| GammaSegment { edge, lo: T::zero(), hi: T::one() };
        Self { segments: vec![seg(Edge::Left), seg(Edge::Right), seg(Edge::Bottom), seg(Edge::Top)] }
    }

    /// The segments as given (not merged).
    pub fn segments(&self) -> &[GammaSegment<T>] {
        &self.segments
    }

    /// True if every edge is completely covered.
    pub fn is_full(&self) -> bool {
        let covered = |edge| {
            // Merge this edge's fraction intervals and check they span [0,1].
            let mut iv: Vec<(T, T)> = self
                .segments
                .iter()
                .filter(|s| s.edge == edge)
                .map(|s| (s.lo, s.hi))
                .collect();
            iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut reach = T::zero();
            for (lo, hi) in iv {
                if lo > reach + T::cast(1e-12) {
                    return false;
                }
                reach = reach.max(hi);
            }
            reach >= T::one() - T::cast(1e-12)
        };
        covered(Edge::Left) && covered(Edge::Right) && covered(Edge::Bottom) && covered(Edge::Top)
    }

    /// Lays the spec out on a grid's boundary rectangle, producing merged
    /// arc-length intervals for geometric queries.
    pub fn arcs(&self, grid: &Grid2D<T>) -> GammaArcs<T> {
        GammaArcs::new(self, grid)
    }

    /// Boundary nodes belonging to Γ, in deterministic row-major scan order.
    /// Endpoint nodes are included (where Dirichlet and Neumann regions meet,
    /// the shared node is treated as Dirichlet).
    pub fn boundary_nodes(&self, grid: &Grid2D<T>) -> Vec<(usize, usize)> {
        let arcs = self.arcs(grid);
        let tol = T::cast(1e-9) * arcs.perimeter;
        grid.boundary_nodes()
            .into_iter()
            .filter(|&(i, j)| {
                let (x, y) = grid.pos(i, j);
                let s = arcs.arc_of_point(x, y);
                arcs.contains(s, tol)
            })
            .collect()
    }
}

/// Γ laid out on a concrete boundary rectangle: merged intervals in
/// counterclockwise arc length starting at the lower-left corner.
#[derive(Clone, Debug)]
pub struct GammaArcs<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
    pub perimeter: T,
    /// Disjoint intervals `[a, b]` with `0 <= a < b <= perimeter`, sorted.
    /// An interval pair touching across the `perimeter / 0` seam is merged by
    /// the circular queries rather than by splitting intervals.
    intervals: Vec<(T, T)>,
    full: bool,
}

impl<T: Float> GammaArcs<T> {
    fn new(gamma: &GammaSpec<T>, grid: &Grid2D<T>) -> Self {
        let (x_min, x_max, y_min, y_max) = (grid.x_min, grid.x_max, grid.y_min, grid.y_max);
        let w = x_max - x_min;
        let h = y_max - y_min;
        let p = T::cast(2.0) * (w + h);

        // Counterclockwise from (x_min, y_min): bottom, right, top, left.
        let mut iv: Vec<(T, T)> = Vec::new();
        for s in gamma.segments() {
            let (a, b) = match s.edge {
                Edge::Bottom => (s.lo * w, s.hi * w),
                Edge::Right => (w + s.lo * h, w + s.hi * h),
                // Top runs x_max -> x_min in arc direction; fractions are
                // measured from x_min, so the interval flips.
                Edge::Top => (w + h + (T::one() - s.hi) * w, w + h + (T::one() - s.lo) * w),
                // Left runs y_max -> y_min; fractions from y_min flip too.
                Edge::Left => {
                    (w + h + w + (T::one() - s.hi) * h, w + h + w + (T::one() - s.lo) * h)
                }
            };
            iv.push((a, b));
        }
        iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // Merge overlapping or touching intervals.
        let tol = T::cast(1e-12) * p;
        let mut merged: Vec<(T, T)> = Vec::with_capacity(iv.len());
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a <= last.1 + tol => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        let full = gamma.is_full();
        Self { x_min, x_max, y_min, y_max, perimeter: p, intervals: merged, full }
    }

    /// Arc-length coordinate of a point on (or near) the boundary: the point
    /// is projected onto the nearest edge first.
    pub fn arc_of_point(&self, x: T, y: T) -> T {
        let w = self.x_max - self.x_min;
        let h = self.y_max - self.y_min;
        let d_bottom = (y - self.y_min).abs();
        let d_right = (x - self.x_max).abs();
        let d_top = (y - self.y_max).abs();
        let d_left = (x - self.x_min).abs();
        let m = d_bottom.min(d_right).min(d_top).min(d_left);
        let cx = x.max(self.x_min).min(self.x_max);
        let cy = y.max(self.y_min).min(self.y_max);
        if m == d_bottom {
            cx - self.x_min
        } else if m == d_right {
            w + (cy - self.y_min)
        } else if m == d_top {
            w + h + (self.x_max - cx)
        } else {
            w + h + w + (self.y_max - cy)
        }
    }

    /// Circular distance between two arc coordinates.
    fn circ_dist(&self, a: T, b: T) -> T {
        let d = (a - b).abs();
        d.min(self.perimeter - d)
    }

    /// Whether `s` lies in Γ (closure, within `tol` along the boundary).
    pub fn contains(&self, s: T, tol: T) -> bool {
        if self.full {
            return true;
        }
        self.intervals.iter().any(|&(a, b)| {
            (s >= a - tol && s <= b + tol)
                || self.circ_dist(s, a) <= tol
                || self.circ_dist(s, b) <= tol
        })
    }

    /// Circular distance from `s` to the endpoint set of Γ. Infinite when Γ
    /// is the full boundary (no endpoints). Interval endpoints that meet a
    /// neighboring interval across the `0`/`perimeter` seam are not true
    /// endpoints of Γ and are skipped.
    pub fn dist_to_endpoints(&self, s: T) -> T {
        if self.full {
            return T::infinity();
        }
        let tol = T::cast(1e-12) * self.perimeter;
        let n = self.intervals.len();
        let first = self.intervals[0];
        let last = self.intervals[n - 1];
        // Does the interval family wrap around the seam?
        let wraps = first.0 <= tol && last.1 >= self.perimeter - tol;
        let mut best = T::infinity();
        for (k, &(a, b)) in self.intervals.iter().enumerate() {
            let a_is_seam = wraps && k == 0 && a <= tol;
            let b_is_seam = wraps && k == n - 1 && b >= self.perimeter - tol;
            if !a_is_seam {
                best = best.min(self.circ_dist(s, a));
            }
            if !b_is_seam {
                best = best.min(self.circ_dist(s, b));
            }
        }
        best
    }

    /// Classifies a boundary point with an along-boundary tolerance.
    pub fn classify(&self, x: T, y: T, tol: T) -> BoundaryClass {
        let s = self.arc_of_point(x, y);
        if self.dist_to_endpoints(s) <= tol {
            BoundaryClass::NearEdge
        } else if self.contains(s, T::zero()) {
            BoundaryClass::OnGamma
        } else {
            BoundaryClass::OffGamma
        }
    }
}
