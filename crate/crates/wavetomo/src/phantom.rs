//! Initial-pressure phantoms for reconstruction experiments.
//!
//! Discontinuous phantoms (ellipses, disks) are antialias-resampled from a
//! `supersample×` finer lattice through a narrow Gaussian window of fixed
//! physical width (see the `ANTIALIAS_STD_WIDTH` comment for why a plain
//! per-cell box average is not enough), so their edges carry no energy the
//! grid cannot represent and refinement converges to one smooth function.
//! All phantoms are supported well inside `[-0.9, 0.9]²`, so they fit the
//! default reconstruction subdomain and vanish near the domain boundary.

use crate::error::{Error, Result};
use crate::float::Float;
use crate::grid::{Grid2D, ScalarField};
use crate::region::SubdomainSpec;

/// What to draw.
#[derive(Clone, Debug, PartialEq)]
pub enum PhantomKind<T> {
    /// The classic 10-ellipse head phantom (standard intensities), scaled to
    /// fit inside `[-0.9, 0.9]²`.
    SheppLogan,
    /// White (+1) and black (−1) disks on a zero background.
    Disks,
    /// A smooth Gaussian bump.
    Gaussian { cx: T, cy: T, sigma: T },
    /// A direction-modulated pulse: a plane-wave oscillation under a
    /// Gaussian envelope. Useful for aiming energy along a single ray.
    WavePacket { cx: T, cy: T, theta: T, wavelength: T, sigma: T },
}

/// One ellipse of the head phantom: additive intensity, semi-axes, center,
/// rotation (degrees, counterclockwise).
struct Ellipse {
    value: f64,
    a: f64,
    b: f64,
    x0: f64,
    y0: f64,
    phi_deg: f64,
}

/// The standard head-phantom intensity table.
const HEAD_ELLIPSES: [Ellipse; 10] = [
    Ellipse { value: 2.0, a: 0.69, b: 0.92, x0: 0.0, y0: 0.0, phi_deg: 0.0 },
    Ellipse { value: -0.98, a: 0.6624, b: 0.874, x0: 0.0, y0: -0.0184, phi_deg: 0.0 },
    Ellipse { value: -0.02, a: 0.11, b: 0.31, x0: 0.22, y0: 0.0, phi_deg: -18.0 },
    Ellipse { value: -0.02, a: 0.16, b: 0.41, x0: -0.22, y0: 0.0, phi_deg: 18.0 },
    Ellipse { value: 0.01, a: 0.21, b: 0.25, x0: 0.0, y0: 0.35, phi_deg: 0.0 },
    Ellipse { value: 0.01, a: 0.046, b: 0.046, x0: 0.0, y0: 0.1, phi_deg: 0.0 },
    Ellipse { value: 0.01, a: 0.046, b: 0.046, x0: 0.0, y0: -0.1, phi_deg: 0.0 },
    Ellipse { value: 0.01, a: 0.046, b: 0.023, x0: -0.08, y0: -0.605, phi_deg: 0.0 },
    Ellipse { value: 0.01, a: 0.023, b: 0.023, x0: 0.0, y0: -0.606, phi_deg: 0.0 },
    Ellipse { value: 0.01, a: 0.023, b: 0.046, x0: 0.06, y0: -0.605, phi_deg: 0.0 },
];

/// The head phantom's native square is scaled by this factor to keep the
/// support inside the reconstruction subdomain.
const HEAD_SCALE: f64 = 0.9;

/// Disk layout: center, radius, value. Disjoint with generous clearances
/// (smallest gap ≈ 0.06, several times the antialias transition width, so no
/// two edge layers interact), all inside `[-0.8, 0.8]²`. One white disk sits
/// in the upper-left quadrant so reflection artifacts near that corner are
/// easy to spot in previews. Centers stay off the exact square diagonals:
/// edge normals there launch the 45°-corner rays with the slowest error
/// contraction, which would otherwise dominate every run.
const DISKS: [(f64, f64, f64, f64); 5] = [
    (-0.53, 0.48, 0.26, 1.0),
    (0.48, 0.30, 0.30, 1.0),
    (-0.08, -0.02, 0.24, 1.0),
    (0.02, 0.58, 0.18, -1.0),
    (0.40, -0.48, 0.26, -1.0),
];

fn head_value(x: f64, y: f64) -> f64 {
    // Evaluate in the phantom's native coordinates.
    let xs = x / HEAD_SCALE;
    let ys = y / HEAD_SCALE;
    let mut v = 0.0;
    for e in &HEAD_ELLIPSES {
        let (dx, dy) = (xs - e.x0, ys - e.y0);
        let phi = e.phi_deg.to_radians();
        let (s, c) = phi.sin_cos();
        let xr = c * dx + s * dy;
        let yr = -s * dx + c * dy;
        if (xr / e.a).powi(2) + (yr / e.b).powi(2) <= 1.0 {
            v += e.value;
        }
    }
    v
}

fn disks_value(x: f64, y: f64) -> f64 {
    for &(cx, cy, r, v) in &DISKS {
        let (dx, dy) = (x - cx, y - cy);
        if dx * dx + dy * dy <= r * r {
            return v;
        }
    }
    0.0
}

/// Lower bound on the resampling window, in output cells. A bare per-cell
/// box average would leave O(1) energy right at the grid's unresolvable
/// frequencies, where the second-order stencil's group velocity collapses —
/// that content can never leave the cavity within any finite window, so
/// reconstruction errors would be dominated by frozen edge jaggies instead
/// of anything the method controls.
const ANTIALIAS_STD_CELLS: f64 = 0.65;

/// Edge transition width (Gaussian std) of the piecewise phantoms, in domain
/// units. Keeping this fixed — rather than proportional to the cell size —
/// makes every grid sample the *same* smooth ground-truth function, so
/// refinement converges instead of chasing ever-sharper edges. Grids too
/// coarse to resolve this width fall back to [`ANTIALIAS_STD_CELLS`] cells.
const ANTIALIAS_STD_WIDTH: f64 = 6.5e-3;

/// Gaussian window weights along one axis with cell size `h`, truncated at
/// three stds, on the `ss×` subsample lattice.
fn window_weights(h: f64, ss: f64) -> Vec<f64> {
    let sigma = ANTIALIAS_STD_CELLS.max(ANTIALIAS_STD_WIDTH / h) * ss; // in subsample steps
    let reach = (3.0 * sigma).ceil() as i64;
    (-reach..=reach).map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp()).collect()
}

/// Windowed resampling of a pointwise function: each node takes a normalized
/// Gaussian-weighted mean of samples on the `supersample×` lattice around it.
/// Constant regions reproduce exactly; jumps become smooth transitions of
/// fixed physical width (never narrower than a fraction of a cell).
fn render_supersampled<T: Float>(
    grid: Grid2D<T>,
    supersample: usize,
    f: impl Fn(f64, f64) -> f64,
) -> Result<ScalarField<T>> {
    if supersample == 0 {
        return Err(Error::InvalidParameter("supersample must be at least 1".into()));
    }
    let ss = supersample as f64;
    let wx = window_weights(grid.hx().as_f64(), ss);
    let wy = window_weights(grid.hy().as_f64(), ss);
    // Accumulated in the same order as the sampling loop below, so constant
    // regions reproduce their value bitwise (Σ wᵢ·v / Σ wᵢ with identical
    // rounding).
    let mut total = 0.0;
    for vy in &wy {
        for vx in &wx {
            total += vx * vy;
        }
    }
    let reach_x = (wx.len() as i64 - 1) / 2;
    let reach_y = (wy.len() as i64 - 1) / 2;
    let hx = grid.hx().as_f64() / ss;
    let hy = grid.hy().as_f64() / ss;
    Ok(ScalarField::from_fn(grid, |x, y| {
        let (x, y) = (x.as_f64(), y.as_f64());
        let mut acc = 0.0;
        for (ky, vy) in (-reach_y..=reach_y).zip(&wy) {
            let sy = y + ky as f64 * hy;
            for (kx, vx) in (-reach_x..=reach_x).zip(&wx) {
                acc += vx * vy * f(x + kx as f64 * hx, sy);
            }
        }
        T::cast(acc / total)
    }))
}

/// The head phantom, antialias-resampled at `supersample×` resolution.
pub fn shepp_logan<T: Float>(grid: Grid2D<T>, supersample: usize) -> Result<ScalarField<T>> {
    render_supersampled(grid, supersample, head_value)
}

/// The disks phantom, antialias-resampled.
pub fn disks<T: Float>(grid: Grid2D<T>, supersample: usize) -> Result<ScalarField<T>> {
    render_supersampled(grid, supersample, disks_value)
}

/// A Gaussian bump `exp(−r²/2σ²)` centered at `(cx, cy)`.
pub fn gaussian<T: Float>(grid: Grid2D<T>, cx: T, cy: T, sigma: T) -> Result<ScalarField<T>> {
    if !(sigma > T::zero()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let half = T::cast(0.5);
    Ok(ScalarField::from_fn(grid, |x, y| {
        let (dx, dy) = (x - cx, y - cy);
        (-half * (dx * dx + dy * dy) / (sigma * sigma)).exp()
    }))
}

/// A plane-wave pulse `cos(2π/λ · d·(x−c)) · exp(−|x−c|²/2σ²)` traveling
/// along the unit direction at angle `theta`.
pub fn wave_packet<T: Float>(
    grid: Grid2D<T>,
    cx: T,
    cy: T,
    theta: T,
    wavelength: T,
    sigma: T,
) -> Result<ScalarField<T>> {
    if !(sigma > T::zero()) || !(wavelength > T::zero()) {
        return Err(Error::InvalidParameter(
            "wave packet needs positive sigma and wavelength".into(),
        ));
    }
    let k = T::cast(2.0 * std::f64::consts::PI) / wavelength;
    let (dx_dir, dy_dir) = (theta.cos(), theta.sin());
    let half = T::cast(0.5);
    Ok(ScalarField::from_fn(grid, |x, y| {
        let (dx, dy) = (x - cx, y - cy);
        let phase = k * (dx_dir * dx + dy_dir * dy);
        let env = (-half * (dx * dx + dy * dy) / (sigma * sigma)).exp();
        phase.cos() * env
    }))
}

/// Renders a phantom with amplitude scaling and optional hard clipping to a
/// subdomain (values outside become exactly zero).
pub fn render<T: Float>(
    kind: &PhantomKind<T>,
    grid: Grid2D<T>,
    supersample: usize,
    amplitude: T,
    clip: Option<&SubdomainSpec<T>>,
) -> Result<ScalarField<T>> {
    let mut f = match kind {
        PhantomKind::SheppLogan => shepp_logan(grid, supersample)?,
        PhantomKind::Disks => disks(grid, supersample)?,
        PhantomKind::Gaussian { cx, cy, sigma } => gaussian(grid, *cx, *cy, *sigma)?,
        PhantomKind::WavePacket { cx, cy, theta, wavelength, sigma } => {
            wave_packet(grid, *cx, *cy, *theta, *wavelength, *sigma)?
        }
    };
    if amplitude != T::one() {
        f.scale(amplitude);
    }
    if let Some(region) = clip {
        let vals = f.values_mut();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if !region.contains(grid.x(i), grid.y(j)) {
                    vals[j * grid.nx + i] = T::zero();
                }
            }
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2D<f64> {
        Grid2D::square(n).unwrap()
    }

    /// Trapezoid-weighted integral of the field (plain volume element).
    fn mass(f: &ScalarField<f64>, positive_part: bool) -> f64 {
        let g = *f.grid();
        let cell = g.hx() * g.hy();
        let mut acc = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let v = f.at(i, j);
                let v = if positive_part { v.max(0.0) } else { v };
                acc += v * g.trapezoid_weight(i, j) * cell;
            }
        }
        acc
    }

    #[test]
    fn head_phantom_center_and_exterior_values() {
        let g = grid(201);
        let f = shepp_logan(g, 4).unwrap();
        // Center: inside the two big ellipses only, 2 − 0.98.
        assert!((f.at(100, 100) - 1.02).abs() < 1e-12);
        assert!(f.at(100, 100) > 0.0);
        // (0.95, 0.95) is outside the support.
        let i = ((0.95 + 1.0) / g.hx()).round() as usize;
        assert_eq!(f.at(i, i), 0.0);
    }

    #[test]
    fn head_phantom_mass_matches_high_resolution_oracle() {
        // Render once at 1001² without supersampling; the resampled 201²
        // render must carry the same total mass within half a percent.
        let fine = shepp_logan(Grid2D::square(1001).unwrap(), 1).unwrap();
        let coarse = shepp_logan(grid(201), 4).unwrap();
        let m_fine = mass(&fine, false);
        let m_coarse = mass(&coarse, false);
        let rel = ((m_fine - m_coarse) / m_fine).abs();
        assert!(rel < 5e-3, "mass mismatch {rel} ({m_coarse} vs {m_fine})");
    }

    #[test]
    fn disks_areas_match_analytic_values() {
        let g = grid(201);
        let f = disks(g, 4).unwrap();
        let white: f64 = std::f64::consts::PI * (0.26f64.powi(2) + 0.30f64.powi(2) + 0.24f64.powi(2));
        let black: f64 = std::f64::consts::PI * (0.18f64.powi(2) + 0.26f64.powi(2));
        let pos = mass(&f, true);
        let neg = pos - mass(&f, false);
        assert!(((pos - white) / white).abs() < 1e-2, "white area {pos} vs {white}");
        assert!(((neg - black) / black).abs() < 1e-2, "black area {neg} vs {black}");
        // Interior of a white disk is exactly the max value.
        let (i, j) = (((0.0 + 1.0) / g.hx()).round() as usize, ((0.0 + 1.0) / g.hy()).round() as usize);
        assert_eq!(f.at(i, j), 1.0);
        // Far outside all disks.
        assert_eq!(f.at(5, 5), 0.0);
    }

    #[test]
    fn supersampling_converges_and_only_touches_edges() {
        let g = grid(201);
        let f4 = disks(g, 4).unwrap();
        let f8 = disks(g, 8).unwrap();
        let m4 = mass(&f4, true);
        let m8 = mass(&f8, true);
        assert!(((m4 - m8) / m8).abs() < 1.0 / 16.0, "mass moved too much");
        // Nodes far from any disk edge agree exactly.
        assert_eq!(f4.at(100, 100), f8.at(100, 100));
        assert_eq!(f4.at(5, 5), f8.at(5, 5));
    }

    #[test]
    fn phantoms_vanish_outside_clip_region() {
        let g = grid(101);
        let omega0 = SubdomainSpec::centered_square(0.9).unwrap();
        let f = render(
            &PhantomKind::Gaussian { cx: 0.0, cy: 0.0, sigma: 0.4 },
            g,
            1,
            2.0,
            Some(&omega0),
        )
        .unwrap();
        for j in 0..g.ny {
            for i in 0..g.nx {
                if !omega0.contains(g.x(i), g.y(j)) {
                    assert_eq!(f.at(i, j), 0.0);
                }
            }
        }
        // Amplitude scaling applies.
        assert!((f.at(50, 50) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wave_packet_is_centered_and_oscillates() {
        let g = grid(201);
        let f = wave_packet(g, 0.0, 0.0, 0.0, 0.2, 0.1).unwrap();
        assert!((f.at(100, 100) - 1.0).abs() < 1e-12);
        // Half a wavelength along the propagation direction flips the sign.
        let i_half = 100 + (0.1 / g.hx()).round() as usize;
        assert!(f.at(i_half, 100) < -0.5);
        // The envelope kills the far field.
        assert!(f.at(195, 100).abs() < 1e-12);
    }

    #[test]
    fn zero_supersample_is_rejected() {
        assert!(matches!(shepp_logan(grid(51), 0), Err(Error::InvalidParameter(_))));
    }
}
