//! The acceptance gate: nine numbered criteria covering the whole toolkit,
//! from solver conservation laws up to production-scale reconstructions.
//!
//! Each criterion prints one `PASS`/`FAIL` line with its measured numbers
//! (run with `-- --nocapture` to see them on success); the test fails if any
//! criterion does. Every tolerance is pinned in the constants below.

use std::f64::consts::SQRT_2;
use std::panic::catch_unwind;
use std::time::Instant;

use wavetomo::elliptic::{
    harmonic_extension, project_onto_subdomain, project_onto_zero_boundary,
};
use wavetomo::grid::{energy, inner_hd, norm_hd, ScalarField};
use wavetomo::phantom;
use wavetomo::ray::{
    classify_visibility, domain_time, symbol_kappa, uniqueness_time, RayTracer,
};
use wavetomo::region::{Edge, GammaSegment, GammaSpec, SubdomainSpec};
use wavetomo::reversal::AveragingWeight;
use wavetomo::series::{reconstruct, ConvergenceLog, ReconstructionConfig, Variant};
use wavetomo::speed::SpeedModel;
use wavetomo::wave::{cfl_dt, continue_leapfrog, lambda_forward, propagate, BoundaryCondition, WaveState};
use wavetomo::{Field, Grid, Real};

// ---------------------------------------------------------------------------
// Pinned acceptance tolerances.
// ---------------------------------------------------------------------------

/// Relative L² bar for the ten-term full-data series on the production grid.
const FULL_DATA_L2_BAR_501: Real = 0.010;
/// …and for the desk-scale proxy of the same run.
const FULL_DATA_L2_BAR_201: Real = 0.030;
/// Partial-data bars at 201²: constant speed, variable speed, and the
/// two-sided band expected when the window shrinks to T = 3.
const PARTIAL_L2_BAR_CONSTANT: Real = 0.030;
const PARTIAL_L2_BAR_VARIABLE: Real = 0.050;
const PARTIAL_SHORT_WINDOW_BAND: (Real, Real) = (0.030, 0.080);
/// Sharp single-pass failure signature at T = 0.9·2√2: the image range
/// roughly doubles and the error blows past this floor.
const SHARP_RANGE_RATIO_BAND: (Real, Real) = (1.5, 2.5);
const SHARP_L2_FLOOR: Real = 0.30;
/// Energy drift over T = 5 at CFL 0.5, and exact scheme reversibility.
const ENERGY_DRIFT_BAR: Real = 5e-3;
const REVERSAL_BAR: Real = 1e-10;
/// Relative bar for the projection identities (Pythagoras, idempotence,
/// self-adjointness) at solver tolerance 1e-12.
const PROJECTION_IDENTITY_BAR: Real = 1e-6;
const ELLIPTIC_CG_TOL: Real = 1e-12;
/// Admissible grid-refinement slope band for the O(h²) harmonic extension.
const EXTENSION_SLOPE_BAND: (Real, Real) = (1.7, 2.3);
/// Symbol oracle: exact hand values, the telescoping weight sum, and how
/// many quasi-random rays the census draws.
const SYMBOL_EXACT_BAR: Real = 1e-6;
const SYMBOL_SUM_BAR: Real = 1e-8;
const SYMBOL_RAY_COUNT: usize = 10_000;
/// Travel-time scales: longest chord within 1%, center distance within one
/// grid cell.
const DOMAIN_TIME_REL_BAR: Real = 0.01;

/// The observation window of the production experiments.
const T_MAIN: Real = 5.0;
/// The deliberately short window of the failure demonstrations.
const T_SHORT: Real = 0.9 * 2.0 * SQRT_2;

// ---------------------------------------------------------------------------
// Harness.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Result<String, String>); 9] = [
        ("full-data series accuracy", full_data_series_accuracy),
        ("partial-data series accuracy", partial_data_series_accuracy),
        ("sharp single-pass failure signature", sharp_single_pass_failure),
        ("series contraction in the energy norm", series_contraction),
        ("solver energy conservation and reversibility", solver_conservation),
        ("projection and extension identities", projection_identities),
        ("ray symbol oracle", ray_symbol_oracle),
        ("stability classifier and time scales", stability_classifier),
        ("averaged beats sharp in one pass", averaged_beats_sharp),
    ];

    let mut failures = Vec::new();
    for (number, (name, criterion)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(criterion).unwrap_or_else(|payload| {
            let reason = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panicked: {reason}"))
        });
        let elapsed = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => eprintln!("PASS {:>2}  {name}: {detail}  [{elapsed:.1}s]", number + 1),
            Err(detail) => {
                eprintln!("FAIL {:>2}  {name}: {detail}  [{elapsed:.1}s]", number + 1);
                failures.push(format!("criterion {} ({name}): {detail}", number + 1));
            }
        }
    }
    assert!(failures.is_empty(), "acceptance failures:\n{}", failures.join("\n"));
}

// ---------------------------------------------------------------------------
// Shared setup.
// ---------------------------------------------------------------------------

fn omega0() -> SubdomainSpec<Real> {
    SubdomainSpec::centered_square(0.9).unwrap()
}

fn lower_left_gamma() -> GammaSpec<Real> {
    GammaSpec::new(vec![
        GammaSegment::new(Edge::Left, 0.0, 1.0),
        GammaSegment::new(Edge::Bottom, 0.0, 1.0),
        GammaSegment::new(Edge::Right, 0.0, 0.2),
        GammaSegment::new(Edge::Top, 0.0, 0.2),
    ])
    .unwrap()
}

fn unit_speed(grid: Grid) -> Field {
    Field::constant(grid, 1.0)
}

fn variable_speed(grid: Grid) -> Field {
    SpeedModel::sin_cos().to_field(&grid).unwrap()
}

fn render(kind: &str, grid: Grid) -> Field {
    match kind {
        "shepp_logan" => phantom::shepp_logan(grid, 4).unwrap(),
        "disks" => phantom::disks(grid, 4).unwrap(),
        other => panic!("no phantom named {other}"),
    }
}

/// Synthesizes data for `truth` and runs the series with the given weight.
fn run_series(
    truth: &Field,
    c: &Field,
    gamma: &GammaSpec<Real>,
    weight: AveragingWeight<Real>,
    n_terms: usize,
) -> (Field, ConvergenceLog<Real>) {
    let mut cfg = ReconstructionConfig::new(c.clone(), weight, omega0());
    cfg.n_terms = n_terms;
    if !gamma.is_full() {
        cfg.variant = Variant::Partial(gamma.clone());
    }
    let trace = lambda_forward(truth, c, gamma, cfg.time_axis().unwrap()).unwrap();
    reconstruct(&trace, &cfg, Some(truth)).unwrap()
}

fn final_l2(log: &ConvergenceLog<Real>) -> Real {
    log.rows().last().unwrap().rel_l2
}

fn value_range(f: &Field) -> Real {
    let (mut lo, mut hi) = (Real::INFINITY, Real::NEG_INFINITY);
    for &v in f.values() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

/// Van der Corput radical inverse, the quasi-uniform driver of the ray draws.
fn halton(mut k: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut scale, mut value) = (inv, 0.0);
    while k > 0 {
        value += (k % base) as f64 * scale;
        k /= base;
        scale *= inv;
    }
    value
}

// ---------------------------------------------------------------------------
// 1. Ten-term full-data series: production accuracy and a desk-scale proxy.
// ---------------------------------------------------------------------------

fn full_data_series_accuracy() -> Result<String, String> {
    let gamma = GammaSpec::full_boundary();
    let mut details = Vec::new();
    let mut bad = Vec::new();
    for (n, bar) in [(501usize, FULL_DATA_L2_BAR_501), (201, FULL_DATA_L2_BAR_201)] {
        let grid = Grid::square(n).unwrap();
        let c = variable_speed(grid);
        for kind in ["shepp_logan", "disks"] {
            let truth = render(kind, grid);
            let w = AveragingWeight::uniform(T_MAIN).unwrap();
            let (_, log) = run_series(&truth, &c, &gamma, w, 10);
            let err = final_l2(&log);
            details.push(format!("{kind}/{n}² {:.3}%", err * 100.0));
            if !(err <= bar) {
                bad.push(format!(
                    "{kind} at {n}²: rel L² {:.3}% exceeds {:.1}%",
                    err * 100.0,
                    bar * 100.0
                ));
            }
        }
    }
    summarize(details, bad)
}

// ---------------------------------------------------------------------------
// 2. Ten-term partial-data series on the lower-left observation geometry.
// ---------------------------------------------------------------------------

fn partial_data_series_accuracy() -> Result<String, String> {
    let grid = Grid::square(201).unwrap();
    let gamma = lower_left_gamma();
    let truth = render("shepp_logan", grid);
    let mut details = Vec::new();
    let mut bad = Vec::new();

    let runs: [(&str, Field, Real); 3] = [
        ("constant c, T=5", unit_speed(grid), T_MAIN),
        ("variable c, T=5", variable_speed(grid), T_MAIN),
        ("variable c, T=3", variable_speed(grid), 3.0),
    ];
    let mut errors = Vec::new();
    for (label, c, t) in runs {
        let w = AveragingWeight::uniform(t).unwrap();
        let (_, log) = run_series(&truth, &c, &gamma, w, 10);
        let err = final_l2(&log);
        details.push(format!("{label}: {:.3}%", err * 100.0));
        errors.push(err);
    }
    if !(errors[0] <= PARTIAL_L2_BAR_CONSTANT) {
        bad.push(format!(
            "constant-speed error {:.3}% exceeds {:.1}%",
            errors[0] * 100.0,
            PARTIAL_L2_BAR_CONSTANT * 100.0
        ));
    }
    if !(errors[1] <= PARTIAL_L2_BAR_VARIABLE) {
        bad.push(format!(
            "variable-speed error {:.3}% exceeds {:.1}%",
            errors[1] * 100.0,
            PARTIAL_L2_BAR_VARIABLE * 100.0
        ));
    }
    let (lo, hi) = PARTIAL_SHORT_WINDOW_BAND;
    if !(errors[2] >= lo && errors[2] <= hi) {
        bad.push(format!(
            "short-window error {:.3}% outside [{:.0}%, {:.0}%]",
            errors[2] * 100.0,
            lo * 100.0,
            hi * 100.0
        ));
    }
    summarize(details, bad)
}

// ---------------------------------------------------------------------------
// 3. One sharp pass with the window at 90% of the diagonal crossing time:
//    the image range roughly doubles and the error explodes.
// ---------------------------------------------------------------------------

fn sharp_single_pass_failure() -> Result<String, String> {
    let grid = Grid::square(201).unwrap();
    let c = unit_speed(grid);
    let truth = render("disks", grid);
    let w = AveragingWeight::sharp(T_SHORT).unwrap();
    let (result, log) = run_series(&truth, &c, &GammaSpec::full_boundary(), w, 1);

    let ratio = value_range(&result) / value_range(&truth);
    let err = final_l2(&log);
    let mut bad = Vec::new();
    let (lo, hi) = SHARP_RANGE_RATIO_BAND;
    if !(ratio >= lo && ratio <= hi) {
        bad.push(format!("range ratio {ratio:.2} outside [{lo}, {hi}]"));
    }
    if !(err > SHARP_L2_FLOOR) {
        bad.push(format!(
            "rel L² {:.1}% not above the {:.0}% failure floor",
            err * 100.0,
            SHARP_L2_FLOOR * 100.0
        ));
    }
    summarize(
        vec![format!("range ratio {ratio:.2}, rel L² {:.1}%", err * 100.0)],
        bad,
    )
}

// ---------------------------------------------------------------------------
// 4. Geometric convergence: the energy-norm error contracts every iteration.
// ---------------------------------------------------------------------------

fn series_contraction() -> Result<String, String> {
    let grid = Grid::square(201).unwrap();
    let c = unit_speed(grid);
    let truth = render("disks", grid);
    let w = AveragingWeight::uniform(T_MAIN).unwrap();
    let (_, log) = run_series(&truth, &c, &GammaSpec::full_boundary(), w, 8);

    let ratios: Vec<Real> = log.rows()[1..].iter().map(|r| r.ratio).collect();
    let worst = ratios.iter().cloned().fold(Real::NEG_INFINITY, Real::max);
    let bad = if ratios.iter().all(|&r| r < 1.0) {
        Vec::new()
    } else {
        vec![format!(
            "some energy-norm ratio reached 1: {:?}",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        )]
    };
    summarize(
        vec![format!("iterations 2–8 contract, worst ratio {worst:.3}")],
        bad,
    )
}

// ---------------------------------------------------------------------------
// 5. The solver itself: energy conservation and exact reversibility.
// ---------------------------------------------------------------------------

fn solver_conservation() -> Result<String, String> {
    let grid = Grid::square(201).unwrap();
    let pulse = phantom::gaussian(grid, 0.2, -0.1, 0.15).unwrap();
    let zero = ScalarField::zeros(grid);
    let mut details = Vec::new();
    let mut bad = Vec::new();

    // Energy drift over the full window at CFL 0.5, sound-hard walls.
    let c = unit_speed(grid);
    let time = cfl_dt(&grid, &c, 0.5, T_MAIN).unwrap();
    let e0 = energy(&pulse, &zero, &c).unwrap();
    let (state, _) = propagate(&pulse, &zero, BoundaryCondition::NeumannAll, &c, time, None).unwrap();
    let e1 = energy(&state.u, &state.velocity(&c).unwrap(), &c).unwrap();
    let drift = ((e1 - e0) / e0).abs();
    details.push(format!("energy drift {drift:.2e}"));
    if !(drift < ENERGY_DRIFT_BAR) {
        bad.push(format!("energy drift {drift:.2e} is not below {ENERGY_DRIFT_BAR:.0e}"));
    }

    // Time symmetry: swap (u, u_prev) and walk back to the start.
    let cv = variable_speed(grid);
    let time = cfl_dt(&grid, &cv, 0.5, T_MAIN).unwrap();
    let (fwd, _) = propagate(&pulse, &zero, BoundaryCondition::NeumannAll, &cv, time, None).unwrap();
    let swapped = WaveState { u: fwd.u_prev.clone(), u_prev: fwd.u.clone(), t: fwd.t - fwd.dt, dt: fwd.dt };
    let back = continue_leapfrog(&swapped, BoundaryCondition::NeumannAll, &cv, time.n_steps - 1).unwrap();
    let reversal = back.u.diff(&pulse).unwrap().abs_max();
    details.push(format!("reversal residue {reversal:.2e}"));
    if !(reversal < REVERSAL_BAR) {
        bad.push(format!("reversal residue {reversal:.2e} is not below {REVERSAL_BAR:.0e}"));
    }
    summarize(details, bad)
}

// ---------------------------------------------------------------------------
// 6. The elliptic toolbox: projection identities and extension order.
// ---------------------------------------------------------------------------

fn projection_identities() -> Result<String, String> {
    let grid = Grid::square(101).unwrap();
    let f = ScalarField::from_fn(grid, |x: Real, y: Real| {
        (-(x - 0.2).powi(2) - (y + 0.15).powi(2)).exp() + 0.3 * x - 0.1 * y * y
    });
    let g = ScalarField::from_fn(grid, |x: Real, y: Real| (x * 1.7).sin() * (y * 2.3).cos());
    let mut details = Vec::new();
    let mut bad = Vec::new();

    // Pythagoras for the subdomain projection Π.
    let pf = project_onto_subdomain(&f, &omega0(), ELLIPTIC_CG_TOL).unwrap();
    let qf = f.diff(&pf).unwrap();
    let total = norm_hd(&f).powi(2);
    let split = norm_hd(&pf).powi(2) + norm_hd(&qf).powi(2);
    let pythagoras = ((total - split) / total).abs();
    details.push(format!("Pythagoras defect {pythagoras:.2e}"));
    if !(pythagoras < PROJECTION_IDENTITY_BAR) {
        bad.push(format!("Pythagoras defect {pythagoras:.2e} above {PROJECTION_IDENTITY_BAR:.0e}"));
    }

    // Idempotence and self-adjointness of the zero-trace projection Π₀.
    let p1 = project_onto_zero_boundary(&f, ELLIPTIC_CG_TOL).unwrap();
    let p2 = project_onto_zero_boundary(&p1, ELLIPTIC_CG_TOL).unwrap();
    let idem = p2.diff(&p1).unwrap().abs_max() / p1.abs_max();
    details.push(format!("idempotence defect {idem:.2e}"));
    if !(idem < PROJECTION_IDENTITY_BAR) {
        bad.push(format!("idempotence defect {idem:.2e} above {PROJECTION_IDENTITY_BAR:.0e}"));
    }
    let pg = project_onto_zero_boundary(&g, ELLIPTIC_CG_TOL).unwrap();
    let lhs = inner_hd(&p1, &g).unwrap();
    let rhs = inner_hd(&f, &pg).unwrap();
    let adj = (lhs - rhs).abs() / (norm_hd(&f) * norm_hd(&g));
    details.push(format!("self-adjointness defect {adj:.2e}"));
    if !(adj < PROJECTION_IDENTITY_BAR) {
        bad.push(format!("self-adjointness defect {adj:.2e} above {PROJECTION_IDENTITY_BAR:.0e}"));
    }

    // Second-order convergence of the harmonic extension, probed with a
    // harmonic quartic whose discrete Laplacian defect is a clean O(h²).
    let quartic = |x: Real, y: Real| x.powi(4) - 6.0 * x * x * y * y + y.powi(4);
    let mut errs = Vec::new();
    for n in [101usize, 201, 401] {
        let gn = Grid::square(n).unwrap();
        let exact = ScalarField::from_fn(gn, quartic);
        let ext = harmonic_extension(&exact, ELLIPTIC_CG_TOL).unwrap();
        errs.push(ext.diff(&exact).unwrap().abs_max());
    }
    let (lo, hi) = EXTENSION_SLOPE_BAND;
    for w in errs.windows(2) {
        let slope = (w[0] / w[1]).log2();
        details.push(format!("extension slope {slope:.2}"));
        if !(slope >= lo && slope <= hi) {
            bad.push(format!("extension slope {slope:.2} outside [{lo}, {hi}]"));
        }
    }
    summarize(details, bad)
}

// ---------------------------------------------------------------------------
// 7. The symbol along broken rays: hand oracle, weight-sum identity, and the
//    three sharp-weight levels.
// ---------------------------------------------------------------------------

fn ray_symbol_oracle() -> Result<String, String> {
    let c = SpeedModel::constant(1.0).unwrap();
    let gamma = GammaSpec::full_boundary();
    let mut details = Vec::new();
    let mut bad = Vec::new();

    // Hand value: the center ray shot upward reflects at |τ| = 1, 3, 5, …;
    // with the linear-decay weight over T = 5 that telescopes to κ = 1/5.
    let grid = Grid::square(201).unwrap();
    let tracer = RayTracer::new(&c, grid, &gamma, T_MAIN).unwrap();
    let ray = tracer.trace((0.0, 0.0), (0.0, 1.0)).unwrap();
    let w = AveragingWeight::uniform(T_MAIN).unwrap();
    let sym = symbol_kappa(&ray, &w, false, 0.0);
    details.push(format!("center ray κ={:.6}, p={:.6}", sym.kappa, sym.p));
    if !((sym.kappa - 0.2).abs() <= SYMBOL_EXACT_BAR && (sym.p - 0.8).abs() <= SYMBOL_EXACT_BAR) {
        bad.push(format!("center ray gave κ={}, p={} instead of 1/5, 4/5", sym.kappa, sym.p));
    }

    // Census: quasi-random rays must satisfy Σ l_k = 2 and |κ| < 1 exactly
    // as the telescoping predicts, whenever the ray is non-degenerate.
    let census_grid = Grid::square(101).unwrap();
    let tracer = RayTracer::new(&c, census_grid, &gamma, T_MAIN).unwrap();
    let golden = 0.618_033_988_749_894_9_f64;
    let mut degenerate = 0usize;
    let mut worst_sum = 0.0_f64;
    let mut worst_kappa = 0.0_f64;
    for k in 1..=SYMBOL_RAY_COUNT {
        let x = -0.9 + 1.8 * halton(k, 2);
        let y = -0.9 + 1.8 * halton(k, 3);
        let theta = 2.0 * std::f64::consts::PI * (k as f64 * golden).fract();
        let ray = tracer.trace((x, y), (theta.cos(), theta.sin())).unwrap();
        let sym = symbol_kappa(&ray, &w, false, 0.0);
        if sym.degenerate {
            degenerate += 1;
            continue;
        }
        worst_sum = worst_sum.max((sym.sum_l() - 2.0).abs());
        worst_kappa = worst_kappa.max(sym.kappa.abs());
    }
    let kept = SYMBOL_RAY_COUNT - degenerate;
    details.push(format!(
        "{kept}/{SYMBOL_RAY_COUNT} rays, worst |Σl−2| {worst_sum:.1e}, worst |κ| {worst_kappa:.4}"
    ));
    if worst_sum > SYMBOL_SUM_BAR {
        bad.push(format!("weight sum drifted: |Σl−2| = {worst_sum:.2e} > {SYMBOL_SUM_BAR:.0e}"));
    }
    if !(worst_kappa < 1.0) {
        bad.push(format!("found |κ| = {worst_kappa} ≥ 1"));
    }
    if kept < SYMBOL_RAY_COUNT * 9 / 10 {
        bad.push(format!("census too degenerate: kept only {kept}"));
    }

    // The sharp weight quantizes p to how many branches reflect in time:
    // 2 (both), 1 (one side), 0 (none).
    let sharp_cases: [(Real, (Real, Real), (Real, Real), Real); 3] = [
        (2.5, (0.0, 0.0), (0.0, 1.0), 2.0),
        (0.6, (-0.5, 0.0), (-1.0, 0.0), 1.0),
        (0.4, (-0.5, 0.0), (-1.0, 0.0), 0.0),
    ];
    for (t, x0, xi, expected) in sharp_cases {
        let tracer = RayTracer::new(&c, grid, &gamma, t).unwrap();
        let ray = tracer.trace(x0, xi).unwrap();
        let sharp = AveragingWeight::sharp(t).unwrap();
        let sym = symbol_kappa(&ray, &sharp, false, 1e-3);
        if (sym.p - expected).abs() > SYMBOL_EXACT_BAR {
            bad.push(format!("sharp level at T={t}: p={} instead of {expected}", sym.p));
        }
    }
    details.push("sharp p ∈ {0,1,2} hit".into());
    summarize(details, bad)
}

// ---------------------------------------------------------------------------
// 8. Stability census and the geometry's time scales.
// ---------------------------------------------------------------------------

fn stability_classifier() -> Result<String, String> {
    let grid = Grid::square(201).unwrap();
    let c = SpeedModel::constant(1.0).unwrap();
    let region = omega0();
    let mut details = Vec::new();
    let mut bad = Vec::new();

    let full = GammaSpec::full_boundary();
    let report = classify_visibility(&grid, &region, &full, &c, T_MAIN, 2000).unwrap();
    details.push(format!(
        "full boundary: {} visible / {} invisible / {} borderline",
        report.visible, report.invisible, report.borderline
    ));
    if !report.stable || report.invisible != 0 {
        bad.push("full boundary at T=5 should be stable with zero invisible samples".into());
    }

    let one_edge = GammaSpec::new(vec![GammaSegment::new(Edge::Left, 0.0, 1.0)]).unwrap();
    let report = classify_visibility(&grid, &region, &one_edge, &c, 0.5, 1000).unwrap();
    details.push(format!("single edge, T=0.5: {} invisible", report.invisible));
    if report.stable || report.invisible == 0 {
        bad.push("a single edge at T=0.5 must be flagged unstable".into());
    }

    let partial = lower_left_gamma();
    let report = classify_visibility(&grid, &region, &partial, &c, T_MAIN, 2000).unwrap();
    details.push(format!(
        "lower-left geometry: {} visible / {} invisible / {} borderline",
        report.visible, report.invisible, report.borderline
    ));
    if !report.stable {
        bad.push("the lower-left observation geometry at T=5 should be stable".into());
    }

    let chords = domain_time(&grid, &c, 200).unwrap();
    let diag = 2.0 * SQRT_2;
    details.push(format!("T(Ω) = {:.4} (expect {diag:.4})", chords.time));
    if ((chords.time - diag) / diag).abs() > DOMAIN_TIME_REL_BAR || chords.trapped != 0 {
        bad.push(format!(
            "longest chord {:.4} not within 1% of {:.4} (trapped {})",
            chords.time, diag, chords.trapped
        ));
    }

    // A small centered disk: its farthest-from-boundary point is the center
    // itself, so this measures the center's distance regardless of radius.
    let center_only = SubdomainSpec::disk(0.0, 0.0, 3.0 * grid.min_h()).unwrap();
    let t0 = uniqueness_time(&grid, &center_only, &full, &c).unwrap();
    details.push(format!("T₀(center) = {:.4}", t0));
    if (t0 - 1.0).abs() > grid.min_h() {
        bad.push(format!("center uniqueness time {t0:.4} off by more than one cell from 1"));
    }
    summarize(details, bad)
}

// ---------------------------------------------------------------------------
// 9. On the same short-window data, one averaged pass strictly beats one
//    sharp pass.
// ---------------------------------------------------------------------------

fn averaged_beats_sharp() -> Result<String, String> {
    let grid = Grid::square(201).unwrap();
    let c = unit_speed(grid);
    let truth = render("disks", grid);
    let gamma = GammaSpec::full_boundary();

    let sharp_err = {
        let w = AveragingWeight::sharp(T_SHORT).unwrap();
        final_l2(&run_series(&truth, &c, &gamma, w, 1).1)
    };
    let averaged_err = {
        let w = AveragingWeight::uniform(T_SHORT).unwrap();
        final_l2(&run_series(&truth, &c, &gamma, w, 1).1)
    };
    let detail = format!(
        "averaged {:.1}% vs sharp {:.1}%",
        averaged_err * 100.0,
        sharp_err * 100.0
    );
    if averaged_err < sharp_err {
        Ok(detail)
    } else {
        Err(format!("averaged pass is not strictly better: {detail}"))
    }
}

fn summarize(details: Vec<String>, bad: Vec<String>) -> Result<String, String> {
    if bad.is_empty() {
        Ok(details.join("; "))
    } else {
        Err(bad.join("; "))
    }
}
