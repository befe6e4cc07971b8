//! The four subcommands. Each takes a resolved [`ExperimentConfig`], writes
//! its files under `cfg.out`, and prints one summary line to stdout; all
//! diagnostics go to stderr. Outputs are deterministic: rerunning a command
//! with the same configuration reproduces every file byte for byte.

use std::error::Error;
use std::fs;
use std::path::PathBuf;

use wavetomo::ray::{classify_visibility, domain_time, uniqueness_time};
use wavetomo::series::reconstruct;
use wavetomo::wave::{cfl_dt, lambda_forward, TimeAxis};
use wavetomo::{io, phantom, Field, Grid, Real, Trace};

use crate::config::ExperimentConfig;

pub type CmdResult = Result<(), Box<dyn Error>>;

/// Peak magnitude a field may keep outside Ω₀ (relative to its maximum)
/// before the clip is considered lossy and reported.
const SUPPORT_TOL: Real = 1e-12;

/// Sample count of the advisory visibility check run before a partial-data
/// reconstruction. Deliberately small: it is a warning, not the census.
const ADVISORY_SAMPLES: usize = 256;

pub fn cmd_phantom(cfg: &ExperimentConfig) -> CmdResult {
    let grid = cfg.grid2d()?;
    let f = render_phantom(cfg, grid)?;
    fs::create_dir_all(&cfg.out)?;
    let field_path = cfg.out.join("phantom.f64");
    io::save_field(&f, &field_path)?;
    let mut files = vec![field_path];
    if cfg.images {
        let pgm = cfg.out.join("phantom.pgm");
        io::save_pgm(&f, &pgm)?;
        files.push(pgm);
    }
    println!(
        "phantom: kind={} grid={} wrote {}",
        cfg.kind.canonical(),
        cfg.grid,
        join_paths(&files)
    );
    Ok(())
}

pub fn cmd_forward(cfg: &ExperimentConfig) -> CmdResult {
    let grid = cfg.grid2d()?;
    let c = cfg.speed_field(grid)?;
    let f = match &cfg.field_in {
        Some(path) => {
            let mut f: Field =
                io::load_field(path).map_err(|e| format!("field {}: {e}", path.display()))?;
            if *f.grid() != grid {
                return Err(format!(
                    "field {} lives on a {}-point grid; set grid={} to match",
                    path.display(),
                    f.grid().nx,
                    f.grid().nx
                )
                .into());
            }
            clip_to_omega0(cfg, &mut f);
            f
        }
        None => render_phantom(cfg, grid)?,
    };
    let time = cfl_dt(&grid, &c, cfg.cfl, cfg.t_final)?;
    let trace = lambda_forward(&f, &c, &cfg.gamma, time)?;
    fs::create_dir_all(&cfg.out)?;
    let trace_path = cfg.out.join("trace.dat");
    io::save_trace(&trace, &trace_path)?;
    let meta_path = cfg.out.join("trace.meta");
    fs::write(&meta_path, trace_meta(cfg, &time, &trace))?;
    println!(
        "forward: kind={} gamma={} t_final={:?} n_steps={} n_nodes={} wrote {}",
        cfg.kind.canonical(),
        cfg.gamma_canonical(),
        cfg.t_final,
        time.n_steps,
        trace.n_nodes(),
        join_paths(&[trace_path, meta_path])
    );
    Ok(())
}

pub fn cmd_reconstruct(cfg: &ExperimentConfig) -> CmdResult {
    let grid = cfg.grid2d()?;
    let c = cfg.speed_field(grid)?;
    let rcfg = cfg.reconstruction(c.clone())?;
    let truth = render_phantom(cfg, grid)?;
    let trace = match &cfg.trace_in {
        Some(path) => io::load_trace(path, &grid, &cfg.gamma)
            .map_err(|e| format!("trace {}: {e}", path.display()))?,
        None => lambda_forward(&truth, &c, &cfg.gamma, rcfg.time_axis()?)?,
    };

    if !cfg.gamma.is_full() {
        advisory_visibility_check(cfg)?;
    }

    let (result, log) = reconstruct(&trace, &rcfg, Some(&truth))?;
    if log.diverging() {
        eprintln!(
            "warning: the energy-norm error ratio exceeded 1.5 on three consecutive \
             iterations; the run finished but looks divergent"
        );
    }

    fs::create_dir_all(&cfg.out)?;
    let result_path = cfg.out.join("reconstruction.f64");
    io::save_field(&result, &result_path)?;
    let csv_path = cfg.out.join("convergence.csv");
    io::save_convergence_csv(&log, &csv_path)?;
    let mut files = vec![result_path, csv_path];
    if cfg.images {
        let pgm = cfg.out.join("reconstruction.pgm");
        io::save_pgm(&result, &pgm)?;
        let diff_pgm = cfg.out.join("difference.pgm");
        io::save_pgm(&result.diff(&truth)?, &diff_pgm)?;
        files.push(pgm);
        files.push(diff_pgm);
    }

    let last = log.rows().last().expect("n_terms >= 1 guarantees at least one row");
    println!(
        "reconstruct: n_terms={} gamma={} weight={} rel_l2={:.4}% rel_linf={:.4}% diverging={} wrote {}",
        cfg.n_terms,
        cfg.gamma_canonical(),
        cfg.weight.canonical(),
        last.rel_l2 * 100.0,
        last.rel_linf * 100.0,
        log.diverging(),
        join_paths(&files)
    );
    Ok(())
}

pub fn cmd_rays(cfg: &ExperimentConfig) -> CmdResult {
    let grid = cfg.grid2d()?;
    let model = cfg.speed_model()?;
    let report =
        classify_visibility(&grid, &cfg.omega0, &cfg.gamma, &model, cfg.t_final, cfg.ray_samples)?;
    let t0 = uniqueness_time(&grid, &cfg.omega0, &cfg.gamma, &model)?;
    let chords = domain_time(&grid, &model, cfg.ray_samples)?;

    fs::create_dir_all(&cfg.out)?;
    let csv_path = cfg.out.join("visibility.csv");
    io::save_visibility_csv(&report, &csv_path)?;

    print!("{}", io::visibility_summary(&report));
    println!(
        "rays: verdict={} t0={:.6} t_domain={:.6} trapped={} min_p={:.6} degenerate={} samples={} wrote {}",
        if report.stable { "stable" } else { "unstable" },
        t0,
        chords.time,
        chords.trapped,
        report.min_p_visible,
        report.borderline,
        report.samples.len(),
        csv_path.display()
    );
    Ok(())
}

/// Renders the configured phantom and clips it to Ω₀ (reporting if the clip
/// actually removed anything — reconstructions assume the support fits).
fn render_phantom(cfg: &ExperimentConfig, grid: Grid) -> Result<Field, Box<dyn Error>> {
    let mut f = phantom::render(&cfg.kind.to_kind(), grid, cfg.supersample, 1.0, None)?;
    clip_to_omega0(cfg, &mut f);
    Ok(f)
}

fn clip_to_omega0(cfg: &ExperimentConfig, f: &mut Field) {
    let grid = *f.grid();
    let peak = f.abs_max();
    let mut spill: Real = 0.0;
    let values = f.values_mut();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if !cfg.omega0.contains(grid.x(i), grid.y(j)) {
                let v = &mut values[j * grid.nx + i];
                spill = spill.max(v.abs());
                *v = 0.0;
            }
        }
    }
    if spill > SUPPORT_TOL * peak {
        eprintln!(
            "warning: support leaks outside omega0={} (peak {spill:.3e} clipped to zero)",
            cfg.omega0_canonical()
        );
    }
}

/// Quick ray census before a partial-data run; invisible directions mean the
/// contraction argument fails and the series may stagnate.
fn advisory_visibility_check(cfg: &ExperimentConfig) -> Result<(), Box<dyn Error>> {
    let grid = cfg.grid2d()?;
    let model = cfg.speed_model()?;
    let report = classify_visibility(
        &grid,
        &cfg.omega0,
        &cfg.gamma,
        &model,
        cfg.t_final,
        ADVISORY_SAMPLES,
    )?;
    if report.invisible > 0 {
        eprintln!(
            "warning: {} of {} sampled directions never reach gamma={} within t_final={:?}; \
             expect stagnating errors (visibility condition violated)",
            report.invisible,
            ADVISORY_SAMPLES,
            cfg.gamma_canonical(),
            cfg.t_final
        );
    }
    Ok(())
}

fn trace_meta(cfg: &ExperimentConfig, time: &TimeAxis<Real>, trace: &Trace) -> String {
    format!(
        "# boundary trace description\n\
         grid = {}\n\
         kind = {}\n\
         speed = {}\n\
         gamma = {}\n\
         omega0 = {}\n\
         t_final = {:?}\n\
         cfl = {:?}\n\
         dt = {:?}\n\
         n_steps = {}\n\
         n_nodes = {}\n\
         seed = {}\n",
        cfg.grid,
        cfg.kind.canonical(),
        cfg.speed.canonical(),
        cfg.gamma_canonical(),
        cfg.omega0_canonical(),
        cfg.t_final,
        cfg.cfl,
        time.dt,
        time.n_steps,
        trace.n_nodes(),
        cfg.seed
    )
}

fn join_paths(paths: &[PathBuf]) -> String {
    paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" ")
}
