//! Flat `key=value` experiment configuration.
//!
//! Every key has a built-in default; an optional `--config` file overrides
//! the defaults and `key=value` arguments on the command line override the
//! file. Files are plain text: one `key = value` per line, blank lines
//! skipped, everything after a `#` ignored.
//!
//! | key           | default      | meaning                                              |
//! |---------------|--------------|------------------------------------------------------|
//! | `grid`        | `201`        | points per axis of `[-1,1]²` (odd, ≥ 51)             |
//! | `kind`        | `disks`      | phantom: `disks`, `shepp_logan`, `gaussian[:cx:cy:σ]`|
//! | `supersample` | `4`          | resampling density for the piecewise phantoms        |
//! | `speed`       | `constant`   | `constant[:c0]`, `sincos`, `sinusoidal:mean:ax:ay`   |
//! | `gamma`       | `full`       | observed boundary: `full` or `edge:lo:hi` list       |
//! | `omega0`      | `square:0.9` | support region: `square:m`, `disk:cx:cy:r`, `rect:…` |
//! | `weight`      | `uniform`    | time weight of the reversal: `uniform` or `sharp`    |
//! | `n_terms`     | `10`         | series terms; `1` is a single reversal pass          |
//! | `t_final`     | `5`          | observation time                                     |
//! | `cfl`         | `0.9`        | time-step safety factor in `(0, 1]`                  |
//! | `cg_tol`      | `1e-8`       | elliptic solver tolerance                            |
//! | `out`         | `out`        | output directory                                     |
//! | `images`      | `true`       | write PGM previews                                   |
//! | `seed`        | `0`          | recorded sampling seed (the census is deterministic) |
//! | `ray_samples` | `2000`       | samples for the ray census and chord search          |
//! | `field`       | *(empty)*    | input field dump for `forward`; empty renders `kind` |
//! | `trace`       | *(empty)*    | input trace for `reconstruct`; empty runs inline     |

use std::fs;
use std::path::{Path, PathBuf};

use wavetomo::phantom::PhantomKind;
use wavetomo::region::{Edge, GammaSegment, GammaSpec, SubdomainSpec};
use wavetomo::reversal::AveragingWeight;
use wavetomo::series::{ReconstructionConfig, Variant};
use wavetomo::speed::SpeedModel;
use wavetomo::{Field, Grid, Real};

/// Which phantom an experiment draws (and, for reconstructions, compares
/// against).
#[derive(Clone, Debug, PartialEq)]
pub enum PhantomSpec {
    SheppLogan,
    Disks,
    Gaussian { cx: Real, cy: Real, sigma: Real },
}

impl PhantomSpec {
    fn parse(s: &str) -> Result<Self, String> {
        let mut it = s.split(':');
        match it.next().unwrap_or("") {
            "shepp_logan" => expect_done(it, "shepp_logan").map(|_| Self::SheppLogan),
            "disks" => expect_done(it, "disks").map(|_| Self::Disks),
            "gaussian" => {
                let rest: Vec<&str> = it.collect();
                match rest.len() {
                    0 => Ok(Self::Gaussian { cx: 0.0, cy: 0.0, sigma: 0.1 }),
                    3 => Ok(Self::Gaussian {
                        cx: parse_real(rest[0])?,
                        cy: parse_real(rest[1])?,
                        sigma: parse_real(rest[2])?,
                    }),
                    _ => Err("gaussian takes no parameters or `gaussian:cx:cy:sigma`".into()),
                }
            }
            other => Err(format!(
                "unknown phantom `{other}` (expected disks, shepp_logan or gaussian[:cx:cy:sigma])"
            )),
        }
    }

    pub fn canonical(&self) -> String {
        match self {
            Self::SheppLogan => "shepp_logan".into(),
            Self::Disks => "disks".into(),
            Self::Gaussian { cx, cy, sigma } => format!("gaussian:{cx:?}:{cy:?}:{sigma:?}"),
        }
    }

    pub fn to_kind(&self) -> PhantomKind<Real> {
        match *self {
            Self::SheppLogan => PhantomKind::SheppLogan,
            Self::Disks => PhantomKind::Disks,
            Self::Gaussian { cx, cy, sigma } => PhantomKind::Gaussian { cx, cy, sigma },
        }
    }
}

/// Sound-speed model of the experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum SpeedSpec {
    Constant(Real),
    /// The variable-speed benchmark `c = 1 + 0.3 sin(πx) + 0.2 cos(πy)`.
    SinCos,
    Sinusoidal { mean: Real, ax: Real, ay: Real },
}

impl SpeedSpec {
    fn parse(s: &str) -> Result<Self, String> {
        let mut it = s.split(':');
        match it.next().unwrap_or("") {
            "constant" => {
                let rest: Vec<&str> = it.collect();
                match rest.len() {
                    0 => Ok(Self::Constant(1.0)),
                    1 => Ok(Self::Constant(parse_real(rest[0])?)),
                    _ => Err("constant takes at most one parameter: `constant:c0`".into()),
                }
            }
            "sincos" => expect_done(it, "sincos").map(|_| Self::SinCos),
            "sinusoidal" => {
                let rest: Vec<&str> = it.collect();
                if rest.len() != 3 {
                    return Err("sinusoidal needs `sinusoidal:mean:ax:ay`".into());
                }
                Ok(Self::Sinusoidal {
                    mean: parse_real(rest[0])?,
                    ax: parse_real(rest[1])?,
                    ay: parse_real(rest[2])?,
                })
            }
            other => Err(format!(
                "unknown speed `{other}` (expected constant[:c0], sincos or sinusoidal:mean:ax:ay)"
            )),
        }
    }

    pub fn canonical(&self) -> String {
        match self {
            Self::Constant(c0) => format!("constant:{c0:?}"),
            Self::SinCos => "sincos".into(),
            Self::Sinusoidal { mean, ax, ay } => format!("sinusoidal:{mean:?}:{ax:?}:{ay:?}"),
        }
    }

    pub fn model(&self) -> wavetomo::Result<SpeedModel<Real>> {
        match *self {
            Self::Constant(c0) => SpeedModel::constant(c0),
            Self::SinCos => Ok(SpeedModel::sin_cos()),
            Self::Sinusoidal { mean, ax, ay } => SpeedModel::sinusoidal(mean, ax, ay),
        }
    }
}

/// Time weight of the reversal operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightSpec {
    Uniform,
    Sharp,
}

impl WeightSpec {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "sharp" => Ok(Self::Sharp),
            other => Err(format!("unknown weight `{other}` (expected uniform or sharp)")),
        }
    }

    pub fn canonical(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Sharp => "sharp",
        }
    }

    pub fn build(&self, t_final: Real) -> wavetomo::Result<AveragingWeight<Real>> {
        match self {
            Self::Uniform => AveragingWeight::uniform(t_final),
            Self::Sharp => AveragingWeight::sharp(t_final),
        }
    }
}

/// A fully resolved experiment description: built-in defaults merged with an
/// optional config file and command-line overrides, in that order.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub grid: usize,
    pub kind: PhantomSpec,
    pub supersample: usize,
    pub speed: SpeedSpec,
    pub gamma: GammaSpec<Real>,
    pub omega0: SubdomainSpec<Real>,
    pub weight: WeightSpec,
    pub n_terms: usize,
    pub t_final: Real,
    pub cfl: Real,
    pub cg_tol: Real,
    pub out: PathBuf,
    pub images: bool,
    /// Recorded with the outputs for bookkeeping. Sampling is quasi-random
    /// and deterministic, so the seed does not change any result.
    pub seed: u64,
    pub ray_samples: usize,
    pub field_in: Option<PathBuf>,
    pub trace_in: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: 201,
            kind: PhantomSpec::Disks,
            supersample: 4,
            speed: SpeedSpec::Constant(1.0),
            gamma: GammaSpec::full_boundary(),
            omega0: SubdomainSpec::centered_square(0.9).expect("valid default region"),
            weight: WeightSpec::Uniform,
            n_terms: 10,
            t_final: 5.0,
            cfl: 0.9,
            cg_tol: 1e-8,
            out: PathBuf::from("out"),
            images: true,
            seed: 0,
            ray_samples: 2000,
            field_in: None,
            trace_in: None,
        }
    }
}

impl ExperimentConfig {
    /// Defaults, then the config file (if any), then the overrides; validates
    /// the result. Every error names the offending source.
    pub fn resolve(config: Option<&Path>, overrides: &[String]) -> Result<Self, String> {
        let mut cfg = Self::default();
        if let Some(path) = config {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("config {}: {e}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| format!("config {}:{}: expected key=value", path.display(), lineno + 1))?;
                cfg.apply(key.trim(), value.trim())
                    .map_err(|e| format!("config {}:{}: {e}", path.display(), lineno + 1))?;
            }
        }
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| format!("argument `{item}` is not key=value"))?;
            cfg.apply(key.trim(), value.trim()).map_err(|e| format!("argument `{item}`: {e}"))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "grid" => self.grid = parse_int(value)?,
            "kind" => self.kind = PhantomSpec::parse(value)?,
            "supersample" => self.supersample = parse_int(value)?,
            "speed" => self.speed = SpeedSpec::parse(value)?,
            "gamma" => self.gamma = parse_gamma(value)?,
            "omega0" => self.omega0 = parse_omega0(value)?,
            "weight" => self.weight = WeightSpec::parse(value)?,
            "n_terms" => self.n_terms = parse_int(value)?,
            "t_final" => self.t_final = parse_real(value)?,
            "cfl" => self.cfl = parse_real(value)?,
            "cg_tol" => self.cg_tol = parse_real(value)?,
            "out" => self.out = PathBuf::from(value),
            "images" => self.images = parse_bool(value)?,
            "seed" => {
                self.seed = value.parse().map_err(|_| format!("`{value}` is not a seed"))?
            }
            "ray_samples" => self.ray_samples = parse_int(value)?,
            "field" => self.field_in = opt_path(value),
            "trace" => self.trace_in = opt_path(value),
            other => {
                return Err(format!(
                    "unknown key `{other}` (known keys: grid, kind, supersample, speed, gamma, \
                     omega0, weight, n_terms, t_final, cfl, cg_tol, out, images, seed, \
                     ray_samples, field, trace)"
                ))
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), String> {
        if self.grid % 2 == 0 || self.grid < 51 {
            return Err(format!(
                "grid must be odd and at least 51, got {}; pick e.g. 201",
                self.grid
            ));
        }
        if self.supersample == 0 {
            return Err("supersample must be at least 1".into());
        }
        if self.n_terms == 0 {
            return Err("n_terms must be at least 1 (1 = single reversal pass)".into());
        }
        if !(self.t_final > 0.0) {
            return Err(format!("t_final must be positive, got {}", self.t_final));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(format!(
                "cfl {} is outside (0, 1]; the explicit stepper is unstable above 1 — pick e.g. 0.9",
                self.cfl
            ));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(format!("cg_tol must lie in (0, 1), got {}", self.cg_tol));
        }
        if self.ray_samples == 0 {
            return Err("ray_samples must be at least 1".into());
        }
        Ok(())
    }

    pub fn grid2d(&self) -> wavetomo::Result<Grid> {
        Grid::square(self.grid)
    }

    pub fn speed_model(&self) -> wavetomo::Result<SpeedModel<Real>> {
        self.speed.model()
    }

    pub fn speed_field(&self, grid: Grid) -> wavetomo::Result<Field> {
        self.speed.model()?.to_field(&grid)
    }

    pub fn variant(&self) -> Variant<Real> {
        if self.gamma.is_full() {
            Variant::Full
        } else {
            Variant::Partial(self.gamma.clone())
        }
    }

    /// The reconstruction settings this experiment prescribes; `c` must live
    /// on [`Self::grid2d`].
    pub fn reconstruction(&self, c: Field) -> wavetomo::Result<ReconstructionConfig<Real>> {
        Ok(ReconstructionConfig {
            n_terms: self.n_terms,
            variant: self.variant(),
            w: self.weight.build(self.t_final)?,
            omega0: self.omega0.clone(),
            c,
            t_final: self.t_final,
            cfl: self.cfl,
            cg_tol: self.cg_tol,
        })
    }

    pub fn gamma_canonical(&self) -> String {
        if self.gamma.is_full() {
            return "full".into();
        }
        let name = |e: Edge| match e {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        };
        self.gamma
            .segments()
            .iter()
            .map(|s| format!("{}:{:?}:{:?}", name(s.edge), s.lo, s.hi))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn omega0_canonical(&self) -> String {
        match self.omega0 {
            SubdomainSpec::Rect { x0, x1, y0, y1 } if x0 == -x1 && y0 == -y1 && x1 == y1 => {
                format!("square:{x1:?}")
            }
            SubdomainSpec::Rect { x0, x1, y0, y1 } => format!("rect:{x0:?}:{x1:?}:{y0:?}:{y1:?}"),
            SubdomainSpec::Disk { cx, cy, r } => format!("disk:{cx:?}:{cy:?}:{r:?}"),
        }
    }
}

fn parse_real(s: &str) -> Result<Real, String> {
    s.parse().map_err(|_| format!("`{s}` is not a number"))
}

fn parse_int(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("`{s}` is not a positive integer"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("`{other}` is not a boolean (true/false)")),
    }
}

fn opt_path(s: &str) -> Option<PathBuf> {
    if s.is_empty() {
        None
    } else {
        Some(PathBuf::from(s))
    }
}

fn expect_done<'a>(mut it: impl Iterator<Item = &'a str>, name: &str) -> Result<(), String> {
    match it.next() {
        None => Ok(()),
        Some(_) => Err(format!("`{name}` takes no parameters")),
    }
}

fn parse_gamma(s: &str) -> Result<GammaSpec<Real>, String> {
    if s == "full" {
        return Ok(GammaSpec::full_boundary());
    }
    let mut segments = Vec::new();
    for part in s.split(',') {
        let tokens: Vec<&str> = part.split(':').collect();
        if tokens.len() != 3 {
            return Err(format!(
                "gamma segment `{part}` must be edge:lo:hi with fractions in [0, 1]"
            ));
        }
        let edge = match tokens[0] {
            "left" => Edge::Left,
            "right" => Edge::Right,
            "bottom" => Edge::Bottom,
            "top" => Edge::Top,
            other => {
                return Err(format!("unknown edge `{other}` (expected left/right/bottom/top)"))
            }
        };
        segments.push(GammaSegment::new(edge, parse_real(tokens[1])?, parse_real(tokens[2])?));
    }
    GammaSpec::new(segments).map_err(|e| e.to_string())
}

fn parse_omega0(s: &str) -> Result<SubdomainSpec<Real>, String> {
    let tokens: Vec<&str> = s.split(':').collect();
    let built = match tokens[0] {
        "square" if tokens.len() == 2 => SubdomainSpec::centered_square(parse_real(tokens[1])?),
        "disk" if tokens.len() == 4 => SubdomainSpec::disk(
            parse_real(tokens[1])?,
            parse_real(tokens[2])?,
            parse_real(tokens[3])?,
        ),
        "rect" if tokens.len() == 5 => SubdomainSpec::rect(
            parse_real(tokens[1])?,
            parse_real(tokens[2])?,
            parse_real(tokens[3])?,
            parse_real(tokens[4])?,
        ),
        _ => {
            return Err(format!(
                "unknown region `{s}` (expected square:m, disk:cx:cy:r or rect:x0:x1:y0:y1)"
            ))
        }
    };
    built.map_err(|e| e.to_string())
}
