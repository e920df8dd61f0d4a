//! Command line front end: experiment configuration, JSON files and reports.
//!
//! Every subcommand prints a [`Report`] to stdout. Exit codes: 0 success,
//! 1 usage, 2 validation (bad input, I/O), 3 numerical failure or a failed
//! check.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::correspond::{
    add_noise_set, estimate_tensor_with_min, sample_correspondences, tuple_residuals,
    CorrespondenceSet, DEFAULT_ESTIMATION_TOL,
};
use crate::error::{Error, Result};
use crate::reconstruct::{
    expected_jacobian_rank, pgl_equivalent, reconstruct_from_tensor_with, tensor_map_jacobian_rank,
    ReconstructOptions, ReconstructionResult, ACCEPT_RESIDUAL, DEDUP_TOL, DEFAULT_JACOBIAN_STEP,
};
use crate::report::Check;
use crate::sampling::derive_seed;
use crate::scene::{random_config, validate_genericity, CameraConfig};
use crate::tensor::{compute_tensor, enumerate_b_interior, GrassmannTensor, Profile};
use crate::twist::{
    dual_config, sample_contracted_points, vanishing_system, verify_same_hypersurface, CremonaMap,
    DualConfig, CONTRACTION_TOL, CREMONA_TOL, HYPERSURFACE_TOL,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Caps the worker pool when set to a positive integer.
pub const THREADS_ENV: &str = "GTENSOR_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub estimation: f64,
    pub nullity: f64,
    pub reconstruction: f64,
    pub pgl: f64,
    pub hypersurface: f64,
    pub cremona: f64,
    pub contraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            estimation: 1e-8,
            nullity: DEFAULT_ESTIMATION_TOL,
            reconstruction: ACCEPT_RESIDUAL,
            pgl: DEDUP_TOL,
            hypersurface: HYPERSURFACE_TOL,
            cremona: CREMONA_TOL,
            contraction: CONTRACTION_TOL,
        }
    }
}

/// Settings for `generate` and `pipeline`. Missing fields take defaults;
/// command line flags override file values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: Vec<usize>,
    /// Defaults to the lexicographically last profile of B°(m).
    pub alpha: Option<Vec<usize>>,
    pub seed: Option<u64>,
    /// Defaults to `D - 1`.
    pub correspondences: Option<usize>,
    pub restarts: usize,
    pub samples: usize,
    pub noise_sigma: f64,
    pub tolerances: Tolerances,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 3,
            m: vec![2, 2, 2],
            alpha: None,
            seed: None,
            correspondences: None,
            restarts: 50,
            samples: 100,
            noise_sigma: 0.0,
            tolerances: Tolerances::default(),
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Fill defaults and validate. Returns the profile and the seed.
    pub fn resolve(&mut self) -> Result<(Profile, u64)> {
        let seed = self
            .seed
            .ok_or_else(|| Error::Input("a seed is required".into()))?;
        if self.m.is_empty() {
            return Err(Error::Input("m must list at least one camera".into()));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::Input(format!(
                "noise_sigma must be finite and non-negative, got {}",
                self.noise_sigma
            )));
        }
        if self.restarts == 0 || self.samples == 0 {
            return Err(Error::Input("restarts and samples must be positive".into()));
        }
        let profile = resolve_profile(self.n, &self.m, self.alpha.as_deref())?;
        self.alpha = Some(profile.alpha().to_vec());
        let count = self
            .correspondences
            .unwrap_or_else(|| profile.size().saturating_sub(1).max(1));
        self.correspondences = Some(count);
        Ok((profile, seed))
    }
}

/// `alpha` as a profile of `(n, m)`, or the default one when absent. Invalid
/// choices list every valid profile.
pub fn resolve_profile(n: usize, m: &[usize], alpha: Option<&[usize]>) -> Result<Profile> {
    let valid = enumerate_b_interior(m, n);
    let listing = || {
        if valid.is_empty() {
            format!("B°(m) is empty for n={n}, m={m:?}")
        } else {
            let names: Vec<String> = valid.iter().map(|p| format!("{:?}", p.alpha())).collect();
            format!("valid profiles for n={n}, m={m:?}: {}", names.join(", "))
        }
    };
    match alpha {
        Some(alpha) => Profile::new(n, m.to_vec(), alpha.to_vec()).map_err(|e| {
            Error::Precondition(format!("alpha {alpha:?} rejected ({e}); {}", listing()))
        }),
        None => valid
            .last()
            .cloned()
            .ok_or_else(|| Error::Precondition(listing())),
    }
}

/// Named checks plus free-form values, serialized with sorted keys.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, Value>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            command: command.into(),
            version: VERSION.into(),
            config,
            checks: Vec::new(),
            values: BTreeMap::new(),
            passed: true,
        }
    }

    /// Record a check; names are unique within a report.
    pub fn push(&mut self, check: Check) {
        assert!(
            self.checks.iter().all(|c| c.name != check.name),
            "duplicate check {}",
            check.name
        );
        self.passed &= !check.blocking_failure();
        self.checks.push(check);
    }

    pub fn value(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.values.insert(key.into(), v);
    }

    pub fn to_json(&self) -> String {
        to_sorted_json(self)
    }
}

/// Pretty JSON with object keys sorted, newline terminated.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, to_sorted_json(value))?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

#[derive(Parser, Debug)]
#[command(
    name = "gtensor",
    version,
    about = "Grassmann tensors, estimation and projective reconstruction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Random cameras with their tensor and correspondences.
    Generate(ExperimentArgs),
    /// Tensor of a camera configuration.
    Tensor {
        #[arg(long)]
        cameras: PathBuf,
        /// Comma separated profile; defaults to the last of B°(m).
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tensor from subspace correspondences.
    Estimate {
        #[arg(long)]
        correspondences: PathBuf,
        /// Smallest accepted number of tuples (default D-1).
        #[arg(long)]
        min_count: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ESTIMATION_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Camera configurations reproducing a tensor, one per PGL orbit.
    Reconstruct {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dual configuration of a line-camera configuration.
    Twist {
        /// Camera configuration with m = (1, ..., 1) and n+1 cameras.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also check the twisted-pair and Cremona structure.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Consistency checks for cameras and optional tensor and correspondences.
    Verify {
        #[arg(long)]
        cameras: PathBuf,
        #[arg(long)]
        tensor: Option<PathBuf>,
        #[arg(long)]
        correspondences: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// generate, estimate, reconstruct and (for line cameras) twist.
    Pipeline(ExperimentArgs),
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Experiment configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<usize>>,
    /// Number of correspondences.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentArgs {
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.seed = Some(self.seed);
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(m) = &self.m {
            cfg.m = m.clone();
            if self.alpha.is_none() {
                cfg.alpha = None;
            }
        }
        if let Some(alpha) = &self.alpha {
            cfg.alpha = Some(alpha.clone());
        }
        if let Some(c) = self.count {
            cfg.correspondences = Some(c);
        }
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        if let Some(s) = self.sigma {
            cfg.noise_sigma = s;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = Some(d.clone());
        }
        Ok(cfg)
    }
}

/// Failure of a command: an error or a report with blocking failures.
#[derive(Debug)]
pub enum Failure {
    Error(Error),
    Checks(Box<Report>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

pub fn run(cli: &Cli) -> std::result::Result<Report, Failure> {
    let report = match &cli.command {
        Command::Generate(args) => cmd_generate(args.experiment()?)?,
        Command::Tensor {
            cameras,
            alpha,
            out,
        } => cmd_tensor(cameras, alpha.as_deref(), out)?,
        Command::Estimate {
            correspondences,
            min_count,
            tol,
            out,
        } => cmd_estimate(correspondences, *min_count, *tol, out)?,
        Command::Reconstruct {
            tensor,
            restarts,
            seed,
            out,
        } => cmd_reconstruct(tensor, *restarts, *seed, out)?,
        Command::Twist {
            config,
            out,
            verify,
            seed,
            samples,
        } => cmd_twist(config, out, *verify, *seed, *samples)?,
        Command::Verify {
            cameras,
            tensor,
            correspondences,
            tol,
        } => cmd_verify(cameras, tensor.as_deref(), correspondences.as_deref(), *tol)?,
        Command::Pipeline(args) => cmd_pipeline(args.experiment()?)?,
    };
    if report.passed {
        Ok(report)
    } else {
        Err(Failure::Checks(Box::new(report)))
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn genericity_check(cfg: &CameraConfig) -> Check {
    let g = validate_genericity(cfg);
    Check::equals("genericity_failures", g.failures().count(), 0)
}

/// Artifacts written by `generate`.
pub struct Generated {
    pub cameras: CameraConfig,
    pub tensor: GrassmannTensor,
    pub correspondences: CorrespondenceSet,
}

fn generate(exp: &ExperimentConfig, profile: &Profile, seed: u64) -> Result<Generated> {
    let cameras = random_config(exp.n, &exp.m, derive_seed(seed, 0))?;
    let tensor = compute_tensor(&cameras, profile)?;
    let count = exp.correspondences.expect("resolved config");
    let exact = sample_correspondences(&cameras, profile, count, derive_seed(seed, 1))?;
    let correspondences = if exp.noise_sigma > 0.0 {
        add_noise_set(&exact, exp.noise_sigma, derive_seed(seed, 2))?
    } else {
        exact
    };
    Ok(Generated {
        cameras,
        tensor,
        correspondences,
    })
}

pub fn cmd_generate(mut exp: ExperimentConfig) -> Result<Report> {
    let (profile, seed) = exp.resolve()?;
    let out_dir = exp
        .out_dir
        .clone()
        .ok_or_else(|| Error::Input("generate needs an output directory (--out-dir)".into()))?;
    let g = generate(&exp, &profile, seed)?;
    write_json(&out_dir.join("cameras.json"), &g.cameras)?;
    write_json(&out_dir.join("tensor.json"), &g.tensor)?;
    write_json(&out_dir.join("correspondences.json"), &g.correspondences)?;

    let mut report = Report::new("generate", serde_json::to_value(&exp)?);
    report.push(genericity_check(&g.cameras));
    let residual = tuple_residuals(&g.tensor, &g.correspondences)?
        .into_iter()
        .fold(0.0, f64::max);
    report.push(
        Check::at_most(
            "correspondence_residual",
            residual,
            exp.tolerances.estimation,
        )
        .exempt(exp.noise_sigma > 0.0),
    );
    report.value("tensor_entries", g.tensor.len());
    report.value("correspondences", g.correspondences.len());
    report.value("out_dir", out_dir.display().to_string());
    Ok(report)
}

pub fn cmd_tensor(cameras: &Path, alpha: Option<&[usize]>, out: &Path) -> Result<Report> {
    let cfg: CameraConfig = read_json(cameras)?;
    let profile = resolve_profile(cfg.n(), &cfg.m(), alpha)?;
    let tensor = compute_tensor(&cfg, &profile)?;
    write_json(out, &tensor)?;
    let mut report = Report::new(
        "tensor",
        json!({ "cameras": cameras.display().to_string(), "alpha": profile.alpha(), "out": out.display().to_string() }),
    );
    report.push(genericity_check(&cfg));
    report.value("tensor_entries", tensor.len());
    Ok(report)
}

pub fn cmd_estimate(path: &Path, min_count: Option<usize>, tol: f64, out: &Path) -> Result<Report> {
    let cs: CorrespondenceSet = read_json(path)?;
    let min = min_count.unwrap_or_else(|| cs.profile().size().saturating_sub(1));
    let (estimate, secs) = timed(|| estimate_tensor_with_min(&cs, tol, min));
    let (tensor, diag) = estimate?;
    write_json(out, &tensor)?;
    let mut report = Report::new(
        "estimate",
        json!({ "correspondences": path.display().to_string(), "min_count": min, "tol": tol, "out": out.display().to_string() }),
    );
    // Noisy input has no exact nullvector, so these are informational.
    report.push(
        Check::equals("corank", diag.nullity, 1)
            .timed(secs)
            .exempt(true),
    );
    report.push(Check::at_most("max_row_residual", diag.max_row_residual(), 1e-8).exempt(true));
    report.value("sigma_min", diag.sigma_min);
    report.value("sigma_next", diag.sigma_next);
    report.value("sigma_max", diag.sigma_max);
    report.value("relative_gap", diag.relative_gap());
    report.value("count", diag.count);
    Ok(report)
}

/// Orbits of a reconstruction run as written by `reconstruct`.
#[derive(Serialize)]
struct ReconstructionFile<'a> {
    profile: &'a Profile,
    orbits: &'a [ReconstructionResult],
}

pub fn cmd_reconstruct(path: &Path, restarts: usize, seed: u64, out: &Path) -> Result<Report> {
    let tensor: GrassmannTensor = read_json(path)?;
    let opts = ReconstructOptions::new(restarts, seed);
    let (orbits, secs) = timed(|| reconstruct_from_tensor_with(&tensor, &opts));
    let orbits = orbits?;
    write_json(
        out,
        &ReconstructionFile {
            profile: tensor.profile(),
            orbits: &orbits,
        },
    )?;
    let mut report = Report::new(
        "reconstruct",
        json!({ "tensor": path.display().to_string(), "restarts": restarts, "seed": seed, "out": out.display().to_string() }),
    );
    report.push(
        Check::at_most("best_residual", orbits[0].residual, opts.accept_residual).timed(secs),
    );
    report.value("orbits_found", orbits.len());
    report.value("hits", orbits.iter().map(|o| o.hits).collect::<Vec<_>>());
    Ok(report)
}

/// Twisted-pair and Cremona checks for a line-camera configuration.
pub fn twist_checks(
    cfg: &CameraConfig,
    dual: &DualConfig,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<Check>> {
    let n = cfg.n();
    let mut checks = Vec::new();

    let (hs, secs) = timed(|| verify_same_hypersurface(cfg, dual, samples, derive_seed(seed, 0)));
    let mut hs_check = hs?.to_check("hypersurface_equality").timed(secs);
    hs_check.threshold = tol.hypersurface;
    hs_check.passed = hs_check.margin <= tol.hypersurface;
    checks.push(hs_check);

    let twin = dual.identified()?;
    let (same, secs) = timed(|| pgl_equivalent(cfg, &twin, tol.pgl));
    checks.push(Check::equals("orbit_distinctness", same?.is_some() as usize, 0).timed(secs));

    let all: Vec<usize> = (1..=n + 1).collect();
    let (full, secs) = timed(|| vanishing_system(cfg, n, &all));
    checks.push(Check::equals("vanishing_dim_all_loci", full?.dim(), n + 1).timed(secs));
    let start = Instant::now();
    let mut worst = 1;
    for skip in 1..=n + 1 {
        let loci: Vec<usize> = all.iter().copied().filter(|&i| i != skip).collect();
        let dim = vanishing_system(cfg, n - 1, &loci)?.dim();
        if dim != 1 {
            worst = dim;
        }
    }
    checks
        .push(Check::equals("vanishing_dim_n_loci", worst, 1).timed(start.elapsed().as_secs_f64()));

    let start = Instant::now();
    let map = CremonaMap::fit(cfg, derive_seed(seed, 1))?;
    let consistency = map.consistency(cfg, 100, derive_seed(seed, 2))?;
    checks.push(
        Check::at_most("cremona_consistency", consistency, tol.cremona)
            .timed(start.elapsed().as_secs_f64()),
    );

    let start = Instant::now();
    let mut contraction = 0.0f64;
    for excluded in 1..=n + 1 {
        let s = map.dual().config().camera(excluded - 1).matrix();
        for z in sample_contracted_points(cfg, excluded, 3, derive_seed(seed, 2 + excluded as u64))?
        {
            let w = map.apply(z.as_slice())?;
            contraction = contraction.max((s * &w).norm() / (s.norm() * w.norm()));
        }
    }
    checks.push(
        Check::at_most("contraction", contraction, tol.contraction)
            .timed(start.elapsed().as_secs_f64()),
    );
    Ok(checks)
}

pub fn cmd_twist(
    path: &Path,
    out: &Path,
    verify: bool,
    seed: u64,
    samples: usize,
) -> Result<Report> {
    let cfg: CameraConfig = read_json(path)?;
    let dual = dual_config(&cfg)?;
    write_json(out, &dual)?;
    let mut report = Report::new(
        "twist",
        json!({ "config": path.display().to_string(), "out": out.display().to_string(), "verify": verify, "seed": seed, "samples": samples }),
    );
    if verify {
        for check in twist_checks(&cfg, &dual, samples, seed, &Tolerances::default())? {
            report.push(check);
        }
    }
    Ok(report)
}

pub fn cmd_verify(
    cameras: &Path,
    tensor: Option<&Path>,
    correspondences: Option<&Path>,
    tol: f64,
) -> Result<Report> {
    let cfg: CameraConfig = read_json(cameras)?;
    let mut report = Report::new(
        "verify",
        json!({
            "cameras": cameras.display().to_string(),
            "tensor": tensor.map(|p| p.display().to_string()),
            "correspondences": correspondences.map(|p| p.display().to_string()),
            "tol": tol,
        }),
    );
    report.push(genericity_check(&cfg));
    let tensor: Option<GrassmannTensor> = tensor.map(read_json).transpose()?;
    if let Some(t) = &tensor {
        if !t.profile().matches(&cfg) {
            return Err(Error::Input(
                "tensor profile does not match the cameras".into(),
            ));
        }
        let own = compute_tensor(&cfg, t.profile())?;
        report.push(Check::at_most(
            "tensor_matches_cameras",
            own.distance(t)?,
            tol,
        ));
        let (rank, secs) =
            timed(|| tensor_map_jacobian_rank(&cfg, t.profile(), DEFAULT_JACOBIAN_STEP));
        report.push(
            Check::equals(
                "jacobian_rank",
                rank?,
                expected_jacobian_rank(cfg.n(), &cfg.m()),
            )
            .timed(secs),
        );
    }
    if let Some(path) = correspondences {
        let cs: CorrespondenceSet = read_json(path)?;
        if cs.profile().n() != cfg.n() || cs.profile().m() != cfg.m() {
            return Err(Error::Input(
                "correspondence profile does not match the cameras".into(),
            ));
        }
        let reference = match &tensor {
            Some(t) if t.profile() == cs.profile() => t.clone(),
            _ => compute_tensor(&cfg, cs.profile())?,
        };
        let worst = tuple_residuals(&reference, &cs)?
            .into_iter()
            .fold(0.0, f64::max);
        report.push(Check::at_most("correspondence_residual", worst, tol));
    }
    Ok(report)
}

pub fn cmd_pipeline(mut exp: ExperimentConfig) -> Result<Report> {
    let (profile, seed) = exp.resolve()?;
    let noisy = exp.noise_sigma > 0.0;
    let tol = exp.tolerances.clone();
    let mut report = Report::new("pipeline", serde_json::to_value(&exp)?);

    let (g, secs) = timed(|| generate(&exp, &profile, seed));
    let g = g?;
    report.push(genericity_check(&g.cameras).timed(secs));
    if let Some(dir) = &exp.out_dir {
        write_json(&dir.join("cameras.json"), &g.cameras)?;
        write_json(&dir.join("tensor.json"), &g.tensor)?;
        write_json(&dir.join("correspondences.json"), &g.correspondences)?;
    }

    let (est, secs) = timed(|| estimate_tensor_with_min(&g.correspondences, tol.nullity, 1));
    let (estimate, diag) = est?;
    let error = estimate.distance(&g.tensor)?;
    report.push(
        Check::at_most("estimation_error", error, tol.estimation)
            .timed(secs)
            .exempt(noisy),
    );
    report.push(Check::equals("estimation_corank", diag.nullity, 1).exempt(noisy));
    report.value("estimation_relative_gap", diag.relative_gap());
    report.value("estimation_max_row_residual", diag.max_row_residual());

    let mut opts = ReconstructOptions::new(exp.restarts, derive_seed(seed, 3));
    opts.accept_residual = tol.reconstruction;
    opts.dedup_tol = tol.pgl;
    let (orbits, secs) = timed(|| reconstruct_from_tensor_with(&estimate, &opts));
    let line_case = g.cameras.is_line_case();
    let expected_orbits = if line_case { 2 } else { 1 };
    let twist_source = match orbits {
        Ok(orbits) => {
            report.push(
                Check::at_most(
                    "reconstruction_residual",
                    orbits[0].residual,
                    tol.reconstruction,
                )
                .timed(secs)
                .exempt(noisy),
            );
            let matched = orbits
                .iter()
                .map(|o| pgl_equivalent(&g.cameras, &o.config, tol.pgl).map(|h| h.is_some()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|&b| b)
                .count();
            report.push(Check::equals("pgl_round_trip", matched, 1).exempt(noisy));
            report.push(Check::equals("orbits_found", orbits.len(), expected_orbits).exempt(noisy));
            report.value("orbits_found", orbits.len());
            report.value(
                "orbit_hits",
                orbits.iter().map(|o| o.hits).collect::<Vec<_>>(),
            );
            report.value(
                "orbit_residuals",
                orbits.iter().map(|o| o.residual).collect::<Vec<_>>(),
            );
            orbits.into_iter().next().map(|o| o.config)
        }
        Err(Error::NoConvergence { best_residual }) => {
            report.push(
                Check::at_most("reconstruction_residual", best_residual, tol.reconstruction)
                    .timed(secs)
                    .exempt(noisy),
            );
            report.push(Check::equals("pgl_round_trip", 0, 1).exempt(noisy));
            report.push(Check::equals("orbits_found", 0, expected_orbits).exempt(noisy));
            report.value("orbits_found", 0);
            None
        }
        Err(e) => return Err(e),
    };

    if line_case {
        let cfg = twist_source.unwrap_or_else(|| g.cameras.clone());
        let dual = dual_config(&cfg)?;
        for check in twist_checks(&cfg, &dual, exp.samples, derive_seed(seed, 4), &tol)? {
            report.push(check);
        }
    }
    Ok(report)
}

/// Size the global worker pool from `GTENSOR_THREADS`.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            Error::Input(format!(
                "{THREADS_ENV} must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Input(format!("cannot size the worker pool: {e}")))
}

/// Parse, run and print; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.to_json());
            0
        }
        Err(Failure::Checks(report)) => {
            print!("{}", report.to_json());
            for c in report.checks.iter().filter(|c| c.blocking_failure()) {
                eprintln!(
                    "check failed: {} ({:e} vs {:e})",
                    c.name, c.margin, c.threshold
                );
            }
            3
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
