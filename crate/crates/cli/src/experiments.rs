use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use sha2::{Digest, Sha256};

use serf_core::collisions::{mc_coherence_decay, McConfig, Scheme};
use serf_core::config::{parse_params, to_config_string};
use serf_core::dark_state::storage_map;
use serf_core::ellipse::fit_ellipse;
use serf_core::params::{spin_exchange_rate, CesiumParams};
use serf_core::phase::{linear_fit, uniform_grid, unwrap, wrap_pi};
use serf_core::retrieval::retrieval_map;
use serf_core::sequence::{
    demodulate_trace, eraser_field, faraday_trace, fit_lifetime, full_transform_exact, full_transform_first_order,
    transform_ellipticity, LifetimeFit, MeasurementModel, SequenceConfig,
};

use crate::output::{Cell, Outputs, SCHEMA_VERSION};
use crate::Experiment;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<serf_core::Error> for CliError {
    fn from(e: serf_core::Error) -> Self {
        if e.is_numerical() || matches!(e, serf_core::Error::InsufficientTrace(_)) {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(clap::Args, Debug, Clone, Serialize)]
pub struct Overrides {
    /// Ellipticity α; defaults to f·Γ/Δ of the configured atom.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub eta_l: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eta_a: f64,
    /// Stored amplitude in the collision Monte Carlo.
    #[arg(long, default_value_t = 1e-2)]
    pub eta: f64,
    /// Points in phase scans.
    #[arg(long, default_value_t = 360)]
    pub grid: usize,
    /// Dark time, s.
    #[arg(long, default_value_t = 0.1)]
    pub t_store: f64,
    /// Larmor frequency during the dark time, rad/s.
    #[arg(long, conflicts_with = "erase")]
    pub omega_b: Option<f64>,
    /// Set the Larmor frequency to the ellipticity-erasing value.
    #[arg(long)]
    pub erase: bool,
    /// Storage lifetime, s.
    #[arg(long, default_value_t = 0.43)]
    pub tau: f64,
    /// End of the lifetime scan, s.
    #[arg(long, default_value_t = 1.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 25)]
    pub samples: usize,
    /// Relative Gaussian noise on generated signals; 0 is noiseless.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value = "dm1")]
    pub scheme: Scheme,
    /// Spin-exchange rate, 1/s.
    #[arg(long, conflicts_with = "density")]
    pub rse: Option<f64>,
    /// Vapour density, cm⁻³; sets the spin-exchange rate.
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub n_atoms: usize,
    /// Monte Carlo duration, s.
    #[arg(long, default_value_t = 0.1)]
    pub duration: f64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Faraday rotation per unit spin.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    schema_version: u32,
    experiment: &'static str,
    seed: u64,
    seed_source: &'static str,
    config_path: Option<String>,
    config_sha256: String,
    overrides: &'a Overrides,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct FitRecord {
    tau_s: f64,
    stderr: f64,
    n_points: usize,
}

impl From<&LifetimeFit> for FitRecord {
    fn from(f: &LifetimeFit) -> Self {
        Self {
            tau_s: f.tau_s,
            stderr: f.stderr,
            n_points: f.n_points,
        }
    }
}

#[derive(Serialize)]
struct EllipseRecord {
    semi_major: f64,
    semi_minor: f64,
    orientation: f64,
    anomaly_offset: f64,
    center_x: f64,
    center_y: f64,
    max_residual: f64,
}

struct Context<'a> {
    params: CesiumParams,
    ov: &'a Overrides,
    seed: u64,
    out: Outputs,
}

impl Context<'_> {
    fn alpha(&self) -> f64 {
        self.ov.alpha.unwrap_or_else(|| self.params.alpha())
    }

    fn sequence(&self) -> Result<SequenceConfig, CliError> {
        let alpha = self.alpha();
        let omega_b = if self.ov.erase {
            eraser_field(alpha, self.ov.t_store)?
        } else {
            self.ov.omega_b.unwrap_or(0.0)
        };
        Ok(SequenceConfig::new(self.ov.t_store, omega_b, self.ov.tau, alpha)?)
    }

    fn r_se(&self) -> Result<f64, CliError> {
        match (self.ov.rse, self.ov.density) {
            (Some(r), _) => Ok(r),
            (None, Some(n)) => Ok(spin_exchange_rate(n, &self.params)?),
            (None, None) => Ok(1000.0),
        }
    }

    fn grid(&self) -> Result<Vec<f64>, CliError> {
        if self.ov.grid < 6 {
            return Err(CliError::Config(format!(
                "--grid must be at least 6, got {}",
                self.ov.grid
            )));
        }
        Ok(uniform_grid(self.ov.grid))
    }

    fn ellipse(&mut self, name: &str, scan: &[f64], points: &[(f64, f64)]) -> Result<(), CliError> {
        let fit = fit_ellipse(points)?;
        let (offset, _) = fit.anomaly_offset(scan, points);
        self.out.json(
            name,
            &EllipseRecord {
                semi_major: fit.semi_major,
                semi_minor: fit.semi_minor,
                orientation: fit.orientation,
                anomaly_offset: offset,
                center_x: fit.center.0,
                center_y: fit.center.1,
                max_residual: fit.max_residual,
            },
        )?;
        Ok(())
    }
}

pub fn run(
    experiment: Experiment,
    config: Option<&Path>,
    out_dir: &Path,
    seed: Option<u64>,
    ov: &Overrides,
) -> Result<PathBuf, CliError> {
    let text = match config {
        Some(path) => {
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => String::new(),
    };
    let params = parse_params(&text).map_err(|e| match config {
        Some(path) => CliError::Config(format!("{}: {e}", path.display())),
        None => CliError::from(e),
    })?;
    let (seed, seed_source) = match seed {
        Some(s) => (s, "flag"),
        None => (rand::random(), "random"),
    };

    let mut hasher = Sha256::new();
    hasher.update(to_config_string(&params).as_bytes());
    hasher.update(experiment.name().as_bytes());
    hasher.update(serde_json::to_vec(ov)?);
    let config_sha256 = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();

    let mut ctx = Context {
        params,
        ov,
        seed,
        out: Outputs::new(out_dir)?,
    };
    let result = match experiment {
        Experiment::MapStorage => map_storage(&mut ctx),
        Experiment::MapRetrieval => map_retrieval(&mut ctx),
        Experiment::FullTransform => full_transform(&mut ctx),
        Experiment::EraserScan => eraser_scan(&mut ctx),
        Experiment::Collide => collide(&mut ctx),
        Experiment::LifetimeScan => lifetime_scan(&mut ctx),
        Experiment::Tomography => tomography(&mut ctx),
    };
    // data already written stays on disk and in the manifest
    let manifest = Manifest {
        tool: "serf-sim",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        experiment: experiment.name(),
        seed,
        seed_source,
        config_path: config.map(|p| p.display().to_string()),
        config_sha256,
        overrides: ov,
        outputs: ctx.out.files.clone(),
    };
    let path = ctx.out.json("manifest.json", &manifest)?;
    result.map(|_| path)
}

fn map_storage(ctx: &mut Context) -> Result<(), CliError> {
    let (alpha, eta) = (ctx.alpha(), ctx.ov.eta_l);
    let scan = ctx.grid()?;
    let mut rows = Vec::with_capacity(scan.len());
    let mut points = Vec::with_capacity(scan.len());
    for &phi in &scan {
        let b = storage_map(eta, phi, alpha)?;
        points.push((b.eta_a * b.phi_a.cos(), b.eta_a * b.phi_a.sin()));
        rows.push(vec![Cell::F(phi), Cell::F(b.eta_a), Cell::F(b.phi_a)]);
    }
    ctx.out.csv("map_storage.csv", &["phi_l", "eta_a", "phi_a"], rows)?;
    ctx.ellipse("map_storage_ellipse.json", &scan, &points)
}

fn map_retrieval(ctx: &mut Context) -> Result<(), CliError> {
    let (alpha, eta) = (ctx.alpha(), ctx.ov.eta_a);
    let scan = ctx.grid()?;
    let mut rows = Vec::with_capacity(scan.len());
    let mut points = Vec::with_capacity(scan.len());
    for &phi in &scan {
        let (e, p) = retrieval_map(eta, phi, alpha)?;
        points.push((e * p.cos(), e * p.sin()));
        rows.push(vec![Cell::F(phi), Cell::F(e), Cell::F(p)]);
    }
    ctx.out.csv("map_retrieval.csv", &["phi_a", "eta_l", "phi_l"], rows)?;
    ctx.ellipse("map_retrieval_ellipse.json", &scan, &points)
}

const TRANSFORM_HEADER: [&str; 3] = ["phi_l", "eta_l_out", "phi_l_out"];

fn full_transform(ctx: &mut Context) -> Result<(), CliError> {
    let cfg = ctx.sequence()?;
    let scan = ctx.grid()?;
    let eta = ctx.ov.eta_l;
    let exact = scan
        .iter()
        .map(|&phi| full_transform_exact(eta, phi, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let first = scan
        .iter()
        .map(|&phi| full_transform_first_order(eta, phi, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = |data: &[(f64, f64)]| -> Vec<Vec<Cell<'static>>> {
        scan.iter()
            .zip(data)
            .map(|(&p, &(e, o))| vec![Cell::F(p), Cell::F(e), Cell::F(o)])
            .collect()
    };
    ctx.out.csv("full_transform.csv", &TRANSFORM_HEADER, rows(&exact))?;
    ctx.out
        .csv("full_transform_first_order.csv", &TRANSFORM_HEADER, rows(&first))?;

    #[derive(Serialize)]
    struct Summary {
        alpha: f64,
        omega_b: f64,
        omega_b_t: f64,
        ellipticity: f64,
    }
    let ellipticity = transform_ellipticity(&cfg, ctx.ov.grid.max(64))?;
    ctx.out.json(
        "full_transform_summary.json",
        &Summary {
            alpha: cfg.alpha,
            omega_b: cfg.omega_b,
            omega_b_t: cfg.larmor_angle(),
            ellipticity,
        },
    )?;
    Ok(())
}

fn eraser_scan(ctx: &mut Context) -> Result<(), CliError> {
    let base = ctx.sequence()?;
    if !(base.t_store > 0.0) {
        return Err(CliError::Config("eraser scan needs --t-store > 0".into()));
    }
    let angles: Vec<f64> = ctx.grid()?.into_iter().map(|a| a - PI).collect();
    let mut rows = Vec::with_capacity(angles.len());
    for &wt in &angles {
        let cfg = SequenceConfig {
            omega_b: wt / base.t_store,
            ..base
        };
        rows.push(vec![Cell::F(wt), Cell::F(transform_ellipticity(&cfg, 128)?)]);
    }
    ctx.out.csv("eraser_scan.csv", &["omega_b_t", "ellipticity"], rows)?;

    #[derive(Serialize)]
    struct Summary {
        alpha: f64,
        t_store: f64,
        omega_b_eraser: f64,
        ellipticity_no_field: f64,
        ellipticity_erased: f64,
    }
    let omega = eraser_field(base.alpha, base.t_store)?;
    let none = transform_ellipticity(&SequenceConfig { omega_b: 0.0, ..base }, 360)?;
    let erased = transform_ellipticity(&SequenceConfig { omega_b: omega, ..base }, 360)?;
    ctx.out.json(
        "eraser_summary.json",
        &Summary {
            alpha: base.alpha,
            t_store: base.t_store,
            omega_b_eraser: omega,
            ellipticity_no_field: none,
            ellipticity_erased: erased,
        },
    )?;
    Ok(())
}

fn collide(ctx: &mut Context) -> Result<(), CliError> {
    let r_se = ctx.r_se()?;
    let ov = ctx.ov;
    let mut cfg = McConfig::new(ov.scheme, r_se, ov.duration, ov.n_atoms, ov.eta, ctx.seed);
    cfg.trials = ov.trials;
    let outcome = mc_coherence_decay(&cfg, &ctx.params)?;
    let label = cfg.scheme.label();
    let rows = outcome
        .trace
        .iter()
        .map(|&(t, c)| vec![Cell::F(t), Cell::F(c), Cell::S(label), Cell::F(r_se), Cell::U(ctx.seed)]);
    ctx.out.csv(
        "collide.csv",
        &["t_seconds", "abs_coherence", "scheme", "r_se", "seed"],
        rows,
    )?;
    match &outcome.fit {
        Ok(fit) => {
            ctx.out.json("collide_fit.json", &FitRecord::from(fit))?;
            Ok(())
        }
        Err(e) => Err(CliError::Numerical(format!(
            "lifetime fit failed, raw trace kept in collide.csv: {e}"
        ))),
    }
}

fn lifetime_scan(ctx: &mut Context) -> Result<(), CliError> {
    let ov = ctx.ov;
    if ov.samples < 3 || !(ov.tmax > 0.0) || !(ov.tau > 0.0) || !(ov.noise >= 0.0) {
        return Err(CliError::Config(
            "lifetime scan needs --samples >= 3 and positive --tmax, --tau".into(),
        ));
    }
    let noise = Normal::new(0.0, ov.noise).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let samples: Vec<(f64, f64)> = (0..ov.samples)
        .map(|i| {
            let t = ov.tmax * i as f64 / (ov.samples - 1) as f64;
            let clean = (-t / ov.tau).exp();
            let p = if ov.noise > 0.0 {
                clean * (1.0 + noise.sample(&mut rng))
            } else {
                clean
            };
            (t, p)
        })
        .collect();
    ctx.out.csv(
        "lifetime_scan.csv",
        &["t", "retrieved_power"],
        samples.iter().map(|&(t, p)| vec![Cell::F(t), Cell::F(p)]),
    )?;
    let fit = fit_lifetime(&samples)?;
    ctx.out.json("lifetime_fit.json", &FitRecord::from(&fit))?;
    Ok(())
}

fn tomography(ctx: &mut Context) -> Result<(), CliError> {
    let cfg = ctx.sequence()?;
    let scan = ctx.grid()?;
    let meas = MeasurementModel::new(ctx.ov.beta)?;
    let t_grid = meas.time_grid(10.0, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut rows = Vec::with_capacity(scan.len());
    let mut outs = Vec::with_capacity(scan.len());
    for &phi in &scan {
        let stored = storage_map(ctx.ov.eta_l, phi, cfg.alpha)?;
        let mut trace = faraday_trace(&stored, &meas, &t_grid);
        if ctx.ov.noise > 0.0 {
            let amp = meas.beta * stored.s_x().hypot(stored.s_y());
            let noise = Normal::new(0.0, ctx.ov.noise * amp.abs()).map_err(|e| CliError::Config(e.to_string()))?;
            trace.iter_mut().for_each(|s| s.1 += noise.sample(&mut rng));
        }
        let (sx, sy) = demodulate_trace(&trace, &meas)?;
        let (_, phi_out) = full_transform_exact(ctx.ov.eta_l, phi, &cfg)?;
        outs.push(phi_out);
        rows.push(vec![Cell::F(phi), Cell::F(sy.atan2(sx)), Cell::F(phi_out)]);
    }
    ctx.out
        .csv("tomography.csv", &["phi_l", "phi_a_measured", "phi_l_out"], rows)?;

    #[derive(Serialize)]
    struct Summary {
        omega_b_t: f64,
        slope: f64,
        mean_offset: f64,
    }
    let unwrapped = unwrap(&outs);
    let (slope, _) = linear_fit(&scan, &unwrapped);
    let mean_offset = scan.iter().zip(&outs).map(|(p, o)| wrap_pi(o - p)).sum::<f64>() / scan.len() as f64;
    ctx.out.json(
        "tomography_summary.json",
        &Summary {
            omega_b_t: cfg.larmor_angle(),
            slope,
            mean_offset,
        },
    )?;
    Ok(())
}
