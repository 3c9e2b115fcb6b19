//! The five batch tasks. Each one writes its files into the output
//! directory and returns their paths.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crescent_core::wigner::{phase_space_extent, wigner_along, Window};
use crescent_core::{
    coherent_fock, conditional_state_exact, ensemble_state_converged, negativity_volume,
    outcome_density, photon_statistics, squeezing_factor, wigner, Complex64, DensityMatrix, Error,
    FidelityReference, GridSpec, ProtocolParams, WignerGrid, XGrid,
};

use crate::config::{FidelitySettings, RunConfig, SweepAxis, Task, WignerState};
use crate::output::{write_json, Cell, CsvWriter};
use crate::rho_io::{analyze_density, write_rho, DensitySummary};
use crate::{CliError, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

pub fn run(task: Task, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io {
        context: format!("creating {}", out.display()),
        source: e,
    })?;
    match task {
        Task::PhotonStats => cmd_photon_stats(cfg, out),
        Task::Wigner => cmd_wigner(cfg, out),
        Task::Fidelity => cmd_fidelity(cfg, out),
        Task::Ensemble => cmd_ensemble(cfg, out),
        Task::Scan => cmd_scan(cfg, out),
    }
}

/// Basis enlargements tried when displaced outputs leak out of the
/// truncated space.
const MAX_DIM_GROWTHS: usize = 3;

/// Runs `f`, enlarging the truncation by half whenever it fails with a
/// leakage error. Returns the result with the parameters that produced it.
pub fn with_dim_growth<T>(
    p: &ProtocolParams,
    mut f: impl FnMut(&ProtocolParams) -> crescent_core::Result<T>,
) -> Result<(T, ProtocolParams)> {
    let mut p = p.clone();
    let mut tries = 0;
    loop {
        match f(&p) {
            Err(Error::Leakage { .. }) if tries < MAX_DIM_GROWTHS => {
                p.dim += p.dim / 2;
                tries += 1;
            }
            r => return Ok((r?, p)),
        }
    }
}

/// Parameters echoed into every JSON file.
#[derive(Debug, Clone, Serialize)]
pub struct ParamsEcho {
    pub alpha_mag: f64,
    pub alpha_phase: f64,
    pub beta_mag: f64,
    pub beta_phase: f64,
    pub gamma: f64,
    pub gamma_beta: f64,
    pub dim: usize,
}

impl ParamsEcho {
    pub fn new(p: &ProtocolParams) -> Self {
        ParamsEcho {
            alpha_mag: p.alpha.norm(),
            alpha_phase: p.alpha.arg(),
            beta_mag: p.beta_mag,
            beta_phase: p.beta_phase(),
            gamma: p.gamma,
            gamma_beta: p.coupling(),
            dim: p.dim,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub fano: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeStats {
    pub x: f64,
    /// `P(x)`.
    pub density: f64,
    pub mean: f64,
    pub variance: f64,
    pub fano: f64,
    /// `|α|² - x/(√2 γ|β|)`.
    pub predicted_mean: f64,
    /// `1/(2γ|β|)²`.
    pub predicted_variance: f64,
}

#[derive(Debug, Clone, Serialize)]
struct PhotonStatsSummary {
    task: &'static str,
    params: ParamsEcho,
    squeezing_factor: f64,
    baseline: Moments,
    outcomes: Vec<OutcomeStats>,
}

fn cmd_photon_stats(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let p = cfg.params()?;
    let csv_path = out.join("photon_stats.csv");
    let mut csv = CsvWriter::create(&csv_path, &["x", "n", "p_n"])?;

    let coh = photon_statistics(&coherent_fock(p.alpha, p.dim)?)?;
    for (n, q) in coh.probs.iter().enumerate() {
        csv.row(&[f64::NAN.into(), n.into(), (*q).into()])?;
    }
    let gb = p.coupling();
    let a2 = p.alpha.norm_sqr();
    let mut outcomes = Vec::new();
    for &x in &cfg.x_list {
        let psi = conditional_state_exact(&p, x)?;
        let s = photon_statistics(&psi)?;
        for (n, q) in s.probs.iter().enumerate() {
            csv.row(&[x.into(), n.into(), (*q).into()])?;
        }
        let (predicted_mean, predicted_variance) = if gb > 0.0 {
            (a2 - x / (SQRT_2 * gb), 1.0 / (4.0 * gb * gb))
        } else {
            (a2, a2)
        };
        outcomes.push(OutcomeStats {
            x,
            density: psi.norm_sq(),
            mean: s.mean,
            variance: s.variance,
            fano: s.fano,
            predicted_mean,
            predicted_variance,
        });
    }
    csv.finish()?;

    let summary = PhotonStatsSummary {
        task: Task::PhotonStats.name(),
        params: ParamsEcho::new(&p),
        squeezing_factor: squeezing_factor(&p),
        baseline: Moments {
            mean: coh.mean,
            variance: coh.variance,
            fano: coh.fano,
        },
        outcomes,
    };
    let json_path = out.join("summary.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}

/// The density matrix the Wigner task samples.
pub fn wigner_source(p: &ProtocolParams, state: WignerState) -> Result<DensityMatrix> {
    Ok(match state {
        WignerState::Conditional(x) => DensityMatrix::from_pure(&conditional_state_exact(p, x)?)?,
        WignerState::Ensemble => with_dim_growth(p, ensemble_state_converged)?.0.rho,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GridMeta {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub points_x: usize,
    pub points_p: usize,
    pub dx: f64,
    pub dp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WignerMeta {
    pub task: &'static str,
    pub params: ParamsEcho,
    /// `conditional` or `ensemble`.
    pub state: &'static str,
    /// Outcome of the conditional state; null for the ensemble.
    pub x: Option<f64>,
    pub grid: GridMeta,
    pub min_w: f64,
    pub max_w: f64,
    pub negativity_volume: f64,
    pub integrated_mass: f64,
}

fn grid_meta(g: &WignerGrid) -> GridMeta {
    GridMeta {
        x_min: g.x_axis[0],
        x_max: g.x_axis[g.x_axis.len() - 1],
        p_min: g.p_axis[0],
        p_max: g.p_axis[g.p_axis.len() - 1],
        points_x: g.x_axis.len(),
        points_p: g.p_axis.len(),
        dx: g.dx(),
        dp: g.dp(),
    }
}

fn grid_spec(cfg: &RunConfig) -> GridSpec {
    GridSpec {
        window: cfg.wigner.window,
        points_x: cfg.wigner.points,
        points_p: cfg.wigner.points,
    }
}

fn cmd_wigner(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let p = cfg.params()?;
    let rho = wigner_source(&p, cfg.wigner.state)?;
    let grid = wigner(&rho, &grid_spec(cfg))?;

    let csv_path = out.join("wigner.csv");
    let mut csv = CsvWriter::create(&csv_path, &["x", "p", "W"])?;
    for (i, &x) in grid.x_axis.iter().enumerate() {
        for (j, &q) in grid.p_axis.iter().enumerate() {
            csv.row(&[x.into(), q.into(), grid.get(i, j).into()])?;
        }
    }
    csv.finish()?;

    let (state, x) = match cfg.wigner.state {
        WignerState::Conditional(x) => ("conditional", Some(x)),
        WignerState::Ensemble => ("ensemble", None),
    };
    let meta = WignerMeta {
        task: Task::Wigner.name(),
        params: ParamsEcho::new(&p),
        state,
        x,
        grid: grid_meta(&grid),
        min_w: grid.min(),
        max_w: grid.max(),
        negativity_volume: negativity_volume(&grid),
        integrated_mass: grid.integrated_mass(),
    };
    let meta_path = out.join("wigner_meta.json");
    write_json(&meta_path, &meta)?;
    let mut files = vec![csv_path, meta_path];

    if cfg.wigner.radial_cut {
        files.push(write_radial_cut(
            &rho,
            &grid,
            cfg.wigner.radial_points,
            out,
        )?);
    }
    Ok(files)
}

/// `W` along the ray from the origin through the mean amplitude, spanning
/// the grid's half-width on either side of the center.
fn write_radial_cut(
    rho: &DensityMatrix,
    grid: &WignerGrid,
    points: usize,
    out: &Path,
) -> Result<PathBuf> {
    let ((cx, cp), _) = phase_space_extent(rho)?;
    let c = cx.hypot(cp);
    let (ux, up) = if c > 1e-12 {
        (cx / c, cp / c)
    } else {
        (1.0, 0.0)
    };
    let half = 0.5 * (grid.x_axis[grid.x_axis.len() - 1] - grid.x_axis[0]);
    let (r0, r1) = ((c - half).max(0.0), c + half);
    let rs: Vec<f64> = (0..points)
        .map(|i| r0 + (r1 - r0) * i as f64 / (points - 1) as f64)
        .collect();
    let pts: Vec<(f64, f64)> = rs.iter().map(|&r| (r * ux, r * up)).collect();
    let w = wigner_along(rho, &pts)?;
    let path = out.join("wigner_radial.csv");
    let mut csv = CsvWriter::create(&path, &["r", "x", "p", "W"])?;
    for ((r, (x, q)), v) in rs.iter().zip(&pts).zip(&w) {
        csv.row(&[(*r).into(), (*x).into(), (*q).into(), (*v).into()])?;
    }
    csv.finish()?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPoint {
    pub x: f64,
    pub f: Complex64,
    pub p: f64,
}

#[derive(Debug, Clone)]
pub struct FidelityScan {
    pub points: Vec<FidelityPoint>,
    /// Smallest `|F|` where `P ≥ support_fraction · max P`.
    pub min_over_support: f64,
}

/// Outcomes for the fidelity profile: the requested or adapted range, with
/// `x = 0` added when it falls inside.
pub fn fidelity_outcomes(p: &ProtocolParams, s: &FidelitySettings) -> Result<Vec<f64>> {
    let (lo, hi) = match s.range {
        Some(r) => r,
        None => XGrid::adapt(p)?.bounds(),
    };
    let n = s.points;
    let mut xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    if lo < 0.0 && hi > 0.0 && !xs.contains(&0.0) {
        let at = xs.partition_point(|&x| x < 0.0);
        xs.insert(at, 0.0);
    }
    Ok(xs)
}

pub fn fidelity_scan(p: &ProtocolParams, s: &FidelitySettings) -> Result<FidelityScan> {
    let xs = fidelity_outcomes(p, s)?;
    let (points, _) = with_dim_growth(p, |p| {
        let reference = FidelityReference::new(p)?;
        xs.iter()
            .map(|&x| {
                let density = outcome_density(p, x)?;
                let f = match reference.at(x) {
                    Ok(f) => f,
                    // P(x) underflowed: nothing to normalize.
                    Err(Error::ZeroState) => Complex64::new(f64::NAN, f64::NAN),
                    Err(e) => return Err(e),
                };
                Ok(FidelityPoint { x, f, p: density })
            })
            .collect::<crescent_core::Result<Vec<_>>>()
    })?;
    let pmax = points.iter().map(|q| q.p).fold(0.0, f64::max);
    let min_over_support = points
        .iter()
        .filter(|q| q.p >= s.support_fraction * pmax)
        .map(|q| q.f.norm())
        .fold(f64::INFINITY, f64::min);
    Ok(FidelityScan {
        points,
        min_over_support,
    })
}

#[derive(Debug, Clone, Serialize)]
struct FidelitySummary {
    task: &'static str,
    params: ParamsEcho,
    threshold: f64,
    support_fraction: f64,
    min_f_abs_over_support: f64,
    meets_threshold: bool,
}

fn cmd_fidelity(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let p = cfg.params()?;
    let scan = fidelity_scan(&p, &cfg.fidelity)?;
    let csv_path = out.join("fidelity.csv");
    let mut csv = CsvWriter::create(&csv_path, &["x", "F_abs", "F_re", "F_im", "P"])?;
    for q in &scan.points {
        csv.row(&[
            q.x.into(),
            q.f.norm().into(),
            q.f.re.into(),
            q.f.im.into(),
            q.p.into(),
        ])?;
    }
    csv.finish()?;
    let summary = FidelitySummary {
        task: Task::Fidelity.name(),
        params: ParamsEcho::new(&p),
        threshold: cfg.fidelity.threshold,
        support_fraction: cfg.fidelity.support_fraction,
        min_f_abs_over_support: scan.min_over_support,
        meets_threshold: scan.min_over_support >= cfg.fidelity.threshold,
    };
    let json_path = out.join("summary.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub task: &'static str,
    pub params: ParamsEcho,
    /// `Tr ρ` before rescaling to one.
    pub raw_trace: f64,
    pub clamped_points: usize,
    pub grid_points: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    /// Largest entry change in the last grid doubling.
    pub last_change: Option<f64>,
    pub density: DensitySummary,
}

fn cmd_ensemble(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (ens, p) = with_dim_growth(&cfg.params()?, ensemble_state_converged)?;
    let rho_path = out.join("rho.csv");
    write_rho(&rho_path, &ens.rho)?;
    let (grid_min, grid_max) = ens.grid.bounds();
    let summary = EnsembleSummary {
        task: Task::Ensemble.name(),
        params: ParamsEcho::new(&p),
        raw_trace: ens.raw_trace,
        clamped_points: ens.clamped_points,
        grid_points: ens.grid.len(),
        grid_min,
        grid_max,
        last_change: ens.last_change,
        density: analyze_density(&ens.rho)?,
    };
    let json_path = out.join("summary.json");
    write_json(&json_path, &summary)?;
    Ok(vec![rho_path, json_path])
}

/// Parameters of one sweep point.
pub fn sweep_params(cfg: &RunConfig, value: f64) -> Result<ProtocolParams> {
    let needs_gamma = |what: &str| CliError::Config(format!("a {what} sweep needs gamma > 0"));
    match cfg.scan.axis {
        SweepAxis::GammaBeta => {
            if value < 0.0 {
                return Err(CliError::Config(
                    "gamma_beta sweep values must be nonnegative".into(),
                ));
            }
            if value > 0.0 && cfg.gamma <= 0.0 {
                return Err(needs_gamma("gamma_beta"));
            }
            let beta = if value == 0.0 { 0.0 } else { value / cfg.gamma };
            cfg.params_with(cfg.alpha_mag, beta)
        }
        SweepAxis::AlphaMag => {
            if !(value > 0.0) {
                return Err(CliError::Config(
                    "alpha_mag sweep values must be positive".into(),
                ));
            }
            if cfg.gamma <= 0.0 {
                return Err(needs_gamma("alpha_mag"));
            }
            cfg.params_with(value, cfg.scan.product / (cfg.gamma * value))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub sweep_value: f64,
    pub mean_n: f64,
    pub var_n: f64,
    pub fano: f64,
    pub min_w: f64,
    pub neg_volume: f64,
    /// NaN when purity is switched off.
    pub purity: f64,
    pub f_min_over_support: f64,
}

/// All scan columns for one sweep point. The conditional-state columns use
/// `|ψ(scan_x)⟩`; purity and fidelity describe the feed-forward ensemble.
pub fn scan_row(cfg: &RunConfig, value: f64) -> Result<ScanRow> {
    let p = sweep_params(cfg, value)?;
    let psi = conditional_state_exact(&p, cfg.scan.x)?;
    let stats = photon_statistics(&psi)?;
    let grid = wigner(&psi, &grid_spec(cfg))?;
    let purity = if cfg.scan.purity {
        with_dim_growth(&p, ensemble_state_converged)?
            .0
            .rho
            .purity()
    } else {
        f64::NAN
    };
    let fid = fidelity_scan(&p, &cfg.fidelity)?;
    Ok(ScanRow {
        sweep_value: value,
        mean_n: stats.mean,
        var_n: stats.variance,
        fano: stats.fano,
        min_w: grid.min(),
        neg_volume: negativity_volume(&grid),
        purity,
        f_min_over_support: fid.min_over_support,
    })
}

pub const SCAN_HEADER: [&str; 8] = [
    "sweep_value",
    "mean_n",
    "var_n",
    "fano",
    "min_W",
    "neg_volume",
    "purity",
    "F_min_over_support",
];

fn cmd_scan(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    if cfg.scan.values.is_empty() {
        return Err(CliError::Config("`scan_values` is missing or empty".into()));
    }
    if matches!(cfg.wigner.window, Window::Auto) {
        return Err(CliError::Config(
            "scan compares negativity volumes and needs a grid of fixed resolution: \
             use wigner_window = centered or fixed"
                .into(),
        ));
    }
    let path = out.join("scan.csv");
    let mut csv = CsvWriter::create(&path, &SCAN_HEADER)?;
    for &v in &cfg.scan.values {
        let r = scan_row(cfg, v)?;
        let cells: [Cell; 8] = [
            r.sweep_value.into(),
            r.mean_n.into(),
            r.var_n.into(),
            r.fano.into(),
            r.min_w.into(),
            r.neg_volume.into(),
            r.purity.into(),
            r.f_min_over_support.into(),
        ];
        csv.row(&cells)?;
    }
    csv.finish()?;
    Ok(vec![path])
}
