//! Orchestration behind the command line: each command turns a validated
//! [`Scenario`] into CSV tables and a JSON manifest in an output directory.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::cache::{obtain_basis, CacheStatus, EigenCache};
use crate::delta_check::{compare_to_delta_limit, nearest_even_state};
use crate::error::{Error, Issue, Result};
use crate::grid::{Grid, Units};
use crate::kernel::{delta_limit_eigenfunction, EigenBasis};
use crate::observables::{
    conditional_mean_position, edge_mass, olc_fraction_with, olc_global_max, peak_position, region_mass,
    transmitted_mass, OlcRecord,
};
use crate::output::{fmt_f64, fmt_opt, write_csv, CacheReport, Manifest, FLOAT_FORMAT};
use crate::potential::Potential;
use crate::propagate::{evolve_series, Evolution, FreeEvolution, SpectralEvolution};
use crate::scenario::{physics_hash, Scenario};
use crate::wavepacket::{cos8_packet, PacketSpec, Wavepacket};

/// Lattice nodes at each box edge watched for wrap-around.
pub const EDGE_NODES: usize = 5;
/// Edge mass above which a wrap-around warning is raised.
pub const EDGE_MASS_WARNING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Eigen,
    Evolve,
    Olc,
    Scan,
    DeltaCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Eigen => "eigen",
            Command::Evolve => "evolve",
            Command::Olc => "olc",
            Command::Scan => "scan",
            Command::DeltaCheck => "delta-check",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub use_cache: bool,
    pub scenario_file: Option<PathBuf>,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            use_cache: true,
            scenario_file: None,
        }
    }
}

struct Context<'a> {
    scenario: &'a Scenario,
    grid: Grid,
    units: Units,
    times: Vec<f64>,
    cache: Option<EigenCache>,
    cache_report: Mutex<CacheReport>,
    warnings: Mutex<Vec<String>>,
    outputs: Vec<String>,
    summary: Map<String, Value>,
    out_dir: PathBuf,
}

impl<'a> Context<'a> {
    fn new(scenario: &'a Scenario, opts: &RunOptions) -> Result<Self> {
        scenario.validate()?;
        Ok(Self {
            scenario,
            grid: scenario.grid()?,
            units: scenario.units,
            times: scenario.times()?,
            cache: opts.use_cache.then(|| EigenCache::new(opts.out_dir.join("cache"))),
            cache_report: Mutex::new(CacheReport {
                hits: 0,
                misses: 0,
                disabled: 0,
            }),
            warnings: Mutex::new(Vec::new()),
            outputs: Vec::new(),
            summary: Map::new(),
            out_dir: opts.out_dir.clone(),
        })
    }

    fn basis(&self, potential: &Potential) -> Result<EigenBasis> {
        let hash = physics_hash(&self.scenario.grid, &self.units, potential);
        let (basis, status) = obtain_basis(self.cache.as_ref(), &hash, &self.grid, potential, &self.units)?;
        let mut r = self.cache_report.lock().expect("cache report lock");
        match status {
            CacheStatus::Hit => r.hits += 1,
            CacheStatus::Miss => r.misses += 1,
            CacheStatus::Disabled => r.disabled += 1,
        }
        Ok(basis)
    }

    fn warn(&self, msg: String) {
        log::warn!("{msg}");
        self.warnings.lock().expect("warnings lock").push(msg);
    }

    /// Snapshots at every sample time, with the wrap-around guard applied.
    fn snapshots<E: Evolution + ?Sized>(&self, evolution: &E, label: &str) -> Result<Vec<Wavepacket>> {
        let snaps = evolve_series(evolution, &self.times)?;
        if let Some(s) = snaps.iter().find(|s| edge_mass(s, EDGE_NODES) > EDGE_MASS_WARNING) {
            self.warn(format!(
                "{label}: probability {:e} within {EDGE_NODES} nodes of the box edge at t = {} (periodic wrap-around)",
                edge_mass(s, EDGE_NODES),
                s.time()
            ));
        }
        Ok(snaps)
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        write_csv(&self.out_dir.join(name), header, rows)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn olc_records(&self, snaps: &[Wavepacket], spec: &PacketSpec, x_cut: f64) -> Result<Vec<OlcRecord>> {
        let (_, right) = spec.support_edges();
        let denominator = self.scenario.observables.olc_denominator;
        snaps
            .iter()
            .zip(&self.times)
            .map(|(s, &t)| olc_fraction_with(s, right, t, &self.units, denominator, x_cut))
            .collect()
    }
}

/// Runs `command` on `scenario`, writing its artifacts under
/// `opts.out_dir`, and returns the manifest that was written.
pub fn execute(command: Command, scenario: &Scenario, opts: &RunOptions) -> Result<Manifest> {
    let started = Instant::now();
    let mut ctx = Context::new(scenario, opts)?;
    match command {
        Command::Eigen => eigen(&mut ctx)?,
        Command::Evolve => evolve(&mut ctx)?,
        Command::Olc => olc(&mut ctx)?,
        Command::Scan => scan(&mut ctx)?,
        Command::DeltaCheck => delta(&mut ctx)?,
        Command::Run => {
            let obs = scenario.observables;
            if obs.density_snapshots {
                evolve(&mut ctx)?;
            }
            if obs.olc_series {
                olc(&mut ctx)?;
            }
            if obs.transmitted_stats {
                transmitted(&mut ctx)?;
            }
            if scenario.scan.is_some() {
                scan(&mut ctx)?;
            }
            if scenario.delta_check.is_some() {
                delta(&mut ctx)?;
            }
        }
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.name().to_string(),
        scenario_name: scenario.name.clone(),
        scenario_file: opts.scenario_file.clone(),
        scenario_hash: scenario.hash(),
        physics_hash: scenario.physics_hash(),
        float_format: FLOAT_FORMAT,
        eigenbasis_cache: ctx.cache_report.into_inner().expect("cache report lock"),
        outputs: ctx.outputs,
        summary: ctx.summary,
        warnings: ctx.warnings.into_inner().expect("warnings lock"),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        finished_at_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    manifest.write(&opts.out_dir)?;
    Ok(manifest)
}

fn eigen(ctx: &mut Context) -> Result<()> {
    let basis = ctx.basis(&ctx.scenario.potential)?;
    let rows = basis
        .energies()
        .iter()
        .enumerate()
        .map(|(n, e)| vec![n.to_string(), fmt_f64(*e)])
        .collect();
    ctx.csv("eigen.csv", &["index", "energy"], rows)?;
    let lowest = basis.energies()[0];
    ctx.summary.insert("lowest_energy".into(), json!(lowest));
    ctx.summary.insert("rest_energy".into(), json!(ctx.units.rest_energy()));
    ctx.summary.insert("states".into(), json!(basis.len()));
    Ok(())
}

fn evolve(ctx: &mut Context) -> Result<()> {
    let spec = ctx.scenario.packet;
    let psi0 = cos8_packet(&spec, &ctx.grid)?;
    let basis = ctx.basis(&ctx.scenario.potential)?;
    let snaps = ctx.snapshots(&SpectralEvolution::new(&basis, &psi0)?, "barrier")?;
    let free = if ctx.scenario.observables.free_baseline {
        Some(ctx.snapshots(&FreeEvolution::new(&psi0, ctx.units)?, "free")?)
    } else {
        None
    };
    let mut header = vec!["t", "x", "re", "im", "density"];
    if free.is_some() {
        header.push("free_density");
    }
    let mut rows = Vec::with_capacity(snaps.len() * ctx.grid.len());
    let mut max_norm_error = 0.0f64;
    for (i, s) in snaps.iter().enumerate() {
        max_norm_error = max_norm_error.max((s.norm() - 1.0).abs());
        for (j, a) in s.amplitudes().iter().enumerate() {
            let mut row = vec![
                fmt_f64(s.time()),
                fmt_f64(ctx.grid.x(j)),
                fmt_f64(a.re),
                fmt_f64(a.im),
                fmt_f64(a.norm_sqr()),
            ];
            if let Some(f) = &free {
                row.push(fmt_f64(f[i].amplitudes()[j].norm_sqr()));
            }
            rows.push(row);
        }
    }
    ctx.csv("snapshots.csv", &header, rows)?;
    ctx.summary.insert("max_norm_error".into(), json!(max_norm_error));
    Ok(())
}

fn olc(ctx: &mut Context) -> Result<()> {
    let spec = ctx.scenario.packet;
    let x_cut = ctx.scenario.potential.transmitted_cut();
    let psi0 = cos8_packet(&spec, &ctx.grid)?;
    let basis = ctx.basis(&ctx.scenario.potential)?;
    let snaps = ctx.snapshots(&SpectralEvolution::new(&basis, &psi0)?, "barrier")?;
    let records = ctx.olc_records(&snaps, &spec, x_cut)?;
    let free = if ctx.scenario.observables.free_baseline {
        let fs = ctx.snapshots(&FreeEvolution::new(&psi0, ctx.units)?, "free")?;
        Some(ctx.olc_records(&fs, &spec, x_cut)?)
    } else {
        None
    };
    let mut header = vec!["t", "fraction"];
    if free.is_some() {
        header.push("free_fraction");
    }
    let rows = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = vec![fmt_f64(r.t), fmt_f64(r.fraction)];
            if let Some(f) = &free {
                row.push(fmt_f64(f[i].fraction));
            }
            row
        })
        .collect();
    ctx.csv("olc.csv", &header, rows)?;
    let (t_star, f_star) = olc_global_max(&records)?;
    ctx.summary.insert("olc_global_max".into(), json!({ "t": t_star, "fraction": f_star }));
    if let Some(f) = &free {
        let (t, v) = olc_global_max(f)?;
        ctx.summary.insert("free_olc_global_max".into(), json!({ "t": t, "fraction": v }));
    }
    if records.iter().any(|r| r.flag.is_some()) {
        ctx.warn("some OLC samples were flagged (light cone outside the box or no transmitted mass) and set to 0".into());
    }
    Ok(())
}

fn transmitted(ctx: &mut Context) -> Result<()> {
    let spec = ctx.scenario.packet;
    let x_cut = ctx.scenario.potential.transmitted_cut();
    let psi0 = cos8_packet(&spec, &ctx.grid)?;
    let basis = ctx.basis(&ctx.scenario.potential)?;
    let snaps = ctx.snapshots(&SpectralEvolution::new(&basis, &psi0)?, "barrier")?;
    let free = if ctx.scenario.observables.free_baseline {
        Some(ctx.snapshots(&FreeEvolution::new(&psi0, ctx.units)?, "free")?)
    } else {
        None
    };
    let mut header = vec!["t", "transmitted", "reflected", "conditional_mean", "peak"];
    if free.is_some() {
        header.extend(["free_transmitted", "free_conditional_mean", "free_peak"]);
    }
    let x_min = ctx.grid.x_min();
    let mut rows = Vec::new();
    for (i, s) in snaps.iter().enumerate() {
        let reflected = if -x_cut > x_min { region_mass(s, x_min, -x_cut)?.mass } else { 0.0 };
        let mut row = vec![
            fmt_f64(s.time()),
            fmt_f64(transmitted_mass(s, x_cut)),
            fmt_f64(reflected),
            fmt_opt(conditional_mean_position(s, x_cut).ok()),
            fmt_opt(peak_position(s, x_cut).ok()),
        ];
        if let Some(f) = &free {
            row.push(fmt_f64(transmitted_mass(&f[i], x_cut)));
            row.push(fmt_opt(conditional_mean_position(&f[i], x_cut).ok()));
            row.push(fmt_opt(peak_position(&f[i], x_cut).ok()));
        }
        rows.push(row);
    }
    ctx.csv("transmitted.csv", &header, rows)?;
    ctx.summary.insert("transmission_cut".into(), json!(x_cut));
    Ok(())
}

struct ScanPoint {
    width: f64,
    v0: f64,
    t_star: f64,
    olc_max: f64,
}

fn scan(ctx: &mut Context) -> Result<()> {
    let Some(cfg) = ctx.scenario.scan.clone() else {
        return Err(Error::Validation(vec![Issue::new("scan", "the scenario has no [scan] section")]));
    };
    let shape = ctx.scenario.potential;
    let points: Vec<(f64, f64)> = cfg
        .width
        .iter()
        .flat_map(|&w| cfg.v0.iter().map(move |&v| (w, v)))
        .collect();
    let ctx_ref = &*ctx;
    let results: Vec<ScanPoint> = points
        .par_iter()
        .map(|&(width, v0)| -> Result<ScanPoint> {
            let spec = ctx_ref.scenario.packet_for_width(width);
            let potential = shape.reshaped(v0, width);
            let psi0 = cos8_packet(&spec, &ctx_ref.grid)?;
            let basis = ctx_ref.basis(&potential)?;
            let label = format!("scan width={width} v0={v0}");
            let snaps = ctx_ref.snapshots(&SpectralEvolution::new(&basis, &psi0)?, &label)?;
            let records = ctx_ref.olc_records(&snaps, &spec, potential.transmitted_cut())?;
            let (t_star, olc_max) = olc_global_max(&records)?;
            Ok(ScanPoint { width, v0, t_star, olc_max })
        })
        .collect::<Result<_>>()?;
    let free: Vec<(f64, f64, f64)> = cfg
        .width
        .par_iter()
        .map(|&width| -> Result<(f64, f64, f64)> {
            let spec = ctx_ref.scenario.packet_for_width(width);
            let psi0 = cos8_packet(&spec, &ctx_ref.grid)?;
            let snaps = ctx_ref.snapshots(&FreeEvolution::new(&psi0, ctx_ref.units)?, "scan free")?;
            let cut = shape.reshaped(0.0, width).transmitted_cut();
            let (t, f) = olc_global_max(&ctx_ref.olc_records(&snaps, &spec, cut)?)?;
            Ok((width, t, f))
        })
        .collect::<Result<_>>()?;
    let rows = results
        .iter()
        .map(|p| {
            let (_, ft, ff) = free
                .iter()
                .find(|(w, _, _)| *w == p.width)
                .copied()
                .expect("free baseline per width");
            vec![
                fmt_f64(p.width),
                fmt_f64(p.v0),
                fmt_f64(p.t_star),
                fmt_f64(p.olc_max),
                fmt_f64(ft),
                fmt_f64(ff),
            ]
        })
        .collect();
    ctx.csv(
        "scan.csv",
        &["width", "v0", "t_star", "olc_max", "free_t_star", "free_olc_max"],
        rows,
    )?;
    ctx.summary.insert("scan_points".into(), json!(results.len()));
    Ok(())
}

fn delta(ctx: &mut Context) -> Result<()> {
    let Some(cfg) = ctx.scenario.delta_check else {
        return Err(Error::Validation(vec![Issue::new(
            "delta_check",
            "the scenario has no [delta_check] section",
        )]));
    };
    let potential = ctx.scenario.potential;
    let dx = ctx.grid.dx();
    match potential {
        Potential::NarrowDelta { .. } => {}
        Potential::Rectangular { width, .. } if width <= dx * (1.0 + 1e-9) => {}
        _ => {
            return Err(Error::Validation(vec![Issue::new(
                "potential",
                format!("delta-check needs a narrow_delta barrier or a rectangular one no wider than dx = {dx}"),
            )]))
        }
    }
    let basis = ctx.basis(&potential)?;
    let n = nearest_even_state(&basis, cfg.target_energy)?;
    let cmp = compare_to_delta_limit(&basis, n, &ctx.grid, &ctx.units)?;
    let analytic = delta_limit_eigenfunction(cmp.eps_n, &ctx.grid, &ctx.units)?;
    let rows = basis
        .vector(n)
        .iter()
        .zip(&analytic)
        .enumerate()
        .map(|(k, (z, a))| {
            let fit = cmp.scale * a;
            vec![
                fmt_f64(ctx.grid.p(k)),
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(fit.re),
                fmt_f64(fit.im),
            ]
        })
        .collect();
    ctx.csv(
        "delta_check.csv",
        &["p", "numeric_re", "numeric_im", "analytic_re", "analytic_im"],
        rows,
    )?;
    ctx.summary.insert("delta_check".into(), serde_json::to_value(cmp)?);
    Ok(())
}

/// Resolves the scenario and runs `command`; convenience for callers that
/// start from a file.
pub fn execute_file(command: Command, path: &Path, overrides: &[String], opts: &RunOptions) -> Result<Manifest> {
    let scenario = Scenario::load(path, overrides)?;
    let mut opts = opts.clone();
    opts.scenario_file = Some(path.to_path_buf());
    execute(command, &scenario, &opts)
}
