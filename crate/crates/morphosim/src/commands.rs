//! The four commands. Each writes its files plus `manifest.json` into an
//! output directory and returns the manifest.

use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;

use morphosim_core::dynamics::Simulation;
use morphosim_core::ellipsoid::{self, EllipsoidState};
use morphosim_core::geometry;
use morphosim_core::stability::{self, RegionScan};
use morphosim_core::{Dim, Error as CoreError, WallProfile};

use crate::config::{ConfigError, RunConfig, ScanConfig};
use crate::io::{self as out, TimeSeriesWriter};
use crate::manifest::{GridInfo, RunManifest, TimestepInfo};
use crate::verify::{self, CheckResult, Suite};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("{failed} of {total} verification checks failed")]
    Verification { failed: usize, total: usize },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Usage(_) => 2,
            Self::Numerical(_) => 3,
            Self::Verification { .. } => 4,
            Self::Io(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } | CoreError::LengthMismatch { .. } => {
                Self::Usage(e.to_string())
            }
            other => Self::Numerical(other),
        }
    }
}

/// Records the outcome in the manifest, writes it, and passes the result on.
fn finish(
    mut manifest: RunManifest,
    result: Result<(), CliError>,
) -> Result<RunManifest, CliError> {
    if let Err(e) = &result {
        manifest.exit_status = e.exit_code();
        manifest.error = Some(e.to_string());
    }
    manifest.write()?;
    result.map(|()| manifest)
}

fn profile_name(index: usize) -> String {
    format!("profiles/profile_{index:05}.csv")
}

fn mesh_name(index: usize) -> String {
    format!("meshes/mesh_{index:05}.obj")
}

/// Runs one simulation, writing the time series, profile snapshots and meshes.
pub fn simulate(cfg: &RunConfig, out_dir: &Path) -> Result<RunManifest, CliError> {
    fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest::new("simulate", out_dir);
    manifest.config = cfg.echo.clone();
    manifest.seed = Some(cfg.seed);
    let result = run_simulation(cfg, &mut manifest);
    finish(manifest, result)
}

fn run_simulation(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let sim_cfg = cfg.sim.clone();
    let params = sim_cfg.params;
    let mut sim = Simulation::new(sim_cfg.clone())?;
    let grid = *sim.state().grid();
    manifest.grid = Some(GridInfo {
        m: grid.m(),
        dx: grid.dx(),
    });
    let meshes = cfg.mesh_every > 0 && params.dim == Dim::Three;
    if cfg.snapshot_every > 0 {
        fs::create_dir_all(manifest.out_dir().join("profiles"))?;
    }
    if meshes {
        fs::create_dir_all(manifest.out_dir().join("meshes"))?;
    }

    let mut series = TimeSeriesWriter::create(&manifest.file("timeseries.csv"), sim_cfg.modes)?;
    let mut index = 0usize;
    let mut io_error: Option<io::Error> = None;
    let mut write_outputs = |p: &WallProfile, manifest: &mut RunManifest| -> io::Result<()> {
        series.write(p)?;
        if cfg.snapshot_every > 0 && index.is_multiple_of(cfg.snapshot_every) {
            out::write_profile(&manifest.file(&profile_name(index)), p, &params)?;
        }
        if meshes && index.is_multiple_of(cfg.mesh_every) {
            let mesh = geometry::reconstruct(p, cfg.mesh_segments).map_err(io::Error::other)?;
            if mesh.closure_warning {
                manifest.warn(format!(
                    "closure defect {:.2e} at t = {}",
                    mesh.closure_defect,
                    p.time()
                ));
            }
            let comment = format!("t = {}\nL = {}", p.time(), p.length());
            out::write_obj(&manifest.file(&mesh_name(index)), &mesh, &comment)?;
        }
        index += 1;
        Ok(())
    };

    let outcome = sim.run(|p| {
        if io_error.is_none() {
            if let Err(e) = write_outputs(p, manifest) {
                io_error = Some(e);
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e.into());
    }
    series.finish()?;
    let summary = sim.summary();
    manifest.timestep = Some(TimestepInfo {
        cfl: sim_cfg.control.cfl,
        max_dt: sim_cfg.control.max_dt,
        diffusion_number: sim_cfg.control.diffusion_number,
        steps: summary.steps,
    });
    if summary.closure_warning {
        manifest.warn(format!(
            "closure defect reached {:.2e}",
            summary.max_closure_defect
        ));
    }
    if let Err(e) = outcome {
        if let CoreError::ParametrizationLoss { .. } = e {
            manifest.warn(format!("loss of parametrization: {e}"));
        }
        // keep the last valid state for inspection
        out::write_profile(&manifest.file("final_profile.csv"), sim.state(), &params)?;
        return Err(CliError::Numerical(e));
    }
    out::write_profile(&manifest.file("final_profile.csv"), sim.state(), &params)?;
    if meshes {
        let mesh = geometry::reconstruct(sim.state(), cfg.mesh_segments)?;
        let comment = format!(
            "final state\nt = {}\nL = {}",
            sim.state().time(),
            sim.state().length()
        );
        out::write_obj(&manifest.file("final_mesh.obj"), &mesh, &comment)?;
    }
    Ok(())
}

/// Region scan of one Poisson ratio, rows computed in parallel.
pub fn scan_region(dim: Dim, nu: f64, cfg: &ScanConfig) -> RegionScan {
    let (dr, sr) = (cfg.d_range, cfg.sigma_range);
    let cells = (0..dr.count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let d = dr.value(i);
            sr.values()
                .map(move |s| stability::classify(dim, nu, d, s))
                .collect::<Vec<_>>()
        })
        .collect();
    RegionScan::from_cells(dim, nu, dr, sr, cells)
}

/// Summary line of one scanned Poisson ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSummary {
    pub nu: f64,
    pub unstable_cells: usize,
    pub necessary_violations: usize,
    pub monotonicity_exceptions: usize,
}

pub fn stability_scan(
    cfg: &ScanConfig,
    out_dir: &Path,
) -> Result<(RunManifest, Vec<ScanSummary>), CliError> {
    cfg.validate().map_err(CliError::Usage)?;
    fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest::new("stability", out_dir);
    manifest.config = [
        (
            "dim".to_string(),
            if cfg.dim == Dim::Two { "2" } else { "3" }.to_string(),
        ),
        (
            "nu".into(),
            cfg.nus
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        ),
        (
            "d_range".into(),
            format!(
                "{}:{}:{}",
                cfg.d_range.start, cfg.d_range.end, cfg.d_range.count
            ),
        ),
        (
            "sigma_range".into(),
            format!(
                "{}:{}:{}",
                cfg.sigma_range.start, cfg.sigma_range.end, cfg.sigma_range.count
            ),
        ),
    ]
    .into_iter()
    .collect();

    let scans: Vec<RegionScan> = cfg
        .nus
        .par_iter()
        .map(|&nu| scan_region(cfg.dim, nu, cfg))
        .collect();
    let mut summaries = Vec::new();
    let result = (|| -> Result<(), CliError> {
        let mut table = out::csv_writer(&manifest.file("summary.csv"))?;
        table
            .write_record([
                "nu",
                "unstable_cells",
                "necessary_violations",
                "monotonicity_exceptions",
            ])
            .map_err(io::Error::other)?;
        for scan in &scans {
            let tag = format!("nu{}", scan.nu);
            out::write_region(&manifest.file(&format!("region_{tag}.csv")), scan)?;
            out::write_boundary(&manifest.file(&format!("boundary_{tag}.csv")), scan)?;
            out::write_curve(
                &manifest.file(&format!("root_gap_{tag}.csv")),
                &scan.root_gap_locus,
            )?;
            let curve = stability::necessary_condition_curve(cfg.dim, scan.nu, cfg.sigma_range);
            out::write_curve(&manifest.file(&format!("necessary_{tag}.csv")), &curve)?;
            let s = ScanSummary {
                nu: scan.nu,
                unstable_cells: scan.unstable_count(),
                necessary_violations: scan.necessary_condition_violations().len(),
                monotonicity_exceptions: scan.monotonicity_exceptions(),
            };
            if s.necessary_violations > 0 {
                manifest.warn(format!(
                    "nu = {}: {} cells violate the necessary condition",
                    s.nu, s.necessary_violations
                ));
            }
            if s.monotonicity_exceptions > 0 {
                manifest.warn(format!(
                    "nu = {}: {} monotonicity exceptions",
                    s.nu, s.monotonicity_exceptions
                ));
            }
            table
                .write_record([
                    s.nu.to_string(),
                    s.unstable_cells.to_string(),
                    s.necessary_violations.to_string(),
                    s.monotonicity_exceptions.to_string(),
                ])
                .map_err(io::Error::other)?;
            summaries.push(s);
        }
        table.flush()?;
        Ok(())
    })();
    finish(manifest, result).map(|m| (m, summaries))
}

/// Runs the verification suite and writes `verify.csv`. Failing checks give
/// [`CliError::Verification`] after the table has been written.
pub fn run_verify(
    suite: Suite,
    jobs: usize,
    out_dir: &Path,
) -> Result<(RunManifest, Vec<CheckResult>), CliError> {
    fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest::new("verify", out_dir);
    manifest
        .config
        .insert("suite".into(), format!("{suite:?}").to_lowercase());
    manifest.config.insert("jobs".into(), jobs.to_string());
    let results = verify::run(suite, jobs);
    let result = (|| -> Result<(), CliError> {
        let mut w = out::csv_writer(&manifest.file("verify.csv"))?;
        w.write_record(["criterion", "name", "passed", "seconds", "detail"])
            .map_err(io::Error::other)?;
        for r in &results {
            w.write_record([
                r.criterion.to_string(),
                r.name.to_string(),
                r.passed.to_string(),
                format!("{:.3}", r.seconds),
                r.detail.clone(),
            ])
            .map_err(io::Error::other)?;
        }
        w.flush()?;
        let failed = results.iter().filter(|r| !r.passed).count();
        if failed > 0 {
            return Err(CliError::Verification {
                failed,
                total: results.len(),
            });
        }
        Ok(())
    })();
    // a failed check still leaves a complete manifest and table behind
    match finish(manifest, result) {
        Ok(m) => Ok((m, results)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidArgs {
    pub a: f64,
    pub c: f64,
    pub dt: f64,
    pub t_end: f64,
    pub ceiling: f64,
}

pub fn ellipsoid_run(args: EllipsoidArgs, out_dir: &Path) -> Result<RunManifest, CliError> {
    let start = EllipsoidState::new(args.a, args.c)?;
    fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest::new("ellipsoid", out_dir);
    for (k, v) in [
        ("a", args.a),
        ("c", args.c),
        ("dt", args.dt),
        ("t_end", args.t_end),
        ("ceiling", args.ceiling),
    ] {
        manifest.config.insert(k.into(), v.to_string());
    }
    let result = (|| -> Result<(), CliError> {
        let tr = ellipsoid::integrate(start, args.dt, args.t_end, args.ceiling)?;
        out::write_ellipsoid(&manifest.file("ellipsoid.csv"), &tr)?;
        let shape = ellipsoid::classify(&start).as_str();
        manifest.config.insert("shape".into(), shape.into());
        if let Some(t) = tr.blow_up {
            manifest.warn(format!("c reached the ceiling {} at t = {t}", args.ceiling));
        }
        Ok(())
    })();
    finish(manifest, result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(
            CliError::from(CoreError::InvalidParameter {
                name: "m",
                reason: "x"
            })
            .exit_code(),
            2
        );
        let loss = CoreError::ParametrizationLoss {
            cell: 1,
            value: -1.0,
            time: 0.0,
        };
        assert_eq!(CliError::from(loss).exit_code(), 3);
        assert_eq!(
            CliError::Verification {
                failed: 1,
                total: 2
            }
            .exit_code(),
            4
        );
    }

    #[test]
    fn simulate_writes_everything_it_lists() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse("sigma = 0.1\nm = 30\nt_end = 0.5\noutput_interval = 0.1\nsnapshot_every = 2\nmesh_every = 5\nmesh_segments = 8\n").unwrap();
        let m = simulate(&cfg, dir.path()).unwrap();
        for f in &m.files {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let mut on_disk = Vec::new();
        for entry in walk(dir.path()) {
            on_disk.push(
                entry
                    .strip_prefix(dir.path())
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/"),
            );
        }
        on_disk.sort();
        let mut listed = m.files.clone();
        listed.sort();
        assert_eq!(on_disk, listed);
        assert!(listed.contains(&"final_mesh.obj".to_string()));
        assert!(listed.contains(&"profiles/profile_00004.csv".to_string()));
    }

    fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
        let mut out = Vec::new();
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                out.extend(walk(&p));
            } else {
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn parametrization_loss_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse("dim = 2\nsigma = 0.01\nd = 8\nm = 40\nt_end = 50\ninitial = modes\nperturbation = 2:2.5\n").unwrap();
        let err = simulate(&cfg, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
                .unwrap();
        assert_eq!(v["exit_status"], 3);
        assert!(v["error"].as_str().unwrap().contains("numerical"));
    }

    #[test]
    fn stability_scan_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScanConfig::parse("nu = 0.1, 0.5\nd_range = 2:8:12\nsigma_range = 0.01:0.5:12\n")
            .unwrap();
        let (m, s) = stability_scan(&cfg, dir.path()).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|x| x.necessary_violations == 0));
        // the necessary condition tightens as nu grows
        assert!(s[1].unstable_cells < s[0].unstable_cells);
        assert!(m.files.contains(&"region_nu0.5.csv".to_string()));
    }

    #[test]
    fn ellipsoid_csv() {
        let dir = tempfile::tempdir().unwrap();
        let args = EllipsoidArgs {
            a: 1.0,
            c: 2.0,
            dt: 1e-3,
            t_end: 5.0,
            ceiling: 100.0,
        };
        let m = ellipsoid_run(args, dir.path()).unwrap();
        assert_eq!(m.config["shape"], "cigar");
        assert_eq!(m.warnings.len(), 1);
        let text = fs::read_to_string(dir.path().join("ellipsoid.csv")).unwrap();
        assert!(text.starts_with("t,a,c,delta,shape\n0,1,2,"));
    }
}
