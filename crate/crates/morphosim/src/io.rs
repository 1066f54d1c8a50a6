//! CSV and OBJ output.
//!
//! Floats are written in shortest round-trip form, so reruns with the same
//! inputs produce byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use morphosim_core::dynamics;
use morphosim_core::ellipsoid::{self, Trajectory};
use morphosim_core::geometry::{self, to_nodes, SurfaceMesh};
use morphosim_core::spectral;
use morphosim_core::stability::RegionScan;
use morphosim_core::{ModelParams, WallProfile};

pub type CsvWriter = csv::Writer<BufWriter<File>>;

pub fn csv_writer(path: &Path) -> io::Result<CsvWriter> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(
        path,
    )?)))
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn record<I, S>(w: &mut CsvWriter, fields: I) -> io::Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).map_err(csv_err)
}

fn num(v: f64) -> String {
    v.to_string()
}

/// `t,L,closure_defect,a_1..a_K,min_dphi,max_dphi`, one row per observation.
pub struct TimeSeriesWriter {
    out: CsvWriter,
    modes: usize,
}

impl TimeSeriesWriter {
    pub fn create(path: &Path, modes: usize) -> io::Result<Self> {
        let mut out = csv_writer(path)?;
        let mut header = vec!["t".to_string(), "L".into(), "closure_defect".into()];
        header.extend((1..=modes).map(|k| format!("a_{k}")));
        header.extend(["min_dphi".to_string(), "max_dphi".into()]);
        record(&mut out, &header)?;
        Ok(Self { out, modes })
    }

    /// Writes one row and returns the coefficients.
    pub fn write(&mut self, p: &WallProfile) -> io::Result<Vec<f64>> {
        let a = spectral::profile_modes(p, self.modes)
            .map_err(io::Error::other)?
            .values;
        let mut row = vec![num(p.time()), num(p.length()), num(p.closure_defect())];
        row.extend(a.iter().copied().map(num));
        row.extend([num(p.min_dphi()), num(p.max_dphi())]);
        record(&mut self.out, &row)?;
        Ok(a)
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// Node-wise geometry of a profile: `x,phi,dphi,r,z,kappa_s,kappa_theta,mu`.
/// `mu` is left empty when the density cannot be solved on this shape.
pub fn write_profile(path: &Path, p: &WallProfile, params: &ModelParams) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(
        &mut w,
        ["x", "phi", "dphi", "r", "z", "kappa_s", "kappa_theta", "mu"],
    )?;
    let grid = p.grid();
    let phi = p.phi_nodes();
    let dphi = p.dphi_nodes();
    let rz = geometry::generatrix(p);
    let c = geometry::curvatures(p);
    let mu = dynamics::solve_field(p, params)
        .ok()
        .map(|f| to_nodes(&f.mu));
    for i in 0..phi.len() {
        let mu_i = mu.as_ref().map(|m| num(m[i])).unwrap_or_default();
        record(
            &mut w,
            [
                num(grid.node(i)),
                num(phi[i]),
                num(dphi[i]),
                num(rz[i].0),
                num(rz[i].1),
                num(c.kappa_s[i]),
                num(c.kappa_theta[i]),
                mu_i,
            ],
        )?;
    }
    w.flush()
}

/// Wavefront OBJ with one-based face indices.
pub fn write_obj(path: &Path, mesh: &SurfaceMesh, comment: &str) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for line in comment.lines() {
        writeln!(w, "# {line}")?;
    }
    if mesh.closure_warning {
        writeln!(w, "# warning: closure defect {}", mesh.closure_defect)?;
    }
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v[0], v[1], v[2])?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    w.flush()
}

/// `d,sigma,stable,smallest_unstable_mode`.
pub fn write_region(path: &Path, scan: &RegionScan) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(&mut w, ["d", "sigma", "stable", "smallest_unstable_mode"])?;
    for c in &scan.cells {
        let mode = c
            .smallest_unstable
            .map(|k| k.to_string())
            .unwrap_or_default();
        record(
            &mut w,
            [num(c.d), num(c.sigma), (c.stable() as u8).to_string(), mode],
        )?;
    }
    w.flush()
}

/// `d,sigma_max_unstable`, empty where the whole column is stable.
pub fn write_boundary(path: &Path, scan: &RegionScan) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(&mut w, ["d", "sigma_max_unstable"])?;
    for (d, s) in &scan.boundary {
        record(&mut w, [num(*d), s.map(num).unwrap_or_default()])?;
    }
    w.flush()
}

/// Two-column curve `d,sigma`.
pub fn write_curve(path: &Path, points: &[(f64, f64)]) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(&mut w, ["d", "sigma"])?;
    for (d, s) in points {
        record(&mut w, [num(*d), num(*s)])?;
    }
    w.flush()
}

/// `t,a,c,delta,shape`.
pub fn write_ellipsoid(path: &Path, tr: &Trajectory) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(&mut w, ["t", "a", "c", "delta", "shape"])?;
    for s in &tr.states {
        let shape = ellipsoid::classify(s).as_str().to_string();
        record(
            &mut w,
            [
                num(s.t),
                num(s.a),
                num(s.c),
                num(ellipsoid::invariant(s)),
                shape,
            ],
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use morphosim_core::{Dim, Grid};

    #[test]
    fn profile_and_mesh_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = WallProfile::sphere(Grid::new(20).unwrap(), 2.0).unwrap();
        let params = ModelParams::quasi_stationary(Dim::Three, 0.1, 4.0, 0.5);
        let path = dir.path().join("p.csv");
        write_profile(&path, &p, &params).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,phi,dphi,r,z,kappa_s,kappa_theta,mu");
        assert_eq!(lines.len(), 1 + 22);
        assert!(lines[1].starts_with("0,0,"));

        let mesh = geometry::reconstruct(&p, 8).unwrap();
        let obj = dir.path().join("m.obj");
        write_obj(&obj, &mesh, "sphere").unwrap();
        let text = std::fs::read_to_string(&obj).unwrap();
        assert_eq!(
            text.lines().filter(|l| l.starts_with("v ")).count(),
            mesh.vertices.len()
        );
        let max_index = text
            .lines()
            .filter(|l| l.starts_with("f "))
            .flat_map(|l| {
                l[2..]
                    .split(' ')
                    .map(|v| v.parse::<usize>().unwrap())
                    .collect::<Vec<_>>()
            })
            .max()
            .unwrap();
        assert_eq!(max_index, mesh.vertices.len());
    }

    #[test]
    fn time_series_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ts.csv");
        let mut w = TimeSeriesWriter::create(&path, 3).unwrap();
        let p = WallProfile::with_cosine_modes(Grid::new(40).unwrap(), 1.0, &[(2, 0.1)]).unwrap();
        let a = w.write(&p).unwrap();
        w.finish().unwrap();
        assert!((a[1] - 0.1).abs() < 1e-12);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,L,closure_defect,a_1,a_2,a_3,min_dphi,max_dphi\n"));
    }
}
