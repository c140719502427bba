//! CSV and plot-data writers.
//!
//! Floats are written with `{}` (shortest representation that round-trips), so
//! identical runs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dynamics::{Model, Points};
use crate::error::{Error, Result};
use crate::graph::{build_digraph, fiedler_value, is_r_densely_packed};
use crate::integrate::{Sample, TrajectoryRecord};

pub const TRAJECTORY_HEADER: &str = "t,id,x0,x1,v0,v1,cluster";
pub const DIAGNOSTICS_HEADER: &str = "t,vmax,mom0,mom1,n_clusters";
pub const CLUSTERS_HEADER: &str = "t,cluster_id,size,is_delta_packed,lambda2";

fn component(v: &[f64], k: usize) -> String {
    v.get(k).map(|c| c.to_string()).unwrap_or_default()
}

pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let mut out = format!("{TRAJECTORY_HEADER}\n");
    for s in &record.samples {
        for i in 0..s.state.len() {
            let (x, v) = (s.state.position(i), s.state.velocity(i));
            let _ = writeln!(
                out,
                "{},{i},{},{},{},{},{}",
                s.t,
                component(x, 0),
                component(x, 1),
                component(v, 0),
                component(v, 1),
                s.labels.labels[i]
            );
        }
    }
    out
}

pub fn diagnostics_csv(record: &TrajectoryRecord) -> String {
    let mut out = format!("{DIAGNOSTICS_HEADER}\n");
    for s in &record.samples {
        let d = &s.diagnostics;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.t,
            d.vmax,
            component(&d.momentum, 0),
            component(&d.momentum, 1),
            d.n_clusters
        );
    }
    out
}

/// One cluster of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRow {
    pub t: f64,
    pub cluster_id: usize,
    pub size: usize,
    /// `None` for models without a density threshold.
    pub is_delta_packed: Option<bool>,
    /// `None` when the cluster's subgraph is asymmetric or a singleton.
    pub lambda2: Option<f64>,
}

pub fn cluster_rows(record: &TrajectoryRecord, sample: &Sample) -> Result<Vec<ClusterRow>> {
    let p = &record.params;
    let g = build_digraph(&sample.table, p.m_policy, p.kappa, p.n)?;
    let points = Points::new(&sample.topology_positions, sample.state.dim());
    let mut rows = Vec::new();
    for members in sample.labels.clusters() {
        let is_delta_packed = match (p.model, p.delta, p.m) {
            (Model::Di, Some(delta), Some(m)) => {
                Some(is_r_densely_packed(points, &members, delta, m, &record.domain)?.is_packed)
            }
            _ => None,
        };
        let lambda2 = if members.len() >= 2 && g.is_symmetric_on(&members) {
            Some(fiedler_value(&g, &members)?)
        } else {
            None
        };
        rows.push(ClusterRow {
            t: sample.t,
            cluster_id: members[0],
            size: members.len(),
            is_delta_packed,
            lambda2,
        });
    }
    Ok(rows)
}

pub fn clusters_csv(record: &TrajectoryRecord) -> Result<String> {
    let mut out = format!("{CLUSTERS_HEADER}\n");
    for s in &record.samples {
        for r in cluster_rows(record, s)? {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.t,
                r.cluster_id,
                r.size,
                r.is_delta_packed.map(|b| b.to_string()).unwrap_or_default(),
                r.lambda2.map(|l| l.to_string()).unwrap_or_default()
            );
        }
    }
    Ok(out)
}

/// Tab-separated `(t, V)` columns.
pub fn velocity_diameter_dat(record: &TrajectoryRecord) -> String {
    let mut out = String::from("# t\tV\n");
    for s in &record.samples {
        let _ = writeln!(out, "{}\t{}", s.t, s.diagnostics.vmax);
    }
    out
}

/// Tab-separated `(t, momentum_x)` columns.
pub fn momentum_dat(record: &TrajectoryRecord) -> String {
    let mut out = String::from("# t\tmomentum_x\n");
    for s in &record.samples {
        let _ = writeln!(out, "{}\t{}", s.t, component(&s.diagnostics.momentum, 0));
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `v.dat` and `momentum.dat` into `dir`.
pub fn write_plot_data(record: &TrajectoryRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let files = [
        (dir.join("v.dat"), velocity_diameter_dat(record)),
        (dir.join("momentum.dat"), momentum_dat(record)),
    ];
    files
        .into_iter()
        .map(|(path, text)| write_file(&path, &text).map(|_| path))
        .collect()
}

/// Which CSV files a run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordToggles {
    pub trajectory: bool,
    pub diagnostics: bool,
    pub clusters: bool,
}

impl Default for RecordToggles {
    fn default() -> Self {
        RecordToggles {
            trajectory: true,
            diagnostics: true,
            clusters: true,
        }
    }
}

/// Writes the enabled CSVs and the plot data into `dir`.
pub fn write_run(record: &TrajectoryRecord, dir: &Path, toggles: RecordToggles) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    if toggles.trajectory {
        let path = dir.join("trajectory.csv");
        write_file(&path, &trajectory_csv(record))?;
        written.push(path);
    }
    if toggles.diagnostics {
        let path = dir.join("diagnostics.csv");
        write_file(&path, &diagnostics_csv(record))?;
        written.push(path);
    }
    if toggles.clusters {
        let path = dir.join("clusters.csv");
        write_file(&path, &clusters_csv(record)?)?;
        written.push(path);
    }
    written.extend(write_plot_data(record, dir)?);
    Ok(written)
}
