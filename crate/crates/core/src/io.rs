//! Snapshot and series files.
//!
//! A snapshot is `name.csv` with header `r,re_u,im_u` and one row per node,
//! plus a sidecar `name.json` holding `{r_max, n, t, label}`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::grid::RadialGrid;
use crate::trajectory::Trajectory;

pub const SNAPSHOT_HEADER: &str = "r,re_u,im_u";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub r_max: f64,
    pub n: usize,
    pub t: f64,
    pub label: Option<String>,
}

/// Path of the JSON sidecar next to a snapshot CSV.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn snapshot_csv(u: &RadialField) -> String {
    let mut out = String::with_capacity(48 * u.values().len());
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for (z, r) in u.values().iter().zip(u.grid().nodes()) {
        // `{:e}` prints the shortest representation that round-trips.
        let _ = writeln!(out, "{r:e},{:e},{:e}", z.re, z.im);
    }
    out
}

pub fn write_snapshot(csv: &Path, u: &RadialField, t: f64) -> Result<()> {
    fs::write(csv, snapshot_csv(u))?;
    let meta = SnapshotMeta {
        r_max: u.grid().r_max(),
        n: u.grid().n(),
        t,
        label: u.label().map(str::to_string),
    };
    fs::write(sidecar_path(csv), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot read {what} from `{s}`")))
}

/// Reads a snapshot. Without a sidecar the grid is inferred from the node
/// column (`r_max = r_n (n + 1) / n`) and `t = 0`.
pub fn read_snapshot(csv: &Path) -> Result<(RadialField, SnapshotMeta)> {
    let text = fs::read_to_string(csv)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SNAPSHOT_HEADER => {}
        _ => {
            return Err(Error::Parse(format!("line 1: expected header `{SNAPSHOT_HEADER}`")));
        }
    }
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected 3 columns, found {}", i + 1, cols.len())));
        }
        radii.push(parse_f64(cols[0], i + 1, "r")?);
        values.push(Complex64::new(
            parse_f64(cols[1], i + 1, "re_u")?,
            parse_f64(cols[2], i + 1, "im_u")?,
        ));
    }
    let side = sidecar_path(csv);
    let meta = if side.exists() {
        let m: SnapshotMeta = serde_json::from_str(&fs::read_to_string(&side)?)?;
        m
    } else {
        let n = radii.len();
        let last = radii.last().copied().unwrap_or(0.0);
        SnapshotMeta { r_max: last * (n as f64 + 1.0) / n.max(1) as f64, n, t: 0.0, label: None }
    };
    if meta.n != values.len() {
        return Err(Error::Contract(format!(
            "snapshot has {} rows but its sidecar declares n = {}",
            values.len(),
            meta.n
        )));
    }
    let grid = RadialGrid::shared(meta.r_max, meta.n)?;
    for (j, (&r, &node)) in radii.iter().zip(grid.nodes()).enumerate() {
        if (r - node).abs() > 1e-9 * node.max(1.0) {
            return Err(Error::Contract(format!(
                "row {}: r = {r} does not match grid node {node}",
                j + 2
            )));
        }
    }
    let mut u = RadialField::new(grid, values)?;
    if let Some(l) = &meta.label {
        u = u.with_label(l.clone());
    }
    Ok((u, meta))
}

/// Header of the per-step series CSV for this trajectory's probe set.
pub fn series_header(traj: &Trajectory) -> String {
    let mut h = String::from("t,mass,energy,kinetic,l6_local");
    for r in &traj.extra_radii {
        let _ = write!(h, ",l6_r{r}");
    }
    if traj.morawetz_radius.is_some() {
        h.push_str(",M,main,err1,err2");
    }
    if traj.flux_radius.is_some() {
        h.push_str(",chi_l6,flux_boundary,flux_interior");
    }
    h.push_str(",tail_fraction");
    h
}

pub fn series_csv(traj: &Trajectory) -> String {
    let mut out = series_header(traj);
    out.push('\n');
    for s in &traj.series {
        let _ = write!(out, "{:e},{:e},{:e},{:e},{:e}", s.t, s.mass, s.energy, s.kinetic, s.l6_local);
        for v in &s.l6_extra {
            let _ = write!(out, ",{v:e}");
        }
        if traj.morawetz_radius.is_some() {
            match s.morawetz {
                Some(p) => {
                    let _ = write!(out, ",{:e},{:e},{:e},{:e}", p.m, p.main, p.err1, p.err2);
                }
                None => out.push_str(",,,,"),
            }
        }
        if traj.flux_radius.is_some() {
            match s.flux {
                Some(p) => {
                    let _ = write!(out, ",{:e},{:e},{:e}", p.chi_l6, p.boundary, p.interior);
                }
                None => out.push_str(",,,"),
            }
        }
        match s.tail_fraction {
            Some(f) => {
                let _ = writeln!(out, ",{f:e}");
            }
            None => out.push_str(",\n"),
        }
    }
    out
}

/// Writes the series CSV and every snapshot into `dir`
/// (`series.csv`, `snapshot_00000.csv`, ...).
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("series.csv"), series_csv(traj))?;
    for (i, (u, &t)) in traj.snapshots.iter().zip(&traj.times).enumerate() {
        write_snapshot(&dir.join(format!("snapshot_{i:05}.csv")), u, t)?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}
