//! Report and series export: trajectory CSV, raw field snapshots with a JSON
//! sidecar, and atomically written JSON reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::solver::{GridSpec, Trajectory};

pub const TRAJECTORY_HEADER: &str = "time,mean,l1_to_mean,l2,maxabs,dissipation_step";

/// Write `contents` to a temporary sibling, then rename over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.snapshots {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.time, s.mean, s.l1_to_mean, s.l2, s.maxabs, s.dissipation_step
        ));
    }
    out
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    write_atomic(path, trajectory_csv(traj).as_bytes())
}

/// Generic CSV from a header and rows of numbers.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct FieldSidecar {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    /// Values per snapshot; snapshots are stored back to back.
    pub values_per_snapshot: usize,
    pub dtype: String,
    pub order: String,
    pub data_file: String,
}

/// Stored fields as `<stem>.bin` (little-endian f64, row-major, snapshots
/// concatenated) plus `<stem>.json`. Returns the sidecar.
pub fn write_fields(dir: &Path, stem: &str, traj: &Trajectory) -> Result<FieldSidecar> {
    let mut bytes = Vec::with_capacity(traj.fields.len() * traj.config.grid.len() * 8);
    for f in &traj.fields {
        for v in f.values() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let data_file = format!("{stem}.bin");
    write_atomic(&dir.join(&data_file), &bytes)?;
    let sidecar = FieldSidecar {
        grid: traj.config.grid.clone(),
        times: traj.times().into_iter().take(traj.fields.len()).collect(),
        values_per_snapshot: traj.config.grid.len(),
        dtype: "f64-le".into(),
        order: "row-major".into(),
        data_file,
    };
    write_json(&dir.join(format!("{stem}.json")), &sidecar)?;
    Ok(sidecar)
}

/// Read back a block written by [`write_fields`].
pub fn read_fields(dir: &Path, stem: &str) -> Result<(FieldSidecar, Vec<Vec<f64>>)> {
    let sidecar: FieldSidecar = serde_json::from_slice(&fs::read(dir.join(format!("{stem}.json")))?)?;
    let bytes = fs::read(dir.join(&sidecar.data_file))?;
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let per = sidecar.values_per_snapshot.max(1);
    Ok((sidecar, vals.chunks(per).map(|c| c.to_vec()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ap::ApSignal;
    use crate::model::gallery;
    use crate::solver::{Solver, SolverConfig};

    #[test]
    fn fields_round_trip() {
        let mut c = SolverConfig::new(gallery::burgers_1d(1.0), GridSpec::uniform(1, 1.0, 16).unwrap(), 0.1);
        c.store_fields = true;
        c.diagnostic_stride = 2;
        let tr = Solver::new(c).unwrap().run(&ApSignal::sine(vec![1.0], 0.5, 0.0)).unwrap();
        let dir = std::env::temp_dir().join(format!("baplab-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let side = write_fields(&dir, "u", &tr).unwrap();
        let (back, vals) = read_fields(&dir, "u").unwrap();
        assert_eq!(side, back);
        assert_eq!(vals.len(), tr.fields.len());
        for (v, f) in vals.iter().zip(&tr.fields) {
            assert_eq!(v.as_slice(), f.values());
        }
        let csv = trajectory_csv(&tr);
        assert_eq!(csv.lines().count(), tr.snapshots.len() + 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
