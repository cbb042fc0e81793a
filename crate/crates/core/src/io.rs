//! Snapshot file format and CSV exports.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "NLS1"
//! 4       8     n_points        u64
//! 12      8     x_min           f64
//! 20      8     length          f64
//! 28      8     snapshot_count  u64
//! 36      8     dt              f64
//! 44      8     snapshot_every  u64
//! 52            snapshot_count × { time f64, n_points × (re f64, im f64) }
//! ```
//!
//! Values are stored bit-exactly, so a written trajectory reloads to
//! identical fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::analysis::{Histogram, ProfileMatch, RogueReport};
use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::Grid;
use crate::potential::SampledPotential;
use crate::solver::Trajectory;
use crate::C64;

pub const MAGIC: &[u8; 4] = b"NLS1";
pub const HEADER_LEN: usize = 52;

/// Contents of a snapshot file.
#[derive(Debug, Clone)]
pub struct SnapshotFile {
    pub grid: Arc<Grid>,
    pub dt: f64,
    pub snapshot_every: u64,
    pub snapshots: Vec<WaveField>,
}

impl SnapshotFile {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        SnapshotFile {
            grid: traj.grid().clone(),
            dt: traj.config.dt,
            snapshot_every: traj.config.snapshot_every,
            snapshots: traj.snapshots.clone(),
        }
    }
}

pub fn write_snapshots<W: Write>(
    mut w: W,
    grid: &Grid,
    dt: f64,
    snapshot_every: u64,
    snapshots: &[WaveField],
) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(grid.n_points() as u64).to_le_bytes())?;
    w.write_all(&grid.x_min().to_le_bytes())?;
    w.write_all(&grid.length().to_le_bytes())?;
    w.write_all(&(snapshots.len() as u64).to_le_bytes())?;
    w.write_all(&dt.to_le_bytes())?;
    w.write_all(&snapshot_every.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 + 16 * grid.n_points());
    for snap in snapshots {
        if snap.grid().as_ref() != grid {
            return Err(Error::Dimension(
                "snapshot grid differs from file grid".into(),
            ));
        }
        buf.clear();
        buf.extend_from_slice(&snap.time().to_le_bytes());
        for v in snap.values() {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    write_snapshots(
        w,
        traj.grid(),
        traj.config.dt,
        traj.config.snapshot_every,
        &traj.snapshots,
    )
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        let end = self
            .offset
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.offset..end];
                self.offset = end;
                Ok(s)
            }
            None => Err(Error::Format {
                offset: self.offset as u64,
                message: format!("truncated while reading {what}"),
            }),
        }
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn read_snapshots_from_bytes(bytes: &[u8]) -> Result<SnapshotFile> {
    let mut cur = Cursor { bytes, offset: 0 };
    if cur.take(4, "magic")? != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "bad magic, expected \"NLS1\"".into(),
        });
    }
    let n = cur.u64("n_points")?;
    let x_min = cur.f64("x_min")?;
    let length = cur.f64("length")?;
    let count = cur.u64("snapshot_count")?;
    let dt = cur.f64("dt")?;
    let snapshot_every = cur.u64("snapshot_every")?;

    let grid = Grid::new(n as usize, x_min, length).map_err(|e| Error::Format {
        offset: 4,
        message: e.to_string(),
    })?;
    let grid = Arc::new(grid);
    let per_snapshot = 8 + 16 * n as usize;
    let expected = (count as usize)
        .checked_mul(per_snapshot)
        .and_then(|b| b.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        let available = bytes.len().saturating_sub(HEADER_LEN);
        return Err(Error::Format {
            offset: (HEADER_LEN + available - available % per_snapshot) as u64,
            message: format!(
                "file holds {} bytes of snapshot data, header promises {count} snapshots of {per_snapshot} bytes",
                available
            ),
        });
    }

    let mut snapshots = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let start = cur.offset;
        let time = cur.f64("snapshot time")?;
        let raw = cur.take(16 * n as usize, "snapshot values")?;
        let values: Vec<C64> = raw
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        let snap = WaveField::new(grid.clone(), values, time).map_err(|e| Error::Format {
            offset: start as u64,
            message: e.to_string(),
        })?;
        snapshots.push(snap);
    }
    Ok(SnapshotFile {
        grid,
        dt,
        snapshot_every,
        snapshots,
    })
}

pub fn read_snapshots(path: &Path) -> Result<SnapshotFile> {
    read_snapshots_from_bytes(&std::fs::read(path)?)
}

/// `t,x,re,im,abs` for every sample of every snapshot.
pub fn write_trajectory_csv<W: Write>(mut w: W, snapshots: &[WaveField]) -> Result<()> {
    writeln!(w, "t,x,re,im,abs")?;
    for snap in snapshots {
        for (v, x) in snap.values().iter().zip(snap.grid().x()) {
            writeln!(w, "{},{},{},{},{}", snap.time(), x, v.re, v.im, v.norm())?;
        }
    }
    Ok(())
}

/// `x,m_base`
pub fn write_potential_csv<W: Write>(mut w: W, pot: &SampledPotential) -> Result<()> {
    writeln!(w, "x,m_base")?;
    for (x, m) in pot.grid().x().iter().zip(pot.base_values()) {
        writeln!(w, "{x},{m}")?;
    }
    Ok(())
}

pub fn write_histogram_csv<W: Write>(mut w: W, hist: &Histogram) -> Result<()> {
    writeln!(w, "bin_lo,bin_hi,count,density")?;
    let density = hist.density();
    for (i, edges) in hist.edges.windows(2).enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            edges[0], edges[1], hist.counts[i], density[i]
        )?;
    }
    Ok(())
}

/// One row per detected peak, with the rogue flag and, when scored, the
/// profile match against the scaled second-order soliton.
pub fn write_report_csv<W: Write>(mut w: W, report: &RogueReport) -> Result<()> {
    writeln!(
        w,
        "rank,x,amplitude,time,index,ratio_to_significant,rogue,b_factor,window_error"
    )?;
    for (rank, p) in report.peaks.iter().enumerate() {
        let score = report.match_scores.iter().find(|(q, _)| q.index == p.index);
        let (b, err) = match score {
            Some((_, m)) => (m.b_factor.to_string(), m.window_error.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            rank + 1,
            p.position_x,
            p.amplitude,
            p.snapshot_time,
            p.index,
            p.amplitude / report.significant_amplitude,
            report.is_rogue(p),
            b,
            err
        )?;
    }
    Ok(())
}

/// `x,numerical_abs,analytic_abs` over the comparison window.
pub fn write_profile_csv<W: Write>(mut w: W, m: &ProfileMatch) -> Result<()> {
    writeln!(w, "x,numerical_abs,analytic_abs")?;
    for ((x, n), r) in m.x.iter().zip(&m.numerical).zip(&m.reference) {
        writeln!(w, "{x},{n},{r}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sech_soliton, RationalOrder2, Solution};

    fn sample_file() -> (Arc<Grid>, Vec<WaveField>) {
        let g = Arc::new(Grid::new(32, -4.0, 8.0).unwrap());
        let snaps = vec![
            sech_soliton(&g, 0.0, 0.5).unwrap(),
            RationalOrder2.sample(&g, 0.25).unwrap(),
        ];
        (g, snaps)
    }

    fn encode(g: &Grid, snaps: &[WaveField]) -> Vec<u8> {
        let mut bytes = Vec::new();
        write_snapshots(&mut bytes, g, 1e-3, 250, snaps).unwrap();
        bytes
    }

    #[test]
    fn header_layout() {
        let (g, snaps) = sample_file();
        let bytes = encode(&g, &snaps);
        assert_eq!(&bytes[..4], b"NLS1");
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 32);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), -4.0);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), 8.0);
        assert_eq!(u64::from_le_bytes(bytes[28..36].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[36..44].try_into().unwrap()), 1e-3);
        assert_eq!(u64::from_le_bytes(bytes[44..52].try_into().unwrap()), 250);
        assert_eq!(bytes.len(), HEADER_LEN + 2 * (8 + 16 * 32));
        let first_re = f64::from_le_bytes(bytes[60..68].try_into().unwrap());
        assert_eq!(first_re, snaps[0].values()[0].re);
    }

    #[test]
    fn reload_is_bit_exact() {
        let (g, snaps) = sample_file();
        let back = read_snapshots_from_bytes(&encode(&g, &snaps)).unwrap();
        assert_eq!(back.grid.as_ref(), g.as_ref());
        assert_eq!(back.dt, 1e-3);
        assert_eq!(back.snapshot_every, 250);
        assert_eq!(back.snapshots, snaps);
    }

    #[test]
    fn corrupt_files() {
        let (g, snaps) = sample_file();
        let bytes = encode(&g, &snaps);

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            read_snapshots_from_bytes(&bad_magic),
            Err(Error::Format { offset: 0, .. })
        ));

        match read_snapshots_from_bytes(&bytes[..30]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 28),
            other => panic!("{other:?}"),
        }

        let truncated = &bytes[..bytes.len() - 5];
        match read_snapshots_from_bytes(truncated) {
            Err(Error::Format { offset, .. }) => {
                assert_eq!(offset as usize, HEADER_LEN + 8 + 16 * 32)
            }
            other => panic!("{other:?}"),
        }

        let mut bad_grid = bytes.clone();
        bad_grid[4..12].copy_from_slice(&3u64.to_le_bytes());
        assert!(matches!(
            read_snapshots_from_bytes(&bad_grid),
            Err(Error::Format { offset: 4, .. })
        ));

        let mut nan = bytes;
        nan[HEADER_LEN + 8..HEADER_LEN + 16].copy_from_slice(&f64::NAN.to_le_bytes());
        match read_snapshots_from_bytes(&nan) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset as usize, HEADER_LEN),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trajectory_csv_rows() {
        let (_, snaps) = sample_file();
        let mut out = Vec::new();
        write_trajectory_csv(&mut out, &snaps).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 32);
        assert_eq!(text.lines().next().unwrap(), "t,x,re,im,abs");
    }

    #[test]
    fn trajectory_file_round_trip() {
        let grid = Arc::new(Grid::new(64, -8.0, 16.0).unwrap());
        let initial = sech_soliton(&grid, 0.0, 0.5).unwrap();
        let cfg = crate::solver::SimulationConfig {
            t_end: 0.01,
            snapshot_every: 5,
            ..Default::default()
        };
        let traj = crate::solver::run(
            &initial,
            &crate::potential::PotentialSpec::single_rectangular(1.0),
            &cfg,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.nls");
        write_trajectory(&path, &traj).unwrap();
        let file = read_snapshots(&path).unwrap();
        assert_eq!(file.snapshot_every, 5);
        assert_eq!(file.dt, 1e-3);
        assert_eq!(file.snapshots.len(), traj.snapshots.len());
        for (a, b) in file.snapshots.iter().zip(&traj.snapshots) {
            assert_eq!(a.values(), b.values());
            assert_eq!(a.time(), b.time());
        }
        assert!(matches!(
            read_snapshots(&dir.path().join("missing.nls")),
            Err(Error::Io(_))
        ));
    }
}
