//! On-disk formats: raw field dumps with a sidecar text header, per-sample
//! CSV summaries of tracks, and the machine-readable check report.
//!
//! Report files are deterministic for a fixed config and build: timing and
//! other volatile data go on `#`-prefixed comment lines, every record line is
//! pure JSON of reproducible values. Strip the `#` lines to diff runs.

use crate::dist::distance_transform;
use crate::field::{ClosedSetMask, ScalarField, SpacetimeTrack};
use crate::grid::Grid;
use crate::harness::TheoremCheckReport;
use crate::Point;
use serde::{Deserialize, Serialize};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

/// Writes `<base>.bin` (little-endian f64, row-major with x fastest) and
/// `<base>.meta` (one line: dim, counts, origin, spacing, time).
pub fn write_field_dump(field: &ScalarField, base: &Path) -> std::io::Result<()> {
    let bin_path = base.with_extension("bin");
    let mut w = BufWriter::new(std::fs::File::create(bin_path)?);
    for v in &field.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let g = &field.grid;
    let meta = format!(
        "dim={} counts={},{},{} origin={},{},{} spacing={} time={}\n",
        g.dim,
        g.counts[0],
        g.counts[1],
        g.counts[2],
        g.origin.x,
        g.origin.y,
        g.origin.z,
        g.spacing,
        field.time
    );
    std::fs::write(base.with_extension("meta"), meta)
}

pub fn read_field_dump(base: &Path) -> std::io::Result<ScalarField> {
    let meta = std::fs::read_to_string(base.with_extension("meta"))?;
    let mut dim = 0usize;
    let mut counts = [0usize; 3];
    let mut origin = [0.0f64; 3];
    let mut spacing = 0.0f64;
    let mut time = 0.0f64;
    for tok in meta.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidData, "bad meta"))?;
        let parse_triple = |v: &str| -> Vec<f64> {
            v.split(',').filter_map(|s| s.parse().ok()).collect()
        };
        match key {
            "dim" => dim = val.parse().unwrap_or(0),
            "counts" => {
                let t = parse_triple(val);
                counts = [t[0] as usize, t[1] as usize, t[2] as usize];
            }
            "origin" => {
                let t = parse_triple(val);
                origin = [t[0], t[1], t[2]];
            }
            "spacing" => spacing = val.parse().unwrap_or(0.0),
            "time" => time = val.parse().unwrap_or(0.0),
            _ => {}
        }
    }
    let grid = if dim == 2 {
        Grid::new_2d([origin[0], origin[1]], spacing, counts[0], counts[1])
    } else {
        Grid::new_3d(origin, spacing, counts[0], counts[1], counts[2])
    };
    let mut bytes = Vec::new();
    std::fs::File::open(base.with_extension("bin"))?.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 8 {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("expected {} values, got {} bytes", grid.len(), bytes.len()),
        ));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(ScalarField { grid, values, time })
}

/// Marching-squares length of the zero set in 2-d; in 3-d, the area estimate
/// `|{|u| <= h}| h^3 / (2h)`.
pub fn interface_measure(field: &ScalarField) -> f64 {
    let g = &field.grid;
    let h = g.spacing;
    if g.dim == 3 {
        let band = field.values.iter().filter(|v| v.abs() <= h).count();
        return band as f64 * h * h * h / (2.0 * h);
    }
    let mut total = 0.0;
    let u = &field.values;
    for j in 0..g.counts[1] - 1 {
        for i in 0..g.counts[0] - 1 {
            let corners = [
                (g.index(i, j, 0), 0.0, 0.0),
                (g.index(i + 1, j, 0), 1.0, 0.0),
                (g.index(i + 1, j + 1, 0), 1.0, 1.0),
                (g.index(i, j + 1, 0), 0.0, 1.0),
            ];
            let mut pts: Vec<(f64, f64)> = Vec::with_capacity(4);
            for e in 0..4 {
                let (ia, xa, ya) = corners[e];
                let (ib, xb, yb) = corners[(e + 1) % 4];
                let (ua, ub) = (u[ia], u[ib]);
                if ua * ub < 0.0 {
                    let th = ua.abs() / (ua.abs() + ub.abs());
                    pts.push((xa + th * (xb - xa), ya + th * (yb - ya)));
                }
            }
            if pts.len() == 2 {
                let dx = pts[1].0 - pts[0].0;
                let dy = pts[1].1 - pts[0].1;
                total += (dx * dx + dy * dy).sqrt() * h;
            } else if pts.len() == 4 {
                // Saddle cell: resolve by pairing consecutive crossings.
                for pair in [(0usize, 1usize), (2, 3)] {
                    let dx = pts[pair.1].0 - pts[pair.0].0;
                    let dy = pts[pair.1].1 - pts[pair.0].1;
                    total += (dx * dx + dy * dy).sqrt() * h;
                }
            }
        }
    }
    total
}

/// Per-sample CSV: time, sublevel measure, interface measure, and the
/// distance to each registered probe set.
pub fn write_track_csv(
    track: &SpacetimeTrack,
    probes: &[(String, ClosedSetMask)],
    path: &Path,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let g = track.grid();
    let cell = g.spacing.powi(g.dim as i32);
    write!(w, "time,sublevel_measure,interface_measure")?;
    for (name, _) in probes {
        write!(w, ",dist_{name}")?;
    }
    writeln!(w)?;
    for i in 0..track.len() {
        let f = &track.samples[i];
        let mask = track.mask_at(i);
        let measure = mask.count() as f64 * cell;
        write!(w, "{},{},{}", f.time, measure, interface_measure(f))?;
        if !probes.is_empty() {
            if mask.is_empty() {
                for _ in probes {
                    write!(w, ",{}", g.sentinel())?;
                }
            } else {
                let d = distance_transform(&mask);
                for (_, probe) in probes {
                    let dist = probe
                        .nodes()
                        .map(|n| d.value(n))
                        .fold(f64::INFINITY, f64::min);
                    write!(w, ",{dist}")?;
                }
            }
        }
        writeln!(w)?;
    }
    w.flush()
}

/// One line of the report file; everything here must be reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub scenario: String,
    pub check: String,
    pub passed: bool,
    pub margin: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_point: Option<[f64; 3]>,
    pub detail: String,
}

impl CheckRecord {
    pub fn from_report(scenario: &str, rep: &TheoremCheckReport) -> Self {
        CheckRecord {
            scenario: scenario.to_string(),
            check: rep.theorem_id.to_string(),
            passed: rep.passed,
            margin: rep.margin,
            tolerance: rep.tolerance,
            witness_time: rep.witness.map(|(t, _)| t),
            witness_point: rep.witness.map(|(_, p)| [p.x, p.y, p.z]),
            detail: rep.detail.clone(),
        }
    }

    pub fn new(scenario: &str, check: &str, passed: bool, margin: f64, tolerance: f64) -> Self {
        CheckRecord {
            scenario: scenario.to_string(),
            check: check.to_string(),
            passed,
            margin,
            tolerance,
            witness_time: None,
            witness_point: None,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn with_witness(mut self, time: f64, point: Point) -> Self {
        self.witness_time = Some(time);
        self.witness_point = Some([point.x, point.y, point.z]);
        self
    }
}

/// Accumulates records plus volatile comments; the serialized report is
/// JSONL with `#` comment lines carrying runtimes.
#[derive(Debug, Default)]
pub struct ReportWriter {
    lines: Vec<String>,
    records: Vec<CheckRecord>,
}

impl ReportWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, record: CheckRecord, runtime_ms: u128) {
        self.lines.push(format!(
            "# runtime_ms={} scenario={} check={}",
            runtime_ms, record.scenario, record.check
        ));
        self.lines
            .push(serde_json::to_string(&record).expect("record serializes"));
        self.records.push(record);
    }

    pub fn records(&self) -> &[CheckRecord] {
        &self.records
    }

    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        std::fs::write(path, out)
    }

    /// Human summary table.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "{:<28} {:<22} {:>6} {:>12} {:>12}\n",
            "scenario", "check", "pass", "margin", "tolerance"
        ));
        for r in &self.records {
            s.push_str(&format!(
                "{:<28} {:<22} {:>6} {:>12.5} {:>12.5}\n",
                r.scenario,
                r.check,
                if r.passed { "ok" } else { "FAIL" },
                r.margin,
                r.tolerance
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MaskRepr;

    #[test]
    fn dump_roundtrip() {
        let g = Grid::new_2d([-1.0, 0.5], 0.125, 16, 8);
        let f = ScalarField::from_fn(g, 0.25, |p| p.x * 2.0 - p.y);
        let dir = std::env::temp_dir().join("setflow_dump_test");
        std::fs::create_dir_all(&dir).unwrap();
        let base = dir.join("field");
        write_field_dump(&f, &base).unwrap();
        let back = read_field_dump(&base).unwrap();
        assert!(back.grid.same_shape(&f.grid));
        assert_eq!(back.time, f.time);
        assert_eq!(back.values, f.values);
    }

    #[test]
    fn interface_measure_of_circle() {
        let h = 1.0 / 64.0;
        let g = Grid::from_box(2, &[-1.5, -1.5], &[1.5, 1.5], h);
        let f = ScalarField::from_fn(g, 0.0, |p| p.xy().norm() - 1.0);
        let len = interface_measure(&f);
        let want = 2.0 * std::f64::consts::PI;
        assert!((len - want).abs() < 0.05 * want, "length {len}");
    }

    #[test]
    fn report_lines_are_deterministic_modulo_comments() {
        let mut w1 = ReportWriter::new();
        let mut w2 = ReportWriter::new();
        let rec = CheckRecord::new("s", "Avoidance", true, 0.5, 0.0)
            .with_detail("gap 0.5")
            .with_witness(0.25, Point::new(1.0, 2.0, 0.0));
        w1.add(rec.clone(), 123);
        w2.add(rec, 45678);
        let strip = |w: &ReportWriter| -> Vec<String> {
            w.lines
                .iter()
                .filter(|l| !l.starts_with('#'))
                .cloned()
                .collect()
        };
        assert_eq!(strip(&w1), strip(&w2));
        assert!(w1.all_passed());
    }

    #[test]
    fn track_csv_has_row_per_sample() {
        let g = Grid::from_box(2, &[-1.0, -1.0], &[1.0, 1.0], 1.0 / 16.0);
        let times = [0.0, 0.1, 0.2];
        let track = SpacetimeTrack::from_fn(&g, &times, MaskRepr::Sublevel, |p, t| {
            p.xy().norm() - (0.5 - t)
        });
        let probe = ClosedSetMask::from_predicate(g.clone(), MaskRepr::Sublevel, |p| {
            (p.xy() - nalgebra::Vector2::new(0.8, 0.8)).norm() < 0.05
        });
        let dir = std::env::temp_dir().join("setflow_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("track.csv");
        write_track_csv(&track, &[("corner".into(), probe)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().next().unwrap().contains("dist_corner"));
    }
}
