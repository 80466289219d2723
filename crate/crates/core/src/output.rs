//! Output files: atomic writes, CSV tables, SVG line plots and the run
//! manifest.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::correlations::DiscordSample;
use crate::error::{Error, Result};

pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    mode: &'a str,
    config_sha256: String,
    resolved_config: &'a str,
    inputs: Vec<String>,
    outputs: &'a [OutputRecord],
}

/// Output directory that records every file it writes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<OutputRecord>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(OutputDir {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn records(&self) -> &[OutputRecord] {
        &self.written
    }

    /// Writes `name` through a temporary file in the same directory and a
    /// rename, so readers never see a partial file.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let target = self.root.join(name);
        write_atomic(&target, bytes)?;
        self.written.retain(|r| r.path != name);
        self.written.push(OutputRecord {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value)
            .map_err(|e| Error::InvalidArgument(format!("cannot serialize {name}: {e}")))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Writes the resolved config and then the manifest listing every file.
    pub fn finish(mut self, config: &RunConfig, inputs: &[PathBuf]) -> Result<Vec<OutputRecord>> {
        self.write(RESOLVED_CONFIG_FILE, config.to_json().as_bytes())?;
        let manifest = Manifest {
            mode: config.mode.map(|m| m.as_str()).unwrap_or("unknown"),
            config_sha256: config.sha256(),
            resolved_config: RESOLVED_CONFIG_FILE,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: &self.written,
        };
        let mut s = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        s.push('\n');
        write_atomic(&self.root.join(MANIFEST_FILE), s.as_bytes())?;
        Ok(self.written)
    }
}

pub fn write_atomic(target: &Path, bytes: &[u8]) -> Result<()> {
    let dir = target
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(target).map_err(|e| Error::io(target, e.error))?;
    Ok(())
}

/// `t_s,pair,discord_bits,entropy_marginal_bits,converged_flag`, one row
/// per sample.
pub fn discord_csv(samples: &[DiscordSample]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t_s", "pair", "discord_bits", "entropy_marginal_bits", "converged_flag"])
        .expect("in-memory write");
    for s in samples {
        w.write_record([
            format!("{:e}", s.t),
            s.pair.label(),
            format!("{:e}", s.result.discord),
            format!("{:e}", s.result.entropy_marginal),
            u8::from(s.result.converged).to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is ASCII")
}

pub struct Series<'a> {
    pub name: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Plain SVG document with one `<polyline>` per series, one vertex per
/// sample. Axes carry only their min and max ticks.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, m) = (640.0, 480.0, 60.0);
    let finite = |v: &&f64| v.is_finite();
    let bounds = |vals: &mut dyn Iterator<Item = &f64>| {
        let (lo, hi) = vals
            .filter(finite)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        match (lo.is_finite(), hi > lo) {
            (true, true) => (lo, hi),
            (true, false) => (lo - 0.5, hi + 0.5),
            _ => (0.0, 1.0),
        }
    };
    let (x0, x1) = bounds(&mut series.iter().flat_map(|s| s.x.iter()));
    let (y0, y1) = bounds(&mut series.iter().flat_map(|s| s.y.iter()));
    let px = |x: f64| {
        if x.is_finite() {
            m + (x - x0) / (x1 - x0) * (w - 2.0 * m)
        } else {
            m
        }
    };
    let py = |y: f64| {
        if y.is_finite() {
            h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m)
        } else {
            h - m
        }
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
        h - m,
        w - m
    );
    for (x, anchor, v) in [(m, "start", x0), (w - m, "end", x1)] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="{anchor}" font-size="11">{v:.4e}</text>"#,
            h - m + 16.0
        );
    }
    for (y, v) in [(h - m, y0), (m, y1)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" text-anchor="end" font-size="11">{v:.4e}</text>"#,
            m - 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
        w / 2.0,
        h - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = ser
            .x
            .iter()
            .zip(ser.y)
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-series="{}" fill="none" stroke="{colour}" stroke-width="1" points="{}"/>"#,
            escape(ser.name),
            points.join(" ")
        );
        if series.len() > 1 {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" fill="{colour}">{}</text>"#,
                w - m + 4.0,
                m + 14.0 * k as f64,
                escape(ser.name)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Vertex count of every `<polyline>` in an SVG produced by
/// [`line_plot_svg`].
pub fn polyline_point_counts(svg: &str) -> Vec<usize> {
    svg.lines()
        .filter(|l| l.starts_with("<polyline"))
        .filter_map(|l| l.split("points=\"").nth(1))
        .map(|p| p.trim_end_matches("\"/>").split_whitespace().count())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_vertex_per_sample() {
        let x: Vec<f64> = (0..57).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let svg = line_plot_svg(
            "t",
            "x",
            "y",
            &[
                Series {
                    name: "a",
                    x: &x,
                    y: &y,
                },
                Series {
                    name: "b<",
                    x: &x[..3],
                    y: &y[..3],
                },
            ],
        );
        assert_eq!(polyline_point_counts(&svg), vec![57, 3]);
        assert!(svg.contains("b&lt;"));
    }

    #[test]
    fn degenerate_axes_still_plot() {
        let svg = line_plot_svg(
            "flat",
            "x",
            "y",
            &[Series {
                name: "c",
                x: &[1.0, 1.0],
                y: &[f64::NAN, 2.0],
            }],
        );
        assert_eq!(polyline_point_counts(&svg), vec![2]);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn atomic_write_replaces_and_records() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path().join("nested")).unwrap();
        out.write("a.txt", b"one").unwrap();
        out.write("a.txt", b"two").unwrap();
        assert_eq!(std::fs::read(dir.path().join("nested/a.txt")).unwrap(), b"two");
        assert_eq!(out.records().len(), 1);
        assert_eq!(out.records()[0].bytes, 3);
        let leftovers = std::fs::read_dir(dir.path().join("nested")).unwrap().count();
        assert_eq!(leftovers, 1);
    }
}
