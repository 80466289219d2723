use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub v_g: f64,
    pub flux_over_phi0: f64,
    pub exp_phi1: f64,
    pub exp_n2: f64,
    pub exp_n5: Option<f64>,
    pub norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    /// Windows in which the feedback flux had to be pulled off the SQUID
    /// singularity.
    pub clamped_windows: usize,
}

const HEADER: [&str; 6] = ["t_s", "vg_volts", "flux_over_phi0", "exp_phi1", "exp_n2", "norm"];
const HEADER_COUPLED: [&str; 7] = [
    "t_s",
    "vg_volts",
    "flux_over_phi0",
    "exp_phi1",
    "exp_n2",
    "exp_n5",
    "norm",
];

impl Trajectory {
    pub fn is_coupled(&self) -> bool {
        self.rows.first().is_some_and(|r| r.exp_n5.is_some())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn max_norm_deviation(&self) -> f64 {
        self.rows.iter().map(|r| (r.norm - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn column(&self, f: impl Fn(&TrajectoryRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let coupled = self.is_coupled();
        let map = |e: csv::Error| Error::InvalidArgument(format!("CSV write failed: {e}"));
        if coupled {
            w.write_record(HEADER_COUPLED).map_err(map)?;
        } else {
            w.write_record(HEADER).map_err(map)?;
        }
        for r in &self.rows {
            let mut rec = vec![
                format!("{:e}", r.t),
                format!("{:e}", r.v_g),
                format!("{:e}", r.flux_over_phi0),
                format!("{:e}", r.exp_phi1),
                format!("{:e}", r.exp_n2),
            ];
            if coupled {
                rec.push(format!("{:e}", r.exp_n5.unwrap_or(f64::NAN)));
            }
            rec.push(format!("{:e}", r.norm));
            w.write_record(&rec).map_err(map)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("CSV write failed: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Reads a CSV written by [`Trajectory::write_csv`] (either header).
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let bad = |m: String| Error::config("trajectory", m);
        let headers = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        let coupled = if names == HEADER_COUPLED {
            true
        } else if names == HEADER {
            false
        } else {
            return Err(bad(format!("unexpected header {names:?}")));
        };
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
            rows.push(TrajectoryRow {
                t: vals[0],
                v_g: vals[1],
                flux_over_phi0: vals[2],
                exp_phi1: vals[3],
                exp_n2: vals[4],
                exp_n5: coupled.then(|| vals[5]),
                norm: vals[if coupled { 6 } else { 5 }],
            });
        }
        if rows.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(bad("time column must be strictly increasing".into()));
        }
        Ok(Trajectory {
            rows,
            clamped_windows: 0,
        })
    }
}
