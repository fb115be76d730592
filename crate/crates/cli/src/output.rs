//! Trace, metrics, and plot-data writers.
//!
//! `trace.csv` carries the full per-step record with a fixed 14-column
//! schema and 9-significant-digit decimal formatting, so identical runs
//! produce byte-identical files. `metrics.txt` is `name=value` with six
//! fixed decimals. The `.dat` files are gnuplot-ready: two space-separated
//! columns per row, two blocks (reference first, then the recorded signal)
//! separated by a double blank line for `index`-based plotting.

use std::fs::File;
use std::io::{BufWriter, Result, Write};
use std::path::Path;

use diffdrive_core::kinematics::Pose;
use diffdrive_core::simulation::SimTrace;

/// Column order of `trace.csv`.
pub const TRACE_HEADER: &str =
    "t,ref_wr,ref_wl,true_wr,true_wl,meas_wr,meas_wl,est_wr,est_wl,pwm_r,pwm_l,x,y,phi";

/// Fixed 9-significant-digit decimal formatting.
///
/// The precision is chosen per value from its magnitude, so the output is a
/// pure function of the bits of `x`, which is what the byte-reproducibility
/// contract of `trace.csv` rests on.
pub fn fmt_sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.000000000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let precision = (8 - magnitude).max(0) as usize;
    format!("{x:.precision$}")
}

pub fn write_trace_csv(path: &Path, trace: &SimTrace) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.records {
        let fields = [
            r.t_s, r.ref_wr, r.ref_wl, r.true_wr, r.true_wl, r.meas_wr, r.meas_wl, r.est_wr,
            r.est_wl, r.pwm_r, r.pwm_l, r.pose.x_m, r.pose.y_m, r.pose.phi_rad,
        ];
        let line: Vec<String> = fields.iter().map(|&v| fmt_sig9(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()
}

pub fn write_metrics(path: &Path, entries: &[(&str, f64)]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (name, value) in entries {
        writeln!(out, "{name}={value:.6}")?;
    }
    out.flush()
}

/// Which wheel a `speed_*.dat` file describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wheel {
    Right,
    Left,
}

/// Reference speed (block 0) and estimator output (block 1) over time for
/// one wheel.
pub fn write_speed_dat(path: &Path, trace: &SimTrace, wheel: Wheel) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in &trace.records {
        let reference = match wheel {
            Wheel::Right => r.ref_wr,
            Wheel::Left => r.ref_wl,
        };
        writeln!(out, "{:.6} {:.6}", r.t_s, reference)?;
    }
    writeln!(out)?;
    writeln!(out)?;
    for r in &trace.records {
        let estimate = match wheel {
            Wheel::Right => r.est_wr,
            Wheel::Left => r.est_wl,
        };
        writeln!(out, "{:.6} {:.6}", r.t_s, estimate)?;
    }
    out.flush()
}

/// Commanded path (block 0) and actual path (block 1) as x-y pairs.
pub fn write_path_dat(path: &Path, reference: &[Pose], trace: &SimTrace) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for pose in reference {
        writeln!(out, "{:.6} {:.6}", pose.x_m, pose.y_m)?;
    }
    writeln!(out)?;
    writeln!(out)?;
    for r in &trace.records {
        writeln!(out, "{:.6} {:.6}", r.pose.x_m, r.pose.y_m)?;
    }
    out.flush()
}
