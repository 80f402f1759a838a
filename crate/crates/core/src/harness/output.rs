//! CSV and manifest files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::run::{RunSummary, SensorMetrics};
use crate::error::{Error, Result};
use crate::selection::FrontPoint;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn mse_csv(s: &RunSummary) -> String {
    let mut out = String::from("step,mse,mean_selected,reliable_frac,diversity\n");
    for t in 0..s.mse.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            t + 1,
            format_float(s.mse[t]),
            format_float(s.mean_selected[t]),
            format_float(s.reliable_frac[t]),
            format_float(s.diversity[t]),
        );
    }
    out
}

/// Both reliability diagnostics and the weight-reset count per step.
pub fn reliability_csv(s: &RunSummary) -> String {
    let mut out = String::from("step,beyond_3sigma_frac,sensed_frac,weight_resets\n");
    for t in 0..s.mse.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t + 1,
            format_float(s.beyond_3sigma_frac[t]),
            format_float(s.sensed_frac[t]),
            s.weight_resets[t],
        );
    }
    out
}

/// Rows by ascending `f₂`.
pub fn front_csv(front: &[FrontPoint]) -> String {
    let mut pts: Vec<&FrontPoint> = front.iter().collect();
    pts.sort_by(|a, b| a.f2.total_cmp(&b.f2).then(a.f1.total_cmp(&b.f1)));
    let mut out = String::from("f1,f2,cardinality,mask_hex\n");
    for p in pts {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_float(p.f1),
            format_float(p.f2),
            p.mask.count(),
            p.mask.to_hex()
        );
    }
    out
}

/// Rows by ascending sensor id.
pub fn metrics_csv(rows: &[SensorMetrics]) -> String {
    let mut sorted: Vec<&SensorMetrics> = rows.iter().collect();
    sorted.sort_by_key(|r| r.sensor_id);
    let mut out = String::from("sensor_id,dist,p_s,fi_logdet_gain,mi_bits\n");
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.sensor_id,
            format_float(r.dist),
            format_float(r.p_s),
            format_float(r.fi_logdet_gain),
            format_float(r.mi_bits)
        );
    }
    out
}

/// The resolved configuration; feeding it back as `--config` replays the run.
pub fn manifest(config: &ExperimentConfig) -> String {
    format!(
        "# uwsn {} run manifest; replay with `uwsn simulate --config <this file>`\n{}",
        env!("CARGO_PKG_VERSION"),
        config.to_text()
    )
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes `mse.csv`, `reliability.csv`, one `front_<t>.csv` per step that has
/// a front (from trial 0), and `manifest.cfg`. Returns the paths written.
pub fn write_results(summary: &RunSummary, config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> Result<()> {
        let p = dir.join(name);
        write_file(&p, &text)?;
        written.push(p);
        Ok(())
    };
    put("mse.csv".into(), mse_csv(summary))?;
    put("reliability.csv".into(), reliability_csv(summary))?;
    for (t, front) in summary.fronts.iter().enumerate() {
        if let Some(f) = front {
            put(format!("front_{}.csv", t + 1), front_csv(f))?;
        }
    }
    put("manifest.cfg".into(), manifest(config))?;
    Ok(written)
}
