//! CSV emission for sweep records and spectrum dumps.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use beamform_core::array::{generate_snapshots, steering_vector, SourceSpec};
use beamform_core::covariance::{meps_power, ImplicitSampleCovariance};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ScenarioConfig;
use crate::runner::{run_seed, SinrRecord};
use crate::HarnessError;

pub const RECORD_HEADER: [&str; 7] = [
    "scenario",
    "method",
    "snr_db",
    "snapshots",
    "run",
    "sinr_db",
    "converged",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_records<W: Write>(records: &[SinrRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.scenario.clone(),
            r.method.clone(),
            format_float(r.snr_db),
            r.snapshots.to_string(),
            r.run_index.to_string(),
            format_float(r.sinr_db),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the header and one row per record, in the given order.
pub fn emit_csv(records: &[SinrRecord], path: &Path) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_records(records, file).map_err(csv_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<SinrRecord>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    rdr.deserialize()
        .collect::<Result<Vec<SinrRecord>, _>>()
        .map_err(csv_err(path))
}

/// MEPS curve `(theta_deg, power_db)` on a 1 degree grid for run 0 of the
/// scenario at its configured SNR and snapshot count.
pub fn spectrum_curve(cfg: &ScenarioConfig) -> Result<Vec<(f64, f64)>, HarnessError> {
    cfg.validate()?;
    let snr = cfg.desired.power_db;
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(cfg.base_seed, snr, cfg.snapshots, 0));
    let desired = SourceSpec {
        doa_deg: cfg.desired.doa_deg,
        power_db: snr,
    };
    let scene = generate_snapshots(
        &cfg.geometry,
        &desired,
        &cfg.interferers,
        &cfg.mismatch,
        cfg.snapshots,
        &mut rng,
    )?;
    let cov = if cfg.snapshots < cfg.geometry.num_sensors {
        ImplicitSampleCovariance::with_safety_loading(&scene.snapshots)
    } else {
        ImplicitSampleCovariance::new(&scene.snapshots)
    };
    let bf = cfg.beamformer();
    let sol = bf.meps_solver.solve_best_effort(&cov)?.solution;
    (-90..=90)
        .map(|deg| {
            let theta = f64::from(deg);
            let a = steering_vector(&cfg.geometry, theta)?;
            Ok((theta, 10.0 * meps_power(&sol, &a)?.log10()))
        })
        .collect()
}

pub fn emit_spectrum_csv(curve: &[(f64, f64)], path: &Path) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    let write = |w: &mut csv::Writer<File>| -> csv::Result<()> {
        w.write_record(["theta_deg", "power_db"])?;
        for &(theta, p) in curve {
            w.write_record([theta.to_string(), format_float(p)])?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(csv_err(path))
}
