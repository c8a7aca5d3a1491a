use beamform_core::array::{generate_snapshots, steering_vector, SourceSpec};
use beamform_core::dense::smi_weights;
use beamform_core::metrics::output_sinr;
use beamform_core::npic::MepsNpicCg;
use beamform_core::{ComplexVector, Result as CoreResult};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Method, ScenarioConfig};
use crate::HarnessError;

/// One Monte Carlo measurement. Failed solves carry `sinr_db = NaN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrRecord {
    pub scenario: String,
    pub method: String,
    pub snr_db: f64,
    pub snapshots: usize,
    #[serde(rename = "run")]
    pub run_index: usize,
    pub sinr_db: f64,
    pub converged: bool,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-run RNG seed, a stable function of the sweep coordinates.
pub fn run_seed(base_seed: u64, snr_db: f64, snapshots: usize, run_index: usize) -> u64 {
    let h = splitmix64(snr_db.to_bits());
    let h = splitmix64(h ^ snapshots as u64);
    let h = splitmix64(h ^ run_index as u64);
    base_seed ^ h
}

fn meps_weights(
    bf: &MepsNpicCg,
    snapshots: &beamform_core::array::SnapshotBatch,
    nominal: &[beamform_core::C64],
) -> CoreResult<(ComplexVector, bool)> {
    let out = bf.beamform(snapshots, nominal)?;
    let converged = out.converged();
    Ok((out.beamformer.weights, converged))
}

/// Simulates one batch and scores every configured method on it.
pub fn run_single(
    cfg: &ScenarioConfig,
    snr_db: f64,
    snapshots: usize,
    run_index: usize,
) -> Result<Vec<SinrRecord>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(cfg.base_seed, snr_db, snapshots, run_index));
    let desired = SourceSpec {
        doa_deg: cfg.desired.doa_deg,
        power_db: snr_db,
    };
    let scene = generate_snapshots(
        &cfg.geometry,
        &desired,
        &cfg.interferers,
        &cfg.mismatch,
        snapshots,
        &mut rng,
    )?;
    let nominal = steering_vector(&cfg.geometry, desired.doa_deg)?;
    let label = cfg.scenario_label();
    let undersampled = snapshots < cfg.geometry.num_sensors;

    let records = cfg
        .methods
        .iter()
        .map(|&method| {
            let outcome: CoreResult<(ComplexVector, bool)> = match method {
                Method::Optimal => scene.truth.optimal_weights().map(|w| (w, true)),
                Method::Smi => smi_weights(&scene.snapshots, &nominal, 0.0).map(|w| (w, true)),
                Method::SmiLoaded => {
                    smi_weights(&scene.snapshots, &nominal, cfg.smi_loading).map(|w| (w, true))
                }
                Method::MepsNpicCg => {
                    let mut bf = cfg.beamformer();
                    bf.safety_loading = undersampled;
                    meps_weights(&bf, &scene.snapshots, &nominal).or_else(|_| {
                        bf.safety_loading = true;
                        meps_weights(&bf, &scene.snapshots, &nominal).map(|(w, _)| (w, false))
                    })
                }
            };
            let (sinr_db, converged) =
                match outcome.and_then(|(w, ok)| Ok((output_sinr(&w, &scene.truth)?, ok))) {
                    Ok((s, ok)) if s.is_finite() => (s, ok),
                    _ => (f64::NAN, false),
                };
            SinrRecord {
                scenario: label.clone(),
                method: method.name().to_string(),
                snr_db,
                snapshots,
                run_index,
                sinr_db,
                converged,
            }
        })
        .collect();
    Ok(records)
}

fn sweep(cfg: &ScenarioConfig, points: &[(f64, usize)]) -> Result<Vec<SinrRecord>, HarnessError> {
    cfg.validate()?;
    let jobs: Vec<(f64, usize, usize)> = points
        .iter()
        .flat_map(|&(snr, k)| (0..cfg.runs).map(move |r| (snr, k, r)))
        .collect();
    let per_run = jobs
        .par_iter()
        .map(|&(snr, k, r)| run_single(cfg, snr, k, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(per_run.into_iter().flatten().collect())
}

/// SINR versus SNR at the configured snapshot count.
pub fn sweep_snr(cfg: &ScenarioConfig) -> Result<Vec<SinrRecord>, HarnessError> {
    let points: Vec<(f64, usize)> = cfg.snr_sweep.iter().map(|&s| (s, cfg.snapshots)).collect();
    sweep(cfg, &points)
}

/// SINR versus snapshot count at the desired source's configured SNR.
pub fn sweep_snapshots(cfg: &ScenarioConfig) -> Result<Vec<SinrRecord>, HarnessError> {
    let points: Vec<(f64, usize)> = cfg
        .snapshot_sweep
        .iter()
        .map(|&k| (cfg.desired.power_db, k))
        .collect();
    sweep(cfg, &points)
}

/// Mean and median over one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub method: String,
    pub snr_db: f64,
    pub snapshots: usize,
    pub mean_db: f64,
    pub median_db: f64,
    pub failed: usize,
    pub unconverged: usize,
    pub runs: usize,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Groups records by (method, SNR, K), keeping first-appearance order.
pub fn summarize(records: &[SinrRecord]) -> Vec<PointSummary> {
    let mut keys: Vec<(String, u64, usize)> = Vec::new();
    for r in records {
        let key = (r.method.clone(), r.snr_db.to_bits(), r.snapshots);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, snr_bits, snapshots)| {
            let group: Vec<&SinrRecord> = records
                .iter()
                .filter(|r| {
                    r.method == method && r.snr_db.to_bits() == snr_bits && r.snapshots == snapshots
                })
                .collect();
            let mut finite: Vec<f64> = group
                .iter()
                .map(|r| r.sinr_db)
                .filter(|s| s.is_finite())
                .collect();
            let mean_db = if finite.is_empty() {
                f64::NAN
            } else {
                finite.iter().sum::<f64>() / finite.len() as f64
            };
            PointSummary {
                failed: group.len() - finite.len(),
                unconverged: group.iter().filter(|r| !r.converged).count(),
                runs: group.len(),
                median_db: median(&mut finite),
                mean_db,
                method,
                snr_db: f64::from_bits(snr_bits),
                snapshots,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ScenarioConfig {
        ScenarioConfig {
            runs: 3,
            snr_sweep: vec![20.0],
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn one_record_per_method() {
        let cfg = ScenarioConfig {
            runs: 1,
            ..small_cfg()
        };
        let recs = sweep_snr(&cfg).unwrap();
        assert_eq!(recs.len(), cfg.methods.len());
        let names: Vec<&str> = recs.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(names, ["meps-npic-cg", "optimal", "smi", "smi-loaded"]);
    }

    #[test]
    fn full_snr_sweep_cardinality() {
        let cfg = ScenarioConfig {
            runs: 2,
            ..ScenarioConfig::default()
        };
        assert_eq!(sweep_snr(&cfg).unwrap().len(), 9 * 2 * 4);
    }

    #[test]
    fn optimal_passthrough_and_determinism() {
        let cfg = ScenarioConfig {
            methods: vec![Method::Optimal],
            ..small_cfg()
        };
        let a = run_single(&cfg, 20.0, 30, 1).unwrap();
        let b = run_single(&cfg, 20.0, 30, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
        // Two 30 dB interferers well away from the look direction: close to
        // the 30 dB array-gain ceiling.
        assert!(
            a[0].sinr_db > 29.0 && a[0].sinr_db <= 30.0,
            "{}",
            a[0].sinr_db
        );
    }

    #[test]
    fn nothing_beats_optimal() {
        for mismatch in [
            beamform_core::array::MismatchModel::None,
            beamform_core::array::MismatchModel::accumulated_phase(),
            beamform_core::array::MismatchModel::incoherent_scattering(),
        ] {
            let cfg = ScenarioConfig {
                mismatch,
                runs: 5,
                snr_sweep: vec![0.0, 20.0],
                ..ScenarioConfig::default()
            };
            let recs = sweep_snr(&cfg).unwrap();
            for chunk in recs.chunks(4) {
                let opt = chunk[1].sinr_db;
                for r in chunk {
                    assert!(!(r.sinr_db > opt + 1e-6), "{r:?} vs {opt}");
                }
            }
        }
    }

    #[test]
    fn undersampled_runs_mark_smi_failed() {
        let cfg = ScenarioConfig {
            runs: 2,
            snapshot_sweep: vec![5],
            ..ScenarioConfig::default()
        };
        let recs = sweep_snapshots(&cfg).unwrap();
        for r in &recs {
            match r.method.as_str() {
                "smi" => assert!(r.sinr_db.is_nan() && !r.converged),
                _ => assert!(r.sinr_db.is_finite(), "{r:?}"),
            }
        }
    }

    #[test]
    fn seeds_differ_across_coordinates() {
        let s = run_seed(1, 20.0, 30, 0);
        assert_ne!(s, run_seed(1, 20.0, 30, 1));
        assert_ne!(s, run_seed(1, 15.0, 30, 0));
        assert_ne!(s, run_seed(1, 20.0, 31, 0));
        assert_ne!(s, run_seed(2, 20.0, 30, 0));
    }

    #[test]
    fn median_and_summary() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        let recs = sweep_snr(&small_cfg()).unwrap();
        let s = summarize(&recs);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|p| p.runs == 3));
    }
}
