//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;
use std::process::{Command, ExitCode};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use beamform_core::array::{
    generate_snapshots, steering_vector, ArrayGeometry, MismatchModel, SourceSpec,
};
use beamform_core::covariance::{solve_v, ImplicitSampleCovariance};
use beamform_core::linalg::{dot, norm};
use beamform_core::npic::{
    reconstruct_sv, sample_spectrum, solve_beamformer, AngularSector, MepsNpicCg,
};
use beamsim::config::{Method, ScenarioConfig};
use beamsim::runner::{median, run_single};
use beamsim::validate::{
    check_beamformer, check_gradient, check_spectrum, check_step_size, random_batch,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct AuditAlloc;

thread_local! {
    static AUDITING: Cell<bool> = const { Cell::new(false) };
}

static LARGEST: AtomicUsize = AtomicUsize::new(0);
static COUNT: AtomicUsize = AtomicUsize::new(0);

fn record(size: usize) {
    if AUDITING.with(Cell::get) {
        COUNT.fetch_add(1, Ordering::Relaxed);
        LARGEST.fetch_max(size, Ordering::Relaxed);
    }
}

unsafe impl GlobalAlloc for AuditAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        record(layout.size());
        System.alloc(layout)
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        record(layout.size());
        System.alloc_zeroed(layout)
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        record(new_size);
        System.realloc(ptr, layout, new_size)
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout)
    }
}

#[global_allocator]
static GLOBAL: AuditAlloc = AuditAlloc;

const SEED: u64 = 20_240_601;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn report(results: &[Outcome]) -> bool {
    for r in results {
        println!(
            "[{}] {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    results.iter().all(|r| r.passed)
}

fn oracle_check(name: &'static str, check: beamsim::validate::Check) -> Outcome {
    let in_time = check.elapsed < Duration::from_secs(10);
    Outcome {
        name,
        passed: check.passed && in_time,
        detail: format!("{check} (time limit 10 s)"),
    }
}

fn spectrum_oracle() -> Outcome {
    oracle_check(
        "1 spectrum oracle",
        check_spectrum(100, SEED).expect("spectrum check"),
    )
}

fn beamformer_oracle() -> Outcome {
    oracle_check(
        "2 beamformer oracle",
        check_beamformer(100, SEED).expect("beamformer check").0,
    )
}

fn gradient_check() -> Outcome {
    let check = check_gradient(20, SEED).expect("gradient check");
    Outcome {
        name: "3 gradient",
        passed: check.passed,
        detail: check.to_string(),
    }
}

fn step_size() -> Outcome {
    let check = check_step_size(100, 200, SEED).expect("step size check");
    Outcome {
        name: "4 step size",
        passed: check.passed,
        detail: check.to_string(),
    }
}

fn scenario(mismatch: MismatchModel) -> ScenarioConfig {
    ScenarioConfig {
        mismatch,
        runs: 100,
        base_seed: SEED,
        methods: vec![Method::MepsNpicCg, Method::Optimal, Method::Smi],
        ..ScenarioConfig::default()
    }
}

/// Per-run SINR of each method in `cfg.methods` at SNR 20 dB and K = 30.
/// Failed runs score minus infinity.
fn paired_runs(cfg: &ScenarioConfig) -> Vec<Vec<f64>> {
    let mut per_method = vec![Vec::with_capacity(cfg.runs); cfg.methods.len()];
    for run in 0..cfg.runs {
        let records = run_single(cfg, 20.0, 30, run).expect("run");
        for (slot, r) in per_method.iter_mut().zip(records) {
            slot.push(if r.sinr_db.is_nan() {
                f64::NEG_INFINITY
            } else {
                r.sinr_db
            });
        }
    }
    per_method
}

fn no_mismatch() -> Outcome {
    let start = Instant::now();
    let runs = paired_runs(&scenario(MismatchModel::None));
    let elapsed = start.elapsed();
    let mut gaps: Vec<f64> = runs[1]
        .iter()
        .zip(&runs[0])
        .map(|(opt, m)| opt - m)
        .collect();
    let gap = median(&mut gaps);
    let meps = median(&mut runs[0].clone());
    let opt = median(&mut runs[1].clone());
    Outcome {
        name: "5 no mismatch vs optimal",
        passed: gap <= 3.0 && elapsed < Duration::from_secs(60),
        detail: format!(
            "median gap {gap:.2} dB (limit 3), median MEPS-NPIC-CG {meps:.2} dB, optimal {opt:.2} dB, {elapsed:.2?} (limit 60 s)"
        ),
    }
}

fn beats_smi(name: &'static str, mismatch: MismatchModel, margin: f64) -> Outcome {
    let runs = paired_runs(&scenario(mismatch));
    let meps = median(&mut runs[0].clone());
    let smi = median(&mut runs[2].clone());
    let passed = if margin > 0.0 {
        meps - smi >= margin
    } else {
        meps > smi
    };
    Outcome {
        name,
        passed,
        detail: format!(
            "median MEPS-NPIC-CG {meps:.2} dB, SMI {smi:.2} dB, difference {:.2} dB (required {})",
            meps - smi,
            if margin > 0.0 {
                format!(">= {margin}")
            } else {
                "> 0".into()
            }
        ),
    }
}

fn audited<T>(f: impl FnOnce() -> T) -> (T, usize, usize) {
    LARGEST.store(0, Ordering::Relaxed);
    COUNT.store(0, Ordering::Relaxed);
    AUDITING.with(|a| a.set(true));
    let out = f();
    AUDITING.with(|a| a.set(false));
    (
        out,
        LARGEST.load(Ordering::Relaxed),
        COUNT.load(Ordering::Relaxed),
    )
}

fn sector_with(samples: usize) -> AngularSector {
    AngularSector::new(vec![[-90.0, -1.0], [11.0, 90.0]], samples).expect("sector")
}

/// Median wall time of the spectrum sampling and weight solve on one batch.
fn solver_time(m: usize, q: usize) -> f64 {
    let geom = ArrayGeometry::new(m, 1.0).expect("geometry");
    let batch = random_batch(SEED, &geom, 3 * m).expect("batch");
    let sol = solve_v(&ImplicitSampleCovariance::new(&batch), 1e-8, 500).expect("solve");
    let sector = sector_with(q);
    let signal = AngularSector::default_signal();
    let nominal = steering_vector(&geom, 5.0).expect("steering");
    let reps = 40;
    let mut times: Vec<f64> = (0..25)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..reps {
                let s = sample_spectrum(&signal, &sol, &geom).expect("signal");
                let a_hat = reconstruct_sv(&s, &nominal).expect("sv");
                let npic = sample_spectrum(&sector, &sol, &geom).expect("npic");
                std::hint::black_box(solve_beamformer(&npic, &a_hat, 0.0, 7).expect("weights"));
            }
            start.elapsed().as_secs_f64()
        })
        .collect();
    median(&mut times)
}

fn complexity() -> Outcome {
    let m = 32;
    let geom = ArrayGeometry::new(m, 1.0).expect("geometry");
    let batch = random_batch(SEED, &geom, 64).expect("batch");
    let nominal = steering_vector(&geom, 5.0).expect("steering");
    let bf = MepsNpicCg::new(geom);
    let (out, largest, count) = audited(|| bf.beamform(&batch, &nominal));
    out.expect("beamform");
    let limit = m * m * std::mem::size_of::<beamform_core::C64>();
    let alloc_ok = largest < limit;

    let base = solver_time(10, 90);
    let q_ratio = solver_time(10, 180) / base;
    let m_ratio = solver_time(20, 90) / base;
    let in_band = |r: f64| (1.6..=2.6).contains(&r);
    Outcome {
        name: "8 complexity",
        passed: alloc_ok && in_band(q_ratio) && in_band(m_ratio),
        detail: format!(
            "largest allocation {largest} B over {count} allocations (M x M would be {limit} B); time ratio Q 90->180 {q_ratio:.2}, M 10->20 {m_ratio:.2} (band [1.6, 2.6])"
        ),
    }
}

fn cosine(a: &[beamform_core::C64], b: &[beamform_core::C64]) -> f64 {
    dot(a, b).norm() / (norm(a) * norm(b))
}

fn steering_quality() -> Outcome {
    let geom = ArrayGeometry::default();
    let truth_sv = steering_vector(&geom, 5.0).expect("steering");
    let nominal = steering_vector(&geom, 3.0).expect("steering");
    let desired = SourceSpec::new(5.0, 20.0).expect("source");
    let interferers = [
        SourceSpec::new(20.0, 30.0).expect("source"),
        SourceSpec::new(50.0, 30.0).expect("source"),
    ];
    let bf = MepsNpicCg::new(geom);
    let mut sims: Vec<f64> = (0..100u64)
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ run.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let scene = generate_snapshots(
                &geom,
                &desired,
                &interferers,
                &MismatchModel::None,
                30,
                &mut rng,
            )
            .expect("scene");
            let out = bf.beamform(&scene.snapshots, &nominal).expect("beamform");
            cosine(&out.beamformer.estimated_sv, &truth_sv)
        })
        .collect();
    let sim = median(&mut sims);
    let nominal_sim = cosine(&nominal, &truth_sv);
    Outcome {
        name: "9 steering estimate",
        passed: sim > 0.99 && sim > nominal_sim,
        detail: format!("median cosine similarity {sim:.5} (limit 0.99), nominal {nominal_sim:.5}"),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"runs": 4, "snr_sweep": [0.0, 20.0], "snapshots": 20}"#,
    )
    .expect("config");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_beamsim"))
            .args(["sweep-snr", "--seed", "99", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .expect("spawn beamsim");
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(out).expect("csv")
    };
    let first = run("a.csv");
    let second = run("b.csv");
    Outcome {
        name: "10 determinism",
        passed: !first.is_empty() && first == second,
        detail: format!(
            "{} and {} bytes, identical: {}",
            first.len(),
            second.len(),
            first == second
        ),
    }
}

fn main() -> ExitCode {
    let results = vec![
        spectrum_oracle(),
        beamformer_oracle(),
        gradient_check(),
        step_size(),
        no_mismatch(),
        beats_smi(
            "6 phase mismatch vs SMI",
            MismatchModel::accumulated_phase(),
            3.0,
        ),
        beats_smi(
            "7 scattering vs SMI",
            MismatchModel::incoherent_scattering(),
            0.0,
        ),
        complexity(),
        steering_quality(),
        determinism(),
    ];
    if report(&results) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
