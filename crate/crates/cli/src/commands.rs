//! Subcommand implementations. Every command computes all of its outputs in
//! memory first and only then writes them, each through an atomic rename.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use qke_core::compiler::{compile, CompileConfig, GateCircuit};
use qke_core::dataset::{generate, ground_truth, region_grid, Sample};
use qke_core::device::{generate_lattice, validate_register, Device, LatticePattern, Register};
use qke_core::qke::{estimate_matrix, qke_circuit, KernelMatrix, KernelMetadata};
use qke_core::svm::{accuracy, predict, rbf_kernel, train, SvmModel};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};
use crate::io;
use crate::pgm;

pub const TRAIN_CSV: &str = "dataset_train.csv";
pub const TEST_CSV: &str = "dataset_test.csv";
pub const DATASET_JSON: &str = "dataset.json";
pub const REGION_DIR: &str = "regions";
pub const KERNEL_TRAIN_CSV: &str = "kernel_train.csv";
pub const KERNEL_TEST_CSV: &str = "kernel_test.csv";
pub const QUANTUM_MODEL_JSON: &str = "model_quantum.json";
pub const RBF_MODEL_JSON: &str = "model_rbf.json";
pub const REPORT_JSON: &str = "report.json";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Seed offset separating the test-matrix sampling streams from training.
const TEST_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

/// Files staged in memory.
#[derive(Default)]
struct Staged {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    fn commit(self) -> CliResult<Vec<Artifact>> {
        let mut out = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            io::write_atomic(&path, &bytes)?;
            out.push(Artifact { path, sha256: io::sha256_hex(&bytes) });
        }
        Ok(out)
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Writes the train/test CSVs, dataset metadata and, when configured, one
/// region CSV per cube face.
pub fn cmd_gen_data(cfg: &PipelineConfig) -> CliResult<Vec<Artifact>> {
    let generation = cfg.generation();
    let data = with_threads(cfg.threads, || generate(&generation))??;
    let mut staged = Staged::default();
    staged.add(cfg.output.join(TRAIN_CSV), io::dataset_csv(&data.train));
    staged.add(cfg.output.join(TEST_CSV), io::dataset_csv(&data.test));
    staged.add(cfg.output.join(DATASET_JSON), io::to_json(&data.metadata));
    if cfg.region_resolution > 0 {
        let truth = ground_truth(&generation)?;
        let faces = with_threads(cfg.threads, || region_grid(&truth, &cfg.spec, cfg.region_resolution))??;
        for face in faces {
            staged.add(cfg.output.join(REGION_DIR).join(format!("{}.csv", face.name())), io::region_csv(&face));
        }
    }
    staged.commit()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub duration_ns: u64,
    pub duration_us: f64,
    pub pulse_count: usize,
    pub events: usize,
}

/// Compiles `circuit` and writes the sequence JSON to `out`.
pub fn cmd_compile(
    circuit: &GateCircuit,
    register: &Register,
    device: &Device,
    config: &CompileConfig,
    out: &Path,
) -> CliResult<CompileReport> {
    let seq = compile(circuit, register, device, config)?;
    io::write_atomic(out, &io::to_json(&seq))?;
    Ok(CompileReport {
        duration_ns: seq.duration_ns(),
        duration_us: seq.duration_ns() as f64 * 1e-3,
        pulse_count: seq.pulse_count(),
        events: seq.timeline().len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DurationStats {
    pub count: usize,
    pub min_us: f64,
    pub max_us: f64,
    pub mean_us: f64,
}

/// Durations of the compiled training-pair sequences; `None` when the
/// register cannot host the circuits (only possible on the ideal backend).
fn sequence_durations(cfg: &PipelineConfig, train: &[Vec<f64>]) -> CliResult<Option<DurationStats>> {
    let setup = cfg.kernel_setup()?;
    let mut durations = Vec::new();
    for (i, a) in train.iter().enumerate() {
        for b in &train[i..] {
            let circuit = qke_circuit(b, a, &cfg.spec)?;
            match compile(&circuit, &setup.register, &setup.device, &setup.compile) {
                Ok(seq) => durations.push(seq.duration_ns() as f64 * 1e-3),
                Err(e) if setup.mode.is_pulse() => return Err(e.into()),
                Err(_) => return Ok(None),
            }
        }
    }
    if durations.is_empty() {
        return Ok(None);
    }
    let count = durations.len();
    Ok(Some(DurationStats {
        count,
        min_us: durations.iter().copied().fold(f64::INFINITY, f64::min),
        max_us: durations.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_us: durations.iter().sum::<f64>() / count as f64,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: BTreeMap<String, String>,
    pub artifacts: Vec<Artifact>,
    pub timings_ms: BTreeMap<String, u128>,
    pub sequence_durations: Option<DurationStats>,
}

fn load_dataset(cfg: &PipelineConfig) -> CliResult<(Vec<Sample>, Vec<Sample>)> {
    let train = io::read_dataset_csv(&cfg.output.join(TRAIN_CSV))?;
    let test = io::read_dataset_csv(&cfg.output.join(TEST_CSV))?;
    if train.is_empty() {
        return Err(CliError::format(cfg.output.join(TRAIN_CSV), "no training samples"));
    }
    Ok((train, test))
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}_{i}")).collect()
}

fn points(samples: &[Sample]) -> Vec<Vec<f64>> {
    samples.iter().map(|s| s.x.clone()).collect()
}

fn labels(samples: &[Sample]) -> Vec<i8> {
    samples.iter().map(|s| s.y).collect()
}

/// Estimates the training (m×m) and test (s×m) kernel matrices of the dataset
/// in the output directory and writes them with their metadata and a manifest.
pub fn cmd_kernel(cfg: &PipelineConfig) -> CliResult<RunManifest> {
    let (train, test) = load_dataset(cfg)?;
    let setup = cfg.kernel_setup()?;
    let (x_train, x_test) = (points(&train), points(&test));

    let started = Instant::now();
    let durations = sequence_durations(cfg, &x_train)?;
    let k_train = with_threads(cfg.threads, || {
        estimate_matrix(&x_train, &x_train, cfg.shots, &setup, cfg.sampling_seed, cfg.symmetric)
    })??
    .with_ids(ids("train", train.len()), ids("train", train.len()))?;
    let train_ms = started.elapsed().as_millis();
    let started = Instant::now();
    let k_test = with_threads(cfg.threads, || {
        estimate_matrix(&x_test, &x_train, cfg.shots, &setup, cfg.sampling_seed ^ TEST_SEED_MIX, false)
    })??
    .with_ids(ids("test", test.len()), ids("train", train.len()))?;
    let test_ms = started.elapsed().as_millis();

    let mut staged = Staged::default();
    for (name, k) in [(KERNEL_TRAIN_CSV, &k_train), (KERNEL_TEST_CSV, &k_test)] {
        let csv = cfg.output.join(name);
        staged.add(csv.with_extension("json"), io::to_json(&k.metadata));
        staged.add(csv, io::kernel_csv(k));
    }
    let artifacts = staged.commit()?;
    let manifest = RunManifest {
        config: cfg.snapshot().clone(),
        artifacts,
        timings_ms: BTreeMap::from([("kernel_train".into(), train_ms), ("kernel_test".into(), test_ms)]),
        sequence_durations: durations,
    };
    io::write_atomic(&cfg.output.join(MANIFEST_JSON), &io::to_json(&manifest))?;
    Ok(manifest)
}

pub fn read_kernel(path: &Path) -> CliResult<KernelMatrix> {
    let (values, row_ids, col_ids) = io::read_kernel_csv(path)?;
    let metadata: KernelMetadata = io::read_json(&path.with_extension("json"))?;
    Ok(KernelMatrix { values, row_ids, col_ids, metadata })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub accuracy: f64,
    pub predictions: Vec<i8>,
    pub truth: Vec<i8>,
    pub train_accuracy: f64,
    pub support_vectors: usize,
    pub objective: f64,
    pub spectral_clipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub quantum: ClassifierReport,
    pub rbf: ClassifierReport,
    pub rbf_gamma: f64,
    /// Quantum minus RBF test accuracy.
    pub difference: f64,
}

fn fit(
    k_train: &DMatrix<f64>,
    k_test: &DMatrix<f64>,
    y_train: &[i8],
    y_test: &[i8],
    cfg: &PipelineConfig,
) -> CliResult<(SvmModel, ClassifierReport)> {
    let t = train(k_train, y_train, &cfg.train_config())?;
    let predictions = predict(&t.model, k_test)?;
    let report = ClassifierReport {
        accuracy: if y_test.is_empty() { 1.0 } else { accuracy(&predictions, y_test)? },
        predictions,
        truth: y_test.to_vec(),
        train_accuracy: accuracy(&predict(&t.model, k_train)?, y_train)?,
        support_vectors: t.model.support.len(),
        objective: t.report.objective,
        spectral_clipped: t.spectral_clipped,
    };
    Ok((t.model, report))
}

/// Trains the quantum-kernel SVM and the RBF baseline and reports test
/// accuracies.
pub fn cmd_train_eval(cfg: &PipelineConfig) -> CliResult<(EvalReport, Vec<Artifact>)> {
    let (train, test) = load_dataset(cfg)?;
    let (y_train, y_test) = (labels(&train), labels(&test));
    let k_train = read_kernel(&cfg.output.join(KERNEL_TRAIN_CSV))?;
    let k_test = read_kernel(&cfg.output.join(KERNEL_TEST_CSV))?;
    if k_train.shape() != (train.len(), train.len()) || k_test.shape() != (test.len(), train.len()) {
        return Err(CliError::Config(format!(
            "kernel shapes {:?} and {:?} do not match the dataset ({} train, {} test)",
            k_train.shape(),
            k_test.shape(),
            train.len(),
            test.len()
        )));
    }
    let (quantum_model, quantum) = fit(&k_train.values, &k_test.values, &y_train, &y_test, cfg)?;

    let (x_train, x_test) = (points(&train), points(&test));
    let gamma = cfg.rbf_gamma.resolve(&x_train)?;
    let rbf_train = rbf_kernel(&x_train, &x_train, gamma)?;
    let rbf_test = rbf_kernel(&x_test, &x_train, gamma)?;
    let (rbf_model, rbf) = fit(&rbf_train, &rbf_test, &y_train, &y_test, cfg)?;

    let report = EvalReport { difference: quantum.accuracy - rbf.accuracy, quantum, rbf, rbf_gamma: gamma };
    let mut staged = Staged::default();
    staged.add(cfg.output.join(QUANTUM_MODEL_JSON), io::to_json(&quantum_model));
    staged.add(cfg.output.join(RBF_MODEL_JSON), io::to_json(&rbf_model));
    staged.add(cfg.output.join(REPORT_JSON), io::to_json(&report));
    Ok((report, staged.commit()?))
}

/// Renders a kernel CSV, or every region CSV in a directory, as PGM next to
/// the input (or under `out_dir`).
pub fn cmd_plot(input: &Path, out_dir: Option<&Path>) -> CliResult<Vec<Artifact>> {
    let target = |src: &Path| -> PathBuf {
        let name = src.with_extension("pgm");
        match out_dir {
            Some(dir) => dir.join(name.file_name().expect("file name")),
            None => name,
        }
    };
    let mut staged = Staged::default();
    if input.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(input)
            .map_err(|e| CliError::io(input, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(CliError::format(input, "no region CSVs found"));
        }
        for f in files {
            staged.add(target(&f), pgm::region_image(&io::read_region_csv(&f)?)?);
        }
    } else {
        let (values, _, _) = io::read_kernel_csv(input)?;
        staged.add(target(input), pgm::kernel_image(&values)?);
    }
    staged.commit()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSummary {
    pub atoms: usize,
    pub valid: bool,
    pub violations: Vec<String>,
}

/// Generates a lattice register, writes it as JSON and checks it against the
/// device.
pub fn cmd_lattice(pattern: &LatticePattern, cap: usize, device: &Device, out: &Path) -> CliResult<LatticeSummary> {
    let register = generate_lattice(pattern, cap)?;
    let report = validate_register(&register, device);
    io::write_atomic(out, &io::to_json(&register))?;
    Ok(LatticeSummary {
        atoms: register.len(),
        valid: report.is_valid(),
        violations: report.violations.iter().map(|v| v.to_string()).collect(),
    })
}

/// gen-data, kernel, train-eval and plot in sequence, with a manifest of
/// every artifact.
pub fn run_pipeline(cfg: &PipelineConfig) -> CliResult<(EvalReport, RunManifest)> {
    let mut timings = BTreeMap::new();
    let started = Instant::now();
    let mut artifacts = cmd_gen_data(cfg)?;
    timings.insert("gen_data".to_string(), started.elapsed().as_millis());

    let kernel = cmd_kernel(cfg)?;
    artifacts.extend(kernel.artifacts);
    timings.extend(kernel.timings_ms);

    let started = Instant::now();
    let (report, eval_artifacts) = cmd_train_eval(cfg)?;
    artifacts.extend(eval_artifacts);
    timings.insert("train_eval".to_string(), started.elapsed().as_millis());

    artifacts.extend(cmd_plot(&cfg.output.join(KERNEL_TRAIN_CSV), None)?);
    artifacts.extend(cmd_plot(&cfg.output.join(KERNEL_TEST_CSV), None)?);
    if cfg.region_resolution > 0 {
        artifacts.extend(cmd_plot(&cfg.output.join(REGION_DIR), None)?);
    }

    let manifest = RunManifest {
        config: cfg.snapshot().clone(),
        artifacts,
        timings_ms: timings,
        sequence_durations: kernel.sequence_durations,
    };
    io::write_atomic(&cfg.output.join(MANIFEST_JSON), &io::to_json(&manifest))?;
    Ok((report, manifest))
}
