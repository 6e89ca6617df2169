//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qke_core::device::LatticeKind;

#[derive(Debug, Parser)]
#[command(name = "qke", version, about = "Neutral-atom pulse compiler and quantum kernel pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the labeled dataset (and optional region grids).
    GenData(ConfigArgs),
    /// Compile a gate circuit to a pulse sequence.
    Compile(CompileArgs),
    /// Estimate the training and test kernel matrices.
    Kernel(ConfigArgs),
    /// Train the quantum-kernel SVM and the RBF baseline, report accuracies.
    TrainEval(ConfigArgs),
    /// Render a kernel CSV or a directory of region CSVs as PGM images.
    Plot(PlotArgs),
    /// Emit a lattice register.
    Lattice(LatticeArgs),
    /// Run gen-data, kernel, train-eval and plot.
    Pipeline(ConfigArgs),
}

/// Config file plus per-key overrides; flag names equal the config keys.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub device: Option<String>,
    /// `triangle` or a register JSON file.
    #[arg(long)]
    pub register: Option<String>,
    #[arg(long)]
    pub repetitions: Option<String>,
    /// Positive integer or `exact`.
    #[arg(long)]
    pub shots: Option<String>,
    /// ideal | vdw | hard-blockade
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub step_ns: Option<String>,
    #[arg(long)]
    pub blockade_radius: Option<String>,
    #[arg(long)]
    pub two_pi_amplitude: Option<String>,
    #[arg(long)]
    pub dataset_seed: Option<String>,
    #[arg(long)]
    pub sampling_seed: Option<String>,
    #[arg(long)]
    pub gap: Option<String>,
    #[arg(long)]
    pub train_per_class: Option<String>,
    #[arg(long)]
    pub test_per_class: Option<String>,
    #[arg(long)]
    pub max_attempts: Option<String>,
    #[arg(long)]
    pub svm_c: Option<String>,
    /// raw | squared
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub symmetric: Option<String>,
    /// `scale` or a number.
    #[arg(long)]
    pub rbf_gamma: Option<String>,
    #[arg(long)]
    pub threads: Option<String>,
    #[arg(long)]
    pub region_resolution: Option<String>,
    #[arg(long)]
    pub output: Option<String>,
}

impl ConfigArgs {
    pub fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("device", &self.device),
            ("register", &self.register),
            ("repetitions", &self.repetitions),
            ("shots", &self.shots),
            ("backend", &self.backend),
            ("step-ns", &self.step_ns),
            ("blockade-radius", &self.blockade_radius),
            ("two-pi-amplitude", &self.two_pi_amplitude),
            ("dataset-seed", &self.dataset_seed),
            ("sampling-seed", &self.sampling_seed),
            ("gap", &self.gap),
            ("train-per-class", &self.train_per_class),
            ("test-per-class", &self.test_per_class),
            ("max-attempts", &self.max_attempts),
            ("svm-c", &self.svm_c),
            ("estimator", &self.estimator),
            ("symmetric", &self.symmetric),
            ("rbf-gamma", &self.rbf_gamma),
            ("threads", &self.threads),
            ("region-resolution", &self.region_resolution),
            ("output", &self.output),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Gate circuit JSON.
    #[arg(long, conflicts_with = "pair", required_unless_present = "pair")]
    pub circuit: Option<PathBuf>,
    /// Build the kernel circuit of two samples: `a,b,c:d,e,f`.
    #[arg(long)]
    pub pair: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub repetitions: usize,
    #[arg(long, default_value = "chadoq2")]
    pub device: String,
    /// `triangle` or a register JSON file.
    #[arg(long, default_value = "triangle")]
    pub register: String,
    #[arg(long, default_value_t = qke_core::device::DEFAULT_TWO_PI_AMPLITUDE)]
    pub two_pi_amplitude: f64,
    /// Where to write the sequence JSON.
    #[arg(long, default_value = "sequence.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Kernel CSV or directory of region CSVs.
    pub input: PathBuf,
    /// Directory for the images (defaults to next to the input).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LatticeKindArg {
    FaceCenters6,
    Cube26,
    Triangle3,
}

impl From<LatticeKindArg> for LatticeKind {
    fn from(kind: LatticeKindArg) -> Self {
        match kind {
            LatticeKindArg::FaceCenters6 => LatticeKind::FaceCenters6,
            LatticeKindArg::Cube26 => LatticeKind::Cube26,
            LatticeKindArg::Triangle3 => LatticeKind::Triangle3,
        }
    }
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long, value_enum)]
    pub kind: LatticeKindArg,
    /// Spacing [µm].
    #[arg(long, default_value_t = 5.0)]
    pub spacing: f64,
    /// Atoms along x,y,z.
    #[arg(long, default_value = "3,3,3", value_parser = parse_extent)]
    pub extent: [usize; 3],
    #[arg(long, default_value_t = qke_core::device::DEFAULT_LATTICE_CAP)]
    pub cap: usize,
    #[arg(long, default_value = "chadoq2")]
    pub device: String,
    #[arg(long, default_value = "register.json")]
    pub out: PathBuf,
}

fn parse_extent(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = s.split(',').map(|p| p.trim().parse().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| "expected three comma-separated counts".to_string())
}

/// Parses `a,b,c:d,e,f` into two feature vectors.
pub fn parse_pair(s: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let (a, b) = s.split_once(':').ok_or("expected `x1:x2`")?;
    let vec = |t: &str| t.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"))).collect::<Result<Vec<f64>, String>>();
    Ok((vec(a)?, vec(b)?))
}
