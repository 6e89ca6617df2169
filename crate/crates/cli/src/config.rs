//! Pipeline configuration: a flat `key = value` file whose keys can all be
//! overridden by command-line flags of the same name.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use qke_core::compiler::{CompileConfig, TwoPiAmplitude};
use qke_core::dataset::GenerationConfig;
use qke_core::device::{Device, Register};
use qke_core::qke::{Estimator, FeatureMapSpec, KernelSetup, PairPhaseConvention, Shots};
use qke_core::simulator::BackendMode;
use qke_core::svm::{Gamma, TrainConfig};

use crate::error::{CliError, CliResult};

/// Every recognised key with its default value.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("device", "chadoq2"),
    ("register", "triangle"),
    ("repetitions", "2"),
    ("shots", "1000"),
    ("backend", "ideal"),
    ("step-ns", "1"),
    ("blockade-radius", "10"),
    ("two-pi-amplitude", "5.42"),
    ("dataset-seed", "10000"),
    ("sampling-seed", "0"),
    ("gap", "0.1"),
    ("train-per-class", "20"),
    ("test-per-class", "10"),
    ("max-attempts", "1000000"),
    ("svm-c", "1"),
    ("estimator", "raw"),
    ("symmetric", "true"),
    ("rbf-gamma", "scale"),
    ("threads", "0"),
    ("region-resolution", "0"),
    ("output", "out"),
];

#[derive(Clone, Debug, PartialEq)]
pub enum RegisterSource {
    Preset(String),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub device: String,
    pub register: RegisterSource,
    pub spec: FeatureMapSpec,
    pub shots: Shots,
    pub backend: BackendMode,
    pub two_pi_amplitude: f64,
    pub dataset_seed: u64,
    pub sampling_seed: u64,
    pub gap: f64,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub max_attempts: u64,
    pub svm_c: f64,
    pub estimator: Estimator,
    pub symmetric: bool,
    pub rbf_gamma: Gamma,
    /// 0 means one worker per available core.
    pub threads: usize,
    /// Region-grid resolution; 0 disables region output.
    pub region_resolution: usize,
    pub output: PathBuf,
    raw: BTreeMap<String, String>,
}

fn parse<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    let value = &map[key];
    value.trim().parse().map_err(|e| CliError::Config(format!("{key} = {value:?}: {e}")))
}

impl PipelineConfig {
    /// Defaults, then the file, then `overrides`, in that order.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> CliResult<Self> {
        let mut map: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = file {
            let ini = Ini::load_from_file(path).map_err(|e| CliError::format(path, e))?;
            for (section, props) in ini.iter() {
                if let Some(name) = section {
                    return Err(CliError::format(path, format!("sections are not supported ([{name}])")));
                }
                for (k, v) in props.iter() {
                    Self::set(&mut map, k, v)?;
                }
            }
        }
        for (k, v) in overrides {
            Self::set(&mut map, k, v)?;
        }
        Self::from_map(map)
    }

    fn set(map: &mut BTreeMap<String, String>, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim().replace('_', "-");
        if !map.contains_key(&key) {
            return Err(CliError::Config(format!("unknown key {key:?}")));
        }
        map.insert(key, value.trim().to_string());
        Ok(())
    }

    pub fn from_map(map: BTreeMap<String, String>) -> CliResult<Self> {
        let step_ns: f64 = parse(&map, "step-ns")?;
        let blockade_radius: f64 = parse(&map, "blockade-radius")?;
        let backend = match map["backend"].as_str() {
            "ideal" => BackendMode::IdealGate,
            "vdw" => BackendMode::PulseVdw { step_ns },
            "hard-blockade" => BackendMode::PulseHardBlockade { step_ns, blockade_radius },
            other => return Err(CliError::Config(format!("backend {other:?} (ideal | vdw | hard-blockade)"))),
        };
        let register = match map["register"].as_str() {
            "triangle" => RegisterSource::Preset("triangle".into()),
            path => RegisterSource::File(PathBuf::from(path)),
        };
        let rbf_gamma = match map["rbf-gamma"].as_str() {
            "scale" => Gamma::Scale,
            _ => Gamma::Value(parse(&map, "rbf-gamma")?),
        };
        let shots: Shots = parse(&map, "shots")?;
        let config = PipelineConfig {
            device: map["device"].clone(),
            register,
            spec: FeatureMapSpec {
                n_features: 3,
                repetitions: parse(&map, "repetitions")?,
                pair_phase: PairPhaseConvention::QiskitZz,
            },
            shots,
            backend,
            two_pi_amplitude: parse(&map, "two-pi-amplitude")?,
            dataset_seed: parse(&map, "dataset-seed")?,
            sampling_seed: parse(&map, "sampling-seed")?,
            gap: parse(&map, "gap")?,
            train_per_class: parse(&map, "train-per-class")?,
            test_per_class: parse(&map, "test-per-class")?,
            max_attempts: parse(&map, "max-attempts")?,
            svm_c: parse(&map, "svm-c")?,
            estimator: parse(&map, "estimator")?,
            symmetric: parse(&map, "symmetric")?,
            rbf_gamma,
            threads: parse(&map, "threads")?,
            region_resolution: parse(&map, "region-resolution")?,
            output: PathBuf::from(&map["output"]),
            raw: map,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> CliResult<()> {
        self.spec.check()?;
        Device::preset(&self.device)?;
        if let RegisterSource::File(path) = &self.register {
            if !path.is_file() {
                return Err(CliError::Config(format!("register file {} does not exist", path.display())));
            }
        }
        if !(0.0..1.0).contains(&self.gap) {
            return Err(CliError::Config(format!("gap must lie in [0, 1), got {}", self.gap)));
        }
        if !(self.svm_c > 0.0) {
            return Err(CliError::Config(format!("svm-c must be positive, got {}", self.svm_c)));
        }
        if self.train_per_class == 0 {
            return Err(CliError::Config("train-per-class must be positive".into()));
        }
        if !(self.two_pi_amplitude > 0.0) {
            return Err(CliError::Config("two-pi-amplitude must be positive".into()));
        }
        Ok(())
    }

    /// The effective key/value pairs.
    pub fn snapshot(&self) -> &BTreeMap<String, String> {
        &self.raw
    }

    pub fn device(&self) -> CliResult<Device> {
        Ok(Device::preset(&self.device)?)
    }

    pub fn register(&self) -> CliResult<Register> {
        match &self.register {
            RegisterSource::Preset(_) => Ok(Register::triangle()),
            RegisterSource::File(path) => crate::io::read_json(path),
        }
    }

    pub fn generation(&self) -> GenerationConfig {
        GenerationConfig {
            seed: self.dataset_seed,
            n_train_per_class: self.train_per_class,
            n_test_per_class: self.test_per_class,
            gap: self.gap,
            max_attempts: self.max_attempts,
            spec: self.spec,
        }
    }

    pub fn kernel_setup(&self) -> CliResult<KernelSetup> {
        Ok(KernelSetup {
            spec: self.spec,
            mode: self.backend,
            device: self.device()?,
            register: self.register()?,
            compile: CompileConfig { two_pi: TwoPiAmplitude::Fixed(self.two_pi_amplitude), ..Default::default() },
            estimator: self.estimator,
        })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { c: self.svm_c, ..Default::default() }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::load(None, &[]).expect("defaults are valid")
    }
}
