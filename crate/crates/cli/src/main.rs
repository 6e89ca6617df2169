use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use qke_cli::args::{parse_pair, Cli, Command};
use qke_cli::commands::{
    cmd_compile, cmd_gen_data, cmd_kernel, cmd_lattice, cmd_plot, cmd_train_eval, run_pipeline, Artifact,
};
use qke_cli::{io, CliError, CliResult, PipelineConfig};
use qke_core::compiler::{CompileConfig, GateCircuit, TwoPiAmplitude};
use qke_core::device::{Device, LatticePattern, Register};
use qke_core::qke::{qke_circuit, FeatureMapSpec};

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn list(artifacts: &[Artifact]) {
    for a in artifacts {
        println!("{}  {}", a.sha256, a.path.display());
    }
}

fn load_register(source: &str) -> CliResult<Register> {
    match source {
        "triangle" => Ok(Register::triangle()),
        path => io::read_json(Path::new(path)),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenData(a) => list(&cmd_gen_data(&PipelineConfig::load(a.config.as_deref(), &a.overrides())?)?),
        Command::Kernel(a) => {
            let manifest = cmd_kernel(&PipelineConfig::load(a.config.as_deref(), &a.overrides())?)?;
            list(&manifest.artifacts);
        }
        Command::TrainEval(a) => {
            let (report, _) = cmd_train_eval(&PipelineConfig::load(a.config.as_deref(), &a.overrides())?)?;
            print_json(&report);
        }
        Command::Pipeline(a) => {
            let (report, manifest) = run_pipeline(&PipelineConfig::load(a.config.as_deref(), &a.overrides())?)?;
            list(&manifest.artifacts);
            print_json(&report);
        }
        Command::Compile(a) => {
            let circuit: GateCircuit = match (&a.circuit, &a.pair) {
                (Some(path), _) => io::read_json(path)?,
                (None, Some(pair)) => {
                    let (x1, x2) = parse_pair(pair).map_err(CliError::Config)?;
                    let spec = FeatureMapSpec { repetitions: a.repetitions, ..Default::default() };
                    qke_circuit(&x1, &x2, &spec)?
                }
                (None, None) => return Err(CliError::Config("either --circuit or --pair is required".into())),
            };
            let device = Device::preset(&a.device)?;
            let config = CompileConfig { two_pi: TwoPiAmplitude::Fixed(a.two_pi_amplitude), ..Default::default() };
            print_json(&cmd_compile(&circuit, &load_register(&a.register)?, &device, &config, &a.out)?);
        }
        Command::Plot(a) => list(&cmd_plot(&a.input, a.out_dir.as_deref())?),
        Command::Lattice(a) => {
            let pattern = LatticePattern::new(a.kind.into(), a.spacing, a.extent);
            print_json(&cmd_lattice(&pattern, a.cap, &Device::preset(&a.device)?, &a.out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
