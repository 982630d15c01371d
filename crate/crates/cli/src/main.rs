use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spinmca::config::{DeviceConfig, ProgrammingKind};
use spinmca::data::{
    float_accuracy, load_cifar10_grayscale, load_mnist, quantize_weights, train_mlp, Dataset,
    Hyper, WeightFile,
};
use spinmca::interface::{trace_cycle, validate_schedule};
use spinmca::network::{evaluate_accuracy, ActivationKind, ForwardPath, Network, Topology};
use spinmca::power::{power_rows, render_csv, render_table, Preset};
use spinmca::{Error, ErrorClass, Result};

#[derive(Parser, Debug)]
#[command(
    name = "spinmca",
    version,
    about = "Memristive crossbar networks with domain-wall interface modules"
)]
struct Cli {
    /// TOML file with device parameter overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the float network offline and write a weight file.
    Train(TrainArgs),
    /// Add 31-level quantization to a weight file.
    Quantize(QuantizeArgs),
    /// Score a weight file on the hardware network.
    Eval(EvalArgs),
    /// Component-level power report.
    Power(PowerArgs),
    /// Trace one interface-module clock period.
    DeviceDemo(DemoArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DatasetKind {
    Mnist,
    Cifar10,
}

impl DatasetKind {
    fn topology(self) -> Topology {
        match self {
            DatasetKind::Mnist => Topology::mnist(),
            DatasetKind::Cifar10 => Topology::cifar10(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Fidelity {
    Behavioral,
    Device,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ActivationArg {
    Sigmoid,
    Step,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ProgrammingArg {
    Ideal,
    Device,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Mnist,
    Asl,
    Cifar10,
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long, value_enum, default_value = "mnist")]
    dataset: DatasetKind,

    /// Directory holding `mnist/` and `cifar-10-batches-bin/`.
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Layer widths, e.g. 784,500,300,128,10 (default: the dataset preset).
    #[arg(long)]
    topology: Option<Topology>,

    #[arg(long, default_value_t = 8)]
    epochs: usize,

    #[arg(long, default_value_t = 0.1)]
    lr: f32,

    #[arg(long, default_value_t = 32)]
    batch: usize,

    #[arg(long, default_value_t = 0.9)]
    momentum: f32,

    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Train on the first N samples only.
    #[arg(long)]
    limit: Option<usize>,

    /// Score on the first N test samples only.
    #[arg(long)]
    test_limit: Option<usize>,

    /// Output weight file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct QuantizeArgs {
    /// Float weight file.
    #[arg(long)]
    weights: PathBuf,

    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,

    #[arg(long)]
    weights: PathBuf,

    /// `behavioral` uses the closed-form IM transfer, `device` simulates
    /// every IM clock period.
    #[arg(long, value_enum, default_value = "behavioral")]
    fidelity: Fidelity,

    #[arg(long, value_enum)]
    activation: Option<ActivationArg>,

    /// How the crossbar cells are written (overrides the config file).
    #[arg(long, value_enum)]
    programming: Option<ProgrammingArg>,

    /// Score on the first N test samples only.
    #[arg(long)]
    limit: Option<usize>,

    #[arg(long, value_enum, default_value = "table")]
    format: Format,

    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PowerArgs {
    /// Dataset preset; all three when neither this nor --topology is given.
    #[arg(long, value_enum, conflicts_with = "topology")]
    preset: Option<PresetArg>,

    /// Custom layer widths, e.g. 2,1.
    #[arg(long)]
    topology: Option<Topology>,

    #[arg(long, value_enum, default_value = "table")]
    format: Format,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DemoArgs {
    /// Positive-column current in A.
    #[arg(long, allow_hyphen_values = true, default_value_t = 35e-6)]
    i_plus: f64,

    /// Negative-column current in A.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    i_minus: f64,

    /// Integration step in s.
    #[arg(long, default_value_t = 0.05e-9)]
    dt: f64,

    #[arg(long, value_enum, default_value = "csv")]
    format: Format,

    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<DeviceConfig> {
    match path {
        Some(p) => DeviceConfig::load(p),
        None => Ok(DeviceConfig::default()),
    }
}

fn load_test_set(data: &DataArgs) -> Result<Dataset> {
    match data.dataset {
        DatasetKind::Mnist => {
            let dir = data.data_dir.join("mnist");
            load_mnist(
                dir.join("t10k-images-idx3-ubyte"),
                dir.join("t10k-labels-idx1-ubyte"),
            )
        }
        DatasetKind::Cifar10 => load_cifar10_grayscale(&[data
            .data_dir
            .join("cifar-10-batches-bin")
            .join("test_batch.bin")]),
    }
}

fn load_train_set(data: &DataArgs) -> Result<Dataset> {
    match data.dataset {
        DatasetKind::Mnist => {
            let dir = data.data_dir.join("mnist");
            load_mnist(
                dir.join("train-images-idx3-ubyte"),
                dir.join("train-labels-idx1-ubyte"),
            )
        }
        DatasetKind::Cifar10 => {
            let dir = data.data_dir.join("cifar-10-batches-bin");
            let batches: Vec<PathBuf> = (1..=5)
                .map(|i| dir.join(format!("data_batch_{i}.bin")))
                .collect();
            load_cifar10_grayscale(&batches)
        }
    }
}

fn limited(set: Dataset, limit: Option<usize>) -> Dataset {
    match limit {
        Some(n) => set.take(n),
        None => set,
    }
}

fn emit(report: &str, out: Option<&Path>) -> Result<()> {
    print!("{report}");
    if let Some(path) = out {
        std::fs::write(path, report).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let topology = args
        .topology
        .clone()
        .unwrap_or_else(|| args.data.dataset.topology());
    let train = limited(load_train_set(&args.data)?, args.limit);
    let test = limited(load_test_set(&args.data)?, args.test_limit);
    let hyper = Hyper {
        lr: args.lr,
        epochs: args.epochs,
        batch: args.batch,
        seed: args.seed,
        momentum: args.momentum,
    };
    let report = train_mlp(&topology, &train, &hyper)?;
    for (epoch, loss) in report.epoch_losses.iter().enumerate() {
        println!("epoch {:>3}  loss {loss:.6}", epoch + 1);
    }
    let accuracy = float_accuracy(&report.weights, &test)?;
    println!(
        "float test accuracy {:.4} on {} samples",
        accuracy,
        test.len()
    );
    report.weights.save(&args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_quantize(args: &QuantizeArgs) -> Result<()> {
    let wf = WeightFile::load(&args.weights)?;
    let quantized = quantize_weights(&wf)?;
    for (i, layer) in quantized.layers.iter().enumerate() {
        println!(
            "layer {i}: {}x{}, w_max {:.6}",
            layer.inputs, layer.outputs, layer.w_max
        );
    }
    quantized.save(&args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs, cfg: &DeviceConfig) -> Result<()> {
    let wf = WeightFile::load(&args.weights)?;
    let path = match args.fidelity {
        Fidelity::Behavioral => ForwardPath::Behavioral,
        Fidelity::Device => ForwardPath::Device,
    };
    let wf = if wf.is_quantized() {
        wf
    } else if path == ForwardPath::Device {
        return Err(Error::Argument(format!(
            "{} holds float weights; device fidelity needs a quantized file (run `quantize` first)",
            args.weights.display()
        )));
    } else {
        log::info!("quantizing float weights in memory");
        quantize_weights(&wf)?
    };

    let mut cfg = *cfg;
    if let Some(a) = args.activation {
        cfg.network.activation = match a {
            ActivationArg::Sigmoid => ActivationKind::Sigmoid,
            ActivationArg::Step => ActivationKind::Step,
        };
    }
    if let Some(p) = args.programming {
        cfg.network.programming = match p {
            ProgrammingArg::Ideal => ProgrammingKind::Ideal,
            ProgrammingArg::Device => ProgrammingKind::Device,
        };
    }
    let hw = cfg.hardware_settings()?;
    let net = Network::build(&wf.quantized_layers()?, &hw)?;
    let test = limited(load_test_set(&args.data)?, args.limit);
    let accuracy = evaluate_accuracy(&net, &test, path)?;

    let fidelity = match path {
        ForwardPath::Behavioral => "behavioral",
        ForwardPath::Device => "device",
    };
    let activation = match cfg.network.activation {
        ActivationKind::Sigmoid => "sigmoid",
        ActivationKind::Step => "step",
    };
    let programming = match cfg.network.programming {
        ProgrammingKind::Ideal => "ideal",
        ProgrammingKind::Device => "device",
    };
    let mut report = String::new();
    match args.format {
        Format::Csv => {
            report.push_str("topology,fidelity,activation,programming,samples,accuracy\n");
            let _ = writeln!(
                report,
                "\"{}\",{fidelity},{activation},{programming},{},{accuracy:.6}",
                net.topology(),
                test.len()
            );
        }
        Format::Table => {
            let _ = writeln!(report, "topology     {}", net.topology());
            let _ = writeln!(report, "fidelity     {fidelity}");
            let _ = writeln!(report, "activation   {activation}");
            let _ = writeln!(report, "programming  {programming}");
            let _ = writeln!(report, "samples      {}", test.len());
            let _ = writeln!(report, "accuracy     {accuracy:.6}");
        }
    }
    emit(&report, args.out.as_deref())
}

fn cmd_power(args: &PowerArgs, cfg: &DeviceConfig) -> Result<()> {
    let mut rows = Vec::new();
    if let Some(topology) = &args.topology {
        rows.extend(power_rows("custom", topology, None, &cfg.power)?);
    } else {
        let presets: Vec<Preset> = match args.preset {
            None => Preset::ALL.to_vec(),
            Some(PresetArg::Mnist) => vec![Preset::Mnist],
            Some(PresetArg::Asl) => vec![Preset::Asl],
            Some(PresetArg::Cifar10) => vec![Preset::Cifar10],
        };
        for preset in presets {
            rows.extend(power_rows(
                preset.name(),
                &preset.topology(),
                Some(preset.published()),
                &cfg.power,
            )?);
        }
    }
    let report = match args.format {
        Format::Table => render_table(&rows),
        Format::Csv => render_csv(&rows),
    };
    emit(&report, args.out.as_deref())
}

fn cmd_device_demo(args: &DemoArgs, cfg: &DeviceConfig) -> Result<()> {
    let im = cfg.im_params()?;
    for warning in validate_schedule(&im.schedule)?.warnings {
        eprintln!("warning: {warning}");
    }
    let rows = trace_cycle(args.i_plus, args.i_minus, &im, args.dt)?;
    let mut report = String::new();
    match args.format {
        Format::Csv => {
            report.push_str("time_s,phase,position_m,dw_current_a,output_a\n");
            for r in &rows {
                let _ = writeln!(
                    report,
                    "{:e},{},{:e},{:e},{:e}",
                    r.time,
                    r.phase.name(),
                    r.position,
                    r.dw_current,
                    r.output
                );
            }
        }
        Format::Table => {
            let _ = writeln!(
                report,
                "{:>10} {:>6} {:>12} {:>14} {:>14}",
                "time ns", "phase", "position nm", "dw current uA", "output uA"
            );
            for r in &rows {
                let _ = writeln!(
                    report,
                    "{:>10.3} {:>6} {:>12.3} {:>14.6} {:>14.6}",
                    r.time * 1e9,
                    r.phase.name(),
                    r.position * 1e9,
                    r.dw_current * 1e6,
                    r.output * 1e6
                );
            }
        }
    }
    emit(&report, args.out.as_deref())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Quantize(a) => cmd_quantize(a),
        Command::Eval(a) => cmd_eval(a, &cfg),
        Command::Power(a) => cmd_power(a, &cfg),
        Command::DeviceDemo(a) => cmd_device_demo(a, &cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Argument => 2,
                ErrorClass::Io => 3,
                ErrorClass::Numeric => 4,
            })
        }
    }
}
