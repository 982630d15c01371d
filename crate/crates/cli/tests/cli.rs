use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn spinmca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinmca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn idx_images(images: &[Vec<u8>], side: u32) -> Vec<u8> {
    let mut out = vec![0, 0, 8, 3];
    for d in [images.len() as u32, side, side] {
        out.extend_from_slice(&d.to_be_bytes());
    }
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

fn idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = vec![0, 0, 8, 1];
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Tiny MNIST-shaped set: 4x4 images, class `c` lights up pixel `c` and a
/// little noise.
fn synthetic_mnist(dir: &Path) {
    let mnist = dir.join("mnist");
    fs::create_dir_all(&mnist).unwrap();
    let make = |n: usize, salt: usize| {
        let mut images = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let class = (i * 7 + salt) % 10;
            let mut img = vec![0u8; 16];
            img[class] = 255;
            img[(class + 5 + i % 3) % 16] = 40;
            images.push(img);
            labels.push(class as u8);
        }
        (idx_images(&images, 4), idx_labels(&labels))
    };
    let (img, lab) = make(400, 0);
    fs::write(mnist.join("train-images-idx3-ubyte"), img).unwrap();
    fs::write(mnist.join("train-labels-idx1-ubyte"), lab).unwrap();
    let (img, lab) = make(100, 3);
    fs::write(mnist.join("t10k-images-idx3-ubyte"), img).unwrap();
    fs::write(mnist.join("t10k-labels-idx1-ubyte"), lab).unwrap();
}

fn train(dir: &Path, out: &str, seed: &str) -> Output {
    spinmca(&[
        "train",
        "--data-dir",
        dir.to_str().unwrap(),
        "--topology",
        "16,12,10",
        "--epochs",
        "30",
        "--batch",
        "16",
        "--seed",
        seed,
        "--out",
        dir.join(out).to_str().unwrap(),
    ])
}

fn accuracy_of(report: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix("accuracy"))
        .unwrap()
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn power_cifar10_matches_table() {
    let o = spinmca(&["power", "--preset", "cifar10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("37.3500"));
    assert!(out.contains("86.3200"));
    assert!(out.contains("56.7308"));
    assert!(out.contains("230 mW"));
}

#[test]
fn power_asl_flags_small_deviation_as_ok() {
    let o = spinmca(&["power", "--preset", "asl", "--format", "csv"]);
    assert!(o.status.success());
    let line = stdout(&o)
        .lines()
        .find(|l| l.contains(",proposed,"))
        .unwrap()
        .to_string();
    assert!(line.starts_with("asl,"));
    assert!(line.contains("74.3400,74.5000"));
    assert!(line.ends_with(",ok"));
}

#[test]
fn power_single_neuron() {
    let o = spinmca(&["power", "--topology", "2,1", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("custom,\"2,1\",proposed,0.0450,"));
}

#[test]
fn power_csv_and_table_agree() {
    let csv = stdout(&spinmca(&["power", "--format", "csv"]));
    let table = stdout(&spinmca(&["power"]));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        // Topology is quoted and contains commas; count from the end.
        let n = cells.len();
        for cell in [cells[n - 6], cells[n - 5], cells[n - 3]] {
            assert!(table.contains(cell), "{cell} missing from table");
        }
    }
}

#[test]
fn power_unknown_preset_lists_choices() {
    let o = spinmca(&["power", "--preset", "imagenet"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("mnist") && err.contains("asl") && err.contains("cifar10"));
}

#[test]
fn power_config_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[power]\nim = 2e-6\nsigmoid_neuron = 3e-6\n").unwrap();
    let o = spinmca(&[
        "--config",
        cfg.to_str().unwrap(),
        "power",
        "--topology",
        "2,1",
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(",proposed,0.0050,"));
}

#[test]
fn malformed_config_is_an_io_class_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[memristor\nr_on = ").unwrap();
    let o = spinmca(&["--config", cfg.to_str().unwrap(), "power"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("cfg.toml"));
}

fn demo_rows(args: &[&str]) -> Vec<Vec<String>> {
    let mut full = vec!["device-demo"];
    full.extend_from_slice(args);
    let o = spinmca(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn demo_equal_inputs_read_zero() {
    let rows = demo_rows(&["--i-plus", "10e-6", "--i-minus", "10e-6"]);
    let reads: Vec<_> = rows.iter().filter(|r| r[1] == "read").collect();
    assert!(!reads.is_empty());
    assert!(reads.iter().all(|r| r[4].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn demo_35ua_reaches_edge_with_monotone_time() {
    let rows = demo_rows(&["--i-plus", "35e-6", "--i-minus", "0"]);
    let times: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    // 5 ns period at 0.05 ns resolution.
    assert_eq!(rows.len(), 100);
    let last_write = rows.iter().rfind(|r| r[1] == "write").unwrap();
    let x: f64 = last_write[2].parse().unwrap();
    assert!((x - 100e-9).abs() < 1e-15, "{x}");
}

#[test]
fn demo_negative_current_is_rejected() {
    let o = spinmca(&["device-demo", "--i-plus", "-1e-6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("non-negative"));
}

#[test]
fn train_missing_data_names_the_path() {
    let dir = TempDir::new().unwrap();
    let o = train(dir.path(), "w.json", "1");
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("train-images-idx3-ubyte"));
}

#[test]
fn train_quantize_eval_pipeline() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synthetic_mnist(d);
    let data_dir = d.to_str().unwrap();

    let o = train(d, "a.json", "7");
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("epoch  30"));
    assert!(stdout(&o).contains("float test accuracy"));

    // Same seed, same artifact.
    assert!(train(d, "b.json", "7").status.success());
    assert_eq!(
        fs::read(d.join("a.json")).unwrap(),
        fs::read(d.join("b.json")).unwrap()
    );

    let weights = d.join("a.json");
    let quantized = d.join("q.json");
    let eval = |w: &Path, extra: &[&str]| {
        let mut args = vec![
            "eval",
            "--data-dir",
            data_dir,
            "--weights",
            w.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        spinmca(&args)
    };

    let o = eval(&weights, &["--fidelity", "device"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("quantize"));

    let o = spinmca(&[
        "quantize",
        "--weights",
        weights.to_str().unwrap(),
        "--out",
        quantized.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let behavioral = eval(&quantized, &[]);
    assert!(behavioral.status.success(), "{}", stderr(&behavioral));
    let device = eval(&quantized, &["--fidelity", "device"]);
    assert!(device.status.success(), "{}", stderr(&device));
    let (b, dv) = (
        accuracy_of(&stdout(&behavioral)),
        accuracy_of(&stdout(&device)),
    );
    assert!(b > 0.5, "synthetic task should be learnable, got {b}");
    assert!((b - dv).abs() <= 0.01, "{b} vs {dv}");

    let programmed = eval(
        &quantized,
        &["--fidelity", "device", "--programming", "device"],
    );
    assert!(programmed.status.success(), "{}", stderr(&programmed));

    let step = eval(&quantized, &["--activation", "step", "--format", "csv"]);
    assert!(step.status.success(), "{}", stderr(&step));
    assert!(stdout(&step).contains(",step,"));

    let empty = eval(&quantized, &["--limit", "0"]);
    assert_eq!(empty.status.code(), Some(2));
    assert!(stderr(&empty).contains("empty"));
}
