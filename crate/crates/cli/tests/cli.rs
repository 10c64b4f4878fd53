//! End-to-end smoke tests of the `vad` binary: exit codes, error tagging,
//! and the synth -> train -> score -> eval flow through the CLI surface.

use std::fs;
use std::path::Path;
use std::process::Command;

fn vad() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vad"))
}

fn write_tiny_config(dir: &Path) -> std::path::PathBuf {
    let root = dir.join("data");
    let out = dir.join("out");
    let config = format!(
        r#"
seed = 7
output_dir = "{out}"

[dataset]
root = "{root}"
train = ["train_000"]
test = ["test_000"]

[synth]
width = 32
height = 32
frames_per_clip = 12

[flow]
iterations = 40

[patches.appearance]
scales = [8]
stride = 8
target = 8
sample_cap = 300

[patches.motion]
window = 8
stride = 8
sample_cap = 300

[patches.test]
size = 8
stride = 8

[sdae.appearance]
hidden = [16, 8]
batch_size = 32
pretrain_epochs = 2
finetune_epochs = 2
learning_rate = 0.1

[sdae.motion]
hidden = [16, 8]
batch_size = 32
pretrain_epochs = 2
finetune_epochs = 2
learning_rate = 0.1

[sdae.joint]
hidden = [16, 8]
batch_size = 32
pretrain_epochs = 2
finetune_epochs = 2
learning_rate = 0.1

[ocsvm.appearance]
tolerance = 1e-5

[ocsvm.motion]
tolerance = 1e-5

[ocsvm.joint]
tolerance = 1e-5

[fusion]
subspace_dim = 4
"#,
        out = out.display(),
        root = root.display(),
    );
    let path = dir.join("vad.toml");
    fs::write(&path, config).unwrap();
    path
}

#[test]
fn full_cli_flow() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_tiny_config(tmp.path());

    for subcommand in ["synth", "train", "score", "eval"] {
        let output = vad()
            .arg("--config")
            .arg(&config)
            .arg(subcommand)
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "{subcommand} failed:\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
    }

    let eval_out = vad()
        .arg("--config")
        .arg(&config)
        .arg("eval")
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&eval_out.stdout);
    assert!(stdout.contains("frame-level AUC"), "{stdout}");
    assert!(stdout.contains("alpha = ["), "{stdout}");
    assert!(tmp.path().join("out/eval/summary.json").exists());
}

#[test]
fn missing_config_fails_nonzero() {
    let output = vad().arg("--config").arg("/nonexistent.toml").arg("synth").output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("error:"));
}

#[test]
fn category_tagged_errors_reach_stderr() {
    // Scoring without a trained bundle must fail with a tagged message.
    let tmp = tempfile::tempdir().unwrap();
    let config = write_tiny_config(tmp.path());
    let synth = vad().arg("--config").arg(&config).arg("synth").output().unwrap();
    assert!(synth.status.success());
    let output = vad().arg("--config").arg(&config).arg("score").output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error:"), "{stderr}");
}

#[test]
fn seed_override_changes_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_tiny_config(tmp.path());
    let run = |seed: &str| {
        let out = vad()
            .arg("--config")
            .arg(&config)
            .arg("--seed")
            .arg(seed)
            .arg("synth")
            .output()
            .unwrap();
        assert!(out.status.success());
        fs::read(tmp.path().join("data/train_000/frames/frame_000000.pgm")).unwrap()
    };
    let a = run("1");
    let b = run("2");
    let a_again = run("1");
    assert_ne!(a, b);
    assert_eq!(a, a_again);
}
