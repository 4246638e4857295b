mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use permex_core::codecs::{ppm, wav, PcmAudio, RasterImage};
use tempfile::TempDir;

fn permex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permex")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = permex(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    permex(args).status.code().unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn kv(stdout: &str, key: &str) -> String {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {stdout}"))
        .to_string()
}

#[test]
fn expand_then_invert_restores_bytes() {
    let dir = TempDir::new().unwrap();
    let (input, out, key, back) = (path(&dir, "in.txt"), path(&dir, "out.bin"), path(&dir, "k.pxk"), path(&dir, "back.txt"));
    std::fs::write(&input, common::GARDEN).unwrap();
    let stdout = ok(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--seed", "abcd"]);
    assert!(stdout.contains("expanded"));
    let transformed = std::fs::read(&out).unwrap();
    assert_eq!(transformed.len(), common::GARDEN.len());
    assert_ne!(transformed, common::GARDEN);
    ok(&["invert", s(&out), "-o", s(&back), "--key", s(&key)]);
    assert_eq!(std::fs::read(&back).unwrap(), common::GARDEN);
}

#[test]
fn all_tails_round_trip_on_odd_lengths() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "in.bin");
    std::fs::write(&input, &common::HARBOR[..1001]).unwrap();
    for tail in ["identity", "drop", "pad"] {
        let (out, key, back) = (path(&dir, "o"), path(&dir, "k"), path(&dir, "b"));
        ok(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--seed", "01", "--size", "64", "--tail", tail]);
        ok(&["invert", s(&out), "-o", s(&back), "--key", s(&key)]);
        let restored = std::fs::read(&back).unwrap();
        let expected = if tail == "drop" { &common::HARBOR[..1000] } else { &common::HARBOR[..1001] };
        assert_eq!(restored, expected, "tail {tail}");
    }
}

#[test]
fn seeded_runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "in.txt");
    std::fs::write(&input, common::RAILWAY).unwrap();
    let mut runs = Vec::new();
    for i in 0..2 {
        let (out, key) = (path(&dir, &format!("o{i}")), path(&dir, &format!("k{i}")));
        ok(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--seed", "0xfeed", "--size", "128", "--count", "4"]);
        runs.push((std::fs::read(out).unwrap(), std::fs::read(key).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn keygen_set_is_reused_by_expand() {
    let dir = TempDir::new().unwrap();
    let (set, input, out, key, back) =
        (path(&dir, "set.pxk"), path(&dir, "in"), path(&dir, "out"), path(&dir, "k.pxk"), path(&dir, "back"));
    std::fs::write(&input, common::HARBOR).unwrap();
    assert!(ok(&["keygen", "--key", s(&set), "--size", "32", "--count", "2", "--seed", "11"]).contains("wrote 2"));
    ok(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--set", s(&set), "--seed", "22"]);
    let trace = permex_core::keyfile::load(&key).unwrap();
    assert_eq!(trace.set, permex_core::keyfile::load(&set).unwrap().set);
    ok(&["invert", s(&out), "-o", s(&back), "--key", s(&key)]);
    assert_eq!(std::fs::read(&back).unwrap(), common::HARBOR);
}

#[test]
fn analyze_constant_and_uniform_files() {
    let dir = TempDir::new().unwrap();
    let zeros = path(&dir, "zeros");
    std::fs::write(&zeros, [0u8; 256]).unwrap();
    let stdout = ok(&["analyze", s(&zeros), "--kv"]);
    assert_eq!(kv(&stdout, "entropy"), "0.000000");
    assert_eq!(kv(&stdout, "mean"), "0.0000");
    assert_eq!(kv(&stdout, "chi_square"), "65280.00");

    let ramp = path(&dir, "ramp");
    std::fs::write(&ramp, (0..=255u8).collect::<Vec<_>>()).unwrap();
    let stdout = ok(&["analyze", s(&ramp), "--kv"]);
    assert_eq!(kv(&stdout, "entropy"), "8.000000");
    assert_eq!(kv(&stdout, "chi_square"), "0.00");
    assert_eq!(kv(&stdout, "mean"), "127.5000");

    let json: serde_json::Value = serde_json::from_str(&ok(&["analyze", s(&ramp), "--json"])).unwrap();
    assert_eq!(json["entropy"], 8.0);
    assert_eq!(json["byte_count"], 256);
}

#[test]
fn expand_report_is_json() {
    let dir = TempDir::new().unwrap();
    let (input, out, key, report) = (path(&dir, "in"), path(&dir, "out"), path(&dir, "k"), path(&dir, "r.json"));
    std::fs::write(&input, common::HARBOR).unwrap();
    ok(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--seed", "5", "--report", s(&report)]);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["block_size"], 256);
    assert_eq!(json["count"], 16);
    assert_eq!(json["input_bits"], json["output_bits"]);
    assert!(json["after"]["entropy"].as_f64().unwrap() > json["before"]["entropy"].as_f64().unwrap());
}

#[test]
fn image_round_trip() {
    let dir = TempDir::new().unwrap();
    let (input, out, key, back) = (path(&dir, "in.ppm"), path(&dir, "out.ppm"), path(&dir, "k"), path(&dir, "back.ppm"));
    let samples: Vec<u8> = (0..64 * 32 * 3).map(|i| (i % 251) as u8).collect();
    let file = ppm::encode(&RasterImage::new(64, 32, 3, samples).unwrap(), ppm::PixmapKind::Ppm);
    std::fs::write(&input, &file).unwrap();
    ok(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--format", "image", "--seed", "7", "--size", "512"]);
    let transformed = std::fs::read(&out).unwrap();
    assert_eq!(transformed.len(), file.len());
    assert!(ppm::decode(&transformed).is_ok());
    ok(&["invert", s(&out), "-o", s(&back), "--key", s(&key), "--format", "image"]);
    assert_eq!(std::fs::read(&back).unwrap(), file);
    assert_eq!(
        code(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--format", "image", "--seed", "7", "--tail", "drop"]),
        2
    );
}

#[test]
fn stereo_audio_round_trip() {
    let dir = TempDir::new().unwrap();
    let (input, out, key, back) = (path(&dir, "in.wav"), path(&dir, "out.wav"), path(&dir, "k"), path(&dir, "back.wav"));
    let left = (0..5000).map(|i| ((i * 37) % 2000 - 1000) as i16).collect();
    let right = (0..5000).map(|i| ((i * 11) % 600) as i16).collect();
    let file = wav::encode(&PcmAudio::stereo(8000, left, right).unwrap());
    std::fs::write(&input, &file).unwrap();
    ok(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--format", "audio", "--seed", "9"]);
    assert_eq!(permex_core::keyfile::load_many(&key).unwrap().len(), 2);
    ok(&["invert", s(&out), "-o", s(&back), "--key", s(&key), "--format", "audio"]);
    assert_eq!(std::fs::read(&back).unwrap(), file);
}

#[test]
fn sweep_prints_grid() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "in");
    std::fs::write(&input, common::HARBOR).unwrap();
    let stdout = ok(&["sweep", s(&input), "--sizes", "32,64", "--counts", "2,4", "--repeat", "2", "--seed", "3"]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "size\tcount\tpass\tentropy");
    assert_eq!(lines.len(), 1 + 2 * 2 * 3);
    let json: serde_json::Value =
        serde_json::from_str(&ok(&["sweep", s(&input), "--sizes", "32", "--seed", "3", "--json"])).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes_by_category() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "in");
    std::fs::write(&input, common::HARBOR).unwrap();
    let (out, key) = (path(&dir, "out"), path(&dir, "k"));
    let missing = path(&dir, "missing");

    assert_eq!(code(&["expand"]), 2);
    assert_eq!(code(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--size", "100", "--seed", "1"]), 2);
    assert_eq!(code(&["expand", s(&input), "-o", s(&input), "--key", s(&key), "--seed", "1"]), 2);
    assert_eq!(code(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--cycle"]), 2);
    assert_eq!(code(&["analyze", s(&missing)]), 3);
    assert_eq!(code(&["invert", s(&input), "-o", s(&out), "--key", s(&missing)]), 3);

    let bad_key = path(&dir, "bad.pxk");
    std::fs::write(&bad_key, b"not a key file").unwrap();
    let failed = permex(&["invert", s(&input), "-o", s(&out), "--key", s(&bad_key)]);
    assert_eq!(failed.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&failed.stderr).starts_with("permex: error[format]"));
    assert_eq!(code(&["analyze", s(&input), "--format", "image"]), 4);

    let pool = path(&dir, "pool");
    std::fs::write(&pool, [0x5Au8; 16]).unwrap();
    assert_eq!(code(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--entropy-file", s(&pool)]), 5);
    assert!(!out.exists());
    assert_eq!(
        code(&["expand", s(&input), "-o", s(&out), "--key", s(&key), "--entropy-file", s(&pool), "--cycle", "--size", "8", "--count", "2"]),
        0
    );
}
