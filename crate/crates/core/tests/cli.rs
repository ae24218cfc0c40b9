//! End-to-end tests of the `uvremap` binary: exit codes, JSON report
//! shape, and file outputs.

use std::path::Path;
use std::process::{Command, Output};

use uvremap::fixtures;
use uvremap::texture::{load_png, save_png};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uvremap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn uvremap")
}

fn json_stdout(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn seed_fixtures(dir: &Path) {
    let out = run(&[
        "gen-fixtures",
        "--out-dir",
        dir.to_str().unwrap(),
        "--grid",
        "8",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
}

#[test]
fn build_map_reports_and_caches() {
    let dir = tempfile::tempdir().unwrap();
    seed_fixtures(dir.path());
    let map = dir.path().join("id.smap");
    let out = run(&[
        "build-map",
        "--src-mesh",
        dir.path().join("grid_src.obj").to_str().unwrap(),
        "--tgt-mesh",
        dir.path().join("grid_tgt.obj").to_str().unwrap(),
        "--corr",
        dir.path().join("corr_identity.json").to_str().unwrap(),
        "--width",
        "256",
        "--height",
        "256",
        "--out",
        map.to_str().unwrap(),
    ]);
    let v = json_stdout(&out);
    assert!(v["precompute_s"].as_f64().unwrap() > 0.0);
    assert_eq!(v["width"], 256);
    assert_eq!(v["height"], 256);
    assert!(v["mask_coverage"].as_f64().unwrap() > 0.99);
    assert_eq!(v["skipped_faces"], 0);
    assert_eq!(v["fingerprint"].as_str().unwrap().len(), 32);
    assert!(map.exists());
}

#[test]
fn missing_required_flag_is_usage_error() {
    let out = run(&[
        "build-map",
        "--src-mesh",
        "a.obj",
        "--tgt-mesh",
        "b.obj",
        "--width",
        "8",
        "--height",
        "8",
        "--out",
        "m.smap",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_faces_are_skipped_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    // Two faces collapsed onto a single UV line: zero coverage, all skipped.
    std::fs::write(
        dir.path().join("degen.obj"),
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nvt 0.0 0.5\nvt 0.5 0.5\nvt 1.0 0.5\n\
         f 1/1 2/2 3/3\nf 3/3 2/2 1/1\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("corr.json"),
        "{\"mode\":\"face\",\"pairs\":{\"0\":0,\"1\":1}}",
    )
    .unwrap();
    let out = run(&[
        "build-map",
        "--src-mesh",
        dir.path().join("degen.obj").to_str().unwrap(),
        "--tgt-mesh",
        dir.path().join("degen.obj").to_str().unwrap(),
        "--corr",
        dir.path().join("corr.json").to_str().unwrap(),
        "--width",
        "32",
        "--height",
        "32",
        "--out",
        dir.path().join("d.smap").to_str().unwrap(),
    ]);
    let v = json_stdout(&out);
    assert_eq!(v["mask_coverage"], 0.0);
    assert_eq!(v["skipped_degenerate"], 2);
    assert_eq!(v["skipped_faces"], 2);
}

#[test]
fn transfer_identity_and_staleness_and_fill_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    seed_fixtures(dir.path());
    let map = dir.path().join("id.smap");
    let build = run(&[
        "build-map",
        "--src-mesh",
        dir.path().join("grid_src.obj").to_str().unwrap(),
        "--tgt-mesh",
        dir.path().join("grid_tgt.obj").to_str().unwrap(),
        "--corr",
        dir.path().join("corr_identity.json").to_str().unwrap(),
        "--width",
        "256",
        "--height",
        "256",
        "--out",
        map.to_str().unwrap(),
    ]);
    let fp = json_stdout(&build)["fingerprint"]
        .as_str()
        .unwrap()
        .to_string();

    let src_tex = dir.path().join("gradient_256.png");
    let out_tex = dir.path().join("out.png");
    let out = run(&[
        "transfer",
        "--map",
        map.to_str().unwrap(),
        "--src-tex",
        src_tex.to_str().unwrap(),
        "--out",
        out_tex.to_str().unwrap(),
        "--expect-fingerprint",
        &fp,
    ]);
    let v = json_stdout(&out);
    assert!(v["apply_s"].as_f64().unwrap() > 0.0);
    let original = load_png(&src_tex).unwrap();
    let transferred = load_png(&out_tex).unwrap();
    assert_eq!(original.data, transferred.data);

    // Wrong fingerprint: stale cache, dedicated exit code.
    let stale = run(&[
        "transfer",
        "--map",
        map.to_str().unwrap(),
        "--src-tex",
        src_tex.to_str().unwrap(),
        "--out",
        out_tex.to_str().unwrap(),
        "--expect-fingerprint",
        "00000000000000000000000000000000",
    ]);
    assert_eq!(stale.status.code(), Some(3));

    // Fill texture with the wrong resolution: shape error exit code.
    let small = fixtures::gradient_texture(16);
    let small_path = dir.path().join("small.png");
    save_png(&small, &small_path).unwrap();
    let mismatch = run(&[
        "transfer",
        "--map",
        map.to_str().unwrap(),
        "--src-tex",
        src_tex.to_str().unwrap(),
        "--out",
        out_tex.to_str().unwrap(),
        "--fill",
        small_path.to_str().unwrap(),
    ]);
    assert_eq!(mismatch.status.code(), Some(4));
}

#[test]
fn roundtrip_identity_report_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    seed_fixtures(dir.path());
    let map = dir.path().join("id.smap");
    let build = run(&[
        "build-map",
        "--src-mesh",
        dir.path().join("grid_src.obj").to_str().unwrap(),
        "--tgt-mesh",
        dir.path().join("grid_tgt.obj").to_str().unwrap(),
        "--corr",
        dir.path().join("corr_identity.json").to_str().unwrap(),
        "--width",
        "256",
        "--height",
        "256",
        "--out",
        map.to_str().unwrap(),
    ]);
    assert!(build.status.success());

    let report = dir.path().join("report.json");
    let out = run(&[
        "roundtrip",
        "--fwd-map",
        map.to_str().unwrap(),
        "--rev-map",
        map.to_str().unwrap(),
        "--tex",
        dir.path().join("gradient_256.png").to_str().unwrap(),
        "--out",
        dir.path().join("rt.png").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    for scope in ["full", "masked"] {
        assert_eq!(v[scope]["l1"], 0.0);
        assert_eq!(v[scope]["psnr"], "inf");
        assert!((v[scope]["ssim"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(v[scope]["timings"]["roundtrip_s"].as_f64().unwrap() > 0.0);
    }
    assert!(v["masked"]["mask_coverage"].as_f64().unwrap() > 0.99);

    // Without --report, the same document goes to stdout.
    let stdout = run(&[
        "roundtrip",
        "--fwd-map",
        map.to_str().unwrap(),
        "--rev-map",
        map.to_str().unwrap(),
        "--tex",
        dir.path().join("gradient_256.png").to_str().unwrap(),
        "--out",
        dir.path().join("rt2.png").to_str().unwrap(),
    ]);
    let v2 = json_stdout(&stdout);
    assert_eq!(v2["full"]["l1"], 0.0);
}

#[test]
fn bench_rejects_zero_repeats_and_reports_agreement() {
    let dir = tempfile::tempdir().unwrap();
    seed_fixtures(dir.path());
    let mesh = dir.path().join("grid_src.obj");
    let corr = dir.path().join("corr_identity.json");
    let tex = dir.path().join("gradient_256.png");

    let zero = run(&[
        "bench",
        "--src-mesh",
        mesh.to_str().unwrap(),
        "--tgt-mesh",
        mesh.to_str().unwrap(),
        "--corr",
        corr.to_str().unwrap(),
        "--width",
        "64",
        "--height",
        "64",
        "--tex",
        tex.to_str().unwrap(),
        "--repeat",
        "0",
    ]);
    assert_eq!(zero.status.code(), Some(2));

    let out = run(&[
        "bench",
        "--src-mesh",
        mesh.to_str().unwrap(),
        "--tgt-mesh",
        mesh.to_str().unwrap(),
        "--corr",
        corr.to_str().unwrap(),
        "--width",
        "128",
        "--height",
        "128",
        "--tex",
        tex.to_str().unwrap(),
        "--repeat",
        "2",
    ]);
    let v = json_stdout(&out);
    assert_eq!(v["repeats"], 2);
    assert!(v["speedup"].as_f64().unwrap() > 0.0);
    assert_eq!(v["agreement"]["l1"], 0.0);
    assert_eq!(v["agreement"]["psnr"], "inf");
}

#[test]
fn gen_fixtures_minimal_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "gen-fixtures",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--grid",
        "1",
    ]);
    assert!(out.status.success());
    let mesh = uvremap::mesh::load_mesh(&dir.path().join("grid_src.obj")).unwrap();
    assert_eq!(mesh.faces.len(), 2);
    assert!(dir.path().join("gradient_1024.png").exists());
}
