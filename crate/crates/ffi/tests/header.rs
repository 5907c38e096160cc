use std::path::Path;
use std::process::Command;

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/chainrec.h")).unwrap();
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15, "{exports:?}");
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    for token in [
        "typedef struct ChainrecSystem",
        "typedef struct ChainrecAnalysis",
        "CHAINREC_STATUS_PANIC = 6",
    ] {
        assert!(header.contains(token), "{token}");
    }
}

#[test]
fn c_program_compiles_against_header() {
    let out = std::env::temp_dir().join(format!("chainrec_smoke_{}.o", std::process::id()));
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-c"])
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-o")
        .arg(&out)
        .status()
        .expect("a C compiler on PATH");
    let _ = std::fs::remove_file(&out);
    assert!(status.success());
}
