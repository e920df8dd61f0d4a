//! Compiles and runs a C program against the generated header and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "gtensor.h"

int main(void) {
    size_t m[2] = {2, 2};
    size_t alpha[2] = {2, 2};
    GtConfig *cfg = NULL;
    GtTensor *t = NULL;
    if (gt_config_random(3, m, 2, 1, &cfg) != GT_STATUS_OK) return 1;
    if (gt_tensor_compute(cfg, alpha, 2, &t) != GT_STATUS_OK) return 2;
    if (gt_tensor_len(t) != 9) return 3;
    double e[9];
    if (gt_tensor_entries(t, e, 9) != GT_STATUS_OK) return 4;
    size_t bad[2] = {1, 1};
    GtTensor *u = NULL;
    if (gt_tensor_compute(cfg, bad, 2, &u) != GT_STATUS_PRECONDITION) return 5;
    if (gt_last_error() == NULL || strlen(gt_last_error()) == 0) return 6;
    char *json = NULL;
    if (gt_tensor_to_json(t, &json) != GT_STATUS_OK) return 7;
    gt_string_free(json);
    gt_tensor_free(t);
    gt_config_free(cfg);
    printf("%s\n", gt_version());
    return 0;
}
"#;

/// The static library built alongside this test binary.
fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test binary>; `cargo test` leaves the library in deps.
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    [deps.to_path_buf(), deps.parent()?.to_path_buf()]
        .into_iter()
        .map(|d| d.join("libgtensor_ffi.a"))
        .find(|p| p.exists())
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/gtensor.h"))
            .unwrap();
    for name in [
        "GT_STATUS_OK",
        "gt_config_random",
        "gt_config_from_json",
        "gt_config_to_json",
        "gt_config_stacked",
        "gt_tensor_compute",
        "gt_tensor_entries",
        "gt_estimate",
        "gt_reconstruct",
        "gt_pgl_equivalent",
        "gt_dual_config",
        "gt_jacobian_rank",
        "gt_last_error",
        "gt_string_free",
        "typedef struct GtConfig GtConfig",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("skipping: static library not found");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let dir = std::env::temp_dir().join(format!("gtensor-ffi-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let exe = dir.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        env!("CARGO_PKG_VERSION")
    );
    let _ = std::fs::remove_dir_all(&dir);
}
