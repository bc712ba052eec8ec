//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "pego_lab.h"

int main(void) {
    PegoFunction *f = NULL;
    if (pego_function_from_json("{\"kind\":\"exponential\",\"a\":2}", &f) != PegoStatus_Ok) return 10;
    double l1 = 0, l2 = 0;
    if (pego_function_norms(f, 0.0, pego_grid_default(), &l1, &l2) != PegoStatus_Ok) return 11;
    pego_function_free(f);
    if (l1 < 0.4999 || l1 > 0.5001) return 12;

    PegoFamilyHandle *fam = NULL;
    if (pego_family_catalog("exp-scale", -1.0, pego_grid_default(), &fam) != PegoStatus_Ok) return 13;
    char *report = NULL;
    if (pego_diagnose_json(fam, 1e-2, &report) != PegoStatus_Ok) return 14;
    int ok = strstr(report, "\"verdict\": \"compact\"") != NULL;
    pego_string_free(report);
    pego_family_free(fam);
    if (!ok) return 15;

    if (pego_family_catalog("missing", -1.0, pego_grid_default(), &fam) != PegoStatus_UnknownFamily) return 16;
    char *msg = pego_last_error_message();
    if (msg == NULL) return 17;
    printf("%s\n", msg);
    pego_string_free(msg);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libpego_lab_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("client.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let bin = work.path().join("client");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "compile failed: {}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "client exited with {:?}", run.status);
    assert!(String::from_utf8_lossy(&run.stdout).contains("missing"));
}
