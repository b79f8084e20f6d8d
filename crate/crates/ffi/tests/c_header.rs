//! Compiles a small C program against the generated header and static library.

use std::path::{Path, PathBuf};
use std::process::Command;

fn target_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    exe.parent()?.parent().map(Path::to_path_buf)
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib_dir) = target_dir().filter(|d| d.join("libbpmnkit_ffi.a").exists()) else {
        eprintln!("static library not found; skipping");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "bpmnkit.h"

int main(int argc, char **argv) {
    BpmnkitDocument *doc = NULL;
    if (bpmnkit_document_load(argv[1], &doc) != BPMNKIT_STATUS_OK) return 10;
    BpmnkitGraphStats stats;
    if (bpmnkit_document_graph_stats(doc, &stats) != BPMNKIT_STATUS_OK) return 11;
    char *json = NULL;
    bool ok = false;
    if (bpmnkit_document_validate(doc, &json, &ok) != BPMNKIT_STATUS_OK) return 12;
    printf("%zu %zu %d\n", stats.node_count, stats.edge_count, ok ? 1 : 0);
    bpmnkit_string_free(json);
    bpmnkit_document_free(doc);
    BpmnkitDocument *bad = NULL;
    const char *junk = "<x/>";
    if (bpmnkit_document_parse((const uint8_t *)junk, strlen(junk), &bad) != BPMNKIT_STATUS_PARSE_ERROR) return 13;
    if (bpmnkit_last_error() == NULL) return 14;
    return 0;
}
"#,
    )
    .unwrap();
    let exe = work.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(lib_dir.join("libbpmnkit_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe)
        .arg(manifest.join("../core/fixtures/models/loan-approval.bpmn"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "10 12 1");
}
