//! Checks that the generated C header is valid C and declares the full
//! exported surface.

use std::path::PathBuf;
use std::process::Command;

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("marketinfo.h")
}

#[test]
fn header_declares_exports() {
    let text = std::fs::read_to_string(header_path()).expect("header generated at build time");
    for symbol in [
        "mi_estimate",
        "mi_test",
        "mi_survival",
        "mi_critical_value",
        "mi_mean_exact",
        "mi_pmf_new",
        "mi_pmf_len",
        "mi_pmf_atom",
        "mi_pmf_free",
        "MiStatus",
        "MiTestResult",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile_dir();
    let c_file = dir.join("smoke.c");
    std::fs::write(
        &c_file,
        "#include \"marketinfo.h\"\n\
         int main(void) {\n\
           unsigned char bits[] = {0, 1, 0, 1, 0, 1, 0, 1};\n\
           struct MiTestResult result;\n\
           enum MiStatus status = mi_test(bits, 8, 1, &result);\n\
           return status == MiOk ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header_path().parent().unwrap())
        .arg(&c_file)
        .status()
        .expect("cc available");
    assert!(status.success(), "header failed to compile as C");
    std::fs::remove_dir_all(&dir).ok();
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("marketinfo-header-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
