use std::path::Path;

fn header() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/isac_pa.h");
    std::fs::read_to_string(path).expect("header is generated by build.rs")
}

#[test]
fn header_declares_every_export() {
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let h = header();
    let mut exports = 0;
    let mut lines = src.lines();
    while let Some(line) = lines.next() {
        if line.trim() != "#[no_mangle]" {
            continue;
        }
        let sig = lines.by_ref().find(|l| l.contains("extern \"C\" fn")).unwrap();
        let name = sig.split("fn ").nth(1).unwrap().split('(').next().unwrap();
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
        exports += 1;
    }
    assert!(exports >= 18, "only {exports} exports found");
}

#[test]
fn header_has_guard_and_status_codes() {
    let h = header();
    assert!(h.contains("#ifndef ISAC_PA_H"));
    for (name, value) in [("OK", 0), ("NULL_POINTER", 1), ("CONFIG", 2), ("NUMERIC", 3), ("PANIC", 7)] {
        assert!(h.contains(&format!("ISAC_STATUS_{name} = {value}")), "ISAC_STATUS_{name}");
    }
    assert!(h.contains("typedef struct IsacAmplifier IsacAmplifier;"));
}
