use std::path::Path;
use std::process::Command;

const EXPORTS: &[&str] = &[
    "ncgeom_version",
    "ncgeom_last_error",
    "ncgeom_string_free",
    "ncgeom_triple_npoint",
    "ncgeom_triple_from_json",
    "ncgeom_triple_to_json",
    "ncgeom_triple_hilbert_dim",
    "ncgeom_triple_num_blocks",
    "ncgeom_triple_free",
    "ncgeom_distance_blocks",
    "ncgeom_distance_json",
    "ncgeom_morphism_from_json",
    "ncgeom_morphism_free",
    "ncgeom_classify_json",
];

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ncgeom.h")).unwrap()
}

#[test]
fn header_declares_every_export() {
    let h = header();
    for name in EXPORTS {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(h.contains("typedef struct NcgeomTriple NcgeomTriple;"));
    assert!(h.contains("NCGEOM_STATUS_OK = 0"));
}

#[test]
fn header_compiles_as_c() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ncgeom.h");
    match Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&path).status() {
        Ok(status) => assert!(status.success()),
        Err(e) => eprintln!("no C compiler available, skipping: {e}"),
    }
}
