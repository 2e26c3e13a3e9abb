#![allow(dead_code)]

pub mod agree;
pub mod lattice;

use std::path::PathBuf;

use pml_sem::model::Model;

pub const FIXTURES: &[&str] = &["peterson", "prodcons1", "prodcons2", "pingpong", "selector", "gotoloop", "runchain"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.pml"))
}

pub fn fixture_source(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn fixture(name: &str) -> Model {
    Model::from_source(&fixture_source(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}
