#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use equipart::measures::DensityGrid;
use equipart::Point2;
use serde_json::{json, Value};

pub const BLOB_RESOLUTION: usize = 256;

/// The shared two-blob instance on the unit square.
pub fn blob_pair() -> [DensityGrid; 2] {
    [
        DensityGrid::gaussian_blob(Point2::new(0.35, 0.45), (0.22, 0.16), BLOB_RESOLUTION).unwrap(),
        DensityGrid::gaussian_blob(Point2::new(0.6, 0.55), (0.18, 0.25), BLOB_RESOLUTION).unwrap(),
    ]
}

pub fn grid_json(g: &DensityGrid) -> Value {
    let (nx, ny) = g.shape();
    json!({
        "schema_version": 1,
        "type": "grid",
        "origin": [g.origin().x, g.origin().y],
        "spacing": g.spacing(),
        "nx": nx,
        "ny": ny,
        "values": g.values(),
    })
}

pub fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path
}

pub fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn unit_square(dir: &Path) -> PathBuf {
    write(
        dir,
        "square.json",
        &json!({"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}),
    )
}

pub fn equipart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equipart"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the inputs of every subcommand into `dir` and returns the
/// argument lists that exercise them.
pub fn full_suite(dir: &Path) -> Vec<Vec<String>> {
    let square = unit_square(dir);
    let [a, b] = blob_pair();
    let a = write(dir, "blob_a.json", &grid_json(&a));
    let b = write(dir, "blob_b.json", &grid_json(&b));
    let uniform = write(dir, "uniform.json", &json!({"type": "uniform"}));
    let perimeter = write(
        dir,
        "area_perimeter.json",
        &json!({"constraints": [{"type": "measure", "index": 0}, {"type": "functional", "name": "perimeter"}]}),
    );
    let flat = write(dir, "flat.json", &json!({"type": "interval"}));
    let ramp = write(
        dir,
        "ramp.json",
        &json!({"type": "interval", "density": [0.0, 2.0]}),
    );
    let lines = write(
        dir,
        "lines.json",
        &json!({"polys": [[0.0, 1.0], [0.0, -1.0], [0.2, 0.3]], "interval": [-1.0, 1.0]}),
    );
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();
    let v = |items: &[&str]| items.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let mut suite = vec![
        [
            v(&["equipart", "--body"]),
            vec![s(&square)],
            v(&["--measure"]),
            vec![s(&a)],
            v(&["--measure"]),
            vec![s(&b)],
            v(&["--q", "3", "--render"]),
        ]
        .concat(),
        [
            v(&["equipart", "--body"]),
            vec![s(&square)],
            v(&["--measure"]),
            vec![s(&uniform)],
            v(&["--constraints"]),
            vec![s(&perimeter)],
            v(&["--q", "2"]),
        ]
        .concat(),
        [
            v(&["equipart", "--body"]),
            vec![s(&square)],
            v(&["--measure"]),
            vec![s(&a)],
            v(&["--factors", "2,2"]),
        ]
        .concat(),
        [
            v(&["necklace", "--measure"]),
            vec![s(&flat)],
            v(&["--measure"]),
            vec![s(&ramp)],
            v(&["--r", "2"]),
        ]
        .concat(),
        [v(&["envelope", "--family"]), vec![s(&lines)]].concat(),
        v(&[
            "envelope-search",
            "--n",
            "3",
            "--q",
            "4",
            "--trials",
            "2000",
        ]),
        v(&["fuks-verify", "--qmax", "6"]),
        [
            v(&["ham-sandwich", "--body"]),
            vec![s(&square)],
            v(&["--measure"]),
            vec![s(&a)],
            v(&["--measure"]),
            vec![s(&b)],
            v(&["--render"]),
        ]
        .concat(),
    ];
    for args in &mut suite {
        args.extend(v(&["--seed", "0", "--reproducible"]));
    }
    suite
}
