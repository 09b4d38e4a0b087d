//! Output documents. Field order is fixed by the struct definitions, so
//! the same run always serializes to the same bytes.

use std::path::Path;

use equipart::envelope::{EnvelopeProfile, SearchOutcome};
use equipart::fuks::DivisibilityReport;
use equipart::poly::Polynomial1D;
use equipart::solver::{SolveReport, SolveStatus, SolverConfig};
use equipart::{ConvexPolygon, FunctionFamily};
use serde::Serialize;

use crate::SCHEMA_VERSION;

#[derive(Serialize)]
pub struct PolygonOut {
    pub vertices: Vec<[f64; 2]>,
}

impl From<&ConvexPolygon> for PolygonOut {
    fn from(p: &ConvexPolygon) -> Self {
        PolygonOut {
            vertices: p.vertices().iter().map(|v| [v.x, v.y]).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct MemberOut {
    pub a: [f64; 2],
    pub b: f64,
}

#[derive(Serialize)]
pub struct FamilyOut {
    pub members: Vec<MemberOut>,
}

impl From<&FunctionFamily> for FamilyOut {
    fn from(f: &FunctionFamily) -> Self {
        FamilyOut {
            members: f
                .members()
                .iter()
                .map(|m| MemberOut {
                    a: [m.a.x, m.a.y],
                    b: m.b,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct NodeOut {
    pub level: usize,
    pub parent: usize,
    pub seed: u64,
    pub family: FamilyOut,
}

#[derive(Serialize)]
pub struct PartitionDoc {
    pub schema_version: u32,
    pub q: usize,
    pub body: PolygonOut,
    /// The single family for a direct solve, absent for iterated ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyOut>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeOut>,
    pub cells: Vec<PolygonOut>,
}

#[derive(Serialize)]
pub struct Settings {
    pub tol: f64,
    pub seed: u64,
    pub multistart: usize,
    pub max_iter: usize,
}

impl From<&SolverConfig> for Settings {
    fn from(c: &SolverConfig) -> Self {
        Settings {
            tol: c.tol,
            seed: c.seed,
            multistart: c.multistart,
            max_iter: c.max_iter,
        }
    }
}

#[derive(Serialize)]
pub struct SolveEntry {
    pub level: usize,
    pub parent: usize,
    pub seed: u64,
    pub report: SolveReport,
}

#[derive(Serialize)]
pub struct NecklaceExtras {
    pub r: usize,
    pub measures: usize,
    pub segment_bound: usize,
    pub segment_count: usize,
    pub verified: bool,
    /// `masses[i][j]`: measure `i` on part `j + 1`.
    pub masses: Vec<Vec<f64>>,
}

#[derive(Serialize)]
pub struct ReportDoc {
    pub schema_version: u32,
    pub command: &'static str,
    pub status: SolveStatus,
    pub settings: Settings,
    pub solves: Vec<SolveEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub necklace: Option<NecklaceExtras>,
}

#[derive(Serialize)]
pub struct SplitDoc {
    pub schema_version: u32,
    pub cuts: Vec<f64>,
    pub owners: Vec<usize>,
}

#[derive(Serialize)]
pub struct CutDoc {
    pub schema_version: u32,
    pub normal: [f64; 2],
    pub offset: f64,
    pub masses: [[f64; 2]; 2],
}

#[derive(Serialize)]
pub struct ProfileDoc {
    pub schema_version: u32,
    pub interval: [f64; 2],
    pub breakpoints: Vec<f64>,
    pub active: Vec<usize>,
    pub switch_count: usize,
}

impl From<&EnvelopeProfile> for ProfileDoc {
    fn from(p: &EnvelopeProfile) -> Self {
        ProfileDoc {
            schema_version: SCHEMA_VERSION,
            interval: [p.interval.0, p.interval.1],
            breakpoints: p.breakpoints.clone(),
            active: p.active.clone(),
            switch_count: p.switch_count(),
        }
    }
}

#[derive(Serialize)]
pub struct PolyFamilyDoc {
    pub schema_version: u32,
    pub polys: Vec<Polynomial1D>,
    pub interval: [f64; 2],
}

#[derive(Serialize)]
pub struct SearchDoc {
    pub schema_version: u32,
    pub degree: usize,
    pub members: usize,
    pub trials: usize,
    pub seed: u64,
    pub best_switches: usize,
    pub linear_bound: usize,
    pub exceeds_linear_bound: bool,
    pub witness: PolyFamilyDoc,
}

impl SearchDoc {
    pub fn new(s: &SearchOutcome, seed: u64) -> Self {
        SearchDoc {
            schema_version: SCHEMA_VERSION,
            degree: s.degree,
            members: s.members,
            trials: s.trials,
            seed,
            best_switches: s.best_switches,
            linear_bound: s.linear_bound,
            exceeds_linear_bound: s.exceeds_linear_bound,
            witness: PolyFamilyDoc {
                schema_version: SCHEMA_VERSION,
                polys: s.best_family.clone(),
                interval: [s.interval.0, s.interval.1],
            },
        }
    }
}

#[derive(Serialize)]
pub struct FuksDoc {
    pub schema_version: u32,
    pub command: &'static str,
    pub qmax: usize,
    pub chain_cap: usize,
    pub all_pass: bool,
    pub rows: Vec<DivisibilityReport>,
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, doc: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)
}
