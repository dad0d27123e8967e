//! JSON reports shared by every command, and the CSV constants table.

use std::path::Path;

use kornforge_core::mesh::Mesh;
use kornforge_core::spectra::{LevelRecord, StudyReport, Variant};
use kornforge_core::verify::CheckResult;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::io::create;

/// Geometric summary of the mesh a command ran on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub source: String,
    pub nvertices: usize,
    pub ntets: usize,
    pub ninterior_faces: usize,
    pub nboundary_faces: usize,
    /// Minimum dihedral angle, radians.
    #[serde(with = "kornforge_core::serde_float")]
    pub theta: f64,
    /// Largest tet diameter.
    #[serde(with = "kornforge_core::serde_float")]
    pub h: f64,
    #[serde(with = "kornforge_core::serde_float")]
    pub volume: f64,
    pub stars_face_connected: bool,
}

impl MeshSummary {
    pub fn new(mesh: &Mesh, source: &str) -> Self {
        Self {
            source: source.to_string(),
            nvertices: mesh.num_vertices(),
            ntets: mesh.num_tets(),
            ninterior_faces: mesh.interior_faces().len(),
            nboundary_faces: mesh.boundary_faces().len(),
            theta: mesh.min_angle(),
            h: mesh.h(),
            volume: mesh.volume(),
            stars_face_connected: mesh.stars_face_connected(),
        }
    }
}

/// Per-element Korn constant k(T).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalRecord {
    pub tet: usize,
    #[serde(with = "kornforge_core::serde_float")]
    pub k: f64,
    #[serde(with = "kornforge_core::serde_float")]
    pub ell: f64,
    #[serde(with = "kornforge_core::serde_float")]
    pub theta: f64,
    #[serde(with = "kornforge_core::serde_float")]
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSummary>,
    pub variant: Option<Variant>,
    pub levels: Vec<LevelRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local: Vec<LocalRecord>,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), mesh: None, variant: None, levels: Vec::new(), local: Vec::new(), checks: Vec::new() }
    }

    pub fn from_study(command: &str, study: StudyReport) -> Self {
        Self { variant: study.variant, levels: study.levels, checks: study.checks, ..Self::new(command) }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> AppResult<()> {
        let json = self.to_json();
        create(path, |w| std::io::Write::write_all(w, json.as_bytes()))
    }

    pub fn read(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| AppError::Json { path: path.to_path_buf(), source })
    }
}

/// Writes check results and an optional study as one report document.
pub fn write_report(results: &[CheckResult], study: Option<&StudyReport>, path: &Path) -> AppResult<()> {
    let mut report = match study {
        Some(s) => Report::from_study("report", s.clone()),
        None => Report::new("report"),
    };
    report.checks.extend(results.iter().cloned());
    report.write(path)
}

#[derive(Serialize)]
struct CsvRow {
    level: usize,
    ntets: usize,
    theta: f64,
    h: f64,
    lambda_max: f64,
}

/// `level,ntets,theta,h,lambda_max`, one row per level.
pub fn write_csv(levels: &[LevelRecord], path: &Path) -> AppResult<()> {
    let csv_err = |source| AppError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for l in levels {
        w.serialize(CsvRow { level: l.level, ntets: l.ntets, theta: l.theta, h: l.h, lambda_max: l.lambda_max })
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}
