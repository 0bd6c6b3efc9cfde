//! JSON-lines archive files: one solution record per line.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archive::ParetoArchive;
use crate::coverage::{CoverageRatio, Objectives};
use crate::instance::Instance;
use crate::solution::Solution;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}:{line}: {msg}")]
    Malformed { path: String, line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub instance: String,
    pub duration: f64,
    /// Per-characteristic coverage as `[covered, total]`.
    #[serde(default)]
    pub ratios: Vec<[u32; 2]>,
    pub sorted_ratios: Vec<[u32; 2]>,
    #[serde(default)]
    pub sorted_decimals: Vec<f64>,
    #[serde(default)]
    pub routes: Vec<Vec<usize>>,
}

impl SolutionRecord {
    pub fn from_solution(inst: &Instance, sol: &Solution) -> Self {
        let objectives = sol.objectives(inst);
        Self {
            instance: inst.name().to_string(),
            duration: objectives.duration,
            ratios: objectives.coverage.ratios().iter().map(CoverageRatio::pair).collect(),
            sorted_ratios: objectives.sorted().iter().map(CoverageRatio::pair).collect(),
            sorted_decimals: objectives.sorted().iter().map(CoverageRatio::value).collect(),
            routes: sol.routes().to_vec(),
        }
    }

    fn ratio(pair: [u32; 2]) -> Result<CoverageRatio, String> {
        if pair[1] == 0 || pair[0] > pair[1] {
            return Err(format!("invalid ratio {}/{}", pair[0], pair[1]));
        }
        Ok(CoverageRatio::new(pair[0], pair[1]))
    }

    /// Objective values; uses per-characteristic ratios when present, else the sorted ones.
    pub fn objectives(&self) -> Result<Objectives, String> {
        if !self.duration.is_finite() || self.duration < 0.0 {
            return Err(format!("invalid duration {}", self.duration));
        }
        let sorted: Vec<CoverageRatio> =
            self.sorted_ratios.iter().map(|&p| Self::ratio(p)).collect::<Result<_, _>>()?;
        if self.ratios.is_empty() {
            return Ok(Objectives::new(self.duration, sorted));
        }
        let ratios: Vec<CoverageRatio> = self.ratios.iter().map(|&p| Self::ratio(p)).collect::<Result<_, _>>()?;
        let objectives = Objectives::new(self.duration, ratios);
        if objectives.sorted() != sorted.as_slice() {
            return Err("sorted_ratios is not the sorted form of ratios".into());
        }
        Ok(objectives)
    }
}

pub fn write_archive<W: Write>(mut out: W, inst: &Instance, archive: &ParetoArchive<Solution>) -> std::io::Result<()> {
    for entry in archive.iter() {
        serde_json::to_writer(&mut out, &SolutionRecord::from_solution(inst, &entry.item))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_records<W: Write>(mut out: W, records: &[SolutionRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<SolutionRecord>, RecordError> {
    let path = path.as_ref();
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |msg: String| RecordError::Malformed { path: path.display().to_string(), line: i + 1, msg };
        let record: SolutionRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        record.objectives().map_err(malformed)?;
        out.push(record);
    }
    Ok(out)
}

/// Builds an archive from records (dominated or duplicate records are dropped).
pub fn archive_from_records(records: Vec<SolutionRecord>) -> Result<ParetoArchive<SolutionRecord>, String> {
    let mut archive = ParetoArchive::new();
    for r in records {
        archive.try_insert(r.objectives()?, r);
    }
    Ok(archive)
}
