//! Reference sets, α%-distance coverage and max-min equivalence analysis
//! over solver archives.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::archive::ParetoArchive;
use crate::coverage::{CoverageRatio, Objectives, DURATION_EPS};
use crate::io::SolutionRecord;
use crate::oracle::FRONT_MATCH_EPS;

/// Tolerance used when matching a 3-decimal published value.
pub const PUBLISHED_TOLERANCE: f64 = 5e-4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("runs mix instances: {0:?} and {1:?}")]
    MixedInstances(String, String),
    #[error("runs disagree on the number of characteristics ({0} vs {1})")]
    MixedDimensions(usize, usize),
    #[error("no runs to build a reference set from")]
    NoRuns,
    #[error("reference set is empty")]
    EmptyReference,
    #[error("invalid record in {source_name}: {msg}")]
    InvalidRecord { source_name: String, msg: String },
}

/// Non-dominated union of several runs on one instance.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    pub instance: String,
    pub archive: ParetoArchive<SolutionRecord>,
    pub sources: Vec<String>,
}

/// Folds every run archive into one non-dominated set. Each run is
/// `(source name, records)`.
pub fn build_reference(runs: &[(String, Vec<SolutionRecord>)]) -> Result<ReferenceSet, EvalError> {
    if runs.is_empty() {
        return Err(EvalError::NoRuns);
    }
    let mut instance: Option<&str> = None;
    let mut dims: Option<usize> = None;
    let mut archive = ParetoArchive::new();
    for (source, records) in runs {
        for r in records {
            match instance {
                None => instance = Some(&r.instance),
                Some(name) if name != r.instance => {
                    return Err(EvalError::MixedInstances(name.to_string(), r.instance.clone()))
                }
                _ => {}
            }
            match dims {
                None => dims = Some(r.sorted_ratios.len()),
                Some(d) if d != r.sorted_ratios.len() => {
                    return Err(EvalError::MixedDimensions(d, r.sorted_ratios.len()))
                }
                _ => {}
            }
            let objectives =
                r.objectives().map_err(|msg| EvalError::InvalidRecord { source_name: source.clone(), msg })?;
            archive.try_insert(objectives, r.clone());
        }
    }
    Ok(ReferenceSet {
        instance: instance.unwrap_or_default().to_string(),
        archive,
        sources: runs.iter().map(|(s, _)| s.clone()).collect(),
    })
}

/// True when `candidate` weakly dominates `target` after worsening the
/// target's duration by α% and each of its ratios by α%. At α = 0 this is
/// "dominates or key-equal".
pub fn within_alpha(candidate: &Objectives, target: &Objectives, alpha: f64) -> bool {
    let duration_cap = target.duration * (1.0 + alpha / 100.0) + FRONT_MATCH_EPS;
    if candidate.duration > duration_cap {
        return false;
    }
    let (c, t) = (candidate.sorted(), target.sorted());
    assert_eq!(c.len(), t.len(), "coverage vectors of different lengths");
    if alpha == 0.0 {
        return c.cmp(t) != Ordering::Less;
    }
    let factor = 1.0 - alpha / 100.0;
    for (x, y) in c.iter().zip(t) {
        let scaled = y.value() * factor;
        match x.value().total_cmp(&scaled) {
            Ordering::Greater => return true,
            Ordering::Less => return false,
            Ordering::Equal => {}
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub alphas: Vec<f64>,
    /// Fraction of reference points covered at each α.
    pub fractions: Vec<f64>,
}

pub fn coverage_fractions<A, B>(
    assessed: &ParetoArchive<A>,
    reference: &ParetoArchive<B>,
    alphas: &[f64],
) -> Result<DistanceReport, EvalError> {
    if reference.is_empty() {
        return Err(EvalError::EmptyReference);
    }
    let fractions = alphas
        .iter()
        .map(|&alpha| {
            let covered = reference
                .iter()
                .filter(|r| assessed.iter().any(|s| within_alpha(&s.objectives, &r.objectives, alpha)))
                .count();
            covered as f64 / reference.len() as f64
        })
        .collect();
    Ok(DistanceReport { alphas: alphas.to_vec(), fractions })
}

/// Entries grouped by their minimum coverage ratio (kept in lowest terms).
pub fn maxmin_equivalence_histogram<T>(archive: &ParetoArchive<T>) -> BTreeMap<CoverageRatio, usize> {
    let mut bins = BTreeMap::new();
    for e in archive.iter() {
        if let Some(min) = e.objectives.coverage.min_ratio() {
            *bins.entry(min.reduced()).or_insert(0) += 1;
        }
    }
    bins
}

/// True when `a` beats `b` under the lexicographic (max-min, duration) objective:
/// a higher minimum ratio, or the same minimum with a shorter duration.
pub fn maxmin_lexicographic_better(a: &Objectives, b: &Objectives) -> bool {
    match a.coverage.min_ratio().cmp(&b.coverage.min_ratio()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.duration < b.duration - DURATION_EPS,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublishedComparison {
    pub published: Option<f64>,
    pub equal: usize,
    pub higher: usize,
    pub best_found: Option<f64>,
}

/// Counts entries whose min ratio matches (within [`PUBLISHED_TOLERANCE`]) or beats a published max-min value.
pub fn compare_to_published<T>(archive: &ParetoArchive<T>, published: Option<f64>) -> PublishedComparison {
    let mins: Vec<f64> = archive.iter().filter_map(|e| e.objectives.coverage.min_ratio()).map(|r| r.value()).collect();
    let best_found = mins.iter().copied().reduce(f64::max);
    let (equal, higher) = match published {
        Some(p) => (
            mins.iter().filter(|&&m| (m - p).abs() <= PUBLISHED_TOLERANCE).count(),
            mins.iter().filter(|&&m| m > p + PUBLISHED_TOLERANCE).count(),
        ),
        None => (0, 0),
    };
    PublishedComparison { published, equal, higher, best_found }
}
