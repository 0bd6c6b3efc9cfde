//! Coverage ratios, the leximin order and bi-objective dominance.
//!
//! Ratios are kept as exact `(covered, total)` pairs and compared by
//! cross-multiplication, so values such as 4/7 never split into two float
//! bins. A solution's quality on the equity side is its sorted ratio vector;
//! two vectors are compared lexicographically on that sorted form.

use std::cmp::Ordering;
use std::fmt;

/// Absolute tolerance used when comparing total durations.
pub const DURATION_EPS: f64 = 1e-9;

/// Exact coverage ratio `covered / total` with `total > 0`.
#[derive(Debug, Clone, Copy)]
pub struct CoverageRatio {
    covered: u32,
    total: u32,
}

impl CoverageRatio {
    pub fn new(covered: u32, total: u32) -> Self {
        assert!(total > 0, "coverage ratio with zero denominator");
        Self { covered, total }
    }

    /// Parses a plain decimal such as `0.571` into the exact fraction `571/1000`.
    pub fn from_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        if frac_part.len() > 9 {
            return None;
        }
        let total = 10u32.pow(frac_part.len() as u32);
        let int_val: u32 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
        let frac_val: u32 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
        let covered = int_val.checked_mul(total)?.checked_add(frac_val)?;
        Some(Self::new(covered, total))
    }

    pub fn covered(&self) -> u32 {
        self.covered
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn value(&self) -> f64 {
        f64::from(self.covered) / f64::from(self.total)
    }

    /// The same ratio in lowest terms.
    pub fn reduced(&self) -> Self {
        let g = gcd(self.covered, self.total);
        Self { covered: self.covered / g, total: self.total / g }
    }

    pub fn pair(&self) -> [u32; 2] {
        [self.covered, self.total]
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

impl PartialEq for CoverageRatio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CoverageRatio {}

impl PartialOrd for CoverageRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CoverageRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = u64::from(self.covered) * u64::from(other.total);
        let rhs = u64::from(other.covered) * u64::from(self.total);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for CoverageRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.covered, self.total)
    }
}

/// Per-characteristic coverage ratios together with their non-decreasing rearrangement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageVector {
    ratios: Vec<CoverageRatio>,
    sorted: Vec<CoverageRatio>,
}

impl CoverageVector {
    pub fn new(ratios: Vec<CoverageRatio>) -> Self {
        let mut sorted = ratios.clone();
        sorted.sort();
        Self { ratios, sorted }
    }

    /// Builds the vector from coverage counts and the per-characteristic carrier totals.
    pub fn from_counts(counts: &[u32], totals: &[u32]) -> Self {
        assert_eq!(counts.len(), totals.len());
        Self::new(counts.iter().zip(totals).map(|(&c, &t)| CoverageRatio::new(c, t)).collect())
    }

    pub fn ratios(&self) -> &[CoverageRatio] {
        &self.ratios
    }

    pub fn sorted(&self) -> &[CoverageRatio] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    /// The max-min value: the smallest ratio.
    pub fn min_ratio(&self) -> Option<CoverageRatio> {
        self.sorted.first().copied()
    }
}

/// Outcome of a leximin comparison between two coverage vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeximinOrdering {
    XDominates,
    YDominates,
    Indifferent,
}

/// Lexicographic comparison of sorted vectors: the first position where they
/// differ decides.
pub fn compare_sorted(x: &[CoverageRatio], y: &[CoverageRatio]) -> Ordering {
    assert_eq!(x.len(), y.len(), "leximin comparison of vectors with different lengths");
    x.cmp(y)
}

pub fn leximin_compare(x: &CoverageVector, y: &CoverageVector) -> LeximinOrdering {
    match compare_sorted(x.sorted(), y.sorted()) {
        Ordering::Greater => LeximinOrdering::XDominates,
        Ordering::Less => LeximinOrdering::YDominates,
        Ordering::Equal => LeximinOrdering::Indifferent,
    }
}

/// The two objective values of a solution: total duration (minimised) and the
/// coverage vector (maximised in leximin order).
#[derive(Debug, Clone, PartialEq)]
pub struct Objectives {
    pub duration: f64,
    pub coverage: CoverageVector,
}

impl Objectives {
    pub fn new(duration: f64, ratios: Vec<CoverageRatio>) -> Self {
        Self { duration, coverage: CoverageVector::new(ratios) }
    }

    pub fn sorted(&self) -> &[CoverageRatio] {
        self.coverage.sorted()
    }

    /// Equal duration (within `tol`) and leximin-indifferent coverage.
    pub fn key_equal(&self, other: &Self, tol: f64) -> bool {
        (self.duration - other.duration).abs() <= tol && self.sorted() == other.sorted()
    }
}

/// `a` dominates `b`: no longer, leximin at least as good, and strictly better in one of the two.
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    let not_longer = a.duration <= b.duration + DURATION_EPS;
    if !not_longer {
        return false;
    }
    let shorter = a.duration < b.duration - DURATION_EPS;
    match compare_sorted(a.sorted(), b.sorted()) {
        Ordering::Less => false,
        Ordering::Greater => true,
        Ordering::Equal => shorter,
    }
}
