//! Non-dominated archive under (duration, leximin) dominance.

use rand::Rng;

use crate::coverage::{dominates, Objectives, DURATION_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted,
    Dominated,
    Duplicate,
}

#[derive(Debug, Clone)]
pub struct ArchiveEntry<T> {
    pub objectives: Objectives,
    pub item: T,
}

/// Mutually non-dominated entries, kept sorted by ascending duration.
///
/// Two entries with equal duration (within [`DURATION_EPS`]) and indifferent
/// coverage share a key; only the first one seen is kept.
#[derive(Debug, Clone)]
pub struct ParetoArchive<T> {
    entries: Vec<ArchiveEntry<T>>,
}

impl<T> Default for ParetoArchive<T> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T> ParetoArchive<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ArchiveEntry<T>] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &ArchiveEntry<T>> {
        self.entries.iter()
    }

    pub fn into_entries(self) -> Vec<ArchiveEntry<T>> {
        self.entries
    }

    pub fn try_insert(&mut self, objectives: Objectives, item: T) -> InsertOutcome {
        // Only entries no longer than the candidate can dominate or duplicate it.
        let limit = self.entries.partition_point(|e| e.objectives.duration <= objectives.duration + DURATION_EPS);
        for e in &self.entries[..limit] {
            if e.objectives.key_equal(&objectives, DURATION_EPS) {
                return InsertOutcome::Duplicate;
            }
            if dominates(&e.objectives, &objectives) {
                return InsertOutcome::Dominated;
            }
        }
        let start = self.entries.partition_point(|e| e.objectives.duration < objectives.duration - DURATION_EPS);
        let mut i = start;
        while i < self.entries.len() {
            if dominates(&objectives, &self.entries[i].objectives) {
                self.entries.remove(i);
            } else {
                i += 1;
            }
        }
        let at = self.entries.partition_point(|e| e.objectives.duration <= objectives.duration);
        self.entries.insert(at, ArchiveEntry { objectives, item });
        InsertOutcome::Inserted
    }

    /// Folds [`Self::try_insert`] over `others`; reports whether anything was inserted.
    pub fn nondominated_union(&mut self, others: impl IntoIterator<Item = (Objectives, T)>) -> bool {
        let mut changed = false;
        for (objectives, item) in others {
            changed |= self.try_insert(objectives, item) == InsertOutcome::Inserted;
        }
        changed
    }

    /// One entry, each with equal probability.
    pub fn select_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> &ArchiveEntry<T> {
        assert!(!self.entries.is_empty(), "selection from an empty archive");
        &self.entries[rng.random_range(0..self.entries.len())]
    }

    /// Returns the first pair `(i, j)` where entry `i` dominates entry `j`, or
    /// two entries share a key.
    pub fn audit(&self) -> Result<(), String> {
        for (i, a) in self.entries.iter().enumerate() {
            for (j, b) in self.entries.iter().enumerate() {
                if i == j {
                    continue;
                }
                if dominates(&a.objectives, &b.objectives) {
                    return Err(format!("entry {i} dominates entry {j}"));
                }
                if i < j && a.objectives.key_equal(&b.objectives, DURATION_EPS) {
                    return Err(format!("entries {i} and {j} share a key"));
                }
            }
        }
        Ok(())
    }

    pub fn best_duration(&self) -> Option<f64> {
        self.entries.first().map(|e| e.objectives.duration)
    }

    /// Entry with the leximin-greatest coverage vector (shortest among ties).
    pub fn leximin_best(&self) -> Option<&ArchiveEntry<T>> {
        self.entries.iter().rev().max_by(|a, b| a.objectives.sorted().cmp(b.objectives.sorted()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::CoverageRatio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point(duration: f64, sorted: &[&str]) -> Objectives {
        Objectives::new(duration, sorted.iter().map(|v| CoverageRatio::from_decimal(v).unwrap()).collect())
    }

    fn table_one() -> Vec<(Objectives, &'static str)> {
        vec![
            (point(7.82, &["0.20", "0.30", "0.33", "0.44"]), "s1"),
            (point(7.90, &["0.20", "0.25", "0.33", "0.44"]), "s2"),
            (point(8.18, &["0.30", "0.30", "0.33", "0.44"]), "s3"),
            (point(8.49, &["0.50", "0.50", "0.50", "0.56"]), "s4"),
            (point(8.56, &["0.50", "0.50", "0.56", "0.56"]), "s5"),
            (point(8.73, &["0.50", "0.50", "0.54", "0.57"]), "s6"),
        ]
    }

    fn labels(a: &ParetoArchive<&'static str>) -> Vec<&'static str> {
        a.iter().map(|e| e.item).collect()
    }

    #[test]
    fn table_one_in_both_orders() {
        let mut fwd = ParetoArchive::new();
        fwd.nondominated_union(table_one());
        let mut rev = ParetoArchive::new();
        rev.nondominated_union(table_one().into_iter().rev());
        assert_eq!(labels(&fwd), vec!["s1", "s3", "s4", "s5"]);
        assert_eq!(labels(&rev), vec!["s1", "s3", "s4", "s5"]);
        fwd.audit().unwrap();
    }

    #[test]
    fn insert_outcomes() {
        let mut a = ParetoArchive::new();
        let rows = table_one();
        assert_eq!(a.try_insert(rows[0].0.clone(), "s1"), InsertOutcome::Inserted);
        assert_eq!(a.try_insert(rows[0].0.clone(), "again"), InsertOutcome::Duplicate);
        assert_eq!(a.try_insert(rows[1].0.clone(), "s2"), InsertOutcome::Dominated);
        assert_eq!(labels(&a), vec!["s1"]);
        assert!(!a.nondominated_union(Vec::new()));
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn best_values() {
        let mut a = ParetoArchive::new();
        a.nondominated_union(table_one());
        assert_eq!(a.best_duration(), Some(7.82));
        assert_eq!(a.leximin_best().unwrap().item, "s5");
    }

    #[test]
    fn uniform_selection_frequencies() {
        let mut a = ParetoArchive::new();
        a.nondominated_union(table_one());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 4];
        let draws = 40_000;
        for _ in 0..draws {
            let label = a.select_uniform(&mut rng).item;
            counts[["s1", "s3", "s4", "s5"].iter().position(|&l| l == label).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.25).abs() <= 0.01, "{counts:?}");
        }
    }

    #[test]
    fn selection_is_reproducible() {
        let mut a = ParetoArchive::new();
        a.nondominated_union(table_one());
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| a.select_uniform(&mut rng).item).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
    }

    #[test]
    #[should_panic]
    fn empty_selection_panics() {
        let a: ParetoArchive<()> = ParetoArchive::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        a.select_uniform(&mut rng);
    }
}
