use std::cmp::Ordering;
use std::collections::HashSet;

use crate::domain::FeatureMask;

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub mask: FeatureMask,
    pub selection_fitness: f64,
}

/// Elite store of validated solutions, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalArchive {
    entries: Vec<ArchiveEntry>,
    capacity: usize,
}

/// Ranking of validated candidates: lower fitness, then fewer selected
/// features, then lexicographic mask order.
pub fn rank(a: &FeatureMask, fa: f64, b: &FeatureMask, fb: f64) -> Ordering {
    fa.total_cmp(&fb)
        .then_with(|| a.count().cmp(&b.count()))
        .then_with(|| a.bits().cmp(b.bits()))
}

impl ExternalArchive {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: Vec::new(),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> Option<&ArchiveEntry> {
        self.entries.first()
    }
}

/// Merges candidates into the archive, drops duplicate masks (keeping the
/// best-ranked copy), re-ranks and truncates to capacity.
pub fn archive_update(
    archive: &ExternalArchive,
    candidates: &[(FeatureMask, f64)],
) -> ExternalArchive {
    let mut pool: Vec<ArchiveEntry> = archive.entries.clone();
    pool.extend(candidates.iter().map(|(mask, f)| ArchiveEntry {
        mask: mask.clone(),
        selection_fitness: *f,
    }));
    pool.sort_by(|a, b| rank(&a.mask, a.selection_fitness, &b.mask, b.selection_fitness));
    let mut seen = HashSet::new();
    pool.retain(|e| seen.insert(e.mask.clone()));
    pool.truncate(archive.capacity);
    ExternalArchive {
        entries: pool,
        capacity: archive.capacity,
    }
}
