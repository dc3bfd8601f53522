//! Levenshtein alignment and word error rate.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EditCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub ref_len: usize,
}

impl EditCounts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    pub fn add(&mut self, other: &EditCounts) {
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
        self.ref_len += other.ref_len;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WerReport {
    pub counts: EditCounts,
    /// Percentage `100 · errors / ref_len`; with an empty reference the
    /// denominator is 1 and `empty_reference` is set.
    pub wer: f64,
    pub empty_reference: bool,
}

impl WerReport {
    pub fn from_counts(counts: EditCounts) -> Self {
        let empty_reference = counts.ref_len == 0;
        let wer = 100.0 * counts.errors() as f64 / counts.ref_len.max(1) as f64;
        Self {
            counts,
            wer,
            empty_reference,
        }
    }

    /// Pooled counts over a corpus.
    pub fn pooled<'a>(reports: impl IntoIterator<Item = &'a EditCounts>) -> Self {
        let mut total = EditCounts::default();
        for c in reports {
            total.add(c);
        }
        Self::from_counts(total)
    }
}

/// Minimal unit-cost alignment; traceback prefers substitution/match, then
/// deletion, then insertion.
pub fn levenshtein<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> WerReport {
    let (n, m) = (reference.len(), hypothesis.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[i - 1][j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    let mut counts = EditCounts {
        ref_len: n,
        ..EditCounts::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let diff = usize::from(reference[i - 1] != hypothesis[j - 1]);
            if d[i][j] == d[i - 1][j - 1] + diff {
                counts.substitutions += diff;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            counts.deletions += 1;
            i -= 1;
        } else {
            counts.insertions += 1;
            j -= 1;
        }
    }
    WerReport::from_counts(counts)
}
