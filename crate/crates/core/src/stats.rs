use crate::codec::FixedPointCodec;

/// Per-bit report counts, sums and means gathered in one aggregation round.
///
/// Sums hold unbiased report values, so under randomized response a mean may fall
/// outside `[0, 1]`. Excluded bits (squashed or never sampled) decode as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BitStatistics {
    counts: Vec<u64>,
    sums: Vec<f64>,
    means: Vec<f64>,
    excluded: Vec<bool>,
}

impl BitStatistics {
    pub fn empty(bits: usize) -> Self {
        Self::from_parts(vec![0; bits], vec![0.0; bits])
    }

    pub fn from_parts(counts: Vec<u64>, sums: Vec<f64>) -> Self {
        assert_eq!(counts.len(), sums.len(), "counts and sums differ in length");
        let bits = counts.len();
        let mut stats = Self {
            counts,
            sums,
            means: vec![0.0; bits],
            excluded: vec![false; bits],
        };
        stats.refresh_means();
        stats
    }

    fn refresh_means(&mut self) {
        for j in 0..self.counts.len() {
            self.means[j] = if self.excluded[j] || self.counts[j] == 0 {
                0.0
            } else {
                self.sums[j] / self.counts[j] as f64
            };
        }
    }

    pub fn record(&mut self, bit: usize, value: f64) {
        self.counts[bit] += 1;
        self.sums[bit] += value;
    }

    /// Recompute means after a batch of [`record`](Self::record) calls.
    pub fn finish(&mut self) {
        self.refresh_means();
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn total_reports(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn exclude(&mut self, bit: usize) {
        self.excluded[bit] = true;
        self.means[bit] = 0.0;
    }

    /// `beta_j = 4^j m_j (1 - m_j)`, means clamped into `[0, 1]`.
    pub fn scores(&self) -> Vec<f64> {
        crate::sampling::bit_scores(&self.means)
    }

    pub fn scores_for(&self, codec: &FixedPointCodec) -> Vec<f64> {
        crate::sampling::bit_scores_for(codec, &self.means)
    }

    /// Pools two rounds of reports. Exclusion is sticky.
    pub fn merge(&self, other: &BitStatistics) -> BitStatistics {
        assert_eq!(self.len(), other.len(), "merging statistics of different widths");
        let mut merged = Self {
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
            sums: self.sums.iter().zip(&other.sums).map(|(a, b)| a + b).collect(),
            means: vec![0.0; self.len()],
            excluded: self
                .excluded
                .iter()
                .zip(&other.excluded)
                .map(|(a, b)| *a || *b)
                .collect(),
        };
        merged.refresh_means();
        merged
    }

    /// Plug-in variance of the decoded estimate, `Σ w_j² m̂_j (1 - m̂_j) / c_j`,
    /// valid for truthful (non-RR) reports.
    pub fn plug_in_variance(&self, codec: &FixedPointCodec) -> f64 {
        self.scores_for(codec)
            .iter()
            .zip(&self.counts)
            .zip(&self.excluded)
            .filter(|((_, c), ex)| **c > 0 && !**ex)
            .map(|((s, c), _)| s / *c as f64)
            .sum()
    }
}
