//! Empirical waiting-time densities from jump records.

use super::{JumpType, WtdKind};
use super::trajectory::JumpRecord;
use crate::error::{Error, Result};
use crate::quadrature::gauss_kronrod_15;

/// Fewest conditioning jumps accepted for a histogram.
pub const MIN_CONDITIONING_EVENTS: u64 = 10_000;

/// Histogram of the delays from each jump of type `kind.earlier()` to the
/// next jump, counting only those where the next jump is `kind.later()`.
///
/// Densities are normalized by the number of conditioning jumps, so the
/// histograms of `ee` and `ae` together integrate to one (less the mass past
/// `max_tau`), as do `ea` and `aa`.
#[derive(Debug, Clone, PartialEq)]
pub struct WtdHistogram {
    pub kind: WtdKind,
    pub bin_width: f64,
    pub max_tau: f64,
    pub counts: Vec<u64>,
    /// Matching pairs with delay at or beyond `max_tau`.
    pub overflow: u64,
    pub conditioning_events: u64,
}

impl WtdHistogram {
    fn empty(kind: WtdKind, bin_width: f64, max_tau: f64) -> Result<Self> {
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::invalid("bin_width", format!("must be positive, got {bin_width}")));
        }
        if !(max_tau > bin_width) || !max_tau.is_finite() {
            return Err(Error::invalid(
                "max_tau",
                format!("must exceed the bin width, got {max_tau}"),
            ));
        }
        let bins = (max_tau / bin_width).round() as usize;
        Ok(Self {
            kind,
            bin_width,
            max_tau: bins as f64 * bin_width,
            counts: vec![0; bins],
            overflow: 0,
            conditioning_events: 0,
        })
    }

    fn accumulate(&mut self, record: &JumpRecord) {
        for pair in record.events.windows(2) {
            if pair[0].jump != self.kind.earlier() {
                continue;
            }
            self.conditioning_events += 1;
            if pair[1].jump != self.kind.later() {
                continue;
            }
            let bin = ((pair[1].time - pair[0].time) / self.bin_width) as usize;
            match self.counts.get_mut(bin) {
                Some(c) => *c += 1,
                None => self.overflow += 1,
            }
        }
    }

    fn check_statistics(self) -> Result<Self> {
        if self.conditioning_events < MIN_CONDITIONING_EVENTS {
            return Err(Error::InsufficientStatistics {
                found: self.conditioning_events as usize,
                required: MIN_CONDITIONING_EVENTS as usize,
            });
        }
        Ok(self)
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        (0..self.counts.len())
            .map(|i| (i as f64 + 0.5) * self.bin_width)
            .collect()
    }

    pub fn densities(&self) -> Vec<f64> {
        let norm = self.conditioning_events as f64 * self.bin_width;
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    /// Integrated density over the binned range.
    pub fn mass(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.conditioning_events as f64
    }

    /// `sum_i |h_i - <f>_i| dt` over the binned range, where `<f>_i` is the
    /// bin average of `f`. Comparing against bin averages rather than
    /// midpoint values removes the discretization bias of steep densities.
    pub fn l1_distance<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.densities()
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let a = i as f64 * self.bin_width;
                let (integral, _) = gauss_kronrod_15(&f, a, a + self.bin_width);
                (d * self.bin_width - integral).abs()
            })
            .sum()
    }
}

/// Histogram of a single record.
pub fn wtd_histogram(
    record: &JumpRecord,
    kind: WtdKind,
    bin_width: f64,
    max_tau: f64,
) -> Result<WtdHistogram> {
    wtd_histogram_merged(std::slice::from_ref(record), kind, bin_width, max_tau)
}

/// Histogram pooled over independent records; pairs never straddle two
/// records.
pub fn wtd_histogram_merged(
    records: &[JumpRecord],
    kind: WtdKind,
    bin_width: f64,
    max_tau: f64,
) -> Result<WtdHistogram> {
    let mut hist = WtdHistogram::empty(kind, bin_width, max_tau)?;
    for record in records {
        hist.accumulate(record);
    }
    hist.check_statistics()
}

/// Fraction of conditioning jumps of type `earlier` followed by `later`.
pub fn transition_fraction(record: &JumpRecord, later: JumpType, earlier: JumpType) -> Option<f64> {
    let mut cond = 0u64;
    let mut hits = 0u64;
    for pair in record.events.windows(2) {
        if pair[0].jump == earlier {
            cond += 1;
            if pair[1].jump == later {
                hits += 1;
            }
        }
    }
    (cond > 0).then(|| hits as f64 / cond as f64)
}
