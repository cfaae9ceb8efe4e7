//! Batched Monte-Carlo estimator for the moments of the spectral form factor.
//!
//! Sample `i` of `N` belongs to batch `floor(i B / N)`. Inside a batch the
//! per-sample values are combined by a binary-counter cascade (pairwise
//! summation), so the result only depends on which samples went into which
//! batch and never on how the work was scheduled. Standard errors are the
//! spread of the batch means.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;

use crate::analytics;
use crate::ensembles::{EnsembleKind, HeisenbergTime, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::math;

/// Times at which the form factor is evaluated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    kind: EnsembleKind,
    heisenberg: f64,
    times: Vec<f64>,
}

impl TimeGrid {
    /// Times must be finite, non-negative and strictly increasing; CUE times
    /// must be integers.
    pub fn new(kind: EnsembleKind, heisenberg: HeisenbergTime, times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(invalid("time grid is empty"));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(invalid("times must be finite and non-negative"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("times must be strictly increasing"));
        }
        if kind == EnsembleKind::Cue && times.iter().any(|t| math::round(*t) != *t) {
            return Err(invalid("CUE times must be integers"));
        }
        let th = heisenberg.value();
        if !th.is_finite() || th <= 0.0 {
            return Err(invalid("Heisenberg time must be positive"));
        }
        Ok(Self {
            kind,
            heisenberg: th,
            times,
        })
    }

    /// Integer CUE times.
    pub fn cue(dim: usize, times: &[u64]) -> Result<Self> {
        Self::new(
            EnsembleKind::Cue,
            HeisenbergTime::cue(dim),
            times.iter().map(|t| *t as f64).collect(),
        )
    }

    /// `n` points up to `tau_max`. For the GUE the points are
    /// `tau_j = tau_max j / n`, `j = 1..=n`; for the CUE the same targets are
    /// rounded to integer times and duplicates dropped.
    pub fn from_tau_range(
        kind: EnsembleKind,
        heisenberg: HeisenbergTime,
        tau_max: f64,
        n: usize,
    ) -> Result<Self> {
        if !tau_max.is_finite() || tau_max <= 0.0 || n == 0 {
            return Err(invalid("need tau_max > 0 and at least one time"));
        }
        let th = heisenberg.value();
        let mut times: Vec<f64> = (1..=n)
            .map(|j| tau_max * j as f64 / n as f64 * th)
            .collect();
        if kind == EnsembleKind::Cue {
            for t in &mut times {
                *t = math::round(*t).max(1.0);
            }
            times.dedup();
        }
        Self::new(kind, heisenberg, times)
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn heisenberg(&self) -> HeisenbergTime {
        HeisenbergTime::from_value(self.heisenberg)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn taus(&self) -> Vec<f64> {
        self.times.iter().map(|t| t / self.heisenberg).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `u_t = sum_j exp(i t lambda_j)` for every time of the grid.
pub fn trace_powers(spectrum: &Spectrum, grid: &TimeGrid) -> Vec<Complex64> {
    grid.times
        .iter()
        .map(|&t| spectrum.values().iter().map(|&x| math::cis(t * x)).sum())
        .collect()
}

/// How `|<u_t>|^2` is obtained when forming the connected form factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Subtraction {
    /// From the sample mean of `u_t`.
    #[default]
    Empirical,
    /// From the ensemble-averaged density.
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
struct Partial {
    level: u32,
    sums: Vec<f64>,
}

/// Running sums for one batch, kept as an open pairwise-summation cascade.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BatchSums {
    count: u64,
    last_index: Option<u64>,
    stack: Vec<Partial>,
}

impl BatchSums {
    pub fn count(&self) -> u64 {
        self.count
    }

    fn push(&mut self, values: Vec<f64>) {
        self.stack.push(Partial {
            level: 0,
            sums: values,
        });
        while self.stack.len() >= 2 {
            let n = self.stack.len();
            if self.stack[n - 1].level != self.stack[n - 2].level {
                break;
            }
            let top = self.stack.pop().unwrap_or_else(|| unreachable!());
            let below = self.stack.last_mut().unwrap_or_else(|| unreachable!());
            for (a, b) in below.sums.iter_mut().zip(&top.sums) {
                *a += b;
            }
            below.level += 1;
        }
    }

    fn total(&self, width: usize) -> Vec<f64> {
        let mut out = vec![0.0; width];
        for p in self.stack.iter().rev() {
            for (a, b) in out.iter_mut().zip(&p.sums) {
                *a += b;
            }
        }
        out
    }
}

/// Batched accumulator of `|u_t|^{2k}` (k = 1..=n_max) and `u_t`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentAccumulator {
    grid: TimeGrid,
    dim: usize,
    n_max: usize,
    n_sim: u64,
    batches: Vec<BatchSums>,
}

impl MomentAccumulator {
    pub fn new(
        grid: TimeGrid,
        dim: usize,
        n_max: usize,
        n_sim: u64,
        batches: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if n_max == 0 {
            return Err(invalid("n_max must be at least 1"));
        }
        if batches < 2 {
            return Err(invalid("need at least two batches"));
        }
        if n_sim < batches as u64 {
            return Err(invalid("need at least one sample per batch"));
        }
        Ok(Self {
            grid,
            dim,
            n_max,
            n_sim,
            batches: vec![BatchSums::default(); batches],
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_sim(&self) -> u64 {
        self.n_sim
    }

    pub fn n_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn batches(&self) -> &[BatchSums] {
        &self.batches
    }

    /// Samples accumulated so far.
    pub fn samples(&self) -> u64 {
        self.batches.iter().map(|b| b.count).sum()
    }

    fn width(&self) -> usize {
        self.grid.len() * (self.n_max + 2)
    }

    pub fn batch_of(&self, index: u64) -> usize {
        ((index as u128 * self.batches.len() as u128) / self.n_sim as u128) as usize
    }

    /// Sample indices that fall into batch `b`.
    pub fn batch_range(&self, b: usize) -> Range<u64> {
        let nb = self.batches.len() as u128;
        let n = self.n_sim as u128;
        // smallest i with floor(i nb / n) >= b
        let start = |b: u128| (b * n).div_ceil(nb) as u64;
        start(b as u128)..start(b as u128 + 1)
    }

    /// Adds sample `index` given its trace powers on the grid. Inside a batch,
    /// indices must arrive in increasing order.
    pub fn accumulate(&mut self, index: u64, u: &[Complex64]) -> Result<()> {
        if index >= self.n_sim {
            return Err(invalid("sample index beyond the declared sample count"));
        }
        if u.len() != self.grid.len() {
            return Err(Error::InvalidInput(
                "trace powers do not match the grid".into(),
            ));
        }
        let b = self.batch_of(index);
        if let Some(last) = self.batches[b].last_index {
            if index <= last {
                return Err(Error::InvalidInput(
                    "sample indices must increase within a batch".into(),
                ));
            }
        }
        let stride = self.n_max + 2;
        let mut values = vec![0.0; self.width()];
        for (j, z) in u.iter().enumerate() {
            let row = &mut values[j * stride..(j + 1) * stride];
            let s = z.norm_sqr();
            let mut p = s;
            for slot in row.iter_mut().take(self.n_max) {
                *slot = p;
                p *= s;
            }
            row[self.n_max] = z.re;
            row[self.n_max + 1] = z.im;
        }
        let batch = &mut self.batches[b];
        batch.push(values);
        batch.count += 1;
        batch.last_index = Some(index);
        Ok(())
    }

    pub fn accumulate_spectrum(&mut self, index: u64, spectrum: &Spectrum) -> Result<()> {
        let u = trace_powers(spectrum, &self.grid);
        self.accumulate(index, &u)
    }

    /// Folds `other` into `self`. Both must describe the same run; batches
    /// present on one side only are copied unchanged.
    pub fn merge(&mut self, other: &MomentAccumulator) -> Result<()> {
        if self.grid != other.grid
            || self.dim != other.dim
            || self.n_max != other.n_max
            || self.n_sim != other.n_sim
            || self.batches.len() != other.batches.len()
        {
            return Err(Error::Mismatch(
                "accumulators were configured differently".into(),
            ));
        }
        let width = self.width();
        for (mine, theirs) in self.batches.iter_mut().zip(&other.batches) {
            if theirs.count == 0 {
                continue;
            }
            if mine.count == 0 {
                *mine = theirs.clone();
                continue;
            }
            let a = mine.total(width);
            let b = theirs.total(width);
            let level = mine
                .stack
                .iter()
                .chain(&theirs.stack)
                .map(|p| p.level)
                .max()
                .unwrap_or(0);
            mine.stack = vec![Partial {
                level: level + 1,
                sums: a.iter().zip(&b).map(|(x, y)| x + y).collect(),
            }];
            mine.count += theirs.count;
            mine.last_index = mine.last_index.max(theirs.last_index);
        }
        Ok(())
    }

    /// Means, batch standard errors and derived statistics.
    pub fn finalize(&self, subtraction: Subtraction) -> Result<MomentTable> {
        let filled: Vec<&BatchSums> = self.batches.iter().filter(|b| b.count > 0).collect();
        if filled.len() < 2 {
            return Err(Error::InsufficientData(
                "need at least two non-empty batches".into(),
            ));
        }
        let width = self.width();
        let stride = self.n_max + 2;
        let totals: Vec<Vec<f64>> = filled.iter().map(|b| b.total(width)).collect();
        let n_total: u64 = filled.iter().map(|b| b.count).sum();
        let mut pooled = vec![0.0; width];
        for t in &totals {
            for (a, b) in pooled.iter_mut().zip(t) {
                *a += b;
            }
        }
        let nb = filled.len() as f64;
        let dim = self.dim as f64;
        let taus = self.grid.taus();
        let mut rows = Vec::with_capacity(self.grid.len());
        for (j, (&t, &tau)) in self.grid.times.iter().zip(&taus).enumerate() {
            let ubar_sq = match subtraction {
                Subtraction::Analytic => {
                    Some(analytics::ubar(self.grid.kind, t, self.dim)?.norm_sqr())
                }
                Subtraction::Empirical => None,
            };
            let stats = |sums: &[f64], count: u64| -> Statistics {
                let row = &sums[j * stride..(j + 1) * stride];
                let n = count as f64;
                let moments: Vec<f64> = row[..self.n_max].iter().map(|s| s / n).collect();
                let u = Complex64::new(row[self.n_max] / n, row[self.n_max + 1] / n);
                let sub = ubar_sq.unwrap_or_else(|| u.norm_sqr());
                let m1 = moments[0];
                let m2 = moments.get(1).copied();
                let connected = m1 - sub;
                Statistics {
                    conn2: m2.map(|m2| (m2 - 2.0 * connected * connected) / dim),
                    variance: m2.map(|m2| m2 - m1 * m1),
                    moments,
                    u,
                    connected,
                }
            };
            let all = stats(&pooled, n_total);
            let per_batch: Vec<Statistics> = filled
                .iter()
                .zip(&totals)
                .map(|(b, s)| stats(s, b.count))
                .collect();
            let se = |f: &dyn Fn(&Statistics) -> f64| -> f64 {
                let mean = per_batch.iter().map(f).sum::<f64>() / nb;
                let var = per_batch
                    .iter()
                    .map(|s| (f(s) - mean) * (f(s) - mean))
                    .sum::<f64>()
                    / (nb - 1.0);
                math::sqrt(var / nb)
            };
            let se_moments = (0..self.n_max)
                .map(|k| se(&|s: &Statistics| s.moments[k]))
                .collect();
            rows.push(MomentRow {
                t,
                tau,
                se_moments,
                mean_u: all.u,
                sff_connected: all.connected,
                se_sff_connected: se(&|s: &Statistics| s.connected),
                se_conn2: all
                    .conn2
                    .map(|_| se(&|s: &Statistics| s.conn2.unwrap_or(0.0))),
                se_variance: all
                    .variance
                    .map(|_| se(&|s: &Statistics| s.variance.unwrap_or(0.0))),
                conn2: all.conn2,
                variance: all.variance,
                moments: all.moments,
            });
        }
        Ok(MomentTable {
            kind: self.grid.kind,
            dim: self.dim,
            samples: n_total,
            batches: filled.len(),
            subtraction,
            rows,
        })
    }
}

struct Statistics {
    moments: Vec<f64>,
    u: Complex64,
    connected: f64,
    conn2: Option<f64>,
    variance: Option<f64>,
}

/// Estimates at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub t: f64,
    pub tau: f64,
    /// `E[SFF^k]` for `k = 1..=n_max`.
    pub moments: Vec<f64>,
    pub se_moments: Vec<f64>,
    pub mean_u: Complex64,
    /// `E[SFF] - |<u_t>|^2`.
    pub sff_connected: f64,
    pub se_sff_connected: f64,
    /// `(E[SFF^2] - 2 E[SFF_c]^2) / D`; needs `n_max >= 2`.
    pub conn2: Option<f64>,
    pub se_conn2: Option<f64>,
    /// `E[SFF^2] - E[SFF]^2`; needs `n_max >= 2`.
    pub variance: Option<f64>,
    pub se_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub kind: EnsembleKind,
    pub dim: usize,
    pub samples: u64,
    /// Non-empty batches used for the error bars.
    pub batches: usize,
    pub subtraction: Subtraction,
    pub rows: Vec<MomentRow>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{EnsembleSpec, SpectrumKind};
    use proptest::prelude::*;

    fn grid() -> TimeGrid {
        TimeGrid::cue(4, &[1, 2, 3]).unwrap()
    }

    fn fake_u(i: u64) -> Vec<Complex64> {
        (0..3)
            .map(|j| {
                Complex64::new(
                    ((i * 7 + j) % 11) as f64 * 0.3,
                    ((i * 3 + j * 5) % 7) as f64 * 0.2 - 0.5,
                )
            })
            .collect()
    }

    #[test]
    fn grid_validation() {
        let th = HeisenbergTime::cue(4);
        assert!(TimeGrid::new(EnsembleKind::Cue, th, vec![1.5]).is_err());
        assert!(TimeGrid::new(EnsembleKind::Cue, th, vec![2.0, 1.0]).is_err());
        assert!(TimeGrid::new(EnsembleKind::Cue, th, vec![]).is_err());
        assert!(TimeGrid::new(EnsembleKind::Gue, th, vec![-1.0]).is_err());
        let g =
            TimeGrid::from_tau_range(EnsembleKind::Cue, HeisenbergTime::cue(10), 3.0, 30).unwrap();
        assert_eq!(
            g.times(),
            (1..=30).map(|t| t as f64).collect::<Vec<_>>().as_slice()
        );
        let g = TimeGrid::from_tau_range(
            EnsembleKind::Gue,
            HeisenbergTime::gue(100, Default::default()),
            2.0,
            40,
        )
        .unwrap();
        assert!((g.taus()[0] - 0.05).abs() < 1e-15 && (g.taus()[39] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn batch_ranges_partition_samples() {
        let acc = MomentAccumulator::new(grid(), 4, 2, 103, 7).unwrap();
        let mut next = 0;
        for b in 0..7 {
            let r = acc.batch_range(b);
            assert_eq!(r.start, next);
            for i in r.clone() {
                assert_eq!(acc.batch_of(i), b);
            }
            next = r.end;
        }
        assert_eq!(next, 103);
    }

    #[test]
    fn trace_powers_of_known_spectrum() {
        let s = Spectrum::new(
            SpectrumKind::Phases,
            vec![
                -core::f64::consts::FRAC_PI_2,
                0.0,
                core::f64::consts::FRAC_PI_2,
            ],
        )
        .unwrap();
        let u = trace_powers(&s, &TimeGrid::cue(3, &[0, 1, 2]).unwrap());
        assert!((u[0] - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!((u[1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((u[2] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MomentAccumulator::new(grid(), 4, 2, 10, 1).is_err());
        assert!(MomentAccumulator::new(grid(), 4, 0, 10, 2).is_err());
        let mut acc = MomentAccumulator::new(grid(), 4, 2, 10, 2).unwrap();
        assert!(acc.accumulate(10, &fake_u(0)).is_err());
        assert!(acc.accumulate(0, &fake_u(0)[..2]).is_err());
        acc.accumulate(3, &fake_u(3)).unwrap();
        assert!(acc.accumulate(2, &fake_u(2)).is_err());
        assert!(matches!(
            acc.finalize(Subtraction::Empirical),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn means_and_errors_match_two_pass() {
        let n = 1000u64;
        let b = 8;
        let mut acc = MomentAccumulator::new(grid(), 4, 3, n, b).unwrap();
        for i in 0..n {
            acc.accumulate(i, &fake_u(i)).unwrap();
        }
        let table = acc.finalize(Subtraction::Empirical).unwrap();
        for (j, row) in table.rows.iter().enumerate() {
            for k in 0..3 {
                let f = |i: u64| fake_u(i)[j].norm_sqr().powi(k as i32 + 1);
                let mean = (0..n).map(f).sum::<f64>() / n as f64;
                assert!((row.moments[k] - mean).abs() < 1e-12 * mean.abs().max(1.0));
                let bm: Vec<f64> = (0..b)
                    .map(|bb| {
                        let r = acc.batch_range(bb);
                        let len = (r.end - r.start) as f64;
                        r.map(f).sum::<f64>() / len
                    })
                    .collect();
                let avg = bm.iter().sum::<f64>() / b as f64;
                let sd =
                    (bm.iter().map(|x| (x - avg).powi(2)).sum::<f64>() / (b as f64 - 1.0)).sqrt();
                let se = sd / (b as f64).sqrt();
                assert!((row.se_moments[k] - se).abs() < 1e-12 * se.max(1.0));
            }
        }
    }

    #[test]
    fn analytic_subtraction_uses_density() {
        let mut acc =
            MomentAccumulator::new(TimeGrid::cue(4, &[0, 1]).unwrap(), 4, 2, 4, 2).unwrap();
        for i in 0..4 {
            acc.accumulate(i, &[Complex64::new(4.0, 0.0), Complex64::new(1.0, 1.0)])
                .unwrap();
        }
        let t = acc.finalize(Subtraction::Analytic).unwrap();
        assert_eq!(t.rows[0].sff_connected, 0.0);
        assert_eq!(t.rows[1].sff_connected, 2.0);
        let t = acc.finalize(Subtraction::Empirical).unwrap();
        assert_eq!(t.rows[1].sff_connected, 0.0);
    }

    #[test]
    fn merge_of_disjoint_batches_is_exact() {
        let n = 400u64;
        let mut whole = MomentAccumulator::new(grid(), 4, 2, n, 4).unwrap();
        let mut left = whole.clone();
        let mut right = whole.clone();
        for i in 0..n {
            whole.accumulate(i, &fake_u(i)).unwrap();
            if i < 200 {
                left.accumulate(i, &fake_u(i)).unwrap();
            } else {
                right.accumulate(i, &fake_u(i)).unwrap();
            }
        }
        left.merge(&right).unwrap();
        assert_eq!(left, whole);
        let other = MomentAccumulator::new(grid(), 4, 3, n, 4).unwrap();
        assert!(matches!(left.merge(&other), Err(Error::Mismatch(_))));
    }

    #[test]
    fn real_samples_end_to_end() {
        let spec = EnsembleSpec::new(EnsembleKind::Cue, 3, 5).unwrap();
        let g = TimeGrid::cue(3, &[1, 2, 3, 4]).unwrap();
        let mut acc = MomentAccumulator::new(g, 3, 2, 4000, 10).unwrap();
        for i in 0..4000 {
            acc.accumulate_spectrum(i, &spec.sample_spectrum(i).unwrap())
                .unwrap();
        }
        let t = acc.finalize(Subtraction::Empirical).unwrap();
        // CUE: E|tr U^t|^2 = min(t, D)
        for (row, want) in t.rows.iter().zip([1.0, 2.0, 3.0, 3.0]) {
            assert!(
                (row.moments[0] - want).abs() < 5.0 * row.se_moments[0],
                "{row:?}"
            );
        }
    }

    #[test]
    fn batches_filled_in_reverse_order_agree() {
        let n = 300u64;
        let mut whole = MomentAccumulator::new(grid(), 4, 2, n, 3).unwrap();
        for i in 0..n {
            whole.accumulate(i, &fake_u(i)).unwrap();
        }
        let mut rev = MomentAccumulator::new(grid(), 4, 2, n, 3).unwrap();
        for b in (0..3).rev() {
            let mut part = MomentAccumulator::new(grid(), 4, 2, n, 3).unwrap();
            for i in rev.batch_range(b) {
                part.accumulate(i, &fake_u(i)).unwrap();
            }
            rev.merge(&part).unwrap();
        }
        assert_eq!(rev, whole);
    }

    proptest! {
        #[test]
        fn batch_ranges_cover_every_sample_once(n in 2u64..5000, b in 2usize..64) {
            prop_assume!(n >= b as u64);
            let acc = MomentAccumulator::new(grid(), 4, 1, n, b).unwrap();
            let mut next = 0;
            for bb in 0..b {
                let r = acc.batch_range(bb);
                prop_assert_eq!(r.start, next);
                prop_assert!(r.end > r.start);
                prop_assert_eq!(acc.batch_of(r.start), bb);
                prop_assert_eq!(acc.batch_of(r.end - 1), bb);
                next = r.end;
            }
            prop_assert_eq!(next, n);
        }
    }
}
