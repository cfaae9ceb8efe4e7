use std::f64::consts::PI;

use sff_core::ensembles::{EnsembleKind, EnsembleSpec};
use sff_core::sine_kernel::{r_n_det, KernelSpec};

/// Histogrammed two-level correlation of CUE eigenphases against the sine
/// kernel prediction `R2 / R1^2`, separations in units of the mean spacing.
#[test]
fn cue_pair_correlation_matches_sine_kernel() {
    let (dim, draws) = (30usize, 20_000u64);
    let (lo, hi, width) = (0.2f64, 3.0f64, 0.1f64);
    let bins = ((hi - lo) / width).round() as usize;
    let spec = EnsembleSpec::new(EnsembleKind::Cue, dim, 31).unwrap();
    let spacing = 2.0 * PI / dim as f64;
    let mut counts = vec![0u64; bins];
    for i in 0..draws {
        let phases = spec.sample_spectrum(i).unwrap();
        let v = phases.values();
        for a in 0..dim {
            for b in a + 1..dim {
                let mut d = (v[b] - v[a]).rem_euclid(2.0 * PI);
                if d > PI {
                    d = 2.0 * PI - d;
                }
                let s = d / spacing;
                if s >= lo && s < hi {
                    counts[((s - lo) / width) as usize] += 1;
                }
            }
        }
    }
    let kernel = KernelSpec::new(1.0, dim).unwrap();
    for (k, &c) in counts.iter().enumerate() {
        let a = lo + k as f64 * width;
        // unordered pairs per draw: D * int g(s) ds over the bin
        let observed = c as f64 / (draws as f64 * dim as f64 * width);
        let sub = 50;
        let predicted = (0..sub)
            .map(|m| {
                let s = a + (m as f64 + 0.5) * width / sub as f64;
                r_n_det(&kernel, &[0.0, s]).unwrap()
            })
            .sum::<f64>()
            / sub as f64;
        let rel = (observed - predicted).abs() / predicted;
        assert!(
            rel < 0.05,
            "bin at {a:.1}: observed {observed}, predicted {predicted}"
        );
    }
}
