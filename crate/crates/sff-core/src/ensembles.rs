//! Haar-random unitaries (CUE), Gaussian Hermitian matrices (GUE) and their spectra.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, householder_qr, unitary_eigenphases, ComplexMatrix, Structure,
};
use crate::math;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EnsembleKind {
    Cue,
    Gue,
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleKind::Cue => "cue",
            EnsembleKind::Gue => "gue",
        })
    }
}

/// Which Heisenberg-time convention to use for the GUE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ThConvention {
    /// `t_H = pi D / 2`, the inverse mean level spacing at the band centre.
    #[default]
    HalfPiD,
    /// `t_H = 2 D`.
    TwoD,
}

/// Heisenberg time `t_H` used to rescale `tau = t / t_H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergTime(f64);

impl HeisenbergTime {
    pub fn cue(dim: usize) -> Self {
        Self(dim as f64)
    }

    pub fn gue(dim: usize, convention: ThConvention) -> Self {
        match convention {
            ThConvention::HalfPiD => Self(core::f64::consts::FRAC_PI_2 * dim as f64),
            ThConvention::TwoD => Self(2.0 * dim as f64),
        }
    }

    pub fn for_kind(kind: EnsembleKind, dim: usize, convention: ThConvention) -> Self {
        match kind {
            EnsembleKind::Cue => Self::cue(dim),
            EnsembleKind::Gue => Self::gue(dim, convention),
        }
    }

    pub(crate) fn from_value(value: f64) -> Self {
        Self(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn tau(self, t: f64) -> f64 {
        t / self.0
    }
}

/// Which ensemble, its dimension and the master seed for sample streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    kind: EnsembleKind,
    dim: usize,
    seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(Self { kind, dim, seed })
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draws sample `index`; the result depends only on `(seed, index)`.
    pub fn sample(&self, index: u64) -> Result<ComplexMatrix> {
        let mut rng = RngStream::new(self.seed, index);
        match self.kind {
            EnsembleKind::Cue => sample_cue(self.dim, &mut rng),
            EnsembleKind::Gue => sample_gue(self.dim, &mut rng),
        }
    }

    pub fn sample_spectrum(&self, index: u64) -> Result<Spectrum> {
        spectrum_of(self.kind, &self.sample(index)?)
    }
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn sample_cue(dim: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let g = ComplexMatrix::from_fn(dim, |_, _| {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(s * rng.normal(), s * rng.normal())
    });
    let qr = householder_qr(&g)?;
    let mut q = qr.q;
    for j in 0..dim {
        let r = qr.r[(j, j)];
        let a = math::abs(r);
        if a == 0.0 {
            continue;
        }
        let phase = r / a;
        for x in &mut q.data_mut()[j * dim..(j + 1) * dim] {
            *x *= phase;
        }
    }
    Ok(q.with_structure(Structure::Unitary))
}

/// GUE matrix with density proportional to `exp(-(D/2) tr H^2)`: diagonal
/// entries real with variance `1/D`, off-diagonal `E|H_ij|^2 = 1/D`.
pub fn sample_gue(dim: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let var = 1.0 / dim as f64;
    let sd = math::sqrt(var);
    let mut h = ComplexMatrix::zeros(dim);
    {
        let d = h.data_mut();
        for j in 0..dim {
            d[j + j * dim] = Complex64::new(sd * rng.normal(), 0.0);
            for i in j + 1..dim {
                let z = rng.complex_gaussian(var)?;
                d[i + j * dim] = z;
                d[j + i * dim] = z.conj();
            }
        }
    }
    Ok(h.with_structure(Structure::Hermitian))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Eigenphases in `(-pi, pi]`.
    Phases,
    /// Real eigenvalues.
    Energies,
}

/// Sorted eigenphases of a unitary or eigenvalues of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
    values: Vec<f64>,
}

impl Spectrum {
    /// Validates ordering and range before wrapping `values`.
    pub fn new(kind: SpectrumKind, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("spectrum has non-finite values".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(
                "spectrum must be sorted ascending".into(),
            ));
        }
        if kind == SpectrumKind::Phases
            && values
                .iter()
                .any(|v| *v <= -core::f64::consts::PI || *v > core::f64::consts::PI)
        {
            return Err(Error::InvalidInput("phases must lie in (-pi, pi]".into()));
        }
        Ok(Self { kind, values })
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Spectrum of a sampled matrix, using the solver that matches `kind`.
pub fn spectrum_of(kind: EnsembleKind, m: &ComplexMatrix) -> Result<Spectrum> {
    Ok(match kind {
        EnsembleKind::Cue => Spectrum {
            kind: SpectrumKind::Phases,
            values: unitary_eigenphases(m)?,
        },
        EnsembleKind::Gue => Spectrum {
            kind: SpectrumKind::Energies,
            values: hermitian_eigenvalues(m)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn heisenberg_times() {
        assert_eq!(HeisenbergTime::cue(10).value(), 10.0);
        assert!(
            (HeisenbergTime::gue(100, ThConvention::HalfPiD).value() - 157.07963267948966).abs()
                < 1e-12
        );
        assert_eq!(HeisenbergTime::gue(100, ThConvention::TwoD).value(), 200.0);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(EnsembleSpec::new(EnsembleKind::Cue, 0, 1).is_err());
        let mut rng = RngStream::new(1, 1);
        assert!(sample_cue(0, &mut rng).is_err());
        assert!(sample_gue(0, &mut rng).is_err());
    }

    #[test]
    fn one_dimensional_cases() {
        let spec = EnsembleSpec::new(EnsembleKind::Cue, 1, 5).unwrap();
        let u = spec.sample(0).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
        let spec = EnsembleSpec::new(EnsembleKind::Gue, 1, 5).unwrap();
        let s = spec.sample_spectrum(0).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn samples_are_reproducible() {
        let spec = EnsembleSpec::new(EnsembleKind::Cue, 6, 42).unwrap();
        assert_eq!(spec.sample(17).unwrap(), spec.sample(17).unwrap());
        assert_ne!(spec.sample(17).unwrap(), spec.sample(18).unwrap());
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(SpectrumKind::Energies, alloc::vec![1.0, 0.0]).is_err());
        assert!(Spectrum::new(SpectrumKind::Phases, alloc::vec![-4.0]).is_err());
        assert!(Spectrum::new(
            SpectrumKind::Phases,
            alloc::vec![-1.0, core::f64::consts::PI]
        )
        .is_ok());
    }

    proptest! {
        #[test]
        fn cue_is_unitary(dim in 1usize..40, seed in any::<u64>(), idx in any::<u64>()) {
            let u = EnsembleSpec::new(EnsembleKind::Cue, dim, seed).unwrap().sample(idx).unwrap();
            prop_assert!(u.unitarity_defect() < 1e-12 * dim as f64);
            prop_assert_eq!(u.structure(), Structure::Unitary);
        }

        #[test]
        fn gue_is_hermitian(dim in 1usize..40, seed in any::<u64>(), idx in any::<u64>()) {
            let h = EnsembleSpec::new(EnsembleKind::Gue, dim, seed).unwrap().sample(idx).unwrap();
            prop_assert_eq!(h.hermitian_defect(), 0.0);
        }
    }
}
