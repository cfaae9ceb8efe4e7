use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// Structural promise attached to a matrix.
///
/// Samplers mark their output so the eigen-solvers can skip the O(D^3)
/// verification pass; matrices built by callers start out as `General`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    General,
    Hermitian,
    Unitary,
}

/// Square complex matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
    structure: Structure,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
            structure: Structure::General,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i + i * dim] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds `m[(i, j)] = f(i, j)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for i in 0..dim {
                m.data[i + j * dim] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidInput(alloc::format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self::from_fn(dim, |i, j| entries[i * dim + j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + j * self.dim]
    }

    /// Writes one entry; this drops any structural promise.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i + j * self.dim] = value;
        self.structure = Structure::General;
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub(crate) fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub(crate) fn with_structure(mut self, structure: Structure) -> Self {
        self.structure = structure;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::from_fn(n, |i, j| self.get(j, i).conj());
        m.structure = self.structure;
        m
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidInput(alloc::format!(
                "dimension mismatch {} vs {}",
                self.dim,
                other.dim
            )));
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for j in 0..n {
            for k in 0..n {
                let b = other.data[k + j * n];
                if b == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let col = &self.data[k * n..(k + 1) * n];
                let dst = &mut out.data[j * n..(j + 1) * n];
                for (d, a) in dst.iter_mut().zip(col) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        math::sqrt(self.data.iter().fold(0.0, |m, z| m.max(z.norm_sqr())))
    }

    /// Largest entrywise deviation from `H = H^H`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in j..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm_sqr());
            }
        }
        math::sqrt(worst)
    }

    /// Largest entrywise deviation of `U^H U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                let dot: Complex64 = self
                    .column(i)
                    .iter()
                    .zip(self.column(j))
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm_sqr());
            }
        }
        math::sqrt(worst)
    }

    /// Marks the matrix Hermitian after checking it to `tol` relative to its largest entry.
    pub fn into_hermitian(self, tol: f64) -> Result<Self> {
        let scale = self.max_abs().max(1.0);
        if !self.is_finite() || self.hermitian_defect() > tol * scale {
            return Err(Error::InvalidInput("matrix is not Hermitian".into()));
        }
        Ok(self.with_structure(Structure::Hermitian))
    }

    /// Marks the matrix unitary after checking `U^H U = I` to `tol`.
    pub fn into_unitary(self, tol: f64) -> Result<Self> {
        if !self.is_finite() || self.unitarity_defect() > tol {
            return Err(Error::InvalidInput("matrix is not unitary".into()));
        }
        Ok(self.with_structure(Structure::Unitary))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i + j * self.dim]
    }
}
