//! Dense statevector engine.
//!
//! Qubit `k` is the `k`-th least-significant bit of a basis-state index, so
//! basis state `b` has qubit `k` in `|1⟩` iff `b >> k & 1 == 1`.
//!
//! Only the gates the ZZ feature map and single-qubit tomography need are
//! provided: Hadamard, S†, and diagonal phases.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};

/// Default upper bound on the number of simulated qubits.
pub const DEFAULT_MAX_QUBITS: usize = 14;

/// A pure `n`-qubit state stored as `2^n` complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits, with the default qubit cap.
    pub fn vacuum(n_qubits: usize) -> Result<Self> {
        Self::vacuum_with_cap(n_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn vacuum_with_cap(n_qubits: usize, max_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits, max_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the caller is
    /// responsible for normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Config(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `H` to every qubit.
    pub fn apply_hadamard_layer(&self) -> Self {
        let mut out = self.clone();
        for k in 0..self.n_qubits {
            hadamard_in_place(&mut out.amplitudes, k);
        }
        out
    }

    /// Applies `H` to qubit `k`.
    pub fn apply_hadamard(&self, k: usize) -> Result<Self> {
        self.check_index(k)?;
        let mut out = self.clone();
        hadamard_in_place(&mut out.amplitudes, k);
        Ok(out)
    }

    /// Applies `S† = diag(1, -i)` to qubit `k`.
    pub fn apply_s_dagger(&self, k: usize) -> Result<Self> {
        self.check_index(k)?;
        let mut out = self.clone();
        let mask = 1usize << k;
        let minus_i = Complex64::new(0.0, -1.0);
        for (b, a) in out.amplitudes.iter_mut().enumerate() {
            if b & mask != 0 {
                *a *= minus_i;
            }
        }
        Ok(out)
    }

    /// Multiplies amplitude `b` by `exp(i·phases[b])`.
    pub fn apply_diagonal_phase(&self, phases: &[f64]) -> Result<Self> {
        error::shape(self.dim(), phases.len())?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(phases)
            .map(|(a, &phi)| a * Complex64::from_polar(1.0, phi))
            .collect();
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes,
        })
    }

    /// `⟨other|self⟩ = Σ conj(other_b)·self_b`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        error::shape(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| b.conj() * a)
            .sum())
    }

    /// Probability of reading `0` on qubit `k` in the computational basis.
    pub fn probability_zero(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        let mask = 1usize << k;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| b & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Single-qubit marginal `Tr_{j≠k} |ψ⟩⟨ψ|`, in `O(2^n)`.
    pub fn reduce_to_qubit(&self, k: usize) -> Result<ReducedDensityMatrix> {
        self.check_index(k)?;
        let mask = 1usize << k;
        let mut p00 = 0.0;
        let mut p11 = 0.0;
        let mut c01 = Complex64::new(0.0, 0.0);
        for b in (0..self.dim()).filter(|b| b & mask == 0) {
            let a0 = self.amplitudes[b];
            let a1 = self.amplitudes[b | mask];
            p00 += a0.norm_sqr();
            p11 += a1.norm_sqr();
            c01 += a0 * a1.conj();
        }
        // p00 + p11 may drift from 1 by rounding; keep the trace exact.
        let trace = p00 + p11;
        Ok(ReducedDensityMatrix::from_components(
            p00 / trace,
            c01.re / trace,
            c01.im / trace,
        ))
    }

    /// All single-qubit marginals, qubit 0 first.
    pub fn reduced_matrices(&self) -> Vec<ReducedDensityMatrix> {
        (0..self.n_qubits)
            .map(|k| self.reduce_to_qubit(k).expect("k < n_qubits"))
            .collect()
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k < self.n_qubits {
            Ok(())
        } else {
            Err(Error::Index {
                index: k,
                len: self.n_qubits,
            })
        }
    }
}

pub(crate) fn check_qubits(n_qubits: usize, max_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > max_qubits {
        return Err(Error::Config(format!(
            "qubit count {n_qubits} outside 1..={max_qubits}"
        )));
    }
    Ok(())
}

fn hadamard_in_place(amps: &mut [Complex64], k: usize) {
    let mask = 1usize << k;
    for b in 0..amps.len() {
        if b & mask == 0 {
            let a0 = amps[b];
            let a1 = amps[b | mask];
            amps[b] = (a0 + a1) * FRAC_1_SQRT_2;
            amps[b | mask] = (a0 - a1) * FRAC_1_SQRT_2;
        }
    }
}

/// A 2×2 single-qubit density matrix, parameterized by its three independent
/// real components `ρ^D = ρ₀₀`, `ρ^R = Re ρ₀₁`, `ρ^I = Im ρ₀₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensityMatrix {
    pub diag: f64,
    pub re: f64,
    pub im: f64,
}

impl ReducedDensityMatrix {
    pub fn from_components(diag: f64, re: f64, im: f64) -> Self {
        Self { diag, re, im }
    }

    pub fn maximally_mixed() -> Self {
        Self::from_components(0.5, 0.0, 0.0)
    }

    /// `|0⟩⟨0|`.
    pub fn zero() -> Self {
        Self::from_components(1.0, 0.0, 0.0)
    }

    /// `|1⟩⟨1|`.
    pub fn one() -> Self {
        Self::from_components(0.0, 0.0, 0.0)
    }

    pub fn components(&self) -> [f64; 3] {
        [self.diag, self.re, self.im]
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        let c01 = Complex64::new(self.re, self.im);
        [
            [Complex64::new(self.diag, 0.0), c01],
            [c01.conj(), Complex64::new(1.0 - self.diag, 0.0)],
        ]
    }

    /// Success probabilities of the three tomography measurements:
    /// `(ρ^D, ρ^R + ½, ½ − ρ^I)`.
    pub fn measured_values(&self) -> [f64; 3] {
        [self.diag, self.re + 0.5, 0.5 - self.im]
    }

    /// Inverse of [`measured_values`](Self::measured_values).
    pub fn from_measured_values(m: [f64; 3]) -> Self {
        Self::from_components(m[0], m[1] - 0.5, 0.5 - m[2])
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let r = self.bloch_radius() / 2.0;
        [0.5 - r, 0.5 + r]
    }

    /// Length of the Bloch vector, `2·sqrt((ρ^D − ½)² + (ρ^R)² + (ρ^I)²)`.
    pub fn bloch_radius(&self) -> f64 {
        let d = self.diag - 0.5;
        2.0 * (d * d + self.re * self.re + self.im * self.im).sqrt()
    }

    /// Squared Schatten 2-norm of `self − other`:
    /// `2[(Δρ^D)² + (Δρ^R)² + (Δρ^I)²]`.
    pub fn distance_sqr(&self, other: &Self) -> f64 {
        let dd = self.diag - other.diag;
        let dr = self.re - other.re;
        let di = self.im - other.im;
        2.0 * (dd * dd + dr * dr + di * di)
    }

    /// `(1 − p)·ρ + p·I/2`.
    pub fn depolarize(&self, p: f64) -> Self {
        Self::from_components(
            (1.0 - p) * self.diag + 0.5 * p,
            (1.0 - p) * self.re,
            (1.0 - p) * self.im,
        )
    }
}
