//! Periodic spatial grid with cached FFT plans.

use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform periodic grid on the box `[-L/2, L/2)`.
///
/// Wavenumbers follow DFT ordering, `k_j = (2*pi/L) * j` for
/// `j = 0, 1, ..., n/2-1, -n/2, ..., -1`, so mode `j` of a forward transform
/// oscillates as `exp(i*k_j*x)`. The grid owns its FFT plans; cloning is
/// cheap and clones share them.
#[derive(Clone)]
pub struct Grid1D<T: Real> {
    n: usize,
    length: T,
    dx: T,
    nodes: Arc<[T]>,
    wavenumbers: Arc<[T]>,
    pub(crate) fft_fwd: Arc<dyn Fft<T>>,
    pub(crate) fft_inv: Arc<dyn Fft<T>>,
}

impl<T: Real> Grid1D<T> {
    /// Build a grid with `n` nodes (power of two, `n >= 8`) on a box of the
    /// given positive length.
    pub fn new(n: usize, length: T) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidLength(length.as_f64()));
        }
        let dx = length / T::lit(n as f64);
        let half = length / T::lit(2.0);
        let nodes: Arc<[T]> = (0..n)
            .map(|i| T::lit(i as f64) * dx - half)
            .collect::<Vec<_>>()
            .into();
        let scale = T::TAU() / length;
        let wavenumbers: Arc<[T]> = (0..n)
            .map(|j| {
                let j_signed = if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                scale * T::lit(j_signed)
            })
            .collect::<Vec<_>>()
            .into();
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n);
        let fft_inv = planner.plan_fft_inverse(n);
        Ok(Self {
            n,
            length,
            dx,
            nodes,
            wavenumbers,
            fft_fwd,
            fft_inv,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Node positions `x_i = -L/2 + i*dx`, `i = 0..n-1`.
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Wavenumbers in DFT ordering.
    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    /// Index of the node nearest to `x`; `x` must lie inside the box.
    /// Snapping error is at most `dx/2`.
    pub fn nearest_node(&self, x: T) -> Result<usize> {
        let half = self.length / T::lit(2.0);
        if !(x >= -half && x < half) {
            return Err(Error::ObservationOutsideBox {
                x0: x.as_f64(),
                lo: (-half).as_f64(),
                hi: half.as_f64(),
            });
        }
        let idx = ((x + half) / self.dx).round().as_f64() as usize;
        Ok(idx % self.n)
    }

    pub(crate) fn same_grid(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl<T: Real> fmt::Debug for Grid1D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D")
            .field("n", &self.n)
            .field("length", &self.length.as_f64())
            .finish()
    }
}

impl<T: Real> PartialEq for Grid1D<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same_grid(other)
    }
}
