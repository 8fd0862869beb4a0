//! Sampled complex and real fields on a periodic grid, with the pointwise
//! products the conservation-law densities are built from.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::scalar::Real;

/// Complex-valued field sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField1D<T: Real> {
    grid: Grid1D<T>,
    samples: Vec<Complex<T>>,
}

/// Real-valued field sampled at the grid nodes (densities, residuals).
#[derive(Debug, Clone, PartialEq)]
pub struct RealField1D<T: Real> {
    grid: Grid1D<T>,
    samples: Vec<T>,
}

impl<T: Real> ComplexField1D<T> {
    /// Validates length and finiteness of every sample.
    pub fn new(grid: Grid1D<T>, samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::SampleCount {
                expected: grid.n(),
                got: samples.len(),
            });
        }
        if let Some(i) = first_non_finite_c(&samples) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self { grid, samples })
    }

    /// Skips validation; for internal use on samples already known finite.
    pub(crate) fn from_samples_unchecked(grid: Grid1D<T>, samples: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(samples.len(), grid.n());
        Self { grid, samples }
    }

    pub fn zeros(grid: Grid1D<T>) -> Self {
        let n = grid.n();
        Self::from_samples_unchecked(grid, vec![Complex::new(T::zero(), T::zero()); n])
    }

    /// Sample `f` at every node.
    pub fn from_fn(grid: Grid1D<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let samples = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn is_finite(&self) -> bool {
        first_non_finite_c(&self.samples).is_none()
    }

    /// Complex conjugate, sample by sample.
    pub fn conj(&self) -> Self {
        let samples = self.samples.iter().map(|z| z.conj()).collect();
        Self::from_samples_unchecked(self.grid.clone(), samples)
    }

    /// `|u|^q` as a real field.
    pub fn abs_pow(&self, q: T) -> RealField1D<T> {
        let two = T::lit(2.0);
        let samples = self
            .samples
            .iter()
            .map(|z| {
                if q == two {
                    z.norm_sqr()
                } else {
                    z.norm_sqr().powf(q / two)
                }
            })
            .collect();
        RealField1D::from_samples_unchecked(self.grid.clone(), samples)
    }

    /// Linear combination `self + scale * other`.
    pub fn add_scaled(&self, other: &Self, scale: Complex<T>) -> Result<Self> {
        if !self.grid.same_grid(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| *a + scale * *b)
            .collect();
        Ok(Self::from_samples_unchecked(self.grid.clone(), samples))
    }

    /// Maximum pointwise modulus of the difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if !self.grid.same_grid(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max))
    }
}

impl<T: Real> RealField1D<T> {
    pub fn new(grid: Grid1D<T>, samples: Vec<T>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::SampleCount {
                expected: grid.n(),
                got: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn from_samples_unchecked(grid: Grid1D<T>, samples: Vec<T>) -> Self {
        debug_assert_eq!(samples.len(), grid.n());
        Self { grid, samples }
    }

    pub fn zeros(grid: Grid1D<T>) -> Self {
        let n = grid.n();
        Self::from_samples_unchecked(grid, vec![T::zero(); n])
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &Self, scale: T) -> Result<Self> {
        if !self.grid.same_grid(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| *a + scale * *b)
            .collect();
        Ok(Self::from_samples_unchecked(self.grid.clone(), samples))
    }

    /// Promote to a complex field with zero imaginary part.
    pub fn to_complex(&self) -> ComplexField1D<T> {
        let samples = self
            .samples
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        ComplexField1D::from_samples_unchecked(self.grid.clone(), samples)
    }
}

/// `Im(a * conj(b))`, sample by sample.
pub fn im_product<T: Real>(
    a: &ComplexField1D<T>,
    b: &ComplexField1D<T>,
) -> Result<RealField1D<T>> {
    if !a.grid.same_grid(&b.grid) {
        return Err(Error::GridMismatch);
    }
    let samples = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (*x * y.conj()).im)
        .collect();
    Ok(RealField1D::from_samples_unchecked(a.grid.clone(), samples))
}

/// `Re(a * conj(b))`, sample by sample.
pub fn re_product<T: Real>(
    a: &ComplexField1D<T>,
    b: &ComplexField1D<T>,
) -> Result<RealField1D<T>> {
    if !a.grid.same_grid(&b.grid) {
        return Err(Error::GridMismatch);
    }
    let samples = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (*x * y.conj()).re)
        .collect();
    Ok(RealField1D::from_samples_unchecked(a.grid.clone(), samples))
}

fn first_non_finite_c<T: Real>(samples: &[Complex<T>]) -> Option<usize> {
    samples
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn grid() -> Grid1D<f64> {
        Grid1D::new(16, std::f64::consts::TAU).unwrap()
    }

    #[test]
    fn rejects_wrong_length_and_non_finite() {
        let g = grid();
        assert!(matches!(
            ComplexField1D::new(g.clone(), vec![Complex64::new(1.0, 0.0); 5]),
            Err(Error::SampleCount { .. })
        ));
        let mut s = vec![Complex64::new(0.0, 0.0); 16];
        s[7] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            ComplexField1D::new(g, s),
            Err(Error::NonFiniteSample(7))
        ));
    }

    #[test]
    fn im_product_of_rotated_field_is_density() {
        // Im(i*g * conj(g)) = |g|^2
        let g = grid();
        let f = ComplexField1D::from_fn(g.clone(), |x| Complex64::new(x.cos(), x.sin() * 0.5))
            .unwrap();
        let rotated = ComplexField1D::from_samples_unchecked(
            g,
            f.samples().iter().map(|z| Complex64::i() * z).collect(),
        );
        let p = im_product(&rotated, &f).unwrap();
        for (v, z) in p.samples().iter().zip(f.samples()) {
            assert!((v - z.norm_sqr()).abs() < 1e-15);
        }
    }

    #[test]
    fn re_product_with_self_is_density() {
        let g = grid();
        let f =
            ComplexField1D::from_fn(g, |x| Complex64::new((2.0 * x).sin(), x.cos())).unwrap();
        let p = re_product(&f, &f).unwrap();
        for (v, z) in p.samples().iter().zip(f.samples()) {
            assert!((v - z.norm_sqr()).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = ComplexField1D::zeros(grid());
        let b = ComplexField1D::zeros(Grid1D::new(32, std::f64::consts::TAU).unwrap());
        assert!(matches!(im_product(&a, &b), Err(Error::GridMismatch)));
        assert!(matches!(re_product(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn abs_pow_quartic() {
        let g = grid();
        let f = ComplexField1D::from_fn(g, |x| Complex64::new(x.cos(), 0.0)).unwrap();
        let q = f.abs_pow(4.0);
        for (v, x) in q.samples().iter().zip(f.grid().nodes()) {
            assert!((v - x.cos().powi(4)).abs() < 1e-14);
        }
    }
}
