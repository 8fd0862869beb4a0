//! Spectral calculus on the periodic grid.
//!
//! Conventions, used everywhere in this crate:
//! * forward DFT is unnormalized, `F_j = sum_i u_i exp(-i k_j x_i)` up to the
//!   usual index form `sum_i u_i exp(-2*pi*i*j*i/n)`;
//! * the inverse carries the `1/n` factor;
//! * quadrature is the periodic rectangle rule `dx * sum`, which is exact for
//!   trigonometric polynomials below the Nyquist mode.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{ComplexField1D, RealField1D};
use crate::grid::Grid1D;
use crate::scalar::Real;

/// Forward DFT of a field (unnormalized).
pub fn dft<T: Real>(field: &ComplexField1D<T>) -> Vec<Complex<T>> {
    let mut buf = field.samples().to_vec();
    field.grid().fft_fwd.process(&mut buf);
    buf
}

/// Inverse DFT (carries the `1/n` normalization). The spectrum length must
/// match the grid.
pub fn inverse_dft<T: Real>(grid: &Grid1D<T>, spectrum: &[Complex<T>]) -> Result<ComplexField1D<T>> {
    if spectrum.len() != grid.n() {
        return Err(Error::SampleCount {
            expected: grid.n(),
            got: spectrum.len(),
        });
    }
    let mut buf = spectrum.to_vec();
    grid.fft_inv.process(&mut buf);
    let scale = T::one() / T::lit(grid.n() as f64);
    for z in &mut buf {
        *z = z.scale(scale);
    }
    Ok(ComplexField1D::from_samples_unchecked(grid.clone(), buf))
}

/// Spectral derivative: mode `j` is multiplied by `(i*k_j)^order`.
/// Supported orders are 1 and 2.
pub fn derivative<T: Real>(field: &ComplexField1D<T>, order: u32) -> Result<ComplexField1D<T>> {
    if order != 1 && order != 2 {
        return Err(Error::UnsupportedDerivativeOrder(order));
    }
    let grid = field.grid();
    let mut spectrum = dft(field);
    match order {
        1 => {
            for (z, &k) in spectrum.iter_mut().zip(grid.wavenumbers()) {
                *z = Complex::new(T::zero(), k) * *z;
            }
        }
        _ => {
            for (z, &k) in spectrum.iter_mut().zip(grid.wavenumbers()) {
                *z = z.scale(-k * k);
            }
        }
    }
    inverse_dft(grid, &spectrum)
}

/// Periodic rectangle rule, `dx * sum(samples)`, with a fixed left-to-right
/// reduction order so results are reproducible bit for bit.
pub fn integrate<T: Real>(field: &RealField1D<T>) -> T {
    let mut acc = T::zero();
    for &v in field.samples() {
        acc = acc + v;
    }
    acc * field.grid().dx()
}

/// `∫ |u|^2 dx` via the same quadrature path as [`integrate`].
pub fn l2_norm_sq<T: Real>(field: &ComplexField1D<T>) -> T {
    integrate(&field.abs_pow(T::lit(2.0)))
}

/// Zero every mode with `|j| >= n/3` (the 2/3 rule), in place on a spectrum.
pub fn apply_dealias_mask<T: Real>(grid: &Grid1D<T>, spectrum: &mut [Complex<T>]) {
    let n = grid.n();
    let cutoff = n / 3;
    for (j, z) in spectrum.iter_mut().enumerate() {
        let j_signed = if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        };
        if j_signed.unsigned_abs() as usize >= cutoff {
            *z = Complex::new(T::zero(), T::zero());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn grid(n: usize, length: f64) -> Grid1D<f64> {
        Grid1D::new(n, length).unwrap()
    }

    #[test]
    fn dft_of_constant_concentrates_in_mode_zero() {
        let g = grid(16, std::f64::consts::TAU);
        let c = Complex64::new(0.7, -0.3);
        let f = ComplexField1D::from_fn(g, |_| c).unwrap();
        let spec = dft(&f);
        assert!((spec[0] - c * 16.0).norm() < 1e-13);
        for z in &spec[1..] {
            assert!(z.norm() < 1e-13);
        }
    }

    #[test]
    fn dft_of_pure_tone_hits_mode_one() {
        let g = grid(32, 5.0);
        let k1 = g.wavenumbers()[1];
        let f = ComplexField1D::from_fn(g.clone(), |x| Complex64::new(0.0, k1 * x).exp())
            .unwrap();
        let spec = dft(&f);
        // nodes start at -L/2, so mode 1 carries the offset phase
        let expect = 32.0 * Complex64::from_polar(1.0, -k1 * g.length() / 2.0);
        assert!((spec[1] - expect).norm() < 1e-11);
        for (j, z) in spec.iter().enumerate() {
            if j != 1 {
                assert!(z.norm() < 1e-11, "leakage in mode {j}: {z}");
            }
        }
    }

    #[test]
    fn derivative_of_resolved_exponential() {
        let g = grid(64, std::f64::consts::TAU);
        let k = 5.0; // resolved: |5| < 32
        let f = ComplexField1D::from_fn(g.clone(), |x| Complex64::new(0.0, k * x).exp()).unwrap();
        let df = derivative(&f, 1).unwrap();
        let expect = ComplexField1D::from_fn(g, |x| {
            Complex64::new(0.0, k) * Complex64::new(0.0, k * x).exp()
        })
        .unwrap();
        assert!(df.max_abs_diff(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid(16, 3.0);
        let f = ComplexField1D::from_fn(g, |_| Complex64::new(2.0, 1.0)).unwrap();
        let df = derivative(&f, 1).unwrap();
        for z in df.samples() {
            assert!(z.norm() < 1e-13);
        }
    }

    #[test]
    fn second_derivative_of_sine() {
        let length = 7.0;
        let g = grid(64, length);
        let k = std::f64::consts::TAU / length;
        let f = ComplexField1D::from_fn(g.clone(), |x| Complex64::new((k * x).sin(), 0.0)).unwrap();
        let d2 = derivative(&f, 2).unwrap();
        let expect =
            ComplexField1D::from_fn(g, |x| Complex64::new(-k * k * (k * x).sin(), 0.0)).unwrap();
        assert!(d2.max_abs_diff(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn derivative_rejects_unsupported_order() {
        let g = grid(8, 1.0);
        let f = ComplexField1D::zeros(g);
        assert!(matches!(
            derivative(&f, 3),
            Err(Error::UnsupportedDerivativeOrder(3))
        ));
    }

    #[test]
    fn integrate_constant_and_zero() {
        let g = grid(32, std::f64::consts::TAU);
        assert_eq!(integrate(&RealField1D::zeros(g.clone())), 0.0);
        let one = RealField1D::new(g, vec![1.0; 32]).unwrap();
        assert!((integrate(&one) - std::f64::consts::TAU).abs() < 1e-14);
    }

    #[test]
    fn integrate_sech_squared() {
        // ∫ sech^2(x) dx = 2; tails at |x| = 20 are far below 1e-12.
        let g = grid(256, 40.0);
        let f = RealField1D::new(
            g.clone(),
            g.nodes().iter().map(|x| 1.0 / x.cosh().powi(2)).collect(),
        )
        .unwrap();
        assert!((integrate(&f) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_l2_norm() {
        // |A|^2 * L with A = 2, L = 2*pi -> 8*pi
        let g = grid(32, std::f64::consts::TAU);
        let k1 = g.wavenumbers()[1];
        let f =
            ComplexField1D::from_fn(g, |x| 2.0 * Complex64::new(0.0, k1 * x).exp()).unwrap();
        assert!((l2_norm_sq(&f) - 8.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn integral_of_derivative_vanishes() {
        let g = grid(64, 9.0);
        let k = std::f64::consts::TAU / 9.0;
        let f = ComplexField1D::from_fn(g, |x| {
            Complex64::new((k * x).sin() + 0.3 * (2.0 * k * x).cos(), 0.0)
        })
        .unwrap();
        let df = derivative(&f, 1).unwrap();
        let re = RealField1D::new(
            df.grid().clone(),
            df.samples().iter().map(|z| z.re).collect(),
        )
        .unwrap();
        assert!(integrate(&re).abs() < 1e-11);
    }

    #[test]
    fn dealias_mask_zeroes_top_third() {
        let g = grid(16, 1.0);
        let mut spec = vec![Complex64::new(1.0, 0.0); 16];
        apply_dealias_mask(&g, &mut spec);
        // cutoff = 5: modes |j| in {5,6,7} and Nyquist (-8) are zeroed
        for (j, z) in spec.iter().enumerate() {
            let j_signed = if j < 8 { j as i64 } else { j as i64 - 16 };
            if j_signed.unsigned_abs() >= 5 {
                assert_eq!(z.norm(), 0.0, "mode {j_signed} should be masked");
            } else {
                assert_eq!(z.norm(), 1.0, "mode {j_signed} should survive");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn round_trip_is_identity(
            exp in 3u32..7,
            seedling in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 128),
        ) {
            let n = 1usize << exp;
            let g = grid(n, 11.0);
            let samples: Vec<Complex64> = seedling[..n]
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect();
            let f = ComplexField1D::new(g.clone(), samples).unwrap();
            let back = inverse_dft(&g, &dft(&f)).unwrap();
            let scale = f
                .samples()
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max)
                .max(1e-30);
            prop_assert!(back.max_abs_diff(&f).unwrap() / scale < 1e-13);
        }

        #[test]
        fn parseval_holds(
            exp in 3u32..7,
            seedling in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 128),
        ) {
            let n = 1usize << exp;
            let g = grid(n, 3.7);
            let samples: Vec<Complex64> = seedling[..n]
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect();
            let f = ComplexField1D::new(g.clone(), samples).unwrap();
            let physical = l2_norm_sq(&f);
            let spectral: f64 = dft(&f).iter().map(|z| z.norm_sqr()).sum::<f64>()
                * g.dx() / n as f64;
            prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(1e-30));
        }

        #[test]
        fn first_derivative_twice_matches_second(
            seedling in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        ) {
            // Build a smooth band-limited field so Nyquist asymmetry is absent.
            let g = grid(64, 6.0);
            let coeffs: Vec<Complex64> = seedling
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect();
            let f = ComplexField1D::from_fn(g.clone(), |x| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, c) in coeffs.iter().enumerate() {
                    let k = std::f64::consts::TAU / 6.0 * (m as f64 + 1.0);
                    acc += c * Complex64::new(0.0, k * x).exp();
                }
                acc
            })
            .unwrap();
            let twice = derivative(&derivative(&f, 1).unwrap(), 1).unwrap();
            let once = derivative(&f, 2).unwrap();
            prop_assert!(twice.max_abs_diff(&once).unwrap() < 1e-11);
        }

        #[test]
        fn derivative_is_linear(
            seedling in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 32),
            alpha in -2.0f64..2.0,
        ) {
            let g = grid(32, 4.0);
            let a: Vec<Complex64> = seedling[..16].iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            let b: Vec<Complex64> = seedling[16..32].iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            // interpolate trigonometric data from the low half of the spectrum
            let mk = |coef: &[Complex64]| {
                ComplexField1D::from_fn(g.clone(), |x| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (m, c) in coef.iter().enumerate().take(8) {
                        let k = std::f64::consts::TAU / 4.0 * m as f64;
                        acc += c * Complex64::new(0.0, k * x).exp();
                    }
                    acc
                })
                .unwrap()
            };
            let fa = mk(&a);
            let fb = mk(&b);
            let combo = fa.add_scaled(&fb, Complex64::new(alpha, 0.0)).unwrap();
            let lhs = derivative(&combo, 1).unwrap();
            let rhs = derivative(&fa, 1)
                .unwrap()
                .add_scaled(&derivative(&fb, 1).unwrap(), Complex64::new(alpha, 0.0))
                .unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
        }
    }
}
