//! Time evolution of the cubic Schrödinger equation
//!
//! ```text
//! i u_t + u_xx = sigma |u|^(p-1) u,      u(0, x) = u0(x)
//! ```
//!
//! on the periodic box, by two independent integrators:
//!
//! * **Strang splitting** — the dispersive part is solved exactly in Fourier
//!   space, the nonlinear phase rotation is solved exactly (it preserves
//!   `|u|` pointwise), composed half/full/half. Mass conservation is
//!   structural.
//! * **Classical RK4** on the full right-hand side, as an independent
//!   cross-check with a different error mechanism.
//!
//! A small library of closed-form initial data (plane wave, bright soliton,
//! Gaussian packet) doubles as the oracle set for both integrators.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::ComplexField1D;
use crate::grid::Grid1D;
use crate::scalar::Real;
use crate::spectral::{apply_dealias_mask, derivative, inverse_dft};

/// Parameters of the equation: nonlinearity sign, coefficient and order.
///
/// `sigma = +1` is the defocusing equation; `sigma = -1` is the focusing
/// variant, which admits the bright-soliton solution used as an oracle.
/// `lambda` only enters the momentum-flux density, never the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsParams<T: Real> {
    sigma: i32,
    lambda: T,
    p: u32,
}

impl<T: Real> NlsParams<T> {
    pub fn new(sigma: i32, lambda: T, p: u32) -> Result<Self> {
        if sigma != 1 && sigma != -1 {
            return Err(Error::InvalidSigma(sigma));
        }
        if !(lambda >= T::one()) {
            return Err(Error::InvalidLambda(lambda.as_f64()));
        }
        if p < 3 || p % 2 == 0 {
            return Err(Error::InvalidNonlinearOrder(p));
        }
        Ok(Self { sigma, lambda, p })
    }

    /// Cubic defocusing equation with `lambda = 1`.
    pub fn cubic(sigma: i32) -> Result<Self> {
        Self::new(sigma, T::one(), 3)
    }

    pub fn sigma(&self) -> i32 {
        self.sigma
    }

    pub fn sigma_scalar(&self) -> T {
        T::lit(self.sigma as f64)
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `|u|^(p-1)` evaluated from `|u|^2`; `(p-1)/2` is a positive integer.
    pub(crate) fn amplitude_power(&self, norm_sqr: T) -> T {
        norm_sqr.powi(((self.p - 1) / 2) as i32)
    }
}

/// Which time integrator drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Strang,
    Rk4,
}

/// Time-stepping configuration.
///
/// `linear` disables the nonlinear term entirely (free Schrödinger flow);
/// it exists so the smoothing harness can compare the nonlinear and linear
/// equations on the same code path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T: Real> {
    pub dt: T,
    pub t_end: T,
    pub integrator: Integrator,
    pub record_every: usize,
    pub dealias: bool,
    pub linear: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(dt: T, t_end: T, integrator: Integrator, record_every: usize) -> Self {
        Self {
            dt,
            t_end,
            integrator,
            record_every,
            dealias: false,
            linear: false,
        }
    }

    /// Stability-guard factor for RK4: `dt < RK4_SAFETY * dx^2`.
    pub const RK4_SAFETY: f64 = 0.1;

    pub fn validate(&self, grid: &Grid1D<T>) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidTimeStep(self.dt.as_f64()));
        }
        if !(self.t_end >= self.dt) {
            return Err(Error::InvalidTimeSpan {
                t_end: self.t_end.as_f64(),
                dt: self.dt.as_f64(),
            });
        }
        if self.record_every == 0 {
            return Err(Error::InvalidRecordCadence);
        }
        if self.integrator == Integrator::Rk4 {
            let limit = T::lit(Self::RK4_SAFETY) * grid.dx() * grid.dx();
            if !(self.dt < limit) {
                return Err(Error::UnstableTimeStep {
                    dt: self.dt.as_f64(),
                    limit: limit.as_f64(),
                });
            }
        }
        Ok(())
    }
}

/// The recorded history of one run: `times[i]` and `states[i]` pair up,
/// `times[0] == 0` and `states[0]` is the initial datum.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    grid: Grid1D<T>,
    params: NlsParams<T>,
    times: Vec<T>,
    states: Vec<ComplexField1D<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn params(&self) -> &NlsParams<T> {
        &self.params
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[ComplexField1D<T>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory has at least one record")
    }

    pub fn final_state(&self) -> &ComplexField1D<T> {
        self.states.last().expect("trajectory has at least one record")
    }

    /// Keep every `stride`-th record, starting from the first. Used for
    /// refinement studies on the record spacing.
    pub fn keep_every(&self, stride: usize) -> Trajectory<T> {
        assert!(stride >= 1);
        Trajectory {
            grid: self.grid.clone(),
            params: self.params,
            times: self.times.iter().copied().step_by(stride).collect(),
            states: self.states.iter().cloned().step_by(stride).collect(),
        }
    }

    /// Record spacing, provided the records are uniformly spaced in time
    /// (relative tolerance 1e-9).
    pub fn record_spacing(&self) -> Result<T> {
        if self.len() < 2 {
            return Err(Error::TooFewRecords {
                needed: 2,
                got: self.len(),
            });
        }
        let dt = self.times[1] - self.times[0];
        let tol = dt * T::lit(1e-9);
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > tol {
                return Err(Error::NonUniformRecords);
            }
        }
        Ok(dt)
    }
}

/// Right-hand side of the equation solved for `u_t`:
/// `u_t = i u_xx - i sigma |u|^(p-1) u`.
pub fn nls_rhs<T: Real>(u: &ComplexField1D<T>, params: &NlsParams<T>) -> Result<ComplexField1D<T>> {
    rhs_opts(u, params, false, false)
}

fn rhs_opts<T: Real>(
    u: &ComplexField1D<T>,
    params: &NlsParams<T>,
    linear: bool,
    dealias: bool,
) -> Result<ComplexField1D<T>> {
    let uxx = derivative(u, 2)?;
    let i = Complex::<T>::i();
    let sigma = params.sigma_scalar();
    let mut samples: Vec<Complex<T>> = if linear {
        uxx.samples().iter().map(|&d| i * d).collect()
    } else {
        u.samples()
            .iter()
            .zip(uxx.samples())
            .map(|(&z, &d)| i * d - i * z.scale(sigma * params.amplitude_power(z.norm_sqr())))
            .collect()
    };
    if dealias {
        let grid = u.grid();
        grid.fft_fwd.process(&mut samples);
        apply_dealias_mask(grid, &mut samples);
        grid.fft_inv.process(&mut samples);
        let scale = T::one() / T::lit(grid.n() as f64);
        for z in &mut samples {
            *z = z.scale(scale);
        }
    }
    Ok(ComplexField1D::from_samples_unchecked(
        u.grid().clone(),
        samples,
    ))
}

/// One Strang step: exact dispersive flow over `dt/2` in Fourier space,
/// exact nonlinear phase rotation over `dt`, dispersive flow over `dt/2`.
///
/// Both substeps preserve the modulus spectrum respectively pointwise, so
/// discrete mass conservation is structural. The dispersive-half-first
/// composition is used because its global error constant on soliton data is
/// measurably smaller than the rotation-first variant (8.9e-7 vs 1.27e-6 at
/// the reference run of the verification suite), which is what the shipped
/// oracle tolerance is calibrated to.
pub fn step_strang<T: Real>(
    u: &ComplexField1D<T>,
    dt: T,
    params: &NlsParams<T>,
) -> ComplexField1D<T> {
    step_strang_opts(u, dt, params, false, false, T::one())
}

/// `phase_sign` other than `+1` is a test hook that corrupts the dispersive
/// phase; it exists to show the verification suite catches a broken
/// integrator while mass conservation (which is structural) still holds.
pub(crate) fn step_strang_opts<T: Real>(
    u: &ComplexField1D<T>,
    dt: T,
    params: &NlsParams<T>,
    linear: bool,
    dealias: bool,
    phase_sign: T,
) -> ComplexField1D<T> {
    let grid = u.grid().clone();
    let half_dt = dt / T::lit(2.0);
    let mut samples = u.samples().to_vec();

    let linear_half = |samples: &mut Vec<Complex<T>>| {
        grid.fft_fwd.process(samples);
        let scale = T::one() / T::lit(grid.n() as f64);
        for (z, &k) in samples.iter_mut().zip(grid.wavenumbers()) {
            let phase = -phase_sign * k * k * half_dt;
            *z = (*z * Complex::from_polar(T::one(), phase)).scale(scale);
        }
        if dealias {
            apply_dealias_mask(&grid, samples);
        }
        grid.fft_inv.process(samples);
    };

    linear_half(&mut samples);
    if !linear {
        rotate_nonlinear(&mut samples, dt, params);
    }
    linear_half(&mut samples);
    ComplexField1D::from_samples_unchecked(grid, samples)
}

/// Exact solution of `u_t = -i sigma |u|^(p-1) u` over `tau` (modulus is
/// invariant, so the coefficient is frozen).
fn rotate_nonlinear<T: Real>(samples: &mut [Complex<T>], tau: T, params: &NlsParams<T>) {
    let sigma = params.sigma_scalar();
    for z in samples.iter_mut() {
        let angle = -sigma * params.amplitude_power(z.norm_sqr()) * tau;
        *z = *z * Complex::from_polar(T::one(), angle);
    }
}

/// One classical Runge-Kutta step on [`nls_rhs`]. The caller is responsible
/// for the `dt < 0.1*dx^2` stability guard (checked by [`SolverConfig`]).
pub fn step_rk4<T: Real>(
    u: &ComplexField1D<T>,
    dt: T,
    params: &NlsParams<T>,
) -> Result<ComplexField1D<T>> {
    step_rk4_opts(u, dt, params, false, false)
}

fn step_rk4_opts<T: Real>(
    u: &ComplexField1D<T>,
    dt: T,
    params: &NlsParams<T>,
    linear: bool,
    dealias: bool,
) -> Result<ComplexField1D<T>> {
    let half = Complex::new(dt / T::lit(2.0), T::zero());
    let full = Complex::new(dt, T::zero());
    let k1 = rhs_opts(u, params, linear, dealias)?;
    let k2 = rhs_opts(&u.add_scaled(&k1, half)?, params, linear, dealias)?;
    let k3 = rhs_opts(&u.add_scaled(&k2, half)?, params, linear, dealias)?;
    let k4 = rhs_opts(&u.add_scaled(&k3, full)?, params, linear, dealias)?;
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let samples = u
        .samples()
        .iter()
        .zip(k1.samples())
        .zip(k2.samples())
        .zip(k3.samples())
        .zip(k4.samples())
        .map(|((((&z, &a), &b), &c), &d)| z + (a + (b + c).scale(two) + d).scale(sixth))
        .collect();
    Ok(ComplexField1D::from_samples_unchecked(
        u.grid().clone(),
        samples,
    ))
}

/// March from `t = 0` to `t_end`, recording every `record_every` steps (the
/// initial and final states are always recorded). The number of steps is the
/// nearest integer to `t_end/dt`, so the final time is within `dt` of
/// `t_end`. Aborts with the last good time if any sample becomes non-finite.
pub fn evolve<T: Real>(
    u0: &ComplexField1D<T>,
    params: &NlsParams<T>,
    config: &SolverConfig<T>,
) -> Result<Trajectory<T>> {
    let grid = u0.grid().clone();
    config.validate(&grid)?;
    let steps_f = (config.t_end / config.dt).round();
    let n_steps = (steps_f.as_f64() as usize).max(1);

    let mut times = Vec::with_capacity(n_steps / config.record_every + 2);
    let mut states = Vec::with_capacity(n_steps / config.record_every + 2);
    times.push(T::zero());
    states.push(u0.clone());

    let mut u = u0.clone();
    for step in 1..=n_steps {
        u = match config.integrator {
            Integrator::Strang => {
                step_strang_opts(&u, config.dt, params, config.linear, config.dealias, T::one())
            }
            Integrator::Rk4 => {
                step_rk4_opts(&u, config.dt, params, config.linear, config.dealias)?
            }
        };
        if !u.is_finite() {
            return Err(Error::NonFiniteField {
                last_good_time: (T::lit((step - 1) as f64) * config.dt).as_f64(),
            });
        }
        if step % config.record_every == 0 || step == n_steps {
            times.push(T::lit(step as f64) * config.dt);
            states.push(u.clone());
        }
    }
    Ok(Trajectory {
        grid,
        params: *params,
        times,
        states,
    })
}

/// Plane wave `A exp(i(k x - w t))` with `k = (2*pi/L)*k_index` and the
/// dispersion relation `w = k^2 + sigma A^(p-1)`: an exact solution for any
/// amplitude, hence a roundoff-level oracle.
pub fn plane_wave<T: Real>(
    amplitude: T,
    k_index: i64,
    grid: &Grid1D<T>,
    params: &NlsParams<T>,
    t: T,
) -> Result<ComplexField1D<T>> {
    let half_n = (grid.n() / 2) as i64;
    if k_index.abs() > half_n - 1 {
        return Err(Error::UnresolvedWavenumber {
            k_index,
            n: grid.n(),
        });
    }
    let k = T::TAU() / grid.length() * T::lit(k_index as f64);
    let omega = k * k
        + params.sigma_scalar() * amplitude.powi((params.p() - 1) as i32);
    ComplexField1D::from_fn(grid.clone(), |x| {
        Complex::from_polar(amplitude, k * x - omega * t)
    })
}

/// Bright soliton `sqrt(2) a sech(a (x - x0)) exp(i a^2 t)`, the standing
/// exact solution of the focusing (`sigma = -1`) cubic equation. Requires
/// `a*L >= 30` so the periodic truncation error stays far below the solver
/// error floor; see [`soliton_tail_amplitude`] for the actual boundary value.
pub fn bright_soliton<T: Real>(
    a: T,
    x0: T,
    grid: &Grid1D<T>,
    t: T,
) -> Result<ComplexField1D<T>> {
    if !(a > T::zero()) || a * grid.length() < T::lit(30.0) {
        return Err(Error::BoundaryMargin {
            margin: soliton_tail_amplitude(a, grid).as_f64(),
            limit: 1e-10,
        });
    }
    let amp = T::lit(2.0).sqrt() * a;
    let phase = Complex::from_polar(T::one(), a * a * t);
    ComplexField1D::from_fn(grid.clone(), |x| {
        phase.scale(amp / (a * (x - x0)).cosh())
    })
}

/// `sech(a L / 2)`: the soliton amplitude at the box edge. Callers that care
/// about clean tails should warn when this exceeds 1e-10.
pub fn soliton_tail_amplitude<T: Real>(a: T, grid: &Grid1D<T>) -> T {
    T::one() / (a * grid.length() / T::lit(2.0)).cosh()
}

/// Gaussian packet `A exp(-(x-x0)^2 / (2 w^2)) exp(i k0 x)`.
///
/// Rejects widths below `4*dx` (unresolved) and packets whose amplitude one
/// box half-width away from the center exceeds 1e-12 (boundary margin).
pub fn gaussian_packet<T: Real>(
    amplitude: T,
    x0: T,
    k0: T,
    w: T,
    grid: &Grid1D<T>,
) -> Result<ComplexField1D<T>> {
    let min_w = T::lit(4.0) * grid.dx();
    if !(w >= min_w) {
        return Err(Error::UnderResolvedWidth {
            w: w.as_f64(),
            min: min_w.as_f64(),
        });
    }
    let half = grid.length() / T::lit(2.0);
    let gap = half - x0.abs();
    let margin = amplitude.abs() * (-(gap * gap) / (T::lit(2.0) * w * w)).exp();
    if !(margin < T::lit(1e-12)) {
        return Err(Error::BoundaryMargin {
            margin: margin.as_f64(),
            limit: 1e-12,
        });
    }
    ComplexField1D::from_fn(grid.clone(), |x| {
        let d = x - x0;
        let envelope = amplitude * (-(d * d) / (T::lit(2.0) * w * w)).exp();
        Complex::from_polar(envelope, k0 * x)
    })
}

/// Multiply by `exp(i v x / 2)`: sets the datum moving with velocity `v`.
pub fn galilean_boost<T: Real>(u: &ComplexField1D<T>, v: T) -> ComplexField1D<T> {
    let grid = u.grid().clone();
    let samples = u
        .samples()
        .iter()
        .zip(grid.nodes())
        .map(|(&z, &x)| z * Complex::from_polar(T::one(), v * x / T::lit(2.0)))
        .collect();
    ComplexField1D::from_samples_unchecked(grid, samples)
}

/// Band-limited random field: modes `1..=band` (both signs) with Gaussian
/// coefficients drawn from `rng`, scaled to the requested amplitude. Smooth
/// by construction, useful as generic test data.
pub fn random_bandlimited<T: Real>(
    grid: &Grid1D<T>,
    band: usize,
    amplitude: T,
    rng: &mut impl rand::Rng,
) -> ComplexField1D<T> {
    let n = grid.n();
    let band = band.min(n / 2 - 1).max(1);
    let mut spectrum = vec![Complex::new(T::zero(), T::zero()); n];
    // draw in f64 so the stream is identical for every scalar type
    let mut draw = || T::lit(rng.random_range(-1.0f64..1.0));
    for j in 1..=band {
        spectrum[j] = Complex::new(draw(), draw());
        spectrum[n - j] = Complex::new(draw(), draw());
    }
    spectrum[0] = Complex::new(draw(), draw());
    let field = inverse_dft(grid, &spectrum).expect("spectrum length matches grid");
    let peak = field
        .samples()
        .iter()
        .map(|z| z.norm())
        .fold(T::zero(), T::max)
        .max(T::lit(1e-30));
    let samples = field
        .samples()
        .iter()
        .map(|z| z.scale(amplitude / peak))
        .collect();
    ComplexField1D::from_samples_unchecked(grid.clone(), samples)
}
