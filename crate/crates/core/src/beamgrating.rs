//! Beam and grating geometry, the initial transverse state and its momentum amplitude.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::special::{integrate_panels, sici_shifted};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Half the number of intervals of the default momentum grid.
pub const DEFAULT_K_HALF: usize = 1 << 13;

/// Monochromatic beam moving along `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleBeam {
    pub mass: f64,
    pub speed: f64,
    pub wavenumber: f64,
    pub wavelength: f64,
    pub omega: f64,
    pub norm_b: f64,
}

impl ParticleBeam {
    pub fn from_wavenumber(mass: f64, wavenumber: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid(format!("mass must be positive, got {mass}")));
        }
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return Err(invalid(format!("wavenumber must be positive, got {wavenumber}")));
        }
        Ok(Self {
            mass,
            speed: HBAR * wavenumber / mass,
            wavenumber,
            wavelength: TAU / wavenumber,
            omega: HBAR * wavenumber * wavenumber / (2.0 * mass),
            norm_b: 1.0,
        })
    }

    pub fn from_wavelength(mass: f64, wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
        }
        Self::from_wavenumber(mass, TAU / wavelength)
    }

    pub fn from_speed(mass: f64, speed: f64) -> Result<Self> {
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(invalid(format!("speed must be positive, got {speed}")));
        }
        Self::from_wavenumber(mass, mass * speed / HBAR)
    }

    /// Checks a separately stated speed against `hbar k / m`.
    pub fn check_speed(&self, stated: f64, rel_tol: f64) -> Result<()> {
        let rel = (stated - self.speed).abs() / self.speed;
        if rel > rel_tol {
            return Err(invalid(format!(
                "stated speed {stated} m/s disagrees with hbar*k/m = {} m/s (relative {rel:.2e} > {rel_tol:.1e})",
                self.speed
            )));
        }
        Ok(())
    }

    /// Relative mismatch of `hbar k` and `m v`.
    pub fn momentum_mismatch(&self) -> f64 {
        (HBAR * self.wavenumber - self.mass * self.speed).abs() / (HBAR * self.wavenumber)
    }

    /// Time of flight to distance `y` behind the grating.
    pub fn time_at(&self, y: f64) -> f64 {
        y / self.speed
    }

    pub fn distance_at(&self, t: f64) -> f64 {
        self.speed * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Square,
    /// `exp(-(x - x_c)^2 / a^2)` around every slit center.
    Gaussian { a: f64 },
}

/// `n` equal slits of width `delta` and period `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingSpec {
    pub n: usize,
    pub d: f64,
    pub delta: f64,
    pub window: Window,
    /// Symmetric about `x = 0`; otherwise the first slit starts at `x = 0`.
    pub centered: bool,
}

impl GratingSpec {
    pub fn new(n: usize, d: f64, delta: f64, window: Window) -> Result<Self> {
        if n == 0 {
            return Err(invalid("slit count must be at least 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid(format!("slit width must be positive, got {delta}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(invalid(format!("period must be positive, got {d}")));
        }
        if n > 1 && delta >= d {
            return Err(invalid(format!("slit width {delta} must be smaller than the period {d}")));
        }
        if let Window::Gaussian { a } = window {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid(format!("Gaussian width must be positive, got {a}")));
            }
        }
        Ok(Self { n, d, delta, window, centered: true })
    }

    pub fn square(n: usize, d: f64, delta: f64) -> Result<Self> {
        Self::new(n, d, delta, Window::Square)
    }

    pub fn gaussian(n: usize, d: f64, delta: f64, a: f64) -> Result<Self> {
        Self::new(n, d, delta, Window::Gaussian { a })
    }

    pub fn uncentered(mut self) -> Self {
        self.centered = false;
        self
    }

    pub fn center(&self, j: usize) -> f64 {
        if self.centered {
            (j as f64 - 0.5 * (self.n as f64 - 1.0)) * self.d
        } else {
            j as f64 * self.d + 0.5 * self.delta
        }
    }

    /// Left and right edge of slit `j`.
    pub fn edges(&self, j: usize) -> (f64, f64) {
        let c = self.center(j);
        (c - 0.5 * self.delta, c + 0.5 * self.delta)
    }

    /// Outer edges of the first and last slit.
    pub fn aperture(&self) -> (f64, f64) {
        (self.edges(0).0, self.edges(self.n - 1).1)
    }

    /// Interval outside which `psi(x, 0)` is negligible (exactly zero for square windows).
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.aperture();
        match self.window {
            Window::Square => (lo, hi),
            Window::Gaussian { a } => {
                let pad = 9.0 * a;
                (lo.min(self.center(0) - pad), hi.max(self.center(self.n - 1) + pad))
            }
        }
    }

    /// Slit index whose opening contains `x`.
    pub fn slit_of(&self, x: f64) -> Option<usize> {
        (0..self.n).find(|&j| {
            let (l, r) = self.edges(j);
            x >= l && x <= r
        })
    }

    /// Amplitude of each Gaussian so that the summed window has unit mass.
    pub fn gaussian_norm(&self) -> Option<f64> {
        let Window::Gaussian { a } = self.window else {
            return None;
        };
        let mut s = self.n as f64;
        for m in 1..self.n {
            let dx = m as f64 * self.d;
            s += 2.0 * (self.n - m) as f64 * (-dx * dx / (2.0 * a * a)).exp();
        }
        Some(1.0 / ((PI / 2.0).sqrt() * a * s).sqrt())
    }

    /// Share of the total mass carried by overlaps of distinct Gaussian windows.
    pub fn gaussian_cross_mass(&self) -> f64 {
        let Window::Gaussian { a } = self.window else {
            return 0.0;
        };
        let mut cross = 0.0;
        for m in 1..self.n {
            let dx = m as f64 * self.d;
            cross += 2.0 * (self.n - m) as f64 * (-dx * dx / (2.0 * a * a)).exp();
        }
        cross / (self.n as f64 + cross)
    }

    /// Exact `psi(x, 0)`.
    pub fn psi0(&self, x: f64) -> f64 {
        match self.window {
            Window::Square => {
                if self.slit_of(x).is_some() {
                    1.0 / (self.n as f64 * self.delta).sqrt()
                } else {
                    0.0
                }
            }
            Window::Gaussian { a } => {
                let norm = self.gaussian_norm().unwrap_or(0.0);
                (0..self.n)
                    .map(|j| {
                        let u = (x - self.center(j)) / a;
                        (-u * u).exp()
                    })
                    .sum::<f64>()
                    * norm
            }
        }
    }
}

/// Sampled `psi(x, 0)` with any non-fatal diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialWavefunction {
    pub values: Vec<C64>,
    pub warnings: Vec<String>,
}

pub(crate) fn uniform_spacing(grid: &[f64], what: &str) -> Result<f64> {
    if grid.len() < 2 {
        return Err(invalid(format!("{what} needs at least two points")));
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(invalid(format!("{what} must be increasing")));
    }
    for (i, w) in grid.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-6 * h {
            return Err(invalid(format!("{what} is not uniform at index {i}")));
        }
    }
    Ok(h)
}

/// Samples `psi(x, 0)` on a uniform grid.
///
/// Square windows are sampled by cell overlap, `|psi_j|^2 dx = overlap_j / (n delta)`,
/// so interior nodes carry exactly `1/sqrt(n delta)` and the discrete norm is exact.
/// Gaussian windows are point-sampled and renormalised on the grid.
pub fn build_initial_wavefunction(grating: &GratingSpec, x_grid: &[f64]) -> Result<InitialWavefunction> {
    let dx = uniform_spacing(x_grid, "x grid")?;
    let per_slit = grating.delta / dx;
    if per_slit < 16.0 - 1e-9 {
        return Err(Error::Resolution(format!(
            "{per_slit:.2} samples per slit, at least 16 required"
        )));
    }
    let (lo, hi) = grating.aperture();
    if x_grid[0] - 0.5 * dx > lo || x_grid[x_grid.len() - 1] + 0.5 * dx < hi {
        return Err(invalid("x grid does not span all openings"));
    }
    let mut warnings = Vec::new();
    let values = match grating.window {
        Window::Square => {
            let amp2 = 1.0 / (grating.n as f64 * grating.delta);
            x_grid
                .iter()
                .map(|&x| {
                    let (a, b) = (x - 0.5 * dx, x + 0.5 * dx);
                    let overlap: f64 = (0..grating.n)
                        .map(|j| {
                            let (l, r) = grating.edges(j);
                            (b.min(r) - a.max(l)).max(0.0)
                        })
                        .sum();
                    C64::new((amp2 * overlap / dx).sqrt(), 0.0)
                })
                .collect::<Vec<_>>()
        }
        Window::Gaussian { .. } => {
            let cross = grating.gaussian_cross_mass();
            if cross > 1e-6 {
                warnings.push(format!("Gaussian windows overlap: cross mass {cross:.3e}"));
            }
            let raw: Vec<f64> = x_grid.iter().map(|&x| grating.psi0(x)).collect();
            let mass: f64 = raw.iter().map(|v| v * v).sum::<f64>() * dx;
            if !(mass > 0.0) {
                return Err(Error::Resolution("Gaussian window not resolved on the grid".into()));
            }
            let s = 1.0 / mass.sqrt();
            raw.into_iter().map(|v| C64::new(v * s, 0.0)).collect()
        }
    };
    Ok(InitialWavefunction { values, warnings })
}

/// Grating factor `sin(n theta/2) / sin(theta/2)`, with its limits `(+-)n` at principal orders.
pub fn grating_factor(n: usize, theta: f64) -> f64 {
    let phi = 0.5 * theta;
    let m = (phi / PI).round();
    let eps = phi - m * PI;
    let sign = if (m as i64 * (n as i64 - 1)).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let s = eps.sin();
    let nf = n as f64;
    if s.abs() < 1e-12 {
        sign * nf * (1.0 - (nf * nf - 1.0) * eps * eps / 6.0)
    } else {
        sign * (nf * eps).sin() / s
    }
}

/// Closed-form momentum amplitude of a centered grating.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumModel {
    Square {
        n: usize,
        d: f64,
        delta: f64,
        /// `(omega, a_omega)` of `sin^2(k delta/2) F_n^2(k d) = sum a_omega cos(omega k)`.
        terms: Vec<(f64, f64)>,
    },
    Gaussian { n: usize, d: f64, a: f64, norm: f64 },
}

impl SpectrumModel {
    pub fn from_grating(g: &GratingSpec) -> Result<Self> {
        if !g.centered {
            return Err(Error::Unsupported(
                "closed-form spectrum requires a grating centered on x = 0".into(),
            ));
        }
        Ok(match g.window {
            Window::Square => {
                let n = g.n;
                let nf = n as f64;
                let mut terms = vec![(g.delta, -0.5 * nf)];
                for j in 1..n {
                    let w = (n - j) as f64;
                    let jd = j as f64 * g.d;
                    terms.push((jd, w));
                    terms.push((jd + g.delta, -0.5 * w));
                    terms.push((jd - g.delta, -0.5 * w));
                }
                SpectrumModel::Square { n, d: g.d, delta: g.delta, terms }
            }
            Window::Gaussian { a } => SpectrumModel::Gaussian {
                n: g.n,
                d: g.d,
                a,
                norm: g.gaussian_norm().unwrap_or(0.0),
            },
        })
    }

    /// `c(k)`, real for a centered grating.
    pub fn amplitude(&self, k: f64) -> f64 {
        match *self {
            SpectrumModel::Square { n, d, delta, .. } => {
                let env = if (k * delta).abs() < 1e-8 {
                    let h = 0.5 * delta;
                    h * (1.0 - (k * h).powi(2) / 6.0)
                } else {
                    (0.5 * k * delta).sin() / k
                };
                (2.0 / (PI * n as f64 * delta)).sqrt() * env * grating_factor(n, k * d)
            }
            SpectrumModel::Gaussian { n, d, a, norm } => {
                norm * a / 2f64.sqrt() * (-0.25 * k * k * a * a).exp() * grating_factor(n, k * d)
            }
        }
    }

    pub fn density(&self, k: f64) -> f64 {
        self.amplitude(k).powi(2)
    }

    /// `int_K^inf |c|^2 dk` for `K >= 0`.
    pub fn upper_tail(&self, k: f64) -> f64 {
        let k = k.abs();
        match self {
            SpectrumModel::Square { n, d, delta, terms } => {
                // the closed form cancels like 1/K near the origin
                let near = 2.0 * PI / (*n as f64 * d);
                if k < near {
                    return 0.5 - integrate_panels(0.0, k, 4, |q| self.density(q));
                }
                let nc = 2.0 / (PI * *n as f64 * delta);
                let a0 = 0.5 * *n as f64;
                let mut s = a0 / k;
                for &(w, a) in terms {
                    let (si, _) = sici_shifted(w * k);
                    s += a * ((w * k).cos() / k + w * si);
                }
                (nc * s).max(0.0)
            }
            SpectrumModel::Gaussian { n, d, a, .. } => {
                let hi = k.max(14.0 / a);
                if k >= hi {
                    return 0.0;
                }
                let panels = (((hi - k) * (*n as f64 * d + 2.0 * a)) / 0.5).ceil().max(4.0) as usize;
                integrate_panels(k, hi, panels, |q| self.density(q))
            }
        }
    }

    /// `int_{-inf}^k |c|^2 dk`.
    pub fn cdf(&self, k: f64) -> f64 {
        match self {
            SpectrumModel::Square { .. } => {
                if k >= 0.0 {
                    1.0 - self.upper_tail(k)
                } else {
                    self.upper_tail(-k)
                }
            }
            SpectrumModel::Gaussian { n, d, a, .. } => {
                let hi = k.abs().min(14.0 / a);
                let panels = ((hi * (*n as f64 * d + 2.0 * a)) / 0.5).ceil().max(4.0) as usize;
                let inner = if hi > 0.0 { integrate_panels(0.0, hi, panels, |q| self.density(q)) } else { 0.0 };
                if k >= 0.0 {
                    0.5 + inner
                } else {
                    0.5 - inner
                }
            }
        }
    }
}

/// Sampled momentum amplitude `c(k)` on a symmetric uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSpectrum {
    pub k_grid: Vec<f64>,
    pub c_values: Vec<C64>,
    pub k_max: f64,
    pub dk: f64,
    pub analytic: bool,
    /// Mass outside the grid cells `|k| > k_max + dk/2`.
    pub tail_mass: f64,
    pub model: Option<SpectrumModel>,
    cumulative: Vec<f64>,
}

impl MomentumSpectrum {
    fn assemble(k_grid: Vec<f64>, c_values: Vec<C64>, dk: f64, tail_mass: f64, model: Option<SpectrumModel>) -> Self {
        let mut cumulative = Vec::with_capacity(k_grid.len() + 1);
        let mut acc = 0.5 * tail_mass;
        cumulative.push(acc);
        for c in &c_values {
            acc += c.norm_sqr() * dk;
            cumulative.push(acc);
        }
        Self {
            k_max: k_grid[k_grid.len() - 1],
            analytic: model.is_some(),
            k_grid,
            c_values,
            dk,
            tail_mass,
            model,
            cumulative,
        }
    }

    /// `c(k)`: the closed form when available, otherwise linear interpolation on the grid.
    pub fn amplitude(&self, k: f64) -> C64 {
        if let Some(m) = &self.model {
            return C64::new(m.amplitude(k), 0.0);
        }
        let s = (k - self.k_grid[0]) / self.dk;
        if s < 0.0 || s > (self.k_grid.len() - 1) as f64 {
            return C64::new(0.0, 0.0);
        }
        let i = (s.floor() as usize).min(self.k_grid.len() - 2);
        let f = s - i as f64;
        self.c_values[i] * (1.0 - f) + self.c_values[i + 1] * f
    }

    pub fn density(&self, k: f64) -> f64 {
        self.amplitude(k).norm_sqr()
    }

    /// Discrete Parseval mass `sum |c_i|^2 dk`.
    pub fn grid_mass(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1] - self.cumulative[0]
    }

    /// Grid mass plus the mass outside the grid.
    pub fn total_mass(&self) -> f64 {
        self.grid_mass() + self.tail_mass
    }

    /// `int_{-inf}^k |c|^2`: exact for closed-form spectra, otherwise the cell cumulative
    /// interpolated linearly.
    pub fn cdf(&self, k: f64) -> f64 {
        if let Some(m) = &self.model {
            return m.cdf(k);
        }
        let s = (k - (self.k_grid[0] - 0.5 * self.dk)) / self.dk;
        let last = self.cumulative.len() - 1;
        if s <= 0.0 {
            return self.cumulative[0];
        }
        if s >= last as f64 {
            return self.cumulative[last] + 0.5 * self.tail_mass;
        }
        let i = s.floor() as usize;
        let f = s - i as f64;
        self.cumulative[i] * (1.0 - f) + self.cumulative[i + 1] * f
    }

    pub fn mass_between(&self, k1: f64, k2: f64) -> f64 {
        match &self.model {
            Some(m @ SpectrumModel::Square { .. }) if k1 >= 0.0 => m.upper_tail(k1) - m.upper_tail(k2),
            Some(m @ SpectrumModel::Square { .. }) if k2 <= 0.0 => m.upper_tail(-k2) - m.upper_tail(-k1),
            _ => self.cdf(k2) - self.cdf(k1),
        }
    }
}

/// `2 half + 1` points `j dk`, `j = -half..=half`.
pub fn symmetric_k_grid(half: usize, dk: f64) -> Vec<f64> {
    (0..=2 * half).map(|i| (i as f64 - half as f64) * dk).collect()
}

/// Default momentum grid: spacing fine enough that the grid sum of `|c|^2` is exact
/// up to the tail beyond the grid.
pub fn default_k_grid(grating: &GratingSpec) -> Vec<f64> {
    let width = match grating.window {
        Window::Square => grating.n as f64 * grating.d,
        Window::Gaussian { a } => (grating.n as f64 - 1.0) * grating.d + 12.0 * a,
    };
    symmetric_k_grid(DEFAULT_K_HALF, PI / width)
}

fn check_symmetric(k_grid: &[f64]) -> Result<f64> {
    let dk = uniform_spacing(k_grid, "k grid")?;
    let n = k_grid.len();
    for i in 0..n / 2 {
        if (k_grid[i] + k_grid[n - 1 - i]).abs() > 1e-9 * dk {
            return Err(invalid("k grid is not symmetric about 0"));
        }
    }
    Ok(dk)
}

/// `c(k)` from the closed form on a symmetric uniform grid.
pub fn spectrum_analytic(grating: &GratingSpec, k_grid: &[f64]) -> Result<MomentumSpectrum> {
    let model = SpectrumModel::from_grating(grating)?;
    let dk = check_symmetric(k_grid)?;
    let c_values = k_grid.iter().map(|&k| C64::new(model.amplitude(k), 0.0)).collect();
    let k_max = k_grid[k_grid.len() - 1];
    let tail = 2.0 * model.upper_tail(k_max + 0.5 * dk);
    Ok(MomentumSpectrum::assemble(k_grid.to_vec(), c_values, dk, tail, Some(model)))
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-6 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// `c(k)` of sampled data by FFT.
///
/// The samples are read as a piecewise-constant function on cells centered at the
/// grid points, whose transform is evaluated exactly on the FFT frequencies.
pub fn spectrum_numeric(psi0: &[C64], x_grid: &[f64]) -> Result<MomentumSpectrum> {
    spectrum_numeric_padded(psi0, x_grid, (2 * x_grid.len()).next_power_of_two())
}

/// As [`spectrum_numeric`] with an explicit transform length (at least twice the sample count).
pub fn spectrum_numeric_padded(psi0: &[C64], x_grid: &[f64], n_fft: usize) -> Result<MomentumSpectrum> {
    if psi0.len() != x_grid.len() {
        return Err(invalid("psi0 and x grid lengths differ"));
    }
    let dx = uniform_spacing(x_grid, "x grid")?;
    if n_fft < 2 * x_grid.len() || n_fft % 2 != 0 {
        return Err(invalid("transform length must be even and at least twice the sample count"));
    }
    let mut buf = vec![C64::new(0.0, 0.0); n_fft];
    buf[..psi0.len()].copy_from_slice(psi0);
    let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_forward(n_fft);
    fft.process(&mut buf);

    let dk = TAU / (n_fft as f64 * dx);
    let half = n_fft / 2 - 1;
    let x0 = x_grid[0];
    let scale = dx / TAU.sqrt();
    let mut k_grid = Vec::with_capacity(2 * half + 1);
    let mut c_values = Vec::with_capacity(2 * half + 1);
    for j in -(half as i64)..=(half as i64) {
        let k = j as f64 * dk;
        let x = buf[j.rem_euclid(n_fft as i64) as usize];
        let phase = C64::from_polar(1.0, -k * x0);
        k_grid.push(k);
        c_values.push(x * phase * scale * sinc(0.5 * k * dx));
    }
    let edge_mass: f64 = c_values[..2]
        .iter()
        .chain(&c_values[c_values.len() - 2..])
        .map(|c| c.norm_sqr() * dk)
        .sum();
    if edge_mass > 1e-6 {
        return Err(Error::Resolution(format!(
            "spectrum mass {edge_mass:.3e} within two bins of k_max (aliasing)"
        )));
    }
    let norm: f64 = psi0.iter().map(|p| p.norm_sqr()).sum::<f64>() * dx;
    let grid: f64 = c_values.iter().map(|c| c.norm_sqr()).sum::<f64>() * dk;
    Ok(MomentumSpectrum::assemble(k_grid, c_values, dk, (norm - grid).max(0.0), None))
}

/// Talbot length `d^2 / lambda`.
pub fn talbot_length(grating: &GratingSpec, beam: &ParticleBeam) -> f64 {
    grating.d * grating.d / beam.wavelength
}
