//! The transverse wave function behind the grating.
//!
//! For closed-form spectra the momentum integral is done exactly over the whole
//! `k` line: square windows give sums of Fresnel integrals (one per slit edge),
//! Gaussian windows give spreading Gaussians. Sampled spectra fall back to a
//! quadrature on the stored grid.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::beamgrating::{GratingSpec, MomentumSpectrum, ParticleBeam, SpectrumModel, Window, HBAR};
use crate::error::{invalid, Error, Result};
use crate::special::{chirp, fresnel_aux_many, gl16, integrate_panels, oscillatory_tail, HALF_ONE_PLUS_I};

/// Number of Fresnel units beyond the outer edges covered by quadrature in [`WaveField::norm`].
const NORM_WINDOW_FRESNEL: f64 = 400.0;
const MAX_FRESNEL_PANELS: usize = 1 << 22;
const EDGE_BLOCK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Edges,
    Gaussians,
    Grid,
}

/// Evaluator of `psi(x, t)` for one grating, beam and spectrum.
#[derive(Debug, Clone)]
pub struct WaveField {
    pub spectrum: MomentumSpectrum,
    pub beam: ParticleBeam,
    pub grating: GratingSpec,
    source: Source,
    /// `(x_e, s_e)` for every slit edge, `s = +1` on right and `-1` on left edges.
    edges: Vec<(f64, f64)>,
}

impl WaveField {
    pub fn new(grating: GratingSpec, beam: ParticleBeam, spectrum: MomentumSpectrum) -> Result<Self> {
        let source = match &spectrum.model {
            Some(m) => {
                if *m != SpectrumModel::from_grating(&grating)? {
                    return Err(invalid("closed-form spectrum does not belong to this grating"));
                }
                match grating.window {
                    Window::Square => Source::Edges,
                    Window::Gaussian { .. } => Source::Gaussians,
                }
            }
            None => Source::Grid,
        };
        let mut edges = Vec::with_capacity(2 * grating.n);
        for j in 0..grating.n {
            let (l, r) = grating.edges(j);
            edges.push((l, -1.0));
            edges.push((r, 1.0));
        }
        Ok(Self { spectrum, beam, grating, source, edges })
    }

    /// True when `psi` is evaluated in closed form rather than from the sampled grid.
    pub fn is_exact(&self) -> bool {
        self.source != Source::Grid
    }

    pub fn t_of_y(&self, y: f64) -> f64 {
        self.beam.time_at(y)
    }

    pub fn y_of_t(&self, t: f64) -> f64 {
        self.beam.distance_at(t)
    }

    /// `m / (hbar t)`, the scale mapping positions to wavenumbers in the far field.
    pub fn k_per_x(&self, t: f64) -> f64 {
        self.beam.mass / (HBAR * t)
    }

    /// Largest `x'^2 m / (2 hbar t)` over the openings.
    pub fn fraunhofer_number(&self, t: f64) -> f64 {
        let (lo, hi) = self.grating.support();
        let x = lo.abs().max(hi.abs());
        x * x * self.k_per_x(t) / 2.0
    }

    /// Half-width of the window on which grid synthesis is free of aliasing.
    pub fn alias_half_width(&self) -> f64 {
        PI / self.spectrum.dk
    }

    /// Precomputes everything that depends on `t` alone.
    pub fn at(&self, t: f64) -> Result<Snapshot<'_>> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be non-negative, got {t}")));
        }
        let kind = if t == 0.0 {
            Kind::Initial
        } else {
            match self.source {
                Source::Edges => {
                    let beta = (self.k_per_x(t) / PI).sqrt();
                    let amp = 1.0 / (self.grating.n as f64 * self.grating.delta).sqrt();
                    let c0 = C64::from_polar(amp / SQRT_2, -FRAC_PI_4);
                    let step2 = C64::from_polar(1.0, PI * beta * beta * self.grating.d * self.grating.d);
                    let shift = C64::from_polar(1.0, PI * beta * beta * self.grating.d * self.grating.delta);
                    Kind::Edges { beta, c0, step2, shift }
                }
                Source::Gaussians => {
                    let Window::Gaussian { a } = self.grating.window else { unreachable!() };
                    let tau = 2.0 * HBAR * t / (self.beam.mass * a * a);
                    let s = C64::new(1.0, tau);
                    let norm = self.grating.gaussian_norm().unwrap_or(0.0);
                    Kind::Gaussians { inv_width2: (s * a * a).inv(), pref: s.sqrt().inv() * norm }
                }
                Source::Grid => Kind::Grid { weights: self.grid_weights(t) },
            }
        };
        Ok(Snapshot { field: self, t, kind })
    }

    fn grid_weights(&self, t: f64) -> Vec<C64> {
        let w = self.spectrum.dk / TAU.sqrt();
        let g = HBAR * t / (2.0 * self.beam.mass);
        self.spectrum
            .k_grid
            .iter()
            .zip(&self.spectrum.c_values)
            .map(|(&k, &c)| c * C64::from_polar(w, -g * k * k))
            .collect()
    }

    /// `psi(x, t)` from the momentum representation.
    pub fn psi_spectral(&self, x: f64, t: f64) -> Result<C64> {
        let s = self.at(t)?;
        s.check_x(x)?;
        Ok(s.psi(x))
    }

    /// `(psi, d psi / dx)` from the momentum representation.
    pub fn psi_and_dx(&self, x: f64, t: f64) -> Result<(C64, C64)> {
        let s = self.at(t)?;
        s.check_x(x)?;
        Ok(s.psi_and_dx(x))
    }

    /// Quadrature of the momentum integral over the stored grid only.
    pub fn psi_grid(&self, x: f64, t: f64) -> Result<C64> {
        if x.abs() > self.alias_half_width() {
            return Err(Error::Domain(format!(
                "x = {x:e} outside the alias-free window of half-width {:e}",
                self.alias_half_width()
            )));
        }
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be non-negative, got {t}")));
        }
        Ok(grid_sum(&self.grid_weights(t), &self.spectrum.k_grid, self.spectrum.dk, x).0)
    }

    /// Direct quadrature of the Fresnel kernel against `psi(x', 0)`, with panels short
    /// enough that the kernel phase changes by less than `pi/8` across each.
    pub fn psi_fresnel(&self, x: f64, t: f64) -> Result<C64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("Fresnel propagator needs t > 0, got {t}")));
        }
        let q = self.k_per_x(t);
        let pref = C64::from_polar((q / TAU).sqrt(), -FRAC_PI_4);
        let kernel = |xp: f64| {
            let u = x - xp;
            C64::from_polar(1.0, 0.5 * q * u * u)
        };
        let pieces: Vec<(f64, f64)> = match self.grating.window {
            Window::Square => (0..self.grating.n).map(|j| self.grating.edges(j)).collect(),
            Window::Gaussian { .. } => vec![self.grating.support()],
        };
        let mut total = C64::new(0.0, 0.0);
        for (l, r) in pieces {
            let slope = q * (x - l).abs().max((x - r).abs());
            let wanted = ((r - l) * slope / (PI / 8.0)).ceil().max(1.0);
            let panels = wanted.min(MAX_FRESNEL_PANELS as f64) as usize;
            let f = |xp: f64| kernel(xp) * self.grating.psi0(xp);
            let full = integrate_complex(l, r, panels, f);
            if wanted > MAX_FRESNEL_PANELS as f64 {
                let half = integrate_complex(l, r, panels / 2, f);
                return Err(Error::Quadrature { residual: (full - half).norm() * pref.norm() });
            }
            total += full;
        }
        Ok(pref * total)
    }

    /// Far-field form `sqrt(m/hbar t) e^{-i pi/4} e^{i x^2 m/2 hbar t} c(x m/hbar t)`.
    pub fn psi_farfield(&self, x: f64, t: f64) -> Result<C64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("far-field form needs t > 0, got {t}")));
        }
        let q = self.k_per_x(t);
        let c = self.spectrum.amplitude(q * x);
        Ok(C64::from_polar(q.sqrt(), -FRAC_PI_4 + 0.5 * q * x * x) * c)
    }

    /// `int |psi(x, t)|^2 dx`, by quadrature over a window plus, for square windows,
    /// the exact integral of the leading asymptotic form outside it.
    pub fn norm(&self, t: f64) -> Result<f64> {
        let snap = self.at(t)?;
        let (lo, hi) = self.grating.support();
        let width = hi - lo;
        match &snap.kind {
            Kind::Initial => {
                let pieces: Vec<(f64, f64)> = match self.grating.window {
                    Window::Square => (0..self.grating.n).map(|j| self.grating.edges(j)).collect(),
                    Window::Gaussian { .. } => vec![(lo, hi)],
                };
                Ok(pieces
                    .into_iter()
                    .map(|(l, r)| integrate_panels(l, r, 64, |x| self.grating.psi0(x).powi(2)))
                    .sum())
            }
            Kind::Edges { beta, .. } => {
                let pad = NORM_WINDOW_FRESNEL / beta;
                let h = (0.25 / beta).min(1.0 / (8.0 * beta * beta * width));
                let (a, b) = (lo - pad, hi + pad);
                let inner = parallel_density_integral(&snap, a, b, h);
                let right = self.edge_tail(*beta, b, 1.0);
                let left = self.edge_tail(*beta, -a, -1.0);
                Ok(inner + right + left)
            }
            Kind::Gaussians { inv_width2, .. } => {
                let Window::Gaussian { a } = self.grating.window else { unreachable!() };
                let spread = (1.0 / inv_width2.re).sqrt();
                let (a0, b0) = (lo.min(-9.0 * spread + lo), hi.max(9.0 * spread + hi));
                let freq = 2.0 * width * inv_width2.im.abs();
                let h = (0.25 * spread.min(a)).min(PI / 8.0 / freq.max(1e-300));
                Ok(parallel_density_integral(&snap, a0, b0, h))
            }
            Kind::Grid { .. } => {
                let half = self.alias_half_width();
                let n = self.spectrum.k_grid.len();
                let h = 2.0 * half / n as f64;
                let sum: f64 = (0..n)
                    .into_par_iter()
                    .map(|i| snap.psi(-half + (i as f64 + 0.5) * h).norm_sqr())
                    .sum();
                Ok(sum * h)
            }
        }
    }

    /// `int_R^inf |psi|^2 dx` (`side = 1`) or `int_{-inf}^{-R} |psi|^2 dx` (`side = -1`)
    /// from `G(z) ~ i / (pi z)`.
    fn edge_tail(&self, beta: f64, r: f64, side: f64) -> f64 {
        let c0sq = 0.5 / (self.grating.n as f64 * self.grating.delta);
        let pts: Vec<(f64, f64)> = self.edges.iter().map(|&(x, s)| (side * x, s)).collect();
        let mut total = 0.0;
        for (i, &(xa, sa)) in pts.iter().enumerate() {
            total += 1.0 / (r - xa);
            for &(xb, sb) in &pts[i + 1..] {
                let kappa = PI * beta * beta * (xb - xa);
                let mid = 0.5 * (xa + xb);
                let e = |xe: f64| {
                    let t = oscillatory_tail(kappa.abs() * (r - xe));
                    let t = if kappa < 0.0 { t.conj() } else { t };
                    C64::from_polar(1.0, kappa * (xe - mid)) * t
                };
                let cross = (e(xa) - e(xb)) / (xa - xb);
                total += 2.0 * sa * sb * cross.re;
            }
        }
        c0sq / (PI * PI * beta * beta) * total
    }
}

#[inline]
fn sign(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn integrate_complex<F: Fn(f64) -> C64>(a: f64, b: f64, panels: usize, f: F) -> C64 {
    let (nodes, weights) = gl16();
    let h = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (z, w) in nodes.iter().zip(weights) {
            acc += f(mid + 0.5 * h * z) * *w;
        }
    }
    acc * (0.5 * h)
}

fn parallel_density_integral(snap: &Snapshot<'_>, a: f64, b: f64, h: f64) -> f64 {
    let panels = ((b - a) / h).ceil() as usize;
    let chunk = 256;
    let width = (b - a) / panels as f64;
    (0..panels.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let p0 = c * chunk;
            let p1 = (p0 + chunk).min(panels);
            let lo = a + p0 as f64 * width;
            let hi = a + p1 as f64 * width;
            integrate_panels(lo, hi, p1 - p0, |x| snap.psi(x).norm_sqr())
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

fn grid_sum(weights: &[C64], k_grid: &[f64], dk: f64, x: f64) -> (C64, C64) {
    let (psi, dpsi, _) = grid_sum2(weights, k_grid, dk, x);
    (psi, dpsi)
}

fn grid_sum2(weights: &[C64], k_grid: &[f64], dk: f64, x: f64) -> (C64, C64, C64) {
    let step = C64::from_polar(1.0, dk * x);
    let mut e = C64::from_polar(1.0, k_grid[0] * x);
    let mut psi = C64::new(0.0, 0.0);
    let mut dpsi = C64::new(0.0, 0.0);
    let mut d2psi = C64::new(0.0, 0.0);
    for (i, w) in weights.iter().enumerate() {
        if i % 64 == 0 {
            e = C64::from_polar(1.0, k_grid[i] * x);
        }
        let term = w * e;
        let k = k_grid[i];
        psi += term;
        dpsi += term * C64::new(0.0, k);
        d2psi -= term * (k * k);
        e *= step;
    }
    (psi, dpsi, d2psi)
}

#[derive(Debug, Clone)]
enum Kind {
    Initial,
    Edges { beta: f64, c0: C64, step2: C64, shift: C64 },
    Gaussians { inv_width2: C64, pref: C64 },
    Grid { weights: Vec<C64> },
}

/// The field at one fixed time.
#[derive(Debug, Clone)]
pub struct Snapshot<'a> {
    field: &'a WaveField,
    pub t: f64,
    kind: Kind,
}

impl Snapshot<'_> {
    fn check_x(&self, x: f64) -> Result<()> {
        if matches!(self.kind, Kind::Grid { .. }) && x.abs() > self.field.alias_half_width() {
            return Err(Error::Domain(format!("x = {x:e} outside the alias-free window")));
        }
        Ok(())
    }

    /// `(sum s_e sgn(u_e) G(|u_e|) e^{i pi u_e^2/2}, sum s_e sgn(u_e), sum s_e e^{i pi u_e^2/2})`
    /// over all slit edges, `u_e = beta (x_e - x)`.
    ///
    /// Left and right edges each form an arithmetic progression of step `d`, so the
    /// chirp factors follow `e_{j+1} = e_j r_j`, `r_{j+1} = r_j e^{i pi beta^2 d^2}`.
    #[inline]
    fn edge_sums(&self, beta: f64, step2: C64, shift: C64, x: f64) -> (C64, f64, C64, C64) {
        let g = &self.field.grating;
        let (l0, r0) = g.edges(0);
        let mut acc = C64::new(0.0, 0.0);
        let mut dacc = C64::new(0.0, 0.0);
        let mut d2acc = C64::new(0.0, 0.0);
        let mut count = 0.0;
        let mut z = [0.0; EDGE_BLOCK];
        let mut sg = [0.0; EDGE_BLOCK];
        let mut ch = [C64::new(0.0, 0.0); EDGE_BLOCK];
        let mut gv = [C64::new(0.0, 0.0); EDGE_BLOCK];
        let (dl, dr) = (l0 - x, r0 - x);
        let mut el = chirp(beta * dl);
        let mut er = chirp(beta * dr);
        let mut rl = C64::from_polar(1.0, PI * beta * beta * g.d * (dl + 0.5 * g.d));
        let mut rr = rl * shift;
        let half = EDGE_BLOCK / 2;
        let mut j = 0;
        while j < g.n {
            let m = (g.n - j).min(half);
            for i in 0..m {
                let off = (j + i) as f64 * g.d;
                let ul = beta * (dl + off);
                let ur = beta * (dr + off);
                z[2 * i] = ul.abs();
                z[2 * i + 1] = ur.abs();
                sg[2 * i] = -sign(ul);
                sg[2 * i + 1] = sign(ur);
                ch[2 * i] = el;
                ch[2 * i + 1] = er;
                dacc += er - el;
                d2acc += er * ur - el * ul;
                el *= rl;
                er *= rr;
                rl *= step2;
                rr *= step2;
            }
            fresnel_aux_many(&z[..2 * m], &mut gv[..2 * m]);
            for i in 0..2 * m {
                count += sg[i];
                acc -= gv[i] * ch[i] * sg[i];
            }
            j += m;
        }
        (acc, count, dacc, d2acc)
    }

    /// `(pi / 2) beta^2`-scaled Fresnel variable; `None` for non-edge fields.
    pub fn beta(&self) -> Option<f64> {
        match self.kind {
            Kind::Edges { beta, .. } => Some(beta),
            _ => None,
        }
    }

    pub fn psi(&self, x: f64) -> C64 {
        match &self.kind {
            Kind::Initial => C64::new(self.field.grating.psi0(x), 0.0),
            Kind::Edges { beta, c0, step2, shift } => {
                let (acc, count, _, _) = self.edge_sums(*beta, *step2, *shift, x);
                c0 * (acc + HALF_ONE_PLUS_I * count)
            }
            Kind::Gaussians { inv_width2, pref } => {
                let g = &self.field.grating;
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..g.n {
                    let u = x - g.center(j);
                    acc += (-(inv_width2 * (u * u))).exp();
                }
                pref * acc
            }
            Kind::Grid { weights } => {
                grid_sum(weights, &self.field.spectrum.k_grid, self.field.spectrum.dk, x).0
            }
        }
    }

    /// `(psi, d psi / dx)`; the derivative is exact (the `i k` factor of the momentum
    /// integral), never a finite difference.
    pub fn psi_and_dx(&self, x: f64) -> (C64, C64) {
        match &self.kind {
            Kind::Initial => (C64::new(self.field.grating.psi0(x), 0.0), C64::new(0.0, 0.0)),
            Kind::Edges { beta, c0, step2, shift } => {
                let (acc, count, dacc, _) = self.edge_sums(*beta, *step2, *shift, x);
                (c0 * (acc + HALF_ONE_PLUS_I * count), -c0 * *beta * dacc)
            }
            Kind::Gaussians { inv_width2, pref } => {
                let g = &self.field.grating;
                let mut acc = C64::new(0.0, 0.0);
                let mut dacc = C64::new(0.0, 0.0);
                for j in 0..g.n {
                    let u = x - g.center(j);
                    let e = (-(inv_width2 * (u * u))).exp();
                    acc += e;
                    dacc -= e * inv_width2 * (2.0 * u);
                }
                (pref * acc, pref * dacc)
            }
            Kind::Grid { weights } => grid_sum(weights, &self.field.spectrum.k_grid, self.field.spectrum.dk, x),
        }
    }

    /// `(psi, d psi / dx, d^2 psi / dx^2)`, all exact.
    pub fn psi_derivatives(&self, x: f64) -> (C64, C64, C64) {
        let zero = C64::new(0.0, 0.0);
        match &self.kind {
            Kind::Initial => (C64::new(self.field.grating.psi0(x), 0.0), zero, zero),
            Kind::Edges { beta, c0, step2, shift } => {
                let (acc, count, dacc, d2acc) = self.edge_sums(*beta, *step2, *shift, x);
                (
                    c0 * (acc + HALF_ONE_PLUS_I * count),
                    -c0 * *beta * dacc,
                    c0 * C64::new(0.0, PI * beta * beta) * d2acc,
                )
            }
            Kind::Gaussians { inv_width2, pref } => {
                let g = &self.field.grating;
                let (mut acc, mut dacc, mut d2acc) = (zero, zero, zero);
                for j in 0..g.n {
                    let u = x - g.center(j);
                    let e = (-(inv_width2 * (u * u))).exp();
                    let w2u = inv_width2 * (2.0 * u);
                    acc += e;
                    dacc -= e * w2u;
                    d2acc += e * (w2u * w2u - inv_width2 * 2.0);
                }
                (pref * acc, pref * dacc, pref * d2acc)
            }
            Kind::Grid { weights } => grid_sum2(weights, &self.field.spectrum.k_grid, self.field.spectrum.dk, x),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.psi(x).norm_sqr()
    }
}

/// `|psi|^2` on a grid at one distance.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    pub y: f64,
    pub x_grid: Vec<f64>,
    pub density: Vec<f64>,
    pub md_density: Option<Vec<f64>>,
}

impl IntensityProfile {
    /// Trapezoid mass of `density` over the grid.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.x_grid, &self.density)
    }

    /// `max |rho(x) - rho(-x)| / max rho` for a grid symmetric about 0.
    pub fn asymmetry(&self) -> f64 {
        let n = self.density.len();
        let peak = self.density.iter().cloned().fold(0.0, f64::max);
        (0..n)
            .map(|i| (self.density[i] - self.density[n - 1 - i]).abs())
            .fold(0.0, f64::max)
            / peak
    }
}

pub(crate) fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1])).sum()
}

/// How profiles are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagator {
    Spectral,
    Fresnel,
    FarField,
    /// Spectral below the given distance, far-field form at and above it.
    SpectralUntil(f64),
}

pub fn intensity_profile(field: &WaveField, y: f64, x_grid: &[f64]) -> Result<IntensityProfile> {
    intensity_profile_with(field, y, x_grid, Propagator::Spectral)
}

pub fn intensity_profile_with(
    field: &WaveField,
    y: f64,
    x_grid: &[f64],
    method: Propagator,
) -> Result<IntensityProfile> {
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("distance must be non-negative, got {y}")));
    }
    let t = field.t_of_y(y);
    let method = match method {
        Propagator::SpectralUntil(y_far) if y >= y_far => Propagator::FarField,
        Propagator::SpectralUntil(_) => Propagator::Spectral,
        m => m,
    };
    let density = match method {
        Propagator::Spectral => {
            let snap = field.at(t)?;
            x_grid.iter().try_for_each(|&x| snap.check_x(x))?;
            x_grid.par_iter().map(|&x| snap.density(x)).collect()
        }
        Propagator::Fresnel => x_grid
            .par_iter()
            .map(|&x| field.psi_fresnel(x, t).map(|p| p.norm_sqr()))
            .collect::<Result<Vec<_>>>()?,
        Propagator::FarField => x_grid
            .par_iter()
            .map(|&x| field.psi_farfield(x, t).map(|p| p.norm_sqr()))
            .collect::<Result<Vec<_>>>()?,
        Propagator::SpectralUntil(_) => unreachable!(),
    };
    Ok(IntensityProfile { y, x_grid: x_grid.to_vec(), density, md_density: None })
}

pub fn carpet(field: &WaveField, y_list: &[f64], x_grid: &[f64]) -> Result<Vec<IntensityProfile>> {
    y_list.iter().map(|&y| intensity_profile(field, y, x_grid)).collect()
}

/// Default profile half-width: the aperture plus four diffraction orders, at least `3 n d`.
pub fn default_half_width(field: &WaveField, y: f64) -> f64 {
    let g = &field.grating;
    let (lo, hi) = g.support();
    let orders = 4.0 * field.beam.wavelength / g.d * y;
    (3.0 * g.n as f64 * g.d).max(lo.abs().max(hi.abs()) + orders)
}

/// `points` uniformly spaced samples on `[-half, half]`.
pub fn symmetric_grid(half: f64, points: usize) -> Vec<f64> {
    let h = 2.0 * half / (points - 1) as f64;
    (0..points).map(|i| -half + i as f64 * h).collect()
}

pub const DEFAULT_PROFILE_POINTS: usize = 4096;

/// Relative L2 distance `||a - b|| / ||b||` of two sampled functions.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Relative L2 distance of complex samples.
pub fn relative_l2_complex(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}
