//! Straight-line momentum-distribution paths and their screen arrival probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beamgrating::{GratingSpec, MomentumSpectrum, ParticleBeam, Window, HBAR};
use crate::bohm::{launch_points, Sampling};
use crate::error::{invalid, Error, Result};
use crate::momstats::distribution_distance;
use crate::special::integrate_panels;
use crate::wavefield::{default_half_width, intensity_profile, symmetric_grid, trapezoid, WaveField, DEFAULT_PROFILE_POINTS};

/// `x(t) = x0 + (hbar k_x / m) t` at fixed longitudinal speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdTrajectory {
    pub x0: f64,
    pub k_x: f64,
}

impl MdTrajectory {
    pub fn vx(&self, beam: &ParticleBeam) -> f64 {
        HBAR * self.k_x / beam.mass
    }

    pub fn x_at(&self, beam: &ParticleBeam, t: f64) -> f64 {
        self.x0 + self.vx(beam) * t
    }
}

/// Screen arrival probability of the straight-line model, split by slit of origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalProbability {
    pub y: f64,
    pub t: f64,
    pub x_grid: Vec<f64>,
    pub total: Vec<f64>,
    pub per_slit: Vec<Vec<f64>>,
}

impl ArrivalProbability {
    pub fn mass(&self) -> f64 {
        trapezoid(&self.x_grid, &self.total)
    }
}

/// `P(x, t) = sum_i P_i(x, t)`: the density of `x0 + hbar k t / m` with `x0` drawn from
/// `|psi(x, 0)|^2` restricted to slit `i` and `k` drawn from `|c|^2`.
pub fn arrival_probability(
    spectrum: &MomentumSpectrum,
    grating: &GratingSpec,
    beam: &ParticleBeam,
    t: f64,
    x_grid: &[f64],
) -> Result<ArrivalProbability> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("arrival probability needs t > 0, got {t}")));
    }
    if x_grid.is_empty() {
        return Err(invalid("empty x grid"));
    }
    let q = beam.mass / (HBAR * t);
    let per_point: Vec<Vec<f64>> = match grating.window {
        Window::Square => {
            let scale = 1.0 / (grating.n as f64 * grating.delta);
            x_grid
                .par_iter()
                .map(|&x| {
                    (0..grating.n)
                        .map(|i| {
                            let (l, r) = grating.edges(i);
                            (scale * spectrum.mass_between(q * (x - r), q * (x - l))).max(0.0)
                        })
                        .collect()
                })
                .collect()
        }
        Window::Gaussian { a } => {
            let reach = GAUSSIAN_K_REACH / a / q;
            let extent = (grating.n as f64 - 1.0) * grating.d + 12.0 * a;
            let h = (a / 8.0).min(std::f64::consts::PI / (4.0 * extent) / q);
            x_grid
                .par_iter()
                .map(|&x| {
                    (0..grating.n)
                        .map(|i| {
                            let (cl, cr) = gaussian_cell(grating, i);
                            let lo = cl.max(x - reach);
                            let hi = cr.min(x + reach);
                            if lo >= hi {
                                return 0.0;
                            }
                            let panels = ((hi - lo) / h).ceil().max(1.0) as usize;
                            let v = integrate_panels(lo, hi, panels, |xp| {
                                q * spectrum.density(q * (x - xp)) * grating.psi0(xp).powi(2)
                            });
                            v.max(0.0)
                        })
                        .collect()
                })
                .collect()
        }
    };
    let mut per_slit = vec![Vec::with_capacity(x_grid.len()); grating.n];
    let mut total = Vec::with_capacity(x_grid.len());
    for row in &per_point {
        let mut sum = 0.0;
        for (i, &v) in row.iter().enumerate() {
            per_slit[i].push(v);
            sum += v;
        }
        total.push(sum);
    }
    Ok(ArrivalProbability { y: beam.distance_at(t), t, x_grid: x_grid.to_vec(), total, per_slit })
}

/// `|c|^2` of a Gaussian window is negligible beyond `9 / a`.
const GAUSSIAN_K_REACH: f64 = 9.0;

/// Cell attributed to Gaussian slit `i`: `[x_i - d/2, x_i + d/2]`, outer cells unbounded
/// and clipped to where `|psi(x, 0)|^2` is non-negligible.
fn gaussian_cell(grating: &GratingSpec, i: usize) -> (f64, f64) {
    let (lo, hi) = grating.support();
    let c = grating.center(i);
    let l = if i == 0 { lo } else { c - 0.5 * grating.d };
    let r = if i + 1 == grating.n { hi } else { c + 0.5 * grating.d };
    (l, r)
}

/// Draws launch points from `|psi(x, 0)|^2` and wavenumbers from `|c|^2`, independently.
pub fn sample_md_ensemble(
    spectrum: &MomentumSpectrum,
    grating: &GratingSpec,
    n_traj: usize,
    seed: u64,
) -> Result<Vec<MdTrajectory>> {
    let x0s = launch_points(grating, n_traj, Sampling::Random, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let us: Vec<f64> = (0..n_traj).map(|_| rng.gen::<f64>()).collect();
    Ok(x0s
        .into_iter()
        .zip(us)
        .map(|(x0, u)| MdTrajectory { x0, k_x: inverse_cdf(spectrum, u) })
        .collect())
}

/// `k` with `cdf(k) = u`; closed-form spectra are inverted beyond the grid as well.
pub fn inverse_cdf(spectrum: &MomentumSpectrum, u: f64) -> f64 {
    let lo_edge = spectrum.k_grid[0] - 0.5 * spectrum.dk;
    let hi_edge = spectrum.k_max + 0.5 * spectrum.dk;
    let (mut lo, mut hi) = (lo_edge, hi_edge);
    if spectrum.cdf(lo_edge) < u && spectrum.cdf(hi_edge) >= u {
        // coarse bracket by cells
        let (mut a, mut b) = (0usize, spectrum.k_grid.len());
        while b - a > 1 {
            let m = (a + b) / 2;
            if spectrum.cdf(lo_edge + m as f64 * spectrum.dk) < u {
                a = m;
            } else {
                b = m;
            }
        }
        lo = lo_edge + a as f64 * spectrum.dk;
        hi = lo_edge + b as f64 * spectrum.dk;
    } else if spectrum.model.is_some() {
        for _ in 0..MAX_DOUBLINGS {
            if spectrum.cdf(lo) < u {
                break;
            }
            hi = lo;
            lo *= 2.0;
        }
        for _ in 0..MAX_DOUBLINGS {
            if spectrum.cdf(hi) >= u {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
    } else {
        return if spectrum.cdf(lo_edge) >= u { lo_edge } else { hi_edge };
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spectrum.cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const MAX_DOUBLINGS: usize = 128;
const MAX_BISECTIONS: usize = 256;

/// Two paths from the centers of slits `a` and `b` that reach `x_star` at time `t`.
pub fn crossing_pair(
    grating: &GratingSpec,
    beam: &ParticleBeam,
    slit_a: usize,
    slit_b: usize,
    x_star: f64,
    t: f64,
) -> Result<(MdTrajectory, MdTrajectory)> {
    if slit_a == slit_b || slit_a >= grating.n || slit_b >= grating.n {
        return Err(invalid("crossing pair needs two distinct slits of the grating"));
    }
    if !(t > 0.0) {
        return Err(invalid("crossing time must be positive"));
    }
    let q = beam.mass / (HBAR * t);
    let make = |i: usize| {
        let x0 = grating.center(i);
        MdTrajectory { x0, k_x: q * (x_star - x0) }
    };
    Ok((make(slit_a), make(slit_b)))
}

/// Time and position at which two straight paths meet, if they are not parallel.
pub fn meeting_point(a: &MdTrajectory, b: &MdTrajectory, beam: &ParticleBeam) -> Option<(f64, f64)> {
    let dv = a.vx(beam) - b.vx(beam);
    if dv == 0.0 {
        return None;
    }
    let t = (b.x0 - a.x0) / dv;
    Some((t, a.x_at(beam, t)))
}

/// L1 distance between the unit-normalized arrival probability and `|psi|^2` at `y`.
pub fn near_field_discrepancy(spectrum: &MomentumSpectrum, grating: &GratingSpec, field: &WaveField, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(invalid("near-field discrepancy needs y > 0"));
    }
    let grid = symmetric_grid(default_half_width(field, y), DEFAULT_PROFILE_POINTS);
    let profile = intensity_profile(field, y, &grid)?;
    let md = arrival_probability(spectrum, grating, &field.beam, field.t_of_y(y), &grid)?;
    Ok(distribution_distance(&md.total, &profile.density, grid[1] - grid[0]))
}
