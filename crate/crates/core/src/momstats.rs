//! Momentum statistics of Bohmian ensembles against the momentum density of the wave.

use crate::beamgrating::{MomentumSpectrum, HBAR, PLANCK};
use crate::bohm::{TrajectoryEnsemble, VelocityField};
use crate::error::{invalid, Error, Result};
use crate::wavefield::WaveField;

pub const DEFAULT_BINS: usize = 81;
/// Default histogram half-range in units of the grating momentum `2 pi hbar / d`.
pub const DEFAULT_HALF_RANGE_ORDERS: f64 = 4.0;
/// Largest Fraunhofer number at which the far-field change of variables is flagged valid.
pub const FARFIELD_MAX_FRAUNHOFER: f64 = 0.1;

/// Uniform bins symmetric about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Bins {
    pub edges: Vec<f64>,
}

impl Bins {
    pub fn symmetric(count: usize, half: f64) -> Result<Self> {
        if count == 0 || !(half > 0.0) {
            return Err(invalid("bins need a positive count and half-range"));
        }
        let w = 2.0 * half / count as f64;
        let mut edges: Vec<f64> = (0..=count).map(|i| -half + i as f64 * w).collect();
        edges[count] = half;
        Ok(Self { edges })
    }

    /// `count` bins over `+-orders * 2 pi hbar / d`.
    pub fn momentum(count: usize, orders: f64, d: f64) -> Result<Self> {
        Self::symmetric(count, orders * PLANCK / d)
    }

    pub fn count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    pub fn index(&self, v: f64) -> Option<usize> {
        let (lo, hi) = (self.edges[0], self.edges[self.count()]);
        if !(v >= lo && v < hi) {
            return None;
        }
        Some((((v - lo) / self.width()) as usize).min(self.count() - 1))
    }
}

/// Unit-mass histogram of transverse momenta at one distance.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumHistogram {
    pub y: f64,
    pub bin_edges: Vec<f64>,
    pub density: Vec<f64>,
    pub sample_count: usize,
    /// Node-stalled trajectories left out.
    pub excluded: usize,
    /// Samples outside the bin range.
    pub outside: usize,
}

impl MomentumHistogram {
    pub fn mass(&self) -> f64 {
        let w = self.bin_edges[1] - self.bin_edges[0];
        self.density.iter().sum::<f64>() * w
    }
}

/// Histogram of `p_x = m v_x(x_i(t), t)` at `t = y / v`, which must be a recorded time.
pub fn bohm_momentum_histogram(ensemble: &TrajectoryEnsemble, vf: &VelocityField<'_>, y: f64, bins: &Bins) -> Result<MomentumHistogram> {
    let t = vf.field.t_of_y(y);
    let mass = vf.field.beam.mass;
    let mut counts = vec![0.0; bins.count()];
    let (mut used, mut excluded, mut outside) = (0usize, 0usize, 0usize);
    for r in &ensemble.records {
        let s = r
            .at_time(t)
            .ok_or_else(|| Error::Domain(format!("no sample recorded at t = {t:e} (y = {y:e})")))?;
        if r.node_stalled {
            excluded += 1;
            continue;
        }
        match bins.index(mass * s.vx) {
            Some(i) => {
                counts[i] += 1.0;
                used += 1;
            }
            None => outside += 1,
        }
    }
    if used == 0 {
        return Err(Error::Domain("no trajectory falls inside the histogram range".into()));
    }
    let w = bins.width();
    let density = counts.iter().map(|c| c / (used as f64 * w)).collect();
    Ok(MomentumHistogram { y, bin_edges: bins.edges.clone(), density, sample_count: used, excluded, outside })
}

/// `|c(p / hbar)|^2 / hbar`; independent of distance.
pub fn quantum_momentum_density(spectrum: &MomentumSpectrum, p_grid: &[f64]) -> Vec<f64> {
    p_grid.iter().map(|&p| spectrum.density(p / HBAR) / HBAR).collect()
}

/// Bin averages of `|c(p / hbar)|^2 / hbar`.
pub fn quantum_bin_density(spectrum: &MomentumSpectrum, bins: &Bins) -> Vec<f64> {
    bins.edges
        .windows(2)
        .map(|e| spectrum.mass_between(e[0] / HBAR, e[1] / HBAR) / (e[1] - e[0]))
        .collect()
}

/// `|psi(p t / m, t)|^2 t / m` together with a far-field validity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldDensity {
    pub density: Vec<f64>,
    pub fraunhofer_number: f64,
    pub valid: bool,
}

/// Momentum density from the far-field map `p = m x / t` and the exact position density.
pub fn farfield_jacobian_density(field: &WaveField, t: f64, p_grid: &[f64]) -> Result<FarFieldDensity> {
    let snap = field.at(t)?;
    if t == 0.0 {
        return Err(Error::Domain("the far-field map needs t > 0".into()));
    }
    let jac = t / field.beam.mass;
    let density = p_grid.iter().map(|&p| snap.density(p * jac) * jac).collect();
    let nf = field.fraunhofer_number(t);
    Ok(FarFieldDensity { density, fraunhofer_number: nf, valid: nf <= FARFIELD_MAX_FRAUNHOFER })
}

/// `t dv_x/dx` at `x`, which tends to 1 in the far field.
pub fn velocity_gradient_ratio(vf: &VelocityField<'_>, x: f64, t: f64) -> Result<f64> {
    let h = 1e-4 / vf.field.k_per_x(t).sqrt();
    Ok(t * vf.velocity_gradient(x, t, h)?)
}

/// L1 distance of two densities on a common uniform grid, each scaled to unit mass.
pub fn distribution_distance(a: &[f64], b: &[f64], dx: f64) -> f64 {
    assert_eq!(a.len(), b.len(), "densities must share a grid");
    let ma: f64 = a.iter().sum::<f64>() * dx;
    let mb: f64 = b.iter().sum::<f64>() * dx;
    if ma <= 0.0 || mb <= 0.0 {
        return if ma <= 0.0 && mb <= 0.0 { 0.0 } else { 2.0 };
    }
    a.iter().zip(b).map(|(x, y)| (x / ma - y / mb).abs()).sum::<f64>() * dx
}
