//! Bohmian velocity field and trajectory ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beamgrating::{talbot_length, GratingSpec, Window, HBAR};
use crate::error::{invalid, Error, Result};
use crate::wavefield::{Snapshot, WaveField};

pub const DEFAULT_EPSILON_NODE: f64 = 1e-6;
pub const DEFAULT_STEPS_PER_TALBOT: usize = 4000;
pub const DEFAULT_MAX_HALVINGS: u32 = 12;
pub const DEFAULT_RAMP: f64 = 16.0;
/// Largest `h |dv_x/dx|` accepted at any stage of a step.
pub const DEFAULT_MAX_STRETCH: f64 = 0.25;
/// Shared-grid launch gap as a fraction of the slit feature size.
pub const DEFAULT_RELATIVE_GROUP_GAP: f64 = 1e-4;

/// `v_x = (hbar/m) Im(psi_x / psi)`; `v_y = hbar k / m`.
#[derive(Debug, Clone, Copy)]
pub struct VelocityField<'a> {
    pub field: &'a WaveField,
    /// Density floor relative to the reference peak density, below which a point
    /// counts as close to a node.
    pub epsilon_node: f64,
    initial_peak: f64,
    spectral_peak: f64,
}

/// One velocity evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocitySample {
    pub vx: f64,
    /// `d v_x / dx`, exact.
    pub dvdx: f64,
    pub density: f64,
    pub near_node: bool,
}

/// The velocity field at one time.
#[derive(Debug, Clone)]
pub struct VelocitySnapshot<'a> {
    snap: Snapshot<'a>,
    floor: f64,
    v_max: f64,
    hbar_m: f64,
}

impl VelocitySnapshot<'_> {
    #[inline]
    pub fn eval(&self, x: f64) -> VelocitySample {
        let (psi, dpsi, d2psi) = self.snap.psi_derivatives(x);
        let density = psi.norm_sqr();
        let near_node = density < self.floor;
        let r = dpsi / psi;
        let raw = self.hbar_m * r.im;
        let vx = if raw.is_finite() { raw.clamp(-self.v_max, self.v_max) } else { 0.0 };
        let g = self.hbar_m * (d2psi / psi - r * r).im;
        let dvdx = if g.is_finite() { g } else { f64::INFINITY };
        VelocitySample { vx, dvdx, density, near_node }
    }

    pub fn t(&self) -> f64 {
        self.snap.t
    }
}

impl<'a> VelocityField<'a> {
    pub fn new(field: &'a WaveField) -> Self {
        Self::with_epsilon(field, DEFAULT_EPSILON_NODE)
    }

    pub fn with_epsilon(field: &'a WaveField, epsilon_node: f64) -> Self {
        let g = &field.grating;
        let initial_peak = match g.window {
            Window::Square => 1.0 / (g.n as f64 * g.delta),
            Window::Gaussian { .. } => (0..g.n).map(|j| g.psi0(g.center(j)).powi(2)).fold(0.0, f64::max),
        };
        let spectral_peak = field
            .spectrum
            .c_values
            .iter()
            .map(|c| c.norm_sqr())
            .fold(field.spectrum.density(0.0), f64::max);
        Self { field, epsilon_node, initial_peak, spectral_peak }
    }

    pub fn vy(&self) -> f64 {
        self.field.beam.speed
    }

    /// Largest transverse speed represented on the momentum grid.
    pub fn v_max(&self) -> f64 {
        HBAR * self.field.spectrum.k_max / self.field.beam.mass
    }

    /// Reference peak density at `t`: the smaller of the initial peak and the far-field peak.
    pub fn reference_density(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.initial_peak;
        }
        self.initial_peak.min(self.field.k_per_x(t) * self.spectral_peak)
    }

    pub fn at(&self, t: f64) -> Result<VelocitySnapshot<'a>> {
        Ok(VelocitySnapshot {
            snap: self.field.at(t)?,
            floor: self.epsilon_node * self.reference_density(t),
            v_max: self.v_max(),
            hbar_m: HBAR / self.field.beam.mass,
        })
    }

    /// `v_x(x, t)`; points whose density is below the node floor are reported as an error
    /// carrying the clamped velocity.
    pub fn velocity_x(&self, x: f64, t: f64) -> Result<f64> {
        let s = self.at(t)?.eval(x);
        if s.near_node {
            return Err(Error::NearNode { x, t, vx: s.vx });
        }
        Ok(s.vx)
    }

    /// Centered difference of `v_x` in `x`.
    pub fn velocity_gradient(&self, x: f64, t: f64, h: f64) -> Result<f64> {
        let s = self.at(t)?;
        Ok((s.eval(x + h).vx - s.eval(x - h).vx) / (2.0 * h))
    }
}

/// Time stepping of a single trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPolicy {
    /// Start time; the particle sits at `x0` until then.
    pub t_start: f64,
    pub dt: f64,
    /// Early steps are capped at `t / (ramp (1 + t_fresnel / t))`.
    pub ramp: f64,
    /// `m l^2 / (2 hbar)` for the aperture feature size `l`.
    pub t_fresnel: f64,
    pub max_halvings: u32,
    /// Steps are split while `h |dv_x/dx|` exceeds this at any stage.
    pub max_stretch: f64,
    /// Ensemble launch points closer than this are integrated on a shared time grid.
    pub group_gap: f64,
}

impl StepPolicy {
    /// Start at the time of flight to `L_T / 1000` and take `steps_per_talbot` steps per `L_T`.
    pub fn for_field(field: &WaveField, steps_per_talbot: usize) -> Self {
        let lt = talbot_length(&field.grating, &field.beam);
        let feature = match field.grating.window {
            Window::Square => field.grating.delta,
            Window::Gaussian { a } => a,
        };
        Self {
            t_start: field.t_of_y(lt / 1000.0),
            dt: field.t_of_y(lt / steps_per_talbot as f64),
            ramp: DEFAULT_RAMP,
            t_fresnel: field.beam.mass * feature * feature / (2.0 * HBAR),
            max_halvings: DEFAULT_MAX_HALVINGS,
            max_stretch: DEFAULT_MAX_STRETCH,
            group_gap: DEFAULT_RELATIVE_GROUP_GAP * feature,
        }
    }
}

/// Which samples to keep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordPlan {
    /// Times hit exactly by the integrator.
    pub times: Vec<f64>,
    /// Also keep the first step after every further `n` regular step lengths of time.
    pub every_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub vx: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub x0: f64,
    pub samples: Vec<Sample>,
    /// Step halving was exhausted at least once close to a node.
    pub node_stalled: bool,
    /// Step halvings, counted for the whole shared-grid group.
    pub halvings: u64,
}

impl TrajectoryRecord {
    pub fn at_time(&self, t: f64) -> Option<&Sample> {
        self.samples.iter().find(|s| s.t == t)
    }
}

struct Stepper<'v, 'a> {
    vf: &'v VelocityField<'a>,
    max_halvings: u32,
    max_stretch: f64,
    stalled: Vec<bool>,
    halvings: u64,
}

impl Stepper<'_, '_> {
    /// One RK4 step of every member from `t` to `t_end` on a shared time grid, split
    /// recursively while a stage of any member lands near a node or has `h |dv_x/dx|`
    /// above the stretch bound. Returns the new positions and the velocities there.
    fn step(
        &mut self,
        s0: &VelocitySnapshot<'_>,
        k1: &[VelocitySample],
        x: &[f64],
        t_end: f64,
        depth: u32,
    ) -> Result<(Vec<f64>, Vec<VelocitySample>)> {
        let t = s0.t();
        let h = t_end - t;
        let sm = self.vf.at(t + 0.5 * h)?;
        let s1 = self.vf.at(t_end)?;
        let mut x1 = Vec::with_capacity(x.len());
        let mut near = Vec::with_capacity(x.len());
        let mut refine = false;
        for (&xi, &a) in x.iter().zip(k1) {
            let b = sm.eval(xi + 0.5 * h * a.vx);
            let c = sm.eval(xi + 0.5 * h * b.vx);
            let d = s1.eval(xi + h * c.vx);
            let n = a.near_node || b.near_node || c.near_node || d.near_node;
            let stretch = h * a.dvdx.abs().max(b.dvdx.abs()).max(c.dvdx.abs()).max(d.dvdx.abs());
            refine |= n || stretch > self.max_stretch;
            near.push(n);
            x1.push(xi + h / 6.0 * (a.vx + 2.0 * b.vx + 2.0 * c.vx + d.vx));
        }
        if refine && depth < self.max_halvings {
            self.halvings += 1;
            let (xm, km) = self.step(s0, k1, x, sm.t(), depth + 1)?;
            return self.step(&sm, &km, &xm, t_end, depth + 1);
        }
        for (s, n) in self.stalled.iter_mut().zip(near) {
            *s |= n;
        }
        let k5 = x1.iter().map(|&xi| s1.eval(xi)).collect();
        Ok((x1, k5))
    }
}

/// Integrates `dx/dt = v_x(x, t)` from `policy.t_start` to `t_final` with RK4.
pub fn integrate_trajectory(
    vf: &VelocityField<'_>,
    x0: f64,
    t_final: f64,
    policy: &StepPolicy,
    plan: &RecordPlan,
) -> Result<TrajectoryRecord> {
    Ok(integrate_group(vf, &[x0], t_final, policy, plan)?.remove(0))
}

/// Integrates several trajectories on one shared time grid.
pub fn integrate_group(
    vf: &VelocityField<'_>,
    x0s: &[f64],
    t_final: f64,
    policy: &StepPolicy,
    plan: &RecordPlan,
) -> Result<Vec<TrajectoryRecord>> {
    if x0s.is_empty() {
        return Ok(Vec::new());
    }
    for &x0 in x0s {
        if vf.field.grating.window == Window::Square && vf.field.grating.slit_of(x0).is_none() {
            return Err(invalid(format!("launch point {x0:e} is not inside an opening")));
        }
    }
    if !(policy.dt > 0.0 && policy.t_start > 0.0 && policy.ramp > 0.0 && policy.t_fresnel >= 0.0) {
        return Err(invalid("step, ramp and start time must be positive"));
    }
    if !(policy.max_stretch > 0.0) {
        return Err(invalid("stretch bound must be positive"));
    }
    let mut times: Vec<f64> = plan.times.iter().copied().filter(|&t| t <= t_final).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut samples: Vec<Vec<Sample>> = vec![Vec::new(); x0s.len()];
    let mut pending = times.iter().peekable();
    while let Some(&&tr) = pending.peek() {
        if tr > policy.t_start {
            break;
        }
        let snap = vf.at(tr)?;
        for (out, &x0) in samples.iter_mut().zip(x0s) {
            out.push(Sample { t: tr, x: x0, vx: snap.eval(x0).vx });
        }
        pending.next();
    }

    let mut st = Stepper {
        vf,
        max_halvings: policy.max_halvings,
        max_stretch: policy.max_stretch,
        stalled: vec![false; x0s.len()],
        halvings: 0,
    };
    let mut t = policy.t_start;
    let mut x = x0s.to_vec();
    let mut step_index: usize = 0;
    let mut ramp_end = t;
    let mut snap = vf.at(t)?;
    let mut k1: Vec<VelocitySample> = x.iter().map(|&xi| snap.eval(xi)).collect();
    let keep_span = plan.every_steps.map(|n| n.max(1) as f64 * policy.dt);
    let mut next_keep = keep_span.map_or(f64::INFINITY, |span| policy.t_start + span);
    while t < t_final {
        let cap = t * t / (policy.ramp * (t + policy.t_fresnel));
        let ramping = cap < policy.dt;
        let next_regular = if ramping {
            t + cap
        } else {
            ramp_end + (step_index + 1) as f64 * policy.dt
        };
        let mut target = next_regular.min(t_final);
        let mut hits_record = false;
        if let Some(&&tr) = pending.peek() {
            if tr <= target {
                target = tr;
                hits_record = true;
            }
        }
        if target > t {
            (x, k1) = st.step(&snap, &k1, &x, target, 0)?;
            snap = vf.at(target)?;
        }
        t = target;
        let regular = target == next_regular;
        if ramping {
            ramp_end = t;
        } else if regular {
            step_index += 1;
        }
        let every = t >= next_keep;
        if let (true, Some(span)) = (every, keep_span) {
            while next_keep <= t {
                next_keep += span;
            }
        }
        if hits_record {
            pending.next();
        }
        if hits_record || every || (t == t_final && plan.every_steps.is_some()) {
            for ((out, &xi), k) in samples.iter_mut().zip(&x).zip(&k1) {
                if out.last().map_or(true, |s: &Sample| s.t != t) {
                    out.push(Sample { t, x: xi, vx: k.vx });
                }
            }
        }
    }
    Ok(x0s
        .iter()
        .zip(samples)
        .zip(st.stalled)
        .map(|((&x0, samples), node_stalled)| TrajectoryRecord { x0, samples, node_stalled, halvings: st.halvings })
        .collect())
}

/// How launch points are drawn from `|psi(x, 0)|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Independent draws.
    Random,
    /// Quantiles `(i + 1/2) / N`.
    Equispaced,
}

/// Launch points distributed as `|psi(x, 0)|^2`, sorted ascending.
pub fn launch_points(grating: &GratingSpec, n_traj: usize, sampling: Sampling, seed: u64) -> Result<Vec<f64>> {
    if n_traj < 2 {
        return Err(invalid("at least two trajectories are required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quantiles: Vec<f64> = match sampling {
        Sampling::Equispaced => (0..n_traj).map(|i| (i as f64 + 0.5) / n_traj as f64).collect(),
        Sampling::Random => (0..n_traj)
            .map(|_| loop {
                let u: f64 = rng.gen();
                if u > 0.0 {
                    break u;
                }
            })
            .collect(),
    };
    let inverse = InverseCdf::new(grating);
    let mut xs: Vec<f64> = quantiles.into_iter().map(|q| inverse.eval(q)).collect();
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

/// Inverse cumulative of `|psi(x, 0)|^2`.
struct InverseCdf {
    grating: GratingSpec,
    table: Option<(Vec<f64>, Vec<f64>)>,
}

impl InverseCdf {
    fn new(grating: &GratingSpec) -> Self {
        let table = match grating.window {
            Window::Square => None,
            Window::Gaussian { .. } => {
                let (lo, hi) = grating.support();
                let n = 1 << 16;
                let h = (hi - lo) / n as f64;
                let xs: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
                let mut cum = vec![0.0; n + 1];
                for i in 0..n {
                    let (a, b) = (xs[i], xs[i + 1]);
                    let m = 0.5 * (a + b);
                    let f = |x: f64| grating.psi0(x).powi(2);
                    cum[i + 1] = cum[i] + h / 6.0 * (f(a) + 4.0 * f(m) + f(b));
                }
                let total = cum[n];
                cum.iter_mut().for_each(|c| *c /= total);
                Some((xs, cum))
            }
        };
        Self { grating: *grating, table }
    }

    fn eval(&self, q: f64) -> f64 {
        match &self.table {
            None => {
                let g = &self.grating;
                let s = q * g.n as f64;
                let j = (s.floor() as usize).min(g.n - 1);
                let (l, r) = g.edges(j);
                l + (s - j as f64) * (r - l)
            }
            Some((xs, cum)) => {
                let i = cum.partition_point(|&c| c < q).clamp(1, cum.len() - 1);
                let f = (q - cum[i - 1]) / (cum[i] - cum[i - 1]).max(f64::MIN_POSITIVE);
                xs[i - 1] + f * (xs[i] - xs[i - 1])
            }
        }
    }
}

/// An ensemble of trajectories sorted by launch point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub records: Vec<TrajectoryRecord>,
    pub seed: u64,
    pub y0: f64,
    pub vy: f64,
}

impl TrajectoryEnsemble {
    /// `y(t) = v t`.
    pub fn y_of_t(&self, t: f64) -> f64 {
        self.y0 + self.vy * t
    }

    /// Positions of all trajectories at a recorded time (launch order).
    pub fn positions_at(&self, t: f64) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.at_time(t).map(|s| s.x)).collect()
    }

    pub fn stalled_count(&self) -> usize {
        self.records.iter().filter(|r| r.node_stalled).count()
    }

    /// Adjacent order inversions summed over every recorded time shared by all records.
    pub fn order_violations(&self) -> usize {
        let Some(first) = self.records.first() else {
            return 0;
        };
        first
            .samples
            .iter()
            .map(|s| {
                let xs = self.positions_at(s.t);
                xs.windows(2).filter(|w| w[1] < w[0]).count()
            })
            .sum()
    }
}

/// Samples launch points and integrates every trajectory (in parallel, order-independent).
pub fn launch_ensemble(
    vf: &VelocityField<'_>,
    n_traj: usize,
    sampling: Sampling,
    seed: u64,
    t_final: f64,
    policy: &StepPolicy,
    plan: &RecordPlan,
) -> Result<TrajectoryEnsemble> {
    let x0s = launch_points(&vf.field.grating, n_traj, sampling, seed)?;
    integrate_ensemble(vf, &x0s, seed, t_final, policy, plan)
}

/// Integrates trajectories from the given launch points; records come back sorted by `x0`.
/// Launch points closer than `policy.group_gap` to a neighbour share one time grid.
pub fn integrate_ensemble(
    vf: &VelocityField<'_>,
    x0s: &[f64],
    seed: u64,
    t_final: f64,
    policy: &StepPolicy,
    plan: &RecordPlan,
) -> Result<TrajectoryEnsemble> {
    let mut x0s = x0s.to_vec();
    x0s.sort_by(f64::total_cmp);
    let groups: Vec<&[f64]> = x0s.chunk_by(|a, b| b - a < policy.group_gap).collect();
    let records = groups
        .par_iter()
        .map(|g| integrate_group(vf, g, t_final, policy, plan))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(TrajectoryEnsemble { records, seed, y0: 0.0, vy: vf.vy() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamgrating::{default_k_grid, spectrum_analytic, ParticleBeam};
    use proptest::prelude::*;

    fn field(g: GratingSpec) -> (WaveField, f64) {
        let b = ParticleBeam::from_wavelength(1.19e-24, 2.53e-12).unwrap();
        let s = spectrum_analytic(&g, &default_k_grid(&g)).unwrap();
        let lt = talbot_length(&g, &b);
        (WaveField::new(g, b, s).unwrap(), lt)
    }

    fn fig1() -> (WaveField, f64) {
        field(GratingSpec::square(5, 0.1e-6, 0.05e-6).unwrap())
    }

    #[test]
    fn symmetry_axis_has_zero_velocity() {
        let (f, lt) = fig1();
        let vf = VelocityField::new(&f);
        let scale = HBAR / (f.beam.mass * f.grating.delta);
        for y in [0.001 * lt, 0.3 * lt, 1.25 * lt, 12.5 * lt] {
            let v = vf.velocity_x(0.0, f.t_of_y(y)).unwrap();
            assert!(v.abs() < 1e-10 * scale, "{v}");
        }
    }

    #[test]
    fn initial_state_is_at_rest() {
        let (f, _) = fig1();
        let vf = VelocityField::new(&f);
        assert_eq!(vf.velocity_x(f.grating.center(3), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_window_velocity_vanishes_at_early_times() {
        let (f, lt) = field(GratingSpec::gaussian(3, 0.1e-6, 0.05e-6, 0.02e-6).unwrap());
        let vf = VelocityField::new(&f);
        let x = f.grating.center(2) + 0.003e-6;
        let v1 = vf.velocity_x(x, f.t_of_y(1e-3 * lt)).unwrap().abs();
        let v2 = vf.velocity_x(x, f.t_of_y(1e-5 * lt)).unwrap().abs();
        assert!(v1 > 0.0 && v2 < 0.02 * v1, "{v1} {v2}");
    }

    #[test]
    fn velocity_matches_finite_difference_of_phase() {
        let (f, lt) = fig1();
        let vf = VelocityField::new(&f);
        let t = f.t_of_y(0.4 * lt);
        let snap = f.at(t).unwrap();
        let x = 0.137e-6;
        let h = 1e-13;
        let dphase = ((snap.psi(x + h) / snap.psi(x - h)).arg()) / (2.0 * h);
        let v = vf.velocity_x(x, t).unwrap();
        assert!((v - HBAR / f.beam.mass * dphase).abs() < 1e-5 * v.abs());
    }

    #[test]
    fn central_trajectory_stays_on_axis() {
        let (f, lt) = fig1();
        let vf = VelocityField::new(&f);
        let policy = StepPolicy::for_field(&f, 1000);
        let t_end = f.t_of_y(2.0 * lt);
        let r = integrate_trajectory(&vf, 0.0, t_end, &policy, &RecordPlan { times: vec![t_end], every_steps: None }).unwrap();
        assert!(r.samples[0].x.abs() < 1e-18);
        assert!(!r.node_stalled);
    }

    #[test]
    fn close_launch_points_share_a_grid_and_stay_ordered() {
        let (f, lt) = fig1();
        let vf = VelocityField::new(&f);
        let policy = StepPolicy::for_field(&f, 1000);
        let edge = f.grating.edges(0).0;
        let x0s: Vec<f64> = (1..=6).map(|i| edge + 2e-9 + i as f64 * 3e-14).collect();
        let times: Vec<f64> = (1..=10).map(|i| f.t_of_y(0.005 * i as f64 * lt)).collect();
        let plan = RecordPlan { times, every_steps: None };
        let e = integrate_ensemble(&vf, &x0s, 0, f.t_of_y(0.05 * lt), &policy, &plan).unwrap();
        assert_eq!(e.order_violations(), 0);
        assert!(e.records.iter().all(|r| r.halvings == e.records[0].halvings && r.samples.len() == 10));
    }

    #[test]
    fn gaussian_packet_trajectory_follows_width() {
        let a = 0.02e-6;
        let (f, lt) = field(GratingSpec::gaussian(1, 0.1e-6, 0.05e-6, a).unwrap());
        let vf = VelocityField::new(&f);
        let policy = StepPolicy::for_field(&f, 2000);
        let t_end = f.t_of_y(3.0 * lt);
        let times: Vec<f64> = [0.5, 1.0, 3.0].iter().map(|&y| f.t_of_y(y * lt)).collect();
        let sigma = |t: f64| (1.0 + (2.0 * HBAR * t / (f.beam.mass * a * a)).powi(2)).sqrt();
        for x0 in [0.3 * a, -1.1 * a, 2.0 * a] {
            let r = integrate_trajectory(&vf, x0, t_end, &policy, &RecordPlan { times: times.clone(), every_steps: None })
                .unwrap();
            for s in &r.samples {
                let expect = x0 * sigma(s.t) / sigma(policy.t_start);
                assert!((s.x - expect).abs() < 1e-8 * expect.abs(), "{} vs {expect}", s.x);
            }
        }
    }

    #[test]
    fn record_times_are_hit_exactly() {
        let (f, lt) = fig1();
        let vf = VelocityField::new(&f);
        let policy = StepPolicy::for_field(&f, 400);
        let times = vec![f.t_of_y(0.123 * lt), f.t_of_y(0.5 * lt), f.t_of_y(0.0001 * lt)];
        let r = integrate_trajectory(&vf, 0.011e-6, f.t_of_y(0.6 * lt), &policy, &RecordPlan { times: times.clone(), every_steps: Some(100) })
            .unwrap();
        for t in &times {
            assert!(r.at_time(*t).is_some());
        }
        assert_eq!(r.at_time(times[2]).unwrap().x, 0.011e-6);
        assert!(r.samples.windows(2).all(|w| w[0].t < w[1].t));
        let spans = (f.t_of_y(0.6 * lt) / (100.0 * policy.dt)).ceil() as usize;
        assert!(r.samples.len() <= times.len() + spans + 1, "{}", r.samples.len());
        assert!(r.samples.len() >= spans - 1);
    }

    #[test]
    fn launch_outside_opening_is_rejected() {
        let (f, lt) = fig1();
        let vf = VelocityField::new(&f);
        let policy = StepPolicy::for_field(&f, 100);
        assert!(integrate_trajectory(&vf, 0.05e-6, f.t_of_y(lt), &policy, &RecordPlan::default()).is_err());
    }

    #[test]
    fn launches_split_evenly_between_slits() {
        let g = GratingSpec::square(5, 0.1e-6, 0.05e-6).unwrap();
        let n = 20000;
        let xs = launch_points(&g, n, Sampling::Random, 7).unwrap();
        for j in 0..5 {
            let count = xs.iter().filter(|&&x| g.slit_of(x) == Some(j)).count() as f64;
            let p = 0.2;
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((count - n as f64 * p).abs() < 4.0 * sd);
        }
        assert!(xs.iter().all(|&x| g.slit_of(x).is_some()));
        assert_eq!(xs, launch_points(&g, n, Sampling::Random, 7).unwrap());
        assert_ne!(xs, launch_points(&g, n, Sampling::Random, 8).unwrap());
    }

    #[test]
    fn gaussian_launches_follow_density() {
        let a = 0.02e-6;
        let g = GratingSpec::gaussian(1, 0.1e-6, 0.05e-6, a).unwrap();
        let xs = launch_points(&g, 4001, Sampling::Equispaced, 0).unwrap();
        // |psi|^2 is normal with standard deviation a / 2; quartiles at +-0.6745 sd
        let q1 = xs[1000];
        assert!((q1 + 0.674_489_750_196 * a / 2.0).abs() < 1e-3 * a);
        assert!(xs[2000].abs() < 1e-6 * a);
    }

    #[test]
    fn small_ensemble_never_crosses() {
        let (f, lt) = fig1();
        let vf = VelocityField::new(&f);
        let policy = StepPolicy::for_field(&f, 1000);
        let times: Vec<f64> = (1..=10).map(|i| f.t_of_y(0.2 * i as f64 * lt)).collect();
        let plan = RecordPlan { times, every_steps: None };
        let e = launch_ensemble(&vf, 60, Sampling::Equispaced, 0, f.t_of_y(2.0 * lt), &policy, &plan).unwrap();
        assert_eq!(e.order_violations(), 0);
        assert_eq!(e.stalled_count(), 0);
        assert!(e.records.windows(2).all(|w| w[0].x0 < w[1].x0));
        assert!((e.y_of_t(f.t_of_y(lt)) - lt).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn velocity_is_odd_for_centered_grating(x in 1e-9f64..2e-6, y in 0.01f64..13.0) {
            let (f, lt) = fig1();
            let vf = VelocityField::new(&f);
            let s = vf.at(f.t_of_y(y * lt)).unwrap();
            let (a, b) = (s.eval(x), s.eval(-x));
            prop_assert!((a.vx + b.vx).abs() <= 1e-6 * a.vx.abs().max(1e-9));
        }
    }
}
