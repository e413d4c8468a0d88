//! Scenario runner: CSV outputs and a manifest with checksums.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use grating_core::beamgrating::{default_k_grid, spectrum_analytic, symmetric_k_grid, talbot_length, HBAR};
use grating_core::bohm::{integrate_ensemble, launch_points, RecordPlan, StepPolicy, TrajectoryEnsemble, VelocityField};
use grating_core::mdmodel::arrival_probability;
use grating_core::momstats::{bohm_momentum_histogram, distribution_distance, quantum_bin_density, Bins, DEFAULT_HALF_RANGE_ORDERS};
use grating_core::wavefield::{default_half_width, intensity_profile, symmetric_grid, IntensityProfile, WaveField};
use sha2::{Digest, Sha256};

use crate::config::{LaunchRegion, Output, Scenario};

/// Approximate number of regular-step samples kept per trajectory.
pub const SAMPLES_PER_TRAJECTORY: usize = 400;

/// Beam, grating, spectrum and field resolved from a scenario.
pub struct Prepared {
    pub scenario: Scenario,
    pub talbot_length: f64,
    /// Target distances in metres.
    pub ys: Vec<f64>,
    pub field: WaveField,
}

impl Prepared {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let grating = scenario.grating()?;
        let beam = scenario.beam()?;
        let lt = talbot_length(&grating, &beam);
        let default = default_k_grid(&grating);
        let k_grid = symmetric_k_grid((scenario.k_points - 1) / 2, default[1] - default[0]);
        let spectrum = spectrum_analytic(&grating, &k_grid)?;
        let field = WaveField::new(grating, beam, spectrum)?;
        let ys = scenario.y_targets.iter().map(|y| y.resolve(lt)).collect();
        Ok(Self { scenario: scenario.clone(), talbot_length: lt, ys, field })
    }

    pub fn policy(&self) -> StepPolicy {
        StepPolicy::for_field(&self.field, self.scenario.steps_per_lt)
    }

    pub fn y_max(&self) -> f64 {
        self.ys.iter().cloned().fold(0.0, f64::max)
    }

    /// Launch points; the half launch keeps `x0 >= 0` out of twice as many points.
    pub fn launch_points(&self) -> Result<Vec<f64>> {
        let s = &self.scenario;
        Ok(match s.launch {
            LaunchRegion::Full => launch_points(&self.field.grating, s.n_traj, s.sampling, s.seed)?,
            LaunchRegion::Half => launch_points(&self.field.grating, 2 * s.n_traj, s.sampling, s.seed)?
                .into_iter()
                .filter(|&x| x >= 0.0)
                .collect(),
        })
    }

    /// Integrates the ensemble; every target distance is a recorded time.
    pub fn ensemble(&self, vf: &VelocityField<'_>, keep_path: bool) -> Result<TrajectoryEnsemble> {
        let policy = self.policy();
        let t_final = self.field.t_of_y(self.y_max());
        let mut times: Vec<f64> = self.ys.iter().map(|&y| self.field.t_of_y(y)).collect();
        times.push(policy.t_start);
        times.sort_by(f64::total_cmp);
        times.dedup();
        let regular = ((t_final - policy.t_start) / policy.dt).ceil().max(1.0) as usize;
        let plan = RecordPlan {
            times,
            every_steps: keep_path.then(|| (regular / SAMPLES_PER_TRAJECTORY).max(1)),
        };
        Ok(integrate_ensemble(vf, &self.launch_points()?, self.scenario.seed, t_final, &policy, &plan)?)
    }

    pub fn profile(&self, y: f64, points: usize) -> Result<IntensityProfile> {
        let grid = symmetric_grid(default_half_width(&self.field, y), points);
        Ok(intensity_profile(&self.field, y, &grid)?)
    }
}

/// Files written by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub out_dir: PathBuf,
    /// `(file name, sha256 hex)` in write order.
    pub files: Vec<(String, String)>,
    pub manifest: PathBuf,
    /// Derived and result lines of the manifest.
    pub entries: Vec<(String, String)>,
}

struct Hashing<W: Write> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for Hashing<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

struct Csv {
    name: String,
    out: Hashing<BufWriter<File>>,
}

impl Csv {
    fn row(&mut self, fields: &[Field]) -> io::Result<()> {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.out.write_all(b",")?;
            }
            match *f {
                Field::F(v) => write!(self.out, "{v:.16e}")?,
                Field::U(v) => write!(self.out, "{v}")?,
            }
        }
        self.out.write_all(b"\n")
    }
}

enum Field {
    F(f64),
    U(usize),
}

use Field::{F, U};

struct Writer<'a> {
    dir: &'a Path,
    created: &'a mut Vec<PathBuf>,
    files: Vec<(String, String)>,
}

impl Writer<'_> {
    fn create(&mut self, name: &str, header: &[String]) -> Result<Csv> {
        let path = self.dir.join(name);
        self.created.push(path.clone());
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = Hashing { inner: BufWriter::new(file), hasher: Sha256::new() };
        writeln!(out, "{}", header.join(","))?;
        Ok(Csv { name: name.to_string(), out })
    }

    fn finish(&mut self, mut csv: Csv) -> Result<()> {
        csv.out.flush()?;
        let digest = csv.out.hasher.finalize();
        self.files.push((csv.name, hex(&digest)));
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(", ")
}

/// Runs every requested output into `out`; on failure, files created by this run are removed.
pub fn run(scenario: &Scenario, out: &Path) -> Result<RunReport> {
    let prepared = Prepared::new(scenario)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut created = Vec::new();
    let result = run_prepared(&prepared, out, &mut created);
    if result.is_err() {
        for p in &created {
            let _ = fs::remove_file(p);
        }
    }
    result
}

fn run_prepared(p: &Prepared, out: &Path, created: &mut Vec<PathBuf>) -> Result<RunReport> {
    let s = &p.scenario;
    let field = &p.field;
    let beam = &field.beam;
    let g = &field.grating;
    let sp = &field.spectrum;
    let wants = |o: Output| s.outputs.contains(&o);
    let mut w = Writer { dir: out, created, files: Vec::new() };
    let mut entries: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| entries.push((k.to_string(), v));

    let policy = p.policy();
    put("derived.talbot_length_m", format!("{:.16e}", p.talbot_length));
    put("derived.wavelength_m", format!("{:.16e}", beam.wavelength));
    put("derived.wavenumber_per_m", format!("{:.16e}", beam.wavenumber));
    put("derived.speed_m_per_s", format!("{:.16e}", beam.speed));
    put("derived.momentum_mismatch", format!("{:.16e}", beam.momentum_mismatch()));
    put("derived.y_m", list(&p.ys));
    put("derived.t_s", list(&p.ys.iter().map(|&y| field.t_of_y(y)).collect::<Vec<_>>()));
    put("numerics.k_points", sp.k_grid.len().to_string());
    put("numerics.dk_per_m", format!("{:.16e}", sp.dk));
    put("numerics.k_max_per_m", format!("{:.16e}", sp.k_max));
    put("numerics.tail_mass", format!("{:.16e}", sp.tail_mass));
    put("numerics.profile_points", s.n_grid.to_string());
    put("numerics.profile_half_width_m", list(&p.ys.iter().map(|&y| default_half_width(field, y)).collect::<Vec<_>>()));
    put("numerics.t_start_s", format!("{:.16e}", policy.t_start));
    put("numerics.dt_s", format!("{:.16e}", policy.dt));
    put("numerics.ramp", format!("{:.16e}", policy.ramp));
    put("numerics.t_fresnel_s", format!("{:.16e}", policy.t_fresnel));
    put("numerics.max_halvings", policy.max_halvings.to_string());
    put("numerics.max_stretch", format!("{:.16e}", policy.max_stretch));
    put("numerics.group_gap_m", format!("{:.16e}", policy.group_gap));
    put("numerics.epsilon_node", format!("{:.16e}", VelocityField::new(field).epsilon_node));
    put("tolerance.speed_relative", format!("{:.16e}", s.speed_tolerance));

    if wants(Output::Spectrum) {
        let mut csv = w.create("spectrum.csv", &header(&["k_per_m", "c_re", "c_im", "density_m"]))?;
        for (k, c) in sp.k_grid.iter().zip(&sp.c_values) {
            csv.row(&[F(*k), F(c.re), F(c.im), F(c.norm_sqr())])?;
        }
        w.finish(csv)?;
    }

    if wants(Output::Intensity) || wants(Output::Md) {
        let profiles = p.ys.iter().map(|&y| p.profile(y, s.n_grid)).collect::<Result<Vec<_>>>()?;
        let mds = profiles
            .iter()
            .map(|pr| arrival_probability(sp, g, beam, field.t_of_y(pr.y), &pr.x_grid))
            .collect::<grating_core::Result<Vec<_>>>()?;
        if wants(Output::Intensity) {
            let cols = header(&["y_m", "x_m", "density_per_m", "md_density_per_m"]);
            let mut csv = w.create("intensity.csv", &cols)?;
            for (pr, md) in profiles.iter().zip(&mds) {
                for i in 0..pr.x_grid.len() {
                    csv.row(&[F(pr.y), F(pr.x_grid[i]), F(pr.density[i]), F(md.total[i])])?;
                }
            }
            w.finish(csv)?;
        }
        if wants(Output::Md) {
            let mut cols = header(&["y_m", "x_m", "p_total_per_m"]);
            cols.extend((1..=g.n).map(|i| format!("p_slit_{i}")));
            let mut csv = w.create("md.csv", &cols)?;
            for md in &mds {
                for i in 0..md.x_grid.len() {
                    let mut row = vec![F(md.y), F(md.x_grid[i]), F(md.total[i])];
                    row.extend(md.per_slit.iter().map(|ps| F(ps[i])));
                    csv.row(&row)?;
                }
            }
            w.finish(csv)?;
            let cols = header(&["y_m", "y_per_talbot", "l1_md_vs_quantum", "md_mass"]);
            let mut csv = w.create("md_compare.csv", &cols)?;
            for (pr, md) in profiles.iter().zip(&mds) {
                let l1 = distribution_distance(&md.total, &pr.density, pr.x_grid[1] - pr.x_grid[0]);
                csv.row(&[F(pr.y), F(pr.y / p.talbot_length), F(l1), F(md.mass())])?;
            }
            w.finish(csv)?;
        }
    }

    if wants(Output::Carpet) {
        let y_max = p.y_max();
        let grid = symmetric_grid(default_half_width(field, y_max), s.carpet_points);
        let mut csv = w.create("carpet.csv", &header(&["y_m", "x_m", "density_per_m"]))?;
        for i in 1..=s.carpet_rows {
            let y = y_max * i as f64 / s.carpet_rows as f64;
            let pr = intensity_profile(field, y, &grid)?;
            for (x, rho) in grid.iter().zip(&pr.density) {
                csv.row(&[F(y), F(*x), F(*rho)])?;
            }
        }
        w.finish(csv)?;
    }

    if wants(Output::Trajectories) || wants(Output::Momentum) {
        let vf = VelocityField::new(field);
        let ensemble = p.ensemble(&vf, wants(Output::Trajectories))?;
        put("result.trajectories", ensemble.records.len().to_string());
        put("result.node_stalled", ensemble.stalled_count().to_string());
        put("result.order_violations", ensemble.order_violations().to_string());
        if wants(Output::Trajectories) {
            let cols = header(&["traj_id", "x0_m", "t_s", "y_m", "x_m", "vx_m_per_s"]);
            let mut csv = w.create("trajectories.csv", &cols)?;
            for (id, r) in ensemble.records.iter().enumerate() {
                for smp in &r.samples {
                    csv.row(&[U(id), F(r.x0), F(smp.t), F(ensemble.y_of_t(smp.t)), F(smp.x), F(smp.vx)])?;
                }
            }
            w.finish(csv)?;
        }
        if wants(Output::Momentum) {
            let bins = Bins::momentum(s.bins, DEFAULT_HALF_RANGE_ORDERS, g.d)?;
            let quantum = quantum_bin_density(sp, &bins);
            let cols = header(&["y_m", "bin_lo_kgm_s", "bin_hi_kgm_s", "bin_center_kgm_s", "bohm_density", "quantum_density"]);
            let mut csv = w.create("momentum.csv", &cols)?;
            let mut summary = Vec::new();
            for &y in &p.ys {
                let h = bohm_momentum_histogram(&ensemble, &vf, y, &bins)?;
                for (i, c) in bins.centers().iter().enumerate() {
                    csv.row(&[F(y), F(bins.edges[i]), F(bins.edges[i + 1]), F(*c), F(h.density[i]), F(quantum[i])])?;
                }
                let l1 = distribution_distance(&h.density, &quantum, bins.width());
                summary.push((y, l1, h.sample_count, h.excluded, h.outside));
            }
            w.finish(csv)?;
            let cols = header(&["y_m", "y_per_talbot", "l1_bohm_vs_quantum", "samples", "excluded", "outside"]);
            let mut csv = w.create("momentum_summary.csv", &cols)?;
            for (y, l1, n, ex, outside) in summary {
                csv.row(&[F(y), F(y / p.talbot_length), F(l1), U(n), U(ex), U(outside)])?;
            }
            w.finish(csv)?;
            put("numerics.momentum_half_range_kgm_s", format!("{:.16e}", DEFAULT_HALF_RANGE_ORDERS * 2.0 * std::f64::consts::PI * HBAR / g.d));
        }
    }

    let mut text = String::from("# grating run manifest\n");
    for line in s.to_config_string().lines() {
        text.push_str("scenario.");
        text.push_str(line);
        text.push('\n');
    }
    for (k, v) in &entries {
        text.push_str(&format!("{k} = {v}\n"));
    }
    text.push_str(&format!("version.grating_cli = {}\n", env!("CARGO_PKG_VERSION")));
    for (name, digest) in &w.files {
        text.push_str(&format!("output.{name}.sha256 = {digest}\n"));
    }
    let manifest = out.join("manifest.txt");
    w.created.push(manifest.clone());
    fs::write(&manifest, text).with_context(|| format!("writing {}", manifest.display()))?;
    Ok(RunReport { out_dir: out.to_path_buf(), files: w.files, manifest, entries })
}
