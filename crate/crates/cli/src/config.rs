//! Flat `key = value unit` scenario files.

use std::collections::BTreeMap;
use std::fmt;

use grating_core::beamgrating::{GratingSpec, ParticleBeam, Window};
use grating_core::bohm::Sampling;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn at(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    match line {
        Some(line) => ConfigError::Line { line, message: message.into() },
        None => ConfigError::Invalid(message.into()),
    }
}

/// A distance behind the grating, in metres or in Talbot lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Meters(f64),
    Talbot(f64),
}

impl Distance {
    pub fn resolve(&self, talbot_length: f64) -> f64 {
        match *self {
            Distance::Meters(y) => y,
            Distance::Talbot(f) => f * talbot_length,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distance::Meters(y) => write!(f, "{} m", num(y)),
            Distance::Talbot(v) => write!(f, "{} LT", num(v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    Spectrum,
    Intensity,
    Trajectories,
    Momentum,
    Md,
    Carpet,
}

impl Output {
    pub const ALL: [Output; 6] =
        [Output::Spectrum, Output::Intensity, Output::Trajectories, Output::Momentum, Output::Md, Output::Carpet];

    pub fn name(self) -> &'static str {
        match self {
            Output::Spectrum => "spectrum",
            Output::Intensity => "intensity",
            Output::Trajectories => "trajectories",
            Output::Momentum => "momentum",
            Output::Md => "md",
            Output::Carpet => "carpet",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Square,
    Gaussian,
}

/// Which launch points are kept: all of them, or those with `x0 >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaunchRegion {
    Full,
    Half,
}

/// Every parameter of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub mass: f64,
    pub wavelength: Option<f64>,
    pub wavenumber: Option<f64>,
    pub speed: Option<f64>,
    /// Allowed relative mismatch of a stated speed against `hbar k / m`.
    pub speed_tolerance: f64,
    pub n: usize,
    pub d: f64,
    pub delta: f64,
    pub window: WindowKind,
    pub a: Option<f64>,
    pub centered: bool,
    pub y_targets: Vec<Distance>,
    pub n_traj: usize,
    pub n_grid: usize,
    pub k_points: usize,
    pub bins: usize,
    pub seed: u64,
    pub steps_per_lt: usize,
    pub sampling: Sampling,
    pub launch: LaunchRegion,
    pub carpet_rows: usize,
    pub carpet_points: usize,
    pub outputs: Vec<Output>,
}

const KEYS: [&str; 24] = [
    "name",
    "mass",
    "wavelength",
    "wavenumber",
    "speed",
    "speed_tolerance",
    "n",
    "d",
    "delta",
    "window",
    "a",
    "centered",
    "y",
    "n_traj",
    "n_grid",
    "k_points",
    "bins",
    "seed",
    "steps_per_lt",
    "sampling",
    "launch",
    "carpet_rows",
    "carpet_points",
    "outputs",
];

impl Scenario {
    /// Defaults for everything except the beam and grating.
    pub fn base(name: &str, mass: f64, n: usize, d: f64, delta: f64) -> Self {
        Self {
            name: name.to_string(),
            mass,
            wavelength: None,
            wavenumber: None,
            speed: None,
            speed_tolerance: 1e-3,
            n,
            d,
            delta,
            window: WindowKind::Square,
            a: None,
            centered: true,
            y_targets: vec![Distance::Talbot(1.25)],
            n_traj: 200,
            n_grid: 4096,
            k_points: 16385,
            bins: 81,
            seed: 1,
            steps_per_lt: 4000,
            sampling: Sampling::Equispaced,
            launch: LaunchRegion::Full,
            carpet_rows: 200,
            carpet_points: 1024,
            outputs: vec![Output::Intensity],
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| at(Some(line), format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            let value = value.trim();
            let known = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| at(Some(line), format!("unknown key `{key}`")))?;
            if value.is_empty() {
                return Err(at(Some(line), format!("`{key}` has no value")));
            }
            if let Some((first, _)) = entries.insert(known, (line, value)) {
                return Err(at(Some(line), format!("duplicate key `{key}` (first set on line {first})")));
            }
        }
        let line_of = |k: &str| entries.get(k).map(|e| e.0);
        let required = |k: &str| -> Result<(usize, &str), ConfigError> {
            entries.get(k).copied().ok_or_else(|| ConfigError::Invalid(format!("missing required key `{k}`")))
        };

        let (l, v) = required("mass")?;
        let mut s = Scenario::base("custom", quantity(v, &MASS, l)?, 1, 1.0, 0.5);
        let (l, v) = required("n")?;
        s.n = count(v, l)?;
        let (l, v) = required("d")?;
        s.d = quantity(v, &LENGTH, l)?;
        let (l, v) = required("delta")?;
        s.delta = quantity(v, &LENGTH, l)?;

        for (&key, &(l, v)) in &entries {
            match key {
                "name" => s.name = v.to_string(),
                "wavelength" => s.wavelength = Some(quantity(v, &LENGTH, l)?),
                "wavenumber" => s.wavenumber = Some(quantity(v, &WAVENUMBER, l)?),
                "speed" => s.speed = Some(quantity(v, &SPEED, l)?),
                "speed_tolerance" => s.speed_tolerance = quantity(v, &[("", 0)], l)?,
                "window" => {
                    s.window = match v {
                        "square" => WindowKind::Square,
                        "gaussian" => WindowKind::Gaussian,
                        _ => return Err(at(Some(l), format!("window must be `square` or `gaussian`, got `{v}`"))),
                    }
                }
                "a" => s.a = Some(quantity(v, &LENGTH, l)?),
                "centered" => {
                    s.centered = match v {
                        "true" => true,
                        "false" => false,
                        _ => return Err(at(Some(l), format!("centered must be `true` or `false`, got `{v}`"))),
                    }
                }
                "y" => s.y_targets = parse_distances(v).map_err(|m| at(Some(l), m))?,
                "n_traj" => s.n_traj = count(v, l)?,
                "n_grid" => s.n_grid = count(v, l)?,
                "k_points" => s.k_points = count(v, l)?,
                "bins" => s.bins = count(v, l)?,
                "seed" => s.seed = v.parse().map_err(|_| at(Some(l), format!("seed must be an unsigned integer, got `{v}`")))?,
                "steps_per_lt" => s.steps_per_lt = count(v, l)?,
                "sampling" => {
                    s.sampling = match v {
                        "equispaced" => Sampling::Equispaced,
                        "random" => Sampling::Random,
                        _ => return Err(at(Some(l), format!("sampling must be `equispaced` or `random`, got `{v}`"))),
                    }
                }
                "launch" => {
                    s.launch = match v {
                        "full" => LaunchRegion::Full,
                        "half" => LaunchRegion::Half,
                        _ => return Err(at(Some(l), format!("launch must be `full` or `half`, got `{v}`"))),
                    }
                }
                "carpet_rows" => s.carpet_rows = count(v, l)?,
                "carpet_points" => s.carpet_points = count(v, l)?,
                "outputs" => {
                    let mut outs = Vec::new();
                    for item in v.split(',').map(str::trim) {
                        let o = Output::parse(item).ok_or_else(|| at(Some(l), format!("unknown output `{item}`")))?;
                        if !outs.contains(&o) {
                            outs.push(o);
                        }
                    }
                    outs.sort();
                    s.outputs = outs;
                }
                _ => {}
            }
        }
        s.check(&line_of)?;
        Ok(s)
    }

    /// Rejects inconsistent or non-physical settings.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.check(&|_| None)
    }

    fn check(&self, line_of: &dyn Fn(&str) -> Option<usize>) -> Result<(), ConfigError> {
        let pos = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(at(line_of(key), format!("`{key}` must be positive and finite, got {v}")))
            }
        };
        pos("mass", self.mass)?;
        pos("d", self.d)?;
        pos("delta", self.delta)?;
        pos("speed_tolerance", self.speed_tolerance)?;
        if self.n == 0 {
            return Err(at(line_of("n"), "`n` must be at least 1"));
        }
        if self.n > 1 && self.delta >= self.d {
            return Err(at(line_of("delta"), format!("slit width {} m must be smaller than the period {} m", self.delta, self.d)));
        }
        if self.wavelength.is_some() && self.wavenumber.is_some() {
            return Err(at(line_of("wavenumber"), "give either `wavelength` or `wavenumber`, not both"));
        }
        if self.wavelength.is_none() && self.wavenumber.is_none() && self.speed.is_none() {
            return Err(ConfigError::Invalid("one of `wavelength`, `wavenumber` or `speed` is required".into()));
        }
        for (k, v) in [("wavelength", self.wavelength), ("wavenumber", self.wavenumber), ("speed", self.speed), ("a", self.a)] {
            if let Some(v) = v {
                pos(k, v)?;
            }
        }
        match (self.window, self.a) {
            (WindowKind::Gaussian, None) => {
                return Err(at(line_of("window"), "a Gaussian window needs the width `a`"));
            }
            (WindowKind::Square, Some(_)) => {
                return Err(at(line_of("a"), "`a` applies to Gaussian windows only"));
            }
            _ => {}
        }
        if self.y_targets.is_empty() {
            return Err(at(line_of("y"), "`y` needs at least one distance"));
        }
        for y in &self.y_targets {
            let v = match *y {
                Distance::Meters(v) | Distance::Talbot(v) => v,
            };
            pos("y", v)?;
        }
        if self.k_points < 3 || self.k_points % 2 == 0 {
            return Err(at(line_of("k_points"), format!("`k_points` must be odd and at least 3, got {}", self.k_points)));
        }
        for (k, v, min) in [
            ("n_traj", self.n_traj, 2),
            ("n_grid", self.n_grid, 2),
            ("bins", self.bins, 1),
            ("steps_per_lt", self.steps_per_lt, 1),
            ("carpet_rows", self.carpet_rows, 2),
            ("carpet_points", self.carpet_points, 2),
        ] {
            if v < min {
                return Err(at(line_of(k), format!("`{k}` must be at least {min}, got {v}")));
            }
        }
        if self.outputs.is_empty() {
            return Err(at(line_of("outputs"), "`outputs` needs at least one entry"));
        }
        self.beam().map_err(|e| {
            let key = if self.speed.is_some() && (self.wavelength.is_some() || self.wavenumber.is_some()) { "speed" } else { "mass" };
            at(line_of(key), e.to_string())
        })?;
        self.grating().map_err(|e| at(line_of("n"), e.to_string()))?;
        Ok(())
    }

    /// The beam; a stated speed is checked against `hbar k / m`.
    pub fn beam(&self) -> grating_core::Result<ParticleBeam> {
        let beam = match (self.wavelength, self.wavenumber) {
            (Some(l), _) => ParticleBeam::from_wavelength(self.mass, l)?,
            (None, Some(k)) => ParticleBeam::from_wavenumber(self.mass, k)?,
            (None, None) => {
                return ParticleBeam::from_speed(self.mass, self.speed.unwrap_or(f64::NAN));
            }
        };
        if let Some(v) = self.speed {
            beam.check_speed(v, self.speed_tolerance)?;
        }
        Ok(beam)
    }

    pub fn grating(&self) -> grating_core::Result<GratingSpec> {
        let window = match self.window {
            WindowKind::Square => Window::Square,
            WindowKind::Gaussian => Window::Gaussian { a: self.a.unwrap_or(f64::NAN) },
        };
        let g = GratingSpec::new(self.n, self.d, self.delta, window)?;
        Ok(if self.centered { g } else { g.uncentered() })
    }

    /// Canonical text form; parsing it gives back the same scenario.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("name", self.name.clone());
        put("mass", format!("{} kg", num(self.mass)));
        if let Some(v) = self.wavelength {
            put("wavelength", format!("{} m", num(v)));
        }
        if let Some(v) = self.wavenumber {
            put("wavenumber", format!("{} 1/m", num(v)));
        }
        if let Some(v) = self.speed {
            put("speed", format!("{} m/s", num(v)));
        }
        put("speed_tolerance", num(self.speed_tolerance));
        put("n", self.n.to_string());
        put("d", format!("{} m", num(self.d)));
        put("delta", format!("{} m", num(self.delta)));
        put(
            "window",
            match self.window {
                WindowKind::Square => "square".into(),
                WindowKind::Gaussian => "gaussian".into(),
            },
        );
        if let Some(a) = self.a {
            put("a", format!("{} m", num(a)));
        }
        put("centered", self.centered.to_string());
        put("y", self.y_targets.iter().map(|y| y.to_string()).collect::<Vec<_>>().join(", "));
        put("n_traj", self.n_traj.to_string());
        put("n_grid", self.n_grid.to_string());
        put("k_points", self.k_points.to_string());
        put("bins", self.bins.to_string());
        put("seed", self.seed.to_string());
        put("steps_per_lt", self.steps_per_lt.to_string());
        put(
            "sampling",
            match self.sampling {
                Sampling::Equispaced => "equispaced".into(),
                Sampling::Random => "random".into(),
            },
        );
        put(
            "launch",
            match self.launch {
                LaunchRegion::Full => "full".into(),
                LaunchRegion::Half => "half".into(),
            },
        );
        put("carpet_rows", self.carpet_rows.to_string());
        put("carpet_points", self.carpet_points.to_string());
        put("outputs", self.outputs.iter().map(|o| o.name()).collect::<Vec<_>>().join(", "));
        out
    }
}

/// Shortest text that parses back to the same `f64`.
fn num(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e6) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

type Units = [(&'static str, i32)];

const LENGTH: [(&str, i32); 6] = [("m", 0), ("mm", -3), ("um", -6), ("µm", -6), ("nm", -9), ("pm", -12)];
const MASS: [(&str, i32); 2] = [("kg", 0), ("g", -3)];
const SPEED: [(&str, i32); 2] = [("m/s", 0), ("km/s", 3)];
const WAVENUMBER: [(&str, i32); 3] = [("1/m", 0), ("1/um", 6), ("1/nm", 9)];

/// Splits `"0.1 um"` or `"0.1um"` into number and unit text.
fn split_unit(v: &str) -> (&str, &str) {
    let v = v.trim();
    if let Some((n, u)) = v.split_once(char::is_whitespace) {
        return (n.trim(), u.trim());
    }
    let cut = v
        .char_indices()
        .find(|&(i, c)| {
            c.is_alphabetic() && !((c == 'e' || c == 'E') && v[i + c.len_utf8()..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+'))
        })
        .map(|(i, _)| i)
        .unwrap_or(v.len());
    (&v[..cut], &v[cut..])
}

/// Parses `number unit` with the unit applied as a decimal exponent shift, so the
/// result is the correctly rounded value of the written quantity.
fn scaled(number: &str, shift: i32) -> Option<f64> {
    let (mantissa, exp) = match number.find(['e', 'E']) {
        Some(i) => (&number[..i], number[i + 1..].parse::<i32>().ok()?),
        None => (number, 0),
    };
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", exp + shift).parse().ok()
}

fn quantity(v: &str, units: &Units, line: usize) -> Result<f64, ConfigError> {
    let (number, unit) = split_unit(v);
    let Some(&(_, shift)) = units.iter().find(|(u, _)| *u == unit) else {
        let known: Vec<&str> = units.iter().map(|u| u.0).filter(|u| !u.is_empty()).collect();
        return Err(at(Some(line), format!("unknown unit `{unit}` in `{v}` (expected one of {})", known.join(", "))));
    };
    scaled(number, shift).ok_or_else(|| at(Some(line), format!("`{number}` is not a number")))
}

fn count(v: &str, line: usize) -> Result<usize, ConfigError> {
    v.parse().map_err(|_| at(Some(line), format!("expected a non-negative integer, got `{v}`")))
}

/// Parses `"0.25 LT, 1e-3 m"`.
pub fn parse_distances(v: &str) -> Result<Vec<Distance>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (number, unit) = split_unit(item);
            if unit == "LT" {
                return number.parse().map(Distance::Talbot).map_err(|_| format!("`{number}` is not a number"));
            }
            let Some(&(_, shift)) = LENGTH.iter().find(|(u, _)| *u == unit) else {
                return Err(format!("unknown distance unit `{unit}` in `{item}` (expected LT, m, mm, um, nm or pm)"));
            };
            scaled(number, shift).map(Distance::Meters).ok_or_else(|| format!("`{number}` is not a number"))
        })
        .collect()
}
