//! Figure presets carrying the published caption parameters.

use grating_core::bohm::Sampling;

use crate::config::{Distance, LaunchRegion, Output, Scenario};

pub const NAMES: [&str; 5] = ["fig1", "fig2", "fig3", "fig5", "fig6"];

/// n = 5, d = 0.1 um, delta = 0.05 um, m = 1.19e-24 kg, v = 220 m/s, lambda = 2.53e-12 m.
fn five_slits(name: &str) -> Scenario {
    let mut s = Scenario::base(name, 1.19e-24, 5, 0.1e-6, 0.05e-6);
    s.wavelength = Some(2.53e-12);
    s.speed = Some(220.0);
    s
}

/// Ronchi grating: n = 30, d = 0.2 um, delta = 0.1 um, k = (pi/8) 1e12 1/m,
/// m = 3.8189e-26 kg, v = 1084 m/s.
fn ronchi(name: &str) -> Scenario {
    let mut s = Scenario::base(name, 3.8189e-26, 30, 0.2e-6, 0.1e-6);
    s.wavenumber = Some(std::f64::consts::PI / 8.0 * 1e12);
    s.speed = Some(1084.0);
    s
}

pub fn preset(name: &str) -> Option<Scenario> {
    let s = match name {
        "fig1" => {
            let mut s = five_slits(name);
            s.y_targets = vec![Distance::Talbot(1.25)];
            s.outputs = vec![Output::Intensity, Output::Trajectories];
            s
        }
        "fig2" => {
            let mut s = five_slits(name);
            s.y_targets = vec![Distance::Talbot(12.5)];
            s.outputs = vec![Output::Intensity, Output::Trajectories];
            s
        }
        "fig3" => {
            let mut s = ronchi(name);
            s.y_targets = vec![Distance::Talbot(2.0)];
            s.launch = LaunchRegion::Half;
            s.outputs = vec![Output::Trajectories, Output::Carpet];
            s
        }
        "fig5" => {
            let mut s = five_slits(name);
            s.y_targets = [1.0 / 40.0, 0.25, 1.25, 12.5].map(Distance::Talbot).to_vec();
            s.n_traj = 10_000;
            s.sampling = Sampling::Random;
            s.outputs = vec![Output::Momentum];
            s
        }
        "fig6" => {
            let mut s = ronchi(name);
            s.y_targets = [0.25, 0.5, 0.75, 1.0].map(Distance::Talbot).to_vec();
            s.n_traj = 10_000;
            s.sampling = Sampling::Random;
            s.outputs = vec![Output::Momentum];
            s
        }
        _ => return None,
    };
    Some(s)
}

pub fn presets() -> Vec<Scenario> {
    NAMES.iter().filter_map(|n| preset(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use grating_core::beamgrating::talbot_length;

    #[test]
    fn presets_are_valid_and_round_trip() {
        for s in presets() {
            s.validate().unwrap();
            assert_eq!(Scenario::parse(&s.to_config_string()).unwrap(), s);
        }
    }

    #[test]
    fn fig1_talbot_length() {
        let s = preset("fig1").unwrap();
        let lt = talbot_length(&s.grating().unwrap(), &s.beam().unwrap());
        assert!((lt - 3.953e-3).abs() < 5e-7, "{lt}");
    }

    #[test]
    fn caption_distances() {
        let lt = [1.0 / 40.0, 0.25, 1.25, 12.5].map(Distance::Talbot).to_vec();
        assert_eq!(preset("fig5").unwrap().y_targets, lt);
        let f6 = preset("fig6").unwrap();
        assert_eq!(f6.y_targets, [0.25, 0.5, 0.75, 1.0].map(Distance::Talbot).to_vec());
        assert_eq!(f6.n, 30);
        assert_eq!(preset("fig2").unwrap().y_targets, vec![Distance::Talbot(12.5)]);
        assert!(preset("fig4").is_none());
    }

    #[test]
    fn ronchi_speed_matches_wavenumber() {
        let b = preset("fig3").unwrap().beam().unwrap();
        assert!((b.speed - 1084.0).abs() / 1084.0 < 1e-3);
    }
}
