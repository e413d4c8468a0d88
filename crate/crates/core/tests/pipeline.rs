use grating_core::beamgrating::{default_k_grid, spectrum_analytic, talbot_length, GratingSpec, ParticleBeam};
use grating_core::bohm::{launch_ensemble, RecordPlan, Sampling, StepPolicy, VelocityField};
use grating_core::mdmodel::near_field_discrepancy;
use grating_core::momstats::{bohm_momentum_histogram, distribution_distance, quantum_bin_density, Bins};
use grating_core::wavefield::WaveField;

fn gaussian_field() -> (WaveField, f64) {
    let g = GratingSpec::gaussian(3, 0.1e-6, 0.05e-6, 0.0125e-6).unwrap();
    let beam = ParticleBeam::from_wavelength(1.19e-24, 2.53e-12).unwrap();
    let lt = talbot_length(&g, &beam);
    let spectrum = spectrum_analytic(&g, &default_k_grid(&g)).unwrap();
    (WaveField::new(g, beam, spectrum).unwrap(), lt)
}

#[test]
fn gaussian_ensemble_reaches_momentum_density() {
    let (f, lt) = gaussian_field();
    let vf = VelocityField::new(&f);
    let policy = StepPolicy::for_field(&f, 100);
    let (y_near, y_far) = (lt / 40.0, 200.0 * lt);
    let plan = RecordPlan { times: vec![f.t_of_y(y_near), f.t_of_y(y_far)], every_steps: None };
    let e = launch_ensemble(&vf, 600, Sampling::Equispaced, 3, f.t_of_y(y_far), &policy, &plan).unwrap();
    assert_eq!(e.order_violations(), 0);
    assert_eq!(e.stalled_count(), 0);
    let bins = Bins::momentum(41, 3.0, f.grating.d).unwrap();
    let quantum = quantum_bin_density(&f.spectrum, &bins);
    let l1 = |y: f64| {
        let h = bohm_momentum_histogram(&e, &vf, y, &bins).unwrap();
        assert!((h.mass() - 1.0).abs() < 1e-9);
        distribution_distance(&h.density, &quantum, bins.width())
    };
    let (near, far) = (l1(y_near), l1(y_far));
    assert!(far < 0.05, "{far}");
    assert!(near > 5.0 * far, "{near} {far}");
}

#[test]
fn gaussian_md_model_converges_in_far_field() {
    let (f, lt) = gaussian_field();
    let d: Vec<f64> = [12.5, 200.0, 2000.0]
        .iter()
        .map(|m| near_field_discrepancy(&f.spectrum, &f.grating, &f, m * lt).unwrap())
        .collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(d[2] < 0.01, "{d:?}");
}
