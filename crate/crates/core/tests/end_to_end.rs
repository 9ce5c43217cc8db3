use homfit_core::analysis::{g2_from_fit, visibility_cluster, visibility_from_fit, visibility_period, Normalization};
use homfit_core::estimation::{compare_fitters, fit, fit_irf, FitOptions, ModelSpec, PeakLayout, Pipeline};
use homfit_core::model::{voigt_bin_mass, InterferometerMode};
use homfit_core::simulator::{peak_areas_by_enumeration, sample_poisson, simulate_hbt, simulate_hom, SimulationConfig};
use homfit_core::{BeamSplitter, Histogram, TimeGrid, VoigtIrf};
use proptest::prelude::*;

fn config(v: f64, counts: f64, seed: u64) -> SimulationConfig {
    SimulationConfig {
        mode: InterferometerMode::Cluster,
        visibility: v,
        bs: BeamSplitter::new(0.46, 0.54).unwrap(),
        first_split: 0.5,
        decay_rate: 2.3,
        irf: VoigtIrf::kernel(0.15, 0.0).unwrap(),
        laser_period: 13.16,
        mz_delay: 2.7,
        integration_scale: counts,
        cw_fraction: 0.0,
        cw_rate: 3.1,
        blinking: None,
        g2_zero: 0.0,
        flat_background: 1.0,
        time_shift: 0.0,
        grid: TimeGrid::spanning(-20.0, 20.0, 0.05).unwrap(),
        seed,
    }
}

fn spec(c: &SimulationConfig) -> ModelSpec {
    ModelSpec::exp_irf(c.mode, c.bs, c.laser_period, c.mz_delay, c.decay_rate, c.irf)
}

fn opts(n_starts: usize) -> FitOptions {
    FitOptions {
        n_starts,
        seed: 9,
        ..Default::default()
    }
}

#[test]
fn fit_recovers_simulated_visibility() {
    let c = config(0.8, 1e6, 1);
    let h = simulate_hom(&c).unwrap().histogram;
    let s = spec(&c);
    let f = fit(&s, &h, &opts(10)).unwrap();
    let v = visibility_from_fit(&s.bind(h.grid()).unwrap(), &f).unwrap();
    assert!((v.v - 0.8).abs() < 2.0 * v.uncertainty.max(1e-3), "{} ± {}", v.v, v.uncertainty);
    assert!(f.converged);
}

#[test]
fn period_mode_round_trip() {
    let c = SimulationConfig {
        mode: InterferometerMode::Period,
        mz_delay: 13.16,
        grid: TimeGrid::spanning(-60.0, 60.0, 0.05).unwrap(),
        ..config(0.5, 4e5, 2)
    };
    let h = simulate_hom(&c).unwrap().histogram;
    let s = spec(&c);
    let f = fit(&s, &h, &opts(8)).unwrap();
    let v = visibility_from_fit(&s.bind(h.grid()).unwrap(), &f).unwrap();
    assert!((v.v - 0.5).abs() < 0.05, "{}", v.v);
}

#[test]
fn fit_is_independent_of_thread_count() {
    let c = config(0.62, 2e4, 3);
    let h = simulate_hom(&c).unwrap().histogram;
    let s = spec(&c);
    let run = |n| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| fit(&s, &h, &opts(12)).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
}

#[test]
fn simulation_is_seeded() {
    let c = config(0.62, 2e4, 4);
    assert_eq!(simulate_hom(&c).unwrap().histogram, simulate_hom(&c).unwrap().histogram);
    let other = config(0.62, 2e4, 5);
    assert_ne!(simulate_hom(&c).unwrap().histogram, simulate_hom(&other).unwrap().histogram);
}

#[test]
fn irf_fit_recovers_voigt_widths() {
    let truth = VoigtIrf {
        center: 0.05,
        ..VoigtIrf::kernel(0.1, 0.03).unwrap()
    };
    let grid = TimeGrid::spanning(-4.0, 4.0, 0.01).unwrap();
    let w = grid.width;
    let expected: Vec<f64> =
        grid.centers().iter().map(|&t| 2e5 * voigt_bin_mass(t - 0.5 * w, t + 0.5 * w, &truth) + 0.3).collect();
    let h = Histogram::new(grid, sample_poisson(&expected, 11)).unwrap();
    let f = fit_irf(&h, &opts(8)).unwrap();
    assert!((f.irf.sigma - 0.1).abs() < 0.01, "{:?}", f.irf);
    assert!((f.irf.gamma - 0.03).abs() < 0.006, "{:?}", f.irf);
    assert!(f.chi2_voigt() < f.chi2_gaussian());
    assert_eq!(f.kernel.center, 0.0);
    assert_eq!(f.kernel.background, 0.0);
}

#[test]
fn hbt_nearest_peak_ratio() {
    let c = SimulationConfig {
        g2_zero: 0.1,
        grid: TimeGrid::spanning(-40.0, 40.0, 0.05).unwrap(),
        ..config(0.0, 2e5, 6)
    };
    let h = simulate_hbt(&c).unwrap().histogram;
    let mut s = spec(&c);
    s.layout = PeakLayout::Autocorrelation;
    let o = opts(8);
    let f = fit(&s, &h, &o).unwrap();
    let g = g2_from_fit(&s.bind(h.grid()).unwrap(), &f, Normalization::NearestPeaks, &o).unwrap();
    assert!((g.g2_zero - 0.1).abs() < 3.0 * g.sigma, "{} ± {}", g.g2_zero, g.sigma);
}

#[test]
fn comparison_table_has_every_pipeline() {
    let c = config(0.62, 2e4, 8);
    let h = simulate_hom(&c).unwrap().histogram;
    let rep = compare_fitters(&h, &spec(&c), &opts(4)).unwrap();
    for p in Pipeline::ALL {
        let row = rep.row(p).unwrap();
        assert!(row.visibility.is_finite() && row.chi2 > 0.0);
    }
    let mle = rep.row(Pipeline::ExpIrfMle).unwrap();
    let lor = rep.row(Pipeline::LorentzianLs).unwrap();
    assert!(lor.chi2 > mle.chi2);
    let text = rep.render();
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("Exp&IRF/MLE") && text.contains("Lorentzian/LS"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumerated_areas_invert_exactly(v in 0.0..=1.0f64, r in 0.3..=0.7f64) {
        let bs = BeamSplitter::new(r, 1.0 - r).unwrap();
        let c = peak_areas_by_enumeration(v, bs, 0.5, InterferometerMode::Cluster, 0, 3);
        let a1 = visibility_cluster(c.central(), c.get((0, 1)), c.get((0, -1)), bs).unwrap().v;
        prop_assert!((a1 - v).abs() < 1e-12);
        let p = peak_areas_by_enumeration(v, bs, 0.5, InterferometerMode::Period, 1, 4);
        let a2 = visibility_period(p.central(), p.far(), bs).unwrap().v;
        prop_assert!((a2 - v).abs() < 1e-12);
    }

    #[test]
    fn peak_counts_scale_with_integration(scale in 2e3..1e6f64) {
        // the flat background is a fixed count per bin; the peaks get the rest
        let base = simulate_hom(&config(0.62, 1e4, 0)).unwrap();
        let other = simulate_hom(&config(0.62, scale, 0)).unwrap();
        let bg = base.expected.len() as f64;
        let sum: f64 = other.expected.iter().sum();
        prop_assert!((sum - scale).abs() < 1e-9 * scale);
        let r = (scale - bg) / (1e4 - bg);
        for (a, b) in base.expected.iter().zip(&other.expected) {
            prop_assert!((b - 1.0 - r * (a - 1.0)).abs() <= 1e-9 * b);
        }
    }
}
