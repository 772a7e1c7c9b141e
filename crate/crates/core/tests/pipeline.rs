use cfs_core::models::{Conditioning, Integrand, Model, ModelKind, ModelSpec, Profile};
use cfs_core::smallball::{estimate_smallball, timechanged_smallball, SmallBallQuery};
use cfs_core::suite::{
    counterexample_models, default_models, parse_report_json, render_report, run_battery, QueryTemplate, ReportFormat,
};
use cfs_core::{Path, RngStream, TimeGrid};

fn positive_models() -> Vec<ModelSpec> {
    default_models()
        .into_iter()
        .chain(counterexample_models())
        .map(|m| if m.tag().is_price() { m.natural_space() } else { m })
        .filter(|m| m.positive_output())
        .collect()
}

#[test]
fn positive_models_stay_positive_on_paths_and_continuations() {
    let grid = TimeGrid::new(0.0, 1.0, 128).unwrap();
    let specs = positive_models();
    assert!(specs.len() >= 4);
    for spec in specs {
        let label = spec.label();
        let model = Model::new(spec, grid).unwrap();
        for seed in 0..40 {
            let real = model.simulate(&mut RngStream::new(seed, 0)).unwrap();
            assert!(real.z().values().iter().all(|&z| z > 0.0), "{label} seed {seed}");
            for t_index in [0, 64, 127] {
                let ctx = real.context_at(t_index).unwrap();
                for mode in [Conditioning::FixedDrivers, Conditioning::RedrawDrivers] {
                    let tail = model.continue_conditional(&ctx, mode, &mut RngStream::new(seed, 1)).unwrap();
                    assert!(tail.values().iter().all(|&z| z > 0.0), "{label} seed {seed} t {t_index} {mode:?}");
                }
            }
        }
    }
}

#[test]
fn continuations_start_from_the_observed_value() {
    let grid = TimeGrid::new(0.0, 1.0, 64).unwrap();
    for spec in default_models().into_iter().chain(counterexample_models()) {
        let label = spec.label();
        let model = Model::new(spec, grid).unwrap();
        let real = model.simulate(&mut RngStream::new(11, 0)).unwrap();
        for t_index in [0, 17, 63] {
            let ctx = real.context_at(t_index).unwrap();
            assert_eq!(ctx.restart_value(), real.z().value(t_index), "{label}");
            for mode in [Conditioning::FixedDrivers, Conditioning::RedrawDrivers] {
                let tail = model.continue_conditional(&ctx, mode, &mut RngStream::new(11, 2)).unwrap();
                assert_eq!(tail.first(), ctx.restart_value(), "{label} {mode:?}");
                assert_eq!(tail.values().len(), grid.len() - t_index);
            }
        }
    }
}

#[test]
fn time_change_matches_direct_wiener_integral_for_several_clocks() {
    let grid = TimeGrid::new(0.0, 1.0, 256).unwrap();
    let profiles = [
        Profile::Constant(0.8),
        Profile::Affine { intercept: 0.5, slope: 1.5 },
        Profile::Sine { base: 1.0, amplitude: 0.5, frequency: 1.0 },
    ];
    let reps = 40_000;
    for (i, profile) in profiles.into_iter().enumerate() {
        let spec = ModelSpec::new(ModelKind::WienerIntegral {
            drift: Profile::Constant(0.0),
            integrand: Integrand::Deterministic(profile),
        });
        let model = Model::new(spec, grid).unwrap();
        let ctx = model.simulate(&mut RngStream::new(3, i as u64)).unwrap().context_at(0).unwrap();
        let target = Path::from_fn(ctx.tail_grid(), |t| 0.3 * t).unwrap();
        let q = SmallBallQuery::new(0, target.clone(), 0.6).unwrap();
        let direct = estimate_smallball(&model, &ctx, &q, reps, &RngStream::new(3, 10 + i as u64)).unwrap();
        let k = Path::from_fn(grid, |t| profile.eval(t)).unwrap();
        let changed = timechanged_smallball(&k, &target, 0.6, reps, &RngStream::new(3, 20 + i as u64)).unwrap();
        assert!(direct.hits > 100, "{profile:?}");
        assert!(direct.overlaps(&changed), "{profile:?}: {} vs {}", direct.p_hat, changed.p_hat);
    }
}

#[test]
fn json_report_round_trips_to_identical_files() {
    let grid = TimeGrid::new(0.0, 1.0, 64).unwrap();
    let report = run_battery(&counterexample_models(), grid, &QueryTemplate::counterexamples(), 1000, 4).unwrap();
    let json = render_report(&report, ReportFormat::Json);
    let parsed = parse_report_json(&json).unwrap();
    for format in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Plotdata] {
        assert_eq!(render_report(&parsed, format), render_report(&report, format), "{format:?}");
    }
    assert_eq!(parsed.models, report.models);
}

#[test]
fn battery_is_identical_across_thread_pools() {
    let grid = TimeGrid::new(0.0, 1.0, 64).unwrap();
    let models = default_models();
    let template = QueryTemplate::default();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_battery(&models, grid, &template, 1000, 21).unwrap())
    };
    let (a, b) = (run(1), run(5));
    assert_eq!(a.models, b.models);
    assert_eq!(render_report(&a, ReportFormat::Csv), render_report(&b, ReportFormat::Csv));
}
