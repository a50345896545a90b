use deepesn::data::MackeyGlass;
use deepesn::experiment::{
    evaluate, fit_and_score, load_series, prepare_split, validation_fitness, validation_split, DatasetSpec, ModelSpec,
    SplitSpec,
};
use deepesn::init::Scale;
use deepesn::numerics::RngStream;
use deepesn::topology::TopologyKind;

fn small_split(horizon: usize, washout: usize) -> SplitSpec {
    SplitSpec { train_len: 600, test_len: 300, horizon, washout, normalize: true }
}

fn small_model() -> ModelSpec {
    ModelSpec { n_r: 30, ..ModelSpec::mackey_glass_wide() }
}

fn mg() -> DatasetSpec {
    DatasetSpec::MackeyGlass(MackeyGlass::default())
}

#[test]
fn identity_task_is_nearly_exact() {
    // the input row of the state matrix feeds the readout directly
    let split = prepare_split(&mg(), &small_split(0, 50)).unwrap();
    let spec = ModelSpec { beta: 1e-8, ..small_model() };
    let r = evaluate(&split, &spec, 1, 0).unwrap();
    assert!(r.rmse < 1e-3, "rmse {}", r.rmse);
}

#[test]
fn repeated_runs_are_identical() {
    let split = prepare_split(&mg(), &small_split(5, 50)).unwrap();
    let a = evaluate(&split, &small_model(), 1, 42).unwrap();
    let b = evaluate(&split, &small_model(), 1, 42).unwrap();
    assert_eq!(a, b);
    let c = evaluate(&split, &small_model(), 1, 43).unwrap();
    assert_ne!(a.per_run, c.per_run);
}

#[test]
fn per_run_metrics_do_not_depend_on_run_count() {
    let split = prepare_split(&mg(), &small_split(5, 50)).unwrap();
    let three = evaluate(&split, &small_model(), 3, 7).unwrap();
    let two = evaluate(&split, &small_model(), 2, 7).unwrap();
    assert_eq!(three.per_run[..2], two.per_run[..]);
}

#[test]
fn washout_changes_scoring_not_reservoir_weights() {
    let spec = small_model();
    let stream = RngStream::root(3).child("run").child(0);
    let a = fit_and_score(&prepare_split(&mg(), &small_split(5, 20)).unwrap(), &spec, &stream).unwrap();
    let b = fit_and_score(&prepare_split(&mg(), &small_split(5, 80)).unwrap(), &spec, &stream).unwrap();
    assert_eq!(a.model.reservoirs(), b.model.reservoirs());
    assert_eq!(a.target.len(), 280);
    assert_eq!(b.target.len(), 220);
    assert_eq!(a.target[60..], b.target[..]);
}

#[test]
fn every_topology_trains() {
    let split = prepare_split(&mg(), &small_split(10, 50)).unwrap();
    for topology in [
        TopologyKind::Wide(2),
        TopologyKind::Layered(3),
        TopologyKind::CrissCross(2),
        TopologyKind::WideLayered { width: 3, depth: 2 },
    ] {
        let spec = ModelSpec { topology, ..small_model() };
        let r = evaluate(&split, &spec, 2, 1).unwrap();
        assert!(r.nrmse.is_finite() && r.nrmse < 1.0, "{topology}: {}", r.nrmse);
    }
}

#[test]
fn stronger_input_beats_weak_input_on_mackey_glass() {
    // with a tiny input block the reservoirs stay almost linear
    let split = prepare_split(&mg(), &SplitSpec { train_len: 2000, test_len: 500, horizon: 20, washout: 100, normalize: true })
        .unwrap();
    let weak = evaluate(&split, &ModelSpec { n_r: 100, ..ModelSpec::mackey_glass_wide() }, 3, 0).unwrap();
    let mut strong_spec = ModelSpec { n_r: 100, ..ModelSpec::mackey_glass_wide() };
    strong_spec.init.sigma_in = Scale::Value(5.0);
    let strong = evaluate(&split, &strong_spec, 3, 0).unwrap();
    assert!(strong.rmse < weak.rmse, "{} vs {}", strong.rmse, weak.rmse);
}

#[test]
fn validation_split_stays_inside_training_region() {
    let split = SplitSpec { train_len: 1000, test_len: 200, horizon: 3, washout: 20, normalize: true };
    let series = load_series(&mg(), &split).unwrap();
    let v = validation_split(&series, &split).unwrap();
    assert_eq!(v.train_in.len(), 800);
    assert_eq!(v.test_in.len(), 200);
    let f = validation_fitness(&v, &small_model(), 2, 0);
    assert!(f.is_finite() && f > 0.0);
    let infeasible = ModelSpec {
        init: deepesn::init::InitSpec { rho_hat: Scale::Value(0.2), alpha: 0.5, ..Default::default() },
        ..small_model()
    };
    assert_eq!(validation_fitness(&v, &infeasible, 2, 0), f64::INFINITY);
}
