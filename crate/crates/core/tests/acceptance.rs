//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured values, then asserts.
//!
//! Criterion 2 needs the daily-minimum-temperature CSV; point
//! `DEEPESN_TEMPERATURE_CSV` at it (column `Temp`, or set
//! `DEEPESN_TEMPERATURE_COLUMN`). Without it the criterion is reported as
//! BLOCKED and not asserted.

use std::time::Instant;

use deepesn::data::{MackeyGlass, Scaler};
use deepesn::evolve::{evolve, random_search, EvolutionConfig, Gene, GeneSpec, Genome, SearchSpace};
use deepesn::experiment::{evaluate, prepare_split, DatasetSpec, ModelSpec, SplitSpec};
use deepesn::init::{apply_sparsity, build_model, effective_radius, xavier_matrix, xavier_std, InitSpec, Scale};
use deepesn::ip::{activation_kl, ip_update, pretrain, IpConfig};
use deepesn::metrics::{mape, nrmse, rmse};
use deepesn::numerics::{Matrix, RngStream};
use deepesn::readout::ridge;
use deepesn::reservoir::run_from;
use deepesn::topology::{Connectivity, TopologyKind};
use nalgebra::DVector;
use rand::Rng;

fn verdict(n: u32, pass: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_1_mackey_glass_wide() {
    let start = Instant::now();
    let split = prepare_split(&DatasetSpec::MackeyGlass(MackeyGlass::default()), &SplitSpec::mackey_glass()).unwrap();
    let mut spec = ModelSpec::mackey_glass_wide();
    let plain = evaluate(&split, &spec, 10, 0).unwrap();
    spec.ip = Some(IpConfig::default());
    let with_ip = evaluate(&split, &spec, 10, 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let wins = plain
        .per_run
        .iter()
        .zip(&with_ip.per_run)
        .filter(|(a, b)| b.rmse < a.rmse)
        .count();

    let band = plain.rmse <= 0.06;
    let direction = wins >= 8;
    let fast = secs <= 300.0;
    verdict(
        1,
        band && direction && fast,
        &format!(
            "no-IP mean RMSE {:.4} (<= 0.06: {band}); IP mean RMSE {:.4}, IP better on {wins}/10 seeds (>= 8: {direction}); {secs:.0}s (<= 300: {fast})",
            plain.rmse, with_ip.rmse
        ),
    );
    assert!(band, "no-IP mean RMSE {} exceeds 0.06", plain.rmse);
    assert!(direction, "IP improved only {wins}/10 seeds");
    assert!(fast, "took {secs:.0}s");
}

#[test]
fn criterion_2_temperature_wide_layered() {
    let Ok(path) = std::env::var("DEEPESN_TEMPERATURE_CSV") else {
        println!("criterion 2: BLOCKED daily-minimum-temperature CSV not available (set DEEPESN_TEMPERATURE_CSV)");
        return;
    };
    let column = std::env::var("DEEPESN_TEMPERATURE_COLUMN").unwrap_or_else(|_| "Temp".into());
    let dataset = DatasetSpec::Csv { path: path.into(), column };
    let split = prepare_split(&dataset, &SplitSpec::temperature()).unwrap();
    let mut spec = ModelSpec::temperature_wide_layered();
    let plain = evaluate(&split, &spec, 10, 0).unwrap();
    spec.ip = Some(IpConfig::default());
    let with_ip = evaluate(&split, &spec, 10, 0).unwrap();
    let wins = plain
        .per_run
        .iter()
        .zip(&with_ip.per_run)
        .filter(|(a, b)| b.rmse < a.rmse)
        .count();
    let primary = plain.rmse <= 0.55 && plain.nrmse <= 0.16;
    let fallback = plain.nrmse <= 0.16 && wins >= 7;
    verdict(
        2,
        primary || fallback,
        &format!(
            "mean RMSE {:.4} C, mean NRMSE {:.4} (primary band: {primary}); IP better on {wins}/10 (fallback: {fallback})",
            plain.rmse, plain.nrmse
        ),
    );
    assert!(primary || fallback);
}

#[test]
fn criterion_3_echo_state_property() {
    let root = RngStream::new(3, "esp");
    let mut rng = root.child("draws").rng();
    let topologies = [
        TopologyKind::Wide(2),
        TopologyKind::Layered(3),
        TopologyKind::CrissCross(2),
        TopologyKind::WideLayered { width: 2, depth: 2 },
    ];
    let mut worst_radius_err = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut built = 0;
    while built < 20 {
        let rho = [0.7, 0.9, 0.99][rng.random_range(0..3)];
        let alpha = [0.3, 0.6, 1.0][rng.random_range(0..3)];
        if rho <= 1.0 - alpha {
            // the leak term alone already has radius 1 - alpha
            continue;
        }
        let kind = topologies[rng.random_range(0..topologies.len())];
        let n_r = rng.random_range(10..=60);
        let spec = InitSpec {
            rho_hat: Scale::Value(rho),
            sigma_in: Scale::Xavier,
            alpha,
            ..InitSpec::default()
        };
        let stream = root.child("model").child(built);
        let model = build_model(&Connectivity::build(kind).unwrap(), 1, n_r, &spec, &stream).unwrap();
        for r in model.reservoirs() {
            let err = (effective_radius(&r.recurrent, r.leak).unwrap() - rho).abs();
            worst_radius_err = worst_radius_err.max(err);
        }

        let inputs = stream.child("input").matrix(deepesn::numerics::Dist::Uniform { lo: 0.0, hi: 1.0 }, 1, 200).unwrap();
        let init = |label: &str| -> Vec<DVector<f64>> {
            (0..model.n_l())
                .map(|l| {
                    let v = stream.child(label).child(l).draw(deepesn::numerics::Dist::Uniform { lo: -1.0, hi: 1.0 }, n_r).unwrap();
                    DVector::from_vec(v)
                })
                .collect()
        };
        let (a0, b0) = (init("a"), init("b"));
        let d0: f64 = a0.iter().zip(&b0).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt();
        let a = run_from(&model, &inputs, Some(&a0), 0).unwrap();
        let b = run_from(&model, &inputs, Some(&b0), 0).unwrap();
        let last = inputs.ncols() - 1;
        let diff = a.states.column(last) - b.states.column(last);
        worst_ratio = worst_ratio.max(diff.norm() / d0);
        built += 1;
    }
    let radius_ok = worst_radius_err < 1e-6;
    let contract_ok = worst_ratio < 0.01;
    verdict(
        3,
        radius_ok && contract_ok,
        &format!("20 models: max |radius - target| {worst_radius_err:.2e}; max d(200)/d(0) {worst_ratio:.2e}"),
    );
    assert!(radius_ok && contract_ok);
}

#[test]
fn criterion_4_readout_optimality() {
    let mut rng = RngStream::new(4, "readout").rng();
    let mut worst_oracle = 0.0f64;
    let mut worst_grad = 0.0f64;
    for _ in 0..100 {
        let dim = rng.random_range(1..=20);
        let steps = rng.random_range(1..=50);
        let n_y = rng.random_range(1..=3);
        let beta = 10f64.powf(rng.random_range(-6.0..0.0));
        let x = Matrix::from_fn(dim, steps, |_, _| rng.random_range(-1.0..1.0));
        let y = Matrix::from_fn(n_y, steps, |_, _| rng.random_range(-1.0..1.0));
        let w = ridge(&x, &y, beta).unwrap().w_out;

        let gram = &x * x.transpose() + Matrix::identity(dim, dim) * beta;
        let oracle = &y * x.transpose() * gram.try_inverse().unwrap();
        worst_oracle = worst_oracle.max((&w - &oracle).amax() / oracle.amax().max(1.0));

        // central differences of ||W X - Y||^2 + beta ||W||^2
        let objective = |w: &Matrix| (w * &x - &y).norm_squared() + beta * w.norm_squared();
        let h = 1e-6;
        let scale = (&w * &x).norm_squared().max(y.norm_squared()).max(1e-12).sqrt();
        let mut grad_max = 0.0f64;
        for i in 0..w.nrows() {
            for j in 0..w.ncols() {
                let (mut p, mut m) = (w.clone(), w.clone());
                p[(i, j)] += h;
                m[(i, j)] -= h;
                grad_max = grad_max.max(((objective(&p) - objective(&m)) / (2.0 * h)).abs());
            }
        }
        worst_grad = worst_grad.max(grad_max / scale);
    }
    let ok = worst_oracle <= 1e-8 && worst_grad <= 1e-5;
    verdict(
        4,
        ok,
        &format!("100 instances: max oracle deviation {worst_oracle:.2e}; max relative gradient {worst_grad:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_5_intrinsic_plasticity() {
    let c = |eta, mu, sigma| IpConfig { eta, mu, sigma, epochs: 1 };
    let (db1, dg1) = ip_update(0.0, 1.0, 0.0, &c(0.01, 0.0, 1.0));
    let (db2, dg2) = ip_update(0.0, 1.0, 0.0, &c(0.01, 0.5, 1.0));
    let (db3, dg3) = ip_update(0.7, 1.3, -0.2, &c(0.0, 0.1, 0.3));
    let examples = db1.abs() <= 1e-12
        && (dg1 - 0.01).abs() <= 1e-12
        && (db2 - 0.005).abs() <= 1e-12
        && (dg2 - 0.01).abs() <= 1e-12
        && db3 == 0.0
        && dg3 == 0.0;

    let series = MackeyGlass::default().generate(2000).unwrap();
    let scaler = Scaler::fit(&series.values).unwrap();
    let inputs = Matrix::from_iterator(1, series.len(), series.values.iter().map(|&v| scaler.apply(v)));
    let cfg = IpConfig { eta: 1e-4, epochs: 10, ..IpConfig::default() };
    let spec = ModelSpec::mackey_glass_wide();
    let connectivity = Connectivity::build(spec.topology).unwrap();
    let mut lines = Vec::new();
    let mut decreased = 0;
    for seed in 0..5 {
        let model = build_model(&connectivity, 1, spec.n_r, &spec.init, &RngStream::new(seed, "ip-kl")).unwrap();
        let before = activation_kl(&model, &inputs, &cfg).unwrap();
        let trained = pretrain(&model, &inputs, &cfg).unwrap();
        let after = activation_kl(&trained, &inputs, &cfg).unwrap();
        decreased += (after < before) as usize;
        lines.push(format!("{before:.3}->{after:.3}"));
    }
    let ok = examples && decreased == 5;
    verdict(
        5,
        ok,
        &format!("hand examples exact: {examples}; KL decreased on {decreased}/5 seeds [{}]", lines.join(", ")),
    );
    assert!(ok);
}

#[test]
fn criterion_6_metrics_oracle() {
    let mut rng = RngStream::new(6, "metrics").rng();
    let mut worst = 0.0f64;
    let mut worst_scale = 0.0f64;
    let mut pow2_exact = true;
    for _ in 0..100 {
        let n = rng.random_range(2..200);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let uh: Vec<f64> = u.iter().map(|v| v + rng.random_range(-1.0..1.0)).collect();
        let nf = n as f64;
        let mse = u.iter().zip(&uh).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / nf;
        let mean = u.iter().sum::<f64>() / nf;
        let var = u.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / nf;
        let o_rmse = mse.sqrt();
        let o_nrmse = (mse / var).sqrt();
        let o_mape = 100.0 * u.iter().zip(&uh).map(|(a, b)| ((a - b) / a).abs()).sum::<f64>() / nf;
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
        worst = worst
            .max(rel(rmse(&u, &uh).unwrap(), o_rmse))
            .max(rel(nrmse(&u, &uh).unwrap(), o_nrmse))
            .max(rel(mape(&u, &uh).unwrap(), o_mape));

        let base = nrmse(&u, &uh).unwrap();
        for c in [0.5, 2.0, 100.0] {
            let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
            let cuh: Vec<f64> = uh.iter().map(|v| c * v).collect();
            let scaled = nrmse(&cu, &cuh).unwrap();
            if c != 100.0 && scaled != base {
                pow2_exact = false;
            }
            worst_scale = worst_scale.max((scaled - base).abs() / base);
        }
    }
    let ok = worst <= 1e-12 && pow2_exact && worst_scale <= 1e-12;
    verdict(
        6,
        ok,
        &format!("100 pairs: max oracle deviation {worst:.2e}; NRMSE scale deviation {worst_scale:.2e} (bit-exact for c=0.5,2: {pow2_exact})"),
    );
    assert!(ok);
}

#[test]
fn criterion_7_initialization_statistics() {
    let (n_in, n_out) = (300, 200);
    let m = xavier_matrix(n_in, n_out, 400, 250, &RngStream::new(7, "xavier")).unwrap();
    let n = m.len() as f64;
    let mean = m.iter().sum::<f64>() / n;
    let std = (m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let target = xavier_std(n_in, n_out).unwrap();
    let std_err = (std / target - 1.0).abs();

    let s = 0.3;
    let ones = Matrix::from_element(400, 250, 1.0);
    let sparse = apply_sparsity(&ones, s, &RngStream::new(7, "mask")).unwrap();
    let zeros = sparse.iter().filter(|v| **v == 0.0).count() as f64;
    let sigma = (n * s * (1.0 - s)).sqrt();
    let z = (zeros - n * s).abs() / sigma;

    let spec = InitSpec::default();
    let c = Connectivity::build(TopologyKind::WideLayered { width: 2, depth: 2 }).unwrap();
    let a = build_model(&c, 1, 40, &spec, &RngStream::new(7, "build")).unwrap();
    let b = build_model(&c, 1, 40, &spec, &RngStream::new(7, "build")).unwrap();
    let bits = |m: &deepesn::init::EsnModel| -> Vec<u64> {
        m.reservoirs()
            .iter()
            .flat_map(|r| {
                r.recurrent
                    .iter()
                    .chain(r.input.iter().flat_map(|i| i.iter()))
                    .chain(r.feeds.iter().flat_map(|(_, f)| f.iter()))
                    .map(|v| v.to_bits())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let identical = bits(&a) == bits(&b);

    let ok = std_err <= 0.02 && z <= 5.0 && identical;
    verdict(
        7,
        ok,
        &format!("Xavier std off by {:.2}%; zero fraction {:.4} ({z:.2} sigma); bitwise rebuild: {identical}", std_err * 100.0, zeros / n),
    );
    assert!(ok);
}

#[test]
fn criterion_8_genetic_algorithm() {
    let space = SearchSpace::new((0..10).map(|i| (format!("g{i}"), GeneSpec::Int { lo: 0, hi: 100 })).collect()).unwrap();
    let mut wins = 0;
    let mut monotone = true;
    let mut detail = Vec::new();
    for seed in 0..10u64 {
        let mut rng = RngStream::new(seed, "target").rng();
        let target: Vec<i64> = (0..10).map(|_| rng.random_range(0..=100)).collect();
        let fitness = |g: &Genome| -> f64 {
            g.iter()
                .zip(&target)
                .map(|(v, t)| match v {
                    Gene::Int(v) => (v - t).abs() as f64,
                    _ => f64::INFINITY,
                })
                .sum()
        };
        let cfg = EvolutionConfig { seed, ..EvolutionConfig::default() };
        let ga = evolve(&space, fitness, &cfg).unwrap();
        let (_, rs) = random_search(&space, fitness, cfg.population * cfg.generations, seed).unwrap();
        wins += (ga.best_fitness < rs) as usize;
        monotone &= ga.best_history().windows(2).all(|w| w[1] <= w[0]);
        detail.push(format!("{}/{}", ga.best_fitness, rs));
        if seed == 0 {
            let again = evolve(&space, fitness, &cfg).unwrap();
            assert_eq!(again.best, ga.best, "same seed must give the same best genome");
        }
    }
    let ok = wins >= 9 && monotone;
    verdict(
        8,
        ok,
        &format!("GA beat random search on {wins}/10 seeds (GA/random best: {}); history non-increasing: {monotone}; reproducible", detail.join(" ")),
    );
    assert!(ok);
}

#[test]
fn criterion_9_rk4_decay() {
    let mg = MackeyGlass { a: 0.0, tau: 1.0, dt: 1.0, transient: 1, ..MackeyGlass::default() };
    let s = mg.generate(20).unwrap();
    // sample i is t = (transient + i) * dt, so t = 10 is sample 9
    let exact = mg.x0 * (-mg.b * 10.0).exp();
    let err = (s.values[9] - exact).abs();
    let ok = err <= 1e-6;
    verdict(9, ok, &format!("|x(10) - x0 e^(-b 10)| = {err:.2e}"));
    assert!(ok);
}
