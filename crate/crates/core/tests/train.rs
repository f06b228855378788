use gfk_core::diff::param_gradient;
use gfk_core::geom::RigidTransform;
use gfk_core::linalg::{self, Vec3};
use gfk_core::synth::*;
use gfk_core::train::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_splits() -> Splits {
    let cfg = CorpusConfig {
        duration: 60.0,
        ..Default::default()
    };
    prepare_corpus(&cfg, 2.0).unwrap().1
}

fn small_config(backbone: Backbone, constraint: Constraint) -> TrainConfig {
    TrainConfig {
        epochs: 2,
        batch_size: 16,
        ..TrainConfig::new(backbone, constraint)
    }
}

fn all_specs() -> impl Iterator<Item = DenoiserSpec> {
    Backbone::ALL.into_iter().flat_map(|b| {
        Constraint::ALL
            .into_iter()
            .map(move |c| DenoiserSpec::new(b, c))
    })
}

// Metrics

#[test]
fn rmse_hand_cases() {
    let truth = [[0.0; 3]; 2];
    let r = rmse(&[[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]], &truth).unwrap();
    assert!((r - 2.5f64.sqrt()).abs() <= 1e-12);
    let r = rmse(&[[3.0, 4.0, 0.0]], &[[0.0; 3]]).unwrap();
    assert!((r - 5.0).abs() <= 1e-12);
    let same = [[1.5, -2.0, 7.0]];
    assert_eq!(rmse(&same, &same).unwrap(), 0.0);
}

#[test]
fn metrics_reject_bad_input() {
    assert!(rmse(&[], &[]).is_err());
    assert!(rmse(&[[0.0; 3]], &[[0.0; 3], [1.0; 3]]).is_err());
    assert!(snr(&[[1.0; 3]], &[[0.0; 3]]).is_err());
}

#[test]
fn snr_identities() {
    let truth = vec![[3.0, 4.0, 0.0], [-1.0, 2.0, 5.0], [0.5, 0.0, -2.0]];
    let tenth: Vec<Vec3> = truth.iter().map(|t| t.map(|v| v * 1.1)).collect();
    assert!((snr(&tenth, &truth).unwrap() - 20.0).abs() <= 1e-9);
    let zero = vec![[0.0; 3]; 3];
    assert!(snr(&zero, &truth).unwrap().abs() <= 1e-12);
    assert_eq!(snr(&truth, &truth).unwrap(), SNR_INFINITE);
}

proptest! {
    #[test]
    fn doubling_errors_costs_6_0206_db(
        truth in prop::collection::vec(prop::array::uniform3(-100.0..100.0f64), 1..20),
        err in prop::collection::vec(prop::array::uniform3(-10.0..10.0f64), 20),
    ) {
        let e = &err[..truth.len()];
        prop_assume!(e.iter().flatten().any(|v| v.abs() > 1e-3));
        prop_assume!(truth.iter().flatten().any(|v| v.abs() > 1e-3));
        let p1: Vec<Vec3> = truth.iter().zip(e).map(|(t, d)| linalg::add(*t, *d)).collect();
        let p2: Vec<Vec3> = truth.iter().zip(e).map(|(t, d)| linalg::add(*t, linalg::scale(*d, 2.0))).collect();
        let drop = snr(&p1, &truth).unwrap() - snr(&p2, &truth).unwrap();
        prop_assert!((drop - 20.0 * 2f64.log10()).abs() <= 1e-6);
        prop_assert!((drop - 6.0206).abs() <= 1e-4);
    }

    #[test]
    fn rmse_is_homogeneous(
        pairs in prop::collection::vec((prop::array::uniform3(-50.0..50.0f64), prop::array::uniform3(-50.0..50.0f64)), 1..20),
        k in 0.1..10.0f64,
    ) {
        let (p, t): (Vec<Vec3>, Vec<Vec3>) = pairs.into_iter().unzip();
        let ps: Vec<Vec3> = p.iter().map(|v| linalg::scale(*v, k)).collect();
        let ts: Vec<Vec3> = t.iter().map(|v| linalg::scale(*v, k)).collect();
        let a = rmse(&ps, &ts).unwrap();
        let b = k * rmse(&p, &t).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn clipped_gradient_norm_is_bounded(
        g in prop::collection::vec(-1e3..1e3f64, 1..50),
        max in 0.01..10.0f64,
    ) {
        let mut c = g.clone();
        let before = clip_grad_norm(&mut c, max);
        let after = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((before - g.iter().map(|v| v * v).sum::<f64>().sqrt()).abs() <= 1e-9 * before.max(1.0));
        prop_assert!(after <= max * (1.0 + 1e-12));
        if before <= max {
            prop_assert_eq!(c, g);
        }
    }

    #[test]
    fn lowpass_passes_constants(
        dts in prop::collection::vec(0.01..2.0f64, 2..60),
        c in prop::array::uniform3(-1e4..1e4f64),
    ) {
        let times: Vec<f64> = dts.iter().scan(0.0, |t, d| { *t += d; Some(*t) }).collect();
        let x = vec![c; times.len()];
        for y in zero_phase_lowpass(&times, &x, 0.05) {
            for k in 0..3 {
                prop_assert!((y[k] - c[k]).abs() <= 1e-9 * c[k].abs().max(1.0));
            }
        }
    }
}

// Optimizer

#[test]
fn first_adam_step_has_magnitude_lr() {
    let mut opt = Adam::new(3, 0.01);
    let mut p = vec![1.0, -2.0, 0.5];
    opt.update(&mut p, &[3.0, -0.2, 1e-3]);
    let expect = [0.99, -1.99, 0.49];
    for (a, b) in p.iter().zip(expect) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    assert_eq!(opt.steps(), 1);
}

#[test]
fn adamw_decay_is_decoupled() {
    let mut opt = Adam::adamw(1, 0.1, (0.9, 0.999), 0.5);
    let mut p = vec![2.0];
    opt.update(&mut p, &[0.0]);
    // zero gradient: only the decay acts
    assert!((p[0] - 2.0 * (1.0 - 0.1 * 0.5)).abs() < 1e-12);
}

// Preprocessing

fn core_only_flight(pattern: Pattern) -> (GroundTruthField, FlightDataset) {
    let gt = GroundTruthField::new(CoreField::earth_like(), 0.8, 0.2, vec![]);
    let spec = FlightSpec {
        trajectory: TrajectoryConfig::new(pattern, 120.0),
        regime: NoiseRegime::Calm,
        interference: InterferenceCoefficients::ZERO,
    };
    let f = generate_flight(&spec, &gt, &mut rng(3)).unwrap();
    (gt, f.dataset)
}

#[test]
fn core_only_truth_has_zero_residual() {
    for p in Pattern::ALL {
        let (gt, ds) = core_only_flight(p);
        let (out, _) = preprocess(&ds, &gt, DEFAULT_CUTOFF).unwrap();
        for r in &out.records {
            assert!(linalg::norm(r.clean) <= 1e-9, "{:?}", r.clean);
        }
    }
}

#[test]
fn constant_offset_is_removed() {
    let (gt, mut ds) = core_only_flight(Pattern::Racetrack);
    for r in &mut ds.records {
        r.measured = linalg::add(r.clean, [40.0, -25.0, 12.0]);
    }
    let (out, _) = preprocess(&ds, &gt, DEFAULT_CUTOFF).unwrap();
    for r in &out.records {
        assert!(linalg::norm(r.measured) <= 1e-9);
    }
}

#[test]
fn preprocessing_round_trips() {
    let (gt, flights) = generate_corpus(&CorpusConfig {
        duration: 60.0,
        ..Default::default()
    })
    .unwrap();
    let core = gt.core_only();
    for f in &flights {
        let (out, base) = preprocess(&f.dataset, &core, DEFAULT_CUTOFF).unwrap();
        let clean: Vec<Vec3> = out.records.iter().map(|r| r.clean).collect();
        let measured: Vec<Vec3> = out.records.iter().map(|r| r.measured).collect();
        for (a, b) in base.restore_clean(&clean).iter().zip(&f.dataset.records) {
            assert!(linalg::norm(linalg::sub(*a, b.clean)) <= 1e-9);
        }
        for (a, b) in base
            .restore_measured(&measured)
            .iter()
            .zip(&f.dataset.records)
        {
            assert!(linalg::norm(linalg::sub(*a, b.measured)) <= 1e-9);
        }
    }
}

// Model

#[test]
fn every_denoiser_gradient_matches_finite_differences() {
    let splits = small_splits();
    let w = &splits.train[3];
    let mut r = rng(11);
    for spec in all_specs() {
        let model = Denoiser::new(spec, &mut r).unwrap();
        let theta = model.params().to_vec();
        let (_, g) = param_gradient(&theta, |_, v| Ok(model.loss(v, w).unwrap())).unwrap();
        let f = |t: &[f64]| model.loss(t, w).unwrap();
        let h = 1e-6;
        for _ in 0..20 {
            let i = r.random_range(0..theta.len());
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[i] += h;
            tm[i] -= h;
            let fd = (f(&tp) - f(&tm)) / (2.0 * h);
            assert!(
                (g[i] - fd).abs() <= 1e-4 * fd.abs().max(1e-3),
                "{:?}/{:?} param {i}: {} vs {fd}",
                spec.backbone,
                spec.constraint,
                g[i]
            );
        }
    }
}

#[test]
fn equivariant_denoisers_commute_with_rigid_motions() {
    let splits = small_splits();
    let w = &splits.test[0];
    let mut r = rng(5);
    for b in Backbone::ALL {
        for c in [Constraint::Equivariant, Constraint::Both] {
            let model = Denoiser::new(DenoiserSpec::new(b, c), &mut r).unwrap();
            let base = model.predict(w).unwrap();
            let scale = base.iter().map(|v| linalg::norm(*v)).fold(0.0, f64::max);
            assert!(scale > 0.0);
            for _ in 0..100 {
                let g = RigidTransform::random(&mut r, 5000.0);
                let moved = model.predict(&w.transformed(&g)).unwrap();
                for (a, p) in moved.iter().zip(&base) {
                    let err = linalg::norm(linalg::sub(*a, g.apply_vector(*p)));
                    assert!(err <= 1e-8 * scale, "{b:?}/{c:?}: {err}");
                }
            }
        }
    }
}

#[test]
fn unconstrained_denoiser_is_not_equivariant() {
    let splits = small_splits();
    let w = &splits.test[0];
    let model = Denoiser::new(
        DenoiserSpec::new(Backbone::Mlp, Constraint::None),
        &mut rng(5),
    )
    .unwrap();
    let base = model.predict(w).unwrap();
    let g = RigidTransform::random(&mut rng(6), 100.0);
    let moved = model.predict(&w.transformed(&g)).unwrap();
    let err: f64 = moved
        .iter()
        .zip(&base)
        .map(|(a, p)| linalg::norm(linalg::sub(*a, g.apply_vector(*p))))
        .sum();
    assert!(err > 1e-3);
}

#[test]
fn divergence_diagnostic_separates_constraints() {
    let splits = small_splits();
    let w = &splits.val[0];
    let mut r = rng(8);
    for spec in all_specs() {
        let model = Denoiser::new(spec, &mut r).unwrap();
        let d = model.divergence_diagnostic(w).unwrap();
        let worst = d.iter().copied().fold(0.0, f64::max);
        if spec.constraint.flags().divergence_free {
            assert!(worst <= 1e-10, "{spec:?}: {worst}");
        } else {
            assert!(worst > 1e-6, "{spec:?}: {worst}");
        }
    }
}

#[test]
fn predictions_are_model_output_times_field_scale() {
    let splits = small_splits();
    let w = &splits.val[0];
    let model = Denoiser::new(
        DenoiserSpec::new(Backbone::Ltc, Constraint::None),
        &mut rng(2),
    )
    .unwrap();
    let raw = model.forward(model.params(), w).unwrap();
    let k = model.spec().field_scale;
    for (p, r) in model.predict(w).unwrap().iter().zip(&raw) {
        for c in 0..3 {
            assert_eq!(p[c], r[c] * k);
        }
    }
}

#[test]
fn set_params_rejects_bad_vectors() {
    let mut model = Denoiser::new(
        DenoiserSpec::new(Backbone::Mlp, Constraint::None),
        &mut rng(0),
    )
    .unwrap();
    let n = model.num_params();
    assert!(matches!(
        model.set_params(vec![0.0; n + 1]),
        Err(TrainError::Contract(_))
    ));
    let mut p = vec![0.0; n];
    p[4] = f64::NAN;
    assert_eq!(model.set_params(p), Err(TrainError::NonFiniteParameter(4)));
}

// Training

#[test]
fn training_is_deterministic() {
    let splits = small_splits();
    let cfg = small_config(Backbone::Ltc, Constraint::Both);
    let (_, a) = train(&cfg, &splits).unwrap();
    let (_, b) = train(&cfg, &splits).unwrap();
    assert!((a.test_rmse - b.test_rmse).abs() <= 1e-9);
    assert_eq!(a.config_hash, b.config_hash);
    let (_, c) = train(&TrainConfig { seed: 1, ..cfg }, &splits).unwrap();
    assert_ne!(a.test_rmse, c.test_rmse);
}

#[test]
fn early_stopping_returns_the_best_validation_model() {
    let splits = small_splits();
    let cfg = TrainConfig {
        epochs: 6,
        patience: 2,
        learning_rate: 3e-2,
        ..small_config(Backbone::Mlp, Constraint::None)
    };
    let (model, report) = train(&cfg, &splits).unwrap();
    assert!(report.epochs.iter().all(|e| report.val_rmse <= e.val_rmse));
    let (p, t) = evaluate(&model, &splits.val).unwrap();
    assert!((rmse(&p, &t).unwrap() - report.val_rmse).abs() <= 1e-12);
    assert_eq!(report.test_predictions.len(), report.test_truth.len());
}

#[test]
fn training_reduces_validation_error() {
    let splits = small_splits();
    let cfg = TrainConfig {
        epochs: 5,
        ..small_config(Backbone::Mlp, Constraint::DivFree)
    };
    let (_, report) = train(&cfg, &splits).unwrap();
    assert!(report.best_epoch > 0);
    assert!(report.val_rmse < report.epochs[0].val_rmse.max(report.val_rmse + 1.0));
}

#[test]
fn single_cell_ablation() {
    let splits = small_splits();
    let cfg = TrainConfig {
        epochs: 1,
        ..small_config(Backbone::Contiformer, Constraint::Equivariant)
    };
    let out = run_ablation(&[cfg], &splits);
    assert_eq!(out.len(), 1);
    let r = out[0].as_ref().unwrap();
    assert_eq!(r.config, cfg);
    assert!(r.test_rmse.is_finite() && r.test_snr.is_finite());
}

#[test]
fn ablation_grid_covers_every_cell_once() {
    let grid = ablation_grid(&TrainConfig::new(Backbone::Mlp, Constraint::None));
    assert_eq!(grid.len(), 16);
    for b in Backbone::ALL {
        for c in Constraint::ALL {
            assert_eq!(
                grid.iter()
                    .filter(|g| g.backbone == b && g.constraint == c)
                    .count(),
                1
            );
        }
    }
}

#[test]
fn config_hash_tracks_every_field() {
    let a = TrainConfig::new(Backbone::Mlp, Constraint::None);
    assert_eq!(a.hash().len(), 64);
    assert_eq!(a.hash(), a.hash());
    assert_ne!(a.hash(), TrainConfig { lags: 5, ..a }.hash());
    assert_ne!(a.hash(), TrainConfig { lr_decay: 0.9, ..a }.hash());
}

#[test]
fn invalid_configs_are_rejected() {
    let splits = small_splits();
    let base = small_config(Backbone::Mlp, Constraint::None);
    for bad in [
        TrainConfig {
            batch_size: 0,
            ..base
        },
        TrainConfig { epochs: 0, ..base },
        TrainConfig {
            learning_rate: f64::NAN,
            ..base
        },
        TrainConfig { hidden: 1, ..base },
    ] {
        assert!(matches!(train(&bad, &splits), Err(TrainError::Domain(_))));
    }
    assert!(train(&base, &Splits::default()).is_err());
}
