//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.
//!
//! Two checks are expected to fail and are left failing on purpose, with the
//! full analysis in their assert messages: the coin-toss CVaR(0.2) row of
//! criterion 1 (the published table row is not the fixed point of the
//! published recursion) and criterion 7 (the rarest coin-toss state receives
//! ~10 visits in 1e5 steps, so no estimator reaches max-row L1 0.05).

use rayon::prelude::*;

use riskdp::bayes::{posterior_l1_accuracy, DirichletPosterior, KernelSampleSet};
use riskdp::bellman::{
    epsilon_greedy, estimate_q, estimate_q_from_samples, exact_q, optimality_step,
    value_iteration, ValueFunction,
};
use riskdp::bounds::{
    perturbation_bound, sample_complexity_t, stage_iteration_bound, sweep_iteration_bound,
    BoundParams,
};
use riskdp::driver::{
    run_training, EpsilonSchedule, InitialState, StageScheduler, TrainingConfig,
};
use riskdp::envs::{
    build_coin_toss, build_inventory, inventory_order_up_to, oracle_solve, robustness_sweep,
    stationary_weighted_value, EnvBundle,
};
use riskdp::mdp::{simulate, MdpModel, TransitionKernel};
use riskdp::risk::{lipschitz_b_sigma, InnerRiskSpec, OuterRiskSpec};
use riskdp::rng::{derive_seed, stream};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_err(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

fn random_instance(
    rng: &mut rand_chacha::ChaCha8Rng,
    ns: usize,
    na: usize,
    gamma: f64,
    positive_costs: bool,
) -> (MdpModel, TransitionKernel) {
    use rand::Rng;
    let cost: Vec<f64> = (0..ns * na * ns)
        .map(|_| {
            if positive_costs {
                rng.random_range(0.1..1.0)
            } else {
                rng.random_range(-1.0..1.0)
            }
        })
        .collect();
    let mut probs = Vec::with_capacity(ns * na * ns);
    for _ in 0..ns * na {
        let mut row: Vec<f64> = (0..ns).map(|_| rng.random::<f64>() + 1e-3).collect();
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= sum);
        let correction: f64 = 1.0 - row.iter().sum::<f64>();
        row[0] += correction;
        probs.extend(row);
    }
    (
        MdpModel::new(ns, na, gamma, cost).unwrap(),
        TransitionKernel::new(ns, na, probs).unwrap(),
    )
}

fn coin_policy_labels(env: &EnvBundle, policy: &riskdp::Policy) -> Vec<i64> {
    (0..env.model.n_states())
        .map(|s| env.action_labels[policy.greedy_action(s)])
        .collect()
}

fn concentrated_posterior(kernel: &TransitionKernel, mass: f64) -> DirichletPosterior {
    let (ns, na) = (kernel.n_states(), kernel.n_actions());
    let mut alpha = Vec::with_capacity(ns * na * ns);
    for s in 0..ns {
        for a in 0..na {
            alpha.extend(kernel.row(s, a).iter().map(|p| (p * mass).max(1.0)));
        }
    }
    DirichletPosterior::from_alpha(ns, na, alpha).unwrap()
}

fn training_cfg(
    inner: InnerRiskSpec,
    outer: OuterRiskSpec,
    seed: u64,
    env: &EnvBundle,
) -> TrainingConfig {
    TrainingConfig {
        stages: 20,
        scheduler: StageScheduler::FixedDelta { delta: 100 },
        theta: 0.01,
        mc_samples: 200,
        epsilon: EpsilonSchedule::new(0.3, 0.9, 0.05).unwrap(),
        seed,
        inner,
        outer,
        initial_state: InitialState::Fixed {
            state: env.model.n_states() / 2,
        },
    }
}

/// Final greedy policies and per-stage oracle-metric curves of `runs`
/// independently seeded trainings.
fn batch_train(
    env: &EnvBundle,
    inner: &InnerRiskSpec,
    outer: &OuterRiskSpec,
    runs: usize,
    master: u64,
) -> (Vec<riskdp::Policy>, Vec<Vec<f64>>) {
    let prior = DirichletPosterior::uniform_prior(env.model.n_states(), env.model.n_actions());
    let outcomes: Vec<(riskdp::Policy, Vec<f64>)> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let cfg = training_cfg(
                inner.clone(),
                outer.clone(),
                derive_seed(master, "run", r as u64),
                env,
            );
            let log = run_training(&env.kernel, &env.model, &prior, &cfg).unwrap();
            let curve: Vec<f64> = log
                .stages
                .iter()
                .map(|st| stationary_weighted_value(env, &st.greedy, inner, 1e-6).unwrap())
                .collect();
            (log.final_greedy_policy().unwrap().clone(), curve)
        })
        .collect();
    outcomes.into_iter().unzip()
}

// ---------------------------------------------------------------------------
// Criterion 1: oracle policy tables, exact
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_oracle_policy_tables() {
    let theta = 1e-6;
    let coin = build_coin_toss(0.6);
    let inv = build_inventory(10, 3.0, 1.0, 2.0, 0.0);
    let mut mismatches: Vec<String> = Vec::new();

    let coin_rows: [(&str, InnerRiskSpec, [i64; 11]); 3] = [
        (
            "expectation",
            InnerRiskSpec::mean(),
            [1, 1, 1, 1, 1, 1, 0, -1, -1, -1, -1],
        ),
        (
            "cvar(0.5)",
            InnerRiskSpec::cvar(0.5).unwrap(),
            [1, 1, 1, 1, 1, 0, 0, 0, -1, -1, -1],
        ),
        (
            "cvar(0.2)",
            InnerRiskSpec::cvar(0.2).unwrap(),
            [1, 1, 0, 0, 0, 0, 0, 0, -1, -1, -1],
        ),
    ];
    for (name, inner, want) in &coin_rows {
        let (_, policy) = oracle_solve(&coin, inner, theta).unwrap();
        let got = coin_policy_labels(&coin, &policy);
        if got.as_slice() == want.as_slice() {
            println!("criterion 1 [coin {name}]: row reproduced exactly");
        } else {
            mismatches.push(format!("coin {name}: got {got:?}, table {want:?}"));
        }
    }

    // Inventory rows compare the canonical order-up-to level; replenishment
    // thresholds 2 / 4 / 5 for mean / cvar(0.5) / cvar(0.2).
    let inv_rows: [(&str, InnerRiskSpec, i64); 3] = [
        ("expectation", InnerRiskSpec::mean(), 2),
        ("cvar(0.5)", InnerRiskSpec::cvar(0.5).unwrap(), 4),
        ("cvar(0.2)", InnerRiskSpec::cvar(0.2).unwrap(), 5),
    ];
    for (name, inner, threshold) in &inv_rows {
        let (_, policy) = oracle_solve(&inv, inner, theta).unwrap();
        let got: Vec<i64> = (0..21)
            .map(|i| inventory_order_up_to(&inv, i, policy.greedy_action(i)))
            .collect();
        let want: Vec<i64> = inv
            .state_labels
            .iter()
            .map(|&s| if s <= *threshold { 8 } else { s })
            .collect();
        if got == want {
            println!("criterion 1 [inventory {name}]: row reproduced exactly");
        } else {
            mismatches.push(format!("inventory {name}: got {got:?}, table {want:?}"));
        }
    }

    if mismatches.is_empty() {
        println!("criterion 1 (oracle policy tables): PASS");
    } else {
        println!("criterion 1 (oracle policy tables): FAIL — {mismatches:?}");
    }
    assert!(
        mismatches.is_empty(),
        "published-table mismatches: {mismatches:#?}\n\
         Known defect: the published coin CVaR(0.2) row is not the fixed point of \
         the published recursion. Two independent implementations of the exact \
         upper-tail CVaR recursion produce [1,1,1,1,0,0,0,0,0,-1,-1]; no CVaR level \
         in 0.01..=1.00 and no tie/tail convention yields the printed row, which \
         abstains on a 1.2%-loss bet while betting on a 16.7%-loss bet. All other \
         five rows reproduce exactly. See the project notes for the full analysis."
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: risk-monotonicity of the oracles
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_risk_monotonicity() {
    let theta = 1e-6;
    let coin = build_coin_toss(0.6);
    let abstain = |inner: &InnerRiskSpec| -> Vec<usize> {
        let (_, policy) = oracle_solve(&coin, inner, theta).unwrap();
        (0..11).filter(|&s| policy.greedy_action(s) == 1).collect()
    };
    let mean_set = abstain(&InnerRiskSpec::mean());
    let half_set = abstain(&InnerRiskSpec::cvar(0.5).unwrap());
    let fifth_set = abstain(&InnerRiskSpec::cvar(0.2).unwrap());
    let nested = mean_set.iter().all(|s| half_set.contains(s))
        && half_set.iter().all(|s| fifth_set.contains(s));

    let inv = build_inventory(10, 3.0, 1.0, 2.0, 0.0);
    let threshold = |inner: &InnerRiskSpec| -> i64 {
        let (_, policy) = oracle_solve(&inv, inner, theta).unwrap();
        (0..21)
            .filter(|&i| {
                inventory_order_up_to(&inv, i, policy.greedy_action(i)) > inv.state_labels[i].max(0)
            })
            .map(|i| inv.state_labels[i])
            .max()
            .unwrap()
    };
    let t_mean = threshold(&InnerRiskSpec::mean());
    let t_half = threshold(&InnerRiskSpec::cvar(0.5).unwrap());
    let t_fifth = threshold(&InnerRiskSpec::cvar(0.2).unwrap());
    let rising = t_mean <= t_half && t_half <= t_fifth;

    let ok = nested && rising;
    println!(
        "criterion 2 (risk monotonicity): {} — abstain sets {mean_set:?} ⊆ {half_set:?} ⊆ {fifth_set:?}; \
         inventory thresholds {t_mean} <= {t_half} <= {t_fifth}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// Criterion 3: Bellman estimator consistency
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_estimator_consistency() {
    let coin = build_coin_toss(0.6);
    let post = concentrated_posterior(&coin.kernel, 1e9);
    let (v_ref, _) = oracle_solve(&coin, &InnerRiskSpec::mean(), 1e-8).unwrap();

    let combos = [
        (InnerRiskSpec::mean(), OuterRiskSpec::mean()),
        (InnerRiskSpec::mean(), OuterRiskSpec::cvar(0.6).unwrap()),
        (InnerRiskSpec::cvar(0.5).unwrap(), OuterRiskSpec::mean()),
        (InnerRiskSpec::cvar(0.5).unwrap(), OuterRiskSpec::cvar(0.6).unwrap()),
    ];
    let mut worst_gap = 0.0f64;
    for (inner, outer) in &combos {
        let est = estimate_q(&coin.model, &post, &v_ref, inner, outer, 200, 42).unwrap();
        let exact = exact_q(&coin.model, &coin.kernel, &v_ref, inner).unwrap();
        worst_gap = worst_gap.max(est.sup_dist(&exact));
    }
    let concentrated_ok = worst_gap <= 1e-2;

    // Three-point sample-size ladder against a large-sample reference.
    let prior = DirichletPosterior::uniform_prior(11, 3);
    let mut ladder_ok = true;
    let mut ladder_report = String::new();
    for (inner, outer) in [
        (InnerRiskSpec::mean(), OuterRiskSpec::mean()),
        (InnerRiskSpec::cvar(0.5).unwrap(), OuterRiskSpec::cvar(0.6).unwrap()),
    ] {
        let reference =
            estimate_q(&coin.model, &prior, &v_ref, &inner, &outer, 100_000, 7).unwrap();
        let errs: Vec<f64> = [10usize, 100, 1000]
            .iter()
            .map(|&n| {
                let per_seed: Vec<f64> = (0..20)
                    .into_par_iter()
                    .map(|seed| {
                        estimate_q(&coin.model, &prior, &v_ref, &inner, &outer, n, 1000 + seed)
                            .unwrap()
                            .sup_dist(&reference)
                    })
                    .collect();
                mean(&per_seed)
            })
            .collect();
        ladder_ok &= errs[0] > errs[1] && errs[1] > errs[2];
        ladder_report.push_str(&format!(
            " [{}/{}: {:.4} > {:.4} > {:.4}]",
            inner.0.label(),
            outer.0.label(),
            errs[0],
            errs[1],
            errs[2]
        ));
    }

    let ok = concentrated_ok && ladder_ok;
    println!(
        "criterion 3 (estimator consistency): {} — concentrated sup gap {worst_gap:.2e};{ladder_report}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(concentrated_ok, "concentrated gap {worst_gap} > 1e-2");
    assert!(ladder_ok, "N-ladder not monotone:{ladder_report}");
}

// ---------------------------------------------------------------------------
// Criterion 4: contraction / monotonicity / translation suites
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_operator_properties() {
    use rand::Rng;
    let inner = InnerRiskSpec::cvar(0.5).unwrap();
    let outer = OuterRiskSpec::cvar(0.6).unwrap();
    let gamma = 0.9;
    let checks: Vec<(usize, bool)> = (0..1000u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(4000, "criterion4", &[trial]);
            let (model, kernel) = random_instance(&mut rng, 3, 2, gamma, false);
            let post = DirichletPosterior::uniform_prior(3, 2);
            let samples = KernelSampleSet::draw(&post, 50, trial);
            let bound = model.value_bound();
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                ValueFunction::from_vec((0..3).map(|_| rng.random_range(-bound..bound)).collect())
            };
            let v1 = draw(&mut rng);
            let v2 = draw(&mut rng);
            let v_low =
                ValueFunction::from_vec(v1.as_slice().iter().map(|x| x - 0.5).collect());
            let c: f64 = rng.random_range(-1.0..1.0);
            let v_shift = ValueFunction::from_vec(v1.as_slice().iter().map(|x| x + c).collect());

            let exact = |v: &ValueFunction| -> ValueFunction {
                optimality_step(&exact_q(&model, &kernel, v, &inner).unwrap())
            };
            let est = |v: &ValueFunction| -> ValueFunction {
                optimality_step(
                    &estimate_q_from_samples(&model, &samples, v, &inner, &outer).unwrap(),
                )
            };

            let mut failures = 0usize;
            for backup in [&exact as &dyn Fn(&ValueFunction) -> ValueFunction, &est] {
                let b1 = backup(&v1);
                let b2 = backup(&v2);
                if b1.sup_dist(&b2) > gamma * v1.sup_dist(&v2) + 1e-10 {
                    failures += 1;
                }
                let bl = backup(&v_low);
                if (0..3).any(|s| b1.get(s) < bl.get(s) - 1e-10) {
                    failures += 1;
                }
                let bs = backup(&v_shift);
                if (0..3).any(|s| (bs.get(s) - (b1.get(s) + gamma * c)).abs() > 1e-9) {
                    failures += 1;
                }
            }
            (failures, true)
        })
        .collect();
    let failures: usize = checks.iter().map(|(f, _)| f).sum();
    println!(
        "criterion 4 (contraction/monotonicity/translation): {} — {failures} violations over 1000 trials x 6 checks",
        if failures == 0 { "PASS" } else { "FAIL" }
    );
    assert_eq!(failures, 0);
}

// ---------------------------------------------------------------------------
// Criterion 5: posterior error bound
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_posterior_error_bound() {
    use rand::Rng;
    let gamma = 0.9;
    let combos = [
        (InnerRiskSpec::mean(), OuterRiskSpec::mean()),
        (InnerRiskSpec::cvar(0.5).unwrap(), OuterRiskSpec::cvar(0.6).unwrap()),
    ];
    let failures: Vec<String> = (0..50u64)
        .into_par_iter()
        .map(|instance| {
            let mut rng = stream(5000, "criterion5", &[instance]);
            let (model, kernel) = random_instance(&mut rng, 3, 2, gamma, false);
            let alpha: Vec<f64> = (0..3 * 2 * 3).map(|_| rng.random_range(0.3..3.0)).collect();
            let post = DirichletPosterior::from_alpha(3, 2, alpha).unwrap();
            let mut out = Vec::new();
            for (inner, outer) in &combos {
                let b_sigma = lipschitz_b_sigma(inner, model.c_bar(), gamma).unwrap().0;

                // Exact optimal value under the true kernel.
                let exact_backup = |v: &ValueFunction| exact_q(&model, &kernel, v, inner);
                let v_true =
                    value_iteration(exact_backup, ValueFunction::zeros(3), 1e-8, 100_000)
                        .unwrap()
                        .value;

                // Posterior optimal value, replicated over sample seeds.
                let lhs: Vec<f64> = (0..3)
                    .map(|rep| {
                        let samples = KernelSampleSet::draw(
                            &post,
                            5000,
                            derive_seed(instance, "c5-samples", rep),
                        );
                        let backup = |v: &ValueFunction| {
                            estimate_q_from_samples(&model, &samples, v, inner, outer)
                        };
                        let v_post =
                            value_iteration(backup, ValueFunction::zeros(3), 1e-4, 100_000)
                                .unwrap()
                                .value;
                        v_post.sup_dist(&v_true)
                    })
                    .collect();

                // Accuracy functional, replicated over Monte Carlo seeds.
                let acc: Vec<f64> = (0..5)
                    .map(|rep| {
                        posterior_l1_accuracy(
                            &post,
                            &kernel,
                            outer,
                            2000,
                            derive_seed(instance, "c5-acc", rep),
                        )
                        .unwrap()
                        .max_value
                    })
                    .collect();

                let lead = b_sigma / (1.0 - gamma);
                let bound = lead * mean(&acc);
                let slack = 3.0 * ((lead * std_err(&acc)).powi(2) + std_err(&lhs).powi(2)).sqrt();
                if mean(&lhs) > bound + slack {
                    out.push(format!(
                        "instance {instance} {}/{}: lhs {:.4} > bound {:.4} + slack {:.4}",
                        inner.0.label(),
                        outer.0.label(),
                        mean(&lhs),
                        bound,
                        slack
                    ));
                }
            }
            out
        })
        .flatten()
        .collect();
    println!(
        "criterion 5 (posterior error bound): {} — {} violations over 50 instances x 2 combos",
        if failures.is_empty() { "PASS" } else { "FAIL" },
        failures.len()
    );
    assert!(failures.is_empty(), "{failures:#?}");
}

// ---------------------------------------------------------------------------
// Criterion 6: end-to-end training convergence
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_training_convergence() {
    let coin = build_coin_toss(0.6);
    let cases = [
        (
            InnerRiskSpec::mean(),
            [1i64, 1, 1, 1, 1, 1, 0, -1, -1, -1, -1],
            45usize,
            60u64,
        ),
        (
            InnerRiskSpec::cvar(0.5).unwrap(),
            [1, 1, 1, 1, 1, 0, 0, 0, -1, -1, -1],
            40usize,
            61u64,
        ),
    ];
    let mut all_ok = true;
    for (inner, table_row, needed, master) in &cases {
        let (policies, curves) = batch_train(&coin, inner, &OuterRiskSpec::mean(), 50, *master);
        let matches = policies
            .iter()
            .filter(|p| coin_policy_labels(&coin, p) == table_row.as_slice())
            .count();

        let (_, oracle_policy) = oracle_solve(&coin, inner, 1e-8).unwrap();
        let oracle_value =
            stationary_weighted_value(&coin, &oracle_policy, inner, 1e-8).unwrap();
        let stages = curves[0].len();
        let final_mean =
            curves.iter().map(|c| c[stages - 1]).sum::<f64>() / curves.len() as f64;
        let curve_ok = (final_mean - oracle_value).abs() <= 0.1;

        let ok = matches >= *needed && curve_ok;
        all_ok &= ok;
        println!(
            "criterion 6 [{}]: {} — table-row matches {matches}/50 (need {needed}); final curve {final_mean:.4} vs oracle {oracle_value:.4}",
            inner.0.label(),
            if ok { "PASS" } else { "FAIL" }
        );
        assert!(
            matches >= *needed,
            "{}: only {matches}/50 runs matched (need {needed})",
            inner.0.label()
        );
        assert!(
            curve_ok,
            "{}: final aggregate value {final_mean} vs oracle {oracle_value}",
            inner.0.label()
        );
    }
    println!(
        "criterion 6 (training convergence): {}",
        if all_ok { "PASS" } else { "FAIL" }
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: posterior convergence after 1e5 steps
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_posterior_convergence() {
    let coin = build_coin_toss(0.6);
    // Epsilon-floored greedy behavior around the oracle policy.
    let (_, oracle_policy) = oracle_solve(&coin, &InnerRiskSpec::mean(), 1e-8).unwrap();
    let q_proxy = exact_q(
        &coin.model,
        &coin.kernel,
        &oracle_solve(&coin, &InnerRiskSpec::mean(), 1e-8).unwrap().0,
        &InnerRiskSpec::mean(),
    )
    .unwrap();
    let behavior = epsilon_greedy(&q_proxy, 0.05);
    assert_eq!(behavior.greedy_action(6), oracle_policy.greedy_action(6));

    let steps = 100_000;
    let traj = simulate(&coin.kernel, &behavior, 5, steps, &mut stream(7, "criterion7", &[]))
        .unwrap();
    let counts = riskdp::mdp::count_transitions(&traj, 11, 3);
    let post = DirichletPosterior::uniform_prior(11, 3).posterior_update(&counts);
    let mean_kernel = post.posterior_mean();
    let max_l1: f64 = (0..11)
        .flat_map(|s| (0..3).map(move |a| (s, a)))
        .map(|(s, a)| {
            mean_kernel
                .row(s, a)
                .iter()
                .zip(coin.kernel.row(s, a))
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);

    let ok = max_l1 <= 0.05;
    println!(
        "criterion 7 (posterior convergence): {} — max-row L1 {max_l1:.4} after {steps} steps",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(
        ok,
        "max-row L1 {max_l1:.4} > 0.05 after {steps} epsilon-floored steps.\n\
         Known defect in the criterion's constant: every policy visits state 0 \
         with probability Binom(10,0.6)(0) ≈ 1.05e-4, i.e. ~10 visits in 1e5 \
         steps, and an 11-outcome row cannot reach L1 0.05 from ~10 samples \
         (that needs ~2e3 visits per row, i.e. ~1e9 steps at the exploration \
         floor). The posterior-mean consistency mechanism itself is verified on \
         a well-covered instance in the bayes unit tests. See the project notes."
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: bound calculators
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_bound_calculators() {
    use rand::Rng;
    let base = BoundParams {
        c_bar: 1.0,
        gamma: 0.9,
        theta: 0.1,
        alpha1: 0.5,
        alpha2: 0.5,
        n_states: 2,
        n_actions: 2,
        a_bar0: 1.0,
        o_alpha: 1.0,
        mu_min: 0.01,
        t0: 10.0,
        delta_fail: 0.05,
        xi: 1.0,
        eta: 1.0,
        delta_obs: 4.0,
        sweep_index: 0.0,
        o0: 1.0,
    };

    // Frozen values from independent evaluation of the printed formulas.
    let sample = sample_complexity_t(&BoundParams {
        n_states: 11,
        n_actions: 3,
        ..base
    });
    let sample_want = 10.0 + 2.2528e12;
    let pert = perturbation_bound(&base);
    let pert_want = 8872.283911167298;
    let stage = stage_iteration_bound(&base);
    let sweep = sweep_iteration_bound(&BoundParams {
        delta_obs: 16.0,
        ..base
    });
    let sweep_want = 436.5447278679968;

    let six_digits = |got: f64, want: f64| ((got - want) / want).abs() < 5e-7;
    let exact_ok = six_digits(sample, sample_want)
        && six_digits(pert, pert_want)
        && stage == 109
        && six_digits(sweep, sweep_want);

    // Monotonicity on 1e4 random parameter pairs.
    let mut rng = stream(8000, "criterion8", &[]);
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let p = BoundParams {
            c_bar: rng.random_range(0.1..10.0),
            gamma: rng.random_range(0.5..0.99),
            theta: rng.random_range(0.01..1.0),
            alpha1: rng.random_range(0.05..1.0),
            alpha2: rng.random_range(0.05..1.0),
            n_states: rng.random_range(2..20),
            n_actions: rng.random_range(2..10),
            a_bar0: rng.random_range(0.1..5.0),
            o_alpha: rng.random_range(0.1..5.0),
            mu_min: rng.random_range(0.001..0.5),
            t0: 0.0,
            delta_fail: rng.random_range(0.001..0.5),
            xi: 1.0,
            eta: 1.0,
            delta_obs: rng.random_range(0.0..100.0),
            sweep_index: rng.random_range(0.0..20.0),
            o0: rng.random_range(0.1..5.0),
        };
        let mut more_obs = p;
        more_obs.delta_obs = p.delta_obs + rng.random_range(0.1..50.0);
        let mut more_conf = p;
        more_conf.o_alpha = p.o_alpha + rng.random_range(0.1..5.0);
        let mut later_sweep = p;
        later_sweep.sweep_index = p.sweep_index + rng.random_range(0.1..10.0);
        let mut looser = p;
        looser.theta = p.theta * rng.random_range(1.0..4.0);

        if perturbation_bound(&more_obs) < perturbation_bound(&p)
            || perturbation_bound(&more_conf) > perturbation_bound(&p)
            || stage_iteration_bound(&more_conf) > stage_iteration_bound(&p)
            || sweep_iteration_bound(&later_sweep) > sweep_iteration_bound(&p)
            || sample_complexity_t(&looser) > sample_complexity_t(&p)
        {
            violations += 1;
        }
    }

    let ok = exact_ok && violations == 0;
    println!(
        "criterion 8 (bound calculators): {} — T={sample:.6e}, perturbation={pert:.6}, stage={stage}, sweep={sweep:.6}; {violations} monotonicity violations / 1e4 pairs",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(exact_ok, "reference-value mismatch");
    assert_eq!(violations, 0);
}

// ---------------------------------------------------------------------------
// Criterion 9: empirical iterations never exceed the stage bound
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_iteration_bound_dominance() {
    use rand::Rng;
    let gamma = 0.9;
    let theta = 0.1;
    let (alpha1, alpha2) = (0.5, 0.5);
    let inner = InnerRiskSpec::cvar(alpha1).unwrap();
    let outer = OuterRiskSpec::cvar(alpha2).unwrap();

    let mut worst_margin = f64::INFINITY;
    for scenario in 0..20u64 {
        let mut rng = stream(9000, "criterion9", &[scenario]);
        let (model, _) = random_instance(&mut rng, 2, 2, gamma, true);
        let alpha: Vec<f64> = (0..2 * 2 * 2).map(|_| rng.random_range(0.5..2.0)).collect();
        let prior = DirichletPosterior::from_alpha(2, 2, alpha).unwrap();

        // Converge on the prior posterior to get the warm start.
        let s0 = KernelSampleSet::draw(&prior, 500, derive_seed(scenario, "c9-pre", 0));
        let warm = value_iteration(
            |v| estimate_q_from_samples(&model, &s0, v, &inner, &outer),
            ValueFunction::zeros(2),
            theta,
            100_000,
        )
        .unwrap()
        .value;

        // One-hot observation increments.
        let delta: usize = rng.random_range(1..=10);
        let mut counts = riskdp::mdp::TransitionCounts::zeros(2, 2);
        for _ in 0..delta {
            counts.record(
                rng.random_range(0..2),
                rng.random_range(0..2),
                rng.random_range(0..2),
            );
        }
        let updated = prior.posterior_update(&counts);
        let s1 = KernelSampleSet::draw(&updated, 500, derive_seed(scenario, "c9-post", 0));
        let observed = value_iteration(
            |v| estimate_q_from_samples(&model, &s1, v, &inner, &outer),
            warm,
            theta,
            100_000,
        )
        .unwrap()
        .iterations;

        let params = BoundParams {
            c_bar: model.c_bar(),
            gamma,
            theta,
            alpha1,
            alpha2,
            n_states: 2,
            n_actions: 2,
            a_bar0: prior.max_row_mass(),
            o_alpha: prior.min_row_mass(),
            mu_min: 0.01,
            t0: 0.0,
            delta_fail: 0.05,
            xi: 1.0,
            eta: 1.0,
            delta_obs: delta as f64,
            sweep_index: 0.0,
            o0: prior.min_row_mass(),
        };
        let bound = stage_iteration_bound(&params);
        worst_margin = worst_margin.min(bound as f64 - observed as f64);
        assert!(
            observed as u64 <= bound,
            "scenario {scenario}: observed {observed} > bound {bound}"
        );
    }
    println!(
        "criterion 9 (iteration bound dominance): PASS — minimum bound-minus-observed margin {worst_margin}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 10: robustness direction (soft)
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_robustness_direction() {
    let coin = build_coin_toss(0.6);
    let grid: Vec<EnvBundle> = [0.4, 0.5, 0.6, 0.7, 0.8]
        .iter()
        .map(|&p| build_coin_toss(p))
        .collect();

    let mut warnings = Vec::new();
    for (inner, master) in [
        (InnerRiskSpec::mean(), 100u64),
        (InnerRiskSpec::cvar(0.5).unwrap(), 101u64),
    ] {
        let mut means = Vec::new();
        for (outer, master_off) in [
            (OuterRiskSpec::mean(), 0u64),
            (OuterRiskSpec::cvar(0.6).unwrap(), 0u64),
        ] {
            let (policies, _) = batch_train(&coin, &inner, &outer, 50, master + master_off);
            let worsts: Vec<f64> = policies
                .par_iter()
                .map(|p| robustness_sweep(p, &grid, &inner, 1e-6).unwrap().worst)
                .collect();
            means.push(mean(&worsts));
        }
        let (outer_mean, outer_cvar) = (means[0], means[1]);
        if outer_cvar <= outer_mean {
            println!(
                "criterion 10 [{}]: directional check holds — worst-deployment mean {outer_cvar:.4} (outer cvar) <= {outer_mean:.4} (outer mean)",
                inner.0.label()
            );
        } else {
            warnings.push(format!(
                "{}: outer-cvar worst {outer_cvar:.4} > outer-mean worst {outer_mean:.4}",
                inner.0.label()
            ));
        }
    }
    if warnings.is_empty() {
        println!("criterion 10 (robustness direction): PASS");
    } else {
        // Soft criterion: the effect size is not quantified, so a reversed
        // direction is reported as a warning rather than a failure.
        println!("criterion 10 (robustness direction): PASS with warnings — {warnings:?}");
    }
}
