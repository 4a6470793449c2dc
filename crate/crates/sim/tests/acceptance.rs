//! Acceptance suite: one PASS/FAIL line per criterion 1-12.
//!
//! Runs as a plain binary (`harness = false`). The process fails when a
//! criterion outside `KNOWN_RED` fails.

use std::path::Path;
use std::time::Instant;

use dpcascade::config::{ExperimentConfig, InstanceKind, VariantSpec};
use dpcascade::harness::{log_fit, run_grid, RegretTrace};
use dpcascade::output::regret_csv;
use dpcascade::seed::{derive_rng, ENVIRONMENT};
use dpcascade_core::bounds::{upper_bound, BoundKind, BoundParams, ConstantSource};
use dpcascade_core::env::{expected_reward, observe_click, ItemId, RoundRealization};
use dpcascade_core::privacy::{
    composed_laplace_epsilon, gaussian_sample, gaussian_sigma, laplace_sample, utility_bound, HybridCounter,
    PrivacyBudget,
};
use dpcascade_core::{Click, Policy, PolicyParams, ProblemInstance, ProblemKind, Variant};

/// Criteria that fail at the fixed replication profile.
const KNOWN_RED: &[u8] = &[5];

struct Outcome {
    id: u8,
    pass: bool,
    detail: String,
}

fn outcome(id: u8, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn profile() -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/repl_ldp.json");
    ExperimentConfig::load(&path, &[]).expect("replication profile")
}

/// Replication profile restricted to `variants` at budgets `eps`.
fn replication(variants: &[Variant], eps: &[f64]) -> ExperimentConfig {
    let mut cfg = profile();
    let template = cfg.variants[0].clone();
    cfg.variants = variants
        .iter()
        .map(|&v| VariantSpec {
            name: v,
            epsilon: eps.to_vec(),
            ..template.clone()
        })
        .collect();
    cfg
}

fn grid(cfg: &ExperimentConfig) -> Vec<RegretTrace> {
    let g = run_grid(cfg).expect("grid");
    assert!(g.failures.is_empty(), "failed cells: {:?}", g.failures);
    g.traces
}

fn find(traces: &[RegretTrace], v: Variant, eps: f64) -> &RegretTrace {
    traces
        .iter()
        .find(|t| t.variant == v && t.params.epsilon == eps)
        .expect("trace present")
}

fn r_squared(trace: &RegretTrace) -> f64 {
    let (ts, ys): (Vec<f64>, Vec<f64>) = trace
        .rounds
        .iter()
        .zip(&trace.mean)
        .filter(|(&t, _)| (10_000..=100_000).contains(&t))
        .map(|(&t, &y)| (t as f64, y))
        .unzip();
    log_fit(&ts, &ys).expect("fit").r_squared
}

fn criteria_1_to_3(main: &[RegretTrace], elapsed: f64) -> Vec<Outcome> {
    let mut out = Vec::new();
    let vs = [Variant::NonPrivate, Variant::LdpLaplace, Variant::LdpGaussian];
    let fits: Vec<(Variant, f64)> = vs.iter().map(|&v| (v, r_squared(find(main, v, 0.2)))).collect();
    let ok = fits.iter().all(|(_, r)| *r >= 0.95) && elapsed < 60.0;
    let detail = fits
        .iter()
        .map(|(v, r)| format!("{v} R²={r:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    out.push(outcome(1, ok, format!("{detail}; {elapsed:.1}s")));

    let np = find(main, Variant::NonPrivate, 0.2).final_mean();
    let ga = find(main, Variant::LdpGaussian, 0.2).final_mean();
    let la = find(main, Variant::LdpLaplace, 0.2).final_mean();
    out.push(outcome(
        2,
        np <= ga && ga <= la,
        format!("non_private {np:.1} <= ldp_gaussian {ga:.1} <= ldp_laplace {la:.1}"),
    ));

    let ratio = |v| find(main, v, 0.2).final_mean() / find(main, v, 2.0).final_mean();
    let (rg, rl) = (ratio(Variant::LdpGaussian), ratio(Variant::LdpLaplace));
    out.push(outcome(
        3,
        rg >= 1.2 && rl >= 1.2,
        format!("regret(0.2)/regret(2): ldp_gaussian {rg:.3}, ldp_laplace {rl:.3}"),
    ));
    out
}

fn criterion_4() -> Outcome {
    let finals: Vec<f64> = [8usize, 20]
        .iter()
        .map(|&l| {
            let mut cfg = replication(&[Variant::DpHybrid], &[0.2]);
            cfg.instance.num_items = l;
            cfg.record_every = cfg.horizon;
            grid(&cfg)[0].final_mean()
        })
        .collect();
    outcome(
        4,
        finals[1] >= finals[0],
        format!("dp_hybrid L=20 {:.1} >= L=8 {:.1}", finals[1], finals[0]),
    )
}

fn criterion_5(main: &[RegretTrace]) -> Outcome {
    let gap4 = find(main, Variant::LdpLaplace, 0.2).final_mean() - find(main, Variant::LdpGaussian, 0.2).final_mean();
    let mut cfg = replication(&[Variant::LdpLaplace, Variant::LdpGaussian], &[0.2]);
    cfg.instance.list_size = 16;
    cfg.record_every = cfg.horizon;
    let t = grid(&cfg);
    let gap16 = find(&t, Variant::LdpLaplace, 0.2).final_mean() - find(&t, Variant::LdpGaussian, 0.2).final_mean();
    outcome(
        5,
        gap16 >= gap4,
        format!("laplace - gaussian: K=16 {gap16:.1} vs K=4 {gap4:.1}"),
    )
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn criterion_6() -> Outcome {
    let n = 100_000;
    let mut rng = derive_rng(6, "mechanisms");
    let lap: Vec<f64> = (0..n).map(|_| laplace_sample(2.0, &mut rng).unwrap()).collect();
    let gau: Vec<f64> = (0..n).map(|_| gaussian_sample(3.0, &mut rng).unwrap()).collect();
    let (lm, lv) = moments(&lap);
    let (gm, gv) = moments(&gau);
    let lap_ok = lm.abs() <= 3.0 * 8f64.sqrt() / (n as f64).sqrt() && (lv / 8.0 - 1.0).abs() <= 0.03;
    let gau_ok = gm.abs() <= 3.0 * 3.0 / (n as f64).sqrt() && (gv / 9.0 - 1.0).abs() <= 0.03;

    // Reference values computed to 40 digits.
    let oracles = [
        (gaussian_sigma(&PrivacyBudget::new(1.0, 1e-3).unwrap(), 4).unwrap(), 7.552959065318093888),
        (gaussian_sigma(&PrivacyBudget::new(0.2, 1e-3).unwrap(), 4).unwrap(), 37.76479532659046944),
        (gaussian_sigma(&PrivacyBudget::new(0.5, 1e-5).unwrap(), 16).unwrap(), 38.75844210084311537),
        (composed_laplace_epsilon(&PrivacyBudget::new(1.0, 1e-3).unwrap(), 4).unwrap(), 0.09510124877449031296),
        (composed_laplace_epsilon(&PrivacyBudget::new(0.5, 1e-2).unwrap(), 1).unwrap(), 0.1255510871349562197),
        (composed_laplace_epsilon(&PrivacyBudget::new(2.0, 1e-3).unwrap(), 16).unwrap(), 0.09067104687103422117),
    ];
    let worst = oracles.iter().map(|(g, w)| ((g - w) / w).abs()).fold(0.0, f64::max);
    let sigma = oracles[0].0;
    let ok = lap_ok && gau_ok && worst <= 1e-12 && (sigma - 7.5530).abs() < 5e-5;
    outcome(
        6,
        ok,
        format!("laplace var {lv:.4}/8, gaussian var {gv:.4}/9, oracle rel err {worst:.1e}, sigma {sigma:.4}"),
    )
}

fn criterion_7() -> Outcome {
    let (n, eps, gamma, c1) = (256u64, 1.0, 0.05, 1.0);
    let bound = utility_bound(c1, n, gamma, eps);
    let mut rng = derive_rng(7, "counter");
    let counters = 10_000;
    let mut noises = Vec::with_capacity(counters);
    for _ in 0..counters {
        let mut c = HybridCounter::new(eps, n, 1.0).unwrap();
        for _ in 0..n {
            c.insert(1.0, &mut rng).unwrap();
        }
        noises.push(c.noise().unwrap());
    }
    let (mean, var) = moments(&noises);
    let sd = var.sqrt();
    let freq = noises.iter().filter(|x| x.abs() > bound).count() as f64 / counters as f64;

    let mut structural = true;
    let mut c = HybridCounter::new(eps, 1024, 1.0).unwrap();
    for m in 1..=1024u64 {
        c.insert(0.0, &mut rng).unwrap();
        let cap = (m as f64).log2().ceil() as u32 + 1;
        structural &= c.active_noise_terms() <= cap;
    }
    let ok = mean.abs() <= 3.0 * sd / 100.0 && freq <= 0.06 && structural;
    outcome(
        7,
        ok,
        format!("mean {mean:.4} (sd {sd:.3}), violation freq {freq:.4}, structural {structural}"),
    )
}

fn criterion_8() -> Outcome {
    let inst = ProblemInstance::new(vec![0.2, 0.5, 0.45, 0.3, 0.1, 0.48], 1, 10_000, ProblemKind::Cascade).unwrap();
    let mut mismatches = 0;
    for seed in 0..5 {
        let mut env = derive_rng(seed, ENVIRONMENT);
        let mut rng = derive_rng(seed, "non_private");
        let w0 = inst.sample_round(&mut env);
        let mut policy = Policy::initialize(&inst, Variant::NonPrivate, PolicyParams::default(), &w0, &mut rng).unwrap();

        // Textbook UCB1 with exploration constant 1.5 and one free pull per arm.
        let mut sums: Vec<f64> = w0.values().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let mut counts = vec![1u64; sums.len()];
        for t in 1..=inst.horizon() {
            let ucb = |i: usize| sums[i] / counts[i] as f64 + (1.5 * (t as f64).ln() / counts[i] as f64).sqrt();
            let mut arm = 0;
            for i in 1..sums.len() {
                if ucb(i) > ucb(arm) {
                    arm = i;
                }
            }
            let idx = policy.compute_indices();
            let action = policy.select_action(&idx, &mut rng).unwrap();
            if action[0].index() != arm {
                mismatches += 1;
            }
            let real = inst.sample_round(&mut env);
            let fb = observe_click(&real, &action).unwrap();
            policy.update(&fb.observed, &mut rng).unwrap();
            let chosen = ItemId::from_index(arm);
            sums[arm] += if real.get(chosen) { 1.0 } else { 0.0 };
            counts[arm] += 1;
        }
    }
    outcome(8, mismatches == 0, format!("{mismatches} mismatched actions over 5 x 10^4 rounds"))
}

fn criterion_9() -> Outcome {
    let grid_w = [0.0, 0.25, 0.6, 1.0];
    let mut checked = 0u64;
    let mut bad = 0u64;
    for l in 1..=6usize {
        for code in 0..grid_w.len().pow(l as u32) {
            let w: Vec<f64> = (0..l).map(|i| grid_w[(code / grid_w.len().pow(i as u32)) % grid_w.len()]).collect();
            for k in 1..=l.min(3) {
                let inst = ProblemInstance::new(w.clone(), k, 1, ProblemKind::Cascade).unwrap();
                let mut best = f64::NEG_INFINITY;
                let mut stack: Vec<Vec<usize>> = vec![vec![]];
                while let Some(prefix) = stack.pop() {
                    if prefix.len() == k {
                        let a: Vec<ItemId> = prefix.iter().map(|&i| ItemId::from_index(i)).collect();
                        let exact = click_probability(&a, &w);
                        checked += 1;
                        if (expected_reward(&a, &w).unwrap() - exact).abs() > 1e-12 {
                            bad += 1;
                        }
                        best = best.max(exact);
                        continue;
                    }
                    for i in (0..l).filter(|i| !prefix.contains(i)) {
                        let mut p = prefix.clone();
                        p.push(i);
                        stack.push(p);
                    }
                }
                if (click_probability(inst.optimal_action(), &w) - best).abs() > 1e-12 {
                    bad += 1;
                }
            }
        }
    }
    outcome(9, bad == 0, format!("{checked} lists checked, {bad} mismatches"))
}

/// Exhaustive sum over attraction patterns.
fn click_probability(action: &[ItemId], w: &[f64]) -> f64 {
    let l = w.len();
    (0u32..1 << l)
        .map(|mask| {
            let bits: Vec<u8> = (0..l).map(|i| ((mask >> i) & 1) as u8).collect();
            let p: f64 = bits.iter().zip(w).map(|(&b, &x)| if b == 1 { x } else { 1.0 - x }).product();
            let click = observe_click(&RoundRealization::from_bits(&bits), action).unwrap().click;
            if matches!(click, Click::At(_)) {
                p
            } else {
                0.0
            }
        })
        .sum()
}

fn criterion_10() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/bounds_check.json");
    let cfg = ExperimentConfig::load(&path, &[]).unwrap();
    let traces = grid(&cfg);
    let mut ok = true;
    let mut detail = Vec::new();
    for tr in &traces {
        let ub = tr.upper_bound.as_ref().expect("overlay");
        let min_ratio = tr
            .rounds
            .iter()
            .zip(tr.mean.iter().zip(ub))
            .filter(|(&t, _)| t >= 1000)
            .map(|(_, (m, u))| u / m.max(f64::MIN_POSITIVE))
            .fold(f64::INFINITY, f64::min);
        ok &= min_ratio > 1.0;
        detail.push(format!("{} min bound/regret {min_ratio:.3e}", tr.variant));
    }
    ok &= traces.len() == 3;
    outcome(10, ok, detail.join(", "))
}

fn criterion_11() -> Outcome {
    let mut cfg = replication(&[Variant::CucbLdpGaussian], &[0.2]);
    cfg.instance.kind = InstanceKind::SemiBandit;
    let instance = cfg.build_instance().unwrap();
    let tr = &grid(&cfg)[0];
    let r2 = r_squared(tr);
    let mut p = BoundParams::from_instance(&instance).with_privacy(0.2, cfg.variants[0].delta);
    p.constant_source = ConstantSource::Appendix;
    let below = tr
        .rounds
        .iter()
        .zip(&tr.mean)
        .filter(|(&t, _)| t >= 1000)
        .all(|(&t, &m)| m < upper_bound(BoundKind::Cucb, &p, t as f64).unwrap());
    outcome(
        11,
        r2 >= 0.95 && below,
        format!("m=20 K=4 R²={r2:.4}, below bound for t >= 1000: {below}"),
    )
}

fn criterion_12() -> Outcome {
    let cfg = profile();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| regret_csv(&grid(&cfg)).unwrap())
    };
    let wide = run(rayon::current_num_threads().max(8));
    let narrow = run(1);
    let same = wide == narrow;
    outcome(
        12,
        same,
        format!("{} bytes, {} rows, identical across thread counts: {same}", wide.len(), wide.lines().count() - 1),
    )
}

fn main() {
    let mut results = Vec::new();
    let mut report = |o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2}: {tag}  {}", o.id, o.detail);
        results.push(o);
    };

    let start = Instant::now();
    let core3 = grid(&replication(&[Variant::NonPrivate, Variant::LdpLaplace, Variant::LdpGaussian], &[0.2]));
    let elapsed = start.elapsed().as_secs_f64();
    let mut main = core3;
    main.extend(grid(&replication(&[Variant::LdpLaplace, Variant::LdpGaussian], &[2.0])));

    for o in criteria_1_to_3(&main, elapsed) {
        report(o);
    }
    report(criterion_4());
    report(criterion_5(&main));
    report(criterion_6());
    report(criterion_7());
    report(criterion_8());
    report(criterion_9());
    report(criterion_10());
    report(criterion_11());
    report(criterion_12());

    let unexpected: Vec<u8> = results
        .iter()
        .filter(|o| !o.pass && !KNOWN_RED.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let red: Vec<u8> = results.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("acceptance: {} of {} criteria pass; red: {red:?}", results.len() - red.len(), results.len());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
