//! Acceptance criteria 1-10. Runs as a plain binary so every criterion prints
//! exactly one PASS/FAIL line; exits non-zero if any fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use channelflow::decomposition::{build_ideal, validate_decomposition};
use channelflow::dist_sim::write_trace;
use channelflow::generate::{generate, random_tree, GenParams, HeightProfile};
use channelflow::layering::{check_interference, layer_from_decomposition};
use channelflow::model::{expand_demand_instances, DemandInstance, EdgeRef, Mode, Problem};
use channelflow::oracle::ORACLE_CAP;
use channelflow::pipeline::{run_algorithm, Algorithm, RunOptions, RunOutcome};
use channelflow::primal_dual::RaiseRecord;
use channelflow::rational::{q, q_int, Q};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn eps() -> Q {
    q(1, 10)
}

/// Exhaustive include/exclude search written against the raw instance data:
/// one instance per demand, per-edge heights at most 1.
fn reference_optimum(problem: &Problem, instances: &[DemandInstance]) -> Q {
    let mut order: Vec<&DemandInstance> = instances.iter().collect();
    order.sort_by(|a, b| b.profit_units.cmp(&a.profit_units).then(a.id.cmp(&b.id)));
    let mut suffix = vec![0i128; order.len() + 1];
    for i in (0..order.len()).rev() {
        suffix[i] = suffix[i + 1] + order[i].profit_units;
    }
    struct Search<'a> {
        order: Vec<&'a DemandInstance>,
        suffix: Vec<i128>,
        cap: i128,
        load: HashMap<EdgeRef, i128>,
        used: Vec<bool>,
        best: i128,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, acc: i128) {
            if acc > self.best {
                self.best = acc;
            }
            if i == self.order.len() || acc + self.suffix[i] <= self.best {
                return;
            }
            let d = self.order[i];
            let fits = !self.used[d.demand]
                && d.edges
                    .iter()
                    .all(|e| self.load.get(e).copied().unwrap_or(0) + d.height_units <= self.cap);
            if fits {
                self.used[d.demand] = true;
                for e in &d.edges {
                    *self.load.entry(*e).or_insert(0) += d.height_units;
                }
                self.go(i + 1, acc + d.profit_units);
                for e in &d.edges {
                    *self.load.get_mut(e).unwrap() -= d.height_units;
                }
                self.used[d.demand] = false;
            }
            self.go(i + 1, acc);
        }
    }
    let mut s = Search {
        order,
        suffix,
        cap: problem.height_scale(),
        load: HashMap::new(),
        used: vec![false; problem.demands().len()],
        best: 0,
    };
    s.go(0, 0);
    Q::new(BigInt::from(s.best), BigInt::from(problem.profit_scale()))
}

fn profit_range(instances: &[DemandInstance], ids: &[usize]) -> Q {
    let profits = ids.iter().map(|&i| &instances[i].profit);
    let max = profits.clone().max().cloned().unwrap_or_else(Q::one);
    let min = profits.min().cloned().unwrap_or_else(Q::one);
    max / min
}

fn pow2(k: u32) -> Q {
    Q::from_integer(BigInt::one() << k)
}

fn trace_bytes(records: &[RaiseRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_trace(records, &mut out).expect("writing to memory");
    out
}

struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn tree(&mut self, heights: HeightProfile, r_max: usize, cap: usize) -> Problem {
        loop {
            let params = GenParams {
                mode: Mode::Tree,
                n: self.rng.gen_range(4..=40),
                m: self.rng.gen_range(2..=14),
                r: self.rng.gen_range(1..=r_max),
                seed: self.rng.gen(),
                heights,
                profit_range: (1, self.rng.gen_range(1..=64)),
                max_slack: 0,
                max_processing: 0,
            };
            let p = generate(&params).expect("valid parameters");
            let k = expand_demand_instances(&p).len();
            if (1..=cap).contains(&k) {
                return p;
            }
        }
    }

    fn line(&mut self, heights: HeightProfile) -> Problem {
        loop {
            let params = GenParams {
                mode: Mode::Line,
                n: self.rng.gen_range(6..=24),
                m: self.rng.gen_range(2..=10),
                r: self.rng.gen_range(1..=2),
                seed: self.rng.gen(),
                heights,
                profit_range: (1, self.rng.gen_range(1..=64)),
                max_slack: self.rng.gen_range(0..=3),
                max_processing: self.rng.gen_range(1..=6),
            };
            let p = generate(&params).expect("valid parameters");
            let k = expand_demand_instances(&p).len();
            if (1..=ORACLE_CAP).contains(&k) {
                return p;
            }
        }
    }
}

/// One oracle-backed run plus the reference optimum it was checked against.
struct Checked {
    problem: Problem,
    opts: RunOptions,
    outcome: RunOutcome,
    optimum: Q,
}

/// Runs `algorithm` with the oracle on, checks the oracle against the
/// reference search, and checks `p(S) * bound >= Opt`.
fn checked_run(
    problem: Problem,
    algorithm: Algorithm,
    seed: u64,
    single_tree: bool,
    bound: &Q,
) -> Result<Checked, String> {
    let opts = RunOptions {
        eps: eps(),
        seed,
        single_tree,
        oracle: true,
        ..RunOptions::default()
    };
    let outcome = run_algorithm(&problem, algorithm, &opts)
        .map_err(|e| format!("{algorithm} seed {seed}: {e}"))?;
    let instances = expand_demand_instances(&problem);
    let optimum = reference_optimum(&problem, &instances);
    ensure!(
        outcome.optimum.as_ref() == Some(&optimum),
        "{algorithm} seed {seed}: oracle {:?} vs reference {optimum}",
        outcome.optimum.as_ref().map(Q::to_string)
    );
    ensure!(
        &outcome.solution.profit * bound >= optimum,
        "{algorithm} seed {seed}: profit {} times {bound} below optimum {optimum}",
        outcome.solution.profit
    );
    Ok(Checked {
        problem,
        opts,
        outcome,
        optimum,
    })
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let spent = start.elapsed();
    if spent > limit {
        Err(format!("took {spent:.1?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_depth = 0.0f64;
    for i in 0..500 {
        let n = if i < 4 { i + 2 } else { rng.gen_range(2..=1024) };
        let net = random_tree(0, n, &mut rng);
        let dec = build_ideal(&net);
        let report = validate_decomposition(&dec, &net).map_err(|e| format!("n={n}: {e}"))?;
        let log = (n as f64).log2().ceil() as u32;
        ensure!(report.theta <= 2, "n={n}: theta {}", report.theta);
        ensure!(report.depth <= 2 * log + 1, "n={n}: depth {} > {}", report.depth, 2 * log + 1);
        worst_depth = worst_depth.max(f64::from(report.depth) / f64::from(2 * log + 1));
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("500 trees, worst depth/bound {worst_depth:.2}"))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut accepted = 0;
    let mut delta = 0;
    let mut total = 0;
    while accepted < 200 {
        let params = GenParams {
            mode: Mode::Tree,
            n: rng.gen_range(2..=128),
            m: rng.gen_range(1..=150),
            r: rng.gen_range(1..=3),
            seed: rng.gen(),
            heights: HeightProfile::Unit,
            profit_range: (1, 100),
            max_slack: 0,
            max_processing: 0,
        };
        let problem = generate(&params).expect("valid parameters");
        let instances = expand_demand_instances(&problem);
        if instances.len() > 300 {
            continue;
        }
        accepted += 1;
        total += instances.len();
        for (idx, net) in problem.networks().iter().enumerate() {
            let ids: Vec<usize> = instances.iter().filter(|d| d.net == idx).map(|d| d.id).collect();
            if ids.is_empty() {
                continue;
            }
            let dec = build_ideal(net);
            let layered = layer_from_decomposition(&dec, net, idx, &instances, &ids)
                .map_err(|e| format!("seed {}: {e}", params.seed))?;
            let largest = layered.critical.values().map(Vec::len).max().unwrap_or(0);
            ensure!(largest <= 6, "seed {}: |pi| = {largest}", params.seed);
            check_interference(&layered, &instances)
                .map_err(|(a, b)| format!("seed {}: pair ({a}, {b}) interferes", params.seed))?;
            delta = delta.max(largest);
        }
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("200 instances ({total} demand instances), max |pi| {delta}"))
}

/// Criterion 3 and the checks that reuse its runs (4, 8, 9, 10).
struct UnitTreeRuns {
    runs: Vec<Checked>,
}

fn criterion_3(store: &mut UnitTreeRuns) -> Check {
    let start = Instant::now();
    let mut sampler = Sampler::new(3);
    let bound = q_int(7) + eps();
    let floor = Q::one() - eps();
    let mut worst = Q::zero();
    for seed in 0..200 {
        let problem = sampler.tree(HeightProfile::Unit, 3, ORACLE_CAP);
        let run = checked_run(problem, Algorithm::DistUnit, seed, false, &bound)?;
        let out = &run.outcome;
        ensure!(out.lambda_achieved >= floor, "seed {seed}: lambda {}", out.lambda_achieved);
        let sum_delta = out.records().fold(Q::zero(), |acc, r| acc + &r.delta);
        ensure!(
            out.solution.profit >= sum_delta,
            "seed {seed}: profit {} below sum of deltas {sum_delta}",
            out.solution.profit
        );
        if out.solution.profit.is_zero() {
            return Err(format!("seed {seed}: empty solution"));
        }
        worst = worst.max(&run.optimum / &out.solution.profit);
        store.runs.push(run);
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "200 runs, worst Opt/p(S) {:.3} (bound 7.1)",
        worst.to_f64().unwrap_or(f64::NAN)
    ))
}

fn criterion_4(store: &UnitTreeRuns) -> Check {
    let mut steps_seen = 0;
    let mut max_steps = 0;
    for run in &store.runs {
        let out = &run.outcome;
        let instances = expand_demand_instances(&run.problem);
        ensure!(
            out.kill_violations() == 0,
            "seed {}: {} kill violations",
            run.opts.seed,
            out.kill_violations()
        );
        for part in &out.parts {
            let range = profit_range(&instances, &part.ids);
            let stats = part.stats.as_ref().ok_or("distributed part without stats")?;
            for s in &stats.steps {
                steps_seen += 1;
                max_steps = max_steps.max(s.steps);
                // steps <= 2 + log2 R  <=>  2^(steps - 2) <= R
                ensure!(
                    s.steps <= 2 || pow2(s.steps - 2) <= range,
                    "seed {}: stage ({}, {}) took {} steps with R = {range}",
                    run.opts.seed,
                    s.epoch,
                    s.stage,
                    s.steps
                );
            }
        }
    }
    Ok(format!("0 violations, {steps_seen} active stages, max {max_steps} steps"))
}

struct DualityTally {
    runs: usize,
}

impl DualityTally {
    fn check(&mut self, run: &Checked) -> Result<(), String> {
        let out = &run.outcome;
        let total = out
            .parts
            .iter()
            .fold(Q::zero(), |acc, p| acc + &p.certificate.scaled_objective);
        ensure!(
            total >= run.optimum && out.weak_duality == Some(true),
            "{} seed {}: scaled dual {total} below optimum {}",
            out.algorithm,
            run.opts.seed,
            run.optimum
        );
        for p in &out.parts {
            let part_opt = p.optimum.as_ref().ok_or("part optimum missing")?;
            ensure!(
                &p.certificate.scaled_objective >= part_opt,
                "{} seed {}: {} part dual below its optimum",
                out.algorithm,
                run.opts.seed,
                p.label
            );
        }
        self.runs += 1;
        Ok(())
    }
}

fn criterion_5(tally: &mut DualityTally) -> Check {
    let start = Instant::now();
    let mut sampler = Sampler::new(5);
    let narrow_bound = q_int(73) + eps() * q_int(2);
    let mixed_bound = q_int(80) + eps() * q_int(2);
    for seed in 0..100 {
        let problem = sampler.tree(HeightProfile::Narrow, 3, ORACLE_CAP);
        let run = checked_run(problem, Algorithm::DistHeight, seed, false, &narrow_bound)?;
        tally.check(&run)?;
    }
    for seed in 0..100 {
        let problem = sampler.tree(HeightProfile::Mixed, 3, ORACLE_CAP);
        let run = checked_run(problem, Algorithm::DistHeight, seed, false, &mixed_bound)?;
        tally.check(&run)?;
    }
    within(Duration::from_secs(600), start)?;
    Ok("100 narrow (73+2eps) and 100 mixed (80+2eps) runs feasible and within bound".into())
}

fn criterion_6(tally: &mut DualityTally) -> Check {
    let start = Instant::now();
    let mut sampler = Sampler::new(6);
    let unit_bound = q_int(4) + eps();
    let height_bound = q_int(23) + eps() * q_int(2);
    let mut delta = 0;
    for seed in 0..100 {
        let problem = sampler.line(HeightProfile::Unit);
        let run = checked_run(problem, Algorithm::DistLineUnit, seed, false, &unit_bound)?;
        let out = &run.outcome;
        ensure!(out.delta <= 3, "seed {seed}: delta {}", out.delta);
        ensure!(out.xi == vec![q(8, 9)], "seed {seed}: xi {:?}", out.xi);
        delta = delta.max(out.delta);
        tally.check(&run)?;
    }
    for seed in 0..100 {
        let problem = sampler.line(HeightProfile::Mixed);
        let run = checked_run(problem, Algorithm::DistLineHeight, seed, false, &height_bound)?;
        tally.check(&run)?;
    }
    within(Duration::from_secs(600), start)?;
    Ok(format!("200 line runs, max |pi| {delta}, xi = 8/9"))
}

fn criterion_7(tally: &mut DualityTally) -> Check {
    let start = Instant::now();
    let mut sampler = Sampler::new(7);
    for (single, bound, r_max) in [(false, q_int(3), 3), (true, q_int(2), 1)] {
        for seed in 0..200 {
            let problem = sampler.tree(HeightProfile::Unit, r_max, ORACLE_CAP);
            let run = checked_run(problem, Algorithm::SeqTree, seed, single, &bound)?;
            let cert = &run.outcome.parts[0].certificate;
            ensure!(cert.lambda.is_one(), "seed {seed}: lambda {}", cert.lambda);
            tally.check(&run)?;
        }
    }
    within(Duration::from_secs(180), start)?;
    Ok("200 runs within 3, 200 single-tree runs within 2, lambda = 1 duals feasible".into())
}

fn criterion_8(store: &UnitTreeRuns, tally: &mut DualityTally) -> Check {
    for run in &store.runs {
        tally.check(run)?;
    }
    Ok(format!("{} oracle-solved runs", tally.runs))
}

fn criterion_9(store: &UnitTreeRuns) -> Check {
    for run in &store.runs {
        let again = run_algorithm(&run.problem, Algorithm::DistUnit, &run.opts)
            .map_err(|e| e.to_string())?;
        let a: Vec<RaiseRecord> = run.outcome.records().cloned().collect();
        let b: Vec<RaiseRecord> = again.records().cloned().collect();
        ensure!(trace_bytes(&a) == trace_bytes(&b), "seed {}: traces differ", run.opts.seed);
        ensure!(again.solution == run.outcome.solution, "seed {}: solutions differ", run.opts.seed);
    }
    Ok(format!("{} runs repeated identically", store.runs.len()))
}

fn criterion_10(store: &UnitTreeRuns) -> Check {
    let mut worst = 0.0f64;
    for run in &store.runs {
        let instances = expand_demand_instances(&run.problem);
        for part in &run.outcome.parts {
            let stats = part.stats.as_ref().ok_or("distributed part without stats")?;
            let range = profit_range(&instances, &part.ids).to_f64().unwrap_or(f64::INFINITY);
            let budget = 2.0
                * f64::from(stats.epochs)
                * f64::from(stats.stages_per_epoch)
                * (2.0 + range.log2());
            ensure!(
                stats.total_steps as f64 <= budget + 1e-9,
                "seed {}: {} steps over budget {budget:.1}",
                run.opts.seed,
                stats.total_steps
            );
            if budget > 0.0 {
                worst = worst.max(stats.total_steps as f64 / budget);
            }
        }
    }
    Ok(format!("worst steps/budget {worst:.4}"))
}

fn main() {
    let mut store = UnitTreeRuns { runs: Vec::new() };
    let mut tally = DualityTally { runs: 0 };
    let mut failed = 0;
    let mut report = |n: u32, start: Instant, result: Check| {
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n:>2}: PASS ({secs:.1}s) {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2}: FAIL ({secs:.1}s) {why}");
            }
        }
    };

    let t = Instant::now();
    report(1, t, criterion_1());
    let t = Instant::now();
    report(2, t, criterion_2());
    let t = Instant::now();
    report(3, t, criterion_3(&mut store));
    let t = Instant::now();
    report(4, t, criterion_4(&store));
    let t = Instant::now();
    let c5 = criterion_5(&mut tally);
    report(5, t, c5);
    let t = Instant::now();
    let c6 = criterion_6(&mut tally);
    report(6, t, c6);
    let t = Instant::now();
    let c7 = criterion_7(&mut tally);
    report(7, t, c7);
    let t = Instant::now();
    let c8 = criterion_8(&store, &mut tally);
    report(8, t, c8);
    let t = Instant::now();
    report(9, t, criterion_9(&store));
    let t = Instant::now();
    report(10, t, criterion_10(&store));

    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
