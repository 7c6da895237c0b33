//! End-to-end runs: decompose, layer, both phases, validation and optional
//! oracle certification, for each of the five algorithms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::decomposition::{build, validate_decomposition, DecompositionKind};
use crate::dist_sim::{
    run_overall_height, run_unit, DistRun, HeightConfig, RoundStats, RunError, SimConfig,
};
use crate::model::{
    check_feasible, expand_demand_instances, DemandInstance, HeightMode, InstanceId, Mode, Problem,
    Solution, Violation,
};
use crate::oracle::{
    certify_ratio, exact_optimum, verify_weak_duality, OracleError, RatioCheck, ORACLE_CAP,
};
use crate::primal_dual::{
    scale_and_check_dual, sequential_tree_solve, DualCertificate, RaiseRecord, RaiseRule,
    SolveError,
};
use crate::rational::{q, q_int, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    DistUnit,
    DistHeight,
    DistLineUnit,
    DistLineHeight,
    SeqTree,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::DistUnit,
        Algorithm::DistHeight,
        Algorithm::DistLineUnit,
        Algorithm::DistLineHeight,
        Algorithm::SeqTree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::DistUnit => "dist-unit",
            Algorithm::DistHeight => "dist-height",
            Algorithm::DistLineUnit => "dist-line-unit",
            Algorithm::DistLineHeight => "dist-line-height",
            Algorithm::SeqTree => "seq-tree",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Algorithm::DistUnit | Algorithm::DistHeight | Algorithm::SeqTree => Mode::Tree,
            Algorithm::DistLineUnit | Algorithm::DistLineHeight => Mode::Line,
        }
    }

    pub fn feasibility(self) -> HeightMode {
        match self {
            Algorithm::DistHeight | Algorithm::DistLineHeight => HeightMode::Height,
            _ => HeightMode::Unit,
        }
    }

    /// Guaranteed ratio at slackness `ε`: `7+ε`, `80+2ε`, `4+ε`, `23+2ε`,
    /// and 3 for the sequential solver (2 for its single-tree variant).
    pub fn ratio_bound(self, eps: &Q, single_tree: bool) -> Q {
        let two_eps = eps * q_int(2);
        match self {
            Algorithm::DistUnit => q_int(7) + eps,
            Algorithm::DistHeight => q_int(80) + two_eps,
            Algorithm::DistLineUnit => q_int(4) + eps,
            Algorithm::DistLineHeight => q_int(23) + two_eps,
            Algorithm::SeqTree if single_tree => q_int(2),
            Algorithm::SeqTree => q_int(3),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub eps: Q,
    pub seed: u64,
    pub c_steps: u32,
    /// Narrow constant override.
    pub c: Option<Q>,
    pub h_min: Option<Q>,
    pub kind: DecompositionKind,
    pub single_tree: bool,
    pub oracle: bool,
    pub oracle_cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            eps: q(1, 10),
            seed: 0,
            c_steps: 2,
            c: None,
            h_min: None,
            kind: DecompositionKind::Ideal,
            single_tree: false,
            oracle: false,
            oracle_cap: ORACLE_CAP,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("{algorithm} needs a {expected:?} instance")]
    ModeMismatch { algorithm: Algorithm, expected: Mode },
    #[error("{algorithm} needs unit heights")]
    NeedsUnitHeights { algorithm: Algorithm },
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("output is infeasible: {0}")]
    Infeasible(Violation),
    #[error("scaled duals violate the constraint of instance {0}")]
    DualInfeasible(InstanceId),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// One independently certified slice of a run: all instances for unit
/// algorithms, the wide and narrow sides for height algorithms.
#[derive(Clone, Debug)]
pub struct RunPart {
    pub label: &'static str,
    pub ids: Vec<InstanceId>,
    pub solution: Solution,
    pub rule: RaiseRule,
    pub certificate: DualCertificate,
    pub sum_delta: Q,
    pub records: Vec<RaiseRecord>,
    pub stats: Option<RoundStats>,
    pub kill_violations: usize,
    pub lambda_achieved: Q,
    /// `Opt` over this part's instances, when the oracle ran.
    pub optimum: Option<Q>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub instance_count: usize,
    pub solution: Solution,
    pub parts: Vec<RunPart>,
    pub xi: Vec<Q>,
    pub lambda_achieved: Q,
    pub delta: usize,
    pub theta: Option<usize>,
    pub depth: Option<u32>,
    pub optimum: Option<Q>,
    pub ratio: Option<RatioCheck>,
    /// Scaled dual objectives cover `Opt`, overall and per part.
    pub weak_duality: Option<bool>,
}

impl RunOutcome {
    /// All raise records in schedule order, parts concatenated.
    pub fn records(&self) -> impl Iterator<Item = &RaiseRecord> {
        self.parts.iter().flat_map(|p| p.records.iter())
    }

    pub fn kill_violations(&self) -> usize {
        self.parts.iter().map(|p| p.kill_violations).sum()
    }
}

fn part_from_dist(
    label: &'static str,
    run: DistRun,
    instances: &[DemandInstance],
) -> Result<RunPart, PipelineError> {
    let lambda = run.params.lambda();
    let certificate = scale_and_check_dual(&run.duals, &lambda, instances, &run.ids, run.params.rule)
        .map_err(PipelineError::DualInfeasible)?;
    Ok(RunPart {
        label,
        sum_delta: run.records.iter().fold(Q::zero(), |acc, r| acc + &r.delta),
        kill_violations: run.kill_violations.len(),
        ids: run.ids,
        solution: run.solution,
        rule: run.params.rule,
        certificate,
        records: run.records,
        stats: Some(run.stats),
        lambda_achieved: run.lambda_achieved,
        optimum: None,
    })
}

/// Largest pivot set and depth over the networks' decompositions.
pub fn decomposition_summary(problem: &Problem, kind: DecompositionKind) -> (usize, u32) {
    let mut theta = 0;
    let mut depth = 0;
    for net in problem.networks() {
        let dec = build(net, kind);
        let report = validate_decomposition(&dec, net).expect("builders emit valid decompositions");
        theta = theta.max(report.theta);
        depth = depth.max(report.depth);
    }
    (theta, depth)
}

pub fn run_algorithm(
    problem: &Problem,
    algorithm: Algorithm,
    opts: &RunOptions,
) -> Result<RunOutcome, PipelineError> {
    if problem.mode() != algorithm.mode() {
        return Err(PipelineError::ModeMismatch {
            algorithm,
            expected: algorithm.mode(),
        });
    }
    if algorithm.feasibility() == HeightMode::Unit && !problem.is_unit_height() {
        return Err(PipelineError::NeedsUnitHeights { algorithm });
    }
    let instances = expand_demand_instances(problem);
    if opts.oracle && instances.len() > opts.oracle_cap {
        return Err(OracleError::TooLarge {
            count: instances.len(),
            cap: opts.oracle_cap,
        }
        .into());
    }
    let all: Vec<InstanceId> = (0..instances.len()).collect();
    let sim = SimConfig {
        seed: opts.seed,
        c_steps: opts.c_steps,
    };

    let (solution, mut parts, xi, delta, kind) = match algorithm {
        Algorithm::DistUnit | Algorithm::DistLineUnit => {
            let run = run_unit(problem, &instances, opts.kind, opts.eps.clone(), &sim)?;
            let xi = vec![run.params.xi.clone()];
            let delta = run.delta;
            let part = part_from_dist("unit", run, &instances)?;
            (part.solution.clone(), vec![part], xi, delta, opts.kind)
        }
        Algorithm::DistHeight | Algorithm::DistLineHeight => {
            let cfg = HeightConfig {
                eps: opts.eps.clone(),
                c: opts.c.clone(),
                h_min: opts.h_min.clone(),
                kind: opts.kind,
            };
            let run = run_overall_height(problem, &instances, &cfg, &sim)?;
            let xi = vec![run.wide.params.xi.clone(), run.narrow.params.xi.clone()];
            let delta = run.wide.delta.max(run.narrow.delta);
            let parts = vec![
                part_from_dist("wide", run.wide, &instances)?,
                part_from_dist("narrow", run.narrow, &instances)?,
            ];
            (run.solution, parts, xi, delta, opts.kind)
        }
        Algorithm::SeqTree => {
            let run = sequential_tree_solve(problem, &instances, opts.single_tree)?;
            let part = RunPart {
                label: "sequential",
                ids: all.clone(),
                solution: run.solution.clone(),
                rule: RaiseRule::Unit,
                certificate: run.certificate,
                sum_delta: run.records.iter().fold(Q::zero(), |acc, r| acc + &r.delta),
                records: run.records,
                stats: None,
                kill_violations: 0,
                lambda_achieved: Q::one(),
                optimum: None,
            };
            (run.solution, vec![part], Vec::new(), run.delta, DecompositionKind::RootFixing)
        }
    };

    check_feasible(problem, &instances, &solution, algorithm.feasibility())
        .map_err(PipelineError::Infeasible)?;
    let (theta, depth) = match problem.mode() {
        Mode::Tree => {
            let (t, d) = decomposition_summary(problem, kind);
            (Some(t), Some(d))
        }
        Mode::Line => (None, None),
    };
    let lambda_achieved = parts
        .iter()
        .filter(|p| !p.ids.is_empty())
        .map(|p| p.lambda_achieved.clone())
        .min()
        .unwrap_or_else(Q::one);

    let mut optimum = None;
    let mut ratio = None;
    let mut weak_duality = None;
    if opts.oracle {
        let mode = algorithm.feasibility();
        let opt = exact_optimum(problem, &instances, &all, mode, opts.oracle_cap)?.optimum;
        let mut dual_total = Q::zero();
        let mut holds = true;
        for part in parts.iter_mut() {
            let part_opt = exact_optimum(problem, &instances, &part.ids, mode, opts.oracle_cap)?;
            holds &= verify_weak_duality(&part.certificate.scaled_objective, &part_opt.optimum);
            dual_total += &part.certificate.scaled_objective;
            part.optimum = Some(part_opt.optimum);
        }
        holds &= verify_weak_duality(&dual_total, &opt);
        ratio = Some(certify_ratio(
            &solution.profit,
            &opt,
            &algorithm.ratio_bound(&opts.eps, opts.single_tree),
        ));
        weak_duality = Some(holds);
        optimum = Some(opt);
    }

    Ok(RunOutcome {
        algorithm,
        mode: problem.mode(),
        instance_count: instances.len(),
        solution,
        parts,
        xi,
        lambda_achieved,
        delta,
        theta,
        depth,
        optimum,
        ratio,
        weak_duality,
    })
}

/// Per-part statistics keyed by part label.
pub fn stats_by_part(outcome: &RunOutcome) -> BTreeMap<&'static str, &RoundStats> {
    outcome
        .parts
        .iter()
        .filter_map(|p| p.stats.as_ref().map(|s| (p.label, s)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GenParams, HeightProfile};
    use crate::model::fixtures;

    fn small(mode: Mode, heights: HeightProfile, seed: u64) -> Problem {
        generate(&GenParams {
            mode,
            n: 12,
            m: 6,
            r: 2,
            seed,
            heights,
            profit_range: (1, 20),
            max_slack: 1,
            max_processing: 4,
        })
        .unwrap()
    }

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("dist".parse::<Algorithm>().is_err());
    }

    #[test]
    fn every_algorithm_certifies_on_small_inputs() {
        let opts = RunOptions {
            oracle: true,
            ..RunOptions::default()
        };
        for seed in 0..6 {
            let cases = [
                (Algorithm::DistUnit, Mode::Tree, HeightProfile::Unit),
                (Algorithm::SeqTree, Mode::Tree, HeightProfile::Unit),
                (Algorithm::DistHeight, Mode::Tree, HeightProfile::Mixed),
                (Algorithm::DistLineUnit, Mode::Line, HeightProfile::Unit),
                (Algorithm::DistLineHeight, Mode::Line, HeightProfile::Mixed),
            ];
            for (alg, mode, heights) in cases {
                let p = small(mode, heights, seed);
                if expand_demand_instances(&p).len() > ORACLE_CAP {
                    continue;
                }
                let out = run_algorithm(&p, alg, &opts).unwrap();
                assert!(out.ratio.as_ref().unwrap().holds, "{alg} seed {seed}");
                assert_eq!(out.weak_duality, Some(true), "{alg} seed {seed}");
            }
        }
    }

    #[test]
    fn mismatches_are_rejected() {
        let p = small(Mode::Line, HeightProfile::Unit, 1);
        assert!(matches!(
            run_algorithm(&p, Algorithm::DistUnit, &RunOptions::default()),
            Err(PipelineError::ModeMismatch { .. })
        ));
        let (p, _) = fixtures::bottleneck_problem([q(2, 5), q(7, 10), q(3, 10)]);
        assert!(matches!(
            run_algorithm(&p, Algorithm::SeqTree, &RunOptions::default()),
            Err(PipelineError::NeedsUnitHeights { .. })
        ));
        let out = run_algorithm(&p, Algorithm::DistHeight, &RunOptions::default()).unwrap();
        assert_eq!(out.solution.profit, q(2, 1));
    }

    #[test]
    fn line_unit_reports_three_critical_edges() {
        let p = small(Mode::Line, HeightProfile::Unit, 3);
        let out = run_algorithm(&p, Algorithm::DistLineUnit, &RunOptions::default()).unwrap();
        assert!(out.delta <= 3);
        assert_eq!(out.xi, vec![q(8, 9)]);
    }
}
