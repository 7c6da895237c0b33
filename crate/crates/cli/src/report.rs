use std::collections::BTreeMap;

use channelflow::dist_sim::RoundStats;
use channelflow::model::{InstanceId, Mode};
use channelflow::pipeline::{stats_by_part, RunOutcome, RunOptions};
use channelflow::rational::Q;
use num_traits::ToPrimitive;
use serde::Serialize;

/// Exact rational as `"p/q"` (or `"p"`), plus a float for eyeballing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Num {
    pub exact: String,
    pub approx: f64,
}

impl From<&Q> for Num {
    fn from(x: &Q) -> Self {
        Num {
            exact: x.to_string(),
            approx: x.to_f64().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartReport {
    pub instances: usize,
    pub selected: usize,
    pub profit: Num,
    pub raises: usize,
    pub sum_delta: Num,
    pub dual_objective: Num,
    pub scaled_dual_objective: Num,
    pub lambda_achieved: Num,
    pub kill_violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimum: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<RoundStats>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub digest: String,
    pub algorithm: String,
    pub mode: String,
    pub seed: u64,
    pub eps: Num,
    pub instances: usize,
    pub selected: Vec<InstanceId>,
    pub profit: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimum: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_bound: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak_duality: Option<bool>,
    pub lambda_achieved: Num,
    pub delta: usize,
    pub theta: Option<usize>,
    pub depth: Option<u32>,
    pub xi: Vec<Num>,
    pub kill_violations: usize,
    pub parts: BTreeMap<&'static str, PartReport>,
    pub stats: BTreeMap<&'static str, RoundStats>,
    pub wall_ms: u64,
}

impl RunReport {
    pub fn new(digest: String, out: &RunOutcome, opts: &RunOptions, wall_ms: u64) -> Self {
        let parts = out
            .parts
            .iter()
            .map(|p| {
                (
                    p.label,
                    PartReport {
                        instances: p.ids.len(),
                        selected: p.solution.len(),
                        profit: (&p.solution.profit).into(),
                        raises: p.records.len(),
                        sum_delta: (&p.sum_delta).into(),
                        dual_objective: (&p.certificate.objective).into(),
                        scaled_dual_objective: (&p.certificate.scaled_objective).into(),
                        lambda_achieved: (&p.lambda_achieved).into(),
                        kill_violations: p.kill_violations,
                        optimum: p.optimum.as_ref().map(Num::from),
                        stats: p.stats.clone(),
                    },
                )
            })
            .collect();
        RunReport {
            digest,
            algorithm: out.algorithm.name().to_string(),
            mode: match out.mode {
                Mode::Tree => "tree".into(),
                Mode::Line => "line".into(),
            },
            seed: opts.seed,
            eps: (&opts.eps).into(),
            instances: out.instance_count,
            selected: out.solution.selected.iter().copied().collect(),
            profit: (&out.solution.profit).into(),
            optimum: out.optimum.as_ref().map(Num::from),
            ratio: out
                .ratio
                .as_ref()
                .and_then(|r| r.ratio.as_ref())
                .map(Num::from),
            ratio_bound: out.ratio.as_ref().map(|r| Num::from(&r.bound)),
            certified: out.ratio.as_ref().map(|r| r.holds),
            weak_duality: out.weak_duality,
            lambda_achieved: (&out.lambda_achieved).into(),
            delta: out.delta,
            theta: out.theta,
            depth: out.depth,
            xi: out.xi.iter().map(Num::from).collect(),
            kill_violations: out.kill_violations(),
            parts,
            stats: stats_by_part(out)
                .into_iter()
                .map(|(k, v)| (k, v.clone()))
                .collect(),
            wall_ms,
        }
    }

    /// False when the oracle ran and either check failed.
    pub fn passed(&self) -> bool {
        self.certified != Some(false) && self.weak_duality != Some(false)
    }

    pub const CSV_HEADER: &'static str =
        "digest,algorithm,mode,seed,instances,selected,profit,optimum,ratio,certified,rounds,steps";

    pub fn csv_row(&self) -> String {
        let opt = |x: &Option<Num>| x.as_ref().map(|n| n.exact.clone()).unwrap_or_default();
        let rounds: u64 = self.stats.values().map(|s| s.rounds).sum();
        let steps: u64 = self.stats.values().map(|s| s.total_steps).sum();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.digest,
            self.algorithm,
            self.mode,
            self.seed,
            self.instances,
            self.selected.len(),
            self.profit.exact,
            opt(&self.optimum),
            self.ratio.as_ref().map(|r| format!("{:.6}", r.approx)).unwrap_or_default(),
            self.certified.map(|c| c.to_string()).unwrap_or_default(),
            rounds,
            steps,
        )
    }
}
