//! Seeded random instance generation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Demand, DemandShape, Mode, ModelError, Problem, Processor, TreeNetwork, Vertex};
use crate::rational::{q, q_int};

/// Heights are multiples of `1 / HEIGHT_DENOM`.
pub const HEIGHT_DENOM: i64 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeightProfile {
    /// Every height is 1.
    Unit,
    /// Heights in `(0, 1/2]`.
    Narrow,
    /// Heights in `(1/2, 1]`.
    Wide,
    /// Heights anywhere in `(0, 1]`.
    Mixed,
}

impl std::str::FromStr for HeightProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit" => Ok(Self::Unit),
            "narrow" => Ok(Self::Narrow),
            "wide" => Ok(Self::Wide),
            "mixed" => Ok(Self::Mixed),
            _ => Err(format!("unknown height profile {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenParams {
    pub mode: Mode,
    pub n: usize,
    /// Processors, one demand each.
    pub m: usize,
    /// Networks.
    pub r: usize,
    pub seed: u64,
    pub heights: HeightProfile,
    /// Inclusive integer profit range.
    pub profit_range: (u64, u64),
    /// Line mode: largest `dl - rt - rho + 1`.
    pub max_slack: usize,
    /// Line mode: largest processing time.
    pub max_processing: usize,
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Uniform random labeled tree on `1..=n` from a random Prüfer sequence.
pub fn random_tree<R: Rng>(id: u32, n: usize, rng: &mut R) -> TreeNetwork {
    let edges = if n <= 2 {
        if n == 2 {
            vec![(1, 2)]
        } else {
            Vec::new()
        }
    } else {
        let code: Vec<Vertex> = (0..n - 2).map(|_| rng.gen_range(1..=n)).collect();
        prufer_edges(n, &code)
    };
    TreeNetwork::new(id, n, &edges).expect("Prüfer decoding yields a tree")
}

fn prufer_edges(n: usize, code: &[Vertex]) -> Vec<(Vertex, Vertex)> {
    let mut degree = vec![1usize; n + 1];
    for &x in code {
        degree[x] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<Vertex>> =
        (1..=n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in code {
        let Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.push(Reverse(x));
        }
    }
    let Reverse(a) = leaves.pop().expect("two leaves remain");
    let Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push((a, b));
    edges
}

fn random_height<R: Rng>(profile: HeightProfile, rng: &mut R) -> (i64, i64) {
    let half = HEIGHT_DENOM / 2;
    let k = match profile {
        HeightProfile::Unit => return (1, 1),
        HeightProfile::Narrow => rng.gen_range(1..=half),
        HeightProfile::Wide => rng.gen_range(half + 1..=HEIGHT_DENOM),
        HeightProfile::Mixed => rng.gen_range(1..=HEIGHT_DENOM),
    };
    (k, HEIGHT_DENOM)
}

pub fn generate(params: &GenParams) -> Result<Problem, GenError> {
    let GenParams {
        mode,
        n,
        m,
        r,
        seed,
        heights,
        profit_range: (pmin, pmax),
        max_slack,
        max_processing,
    } = *params;
    if n < 2 {
        return Err(GenError::Params("n must be at least 2".into()));
    }
    if r == 0 {
        return Err(GenError::Params("r must be at least 1".into()));
    }
    if pmin == 0 || pmin > pmax || pmax > i64::MAX as u64 {
        return Err(GenError::Params("profit range must satisfy 1 <= min <= max".into()));
    }
    if mode == Mode::Line && max_processing == 0 {
        return Err(GenError::Params("line mode needs max_processing >= 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let networks: Vec<TreeNetwork> = (0..r)
        .map(|i| match mode {
            Mode::Tree => random_tree(i as u32, n, &mut rng),
            Mode::Line => TreeNetwork::line(i as u32, n).expect("n >= 2"),
        })
        .collect();

    let mut processors = Vec::with_capacity(m);
    let mut demands = Vec::with_capacity(m);
    for i in 0..m {
        let k = rng.gen_range(1..=r);
        let mut access = sample(&mut rng, r, k).into_vec();
        access.sort_unstable();
        processors.push(Processor {
            id: i as u32,
            access,
            demand: i,
        });

        let shape = match mode {
            Mode::Tree => {
                let u = rng.gen_range(1..=n);
                let mut v = rng.gen_range(1..n);
                if v >= u {
                    v += 1;
                }
                DemandShape::Pair { u, v }
            }
            Mode::Line => {
                let slots = n - 1;
                let processing = rng.gen_range(1..=max_processing.min(slots));
                let slack = rng.gen_range(0..=max_slack.min(slots - processing));
                let span = processing + slack;
                let release = rng.gen_range(1..=slots + 1 - span);
                DemandShape::Window {
                    release,
                    deadline: release + span - 1,
                    processing,
                }
            }
        };
        let profit = rng.gen_range(pmin..=pmax) as i64;
        let (hn, hd) = random_height(heights, &mut rng);
        demands.push(Demand {
            id: i as u32,
            owner: i,
            shape,
            profit: q_int(profit),
            height: q(hn, hd),
        });
    }
    Ok(Problem::new(mode, n, networks, processors, demands)?)
}
