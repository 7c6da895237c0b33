use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{Demand, DemandShape, Mode, ModelError, Problem, Processor, TreeNetwork, Vertex};
use crate::rational::Q;

/// On-disk JSON instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub mode: String,
    pub n: usize,
    pub networks: Vec<NetworkEntry>,
    pub processors: Vec<ProcessorEntry>,
    pub demands: Vec<DemandEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkEntry {
    pub id: u32,
    /// Omitted or empty for line resources, which are always the path `1..n`.
    #[serde(default)]
    pub edges: Vec<[Vertex; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessorEntry {
    pub id: u32,
    pub access: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandEntry {
    pub id: u32,
    pub owner: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rt: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dl: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<usize>,
    pub profit_num: i64,
    pub height_num: i64,
    pub denom: i64,
}

impl InstanceFile {
    pub fn to_problem(&self) -> Result<Problem, ModelError> {
        let mode = match self.mode.as_str() {
            "tree" => Mode::Tree,
            "line" => Mode::Line,
            other => return Err(ModelError::UnknownMode(other.to_string())),
        };
        if self.n == 0 {
            return Err(ModelError::EmptyVertexSet);
        }

        let mut net_index = HashMap::new();
        let mut networks = Vec::with_capacity(self.networks.len());
        for entry in &self.networks {
            if net_index.insert(entry.id, networks.len()).is_some() {
                return Err(ModelError::DuplicateId {
                    what: "network",
                    id: entry.id,
                });
            }
            let net = if mode == Mode::Line && entry.edges.is_empty() {
                TreeNetwork::line(entry.id, self.n)?
            } else {
                let edges: Vec<_> = entry.edges.iter().map(|e| (e[0], e[1])).collect();
                TreeNetwork::new(entry.id, self.n, &edges)?
            };
            networks.push(net);
        }

        let mut proc_index = HashMap::new();
        let mut owned: Vec<Option<usize>> = vec![None; self.processors.len()];
        for (i, p) in self.processors.iter().enumerate() {
            if proc_index.insert(p.id, i).is_some() {
                return Err(ModelError::DuplicateId {
                    what: "processor",
                    id: p.id,
                });
            }
        }
        let mut demands = Vec::with_capacity(self.demands.len());
        for (i, d) in self.demands.iter().enumerate() {
            let owner = *proc_index.get(&d.owner).ok_or(ModelError::UnknownId {
                what: "processor",
                id: d.owner,
            })?;
            if owned[owner].is_some() {
                return Err(ModelError::Ownership {
                    processor: d.owner,
                    count: 2,
                });
            }
            owned[owner] = Some(i);
            if d.denom <= 0 {
                return Err(ModelError::BadDenominator { demand: d.id });
            }
            let shape = match (mode, d.u, d.v, d.rt, d.dl, d.rho) {
                (Mode::Tree, Some(u), Some(v), None, None, None) => DemandShape::Pair { u, v },
                (Mode::Line, None, None, Some(release), Some(deadline), Some(processing)) => {
                    DemandShape::Window {
                        release,
                        deadline,
                        processing,
                    }
                }
                _ => return Err(ModelError::ShapeMismatch { demand: d.id }),
            };
            demands.push(Demand {
                id: d.id,
                owner,
                shape,
                profit: Q::new(d.profit_num.into(), d.denom.into()),
                height: Q::new(d.height_num.into(), d.denom.into()),
            });
        }

        let mut processors = Vec::with_capacity(self.processors.len());
        for (i, p) in self.processors.iter().enumerate() {
            let demand = owned[i].ok_or(ModelError::Ownership {
                processor: p.id,
                count: 0,
            })?;
            let mut access = Vec::with_capacity(p.access.len());
            for a in &p.access {
                let idx = *net_index.get(a).ok_or(ModelError::UnknownId {
                    what: "network",
                    id: *a,
                })?;
                access.push(idx);
            }
            access.sort_unstable();
            access.dedup();
            processors.push(Processor {
                id: p.id,
                access,
                demand,
            });
        }

        Problem::new(mode, self.n, networks, processors, demands)
    }

    /// Serializes a problem; each demand's profit and height share one denominator.
    pub fn from_problem(problem: &Problem) -> Self {
        let mode = match problem.mode() {
            Mode::Tree => "tree",
            Mode::Line => "line",
        };
        let networks = problem
            .networks()
            .iter()
            .map(|net| NetworkEntry {
                id: net.id(),
                edges: if problem.mode() == Mode::Line {
                    Vec::new()
                } else {
                    net.edges().into_iter().map(|(u, v)| [u, v]).collect()
                },
            })
            .collect();
        let processors = problem
            .processors()
            .iter()
            .map(|p| ProcessorEntry {
                id: p.id,
                access: p.access.iter().map(|&a| problem.network(a).id()).collect(),
            })
            .collect();
        let demands = problem
            .demands()
            .iter()
            .map(|d| {
                let denom: BigInt = d.profit.denom().lcm(d.height.denom());
                let num = |x: &Q| {
                    (x.numer() * (&denom / x.denom()))
                        .to_i64()
                        .expect("numerator fits in i64")
                };
                let mut entry = DemandEntry {
                    id: d.id,
                    owner: problem.processors()[d.owner].id,
                    u: None,
                    v: None,
                    rt: None,
                    dl: None,
                    rho: None,
                    profit_num: num(&d.profit),
                    height_num: num(&d.height),
                    denom: denom.to_i64().expect("denominator fits in i64"),
                };
                match d.shape {
                    DemandShape::Pair { u, v } => {
                        entry.u = Some(u);
                        entry.v = Some(v);
                    }
                    DemandShape::Window {
                        release,
                        deadline,
                        processing,
                    } => {
                        entry.rt = Some(release);
                        entry.dl = Some(deadline);
                        entry.rho = Some(processing);
                    }
                }
                entry
            })
            .collect();
        InstanceFile {
            mode: mode.to_string(),
            n: problem.n(),
            networks,
            processors,
            demands,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}
