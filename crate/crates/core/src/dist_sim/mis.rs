use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::primal_dual::Tuple;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MisOutcome {
    /// Local indices, ascending.
    pub members: Vec<usize>,
    pub rounds: u32,
    /// Priority and join announcements that crossed `counts`.
    pub messages: u64,
}

/// Key for a step's randomness: the run seed followed by the tuple.
pub fn step_key(seed: u64, tuple: Tuple) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&u64::from(tuple.epoch).to_le_bytes());
    key[16..24].copy_from_slice(&u64::from(tuple.stage).to_le_bytes());
    key[24..].copy_from_slice(&u64::from(tuple.step).to_le_bytes());
    key
}

/// Luby's randomized MIS. Each round every live vertex draws a priority from
/// its own stream (keyed by seed, tuple and label), joins when it beats all
/// live neighbors (ties broken by label), and joiners retire their
/// neighbors. `counts(v, w)` says whether a `v -> w` message crosses
/// processors and should be counted.
pub fn luby_mis(
    graph: &Graph,
    seed: u64,
    tuple: Tuple,
    counts: impl Fn(usize, usize) -> bool,
) -> MisOutcome {
    #[derive(Clone, Copy, PartialEq, Eq)]
    enum State {
        Live,
        In,
        Out,
    }
    let key = step_key(seed, tuple);
    let mut rngs: Vec<ChaCha8Rng> = graph
        .labels
        .iter()
        .map(|&l| {
            let mut rng = ChaCha8Rng::from_seed(key);
            rng.set_stream(l as u64);
            rng
        })
        .collect();
    let n = graph.len();
    let mut state = vec![State::Live; n];
    let mut priority = vec![(0u64, 0usize); n];
    let mut rounds = 0;
    let mut messages = 0;
    loop {
        let live: Vec<usize> = (0..n).filter(|&v| state[v] == State::Live).collect();
        if live.is_empty() {
            break;
        }
        rounds += 1;
        for &v in &live {
            priority[v] = (rngs[v].next_u64(), graph.labels[v]);
        }
        let mut winners = Vec::new();
        for &v in &live {
            let mut best = true;
            for &w in &graph.adj[v] {
                if state[w] != State::Live {
                    continue;
                }
                if counts(v, w) {
                    messages += 1;
                }
                if priority[w] > priority[v] {
                    best = false;
                }
            }
            if best {
                winners.push(v);
            }
        }
        for &v in &winners {
            state[v] = State::In;
        }
        for &v in &winners {
            for &w in &graph.adj[v] {
                if state[w] == State::Live {
                    if counts(v, w) {
                        messages += 1;
                    }
                    state[w] = State::Out;
                }
            }
        }
    }
    MisOutcome {
        members: (0..n).filter(|&v| state[v] == State::In).collect(),
        rounds,
        messages,
    }
}
