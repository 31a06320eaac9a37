//! Test-side oracles, written against the plain definitions and kept
//! independent of the library's data structures and algorithms.
//!
//! Shared between test binaries; not every binary uses every oracle.
#![allow(dead_code)]

use std::collections::BTreeMap;

/// Logistic curve, restated locally.
pub fn sigma(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

// ---------------------------------------------------------------------------
// Deterministic engine oracle: naive recomputation from the raw definition.
// ---------------------------------------------------------------------------

/// A raw deterministic network: thresholds plus a flat edge list.
#[derive(Debug, Clone)]
pub struct RawDetNet {
    pub thresholds: Vec<f64>,
    /// (src, dst, weight)
    pub edges: Vec<(usize, usize, f64)>,
}

/// Recompute the firing history by scanning the whole edge list each round:
/// a neuron fires at round r+1 iff the summed weights from sources firing at
/// round r reach its threshold.
pub fn naive_det_run(net: &RawDetNet, init: &[bool], rounds: usize) -> Vec<Vec<bool>> {
    let n = net.thresholds.len();
    assert_eq!(init.len(), n);
    let mut history = vec![init.to_vec()];
    for _ in 0..rounds {
        let prev = history.last().unwrap();
        let mut pot = vec![0.0f64; n];
        for &(src, dst, w) in &net.edges {
            if prev[src] {
                pot[dst] += w;
            }
        }
        history.push((0..n).map(|i| pot[i] >= net.thresholds[i]).collect());
    }
    history
}

// ---------------------------------------------------------------------------
// Inequality grid oracle: brute-force enumeration of the valid tuples.
// ---------------------------------------------------------------------------

/// One integer parameter tuple in the order (h, cur, l, s, s_resid, exc, inh).
pub type Tuple = [i32; 7];

/// Direct restatement of the six circuit inequalities plus the residual
/// bound, on integers.
pub fn tuple_valid(t: Tuple) -> bool {
    let [h, cur, l, s, s_resid, exc, inh] = t;
    h <= cur + l
        && h > s + cur
        && h <= exc + s + cur
        && h > exc + cur
        && h > cur + l + inh
        && h <= cur + l + inh + s_resid
        && s > 0
        && s_resid >= 0
        && s_resid < s
}

/// Enumerate every valid tuple on the grid [-5,5]^7.
pub fn valid_tuples() -> Vec<Tuple> {
    let r = -5..=5i32;
    let mut out = Vec::new();
    for h in r.clone() {
        for cur in r.clone() {
            for l in r.clone() {
                for s in r.clone() {
                    for s_resid in r.clone() {
                        for exc in r.clone() {
                            for inh in r.clone() {
                                let t = [h, cur, l, s, s_resid, exc, inh];
                                if tuple_valid(t) {
                                    out.push(t);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exact cascade oracle: trajectory enumeration over a small stochastic net.
// ---------------------------------------------------------------------------

/// A raw stochastic network for the enumeration oracle.
#[derive(Debug, Clone)]
pub struct RawStochNet {
    pub thresholds: Vec<f64>,
    pub steepness: Vec<f64>,
    pub failure: Vec<f64>,
    pub edges: Vec<(usize, usize, f64)>,
    /// Neurons clamped firing for the first two rounds (round 0 and 1).
    pub start: Vec<usize>,
    /// Output neurons competing for the persistent-winner slot.
    pub outputs: Vec<usize>,
}

impl RawStochNet {
    fn n(&self) -> usize {
        self.thresholds.len()
    }

    /// Probability that neuron `i` fires next, given the current firing
    /// state and whether the start clamp is active for the deciding round.
    fn fire_prob(&self, state: u32, i: usize, clamped: bool) -> f64 {
        let mut pot = 0.0;
        for &(src, dst, w) in &self.edges {
            if dst == i && state & (1 << src) != 0 {
                pot += w;
            }
        }
        if clamped && self.start.contains(&i) {
            pot += 1e6;
        }
        let p = sigma(self.steepness[i] * (pot - self.thresholds[i]));
        // an independent failure event flips the outcome
        p * (1.0 - self.failure[i]) + (1.0 - p) * self.failure[i]
    }

    /// Transition matrix for one round: probability of each next state.
    fn transition(&self, clamped: bool) -> Vec<Vec<f64>> {
        let n = self.n();
        let states = 1usize << n;
        let mut m = vec![vec![0.0; states]; states];
        for (s, row) in m.iter_mut().enumerate() {
            let probs: Vec<f64> = (0..n).map(|i| self.fire_prob(s as u32, i, clamped)).collect();
            for (t, cell) in row.iter_mut().enumerate() {
                let mut p = 1.0;
                for (i, &pi) in probs.iter().enumerate() {
                    p *= if t & (1 << i) != 0 { pi } else { 1.0 - pi };
                }
                *cell = p;
            }
        }
        m
    }

    /// Winner of a final window (three consecutive states): the unique
    /// output firing in all of them while no other output fires in any.
    fn window_winner(&self, w: [usize; 3]) -> Option<usize> {
        let all = w[0] & w[1] & w[2];
        let any = w[0] | w[1] | w[2];
        let mut winner = None;
        for &o in &self.outputs {
            if all & (1 << o) != 0 {
                if winner.is_some() {
                    return None;
                }
                winner = Some(o);
            }
        }
        let winner = winner?;
        for &o in &self.outputs {
            if o != winner && any & (1 << o) != 0 {
                return None;
            }
        }
        Some(winner)
    }

    /// Exact distribution of the persistent winner at horizon 4 (window =
    /// final three states), computed by enumerating state trajectories. The
    /// missing mass is the no-winner probability.
    pub fn exact_distribution_h4(&self) -> BTreeMap<usize, f64> {
        let n = self.n();
        let states = 1usize << n;
        let init: usize = self.start.iter().map(|&i| 1usize << i).sum();

        let t1 = self.transition(true); // deciding round 1: clamp active
        let t_free = self.transition(false); // rounds 2..4

        // Marginal at round 2 via the Markov property.
        let mut p2 = vec![0.0; states];
        for s1 in 0..states {
            let p_s1 = t1[init][s1];
            if p_s1 == 0.0 {
                continue;
            }
            for s2 in 0..states {
                p2[s2] += p_s1 * t_free[s1][s2];
            }
        }

        let mut dist: BTreeMap<usize, f64> = BTreeMap::new();
        for s2 in 0..states {
            if p2[s2] == 0.0 {
                continue;
            }
            for s3 in 0..states {
                let p23 = p2[s2] * t_free[s2][s3];
                if p23 == 0.0 {
                    continue;
                }
                for s4 in 0..states {
                    if let Some(w) = self.window_winner([s2, s3, s4]) {
                        *dist.entry(w).or_insert(0.0) += p23 * t_free[s3][s4];
                    }
                }
            }
        }
        dist
    }
}

/// Total-variation distance between two winner distributions (the implicit
/// no-winner outcome absorbs the missing mass on each side).
pub fn total_variation(a: &BTreeMap<usize, f64>, b: &BTreeMap<usize, f64>) -> f64 {
    let mut keys: Vec<usize> = a.keys().chain(b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut tv = 0.0;
    for k in keys {
        tv += (a.get(&k).unwrap_or(&0.0) - b.get(&k).unwrap_or(&0.0)).abs();
    }
    let none_a = 1.0 - a.values().sum::<f64>();
    let none_b = 1.0 - b.values().sum::<f64>();
    tv += (none_a - none_b).abs();
    tv / 2.0
}

// ---------------------------------------------------------------------------
// Oja oracle: the closed recurrence iterated independently.
// ---------------------------------------------------------------------------

/// w_{n+1} = w_n + eta * (1 - w_n), iterated from w0.
pub fn oja_iterate(w0: f64, eta: f64, n: u32) -> f64 {
    let mut w = w0;
    for _ in 0..n {
        w += eta * (1.0 - w);
    }
    w
}
