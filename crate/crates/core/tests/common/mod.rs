//! Brute-force reference computations shared by the integration tests.
//! Nothing here calls the lattice recursions under test.

#![allow(dead_code)]

use actseg_core::grammar::{BigramModel, Next, Prev};
use actseg_core::hmm::{ActionInventory, ActionModel, SequenceHmm};
use actseg_core::{LabelId, ScoreMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every path that starts in state 0, ends in `states - 1` and moves by 0
/// or 1 per frame.
pub fn admissible_paths(states: usize, frames: usize) -> Vec<Vec<usize>> {
    fn rec(states: usize, frames: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let t = path.len();
        let cur = *path.last().unwrap();
        if t == frames {
            if cur == states - 1 {
                out.push(path.clone());
            }
            return;
        }
        for next in [cur, cur + 1] {
            // remaining frames must still reach the end state
            if next < states && states - 1 - next <= frames - 1 - t {
                path.push(next);
                rec(states, frames, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    if states >= 1 && frames >= states {
        rec(states, frames, &mut vec![0], &mut out);
    }
    out
}

/// Log-probability of a path using the raw transition parameters.
pub fn path_score(
    labels: &[LabelId],
    inventory: &ActionInventory,
    path: &[usize],
    scores: &ScoreMatrix,
) -> f64 {
    // flatten (column, stay, leave) for each sequence state
    let mut flat = Vec::new();
    for &l in labels {
        let m = inventory.get(l).unwrap();
        let o = inventory.offset(l).unwrap();
        for j in 0..m.n_states() {
            flat.push((o + j, m.self_logprob(j), m.forward_logprob(j)));
        }
    }
    let mut lp = scores.get(0, flat[path[0]].0);
    for t in 1..path.len() {
        let (a, b) = (path[t - 1], path[t]);
        lp += if a == b { flat[a].1 } else { flat[a].2 };
        lp += scores.get(t, flat[b].0);
    }
    lp
}

pub fn logsumexp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Occupation probabilities from full path enumeration.
pub fn enumerated_posteriors(
    labels: &[LabelId],
    inventory: &ActionInventory,
    scores: &ScoreMatrix,
    states: usize,
) -> Vec<Vec<f64>> {
    let frames = scores.frames();
    let paths = admissible_paths(states, frames);
    let lps: Vec<f64> = paths
        .iter()
        .map(|p| path_score(labels, inventory, p, scores))
        .collect();
    let total = logsumexp(&lps);
    let mut post = vec![vec![0.0; states]; frames];
    for (p, lp) in paths.iter().zip(&lps) {
        let w = (lp - total).exp();
        for (t, &s) in p.iter().enumerate() {
            post[t][s] += w;
        }
    }
    post
}

pub struct Instance {
    pub inventory: ActionInventory,
    pub labels: Vec<LabelId>,
    pub seq: SequenceHmm,
    pub scores: ScoreMatrix,
}

/// Random sequence HMM of up to 3 actions and at most 6 states, with
/// 1..=8 frames and scores in [-6, 0].
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n_labels = 3;
        let sizes: Vec<usize> = (0..n_labels).map(|_| rng.random_range(1..=3)).collect();
        let k = rng.random_range(1..=3);
        let labels: Vec<LabelId> = (0..k).map(|_| LabelId(rng.random_range(0..n_labels))).collect();
        let states: usize = labels.iter().map(|l| sizes[l.0]).sum();
        if states > 6 {
            continue;
        }
        let mut inventory = ActionInventory::new(n_labels);
        for (l, &n) in sizes.iter().enumerate() {
            let probs: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.98)).collect();
            inventory.insert(ActionModel::with_self_probs(LabelId(l), &probs).unwrap());
        }
        let frames = rng.random_range(states..=8);
        let cols = inventory.total_states();
        let data = (0..frames * cols).map(|_| rng.random_range(-6.0..0.0)).collect();
        let scores = ScoreMatrix::new(frames, cols, data).unwrap();
        let seq = SequenceHmm::concat(&labels, &inventory).unwrap();
        return Instance {
            inventory,
            labels,
            seq,
            scores,
        };
    }
}

/// Every label sequence of length `1..=max_len` over `n_labels` labels.
pub fn label_sequences(n_labels: usize, max_len: usize) -> Vec<Vec<LabelId>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<LabelId>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &layer {
            for l in 0..n_labels {
                let mut v = s.clone();
                v.push(LabelId(l));
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Best (score, label sequence, state path) over all label sequences and
/// all of their alignments, scoring bigram start, link and end terms.
pub fn brute_force_bigram(
    inventory: &ActionInventory,
    bigram: &BigramModel,
    scores: &ScoreMatrix,
) -> Option<(f64, Vec<LabelId>)> {
    let frames = scores.frames();
    let mut best: Option<(f64, Vec<LabelId>)> = None;
    for labels in label_sequences(inventory.n_labels(), frames) {
        let states: usize = labels.iter().map(|l| inventory.get(*l).unwrap().n_states()).sum();
        if states > frames {
            continue;
        }
        let mut lm = bigram.log_prob(Prev::Start, Next::Label(labels[0]));
        for w in labels.windows(2) {
            lm += bigram.log_prob(Prev::Label(w[0]), Next::Label(w[1]));
        }
        lm += bigram.log_prob(Prev::Label(*labels.last().unwrap()), Next::End);
        if lm == f64::NEG_INFINITY {
            continue;
        }
        for path in admissible_paths(states, frames) {
            let lp = path_score(&labels, inventory, &path, scores) + lm;
            if lp > f64::NEG_INFINITY && best.as_ref().map_or(true, |(b, _)| lp > *b) {
                best = Some((lp, labels.clone()));
            }
        }
    }
    best
}

/// Random bigram rows with some forbidden transitions.
pub fn random_bigram(rng: &mut ChaCha8Rng, n_labels: usize) -> BigramModel {
    let mut entries = Vec::new();
    let froms = std::iter::once(Prev::Start).chain((0..n_labels).map(|l| Prev::Label(LabelId(l))));
    for from in froms {
        let mut tos: Vec<Next> = (0..n_labels).map(|l| Next::Label(LabelId(l))).collect();
        if from != Prev::Start {
            tos.push(Next::End);
        }
        let weights: Vec<f64> = tos
            .iter()
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.1..1.0) })
            .collect();
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            continue;
        }
        for (to, w) in tos.into_iter().zip(weights) {
            if w > 0.0 {
                entries.push((from, to, (w / total).ln()));
            }
        }
    }
    BigramModel::from_entries(n_labels, entries).unwrap()
}
