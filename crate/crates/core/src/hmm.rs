//! Left-to-right action HMMs, their concatenation along a transcript, and
//! exact log-space Viterbi and forward-backward over the frame x state
//! lattice.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::LabelId;
use crate::error::{invalid_arg, Error, Result};
use crate::gaussian::ScoreMatrix;
use crate::math::{self, log_add};

/// Transition structure of one action class: every state either loops or
/// moves to its successor.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionModel {
    label: LabelId,
    self_logprob: Vec<f64>,
    forward_logprob: Vec<f64>,
}

impl ActionModel {
    /// `a_ii = (f - 1) / f` and `a_i,i+1 = 1 / f` where `f` is the expected
    /// number of frames per state.
    pub fn new(label: LabelId, n_states: usize, frames_per_state: usize) -> Result<Self> {
        if n_states == 0 {
            return Err(invalid_arg("an action model needs at least one state"));
        }
        if frames_per_state == 0 {
            return Err(invalid_arg("frames_per_state must be at least 1"));
        }
        let stay = (frames_per_state - 1) as f64 / frames_per_state as f64;
        Self::with_self_probs(label, &vec![stay; n_states])
    }

    /// Arbitrary per-state self-loop probabilities in `[0, 1)`.
    pub fn with_self_probs(label: LabelId, self_probs: &[f64]) -> Result<Self> {
        if self_probs.is_empty() {
            return Err(invalid_arg("an action model needs at least one state"));
        }
        if let Some(p) = self_probs.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(invalid_arg(format!("self-loop probability {p} outside [0, 1)")));
        }
        Ok(ActionModel {
            label,
            self_logprob: self_probs.iter().map(|&p| math::ln(p)).collect(),
            forward_logprob: self_probs.iter().map(|&p| math::ln(1.0 - p)).collect(),
        })
    }

    pub fn label(&self) -> LabelId {
        self.label
    }

    pub fn n_states(&self) -> usize {
        self.self_logprob.len()
    }

    pub fn self_logprob(&self, state: usize) -> f64 {
        self.self_logprob[state]
    }

    /// Log-probability of leaving `state`; for the final state this is the
    /// link into whatever follows.
    pub fn forward_logprob(&self, state: usize) -> f64 {
        self.forward_logprob[state]
    }
}

/// Number of states so that each covers about `frames_per_state` frames.
pub fn states_for_class(mean_action_length: f64, frames_per_state: usize) -> Result<usize> {
    if !(mean_action_length > 0.0) || !mean_action_length.is_finite() {
        return Err(invalid_arg(format!(
            "mean action length {mean_action_length} must be positive"
        )));
    }
    if frames_per_state == 0 {
        return Err(invalid_arg("frames_per_state must be at least 1"));
    }
    let n = libm::round(mean_action_length / frames_per_state as f64);
    Ok((n as usize).max(1))
}

/// Action models keyed by label, with a dense numbering of all their states
/// (label order, then local state order). Score matrices use this numbering
/// for their columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActionInventory {
    models: Vec<Option<ActionModel>>,
    offsets: Vec<usize>,
    total: usize,
}

impl ActionInventory {
    pub fn new(n_labels: usize) -> Self {
        ActionInventory {
            models: vec![None; n_labels],
            offsets: vec![0; n_labels],
            total: 0,
        }
    }

    pub fn insert(&mut self, model: ActionModel) {
        let id = model.label().0;
        if id >= self.models.len() {
            self.models.resize(id + 1, None);
            self.offsets.resize(id + 1, 0);
        }
        self.models[id] = Some(model);
        let mut offset = 0;
        for (m, o) in self.models.iter().zip(self.offsets.iter_mut()) {
            *o = offset;
            offset += m.as_ref().map_or(0, ActionModel::n_states);
        }
        self.total = offset;
    }

    pub fn get(&self, label: LabelId) -> Option<&ActionModel> {
        self.models.get(label.0).and_then(Option::as_ref)
    }

    /// Column of the first state of `label`.
    pub fn offset(&self, label: LabelId) -> Option<usize> {
        self.get(label).map(|_| self.offsets[label.0])
    }

    pub fn total_states(&self) -> usize {
        self.total
    }

    pub fn n_labels(&self) -> usize {
        self.models.len()
    }

    pub fn models(&self) -> impl Iterator<Item = &ActionModel> {
        self.models.iter().flatten()
    }

    /// `(label, local state)` owning a column.
    pub fn column_owner(&self, column: usize) -> Option<(LabelId, usize)> {
        self.models()
            .find(|m| {
                let o = self.offsets[m.label().0];
                (o..o + m.n_states()).contains(&column)
            })
            .map(|m| (m.label(), column - self.offsets[m.label().0]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateEntry {
    pub label: LabelId,
    /// Position of the HMM instance in the transcript.
    pub instance: usize,
    pub local: usize,
    /// Column in the inventory numbering.
    pub column: usize,
}

/// Maps sequence-HMM state ids to their instance and model state.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateIndex {
    entries: Vec<StateEntry>,
}

impl StateIndex {
    pub fn get(&self, state: usize) -> Option<&StateEntry> {
        self.entries.get(state)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[StateEntry] {
        &self.entries
    }

    pub fn state_of(&self, instance: usize, local: usize) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.instance == instance && e.local == local)
    }
}

/// Transcript-ordered chain of action HMMs. State `j` either loops or moves
/// to `j + 1`; the path starts in state 0 and must end in the last state.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceHmm {
    labels: Vec<LabelId>,
    index: StateIndex,
    stay: Vec<f64>,
    advance: Vec<f64>,
}

impl SequenceHmm {
    pub fn concat(labels: &[LabelId], inventory: &ActionInventory) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid_arg("cannot build a sequence HMM from an empty transcript"));
        }
        let mut entries = Vec::new();
        let mut stay = Vec::new();
        let mut advance = Vec::new();
        for (instance, &label) in labels.iter().enumerate() {
            let model = inventory
                .get(label)
                .ok_or_else(|| Error::MissingModel(format!("{label}")))?;
            let offset = inventory.offsets[label.0];
            for local in 0..model.n_states() {
                entries.push(StateEntry {
                    label,
                    instance,
                    local,
                    column: offset + local,
                });
                stay.push(model.self_logprob(local));
                advance.push(model.forward_logprob(local));
            }
        }
        Ok(SequenceHmm {
            labels: labels.to_vec(),
            index: StateIndex { entries },
            stay,
            advance,
        })
    }

    pub fn labels(&self) -> &[LabelId] {
        &self.labels
    }

    pub fn index(&self) -> &StateIndex {
        &self.index
    }

    pub fn n_states(&self) -> usize {
        self.stay.len()
    }

    pub fn end_state(&self) -> usize {
        self.n_states() - 1
    }

    pub fn column(&self, state: usize) -> usize {
        self.index.entries[state].column
    }

    pub fn stay_logprob(&self, state: usize) -> f64 {
        self.stay[state]
    }

    /// Log-probability of `state -> state + 1`.
    pub fn advance_logprob(&self, state: usize) -> f64 {
        self.advance[state]
    }

    /// Whether `path` starts at 0, ends at the last state and moves by 0 or 1.
    pub fn is_admissible(&self, path: &[usize]) -> bool {
        !path.is_empty()
            && path[0] == 0
            && *path.last().unwrap() == self.end_state()
            && path.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1)
    }

    /// Joint log-probability of a state path and the scored frames.
    pub fn path_log_prob(&self, path: &[usize], scores: &ScoreMatrix) -> f64 {
        let mut lp = scores.get(0, self.column(path[0]));
        for t in 1..path.len() {
            let (a, b) = (path[t - 1], path[t]);
            lp += if a == b { self.stay[a] } else { self.advance[a] };
            lp += scores.get(t, self.column(b));
        }
        lp
    }

    fn check(&self, scores: &ScoreMatrix) -> Result<()> {
        let needed = self.index.entries.iter().map(|e| e.column).max().unwrap_or(0) + 1;
        if scores.states() < needed {
            return Err(Error::DimensionMismatch {
                expected: needed,
                actual: scores.states(),
            });
        }
        if scores.frames() < self.n_states() {
            return Err(Error::InfeasibleAlignment {
                frames: scores.frames(),
                states: self.n_states(),
            });
        }
        Ok(())
    }

    /// States reachable at frame `t` given the pinned start and end.
    fn band(&self, t: usize, frames: usize) -> (usize, usize) {
        let s = self.n_states();
        let lo = (s + t).saturating_sub(frames);
        let hi = t.min(s - 1);
        (lo, hi)
    }
}

/// Frame-to-state path through a [`SequenceHmm`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateAlignment {
    pub states: Vec<usize>,
    pub log_prob: f64,
}

impl StateAlignment {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The path in inventory column ids.
    pub fn columns(&self, seq: &SequenceHmm) -> Vec<usize> {
        self.states.iter().map(|&s| seq.column(s)).collect()
    }
}

/// Most likely admissible path.
///
/// On equal scores the predecessor with the smaller state id wins, so the
/// path stays in earlier states as long as possible.
pub fn viterbi_align(seq: &SequenceHmm, scores: &ScoreMatrix) -> Result<StateAlignment> {
    seq.check(scores)?;
    let frames = scores.frames();
    let n = seq.n_states();
    let mut prev = vec![f64::NEG_INFINITY; n];
    let mut cur = vec![f64::NEG_INFINITY; n];
    let mut advanced = vec![false; frames * n];
    prev[0] = scores.get(0, seq.column(0));
    for t in 1..frames {
        let (lo, hi) = seq.band(t, frames);
        cur.fill(f64::NEG_INFINITY);
        for j in lo..=hi {
            let stay = prev[j] + seq.stay[j];
            let adv = if j > 0 {
                prev[j - 1] + seq.advance[j - 1]
            } else {
                f64::NEG_INFINITY
            };
            let best = if adv >= stay && adv > f64::NEG_INFINITY {
                advanced[t * n + j] = true;
                adv
            } else {
                stay
            };
            cur[j] = best + scores.get(t, seq.column(j));
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    let log_prob = prev[n - 1];
    if log_prob == f64::NEG_INFINITY {
        return Err(Error::NoValidPath);
    }
    let mut states = vec![0; frames];
    let mut j = n - 1;
    for t in (0..frames).rev() {
        states[t] = j;
        if t > 0 && advanced[t * n + j] {
            j -= 1;
        }
    }
    debug_assert_eq!(j, 0);
    Ok(StateAlignment { states, log_prob })
}

/// Per-frame state occupation probabilities of a sequence HMM.
#[derive(Debug, Clone, PartialEq)]
pub struct Posteriors {
    frames: usize,
    states: usize,
    weights: Vec<f64>,
    /// `log p(x_1..x_T)` summed over all admissible paths.
    pub log_likelihood: f64,
}

impl Posteriors {
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn states(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn get(&self, t: usize, state: usize) -> f64 {
        self.weights[t * self.states + state]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.weights[t * self.states..(t + 1) * self.states]
    }
}

fn forward(seq: &SequenceHmm, scores: &ScoreMatrix) -> Vec<f64> {
    let frames = scores.frames();
    let n = seq.n_states();
    let mut alpha = vec![f64::NEG_INFINITY; frames * n];
    alpha[0] = scores.get(0, seq.column(0));
    for t in 1..frames {
        let (lo, hi) = seq.band(t, frames);
        for j in lo..=hi {
            let p = (t - 1) * n;
            let stay = alpha[p + j] + seq.stay[j];
            let adv = if j > 0 {
                alpha[p + j - 1] + seq.advance[j - 1]
            } else {
                f64::NEG_INFINITY
            };
            alpha[t * n + j] = log_add(stay, adv) + scores.get(t, seq.column(j));
        }
    }
    alpha
}

/// Total log-likelihood over all admissible paths.
pub fn forward_log_likelihood(seq: &SequenceHmm, scores: &ScoreMatrix) -> Result<f64> {
    seq.check(scores)?;
    let alpha = forward(seq, scores);
    let ll = alpha[scores.frames() * seq.n_states() - 1];
    if ll == f64::NEG_INFINITY {
        return Err(Error::NoValidPath);
    }
    Ok(ll)
}

/// Forward-backward occupation weights `w_j(t) ~ alpha_j(t) beta_j(t)`,
/// normalized per frame.
pub fn forward_backward(seq: &SequenceHmm, scores: &ScoreMatrix) -> Result<Posteriors> {
    seq.check(scores)?;
    let frames = scores.frames();
    let n = seq.n_states();
    let alpha = forward(seq, scores);
    let ll = alpha[frames * n - 1];
    if ll == f64::NEG_INFINITY {
        return Err(Error::NoValidPath);
    }
    let mut beta = vec![f64::NEG_INFINITY; frames * n];
    beta[frames * n - 1] = 0.0;
    for t in (0..frames - 1).rev() {
        let (lo, hi) = seq.band(t, frames);
        let next = (t + 1) * n;
        for j in lo..=hi {
            let stay = seq.stay[j] + scores.get(t + 1, seq.column(j)) + beta[next + j];
            let adv = if j + 1 < n {
                seq.advance[j] + scores.get(t + 1, seq.column(j + 1)) + beta[next + j + 1]
            } else {
                f64::NEG_INFINITY
            };
            beta[t * n + j] = log_add(stay, adv);
        }
    }
    let mut weights = vec![0.0; frames * n];
    for t in 0..frames {
        let row = &mut weights[t * n..(t + 1) * n];
        let mut total = 0.0;
        for (j, w) in row.iter_mut().enumerate() {
            let g = alpha[t * n + j] + beta[t * n + j] - ll;
            *w = if g == f64::NEG_INFINITY { 0.0 } else { math::exp(g) };
            total += *w;
        }
        if !(total > 0.0) {
            return Err(Error::NoValidPath);
        }
        for w in row.iter_mut() {
            *w /= total;
        }
    }
    Ok(Posteriors {
        frames,
        states: n,
        weights,
        log_likelihood: ll,
    })
}
