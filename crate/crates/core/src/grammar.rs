//! Decoding without transcripts: a path grammar (the set of action
//! sequences seen in training) or a bigram model over action labels
//! constrains which label sequences a video may be segmented into.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{segmentation_from_alignment, LabelId, Segmentation, Transcript};
use crate::error::{invalid_arg, Error, Result};
use crate::gaussian::ScoreMatrix;
use crate::hmm::{viterbi_align, ActionInventory, SequenceHmm, StateAlignment};
use crate::math;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarPath {
    pub labels: Vec<LabelId>,
    pub count: usize,
    pub activity: Option<String>,
}

/// Distinct training transcripts in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathGrammar {
    paths: Vec<GrammarPath>,
}

impl PathGrammar {
    /// Merges identical label sequences. Each path keeps the activity tag
    /// most of its transcripts carry; ties go to the tag seen first.
    pub fn build<'a, I>(transcripts: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Transcript>,
    {
        let mut order: Vec<Vec<LabelId>> = Vec::new();
        let mut groups: BTreeMap<Vec<LabelId>, (usize, Vec<(String, usize)>)> = BTreeMap::new();
        for t in transcripts {
            if t.is_empty() {
                return Err(invalid_arg("empty transcript in grammar input"));
            }
            let entry = groups.entry(t.actions.clone()).or_insert_with(|| {
                order.push(t.actions.clone());
                (0, Vec::new())
            });
            entry.0 += 1;
            if let Some(tag) = &t.activity {
                match entry.1.iter_mut().find(|(name, _)| name == tag) {
                    Some((_, n)) => *n += 1,
                    None => entry.1.push((tag.clone(), 1)),
                }
            }
        }
        let paths = order
            .into_iter()
            .map(|labels| {
                let (count, tags) = groups.remove(&labels).unwrap();
                let mut activity: Option<(String, usize)> = None;
                for (tag, n) in tags {
                    if activity.as_ref().map_or(true, |(_, best)| n > *best) {
                        activity = Some((tag, n));
                    }
                }
                GrammarPath {
                    labels,
                    count,
                    activity: activity.map(|(t, _)| t),
                }
            })
            .collect();
        Self::from_paths(paths)
    }

    pub fn from_paths(paths: Vec<GrammarPath>) -> Result<Self> {
        if paths.is_empty() {
            return Err(invalid_arg("a path grammar needs at least one path"));
        }
        if paths.iter().any(|p| p.labels.is_empty() || p.count == 0) {
            return Err(invalid_arg("grammar paths need labels and a positive count"));
        }
        Ok(PathGrammar { paths })
    }

    pub fn paths(&self) -> &[GrammarPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    fn total_count(&self) -> usize {
        self.paths.iter().map(|p| p.count).sum()
    }
}

/// A label transition context: the virtual start, or a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Prev {
    Start,
    Label(LabelId),
}

/// A label transition target: a label, or the virtual end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Next {
    Label(LabelId),
    End,
}

/// First-order label transition model with virtual start and end symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramModel {
    n_labels: usize,
    /// Row `0` is the start symbol, row `a + 1` label `a`; column `b` is
    /// label `b` and column `n_labels` the end symbol.
    logprob: Vec<f64>,
    smoothing: f64,
}

impl BigramModel {
    /// `p(b|a) = (c(a b) + k) / (c(a .) + k V)` with `V = n_labels + 1`.
    ///
    /// With `k = 0` a label never followed by anything has no outgoing
    /// mass at all.
    pub fn build<'a, I>(transcripts: I, n_labels: usize, smoothing: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Transcript>,
    {
        if !(smoothing >= 0.0) || !smoothing.is_finite() {
            return Err(invalid_arg("smoothing must be a nonnegative real"));
        }
        let width = n_labels + 1;
        let mut counts = vec![0.0f64; width * width];
        let mut seen = false;
        for t in transcripts {
            seen = true;
            let mut prev = 0;
            for &l in &t.actions {
                if l.0 >= n_labels {
                    return Err(Error::UnknownLabel(alloc::format!("{l}")));
                }
                counts[prev * width + l.0] += 1.0;
                prev = l.0 + 1;
            }
            counts[prev * width + n_labels] += 1.0;
        }
        if !seen {
            return Err(invalid_arg("a bigram model needs at least one transcript"));
        }
        let mut logprob = vec![f64::NEG_INFINITY; width * width];
        for row in 0..width {
            let r = &counts[row * width..(row + 1) * width];
            let total: f64 = r.iter().sum::<f64>() + smoothing * width as f64;
            if total == 0.0 {
                continue;
            }
            for (col, &c) in r.iter().enumerate() {
                let p = (c + smoothing) / total;
                logprob[row * width + col] = if p > 0.0 { math::ln(p) } else { f64::NEG_INFINITY };
            }
        }
        Ok(BigramModel {
            n_labels,
            logprob,
            smoothing,
        })
    }

    /// Model from explicit log-probabilities; pairs not listed get `-inf`.
    pub fn from_entries(
        n_labels: usize,
        entries: impl IntoIterator<Item = (Prev, Next, f64)>,
    ) -> Result<Self> {
        let width = n_labels + 1;
        let mut logprob = vec![f64::NEG_INFINITY; width * width];
        for (from, to, lp) in entries {
            if lp.is_nan() || lp > 0.0 {
                return Err(Error::InvalidData(alloc::format!("bad log-probability {lp}")));
            }
            let idx = Self::slot(n_labels, from, to)
                .ok_or_else(|| invalid_arg("bigram entry outside the label space"))?;
            logprob[idx] = lp;
        }
        for row in 0..width {
            let r = &logprob[row * width..(row + 1) * width];
            let mass: f64 = r.iter().map(|&v| math::exp(v)).sum();
            if mass != 0.0 && (mass - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidData(alloc::format!(
                    "outgoing probabilities of row {row} sum to {mass}"
                )));
            }
        }
        Ok(BigramModel {
            n_labels,
            logprob,
            smoothing: 0.0,
        })
    }

    fn slot(n_labels: usize, from: Prev, to: Next) -> Option<usize> {
        let row = match from {
            Prev::Start => 0,
            Prev::Label(l) if l.0 < n_labels => l.0 + 1,
            Prev::Label(_) => return None,
        };
        let col = match to {
            Next::Label(l) if l.0 < n_labels => l.0,
            Next::Label(_) => return None,
            Next::End => n_labels,
        };
        Some(row * (n_labels + 1) + col)
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn log_prob(&self, from: Prev, to: Next) -> f64 {
        Self::slot(self.n_labels, from, to).map_or(f64::NEG_INFINITY, |i| self.logprob[i])
    }

    /// All finite entries in row-major order.
    pub fn entries(&self) -> Vec<(Prev, Next, f64)> {
        let mut out = Vec::new();
        let froms = core::iter::once(Prev::Start)
            .chain((0..self.n_labels).map(|l| Prev::Label(LabelId(l))));
        for from in froms {
            let tos = (0..self.n_labels)
                .map(|l| Next::Label(LabelId(l)))
                .chain(core::iter::once(Next::End));
            for to in tos {
                let lp = self.log_prob(from, to);
                if lp > f64::NEG_INFINITY {
                    out.push((from, to, lp));
                }
            }
        }
        out
    }

    /// Log-probability of a complete label sequence including start and end.
    pub fn sequence_log_prob(&self, labels: &[LabelId]) -> f64 {
        let mut prev = Prev::Start;
        let mut lp = 0.0;
        for &l in labels {
            lp += self.log_prob(prev, Next::Label(l));
            prev = Prev::Label(l);
        }
        lp + self.log_prob(prev, Next::End)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub transcript: Vec<LabelId>,
    pub segmentation: Segmentation,
    /// Path through the sequence HMM of `transcript`.
    pub alignment: StateAlignment,
    pub log_prob: f64,
    /// Winning grammar path (path mode only).
    pub path: Option<usize>,
    pub activity: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathDecodeOptions {
    /// Add `log(count / total)` of each path to its score.
    pub path_prior: bool,
}

fn finish(
    transcript: Vec<LabelId>,
    seq: &SequenceHmm,
    alignment: StateAlignment,
    log_prob: f64,
) -> Result<DecodeResult> {
    let segmentation = segmentation_from_alignment(&alignment, seq.index())?;
    Ok(DecodeResult {
        transcript,
        segmentation,
        alignment,
        log_prob,
        path: None,
        activity: None,
    })
}

/// Aligns every feasible grammar path and keeps the best one.
///
/// Ties go to the lexicographically smaller label sequence.
pub fn decode_paths(
    inventory: &ActionInventory,
    grammar: &PathGrammar,
    scores: &ScoreMatrix,
    options: PathDecodeOptions,
) -> Result<DecodeResult> {
    let total = grammar.total_count() as f64;
    let mut best: Option<(usize, SequenceHmm, StateAlignment, f64)> = None;
    for (i, path) in grammar.paths.iter().enumerate() {
        let seq = SequenceHmm::concat(&path.labels, inventory)?;
        let alignment = match viterbi_align(&seq, scores) {
            Ok(a) => a,
            Err(Error::InfeasibleAlignment { .. }) | Err(Error::NoValidPath) => continue,
            Err(e) => return Err(e),
        };
        let mut score = alignment.log_prob;
        if options.path_prior {
            score += math::ln(path.count as f64 / total);
        }
        let better = match &best {
            None => true,
            Some((j, _, _, s)) => {
                score > *s || (score == *s && path.labels < grammar.paths[*j].labels)
            }
        };
        if better {
            best = Some((i, seq, alignment, score));
        }
    }
    let (i, seq, alignment, score) = best.ok_or(Error::NoValidPath)?;
    let path = &grammar.paths[i];
    let mut result = finish(path.labels.clone(), &seq, alignment, score)?;
    result.path = Some(i);
    result.activity = path.activity.clone();
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Stay,
    Advance,
    /// Entered a new action from the final state of the given column.
    Link(usize),
}

/// Joint segmentation and labeling under a bigram model: one copy of every
/// action HMM, the final state of each linked to the first state of every
/// action with the bigram weight.
pub fn decode_bigram(
    inventory: &ActionInventory,
    bigram: &BigramModel,
    scores: &ScoreMatrix,
) -> Result<DecodeResult> {
    let n = inventory.total_states();
    if scores.states() < n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: scores.states(),
        });
    }
    let frames = scores.frames();
    if frames == 0 || n == 0 {
        return Err(Error::NoValidPath);
    }
    // per column: (label, local, n_states, stay, advance)
    let mut cols = Vec::with_capacity(n);
    let mut finals = Vec::new();
    for m in inventory.models() {
        for j in 0..m.n_states() {
            cols.push((m.label(), j, m.n_states(), m.self_logprob(j), m.forward_logprob(j)));
        }
        finals.push(cols.len() - 1);
    }
    let mut prev = vec![f64::NEG_INFINITY; n];
    let mut cur = vec![f64::NEG_INFINITY; n];
    let mut back = vec![Move::Stay; frames * n];
    for (c, col) in cols.iter().enumerate() {
        if col.1 == 0 {
            prev[c] = bigram.log_prob(Prev::Start, Next::Label(col.0)) + scores.get(0, c);
        }
    }
    for t in 1..frames {
        for c in 0..n {
            let (label, local, _, stay, _) = cols[c];
            let mut best = prev[c] + stay;
            let mut mv = Move::Stay;
            if local > 0 {
                let adv = prev[c - 1] + cols[c - 1].4;
                if adv >= best && adv > f64::NEG_INFINITY {
                    best = adv;
                    mv = Move::Advance;
                }
            } else {
                for &f in &finals {
                    let (from, ..) = cols[f];
                    let link = prev[f] + cols[f].4 + bigram.log_prob(Prev::Label(from), Next::Label(label));
                    if link > best {
                        best = link;
                        mv = Move::Link(f);
                    }
                }
            }
            cur[c] = best + scores.get(t, c);
            back[t * n + c] = mv;
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    let mut end: Option<(usize, f64)> = None;
    for &f in &finals {
        let total = prev[f] + bigram.log_prob(Prev::Label(cols[f].0), Next::End);
        if total > f64::NEG_INFINITY && end.map_or(true, |(_, b)| total > b) {
            end = Some((f, total));
        }
    }
    let (mut c, log_prob) = end.ok_or(Error::NoValidPath)?;
    let mut columns = vec![0; frames];
    let mut starts = vec![false; frames];
    for t in (0..frames).rev() {
        columns[t] = c;
        if t == 0 {
            starts[0] = true;
            break;
        }
        match back[t * n + c] {
            Move::Stay => {}
            Move::Advance => c -= 1,
            Move::Link(f) => {
                starts[t] = true;
                c = f;
            }
        }
    }
    let mut transcript = Vec::new();
    let mut states = Vec::with_capacity(frames);
    let mut base = 0;
    for t in 0..frames {
        let (label, local, n_states, ..) = cols[columns[t]];
        if starts[t] {
            if !transcript.is_empty() {
                base += cols[columns[t - 1]].2;
            }
            transcript.push(label);
        }
        debug_assert!(local < n_states);
        states.push(base + local);
    }
    let seq = SequenceHmm::concat(&transcript, inventory)?;
    debug_assert!(seq.is_admissible(&states));
    finish(transcript, &seq, StateAlignment { states, log_prob }, log_prob)
}

/// Either grammar flavour.
#[derive(Debug, Clone, Copy)]
pub enum Grammar<'a> {
    Paths(&'a PathGrammar, PathDecodeOptions),
    Bigram(&'a BigramModel),
}

pub fn decode(
    inventory: &ActionInventory,
    grammar: Grammar<'_>,
    scores: &ScoreMatrix,
) -> Result<DecodeResult> {
    match grammar {
        Grammar::Paths(g, opts) => decode_paths(inventory, g, scores, opts),
        Grammar::Bigram(b) => decode_bigram(inventory, b, scores),
    }
}

/// Activity tag of the grammar path a decode result came from.
pub fn activity_lookup<'g>(grammar: &'g PathGrammar, result: &DecodeResult) -> Option<&'g str> {
    result
        .path
        .and_then(|i| grammar.paths.get(i))
        .and_then(|p| p.activity.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::ActionModel;
    use alloc::string::ToString;

    const A: LabelId = LabelId(0);
    const B: LabelId = LabelId(1);
    const C: LabelId = LabelId(2);

    fn tr(labels: &[LabelId], tag: Option<&str>) -> Transcript {
        Transcript::new("v", labels.to_vec(), tag.map(str::to_string)).unwrap()
    }

    #[test]
    fn path_grammar_dedup() {
        let ts = [tr(&[A, B], None), tr(&[A, C], None), tr(&[A, B], None)];
        let g = PathGrammar::build(&ts).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!((g.paths()[0].labels.clone(), g.paths()[0].count), (vec![A, B], 2));
        assert_eq!(g.paths()[1].count, 1);
        assert_eq!(PathGrammar::build(&ts[..1]).unwrap().len(), 1);
        assert!(PathGrammar::build(core::iter::empty()).is_err());
    }

    #[test]
    fn majority_activity_tag() {
        let ts = [
            tr(&[A, B], Some("tea")),
            tr(&[A, B], Some("coffee")),
            tr(&[A, B], Some("coffee")),
        ];
        let g = PathGrammar::build(&ts).unwrap();
        assert_eq!(g.paths()[0].activity.as_deref(), Some("coffee"));
        let tie = [tr(&[A], Some("tea")), tr(&[A], Some("coffee"))];
        assert_eq!(
            PathGrammar::build(&tie).unwrap().paths()[0].activity.as_deref(),
            Some("tea")
        );
    }

    #[test]
    fn bigram_counts() {
        let ts = [tr(&[A, B, C], None), tr(&[A, C], None)];
        let m = BigramModel::build(&ts, 3, 0.0).unwrap();
        let p = |f, t| math::exp(m.log_prob(f, t));
        assert!((p(Prev::Label(A), Next::Label(B)) - 0.5).abs() < 1e-12);
        assert!((p(Prev::Label(A), Next::Label(C)) - 0.5).abs() < 1e-12);
        assert!((p(Prev::Label(B), Next::Label(C)) - 1.0).abs() < 1e-12);
        assert!((p(Prev::Label(C), Next::End) - 1.0).abs() < 1e-12);
        assert_eq!(m.log_prob(Prev::Label(B), Next::Label(A)), f64::NEG_INFINITY);
        let single = BigramModel::build(&[tr(&[A], None)], 3, 0.0).unwrap();
        assert_eq!(single.log_prob(Prev::Start, Next::Label(A)), 0.0);
        assert_eq!(single.log_prob(Prev::Label(A), Next::End), 0.0);
    }

    #[test]
    fn smoothed_rows_normalize() {
        let ts = [tr(&[A, B, C], None), tr(&[A, C], None)];
        let m = BigramModel::build(&ts, 3, 0.5).unwrap();
        let froms = [Prev::Start, Prev::Label(A), Prev::Label(B), Prev::Label(C)];
        let tos = [Next::Label(A), Next::Label(B), Next::Label(C), Next::End];
        for f in froms {
            let mass: f64 = tos.iter().map(|&t| math::exp(m.log_prob(f, t))).sum();
            assert!((mass - 1.0).abs() < 1e-9);
        }
        let again = BigramModel::from_entries(3, m.entries()).unwrap();
        assert_eq!(again.entries(), m.entries());
    }

    fn inventory(n: &[usize]) -> ActionInventory {
        let mut inv = ActionInventory::new(n.len());
        for (i, &k) in n.iter().enumerate() {
            inv.insert(ActionModel::new(LabelId(i), k, 3).unwrap());
        }
        inv
    }

    /// Frames favour label `pattern[t]` strongly.
    fn planted_scores(inv: &ActionInventory, pattern: &[LabelId]) -> ScoreMatrix {
        let n = inv.total_states();
        let mut data = vec![-10.0; pattern.len() * n];
        for (t, &l) in pattern.iter().enumerate() {
            let o = inv.offset(l).unwrap();
            for j in 0..inv.get(l).unwrap().n_states() {
                data[t * n + o + j] = 0.0;
            }
        }
        ScoreMatrix::new(pattern.len(), n, data).unwrap()
    }

    #[test]
    fn single_path_matches_alignment() {
        let inv = inventory(&[2, 2]);
        let scores = planted_scores(&inv, &[A, A, B, A, B, B]);
        let g = PathGrammar::build(&[tr(&[A, B], Some("x"))]).unwrap();
        let r = decode_paths(&inv, &g, &scores, PathDecodeOptions::default()).unwrap();
        let seq = SequenceHmm::concat(&[A, B], &inv).unwrap();
        let direct = viterbi_align(&seq, &scores).unwrap();
        assert_eq!(r.alignment, direct);
        assert_eq!(r.log_prob, direct.log_prob);
        assert_eq!(activity_lookup(&g, &r), Some("x"));
    }

    #[test]
    fn best_path_wins_and_infeasible_paths_skipped() {
        let inv = inventory(&[2, 2, 2]);
        let scores = planted_scores(&inv, &[C, C, C, B, B, B]);
        let ts = [
            tr(&[A, B], Some("ab")),
            tr(&[C, B], Some("cb")),
            tr(&[A, B, C, A], None),
        ];
        let g = PathGrammar::build(&ts).unwrap();
        let r = decode_paths(&inv, &g, &scores, PathDecodeOptions::default()).unwrap();
        assert_eq!(r.transcript, vec![C, B]);
        assert_eq!(activity_lookup(&g, &r), Some("cb"));
        let only_long = PathGrammar::build(&ts[2..]).unwrap();
        assert_eq!(
            decode_paths(&inv, &only_long, &scores, PathDecodeOptions::default()),
            Err(Error::NoValidPath)
        );
    }

    #[test]
    fn untagged_lookup_is_absent() {
        let inv = inventory(&[1]);
        let scores = planted_scores(&inv, &[A, A]);
        let g = PathGrammar::build(&[tr(&[A], None)]).unwrap();
        let r = decode_paths(&inv, &g, &scores, PathDecodeOptions::default()).unwrap();
        assert_eq!(activity_lookup(&g, &r), None);
    }

    #[test]
    fn bigram_recovers_planted_sequence() {
        let inv = inventory(&[2, 1, 2]);
        let scores = planted_scores(&inv, &[A, A, A, C, C, B, B, B]);
        let ts = [tr(&[A, C, B], None), tr(&[A, B], None), tr(&[C, B], None)];
        let m = BigramModel::build(&ts, 3, 0.0).unwrap();
        let r = decode_bigram(&inv, &m, &scores).unwrap();
        assert_eq!(r.transcript, vec![A, C, B]);
        assert_eq!(r.segmentation.labels(), vec![A, C, B]);
        let seq = SequenceHmm::concat(&r.transcript, &inv).unwrap();
        let lp = seq.path_log_prob(&r.alignment.states, &scores) + m.sequence_log_prob(&r.transcript);
        assert!((lp - r.log_prob).abs() < 1e-9);
    }

    #[test]
    fn bigram_repeated_single_state_label() {
        // one state and no self loop: every frame must re-enter B via a link
        let mut inv = ActionInventory::new(2);
        inv.insert(ActionModel::new(A, 1, 1).unwrap());
        inv.insert(ActionModel::new(B, 1, 1).unwrap());
        let scores = planted_scores(&inv, &[B, B, B, B]);
        let ts = [tr(&[B, B, B, B], None)];
        let m = BigramModel::build(&ts, 2, 0.0).unwrap();
        let r = decode_bigram(&inv, &m, &scores).unwrap();
        assert_eq!(r.transcript, vec![B, B, B, B]);
        assert_eq!(r.segmentation.segments().len(), 4);
    }
}
