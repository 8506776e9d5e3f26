//! Weakly supervised training from transcripts.
//!
//! Frames are first spread uniformly over the transcript's concatenated
//! HMM states; Gaussians fitted to that split are then refined by
//! forward-backward (or Viterbi) reestimation for a fixed number of
//! iterations. Only means and covariances are updated, transitions keep
//! their initial values.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{
    segmentation_from_alignment, FeatureSequence, LabelId, LabelSpace, Segmentation, Transcript,
};
use crate::error::{invalid_arg, Error, Result};
use crate::exec::Executor;
use crate::gaussian::{CovarianceMode, GaussianModel, ScoreMatrix, SufficientStats, DEFAULT_VARIANCE_FLOOR};
use crate::hmm::{
    forward_backward, forward_log_likelihood, states_for_class, viterbi_align, ActionInventory,
    ActionModel, Posteriors, SequenceHmm, StateAlignment,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    /// Forward-backward occupation weights.
    #[default]
    Soft,
    /// One-hot weights from the Viterbi path.
    Hard,
}

impl UpdateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateMode::Soft => "soft",
            UpdateMode::Hard => "hard",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "soft" => Some(UpdateMode::Soft),
            "hard" => Some(UpdateMode::Hard),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub frames_per_state: usize,
    pub covariance: CovarianceMode,
    pub variance_floor: f64,
    pub update: UpdateMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 3,
            frames_per_state: 10,
            covariance: CovarianceMode::Full,
            variance_floor: DEFAULT_VARIANCE_FLOOR,
            update: UpdateMode::Soft,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames_per_state == 0 {
            return Err(invalid_arg("frames_per_state must be at least 1"));
        }
        if !(self.variance_floor >= 0.0) || !self.variance_floor.is_finite() {
            return Err(invalid_arg("variance floor must be a nonnegative real"));
        }
        Ok(())
    }
}

/// Videos paired with their transcripts over one label space.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingCorpus {
    labels: LabelSpace,
    videos: Vec<(FeatureSequence, Transcript)>,
}

impl TrainingCorpus {
    pub fn new(labels: LabelSpace, videos: Vec<(FeatureSequence, Transcript)>) -> Result<Self> {
        let dim = videos
            .first()
            .map(|(f, _)| f.dim())
            .ok_or_else(|| Error::EmptyCorpus("no training videos".into()))?;
        for (features, transcript) in &videos {
            if features.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: features.dim(),
                });
            }
            if transcript.is_empty() {
                return Err(invalid_arg(format!("empty transcript for {}", transcript.video_id)));
            }
            if let Some(l) = transcript.actions.iter().find(|l| !labels.contains(**l)) {
                return Err(Error::UnknownLabel(format!("{l}")));
            }
        }
        Ok(TrainingCorpus { labels, videos })
    }

    pub fn labels(&self) -> &LabelSpace {
        &self.labels
    }

    pub fn videos(&self) -> &[(FeatureSequence, Transcript)] {
        &self.videos
    }

    pub fn dim(&self) -> usize {
        self.videos[0].0.dim()
    }

    pub fn len(&self) -> usize {
        self.videos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.videos.is_empty()
    }

    /// Total frames divided by total transcript entries.
    pub fn mean_action_length(&self) -> f64 {
        let frames: usize = self.videos.iter().map(|(f, _)| f.len()).sum();
        let actions: usize = self.videos.iter().map(|(_, t)| t.len()).sum();
        frames as f64 / actions as f64
    }
}

/// All fitted action HMMs of a label space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    labels: LabelSpace,
    inventory: ActionInventory,
    /// Indexed by inventory column.
    gaussians: Vec<GaussianModel>,
    frames_per_state: usize,
    covariance: CovarianceMode,
    variance_floor: f64,
    /// Number of reestimation steps applied after the flat start.
    pub iteration: usize,
}

impl ModelSet {
    pub fn new(
        labels: LabelSpace,
        inventory: ActionInventory,
        gaussians: Vec<GaussianModel>,
        frames_per_state: usize,
        variance_floor: f64,
    ) -> Result<Self> {
        if gaussians.len() != inventory.total_states() {
            return Err(Error::DimensionMismatch {
                expected: inventory.total_states(),
                actual: gaussians.len(),
            });
        }
        let first = gaussians
            .first()
            .ok_or_else(|| invalid_arg("model set has no states"))?;
        let (dim, covariance) = (first.dim(), first.mode());
        if let Some(g) = gaussians.iter().find(|g| g.dim() != dim || g.mode() != covariance) {
            return Err(Error::InvalidData(format!(
                "state models disagree: dim {} mode {} vs dim {dim} mode {}",
                g.dim(),
                g.mode().as_str(),
                covariance.as_str()
            )));
        }
        if inventory.n_labels() > labels.len() {
            return Err(invalid_arg("inventory has labels outside the label space"));
        }
        Ok(ModelSet {
            labels,
            inventory,
            gaussians,
            frames_per_state,
            covariance,
            variance_floor,
            iteration: 0,
        })
    }

    pub fn labels(&self) -> &LabelSpace {
        &self.labels
    }

    pub fn inventory(&self) -> &ActionInventory {
        &self.inventory
    }

    pub fn gaussians(&self) -> &[GaussianModel] {
        &self.gaussians
    }

    pub fn frames_per_state(&self) -> usize {
        self.frames_per_state
    }

    pub fn covariance(&self) -> CovarianceMode {
        self.covariance
    }

    pub fn variance_floor(&self) -> f64 {
        self.variance_floor
    }

    pub fn dim(&self) -> usize {
        self.gaussians[0].dim()
    }

    pub fn total_states(&self) -> usize {
        self.gaussians.len()
    }

    /// Gaussian log-densities of every frame under every state.
    pub fn score(&self, video: &FeatureSequence) -> Result<ScoreMatrix> {
        if video.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: video.dim(),
            });
        }
        ScoreMatrix::from_gaussians(video.as_slice(), video.dim(), &self.gaussians)
    }

    pub fn sequence_hmm(&self, labels: &[LabelId]) -> Result<SequenceHmm> {
        SequenceHmm::concat(labels, &self.inventory)
    }

    /// Viterbi alignment of a transcript to precomputed scores.
    pub fn align_scores(
        &self,
        transcript: &[LabelId],
        scores: &ScoreMatrix,
    ) -> Result<(SequenceHmm, StateAlignment)> {
        let seq = self.sequence_hmm(transcript)?;
        let alignment = viterbi_align(&seq, scores)?;
        Ok((seq, alignment))
    }

    pub fn align(
        &self,
        video: &FeatureSequence,
        transcript: &[LabelId],
    ) -> Result<(SequenceHmm, StateAlignment)> {
        self.align_scores(transcript, &self.score(video)?)
    }
}

/// One action model per label occurring in the corpus, all with
/// `states_for_class(mean action length)` states.
pub fn build_topology(corpus: &TrainingCorpus, frames_per_state: usize) -> Result<ActionInventory> {
    let n_states = states_for_class(corpus.mean_action_length(), frames_per_state)?;
    let mut inventory = ActionInventory::new(corpus.labels().len());
    let mut seen = vec![false; corpus.labels().len()];
    for (_, t) in corpus.videos() {
        for &l in &t.actions {
            seen[l.0] = true;
        }
    }
    for (i, _) in seen.iter().enumerate().filter(|(_, s)| **s) {
        inventory.insert(ActionModel::new(LabelId(i), n_states, frames_per_state)?);
    }
    Ok(inventory)
}

/// Uniform split: instance `i` of `k` starts at `floor(i T / k)` and state
/// `j` of `n` inside a segment of length `len` at `floor(j len / n)`.
pub fn linear_init(frames: usize, seq: &SequenceHmm) -> Result<StateAlignment> {
    let infeasible = Error::InfeasibleAlignment {
        frames,
        states: seq.n_states(),
    };
    if frames < seq.n_states() {
        return Err(infeasible);
    }
    let k = seq.labels().len();
    let entries = seq.index().entries();
    let mut states = Vec::with_capacity(frames);
    let mut first = 0;
    for i in 0..k {
        let n = entries[first..].iter().take_while(|e| e.instance == i).count();
        let start = i * frames / k;
        let len = (i + 1) * frames / k - start;
        if len < n {
            return Err(infeasible);
        }
        for j in 0..n {
            let span = (j + 1) * len / n - j * len / n;
            states.extend(core::iter::repeat(first + j).take(span));
        }
        first += n;
    }
    let mut log_prob = 0.0;
    for w in states.windows(2) {
        log_prob += if w[0] == w[1] {
            seq.stay_logprob(w[0])
        } else {
            seq.advance_logprob(w[0])
        };
    }
    Ok(StateAlignment { states, log_prob })
}

/// Per-frame state weights for one video.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameWeights {
    Hard(StateAlignment),
    Soft(Posteriors),
}

/// Weighted statistics of one video, keyed by inventory column.
fn video_stats(
    video: &FeatureSequence,
    seq: &SequenceHmm,
    weights: &FrameWeights,
    mode: CovarianceMode,
) -> BTreeMap<usize, SufficientStats> {
    let mut stats: BTreeMap<usize, SufficientStats> = BTreeMap::new();
    let dim = video.dim();
    let mut add = |column: usize, x: &[f64], w: f64| {
        stats
            .entry(column)
            .or_insert_with(|| SufficientStats::new(dim, mode))
            .add(x, w);
    };
    match weights {
        FrameWeights::Hard(al) => {
            for (t, &s) in al.states.iter().enumerate() {
                add(seq.column(s), video.frame(t), 1.0);
            }
        }
        FrameWeights::Soft(post) => {
            for t in 0..post.frames() {
                for (s, &w) in post.row(t).iter().enumerate() {
                    if w > 0.0 {
                        add(seq.column(s), video.frame(t), w);
                    }
                }
            }
        }
    }
    stats
}

/// Outcome of refitting state Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct Refit {
    pub gaussians: Vec<GaussianModel>,
    /// Columns that received no weight.
    pub empty_states: Vec<usize>,
}

/// Fits every state Gaussian from frame weights pooled over all videos and
/// all instances of the same (label, local state).
///
/// `weights[v]` belongs to `corpus.videos()[v]`; `None` skips the video.
/// States without weight keep `previous[column]`; with no previous models
/// they get the mean and floored covariance of all frames.
pub fn fit_from_alignments<E: Executor>(
    corpus: &TrainingCorpus,
    inventory: &ActionInventory,
    weights: &[Option<(SequenceHmm, FrameWeights)>],
    previous: Option<&[GaussianModel]>,
    covariance: CovarianceMode,
    variance_floor: f64,
    exec: &E,
) -> Result<Refit> {
    if weights.len() != corpus.len() {
        return Err(invalid_arg("one weight entry per video required"));
    }
    let per_video = exec.map(weights, |v, w| {
        w.as_ref()
            .map(|(seq, fw)| video_stats(&corpus.videos()[v].0, seq, fw, covariance))
    });
    let dim = corpus.dim();
    let total = inventory.total_states();
    let mut pooled: Vec<SufficientStats> = vec![SufficientStats::new(dim, covariance); total];
    for stats in per_video.iter().flatten() {
        for (&c, s) in stats {
            pooled[c].merge(s);
        }
    }
    let mut fallback: Option<GaussianModel> = None;
    let mut gaussians = Vec::with_capacity(total);
    let mut empty_states = Vec::new();
    for (c, stats) in pooled.iter().enumerate() {
        if stats.weight() > 0.0 {
            gaussians.push(stats.fit(variance_floor)?);
            continue;
        }
        empty_states.push(c);
        match previous {
            Some(prev) => gaussians.push(prev[c].clone()),
            None => {
                if fallback.is_none() {
                    let mut all = SufficientStats::new(dim, covariance);
                    for (f, _) in corpus.videos() {
                        for x in f.frames() {
                            all.add(x, 1.0);
                        }
                    }
                    fallback = Some(all.fit(variance_floor)?);
                }
                gaussians.push(fallback.clone().unwrap());
            }
        }
    }
    Ok(Refit {
        gaussians,
        empty_states,
    })
}

/// Flat start: topology from the mean action length, Gaussians from the
/// uniform split. Videos too short for their transcript are skipped.
pub fn initialize<E: Executor>(
    corpus: &TrainingCorpus,
    config: &TrainConfig,
    exec: &E,
) -> Result<(ModelSet, Vec<usize>)> {
    config.validate()?;
    let inventory = build_topology(corpus, config.frames_per_state)?;
    let weights: Vec<Option<(SequenceHmm, FrameWeights)>> = exec.map(corpus.videos(), |_, (f, t)| {
        let seq = SequenceHmm::concat(&t.actions, &inventory).ok()?;
        let al = linear_init(f.len(), &seq).ok()?;
        Some((seq, FrameWeights::Hard(al)))
    });
    let skipped: Vec<usize> = (0..corpus.len()).filter(|&v| weights[v].is_none()).collect();
    if skipped.len() == corpus.len() {
        return Err(Error::EmptyCorpus("every video is shorter than its transcript's state count".into()));
    }
    let refit = fit_from_alignments(
        corpus,
        &inventory,
        &weights,
        None,
        config.covariance,
        config.variance_floor,
        exec,
    )?;
    let models = ModelSet::new(
        corpus.labels().clone(),
        inventory,
        refit.gaussians,
        config.frames_per_state,
        config.variance_floor,
    )?;
    Ok((models, skipped))
}

/// One reestimation step with the given update rule.
pub fn reestimate<E: Executor>(
    models: &ModelSet,
    corpus: &TrainingCorpus,
    update: UpdateMode,
    exec: &E,
) -> Result<ModelSet> {
    let weights: Vec<Option<(SequenceHmm, FrameWeights)>> = exec.map(corpus.videos(), |_, (f, t)| {
        let seq = models.sequence_hmm(&t.actions).ok()?;
        let scores = models.score(f).ok()?;
        let fw = match update {
            UpdateMode::Soft => FrameWeights::Soft(forward_backward(&seq, &scores).ok()?),
            UpdateMode::Hard => FrameWeights::Hard(viterbi_align(&seq, &scores).ok()?),
        };
        Some((seq, fw))
    });
    if weights.iter().all(Option::is_none) {
        return Err(Error::EmptyCorpus("no video could be aligned".into()));
    }
    let refit = fit_from_alignments(
        corpus,
        &models.inventory,
        &weights,
        Some(&models.gaussians),
        models.covariance,
        models.variance_floor,
        exec,
    )?;
    let mut next = ModelSet::new(
        models.labels.clone(),
        models.inventory.clone(),
        refit.gaussians,
        models.frames_per_state,
        models.variance_floor,
    )?;
    next.iteration = models.iteration + 1;
    Ok(next)
}

/// Viterbi alignment and forward log-likelihood of one video.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoAlignment {
    pub sequence: SequenceHmm,
    pub alignment: StateAlignment,
    pub log_likelihood: f64,
}

impl VideoAlignment {
    pub fn segmentation(&self) -> Result<Segmentation> {
        segmentation_from_alignment(&self.alignment, self.sequence.index())
    }
}

/// Aligns every video to its transcript. Failures are returned per video.
pub fn realign<E: Executor>(
    models: &ModelSet,
    corpus: &TrainingCorpus,
    exec: &E,
) -> Vec<Result<VideoAlignment>> {
    exec.map(corpus.videos(), |_, (f, t)| {
        let scores = models.score(f)?;
        let (sequence, alignment) = models.align_scores(&t.actions, &scores)?;
        let log_likelihood = forward_log_likelihood(&sequence, &scores)?;
        Ok(VideoAlignment {
            sequence,
            alignment,
            log_likelihood,
        })
    })
}

/// Alignments of the training corpus under the models of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 0 is the flat-start model.
    pub iteration: usize,
    /// Sum of forward log-likelihoods over aligned videos.
    pub log_likelihood: f64,
    pub alignments: Vec<Option<VideoAlignment>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub history: Vec<IterationRecord>,
    /// Indices of videos too short for their transcript.
    pub skipped: Vec<usize>,
}

fn record(models: &ModelSet, corpus: &TrainingCorpus, exec: &impl Executor) -> IterationRecord {
    let alignments: Vec<Option<VideoAlignment>> =
        realign(models, corpus, exec).into_iter().map(Result::ok).collect();
    let log_likelihood = alignments.iter().flatten().map(|a| a.log_likelihood).sum();
    IterationRecord {
        iteration: models.iteration,
        log_likelihood,
        alignments,
    }
}

/// Flat start followed by `config.iterations` reestimation steps. The report
/// holds the realignment after every step, starting with the flat start.
pub fn train<E: Executor>(
    corpus: &TrainingCorpus,
    config: &TrainConfig,
    exec: &E,
) -> Result<(ModelSet, TrainReport)> {
    let (mut models, skipped) = initialize(corpus, config, exec)?;
    let mut history = vec![record(&models, corpus, exec)];
    for _ in 0..config.iterations {
        models = reestimate(&models, corpus, config.update, exec)?;
        history.push(record(&models, corpus, exec));
    }
    Ok((models, TrainReport { history, skipped }))
}

/// Transcript-given alignment of every video, as segmentations.
pub fn align_corpus<E: Executor>(
    models: &ModelSet,
    videos: &[(FeatureSequence, Transcript)],
    exec: &E,
) -> Vec<Result<Segmentation>> {
    exec.map(videos, |_, (f, t)| {
        let (seq, al) = models.align(f, &t.actions)?;
        segmentation_from_alignment(&al, seq.index())
    })
}

/// Human-readable summary of a skipped video.
pub fn describe_skip(corpus: &TrainingCorpus, video: usize) -> String {
    let (f, t) = &corpus.videos()[video];
    format!("{}: {} frames for {} actions", f.video_id(), f.len(), t.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use alloc::string::ToString;

    const A: LabelId = LabelId(0);
    const B: LabelId = LabelId(1);

    fn inv(models: &[(LabelId, usize)]) -> ActionInventory {
        let mut inv = ActionInventory::new(2);
        for &(l, n) in models {
            inv.insert(ActionModel::new(l, n, 10).unwrap());
        }
        inv
    }

    #[test]
    fn linear_init_equal_halves() {
        let inv = inv(&[(A, 1), (B, 1)]);
        let seq = SequenceHmm::concat(&[A, B], &inv).unwrap();
        let al = linear_init(10, &seq).unwrap();
        assert_eq!(al.states, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let al = linear_init(9, &seq).unwrap();
        assert_eq!(al.states.iter().filter(|&&s| s == 0).count(), 4);
        assert!(seq.is_admissible(&al.states));
    }

    #[test]
    fn linear_init_within_segment() {
        let inv = inv(&[(A, 5)]);
        let seq = SequenceHmm::concat(&[A], &inv).unwrap();
        let al = linear_init(10, &seq).unwrap();
        assert_eq!(al.states, vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
        assert!(matches!(
            linear_init(4, &seq),
            Err(Error::InfeasibleAlignment { frames: 4, states: 5 })
        ));
    }

    fn corpus_1d(videos: &[(&[f64], &[LabelId])]) -> TrainingCorpus {
        let labels = LabelSpace::new(["a", "b"]).unwrap();
        let videos = videos
            .iter()
            .enumerate()
            .map(|(i, (x, t))| {
                let id = format!("v{i}");
                (
                    FeatureSequence::new(id.clone(), 1, x.to_vec()).unwrap(),
                    Transcript::new(id, t.to_vec(), None).unwrap(),
                )
            })
            .collect();
        TrainingCorpus::new(labels, videos).unwrap()
    }

    #[test]
    fn hard_fit_two_points() {
        let corpus = corpus_1d(&[(&[0.0, 2.0], &[A])]);
        let inventory = inv(&[(A, 1)]);
        let seq = SequenceHmm::concat(&[A], &inventory).unwrap();
        let al = StateAlignment { states: vec![0, 0], log_prob: 0.0 };
        let refit = fit_from_alignments(
            &corpus,
            &inventory,
            &[Some((seq, FrameWeights::Hard(al)))],
            None,
            CovarianceMode::Full,
            0.0,
            &Sequential,
        )
        .unwrap();
        assert_eq!(refit.gaussians[0].mean(), &[1.0]);
        assert_eq!(refit.gaussians[0].variance(0), 1.0);
    }

    #[test]
    fn instances_pool_per_class_state() {
        let corpus = corpus_1d(&[(&[0.0, 4.0], &[A, A])]);
        let inventory = inv(&[(A, 1)]);
        let seq = SequenceHmm::concat(&[A, A], &inventory).unwrap();
        let al = StateAlignment { states: vec![0, 1], log_prob: 0.0 };
        let refit = fit_from_alignments(
            &corpus,
            &inventory,
            &[Some((seq, FrameWeights::Hard(al)))],
            None,
            CovarianceMode::Full,
            1e-4,
            &Sequential,
        )
        .unwrap();
        assert_eq!(refit.gaussians.len(), 1);
        assert_eq!(refit.gaussians[0].mean(), &[2.0]);
    }

    #[test]
    fn soft_weights_on_forced_path_equal_hard_fit() {
        let corpus = corpus_1d(&[(&[0.5, 1.5, 3.0, -1.0], &[A, B])]);
        let inventory = inv(&[(A, 2), (B, 2)]);
        let seq = SequenceHmm::concat(&[A, B], &inventory).unwrap();
        let scores = ScoreMatrix::new(4, 4, vec![0.0; 16]).unwrap();
        let post = forward_backward(&seq, &scores).unwrap();
        let hard = StateAlignment { states: vec![0, 1, 2, 3], log_prob: 0.0 };
        let fit = |fw| {
            fit_from_alignments(
                &corpus,
                &inventory,
                &[Some((seq.clone(), fw))],
                None,
                CovarianceMode::Full,
                1e-4,
                &Sequential,
            )
            .unwrap()
        };
        assert_eq!(fit(FrameWeights::Soft(post)), fit(FrameWeights::Hard(hard)));
    }

    #[test]
    fn empty_state_falls_back_to_global_statistics() {
        let corpus = corpus_1d(&[(&[0.0, 2.0, 4.0], &[A])]);
        let mut inventory = inv(&[(A, 1)]);
        inventory.insert(ActionModel::new(B, 1, 10).unwrap());
        let seq = SequenceHmm::concat(&[A], &inventory).unwrap();
        let al = StateAlignment { states: vec![0, 0, 0], log_prob: 0.0 };
        let refit = fit_from_alignments(
            &corpus,
            &inventory,
            &[Some((seq, FrameWeights::Hard(al)))],
            None,
            CovarianceMode::Diagonal,
            1e-4,
            &Sequential,
        )
        .unwrap();
        assert_eq!(refit.empty_states, vec![1]);
        assert_eq!(refit.gaussians[1].mean(), &[2.0]);
    }

    #[test]
    fn all_infeasible_is_an_error() {
        let corpus = corpus_1d(&[(&[0.0, 1.0], &[A, B, A])]);
        let config = TrainConfig {
            frames_per_state: 1,
            ..TrainConfig::default()
        };
        // mean length 2/3 rounds to 1 state per class; 3 states > 2 frames
        assert!(matches!(
            train(&corpus, &config, &Sequential),
            Err(Error::EmptyCorpus(_))
        ));
    }

    #[test]
    fn single_action_aligns_to_one_segment() {
        let corpus = corpus_1d(&[(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5], &[A])]);
        let config = TrainConfig {
            frames_per_state: 2,
            iterations: 1,
            ..TrainConfig::default()
        };
        let (models, report) = train(&corpus, &config, &Sequential).unwrap();
        assert_eq!(report.history.len(), 2);
        let segs = align_corpus(&models, corpus.videos(), &Sequential);
        let seg = segs[0].as_ref().unwrap();
        assert_eq!(seg.segments().len(), 1);
        assert_eq!(seg.frames(), 6);
        assert_eq!(describe_skip(&corpus, 0), "v0: 6 frames for 1 actions".to_string());
    }
}
