use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use actseg_core::corpus::normalize_features;
use actseg_core::eval::EvalReport;
use actseg_core::gaussian::{combine_scores, estimate_priors, posterior_to_loglikelihood};
use actseg_core::grammar::{self, activity_lookup, Grammar, PathDecodeOptions};
use actseg_core::train::{describe_skip, train, IterationRecord};
use actseg_core::{
    BigramModel, CovarianceMode, Error, Executor, FeatureSequence, FrameLabeling,
    LabelSpace, ModelSet, PathGrammar, PriorTable, ScoreMatrix, Segmentation, TrainConfig,
    TrainingCorpus, UpdateMode,
};

use crate::formats::{self, write_atomic};
use crate::model_dir::{self, StoredModels};
use crate::parallel::Threads;
use crate::synth::{self, SynthSpec};

#[derive(Debug, Parser)]
#[command(
    name = "actseg",
    version,
    about = "Weakly supervised temporal action segmentation with HMMs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn action models from features and ordered transcripts.
    Train(TrainArgs),
    /// Align known transcripts to videos.
    Align(AlignArgs),
    /// Segment and classify videos under a grammar.
    Segment(SegmentArgs),
    /// Score segmentations against frame-level ground truth.
    Eval(EvalArgs),
    /// Write a synthetic corpus sampled from planted models.
    Synth(SynthArgs),
    /// Build a path or bigram grammar from transcripts.
    Grammar(GrammarArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CovArg {
    Full,
    Diag,
}

impl From<CovArg> for CovarianceMode {
    fn from(c: CovArg) -> Self {
        match c {
            CovArg::Full => CovarianceMode::Full,
            CovArg::Diag => CovarianceMode::Diagonal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UpdateArg {
    Soft,
    Hard,
}

impl From<UpdateArg> for UpdateMode {
    fn from(u: UpdateArg) -> Self {
        match u {
            UpdateArg::Soft => UpdateMode::Soft,
            UpdateArg::Hard => UpdateMode::Hard,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of `<video_id>.feat` files.
    #[arg(long, value_name = "DIR")]
    pub features: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub transcripts: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub labels: PathBuf,
    /// Reestimation steps after the flat start.
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
    /// Frames per HMM state; also sets the self-loop probability.
    #[arg(long = "fps-state", default_value_t = 10)]
    pub fps_state: usize,
    #[arg(long, value_enum, default_value_t = CovArg::Full)]
    pub cov: CovArg,
    #[arg(long, value_enum, default_value_t = UpdateArg::Soft)]
    pub update: UpdateArg,
    /// Added to every variance after each fit.
    #[arg(long, default_value_t = actseg_core::gaussian::DEFAULT_VARIANCE_FLOOR)]
    pub floor: f64,
    /// L2-normalize each feature column per video.
    #[arg(long)]
    pub normalize: bool,
    /// Add-k smoothing of the bigram grammar written next to the models.
    #[arg(long, default_value_t = 0.0)]
    pub bigram_smoothing: f64,
    /// Frame labels of the training videos; adds MoF to the training log.
    #[arg(long, value_name = "FILE")]
    pub gt: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_name = "MODELDIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CombineArg {
    /// External posteriors only.
    Ext,
    /// Log of the mean of Gaussian and external likelihoods.
    Mean,
}

#[derive(Debug, Clone, Args)]
pub struct PosteriorArgs {
    /// Directory of `<video_id>.post` frame posteriors over model states.
    #[arg(long = "ext-posteriors", value_name = "DIR")]
    pub ext_posteriors: Option<PathBuf>,
    /// State priors; defaults to the priors stored with the models.
    #[arg(long, value_name = "FILE", requires = "ext_posteriors")]
    pub priors: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CombineArg::Ext, requires = "ext_posteriors")]
    pub combine: CombineArg,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long, value_name = "MODELDIR")]
    pub models: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub features: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub transcripts: PathBuf,
    #[command(flatten)]
    pub posteriors: PosteriorArgs,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_name = "SEGDIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub enum GrammarSpec {
    Path(PathBuf),
    Bigram(PathBuf),
}

fn parse_grammar_spec(s: &str) -> Result<GrammarSpec, String> {
    match s.split_once(':') {
        Some(("path", f)) if !f.is_empty() => Ok(GrammarSpec::Path(f.into())),
        Some(("bigram", f)) if !f.is_empty() => Ok(GrammarSpec::Bigram(f.into())),
        _ => Err("expected `path:FILE` or `bigram:FILE`".into()),
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long, value_name = "MODELDIR")]
    pub models: PathBuf,
    /// Every `<video_id>.feat` in this directory is segmented.
    #[arg(long, value_name = "DIR")]
    pub features: PathBuf,
    /// `path:FILE` or `bigram:FILE`.
    #[arg(long, value_parser = parse_grammar_spec)]
    pub grammar: GrammarSpec,
    /// Weight each grammar path by its training frequency.
    #[arg(long)]
    pub path_prior: bool,
    #[command(flatten)]
    pub posteriors: PosteriorArgs,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_name = "SEGDIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Kv,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Frame-level ground truth, `video_id<TAB>label per frame…`.
    #[arg(long, value_name = "FILE")]
    pub gt: PathBuf,
    /// Directory of `<video_id>.seg` files.
    #[arg(long, value_name = "SEGDIR")]
    pub hyp: PathBuf,
    /// Transcript file whose `@activity` tags are the ground truth; the
    /// hypotheses come from `recognized.txt` in the hypothesis directory.
    #[arg(long, value_name = "FILE")]
    pub activities: Option<PathBuf>,
    #[arg(long)]
    pub per_class: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// `key = value` lines; defaults are used for missing keys.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// Overrides the seed in the spec.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GrammarKind {
    Path,
    Bigram,
}

#[derive(Debug, Args)]
pub struct GrammarArgs {
    #[arg(long, value_name = "FILE")]
    pub transcripts: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub labels: PathBuf,
    #[arg(long, value_enum)]
    pub kind: GrammarKind,
    #[arg(long, default_value_t = 0.0)]
    pub smoothing: f64,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

pub const RECOGNIZED_FILE: &str = "recognized.txt";

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => run_train(&a),
        Command::Align(a) => run_align(&a),
        Command::Segment(a) => run_segment(&a),
        Command::Eval(a) => run_eval(&a),
        Command::Synth(a) => run_synth(&a),
        Command::Grammar(a) => run_grammar(&a),
    }
}

/// Reads `<id>.feat` for every id, in order.
pub fn load_features(
    dir: &Path,
    ids: &[String],
    normalize: bool,
    exec: &impl Executor,
) -> Result<Vec<FeatureSequence>> {
    exec.map(ids, |_, id| -> Result<FeatureSequence> {
        let seq = formats::read_features(&formats::feature_path(dir, id), id)?;
        Ok(if normalize { normalize_features(&seq)? } else { seq })
    })
    .into_iter()
    .collect()
}

fn mof_against(
    gt: &BTreeMap<String, FrameLabeling>,
    hyps: &[(String, FrameLabeling)],
) -> Result<Option<f64>> {
    let pairs: Vec<(&FrameLabeling, &FrameLabeling)> = hyps
        .iter()
        .filter_map(|(id, h)| gt.get(id).map(|g| (g, h)))
        .collect();
    if pairs.is_empty() {
        return Ok(None);
    }
    Ok(Some(actseg_core::eval::mof(&pairs)?))
}

fn record_labelings(record: &IterationRecord, corpus: &TrainingCorpus) -> Result<Vec<(String, FrameLabeling)>> {
    record
        .alignments
        .iter()
        .zip(corpus.videos())
        .filter_map(|(a, (f, _))| a.as_ref().map(|a| (f.video_id(), a)))
        .map(|(id, a)| Ok((id.to_string(), a.segmentation()?.to_labeling())))
        .collect()
}

pub fn run_train(a: &TrainArgs) -> Result<()> {
    let exec = Threads::new(a.jobs);
    let labels = formats::read_labels(&a.labels)?;
    let transcripts = formats::read_transcripts(&a.transcripts, &labels)?;
    let ids: Vec<String> = transcripts.iter().map(|t| t.video_id.clone()).collect();
    let features = load_features(&a.features, &ids, a.normalize, &exec)?;
    let corpus = TrainingCorpus::new(labels.clone(), features.into_iter().zip(transcripts).collect())
        .context("building the training corpus")?;
    let config = TrainConfig {
        iterations: a.iters,
        frames_per_state: a.fps_state,
        covariance: a.cov.into(),
        variance_floor: a.floor,
        update: a.update.into(),
    };
    let gt: Option<BTreeMap<String, FrameLabeling>> = a
        .gt
        .as_ref()
        .map(|p| formats::read_labelings(p, &labels).map(|v| v.into_iter().collect()))
        .transpose()?;

    let (models, report) = train(&corpus, &config, &exec)?;
    for &v in &report.skipped {
        eprintln!("warning: skipped {}", describe_skip(&corpus, v));
    }

    let mut log = String::from("# iteration log_likelihood mof\n");
    if let Some(gt) = &gt {
        let naive = corpus
            .videos()
            .iter()
            .map(|(f, t)| Ok((f.video_id().to_string(), FrameLabeling::uniform_split(&t.actions, f.len())?)))
            .collect::<Result<Vec<_>>>()?;
        if let Some(m) = mof_against(gt, &naive)? {
            let _ = writeln!(log, "# naive_mof {m:.6}");
        }
    }
    for record in &report.history {
        let mof = match &gt {
            Some(gt) => mof_against(gt, &record_labelings(record, &corpus)?)?,
            None => None,
        };
        let mof = mof.map_or_else(|| "-".to_string(), |m| format!("{m:.6}"));
        let _ = writeln!(log, "{} {} {mof}", record.iteration, record.log_likelihood);
    }

    let last = report.history.last().expect("history holds the flat start");
    let columns: Vec<Vec<usize>> = last
        .alignments
        .iter()
        .flatten()
        .map(|a| a.alignment.columns(&a.sequence))
        .collect();
    let priors = estimate_priors(columns.iter().map(Vec::as_slice), models.total_states())?;

    let stored = StoredModels {
        models,
        normalize: a.normalize,
    };
    model_dir::save(&a.out, &stored, Some(&priors))?;
    let ts = corpus.videos().iter().map(|(_, t)| t);
    let paths = PathGrammar::build(ts.clone())?;
    let bigram = BigramModel::build(ts, labels.len(), a.bigram_smoothing)?;
    write_atomic(
        &a.out.join(model_dir::PATH_GRAMMAR_FILE),
        formats::format_path_grammar(&paths, &labels).as_bytes(),
    )?;
    write_atomic(
        &a.out.join(model_dir::BIGRAM_FILE),
        formats::format_bigram(&bigram, &labels).as_bytes(),
    )?;
    write_atomic(&a.out.join(model_dir::LOG_FILE), log.as_bytes())?;
    print!("{log}");
    Ok(())
}

/// Where frame scores come from at decoding time.
#[derive(Debug, Clone)]
pub enum ScoreSource {
    Gaussian,
    External {
        dir: PathBuf,
        priors: PriorTable,
        combine: CombineArg,
    },
}

impl ScoreSource {
    pub fn from_args(args: &PosteriorArgs, model_dir: &Path) -> Result<Self> {
        let Some(dir) = &args.ext_posteriors else {
            return Ok(ScoreSource::Gaussian);
        };
        let priors_file = args.priors.clone().unwrap_or_else(|| model_dir::priors_path(model_dir));
        Ok(ScoreSource::External {
            dir: dir.clone(),
            priors: formats::read_priors(&priors_file)?,
            combine: args.combine,
        })
    }

    /// Scores of one video under `models`.
    pub fn scores(&self, models: &ModelSet, video: &FeatureSequence) -> Result<ScoreMatrix> {
        let ScoreSource::External { dir, priors, combine } = self else {
            return Ok(models.score(video)?);
        };
        let path = formats::posterior_path(dir, video.video_id());
        let post = formats::read_posteriors(&path)?;
        if post.states() != models.total_states() || priors.len() != models.total_states() {
            bail!(
                "{}: {} posterior columns and {} priors for {} model states",
                path.display(),
                post.states(),
                priors.len(),
                models.total_states()
            );
        }
        if post.frames() != video.len() {
            bail!(
                "{}: {} frames but the video has {}",
                path.display(),
                post.frames(),
                video.len()
            );
        }
        let ext = posterior_to_loglikelihood(&post, priors)
            .with_context(|| format!("converting {}", path.display()))?;
        Ok(match combine {
            CombineArg::Ext => ext,
            CombineArg::Mean => combine_scores(&models.score(video)?, &ext)?,
        })
    }
}

fn check_dim(models: &ModelSet, features: &[FeatureSequence]) -> Result<()> {
    if let Some(f) = features.iter().find(|f| f.dim() != models.dim()) {
        bail!(
            "{}: features have dimension {} but the models expect {}",
            f.video_id(),
            f.dim(),
            models.dim()
        );
    }
    Ok(())
}

/// Videos that cannot fit their transcript or grammar are reported and
/// skipped; any other failure aborts.
fn split_failures<T>(ids: &[String], results: Vec<Result<T>>) -> Result<Vec<(String, T)>> {
    let mut out = Vec::new();
    for (id, r) in ids.iter().zip(results) {
        match r {
            Ok(v) => out.push((id.clone(), v)),
            Err(e) => match e.downcast_ref::<Error>() {
                Some(Error::InfeasibleAlignment { .. } | Error::NoValidPath) => {
                    eprintln!("warning: skipped {id}: {e:#}");
                }
                _ => return Err(e.context(format!("video {id}"))),
            },
        }
    }
    Ok(out)
}

fn write_segmentations(dir: &Path, labels: &LabelSpace, segs: &[(String, Segmentation)]) -> Result<()> {
    formats::create_dir(dir)?;
    for (id, seg) in segs {
        let text = formats::format_segmentation(seg, labels);
        write_atomic(&formats::segmentation_path(dir, id), text.as_bytes())?;
    }
    Ok(())
}

pub fn run_align(a: &AlignArgs) -> Result<()> {
    let exec = Threads::new(a.jobs);
    let stored = model_dir::load(&a.models)?;
    let models = &stored.models;
    let source = ScoreSource::from_args(&a.posteriors, &a.models)?;
    let transcripts = formats::read_transcripts(&a.transcripts, models.labels())?;
    let ids: Vec<String> = transcripts.iter().map(|t| t.video_id.clone()).collect();
    let features = load_features(&a.features, &ids, stored.normalize, &exec)?;
    check_dim(models, &features)?;
    let jobs: Vec<_> = features.iter().zip(&transcripts).collect();
    let results = exec.map(&jobs, |_, (f, t)| -> Result<Segmentation> {
        let scores = source.scores(models, f)?;
        let (seq, al) = models.align_scores(&t.actions, &scores)?;
        Ok(actseg_core::corpus::segmentation_from_alignment(&al, seq.index())?)
    });
    let segs = split_failures(&ids, results)?;
    write_segmentations(&a.out, models.labels(), &segs)
}

pub fn run_segment(a: &SegmentArgs) -> Result<()> {
    let exec = Threads::new(a.jobs);
    let stored = model_dir::load(&a.models)?;
    let models = &stored.models;
    let labels = models.labels();
    let source = ScoreSource::from_args(&a.posteriors, &a.models)?;
    let (paths, bigram);
    let grammar = match &a.grammar {
        GrammarSpec::Path(p) => {
            paths = formats::read_path_grammar(p, labels)?;
            Grammar::Paths(&paths, PathDecodeOptions { path_prior: a.path_prior })
        }
        GrammarSpec::Bigram(p) => {
            bigram = formats::read_bigram(p, labels)?;
            Grammar::Bigram(&bigram)
        }
    };
    let ids = formats::list_videos(&a.features, formats::FEATURE_EXT)?;
    if ids.is_empty() {
        bail!("{}: no .{} files", a.features.display(), formats::FEATURE_EXT);
    }
    let features = load_features(&a.features, &ids, stored.normalize, &exec)?;
    check_dim(models, &features)?;
    let results = exec.map(&features, |_, f| -> Result<_> {
        let scores = source.scores(models, f)?;
        Ok(grammar::decode(models.inventory(), grammar, &scores)?)
    });
    let decoded = split_failures(&ids, results)?;
    let mut recognized = String::new();
    for (id, r) in &decoded {
        let activity = match grammar {
            Grammar::Paths(g, _) => activity_lookup(g, r),
            Grammar::Bigram(_) => None,
        };
        recognized.push_str(&formats::format_transcript_line(id, &r.transcript, activity, labels));
    }
    let segs: Vec<(String, Segmentation)> =
        decoded.into_iter().map(|(id, r)| (id, r.segmentation)).collect();
    write_segmentations(&a.out, labels, &segs)?;
    write_atomic(&a.out.join(RECOGNIZED_FILE), recognized.as_bytes())?;
    Ok(())
}

/// `video_id -> activity` from a transcript-format file; labels are not
/// interpreted.
fn read_activity_tags(path: &Path) -> Result<BTreeMap<String, Option<String>>> {
    let text = formats::read_text(path)?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let id = fields.next().unwrap_or("").trim().to_string();
        let tag = fields.nth(1).and_then(|t| t.trim().strip_prefix('@')).map(str::to_string);
        if id.is_empty() {
            bail!("{}:{}: missing video id", path.display(), i + 1);
        }
        out.insert(id, tag);
    }
    Ok(out)
}

/// Label space covering every name in the ground truth and segmentations,
/// in order of first appearance.
fn collect_labels(gt: &str, seg_texts: &[String]) -> Result<LabelSpace> {
    let mut labels = LabelSpace::new(Vec::<String>::new())?;
    for line in gt.lines() {
        if let Some((_, rest)) = line.split_once('\t') {
            for name in rest.split_whitespace() {
                labels.intern(name)?;
            }
        }
    }
    for text in seg_texts {
        for line in text.lines() {
            if let Some(name) = line.split_whitespace().nth(2) {
                labels.intern(name)?;
            }
        }
    }
    Ok(labels)
}

pub fn run_eval(a: &EvalArgs) -> Result<()> {
    let gt_text = formats::read_text(&a.gt)?;
    let ids: Vec<String> = gt_text
        .lines()
        .filter_map(|l| l.split_once('\t').map(|(id, _)| id.to_string()))
        .collect();
    let seg_paths: Vec<(String, PathBuf)> = ids
        .iter()
        .map(|id| (id.clone(), formats::segmentation_path(&a.hyp, id)))
        .filter(|(_, p)| p.is_file())
        .collect();
    let seg_texts = seg_paths
        .iter()
        .map(|(_, p)| formats::read_text(p))
        .collect::<formats::Result<Vec<_>>>()?;
    let labels = collect_labels(&gt_text, &seg_texts)?;
    let gt: BTreeMap<String, FrameLabeling> = formats::read_labelings(&a.gt, &labels)?.into_iter().collect();
    let hyps: Vec<(String, FrameLabeling)> = seg_paths
        .iter()
        .map(|(id, p)| Ok((id.clone(), formats::read_segmentation(p, &labels)?.to_labeling())))
        .collect::<Result<_>>()?;
    if hyps.is_empty() {
        bail!("{}: no segmentation matches a ground-truth video", a.hyp.display());
    }
    let pairs: Vec<(&FrameLabeling, &FrameLabeling)> = hyps.iter().map(|(id, h)| (&gt[id], h)).collect();
    for (id, h) in &hyps {
        if gt[id].len() != h.len() {
            bail!("{id}: ground truth has {} frames, segmentation {}", gt[id].len(), h.len());
        }
    }
    let mut report = EvalReport::new(&pairs, gt.len() - hyps.len())?;
    if let Some(path) = &a.activities {
        let truth = read_activity_tags(path)?;
        let recognized_path = a.hyp.join(RECOGNIZED_FILE);
        let recognized = if recognized_path.is_file() {
            read_activity_tags(&recognized_path)?
        } else {
            BTreeMap::new()
        };
        let tags: Vec<(Option<&str>, Option<&str>)> = hyps
            .iter()
            .filter_map(|(id, _)| truth.get(id).map(|t| (t.as_deref(), recognized.get(id).and_then(|r| r.as_deref()))))
            .collect();
        if tags.is_empty() {
            return Err(anyhow!("{}: no activity tags for the evaluated videos", path.display()));
        }
        report.activity_accuracy = Some(actseg_core::eval::activity_accuracy(&tags)?);
    }
    print!("{}", format_report(&report, &labels, a.per_class, a.format));
    Ok(())
}

pub fn format_report(r: &EvalReport, labels: &LabelSpace, per_class: bool, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Text => {
            out.push_str("MoF     MoC     Jacc(IoU)  Jacc(IoD)");
            if r.activity_accuracy.is_some() {
                out.push_str("  Activity");
            }
            let _ = write!(out, "\n{:.4}  {:.4}  {:.4}     {:.4}", r.mof, r.moc, r.jacc_iou, r.jacc_iod);
            if let Some(acc) = r.activity_accuracy {
                let _ = write!(out, "     {acc:.4}");
            }
            let _ = writeln!(out, "\nvideos: {} evaluated, {} skipped", r.evaluated, r.skipped);
            if per_class {
                out.push_str("\nclass                 truth    hyp  accuracy  IoU     IoD\n");
                let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
                for (l, c) in &r.per_class {
                    let _ = writeln!(
                        out,
                        "{:<20} {:>6} {:>6}  {:<8}  {:<6}  {}",
                        labels.name(*l),
                        c.truth,
                        c.hypothesis,
                        opt(c.accuracy()),
                        opt(c.iou()),
                        opt(c.iod())
                    );
                }
            }
        }
        ReportFormat::Kv => {
            let _ = writeln!(out, "mof={}", r.mof);
            let _ = writeln!(out, "moc={}", r.moc);
            let _ = writeln!(out, "jacc_iou={}", r.jacc_iou);
            let _ = writeln!(out, "jacc_iod={}", r.jacc_iod);
            if let Some(acc) = r.activity_accuracy {
                let _ = writeln!(out, "activity={acc}");
            }
            let _ = writeln!(out, "evaluated={}", r.evaluated);
            let _ = writeln!(out, "skipped={}", r.skipped);
            if per_class {
                for (l, c) in &r.per_class {
                    let name = labels.name(*l);
                    let _ = writeln!(out, "class.{name}.truth={}", c.truth);
                    let _ = writeln!(out, "class.{name}.hypothesis={}", c.hypothesis);
                    let _ = writeln!(out, "class.{name}.both={}", c.both);
                }
            }
        }
    }
    out
}

pub fn run_synth(a: &SynthArgs) -> Result<()> {
    let mut spec = match &a.spec {
        Some(p) => SynthSpec::parse(&formats::read_text(p)?).with_context(|| p.display().to_string())?,
        None => SynthSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let corpus = synth::generate(&spec)?;
    synth::write_corpus(&a.out, &spec, &corpus)?;
    Ok(())
}

pub fn run_grammar(a: &GrammarArgs) -> Result<()> {
    let labels = formats::read_labels(&a.labels)?;
    let transcripts = formats::read_transcripts(&a.transcripts, &labels)?;
    let text = match a.kind {
        GrammarKind::Path => formats::format_path_grammar(&PathGrammar::build(&transcripts)?, &labels),
        GrammarKind::Bigram => {
            formats::format_bigram(&BigramModel::build(&transcripts, labels.len(), a.smoothing)?, &labels)
        }
    };
    write_atomic(&a.out, text.as_bytes())?;
    Ok(())
}
