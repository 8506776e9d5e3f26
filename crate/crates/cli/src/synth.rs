//! Seeded synthetic corpora sampled from planted left-to-right HMMs.
//!
//! All randomness comes from one `ChaCha8Rng` seeded with `SynthSpec::seed`,
//! consumed in a fixed order: planted state counts, lattice positions,
//! templates, then videos (transcript, durations, features) in order, train
//! split first.
//!
//! State means sit on distinct points of a cubic lattice with spacing
//! `separation * sigma`, so any two states are at least that far apart.
//! Every state dwells `1 + Geometric(1 / dwell)` frames, the duration law
//! of a self-loop with probability `(dwell - 1) / dwell` that emits at
//! least once.

use std::fmt::{self, Write as _};
use std::path::Path;

use actseg_core::hmm::{ActionInventory, ActionModel};
use actseg_core::{
    CovarianceMode, FeatureSequence, FrameLabeling, GaussianModel, LabelId, LabelSpace, ModelSet,
    Transcript,
};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};

use crate::formats::{self, write_atomic};
use crate::model_dir::{self, StoredModels};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrammarStyle {
    /// A few fixed transcripts, each tagged with an activity.
    Templates,
    /// An independent random transcript per video, untagged.
    Random,
}

impl GrammarStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            GrammarStyle::Templates => "templates",
            GrammarStyle::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub classes: usize,
    pub min_states: usize,
    pub max_states: usize,
    pub dim: usize,
    pub sigma: f64,
    /// Minimum distance between state means, in units of `sigma`.
    pub separation: f64,
    /// Expected frames per state.
    pub dwell: usize,
    pub train_videos: usize,
    pub test_videos: usize,
    pub min_actions: usize,
    pub max_actions: usize,
    pub grammar: GrammarStyle,
    pub templates: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 1,
            classes: 3,
            min_states: 2,
            max_states: 4,
            dim: 8,
            sigma: 1.0,
            separation: 6.0,
            dwell: 10,
            train_videos: 20,
            test_videos: 10,
            min_actions: 2,
            max_actions: 4,
            grammar: GrammarStyle::Templates,
            templates: 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        let bad = |m: &str| Err(SpecError::Invalid(m.to_string()));
        if self.classes == 0 || self.dim == 0 || self.dwell == 0 || self.templates == 0 {
            return bad("classes, dim, dwell and templates must be at least 1");
        }
        if self.train_videos == 0 {
            return bad("train_videos must be at least 1");
        }
        if self.min_states == 0 || self.min_states > self.max_states {
            return bad("need 1 <= min_states <= max_states");
        }
        if self.min_actions == 0 || self.min_actions > self.max_actions {
            return bad("need 1 <= min_actions <= max_actions");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive");
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return bad("separation must be positive");
        }
        Ok(())
    }

    /// `key = value` lines; `#` starts a comment. Unlisted keys keep their
    /// defaults.
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut spec = SynthSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SpecError::Syntax { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            fn num<T: std::str::FromStr>(v: &str) -> Option<T> {
                v.parse().ok()
            }
            let ok = match key {
                "seed" => num(value).map(|v| spec.seed = v),
                "classes" => num(value).map(|v| spec.classes = v),
                "min_states" => num(value).map(|v| spec.min_states = v),
                "max_states" => num(value).map(|v| spec.max_states = v),
                "dim" => num(value).map(|v| spec.dim = v),
                "sigma" => num(value).map(|v| spec.sigma = v),
                "separation" => num(value).map(|v| spec.separation = v),
                "dwell" => num(value).map(|v| spec.dwell = v),
                "train_videos" => num(value).map(|v| spec.train_videos = v),
                "test_videos" => num(value).map(|v| spec.test_videos = v),
                "min_actions" => num(value).map(|v| spec.min_actions = v),
                "max_actions" => num(value).map(|v| spec.max_actions = v),
                "templates" => num(value).map(|v| spec.templates = v),
                "grammar" => match value {
                    "templates" => Some(spec.grammar = GrammarStyle::Templates),
                    "random" => Some(spec.grammar = GrammarStyle::Random),
                    _ => None,
                },
                _ => return Err(err(format!("unknown key `{key}`"))),
            };
            ok.ok_or_else(|| err(format!("bad value `{value}` for `{key}`")))?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SynthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "classes = {}", self.classes)?;
        writeln!(f, "min_states = {}", self.min_states)?;
        writeln!(f, "max_states = {}", self.max_states)?;
        writeln!(f, "dim = {}", self.dim)?;
        writeln!(f, "sigma = {}", self.sigma)?;
        writeln!(f, "separation = {}", self.separation)?;
        writeln!(f, "dwell = {}", self.dwell)?;
        writeln!(f, "train_videos = {}", self.train_videos)?;
        writeln!(f, "test_videos = {}", self.test_videos)?;
        writeln!(f, "min_actions = {}", self.min_actions)?;
        writeln!(f, "max_actions = {}", self.max_actions)?;
        writeln!(f, "grammar = {}", self.grammar.as_str())?;
        writeln!(f, "templates = {}", self.templates)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthVideo {
    pub features: FeatureSequence,
    pub transcript: Transcript,
    pub truth: FrameLabeling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub labels: LabelSpace,
    pub train: Vec<SynthVideo>,
    pub test: Vec<SynthVideo>,
    /// The models the videos were sampled from.
    pub planted: ModelSet,
}

impl SynthCorpus {
    pub fn train_pairs(&self) -> Vec<(FeatureSequence, Transcript)> {
        self.train
            .iter()
            .map(|v| (v.features.clone(), v.transcript.clone()))
            .collect()
    }
}

/// Mean of lattice point `index`: base-`base` digits scaled by `spacing`.
fn lattice_point(mut index: usize, base: usize, dim: usize, spacing: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let digit = index % base;
            index /= base;
            digit as f64 * spacing
        })
        .collect()
}

fn sample_transcript(rng: &mut ChaCha8Rng, spec: &SynthSpec) -> Vec<LabelId> {
    let k = rng.random_range(spec.min_actions..=spec.max_actions);
    let mut out: Vec<LabelId> = Vec::with_capacity(k);
    while out.len() < k {
        let l = LabelId(rng.random_range(0..spec.classes));
        // no immediate repeats unless there is only one class
        if spec.classes > 1 && out.last() == Some(&l) {
            continue;
        }
        out.push(l);
    }
    out
}

pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus, SpecError> {
    spec.validate()?;
    let invalid = |e: actseg_core::Error| SpecError::Invalid(e.to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = spec.classes.to_string().len();
    let labels = LabelSpace::new((0..spec.classes).map(|c| format!("c{c:0width$}")))
        .map_err(invalid)?;

    let mut inventory = ActionInventory::new(spec.classes);
    for c in 0..spec.classes {
        let n = rng.random_range(spec.min_states..=spec.max_states);
        inventory.insert(ActionModel::new(LabelId(c), n, spec.dwell).map_err(invalid)?);
    }
    let total = inventory.total_states();
    let mut base = 2;
    while (base as f64).powi(spec.dim.min(64) as i32) < total as f64 {
        base += 1;
    }
    let points = (base as f64)
        .powi(spec.dim.min(64) as i32)
        .min((1usize << 20) as f64) as usize;
    let spacing = spec.separation * spec.sigma;
    let gaussians = index::sample(&mut rng, points, total)
        .iter()
        .map(|p| {
            let mean = lattice_point(p, base, spec.dim, spacing);
            GaussianModel::isotropic(mean, spec.sigma * spec.sigma, CovarianceMode::Full)
        })
        .collect::<actseg_core::Result<Vec<_>>>()
        .map_err(invalid)?;
    let planted = ModelSet::new(labels.clone(), inventory, gaussians, spec.dwell, 0.0)
        .map_err(invalid)?;

    let templates: Vec<Vec<LabelId>> = match spec.grammar {
        GrammarStyle::Templates => (0..spec.templates).map(|_| sample_transcript(&mut rng, spec)).collect(),
        GrammarStyle::Random => Vec::new(),
    };
    let dwell = Geometric::new(1.0 / spec.dwell as f64).expect("probability in (0, 1]");

    let video = |id: String, rng: &mut ChaCha8Rng| -> Result<SynthVideo, SpecError> {
        let (actions, activity) = match spec.grammar {
            GrammarStyle::Templates => {
                let j = rng.random_range(0..templates.len());
                (templates[j].clone(), Some(format!("task{j}")))
            }
            GrammarStyle::Random => (sample_transcript(rng, spec), None),
        };
        let mut data = Vec::new();
        let mut truth = Vec::new();
        for &label in &actions {
            let model = planted.inventory().get(label).expect("every class is planted");
            let offset = planted.inventory().offset(label).expect("every class is planted");
            for local in 0..model.n_states() {
                let g = &planted.gaussians()[offset + local];
                let frames = 1 + dwell.sample(rng) as usize;
                for _ in 0..frames {
                    for &m in g.mean() {
                        let z: f64 = StandardNormal.sample(rng);
                        data.push(m + spec.sigma * z);
                    }
                    truth.push(label);
                }
            }
        }
        Ok(SynthVideo {
            features: FeatureSequence::new(id.clone(), spec.dim, data).map_err(invalid)?,
            transcript: Transcript::new(id, actions, activity).map_err(invalid)?,
            truth: FrameLabeling::new(truth),
        })
    };
    let digits = spec.train_videos.max(spec.test_videos).to_string().len();
    let train = (0..spec.train_videos)
        .map(|i| video(format!("train{i:0digits$}"), &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let test = (0..spec.test_videos)
        .map(|i| video(format!("test{i:0digits$}"), &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SynthCorpus {
        labels,
        train,
        test,
        planted,
    })
}

pub const SPEC_FILE: &str = "spec.txt";
pub const PLANTED_DIR: &str = "planted";

/// Layout under `dir`:
/// `labels.txt`, `spec.txt`, `{train,test}/<id>.feat`,
/// `{train,test}.transcripts`, `{train,test}.gt`, `planted/`.
pub fn write_corpus(dir: &Path, spec: &SynthSpec, corpus: &SynthCorpus) -> formats::Result<()> {
    formats::create_dir(dir)?;
    write_atomic(&dir.join("labels.txt"), formats::format_labels(&corpus.labels).as_bytes())?;
    write_atomic(&dir.join(SPEC_FILE), spec.to_string().as_bytes())?;
    for (split, videos) in [("train", &corpus.train), ("test", &corpus.test)] {
        let fdir = dir.join(split);
        formats::create_dir(&fdir)?;
        let mut transcripts = String::new();
        let mut gt = String::new();
        for v in videos {
            let id = v.features.video_id();
            let path = formats::feature_path(&fdir, id);
            write_atomic(&path, formats::format_features(&v.features).as_bytes())?;
            let t = &v.transcript;
            transcripts.push_str(&formats::format_transcript_line(
                id,
                &t.actions,
                t.activity.as_deref(),
                &corpus.labels,
            ));
            let _ = write!(gt, "{}", formats::format_labelings([(id, &v.truth)], &corpus.labels));
        }
        write_atomic(&dir.join(format!("{split}.transcripts")), transcripts.as_bytes())?;
        write_atomic(&dir.join(format!("{split}.gt")), gt.as_bytes())?;
    }
    let stored = StoredModels {
        models: corpus.planted.clone(),
        normalize: false,
    };
    model_dir::save(&dir.join(PLANTED_DIR), &stored, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_corpus() {
        let spec = SynthSpec::default();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SynthSpec { seed: 2, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap().train, generate(&other).unwrap().train);
    }

    #[test]
    fn labelings_match_features() {
        let c = generate(&SynthSpec::default()).unwrap();
        assert_eq!(c.train.len(), 20);
        assert_eq!(c.test.len(), 10);
        for v in c.train.iter().chain(&c.test) {
            assert_eq!(v.truth.len(), v.features.len());
            let seg = actseg_core::Segmentation::from_labeling(&v.truth).unwrap();
            // templates never repeat a label back to back
            assert_eq!(seg.labels(), v.transcript.actions);
            assert!(v.transcript.activity.is_some());
        }
    }

    #[test]
    fn planted_means_are_separated() {
        let spec = SynthSpec {
            dim: 2,
            separation: 3.5,
            sigma: 0.5,
            ..SynthSpec::default()
        };
        let c = generate(&spec).unwrap();
        let g = c.planted.gaussians();
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                let d: f64 = g[i]
                    .mean()
                    .iter()
                    .zip(g[j].mean())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                assert!(d >= 3.5 * 0.5 - 1e-12);
            }
        }
        for m in c.planted.inventory().models() {
            assert!((2..=4).contains(&m.n_states()));
        }
    }

    #[test]
    fn spec_text_round_trip() {
        let spec = SynthSpec {
            seed: 99,
            grammar: GrammarStyle::Random,
            sigma: 0.25,
            ..SynthSpec::default()
        };
        assert_eq!(SynthSpec::parse(&spec.to_string()).unwrap(), spec);
        assert_eq!(SynthSpec::parse("# nothing\n\n").unwrap(), SynthSpec::default());
        assert!(SynthSpec::parse("seed 3").is_err());
        assert!(SynthSpec::parse("colour = red").is_err());
        assert!(SynthSpec::parse("classes = 0").is_err());
        assert!(SynthSpec::parse("sigma = -1").is_err());
        assert!(SynthSpec::parse("min_states = 5\nmax_states = 2").is_err());
    }

    #[test]
    fn random_grammar_is_untagged() {
        let spec = SynthSpec {
            grammar: GrammarStyle::Random,
            classes: 1,
            min_actions: 2,
            ..SynthSpec::default()
        };
        let c = generate(&spec).unwrap();
        assert!(c.train.iter().all(|v| v.transcript.activity.is_none()));
        assert!(c.train.iter().all(|v| v.transcript.actions.iter().all(|l| l.0 == 0)));
    }
}
