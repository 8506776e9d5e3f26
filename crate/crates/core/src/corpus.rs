//! Sequences, transcripts, labelings and segmentations.
//!
//! Frame indices are 0-based and segment bounds are inclusive throughout.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid_arg, Error, Result};
use crate::hmm::{StateAlignment, StateIndex};
use crate::math;

/// Dense index of an action class in a [`LabelSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub usize);

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Ordered set of action class names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSpace {
    names: Vec<String>,
    lookup: BTreeMap<String, LabelId>,
}

impl LabelSpace {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut space = LabelSpace::default();
        for name in names {
            let name = name.into();
            if space.lookup.contains_key(&name) {
                return Err(Error::InvalidData(format!("duplicate label {name:?}")));
            }
            space.push(name)?;
        }
        Ok(space)
    }

    fn push(&mut self, name: String) -> Result<LabelId> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidData(format!("malformed label {name:?}")));
        }
        let id = LabelId(self.names.len());
        self.lookup.insert(name.clone(), id);
        self.names.push(name);
        Ok(id)
    }

    /// Returns the id of `name`, appending it if unseen.
    pub fn intern(&mut self, name: &str) -> Result<LabelId> {
        match self.lookup.get(name) {
            Some(&id) => Ok(id),
            None => self.push(name.to_string()),
        }
    }

    pub fn id(&self, name: &str) -> Option<LabelId> {
        self.lookup.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<LabelId> {
        self.id(name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn name(&self, id: LabelId) -> &str {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, id: LabelId) -> bool {
        id.0 < self.names.len()
    }
}

/// A `T x dim` matrix of frame features for one video, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    video_id: String,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureSequence {
    pub fn new(video_id: impl Into<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid_arg("feature dimension must be at least 1"));
        }
        if data.is_empty() || data.len() % dim != 0 {
            return Err(Error::InvalidData(format!(
                "{} values do not form whole frames of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value at frame {} dim {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(FeatureSequence {
            video_id: video_id.into(),
            dim,
            data,
        })
    }

    pub fn from_rows(video_id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidData("ragged feature rows".into()));
        }
        Self::new(video_id, dim, rows.concat())
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Divides every feature column by its Euclidean norm over the clip.
///
/// Zero columns are left as they are.
pub fn normalize_features(seq: &FeatureSequence) -> Result<FeatureSequence> {
    if let Some(pos) = seq.data.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!("non-finite value at index {pos}")));
    }
    let dim = seq.dim;
    let mut norms = alloc::vec![0.0; dim];
    for row in seq.frames() {
        for (n, v) in norms.iter_mut().zip(row) {
            *n += v * v;
        }
    }
    for n in &mut norms {
        *n = math::sqrt(*n);
    }
    let mut data = seq.data.clone();
    for row in data.chunks_exact_mut(dim) {
        for (v, &n) in row.iter_mut().zip(&norms) {
            if n > 0.0 {
                *v /= n;
            }
        }
    }
    FeatureSequence::new(seq.video_id.clone(), dim, data)
}

/// Ordered action labels of one video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub video_id: String,
    pub actions: Vec<LabelId>,
    pub activity: Option<String>,
}

impl Transcript {
    pub fn new(
        video_id: impl Into<String>,
        actions: Vec<LabelId>,
        activity: Option<String>,
    ) -> Result<Self> {
        if actions.is_empty() {
            return Err(invalid_arg("transcript must contain at least one action"));
        }
        Ok(Transcript {
            video_id: video_id.into(),
            actions,
            activity,
        })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// One label per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLabeling {
    pub labels: Vec<LabelId>,
}

impl FrameLabeling {
    pub fn new(labels: Vec<LabelId>) -> Self {
        FrameLabeling { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labeling of the uniform split: `k` equal parts with part `i` starting
    /// at `floor(i * len / k)`.
    pub fn uniform_split(actions: &[LabelId], len: usize) -> Result<Self> {
        if actions.is_empty() || len < actions.len() {
            return Err(Error::InfeasibleAlignment {
                frames: len,
                states: actions.len(),
            });
        }
        let k = actions.len();
        let mut labels = Vec::with_capacity(len);
        for (i, &a) in actions.iter().enumerate() {
            let start = i * len / k;
            let end = (i + 1) * len / k;
            labels.extend(core::iter::repeat(a).take(end - start));
        }
        Ok(FrameLabeling { labels })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub label: LabelId,
    pub start: usize,
    /// Inclusive.
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Contiguous segments covering `0..len` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    segments: Vec<Segment>,
}

impl Segmentation {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(invalid_arg("segmentation must have at least one segment"));
        }
        let mut next = 0;
        for s in &segments {
            if s.start != next || s.end < s.start {
                return Err(Error::InvalidData(format!(
                    "segment {}-{} does not continue at frame {next}",
                    s.start, s.end
                )));
            }
            next = s.end + 1;
        }
        Ok(Segmentation { segments })
    }

    /// Run-length encodes a labeling; equal neighbours merge.
    pub fn from_labeling(labeling: &FrameLabeling) -> Result<Self> {
        let mut segments: Vec<Segment> = Vec::new();
        for (t, &label) in labeling.labels.iter().enumerate() {
            match segments.last_mut() {
                Some(last) if last.label == label => last.end = t,
                _ => segments.push(Segment {
                    label,
                    start: t,
                    end: t,
                }),
            }
        }
        Self::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Number of frames covered.
    pub fn frames(&self) -> usize {
        self.segments.last().map_or(0, |s| s.end + 1)
    }

    pub fn labels(&self) -> Vec<LabelId> {
        self.segments.iter().map(|s| s.label).collect()
    }

    pub fn to_labeling(&self) -> FrameLabeling {
        labeling_from_segmentation(self)
    }
}

/// Splits an alignment wherever the path enters a new HMM instance.
///
/// Repeated transcript entries therefore stay separate segments.
pub fn segmentation_from_alignment(
    alignment: &StateAlignment,
    index: &StateIndex,
) -> Result<Segmentation> {
    if alignment.states.is_empty() {
        return Err(invalid_arg("empty alignment"));
    }
    let mut segments: Vec<Segment> = Vec::new();
    let mut current_instance = usize::MAX;
    for (t, &s) in alignment.states.iter().enumerate() {
        let entry = index
            .get(s)
            .ok_or_else(|| invalid_arg(format!("state {s} not in index")))?;
        if entry.instance == current_instance {
            if let Some(last) = segments.last_mut() {
                last.end = t;
            }
        } else {
            current_instance = entry.instance;
            segments.push(Segment {
                label: entry.label,
                start: t,
                end: t,
            });
        }
    }
    Segmentation::new(segments)
}

pub fn labeling_from_segmentation(seg: &Segmentation) -> FrameLabeling {
    let mut labels = Vec::with_capacity(seg.frames());
    for s in &seg.segments {
        labels.extend(core::iter::repeat(s.label).take(s.len()));
    }
    FrameLabeling { labels }
}
