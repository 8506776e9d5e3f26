//! Plain-text file formats.
//!
//! Every reader reports the file and 1-based line of the first problem.
//! Floats are written with Rust's shortest round-trip formatting, so a
//! value read back is bit-identical to the one written.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use actseg_core::grammar::{BigramModel, GrammarPath, Next, PathGrammar, Prev};
use actseg_core::{
    FeatureSequence, FrameLabeling, LabelId, LabelSpace, PosteriorMatrix, PriorTable, Segment,
    Segmentation, Transcript,
};

pub const FEATURE_EXT: &str = "feat";
pub const SEGMENTATION_EXT: &str = "seg";
pub const POSTERIOR_EXT: &str = "post";
pub const START_TOKEN: &str = "<s>";
pub const END_TOKEN: &str = "</s>";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Data {
        path: PathBuf,
        #[source]
        source: actseg_core::Error,
    },
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn data_err(path: &Path) -> impl FnOnce(actseg_core::Error) -> FormatError + '_ {
    move |source| FormatError::Data {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Non-blank lines with their 1-based numbers; `#` starts a comment line.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("bad {what} `{tok}`")))
}

/// Writes `contents` to a temporary sibling and renames it into place, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| parse_err(path, 0, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        FormatError::Io {
            path: path.to_path_buf(),
            source: e,
        }
    })
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

// ---- labels ----

/// One label per line, in id order.
pub fn read_labels(path: &Path) -> Result<LabelSpace> {
    let text = read_text(path)?;
    let names: Vec<&str> = content_lines(&text).map(|(_, l)| l.trim()).collect();
    LabelSpace::new(names).map_err(data_err(path))
}

pub fn format_labels(labels: &LabelSpace) -> String {
    labels.names().iter().map(|n| format!("{n}\n")).collect()
}

// ---- features ----

/// Header `T l`, then `T` rows of `l` whitespace-separated reals.
pub fn read_features(path: &Path, video_id: &str) -> Result<FeatureSequence> {
    let text = read_text(path)?;
    let mut lines = content_lines(&text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty feature file"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(path, hl, "header must be `frames dim`"));
    }
    let frames: usize = parse_num(path, hl, dims[0], "frame count")?;
    let dim: usize = parse_num(path, hl, dims[1], "dimension")?;
    let mut data = Vec::with_capacity(frames * dim);
    let mut rows = 0;
    for (ln, line) in lines {
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(parse_num::<f64>(path, ln, tok, "feature value")?);
        }
        if data.len() - before != dim {
            return Err(parse_err(
                path,
                ln,
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != frames {
        return Err(parse_err(path, hl, format!("header says {frames} frames, found {rows}")));
    }
    FeatureSequence::new(video_id, dim, data).map_err(data_err(path))
}

pub fn format_features(seq: &FeatureSequence) -> String {
    let mut out = format!("{} {}\n", seq.len(), seq.dim());
    for row in seq.frames() {
        push_row(&mut out, row);
    }
    out
}

fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

pub fn feature_path(dir: &Path, video_id: &str) -> PathBuf {
    dir.join(format!("{video_id}.{FEATURE_EXT}"))
}

/// Video ids of all feature files in `dir`, sorted.
pub fn list_videos(dir: &Path, ext: &str) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().is_some_and(|e| e == ext) {
            if let Some(stem) = path.file_stem() {
                ids.push(stem.to_string_lossy().into_owned());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

// ---- transcripts ----

/// `video_id <TAB> label label … [<TAB> @activity]`
pub fn read_transcripts(path: &Path, labels: &LabelSpace) -> Result<Vec<Transcript>> {
    let text = read_text(path)?;
    let mut out: Vec<Transcript> = Vec::new();
    for (ln, line) in content_lines(&text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(path, ln, "expected `id<TAB>labels[<TAB>@activity]`"));
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(parse_err(path, ln, "empty video id"));
        }
        let actions = fields[1]
            .split_whitespace()
            .map(|n| {
                labels
                    .id(n)
                    .ok_or_else(|| parse_err(path, ln, format!("unknown label `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let activity = match fields.get(2) {
            Some(tag) => Some(
                tag.trim()
                    .strip_prefix('@')
                    .filter(|t| !t.is_empty())
                    .ok_or_else(|| parse_err(path, ln, "activity must look like `@name`"))?
                    .to_string(),
            ),
            None => None,
        };
        if out.iter().any(|t| t.video_id == id) {
            return Err(parse_err(path, ln, format!("duplicate video id `{id}`")));
        }
        out.push(
            Transcript::new(id, actions, activity).map_err(|e| parse_err(path, ln, e.to_string()))?,
        );
    }
    Ok(out)
}

pub fn format_transcript_line(
    video_id: &str,
    actions: &[LabelId],
    activity: Option<&str>,
    labels: &LabelSpace,
) -> String {
    let names: Vec<&str> = actions.iter().map(|&l| labels.name(l)).collect();
    let mut line = format!("{video_id}\t{}", names.join(" "));
    if let Some(a) = activity {
        let _ = write!(line, "\t@{a}");
    }
    line.push('\n');
    line
}

pub fn format_transcripts(transcripts: &[Transcript], labels: &LabelSpace) -> String {
    transcripts
        .iter()
        .map(|t| format_transcript_line(&t.video_id, &t.actions, t.activity.as_deref(), labels))
        .collect()
}

// ---- frame labelings ----

/// `video_id <TAB> label label …` with one label per frame.
pub fn read_labelings(path: &Path, labels: &LabelSpace) -> Result<Vec<(String, FrameLabeling)>> {
    let text = read_text(path)?;
    let mut out: Vec<(String, FrameLabeling)> = Vec::new();
    for (ln, line) in content_lines(&text) {
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(path, ln, "expected `id<TAB>frame labels`"))?;
        let frames = rest
            .split_whitespace()
            .map(|n| {
                labels
                    .id(n)
                    .ok_or_else(|| parse_err(path, ln, format!("unknown label `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if frames.is_empty() {
            return Err(parse_err(path, ln, "labeling has no frames"));
        }
        if out.iter().any(|(v, _)| v == id) {
            return Err(parse_err(path, ln, format!("duplicate video id `{id}`")));
        }
        out.push((id.to_string(), FrameLabeling::new(frames)));
    }
    Ok(out)
}

pub fn format_labelings<'a>(
    items: impl IntoIterator<Item = (&'a str, &'a FrameLabeling)>,
    labels: &LabelSpace,
) -> String {
    let mut out = String::new();
    for (id, l) in items {
        let names: Vec<&str> = l.labels.iter().map(|&x| labels.name(x)).collect();
        let _ = writeln!(out, "{id}\t{}", names.join(" "));
    }
    out
}

// ---- segmentations ----

/// `start end label` per line, 0-based inclusive and contiguous.
pub fn read_segmentation(path: &Path, labels: &LabelSpace) -> Result<Segmentation> {
    let text = read_text(path)?;
    let mut segments = Vec::new();
    for (ln, line) in content_lines(&text) {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(path, ln, "expected `start end label`"));
        }
        let start = parse_num(path, ln, f[0], "start frame")?;
        let end = parse_num(path, ln, f[1], "end frame")?;
        let label = labels
            .id(f[2])
            .ok_or_else(|| parse_err(path, ln, format!("unknown label `{}`", f[2])))?;
        segments.push(Segment { label, start, end });
    }
    Segmentation::new(segments).map_err(data_err(path))
}

pub fn format_segmentation(seg: &Segmentation, labels: &LabelSpace) -> String {
    let mut out = String::new();
    for s in seg.segments() {
        let _ = writeln!(out, "{} {} {}", s.start, s.end, labels.name(s.label));
    }
    out
}

pub fn segmentation_path(dir: &Path, video_id: &str) -> PathBuf {
    dir.join(format!("{video_id}.{SEGMENTATION_EXT}"))
}

// ---- posteriors and priors ----

/// Header `T S`, then `T` rows of `S` probabilities (rows sum to 1 ± 1e-3).
pub fn read_posteriors(path: &Path) -> Result<PosteriorMatrix> {
    let text = read_text(path)?;
    let mut lines = content_lines(&text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty posterior file"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(path, hl, "header must be `frames states`"));
    }
    let frames: usize = parse_num(path, hl, dims[0], "frame count")?;
    let states: usize = parse_num(path, hl, dims[1], "state count")?;
    let mut data = Vec::with_capacity(frames * states);
    let mut rows = 0;
    for (ln, line) in lines {
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(parse_num::<f64>(path, ln, tok, "probability")?);
        }
        if data.len() - before != states {
            return Err(parse_err(path, ln, format!("expected {states} values")));
        }
        rows += 1;
    }
    if rows != frames {
        return Err(parse_err(path, hl, format!("header says {frames} frames, found {rows}")));
    }
    PosteriorMatrix::with_tolerance(frames, states, data, 1e-3).map_err(data_err(path))
}

pub fn format_posteriors(post: &PosteriorMatrix) -> String {
    let mut out = format!("{} {}\n", post.frames(), post.states());
    for t in 0..post.frames() {
        push_row(&mut out, post.row(t));
    }
    out
}

pub fn posterior_path(dir: &Path, video_id: &str) -> PathBuf {
    dir.join(format!("{video_id}.{POSTERIOR_EXT}"))
}

/// One prior per line, in model-state order.
pub fn read_priors(path: &Path) -> Result<PriorTable> {
    let text = read_text(path)?;
    let values = content_lines(&text)
        .map(|(ln, l)| parse_num::<f64>(path, ln, l.trim(), "prior"))
        .collect::<Result<Vec<_>>>()?;
    PriorTable::new(values).map_err(data_err(path))
}

pub fn format_priors(priors: &PriorTable) -> String {
    priors.as_slice().iter().map(|p| format!("{p}\n")).collect()
}

// ---- grammars ----

/// `count <TAB> labels… [<TAB> @activity]`
pub fn read_path_grammar(path: &Path, labels: &LabelSpace) -> Result<PathGrammar> {
    let text = read_text(path)?;
    let mut paths = Vec::new();
    for (ln, line) in content_lines(&text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(path, ln, "expected `count<TAB>labels[<TAB>@activity]`"));
        }
        let count = parse_num(path, ln, fields[0].trim(), "count")?;
        let seq = fields[1]
            .split_whitespace()
            .map(|n| {
                labels
                    .id(n)
                    .ok_or_else(|| parse_err(path, ln, format!("unknown label `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let activity = fields
            .get(2)
            .map(|t| {
                t.trim()
                    .strip_prefix('@')
                    .filter(|t| !t.is_empty())
                    .map(str::to_string)
                    .ok_or_else(|| parse_err(path, ln, "activity must look like `@name`"))
            })
            .transpose()?;
        paths.push(GrammarPath {
            labels: seq,
            count,
            activity,
        });
    }
    PathGrammar::from_paths(paths).map_err(data_err(path))
}

pub fn format_path_grammar(grammar: &PathGrammar, labels: &LabelSpace) -> String {
    let mut out = String::new();
    for p in grammar.paths() {
        let names: Vec<&str> = p.labels.iter().map(|&l| labels.name(l)).collect();
        let _ = write!(out, "{}\t{}", p.count, names.join(" "));
        if let Some(a) = &p.activity {
            let _ = write!(out, "\t@{a}");
        }
        out.push('\n');
    }
    out
}

/// `prev next logprob` with `<s>` and `</s>` for the sequence boundaries.
/// Pairs that are not listed have probability zero.
pub fn read_bigram(path: &Path, labels: &LabelSpace) -> Result<BigramModel> {
    let text = read_text(path)?;
    let mut entries = Vec::new();
    for (ln, line) in content_lines(&text) {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(path, ln, "expected `prev next logprob`"));
        }
        let lookup = |n: &str| {
            labels
                .id(n)
                .ok_or_else(|| parse_err(path, ln, format!("unknown label `{n}`")))
        };
        let prev = match f[0] {
            START_TOKEN => Prev::Start,
            n => Prev::Label(lookup(n)?),
        };
        let next = match f[1] {
            END_TOKEN => Next::End,
            n => Next::Label(lookup(n)?),
        };
        let lp: f64 = parse_num(path, ln, f[2], "log probability")?;
        entries.push((prev, next, lp));
    }
    BigramModel::from_entries(labels.len(), entries).map_err(data_err(path))
}

pub fn format_bigram(bigram: &BigramModel, labels: &LabelSpace) -> String {
    let mut out = String::new();
    for (prev, next, lp) in bigram.entries() {
        let p = match prev {
            Prev::Start => START_TOKEN,
            Prev::Label(l) => labels.name(l),
        };
        let n = match next {
            Next::End => END_TOKEN,
            Next::Label(l) => labels.name(l),
        };
        let _ = writeln!(out, "{p} {n} {lp}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(contents: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f");
        fs::write(&p, contents).unwrap();
        (dir, p)
    }

    #[test]
    fn features_round_trip_bitwise() {
        let seq = FeatureSequence::new("v", 2, vec![0.1, -1e-300, 1.0 / 3.0, 7.0]).unwrap();
        let (_d, p) = tmp(&format_features(&seq));
        assert_eq!(read_features(&p, "v").unwrap(), seq);
    }

    #[test]
    fn feature_errors_name_the_line() {
        let (_d, p) = tmp("2 2\n1 2\n3\n");
        let e = read_features(&p, "v").unwrap_err().to_string();
        assert!(e.ends_with(":3: expected 2 values, found 1"), "{e}");
        let (_d, p) = tmp("3 1\n1\n2\n");
        assert!(read_features(&p, "v").is_err());
        let (_d, p) = tmp("1 1\nnan\n");
        assert!(read_features(&p, "v").is_err());
    }

    #[test]
    fn transcripts_round_trip() {
        let labels = LabelSpace::new(["a", "b"]).unwrap();
        let text = "v1\ta b a\t@make\nv2\tb\n";
        let (_d, p) = tmp(text);
        let t = read_transcripts(&p, &labels).unwrap();
        assert_eq!(t[0].activity.as_deref(), Some("make"));
        assert_eq!(t[1].actions, vec![LabelId(1)]);
        assert_eq!(format_transcripts(&t, &labels), text);
    }

    #[test]
    fn transcript_errors() {
        let labels = LabelSpace::new(["a"]).unwrap();
        for bad in ["v\tz\n", "v\t\n", "v\ta\tmake\n", "v\ta\nv\ta\n", "v a\n"] {
            let (_d, p) = tmp(bad);
            assert!(read_transcripts(&p, &labels).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn segmentation_round_trip() {
        let labels = LabelSpace::new(["a", "b"]).unwrap();
        let text = "0 3 a\n4 4 b\n5 9 a\n";
        let (_d, p) = tmp(text);
        let seg = read_segmentation(&p, &labels).unwrap();
        assert_eq!(seg.frames(), 10);
        assert_eq!(format_segmentation(&seg, &labels), text);
        let (_d, p) = tmp("0 3 a\n5 9 b\n");
        assert!(read_segmentation(&p, &labels).is_err());
    }

    #[test]
    fn labelings_round_trip() {
        let labels = LabelSpace::new(["a", "b"]).unwrap();
        let text = "v\ta a b\nw\tb\n";
        let (_d, p) = tmp(text);
        let l = read_labelings(&p, &labels).unwrap();
        let items = l.iter().map(|(id, l)| (id.as_str(), l));
        assert_eq!(format_labelings(items, &labels), text);
    }

    #[test]
    fn grammars_round_trip() {
        let labels = LabelSpace::new(["a", "b"]).unwrap();
        let t = vec![
            Transcript::new("1", vec![LabelId(0), LabelId(1)], Some("x".into())).unwrap(),
            Transcript::new("2", vec![LabelId(1)], None).unwrap(),
            Transcript::new("3", vec![LabelId(0), LabelId(1)], Some("x".into())).unwrap(),
        ];
        let g = PathGrammar::build(&t).unwrap();
        let text = format_path_grammar(&g, &labels);
        assert_eq!(text, "2\ta b\t@x\n1\tb\n");
        let (_d, p) = tmp(&text);
        assert_eq!(read_path_grammar(&p, &labels).unwrap(), g);

        let b = BigramModel::build(&t, 2, 0.5).unwrap();
        let (_d, p) = tmp(&format_bigram(&b, &labels));
        let back = read_bigram(&p, &labels).unwrap();
        for (prev, next, lp) in b.entries() {
            assert_eq!(back.log_prob(prev, next), lp);
        }
    }

    #[test]
    fn posteriors_validate_rows() {
        let (_d, p) = tmp("2 2\n0.5 0.5\n0.9995 0\n");
        assert_eq!(read_posteriors(&p).unwrap().frames(), 2);
        let (_d, p) = tmp("1 2\n0.5 0.4\n");
        assert!(read_posteriors(&p).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
