//! On-disk layout of a trained model directory.
//!
//! ```text
//! labels.txt     one label per line
//! topology.txt   `label states frames_per_state` per modeled label
//! states.txt     header, then per state: `state col label local`, `mean …`, `cov …`
//! priors.txt     state priors from the final training alignment (optional)
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use actseg_core::hmm::{ActionInventory, ActionModel};
use actseg_core::{CovarianceMode, GaussianModel, LabelSpace, ModelSet, PriorTable};

use crate::formats::{self, write_atomic, FormatError, Result};

pub const LABELS_FILE: &str = "labels.txt";
pub const TOPOLOGY_FILE: &str = "topology.txt";
pub const STATES_FILE: &str = "states.txt";
pub const PRIORS_FILE: &str = "priors.txt";
pub const LOG_FILE: &str = "train.log";
pub const PATH_GRAMMAR_FILE: &str = "paths.grammar";
pub const BIGRAM_FILE: &str = "bigram.grammar";

/// A model set plus the preprocessing its features went through.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredModels {
    pub models: ModelSet,
    /// Per-video L2 normalization of feature columns before scoring.
    pub normalize: bool,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn format_topology(models: &ModelSet) -> String {
    let mut out = String::new();
    for m in models.inventory().models() {
        let _ = writeln!(
            out,
            "{} {} {}",
            models.labels().name(m.label()),
            m.n_states(),
            models.frames_per_state()
        );
    }
    out
}

pub fn format_states(stored: &StoredModels) -> String {
    let m = &stored.models;
    let mut out = String::new();
    let _ = writeln!(out, "dim {}", m.dim());
    let _ = writeln!(out, "states {}", m.total_states());
    let _ = writeln!(out, "covariance {}", m.covariance().as_str());
    let _ = writeln!(out, "floor {}", m.variance_floor());
    let _ = writeln!(out, "iteration {}", m.iteration);
    let _ = writeln!(out, "normalize {}", stored.normalize);
    for (col, g) in m.gaussians().iter().enumerate() {
        let (label, local) = m.inventory().column_owner(col).expect("column has an owner");
        let _ = writeln!(out, "state {col} {} {local}", m.labels().name(label));
        out.push_str("mean");
        for v in g.mean() {
            let _ = write!(out, " {v}");
        }
        out.push_str("\ncov");
        for v in g.covariance() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn save(dir: &Path, stored: &StoredModels, priors: Option<&PriorTable>) -> Result<()> {
    formats::create_dir(dir)?;
    let labels = formats::format_labels(stored.models.labels());
    write_atomic(&dir.join(LABELS_FILE), labels.as_bytes())?;
    write_atomic(&dir.join(TOPOLOGY_FILE), format_topology(&stored.models).as_bytes())?;
    write_atomic(&dir.join(STATES_FILE), format_states(stored).as_bytes())?;
    if let Some(p) = priors {
        write_atomic(&dir.join(PRIORS_FILE), formats::format_priors(p).as_bytes())?;
    }
    Ok(())
}

fn read_topology(path: &Path, labels: &LabelSpace) -> Result<(ActionInventory, usize)> {
    let text = formats::read_text(path)?;
    let mut inventory = ActionInventory::new(labels.len());
    let mut fps = None;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let ln = i + 1;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(path, ln, "expected `label states frames_per_state`"));
        }
        let label = labels
            .id(f[0])
            .ok_or_else(|| parse_err(path, ln, format!("unknown label `{}`", f[0])))?;
        if inventory.get(label).is_some() {
            return Err(parse_err(path, ln, format!("label `{}` listed twice", f[0])));
        }
        let n: usize = f[1].parse().map_err(|_| parse_err(path, ln, "bad state count"))?;
        let this: usize = f[2].parse().map_err(|_| parse_err(path, ln, "bad frames per state"))?;
        if *fps.get_or_insert(this) != this {
            return Err(parse_err(path, ln, "frames per state differs between labels"));
        }
        let model = ActionModel::new(label, n, this).map_err(|e| parse_err(path, ln, e.to_string()))?;
        inventory.insert(model);
    }
    let fps = fps.ok_or_else(|| parse_err(path, 1, "topology lists no labels"))?;
    Ok((inventory, fps))
}

struct Header {
    dim: usize,
    states: usize,
    covariance: CovarianceMode,
    floor: f64,
    iteration: usize,
    normalize: bool,
}

fn read_states(path: &Path, labels: &LabelSpace, inventory: &ActionInventory) -> Result<(Header, Vec<GaussianModel>)> {
    let text = formats::read_text(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, format!("missing `{key}` line")))?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((ln, v.trim().to_string())),
            _ => Err(parse_err(path, ln, format!("expected `{key} …`"))),
        }
    };
    let num = |(ln, v): (usize, String), what: &str| -> Result<usize> {
        v.parse().map_err(|_| parse_err(path, ln, format!("bad {what}")))
    };
    let dim = num(field("dim")?, "dimension")?;
    let states = num(field("states")?, "state count")?;
    let (ln, cov) = field("covariance")?;
    let covariance = CovarianceMode::parse(&cov)
        .ok_or_else(|| parse_err(path, ln, format!("unknown covariance mode `{cov}`")))?;
    let (ln, floor) = field("floor")?;
    let floor: f64 = floor.parse().map_err(|_| parse_err(path, ln, "bad floor"))?;
    let iteration = num(field("iteration")?, "iteration")?;
    let (ln, normalize) = field("normalize")?;
    let normalize = normalize
        .parse()
        .map_err(|_| parse_err(path, ln, "normalize must be true or false"))?;
    if states != inventory.total_states() {
        return Err(parse_err(
            path,
            0,
            format!("{states} states but the topology has {}", inventory.total_states()),
        ));
    }
    let values = |(ln, v): (usize, String), n: usize| -> Result<Vec<f64>> {
        let out = v
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(path, ln, format!("bad value `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if out.len() != n {
            return Err(parse_err(path, ln, format!("expected {n} values, found {}", out.len())));
        }
        Ok(out)
    };
    let cov_len = match covariance {
        CovarianceMode::Full => dim * dim,
        CovarianceMode::Diagonal => dim,
    };
    let mut gaussians = Vec::with_capacity(states);
    for col in 0..states {
        let (ln, head) = field("state")?;
        let (label, local) = inventory.column_owner(col).expect("column in range");
        let expected = format!("{col} {} {local}", labels.name(label));
        if head.split_whitespace().collect::<Vec<_>>().join(" ") != expected {
            return Err(parse_err(path, ln, format!("expected state header `{expected}`")));
        }
        let mean = values(field("mean")?, dim)?;
        let cov = values(field("cov")?, cov_len)?;
        let g = GaussianModel::new(mean, cov, covariance).map_err(|e| FormatError::Data {
            path: path.to_path_buf(),
            source: e,
        })?;
        gaussians.push(g);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(path, ln, "trailing content after the last state"));
    }
    let header = Header {
        dim,
        states,
        covariance,
        floor,
        iteration,
        normalize,
    };
    Ok((header, gaussians))
}

pub fn load(dir: &Path) -> Result<StoredModels> {
    let labels = formats::read_labels(&dir.join(LABELS_FILE))?;
    let (inventory, fps) = read_topology(&dir.join(TOPOLOGY_FILE), &labels)?;
    let states_path = dir.join(STATES_FILE);
    let (header, gaussians) = read_states(&states_path, &labels, &inventory)?;
    debug_assert_eq!(header.states, gaussians.len());
    let mut models = ModelSet::new(labels, inventory, gaussians, fps, header.floor).map_err(|e| {
        FormatError::Data {
            path: states_path.clone(),
            source: e,
        }
    })?;
    if models.dim() != header.dim || models.covariance() != header.covariance {
        return Err(parse_err(&states_path, 1, "header disagrees with the state records"));
    }
    models.iteration = header.iteration;
    Ok(StoredModels {
        models,
        normalize: header.normalize,
    })
}

/// Priors stored next to the models, if training wrote them.
pub fn priors_path(dir: &Path) -> PathBuf {
    dir.join(PRIORS_FILE)
}
