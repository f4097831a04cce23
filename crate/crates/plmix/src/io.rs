//! File formats: JSON-Lines profiles and JSON parameter and report
//! documents.
//!
//! A profile file is JSON Lines with LF endings: a header line `{"m":N}`
//! followed by one order per line, each tagged by `kind` and repeating `m`
//! so every line is self-describing:
//!
//! ```text
//! {"m":4}
//! {"kind":"top","m":4,"ranked":[2,3]}
//! {"kind":"way","m":4,"ranked":[3,1,4]}
//! {"kind":"choice","m":4,"subset":[1,2,3],"chosen":3}
//! ```
//!
//! Alternatives are 1-based everywhere. Reading validates each line and
//! reports failures with their line number; writing emits the canonical
//! form, so read-then-write is byte-identical for canonical input.
//!
//! Parameter files are single JSON documents holding `m`, `k`, the
//! component weights `alpha`, the per-component weight vectors, and
//! optionally the structure distribution as a list of tagged entries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{DataMode, FitReport, Selector};
use crate::types::{
    MixtureParams, ModelError, PLParams, PartialOrder, Profile, StructureDistribution,
    StructureId,
};

/// Error raised while reading or writing model files.
#[derive(Debug, Error)]
pub enum IoError {
    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// A line (or document) was not valid JSON of the expected shape.
    #[error("line {line}: {source}")]
    Parse {
        /// 1-based line number.
        line: usize,
        /// The JSON error.
        #[source]
        source: serde_json::Error,
    },
    /// A single-document parse failure.
    #[error("invalid document: {0}")]
    Document(#[from] serde_json::Error),
    /// An order line declared a different `m` than the header.
    #[error("line {line}: declared m={got} disagrees with header m={expected}")]
    MismatchedM {
        /// 1-based line number.
        line: usize,
        /// Header value.
        expected: usize,
        /// Line value.
        got: usize,
    },
    /// An order failed model validation.
    #[error("line {line}: {source}")]
    InvalidOrder {
        /// 1-based line number.
        line: usize,
        /// The violation.
        #[source]
        source: ModelError,
    },
    /// The first line must be the `{"m":N}` header.
    #[error("missing {{\"m\":N}} header line")]
    MissingHeader,
    /// A document's fields contradicted each other.
    #[error("invalid document: {0}")]
    Malformed(String),
    /// A document described an invalid model.
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ====== profiles ======

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    m: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawOrder {
    Top { m: usize, ranked: Vec<usize> },
    Way { m: usize, ranked: Vec<usize> },
    Choice { m: usize, subset: Vec<usize>, chosen: usize },
}

impl RawOrder {
    fn m(&self) -> usize {
        match self {
            Self::Top { m, .. } | Self::Way { m, .. } | Self::Choice { m, .. } => *m,
        }
    }

    fn from_order(order: &PartialOrder, m: usize) -> Self {
        match order {
            PartialOrder::Top { ranked } => Self::Top { m, ranked: ranked.clone() },
            PartialOrder::Way { ranked } => Self::Way { m, ranked: ranked.clone() },
            PartialOrder::Choice { subset, chosen } => {
                Self::Choice { m, subset: subset.clone(), chosen: *chosen }
            }
        }
    }

    fn into_order(self) -> Result<PartialOrder, ModelError> {
        match self {
            Self::Top { ranked, .. } => PartialOrder::top(ranked),
            Self::Way { ranked, .. } => PartialOrder::way(ranked),
            Self::Choice { subset, chosen, .. } => PartialOrder::choice(subset, chosen),
        }
    }
}

/// Writes a profile in the canonical JSON-Lines form.
pub fn write_profile<W: Write>(mut w: W, profile: &Profile) -> Result<(), IoError> {
    let m = profile.m();
    writeln!(w, "{}", serde_json::to_string(&Header { m })?)?;
    for order in profile.orders() {
        writeln!(w, "{}", serde_json::to_string(&RawOrder::from_order(order, m))?)?;
    }
    Ok(())
}

/// Reads a JSON-Lines profile, validating every order against the header's
/// `m`. Blank lines are ignored.
pub fn read_profile<R: BufRead>(r: R) -> Result<Profile, IoError> {
    let mut m: Option<usize> = None;
    let mut orders = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let number = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        match m {
            None => {
                let header: Header = serde_json::from_str(&line)
                    .map_err(|source| IoError::Parse { line: number, source })?;
                m = Some(header.m);
            }
            Some(m) => {
                let raw: RawOrder = serde_json::from_str(&line)
                    .map_err(|source| IoError::Parse { line: number, source })?;
                if raw.m() != m {
                    return Err(IoError::MismatchedM { line: number, expected: m, got: raw.m() });
                }
                let order = raw
                    .into_order()
                    .map_err(|source| IoError::InvalidOrder { line: number, source })?;
                order
                    .validate(m)
                    .map_err(|source| IoError::InvalidOrder { line: number, source })?;
                orders.push(order);
            }
        }
    }
    match m {
        Some(m) => Ok(Profile::new(m, orders)?),
        None => Err(IoError::MissingHeader),
    }
}

/// Parses a single order line against a known `m`, validating it the same
/// way profile reading does.
pub fn parse_order(line: &str, m: usize) -> Result<PartialOrder, IoError> {
    let raw: RawOrder =
        serde_json::from_str(line).map_err(|source| IoError::Parse { line: 1, source })?;
    if raw.m() != m {
        return Err(IoError::MismatchedM { line: 1, expected: m, got: raw.m() });
    }
    let order =
        raw.into_order().map_err(|source| IoError::InvalidOrder { line: 1, source })?;
    order.validate(m).map_err(|source| IoError::InvalidOrder { line: 1, source })?;
    Ok(order)
}

/// Writes a profile file, creating or truncating `path`.
pub fn write_profile_file<P: AsRef<Path>>(path: P, profile: &Profile) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_profile(&mut w, profile)?;
    w.flush()?;
    Ok(())
}

/// Reads a profile file.
pub fn read_profile_file<P: AsRef<Path>>(path: P) -> Result<Profile, IoError> {
    read_profile(BufReader::new(File::open(path)?))
}

// ====== parameter documents ======

/// Structure shape tag in JSON documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    /// Ranked prefix over all alternatives.
    Top,
    /// Full ranking of a subset.
    Way,
    /// Single choice from a subset.
    Choice,
}

/// One structure-probability entry: ranked-prefix entries carry `l`,
/// subset entries carry the subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiEntryDoc {
    /// Shape tag.
    pub kind: StructureKind,
    /// Prefix length, for `top` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Subset, for `way` and `choice` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    /// The structure's probability.
    pub prob: f64,
}

/// Structure distribution as a JSON document fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiDoc {
    /// Entries in canonical (sorted) order.
    pub entries: Vec<PhiEntryDoc>,
}

/// Mixture parameters as a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    /// Alternative-set size.
    pub m: usize,
    /// Component count.
    pub k: usize,
    /// Component weights, length `k`.
    pub alpha: Vec<f64>,
    /// Per-component weight vectors, `k` rows of length `m`.
    pub components: Vec<Vec<f64>>,
    /// Structure distribution, when the model carries one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiDoc>,
}

fn structure_to_entry(s: &StructureId, prob: f64) -> PhiEntryDoc {
    match s {
        StructureId::Top { l } => {
            PhiEntryDoc { kind: StructureKind::Top, l: Some(*l), subset: None, prob }
        }
        StructureId::Way { subset } => PhiEntryDoc {
            kind: StructureKind::Way,
            l: None,
            subset: Some(subset.clone()),
            prob,
        },
        StructureId::Choice { subset } => PhiEntryDoc {
            kind: StructureKind::Choice,
            l: None,
            subset: Some(subset.clone()),
            prob,
        },
    }
}

fn entry_to_structure(e: &PhiEntryDoc) -> Result<(StructureId, f64), IoError> {
    let id = match (e.kind, &e.l, &e.subset) {
        (StructureKind::Top, Some(l), None) => StructureId::Top { l: *l },
        (StructureKind::Way, None, Some(subset)) => StructureId::way(subset.clone())?,
        (StructureKind::Choice, None, Some(subset)) => StructureId::choice(subset.clone())?,
        _ => {
            return Err(IoError::Malformed(
                "top entries carry exactly {l}, way/choice entries exactly {subset}".into(),
            ))
        }
    };
    Ok((id, e.prob))
}

/// Converts a mixture to its document form.
pub fn params_to_doc(mix: &MixtureParams) -> ParamsDoc {
    ParamsDoc {
        m: mix.m(),
        k: mix.k(),
        alpha: mix.alpha().to_vec(),
        components: mix.components().iter().map(|c| c.theta().to_vec()).collect(),
        phi: mix.phi().map(|phi| PhiDoc {
            entries: phi.entries().map(|(s, p)| structure_to_entry(s, p)).collect(),
        }),
    }
}

/// Builds a validated mixture from its document form.
pub fn params_from_doc(doc: &ParamsDoc) -> Result<MixtureParams, IoError> {
    if doc.alpha.len() != doc.k || doc.components.len() != doc.k {
        return Err(IoError::Malformed(format!(
            "k={} but {} alpha entries and {} components",
            doc.k,
            doc.alpha.len(),
            doc.components.len()
        )));
    }
    let components = doc
        .components
        .iter()
        .map(|theta| {
            if theta.len() != doc.m {
                return Err(IoError::Malformed(format!(
                    "component has {} weights, expected m={}",
                    theta.len(),
                    doc.m
                )));
            }
            Ok(PLParams::new(theta.clone())?)
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let mut mix = MixtureParams::new(doc.alpha.clone(), components)?;
    if let Some(phi_doc) = &doc.phi {
        let entries = phi_doc
            .entries
            .iter()
            .map(entry_to_structure)
            .collect::<Result<Vec<_>, IoError>>()?;
        for (s, _) in &entries {
            s.validate(doc.m)?;
        }
        let phi = StructureDistribution::from_entries(entries)?;
        mix = mix.with_phi(phi);
    }
    Ok(mix)
}

/// Writes a mixture as a pretty-printed JSON file ending in a newline.
pub fn write_params_file<P: AsRef<Path>>(path: P, mix: &MixtureParams) -> Result<(), IoError> {
    write_json_file(path, &params_to_doc(mix))
}

/// Reads and validates a mixture from a JSON file.
pub fn read_params_file<P: AsRef<Path>>(path: P) -> Result<MixtureParams, IoError> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    let doc: ParamsDoc = serde_json::from_str(&text)?;
    params_from_doc(&doc)
}

// ====== fit reports ======

/// One optimizer start in document form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartDoc {
    /// Start index.
    pub start: usize,
    /// Final objective from this start.
    pub objective: f64,
    /// Iterations spent.
    pub iterations: usize,
}

/// A fit report as a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReportDoc {
    /// The winning estimate.
    pub estimate: ParamsDoc,
    /// Objective at the estimate.
    pub objective: f64,
    /// Observation count.
    pub n: u64,
    /// Master seed of the search.
    pub seed: u64,
    /// Selector name.
    pub selector: String,
    /// Counting mode name.
    pub mode: String,
    /// Moment events dropped for lack of data.
    pub dropped_events: usize,
    /// Wall-clock fit time, milliseconds.
    pub runtime_ms: f64,
    /// Squared parameter error against a reference, when one was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    /// Per-start outcomes.
    pub starts: Vec<StartDoc>,
}

/// Converts a fit report to its document form.
pub fn report_to_doc(report: &FitReport, selector: Selector, mode: DataMode) -> FitReportDoc {
    FitReportDoc {
        estimate: params_to_doc(&report.estimate),
        objective: report.objective,
        n: report.n,
        seed: report.seed,
        selector: selector.name().to_string(),
        mode: mode.to_string(),
        dropped_events: report.dropped_events,
        runtime_ms: report.runtime_ms,
        mse: report.mse,
        starts: report
            .starts
            .iter()
            .map(|s| StartDoc { start: s.start, objective: s.objective, iterations: s.iterations })
            .collect(),
    }
}

/// Writes any serializable document as pretty-printed JSON ending in a
/// newline.
pub fn write_json_file<P: AsRef<Path>, T: Serialize>(path: P, doc: &T) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
