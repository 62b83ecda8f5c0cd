//! Data schemas and persistence: response CSV ingestion and writing, the
//! parameter file, synthetic-data generation, empirical proportion tables,
//! and plot-ready figure exports.
//!
//! The response CSV schema is fixed:
//!
//! ```text
//! participant_id,group,structure,temperament,truth_excess,truth_virus,said_excess,said_virus
//! ```
//!
//! Binary cells are the literal characters `0`/`1`. A record stores only
//! whether each factor was *mentioned*; utterances are truthful by
//! construction, so the communicated value is the truth column.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::causal::{FactorState, Utterance};
use crate::error::{Error, Result};
use crate::explainer::{choice_distribution, ModelConfig, ParamSet, Scenario, Temperament};
use crate::seeding::stream_rng;

/// Participant group from the post-experiment self-report: whether they said
/// they adjusted explanations to the patient's temperament.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Tactful,
    Candid,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Tactful => "tactful",
            Group::Candid => "candid",
        }
    }

    pub fn from_str_strict(s: &str) -> Result<Self> {
        match s {
            "tactful" => Ok(Group::Tactful),
            "candid" => Ok(Group::Candid),
            other => Err(Error::Domain(format!(
                "unknown group `{other}` (expected tactful or candid)"
            ))),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Causal structure a participant was assigned. Retained for provenance;
/// analyses collapse across structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CausalStructure {
    Conjunctive,
    Disjunctive,
}

impl CausalStructure {
    pub fn as_str(self) -> &'static str {
        match self {
            CausalStructure::Conjunctive => "conjunctive",
            CausalStructure::Disjunctive => "disjunctive",
        }
    }

    pub fn from_str_strict(s: &str) -> Result<Self> {
        match s {
            "conjunctive" => Ok(CausalStructure::Conjunctive),
            "disjunctive" => Ok(CausalStructure::Disjunctive),
            other => Err(Error::Domain(format!(
                "unknown structure `{other}` (expected conjunctive or disjunctive)"
            ))),
        }
    }
}

/// One participant response: the scenario they saw and what they chose to say.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseRecord {
    pub participant_id: String,
    pub group: Group,
    pub structure: CausalStructure,
    pub temperament: Temperament,
    pub truth: FactorState,
    pub utterance: Utterance,
}

impl ResponseRecord {
    pub fn scenario(&self) -> Scenario {
        Scenario::new(self.truth, self.temperament)
    }
}

/// An ordered collection of responses plus free-text provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<ResponseRecord>,
    pub provenance: String,
}

pub const CSV_HEADER: [&str; 8] = [
    "participant_id",
    "group",
    "structure",
    "temperament",
    "truth_excess",
    "truth_virus",
    "said_excess",
    "said_virus",
];

fn parse_binary(raw: &str, line: usize, field: &str) -> Result<bool> {
    match raw {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse {
            line,
            field: field.to_string(),
            message: format!("expected the literal character 0 or 1, got `{other}`"),
        }),
    }
}

impl Dataset {
    pub fn new(records: Vec<ResponseRecord>, provenance: impl Into<String>) -> Self {
        Dataset { records, provenance: provenance.into() }
    }

    /// Parse the response CSV schema from any reader.
    ///
    /// Errors name the 1-based line and offending field. LF and CRLF line
    /// endings are both accepted.
    pub fn parse_responses_csv<R: Read>(reader: R) -> Result<Dataset> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);

        let headers = csv_reader.headers().map_err(|e| Error::Parse {
            line: 1,
            field: "header".into(),
            message: e.to_string(),
        })?;
        let got: Vec<&str> = headers.iter().collect();
        if got != CSV_HEADER {
            return Err(Error::Parse {
                line: 1,
                field: "header".into(),
                message: format!(
                    "header must be exactly `{}`, got `{}`",
                    CSV_HEADER.join(","),
                    got.join(",")
                ),
            });
        }

        let mut records = Vec::new();
        for (i, row) in csv_reader.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Parse {
                line,
                field: "row".into(),
                message: e.to_string(),
            })?;
            if row.len() != CSV_HEADER.len() {
                return Err(Error::Parse {
                    line,
                    field: "row".into(),
                    message: format!("expected {} columns, got {}", CSV_HEADER.len(), row.len()),
                });
            }
            let field = |idx: usize| row.get(idx).unwrap_or("").trim();

            let participant_id = field(0).to_string();
            if participant_id.is_empty() {
                return Err(Error::Parse {
                    line,
                    field: "participant_id".into(),
                    message: "participant id must be non-blank".into(),
                });
            }
            let group = Group::from_str_strict(field(1)).map_err(|e| Error::Parse {
                line,
                field: "group".into(),
                message: e.to_string(),
            })?;
            let structure = CausalStructure::from_str_strict(field(2)).map_err(|e| Error::Parse {
                line,
                field: "structure".into(),
                message: e.to_string(),
            })?;
            let temperament = Temperament::from_str_strict(field(3)).map_err(|e| Error::Parse {
                line,
                field: "temperament".into(),
                message: e.to_string(),
            })?;
            let truth_excess = parse_binary(field(4), line, "truth_excess")?;
            let truth_virus = parse_binary(field(5), line, "truth_virus")?;
            let said_excess = parse_binary(field(6), line, "said_excess")?;
            let said_virus = parse_binary(field(7), line, "said_virus")?;

            if !truth_excess && !truth_virus {
                return Err(Error::Parse {
                    line,
                    field: "truth_excess".into(),
                    message: "truth (0, 0) is impossible: a sick patient has at least one factor"
                        .into(),
                });
            }

            records.push(ResponseRecord {
                participant_id,
                group,
                structure,
                temperament,
                truth: FactorState::new(truth_excess, truth_virus),
                utterance: Utterance::new(said_excess, said_virus),
            });
        }

        if records.is_empty() {
            return Err(Error::Parse {
                line: 1,
                field: "file".into(),
                message: "no response rows after the header".into(),
            });
        }

        Ok(Dataset::new(records, "parsed from CSV"))
    }

    pub fn from_csv_path(path: &Path) -> Result<Dataset> {
        let file = fs::File::open(path)?;
        let mut data = Dataset::parse_responses_csv(file)?;
        data.provenance = format!("parsed from {}", path.display());
        Ok(data)
    }

    /// Serialize back to the canonical CSV schema (LF line endings).
    pub fn write_responses_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER).map_err(csv_io_error)?;
        for r in &self.records {
            w.write_record([
                r.participant_id.as_str(),
                r.group.as_str(),
                r.structure.as_str(),
                r.temperament.as_str(),
                if r.truth.excess { "1" } else { "0" },
                if r.truth.virus { "1" } else { "0" },
                if r.utterance.reveal_excess { "1" } else { "0" },
                if r.utterance.reveal_virus { "1" } else { "0" },
            ])
            .map_err(csv_io_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_responses_csv(&mut buf)?;
        String::from_utf8(buf)
            .map_err(|e| Error::Invariant(format!("CSV serialization produced invalid UTF-8: {e}")))
    }

    /// Unique participant ids in order of first appearance.
    pub fn participants(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for r in &self.records {
            if !seen.contains(&r.participant_id.as_str()) {
                seen.push(r.participant_id.as_str());
            }
        }
        seen
    }

    /// The subset of records belonging to one group.
    pub fn filter_group(&self, group: Group) -> Dataset {
        Dataset::new(
            self.records.iter().filter(|r| r.group == group).cloned().collect(),
            format!("{} (group = {group})", self.provenance),
        )
    }

    /// All records of one participant, in dataset order.
    pub fn records_of(&self, participant_id: &str) -> Vec<&ResponseRecord> {
        self.records.iter().filter(|r| r.participant_id == participant_id).collect()
    }

    pub fn groups_present(&self) -> Vec<Group> {
        let mut groups = Vec::new();
        for r in &self.records {
            if !groups.contains(&r.group) {
                groups.push(r.group);
            }
        }
        groups
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn csv_io_error(e: csv::Error) -> Error {
    Error::Invariant(format!("CSV write failed: {e}"))
}

/// Observed utterance proportions for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionRow {
    pub scenario: Scenario,
    /// Number of responses observed for this scenario.
    pub n: usize,
    /// Proportions in [`Utterance::ALL`] order; they sum to 1.
    pub proportions: [f64; 4],
}

/// Per-scenario utterance proportions for one group, in canonical scenario
/// order. Scenarios with no observations are omitted rather than reported
/// as zeros.
pub fn empirical_proportions(data: &Dataset, group: Group) -> Result<Vec<ProportionRow>> {
    let mut counts = [[0usize; 4]; 6];
    let mut any = false;
    for r in &data.records {
        if r.group != group {
            continue;
        }
        any = true;
        let idx = r.scenario().index().ok_or_else(|| {
            Error::Invariant(format!("record has unmodeled scenario {:?}", r.scenario()))
        })?;
        counts[idx][r.utterance.index()] += 1;
    }
    if !any {
        return Err(Error::Domain(format!("group `{group}` is absent from the dataset")));
    }
    let mut rows = Vec::new();
    for (idx, scenario) in Scenario::MODELED.iter().enumerate() {
        let n: usize = counts[idx].iter().sum();
        if n == 0 {
            continue;
        }
        let mut proportions = [0.0; 4];
        for (p, c) in proportions.iter_mut().zip(counts[idx]) {
            *p = c as f64 / n as f64;
        }
        rows.push(ProportionRow { scenario: *scenario, n, proportions });
    }
    Ok(rows)
}

/// Generate a synthetic dataset: `n_participants` participants each answer
/// all six scenarios, sampling utterances from the model's choice
/// distribution. Deterministic given the seed; participant `i` draws from
/// stream `i`, so output does not depend on evaluation order.
pub fn simulate_dataset(
    params: &ParamSet,
    cfg: &ModelConfig,
    n_participants: usize,
    group: Group,
    seed: u64,
) -> Result<Dataset> {
    if n_participants == 0 {
        return Err(Error::Domain("n_participants must be at least 1".into()));
    }
    params.validate()?;

    let mut distributions = Vec::with_capacity(6);
    for scenario in &Scenario::MODELED {
        distributions.push(choice_distribution(params, cfg, scenario)?);
    }

    let width = n_participants.to_string().len().max(3);
    let mut records = Vec::with_capacity(n_participants * 6);
    for i in 0..n_participants {
        let mut rng = stream_rng(seed, i as u64);
        // Alternate assigned structures, mirroring the between-participant design.
        let structure = if i % 2 == 0 {
            CausalStructure::Conjunctive
        } else {
            CausalStructure::Disjunctive
        };
        let participant_id = format!("sim{:0width$}", i + 1, width = width);
        for (scenario, dist) in Scenario::MODELED.iter().zip(&distributions) {
            let utterance = dist.sample(&mut rng);
            records.push(ResponseRecord {
                participant_id: participant_id.clone(),
                group,
                structure,
                temperament: scenario.temperament,
                truth: scenario.truth,
                utterance,
            });
        }
    }
    Ok(Dataset::new(
        records,
        format!("simulated: n={n_participants} group={group} seed={seed}"),
    ))
}

const PARAM_KEYS: [&str; 8] = [
    "prior_excess",
    "prior_virus",
    "alpha_explanandum",
    "alpha_latents",
    "alpha_social_confident",
    "alpha_social_insecure",
    "epsilon",
    "temperature",
];

fn param_field(params: &ParamSet, key: &str) -> f64 {
    match key {
        "prior_excess" => params.prior_excess,
        "prior_virus" => params.prior_virus,
        "alpha_explanandum" => params.alpha_explanandum,
        "alpha_latents" => params.alpha_latents,
        "alpha_social_confident" => params.alpha_social_confident,
        "alpha_social_insecure" => params.alpha_social_insecure,
        "epsilon" => params.epsilon,
        "temperature" => params.temperature,
        _ => unreachable!("unknown parameter key"),
    }
}

/// Serialize a parameter set to the canonical flat JSON object.
///
/// Values are printed with Rust's shortest round-trip decimal formatting, so
/// [`read_params`] recovers every field bit-exactly.
pub fn write_params_string(params: &ParamSet) -> Result<String> {
    params.validate()?;
    let mut out = String::from("{\n");
    for (i, key) in PARAM_KEYS.iter().enumerate() {
        let comma = if i + 1 < PARAM_KEYS.len() { "," } else { "" };
        out.push_str(&format!("  \"{key}\": {}{comma}\n", param_field(params, key)));
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn write_params(params: &ParamSet, path: &Path) -> Result<()> {
    fs::write(path, write_params_string(params)?)?;
    Ok(())
}

/// Parse the canonical parameter file, checking every key is present, known,
/// numeric, and within range.
pub fn read_params_str(text: &str) -> Result<ParamSet> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::ParamFile {
        field: "file".into(),
        message: format!("not a valid JSON object: {e}"),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::ParamFile {
        field: "file".into(),
        message: "top-level value must be an object".into(),
    })?;

    for key in obj.keys() {
        if !PARAM_KEYS.contains(&key.as_str()) {
            return Err(Error::ParamFile {
                field: key.clone(),
                message: "unknown key".into(),
            });
        }
    }

    let get = |key: &str| -> Result<f64> {
        let v = obj.get(key).ok_or_else(|| Error::ParamFile {
            field: key.to_string(),
            message: "missing required key".into(),
        })?;
        v.as_f64().ok_or_else(|| Error::ParamFile {
            field: key.to_string(),
            message: format!("expected a number, got `{v}`"),
        })
    };

    let params = ParamSet {
        prior_excess: get("prior_excess")?,
        prior_virus: get("prior_virus")?,
        alpha_explanandum: get("alpha_explanandum")?,
        alpha_latents: get("alpha_latents")?,
        alpha_social_confident: get("alpha_social_confident")?,
        alpha_social_insecure: get("alpha_social_insecure")?,
        epsilon: get("epsilon")?,
        temperature: get("temperature")?,
    };
    params.validate().map_err(|e| Error::ParamFile {
        field: "values".into(),
        message: e.to_string(),
    })?;
    Ok(params)
}

pub fn read_params(path: &Path) -> Result<ParamSet> {
    read_params_str(&fs::read_to_string(path)?)
}

/// One row of the figure-data export: a scenario × utterance cell with its
/// empirical proportion and model probability.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureCell {
    pub scenario: Scenario,
    pub utterance: Utterance,
    pub empirical: f64,
    pub model: f64,
}

/// Pair every observed scenario × utterance cell's empirical proportion with
/// the model probability under `params`. Enough to regenerate both the
/// per-scenario bar chart and the model-vs-data scatter.
pub fn figure_cells(
    params: &ParamSet,
    cfg: &ModelConfig,
    data: &Dataset,
    group: Group,
) -> Result<Vec<FigureCell>> {
    let rows = empirical_proportions(data, group)?;
    let mut cells = Vec::with_capacity(rows.len() * 4);
    for row in &rows {
        let dist = choice_distribution(params, cfg, &row.scenario)?;
        for u in Utterance::ALL {
            cells.push(FigureCell {
                scenario: row.scenario,
                utterance: u,
                empirical: row.proportions[u.index()],
                model: dist.prob(u),
            });
        }
    }
    Ok(cells)
}

/// Write the figure-data CSV: header `scenario,utterance,empirical,model`.
pub fn export_figure_data<W: Write>(
    params: &ParamSet,
    cfg: &ModelConfig,
    data: &Dataset,
    group: Group,
    writer: &mut W,
) -> Result<()> {
    let cells = figure_cells(params, cfg, data, group)?;
    writeln!(writer, "scenario,utterance,empirical,model")?;
    for c in &cells {
        writeln!(
            writer,
            "{},{},{},{}",
            c.scenario.label(),
            c.utterance.label(),
            c.empirical,
            c.model
        )?;
    }
    Ok(())
}
