//! Instance files: a versioned JSON document that round-trips losslessly
//! through [`PricingInstance`] and validates on load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use diagcut::domain::{ItemSet, Payload, PricingInstance};
use diagcut::problems::{GraphData, KipData, KnapsackData, SetCoverData};

pub const FORMAT_VERSION: u32 = 1;

pub type CliError = Box<dyn std::error::Error>;
pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format_version: u32,
    /// One of kpp | maxsspp | minscpp | kip; must match the payload shape.
    pub problem: String,
    pub n: usize,
    /// Base-value numerators; the shared denominator keeps rational values
    /// exact in a plain integer array.
    pub v: Vec<i64>,
    #[serde(default = "unit_den")]
    pub v_den: i64,
    pub tolled: Vec<usize>,
    pub payload: PayloadFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PayloadFile {
    Kip {
        w: Vec<i64>,
        c: i64,
        leader_w: Vec<i64>,
        leader_c: i64,
    },
    Knapsack {
        weights: Vec<i64>,
        capacity: i64,
    },
    Graph {
        edges: Vec<(usize, usize)>,
    },
    SetCover {
        n_elements: usize,
        sets: Vec<Vec<usize>>,
        element_weights: Vec<i64>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub params: serde_json::Value,
    pub seed: u64,
}

fn unit_den() -> i64 {
    1
}

impl InstanceFile {
    pub fn from_instance(inst: &PricingInstance, provenance: Option<Provenance>) -> Self {
        let (problem, payload) = match &inst.payload {
            Payload::Knapsack(d) => (
                "kpp",
                PayloadFile::Knapsack {
                    weights: d.weights.clone(),
                    capacity: d.capacity,
                },
            ),
            Payload::Graph(d) => ("maxsspp", PayloadFile::Graph { edges: d.edges() }),
            Payload::SetCover(d) => (
                "minscpp",
                PayloadFile::SetCover {
                    n_elements: d.n_elements,
                    sets: d.sets.iter().map(|s| s.items()).collect(),
                    element_weights: d.element_weights.clone(),
                },
            ),
            Payload::Interdiction(d) => (
                "kip",
                PayloadFile::Kip {
                    w: d.w.clone(),
                    c: d.c,
                    leader_w: d.leader_w.clone(),
                    leader_c: d.leader_c,
                },
            ),
        };
        InstanceFile {
            format_version: FORMAT_VERSION,
            problem: problem.to_string(),
            n: inst.n,
            v: inst.v_num.clone(),
            v_den: inst.v_den,
            tolled: inst.tolled.items(),
            payload,
            provenance,
        }
    }

    pub fn to_instance(&self) -> CliResult<PricingInstance> {
        if self.format_version != FORMAT_VERSION {
            return Err(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )
            .into());
        }
        if self.v.len() != self.n {
            return Err(format!("v has {} entries but n = {}", self.v.len(), self.n).into());
        }
        let tag = match self.payload {
            PayloadFile::Kip { .. } => "kip",
            PayloadFile::Knapsack { .. } => "kpp",
            PayloadFile::Graph { .. } => "maxsspp",
            PayloadFile::SetCover { .. } => "minscpp",
        };
        if self.problem != tag {
            return Err(
                format!("problem says {} but the payload shape is {tag}", self.problem).into(),
            );
        }
        let payload = match &self.payload {
            PayloadFile::Knapsack { weights, capacity } => Payload::Knapsack(KnapsackData {
                weights: weights.clone(),
                capacity: *capacity,
            }),
            PayloadFile::Graph { edges } => Payload::Graph(GraphData::from_edges(self.n, edges)?),
            PayloadFile::SetCover {
                n_elements,
                sets,
                element_weights,
            } => Payload::SetCover(SetCoverData {
                n_elements: *n_elements,
                sets: sets
                    .iter()
                    .map(|s| ItemSet::from_items(*n_elements, s))
                    .collect(),
                element_weights: element_weights.clone(),
            }),
            PayloadFile::Kip {
                w,
                c,
                leader_w,
                leader_c,
            } => Payload::Interdiction(KipData {
                w: w.clone(),
                c: *c,
                leader_w: leader_w.clone(),
                leader_c: *leader_c,
            }),
        };
        let tolled = ItemSet::from_items(self.n, &self.tolled);
        Ok(PricingInstance::new(
            self.v.clone(),
            self.v_den,
            tolled,
            payload,
        )?)
    }
}

pub fn save(path: &Path, file: &InstanceFile) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(file)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load(path: &Path) -> CliResult<(InstanceFile, PricingInstance)> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| format!("cannot parse {}: {e}", path.display()))?;
    let inst = file
        .to_instance()
        .map_err(|e| format!("invalid instance {}: {e}", path.display()))?;
    Ok((file, inst))
}

/// Instance id used in result rows: the file name without extension.
pub fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
