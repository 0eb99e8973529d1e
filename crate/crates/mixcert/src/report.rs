//! The unified JSON run report emitted by every verification command.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::amplify::AmplificationReport;
use crate::construct::ConstructionSpec;
use crate::cycle::{CycleWitness, NeighborhoodCondition, PipelineTrace};
use crate::expansion::{
    ConductanceResult, ExpansionCertificate, ExtractionResult, SandwichReport, SeparatorResult,
};
use crate::graph::GraphSummary;
use crate::scalar::{Backend, Scalar};
use crate::walk::MixingProfile;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One checked claim: lhs and rhs carry enough precision to recompute the
/// verdict from the report alone.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub claim_id: String,
    pub holds: bool,
    pub lhs: Scalar,
    pub rhs: Scalar,
}

impl Verdict {
    pub fn new(claim_id: impl Into<String>, holds: bool, lhs: Scalar, rhs: Scalar) -> Verdict {
        Verdict {
            claim_id: claim_id.into(),
            holds,
            lhs,
            rhs,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultPayload {
    Generated {
        spec: ConstructionSpec,
        graph: GraphSummary,
        output: Option<String>,
    },
    Profile {
        graph: GraphSummary,
        profile: MixingProfile,
        well_mixing_count: usize,
    },
    Conductance {
        graph: GraphSummary,
        result: ConductanceResult,
    },
    Certificate {
        graph: GraphSummary,
        certificate: ExpansionCertificate,
    },
    Extraction {
        graph: GraphSummary,
        result: Box<ExtractionResult>,
    },
    Separator {
        graph: GraphSummary,
        result: SeparatorResult,
        /// The (eps/48tau)n lower bound when eps and tau were supplied.
        bound: Option<f64>,
    },
    Cycle {
        graph: GraphSummary,
        witness: CycleWitness,
        trace: PipelineTrace,
        condition: Option<NeighborhoodCondition>,
    },
    Amplification {
        graph: GraphSummary,
        report: Box<AmplificationReport>,
    },
    Sandwich {
        graph: GraphSummary,
        report: SandwichReport,
    },
}

/// Top-level report: deterministic byte-for-byte for fixed inputs and seeds
/// (wall time is only recorded when timing is requested).
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub input: String,
    pub parameters: BTreeMap<String, String>,
    pub backend: Backend,
    pub threads: usize,
    pub wall_time_ms: Option<u128>,
    pub result: ResultPayload,
    pub verdicts: Vec<Verdict>,
}

impl RunReport {
    /// Exit code contract: 0 when every verdict holds, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.verdicts.iter().all(|v| v.holds) {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}
