//! JSON lines for harness records.

use dbu_core::reductions::HarnessRecord;
use dbu_core::ParameterVector;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamsJson {
    pub a: usize,
    pub c: usize,
    pub e: usize,
    pub f: usize,
    pub o: usize,
    pub p: usize,
    pub u: usize,
}

impl From<ParameterVector> for ParamsJson {
    fn from(p: ParameterVector) -> Self {
        Self {
            a: p.a,
            c: p.c,
            e: p.e,
            f: p.f,
            o: p.o,
            p: p.p,
            u: p.u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordJson {
    pub qbf: String,
    pub oracle: bool,
    pub dbu: bool,
    pub params: ParamsJson,
    pub worlds_final: usize,
    /// Saturates at `u64::MAX`.
    pub bound: u64,
    pub agree: bool,
}

impl From<&HarnessRecord> for RecordJson {
    fn from(r: &HarnessRecord) -> Self {
        Self {
            qbf: r.qbf.to_string(),
            oracle: r.oracle,
            dbu: r.dbu,
            params: r.params.into(),
            worlds_final: r.worlds_final,
            bound: u64::try_from(r.bound).unwrap_or(u64::MAX),
            agree: r.agree(),
        }
    }
}

/// One compact JSON object per record, keys sorted, newline terminated.
pub fn json_line(r: &HarnessRecord) -> String {
    let value = serde_json::to_value(RecordJson::from(r)).expect("records always serialize");
    let mut line = value.to_string();
    line.push('\n');
    line
}
