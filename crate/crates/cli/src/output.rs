//! CSV and JSON writers. Numbers use Rust's shortest round-trip formatting,
//! lines end in LF.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pdflow::connectivity::{HistoryRow, NetworkState};
use pdflow::flow::TrajectoryPoint;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub converged: bool,
    pub steps: usize,
    pub residual: f64,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    pub wall_time_s: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunSummary {
    /// 0 when converged, 1 when the step budget ran out.
    pub fn exit_code(&self) -> u8 {
        if self.converged {
            0
        } else {
            1
        }
    }
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{}: {}",
            self.command,
            if self.converged {
                "converged"
            } else {
                "step budget exhausted"
            }
        )?;
        writeln!(f, "  steps      {}", self.steps)?;
        writeln!(f, "  residual   {:e}", self.residual)?;
        writeln!(f, "  objective  {}", self.objective)?;
        if let Some(l) = self.lambda2 {
            writeln!(f, "  lambda2    {l}")?;
        }
        writeln!(f, "  wall time  {:.3} s", self.wall_time_s)?;
        for path in &self.outputs {
            writeln!(f, "  wrote      {}", path.display())?;
        }
        Ok(())
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let (n, m) = points.first().map_or((0, 0), |p| (p.x.len(), p.v.len()));
    let mut out = String::new();
    let header = std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("x_{i}")))
        .chain((1..=m).map(|j| format!("v_{j}")))
        .chain(["objective".to_string(), "residual".to_string()]);
    out.push_str(&join(header));
    out.push('\n');
    for p in points {
        let row = std::iter::once(p.t)
            .chain(p.x.iter().copied())
            .chain(p.v.iter().copied())
            .chain([p.objective, p.residual]);
        out.push_str(&join(row));
        out.push('\n');
    }
    out
}

/// `round,objective,lambda2,residual` followed by one column per node
/// contribution, named `w_<edge>_<node>` (1-based).
pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut out = String::from("round,objective,lambda2,residual");
    if let Some(first) = rows.first() {
        for &(node, edge, _) in &first.contributions {
            let _ = write!(out, ",w_{}_{}", edge + 1, node + 1);
        }
    }
    out.push('\n');
    for row in rows {
        let _ = write!(
            out,
            "{},{},{},{}",
            row.round, row.objective, row.lambda2, row.residual
        );
        for &(_, _, w) in &row.contributions {
            let _ = write!(out, ",{w}");
        }
        out.push('\n');
    }
    out
}

/// One row per edge: label, endpoints, the two endpoint contributions and
/// their sum (all labels 1-based).
pub fn weights_csv(state: &NetworkState) -> String {
    let mut out = String::from("edge,i,j,contribution_i,contribution_j,total\n");
    let total = state.assemble_weights();
    for (k, &(i, j)) in state.graph().edges().iter().enumerate() {
        let wi = state.nodes[i].w[&k];
        let wj = state.nodes[j].w[&k];
        let _ = writeln!(
            out,
            "{},{},{},{wi},{wj},{}",
            k + 1,
            i + 1,
            j + 1,
            total.get(k)
        );
    }
    out
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let io = |source| CliError::Io {
        path: dir.join(name),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(io)?;
    Ok(path)
}

/// Writes `summary.json` and records its own path in the summary.
pub fn write_summary(dir: &Path, summary: &mut RunSummary) -> Result<()> {
    summary.outputs.push(dir.join("summary.json"));
    let text = serde_json::to_string_pretty(summary).expect("summary serializes") + "\n";
    write_file(dir, "summary.json", &text)?;
    Ok(())
}
