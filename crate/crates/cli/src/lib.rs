//! Plumbing behind the `switched` binary. Everything here returns strings or
//! structured reports so the unit in charge of process exit codes stays tiny
//! and every piece is testable in-process.

pub mod report;
pub mod svg;

use std::fs;
use std::path::Path;

use anyhow::Context;

use switched::lift::{build_lift, LiftedFamily, DEFAULT_ALPHA};
use switched::planar::{build_simple_pair, build_tau_pair, worst_case_law_and_period, PlanarPair};
use switched::simcore::{counterexample_trajectory, propagate, SwitchingLaw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BuildKind {
    TauPair,
    SimplePair,
    Lift,
}

/// JSON for one of the canonical systems, pretty-printed, newline-terminated.
pub fn build_json(kind: BuildKind) -> anyhow::Result<String> {
    let json = match kind {
        BuildKind::TauPair => serde_json::to_string_pretty(&build_tau_pair()?)?,
        BuildKind::SimplePair => serde_json::to_string_pretty(&build_simple_pair()?)?,
        BuildKind::Lift => {
            serde_json::to_string_pretty(&build_lift(&build_tau_pair()?, DEFAULT_ALPHA)?)?
        }
    };
    Ok(json + "\n")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    Figure1,
    NormHistory,
}

/// Renders one of the two figures; `grid` is the flow-lattice side for
/// figure1, `horizon` overrides the 200-period default of the norm history.
pub fn render_plot(kind: PlotKind, grid: usize, horizon: Option<f64>) -> anyhow::Result<String> {
    let p = build_tau_pair()?;
    let orbit = worst_case_law_and_period(&p, [1.0, 0.0])?;
    match kind {
        PlotKind::Figure1 => svg::figure1_svg(&p, &orbit, grid),
        PlotKind::NormHistory => {
            let l = build_lift(&p, DEFAULT_ALPHA)?;
            let horizon = horizon.unwrap_or(200.0 * orbit.law.period);
            let (report, traj) = counterexample_trajectory(
                &l,
                orbit.law.first_bang,
                orbit.law.period,
                [1.0, 0.0],
                horizon,
            )?;
            svg::norm_history_svg(&traj, &report)
        }
    }
}

/// A family JSON is either a planar pair (has "a0") or a lifted family
/// (has "b"); the two wire formats share no required keys.
pub enum FamilyInput {
    Planar(PlanarPair),
    Lifted(LiftedFamily),
}

impl FamilyInput {
    pub fn parse(json: &str) -> anyhow::Result<FamilyInput> {
        let value: serde_json::Value =
            serde_json::from_str(json).context("family file is not valid JSON")?;
        if value.get("a0").is_some() {
            Ok(FamilyInput::Planar(
                serde_json::from_value(value).context("parsing planar pair")?,
            ))
        } else if value.get("b").is_some() {
            Ok(FamilyInput::Lifted(
                serde_json::from_value(value).context("parsing lifted family")?,
            ))
        } else {
            anyhow::bail!("family JSON must contain either \"a0\"/\"a1\" or \"b\"")
        }
    }

    pub fn family(&self) -> switched::simcore::SwitchedFamily {
        match self {
            FamilyInput::Planar(p) => p.family(),
            FamilyInput::Lifted(l) => l.family(),
        }
    }
}

/// Integrates `law` over `family` and returns the trajectory CSV. Defaults:
/// start at the first basis vector, run one pass of a finite law or twenty
/// periods of a periodic one, sample on a 512-point grid.
pub fn simulate_csv(
    family: &FamilyInput,
    law: &SwitchingLaw,
    x0: Option<Vec<f64>>,
    horizon: Option<f64>,
    step: Option<f64>,
) -> anyhow::Result<String> {
    let fam = family.family();
    let x0 = x0.unwrap_or_else(|| {
        let mut e1 = vec![0.0; fam.dim()];
        e1[0] = 1.0;
        e1
    });
    let horizon = horizon.unwrap_or_else(|| {
        if law.periodic() {
            20.0 * law.total_duration()
        } else {
            law.total_duration()
        }
    });
    let step = step.unwrap_or(horizon / 512.0);
    let traj = propagate(&fam, law, &x0, horizon, step)?;
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

/// Comma-separated float list, e.g. "1,0" or "0.5,-0.5,0,0".
pub fn parse_vector(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .with_context(|| format!("not a number in vector: {part:?}"))
        })
        .collect()
}

/// Writes to the path, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn read_to_string(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}
