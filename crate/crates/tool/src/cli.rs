//! Command-line interface. Exit codes: 0 success, 1 invalid labeling
//! (`validate` only), 2 bad input or usage.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polycube_core::mesh::DEFAULT_FEATURE_THRESHOLD;
use polycube_core::{
    apply_operator, compute_report, run_pipeline, validate_labeling, CornerRule, Durations, GraphCutParams,
    InitialLabeling, LabelingGraph, OperatorKind, PipelineParams, SmoothnessMode, Status, SurfaceMesh,
    TurningPointParams, ValidityConfig,
};

use crate::clock::StdClock;
use crate::error::ToolError;
use crate::formats::{export_colored_mesh, read_labeling, read_mesh, write_json, write_labeling};
use crate::graph_json::GraphDump;

#[derive(Debug, Parser)]
#[command(name = "polycube", version, about = "Polycube labelings of closed triangle meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute and repair a labeling.
    Label {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Output labeling file.
        #[arg(short, long)]
        output: PathBuf,
        /// Metrics report (JSON).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Operator log, one entry per line.
        #[arg(long)]
        log_ops: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Check a labeling; exit 1 if it is invalid.
    Validate {
        #[command(flatten)]
        mesh: MeshArgs,
        labeling: PathBuf,
        /// Validity report (JSON).
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        validity: ValidityArgs,
        #[arg(long, default_value_t = TurningPointParams::default().flip_penalty)]
        flip_penalty: f64,
    },
    /// Metrics report of an existing labeling.
    Report {
        #[command(flatten)]
        mesh: MeshArgs,
        labeling: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        validity: ValidityArgs,
        #[arg(long, default_value_t = TurningPointParams::default().flip_penalty)]
        flip_penalty: f64,
    },
    /// Dump charts, boundaries and corners as JSON.
    Graph {
        #[command(flatten)]
        mesh: MeshArgs,
        labeling: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = TurningPointParams::default().flip_penalty)]
        flip_penalty: f64,
    },
    /// Write a PLY with one color per label.
    Viz {
        #[command(flatten)]
        mesh: MeshArgs,
        labeling: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Apply a single operator.
    Fix {
        #[command(flatten)]
        mesh: MeshArgs,
        labeling: PathBuf,
        /// Operator name, e.g. `remove-chart`.
        #[arg(long)]
        op: String,
        /// Chart, boundary, corner or vertex id.
        #[arg(long)]
        target: usize,
        /// Second turning-point vertex for `join-turning-points-pair`.
        #[arg(long)]
        second: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    /// Triangle mesh (.obj or MEDIT .mesh).
    pub mesh: PathBuf,
    /// Feature edges, one zero-based `v1 v2` pair per line.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Dihedral deviation (radians) above which an edge is sharp.
    #[arg(long, default_value_t = DEFAULT_FEATURE_THRESHOLD)]
    pub feature_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CornerRuleArg {
    Legacy,
    Improved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SmoothnessArg {
    UniformPotts,
    AngleProportional,
    CreaseDiscount,
}

#[derive(Debug, Args)]
pub struct ValidityArgs {
    /// Accept same-axis opposite-sign boundaries along reflex edges.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
    pub allow_opposite_labels: bool,
    /// Fraction of reflex edges required along such a boundary.
    #[arg(long, default_value_t = 1.0)]
    pub reflex_fraction: f64,
    #[arg(long, value_enum, default_value_t = CornerRuleArg::Improved)]
    pub corner_rule: CornerRuleArg,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[command(flatten)]
    pub validity: ValidityArgs,
    /// Start from the per-triangle nearest label instead of graph-cut.
    #[arg(long)]
    pub naive: bool,
    #[arg(long, default_value_t = GraphCutParams::default().compactness)]
    pub compactness: f64,
    #[arg(long, default_value_t = GraphCutParams::default().fidelity)]
    pub fidelity: f64,
    /// Alignment gap below which a triangle's normal is tilted.
    #[arg(long, default_value_t = GraphCutParams::default().sensitivity)]
    pub sensitivity: f64,
    /// Tilt rotation angle in radians.
    #[arg(long, default_value_t = GraphCutParams::default().tilt_angle)]
    pub tilt_angle: f64,
    #[arg(long, value_enum, default_value_t = SmoothnessArg::UniformPotts)]
    pub smoothness_mode: SmoothnessArg,
    /// Cost of one direction flip when placing turning-points.
    #[arg(long, default_value_t = TurningPointParams::default().flip_penalty)]
    pub flip_penalty: f64,
    /// Outer iterations of the validity routine.
    #[arg(long, default_value_t = PipelineParams::default().max_iterations)]
    pub max_iterations: usize,
    /// Rings in strips inserted along invalid boundaries.
    #[arg(long, default_value_t = PipelineParams::default().width)]
    pub width: usize,
    /// Rings in disks at invalid corners and in local boundary moves.
    #[arg(long, default_value_t = PipelineParams::default().radius)]
    pub radius: usize,
}

impl ValidityArgs {
    pub fn config(&self) -> Result<ValidityConfig, ToolError> {
        if !(0.0..=1.0).contains(&self.reflex_fraction) {
            return Err(ToolError::Usage(format!("--reflex-fraction {} is outside [0, 1]", self.reflex_fraction)));
        }
        Ok(ValidityConfig {
            allow_opposite_labels: self.allow_opposite_labels,
            reflex_fraction: self.reflex_fraction,
            corner_rule: match self.corner_rule {
                CornerRuleArg::Legacy => CornerRule::Legacy,
                CornerRuleArg::Improved => CornerRule::Improved,
            },
        })
    }
}

fn turning_point_params(flip_penalty: f64) -> Result<TurningPointParams, ToolError> {
    if !(flip_penalty >= 0.0 && flip_penalty.is_finite()) {
        return Err(ToolError::Usage(format!("--flip-penalty {flip_penalty} must be finite and non-negative")));
    }
    Ok(TurningPointParams { flip_penalty })
}

impl ParamArgs {
    pub fn pipeline(&self) -> Result<PipelineParams, ToolError> {
        let graphcut = GraphCutParams {
            compactness: self.compactness,
            fidelity: self.fidelity,
            sensitivity: self.sensitivity,
            tilt_angle: self.tilt_angle,
            smoothness: match self.smoothness_mode {
                SmoothnessArg::UniformPotts => SmoothnessMode::UniformPotts,
                SmoothnessArg::AngleProportional => SmoothnessMode::AngleProportional,
                SmoothnessArg::CreaseDiscount => SmoothnessMode::CreaseDiscount,
            },
        };
        graphcut.validate().map_err(|e| ToolError::Usage(e.to_string()))?;
        if self.width == 0 || self.radius == 0 {
            return Err(ToolError::Usage("--width and --radius must be at least 1".into()));
        }
        Ok(PipelineParams {
            graphcut,
            validity: self.validity.config()?,
            turning_points: turning_point_params(self.flip_penalty)?,
            initial: if self.naive { InitialLabeling::Naive } else { InitialLabeling::Tweaked },
            max_iterations: self.max_iterations,
            width: self.width,
            radius: self.radius,
        })
    }
}

impl MeshArgs {
    fn check(&self) -> Result<(), ToolError> {
        let t = self.feature_threshold;
        if !(t > 0.0 && t <= std::f64::consts::PI) {
            return Err(ToolError::Usage(format!("--feature-threshold {t} is outside (0, pi]")));
        }
        Ok(())
    }

    fn load(&self) -> Result<SurfaceMesh, ToolError> {
        read_mesh(&self.mesh, self.features.as_deref(), self.feature_threshold)
    }
}

fn write_lines(path: &std::path::Path, lines: impl Iterator<Item = String>) -> Result<(), ToolError> {
    let mut text = String::new();
    for l in lines {
        text.push_str(&l);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| ToolError::io(path, e))
}

/// Run a parsed command. Returns the exit code.
pub fn execute(cli: Cli, stderr: &mut dyn Write) -> Result<i32, ToolError> {
    match cli.command {
        Command::Label { mesh, output, report, log_ops, params } => {
            mesh.check()?;
            let params = params.pipeline()?;
            let m = mesh.load()?;
            let out = run_pipeline(&m, &params, &StdClock::new());
            write_labeling(&output, &out.labeling)?;
            if let Some(p) = report {
                write_json(&p, &out.report)?;
            }
            if let Some(p) = log_ops {
                write_lines(&p, out.log.iter().map(|e| e.to_string()))?;
            }
            let _ = writeln!(
                stderr,
                "{}: {} ({} charts, {} turning-points, {} operators)",
                mesh.mesh.display(),
                out.report.status.name(),
                out.report.components.charts,
                out.report.turning_points,
                out.report.operators_applied
            );
            if out.report.status == Status::Failed {
                let _ = writeln!(stderr, "error: {}", out.report.error.as_deref().unwrap_or("internal error"));
                return Ok(2);
            }
            Ok(0)
        }
        Command::Validate { mesh, labeling, json, validity, flip_penalty } => {
            mesh.check()?;
            let cfg = validity.config()?;
            let tp = turning_point_params(flip_penalty)?;
            let m = mesh.load()?;
            let l = read_labeling(&labeling, Some(&m))?;
            let g = LabelingGraph::build(&m, &l, &tp);
            let r = validate_labeling(&m, &g, &cfg);
            if let Some(p) = json {
                write_json(&p, &r)?;
            }
            let _ = writeln!(
                stderr,
                "{}: {} ({} invalid charts, {} invalid boundaries, {} invalid corners)",
                labeling.display(),
                if r.is_valid { "valid" } else { "invalid" },
                r.invalid_charts.len(),
                r.invalid_boundaries.len(),
                r.invalid_corners.len()
            );
            Ok(if r.is_valid { 0 } else { 1 })
        }
        Command::Report { mesh, labeling, output, validity, flip_penalty } => {
            mesh.check()?;
            let cfg = validity.config()?;
            let tp = turning_point_params(flip_penalty)?;
            let m = mesh.load()?;
            let l = read_labeling(&labeling, Some(&m))?;
            let g = LabelingGraph::build(&m, &l, &tp);
            write_json(&output, &compute_report(&m, &l, &g, &cfg, Durations::default()))?;
            Ok(0)
        }
        Command::Graph { mesh, labeling, output, flip_penalty } => {
            mesh.check()?;
            let tp = turning_point_params(flip_penalty)?;
            let m = mesh.load()?;
            let l = read_labeling(&labeling, Some(&m))?;
            write_json(&output, &GraphDump::new(&LabelingGraph::build(&m, &l, &tp)))?;
            Ok(0)
        }
        Command::Viz { mesh, labeling, output } => {
            mesh.check()?;
            let m = mesh.load()?;
            let l = read_labeling(&labeling, Some(&m))?;
            export_colored_mesh(&m, &l, &output)?;
            Ok(0)
        }
        Command::Fix { mesh, labeling, op, target, second, output, params } => {
            mesh.check()?;
            let kind = OperatorKind::from_name(&op).ok_or_else(|| {
                let names: Vec<&str> = OperatorKind::ALL.iter().map(|k| k.name()).collect();
                ToolError::Usage(format!("unknown operator '{op}', expected one of: {}", names.join(", ")))
            })?;
            let params = params.pipeline()?;
            let m = mesh.load()?;
            let l = read_labeling(&labeling, Some(&m))?;
            let g = LabelingGraph::build(&m, &l, &params.turning_points);
            let out = apply_operator(&m, &l, &g, kind, target, second, &params)?;
            write_labeling(&output, &out.labeling)?;
            let verdict = if out.applied { "applied" } else { "not applied" };
            let _ = writeln!(stderr, "{kind} target={target}: {verdict}, {} triangles changed", out.changed.len());
            Ok(0)
        }
    }
}

/// Parse `args` (program name first) and run. Diagnostics go to `stderr`.
pub fn main_with_args<I, T>(args: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
            } else {
                let _ = e.print();
            }
            return code;
        }
    };
    match execute(cli, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
