use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::entanglement::{pump_logneg, signal_logneg, vlf_optimize, VlfResult};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::Mode;
use crate::propagation::{
    integrate_propagator_with, physicality_report8, Physicality, PropagationConfig, Sample,
};

use super::csv::{self, format_number};
use super::{PointSpec, Scenario, ScenarioName, SweepAxis};

/// Most negative eigenvalue of V + iΩ/2 accepted as round-off.
pub const PHYSICALITY_TOL: f64 = 1e-10;

/// Level used for the joint signal/pump entanglement intervals.
pub const JOINT_EN_LEVEL: f64 = 0.4;

/// One output row.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub zeta: f64,
    pub z_mm: f64,
    /// u_s², v_s², u_p², v_p².
    pub powers: [f64; 4],
    pub delta_theta: f64,
    pub delta_phi: f64,
    /// V(XsA,XsB), V(YsA,YsB), V(XpA,XpB), V(YpA,YpB), V(XpA,YpB), V(YpA,XpB).
    pub covariances: [f64; 6],
    pub en_signals: f64,
    pub en_pumps: f64,
    pub vlf: VlfResult,
    pub physicality: Physicality,
}

fn row_of(sample: &Sample, z_mm: f64) -> Result<Row> {
    let v = &sample.covariance;
    let c = &sample.classical;
    let (sa, pa, sb, pb) = (Mode::SignalA, Mode::PumpA, Mode::SignalB, Mode::PumpB);
    let physicality = physicality_report8(v);
    if !(physicality.min_heisenberg_eigenvalue >= -PHYSICALITY_TOL) {
        return Err(Error::NumericalDegeneracy(format!(
            "covariance at zeta = {} violates the uncertainty principle (min eigenvalue {:e})",
            sample.zeta, physicality.min_heisenberg_eigenvalue
        )));
    }
    Ok(Row {
        zeta: sample.zeta,
        z_mm,
        powers: [c.power(sa), c.power(sb), c.power(pa), c.power(pb)],
        delta_theta: sample.phases.delta_theta(),
        delta_phi: sample.phases.delta_phi(),
        covariances: [
            v[(sa.x(), sb.x())],
            v[(sa.y(), sb.y())],
            v[(pa.x(), pb.x())],
            v[(pa.y(), pb.y())],
            v[(pa.x(), pb.y())],
            v[(pa.y(), pb.x())],
        ],
        en_signals: signal_logneg(v)?,
        en_pumps: pump_logneg(v)?,
        vlf: vlf_optimize(v),
        physicality,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub value: f64,
    pub zeta: f64,
    pub z_mm: f64,
}

impl Peak {
    fn of(rows: &[Row], f: impl Fn(&Row) -> f64) -> Peak {
        let mut best = Peak {
            value: f64::NEG_INFINITY,
            zeta: f64::NAN,
            z_mm: f64::NAN,
        };
        for r in rows {
            let x = f(r);
            if x > best.value {
                best = Peak {
                    value: x,
                    zeta: r.zeta,
                    z_mm: r.z_mm,
                };
            }
        }
        best
    }

    /// First interior local maximum.
    fn first(rows: &[Row], f: impl Fn(&Row) -> f64) -> Option<Peak> {
        let y: Vec<f64> = rows.iter().map(f).collect();
        (1..y.len().saturating_sub(1))
            .find(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
            .map(|i| Peak {
                value: y[i],
                zeta: rows[i].zeta,
                z_mm: rows[i].z_mm,
            })
    }
}

/// Maximal runs of rows satisfying `pred`, as (ζ_start, ζ_end).
fn intervals(rows: &[Row], pred: impl Fn(&Row) -> bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    let mut prev = f64::NAN;
    for r in rows {
        match (pred(r), start) {
            (true, None) => start = Some(r.zeta),
            (false, Some(s)) => {
                out.push((s, prev));
                start = None;
            }
            _ => {}
        }
        prev = r.zeta;
    }
    if let Some(s) = start {
        out.push((s, prev));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSummary {
    pub en_signals_peak: Peak,
    pub en_pumps_peak: Peak,
    pub en_pumps_first_peak: Option<Peak>,
    /// Peak of min(E_N(signals), E_N(pumps)).
    pub joint_peak: Peak,
    /// Intervals where both E_N values reach `JOINT_EN_LEVEL`.
    pub joint_intervals: Vec<(f64, f64)>,
    /// Intervals where all three VLF combinations are below the bound.
    pub vlf_intervals: Vec<(f64, f64)>,
    pub max_i1_i3_difference: f64,
    pub max_pump_covariance: f64,
    pub min_heisenberg_eigenvalue: f64,
    pub max_purity_defect: f64,
    pub max_symmetry_defect: f64,
    pub max_symplectic_defect: f64,
    pub max_conservation_drift: f64,
    pub max_z_mm_defect: f64,
}

fn summarize(rows: &[Row], spec: &PointSpec, symplectic: f64, drift: f64) -> PointSummary {
    let fold = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    PointSummary {
        en_signals_peak: Peak::of(rows, |r| r.en_signals),
        en_pumps_peak: Peak::of(rows, |r| r.en_pumps),
        en_pumps_first_peak: Peak::first(rows, |r| r.en_pumps),
        joint_peak: Peak::of(rows, |r| r.en_signals.min(r.en_pumps)),
        joint_intervals: intervals(rows, |r| {
            r.en_signals >= JOINT_EN_LEVEL && r.en_pumps >= JOINT_EN_LEVEL
        }),
        vlf_intervals: intervals(rows, |r| r.vlf.violated),
        max_i1_i3_difference: fold(&|r| (r.vlf.values[0] - r.vlf.values[2]).abs()),
        max_pump_covariance: fold(&|r| r.covariances[2..].iter().fold(0.0, |m, c| m.max(c.abs()))),
        min_heisenberg_eigenvalue: rows
            .iter()
            .map(|r| r.physicality.min_heisenberg_eigenvalue)
            .fold(f64::INFINITY, f64::min),
        max_purity_defect: fold(&|r| (r.physicality.det_2v - 1.0).abs()),
        max_symmetry_defect: fold(&|r| r.physicality.symmetry_defect),
        max_symplectic_defect: symplectic,
        max_conservation_drift: drift,
        max_z_mm_defect: fold(&|r| {
            (r.z_mm - r.zeta * spec.params.kappa() / spec.params.coupling()).abs()
        }),
    }
}

fn fmt_intervals(iv: &[(f64, f64)]) -> String {
    if iv.is_empty() {
        return "none".into();
    }
    iv.iter()
        .map(|(a, b)| format!("[{},{}]", format_number(*a), format_number(*b)))
        .collect::<Vec<_>>()
        .join(";")
}

impl PointSummary {
    fn write(&self, label: &str, s: &mut String) {
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{label}.{k} = {v}");
        };
        let mut peak = |name: &str, p: &Peak| {
            kv(&format!("{name}_max"), format_number(p.value));
            kv(&format!("{name}_argmax_zeta"), format_number(p.zeta));
            kv(&format!("{name}_argmax_z_mm"), format_number(p.z_mm));
        };
        peak("en_signals", &self.en_signals_peak);
        peak("en_pumps", &self.en_pumps_peak);
        if let Some(p) = &self.en_pumps_first_peak {
            peak("en_pumps_first_peak", p);
        }
        peak("en_joint", &self.joint_peak);
        kv("en_joint_level", format_number(JOINT_EN_LEVEL));
        kv("en_joint_intervals", fmt_intervals(&self.joint_intervals));
        kv("vlf_violated", (!self.vlf_intervals.is_empty()).to_string());
        kv(
            "vlf_violation_intervals",
            fmt_intervals(&self.vlf_intervals),
        );
        kv(
            "max_i1_i3_difference",
            format_number(self.max_i1_i3_difference),
        );
        kv(
            "max_pump_covariance",
            format_number(self.max_pump_covariance),
        );
        kv(
            "min_heisenberg_eigenvalue",
            format_number(self.min_heisenberg_eigenvalue),
        );
        kv("max_purity_defect", format_number(self.max_purity_defect));
        kv(
            "max_symmetry_defect",
            format_number(self.max_symmetry_defect),
        );
        kv(
            "max_symplectic_defect",
            format_number(self.max_symplectic_defect),
        );
        kv(
            "max_conservation_drift",
            format_number(self.max_conservation_drift),
        );
        kv("max_z_mm_defect", format_number(self.max_z_mm_defect));
    }
}

#[derive(Clone, Debug)]
pub struct PointResult {
    pub spec: PointSpec,
    pub rows: Vec<Row>,
    pub summary: PointSummary,
}

/// Propagates one parameter set and evaluates every stored sample.
pub fn analyze_point(spec: &PointSpec, exec: Execution) -> Result<PointResult> {
    let config = PropagationConfig::new(spec.zeta_max, spec.steps()).store_every(spec.stride());
    let state = integrate_propagator_with(&spec.params, &config)?;
    let rows = exec
        .map(state.samples(), |s| {
            row_of(s, spec.params.z_of_zeta(s.zeta))
        })
        .into_iter()
        .collect::<Result<Vec<Row>>>()?;
    let summary = summarize(
        &rows,
        spec,
        state.max_symplectic_defect(),
        state.max_conservation_drift(),
    );
    Ok(PointResult {
        spec: spec.clone(),
        rows,
        summary,
    })
}

/// A point of a sweep that failed; the remaining points still run.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFailure {
    pub label: String,
    pub error: Error,
}

/// Sweep peak-table entry.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakRow {
    pub label: String,
    pub parameter: f64,
    pub en_pumps_max: f64,
    pub argmax_zeta: f64,
    pub argmax_z_mm: f64,
    /// First interior local maximum; NaN when the curve has none.
    pub first_peak: f64,
    pub first_peak_zeta: f64,
    pub first_peak_z_mm: f64,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub scenario: ScenarioName,
    pub points: Vec<PointResult>,
    pub failures: Vec<PointFailure>,
    pub peak_table: Vec<PeakRow>,
    pub csv_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
    /// Contents of the summary file.
    pub summary: String,
}

impl RunReport {
    pub fn point(&self, label: &str) -> Option<&PointResult> {
        self.points.iter().find(|p| p.spec.label == label)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let res = fs::write(&tmp, contents).and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}

fn csv_path(scenario: &Scenario, spec: &PointSpec) -> PathBuf {
    scenario.out_dir.join(format!("{}.csv", spec.label))
}

fn run_and_write(
    scenario: &Scenario,
    spec: &PointSpec,
    exec: Execution,
) -> Result<(PointResult, PathBuf)> {
    let result = analyze_point(spec, exec).map_err(|e| e.context(spec.label.as_str()))?;
    let path = csv_path(scenario, spec);
    write_atomic(&path, &csv::render(scenario.name, spec, &result.rows))?;
    Ok((result, path))
}

/// Runs every point of the scenario, writing one CSV per point and a
/// summary file `<scenario>_summary.txt` into the output directory.
pub fn run_scenario(scenario: &Scenario, exec: Execution) -> Result<RunReport> {
    match scenario.axis() {
        Some(axis) => sweep(scenario, &axis, exec),
        None => {
            let specs = scenario.points()?;
            prepare_dir(scenario)?;
            let (result, path) = run_and_write(scenario, &specs[0], exec)
                .map_err(|e| e.context(format!("scenario {}", scenario.name)))?;
            finish(scenario, None, vec![result], Vec::new(), vec![path])
        }
    }
}

/// Runs the points along `axis` independently; failed points are recorded
/// and do not stop the others.
pub fn sweep(base: &Scenario, axis: &SweepAxis, exec: Execution) -> Result<RunReport> {
    let specs = base.points_along(axis)?;
    prepare_dir(base)?;
    // points are the unit of parallelism; each is analyzed sequentially
    let outcomes = exec.map(&specs, |spec| {
        run_and_write(base, spec, Execution::Sequential)
    });
    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut files = Vec::new();
    for (spec, outcome) in specs.iter().zip(outcomes) {
        match outcome {
            Ok((r, path)) => {
                results.push(r);
                files.push(path);
            }
            Err(error) => failures.push(PointFailure {
                label: spec.label.clone(),
                error,
            }),
        }
    }
    finish(base, Some(axis), results, failures, files)
}

fn prepare_dir(scenario: &Scenario) -> Result<()> {
    fs::create_dir_all(&scenario.out_dir).map_err(|e| io_err(&scenario.out_dir, e))
}

fn finish(
    scenario: &Scenario,
    axis: Option<&SweepAxis>,
    points: Vec<PointResult>,
    failures: Vec<PointFailure>,
    csv_files: Vec<PathBuf>,
) -> Result<RunReport> {
    let peak_table: Vec<PeakRow> = match axis {
        Some(_) => points
            .iter()
            .map(|p| PeakRow {
                label: p.spec.label.clone(),
                parameter: p.spec.axis_value.unwrap_or(f64::NAN),
                en_pumps_max: p.summary.en_pumps_peak.value,
                argmax_zeta: p.summary.en_pumps_peak.zeta,
                argmax_z_mm: p.summary.en_pumps_peak.z_mm,
                first_peak: p.summary.en_pumps_first_peak.map_or(f64::NAN, |q| q.value),
                first_peak_zeta: p.summary.en_pumps_first_peak.map_or(f64::NAN, |q| q.zeta),
                first_peak_z_mm: p.summary.en_pumps_first_peak.map_or(f64::NAN, |q| q.z_mm),
            })
            .collect(),
        None => Vec::new(),
    };

    let mut s = String::new();
    let _ = writeln!(s, "# cvcoupler summary");
    let _ = writeln!(s, "schema = {}", csv::SCHEMA);
    let _ = writeln!(s, "scenario = {}", scenario.name);
    let _ = writeln!(
        s,
        "points = {}",
        points
            .iter()
            .map(|p| p.spec.label.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(s, "failures = {}", failures.len());
    for f in &failures {
        let _ = writeln!(s, "failure.{} = {}", f.label, f.error);
    }
    for p in &points {
        p.summary.write(&p.spec.label, &mut s);
    }
    if let Some(axis) = axis {
        let _ = writeln!(
            s,
            "peak_table.columns = {},en_pumps_max,argmax_zeta,argmax_z_mm,first_peak,first_peak_zeta,first_peak_z_mm",
            axis.key()
        );
        for row in &peak_table {
            let _ = writeln!(
                s,
                "peak_table.{} = {},{},{},{},{},{},{}",
                row.label,
                format_number(row.parameter),
                format_number(row.en_pumps_max),
                format_number(row.argmax_zeta),
                format_number(row.argmax_z_mm),
                format_number(row.first_peak),
                format_number(row.first_peak_zeta),
                format_number(row.first_peak_z_mm)
            );
        }
        if let Some(best) = peak_table
            .iter()
            .max_by(|a, b| a.en_pumps_max.total_cmp(&b.en_pumps_max))
        {
            let _ = writeln!(s, "peak_table.global_max = {}", best.label);
        }
    }

    let summary_file = scenario
        .out_dir
        .join(format!("{}_summary.txt", scenario.name));
    if let Err(e) = write_atomic(&summary_file, &s) {
        remove_all(&csv_files);
        return Err(e);
    }
    Ok(RunReport {
        scenario: scenario.name,
        points,
        failures,
        peak_table,
        csv_files,
        summary_file,
        summary: s,
    })
}
