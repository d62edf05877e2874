//! CSV schema and number formatting.

use std::fmt::Write as _;

use super::runner::Row;
use super::{PointSpec, ScenarioName, OUTPUT_ROWS_PER_UNIT};

pub const SCHEMA: &str = "cvcoupler-csv/1";

pub const COLUMNS: [&str; 25] = [
    "zeta",
    "z_mm",
    "us2",
    "vs2",
    "up2",
    "vp2",
    "dtheta",
    "dphi",
    "V_XsA_XsB",
    "V_YsA_YsB",
    "V_XpA_XpB",
    "V_YpA_YpB",
    "V_XpA_YpB",
    "V_YpA_XpB",
    "EN_signals",
    "EN_pumps",
    "I1",
    "I2",
    "I3",
    "r1",
    "r2",
    "r3",
    "r4",
    "i2_r1",
    "i2_r4",
];

/// Twelve significant digits in scientific notation; `nan`, `inf`, `-inf`
/// for non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.11e}")
    }
}

/// Header comments carrying the schema version and the effective parameters.
pub fn header(scenario: ScenarioName, spec: &PointSpec) -> String {
    let p = &spec.params;
    let ph = p.phases();
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "# {k} = {v}");
    };
    kv("schema", SCHEMA.into());
    kv("scenario", scenario.to_string());
    kv("point", spec.label.clone());
    kv("coupling_per_mm", p.coupling().to_string());
    kv("nonlinearity", p.nonlinearity().to_string());
    kv("kappa", p.kappa().to_string());
    kv("power_ratio", p.power_ratio().to_string());
    kv("total_power_mw", p.total_power().to_string());
    kv(
        "phases",
        format!("{},{},{},{}", ph.theta_s, ph.theta_p, ph.phi_s, ph.phi_p),
    );
    kv("zeta_max", spec.zeta_max.to_string());
    kv("steps_per_unit", spec.steps_per_unit.to_string());
    kv("steps", spec.steps().to_string());
    kv("rows_per_unit", OUTPUT_ROWS_PER_UNIT.to_string());
    s
}

pub fn row_fields(r: &Row) -> [f64; 25] {
    let [g1, g2, g3] = r.vlf.gains;
    let v = r.covariances;
    [
        r.zeta,
        r.z_mm,
        r.powers[0],
        r.powers[1],
        r.powers[2],
        r.powers[3],
        r.delta_theta,
        r.delta_phi,
        v[0],
        v[1],
        v[2],
        v[3],
        v[4],
        v[5],
        r.en_signals,
        r.en_pumps,
        r.vlf.values[0],
        r.vlf.values[1],
        r.vlf.values[2],
        g3[0],
        g3[1],
        g1[2],
        g1[3],
        g2[0],
        g2[3],
    ]
}

pub fn render(scenario: ScenarioName, spec: &PointSpec, rows: &[Row]) -> String {
    let mut s = header(scenario, spec);
    s.push_str(&COLUMNS.join(","));
    s.push('\n');
    for r in rows {
        let fields = row_fields(r).map(format_number);
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}
