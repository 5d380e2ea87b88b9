//! The `report` command: every acceptance criterion as one envelope.

use lps_core::spectral::{self, Shape};
use lps_core::torus::{self, TorusGeneratorSet};
use lps_core::words;
use serde_json::{json, Value};

use crate::commands::{self, CliError, TorusArgs};
use crate::envelope::{Check, Envelope};

#[derive(Clone, Debug)]
pub struct ReportConfig {
    pub l_max: u32,
    pub windows: Vec<u32>,
    pub seed: u64,
    pub tol: f64,
    pub budget: u64,
}

/// Rank-1 estimates at the largest window must reach this value.
const AMENABLE_FLOOR: f64 = 0.95;

/// Folds sub-envelopes into one, prefixing each check with its part label.
fn merge(command: &str, parts: Vec<(String, Envelope)>) -> Envelope {
    let mut e = Envelope::new(command);
    let mut results = Vec::new();
    for (label, part) in parts {
        for mut c in part.checks {
            c.name = format!("{label}/{}", c.name);
            e.checks.push(c);
        }
        results.push(json!({
            "label": label,
            "command": part.command,
            "parameters": part.parameters,
            "results": part.results,
        }));
    }
    e.results = Value::Array(results);
    e
}

fn criterion1() -> Result<Envelope, CliError> {
    let mut parts = Vec::new();
    for p in [5, 13, 17, 29] {
        parts.push((format!("p={p}"), commands::generators(p)?));
    }
    Ok(merge("report criterion-1 generators", parts))
}

fn criterion2(cfg: &ReportConfig) -> Result<Envelope, CliError> {
    let lps = commands::verify_freeness(Some(5), None, 5, cfg.budget)?;
    let mut sanov = commands::verify_freeness(None, Some("sanov"), 8, cfg.budget)?;
    let g: TorusGeneratorSet = commands::load_torus_genset("sanov")?;
    let expected = words::ball_count(g.q, 8);
    let formula = ((g.q + 1) * g.q.pow(8) - 2) / (g.q - 1);
    sanov.checks.push(Check::new(
        "ball_count_formula",
        expected == formula.into(),
        sanov.results["ball_size_found"].as_f64().unwrap_or(f64::NAN),
        formula as f64,
    ));
    Ok(merge("report criterion-2 freeness", vec![("lps p=5".into(), lps), ("sanov".into(), sanov)]))
}

fn criterion3() -> Result<Envelope, CliError> {
    let e = commands::verify_identities(&[2, 3, 5, 9, 13], 12)?;
    Ok(merge("report criterion-3 identities", vec![("suite".into(), e)]))
}

fn criteria45(cfg: &ReportConfig) -> Result<(Envelope, Envelope), CliError> {
    let (g, spectra) = commands::lps_spectra(5, cfg.l_max)?;
    let mut parts = Vec::new();
    for n in 1..=3 {
        for shape in [Shape::Sphere, Shape::Ball] {
            parts.push((format!("n={n},{shape}"), commands::sphere_discrepancy_from_spectra(5, n, shape, &spectra)?));
        }
    }
    let constants = [
        ("sphere n=1", 1, 2.0 * 5f64.sqrt() / 6.0),
        ("sphere n=2", 2, 7.0 / 15.0),
        ("sphere n=3", 3, 3.0 * 5f64.powf(-1.5)),
    ];
    let mut hand = Envelope::new("hand constants");
    for (name, n, value) in constants {
        let exact = spectral::lps_discrepancy(5, n, Shape::Sphere)?;
        hand.checks.push(Check::close(name, exact, value, 1e-12));
    }
    parts.push(("constants".into(), hand));
    let discrepancy = merge("report criterion-5 sphere-discrepancy", parts);
    let ramanujan = commands::ramanujan_from_spectra(5, cfg.l_max, (g, spectra))?;
    Ok((merge("report criterion-4 ramanujan", vec![("p=5".into(), ramanujan)]), discrepancy))
}

fn criterion6(cfg: &ReportConfig) -> Result<Envelope, CliError> {
    let mut parts = Vec::new();
    for preset in ["sanov", "rank1"] {
        for shape in [Shape::Sphere, Shape::Ball] {
            let args = TorusArgs {
                generators: preset,
                n: 1,
                shape,
                windows: &cfg.windows,
                seed: cfg.seed,
                tol: cfg.tol,
                budget: cfg.budget,
            };
            let mut e = commands::verify_torus(&args)?;
            if preset == "rank1" {
                let last = e.results["table"]["rows"]
                    .as_array()
                    .and_then(|rows| rows.last())
                    .and_then(|row| row["estimate"].as_f64())
                    .unwrap_or(f64::NAN);
                let radius = cfg.windows.last().copied().unwrap_or(0);
                e.checks.push(Check::at_least(format!("amenable_limit[R={radius}]"), last, AMENABLE_FLOOR));
            }
            parts.push((format!("{preset},{shape}"), e));
        }
    }
    Ok(merge("report criterion-6 torus", parts))
}

fn criterion7() -> Result<Envelope, CliError> {
    let mut e = commands::norms(1, 10, None)?;
    e.table = None;
    Ok(merge("report criterion-7 amenable", vec![("q=1".into(), e)]))
}

/// Runs criteria 1 through 7 in order.
pub fn run(cfg: &ReportConfig) -> Result<Vec<Envelope>, CliError> {
    if cfg.windows.is_empty() {
        return Err(CliError::Usage("--windows must list at least one radius".into()));
    }
    let (c4, c5) = criteria45(cfg)?;
    let envelopes = vec![criterion1()?, criterion2(cfg)?, criterion3()?, c4, c5, criterion6(cfg)?, criterion7()?];
    let params = [
        ("l_max", json!(cfg.l_max)),
        ("windows", json!(cfg.windows)),
        ("seed", json!(cfg.seed)),
        ("tol", json!(cfg.tol)),
        ("budget", json!(cfg.budget)),
    ];
    Ok(envelopes
        .into_iter()
        .map(|mut e| {
            for (k, v) in &params {
                e.parameters.insert((*k).to_string(), v.clone());
            }
            e
        })
        .collect())
}

pub fn default_windows() -> Vec<u32> {
    torus::DEFAULT_RADII.to_vec()
}
