use std::fs;
use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::Value;

use curvesmith::curve_model::{sample_csv, CurveDescriptor, KnownClassification};
use curvesmith::decision::{decide, AnalysisReport, Mode, Verdict};
use curvesmith::reparam::{
    reparametrize as construct, verify_smoothness, zero_derivative_at_boundary, BoundaryReport, SmoothnessReport,
    StageManifest,
};
use curvesmith::Config;

use crate::error::CliError;
use crate::output::{self, Envelope};

/// Exit code of an analysis whose verdict is inconclusive.
const INCONCLUSIVE: u8 = 2;

pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<Config, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Json { path: p.into(), source: e })?
        }
        None => Config::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Inline JSON, a descriptor file, or a `corpus` metadata file whose
/// `descriptor` field holds the descriptor.
pub fn load_descriptor(arg: &str) -> Result<CurveDescriptor, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_owned()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::io(arg, e))?
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| curvesmith::Error::InvalidDescriptor(e.to_string()))?;
    let inner = match value.get("descriptor") {
        Some(d) if value.get("schema").is_some() => d.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| curvesmith::Error::InvalidDescriptor(e.to_string()).into())
}

#[derive(Serialize)]
struct CorpusMeta<'a> {
    kind: &'a str,
    dim: usize,
    domain: (f64, f64),
    known: Option<&'a KnownClassification>,
    samples: usize,
    csv: &'static str,
}

pub fn corpus(arg: &str, out: &Path, samples: usize, cfg: &Config) -> Result<ExitCode, CliError> {
    let descriptor = load_descriptor(arg)?;
    let curve = descriptor.build()?;
    output::create_dir(out)?;
    let csv = out.join("curve.csv");
    output::write(&csv, &sample_csv(&curve, samples))?;
    let meta = CorpusMeta {
        kind: &curve.meta.kind,
        dim: curve.dim(),
        domain: curve.domain(),
        known: curve.meta.known.as_ref(),
        samples,
        csv: "curve.csv",
    };
    let json = out.join("curve.json");
    output::write(&json, &output::to_json(&Envelope::new("corpus", &descriptor, cfg, meta)))?;
    println!("{}\n{}", csv.display(), json.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct AnalysisBody<'a> {
    report: &'a AnalysisReport,
}

pub fn analyze(
    arg: &str,
    mode: Mode,
    delta: f64,
    out: Option<&Path>,
    partial_sums: Option<&Path>,
    cfg: &Config,
) -> Result<ExitCode, CliError> {
    let descriptor = load_descriptor(arg)?;
    let curve = descriptor.build()?;
    let report = decide(&curve, mode, delta, cfg);
    let json = output::to_json(&Envelope::new("analyze", &descriptor, cfg, AnalysisBody { report: &report }));
    match out {
        Some(p) => output::write(p, &json)?,
        None => print!("{json}"),
    }
    if let Some(p) = partial_sums {
        output::write(p, &report.partial_sums_csv())?;
    }
    Ok(if report.verdict == Verdict::Inconclusive { ExitCode::from(INCONCLUSIVE) } else { ExitCode::SUCCESS })
}

pub struct ReparamOptions {
    pub mode: Mode,
    pub delta: f64,
    pub k: f64,
    pub force: bool,
    pub samples: usize,
    pub grid: usize,
    pub tol: f64,
}

#[derive(Serialize)]
struct ManifestBody<'a> {
    verdict: Verdict,
    manifest: StageManifest<'a>,
}

#[derive(Serialize)]
struct VerifyBody<'a> {
    verdict: Verdict,
    forced: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    smoothness: Option<&'a SmoothnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary: Option<&'a BoundaryReport>,
    pass: bool,
}

pub fn reparametrize(arg: &str, opts: &ReparamOptions, out: &Path, cfg: &Config) -> Result<ExitCode, CliError> {
    let descriptor = load_descriptor(arg)?;
    let curve = descriptor.build()?;
    let verdict = decide(&curve, opts.mode, opts.delta, cfg).verdict;
    if verdict != Verdict::Reparametrizable && !opts.force {
        return Err(CliError::Precondition(format!("verdict is {verdict:?}; pass --force to construct anyway")));
    }
    output::create_dir(out)?;
    let verify = out.join("verify.json");
    let h = match construct(&curve, opts.mode, opts.k, cfg) {
        Ok(h) => h,
        Err(e) if opts.force => {
            let body = VerifyBody {
                verdict,
                forced: true,
                error: Some(e.to_string()),
                smoothness: None,
                boundary: None,
                pass: false,
            };
            output::write(&verify, &output::to_json(&Envelope::new("reparametrize", &descriptor, cfg, body)))?;
            println!("{}", verify.display());
            return Ok(ExitCode::SUCCESS);
        }
        Err(e) => return Err(e.into()),
    };
    let csv = out.join("h.csv");
    output::write(&csv, &h.to_csv(opts.samples))?;
    let manifest = out.join("manifest.json");
    let body = ManifestBody { verdict, manifest: h.manifest() };
    output::write(&manifest, &output::to_json(&Envelope::new("reparametrize", &descriptor, cfg, body)))?;
    let smoothness = verify_smoothness(&curve, &h, opts.grid, opts.mode);
    let boundary = zero_derivative_at_boundary(&curve, &h, &h.boundary_points(), opts.tol);
    let body = VerifyBody {
        verdict,
        forced: opts.force,
        error: None,
        pass: smoothness.pass && boundary.pass,
        smoothness: Some(&smoothness),
        boundary: Some(&boundary),
    };
    output::write(&verify, &output::to_json(&Envelope::new("reparametrize", &descriptor, cfg, body)))?;
    println!("{}\n{}\n{}", csv.display(), manifest.display(), verify.display());
    Ok(ExitCode::SUCCESS)
}
