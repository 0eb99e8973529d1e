//! Request layer shared by the CLI and the C FFI: one structured request in,
//! one RunReport out.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::construct::{generate, ConstructionSpec};
use crate::cycle::{
    find_long_cycle, mixing_to_cycle, verify_neighborhood_condition, ConditionMode,
    ConditionVerdict, PipelineTrace,
};
use crate::error::{Error, Result};
use crate::expansion::{
    check_edge_expansion, conductance, extract_expander, find_separator, sandwich_check,
    SearchMode, SeparatorMode, EXACT_CUT_LIMIT, EXACT_SEPARATOR_LIMIT,
};
use crate::graph::{Graph, GraphSummary};
use crate::report::{ResultPayload, RunReport, Verdict, SCHEMA_VERSION, TOOL_VERSION};
use crate::scalar::{Backend, Scalar};
use crate::walk::{default_t_max, mixing_profile, well_mixing_set, MixingOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Gen,
    Profile,
    Conductance,
    Certify,
    Extract,
    Separator,
    Cycle,
    Amplify,
    Sandwich,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Profile => "profile",
            Command::Conductance => "conductance",
            Command::Certify => "certify",
            Command::Extract => "extract",
            Command::Separator => "separator",
            Command::Cycle => "cycle",
            Command::Amplify => "amplify",
            Command::Sandwich => "sandwich",
        }
    }
}

/// Flag values; None means "use the default for this command".
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub mode: Option<String>,
    pub backend: Option<String>,
    /// Step count or "auto" (the measured max mixing time, capped).
    pub tau: Option<String>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub t_max: Option<usize>,
    pub threshold: Option<f64>,
    /// Expansion bound for `certify`.
    pub c: Option<f64>,
    /// Size range "lo:hi" for `certify`.
    pub range: Option<String>,
    /// Direct (k, ell) for `cycle`; when absent the pipeline derives them.
    pub k: Option<usize>,
    pub ell: Option<usize>,
    pub out: Option<String>,
    pub timing: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Request {
    pub command: Command,
    /// File path or construction descriptor.
    pub input: Option<String>,
    /// Inline edge-list text (takes precedence over `input`).
    #[serde(default)]
    pub edge_text: Option<String>,
    #[serde(default)]
    pub params: Params,
}

fn load_graph(req: &Request) -> Result<(Graph, String)> {
    if let Some(text) = &req.edge_text {
        return Ok((Graph::parse_edge_list(text)?, "<inline>".to_string()));
    }
    let input = req
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("missing input".into()))?;
    if Path::new(input).exists() {
        let text = std::fs::read_to_string(input)?;
        Ok((Graph::parse_edge_list(&text)?, input.to_string()))
    } else {
        let spec = ConstructionSpec::parse(input)?;
        Ok((generate(&spec)?, input.to_string()))
    }
}

fn parse_backend(p: &Params, n: usize) -> Result<Backend> {
    match p.backend.as_deref() {
        None => Ok(Backend::auto(n)),
        Some("exact") => Ok(Backend::Exact),
        Some("float") => Ok(Backend::Float),
        Some(other) => Err(Error::InvalidParameter(format!(
            "unknown backend {other:?} (expected exact|float)"
        ))),
    }
}

fn parse_mode(p: &Params, n: usize, exact_limit: usize) -> Result<SearchMode> {
    match p.mode.as_deref() {
        None => Ok(if n <= exact_limit {
            SearchMode::Exact
        } else {
            SearchMode::Sweep
        }),
        Some("exact") => Ok(SearchMode::Exact),
        Some("sweep") => Ok(SearchMode::Sweep),
        Some("sampled") => Ok(SearchMode::Sampled),
        Some(other) => Err(Error::InvalidParameter(format!(
            "unknown mode {other:?} (expected exact|sweep|sampled)"
        ))),
    }
}

/// Resolve tau: an explicit number, or "auto" = the measured max mixing time
/// at the threshold (t_max when capped).
fn resolve_tau(
    g: &Graph,
    p: &Params,
    threshold: f64,
    t_max: usize,
    backend: Backend,
) -> Result<usize> {
    match p.tau.as_deref() {
        None | Some("auto") => {
            let profile = mixing_profile(g, 1, threshold, t_max, backend)?;
            Ok(match profile.max_mixing_time() {
                MixingOutcome::Mixed(t) => t.max(1),
                MixingOutcome::Capped(cap) => cap,
            })
        }
        Some(text) => text
            .parse::<usize>()
            .map_err(|_| Error::InvalidParameter(format!("invalid tau {text:?}")))
            .and_then(|t| {
                if t >= 1 {
                    Ok(t)
                } else {
                    Err(Error::InvalidParameter("tau must be >= 1".into()))
                }
            }),
    }
}

fn parse_range(p: &Params, n: usize) -> Result<(usize, usize)> {
    match p.range.as_deref() {
        None => Ok((1, n / 2)),
        Some(text) => {
            let (lo, hi) = text
                .split_once(':')
                .ok_or_else(|| Error::InvalidParameter(format!("range must be lo:hi, got {text:?}")))?;
            let lo = lo
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("invalid range lower bound {lo:?}")))?;
            let hi = hi
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("invalid range upper bound {hi:?}")))?;
            Ok((lo, hi))
        }
    }
}

/// Run one request and produce the report.
pub fn run(req: &Request) -> Result<RunReport> {
    let start = Instant::now();
    let threads = req
        .params
        .threads
        .or_else(|| {
            std::env::var("MIXCERT_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        });
    let mut parameters: BTreeMap<String, String> = BTreeMap::new();
    let mut record = |k: &str, v: String| {
        parameters.insert(k.to_string(), v);
    };

    let (payload, verdicts, backend, input_desc) = match req.command {
        Command::Gen => {
            let input = req
                .input
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("gen requires a construction spec".into()))?;
            let spec = ConstructionSpec::parse(input)?;
            let g = generate(&spec)?;
            let out = req.params.out.clone().ok_or_else(|| {
                Error::InvalidParameter("gen requires -o <file> for the edge list".into())
            })?;
            std::fs::write(&out, g.to_edge_list())?;
            record("o", out.clone());
            (
                ResultPayload::Generated {
                    spec,
                    graph: GraphSummary::from(&g),
                    output: Some(out),
                },
                Vec::new(),
                Backend::Exact,
                input.to_string(),
            )
        }
        Command::Profile => {
            let (g, desc) = load_graph(req)?;
            let backend = parse_backend(&req.params, g.n())?;
            let threshold = req.params.threshold.unwrap_or(0.25);
            let t_max = req.params.t_max.unwrap_or_else(|| default_t_max(g.n()));
            let tau = resolve_tau(&g, &req.params, threshold, t_max, backend)?;
            let delta = req.params.delta.unwrap_or(0.25);
            let profile = mixing_profile(&g, tau, threshold, t_max, backend)?;
            let wm = well_mixing_set(&g, tau, delta, backend)?;
            record("tau", tau.to_string());
            record("threshold", threshold.to_string());
            record("t_max", t_max.to_string());
            record("delta", delta.to_string());
            if let Some(out) = &req.params.out {
                std::fs::write(out, profile.to_csv())?;
                record("o", out.clone());
            }
            (
                ResultPayload::Profile {
                    graph: GraphSummary::from(&g),
                    profile,
                    well_mixing_count: wm.len(),
                },
                Vec::new(),
                backend,
                desc,
            )
        }
        Command::Conductance => {
            let (g, desc) = load_graph(req)?;
            let mode = parse_mode(&req.params, g.n(), EXACT_CUT_LIMIT)?;
            let seed = req.params.seed.unwrap_or(1);
            let result = conductance(&g, mode, seed)?;
            record("mode", format!("{mode:?}").to_lowercase());
            record("seed", seed.to_string());
            (
                ResultPayload::Conductance {
                    graph: GraphSummary::from(&g),
                    result,
                },
                Vec::new(),
                Backend::Exact,
                desc,
            )
        }
        Command::Certify => {
            let (g, desc) = load_graph(req)?;
            let mode = parse_mode(&req.params, g.n(), EXACT_CUT_LIMIT)?;
            let c = req
                .params
                .c
                .ok_or_else(|| Error::InvalidParameter("certify requires --c <bound>".into()))?;
            let (lo, hi) = parse_range(&req.params, g.n())?;
            let seed = req.params.seed.unwrap_or(1);
            let cert = check_edge_expansion(&g, c, lo, hi, mode, seed)?;
            record("c", c.to_string());
            record("range", format!("{lo}:{hi}"));
            record("mode", format!("{mode:?}").to_lowercase());
            record("seed", seed.to_string());
            let verdicts = vec![Verdict::new(
                "expansion.certified",
                cert.verdict.is_certified(),
                cert.min_ratio.clone().unwrap_or(Scalar::Float(f64::NAN)),
                Scalar::Float(c),
            )];
            (
                ResultPayload::Certificate {
                    graph: GraphSummary::from(&g),
                    certificate: cert,
                },
                verdicts,
                Backend::Exact,
                desc,
            )
        }
        Command::Extract => {
            let (g, desc) = load_graph(req)?;
            let backend = parse_backend(&req.params, g.n())?;
            let threshold = req.params.threshold.unwrap_or(0.25);
            let t_max = req.params.t_max.unwrap_or_else(|| default_t_max(g.n()));
            let tau = resolve_tau(&g, &req.params, threshold, t_max, backend)?;
            let delta = req.params.delta.unwrap_or(1.0 / 30.0);
            let eps = req.params.eps.unwrap_or(0.3);
            let seed = req.params.seed.unwrap_or(1);
            let result = extract_expander(&g, eps, delta, tau, backend, seed)?;
            record("tau", tau.to_string());
            record("delta", delta.to_string());
            record("eps", eps.to_string());
            record("seed", seed.to_string());
            let verdicts = vec![
                Verdict::new(
                    "extraction.budget",
                    result.budget_holds,
                    Scalar::from_usize(result.deleted_count),
                    Scalar::Float(result.budget),
                ),
                Verdict::new(
                    "extraction.certificate",
                    result.certificate.verdict.is_certified(),
                    result
                        .certificate
                        .min_ratio
                        .clone()
                        .unwrap_or(Scalar::Float(f64::NAN)),
                    Scalar::Float(result.constant),
                ),
            ];
            (
                ResultPayload::Extraction {
                    graph: GraphSummary::from(&g),
                    result: Box::new(result),
                },
                verdicts,
                backend,
                desc,
            )
        }
        Command::Separator => {
            let (g, desc) = load_graph(req)?;
            let mode = match req.params.mode.as_deref() {
                None => {
                    if g.n() <= EXACT_SEPARATOR_LIMIT {
                        SeparatorMode::Exact
                    } else {
                        SeparatorMode::Heuristic
                    }
                }
                Some("exact") => SeparatorMode::Exact,
                Some("heuristic") | Some("sweep") | Some("sampled") => SeparatorMode::Heuristic,
                Some(other) => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown separator mode {other:?}"
                    )))
                }
            };
            let seed = req.params.seed.unwrap_or(1);
            let result = find_separator(&g, mode, seed)?;
            record("mode", format!("{mode:?}").to_lowercase());
            record("seed", seed.to_string());
            // Lower bound (eps/48 tau) n from the well-mixing hypothesis,
            // when eps and tau are supplied.
            let mut verdicts = Vec::new();
            let bound = match (req.params.eps, req.params.tau.as_deref()) {
                (Some(eps), Some(tau_text)) => {
                    let tau: usize = tau_text.parse().map_err(|_| {
                        Error::InvalidParameter(format!("invalid tau {tau_text:?}"))
                    })?;
                    let b = eps * g.n() as f64 / (48.0 * tau as f64);
                    record("eps", eps.to_string());
                    record("tau", tau.to_string());
                    if mode == SeparatorMode::Exact {
                        verdicts.push(Verdict::new(
                            "separator.size_bound",
                            result.size as f64 >= b,
                            Scalar::from_usize(result.size),
                            Scalar::Float(b),
                        ));
                    }
                    Some(b)
                }
                _ => None,
            };
            (
                ResultPayload::Separator {
                    graph: GraphSummary::from(&g),
                    result,
                    bound,
                },
                verdicts,
                Backend::Exact,
                desc,
            )
        }
        Command::Cycle => {
            let (g, desc) = load_graph(req)?;
            let backend = parse_backend(&req.params, g.n())?;
            match (req.params.k, req.params.ell) {
                (Some(k), Some(ell)) => {
                    // Direct (k, ell) mode: verify the condition, then search.
                    let seed = req.params.seed.unwrap_or(1);
                    let mode = match parse_mode(&req.params, 0, 0)? {
                        SearchMode::Exact => ConditionMode::Exact,
                        _ => ConditionMode::Sampled,
                    };
                    let condition = verify_neighborhood_condition(&g, k, ell, mode, seed)?;
                    let witness = find_long_cycle(&g, k, ell)?;
                    witness.validate(&g)?;
                    record("k", k.to_string());
                    record("ell", ell.to_string());
                    record("seed", seed.to_string());
                    let verdicts = vec![
                        Verdict::new(
                            "cycle.condition",
                            condition.verdict == ConditionVerdict::Holds,
                            Scalar::from_usize(condition.min_neighborhood),
                            Scalar::from_usize(ell),
                        ),
                        Verdict::new(
                            "cycle.length",
                            witness.len() > ell,
                            Scalar::from_usize(witness.len()),
                            Scalar::from_usize(ell + 1),
                        ),
                    ];
                    (
                        ResultPayload::Cycle {
                            graph: GraphSummary::from(&g),
                            witness,
                            trace: synth_trace(&g, k, ell),
                            condition: Some(condition),
                        },
                        verdicts,
                        backend,
                        desc,
                    )
                }
                _ => {
                    let threshold = req.params.threshold.unwrap_or(0.25);
                    let t_max = req.params.t_max.unwrap_or_else(|| default_t_max(g.n()));
                    let tau = resolve_tau(&g, &req.params, threshold, t_max, backend)?;
                    let eps = req.params.eps.unwrap_or(0.3);
                    let (witness, trace) = mixing_to_cycle(&g, eps, tau, backend)?;
                    record("tau", tau.to_string());
                    record("eps", eps.to_string());
                    let verdicts = vec![Verdict::new(
                        "cycle.length_bound",
                        witness.len() as f64 > trace.length_bound,
                        Scalar::from_usize(witness.len()),
                        Scalar::Float(trace.length_bound),
                    )];
                    (
                        ResultPayload::Cycle {
                            graph: GraphSummary::from(&g),
                            witness,
                            trace,
                            condition: None,
                        },
                        verdicts,
                        backend,
                        desc,
                    )
                }
            }
        }
        Command::Amplify => {
            let (g, desc) = load_graph(req)?;
            let backend = match req.params.backend.as_deref() {
                None => crate::amplify::ladder_backend(g.n()),
                _ => parse_backend(&req.params, g.n())?,
            };
            let threshold = req.params.threshold.unwrap_or(0.25);
            let t_max = req.params.t_max.unwrap_or_else(|| default_t_max(g.n()));
            let tau = resolve_tau(&g, &req.params, threshold, t_max, backend)?;
            let delta = req.params.delta.unwrap_or(0.25);
            let eps = req.params.eps.unwrap_or(0.2);
            let m = req.params.m.unwrap_or(1);
            let report = crate::amplify::verify_amplification(&g, tau, delta, eps, m, backend)?;
            record("tau", tau.to_string());
            record("delta", delta.to_string());
            record("eps", eps.to_string());
            record("M", m.to_string());
            let mut verdicts = vec![
                Verdict::new(
                    "amplify.hypothesis",
                    report.hypothesis_holds,
                    Scalar::from_usize(report.a_size),
                    Scalar::Float(eps * g.n() as f64),
                ),
                report.claim_b0.clone(),
            ];
            verdicts.extend(report.claim_bm.iter().cloned());
            verdicts.push(Verdict::new(
                "amplify.eta_recursion",
                report.eta_recursion_holds,
                Scalar::Float(report.schedule.values[0]),
                Scalar::Float(report.schedule.values[report.m].powi(2) / 9.0),
            ));
            verdicts.push(Verdict::new(
                "amplify.identity",
                report.identity.holds,
                report.identity.lhs.clone(),
                report.identity.rhs.clone(),
            ));
            verdicts.push(Verdict::new(
                "amplify.markov_decomposition",
                report.markov.all_within,
                report
                    .markov
                    .samples
                    .iter()
                    .map(|s| s.max_abs_diff.clone())
                    .max_by(|a, b| a.cmp_value(b).unwrap_or(std::cmp::Ordering::Equal))
                    .unwrap_or(Scalar::zero(backend)),
                Scalar::Float(report.markov.tolerance),
            ));
            verdicts.push(Verdict::new(
                "amplify.conclusion",
                report.conclusion.holds,
                Scalar::from_usize(report.conclusion.exceptional),
                Scalar::Float(report.conclusion.allowance),
            ));
            (
                ResultPayload::Amplification {
                    graph: GraphSummary::from(&g),
                    report: Box::new(report),
                },
                verdicts,
                backend,
                desc,
            )
        }
        Command::Sandwich => {
            let (g, desc) = load_graph(req)?;
            let threshold = req.params.threshold.unwrap_or(0.25);
            let t_max = req.params.t_max.unwrap_or_else(|| default_t_max(g.n()));
            let report = sandwich_check(&g, threshold, t_max)?;
            record("threshold", threshold.to_string());
            record("t_max", t_max.to_string());
            let verdicts = if report.applicable {
                let mix = report.mix.expect("applicable implies mixed");
                vec![
                    Verdict::new(
                        "sandwich.lower",
                        report.lower.lt(&Scalar::from_usize(mix)),
                        report.lower.clone(),
                        Scalar::from_usize(mix),
                    ),
                    Verdict::new(
                        "sandwich.upper",
                        (mix as f64) < report.upper,
                        Scalar::from_usize(mix),
                        Scalar::Float(report.upper),
                    ),
                ]
            } else {
                Vec::new()
            };
            (
                ResultPayload::Sandwich {
                    graph: GraphSummary::from(&g),
                    report,
                },
                verdicts,
                Backend::Exact,
                desc,
            )
        }
    };

    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        command: req.command.name().to_string(),
        input: input_desc,
        parameters,
        backend,
        threads,
        wall_time_ms: req.params.timing.then(|| start.elapsed().as_millis()),
        result: payload,
        verdicts,
    })
}

/// Trace stand-in for the direct (k, ell) cycle mode.
fn synth_trace(g: &Graph, k: usize, ell: usize) -> PipelineTrace {
    PipelineTrace {
        n: g.n(),
        n_star: g.n(),
        k,
        ell,
        tau: 0,
        eps: 0.0,
        delta: 0.0,
        hypothesis_count: 0,
        hypothesis_required: 0,
        condition_mode: "direct".to_string(),
        condition_holds: None,
        length_bound: ell as f64,
    }
}
