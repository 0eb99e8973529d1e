//! Schema smoke checks: every command's report carries the pinned envelope
//! and the payload fields downstream consumers key on.

use mixcert::api::{run, Command, Params, Request};

fn report_for(command: Command, input: &str, tweak: impl FnOnce(&mut Params)) -> serde_json::Value {
    let mut params = Params {
        threads: Some(1),
        ..Params::default()
    };
    tweak(&mut params);
    let req = Request {
        command,
        input: Some(input.to_string()),
        edge_text: None,
        params,
    };
    serde_json::to_value(run(&req).unwrap()).unwrap()
}

fn check_envelope(report: &serde_json::Value, command: &str) {
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["command"], command);
    assert!(report["tool_version"].is_string());
    assert!(report["parameters"].is_object());
    assert!(report["backend"].is_string());
    assert!(report["threads"].is_number());
    assert!(report["wall_time_ms"].is_null(), "timing off by default");
    assert!(report["verdicts"].is_array());
    for v in report["verdicts"].as_array().unwrap() {
        assert!(v["claim_id"].is_string());
        assert!(v["holds"].is_boolean());
        assert!(!v["lhs"].is_null());
        assert!(!v["rhs"].is_null());
    }
}

#[test]
fn profile_schema() {
    let r = report_for(Command::Profile, "complete:n=5", |p| {
        p.tau = Some("1".into())
    });
    check_envelope(&r, "profile");
    assert_eq!(r["result"]["kind"], "profile");
    let row = &r["result"]["profile"]["rows"][0];
    assert!(row["vertex"].is_number());
    assert!(!row["tv_at_tau"].is_null());
    assert!(row["capped"].is_boolean());
    assert_eq!(r["result"]["well_mixing_count"], 5);
}

#[test]
fn conductance_schema_carries_exact_ratio() {
    let r = report_for(Command::Conductance, "complete:n=5", |p| {
        p.mode = Some("exact".into())
    });
    check_envelope(&r, "conductance");
    let value = &r["result"]["result"]["value"];
    assert_eq!(value["num"], "5");
    assert_eq!(value["den"], "4");
    assert!(r["result"]["result"]["argmin"].is_array());
    assert_eq!(r["result"]["result"]["candidate_count"], 15);
}

#[test]
fn certificate_schema() {
    let r = report_for(Command::Certify, "hypercube:D=3", |p| {
        p.c = Some(1.0);
        p.range = Some("1:4".into());
        p.mode = Some("exact".into());
    });
    check_envelope(&r, "certify");
    let cert = &r["result"]["certificate"];
    assert_eq!(cert["verdict"], "certified");
    assert_eq!(cert["size_lo"], 1);
    assert_eq!(cert["size_hi"], 4);
    assert_eq!(cert["mode"], "exact");
    assert!(cert["examined"].is_number());
}

#[test]
fn extraction_schema() {
    let r = report_for(Command::Extract, "random_regular:n=20,D=4,seed=5", |p| {
        p.eps = Some(0.3);
        p.delta = Some(0.2);
        p.tau = Some("16".into());
    });
    check_envelope(&r, "extract");
    let result = &r["result"]["result"];
    assert!(result["deleted"].is_array());
    assert!(result["budget_holds"].is_boolean());
    assert!(result["peel_trace"].is_array());
    assert!(result["certificate"]["verdict"].is_string());
    assert!(result["kept_labels"].is_array());
}

#[test]
fn separator_schema() {
    let r = report_for(Command::Separator, "complete:n=9", |_| {});
    check_envelope(&r, "separator");
    let result = &r["result"]["result"];
    assert!(result["separator"].is_array());
    assert!(result["largest_remaining_fraction"].is_number());
    assert_eq!(result["mode"], "exact");
}

#[test]
fn cycle_schema() {
    let r = report_for(Command::Cycle, "cycle:n=9", |p| {
        p.k = Some(4);
        p.ell = Some(2);
        p.mode = Some("exact".into());
    });
    check_envelope(&r, "cycle");
    assert!(r["result"]["witness"]["vertices"].is_array());
    assert_eq!(r["result"]["trace"]["condition_mode"], "direct");
    assert_eq!(r["result"]["condition"]["verdict"], "holds");
}

#[test]
fn amplification_schema() {
    let r = report_for(Command::Amplify, "merged_expanders:n=24,D=4,m=6,seed=3", |p| {
        p.tau = Some("4".into());
        p.delta = Some(0.3);
        p.eps = Some(0.1);
        p.m = Some(2);
    });
    check_envelope(&r, "amplify");
    let rep = &r["result"]["report"];
    assert!(rep["component_sizes"].is_array());
    assert!(rep["schedule"]["values"].is_array());
    assert!(rep["level_sizes"].is_array());
    assert!(rep["cumulative_sizes"].is_array());
    assert!(rep["membership"].is_object(), "n <= 256 embeds full lists");
    assert!(rep["claim_b0"]["holds"].is_boolean());
    assert!(rep["markov"]["all_within"].is_boolean());
    assert!(rep["identity"]["holds"].is_boolean());
    assert!(rep["delta0"].is_object(), "delta0 serializes exactly");
    assert!(rep["delta_feasible"].is_boolean());
}

#[test]
fn sandwich_schema() {
    let r = report_for(Command::Sandwich, "complete:n=5", |_| {});
    check_envelope(&r, "sandwich");
    let rep = &r["result"]["report"];
    assert_eq!(rep["applicable"], true);
    assert_eq!(rep["mix"], 1);
    assert!(rep["upper"].is_number());
}

#[test]
fn gen_schema() {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("schema_gen.edges");
    let r = report_for(Command::Gen, "cycle:n=7", |p| {
        p.out = Some(out.to_str().unwrap().to_string())
    });
    check_envelope(&r, "gen");
    assert_eq!(r["result"]["spec"]["kind"], "cycle");
    assert_eq!(r["result"]["graph"]["n"], 7);
}
