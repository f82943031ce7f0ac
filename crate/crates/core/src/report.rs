//! Report rendering: a stable JSON form for machine consumption and a
//! human-readable text form for the terminal.
//!
//! JSON keys are fixed and `serde_json`'s default BTreeMap backing keeps
//! object keys sorted, so serialization is byte-for-byte deterministic.
//! Exact rationals appear as `"num/den"` strings, never floats.

use serde_json::{json, Value};

use crate::rational::{fmt_rat, fmt_rat_exact};
use crate::verifier::{Termination, VerificationReport, Verdict};

fn verdict_json(v: &Verdict) -> Value {
    match &v.witness {
        Some(w) => json!({ "pass": v.pass, "witness": w }),
        None => json!({ "pass": v.pass }),
    }
}

pub fn report_to_json(report: &VerificationReport) -> Value {
    let termination = match &report.termination {
        Some(t) => {
            let mut obj = serde_json::Map::new();
            obj.insert("class".to_string(), json!(t.to_string()));
            if let Termination::LasVegas { cycle_edges } = t {
                obj.insert("cycle_edges".to_string(), json!(cycle_edges));
            }
            Value::Object(obj)
        }
        None => Value::Null,
    };
    let expected = match &report.expected {
        Some(map) => {
            let mut obj = serde_json::Map::new();
            for (metric, value) in map {
                obj.insert(metric.key().to_string(), json!(fmt_rat_exact(value)));
            }
            Value::Object(obj)
        }
        None => Value::Null,
    };
    let shuffles: Vec<Value> = report
        .shuffles
        .iter()
        .map(|s| {
            json!({
                "spec": s.spec.to_string(),
                "uniform": s.uniform,
                "closed": s.closed,
                "group_order": s.group_order,
            })
        })
        .collect();
    json!({
        "protocol": report.protocol,
        "cards": report.cards,
        "secure": verdict_json(&report.secure),
        "correct": verdict_json(&report.correct),
        "termination": termination,
        "expected": expected,
        "restart_free": report.restart_free,
        "shuffles": shuffles,
        "uniform": report.uniform,
        "closed": report.closed,
        "witness": report.witness().map(|w| json!(w)).unwrap_or(Value::Null),
    })
}

pub fn report_to_json_string(report: &VerificationReport) -> String {
    let mut s = serde_json::to_string_pretty(&report_to_json(report)).expect("report is valid JSON");
    s.push('\n');
    s
}

fn verdict_line(name: &str, v: &Verdict) -> String {
    match (&v.pass, &v.witness) {
        (true, _) => format!("{name:<12} PASS"),
        (false, Some(w)) => format!("{name:<12} FAIL  {w}"),
        (false, None) => format!("{name:<12} FAIL"),
    }
}

pub fn report_to_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "protocol {} ({} cards)\n",
        report.protocol, report.cards
    ));
    out.push_str(&verdict_line("secure", &report.secure));
    out.push('\n');
    out.push_str(&verdict_line("correct", &report.correct));
    out.push('\n');
    match &report.termination {
        Some(Termination::LasVegas { cycle_edges }) => out.push_str(&format!(
            "{:<12} las_vegas ({cycle_edges} cycle edge{})\n",
            "termination",
            if *cycle_edges == 1 { "" } else { "s" }
        )),
        Some(t) => out.push_str(&format!("{:<12} {t}\n", "termination")),
        None => out.push_str(&format!("{:<12} (not evaluated)\n", "termination")),
    }
    match &report.expected {
        Some(map) => {
            for (metric, value) in map {
                out.push_str(&format!(
                    "{:<12} E[{}] = {}\n",
                    "expected",
                    metric.key(),
                    fmt_rat(value)
                ));
            }
        }
        None => out.push_str(&format!("{:<12} (not evaluated)\n", "expected")),
    }
    out.push_str(&format!(
        "{:<12} {}\n",
        "restart_free",
        if report.restart_free { "yes" } else { "no" }
    ));
    for (i, s) in report.shuffles.iter().enumerate() {
        out.push_str(&format!(
            "{:<12} #{i} {}  uniform={} closed={} |group|={}\n",
            "shuffle",
            s.spec,
            if s.uniform { "yes" } else { "no" },
            if s.closed { "yes" } else { "no" },
            s.group_order
        ));
    }
    out.push_str(&format!(
        "{:<12} {}\n",
        "overall",
        if report.ok() { "PASS" } else { "FAIL" }
    ));
    out
}
