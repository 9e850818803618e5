//! Run reports printed by the command-line front end.
//!
//! The default rendering is line-oriented `key=value` text; [`RunReport::to_json`]
//! produces one JSON object with the same fields. Reals are printed in
//! shortest round-trip form, so identical results render identically.

use std::fmt::Write as _;

use serde::Serialize;

/// A labeled result value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Reals(Vec<f64>),
    Indices(Vec<usize>),
    Count(u64),
    Flag(bool),
    Label(String),
}

impl Value {
    fn render(&self) -> String {
        fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
            items.iter().map(f).collect::<Vec<_>>().join(",")
        }
        match self {
            Value::Real(x) => real(*x),
            Value::Reals(xs) => join(xs, |x| real(*x)),
            Value::Indices(is) => join(is, |i| i.to_string()),
            Value::Count(c) => c.to_string(),
            Value::Flag(b) => b.to_string(),
            Value::Label(s) => s.clone(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Value::Real(x) => x.is_finite(),
            Value::Reals(xs) => xs.iter().all(|x| x.is_finite()),
            _ => true,
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultEntry {
    pub name: String,
    pub value: Value,
}

/// Outcome of one cross-check over a family of instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Largest deviation observed, in the units the tolerance is stated in.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub instances: usize,
    /// Seed of the first instance that failed.
    pub failing_seed: Option<u64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub result: Vec<ResultEntry>,
    pub checks: Vec<Check>,
    pub elapsed_ms: f64,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: Vec::new(),
            seed: None,
            result: Vec::new(),
            checks: Vec::new(),
            elapsed_ms: 0.0,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: Value) {
        self.result.push(ResultEntry {
            name: name.into(),
            value,
        });
    }

    pub fn push_real(&mut self, name: impl Into<String>, x: f64) {
        self.push(name, Value::Real(x));
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.result
            .iter()
            .find(|r| r.name == name)
            .map(|r| &r.value)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_checks_pass() {
            0
        } else {
            1
        }
    }

    /// True when every numeric field is finite.
    pub fn is_finite(&self) -> bool {
        self.elapsed_ms.is_finite()
            && self.result.iter().all(|r| r.value.is_finite())
            && self
                .checks
                .iter()
                .all(|c| c.max_deviation.is_finite() && c.tolerance.is_finite())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command={}", self.command);
        for input in &self.inputs {
            let _ = writeln!(out, "input={input}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed={seed}");
        }
        for r in &self.result {
            let _ = writeln!(out, "result.{}={}", r.name, r.value.render());
        }
        for c in &self.checks {
            let key = format!("check.{}", c.name);
            let _ = writeln!(out, "{key}.status={}", if c.pass { "pass" } else { "fail" });
            let _ = writeln!(out, "{key}.max_deviation={}", real(c.max_deviation));
            let _ = writeln!(out, "{key}.tolerance={}", real(c.tolerance));
            let _ = writeln!(out, "{key}.instances={}", c.instances);
            if let Some(seed) = c.failing_seed {
                let _ = writeln!(out, "{key}.failing_seed={seed}");
            }
            if let Some(note) = &c.note {
                let _ = writeln!(out, "{key}.note={note}");
            }
        }
        let _ = writeln!(out, "elapsed_ms={}", real(self.elapsed_ms));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut r = RunReport::new("expdet");
        r.inputs.push("u.csv".into());
        r.push_real("closed_form", 0.75);
        r.push("selected", Value::Indices(vec![0, 2]));
        r.checks.push(Check {
            name: "closed_form".into(),
            pass: true,
            max_deviation: 1e-16,
            tolerance: 1e-9,
            instances: 3,
            failing_seed: None,
            note: None,
        });
        r
    }

    #[test]
    fn text_is_key_value() {
        let text = sample().to_text();
        assert!(text.lines().all(|l| l.contains('=')));
        assert!(text.contains("result.closed_form=0.75\n"));
        assert!(text.contains("result.selected=0,2\n"));
        assert!(text.contains("check.closed_form.max_deviation=1e-16\n"));
        assert!(text.ends_with("elapsed_ms=0.0\n"));
    }

    #[test]
    fn json_carries_same_fields() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["command"], "expdet");
        assert_eq!(v["result"][0]["name"], "closed_form");
        assert_eq!(v["result"][0]["value"], 0.75);
        assert_eq!(v["checks"][0]["pass"], true);
    }

    #[test]
    fn exit_code_follows_checks() {
        let mut r = sample();
        assert_eq!(r.exit_code(), 0);
        r.checks[0].pass = false;
        assert_eq!(r.exit_code(), 1);
    }
}
