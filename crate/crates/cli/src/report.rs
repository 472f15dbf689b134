//! Flat `key = value` reports.

use std::fmt::Display;

#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report::default();
        r.put("tool", "reebkit");
        r.put("version", env!("CARGO_PKG_VERSION"));
        r.put("command", command);
        r
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, fmt_f64(value));
    }

    pub fn point(&mut self, key: impl Into<String>, value: &[f64]) {
        self.put(key, fmt_point(value));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Round-trip representation, identical across runs and platforms.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

pub fn fmt_point(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
    format!("[{}]", parts.join(", "))
}
