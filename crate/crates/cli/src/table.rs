//! CSV output with a `# key=value` header.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Default)]
pub struct Table {
    header: Vec<(String, String)>,
    text: String,
}

impl Table {
    pub fn new(subcommand: &str) -> Self {
        let mut t = Self::default();
        t.echo("artifact", env!("CARGO_PKG_NAME"));
        t.echo("version", env!("CARGO_PKG_VERSION"));
        t.echo("subcommand", subcommand);
        t
    }

    pub fn echo(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.header.push((key.to_owned(), value.to_string()));
        self
    }

    /// Starts a CSV block. Blocks after the first are preceded by a
    /// `# block=<name>` marker line.
    pub fn block(&mut self, name: &str, columns: &[&str]) -> &mut Self {
        if !self.text.is_empty() {
            let _ = writeln!(self.text, "# block={name}");
        }
        self.text.push_str(&columns.join(","));
        self.text.push('\n');
        self
    }

    pub fn row(&mut self, cells: &[String]) -> &mut Self {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.text);
        out
    }

    pub fn write_to(&self, path: Option<&Path>) -> io::Result<()> {
        let text = self.render();
        match path {
            Some(p) => std::fs::write(p, text),
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}
