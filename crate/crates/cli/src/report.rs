use std::fmt::Write as _;

use clap::ValueEnum;

use crate::input::Input;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

/// How a subcommand's verdict maps onto the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Computed,
    Negative,
    Inconclusive,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Computed => 0,
            Outcome::Negative => 1,
            Outcome::Inconclusive => 3,
        }
    }

    /// The worse of two outcomes; inconclusive dominates negative.
    pub fn and(self, other: Outcome) -> Outcome {
        self.max(other)
    }
}

/// A report: a reproducibility header, `key: value` facts and tables.
pub struct Report {
    format: Format,
    out: String,
    /// Facts become comments so the body stays a parseable document.
    commented: bool,
}

impl Report {
    pub fn new(format: Format, command: &str, seed: Option<u64>, inputs: &[Input]) -> Self {
        let mut out = String::new();
        let _ = writeln!(out, "# fraisse {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# command: {command}");
        match seed {
            Some(s) => {
                let _ = writeln!(out, "# seed: {s}");
            }
            None => out.push_str("# seed: none (deterministic)\n"),
        }
        for i in inputs {
            let _ = writeln!(out, "# input {}: {} sha256:{}", i.role, i.path, i.digest);
        }
        Report { format, out, commented: false }
    }

    pub fn document(command: &str, seed: Option<u64>, inputs: &[Input]) -> Self {
        Report { commented: true, ..Report::new(Format::Text, command, seed, inputs) }
    }

    pub fn note(&mut self, text: &str) {
        for line in text.lines() {
            let _ = writeln!(self.out, "# {line}");
        }
    }

    pub fn fact(&mut self, key: &str, value: impl std::fmt::Display) {
        if self.commented {
            let _ = writeln!(self.out, "# {key}: {value}");
            return;
        }
        match self.format {
            Format::Text => {
                let _ = writeln!(self.out, "{key}: {value}");
            }
            Format::Csv => {
                let _ = writeln!(self.out, "{},{}", csv_field(key), csv_field(&value.to_string()));
            }
        }
    }

    /// Verbatim text, e.g. a structure document. Commented out in CSV.
    pub fn raw(&mut self, text: &str) {
        match self.format {
            Format::Text => self.out.push_str(text),
            Format::Csv => self.note(text),
        }
    }

    pub fn table(&mut self, t: &Table) {
        self.out.push('\n');
        match self.format {
            Format::Text => {
                let mut widths: Vec<usize> = t.columns.iter().map(|c| c.len()).collect();
                for row in &t.rows {
                    for (w, cell) in widths.iter_mut().zip(row) {
                        *w = (*w).max(cell.chars().count());
                    }
                }
                let mut emit = |cells: &[String]| {
                    let line: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
                    let _ = writeln!(self.out, "{}", line.join("  ").trim_end());
                };
                emit(&t.columns);
                for row in &t.rows {
                    emit(row);
                }
            }
            Format::Csv => {
                let line = |cells: &[String]| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
                let _ = writeln!(self.out, "{}", line(&t.columns));
                for row in &t.rows {
                    let _ = writeln!(self.out, "{}", line(row));
                }
            }
        }
        self.out.push('\n');
    }

    pub fn into_string(self) -> String {
        self.out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_separators() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn text_tables_are_aligned() {
        let mut r = Report::new(Format::Text, "t", None, &[]);
        let mut t = Table::new(&["n", "value"]);
        t.row(vec!["10".into(), "x".into()]);
        t.row(vec!["2".into(), "yy".into()]);
        r.table(&t);
        let out = r.into_string();
        assert!(out.contains("n   value\n10  x\n2   yy\n"));
    }

    #[test]
    fn outcomes_combine_to_the_worst() {
        assert_eq!(Outcome::Computed.and(Outcome::Negative), Outcome::Negative);
        assert_eq!(Outcome::Negative.and(Outcome::Inconclusive), Outcome::Inconclusive);
        assert_eq!(Outcome::Inconclusive.code(), 3);
    }
}
