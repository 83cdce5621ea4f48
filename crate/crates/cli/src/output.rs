use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Bumped whenever a file layout changes.
pub const FORMAT_VERSION: u32 = 1;

/// `%.17g`: seventeen significant digits, trailing zeros dropped.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let digits = (16 - exp) as usize;
        trim_zeros(&format!("{x:.digits$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// A CSV table with the run configuration echoed as `# key=value` lines.
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new<C: Serialize>(command: &str, config: &C, columns: &[&str]) -> Self {
        let mut text = format!(
            "# menuforge={}\n# format={FORMAT_VERSION}\n# command={command}\n",
            env!("CARGO_PKG_VERSION")
        );
        if let serde_json::Value::Object(map) = serde_json::to_value(config).expect("serializable") {
            for (k, v) in map {
                let v = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                text.push_str(&format!("# {k}={v}\n"));
            }
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv {
            text,
            width: columns.len(),
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.width, "row width");
        let cells: Vec<String> = cells.iter().map(Cell::render).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_f64(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Output files staged in memory and written only once everything succeeded.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
    stdout: String,
}

impl Outputs {
    pub fn file(&mut self, path: &Path, contents: String) {
        self.files.push((path.to_path_buf(), contents));
    }

    /// Writes to `path`, or to stdout when there is no path.
    pub fn file_or_stdout(&mut self, path: Option<&Path>, contents: String) {
        match path {
            Some(p) => self.file(p, contents),
            None => self.stdout.push_str(&contents),
        }
    }

    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        self.stdout.push_str(&format!("{key}={value}\n"));
    }

    /// Each file goes to a sibling temporary first and is renamed into place.
    pub fn commit(self) -> CliResult<()> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, contents) in &self.files {
            let name = path
                .file_name()
                .ok_or_else(|| CliError::invalid(format!("{} is not a file path", path.display())))?;
            let mut tmp_name = std::ffi::OsString::from(".");
            tmp_name.push(name);
            tmp_name.push(".partial");
            let tmp = path.with_file_name(tmp_name);
            fs::write(&tmp, contents).map_err(|e| CliError::io(path, e))?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))?;
        }
        print!("{}", self.stdout);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(0.1), "0.10000000000000001");
        assert_eq!(fmt_f64(2.5), "2.5");
        assert_eq!(fmt_f64(-3.0), "-3");
        assert_eq!(fmt_f64(1e-7), "9.9999999999999995e-8");
        assert_eq!(fmt_f64(1e20), "1e20");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        for x in [0.1, 1.0 / 3.0, 123456.789, 1e-300, 6.02e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_echoes_config() {
        #[derive(Serialize)]
        struct C {
            m: usize,
            rule: &'static str,
        }
        let mut csv = Csv::new("demo", &C { m: 3, rule: "strict" }, &["seed", "x"]);
        csv.row(&[Cell::Int(1), Cell::Float(0.5)]);
        let text = csv.finish();
        assert!(text.contains("# m=3\n# rule=strict\nseed,x\n1,0.5\n"), "{text}");
    }
}
