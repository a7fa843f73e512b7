use std::fs;
use std::path::{Path, PathBuf};

use ising_kawasaki::util::{fmt_sig, round_sig};
use serde_json::Value;

use crate::CliError;

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn json_string(v: &impl serde::Serialize) -> String {
    let v = round_json(serde_json::to_value(v).expect("serializable"));
    let mut s = serde_json::to_string_pretty(&v).expect("json");
    s.push('\n');
    s
}

/// CSV builder with 12-significant-digit floats.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            text: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let parts: Vec<String> = cells.iter().map(Cell::render).collect();
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub enum Cell {
    F(f64),
    OptF(Option<f64>),
    I(u64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_sig(*x),
            Cell::OptF(x) => x.map(fmt_sig).unwrap_or_default(),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

/// Files written during a run; removed again if the run fails.
pub struct Outputs {
    dir: Option<PathBuf>,
    written: Vec<PathBuf>,
    created_dir: bool,
}

impl Outputs {
    pub fn new(dir: Option<&Path>) -> Result<Self, CliError> {
        let mut created_dir = false;
        if let Some(d) = dir {
            if !d.exists() {
                fs::create_dir_all(d)?;
                created_dir = true;
            }
        }
        Ok(Outputs {
            dir: dir.map(Path::to_path_buf),
            written: Vec::new(),
            created_dir,
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            let path = d.join(name);
            self.written.push(path.clone());
            fs::write(&path, contents)?;
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }

    pub fn discard(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            if let Some(d) = &self.dir {
                let _ = fs::remove_dir(d);
            }
        }
    }
}
