//! Run reports and the checkpoint store.

use std::fs;
use std::path::{Path, PathBuf};

use potts_core::numeric::{format_rational, to_f64};
use potts_core::Rational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Unknown,
    Fails,
}

impl Status {
    pub fn from_label(label: &str) -> Status {
        match label {
            "holds" => Status::Holds,
            "fails" => Status::Fails,
            _ => Status::Unknown,
        }
    }

    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Holds
        } else {
            Status::Fails
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Unknown => "unknown",
            Status::Fails => "fails",
        }
    }
}

/// One verified sub-task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub verdict: Status,
    pub summary: String,
    pub detail: Value,
}

impl CheckRecord {
    pub fn new(id: impl Into<String>, verdict: Status, summary: impl Into<String>, detail: Value) -> Self {
        CheckRecord {
            id: id.into(),
            verdict,
            summary: summary.into(),
            detail,
        }
    }

    /// A sub-task that could not be decided because of an error.
    pub fn error(id: impl Into<String>, err: impl std::fmt::Display) -> Self {
        let msg = err.to_string();
        CheckRecord::new(id, Status::Unknown, msg.clone(), json!({ "error": msg }))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub holds: usize,
    pub fails: usize,
    pub unknown: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    pub statement: String,
    pub verdict: Status,
    pub checks: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub config_echo: Value,
    pub checks: Vec<CheckRecord>,
    pub tally: Tally,
    /// Named results assembled from the checks (the `report` command).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<Claim>,
    pub verdict: Status,
    pub workers: usize,
    pub resumed: usize,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn new(command: &str, config_echo: Value, checks: Vec<CheckRecord>, workers: usize) -> Self {
        let mut tally = Tally::default();
        for c in &checks {
            match c.verdict {
                Status::Holds => tally.holds += 1,
                Status::Fails => tally.fails += 1,
                Status::Unknown => tally.unknown += 1,
            }
        }
        let verdict = checks.iter().map(|c| c.verdict).max().unwrap_or(Status::Holds);
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_echo,
            checks,
            tally,
            claims: Vec::new(),
            verdict,
            workers,
            resumed: 0,
            wall_time_seconds: 0.0,
        }
    }

    /// 0 when everything holds, 1 on any failure, 2 when something is
    /// undecided but nothing fails.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Status::Holds => 0,
            Status::Fails => 1,
            Status::Unknown => 2,
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("{:<7} {}  {}\n", c.verdict.label(), c.id, c.summary));
        }
        for c in &self.claims {
            out.push_str(&format!("claim {:<7} {}: {}\n", c.verdict.label(), c.name, c.statement));
        }
        out.push_str(&format!(
            "{}: {} holds, {} fails, {} unknown ({:.1}s, {} workers)\n",
            self.command, self.tally.holds, self.tally.fails, self.tally.unknown, self.wall_time_seconds, self.workers
        ));
        out
    }
}

/// Exact `p/q` string plus a decimal for reading.
pub fn num(x: &Rational) -> Value {
    json!({ "exact": format_rational(x), "decimal": to_f64(x) })
}

/// Per-sub-task results stored as one JSON file each, tied to the config
/// that produced them.
pub struct Checkpoint {
    dir: Option<PathBuf>,
    pub resumed: usize,
}

impl Checkpoint {
    pub fn none() -> Self {
        Checkpoint { dir: None, resumed: 0 }
    }

    /// Opens (or creates) `dir` for `config`. A directory written for a
    /// different config is refused.
    pub fn open(dir: &Path, command: &str, config: &Value) -> Result<Self, String> {
        fs::create_dir_all(dir).map_err(|e| format!("checkpoint {}: {e}", dir.display()))?;
        let stamp = json!({ "schemaVersion": SCHEMA_VERSION, "command": command, "config": config });
        let path = dir.join("config.json");
        match fs::read_to_string(&path) {
            Ok(text) => {
                let old: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                if old != stamp {
                    return Err(format!(
                        "checkpoint directory {} was written by a different configuration",
                        dir.display()
                    ));
                }
            }
            Err(_) => {
                fs::write(&path, serde_json::to_string_pretty(&stamp).expect("json"))
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
        }
        Ok(Checkpoint {
            dir: Some(dir.to_path_buf()),
            resumed: 0,
        })
    }

    fn file(&self, id: &str) -> Option<PathBuf> {
        let name: String = id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
            .collect();
        self.dir.as_ref().map(|d| d.join(format!("{name}.json")))
    }

    /// Returns the stored record for `id`, or runs `f` and stores its result.
    /// Records that are `unknown` because of an error are not stored.
    pub fn run(&mut self, id: &str, f: impl FnOnce() -> CheckRecord) -> CheckRecord {
        let path = self.file(id);
        if let Some(p) = &path {
            if let Some(rec) = fs::read_to_string(p)
                .ok()
                .and_then(|t| serde_json::from_str::<CheckRecord>(&t).ok())
                .filter(|r| r.id == id)
            {
                self.resumed += 1;
                return rec;
            }
        }
        let rec = f();
        if let Some(p) = path {
            if rec.detail.get("error").is_none() {
                // A failed write only costs a recomputation next time.
                let _ = fs::write(p, serde_json::to_string(&rec).expect("json"));
            }
        }
        rec
    }

    /// Like [`Checkpoint::run`] for a batch that is computed together (in
    /// parallel); only missing ids are passed to `f`, in order.
    pub fn run_batch(
        &mut self,
        ids: &[String],
        f: impl FnOnce(&[usize]) -> Vec<CheckRecord>,
    ) -> Vec<CheckRecord> {
        let mut out: Vec<Option<CheckRecord>> = ids
            .iter()
            .map(|id| {
                let p = self.file(id)?;
                fs::read_to_string(p)
                    .ok()
                    .and_then(|t| serde_json::from_str::<CheckRecord>(&t).ok())
                    .filter(|r| &r.id == id)
            })
            .collect();
        self.resumed += out.iter().filter(|r| r.is_some()).count();
        let missing: Vec<usize> = (0..ids.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            for (i, rec) in missing.iter().zip(f(&missing)) {
                if let Some(p) = self.file(&ids[*i]) {
                    if rec.detail.get("error").is_none() {
                        let _ = fs::write(p, serde_json::to_string(&rec).expect("json"));
                    }
                }
                out[*i] = Some(rec);
            }
        }
        out.into_iter().map(|r| r.expect("every id computed")).collect()
    }
}
