//! Scenario files: one `key = value` per line, `#` starts a comment.
//!
//! Program paths are relative to the scenario file. The keyword
//! `toy-universal` names the built-in universal deterministic machine.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_rational::Ratio;
use thiserror::Error;

use shadowlab::machine::{parse_named_program, AbstractMachine, MachineKind, ProgramError};
use shadowlab::oracles::{parse_list, Budgets, SetSpec};
use shadowlab::shift::Config;
use shadowlab::universal::{ToyUniversal, TOY_UNIVERSAL_NAME};
use shadowlab::{DyadicRational, Vertex};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("key {key}: {message}")]
    Value { key: String, message: String },
    #[error("{path}: {source}")]
    Program { path: PathBuf, source: ProgramError },
    #[error("missing key {0}")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

/// A machine named by a scenario.
#[derive(Clone)]
pub struct MachineRef {
    pub label: String,
    pub machine: Arc<dyn AbstractMachine>,
}

impl fmt::Debug for MachineRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MachineRef({})", self.label)
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    /// The probabilistic machine `M`.
    pub m: Option<MachineRef>,
    /// The deterministic machine `D` run by the cats.
    pub d: MachineRef,
    /// Probabilistic machines for bound tables.
    pub family: Vec<MachineRef>,
    pub config: Config,
    pub s: Option<SetSpec>,
    pub s_prime: Vertex,
    pub declared_probability: Option<DyadicRational>,
    pub strict: bool,
    pub budgets: Budgets,
    /// Sets listed for bound tables.
    pub sets: Vec<Vertex>,
    pub tick_samples: Vec<u64>,
    /// Expected verdict, used by scenario suites.
    pub expect: Option<String>,
}

fn load_machine(base: &Path, value: &str, key: &str) -> Result<MachineRef, ScenarioError> {
    if value == TOY_UNIVERSAL_NAME {
        return Ok(MachineRef {
            label: value.into(),
            machine: Arc::new(ToyUniversal),
        });
    }
    let path = base.join(value);
    let text = fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
        path: path.clone(),
        source,
    })?;
    let name = Path::new(value)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| key.into());
    let program = parse_named_program(&name, &text).map_err(|source| ScenarioError::Program {
        path: path.clone(),
        source,
    })?;
    Ok(MachineRef {
        label: value.into(),
        machine: shadowlab::machine::share(program),
    })
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ScenarioError> {
    value.parse().map_err(|_| ScenarioError::Value {
        key: key.into(),
        message: format!("expected a number, got {value:?}"),
    })
}

fn list(key: &str, value: &str) -> Result<Vec<u64>, ScenarioError> {
    parse_list(value).map_err(|e| ScenarioError::Value {
        key: key.into(),
        message: e.to_string(),
    })
}

/// Parses `{} {0} {1,2}` into a family of sets.
fn set_family(key: &str, value: &str) -> Result<Vec<Vertex>, ScenarioError> {
    let mut out = Vec::new();
    let mut rest = value.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('{').ok_or_else(|| ScenarioError::Value {
            key: key.into(),
            message: format!("expected '{{' at {rest:?}"),
        })?;
        let (inner, after) = open.split_once('}').ok_or_else(|| ScenarioError::Value {
            key: key.into(),
            message: "unclosed '{'".into(),
        })?;
        out.push(Vertex::from_elements(list(key, inner)?));
        rest = after.trim_start_matches([',', ';']).trim();
    }
    Ok(out)
}

fn boolean(key: &str, value: &str) -> Result<bool, ScenarioError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ScenarioError::Value {
            key: key.into(),
            message: format!("expected true or false, got {value:?}"),
        }),
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let default_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Scenario::parse(&text, base, &default_name)
    }

    /// Parses scenario text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path, default_name: &str) -> Result<Scenario, ScenarioError> {
        let mut sc = Scenario {
            name: default_name.to_string(),
            m: None,
            d: MachineRef {
                label: TOY_UNIVERSAL_NAME.into(),
                machine: Arc::new(ToyUniversal),
            },
            family: Vec::new(),
            config: Config::default(),
            s: None,
            s_prime: Vertex::empty(),
            declared_probability: None,
            strict: false,
            budgets: Budgets::default(),
            sets: Vec::new(),
            tick_samples: Vec::new(),
            expect: None,
        };
        let mut s_base: Option<Vec<u64>> = None;
        let (mut s_mod, mut s_residues, mut s_threshold) = (None, None, 0u64);
        let mut theorem_l = false;
        let (mut l_c0, mut l_c1) = (0.0f64, 0.0f64);
        let mut seen = BTreeSet::new();

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ScenarioError::Syntax {
                line: i + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(ScenarioError::Syntax {
                    line: i + 1,
                    message: format!("duplicate key {key}"),
                });
            }
            match key {
                "name" => sc.name = value.into(),
                "m" => sc.m = Some(load_machine(base, value, key)?),
                "d" => sc.d = load_machine(base, value, key)?,
                "family" => {
                    sc.family = value
                        .split(',')
                        .map(|p| load_machine(base, p.trim(), key))
                        .collect::<Result<_, _>>()?
                }
                "k" => sc.config.k = number(key, value)?,
                "l" if value == "theorem" => theorem_l = true,
                "l" => sc.config.l = number(key, value)?,
                "l_c0" => l_c0 = number(key, value)?,
                "l_c1" => l_c1 = number(key, value)?,
                "alpha" => {
                    sc.config.alpha = value.parse::<Ratio<u64>>().map_err(|_| ScenarioError::Value {
                        key: key.into(),
                        message: format!("expected a rational, got {value:?}"),
                    })?
                }
                "ticks" => sc.config.ant_tick_budget = number(key, value)?,
                "cat_steps" => sc.config.cat_step_budget = number(key, value)?,
                "max_cascade" => sc.config.max_cascade_length = number(key, value)?,
                "lattice_cap" => sc.config.lattice_cap = number(key, value)?,
                "wk_cap" => sc.config.wk_cap = number(key, value)?,
                "s" => s_base = Some(list(key, value)?),
                "s_mod" => s_mod = Some(number::<u64>(key, value)?),
                "s_residues" => s_residues = Some(list(key, value)?),
                "s_threshold" => s_threshold = number(key, value)?,
                "s_prime" => sc.s_prime = Vertex::from_elements(list(key, value)?),
                "declared_probability" => {
                    sc.declared_probability = Some(value.parse().map_err(|_| ScenarioError::Value {
                        key: key.into(),
                        message: format!("expected a dyadic rational, got {value:?}"),
                    })?)
                }
                "strict" => sc.strict = boolean(key, value)?,
                "bit_depth" => sc.budgets.bit_depth = number(key, value)?,
                "step_budget" => sc.budgets.step_budget = number(key, value)?,
                "max_len" => sc.budgets.max_len = number(key, value)?,
                "sets" => sc.sets = set_family(key, value)?,
                "tick_samples" => sc.tick_samples = list(key, value)?,
                "expect" => sc.expect = Some(value.to_ascii_uppercase()),
                _ => {
                    return Err(ScenarioError::Syntax {
                        line: i + 1,
                        message: format!("unknown key {key}"),
                    })
                }
            }
        }

        if theorem_l {
            sc.config.l = Config::theorem_mode_l(sc.config.k, sc.config.alpha, l_c0, l_c1)
                .ok_or_else(|| ScenarioError::Invalid("theorem-mode l does not fit".into()))?;
        }
        sc.s = match (s_base, s_mod, s_residues) {
            (None, None, None) => None,
            (base, Some(m), Some(r)) => Some(
                SetSpec::with_tail(
                    Vertex::from_elements(base.unwrap_or_default()),
                    m,
                    r.into_iter().collect(),
                    s_threshold,
                )
                .map_err(|e| ScenarioError::Invalid(e.to_string()))?,
            ),
            (Some(base), None, None) => Some(SetSpec::finite(Vertex::from_elements(base))),
            _ => {
                return Err(ScenarioError::Invalid(
                    "s_mod and s_residues must be given together".into(),
                ))
            }
        };
        if let Some(s) = &sc.s {
            if !s.contains_all(&sc.s_prime) {
                return Err(ScenarioError::Invalid("s_prime is not a subset of s".into()));
            }
        }
        if let Some(m) = &sc.m {
            if m.machine.kind() != MachineKind::Probabilistic {
                return Err(ScenarioError::Invalid(format!("m = {} is not probabilistic", m.label)));
            }
        }
        if sc.d.machine.kind() != MachineKind::Deterministic {
            return Err(ScenarioError::Invalid(format!("d = {} is not deterministic", sc.d.label)));
        }
        sc.config
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(sc)
    }

    pub fn require_m(&self) -> Result<&MachineRef, ScenarioError> {
        self.m.as_ref().ok_or(ScenarioError::Missing("m"))
    }

    pub fn require_s(&self) -> Result<&SetSpec, ScenarioError> {
        self.s.as_ref().ok_or(ScenarioError::Missing("s"))
    }
}
