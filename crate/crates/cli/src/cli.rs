use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use shadowlab::oracles::{
    bound_table, cat_equivalence, complexity_h, complexity_i, enumeration_probability, OracleError,
};
use shadowlab::shift::{audit_trace, simulate};
use shadowlab::DyadicRational;

use crate::harness::{lemma1_check, shadow_verify, HarnessError, Verdict};
use crate::scenario::Scenario;

pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "shadowlab", version, about = "Shadow-position simulator and oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the shift simulation and write its trace.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Trace output (one JSON record per line).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Bracket H_M(S) for the scenario's M and S.
    OracleH(Common),
    /// Search the minimal input length I_D(S).
    OracleI(Common),
    /// Compare I(S) <= k with the cat criterion for k = 0..=max-k.
    CatEquiv {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        max_k: u32,
    },
    /// Tabulate H against I over the scenario's set family.
    BoundTable {
        #[command(flatten)]
        common: Common,
        /// Table output (tab-separated, with header).
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Check for a shift between S' and S.
    Lemma1Check {
        #[command(flatten)]
        common: Common,
        /// Require S' ⊊ X ⊊ S.
        #[arg(long)]
        strict: bool,
    },
    /// Check the shadow machine's measure identity.
    ShadowVerify {
        #[command(flatten)]
        common: Common,
        /// Ticks to check; all ticks when omitted.
        #[arg(long, value_delimiter = ',')]
        ticks_sample: Vec<u64>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Also write the `FIELD: value` report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    ticks: Option<u64>,
    #[arg(long)]
    cat_steps: Option<u64>,
    #[arg(long)]
    bit_depth: Option<u64>,
    #[arg(long)]
    step_budget: Option<u64>,
    #[arg(long)]
    max_len: Option<u32>,
}

impl Common {
    fn load(&self) -> Result<Scenario, String> {
        let mut sc = Scenario::load(&self.scenario).map_err(|e| e.to_string())?;
        if let Some(k) = self.k {
            sc.config.k = k;
        }
        if let Some(l) = self.l {
            sc.config.l = l;
        }
        if let Some(t) = self.ticks {
            sc.config.ant_tick_budget = t;
        }
        if let Some(c) = self.cat_steps {
            sc.config.cat_step_budget = c;
        }
        if let Some(b) = self.bit_depth {
            sc.budgets.bit_depth = b;
        }
        if let Some(b) = self.step_budget {
            sc.budgets.step_budget = b;
        }
        if let Some(n) = self.max_len {
            sc.budgets.max_len = n;
        }
        sc.config.validate().map_err(|e| e.to_string())?;
        Ok(sc)
    }
}

struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    fn new(sc: &Scenario, command: &str) -> Report {
        Report {
            lines: vec![
                ("SCENARIO".into(), sc.name.clone()),
                ("COMMAND".into(), command.into()),
            ],
        }
    }

    fn add(&mut self, field: &str, value: impl ToString) {
        self.lines.push((field.into(), value.to_string()));
    }

    fn extend(&mut self, lines: Vec<(String, String)>) {
        self.lines.extend(lines);
    }

    fn render(&self) -> String {
        self.lines
            .iter()
            .map(|(k, v)| format!("{k}: {v}\n"))
            .collect()
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Runs the command line `argv` (program name first), writing reports to
/// `out` and diagnostics to `err`. Returns the process exit code: 0 pass,
/// 1 fail, 2 inconclusive, 3 usage or configuration error.
pub fn run_cli_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

/// [`run_cli_with`] on the process's standard streams.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run_cli_with(argv, &mut out, &mut err)
}

fn finish(report: &Report, common: &Common, out: &mut dyn Write, code: i32) -> Result<i32, String> {
    let text = report.render();
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    if let Some(path) = &common.report {
        write_file(path, &text)?;
    }
    Ok(code)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, String> {
    match command {
        Command::Simulate { common, trace } => {
            let sc = common.load()?;
            let m = sc.require_m().map_err(|e| e.to_string())?;
            let result = simulate::<DyadicRational>(m.machine.as_ref(), Arc::clone(&sc.d.machine), sc.config.clone())
                .map_err(|e| e.to_string())?;
            if let Some(path) = &trace {
                write_file(path, &result.trace.to_jsonl())?;
            }
            let epsilon = DyadicRational::pow2_neg(sc.config.k as u64);
            let mut report = Report::new(&sc, "simulate");
            report.add("TICKS", sc.config.ant_tick_budget);
            report.add("ANTS", result.population.len());
            report.add("SHIFTS", result.events.len());
            report.add(
                "CATS_NOT_FOUND",
                result.events.iter().filter(|e| e.cat_index.is_none()).count(),
            );
            for k in 0..=sc.config.wk_cap {
                report.add(&format!("W_{k}"), result.population.measure_wk::<DyadicRational>(k));
            }
            let code = match audit_trace(&result.trace, &epsilon) {
                Ok(_) => {
                    report.add("AUDIT", "ok");
                    0
                }
                Err(e) => {
                    report.add("AUDIT", format!("failed: {e}"));
                    1
                }
            };
            finish(&report, &common, out, code)
        }
        Command::OracleH(common) => {
            let sc = common.load()?;
            let m = sc.require_m().map_err(|e| e.to_string())?;
            let s = sc.require_s().map_err(|e| e.to_string())?;
            let p = enumeration_probability::<DyadicRational>(
                m.machine.as_ref(),
                s,
                sc.budgets.bit_depth,
                sc.budgets.step_budget,
            );
            let h = complexity_h(m.machine.as_ref(), s, sc.budgets.bit_depth, sc.budgets.step_budget);
            let mut report = Report::new(&sc, "oracle-h");
            report.add("S", s);
            report.add("PROBABILITY", &p);
            report.add("H", h);
            report.add("EXACT", h.is_exact());
            finish(&report, &common, out, if h.is_exact() { 0 } else { 2 })
        }
        Command::OracleI(common) => {
            let sc = common.load()?;
            let s = sc.require_s().map_err(|e| e.to_string())?;
            let r = complexity_i(sc.d.machine.as_ref(), s, sc.budgets.max_len, sc.budgets.step_budget)
                .map_err(|e| e.to_string())?;
            let mut report = Report::new(&sc, "oracle-i");
            report.add("S", s);
            report.add("D", &sc.d.label);
            report.add("I", r.length.map_or("none".to_string(), |n| n.to_string()));
            report.add("INPUT", r.input.as_ref().map_or("none".to_string(), |x| x.to_string()));
            report.add("BUDGET_LIMITED", r.budget_limited);
            finish(&report, &common, out, if r.budget_limited { 2 } else { 0 })
        }
        Command::CatEquiv { common, max_k } => {
            let sc = common.load()?;
            let s = sc.require_s().map_err(|e| e.to_string())?;
            let mut report = Report::new(&sc, "cat-equiv");
            report.add("S", s);
            let mut verdict = Verdict::Pass;
            for k in 0..=max_k {
                let value = match cat_equivalence(Arc::clone(&sc.d.machine), s, k, sc.budgets.step_budget) {
                    Ok(true) => "agree".to_string(),
                    Ok(false) => {
                        verdict = Verdict::Fail;
                        "disagree".to_string()
                    }
                    Err(OracleError::InconclusiveBudget) => {
                        if verdict == Verdict::Pass {
                            verdict = Verdict::Inconclusive;
                        }
                        "inconclusive".to_string()
                    }
                    Err(e) => return Err(e.to_string()),
                };
                report.add(&format!("K_{k}"), value);
            }
            report.lines.insert(2, ("VERDICT".into(), verdict.as_str().into()));
            finish(&report, &common, out, verdict.exit_code())
        }
        Command::BoundTable { common, table } => {
            let sc = common.load()?;
            let mut family = sc.family.clone();
            if family.is_empty() {
                family.extend(sc.m.clone());
            }
            if family.is_empty() || sc.sets.is_empty() {
                return Err("bound-table needs family (or m) and sets".into());
            }
            let machines: Vec<_> = family.iter().map(|m| Arc::clone(&m.machine)).collect();
            let t = bound_table(sc.d.machine.as_ref(), &machines, &sc.sets, sc.budgets);
            let tsv = t.to_tsv();
            if let Some(path) = &table {
                write_file(path, &tsv)?;
            }
            let mut report = Report::new(&sc, "bound-table");
            report.add("ROWS", t.rows.len());
            report.add("FINITE_H_ROWS", t.rows.iter().filter(|r| r.h.hi.is_finite()).count());
            report.add("INCONCLUSIVE_ROWS", t.rows.iter().filter(|r| r.inconclusive).count());
            report.add(
                "WORST_SLACK",
                t.worst_slack().map_or("n/a".to_string(), |x| format!("{x:.4}")),
            );
            if table.is_none() {
                out.write_all(tsv.as_bytes()).map_err(|e| e.to_string())?;
            }
            finish(&report, &common, out, 0)
        }
        Command::Lemma1Check { common, strict } => {
            let mut sc = common.load()?;
            sc.strict |= strict;
            let mut report = Report::new(&sc, "lemma1-check");
            let code = match lemma1_check(&sc) {
                Ok(r) => {
                    report.extend(r.lines());
                    r.verdict.exit_code()
                }
                Err(HarnessError::RejectedScenario(reason)) => {
                    report.add("VERDICT", "REJECTED");
                    report.add("REASON", reason);
                    Verdict::Fail.exit_code()
                }
                Err(e) => return Err(e.to_string()),
            };
            finish(&report, &common, out, code)
        }
        Command::ShadowVerify { common, ticks_sample } => {
            let sc = common.load()?;
            let samples = if ticks_sample.is_empty() {
                sc.tick_samples.clone()
            } else {
                ticks_sample
            };
            let r = shadow_verify(&sc, &samples).map_err(|e| e.to_string())?;
            let mut report = Report::new(&sc, "shadow-verify");
            report.extend(r.lines());
            finish(&report, &common, out, r.verdict().exit_code())
        }
    }
}
