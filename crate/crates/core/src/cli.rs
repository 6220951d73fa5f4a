//! Command-line front end. Every subcommand produces a [`Report`]; the exit
//! status is 0 when all its checks pass, 1 otherwise, and 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::capturing::{check_delta_system, extract_delta_system, find_capture, parse_family, Arity, CaptureQuery};
use crate::cohen::{force_capture, parse_condition, parse_schedule, run_generic, standardize, CohenCondition};
use crate::knaster::{build_colorings, coloring_bridge, p1_amalgam_check, p1_scenarios, pn_is_condition, pn_standard_family, pn_union_check, verify_colorings, PnCondition, PnError};
use crate::report::{Check, Report};
use crate::scheme::{build_scheme, load_scheme, verify_lemmas, Scheme};
use crate::types::{generate_type, largest_top, FinSet, OrdinalCode, PartitionSchedule, RootSchedule, WidthSchedule};

#[derive(Debug, Parser)]
#[command(name = "capture-lab", version, about = "Build and query finite construction schemes")]
pub struct Cli {
    /// Emit one JSON object per line instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the report (in the selected format) to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the canonical scheme of a generated type and write it to a file.
    Build {
        #[command(flatten)]
        typ: TypeArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check every axiom and structural lemma of a scheme file.
    Verify { scheme: PathBuf },
    /// Search for the least capturing member of a Δ-system family.
    Capture {
        scheme: PathBuf,
        /// One set per line.
        #[arg(long)]
        family: PathBuf,
        /// Extract the largest increasing Δ-subsystem first.
        #[arg(long)]
        extract: bool,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Build the level colorings and check the coloring bridge.
    Color {
        scheme: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
        /// Write the coloring table here.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Check a finite set against the no-capture posets.
    Pn {
        scheme: PathBuf,
        /// The candidate condition, e.g. "0,3".
        #[arg(long)]
        set: FinSet,
        #[arg(long)]
        n: usize,
        /// Also build a standardized family above this level and test unions.
        #[arg(long)]
        standard_level: Option<usize>,
        /// Random amalgamation scenarios to check (arity 1).
        #[arg(long, default_value_t = 0)]
        scenarios: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Amalgamate conditions of the forcing into one that captures their targets.
    Force {
        #[command(flatten)]
        base: BaseArgs,
        /// Condition files, one per target.
        #[arg(long = "cond", required = true)]
        conds: Vec<PathBuf>,
        /// Comma separated target ordinals, one per condition.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<OrdinalCode>,
        #[command(flatten)]
        query: QueryArgs,
        /// Write the amalgamated condition here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a goal schedule along a decreasing chain of conditions.
    Generic {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, default_value_t = 50)]
        fuel: usize,
        #[arg(long, default_value = "w*8")]
        cap: OrdinalCode,
        /// Write the final condition here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct TypeArgs {
    /// Width schedule: "k+1", "2k", or a list n_1,n_2,...
    #[arg(long = "n", default_value = "k+1")]
    pub widths: WidthSchedule,
    /// Root schedule: "zero", "diag", "cycle:a,b", or a list r_1,r_2,...
    #[arg(long = "r", default_value = "diag")]
    pub roots: RootSchedule,
    /// Top level; defaults to the largest level within --max-size.
    #[arg(long = "K")]
    pub top: Option<usize>,
    #[arg(long, default_value_t = 5000)]
    pub max_size: usize,
}

/// The scheme on ω used by the forcing commands: a file or a generated type.
#[derive(Debug, Args)]
pub struct BaseArgs {
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    #[arg(long = "base-n", default_value = "k+1")]
    pub widths: WidthSchedule,
    #[arg(long = "base-r", default_value = crate::cohen::RUN_BASE_ROOTS)]
    pub roots: RootSchedule,
    #[arg(long = "base-K", default_value_t = crate::cohen::RUN_BASE_TOP)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, conflicts_with = "full")]
    pub arity: Option<usize>,
    /// Use the width n_k of the witnessing level as the arity.
    #[arg(long)]
    pub full: bool,
    /// Witness levels must exceed this.
    #[arg(long, default_value_t = 0)]
    pub min_level: usize,
    /// Block assignment of levels 1.. and the allowed block, e.g. "0,1,0,1:1".
    #[arg(long)]
    pub blocks: Option<String>,
    /// Allow any increasing choice of pieces.
    #[arg(long)]
    pub any_pieces: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Scheme, CliError> {
    load_scheme(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl TypeArgs {
    fn scheme(&self) -> Result<Scheme, CliError> {
        let typ = match self.top {
            Some(k) => generate_type(&self.widths, &self.roots, k),
            None => largest_top(&self.widths, &self.roots, self.max_size),
        }
        .map_err(usage)?;
        build_scheme(&typ, typ.top()).map_err(domain)
    }
}

impl BaseArgs {
    fn scheme(&self) -> Result<Scheme, CliError> {
        match &self.scheme {
            Some(p) => load(p),
            None => {
                let typ = generate_type(&self.widths, &self.roots, self.top).map_err(usage)?;
                build_scheme(&typ, self.top).map_err(domain)
            }
        }
    }
}

impl QueryArgs {
    fn query(&self, default_arity: usize) -> Result<CaptureQuery, CliError> {
        let mut q = if self.full { CaptureQuery::full() } else { CaptureQuery::fixed(self.arity.unwrap_or(default_arity)) };
        q = q.min_level(self.min_level);
        q.any_pieces = self.any_pieces;
        if let Some(arg) = &self.blocks {
            let (assign, b) = arg.rsplit_once(':').ok_or_else(|| usage("--blocks expects <levels>:<block>"))?;
            let assign: Vec<usize> = assign.split(',').map(|t| t.trim().parse().map_err(usage)).collect::<Result<_, _>>()?;
            let count = assign.iter().max().map_or(1, |m| m + 1);
            let parts = PartitionSchedule::new(assign, count).map_err(usage)?;
            q = q.in_block(parts, b.trim().parse().map_err(usage)?);
        }
        q.validate().map_err(usage)?;
        Ok(q)
    }
}

/// Runs one command and returns its report; artifacts are written on the way.
pub fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Build { typ, out } => {
            let s = typ.scheme()?;
            write(out, &s.to_text())?;
            let mut r = Report::new("build");
            r.record("type", s.typ().to_text().trim_end().replace('\n', " | "));
            r.record("members", s.member_count().to_string());
            r.record("written", out.display().to_string());
            Ok(r)
        }
        Command::Verify { scheme } => {
            let s = load(scheme)?;
            let mut r = Report::new("verify");
            r.extend(s.verify_axioms());
            r.extend(verify_lemmas(&s));
            Ok(r)
        }
        Command::Capture { scheme, family, extract, query } => {
            let s = load(scheme)?;
            let sets = parse_family(&read(family)?).map_err(usage)?;
            let mut r = Report::new("capture");
            let fam = if *extract {
                let (idx, fam) = extract_delta_system(&sets).map_err(domain)?;
                r.record("extracted", format!("{idx:?}"));
                fam
            } else {
                check_delta_system(sets).map_err(domain)?
            };
            let q = query.query(fam.len())?;
            let search = find_capture(&s, &fam, &q).map_err(domain)?;
            let st = &search.stats;
            r.record(
                "stats",
                format!(
                    "levels {} members {} rejected root {} piece {} transport {}",
                    st.levels_scanned, st.members_scanned, st.rejected_root, st.rejected_piece, st.rejected_transport
                ),
            );
            let mut c = Check::new("capture witness exists");
            c.count(1);
            match &search.witness {
                Some(w) => r.record("witness", w.to_string()),
                None => c.fail("no member captures the family under this query"),
            }
            r.push(c);
            Ok(r)
        }
        Command::Color { scheme, max_arity, table } => {
            let s = load(scheme)?;
            let t = build_colorings(&s);
            if let Some(p) = table {
                write(p, &t.to_text())?;
            }
            let mut r = Report::new("color");
            r.extend(verify_colorings(&s, &t));
            r.extend(coloring_bridge(&s, &t, *max_arity));
            r.record("bounds", format!("{:?}", t.bounds()));
            Ok(r)
        }
        Command::Pn { scheme, set, n, standard_level, scenarios, seed } => {
            let s = load(scheme)?;
            let mut r = Report::new("pn");
            let mut c = Check::new(format!("{set} is a condition for n={n}"));
            c.count(1);
            if let Err(e) = pn_is_condition(&s, set, *n) {
                c.fail(e.to_string());
            }
            let base_ok = c.passed();
            r.push(c);
            if let (Some(level), true) = (standard_level, base_ok) {
                let base = PnCondition::new(&s, set.clone(), *n).map_err(domain)?;
                let fam = pn_standard_family(&s, &base, *level, n + 1).map_err(domain)?;
                for (i, p) in fam.iter().enumerate() {
                    r.record("copy", format!("{i}: {}", p.set()));
                }
                let mut small = Check::new(format!("unions of {n} standardized copies are conditions"));
                for k in 0..fam.len() {
                    let rest: Vec<PnCondition> = fam.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, p)| p.clone()).collect();
                    small.count(1);
                    if let Err(e) = pn_union_check(&s, &rest, *n) {
                        small.fail(e.to_string());
                    }
                }
                r.push(small);
                match pn_union_check(&s, &fam, *n) {
                    Err(PnError::Captured(cx)) => r.record("union of all copies", cx.to_string()),
                    Err(e) => return Err(domain(e)),
                    Ok(q) => r.record("union of all copies", format!("{} is a condition", q.set())),
                }
            }
            if *scenarios > 0 {
                let mut c = Check::new("amalgamation scenarios");
                let list = p1_scenarios(&s, *scenarios, *seed);
                for sc in &list {
                    c.count(1);
                    match p1_amalgam_check(&s, sc) {
                        Ok(true) => {}
                        Ok(false) => c.fail(format!("union fails for F={}", sc.f)),
                        Err(e) => c.fail(e.to_string()),
                    }
                }
                if list.len() < *scenarios {
                    c.fail(format!("only {} of {scenarios} scenarios could be drawn", list.len()));
                }
                r.push(c);
            }
            Ok(r)
        }
        Command::Force { base, conds, targets, query, out } => {
            if conds.len() != targets.len() {
                return Err(usage(format!("{} conditions but {} targets", conds.len(), targets.len())));
            }
            let s = base.scheme()?;
            let ps: Vec<CohenCondition> = conds
                .iter()
                .map(|p| parse_condition(&s, &read(p)?).map_err(|e| usage(format!("{}: {e}", p.display()))))
                .collect::<Result<_, _>>()?;
            let fam = standardize(&s, &ps, targets).map_err(domain)?;
            let q = query.query(ps.len())?;
            let forced = force_capture(&s, &fam, &q).map_err(domain)?;
            if let Some(p) = out {
                write(p, &forced.q.to_text(&s))?;
            }
            let mut r = Report::new("force");
            let mut c = Check::new("forced condition extends every input and captures the targets");
            c.count(ps.len() as u64);
            r.push(c);
            let img: Vec<String> = forced.image.iter().map(|o| o.to_string()).collect();
            r.record("capture", format!("level {}; F*={}; image={{{}}}; arity {}", forced.level, s.set(forced.f_star), img.join(","), forced.arity));
            r.record("condition", forced.q.describe(&s));
            for (i, w) in forced.extensions.iter().enumerate() {
                let ws: Vec<String> = w.witnesses.iter().map(|(d, m)| format!("{d}:{}", s.set(*m))).collect();
                r.record("extends", format!("p_{i} via {}", ws.join(" ")));
            }
            Ok(r)
        }
        Command::Generic { base, schedule, fuel, cap, out } => {
            let goals = parse_schedule(&read(schedule)?).map_err(usage)?;
            if goals.iter().any(|g| matches!(g, crate::cohen::Goal::ForceCapture { mode, .. } if matches!(mode.arity, Arity::Fixed(n) if n < 2))) {
                return Err(usage("capture goals need at least two targets or n >= 2"));
            }
            let s = base.scheme()?;
            let run = run_generic(&s, &goals, *fuel, *cap).map_err(domain)?;
            let last = run.chain.last().expect("chain starts at the empty condition");
            if let Some(p) = out {
                write(p, &last.to_text(&s))?;
            }
            let mut r = Report::new("generic");
            for st in &run.statuses {
                r.record("goal", format!("{} [fuel {}]: {}", st.goal, st.fuel_used, st.detail));
            }
            for (i, c) in run.chain.iter().enumerate() {
                let lvl = c.top().map_or("-".to_string(), |t| t.level.to_string());
                r.record("step", format!("{i} (top level {lvl}): {}", c.describe(&s)));
            }
            r.record("condition", last.describe(&s));
            r.record("fragment", format!("{} labeled sets", run.fragment.len()));
            r.extend(run.check);
            Ok(r)
        }
    }
}

/// Parses `args`, runs the command, prints the report, and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(report) => {
            let text = if cli.json { report.render_lines() } else { report.render_text() };
            print!("{text}");
            if let Some(p) = &cli.report {
                if let Err(e) = write(p, &text) {
                    eprintln!("error: {e}");
                    return 2;
                }
            }
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
