//! One function per subcommand; each returns its checks in a fixed order so
//! reports are reproducible across worker counts and resumed runs.

use std::path::PathBuf;

use clap::Args;
use num_traits::{One, Signed};
use potts_core::bounds::critical::{mu_suite_checks, MuSuiteConfig};
use potts_core::bounds::derivatives::{default_step, derivative_spotcheck, identities};
use potts_core::bounds::{
    default_exclusion_config, exclusion_boxes, fixed_point_exclusion, fixed_point_iterate, iterate_bounds,
    sequence_csv_rows, verify_sequence_report, Check, SeqMode, SequenceReport,
};
use potts_core::condition::{
    check_condition_at_with, check_condition_over_with, check_phi_star, locate_condition_failure, ConditionOptions,
    EnumOptions, MAX_Q,
};
use potts_core::model::{gamma_exact, ModelParams};
use potts_core::numeric::{format_rational, rat, to_f64};
use potts_core::resolver::{replay_exclusion, EvalOptions};
use potts_core::Rational;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{rational, BetaArg, IntRange, RatRange};
use crate::report::{num, CheckRecord, Checkpoint, Status};

fn alpha_point(s: &str) -> Result<Rational, String> {
    let a = rational(s)?;
    if a <= Rational::one() {
        return Err("alpha must exceed 1".into());
    }
    Ok(a)
}

fn alpha_range(s: &str) -> Result<RatRange, String> {
    let r: RatRange = s.parse()?;
    if r.lo < Rational::one() {
        return Err("alpha range must start at 1 or above".into());
    }
    Ok(r)
}

fn degree_range(s: &str) -> Result<IntRange, String> {
    let r: IntRange = s.parse()?;
    if r.lo < 2 {
        return Err("d must be at least 2".into());
    }
    Ok(r)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise")
}

#[derive(Args, Debug, Clone)]
pub struct ConditionCmd {
    /// Number of colours.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(3..=MAX_Q as u64))]
    pub q: u64,
    /// Branching degree, a single value or an inclusive range `a:b`.
    #[arg(long = "d", visible_alias = "d-range", value_parser = degree_range)]
    pub d: IntRange,
    /// Point values of alpha (comma separated), each greater than 1.
    #[arg(long, value_parser = alpha_point, value_delimiter = ',', required_unless_present = "alpha_range")]
    pub alpha: Vec<Rational>,
    /// Certify the whole range `lo:hi` (left end excluded).
    #[arg(long, value_parser = alpha_range)]
    pub alpha_range: Option<RatRange>,
    /// Maximum number of extremal tuples per colour pair.
    #[arg(long, default_value_t = 1 << 24)]
    pub budget: u128,
    /// Check every ordered colour pair instead of one representative.
    #[arg(long)]
    pub all_pairs: bool,
    /// Also search for a violation above 53/27 (doubling, then bisection).
    #[arg(long)]
    pub locate: bool,
    #[arg(long, default_value = "1000", value_parser = rational)]
    pub locate_max: Rational,
    #[arg(long, default_value = "1/1000000", value_parser = rational)]
    pub locate_tol: Rational,
}

impl ConditionCmd {
    pub fn echo(&self) -> Value {
        json!({
            "q": self.q,
            "d": format!("{}:{}", self.d.lo, self.d.hi),
            "alpha": self.alpha.iter().map(format_rational).collect::<Vec<_>>(),
            "alphaRange": self.alpha_range.as_ref().map(|r| r.to_string()),
            "budget": self.budget.to_string(),
            "allPairs": self.all_pairs,
            "locate": self.locate,
            "locateMax": format_rational(&self.locate_max),
            "locateTol": format_rational(&self.locate_tol),
        })
    }

    pub fn run(&self, ck: &mut Checkpoint) -> Vec<CheckRecord> {
        let q = self.q as usize;
        let opts = ConditionOptions {
            all_pairs: self.all_pairs,
            enumeration: EnumOptions { cap: self.budget, ..EnumOptions::default() },
        };
        let mut out = Vec::new();
        for d in self.d.values() {
            if let Some(r) = &self.alpha_range {
                let id = format!("condition/q{q}-d{d}/range-{r}");
                out.push(ck.run(&id, || match check_condition_over_with(q, d, &r.lo, &r.hi, &opts) {
                    Ok((v, rep)) => CheckRecord::new(
                        &id,
                        Status::from_label(v.label()),
                        format!("{} on {} [{}], {} tuples", v.label(), r.left_open(), rep.certificate_kind, rep.tuples_checked),
                        json!({ "report": rep, "verdict": v }),
                    ),
                    Err(e) => CheckRecord::error(&id, e),
                }));
            }
            for a in &self.alpha {
                let id = format!("condition/q{q}-d{d}/alpha-{}", format_rational(a));
                out.push(ck.run(&id, || match check_condition_at_with(q, d, a, &opts) {
                    Ok((ok, rep)) => CheckRecord::new(
                        &id,
                        Status::from_bool(ok),
                        format!("alpha - h^d = {:.6e}, worst tuple {:?}", to_f64(&rep.margin), rep.worst_tuple),
                        json!({ "report": rep, "margin": num(&rep.margin) }),
                    ),
                    Err(e) => CheckRecord::error(&id, e),
                }));
            }
            if self.locate {
                let id = format!("condition/q{q}-d{d}/locate");
                out.push(ck.run(&id, || {
                    match locate_condition_failure(q, d, &rat(53, 27), &self.locate_max, &self.locate_tol) {
                        Ok(Some(f)) => CheckRecord::new(
                            &id,
                            Status::Fails,
                            format!(
                                "violated at alpha = {} ({:.6}), holds at {}; h^d - alpha = {:.3e}",
                                format_rational(&f.fails_at),
                                to_f64(&f.fails_at),
                                format_rational(&f.holds_at),
                                to_f64(&f.excess)
                            ),
                            json!({ "failure": f, "failsAt": num(&f.fails_at), "holdsAt": num(&f.holds_at) }),
                        ),
                        Ok(None) => CheckRecord::new(
                            &id,
                            Status::Holds,
                            format!("no violation found on the scan up to {}", format_rational(&self.locate_max)),
                            Value::Null,
                        ),
                        Err(e) => CheckRecord::error(&id, e),
                    }
                }));
            }
        }
        out
    }
}

fn check_status(c: Check) -> Status {
    match c {
        Check::Pass => Status::Holds,
        Check::Fail => Status::Fails,
        _ => Status::Unknown,
    }
}

fn report_status(r: &SequenceReport) -> Status {
    [r.u_nonincreasing, r.l_nondecreasing, r.sandwich, r.ratio_within_bound]
        .into_iter()
        .map(check_status)
        .max()
        .unwrap_or(Status::Holds)
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Rounded,
    Exact,
}

#[derive(Args, Debug, Clone)]
pub struct SequencesCmd {
    #[arg(long = "d", visible_alias = "d-range", value_parser = degree_range)]
    pub d: IntRange,
    /// `critical` or a rational in [0, 1].
    #[arg(long, default_value = "critical")]
    pub beta: BetaArg,
    /// Number of iterations.
    #[arg(long, default_value_t = 60)]
    pub n: usize,
    /// Rounding precision P for the rounded mode.
    #[arg(long, default_value_t = 10_000)]
    pub round: u64,
    #[arg(long, value_enum, default_value = "rounded")]
    pub mode: ModeArg,
    /// Bound on the terminal ratio u_n / l_n; defaults to 53/27 at the
    /// critical interaction.
    #[arg(long, value_parser = rational)]
    pub ratio_bound: Option<Rational>,
    /// Write the sequences as CSV (`d,n,u_lo,u_hi,l_lo,l_hi,ratio`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl SequencesCmd {
    fn bound(&self) -> Option<Rational> {
        self.ratio_bound.clone().or_else(|| self.beta.is_critical().then(|| rat(53, 27)))
    }

    pub fn echo(&self) -> Value {
        json!({
            "d": format!("{}:{}", self.d.lo, self.d.hi),
            "beta": self.beta.to_string(),
            "n": self.n,
            "round": self.round,
            "mode": format!("{:?}", self.mode).to_lowercase(),
            "ratioBound": self.bound().map(|b| format_rational(&b)),
        })
    }

    fn seq_mode(&self) -> SeqMode {
        match self.mode {
            ModeArg::Rounded => SeqMode::rounded(self.round),
            ModeArg::Exact => SeqMode::exact(),
        }
    }

    /// Runs every `d`; the CSV (if requested) always covers all of them.
    pub fn run(&self, ck: &mut Checkpoint) -> Result<Vec<CheckRecord>, String> {
        let bound = self.bound();
        let mut writer = match &self.csv {
            Some(p) => Some(csv::Writer::from_path(p).map_err(|e| format!("{}: {e}", p.display()))?),
            None => None,
        };
        if let Some(w) = writer.as_mut() {
            w.write_record(["d", "n", "u_lo", "u_hi", "l_lo", "l_hi", "ratio"]).map_err(|e| e.to_string())?;
        }
        let mut out = Vec::new();
        for d in self.d.values() {
            let beta = self.beta.resolve(3, d);
            let id = format!("sequences/d{d}");
            let seq = match iterate_bounds(d as u32, &beta, self.n, &self.seq_mode()) {
                Ok(s) => s,
                Err(e) => {
                    out.push(CheckRecord::error(&id, e));
                    continue;
                }
            };
            if let Some(w) = writer.as_mut() {
                for row in sequence_csv_rows(&seq) {
                    let mut rec = vec![d.to_string()];
                    rec.extend(row);
                    w.write_record(&rec).map_err(|e| e.to_string())?;
                }
            }
            out.push(ck.run(&id, || {
                let rep = verify_sequence_report(&seq, bound.as_ref());
                let ratio = rep.terminal_ratio.as_ref().map(|r| to_f64(r.hi()));
                let summary = match ratio {
                    Some(r) => format!("beta = {}, u_n/l_n <= {r:.6}", format_rational(&beta)),
                    None => format!("beta = {}, l_n may vanish", format_rational(&beta)),
                };
                CheckRecord::new(&id, report_status(&rep), summary, json!({ "report": rep, "beta": num(&beta) }))
            }));
        }
        if let Some(mut w) = writer {
            w.flush().map_err(|e| e.to_string())?;
        }
        Ok(out)
    }
}

#[derive(Args, Debug, Clone)]
pub struct FixedpointCmd {
    #[arg(long = "d", default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..))]
    pub d: u32,
    /// Interactions for --iterate (comma separated; `critical` allowed).
    #[arg(long, value_delimiter = ',', default_value = "critical")]
    pub beta: Vec<BetaArg>,
    /// Certify the two d = 2 exclusion boxes.
    #[arg(long)]
    pub exclusion_boxes: bool,
    /// Iterate the bound maps to their common limit.
    #[arg(long)]
    pub iterate: bool,
    /// Open box sides are moved inward by this amount.
    #[arg(long, default_value = "1e-9", value_parser = rational)]
    pub epsilon: Rational,
    /// Branch-and-prune box budget per exclusion box.
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: usize,
    /// Largest accepted residual of an iterate.
    #[arg(long, default_value = "1e-9", value_parser = rational)]
    pub residual: Rational,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_iter: usize,
}

impl FixedpointCmd {
    pub fn echo(&self) -> Value {
        json!({
            "d": self.d,
            "beta": self.beta.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            "exclusionBoxes": self.exclusion_boxes,
            "iterate": self.iterate,
            "epsilon": format_rational(&self.epsilon),
            "budget": self.budget,
            "residual": format_rational(&self.residual),
            "maxIter": self.max_iter,
        })
    }

    pub fn run(&self, ck: &mut Checkpoint) -> Vec<CheckRecord> {
        let mut out = Vec::new();
        if self.exclusion_boxes {
            for b in exclusion_boxes() {
                let id = format!("fixedpoint/d{}/box-{}", self.d, b.name);
                out.push(ck.run(&id, || {
                    match fixed_point_exclusion(self.d, &b, &self.epsilon, &default_exclusion_config(self.budget)) {
                        Ok(rep) => {
                            let replayed = rep
                                .verdict
                                .certificate()
                                .map(|c| replay_exclusion(c, &EvalOptions::default()).unwrap_or(false));
                            let status = match replayed {
                                Some(true) => Status::Holds,
                                Some(false) => Status::Unknown,
                                None => Status::from_label(rep.verdict.label()),
                            };
                            let steps = rep.verdict.certificate().map_or(0, |c| c.steps.len());
                            CheckRecord::new(
                                &id,
                                status,
                                format!("{} ({steps} steps, replayed: {replayed:?})", rep.verdict.label()),
                                json!({ "report": rep, "replayed": replayed }),
                            )
                        }
                        Err(e) => CheckRecord::error(&id, e),
                    }
                }));
            }
        }
        if self.iterate {
            for b in &self.beta {
                let beta = b.resolve(3, self.d as usize);
                let id = format!("fixedpoint/d{}/iterate-beta-{}", self.d, format_rational(&beta));
                out.push(ck.run(&id, || self.iterate_one(&id, &beta, b.is_critical())));
            }
        }
        out
    }

    /// Holds when the residuals are within tolerance, the limit is ordered,
    /// and (d = 2) it lies in [459/2000, 1107/2500] or (critical, d >= 23)
    /// u/l < 157/80.
    fn iterate_one(&self, id: &str, beta: &Rational, critical: bool) -> CheckRecord {
        let tol = &self.residual / Rational::from_integer(1000.into());
        let fp = match fixed_point_iterate(self.d, beta, &tol, self.max_iter) {
            Ok(fp) => fp,
            Err(e) => return CheckRecord::error(id, e),
        };
        let residual_ok = fp.residual_u <= self.residual && fp.residual_l <= self.residual;
        let ratio = fp.l.is_positive().then(|| &fp.u / &fp.l);
        let mut claims = vec![("residual", residual_ok), ("ordered", fp.ordered)];
        if self.d == 2 {
            let (lo, hi) = (rat(459, 2000), rat(1107, 2500));
            claims.push(("bracket", fp.l >= lo && fp.u <= hi));
        }
        if critical && self.d >= 23 {
            claims.push(("ratio<157/80", ratio.as_ref().is_some_and(|r| r < &rat(157, 80))));
        }
        let ok = claims.iter().all(|c| c.1);
        let status = if ok {
            Status::Holds
        } else if residual_ok {
            Status::Fails
        } else {
            Status::Unknown
        };
        CheckRecord::new(
            id,
            status,
            format!(
                "u = {:.9}, l = {:.9}, u/l = {:.6}",
                to_f64(&fp.u),
                to_f64(&fp.l),
                ratio.as_ref().map_or(f64::NAN, to_f64)
            ),
            json!({
                "fixedPoint": fp,
                "ratio": ratio.as_ref().map(num),
                "claims": claims.iter().map(|(k, v)| json!({ "claim": k, "holds": v })).collect::<Vec<_>>(),
            }),
        )
    }
}

#[derive(Args, Debug, Clone)]
pub struct GammaCmd {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(3..=MAX_Q as u64))]
    pub q: u64,
    #[arg(long = "d", default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    pub d: u64,
    #[arg(long, value_parser = rational)]
    pub beta: Rational,
    #[arg(long, default_value_t = 3)]
    pub n_max: usize,
    /// Largest number of child multisets generated per level.
    #[arg(long, default_value_t = 1 << 28)]
    pub budget: u128,
}

impl GammaCmd {
    pub fn echo(&self) -> Value {
        json!({
            "q": self.q,
            "d": self.d,
            "beta": format_rational(&self.beta),
            "nMax": self.n_max,
            "budget": self.budget.to_string(),
        })
    }

    /// One row per height, then whether γ does not increase along n -> n+2.
    pub fn run(&self, ck: &mut Checkpoint) -> Vec<CheckRecord> {
        let mut out = Vec::new();
        let mut values: Vec<Option<Rational>> = Vec::new();
        for n in 1..=self.n_max {
            let id = format!("gamma/n{n}");
            let rec = ck.run(&id, || {
                let params = match ModelParams::new(self.q as usize, self.d as usize, self.beta.clone(), n) {
                    Ok(p) => p,
                    Err(e) => return CheckRecord::error(&id, e),
                };
                match gamma_exact(&params, self.budget) {
                    Ok(g) => CheckRecord::new(
                        &id,
                        Status::Holds,
                        format!("gamma = {:.9} ({} distinct marginals)", to_f64(&g.value), g.distinct_marginals),
                        json!({ "gamma": num(&g.value), "result": g }),
                    ),
                    Err(e) => CheckRecord::error(&id, e),
                }
            });
            values.push(
                rec.detail
                    .pointer("/gamma/exact")
                    .and_then(|v| v.as_str())
                    .and_then(|s| rational(s).ok()),
            );
            out.push(rec);
        }
        if self.n_max >= 3 {
            let mut status = Status::Holds;
            let mut pairs = Vec::new();
            for n in 1..=self.n_max - 2 {
                let (a, b) = (&values[n - 1], &values[n + 1]);
                let s = match (a, b) {
                    (Some(a), Some(b)) => Status::from_bool(b <= a),
                    _ => Status::Unknown,
                };
                let strict = matches!((a, b), (Some(a), Some(b)) if b < a);
                status = status.max(s);
                pairs.push(json!({ "n": n, "status": s, "strict": strict }));
            }
            out.push(CheckRecord::new(
                "gamma/non-increasing-n-to-n+2",
                status,
                format!("{} pairs", pairs.len()),
                json!({ "pairs": pairs }),
            ));
        }
        out
    }
}

#[derive(Args, Debug, Clone)]
pub struct SpotcheckCmd {
    /// Run every identity (the default when no --id is given).
    #[arg(long)]
    pub all: bool,
    /// Identity ids to run.
    #[arg(long = "id", value_delimiter = ',')]
    pub ids: Vec<String>,
    /// Override the finite-difference step.
    #[arg(long)]
    pub step: Option<f64>,
}

impl SpotcheckCmd {
    pub fn echo(&self) -> Value {
        json!({ "all": self.all || self.ids.is_empty(), "ids": self.ids, "step": self.step })
    }

    pub fn run(&self) -> Result<Vec<CheckRecord>, String> {
        let all = identities();
        let chosen: Vec<_> = if self.all || self.ids.is_empty() {
            all
        } else {
            let mut v = Vec::new();
            for id in &self.ids {
                v.push(*all.iter().find(|i| i.id == id).ok_or_else(|| format!("unknown identity {id:?}"))?);
            }
            v
        };
        let mut out = Vec::new();
        for ident in chosen {
            for (k, p) in ident.samples.iter().enumerate() {
                let id = format!("spotcheck/{}/{k}", ident.id);
                let step = self.step.unwrap_or_else(|| default_step(ident.order));
                out.push(match derivative_spotcheck(&ident, p, step) {
                    Ok(c) => CheckRecord::new(
                        &id,
                        Status::from_bool(c.pass),
                        format!("residual {:.2e} <= {:.2e}: {}", c.residual, c.tolerance, c.pass),
                        to_value(&c),
                    ),
                    Err(e) => CheckRecord::error(&id, e),
                });
            }
        }
        Ok(out)
    }
}

#[derive(Args, Debug, Clone)]
pub struct PhistarCmd {
    #[arg(long = "d-range", visible_alias = "d", default_value = "2:22", value_parser = degree_range)]
    pub d: IntRange,
    #[arg(long, default_value = "1:53/27", value_parser = alpha_range)]
    pub alpha_range: RatRange,
}

impl PhistarCmd {
    pub fn echo(&self) -> Value {
        json!({ "d": format!("{}:{}", self.d.lo, self.d.hi), "alphaRange": self.alpha_range.to_string() })
    }

    /// Every `(d, d0)` pair in parallel; each is checkpointed on its own.
    pub fn run(&self, ck: &mut Checkpoint) -> Vec<CheckRecord> {
        let jobs: Vec<(usize, usize)> = self.d.values().into_iter().flat_map(|d| (0..=d).map(move |d0| (d, d0))).collect();
        let ids: Vec<String> = jobs.iter().map(|(d, d0)| format!("phistar/d{d}-d0-{d0}")).collect();
        let r = &self.alpha_range;
        ck.run_batch(&ids, |missing| {
            missing
                .par_iter()
                .map(|&i| {
                    let (d, d0) = jobs[i];
                    match check_phi_star(d, d0, &r.lo, &r.hi) {
                        Ok(v) => CheckRecord::new(&ids[i], Status::from_label(v.label()), format!("{} on {}", v.label(), r.left_open()), to_value(&v)),
                        Err(e) => CheckRecord::error(&ids[i], e),
                    }
                })
                .collect()
        })
    }
}

#[derive(Args, Debug, Clone)]
pub struct MuSuiteCmd {
    #[arg(long, default_value = "1/1000000", value_parser = rational)]
    pub mu_offset: Rational,
    #[arg(long, default_value = "1000", value_parser = rational)]
    pub mu_max: Rational,
    #[arg(long, default_value_t = 200_000)]
    pub budget: usize,
}

impl MuSuiteCmd {
    pub fn echo(&self) -> Value {
        json!({ "muOffset": format_rational(&self.mu_offset), "muMax": format_rational(&self.mu_max), "budget": self.budget })
    }

    pub fn run(&self) -> Vec<CheckRecord> {
        let cfg = MuSuiteConfig { mu_offset: self.mu_offset.clone(), mu_max: self.mu_max.clone(), budget: self.budget };
        match mu_suite_checks(&cfg) {
            Ok(checks) => checks
                .into_iter()
                .map(|c| {
                    let id = format!("mu-suite/{}", c.name);
                    let (lo, hi) = c.range.to_f64_pair();
                    CheckRecord::new(&id, Status::from_label(c.label()), format!("{} on [{lo}, {hi}]", c.claim), to_value(&c))
                })
                .collect(),
            Err(e) => vec![CheckRecord::error("mu-suite", e)],
        }
    }
}
