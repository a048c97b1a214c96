//! The aggregate `report` campaign: every subcommand at its default
//! settings, with the results grouped into named claims.

use clap::Args;
use potts_core::numeric::{int, rat};
use serde_json::{json, Value};

use crate::args::{BetaArg, IntRange, RatRange};
use crate::commands::{
    MuSuiteCmd, ConditionCmd, FixedpointCmd, GammaCmd, ModeArg, PhistarCmd, SequencesCmd, SpotcheckCmd,
};
use crate::report::{CheckRecord, Checkpoint, Claim, Status};

#[derive(Args, Debug, Clone)]
pub struct ReportCmd {
    /// Small ranges only (seconds instead of minutes): phi* for d <= 6,
    /// sequences for d <= 6, no exclusion boxes.
    #[arg(long)]
    pub quick: bool,
}

struct Part {
    name: &'static str,
    statement: &'static str,
    checks: Vec<CheckRecord>,
    /// Maps the combined status of the checks to the claim's status.
    invert: bool,
}

impl ReportCmd {
    pub fn echo(&self) -> Value {
        json!({ "quick": self.quick })
    }

    pub fn run(&self, ck: &mut Checkpoint) -> (Vec<CheckRecord>, Vec<Claim>) {
        let dmax = if self.quick { 6 } else { 22 };
        let mut parts = Vec::new();
        let condition = |q, d| ConditionCmd {
            q,
            d: IntRange { lo: d, hi: d },
            alpha: vec![rat(11, 10), rat(3, 2), rat(53, 27), int(3), int(10)],
            alpha_range: Some(RatRange { lo: int(1), hi: rat(53, 27) }),
            budget: 1 << 24,
            all_pairs: false,
            locate: false,
            locate_max: int(1000),
            locate_tol: rat(1, 1_000_000),
        };
        let mut cond = condition(3, 3).run(ck);
        cond.extend(condition(4, 4).run(ck));
        parts.push(Part {
            name: "condition-examples",
            statement: "the two-step condition holds for (q,d) = (3,3), (4,4) on (1, 53/27] and at the alpha grid",
            checks: cond,
            invert: false,
        });
        parts.push(Part {
            name: "phi-star-grid",
            statement: "phi*(d,d0,alpha)^d < alpha for all d0 <= d, alpha in (1, 53/27]",
            checks: PhistarCmd { d: IntRange { lo: 2, hi: dmax }, alpha_range: RatRange { lo: int(1), hi: rat(53, 27) } }
                .run(ck),
            invert: false,
        });
        let seq = SequencesCmd {
            d: IntRange { lo: 3, hi: dmax },
            beta: BetaArg::Critical,
            n: 60,
            round: 10_000,
            mode: ModeArg::Rounded,
            ratio_bound: None,
            csv: None,
        };
        parts.push(Part {
            name: "critical-sequences",
            statement: "rounded bound sequences at beta_* are monotone, sandwiched, and end with u/l <= 53/27",
            checks: seq.run(ck).unwrap_or_else(|e| vec![CheckRecord::error("sequences", e)]),
            invert: false,
        });
        let fixed = |d, betas: Vec<BetaArg>, boxes| FixedpointCmd {
            d,
            beta: betas,
            exclusion_boxes: boxes,
            iterate: true,
            epsilon: rat(1, 1_000_000_000),
            budget: 2_000_000,
            residual: rat(1, 1_000_000_000),
            max_iter: 10_000_000,
        };
        let d2 = [rat(1, 4), rat(1, 2), rat(3, 4)].map(BetaArg::Value).to_vec();
        parts.push(Part {
            name: "d2-fixed-point",
            statement: "no fixed point of the d = 2 bound maps in either exclusion box; limits lie in [459/2000, 1107/2500]",
            checks: fixed(2, d2, !self.quick).run(ck),
            invert: false,
        });
        let mut large = Vec::new();
        for d in [23, 30, 50, 100] {
            large.extend(fixed(d, vec![BetaArg::Critical], false).run(ck));
        }
        parts.push(Part {
            name: "critical-ratio",
            statement: "the limit at beta_* has u/l < 157/80 for d in {23, 30, 50, 100}",
            checks: large,
            invert: false,
        });
        let mut fail = condition(3, 2);
        fail.alpha.clear();
        fail.alpha_range = None;
        fail.locate = true;
        parts.push(Part {
            name: "q3-d2-violation",
            statement: "the two-step condition fails for (q,d) = (3,2) at some alpha > 53/27",
            checks: fail.run(ck),
            invert: true,
        });
        parts.push(Part {
            name: "derivative-identities",
            statement: "closed-form derivatives agree with Richardson-extrapolated differences",
            checks: SpotcheckCmd { all: true, ids: vec![], step: None }
                .run()
                .unwrap_or_else(|e| vec![CheckRecord::error("spotcheck", e)]),
            invert: false,
        });
        parts.push(Part {
            name: "mu-inequalities",
            statement: "the inequalities of the large-d argument hold on mu in [1+1e-6, 1000]",
            checks: MuSuiteCmd { mu_offset: rat(1, 1_000_000), mu_max: int(1000), budget: 200_000 }.run(),
            invert: false,
        });
        parts.push(Part {
            name: "gamma-decrease",
            statement: "gamma(3, 1/2, 2, n) does not increase along n -> n + 2 for n <= 4",
            checks: GammaCmd { q: 3, d: 2, beta: rat(1, 2), n_max: 4, budget: 1 << 28 }.run(ck),
            invert: false,
        });

        let mut checks = Vec::new();
        let mut claims = Vec::new();
        for p in parts {
            let worst = p.checks.iter().map(|c| c.verdict).max().unwrap_or(Status::Unknown);
            let verdict = match (p.invert, worst) {
                (true, Status::Fails) => Status::Holds,
                (true, Status::Holds) => Status::Fails,
                (_, s) => s,
            };
            claims.push(Claim {
                name: p.name.into(),
                statement: p.statement.into(),
                verdict,
                checks: p.checks.iter().map(|c| c.id.clone()).collect(),
            });
            checks.extend(p.checks);
        }
        (checks, claims)
    }
}
