//! `ret`: analysis and planning of three-armed retention-of-effect
//! non-inferiority trials.
//!
//! Subcommands: `test` (run the Wald-type test on trial data), `plan`
//! (sample sizes via the planning pipeline), `alloc` (optimal allocation),
//! `power` (exact or Monte-Carlo power), and `reproduce` (regenerate the
//! published benchmark tables with diffs).
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 budget
//! exceeded. Set `RET_WORKERS` to bound the compute thread count.

mod ingest;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use output::{render, Format, SCHEMA_VERSION};
use reproduce::TableId;
use ret_core::*;

#[derive(Parser)]
#[command(
    name = "ret",
    version,
    about = "Three-armed non-inferiority trials under retention-of-effect hypotheses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Binary,
    BinaryLogit,
    Poisson,
    Normal,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EfficacyArg {
    Identity,
    Logit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Restricted,
    Unrestricted,
}

impl From<ModeArg> for VarianceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Restricted => VarianceMode::Restricted,
            ModeArg::Unrestricted => VarianceMode::Unrestricted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Mc,
}

#[derive(Args)]
struct FamilyOpts {
    /// Endpoint family.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Efficacy variant for the binary family.
    #[arg(long = "h", value_enum, default_value_t = EfficacyArg::Identity)]
    efficacy: EfficacyArg,
    /// Common variance tau^2 for the normal family (required for planning and
    /// power; pooled from the data when testing).
    #[arg(long)]
    tau2: Option<f64>,
}

impl FamilyOpts {
    fn build(&self, for_data: bool) -> Result<Arc<dyn Family>> {
        // The normal family carries its variance nuisance, so it is
        // constructed directly; everything else resolves through the registry.
        if self.family == FamilyArg::Normal {
            return match (self.tau2, for_data) {
                (Some(t2), _) if t2 > 0.0 => Ok(Arc::new(NormalFamily::with_variance(t2))),
                (Some(t2), _) => Err(Error::Invalid(format!("tau2 = {t2} must be positive"))),
                (None, true) => Ok(Arc::new(NormalFamily::pooled())),
                (None, false) => Err(Error::Invalid(
                    "the normal family needs --tau2 for planning and power".into(),
                )),
            };
        }
        let name = match (self.family, self.efficacy) {
            (FamilyArg::Binary, EfficacyArg::Identity) => "binary",
            (FamilyArg::Binary, EfficacyArg::Logit) | (FamilyArg::BinaryLogit, _) => "binary-logit",
            (FamilyArg::Poisson, _) => "poisson",
            (FamilyArg::Exponential, _) => "exponential",
            (FamilyArg::Normal, _) => unreachable!(),
        };
        Registry::builtin().get(name)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the retention-of-effect Wald test on trial data.
    Test {
        #[command(flatten)]
        family: FamilyOpts,
        /// Retention margin.
        #[arg(long)]
        delta: f64,
        /// Significance level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Variance estimation mode.
        #[arg(long, value_enum, default_value_t = ModeArg::Restricted)]
        mode: ModeArg,
        /// Input CSV: 'group,n,stat' with an optional 'stat2' column, or raw 'group,value'.
        #[arg(long)]
        input: PathBuf,
    },
    /// Required sample size for a planning alternative.
    Plan {
        #[command(flatten)]
        family: FamilyOpts,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Target power.
        #[arg(long, default_value_t = 0.8)]
        power: f64,
        /// Alternative parameters theta_T,theta_R,theta_P.
        #[arg(long)]
        alt: String,
        /// Allocation: 'optimal', weights 'wT,wR,wP', or a ratio like
        /// '2:2:1' or '1:D:1-D'.
        #[arg(long, default_value = "optimal")]
        weights: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Restricted)]
        mode: ModeArg,
    },
    /// Optimal sample allocation under an alternative.
    Alloc {
        #[command(flatten)]
        family: FamilyOpts,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        alt: String,
    },
    /// Exact-enumeration or Monte-Carlo power of the test.
    Power {
        #[command(flatten)]
        family: FamilyOpts,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Data-generating parameters theta_T,theta_R,theta_P.
        #[arg(long)]
        gen: String,
        /// Group sizes n_T,n_R,n_P.
        #[arg(long)]
        n: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Restricted)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        /// Monte-Carlo replications.
        #[arg(long, default_value_t = 1_000_000)]
        reps: u64,
        #[arg(long, default_value_t = 20090)]
        seed: u64,
        /// Enumeration budget (outcome triples).
        #[arg(long, default_value_t = ret_core::power_engine::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Regenerate a published benchmark table or figure series with a diff
    /// against the embedded reference values.
    Reproduce {
        /// Table id.
        #[arg(value_enum)]
        table: TableId,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = ret_core::power_engine::DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 20090)]
        seed: u64,
    },
}

fn parse_triple(s: &str, what: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Invalid(format!(
            "{what} must be three comma-separated values, got '{s}'"
        )));
    }
    let mut out = [0.0; 3];
    for (k, p) in parts.iter().enumerate() {
        out[k] = p
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("cannot parse {what} component '{p}'")))?;
    }
    Ok(out)
}

/// Allocation argument: 'optimal', explicit weights 'a,b,c' (summing to 1),
/// or a ratio 'a:b:c' where components may be 'D' or '1-D'.
fn parse_weights(
    s: &str,
    delta: f64,
    hyp: &RetentionHypothesis,
    alt: &Alternative,
) -> Result<Weights> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("optimal") {
        return optimal_allocation(hyp, alt);
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Invalid(format!("ratio '{s}' must have three parts")));
        }
        let mut r = [0.0; 3];
        for (k, p) in parts.iter().enumerate() {
            let p = p.trim();
            r[k] = if p.eq_ignore_ascii_case("d") {
                delta
            } else if p.eq_ignore_ascii_case("1-d") {
                1.0 - delta
            } else {
                p.parse()
                    .map_err(|_| Error::Invalid(format!("cannot parse ratio component '{p}'")))?
            };
        }
        return Weights::from_ratio(r[0], r[1], r[2]);
    }
    let w = parse_triple(s, "weights")?;
    Weights::new(w[0], w[1], w[2])
}

fn group_sizes(s: &str) -> Result<[u64; 3]> {
    let t = parse_triple(s, "group sizes")?;
    let mut out = [0u64; 3];
    for k in 0..3 {
        if t[k] < 1.0 || t[k].fract() != 0.0 {
            return Err(Error::Invalid(format!(
                "group size {} is not a positive integer",
                t[k]
            )));
        }
        out[k] = t[k] as u64;
    }
    Ok(out)
}

fn main() {
    if let Ok(workers) = std::env::var("RET_WORKERS") {
        if let Ok(w) = workers.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli.command, cli.format) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(command: Command, format: Format) -> Result<String> {
    match command {
        Command::Test {
            family,
            delta,
            alpha,
            mode,
            input,
        } => {
            let fam = family.build(true)?;
            let data = ingest::ingest_group_data(&input, fam.as_ref())?;
            let hyp = RetentionHypothesis::new(fam, delta)?;
            let report = run_test(&hyp, &data, alpha, mode.into())?;
            let value = json!({
                "schema": SCHEMA_VERSION,
                "command": "test",
                "family": hyp.family().name(),
                "delta": delta,
                "n": [data.test.n, data.reference.n, data.placebo.n],
                "report": serde_json::to_value(&report).expect("serializable"),
            });
            let human = format!(
                "RET {} variance | family {} delta {}\n\
                 T = {:.4}   p = {:.4}% {}\n\
                 eta_hat = {:.6}   sigma_hat^2 = {:.6}\n\
                 MLE (T,R,P)            = {:.6}, {:.6}, {:.6}\n{}",
                report.variance_mode,
                hyp.family().name(),
                delta,
                report.t_stat,
                100.0 * report.p_value,
                if report.reject {
                    format!("=> reject the null at alpha = {alpha}")
                } else {
                    format!("=> cannot reject at alpha = {alpha}")
                },
                report.eta_hat,
                report.sigma_hat2,
                report.mle_unrestricted[0],
                report.mle_unrestricted[1],
                report.mle_unrestricted[2],
                match report.mle_restricted {
                    Some(m) => format!(
                        "restricted MLE (T,R,P) = {:.6}, {:.6}, {:.6}\n",
                        m[0], m[1], m[2]
                    ),
                    None => String::new(),
                },
            );
            Ok(render(format, &human, &value))
        }

        Command::Plan {
            family,
            delta,
            alpha,
            power,
            alt,
            weights,
            mode,
        } => {
            let fam = family.build(false)?;
            let hyp = RetentionHypothesis::new(fam, delta)?;
            let t = parse_triple(&alt, "alternative")?;
            let alternative = Alternative::new(&hyp, t[0], t[1], t[2])?;
            let w = parse_weights(&weights, delta, &hyp, &alternative)?;
            let plan = sample_size(&hyp, &alternative, &w, alpha, power, mode.into())?;
            let achieved = power_approx(
                &hyp,
                &alternative,
                &w,
                plan.n_required as f64,
                alpha,
                mode.into(),
            )?;
            let value = json!({
                "schema": SCHEMA_VERSION,
                "command": "plan",
                "family": hyp.family().name(),
                "delta": delta,
                "alternative": t,
                "plan": serde_json::to_value(&plan).expect("serializable"),
                "power_at_n": achieved,
            });
            let human = format!(
                "plan | family {} delta {} alpha {} power {} ({} variance)\n\
                 weights (T,R,P)   = {:.4}, {:.4}, {:.4}\n\
                 eta0 = {:.6}   sigma0 = {:.6}   sigma_RML = {:.6}\n\
                 n (formula)       = {:.3}\n\
                 n required        = {}\n\
                 groups (T,R,P)    = {}, {}, {}   (total {})\n\
                 approx power at n = {:.4}\n",
                hyp.family().name(),
                delta,
                alpha,
                power,
                plan.variance_mode,
                plan.weights.test(),
                plan.weights.reference(),
                plan.weights.placebo(),
                plan.eta0,
                plan.sigma0,
                plan.sigma_rml,
                plan.n_real,
                plan.n_required,
                plan.n_per_group[0],
                plan.n_per_group[1],
                plan.n_per_group[2],
                plan.n_total,
                achieved,
            );
            Ok(render(format, &human, &value))
        }

        Command::Alloc { family, delta, alt } => {
            let fam = family.build(false)?;
            let hyp = RetentionHypothesis::new(fam, delta)?;
            let t = parse_triple(&alt, "alternative")?;
            let alternative = Alternative::new(&hyp, t[0], t[1], t[2])?;
            let w = optimal_allocation(&hyp, &alternative)?;
            let s2 = sigma0_squared(&hyp, &alternative, &w)?;
            let rot = rule_of_thumb_check(&hyp, &alternative).ok();
            let value = json!({
                "schema": SCHEMA_VERSION,
                "command": "alloc",
                "family": hyp.family().name(),
                "delta": delta,
                "alternative": t,
                "weights": serde_json::to_value(w).expect("serializable"),
                "ratio_to_placebo": [
                    w.test() / w.placebo(),
                    w.reference() / w.placebo(),
                    1.0
                ],
                "sigma0_squared": s2,
                "rule_of_thumb": rot.map(|r| serde_json::to_value(r).expect("serializable")),
            });
            let human = format!(
                "optimal allocation | family {} delta {}\n\
                 weights (T,R,P) = {:.4}, {:.4}, {:.4}\n\
                 ratio           = {:.3} : {:.3} : 1\n\
                 sigma0^2        = {:.6}\n{}",
                hyp.family().name(),
                delta,
                w.test(),
                w.reference(),
                w.placebo(),
                w.test() / w.placebo(),
                w.reference() / w.placebo(),
                s2,
                match rot {
                    Some(r) => format!(
                        "rule of thumb 1:D:1-D | variance ratio r = {:.3}: beats 2:2:1 = {}, \
                         beats balanced = {}\n",
                        r.ratio, r.beats_221, r.beats_balanced
                    ),
                    None => String::new(),
                },
            );
            Ok(render(format, &human, &value))
        }

        Command::Power {
            family,
            delta,
            alpha,
            gen,
            n,
            mode,
            method,
            reps,
            seed,
            budget,
        } => {
            let fam = family.build(false)?;
            let hyp = RetentionHypothesis::new(fam, delta)?;
            let zeta = parse_triple(&gen, "generating parameters")?;
            let sizes = group_sizes(&n)?;
            let pm = match method {
                MethodArg::Exact => PowerMethod::ExactEnumeration,
                MethodArg::Mc => PowerMethod::MonteCarlo { reps, seed },
            };
            let query = PowerQuery::new(hyp.clone(), zeta, sizes, alpha, mode.into(), pm)?
                .with_budget(budget);
            let est = power(&query)?;
            let value = json!({
                "schema": SCHEMA_VERSION,
                "command": "power",
                "family": hyp.family().name(),
                "delta": delta,
                "alpha": alpha,
                "generating": zeta,
                "n": sizes,
                "mode": serde_json::to_value(VarianceMode::from(mode)).expect("serializable"),
                "method": serde_json::to_value(pm).expect("serializable"),
                "estimate": serde_json::to_value(est).expect("serializable"),
            });
            let human = format!(
                "power | family {} delta {} alpha {} ({} variance)\n\
                 generating (T,R,P) = {:.4}, {:.4}, {:.4}   n = {}, {}, {}\n\
                 power = {:.4}{}\n\
                 degenerate-outcome mass = {:.3e}   truncated mass = {:.3e}\n",
                hyp.family().name(),
                delta,
                alpha,
                VarianceMode::from(mode),
                zeta[0],
                zeta[1],
                zeta[2],
                sizes[0],
                sizes[1],
                sizes[2],
                est.power,
                if est.standard_error > 0.0 {
                    format!(" +- {:.4} (se)", est.standard_error)
                } else {
                    String::new()
                },
                est.degenerate_mass,
                est.truncated_mass,
            );
            Ok(render(format, &human, &value))
        }

        Command::Reproduce {
            table,
            out,
            budget,
            seed,
        } => {
            let report = reproduce::reproduce(table, &out, budget, seed)?;
            let text = render(format, &report.human, &report.summary);
            if report.mismatches > 0 {
                print!("{text}");
                return Err(Error::OptimizationFailure(format!(
                    "{} cells deviate from the reference values beyond tolerance",
                    report.mismatches
                )));
            }
            Ok(text)
        }
    }
}
