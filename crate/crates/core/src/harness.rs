//! Verification suites, point-set matching, the `q → 0` collision study and
//! JSON reports.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calogero_moser::{
    cm_hamiltonian, cm_matrix, first_integrals, l0_residual, lq_residual, rank_one_residual, xi,
};
use crate::master_function::{gradient_fd_residual, solve_bethe, solve_bethe_q, MasterFunction, SolverOptions};
use crate::partitions::{enumerate_partitions, Partition};
use crate::sampling;
use crate::tensor_gaudin::{
    spectral_points, twisted_eigenpairs, twisted_spectral_points, JointEigenOptions, SpectralPoint,
};
use crate::wronski::{
    annihilation_residual, annihilation_residual_q, bivariate_identity_residual, fla_residual, psi, psi_q,
    wronski_fiber, FiberOptions, MonicPoly, PolyTuple, QuasiExpTuple,
};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    L0,
    Lq,
    Bethe,
    Wronski,
    Identities,
    Collision,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::L0,
        Suite::Lq,
        Suite::Bethe,
        Suite::Wronski,
        Suite::Identities,
        Suite::Collision,
    ];

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "l0" => Suite::L0,
            "lq" => Suite::Lq,
            "bethe" => Suite::Bethe,
            "wronski" => Suite::Wronski,
            "identities" => Suite::Identities,
            "collision" => Suite::Collision,
            "all" => Suite::All,
            other => return Err(Error::InvalidInput(format!("unknown suite {other:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::L0 => "l0",
            Suite::Lq => "lq",
            Suite::Bethe => "bethe",
            Suite::Wronski => "wronski",
            Suite::Identities => "identities",
            Suite::Collision => "collision",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Joint eigenproblem residual and commutator tolerance.
    pub eigen: f64,
    /// Level-set membership, `max_a |Q_a − target_a| / max(1, ‖p‖_∞)^a`.
    pub residual: f64,
    /// Bethe gradient norm.
    pub bethe: f64,
    /// Matching of independently computed point sets.
    pub matching: f64,
    /// Matching of spectra computed with `N` and `N + 1` rows.
    pub n_independence: f64,
    pub closed_form: f64,
    pub sum_rule: f64,
    pub fla: f64,
    pub bivariate: f64,
    pub annihilation: f64,
    pub rank_one: f64,
    pub hamiltonian: f64,
    pub finite_difference: f64,
    pub fiber: f64,
    /// Matching of collision limits against spectra at `q = 0`.
    pub collision_match: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eigen: 1e-8,
            residual: 1e-8,
            bethe: 1e-10,
            matching: 1e-6,
            n_independence: 1e-8,
            closed_form: 1e-10,
            sum_rule: 1e-10,
            fla: 1e-10,
            bivariate: 1e-8,
            annihilation: 1e-12,
            rank_one: 1e-12,
            hamiltonian: 1e-10,
            finite_difference: 1e-5,
            fiber: 1e-9,
            collision_match: 1e-4,
        }
    }
}

/// Missing fields in a JSON config take their default values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerificationConfig {
    pub suite: Suite,
    pub n_min: usize,
    pub n_max: usize,
    /// For `n ≥ 5`, only partitions with at most this many parts are used.
    pub large_n_max_parts: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Values of `s` in `q = s·q⁰` for the collision study, decreasing.
    pub q_scales: Vec<f64>,
    /// Collision clusters are cut at `cutoff_scale · s^cutoff_exponent`.
    pub cutoff_exponent: f64,
    pub cutoff_scale: f64,
    /// Added to the first momentum coordinate before membership checks.
    /// Used to confirm that the checks can fail.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_p_offset: Option<f64>,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            n_min: 2,
            n_max: 4,
            large_n_max_parts: 3,
            trials: 5,
            seed: 0,
            tolerances: Tolerances::default(),
            q_scales: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            cutoff_exponent: 0.5,
            cutoff_scale: 1.0,
            inject_p_offset: None,
        }
    }
}

impl VerificationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::InvalidInput(format!(
                "bad n range {}..={}",
                self.n_min, self.n_max
            )));
        }
        if self.n_max > 6 {
            return Err(Error::InvalidInput("n_max above 6 is outside desk scale".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be positive".into()));
        }
        let t = &self.tolerances;
        let all = [
            t.eigen,
            t.residual,
            t.bethe,
            t.matching,
            t.n_independence,
            t.closed_form,
            t.sum_rule,
            t.fla,
            t.bivariate,
            t.annihilation,
            t.rank_one,
            t.hamiltonian,
            t.finite_difference,
            t.fiber,
            t.collision_match,
        ];
        if all.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.q_scales.is_empty() || self.q_scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidInput("q scales must be positive".into()));
        }
        if !(self.cutoff_exponent > 0.0 && self.cutoff_scale > 0.0) {
            return Err(Error::InvalidInput("cutoff parameters must be positive".into()));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        digest(self)
    }

    fn partitions(&self, n: usize) -> Vec<Partition> {
        let max_parts = if n >= 5 { self.large_n_max_parts } else { n };
        enumerate_partitions(n, max_parts)
    }

    fn n_range(&self, cap: usize) -> std::ops::RangeInclusive<usize> {
        self.n_min..=self.n_max.min(cap)
    }

    fn eigen_options(&self) -> JointEigenOptions {
        JointEigenOptions {
            tol: self.tolerances.eigen,
            ..JointEigenOptions::default()
        }
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tolerances.bethe,
            ..SolverOptions::default()
        }
    }
}

/// Hex SHA-256 of the JSON encoding.
pub fn digest<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    pub anchor: String,
    pub label: String,
    pub inputs_digest: String,
    pub residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub found: Option<usize>,
    pub pass: bool,
    pub seed: u64,
    pub config_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub config_digest: String,
    pub checks: usize,
    pub failures: usize,
    pub pass: bool,
    pub records: Vec<Record>,
}

impl Report {
    pub fn failed(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }
}

/// Builder for one record; a check fails if any bound is exceeded, a count
/// differs, or the computation itself errored.
struct Check {
    record: Record,
}

impl Check {
    fn new(ctx: &Ctx, check: &str, anchor: &str, label: String, inputs: &impl Serialize) -> Self {
        Self {
            record: Record {
                check: check.into(),
                anchor: anchor.into(),
                label,
                inputs_digest: digest(inputs),
                residuals: BTreeMap::new(),
                expected: None,
                found: None,
                pass: true,
                seed: ctx.seed,
                config_digest: ctx.config_digest.clone(),
                detail: None,
            },
        }
    }

    fn bound(&mut self, name: &str, value: f64, tol: f64) -> &mut Self {
        let entry = self.record.residuals.entry(name.into()).or_insert(0.0);
        if value.is_nan() || *entry < value {
            *entry = value;
        }
        if !(value <= tol) {
            self.record.pass = false;
        }
        self
    }

    fn count(&mut self, expected: usize, found: usize) -> &mut Self {
        self.record.expected = Some(expected);
        self.record.found = Some(found);
        if expected != found {
            self.record.pass = false;
        }
        self
    }

    /// Counts that are reported without affecting the verdict.
    fn report_count(&mut self, expected: usize, found: usize) -> &mut Self {
        self.record.expected = Some(expected);
        self.record.found = Some(found);
        self
    }

    fn require(&mut self, ok: bool, why: impl Into<String>) -> &mut Self {
        if !ok {
            self.fail(why);
        }
        self
    }

    fn fail(&mut self, why: impl Into<String>) -> &mut Self {
        self.record.pass = false;
        let why = why.into();
        self.record.detail = Some(match self.record.detail.take() {
            Some(prev) => format!("{prev}; {why}"),
            None => why,
        });
        self
    }

    fn finish(self) -> Record {
        self.record
    }
}

fn attempt(check: &mut Check, f: impl FnOnce(&mut Check) -> Result<()>) {
    if let Err(e) = f(check) {
        check.fail(e.to_string());
    }
}

#[derive(Clone)]
struct Ctx {
    seed: u64,
    config_digest: String,
}

type Task<'a> = Box<dyn Fn() -> Vec<Record> + Send + Sync + 'a>;

/// Runs the selected checks. Every check draws from its own seed, derived
/// from the master seed and the check label, so the report does not depend
/// on scheduling.
pub fn run_suite(config: &VerificationConfig) -> Result<Report> {
    config.validate()?;
    let config_digest = config.digest();
    let mut tasks: Vec<Task> = Vec::new();
    for suite in Suite::ALL {
        if config.suite.includes(suite) {
            match suite {
                Suite::L0 => l0_tasks(config, &config_digest, &mut tasks),
                Suite::Lq => lq_tasks(config, &config_digest, &mut tasks),
                Suite::Bethe => bethe_tasks(config, &config_digest, &mut tasks),
                Suite::Wronski => wronski_tasks(config, &config_digest, &mut tasks),
                Suite::Identities => identity_tasks(config, &config_digest, &mut tasks),
                Suite::Collision => collision_tasks(config, &config_digest, &mut tasks),
                Suite::All => unreachable!(),
            }
        }
    }
    let records: Vec<Record> = tasks.par_iter().map(|t| t()).collect::<Vec<_>>().concat();
    let failures = records.iter().filter(|r| !r.pass).count();
    Ok(Report {
        suite: config.suite,
        seed: config.seed,
        config_digest: config_digest.clone(),
        checks: records.len(),
        failures,
        pass: failures == 0,
        records,
    })
}

fn ctx_for(config: &VerificationConfig, digest: &str, label: &str) -> Ctx {
    Ctx {
        seed: sampling::derive_seed(config.seed, label),
        config_digest: digest.into(),
    }
}

fn perturbed(config: &VerificationConfig, p: &[C64]) -> Vec<C64> {
    let mut p = p.to_vec();
    if let (Some(offset), Some(first)) = (config.inject_p_offset, p.first_mut()) {
        *first += offset;
    }
    p
}

fn ps(points: &[SpectralPoint]) -> Vec<Vec<C64>> {
    points.iter().map(|s| s.p.clone()).collect()
}

fn max_norm(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[derive(Serialize)]
struct Inputs<'a> {
    lambda: Option<&'a Partition>,
    #[serde(with = "crate::json::complex_vec")]
    z: &'a [C64],
    #[serde(with = "crate::json::complex_vec")]
    q: &'a [C64],
}

fn inputs<'a>(lambda: Option<&'a Partition>, z: &'a [C64], q: &'a [C64]) -> Inputs<'a> {
    Inputs { lambda, z, q }
}

fn l0_tasks<'a>(config: &'a VerificationConfig, digest: &'a str, tasks: &mut Vec<Task<'a>>) {
    for n in config.n_range(6) {
        let partitions = config.partitions(n);
        for lambda in partitions.clone() {
            for trial in 0..config.trials {
                let lambda = lambda.clone();
                tasks.push(Box::new(move || l0_trial(config, digest, &lambda, trial)));
            }
        }
        if partitions.len() == enumerate_partitions(n, n).len() {
            tasks.push(Box::new(move || vec![dimension_sum(config, digest, n)]));
        }
        for lambda in [
            Partition::new(vec![n]).expect("valid"),
            Partition::new(vec![1; n]).expect("valid"),
        ] {
            if n > 1 || lambda.length() == 1 {
                tasks.push(Box::new(move || closed_form(config, digest, &lambda)));
            }
        }
    }
}

fn l0_trial(config: &VerificationConfig, digest: &str, lambda: &Partition, trial: usize) -> Vec<Record> {
    let label = format!("lambda={lambda} trial={trial}");
    let ctx = ctx_for(config, digest, &format!("l0/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let z = sampling::generic_positions(lambda.weight(), &mut rng);
    let tol = &config.tolerances;
    let opts = config.eigen_options();
    let rows = lambda.length();
    let d = lambda.irrep_dimension() as usize;

    let mut membership = Check::new(
        &ctx,
        "l0.membership",
        "Spec_lambda lies in the level set L_0",
        label.clone(),
        &inputs(Some(lambda), &z, &[]),
    );
    let mut independence = Check::new(
        &ctx,
        "l0.n_independence",
        "Spec_lambda does not depend on N",
        label,
        &inputs(Some(lambda), &z, &[]),
    );
    attempt(&mut membership, |c| {
        let points = spectral_points(lambda, &z, rows, &opts, ctx.seed)?;
        c.count(d, points.len());
        for point in &points {
            c.bound("eigen", point.residual, tol.eigen);
            c.bound("l0", l0_residual(&z, &perturbed(config, &point.p))?, tol.residual);
            c.bound(
                "sum_p",
                point.p.iter().sum::<C64>().norm(),
                tol.sum_rule * (1.0 + max_abs(&point.p)),
            );
        }
        attempt(&mut independence, |ci| {
            let wider = spectral_points(lambda, &z, rows + 1, &opts, ctx.seed)?;
            ci.count(points.len(), wider.len());
            let m = match_points(&ps(&points), &ps(&wider), tol.n_independence);
            ci.bound("match", m.max_distance, tol.n_independence);
            ci.require(
                m.is_perfect(),
                format!("unmatched {:?} / {:?}", m.unmatched_a, m.unmatched_b),
            );
            Ok(())
        });
        Ok(())
    });
    vec![membership.finish(), independence.finish()]
}

fn dimension_sum(config: &VerificationConfig, digest: &str, n: usize) -> Record {
    let label = format!("n={n}");
    let ctx = ctx_for(config, digest, &format!("l0/sum/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let z = sampling::generic_positions(n, &mut rng);
    let mut check = Check::new(
        &ctx,
        "l0.dimension_sum",
        "sum over lambda of d_lambda^2 equals n!",
        label,
        &inputs(None, &z, &[]),
    );
    attempt(&mut check, |c| {
        let mut total = 0;
        for lambda in enumerate_partitions(n, n) {
            let count = spectral_points(&lambda, &z, lambda.length(), &config.eigen_options(), ctx.seed)?.len();
            total += count * lambda.irrep_dimension() as usize;
        }
        c.count((1..=n).product(), total);
        Ok(())
    });
    check.finish()
}

fn closed_form(config: &VerificationConfig, digest: &str, lambda: &Partition) -> Vec<Record> {
    let label = format!("lambda={lambda}");
    let ctx = ctx_for(config, digest, &format!("l0/closed/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let n = lambda.weight();
    let z = sampling::generic_positions(n, &mut rng);
    let sign = if lambda.length() == 1 { 1.0 } else { -1.0 };
    let mut check = Check::new(
        &ctx,
        "l0.closed_form",
        "one-row and one-column examples of Spec_lambda",
        label,
        &inputs(Some(lambda), &z, &[]),
    );
    attempt(&mut check, |c| {
        let points = spectral_points(lambda, &z, lambda.length(), &config.eigen_options(), ctx.seed)?;
        c.count(1, points.len());
        let expected: Vec<C64> = (0..n)
            .map(|a| (0..n).filter(|&b| b != a).map(|b| (z[a] - z[b]).inv()).sum::<C64>() * sign)
            .collect();
        for point in &points {
            c.bound(
                "closed_form",
                max_norm(&perturbed(config, &point.p), &expected),
                config.tolerances.closed_form,
            );
        }
        Ok(())
    });
    vec![check.finish()]
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn lq_tasks<'a>(config: &'a VerificationConfig, digest: &'a str, tasks: &mut Vec<Task<'a>>) {
    for n in config.n_range(4) {
        for trial in 0..config.trials {
            tasks.push(Box::new(move || vec![lq_trial(config, digest, n, trial)]));
        }
    }
}

fn lq_trial(config: &VerificationConfig, digest: &str, n: usize, trial: usize) -> Record {
    let label = format!("n={n} trial={trial}");
    let ctx = ctx_for(config, digest, &format!("lq/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let z = sampling::generic_positions(n, &mut rng);
    let q = sampling::generic_exponents(n, 1.5, &mut rng);
    let tol = &config.tolerances;
    let mut check = Check::new(
        &ctx,
        "lq.membership",
        "Spect_q equals the level set L_q",
        label,
        &inputs(None, &z, &q),
    );
    attempt(&mut check, |c| {
        let points = twisted_spectral_points(&z, &q, &config.eigen_options(), ctx.seed)?;
        c.count((1..=n).product(), points.len());
        let sigma1: C64 = q.iter().sum();
        for point in &points {
            let p = perturbed(config, &point.p);
            c.bound("eigen", point.residual, tol.eigen);
            c.bound("lq", lq_residual(&z, &p, &q)?, tol.residual);
            c.bound(
                "sum_p",
                (p.iter().sum::<C64>() - sigma1).norm() / (1.0 + max_abs(&p)),
                tol.sum_rule,
            );
        }
        Ok(())
    });
    check.finish()
}

fn bethe_tasks<'a>(config: &'a VerificationConfig, digest: &'a str, tasks: &mut Vec<Task<'a>>) {
    for n in config.n_range(4) {
        for lambda in config.partitions(n) {
            for trial in 0..config.trials {
                let lambda = lambda.clone();
                tasks.push(Box::new(move || vec![bethe_trial(config, digest, &lambda, trial)]));
            }
        }
    }
    for n in config.n_range(3) {
        for trial in 0..config.trials {
            tasks.push(Box::new(move || vec![bethe_q_trial(config, digest, n, trial)]));
        }
    }
}

fn bethe_trial(config: &VerificationConfig, digest: &str, lambda: &Partition, trial: usize) -> Record {
    let label = format!("lambda={lambda} trial={trial}");
    let ctx = ctx_for(config, digest, &format!("bethe/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let z = sampling::generic_positions(lambda.weight(), &mut rng);
    let tol = &config.tolerances;
    let mut check = Check::new(
        &ctx,
        "bethe.correspondence",
        "Bethe eigenvalue formula; Spec_lambda is the closure of L_lambda",
        label,
        &inputs(Some(lambda), &z, &[]),
    );
    attempt(&mut check, |c| {
        let sol = solve_bethe(lambda, &z, &config.solver_options(), ctx.seed)?;
        c.count(sol.expected, sol.points.len());
        let spectrum = spectral_points(lambda, &z, lambda.length(), &config.eigen_options(), ctx.seed)?;
        let bethe_p: Vec<Vec<C64>> = sol.points.iter().map(|cp| perturbed(config, &cp.p)).collect();
        for (cp, p) in sol.points.iter().zip(&bethe_p) {
            c.bound("grad_norm", cp.grad_norm, tol.bethe);
            c.bound("sum_p", p.iter().sum::<C64>().norm() / (1.0 + max_abs(p)), tol.sum_rule);
        }
        let m = match_points(&bethe_p, &ps(&spectrum), tol.matching);
        c.bound("match", m.max_distance, tol.matching);
        c.require(
            m.is_perfect(),
            format!("unmatched bethe {:?}, spectrum {:?}", m.unmatched_a, m.unmatched_b),
        );
        if lambda.nonzero_parts() == [1, 1] {
            for cp in &sol.points {
                c.bound("midpoint", (cp.t[0][0] - (z[0] + z[1]) * 0.5).norm(), 1e-12);
            }
        }
        Ok(())
    });
    check.finish()
}

fn bethe_q_trial(config: &VerificationConfig, digest: &str, n: usize, trial: usize) -> Record {
    let label = format!("n={n} trial={trial}");
    let ctx = ctx_for(config, digest, &format!("bethe_q/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let z = sampling::generic_positions(n, &mut rng);
    let q = sampling::generic_exponents(n, 1.5, &mut rng);
    let tol = &config.tolerances;
    let mut check = Check::new(
        &ctx,
        "bethe.twisted",
        "Spect_q is the closure of the twisted Bethe image",
        label,
        &inputs(None, &z, &q),
    );
    attempt(&mut check, |c| {
        let sol = solve_bethe_q(&q, &z, &config.solver_options(), ctx.seed)?;
        c.report_count(sol.expected, sol.points.len());
        c.require(!sol.points.is_empty(), "no critical points found");
        let spectrum = twisted_spectral_points(&z, &q, &config.eigen_options(), ctx.seed)?;
        let sigma1: C64 = q.iter().sum();
        let bethe_p: Vec<Vec<C64>> = sol.points.iter().map(|cp| perturbed(config, &cp.p)).collect();
        for (cp, p) in sol.points.iter().zip(&bethe_p) {
            c.bound("grad_norm", cp.grad_norm, tol.bethe);
            c.bound("lq", lq_residual(&z, p, &q)?, tol.residual);
            c.bound(
                "sum_p",
                (p.iter().sum::<C64>() - sigma1).norm() / (1.0 + max_abs(p)),
                tol.sum_rule,
            );
        }
        let m = match_points(&bethe_p, &ps(&spectrum), tol.matching);
        c.bound("match", m.max_distance, tol.matching);
        c.require(
            m.unmatched_a.is_empty(),
            format!("bethe points {:?} not in the spectrum", m.unmatched_a),
        );
        Ok(())
    });
    check.finish()
}

/// Partitions whose Wronski fibers are counted, with their degrees.
pub const FIBER_CASES: [&[usize]; 5] = [&[2], &[1, 1], &[2, 1], &[2, 2], &[3, 1]];

fn wronski_tasks<'a>(config: &'a VerificationConfig, digest: &'a str, tasks: &mut Vec<Task<'a>>) {
    for parts in FIBER_CASES {
        let lambda = Partition::new(parts.to_vec()).expect("valid");
        if (config.n_min..=config.n_max).contains(&lambda.weight()) {
            for trial in 0..config.trials {
                let lambda = lambda.clone();
                tasks.push(Box::new(move || vec![fiber_trial(config, digest, &lambda, trial)]));
            }
        }
    }
    for n in config.n_range(4) {
        for lambda in config.partitions(n) {
            for trial in 0..config.trials {
                let lambda = lambda.clone();
                tasks.push(Box::new(move || vec![psi_trial(config, digest, &lambda, trial)]));
            }
        }
    }
    for n in config.n_range(3) {
        for trial in 0..config.trials {
            tasks.push(Box::new(move || vec![psi_q_trial(config, digest, n, trial)]));
        }
    }
}

/// A seeded generic target `σ = σ(z)` with `z` in the unit disc.
pub fn generic_target(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = sampling::rng(seed);
    MonicPoly::from_roots(&sampling::generic_positions(n, &mut rng)).w
}

fn fiber_trial(config: &VerificationConfig, digest: &str, lambda: &Partition, trial: usize) -> Record {
    let label = format!("lambda={lambda} trial={trial}");
    let ctx = ctx_for(config, digest, &format!("fiber/{label}"));
    let sigma = generic_target(lambda.weight(), ctx.seed);
    let mut check = Check::new(
        &ctx,
        "wronski.fiber_degree",
        "the Wronski map has degree d_lambda",
        label,
        &inputs(Some(lambda), &sigma, &[]),
    );
    attempt(&mut check, |c| {
        let sol = wronski_fiber(lambda, &sigma, &FiberOptions::default(), ctx.seed)?;
        c.count(sol.expected, sol.solutions.len());
        for &r in &sol.residuals {
            c.bound("w_residual", r, config.tolerances.fiber);
        }
        Ok(())
    });
    check.finish()
}

fn psi_trial(config: &VerificationConfig, digest: &str, lambda: &Partition, trial: usize) -> Record {
    let label = format!("lambda={lambda} trial={trial}");
    let ctx = ctx_for(config, digest, &format!("psi/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let x = PolyTuple::random(lambda, 1.0, &mut rng);
    let tol = &config.tolerances;
    let mut check = Check::new(
        &ctx,
        "wronski.psi",
        "psi_lambda embeds X_lambda^0 onto Spec_lambda / S_n",
        label,
        &x,
    );
    attempt(&mut check, |c| {
        let sp = psi(&x)?;
        let p = perturbed(config, &sp.p);
        c.bound("l0", l0_residual(&sp.z, &p)?, tol.residual);
        let spectrum = spectral_points(lambda, &sp.z, lambda.length(), &config.eigen_options(), ctx.seed)?;
        let m = match_points(&[p], &ps(&spectrum), tol.matching);
        c.bound("match", m.max_distance, tol.matching);
        c.require(m.unmatched_a.is_empty(), "psi image not in the spectrum");
        Ok(())
    });
    check.finish()
}

fn psi_q_trial(config: &VerificationConfig, digest: &str, n: usize, trial: usize) -> Record {
    let label = format!("n={n} trial={trial}");
    let ctx = ctx_for(config, digest, &format!("psi_q/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let q = sampling::generic_exponents(n, 1.5, &mut rng);
    let f: Vec<C64> = (0..n).map(|_| sampling::complex_in_disc(&mut rng, 1.0)).collect();
    let tol = &config.tolerances;
    let mut check = Check::new(
        &ctx,
        "wronski.psi_q",
        "psi_q maps X_q onto Spect_q",
        label,
        &inputs(None, &f, &q),
    );
    attempt(&mut check, |c| {
        let x = QuasiExpTuple::new(q.clone(), f.clone())?;
        c.bound("annihilation", annihilation_residual_q(&x), tol.annihilation);
        let sp = psi_q(&x)?;
        let p = perturbed(config, &sp.p);
        c.bound("lq", lq_residual(&sp.z, &p, &q)?, tol.residual);
        let spectrum = twisted_spectral_points(&sp.z, &q, &config.eigen_options(), ctx.seed)?;
        let m = match_points(&[p], &ps(&spectrum), tol.matching);
        c.bound("match", m.max_distance, tol.matching);
        c.require(m.unmatched_a.is_empty(), "psi_q image not in the spectrum");
        Ok(())
    });
    check.finish()
}

fn identity_tasks<'a>(config: &'a VerificationConfig, digest: &'a str, tasks: &mut Vec<Task<'a>>) {
    for n in config.n_range(5) {
        for lambda in enumerate_partitions(n, n) {
            tasks.push(Box::new(move || vec![operator_identities(config, digest, &lambda)]));
        }
    }
    for n in config.n_range(6) {
        tasks.push(Box::new(move || vec![cm_identities(config, digest, n)]));
    }
    for n in config.n_range(5) {
        for lambda in config.partitions(n) {
            tasks.push(Box::new(move || vec![gradient_check(config, digest, Some(&lambda), n)]));
        }
        tasks.push(Box::new(move || vec![gradient_check(config, digest, None, n)]));
    }
}

fn operator_identities(config: &VerificationConfig, digest: &str, lambda: &Partition) -> Record {
    let label = format!("lambda={lambda}");
    let ctx = ctx_for(config, digest, &format!("identities/operator/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let tol = &config.tolerances;
    let tuples: Vec<PolyTuple> = (0..config.trials)
        .map(|_| PolyTuple::random(lambda, 1.0, &mut rng))
        .collect();
    let mut check = Check::new(
        &ctx,
        "identities.operator",
        "fundamental operator: f-la identity, annihilation, bivariate identity",
        label,
        &tuples,
    );
    attempt(&mut check, |c| {
        for (k, x) in tuples.iter().enumerate() {
            c.bound("fla", fla_residual(x), tol.fla);
            c.bound("annihilation", annihilation_residual(x), tol.annihilation);
            if lambda.weight() <= 4 {
                let seed = sampling::derive_seed(ctx.seed, &format!("grid-{k}"));
                c.bound("bivariate", bivariate_identity_residual(x, seed)?, tol.bivariate);
            }
        }
        Ok(())
    });
    check.finish()
}

fn cm_identities(config: &VerificationConfig, digest: &str, n: usize) -> Record {
    let label = format!("n={n}");
    let ctx = ctx_for(config, digest, &format!("identities/cm/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let tol = &config.tolerances;
    let samples: Vec<(Vec<C64>, Vec<C64>)> = (0..config.trials)
        .map(|_| {
            let z = sampling::generic_positions(n, &mut rng);
            let p = (0..n).map(|_| sampling::complex_in_disc(&mut rng, 2.0)).collect();
            (z, p)
        })
        .collect();
    let flat: Vec<Vec<C64>> = samples
        .iter()
        .map(|(z, p)| [z.as_slice(), p.as_slice()].concat())
        .collect();
    let mut check = Check::new(
        &ctx,
        "identities.calogero_moser",
        "rank-one condition for xi; H = tr Q^2 = Q_1^2 - 2 Q_2",
        label,
        &flat
            .iter()
            .map(|v| v.iter().map(|x| [x.re, x.im]).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    );
    attempt(&mut check, |c| {
        for (z, p) in &samples {
            c.bound("rank_one", rank_one_residual(&xi(z, p)?), tol.rank_one);
            let h = cm_hamiltonian(z, p)?;
            let q = cm_matrix(z, p)?;
            let trace_sq: C64 = (&q * &q).trace();
            let fi = first_integrals(z, p)?.values;
            let q2 = if n >= 2 { fi[1] } else { C64::new(0.0, 0.0) };
            let via_integrals = fi[0] * fi[0] - q2 * 2.0;
            let scale = h.norm().max(1.0);
            c.bound("trace", (h - trace_sq).norm() / scale, tol.hamiltonian);
            c.bound("integrals", (h - via_integrals).norm() / scale, tol.hamiltonian);
        }
        Ok(())
    });
    check.finish()
}

fn gradient_check(config: &VerificationConfig, digest: &str, lambda: Option<&Partition>, n: usize) -> Record {
    let label = match lambda {
        Some(l) => format!("lambda={l}"),
        None => format!("twisted n={n}"),
    };
    let ctx = ctx_for(config, digest, &format!("identities/gradient/{label}"));
    let mut rng = sampling::rng(ctx.seed);
    let q = match lambda {
        Some(_) => Vec::new(),
        None => sampling::generic_exponents(n, 2.0, &mut rng),
    };
    let mut check = Check::new(
        &ctx,
        "identities.gradients",
        "master function gradients",
        label,
        &inputs(lambda, &[], &q),
    );
    attempt(&mut check, |c| {
        let mf = match lambda {
            Some(l) => MasterFunction::for_partition(l)?,
            None => MasterFunction::twisted(&q)?,
        };
        for _ in 0..config.trials {
            let (z, t) = loop {
                let z = sampling::generic_positions(n, &mut rng);
                let flat: Vec<C64> = (0..mf.num_t())
                    .map(|_| sampling::complex_in_disc(&mut rng, 1.5))
                    .collect();
                let t = mf.unflatten(&flat);
                if well_separated(&z, &flat, 0.05) {
                    break (z, t);
                }
            };
            c.bound(
                "fd",
                gradient_fd_residual(&mf, &z, &t, 1e-6)?,
                config.tolerances.finite_difference,
            );
        }
        Ok(())
    });
    check.finish()
}

fn well_separated(z: &[C64], t: &[C64], min: f64) -> bool {
    let all: Vec<C64> = z.iter().chain(t).copied().collect();
    sampling::min_pairwise_distance(&all) >= min
}

fn collision_tasks<'a>(config: &'a VerificationConfig, digest: &'a str, tasks: &mut Vec<Task<'a>>) {
    for n in config.n_range(4) {
        for trial in 0..config.trials {
            tasks.push(Box::new(move || vec![collision_trial(config, digest, n, trial)]));
        }
    }
}

fn collision_trial(config: &VerificationConfig, digest: &str, n: usize, trial: usize) -> Record {
    let label = format!("n={n} trial={trial}");
    let ctx = ctx_for(config, digest, &format!("collision/{label}"));
    let mut check = Check::new(
        &ctx,
        "collision.multiplicities",
        "d_lambda points of the fiber collide onto Spec_lambda as q -> 0",
        label,
        &(n, ctx.seed),
    );
    attempt(&mut check, |c| {
        let study = collision_study(n, None, &CollisionOptions::from_config(config), ctx.seed)?;
        c.require(study.resolved, "clusters overlap at the smallest scale");
        c.count((1..=n).product(), study.clusters.iter().map(|k| k.size).sum());
        let mut expected_clusters = 0;
        for lambda in enumerate_partitions(n, n) {
            expected_clusters += lambda.irrep_dimension() as usize;
        }
        c.require(
            study.clusters.len() == expected_clusters,
            format!("{} clusters, expected {expected_clusters}", study.clusters.len()),
        );
        for cluster in &study.clusters {
            match &cluster.lambda {
                Some(lambda) => {
                    let d = lambda.irrep_dimension() as usize;
                    c.require(
                        cluster.size == d,
                        format!("cluster at {lambda} has size {}", cluster.size),
                    );
                    c.require(
                        cluster.eigenspace_dim == Some(d),
                        format!("eigenspace at {lambda} has dimension {:?}", cluster.eigenspace_dim),
                    );
                }
                None => {
                    c.fail("cluster not matched to any Spec_lambda point");
                }
            }
            c.bound("limit", cluster.limit_distance, config.tolerances.collision_match);
        }
        Ok(())
    });
    check.finish()
}

/// Result of [`match_points`]: `pairs[k] = (i, j)` matches `A[i]` to `B[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_a: Vec<usize>,
    pub unmatched_b: Vec<usize>,
    /// Largest distance among matched pairs.
    pub max_distance: f64,
}

impl Matching {
    pub fn is_perfect(&self) -> bool {
        self.unmatched_a.is_empty() && self.unmatched_b.is_empty()
    }
}

/// Bipartite matching of tuples under the max-norm: a greedy nearest pass,
/// then augmenting paths over all pairs within `tol`.
pub fn match_points(a: &[Vec<C64>], b: &[Vec<C64>], tol: f64) -> Matching {
    let dist: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| max_norm(x, y)).collect()).collect();
    let mut owner: Vec<Option<usize>> = vec![None; b.len()];
    let mut partner: Vec<Option<usize>> = vec![None; a.len()];
    for i in 0..a.len() {
        let best = (0..b.len())
            .filter(|&j| owner[j].is_none() && dist[i][j] <= tol)
            .min_by(|&j, &k| dist[i][j].total_cmp(&dist[i][k]));
        if let Some(j) = best {
            owner[j] = Some(i);
            partner[i] = Some(j);
        }
    }
    fn augment(
        i: usize,
        dist: &[Vec<f64>],
        tol: f64,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
        partner: &mut [Option<usize>],
    ) -> bool {
        let mut order: Vec<usize> = (0..owner.len()).filter(|&j| dist[i][j] <= tol).collect();
        order.sort_by(|&j, &k| dist[i][j].total_cmp(&dist[i][k]));
        for j in order {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            let free = match owner[j] {
                None => true,
                Some(other) => augment(other, dist, tol, seen, owner, partner),
            };
            if free {
                owner[j] = Some(i);
                partner[i] = Some(j);
                return true;
            }
        }
        false
    }
    for i in 0..a.len() {
        if partner[i].is_none() {
            let mut seen = vec![false; b.len()];
            augment(i, &dist, tol, &mut seen, &mut owner, &mut partner);
        }
    }
    let pairs: Vec<(usize, usize)> = partner
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect();
    Matching {
        max_distance: pairs.iter().map(|&(i, j)| dist[i][j]).fold(0.0, f64::max),
        unmatched_a: (0..a.len()).filter(|&i| partner[i].is_none()).collect(),
        unmatched_b: (0..b.len()).filter(|&j| owner[j].is_none()).collect(),
        pairs,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionOptions {
    pub scales: Vec<f64>,
    pub cutoff_exponent: f64,
    pub cutoff_scale: f64,
    pub match_tol: f64,
    pub eigen: JointEigenOptions,
}

impl Default for CollisionOptions {
    fn default() -> Self {
        Self::from_config(&VerificationConfig::default())
    }
}

impl CollisionOptions {
    pub fn from_config(config: &VerificationConfig) -> Self {
        Self {
            scales: config.q_scales.clone(),
            cutoff_exponent: config.cutoff_exponent,
            cutoff_scale: config.cutoff_scale,
            match_tol: config.tolerances.collision_match,
            eigen: config.eigen_options(),
        }
    }
}

impl PartialEq for JointEigenOptions {
    fn eq(&self, other: &Self) -> bool {
        self.tol == other.tol && self.gap_tol == other.gap_tol && self.max_retries == other.max_retries
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub size: usize,
    #[serde(with = "crate::json::complex_vec")]
    pub centroid: Vec<C64>,
    /// Largest distance from a member to the centroid.
    pub spread: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Partition>,
    /// Distance from the centroid to the matched `Spec_λ` point.
    pub limit_distance: f64,
    /// Dimension of the joint eigenspace of `H_a(z, 0)` at the limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenspace_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub n: usize,
    #[serde(with = "crate::json::complex_vec")]
    pub z: Vec<C64>,
    #[serde(with = "crate::json::complex_vec")]
    pub q_direction: Vec<C64>,
    pub scales: Vec<f64>,
    /// Number of clusters at each scale under that scale's cutoff.
    pub cluster_counts: Vec<usize>,
    pub cutoff: f64,
    pub clusters: Vec<Cluster>,
    /// Clusters at the smallest scale are tighter than the cutoff and
    /// separated by more than it.
    pub resolved: bool,
}

impl CollisionReport {
    /// Cluster sizes grouped by the partition they converge to.
    pub fn sizes_by_partition(&self) -> BTreeMap<String, Vec<usize>> {
        let mut out: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for c in &self.clusters {
            let key = c.lambda.as_ref().map_or("unmatched".to_string(), |l| l.to_string());
            out.entry(key).or_default().push(c.size);
        }
        out
    }
}

/// Single-linkage clusters of tuples under the max-norm.
pub fn single_linkage(points: &[Vec<C64>], cutoff: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if max_norm(&points[i], &points[j]) <= cutoff {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Joint spectra of `H_a(z, s·q⁰)` along the given scales; the clusters at
/// the smallest scale are matched to the points of every `Spec_λ`.
pub fn collision_study(
    n: usize,
    q_direction: Option<&[C64]>,
    opts: &CollisionOptions,
    seed: u64,
) -> Result<CollisionReport> {
    if n == 0 || n > 4 {
        return Err(Error::Unsupported(format!(
            "collision study needs 1 <= n <= 4, got {n}"
        )));
    }
    let mut rng = sampling::rng(seed);
    let z = sampling::generic_positions(n, &mut rng);
    let q0 = match q_direction {
        Some(q) => {
            if q.len() != n {
                return Err(Error::InvalidInput("q direction has the wrong length".into()));
            }
            crate::tensor_gaudin::check_distinct(q, 1e-8)?;
            q.to_vec()
        }
        None => sampling::generic_exponents(n, 1.0, &mut rng),
    };
    let mut scales = opts.scales.clone();
    scales.sort_by(|a, b| b.total_cmp(a));
    let smallest = *scales.last().ok_or_else(|| Error::InvalidInput("no scales".into()))?;

    let mut cluster_counts = Vec::new();
    let mut last = Vec::new();
    for &s in &scales {
        let q: Vec<C64> = q0.iter().map(|x| x * s).collect();
        let eig = JointEigenOptions {
            gap_tol: opts.eigen.gap_tol.min(1e-3 * s),
            ..opts.eigen
        };
        let tuples = ps(&twisted_spectral_points(&z, &q, &eig, seed)?);
        let cutoff = opts.cutoff_scale * s.powf(opts.cutoff_exponent);
        cluster_counts.push(single_linkage(&tuples, cutoff).len());
        last = tuples;
    }
    let cutoff = opts.cutoff_scale * smallest.powf(opts.cutoff_exponent);
    let groups = single_linkage(&last, cutoff);

    let mut limits: Vec<(Partition, Vec<C64>)> = Vec::new();
    for lambda in enumerate_partitions(n, n) {
        for point in spectral_points(&lambda, &z, lambda.length(), &opts.eigen, seed)? {
            limits.push((lambda.clone(), point.p));
        }
    }
    let zero = vec![C64::new(0.0, 0.0); n];
    let at_zero = twisted_eigenpairs(&z, &zero, &opts.eigen, seed)?;

    let mut resolved = true;
    let mut clusters = Vec::new();
    for group in &groups {
        let centroid: Vec<C64> = (0..n)
            .map(|a| group.iter().map(|&i| last[i][a]).sum::<C64>() / group.len() as f64)
            .collect();
        let spread = group.iter().map(|&i| max_norm(&last[i], &centroid)).fold(0.0, f64::max);
        if spread > 0.1 * cutoff {
            resolved = false;
        }
        let nearest = limits
            .iter()
            .map(|(l, p)| (l, max_norm(p, &centroid)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let (lambda, limit_distance) = match nearest {
            Some((l, d)) if d <= opts.match_tol => (Some(l.clone()), d),
            Some((_, d)) => (None, d),
            None => (None, f64::INFINITY),
        };
        let eigenspace_dim = at_zero
            .iter()
            .filter(|pair| max_norm(&pair.p, &centroid) <= opts.match_tol)
            .map(|pair| pair.multiplicity)
            .max();
        clusters.push(Cluster {
            size: group.len(),
            centroid,
            spread,
            lambda,
            limit_distance,
            eigenspace_dim,
        });
    }
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            if max_norm(&clusters[i].centroid, &clusters[j].centroid) <= cutoff {
                resolved = false;
            }
        }
    }
    clusters.sort_by(|a, b| {
        let ka: Vec<(f64, f64)> = a.centroid.iter().map(|x| (x.re, x.im)).collect();
        let kb: Vec<(f64, f64)> = b.centroid.iter().map(|x| (x.re, x.im)).collect();
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(CollisionReport {
        n,
        z,
        q_direction: q0,
        scales,
        cluster_counts,
        cutoff,
        clusters,
        resolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tuples(values: &[(f64, f64)]) -> Vec<Vec<C64>> {
        values.iter().map(|&(a, b)| vec![c(a, 0.0), c(b, 0.0)]).collect()
    }

    #[test]
    fn identical_sets_match_identically() {
        let a = tuples(&[(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)]);
        let m = match_points(&a, &a, 1e-9);
        assert!(m.is_perfect());
        assert_eq!(m.pairs, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn distant_singletons_fail() {
        let tol = 1e-3;
        let m = match_points(&tuples(&[(0.0, 0.0)]), &tuples(&[(2.0 * tol, 0.0)]), tol);
        assert!(!m.is_perfect());
        assert_eq!((m.unmatched_a, m.unmatched_b), (vec![0], vec![0]));
    }

    #[test]
    fn permuted_noisy_copy_matches() {
        let tol = 1e-4;
        let a = tuples(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        let b: Vec<Vec<C64>> = [2, 0, 3, 1]
            .iter()
            .map(|&i| a[i].iter().map(|x| x + c(tol / 10.0, -tol / 20.0)).collect())
            .collect();
        let m = match_points(&a, &b, tol);
        assert!(m.is_perfect());
        assert!(m.pairs.contains(&(2, 0)) && m.pairs.contains(&(0, 1)));
    }

    #[test]
    fn augmenting_path_beats_greedy() {
        // Greedy gives A0 its nearest B0, leaving A1 without a partner.
        let a = tuples(&[(0.0, 0.0), (0.9, 0.0)]);
        let b = tuples(&[(0.4, 0.0), (-0.5, 0.0)]);
        let m = match_points(&a, &b, 1.0);
        assert!(m.is_perfect());
        assert_eq!(m.pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn clusters_by_single_linkage() {
        let pts = tuples(&[(0.0, 0.0), (0.05, 0.0), (0.1, 0.0), (1.0, 1.0)]);
        let g = single_linkage(&pts, 0.06);
        assert_eq!(g, vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn two_site_collision() {
        let study = collision_study(2, None, &CollisionOptions::default(), 3).unwrap();
        assert!(study.resolved);
        assert_eq!(study.clusters.len(), 2);
        for cluster in &study.clusters {
            assert_eq!(cluster.size, 1);
            assert!(cluster.limit_distance < 1e-4);
            assert_eq!(cluster.eigenspace_dim, Some(1));
        }
        let keys: Vec<String> = study.sizes_by_partition().into_keys().collect();
        assert_eq!(keys, vec!["(1,1)", "(2)"]);
    }

    #[test]
    fn three_site_collision() {
        let study = collision_study(3, None, &CollisionOptions::default(), 5).unwrap();
        assert!(study.resolved);
        let sizes = study.sizes_by_partition();
        assert_eq!(sizes["(3)"], vec![1]);
        assert_eq!(sizes["(2,1)"], vec![2, 2]);
        assert_eq!(sizes["(1,1,1)"], vec![1]);
        for cluster in &study.clusters {
            let d = cluster.lambda.as_ref().unwrap().irrep_dimension() as usize;
            assert_eq!(cluster.eigenspace_dim, Some(d));
        }
    }

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let config = VerificationConfig {
            n_max: 3,
            trials: 2,
            seed: 11,
            ..VerificationConfig::default()
        };
        let a = run_suite(&config).unwrap();
        if let Some(r) = a.failed().next() {
            panic!("{r:?}");
        }
        let b = run_suite(&config).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn injected_fault_fails_membership() {
        let config = VerificationConfig {
            suite: Suite::L0,
            n_max: 3,
            trials: 1,
            inject_p_offset: Some(0.1),
            ..VerificationConfig::default()
        };
        let report = run_suite(&config).unwrap();
        assert!(!report.pass);
        assert!(report.failed().any(|r| r.check == "l0.membership"));
    }

    #[test]
    fn config_validation() {
        let bad = VerificationConfig {
            trials: 0,
            ..VerificationConfig::default()
        };
        assert!(run_suite(&bad).is_err());
        let bad = VerificationConfig {
            n_min: 4,
            n_max: 3,
            ..VerificationConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!("bogus".parse::<Suite>().is_err());
        assert_eq!("lq".parse::<Suite>().unwrap(), Suite::Lq);
    }
}
