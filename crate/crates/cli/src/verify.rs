//! Verification suites: each check reports the measured figure, the
//! tolerance it is held to, and whether it passed.

use genrob_core::discrimination::{
    achieving_ensemble, fixed_task_advantage, optimal_measurement, random_ensemble, random_povm, success_probability,
    task_from_witness, verify_qualitative_advantage, worst_case_advantage, ChannelEnsemble,
};
use genrob_core::freesets::{ConvexFreeSet, FreeSet};
use genrob_core::qcore::{
    bloch_from_state, random_hermitian, random_state, seeded_rng, tensor_power, DensityMatrix, HermitianMatrix,
};
use genrob_core::robustness::{robustness_convex, robustness_union};
use genrob_core::witness::{
    build_multicopy_operator, common_deltas, compute_deltas, detect, is_state_byrd, qubit_closed_form, shift_family,
    swap_witness, theorem1_boundary_check, WitnessFamily,
};
use genrob_core::Result as CoreResult;
use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::report::{emit, Config, Failure, EXIT_OK, EXIT_VERIFICATION};
use crate::GlobalOpts;

pub const SUITES: [&str; 4] = ["byrd", "witness", "duality", "theorems"];

#[derive(Serialize, Debug)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
struct Summary {
    suite: String,
    passed: bool,
    checks: Vec<Check>,
}

struct Ctx {
    seed: u64,
    tol: Option<f64>,
    checks: Vec<Check>,
}

impl Ctx {
    /// Records `measured <= tolerance`, with the tolerance replaced by the
    /// override when one is given.
    fn check(&mut self, suite: &'static str, name: &'static str, measured: f64, tolerance: f64, detail: String) {
        let tolerance = self.tol.unwrap_or(tolerance);
        self.checks.push(Check {
            suite,
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail,
        });
    }

    fn seed(&self, salt: u64) -> u64 {
        self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt)
    }
}

pub fn run(g: &GlobalOpts, suite: &str) -> Result<u8, Failure> {
    let selected: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => {
            return Err(Failure::input(format!(
                "unknown suite {other:?}; expected one of all, {}",
                SUITES.join(", ")
            )))
        }
    };
    let mut ctx = Ctx {
        seed: g.seed,
        tol: g.tol,
        checks: Vec::new(),
    };
    for s in &selected {
        match *s {
            "byrd" => byrd(&mut ctx)?,
            "witness" => witness(&mut ctx)?,
            "duality" => duality(&mut ctx)?,
            _ => theorems(&mut ctx)?,
        }
    }
    let passed = ctx.checks.iter().all(|c| c.passed);
    for c in &ctx.checks {
        eprintln!(
            "{} {}/{}: {:.3e} (tol {:.1e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.measured,
            c.tolerance,
            c.detail
        );
    }
    let cfg = Config::new("verify").arg("suite", suite).arg("seed", g.seed).arg("tol", g.tol);
    let summary = Summary {
        suite: suite.into(),
        passed,
        checks: ctx.checks,
    };
    emit(&g.out, "verify.json", &cfg, g.seed, &summary)?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFICATION })
}

fn z_set() -> ConvexFreeSet<f64> {
    ConvexFreeSet::incoherent_computational("z", 2).expect("qubit basis")
}

fn zx_union() -> FreeSet<f64> {
    FreeSet::new(vec![z_set(), ConvexFreeSet::qubit_axis("x", 0).expect("x axis")]).expect("same dimension")
}

/// `e_m` of the spectrum by the product expansion.
fn e_m(a: &HermitianMatrix<f64>, m: usize) -> CoreResult<f64> {
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for l in a.eig()?.values {
        for k in (1..=m).rev() {
            e[k] += l * e[k - 1];
        }
    }
    Ok(e[m])
}

/// Qubit robustness against the incoherent set of a Pauli axis.
fn qubit_l1(rho: &DensityMatrix<f64>, label: &str) -> f64 {
    let r = bloch_from_state(rho).coords;
    match label {
        "z" => r[0].hypot(r[1]),
        "x" => r[1].hypot(r[2]),
        _ => r[0].hypot(r[2]),
    }
}

fn byrd(ctx: &mut Ctx) -> Result<(), Failure> {
    let mut rng = seeded_rng(ctx.seed(1));
    let band = ctx.tol.unwrap_or(1e-8);
    let (mut bad, mut in_band, mut total) = (0usize, 0usize, 0usize);
    for d in 2..=4 {
        for _ in 0..1000 {
            let rho = random_state::<f64, _>(&mut rng, d).into_hermitian();
            let mut h = random_hermitian::<f64, _>(&mut rng, d);
            h = h.sub(&HermitianMatrix::identity(d).scale(h.trace() / d as f64));
            let t = rng.random::<f64>() * 0.6 / h.operator_norm()?;
            let a = rho.add(&h.scale(t));
            let lmin = a.min_eigenvalue()?;
            total += 1;
            if lmin.abs() < band {
                in_band += 1;
            } else if is_state_byrd(&a, 1e-12)? != (lmin >= 0.0) {
                bad += 1;
            }
        }
    }
    ctx.check(
        "byrd",
        "agreement_with_eigenvalues",
        bad as f64,
        0.0,
        format!("{bad} disagreements over {total} instances, {in_band} inside the {band:e} band"),
    );
    Ok(())
}

fn witness(ctx: &mut Ctx) -> Result<(), Failure> {
    let mut rng = seeded_rng(ctx.seed(2));
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for d in 2..=3 {
        for &s in &[0.1, 0.5, 1.0, 5.0] {
            let rho = random_state::<f64, _>(&mut rng, d);
            for m in 2..=d {
                let w = build_multicopy_operator(&rho, s, m)?;
                for _ in 0..100 {
                    let eta = random_state::<f64, _>(&mut rng, d).into_hermitian();
                    let b = eta.scale((1.0 + s) / s).sub(&rho.as_hermitian().scale(1.0 / s));
                    worst = worst.max((w.trace_product(&tensor_power(&eta, m)?) - e_m(&b, m)?).abs());
                    cases += 1;
                }
            }
        }
    }
    ctx.check("witness", "multicopy_contract", worst, 1e-8, format!("{cases} (rho, s, m, eta) cases"));

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let s = 0.05 + 4.0 * rng.random::<f64>();
        let built = build_multicopy_operator(&rho, s, 2)?;
        worst = worst.max(built.max_abs_diff(&qubit_closed_form(&rho, s)?.scale(-0.25)));
    }
    ctx.check("witness", "qubit_closed_form", worst, 1e-9, "50 random (rho, s)".into());

    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let d = 2 + i % 3;
        let rho = random_state::<f64, _>(&mut rng, d);
        let eta = random_state::<f64, _>(&mut rng, d).into_hermitian();
        let eps = 0.01 + rng.random::<f64>();
        let lhs = swap_witness(&rho, eps)?.trace_product(&eta.kron(&eta));
        let diff = rho.as_hermitian().sub(&eta);
        worst = worst.max((lhs - (diff.trace_product(&diff) - eps)).abs());
    }
    ctx.check("witness", "swap_identity", worst, 1e-10, "100 random (rho, eta, eps)".into());

    let f = FreeSet::single(z_set());
    let (mut checked, mut detected, mut violations) = (0usize, 0usize, 0usize);
    let mut round = 0u64;
    while checked < 500 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let r = robustness_union(&rho, &f)?.value;
        let u1 = 0.1 + 0.8 * rng.random::<f64>();
        let u2 = u1 + (0.99 - u1) * rng.random::<f64>();
        let lo = WitnessFamily::new(&rho, u1 * r)?;
        let hi = WitnessFamily::new(&rho, u2 * r)?;
        let est = common_deltas(&[
            compute_deltas(&lo, &f, 200, ctx.seed(100 + round))?,
            compute_deltas(&hi, &f, 200, ctx.seed(100 + round))?,
        ])?;
        round += 1;
        let fam_lo = shift_family(&lo, &est.deltas, 1.0)?;
        let fam_hi = shift_family(&hi, &est.deltas, 1.0)?;
        for _ in 0..50 {
            let w = rng.random::<f64>();
            let eta = DensityMatrix::mixture(&[rho.clone(), random_state(&mut rng, 2)], &[w, 1.0 - w])?;
            checked += 1;
            if detect(&fam_lo, &eta)? {
                detected += 1;
                if !detect(&fam_hi, &eta)? {
                    violations += 1;
                }
            }
        }
    }
    ctx.check(
        "witness",
        "detection_nesting",
        violations as f64,
        0.0,
        format!("{checked} samples, {detected} detected at the smaller s"),
    );
    Ok(())
}

fn duality(ctx: &mut Ctx) -> Result<(), Failure> {
    let mut rng = seeded_rng(ctx.seed(3));
    let f = zx_union();
    let (mut gap, mut oracle): (f64, f64) = (0.0, 0.0);
    let mut mismatches = 0usize;
    for _ in 0..20 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let u = robustness_union(&rho, &f)?;
        for c in &u.per_subset {
            gap = gap.max((c.value - c.dual_value(&rho)).abs());
            oracle = oracle.max((c.value - qubit_l1(&rho, &c.subset_label)).abs());
        }
        let min = u.per_subset.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        if u.value != min {
            mismatches += 1;
        }
    }
    ctx.check("duality", "qubit_primal_dual", gap, 1e-6, "20 states x 2 subsets".into());
    ctx.check("duality", "qubit_l1_oracle", oracle, 1e-6, "20 states x 2 subsets".into());
    ctx.check("duality", "union_is_minimum", mismatches as f64, 0.0, "20 states".into());

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::pure(&[Complex::new(h, 0.0), Complex::new(h, 0.0)])?;
    let r = robustness_convex(&plus, &z_set())?.value;
    ctx.check("duality", "plus_state", (r - 1.0).abs(), 1e-6, format!("R = {r}"));

    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let vs = (0..4).map(|_| random_state::<f64, _>(&mut rng, 3)).collect();
        let k = ConvexFreeSet::polytope("p", vs)?;
        let rho = random_state::<f64, _>(&mut rng, 3);
        let c = robustness_convex(&rho, &k)?;
        if c.value.is_finite() {
            worst = worst.max((c.value - c.dual_value(&rho)).abs());
        }
    }
    ctx.check("duality", "qutrit_primal_dual", worst, 1e-6, "5 random polytopes".into());
    Ok(())
}

fn theorems(ctx: &mut Ctx) -> Result<(), Failure> {
    let mut rng = seeded_rng(ctx.seed(4));
    let z = FreeSet::single(z_set());
    let mut failures = 0usize;
    for i in 0..20 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        if !theorem1_boundary_check(&rho, &z, 0.02, 1000, ctx.seed(200 + i))?.passed() {
            failures += 1;
        }
    }
    ctx.check("theorems", "detection_boundary", failures as f64, 0.0, "20 states at 0.98 R and 1.02 R".into());

    let f = zx_union();
    let (mut failures, mut tightest) = (0usize, f64::INFINITY);
    for i in 0..20 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let rep = verify_qualitative_advantage(&rho, &f, 1000, ctx.seed(300 + i))?;
        tightest = tightest.min(rep.margin / (3.0 * rep.std_error));
        if !rep.passed {
            failures += 1;
        }
    }
    ctx.check(
        "theorems",
        "qualitative_advantage",
        failures as f64,
        0.0,
        format!("20 states; smallest margin / (3 SE) = {tightest:.3}"),
    );

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        worst = worst.max(worst_case_advantage(&rho, &f, 10_000)?.relative_error);
    }
    ctx.check("theorems", "worst_case_achievability", worst, 2e-3, "20 states, N = 10^4, relative error".into());

    let mut excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let n = 2 + rng.random_range(0..3);
        let outcomes = 2 + rng.random_range(0..2);
        let e: ChannelEnsemble<f64> = random_ensemble(&mut rng, 2, 2, n, outcomes)?;
        let m = random_povm::<f64, _>(&mut rng, 2, n)?;
        for k in f.subsets() {
            let r = robustness_convex(&rho, k)?.value;
            excess = excess.max(fixed_task_advantage(&rho, k, &e, &m)? - (1.0 + r));
        }
    }
    ctx.check("theorems", "worst_case_upper_bound", excess, 1e-6, "100 random (ensemble, POVM) pairs".into());

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let e: ChannelEnsemble<f64> = random_ensemble(&mut rng, 2, 2, 2, 2)?;
        let eta = random_state::<f64, _>(&mut rng, 2).into_hermitian();
        let opt = optimal_measurement(&e, &eta)?;
        let outs: Vec<HermitianMatrix<f64>> = e
            .channels()
            .iter()
            .map(|c| c.apply(&eta).and_then(|o| o.to_dense()))
            .collect::<CoreResult<_>>()?;
        let p = e.priors();
        let gamma = outs[0].scale(p[0]).sub(&outs[1].scale(p[1]));
        worst = worst.max((opt.value - 0.5 * (1.0 + gamma.trace_norm()?)).abs());
        for _ in 0..200 {
            let m = random_povm::<f64, _>(&mut rng, 2, 2)?;
            worst = worst.max(success_probability(&e, &m, &eta)? - opt.value);
        }
    }
    ctx.check("theorems", "helstrom", worst, 1e-6, "50 binary ensembles, 200 sampled POVMs each".into());

    let mut worst: f64 = 0.0;
    for i in 0..6 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let r = robustness_union(&rho, &z)?.value;
        let base = WitnessFamily::new(&rho, 0.9 * r)?;
        let est = compute_deltas(&base, &z, 300, ctx.seed(400 + i))?;
        let fam = shift_family(&base, &est.deltas, 1.0)?;
        let task = task_from_witness(&fam, 2)?;
        let w = &fam.members[&2];
        let a = HermitianMatrix::identity(4).scale(0.5).sub(&w.scale(0.5 / w.operator_norm()?));
        for _ in 0..5 {
            let eta = tensor_power(&random_state::<f64, _>(&mut rng, 2).into_hermitian(), 2)?;
            worst = worst.max((optimal_measurement(&task, &eta)?.value - 0.5 * (1.0 + a.trace_product(&eta))).abs());
        }
        let n = 10usize.pow(1 + (i % 4) as u32);
        let x = random_state::<f64, _>(&mut rng, 2).into_hermitian().scale(2.0);
        let e = achieving_ensemble(&x, n)?;
        let a = x.scale(1.0 / x.operator_norm()?);
        let eta = random_state::<f64, _>(&mut rng, 2).into_hermitian();
        let want = (1.0 - 1.0 / n as f64) * a.trace_product(&eta) + 1.0 / n as f64;
        worst = worst.max((optimal_measurement(&e, &eta)?.value - want).abs());
    }
    ctx.check("theorems", "task_closed_forms", worst, 1e-9, "witness tasks and achieving ensembles".into());
    Ok(())
}
