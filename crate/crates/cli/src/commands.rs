//! `robustness`, `witness` and `discriminate`.

use std::path::Path;

use genrob_core::discrimination::{verify_qualitative_advantage, worst_case_advantage, WorstCaseReport};
use genrob_core::freesets::sample_free;
use genrob_core::io::{certificate_to_json, parse_freeset, parse_state, witness_to_json};
use genrob_core::robustness::{robustness_union_with, RobustnessOptions, UnionRobustness};
use genrob_core::witness::{compute_deltas, min_shifted_s, shift_family, WitnessFamily};
use genrob_core::{Density, FreeSet};
use serde_json::{json, Value};

use crate::plot::{sweep_svg, write_csv, AdvantageRow};
use crate::report::{
    emit, num, read_input, write_file, Config, Failure, EXIT_NOT_APPLICABLE, EXIT_OK, EXIT_VERIFICATION,
    EXIT_WITNESS_REGIME,
};
use crate::{GlobalOpts, Mode};

struct Inputs {
    rho: Density,
    f: FreeSet,
    state_text: String,
    freeset_text: String,
}

fn load(state: &Path, freeset: &Path) -> Result<Inputs, Failure> {
    let state_text = read_input(state)?;
    let freeset_text = read_input(freeset)?;
    let rho: Density = parse_state(&state_text).map_err(|e| Failure::input(format!("{}: {e}", state.display())))?;
    let f: FreeSet = parse_freeset(&freeset_text).map_err(|e| Failure::input(format!("{}: {e}", freeset.display())))?;
    if rho.dim() != f.dim() {
        return Err(Failure::input(format!(
            "state has dimension {} but the free set has dimension {}",
            rho.dim(),
            f.dim()
        )));
    }
    Ok(Inputs {
        rho,
        f,
        state_text,
        freeset_text,
    })
}

fn config(cmd: &str, g: &GlobalOpts, inp: &Inputs) -> Config {
    Config::new(cmd)
        .arg("seed", g.seed)
        .arg("tol", g.tol)
        .arg("cap_dim", g.cap_dim)
        .input("state", &inp.state_text)
        .input("freeset", &inp.freeset_text)
}

fn union_json(u: &UnionRobustness<f64>) -> Value {
    json!({
        "value": num(u.value),
        "subset": u.best_certificate().subset_label,
        "subsets": u.per_subset.iter().map(certificate_to_json).collect::<Vec<_>>(),
    })
}

pub fn robustness(g: &GlobalOpts, state: &Path, freeset: &Path) -> Result<u8, Failure> {
    let inp = load(state, freeset)?;
    let mut opts = RobustnessOptions::default();
    if let Some(t) = g.tol {
        if !(t > 0.0) {
            return Err(Failure::input("--tol must be positive"));
        }
        opts.abs_tol = t;
    }
    let u = robustness_union_with(&inp.rho, &inp.f, &opts)?;
    emit(&g.out, "robustness.json", &config("robustness", g, &inp), g.seed, &union_json(&u))?;
    Ok(if u.value.is_finite() { EXIT_OK } else { EXIT_NOT_APPLICABLE })
}

pub fn witness(g: &GlobalOpts, state: &Path, freeset: &Path, s_arg: &str, c: f64, samples: usize) -> Result<u8, Failure> {
    let inp = load(state, freeset)?;
    if samples == 0 {
        return Err(Failure::input("--samples must be positive"));
    }
    if !(c > 0.0) {
        return Err(Failure::input("--C must be positive"));
    }
    let s_req = match s_arg {
        "auto" => None,
        t => Some(
            t.parse::<f64>()
                .ok()
                .filter(|s| *s > 0.0)
                .ok_or_else(|| Failure::input(format!("--s expects a positive number or \"auto\", got {t:?}")))?,
        ),
    };
    let cfg = config("witness", g, &inp).arg("s", s_arg).arg("C", c).arg("samples", samples);
    let u = robustness_union_with(&inp.rho, &inp.f, &RobustnessOptions::default())?;
    let r = u.value;
    if r == 0.0 || !r.is_finite() {
        let reason = if r == 0.0 {
            "state is free; nothing to witness"
        } else {
            "robustness is infinite; the construction needs a finite value"
        };
        let rep = json!({ "robustness": num(r), "valid": false, "reason": reason });
        emit(&g.out, "witness_report.json", &cfg, g.seed, &rep)?;
        return Ok(EXIT_NOT_APPLICABLE);
    }
    let s = s_req.unwrap_or(0.9 * r);
    if s >= r {
        // At s >= R the optimal free state of the certificate has every
        // S_{m,rho,s} >= 0, so no shift can make the family valid.
        let sigma = &u.best_certificate().sigma;
        let at_sigma = min_shifted_s(inp.rho.as_hermitian(), s, sigma.as_hermitian());
        let rep = json!({
            "robustness": num(r),
            "s": s,
            "valid": false,
            "reason": "s is not below the robustness: the certificate's free state has all shifted functionals nonnegative",
            "certificate_subset": u.best_certificate().subset_label,
            "min_shifted_s_at_certificate": at_sigma,
        });
        emit(&g.out, "witness_report.json", &cfg, g.seed, &rep)?;
        return Ok(EXIT_WITNESS_REGIME);
    }

    let base = WitnessFamily::with_cap(&inp.rho, s, g.cap_dim)?;
    let est = compute_deltas(&base, &inp.f, samples, g.seed)?;
    let family = shift_family(&base, &est.deltas, c)?;
    let rho_expectation = family.max_expectation(inp.rho.as_hermitian())?;
    let mut free_margin = f64::INFINITY;
    let mut checked = 0;
    let mut points: Vec<Density> = sample_free(&inp.f, samples, g.seed.wrapping_add(1))?
        .into_iter()
        .map(|p| p.state)
        .collect();
    for k in inp.f.subsets() {
        points.extend(k.extreme_points());
    }
    points.push(est.sigma.clone());
    for p in &points {
        free_margin = free_margin.min(family.max_expectation(p.as_hermitian())?);
        checked += 1;
    }
    let valid = rho_expectation < 0.0 && free_margin >= -1e-12;

    let mut text = serde_json::to_string_pretty(&witness_to_json(&family)).expect("witness serializes");
    text.push('\n');
    write_file(&g.out, "witness.json", &text)?;
    let rep = json!({
        "robustness": num(r),
        "s": s,
        "C": c,
        "delta": est.delta,
        "deltas": est.deltas,
        "margin_exact": est.exact,
        "rho_expectation": rho_expectation,
        "free_margin": free_margin,
        "free_points_checked": checked,
        "valid": valid,
    });
    emit(&g.out, "witness_report.json", &cfg, g.seed, &rep)?;
    Ok(if valid { EXIT_OK } else { EXIT_VERIFICATION })
}

fn advantage_rows(rep: &WorstCaseReport<f64>) -> Vec<AdvantageRow> {
    let mut rows: Vec<AdvantageRow> = rep
        .per_subset
        .iter()
        .map(|p| AdvantageRow {
            subset: p.label.clone(),
            target: p.target,
            achieved: p.achieved,
            n: rep.n,
        })
        .collect();
    rows.push(AdvantageRow {
        subset: "union".into(),
        target: rep.target,
        achieved: rep.value,
        n: rep.n,
    });
    rows
}

#[allow(clippy::too_many_arguments)]
pub fn discriminate(
    g: &GlobalOpts,
    state: &Path,
    freeset: &Path,
    mode: Mode,
    n: usize,
    samples: usize,
    sweep: &[usize],
    svg: bool,
) -> Result<u8, Failure> {
    let inp = load(state, freeset)?;
    let cfg = config("discriminate", g, &inp)
        .arg("mode", mode.name())
        .arg("N", n)
        .arg("samples", samples)
        .arg("sweep", sweep)
        .arg("svg", svg);
    match mode {
        Mode::Qualitative => {
            if samples < 2 {
                return Err(Failure::input("--samples must be at least 2"));
            }
            let rep = verify_qualitative_advantage(&inp.rho, &inp.f, samples, g.seed)?;
            let out = json!({
                "mode": "qualitative",
                "robustness": rep.robustness,
                "s": rep.s,
                "delta": rep.delta,
                "target": 1.0,
                "achieved": rep.min_ratio,
                "margin": rep.margin,
                "std_error": rep.std_error,
                "mean_ratio": rep.mean_ratio,
                "samples": rep.samples,
                "seed": g.seed,
                "passed": rep.passed,
            });
            emit(&g.out, "discriminate.json", &cfg, g.seed, &out)?;
            Ok(if rep.passed { EXIT_OK } else { EXIT_VERIFICATION })
        }
        Mode::WorstCase => {
            if n < 2 || sweep.iter().any(|&k| k < 2) {
                return Err(Failure::input("ensemble sizes must be at least 2"));
            }
            let rep = worst_case_advantage(&inp.rho, &inp.f, n)?;
            write_csv(&g.out, "advantage.csv", &advantage_rows(&rep))?;
            let mut sweep_rows = Vec::new();
            for &k in sweep {
                let r = worst_case_advantage(&inp.rho, &inp.f, k)?;
                sweep_rows.extend(advantage_rows(&r).into_iter().filter(|row| row.subset != "union"));
            }
            write_csv(&g.out, "sweep.csv", &sweep_rows)?;
            if svg {
                write_file(&g.out, "sweep.svg", &sweep_svg(&sweep_rows))?;
            }
            let out = json!({
                "mode": "worst-case",
                "target": rep.target,
                "achieved": rep.value,
                "margin": rep.value - rep.target,
                "relative_error": rep.relative_error,
                "tolerance": rep.target * (2.0 / n as f64 + 1e-6),
                "N": n,
                "samples": n,
                "seed": g.seed,
                "subsets": rep.per_subset.iter().map(|p| json!({
                    "subset": p.label,
                    "robustness": num(p.robustness),
                    "target": num(p.target),
                    "achieved": p.achieved,
                })).collect::<Vec<_>>(),
                "passed": rep.passed,
            });
            emit(&g.out, "discriminate.json", &cfg, g.seed, &out)?;
            Ok(if rep.passed { EXIT_OK } else { EXIT_VERIFICATION })
        }
    }
}
