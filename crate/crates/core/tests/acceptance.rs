//! Acceptance criteria. Every test prints one `criterion N: PASS|FAIL` line
//! with the measured figure next to the pinned tolerance.

use genrob_core::discrimination::{
    achieving_ensemble, fixed_task_advantage, optimal_measurement, random_ensemble, random_povm, task_from_witness,
    verify_qualitative_advantage, worst_case_advantage, ChannelEnsemble,
};
use genrob_core::freesets::{ConvexFreeSet, FreeSet};
use genrob_core::qcore::{
    random_hermitian, random_state, seeded_rng, swap_operator, tensor_power, DensityMatrix,
    HermitianMatrix, Matrix,
};
use genrob_core::robustness::{robustness_convex, robustness_union};
use genrob_core::witness::{
    build_multicopy_operator, common_deltas, compute_deltas, detect, is_state_byrd, qubit_closed_form, shift_family,
    swap_witness, theorem1_boundary_check, WitnessFamily,
};
use num_complex::Complex;
use rand::Rng;

const BYRD_BAND: f64 = 1e-8;
const BYRD_TOL: f64 = 1e-12;
const CONTRACT_TOL: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-9;
const DUALITY_TOL: f64 = 1e-6;
const WORST_CASE_REL_TOL: f64 = 2e-3;
const UPPER_BOUND_SLACK: f64 = 1e-6;
const SWAP_TOL: f64 = 1e-10;
const HELSTROM_TOL: f64 = 1e-6;
const TASK_CLOSED_FORM_TOL: f64 = 1e-9;

fn report(n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn plus() -> DensityMatrix<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(&[c(h, 0.0), c(h, 0.0)]).unwrap()
}

fn z_set() -> ConvexFreeSet<f64> {
    ConvexFreeSet::incoherent_computational("z", 2).unwrap()
}

fn zx_union() -> FreeSet<f64> {
    FreeSet::new(vec![z_set(), ConvexFreeSet::qubit_axis("x", 0).unwrap()]).unwrap()
}

/// Elementary symmetric polynomial of the spectrum, by the product expansion.
fn e_m_from_spectrum(a: &HermitianMatrix<f64>, m: usize) -> f64 {
    let vals = a.eig().unwrap().values;
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for &l in &vals {
        for k in (1..=m).rev() {
            e[k] += l * e[k - 1];
        }
    }
    e[m]
}

fn shifted(rho: &DensityMatrix<f64>, s: f64, eta: &HermitianMatrix<f64>) -> HermitianMatrix<f64> {
    eta.scale((1.0 + s) / s).sub(&rho.as_hermitian().scale(1.0 / s))
}

/// `(L^dagger)^{(x)m}(P_anti)` with `L^dagger(Y) = a Y - b tr[rho Y] I`,
/// applied slot by slot.
fn permutation_route(rho: &DensityMatrix<f64>, s: f64, m: usize) -> Matrix<f64> {
    let d = rho.dim();
    let n = d.pow(m as u32);
    let digits = |mut x: usize| -> Vec<usize> {
        let mut v = vec![0; m];
        for k in (0..m).rev() {
            v[k] = x % d;
            x /= d;
        }
        v
    };
    let index = |v: &[usize]| v.iter().fold(0, |acc, &x| acc * d + x);
    // Antisymmetrizer.
    let mut y = Matrix::zeros(n);
    let perms = permutations(m);
    let fact: usize = (1..=m).product();
    for p in &perms {
        let sign = perm_sign(p);
        for col in 0..n {
            let dg = digits(col);
            let permuted: Vec<usize> = (0..m).map(|k| dg[p[k]]).collect();
            let row = index(&permuted);
            y[(row, col)] += c(sign / fact as f64, 0.0);
        }
    }
    let (a, b) = ((1.0 + s) / s, 1.0 / s);
    for slot in 0..m {
        let mut next = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let (di, dj) = (digits(i), digits(j));
                let mut v = y[(i, j)] * a;
                if di[slot] == dj[slot] {
                    let mut acc = c(0.0, 0.0);
                    for p in 0..d {
                        for q in 0..d {
                            let mut ii = di.clone();
                            let mut jj = dj.clone();
                            ii[slot] = p;
                            jj[slot] = q;
                            acc += rho.matrix()[(q, p)] * y[(index(&ii), index(&jj))];
                        }
                    }
                    v -= acc * b;
                }
                next[(i, j)] = v;
            }
        }
        y = next;
    }
    y
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..m {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

fn perm_sign(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 { 1.0 } else { -1.0 }
}

#[test]
fn criterion_1_byrd_equivalence() {
    let mut rng = seeded_rng(101);
    let (mut disagreements, mut in_band, mut total) = (0, 0, 0);
    for d in 2..=4 {
        for _ in 0..1000 {
            let rho = random_state::<f64, _>(&mut rng, d).into_hermitian();
            let mut h = random_hermitian::<f64, _>(&mut rng, d);
            let tr = h.trace() / d as f64;
            h = h.sub(&HermitianMatrix::identity(d).scale(tr));
            let t = rng.random::<f64>() * 0.6 / h.operator_norm().unwrap();
            let a = rho.add(&h.scale(t));
            let lmin = a.min_eigenvalue().unwrap();
            total += 1;
            if lmin.abs() < BYRD_BAND {
                in_band += 1;
                continue;
            }
            if is_state_byrd(&a, BYRD_TOL).unwrap() != (lmin >= 0.0) {
                disagreements += 1;
            }
        }
    }
    let ok = disagreements == 0;
    report(1, ok, format!("{disagreements} disagreements in {total} instances ({in_band} in the {BYRD_BAND:e} band)"));
    assert!(ok);
}

#[test]
fn criterion_2_multicopy_contract() {
    let mut rng = seeded_rng(202);
    let mut worst: f64 = 0.0;
    let mut worst_sym: f64 = 0.0;
    for d in 2..=3 {
        for &s in &[0.1, 0.5, 1.0, 5.0] {
            let rho = random_state::<f64, _>(&mut rng, d);
            for m in 2..=d {
                let w = build_multicopy_operator(&rho, s, m).unwrap();
                for _ in 0..100 {
                    let eta = random_state::<f64, _>(&mut rng, d).into_hermitian();
                    let lhs = w.trace_product(&tensor_power(&eta, m).unwrap());
                    let rhs = e_m_from_spectrum(&shifted(&rho, s, &eta), m);
                    worst = worst.max((lhs - rhs).abs());
                }
                // On the symmetric subspace the operator is unique.
                let oracle = permutation_route(&rho, s, m);
                let psym = sym_projector(d, m);
                let a = psym.matmul(w.matrix()).matmul(&psym);
                let b = psym.matmul(&oracle).matmul(&psym);
                worst_sym = worst_sym.max(a.max_abs_diff(&b));
            }
        }
    }
    let ok = worst <= CONTRACT_TOL && worst_sym <= CONTRACT_TOL;
    report(
        2,
        ok,
        format!("max |tr[W eta^m] - S| = {worst:.3e}, symmetric-part deviation from the permutation route {worst_sym:.3e} (tol {CONTRACT_TOL:e})"),
    );
    assert!(ok);
}

fn sym_projector(d: usize, m: usize) -> Matrix<f64> {
    let n = d.pow(m as u32);
    let perms = permutations(m);
    let mut p = Matrix::zeros(n);
    for perm in &perms {
        for col in 0..n {
            let mut x = col;
            let mut dg = vec![0; m];
            for k in (0..m).rev() {
                dg[k] = x % d;
                x /= d;
            }
            let row = (0..m).fold(0, |acc, k| acc * d + dg[perm[k]]);
            p[(row, col)] += c(1.0 / perms.len() as f64, 0.0);
        }
    }
    p
}

#[test]
fn criterion_3_qubit_closed_form() {
    let mut rng = seeded_rng(303);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let s = 0.05 + 4.0 * rng.random::<f64>();
        let built = build_multicopy_operator(&rho, s, 2).unwrap();
        let closed = qubit_closed_form(&rho, s).unwrap().scale(-0.25);
        worst = worst.max(built.max_abs_diff(&closed));
    }
    let ok = worst <= CLOSED_FORM_TOL;
    report(3, ok, format!("max entrywise deviation {worst:.3e} (tol {CLOSED_FORM_TOL:e})"));
    assert!(ok);
}

#[test]
fn criterion_4_detection_boundary() {
    let mut rng = seeded_rng(404);
    let z = z_set();
    let f = FreeSet::single(z.clone());
    let (mut failures, mut worst_dual, mut worst_oracle): (usize, f64, f64) = (0, 0.0, 0.0);
    for i in 0..20 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let rep = theorem1_boundary_check(&rho, &f, 0.02, 1000, 4000 + i).unwrap();
        if !rep.passed() {
            failures += 1;
        }
        let cert = robustness_convex(&rho, &z).unwrap();
        worst_dual = worst_dual.max((cert.value - cert.dual_value(&rho)).abs());
        // Qubit robustness of coherence is the l1 coherence 2|rho_01|.
        worst_oracle = worst_oracle.max((cert.value - 2.0 * rho.matrix()[(0, 1)].norm()).abs());
    }
    let r_plus = robustness_convex(&plus(), &z).unwrap().value;
    let ok = failures == 0
        && worst_dual <= DUALITY_TOL
        && worst_oracle <= DUALITY_TOL
        && (r_plus - 1.0).abs() <= DUALITY_TOL;
    report(
        4,
        ok,
        format!(
            "{failures}/20 boundary failures; primal-dual {worst_dual:.3e}, l1 oracle {worst_oracle:.3e}, R(|+>) - 1 = {:.3e} (tol {DUALITY_TOL:e})",
            r_plus - 1.0
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_qualitative_advantage() {
    let mut rng = seeded_rng(505);
    let f = zx_union();
    let mut failures = 0;
    let mut tightest = f64::INFINITY;
    for i in 0..20 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let rep = verify_qualitative_advantage(&rho, &f, 1000, 5000 + i).unwrap();
        tightest = tightest.min(rep.margin / (3.0 * rep.std_error));
        if !(rep.min_ratio > 1.0 && rep.passed) {
            failures += 1;
            println!("  state {i}: R = {:.4}, min ratio {:.6}, 3 SE = {:.3e}", rep.robustness, rep.min_ratio, 3.0 * rep.std_error);
        }
    }
    let ok = failures == 0;
    report(5, ok, format!("{failures}/20 failures; smallest margin / (3 SE) = {tightest:.3}"));
    assert!(ok);
}

#[test]
fn criterion_6_worst_case_advantage() {
    let mut rng = seeded_rng(606);
    let f = zx_union();
    let (mut worst_rel, mut eq6_violations): (f64, usize) = (0.0, 0);
    for _ in 0..20 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let rep = worst_case_advantage(&rho, &f, 10_000).unwrap();
        worst_rel = worst_rel.max(rep.relative_error);
        let union = robustness_union(&rho, &f).unwrap();
        let min_k = union.per_subset.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        if union.value != min_k || rep.target != 1.0 + min_k {
            eq6_violations += 1;
        }
    }
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let n = 2 + rng.random_range(0..3);
        let outcomes = 2 + rng.random_range(0..2);
        let e: ChannelEnsemble<f64> = random_ensemble(&mut rng, 2, 2, n, outcomes).unwrap();
        let m = random_povm::<f64, _>(&mut rng, 2, n).unwrap();
        for k in f.subsets() {
            let r = robustness_convex(&rho, k).unwrap().value;
            let adv = fixed_task_advantage(&rho, k, &e, &m).unwrap();
            worst_excess = worst_excess.max(adv - (1.0 + r));
        }
    }
    let ok = worst_rel <= WORST_CASE_REL_TOL && eq6_violations == 0 && worst_excess <= UPPER_BOUND_SLACK;
    report(
        6,
        ok,
        format!(
            "max relative error {worst_rel:.3e} (tol {WORST_CASE_REL_TOL:e}); {eq6_violations} union/min mismatches; max excess over 1 + R_k {worst_excess:.3e} (slack {UPPER_BOUND_SLACK:e})"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_swap_identity() {
    let mut rng = seeded_rng(707);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let d = 2 + i % 3;
        let rho = random_state::<f64, _>(&mut rng, d);
        let eta = random_state::<f64, _>(&mut rng, d).into_hermitian();
        let eps = 0.01 + rng.random::<f64>();
        let w = swap_witness(&rho, eps).unwrap();
        let lhs = w.trace_product(&eta.kron(&eta));
        let diff = rho.as_hermitian().sub(&eta);
        let rhs = diff.trace_product(&diff) - eps;
        worst = worst.max((lhs - rhs).abs());
        // The swap itself: tr[(A (x) B) V] = tr[AB].
        let v = swap_operator::<f64>(d);
        let ab = rho.as_hermitian().kron(&eta);
        worst = worst.max((ab.trace_product(&v) - rho.as_hermitian().trace_product(&eta)).abs());
    }
    let ok = worst <= SWAP_TOL;
    report(7, ok, format!("max deviation {worst:.3e} (tol {SWAP_TOL:e})"));
    assert!(ok);
}

/// `max_{0 <= M <= I} tr[M G]` for a qubit `G` by a grid over
/// `M = a I + b n.sigma` followed by Nelder-Mead polishing.
fn brute_force_binary(g: &HermitianMatrix<f64>) -> f64 {
    let tr = g.trace();
    let gb = bloch_from_state_like(g);
    let value = |p: &[f64]| -> f64 {
        let a = p[0].clamp(0.0, 1.0);
        let lim = a.min(1.0 - a);
        let b = p[1].clamp(-1.0, 1.0) * lim;
        let (th, ph) = (p[2], p[3]);
        let n = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
        a * tr + b * (n[0] * gb[0] + n[1] * gb[1] + n[2] * gb[2])
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; 4]);
    let steps = 24;
    for ia in 0..=steps {
        for ib in 0..=steps {
            for it in 0..=steps {
                for ip in 0..(2 * steps) {
                    let p = vec![
                        ia as f64 / steps as f64,
                        -1.0 + 2.0 * ib as f64 / steps as f64,
                        std::f64::consts::PI * it as f64 / steps as f64,
                        std::f64::consts::PI * ip as f64 / steps as f64,
                    ];
                    let v = value(&p);
                    if v > best.0 {
                        best = (v, p);
                    }
                }
            }
        }
    }
    let mut x = best.1;
    let mut v = best.0;
    for step in [0.05, 0.01, 1e-3, 1e-4, 1e-5] {
        let polished = genrob_core::optim::nelder_mead(|p: &[f64]| -value(p), &x, step, 20_000, 1e-16);
        if -polished.value >= v {
            v = -polished.value;
            x = polished.x;
        }
    }
    v
}

/// `(tr[G s_x], tr[G s_y], tr[G s_z])`.
fn bloch_from_state_like(g: &HermitianMatrix<f64>) -> [f64; 3] {
    let m = g.matrix();
    [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, m[(0, 0)].re - m[(1, 1)].re]
}

#[test]
fn criterion_8_helstrom_and_task_closed_forms() {
    let mut rng = seeded_rng(808);
    let mut worst_helstrom: f64 = 0.0;
    for _ in 0..50 {
        let e: ChannelEnsemble<f64> = random_ensemble(&mut rng, 2, 2, 2, 2).unwrap();
        let eta = random_state::<f64, _>(&mut rng, 2).into_hermitian();
        let opt = optimal_measurement(&e, &eta).unwrap();
        let outs: Vec<HermitianMatrix<f64>> =
            e.channels().iter().map(|ch| ch.apply(&eta).unwrap().to_dense().unwrap()).collect();
        let p = e.priors();
        let gamma = outs[0].scale(p[0]).sub(&outs[1].scale(p[1]));
        let brute = p[1] * outs[1].trace() + brute_force_binary(&gamma);
        worst_helstrom = worst_helstrom.max((opt.value - brute).abs());
    }

    let mut worst_task: f64 = 0.0;
    for i in 0..10 {
        let d = if i < 7 { 2 } else { 3 };
        let rho = random_state::<f64, _>(&mut rng, d);
        let f = FreeSet::single(ConvexFreeSet::incoherent_computational("z", d).unwrap());
        let r = robustness_union(&rho, &f).unwrap().value;
        let base = WitnessFamily::new(&rho, 0.9 * r).unwrap();
        let est = compute_deltas(&base, &f, 300, 80 + i as u64).unwrap();
        let fam = shift_family(&base, &est.deltas, 1.0).unwrap();
        for m in 2..=d {
            let task = task_from_witness(&fam, m).unwrap();
            let w = &fam.members[&m];
            let a = HermitianMatrix::identity(w.dim())
                .scale(0.5)
                .sub(&w.scale(1.0 / (2.0 * w.operator_norm().unwrap())));
            for _ in 0..5 {
                let eta = tensor_power(&random_state::<f64, _>(&mut rng, d).into_hermitian(), m).unwrap();
                let got = optimal_measurement(&task, &eta).unwrap().value;
                worst_task = worst_task.max((got - 0.5 * (1.0 + a.trace_product(&eta))).abs());
            }
        }
    }
    for &n in &[2usize, 7, 100, 10_000] {
        let x = random_state::<f64, _>(&mut rng, 3).into_hermitian().scale(2.5);
        let e = achieving_ensemble(&x, n).unwrap();
        let a = x.scale(1.0 / x.operator_norm().unwrap());
        for _ in 0..5 {
            let eta = random_state::<f64, _>(&mut rng, 3).into_hermitian();
            let got = optimal_measurement(&e, &eta).unwrap().value;
            let want = (1.0 - 1.0 / n as f64) * a.trace_product(&eta) + 1.0 / n as f64;
            worst_task = worst_task.max((got - want).abs());
        }
    }
    let ok = worst_helstrom <= HELSTROM_TOL && worst_task <= TASK_CLOSED_FORM_TOL;
    report(
        8,
        ok,
        format!(
            "Helstrom vs brute force {worst_helstrom:.3e} (tol {HELSTROM_TOL:e}); task closed forms {worst_task:.3e} (tol {TASK_CLOSED_FORM_TOL:e})"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_9_nesting() {
    let mut rng = seeded_rng(909);
    let f = FreeSet::single(z_set());
    let (mut checked, mut detected_lo, mut violations) = (0, 0, 0);
    while checked < 500 {
        let rho = random_state::<f64, _>(&mut rng, 2);
        let r = robustness_union(&rho, &f).unwrap().value;
        let u1 = 0.1 + 0.8 * rng.random::<f64>();
        let u2 = u1 + (0.99 - u1) * rng.random::<f64>();
        let (lo, hi) = (u1 * r, u2 * r);
        let base_lo = WitnessFamily::new(&rho, lo).unwrap();
        let base_hi = WitnessFamily::new(&rho, hi).unwrap();
        let seed = checked as u64;
        let est = common_deltas(&[
            compute_deltas(&base_lo, &f, 200, seed).unwrap(),
            compute_deltas(&base_hi, &f, 200, seed).unwrap(),
        ])
        .unwrap();
        let fam_lo = shift_family(&base_lo, &est.deltas, 1.0).unwrap();
        let fam_hi = shift_family(&base_hi, &est.deltas, 1.0).unwrap();
        for _ in 0..50 {
            let eta = if rng.random::<f64>() < 0.5 {
                random_state::<f64, _>(&mut rng, 2)
            } else {
                // Bias towards the interesting region around rho.
                let w = rng.random::<f64>();
                DensityMatrix::mixture(&[rho.clone(), random_state(&mut rng, 2)], &[w, 1.0 - w]).unwrap()
            };
            checked += 1;
            if detect(&fam_lo, &eta).unwrap() {
                detected_lo += 1;
                if !detect(&fam_hi, &eta).unwrap() {
                    violations += 1;
                }
            }
        }
    }
    let ok = violations == 0;
    report(9, ok, format!("{violations} violations over {checked} samples ({detected_lo} detected at the smaller s)"));
    assert!(ok);
}
