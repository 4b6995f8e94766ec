//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`); exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use rand::Rng;
use wll::cascade::{
    grid_size, symmetry_check, term_index, term_position, wavelet_run,
};
use wll::cuntzrep::{classify, lambda0, minimal_subspace, sigma_fixed_space, window_size};
use wll::filterbank::*;
use wll::linalg::{cr, C64};
use wll::loopgroup::{
    build_loop, examples, factorize, norm_bound_check, two_param_coeffs,
    MatrixLoop, TwoParamPoint,
};
use wll::polyalg::ComplexPoly;
use wll::waveclass::*;

// Pinned tolerances.
const COEFF_TOL: f64 = 1e-10;
const NULL_TOL: f64 = 1e-9;
const REMAINDER_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;
const OPERATOR_TOL: f64 = 1e-12;
const ROUND_TRIP_TOL: f64 = 1e-12;
const REBUILD_TOL: f64 = 1e-9;
const PRODUCT_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let census = tight_frame_census().map_err(|e| e.to_string())?;
    ensure(census.len() == 4, || format!("{} census rows", census.len()))?;
    let lambdas = [0.5, 0.5, 0.0, 1.0];
    let cycles = [2, 2, 2, 4];
    for (k, rec) in census.iter().enumerate() {
        let dev = rec.coeffs.iter().zip(&CENSUS_ROWS[k]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ensure(dev < COEFF_TOL, || format!("row {k}: coefficient deviation {dev:e}"))?;
        ensure((rec.lambda0 - lambdas[k]).abs() < COEFF_TOL, || format!("row {k}: λ0 = {}", rec.lambda0))?;
        ensure(rec.cycle_length == cycles[k], || format!("row {k}: cycle length {}", rec.cycle_length))?;
        ensure(rec.classification.is_irreducible() == (k < 2), || {
            format!("row {k}: {}", rec.classification.tag())
        })?;
    }
    Ok("rows, λ0 = (1/2, 1/2, 0, 1), cycles (2,2,2,4), split irreducible/reducible".into())
}

fn criterion_2() -> Outcome {
    let cases: [(&str, MatrixLoop, bool, usize); 4] = [
        ("Haar", examples::haar(), false, 2),
        ("B", examples::loop_b(), true, 1),
        ("1⊕B", examples::loop_b().one_plus().map_err(|e| e.to_string())?, false, 2),
        ("B⊕B", examples::loop_b().direct_sum(&examples::loop_b()).map_err(|e| e.to_string())?, true, 1),
    ];
    let mut dims = Vec::new();
    for (name, a, irreducible, min_dim) in &cases {
        let dim = sigma_fixed_space(a).map_err(|e| e.to_string())?.dim;
        let c = classify(a).map_err(|e| e.to_string())?;
        ensure(c.is_irreducible() == *irreducible, || format!("{name}: {}", c.tag()))?;
        let ok = if *irreducible { dim == 1 } else { dim >= *min_dim };
        ensure(ok, || format!("{name}: fixed dim {dim}"))?;
        dims.push(format!("{name}:{dim}"));
    }
    Ok(format!("fixed dims {}", dims.join(" ")))
}

fn criterion_3() -> Outcome {
    let mut r = common::rng(3003);
    let mut tested = 0;
    while tested < 200 {
        let g = [2, 3, 4][tested % 3];
        let a = common::random_loop(&mut r, 2, g);
        if lambda0(&a) <= 1e-6 {
            continue;
        }
        let ms = minimal_subspace(&a).map_err(|e| e.to_string())?;
        ensure(ms.dim == 2 * g, || format!("g={g}: dim 𝓛 = {}", ms.dim))?;
        ensure(ms.dim == window_size(2, g) + 1, || "window mismatch".into())?;
        tested += 1;
    }
    let fb = FilterBank::from_lowpass(&CENSUS_ROWS[2].map(cr)).map_err(|e| e.to_string())?;
    let a = loop_from_filters(&fb).map_err(|e| e.to_string())?;
    let ms = minimal_subspace(&a).map_err(|e| e.to_string())?;
    let e0: f64 = (0..ms.dim).map(|c| ms.basis[(0, c)].norm_sqr()).sum();
    ensure(e0 < 1.0 - NULL_TOL, || format!("e0 component {e0} in 𝓛"))?;
    let f = monomial_filtration(&fb).map_err(|e| e.to_string())?;
    let reduced = loop_from_filters(&f.reduced).map_err(|e| e.to_string())?;
    let (g0, g1) = (a.genus().map_err(|e| e.to_string())?, reduced.genus().map_err(|e| e.to_string())?);
    ensure(g1 + 1 == g0, || format!("genus {g0} -> {g1}"))?;
    Ok(format!("200 random loops full, λ0=0 row: ‖P_𝓛 e0‖² = {e0:.3}, genus {g0}→{g1}"))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut swept = 0;
    let mut k = 0;
    while swept < 500 {
        // θ runs over the part of [0, π/2] where the curve exists
        let t = FRAC_PI_2 * (k as f64 + 0.5) / 700.0;
        k += 1;
        ensure(k < 10_000, || "curve sweep did not reach 500 points".into())?;
        let Some(pt) = moment_curve_point(t) else { continue };
        let m0 = lowpass_poly(&two_param_coeffs(pt));
        let sq = ComplexPoly::from_real(&[1.0, 2.0, 1.0]);
        let (_, rem) = m0.divmod(&sq).map_err(|e| e.to_string())?;
        worst = worst.max(rem.norm());
        swept += 1;
    }
    ensure(worst < REMAINDER_TOL, || format!("(1+z)² remainder {worst:e}"))?;
    let us = ultra_smooth_point();
    let (_, rem3) = lowpass_poly(&two_param_coeffs(us))
        .divmod(&ComplexPoly::from_real(&[1.0, 3.0, 3.0, 1.0]))
        .map_err(|e| e.to_string())?;
    ensure(rem3.norm() < REMAINDER_TOL, || format!("(1+z)³ remainder {:e}", rem3.norm()))?;
    ensure((us.theta - 0.89).abs() < 5e-3 && (us.rho - 0.39).abs() < 5e-3, || format!("{us:?}"))?;
    let mut r = common::rng(4004);
    let mut off = 0;
    while off < 1000 {
        let (t, p) = (r.random_range(0.0..PI), r.random_range(0.0..PI));
        if ((2.0 * t).cos() + (2.0 * p).cos() - 0.5).abs() < 1e-6 {
            continue;
        }
        let p_ord = moment_order(&lowpass_poly(&two_param_coeffs(TwoParamPoint::new(t, p))), MOMENT_TOL);
        ensure(p_ord == 1, || format!("off-curve ({t}, {p}) has order {p_ord}"))?;
        off += 1;
    }
    Ok(format!(
        "curve remainder ≤ {:.1e}, cubic remainder {:.1e} at ({:.4}, {:.4})",
        worst.abs(),
        rem3.norm().abs(),
        us.theta,
        us.rho
    ))
}

/// Polynomials in a_0 … a_5, as sorted exponent lists with counts.
#[derive(Clone, Debug, PartialEq, Default)]
struct Sym(std::collections::BTreeMap<Vec<u8>, i64>);

impl std::ops::Add for Sym {
    type Output = Sym;
    fn add(mut self, rhs: Sym) -> Sym {
        for (k, v) in rhs.0 {
            *self.0.entry(k).or_insert(0) += v;
        }
        self.0.retain(|_, v| *v != 0);
        self
    }
}

impl std::ops::Mul for Sym {
    type Output = Sym;
    fn mul(self, rhs: Sym) -> Sym {
        let mut out = Sym::default();
        for (ka, va) in &self.0 {
            for (kb, vb) in &rhs.0 {
                let mut k: Vec<u8> = ka.iter().chain(kb).copied().collect();
                k.sort_unstable();
                *out.0.entry(k).or_insert(0) += va * vb;
            }
        }
        out.0.retain(|_, v| *v != 0);
        out
    }
}

impl num_traits::Zero for Sym {
    fn zero() -> Self {
        Sym::default()
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

fn criterion_5() -> Outcome {
    use num_traits::Zero;
    let vars: Vec<Sym> = (0..6u8).map(|k| Sym([(vec![k], 1)].into())).collect();
    let one = Sym([(vec![], 1)].into());
    for n in 0..=3u32 {
        let grid = wll::cascade::cascade_run(&vars, one.clone(), n).map_err(|e| e.to_string())?;
        let mut expect = vec![Sym::zero(); grid_size(3, n)];
        for code in 0..6usize.pow(n) {
            let digits: Vec<usize> = (0..n).map(|i| (code / 6usize.pow(n - 1 - i)) % 6).collect();
            let mut key: Vec<u8> = digits.iter().map(|&d| d as u8).collect();
            key.sort_unstable();
            let idx = term_index(&digits);
            let (num, den) = term_position(&digits);
            ensure(num * (1u64 << n) / den == idx as u64, || "position/index mismatch".into())?;
            expect[idx] = expect[idx].clone() + Sym([(key, 1)].into());
        }
        ensure(grid.values == expect, || format!("bookkeeping differs at level {n}"))?;
    }
    let nine_quarters = Sym([(vec![1, 4], 1), (vec![3, 3], 1), (vec![2, 5], 1)].into());
    let level2 = wll::cascade::cascade_run(&vars, one, 2).map_err(|e| e.to_string())?;
    ensure(level2.values[9] == nine_quarters, || "x = 9/4 entry".into())?;
    for n in 0..=10u32 {
        ensure(grid_size(3, n) == 5 * (1 << n) - 4, || format!("q at n = {n}"))?;
    }
    let rep = symmetry_check(0.7, 1.3, 8).map_err(|e| e.to_string())?;
    ensure(rep.reflection < SYMMETRY_TOL, || format!("reflection {:e}", rep.reflection))?;

    let n = 8;
    let fa = filters_from_loop(&examples::hadamard_diag_1_z());
    let fb = filters_from_loop(&examples::loop_b());
    let re = |v: Vec<C64>| v.iter().map(|c| c.re).collect::<Vec<f64>>();
    let psi_a = wavelet_run(&fa.lowpass_real(), &re(fa.scaled(1)), 1.0, n).map_err(|e| e.to_string())?;
    let psi_b = wavelet_run(&fb.lowpass_real(), &re(fb.scaled(1)), 1.0, n).map_err(|e| e.to_string())?;
    let shift = 1usize << (n + 1);
    for (i, v) in psi_b.values.iter().enumerate() {
        let from_a = if i >= shift { psi_a.values.get(i - shift).copied().unwrap_or(0.0) } else { 0.0 };
        ensure(*v == from_a, || format!("ψ_B differs from shifted ψ_A at index {i}"))?;
    }
    for (i, v) in psi_a.values.iter().enumerate() {
        ensure(*v == 0.0 || psi_b.values.get(i + shift) == Some(v), || format!("ψ_A tail at {i}"))?;
    }
    Ok(format!("levels 0–3 symbolic, reflection {:.1e}, ψ shift exact", rep.reflection))
}

fn criterion_6() -> Outcome {
    let mut r = common::rng(6006);
    for _ in 0..50 {
        let g = r.random_range(1..5);
        let fb = filters_from_loop(&common::random_loop(&mut r, 2, g));
        let xi = common::random_sparse(&mut r, 10, 12);
        let scale = seq_norm(&xi).max(1.0);
        for j in 0..2 {
            for k in 0..2 {
                let out = apply_s_adjoint(&fb, j, &apply_s(&fb, k, &xi));
                let diff = if j == k { seq_norm(&seq_sub(&out, &xi)) } else { seq_norm(&out) };
                ensure(diff <= OPERATOR_TOL * scale, || format!("S_{j}* S_{k} residual {diff:e}"))?;
            }
        }
        let sum = seq_add(
            &apply_s(&fb, 0, &apply_s_adjoint(&fb, 0, &xi)),
            &apply_s(&fb, 1, &apply_s_adjoint(&fb, 1, &xi)),
        );
        let diff = seq_norm(&seq_sub(&sum, &xi));
        ensure(diff <= OPERATOR_TOL * scale, || format!("Σ S S* residual {diff:e}"))?;
        let mut total = coarse_projection(&fb, 3, &xi);
        for m in 1..=3 {
            total = seq_add(&total, &subband_projection(&fb, m, &xi).map_err(|e| e.to_string())?);
        }
        let diff = seq_norm(&seq_sub(&total, &xi));
        ensure(diff <= OPERATOR_TOL * scale, || format!("telescoping residual {diff:e}"))?;
    }
    for _ in 0..20 {
        let g = r.random_range(1..5);
        let a = common::random_loop(&mut r, 2, g);
        let zs: Vec<C64> = (0..100)
            .map(|_| C64::from_polar(r.random_range(0.25f64..4.0), r.random_range(0.0..2.0 * PI)))
            .collect();
        ensure(norm_bound_check(&a, &zs).map_err(|e| e.to_string())?, || "norm bound violated".into())?;
    }
    Ok("Cuntz relations, telescoping, annulus norm bounds".into())
}

fn criterion_7() -> Outcome {
    let mut r = common::rng(7007);
    let mut worst_rt: f64 = 0.0;
    for _ in 0..100 {
        let (n, g) = (r.random_range(2..4), r.random_range(1..5));
        let a = common::random_loop(&mut r, n, g);
        let back = loop_from_filters(&filters_from_loop(&a)).map_err(|e| e.to_string())?;
        worst_rt = worst_rt.max(common::coeff_diff(&a, &back));
    }
    ensure(worst_rt <= ROUND_TRIP_TOL, || format!("loop↔filter {worst_rt:e}"))?;
    let mut loops: Vec<MatrixLoop> = CENSUS_ROWS
        .iter()
        .map(|row| loop_from_filters(&FilterBank::from_lowpass(&row.map(cr)).expect("row")).expect("loop"))
        .collect();
    for _ in 0..50 {
        let (n, g) = (r.random_range(2..4), r.random_range(1..5));
        loops.push(common::random_loop(&mut r, n, g));
    }
    let mut worst_fac: f64 = 0.0;
    for a in &loops {
        let f = factorize(a).map_err(|e| e.to_string())?;
        let rebuilt = build_loop(&f.v, &f.factors)
            .map_err(|e| e.to_string())?;
        worst_fac = worst_fac.max(common::coeff_diff(a, &rebuilt));
    }
    ensure(worst_fac < REBUILD_TOL, || format!("factorize rebuild {worst_fac:e}"))?;
    Ok(format!("round trip {worst_rt:.1e}, rebuild {worst_fac:.1e} over {} loops", loops.len()))
}

fn criterion_8() -> Outcome {
    let mut r = common::rng(8008);
    let mut nonzero = 0;
    for trial in 0..500 {
        let dim = r.random_range(2..6);
        let count = r.random_range(2..4);
        let ps: Vec<_> = (0..count)
            .map(|_| {
                let rank = r.random_range(1..dim);
                // a third of the families commute by construction
                if trial % 3 == 0 {
                    let mut d = wll::linalg::zeros(dim, dim);
                    for i in 0..dim {
                        if r.random_bool(0.5) {
                            d[(i, i)] = cr(1.0);
                        }
                    }
                    d
                } else {
                    common::random_projection(&mut r, dim, rank)
                }
            })
            .collect();
        let t = wll::cuntzrep::projection_product_test(&ps).map_err(|e| e.to_string())?;
        if !t.product_is_zero {
            nonzero += 1;
            ensure(t.is_projection == t.all_commute, || format!("trial {trial}: {t:?}"))?;
        }
    }
    // rank one, |⟨v1, v2⟩| = 1
    let v = common::random_matrix(&mut r, 3, 1).normalize();
    let phase = C64::from_polar(1.0, 0.9);
    let p1 = &v * v.adjoint();
    let w = &v * phase;
    let p2 = &w * w.adjoint();
    let t = wll::cuntzrep::projection_product_test(&[p1.clone(), p2.clone()]).map_err(|e| e.to_string())?;
    ensure(t.is_projection && t.all_commute, || format!("coincidence case {t:?}"))?;
    ensure(wll::linalg::max_abs_diff(&p1, &p2) < PRODUCT_TOL, || "projections differ".into())?;
    Ok(format!("{nonzero} non-zero products, flags agree"))
}

fn criterion_9() -> Outcome {
    let shaded: BTreeSet<&str> = [
        "ce", "de", "df", "ee", "ef", "eg", "fe", "ff", "fg", "fh", "hf", "hg", "hh", "hi", "ig", "ih",
        "ii", "jh", "ji", "ki",
    ]
    .into();
    let boxed: BTreeSet<&str> = ["dd", "dg", "gg", "jg", "jj"].into();
    let name = |i: usize, j: usize| format!("{}{}", (b'a' + i as u8) as char, (b'a' + j as u8) as char);
    let recs = grid_scan((0.0, PI), (0.0, PI), PI / 12.0).map_err(|e| e.to_string())?;
    ensure(recs.len() == 144, || format!("{} cells", recs.len()))?;
    for (idx, rec) in recs.iter().enumerate() {
        let (i, j) = (idx / 12, idx % 12);
        let cell = name(i, j);
        let div = rec.flags.diverges_left || rec.flags.diverges_right;
        ensure(div == shaded.contains(cell.as_str()), || format!("shading at {cell}"))?;
        ensure(rec.flags.marginal == boxed.contains(cell.as_str()), || format!("marginal at {cell}"))?;
        ensure(!(i == 3) || rec.embedding.embed2_5, || format!("θ=π/4 line at {cell}"))?;
        ensure(!(i == 9) || rec.embedding.embed0_3, || format!("θ=3π/4 line at {cell}"))?;
        ensure(!(j == 0) || rec.embedding.embed1_4, || format!("ρ=0 line at {cell}"))?;
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let n = 600;
    let t0 = Instant::now();
    let fine = pool.install(|| grid_scan((0.0, PI), (0.0, PI), PI / n as f64)).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let hits: Vec<(usize, usize)> = fine
        .iter()
        .enumerate()
        .filter(|(_, r)| r.cohen != CohenClass::Strict)
        .map(|(idx, _)| (idx / n, idx % n))
        .collect();
    ensure(hits == [(0, 0), (150, 300), (300, 300), (450, 300)], || format!("tight-frame cells {hits:?}"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("π/600 sweep took {elapsed:?}"))?;
    Ok(format!("layout pattern exact; π/600 sweep: 4 tight-frame cells, {:.2}s single-threaded", elapsed.as_secs_f64()))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 9] = [
        (1, "census reproduction", criterion_1, Duration::from_secs(1)),
        (2, "worked-example classification", criterion_2, Duration::from_secs(5)),
        (3, "minimal-subspace theorem", criterion_3, Duration::from_secs(60)),
        (4, "moment conditions", criterion_4, Duration::from_secs(60)),
        (5, "cascade fidelity", criterion_5, Duration::from_secs(60)),
        (6, "operator identities", criterion_6, Duration::from_secs(60)),
        (7, "round trips", criterion_7, Duration::from_secs(10)),
        (8, "projection-product lemma", criterion_8, Duration::from_secs(60)),
        (9, "scan reproduction", criterion_9, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (id, title, run, budget) in criteria {
        let t0 = Instant::now();
        let out = run();
        let dt = t0.elapsed();
        let out = match out {
            Ok(msg) if dt > budget => Err(format!("{msg}; over budget {budget:?}")),
            other => other,
        };
        match out {
            Ok(msg) => println!("PASS criterion {id} ({title}): {msg} [{:.3}s]", dt.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {id} ({title}): {msg} [{:.3}s]", dt.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
