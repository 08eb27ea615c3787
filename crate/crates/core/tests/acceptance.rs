//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the console.
//! Exits nonzero when any criterion fails.

use std::time::Instant;

use digiq::cheb::{bessel_coeffs, bessel_i_series, expm_apply, truncation_order, ExpmJob};
use digiq::dd::{Dd, DdComplex};
use digiq::dense;
use digiq::inverse::{discretization_params, inverse_apply, scalar_inverse_check, InverseJob};
use digiq::nr::{auto_format, solve_observed, solve_shadow, NrConfig};
use digiq::pauli::{chernoff_trials, sample_sigma, sigma_expectation_exact, ChernoffPlan, Pauli, PauliString, PauliSum};
use digiq::phys::{expectation_ratio, ground_state_project, thermal_ratio, GroundStateJob, ThermalJob};
use digiq::sparse::{
    diagonal, edge_color_decompose, gershgorin_bounds, laplacian_1d, random_hermitian, transverse_field_ising,
    OperatorFamily, SparseOperator, SpectralEstimate,
};
use digiq::{DigitalState, FixedPointFormat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_vector(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = dense::norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// `s A + c I` with the dense spectrum of `A` mapped onto `[lo, hi]`.
fn with_spectrum(op: &SparseOperator, lo: f64, hi: f64) -> SparseOperator {
    let vals = dense::hermitian_eigenvalues(op).unwrap();
    let (a, b) = (vals[0], vals[vals.len() - 1]);
    let s = (hi - lo) / (b - a);
    op.affine(s, lo - s * a)
}

fn fractional(got: &[Complex64], want: &[Complex64]) -> f64 {
    dense::distance(got, want) / dense::norm(want)
}

struct NrCase {
    op: SparseOperator,
    b: Vec<Complex64>,
    x_star: Vec<Complex64>,
    fixed: Vec<Complex64>,
    format: FixedPointFormat,
}

fn nr_cases() -> Vec<(usize, usize, f64)> {
    (0..50)
        .map(|i| {
            let n = [16, 64, 256][i % 3];
            let d = 2 + i % 7;
            let kappa = 2.0 + 48.0 * i as f64 / 49.0;
            (n, d, kappa)
        })
        .collect()
}

fn criterion_1(cases: &mut Vec<NrCase>) -> Outcome {
    let eps = 1e-6;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut worst_error: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, (n, d, kappa)) in nr_cases().into_iter().enumerate() {
        let raw = random_hermitian(n, d, 1000 + i as u64, i % 2 == 0).unwrap();
        let op = if i % 2 == 0 {
            with_spectrum(&raw, 1.0, kappa)
        } else {
            with_spectrum(&raw, -kappa, -1.0)
        };
        let b = random_vector(n, 2000 + i as u64);
        let x_star = dense::lu_solve(&op, &b).unwrap();
        let x_norm = dense::norm(&x_star);
        let cfg = NrConfig {
            epsilon: eps,
            ..NrConfig::default()
        };
        let format = auto_format(&op, &b, &cfg).unwrap();
        let cfg = NrConfig { format, ..cfg };
        let state = DigitalState::from_c64(&b, format).unwrap();
        let mut contraction = 0.0;
        let mut ratios = Vec::new();
        let result = solve_observed(&op, &state, &cfg, |r, x| {
            ratios.push((r, dense::distance(&x.to_c64(), &x_star)));
        });
        let res = match result {
            Ok(res) => res,
            Err(e) => {
                failures.push(format!("case {i}: {e}"));
                continue;
            }
        };
        if let Some(c) = res.plan.contraction {
            contraction = c;
        }
        for (r, err) in ratios {
            let bound = contraction.powi(r as i32 + 1) * x_norm * (1.0 + 1e-6);
            worst_ratio = worst_ratio.max(err / bound);
        }
        let x = res.solution.to_c64();
        let residual = dense::distance(&op.mul_vec(&x), &b) / dense::norm(&b);
        worst_residual = worst_residual.max(residual);
        worst_error = worst_error.max(fractional(&x, &x_star));
        if res.iterations > res.plan.a_priori_iterations.unwrap_or(usize::MAX) {
            failures.push(format!("case {i}: {} iterations beyond the a-priori count", res.iterations));
        }
        cases.push(NrCase {
            op,
            b,
            x_star,
            fixed: x,
            format,
        });
    }
    let pass = failures.is_empty() && worst_ratio <= 1.0 && worst_residual <= eps && worst_error <= eps;
    outcome(
        pass,
        format!(
            "NR geometric convergence: 50 operators, max err/bound {worst_ratio:.3}, max fractional residual {worst_residual:.2e}, max fractional error {worst_error:.2e}{}",
            if failures.is_empty() { String::new() } else { format!(", failures {failures:?}") }
        ),
    )
}

fn criterion_2() -> Outcome {
    let eps = 1e-8;
    let c = |x: f64| Complex64::new(x, 0.0);
    let swap = SparseOperator::from_oracle(2, |j| vec![(1 - j, c(1.0))], OperatorFamily::Custom { name: "swap".into() }).unwrap();
    let mut ops = vec![swap];
    for s in 0..10u64 {
        let n = [8, 16, 32][s as usize % 3];
        let raw = random_hermitian(n, 3 + s as usize % 3, 3000 + s, s % 2 == 1).unwrap();
        let vals = dense::hermitian_eigenvalues(&raw).unwrap();
        let mid = n / 2;
        let shift = (vals[mid - 1] + vals[mid]) / 2.0;
        ops.push(raw.affine(1.0, -shift));
    }
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut indefinite = 0;
    for (i, op) in ops.iter().enumerate() {
        let vals = dense::hermitian_eigenvalues(op).unwrap();
        if vals[0] < 0.0 && vals[vals.len() - 1] > 0.0 {
            indefinite += 1;
        }
        let b = random_vector(op.dim(), 4000 + i as u64);
        let want = dense::lu_solve(op, &b).unwrap();
        let cfg = NrConfig {
            epsilon: eps,
            ..NrConfig::default()
        };
        let cfg = NrConfig {
            format: auto_format(op, &b, &cfg).unwrap(),
            ..cfg
        };
        match digiq::nr::solve(op, &DigitalState::from_c64(&b, cfg.format).unwrap(), &cfg) {
            Ok(res) => worst = worst.max(fractional(&res.solution.to_c64()[..op.dim()], &want)),
            Err(e) => failures.push(format!("operator {i}: {e}")),
        }
    }
    outcome(
        failures.is_empty() && worst <= eps && indefinite == ops.len(),
        format!(
            "indefinite solve: {indefinite}/{} indefinite operators, max fractional error vs LU {worst:.2e} (target {eps:e}){}",
            ops.len(),
            if failures.is_empty() { String::new() } else { format!(", failures {failures:?}") }
        ),
    )
}

fn dd_mul(a: DdComplex, b: DdComplex) -> DdComplex {
    DdComplex {
        re: a.re * b.re - a.im * b.im,
        im: a.re * b.im + a.im * b.re,
    }
}

/// `e^{-(A - shift) t} b` by Taylor steps in double-double.
fn dd_expm_oracle(op: &SparseOperator, shift: f64, norm_bound: f64, t: f64, b: &[DdComplex]) -> Vec<DdComplex> {
    let steps = ((norm_bound * t) / 0.5).ceil().max(1.0) as usize;
    let tau = Dd::new(t) / Dd::new(steps as f64);
    let apply = |v: &[DdComplex]| -> Vec<DdComplex> {
        (0..op.dim())
            .map(|j| {
                let mut acc = DdComplex {
                    re: Dd::new(-shift) * v[j].re,
                    im: Dd::new(-shift) * v[j].im,
                };
                for &(l, a) in op.row(j) {
                    let p = dd_mul(DdComplex { re: Dd::new(a.re), im: Dd::new(a.im) }, v[l]);
                    acc = DdComplex { re: acc.re + p.re, im: acc.im + p.im };
                }
                acc
            })
            .collect()
    };
    let mut x = b.to_vec();
    for _ in 0..steps {
        let mut term = x.clone();
        let mut sum = x.clone();
        for k in 1..80 {
            let mv = apply(&term);
            let c = -tau / Dd::new(k as f64);
            term = mv.iter().map(|z| DdComplex { re: z.re * c, im: z.im * c }).collect();
            let mut biggest: f64 = 0.0;
            for (s, z) in sum.iter_mut().zip(&term) {
                s.re += z.re;
                s.im += z.im;
                biggest = biggest.max(z.re.abs().to_f64()).max(z.im.abs().to_f64());
            }
            if biggest < 1e-36 {
                break;
            }
        }
        x = sum;
    }
    x
}

fn criterion_3() -> Outcome {
    let times = [0.5, 1.0, 5.0, 20.0];
    let tolerances = [1e-3, 1e-6, 1e-9];
    let mut tail_ok = true;
    let mut worst_tail: f64 = 0.0;
    for &t in &times {
        for &eps0 in &tolerances {
            let r = truncation_order(t, eps0).unwrap();
            let tail = (r + 1..=r + 200).fold(Dd::ZERO, |acc, k| acc + bessel_i_series(k, t) * Dd::new(2.0)).to_f64();
            worst_tail = worst_tail.max(tail / eps0);
            tail_ok &= tail < eps0;
        }
    }
    let operators = [("laplacian N=256", laplacian_1d(256)), ("TFI n=8", transverse_field_ising(8, 1.0, 1.0))];
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for (name, op) in &operators {
        let bounds = gershgorin_bounds(op).unwrap();
        let (lo, hi) = (bounds.lambda_min_lower, bounds.lambda_max_upper);
        let scale = (hi - lo) / 2.0;
        let b = DigitalState::from_c64(&random_vector(op.dim(), 77), FixedPointFormat::default()).unwrap();
        let b_dd = b.to_dd();
        let b_norm = b.norm();
        for &t_hat in &times {
            // the listed times are Chebyshev-domain times
            let t = t_hat / scale;
            let oracle = dd_expm_oracle(op, lo, hi - lo, t, &b_dd);
            for &eps0 in &tolerances {
                let job = ExpmJob {
                    op,
                    bounds,
                    t,
                    epsilon0: eps0,
                    format: None,
                };
                match expm_apply(&job, &b) {
                    Ok(res) => {
                        let got = res.state.to_dd();
                        let err = got
                            .iter()
                            .zip(&oracle)
                            .map(|(g, w)| {
                                let (re, im) = ((g.re - w.re).to_f64(), (g.im - w.im).to_f64());
                                re * re + im * im
                            })
                            .sum::<f64>()
                            .sqrt();
                        // bounded part: prefactor e^{-shift t} becomes e^{-t_hat}
                        let allowed = 2.0 * eps0 * (-res.rescaled_time).exp() * b_norm;
                        worst = worst.max(err / allowed);
                    }
                    Err(e) => errors.push(format!("{name} t={t_hat} eps0={eps0}: {e}")),
                }
            }
        }
    }
    outcome(
        tail_ok && errors.is_empty() && worst <= 1.0,
        format!(
            "Chebyshev certification: max series tail/eps0 {worst_tail:.3}, max error/(2 eps0 prefactor) {worst:.3} over 24 runs{}",
            if errors.is_empty() { String::new() } else { format!(", errors {errors:?}") }
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut worst_rel: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut worst_even: f64 = 0.0;
    for i in 0..=60 {
        let t = 30.0 * i as f64 / 60.0 + if i == 0 { 0.01 } else { 0.0 };
        let miller = bessel_coeffs(t, 60).unwrap();
        let mut series = Vec::new();
        for k in 0..=60 {
            let want = bessel_i_series(k, t);
            let got = miller.bessel_i(k);
            if want.to_f64() > 0.0 {
                worst_rel = worst_rel.max(((got - want) / want).abs().to_f64());
            }
            series.push(want);
        }
        let all = (1..=400).fold(bessel_i_series(0, t), |acc, k| acc + bessel_i_series(k, t) * Dd::new(2.0));
        worst_norm = worst_norm.max(((all - Dd::new(t).exp()) / Dd::new(t).exp()).abs().to_f64());
        let even = (1..=200).fold(series[0], |acc, k| acc + bessel_i_series(2 * k, t) * Dd::new(2.0));
        let cosh = (Dd::new(t).exp() + Dd::new(-t).exp()).ldexp(-1);
        worst_even = worst_even.max(((even - cosh) / cosh).abs().to_f64());
    }
    outcome(
        worst_rel <= 1e-10 && worst_norm <= 1e-10 && worst_even <= 1e-10,
        format!(
            "Bessel engine: max relative Miller vs series {worst_rel:.2e} (k <= 60, t <= 30); I0 + 2 sum_k Ik = e^t to {worst_norm:.2e}; the even-index sum I0 + 2 sum I2k equals cosh t to {worst_even:.2e}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut worst_scalar: f64 = 0.0;
    for &eps in &[0.1, 0.01] {
        for &kappa in &[10.0, 100.0] {
            let grid = discretization_params(eps, kappa).unwrap();
            for i in 0..200 {
                let a = kappa.powf(-(i as f64) / 199.0);
                let v = (a * scalar_inverse_check(a, &grid).unwrap() - 1.0).abs();
                worst_scalar = worst_scalar.max(v / eps);
            }
        }
    }
    let mut worst_matrix: f64 = 0.0;
    let mut errors = Vec::new();
    let mut runs = 0;
    for &eps in &[0.1, 0.01] {
        for &kappa in &[10.0, 100.0] {
            for (k, &n) in [8usize, 64].iter().enumerate() {
                let raw = random_hermitian(n, 4, 5000 + k as u64, k == 1).unwrap();
                let lo = 1.0 / kappa;
                let op = with_spectrum(&raw, lo * (1.0 + 1e-9), 1.0 - 1e-9);
                let b = random_vector(n, 6000 + k as u64);
                let want = dense::lu_solve(&op, &b).unwrap();
                let job = InverseJob {
                    op: &op,
                    epsilon: eps,
                    bounds: Some(SpectralEstimate::from_interval(lo, 1.0)),
                    format: None,
                };
                runs += 1;
                match inverse_apply(&job, &DigitalState::from_c64(&b, FixedPointFormat::default()).unwrap()) {
                    Ok(res) => worst_matrix = worst_matrix.max(fractional(&res.solution.to_c64()[..n], &want) / (2.0 * eps)),
                    Err(e) => errors.push(format!("eps={eps} kappa={kappa} N={n}: {e}")),
                }
            }
        }
    }
    outcome(
        worst_scalar <= 1.0 && worst_matrix <= 1.0 && errors.is_empty(),
        format!(
            "inverse via exponentials: max scalar |a S(a) - 1|/eps {worst_scalar:.3} over 800 points; max matrix error/(2 eps) {worst_matrix:.3} over {runs} solves{}",
            if errors.is_empty() { String::new() } else { format!(", errors {errors:?}") }
        ),
    )
}

fn strings_up_to(n: usize, k_max: usize) -> Vec<PauliString> {
    let mut out = vec![PauliString::identity(n)];
    let mut frontier = vec![(PauliString::identity(n), 0usize)];
    for _ in 0..k_max {
        let mut next = Vec::new();
        for (s, start) in &frontier {
            for site in *start..n {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let mut f = s.factors().to_vec();
                    f[site] = p;
                    let t = PauliString::new(f);
                    out.push(t.clone());
                    next.push((t, site + 1));
                }
            }
        }
        frontier = next;
    }
    out
}

fn criterion_6() -> Outcome {
    let fmt = FixedPointFormat::default();
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for n in [4usize, 10] {
        let v = random_vector(1 << n, 8000 + n as u64);
        let s = DigitalState::from_c64(&v, fmt).unwrap();
        let x = s.to_c64();
        for sigma in strings_up_to(n, 4) {
            let got = sigma_expectation_exact(&s, &sigma).unwrap();
            let sx = sigma.apply_dense(&x);
            let want: f64 = x.iter().zip(&sx).map(|(a, b)| (a.conj() * b).re).sum();
            let k = sigma.locality().max(1) as i32;
            let allowed = k as f64 * 2f64.powi(-(fmt.frac_bits() as i32) + 2);
            worst = worst.max((got - want).abs() / allowed);
            count += 1;
        }
    }
    let trials = chernoff_trials(0.5, 1.0, 0.01).unwrap();
    let plan = ChernoffPlan::new(0.5, 1.0, 0.01).unwrap();
    let n = 6;
    let s = DigitalState::from_c64(&random_vector(1 << n, 9001), fmt).unwrap();
    let sigma: PauliString = "XYZIXZ".parse().unwrap();
    let mu = sigma_expectation_exact(&s, &sigma).unwrap();
    let runs = 10_000u64;
    let failures = (0..runs)
        .filter(|&seed| (sample_sigma(&s, &sigma, &plan, seed).unwrap().estimate - mu).abs() > plan.delta)
        .count();
    let rate = failures as f64 / runs as f64;
    outcome(
        worst <= 1.0 && trials == 191 && rate <= 0.02,
        format!(
            "measurement: {count} strings (k <= 4, n in {{4, 10}}) max error/(k 2^(-f+2)) {worst:.3}; m = {trials}; failure rate {rate:.4} over {runs} runs"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut worst_parts = 0.0f64;
    let mut exact = true;
    let mut disjoint = true;
    for seed in 0..100u64 {
        let d = 1 + seed as usize % 8;
        let n = [16, 64, 200, 512][seed as usize % 4];
        let op = random_hermitian(n, d, 7000 + seed, seed % 2 == 0).unwrap();
        let dec = edge_color_decompose(&op).unwrap();
        exact &= dec.to_dense() == op.to_dense();
        disjoint &= dec.parts_are_block_diagonal();
        let bound = (2 * op.sparsity()).saturating_sub(1).max(1);
        worst_parts = worst_parts.max(dec.part_count() as f64 / bound as f64);
    }
    outcome(
        exact && disjoint && worst_parts <= 1.0,
        format!("decomposition: 100 operators, exact reconstruction {exact}, disjoint blocks {disjoint}, max parts/(2d-1) {worst_parts:.3}"),
    )
}

fn criterion_8(cases: &[NrCase]) -> Outcome {
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for case in cases {
        let cfg = NrConfig {
            epsilon: eps,
            format: case.format,
            ..NrConfig::default()
        };
        let shadow = solve_shadow(&case.op, &case.b, &cfg).unwrap();
        let dev = dense::distance(&case.fixed[..case.b.len()], &shadow.solution) / dense::norm(&case.x_star);
        worst = worst.max(dev / eps);
    }
    // halve f and look for a case whose deviation breaks the target
    let mut broken = None;
    for (i, case) in cases.iter().enumerate() {
        let f = case.format.frac_bits() / 2;
        let int_bits = case.format.q_total() - case.format.frac_bits();
        let fmt = FixedPointFormat::new(f + int_bits, f).unwrap();
        let cfg = NrConfig {
            epsilon: eps,
            format: fmt,
            ..NrConfig::default()
        };
        let shadow = solve_shadow(&case.op, &case.b, &cfg).unwrap();
        let dev = match digiq::nr::solve(&case.op, &DigitalState::from_c64(&case.b, fmt).unwrap(), &cfg) {
            Ok(res) => dense::distance(&res.solution.to_c64()[..case.b.len()], &shadow.solution) / dense::norm(&case.x_star),
            Err(_) => f64::INFINITY,
        };
        if dev > eps {
            broken = Some((i, f, dev));
            break;
        }
    }
    outcome(
        worst <= 1.0 && broken.is_some() && cases.len() == 50,
        format!(
            "fixed-point budget: max |fixed - shadow|/(eps |x*|) {worst:.3} over {} cases; halved f {}",
            cases.len(),
            match broken {
                Some((i, f, dev)) => format!("breaks case {i} (f={f}, deviation {dev:.2e})"),
                None => "never breaks the target".into(),
            }
        ),
    )
}

fn criterion_9() -> Outcome {
    let z = PauliSum::single(1.0, PauliString::single(1, 0, Pauli::Z));
    let h1 = diagonal(&[1.0, -1.0]);
    let mut worst_thermal: f64 = 0.0;
    for beta in [0.0, 0.5, 1.0, 5.0] {
        let r = thermal_ratio(&ThermalJob {
            hamiltonian: &h1,
            beta,
            observable: z.clone(),
            epsilon: 1e-10,
            bounds: None,
            format: None,
        })
        .unwrap();
        worst_thermal = worst_thermal.max((r.value + beta.tanh()).abs());
    }
    let h = transverse_field_ising(4, 1.0, 1.0);
    let (vals, vecs) = dense::hermitian_eigen(&h).unwrap();
    let gap = vals[1] - vals[0];
    let ground: Vec<Complex64> = vecs.column(0).iter().copied().collect();
    let observables: Vec<PauliSum> = ["ZIII", "ZZII", "XIII", "IXXI"]
        .iter()
        .map(|s| PauliSum::single(1.0, s.parse().unwrap()))
        .collect();
    let eps = 1e-8;
    let mut worst_ratio: f64 = 0.0;
    let ansatz = DigitalState::from_c64(&vec![Complex64::new(0.25, 0.0); 16], FixedPointFormat::default()).unwrap();
    for t in [5.0, 10.0] {
        let (state, _) = ground_state_project(&GroundStateJob {
            hamiltonian: &h,
            ansatz: ansatz.clone(),
            time: t,
            epsilon: eps,
            gap: None,
            bounds: None,
            format: None,
        })
        .unwrap();
        for o in &observables {
            let d = o.to_dense();
            let exact: f64 = (0..16)
                .map(|r| (0..16).map(|k| (ground[r].conj() * d[r][k] * ground[k]).re).sum::<f64>())
                .sum();
            let got = expectation_ratio(&state, o, None).unwrap();
            worst_ratio = worst_ratio.max((got - exact).abs() / (eps + (-gap * t).exp()));
        }
    }
    outcome(
        worst_thermal <= 1e-6 && worst_ratio <= 1.0,
        format!("physics: max |<Z> + tanh beta| {worst_thermal:.2e}; TFI n=4 max ratio error/(eps + e^(-gap T)) {worst_ratio:.3}"),
    )
}

fn main() {
    let mut cases = Vec::new();
    let checks: Vec<(usize, Box<dyn FnOnce(&mut Vec<NrCase>) -> Outcome>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(|_| criterion_2())),
        (3, Box::new(|_| criterion_3())),
        (4, Box::new(|_| criterion_4())),
        (5, Box::new(|_| criterion_5())),
        (6, Box::new(|_| criterion_6())),
        (7, Box::new(|_| criterion_7())),
        (8, Box::new(|c| criterion_8(c))),
        (9, Box::new(|_| criterion_9())),
    ];
    let mut failed = 0;
    for (n, check) in checks {
        let start = Instant::now();
        let o = check(&mut cases);
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {n}: {} {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
