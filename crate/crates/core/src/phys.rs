//! Euclidean-time ground-state projection and thermal expectation ratios.
//!
//! Both work with unnormalized states: the common factor `e^{-lambda_min t}`
//! is carried separately by the exponential and cancels in every ratio.

use rayon::prelude::*;
use serde::Serialize;

use crate::cheb::{expm_apply, ExpmJob};
use crate::dense::{self, DESK_SCALE_LIMIT};
use crate::error::{Error, Result};
use crate::fixed::FixedPointFormat;
use crate::pauli::{sum_quadratic_form, PauliSum};
use crate::sparse::{gershgorin_bounds, SparseOperator, SpectralEstimate};
use crate::state::{init_state, index_bits_for, DigitalState};
use num_complex::Complex64;

/// Where a spectral quantity came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Supplied,
    /// Dense eigensolver; an estimate, not a certificate.
    DenseOracle,
    Gershgorin,
}

/// Supplied bounds, else the padded dense spectrum at desk scale, else Gershgorin.
pub fn spectral_bracket(op: &SparseOperator, supplied: Option<SpectralEstimate>) -> Result<(SpectralEstimate, Source)> {
    if let Some(b) = supplied {
        return Ok((b, Source::Supplied));
    }
    if op.dim() <= DESK_SCALE_LIMIT {
        let vals = dense::hermitian_eigenvalues(op)?;
        let (lo, hi) = (vals[0], vals[vals.len() - 1]);
        // widen past eigensolver round-off
        let pad = 1e-9 * lo.abs().max(hi.abs()).max(1.0);
        return Ok((SpectralEstimate::from_interval(lo - pad, hi + pad), Source::DenseOracle));
    }
    Ok((gershgorin_bounds(op)?, Source::Gershgorin))
}

#[derive(Debug, Clone)]
pub struct GroundStateJob<'a> {
    pub hamiltonian: &'a SparseOperator,
    pub ansatz: DigitalState,
    /// Euclidean time `T`.
    pub time: f64,
    /// Truncation tolerance of the exponential.
    pub epsilon: f64,
    /// Known excitation gap.
    pub gap: Option<f64>,
    pub bounds: Option<SpectralEstimate>,
    pub format: Option<FixedPointFormat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateDiagnostics {
    pub time: f64,
    pub bounds: SpectralEstimate,
    pub bounds_source: Source,
    pub gap: Option<f64>,
    pub gap_source: Option<Source>,
    /// `e^{-gap T}`.
    pub contamination_bound: Option<f64>,
    /// Norm of the returned state.
    pub norm: f64,
    /// The full `e^{-HT} psi` is `e^{log_prefactor}` times the returned state.
    pub log_prefactor: f64,
    pub order: usize,
    pub format: FixedPointFormat,
    pub state_error_bound: f64,
}

/// `e^{-(H - lambda_min) T} psi`, unnormalized.
pub fn ground_state_project(job: &GroundStateJob) -> Result<(DigitalState, GroundStateDiagnostics)> {
    if !(job.time >= 0.0 && job.time.is_finite()) {
        return Err(Error::Domain(format!("Euclidean time {} must be finite and non-negative", job.time)));
    }
    let h = job.hamiltonian;
    h.require_hermitian()?;
    let (bounds, bounds_source) = spectral_bracket(h, job.bounds)?;
    let (gap, gap_source) = match job.gap {
        Some(g) => (Some(g), Some(Source::Supplied)),
        None if h.dim() <= DESK_SCALE_LIMIT && h.dim() > 1 => {
            let vals = dense::hermitian_eigenvalues(h)?;
            (Some(vals[1] - vals[0]), Some(Source::DenseOracle))
        }
        None => (None, None),
    };
    let res = expm_apply(
        &ExpmJob {
            op: h,
            bounds,
            t: job.time,
            epsilon0: job.epsilon,
            format: job.format,
        },
        &job.ansatz,
    )?;
    let diag = GroundStateDiagnostics {
        time: job.time,
        bounds,
        bounds_source,
        gap,
        gap_source,
        contamination_bound: gap.map(|g| (-g * job.time).exp()),
        norm: res.state.norm(),
        log_prefactor: res.log_prefactor,
        order: res.order,
        format: res.format,
        state_error_bound: res.state_error_bound,
    };
    Ok((res.state, diag))
}

/// `<x|O1|x> / <x|O2|x>` on an unnormalized state; `O2 = I` when `None`.
pub fn expectation_ratio(state: &DigitalState, o1: &PauliSum, o2: Option<&PauliSum>) -> Result<f64> {
    let den = match o2 {
        Some(o) => sum_quadratic_form(state, o)?,
        None => state.norm_squared_dd().to_f64(),
    };
    if den.abs() < state.format().resolution() {
        return Err(Error::DivisionByNegligible { value: den });
    }
    Ok(sum_quadratic_form(state, o1)? / den)
}

#[derive(Debug, Clone)]
pub struct ThermalJob<'a> {
    pub hamiltonian: &'a SparseOperator,
    pub beta: f64,
    pub observable: PauliSum,
    /// Truncation tolerance of each exponential.
    pub epsilon: f64,
    pub bounds: Option<SpectralEstimate>,
    pub format: Option<FixedPointFormat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThermalReport {
    pub value: f64,
    pub beta: f64,
    pub bounds: SpectralEstimate,
    pub bounds_source: Source,
    /// Basis vectors swept; the trace is exact, not sampled.
    pub basis_sweeps: usize,
    pub products: u64,
    /// `sum_i ||z_i||^2`, the partition function up to `e^{-2 lambda_min beta/2}`.
    pub weight: f64,
    pub log_prefactor: f64,
}

/// `Tr(e^{-beta H/2} O e^{-beta H/2}) / Tr(e^{-beta H})` by an exact sweep
/// over the basis.
pub fn thermal_ratio(job: &ThermalJob) -> Result<ThermalReport> {
    thermal_sweep(job, 1)
}

/// As [`thermal_ratio`], with each `e^{-beta H/2}` applied as `splits`
/// successive exponentials of `beta / (2 splits)`.
pub fn thermal_sweep(job: &ThermalJob, splits: usize) -> Result<ThermalReport> {
    let h = job.hamiltonian;
    if h.dim() > DESK_SCALE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: h.dim(),
            limit: DESK_SCALE_LIMIT,
        });
    }
    if !(job.beta >= 0.0 && job.beta.is_finite()) || splits == 0 {
        return Err(Error::Domain(format!("need beta >= 0 and splits >= 1, got {} and {splits}", job.beta)));
    }
    h.require_hermitian()?;
    let (bounds, bounds_source) = spectral_bracket(h, job.bounds)?;
    let n = index_bits_for(h.dim());
    if job.observable.n_sites != n as usize {
        return Err(Error::DimensionMismatch {
            expected: n as usize,
            found: job.observable.n_sites,
        });
    }
    let ejob = ExpmJob {
        op: h,
        bounds,
        t: job.beta / 2.0 / splits as f64,
        epsilon0: job.epsilon,
        format: job.format,
    };
    let per_basis = (0..h.dim())
        .into_par_iter()
        .map(|i| {
            let e_i = init_state(|j| Complex64::new(if j == i { 1.0 } else { 0.0 }, 0.0), n, h.dim(), FixedPointFormat::default())?;
            let mut z = e_i;
            let mut log_pref = 0.0;
            let mut products = 0;
            for _ in 0..splits {
                let res = expm_apply(&ejob, &z)?;
                log_pref += res.log_prefactor;
                products += res.products;
                z = res.state;
            }
            Ok((sum_quadratic_form(&z, &job.observable)?, z.norm_squared_dd().to_f64(), products, log_pref))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut num, mut den, mut products) = (0.0, 0.0, 0);
    for &(o, w, p, _) in &per_basis {
        num += o;
        den += w;
        products += p;
    }
    if den <= 0.0 {
        return Err(Error::DivisionByNegligible { value: den });
    }
    Ok(ThermalReport {
        value: num / den,
        beta: job.beta,
        bounds,
        bounds_source,
        basis_sweeps: h.dim(),
        products,
        weight: den,
        log_prefactor: per_basis.first().map_or(0.0, |p| p.3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Pauli, PauliString};
    use crate::sparse::{diagonal, transverse_field_ising};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn z_obs(n: usize, site: usize) -> PauliSum {
        PauliSum::single(1.0, PauliString::single(n, site, Pauli::Z))
    }

    fn plus_state(n: u32) -> DigitalState {
        let amp = (0.5f64).powf(n as f64 / 2.0);
        DigitalState::from_c64(&vec![c(amp); 1 << n], FixedPointFormat::default()).unwrap()
    }

    fn project(h: &SparseOperator, psi: DigitalState, t: f64) -> (DigitalState, GroundStateDiagnostics) {
        ground_state_project(&GroundStateJob {
            hamiltonian: h,
            ansatz: psi,
            time: t,
            epsilon: 1e-10,
            gap: None,
            bounds: None,
            format: None,
        })
        .unwrap()
    }

    #[test]
    fn zero_time_keeps_ansatz() {
        let psi = plus_state(1);
        let (s, d) = project(&diagonal(&[0.0, 1.0]), psi.clone(), 0.0);
        assert_eq!(s, psi);
        assert_eq!(d.contamination_bound, Some(1.0));
    }

    #[test]
    fn two_level_projection() {
        let h = diagonal(&[0.0, 1.0]);
        let (s, d) = project(&h, plus_state(1), 10.0);
        let v = s.to_c64();
        assert!((v[1].re / v[0].re - (-10f64).exp()).abs() < 1e-12);
        let ratio = expectation_ratio(&s, &z_obs(1, 0), None).unwrap();
        let e = (-20f64).exp();
        assert!((ratio - (1.0 - e) / (1.0 + e)).abs() < 1e-12);
        assert_eq!(d.gap_source, Some(Source::DenseOracle));
        assert!((d.contamination_bound.unwrap() - (-10f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ratio_identities() {
        let s = DigitalState::from_c64(&[c(0.3), c(-0.2), c(0.1), c(0.05)], FixedPointFormat::default()).unwrap();
        let o = PauliSum::single(0.7, "XZ".parse().unwrap());
        assert_eq!(expectation_ratio(&s, &o, Some(&o)).unwrap(), 1.0);
        let zero = DigitalState::from_c64(&[c(0.0); 4], FixedPointFormat::default()).unwrap();
        assert!(matches!(expectation_ratio(&zero, &o, None), Err(Error::DivisionByNegligible { .. })));
    }

    #[test]
    fn tfi_ground_state_ratios() {
        let h = transverse_field_ising(4, 1.0, 1.0);
        let (vals, vecs) = dense::hermitian_eigen(&h).unwrap();
        let g: Vec<Complex64> = vecs.column(0).iter().copied().collect();
        let gap = vals[1] - vals[0];
        let observables = [z_obs(4, 0), PauliSum::single(1.0, "ZZII".parse().unwrap()), PauliSum::single(1.0, "XIII".parse().unwrap())];
        for t in [5.0, 10.0] {
            let (s, d) = project(&h, plus_state(4), t);
            assert!((d.gap.unwrap() - gap).abs() < 1e-9);
            for o in &observables {
                let dense_o = crate::pauli::PauliSum::to_dense(o);
                let exact: f64 = (0..16)
                    .map(|r| (0..16).map(|k| (g[r].conj() * dense_o[r][k] * g[k]).re).sum::<f64>())
                    .sum();
                let got = expectation_ratio(&s, o, None).unwrap();
                assert!((got - exact).abs() <= 1e-10 + (-gap * t).exp(), "t={t} {got} {exact}");
            }
        }
    }

    fn thermal(h: &SparseOperator, beta: f64, o: PauliSum) -> ThermalReport {
        thermal_ratio(&ThermalJob {
            hamiltonian: h,
            beta,
            observable: o,
            epsilon: 1e-10,
            bounds: None,
            format: None,
        })
        .unwrap()
    }

    #[test]
    fn single_qubit_thermal() {
        let h = diagonal(&[1.0, -1.0]);
        for beta in [0.0, 0.5, 1.0, 5.0] {
            let r = thermal(&h, beta, z_obs(1, 0));
            assert!((r.value + beta.tanh()).abs() < 1e-9, "beta={beta} {}", r.value);
        }
    }

    #[test]
    fn infinite_temperature_traceless_is_zero() {
        let h = transverse_field_ising(3, 1.0, 0.7);
        let r = thermal(&h, 0.0, PauliSum::single(1.0, "XZY".parse().unwrap()));
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn low_temperature_approaches_ground_state() {
        let h = transverse_field_ising(3, 1.0, 1.0);
        let (vals, vecs) = dense::hermitian_eigen(&h).unwrap();
        let gap = vals[1] - vals[0];
        let o = PauliSum::single(1.0, "ZZI".parse().unwrap());
        let d = o.to_dense();
        let exact: f64 = (0..8)
            .map(|r| (0..8).map(|k| (vecs[(r, 0)].conj() * d[r][k] * vecs[(k, 0)]).re).sum::<f64>())
            .sum();
        let r = thermal(&h, 50.0, o);
        assert!((r.value - exact).abs() <= 1e-9 + 8.0 * (-50.0 * gap).exp());
    }

    #[test]
    fn thermal_matches_dense_trace() {
        let h = transverse_field_ising(3, 0.8, 0.6);
        let o = PauliSum::new(3, vec![
            crate::pauli::PauliTerm { beta: 0.5, string: "XXI".parse().unwrap() },
            crate::pauli::PauliTerm { beta: -1.0, string: "IZZ".parse().unwrap() },
        ])
        .unwrap();
        let beta = 1.3;
        let (vals, vecs) = dense::hermitian_eigen(&h).unwrap();
        let d = o.to_dense();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, l) in vals.iter().enumerate() {
            let w = (-beta * l).exp();
            den += w;
            num += w * (0..8)
                .map(|r| (0..8).map(|k| (vecs[(r, i)].conj() * d[r][k] * vecs[(k, i)]).re).sum::<f64>())
                .sum::<f64>();
        }
        let r = thermal(&h, beta, o);
        assert!((r.value - num / den).abs() < 1e-9);
        assert_eq!(r.basis_sweeps, 8);
    }

    #[test]
    fn rejects_large_or_mismatched() {
        let h = diagonal(&[1.0, -1.0]);
        let job = ThermalJob {
            hamiltonian: &h,
            beta: 1.0,
            observable: z_obs(2, 0),
            epsilon: 1e-8,
            bounds: None,
            format: None,
        };
        assert!(matches!(thermal_ratio(&job), Err(Error::DimensionMismatch { .. })));
        let big = crate::sparse::identity(DESK_SCALE_LIMIT * 2);
        let job = ThermalJob {
            hamiltonian: &big,
            observable: z_obs(13, 0),
            ..job
        };
        assert!(matches!(thermal_ratio(&job), Err(Error::DimensionTooLarge { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn ratio_is_scale_invariant(k in -24i32..=24, seed in 0u64..100) {
            // room for |c| up to 2^(f/2)
            let fmt = FixedPointFormat::new(128, 48).unwrap();
            let vals: Vec<Complex64> = (0..8).map(|j| Complex64::new(((j as u64 * 31 + seed) % 17) as f64 / 20.0 - 0.3, (j as f64) / 40.0)).collect();
            let s = DigitalState::from_c64(&vals, fmt).unwrap();
            let o = PauliSum::single(1.0, "XYZ".parse().unwrap());
            let scaled = crate::state::scale_state(&s, c(2f64.powi(k))).unwrap();
            let a = expectation_ratio(&s, &o, None).unwrap();
            let b = expectation_ratio(&scaled, &o, None).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * 2f64.powi((-k).max(0)));
        }

        #[test]
        fn thermal_semigroup_split(beta in 0.0f64..4.0) {
            let h = transverse_field_ising(2, 1.0, 0.5);
            let job = ThermalJob {
                hamiltonian: &h,
                beta,
                observable: PauliSum::single(1.0, "ZZ".parse().unwrap()),
                epsilon: 1e-10,
                bounds: None,
                format: None,
            };
            let whole = thermal_sweep(&job, 1).unwrap();
            let split = thermal_sweep(&job, 2).unwrap();
            prop_assert!((whole.value - split.value).abs() <= 3e-10 * (1.0 + beta));
        }
    }
}
