use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rieszlab_core::linalg::{c, op_norm, CMatrix};
use rieszlab_core::operator_lab::{build_truncated_t, PerturbationMatrix, Storage};
use rieszlab_core::scenarios::{make_counterexample, make_power_alpha};
use rieszlab_core::sequence_models::{regions, Spectrum, WeightSequence};
use rieszlab_core::spectral_analysis::*;

fn eigs_of(spec: &Spectrum, v: &PerturbationMatrix) -> Eigensystem {
    Eigensystem::new(build_truncated_t(spec, v, v.size()).unwrap().matrix()).unwrap()
}

fn nearest(eigs: &Eigensystem, z: Complex64) -> usize {
    let d = |i: usize| (eigs.pairs()[i].lambda - z).norm();
    (0..eigs.pairs().len())
        .min_by(|&a, &b| d(a).total_cmp(&d(b)))
        .unwrap()
}

#[test]
fn unperturbed_eigensystem_is_the_standard_basis() {
    let v = PerturbationMatrix::zero(4, WeightSequence::power(1.0).unwrap());
    let eigs = eigs_of(&Spectrum::linear(), &v);
    for (i, p) in eigs.pairs().iter().enumerate() {
        assert_eq!(p.lambda, c((i + 1) as f64, 0.0));
        let (r, l) = (eigs.right_full(i), eigs.left_full(i));
        assert!((r[i].norm() - 1.0).abs() < 1e-15 && (l[i].norm() - 1.0).abs() < 1e-15);
        assert!((p.pairing.norm() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn counterexample_block_nine() {
    let (lin, _, v) = make_counterexample(3, 20).unwrap();
    let t = build_truncated_t(&lin, &v, 20).unwrap();
    let eigs = Eigensystem::new(t.matrix()).unwrap();
    let lo = nearest(&eigs, c(17.5 - 1.0 / 6.0, 0.0));
    let hi = nearest(&eigs, c(17.5 + 1.0 / 6.0, 0.0));
    assert!((eigs.pairs()[lo].lambda - c(17.5 - 1.0 / 6.0, 0.0)).norm() < 1e-12);
    assert!((eigs.pairs()[hi].lambda - c(17.5 + 1.0 / 6.0, 0.0)).norm() < 1e-12);
    for i in [lo, hi] {
        assert!((riesz_projection_eig(&eigs, i).unwrap().norm() - 3.0).abs() < 1e-10);
    }

    let p = riesz_projection_contour(&t, c(17.5 + 1.0 / 6.0, 0.0), 1.0 / 12.0, 64).unwrap();
    assert!((op_norm(&p) - 3.0).abs() < 1e-10);
    let pe = riesz_projection_eig(&eigs, hi).unwrap().to_dense(20);
    assert!(op_norm(&(&p - &pe)) < 1e-8);

    // both eigenvalues inside: the block identity
    let both = riesz_projection_contour(&t, c(17.5, 0.0), 0.4, 64).unwrap();
    let mut id = CMatrix::zeros(20, 20);
    id[(16, 16)] = c(1.0, 0.0);
    id[(17, 17)] = c(1.0, 0.0);
    assert!(op_norm(&(&both - &id)) < 1e-12);

    let pair = [
        riesz_projection_eig(&eigs, lo).unwrap(),
        riesz_projection_eig(&eigs, hi).unwrap(),
    ];
    assert!(disjointness_residual(&pair) < 1e-9);
    let dup = [pair[1].clone(), pair[1].clone()];
    assert!((disjointness_residual(&dup) - 3.0).abs() < 1e-9);
}

#[test]
fn counterexample_discs_each_hold_one_eigenvalue() {
    let (lin, _, v) = make_counterexample(3, 20).unwrap();
    let eigs = eigs_of(&lin, &v);
    let regs = regions(&lin, 1, 0.5, 0.5, 19).unwrap();
    let loc = localization_report(&eigs, &regs, &lin, 1).unwrap();
    assert_eq!(pairs_in_disc(&eigs, &loc, 17).len(), 1);
    assert_eq!(pairs_in_disc(&eigs, &loc, 18).len(), 1);
    assert!(loc.outside.is_empty());
}

#[test]
fn counterexample_projection_norms_equal_m() {
    let m_max = 30;
    let size = 2 * m_max * m_max + 2;
    let (lin, _, v) = make_counterexample(m_max, size).unwrap();
    let eigs = eigs_of(&lin, &v);
    for m in 2..=m_max {
        let k = (m * m) as f64;
        let vs = 1.0 / m as f64;
        for sign in [-1.0, 1.0] {
            let want = c(2.0 * k - 0.5 + sign * vs / 2.0, 0.0);
            let i = nearest(&eigs, want);
            assert!((eigs.pairs()[i].lambda - want).norm() < 1e-9, "m = {m}");
            let n = riesz_projection_eig(&eigs, i).unwrap().norm();
            assert!((n - m as f64).abs() < 1e-8, "m = {m}: {n}");
        }
    }
}

#[test]
fn counterexample_riesz_summand_grows_with_m() {
    let (lin, _, v) = make_counterexample(6, 74).unwrap();
    let eigs = eigs_of(&lin, &v);
    for m in 2..=6 {
        let k = m * m;
        let i = nearest(&eigs, c(2.0 * k as f64 - 0.5 - 0.5 / m as f64, 0.0));
        let pt = vec![(2 * k - 1, riesz_projection_eig(&eigs, i).unwrap())];
        let pa = vec![(2 * k - 1, Projection::coordinate(2 * k - 1))];
        // f = e_{2k-1}: <P f, f> = (1 + 1/m) m / 2, so the summand is (m - 1)/2
        let mut f = DVector::from_element(74, c(0.0, 0.0));
        f[2 * k - 2] = c(1.0, 0.0);
        let s = riesz_quadratic_sum(&pt, &pa, &f, 1).total;
        assert!((s - (m as f64 - 1.0) / 2.0).abs() < 1e-10, "m = {m}: {s}");
        // the symmetric vector is blind: <P f, f> = 1/2 for either eigenvalue
        f[2 * k - 1] = c(1.0, 0.0);
        f /= c(2f64.sqrt(), 0.0);
        assert!(riesz_quadratic_sum(&pt, &pa, &f, 1).total < 1e-12);
    }
}

#[test]
fn condition_number_trends() {
    let v0 = PerturbationMatrix::zero(30, WeightSequence::power(1.0).unwrap());
    let (c0, skipped) = basis_condition_number(&eigs_of(&Spectrum::linear(), &v0), 0..=29).unwrap();
    assert!((c0 - 1.0).abs() < 1e-12 && skipped == 0);

    let (lin, _, v) = make_power_alpha(1.0, 400, 0).unwrap();
    let eigs = eigs_of(&lin, &v);
    let (early, _) = basis_condition_number(&eigs, 49..=99).unwrap();
    let (late, _) = basis_condition_number(&eigs, 199..=249).unwrap();
    assert!(early < 1.1 && late <= early, "{early} {late}");

    let (lin, _, v) = make_counterexample(10, 202).unwrap();
    let eigs = eigs_of(&lin, &v);
    let mut prev = 1.0;
    for m in [3usize, 5, 7, 9] {
        let hi = 2 * m * m - 1;
        let (cm, _) = basis_condition_number(&eigs, 0..=hi).unwrap();
        assert!(cm > prev, "m = {m}: {cm} <= {prev}");
        prev = cm;
    }
}

#[test]
fn unperturbed_report_is_a_fixpoint() {
    let v = PerturbationMatrix::zero(50, WeightSequence::power(1.0).unwrap());
    let mut p = SpectralParams::new(50, 3, 0.5, 0.5);
    p.buffer = Some(6);
    let r = spectral_report(&Spectrum::linear(), &v, &p).unwrap();
    assert!(r.riesz_sums.iter().all(|s| s.1 <= 1e-10));
    assert!(r.disjointness <= 1e-10);
    let (cond, _) = r.condition_number.unwrap();
    assert!((cond - 1.0).abs() <= 1e-10);
    assert!(r.localization.outside.is_empty() && r.localization.irregular_discs().is_empty());
    assert_eq!(r.rank_sum, r.rank_expected);
    for e in &r.eigenvalues {
        if let Some(k) = e.region.strip_prefix("disc:") {
            assert_eq!(e.lambda, c(k.parse::<f64>().unwrap(), 0.0));
        }
    }
}

#[test]
fn power_alpha_report_invariants() {
    let (lin, _, v) = make_power_alpha(1.0, 160, 0).unwrap();
    let mut p = SpectralParams::new(160, 11, 1.6532414807006717, 3.1814039777964354);
    p.buffer = Some(20);
    let r = spectral_report(&lin, &v, &p).unwrap();
    assert!(r.max_relative_residual < 1e-8);
    assert_eq!(r.rank_sum, r.rank_expected);
    assert!(r.localization.irregular_discs().is_empty());
    assert!(r.localization.outside.is_empty());
    assert!(r.disjointness <= 1e-9);
    for row in &r.projections {
        assert!(
            row.idem_residual <= 1e-9 * (1.0 + row.norm * row.norm),
            "{row:?}"
        );
    }
    for a in &r.agreement {
        assert!(a.eig_vs_contour <= 1e-8 && a.half_vs_full < 1e-6, "{a:?}");
    }
    assert!(r.riesz_sums.iter().all(|s| s.1 < r.riesz_bound));
}

fn permuted(m: &CMatrix, perm: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(perm[i], perm[j])])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn contour_matches_eigenvector_projection(seed in any::<u64>(), size in 30usize..80) {
        let w = WeightSequence::power(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = PerturbationMatrix::random_complex(size, Storage::Dense, w, &mut rng);
        let lin = Spectrum::linear();
        let eigs = eigs_of(&lin, &v);
        for k in [12, size / 2, size - size / 8] {
            let i = nearest(&eigs, c(k as f64, 0.0));
            let pe = riesz_projection_eig(&eigs, i).unwrap();
            let circle = Contour::Circle { center: c(k as f64, 0.0), radius: 0.5 };
            let pc = contour_projection(&eigs, &circle, 64).unwrap();
            prop_assert!(op_norm(&(pe.to_dense(size) - pc.to_dense(size))) <= 1e-8);
            prop_assert!(pc.idempotency_residual() <= 1e-9 * (1.0 + pc.norm().powi(2)));
            prop_assert_eq!(pc.rank(), 1);
        }
    }

    #[test]
    fn permutation_leaves_diagnostics_unchanged(seed in any::<u64>(), size in 8usize..40) {
        let w = WeightSequence::power(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = PerturbationMatrix::random_complex(size, Storage::Dense, w, &mut rng);
        let t = build_truncated_t(&Spectrum::linear(), &v, size).unwrap();
        let mut perm: Vec<usize> = (0..size).collect();
        perm.reverse();
        perm.swap(0, size / 2);
        let a = Eigensystem::new(t.matrix()).unwrap();
        let b = Eigensystem::new(&permuted(t.matrix(), &perm)).unwrap();
        let scalars = |e: &Eigensystem| -> Vec<f64> {
            let mut out: Vec<f64> = e.pairs().iter().flat_map(|p| [p.lambda.re, p.lambda.im]).collect();
            out.extend((0..size).map(|i| riesz_projection_eig(e, i).unwrap().norm()));
            out.push(basis_condition_number(e, 0..=size - 1).unwrap().0);
            out
        };
        for (x, y) in scalars(&a).iter().zip(scalars(&b)) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()), "{} vs {}", x, y);
        }
    }
}

#[test]
fn series_zero_term_matches_closed_form() {
    let w = WeightSequence::power(1.0).unwrap();
    let size = 48;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v = PerturbationMatrix::random_complex(size, Storage::Dense, w.clone(), &mut rng);
    let f = random_unit_vector(size, &mut rng);
    let lin = Spectrum::linear();
    let n = 12;
    let r = series_term_check(&lin, &w, &v, 0, n, &f, 64).unwrap();
    let vop = v.operator_matrix(size);
    // residue at mu_k of <D V D f, f>
    let mut total = 0.0;
    for k in n..=r.last {
        let mut s = c(0.0, 0.0);
        for j in (1..=size).filter(|&j| j != k) {
            let d = (k as f64) - (j as f64);
            s += (vop[(k - 1, j - 1)] * f[j - 1] * f[k - 1].conj()
                + vop[(j - 1, k - 1)] * f[k - 1] * f[j - 1].conj())
                / d;
        }
        total += s.norm();
    }
    assert!(
        (r.lhs - total).abs() <= 1e-10 * total,
        "{} vs {total}",
        r.lhs
    );
    assert!(r.lhs <= 2.0 * r.tau_n + r.quad_error);
}

#[test]
fn series_bounds_on_power_alpha() {
    let (lin, w, v) = make_power_alpha(1.0, 300, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fs: Vec<_> = (0..3).map(|_| random_unit_vector(300, &mut rng)).collect();
    let checks = series_residue_checks(&lin, &w, &v, 2, 27, &fs, 64).unwrap();
    for per_f in &checks {
        for ch in per_f {
            assert!(ch.tau_n <= 0.25, "{}", ch.tau_n);
            assert!(
                ch.lhs <= ch.bound_tau && ch.lhs <= ch.bound_geometric,
                "{ch:?}"
            );
        }
    }
    let q = series_term_check(&lin, &w, &v, 1, 27, &fs[0], 64).unwrap();
    assert!((q.lhs - checks[0][1].lhs).abs() <= 1e-8 * q.lhs);
}

#[test]
fn blockwise_condition_number_matches_dense_svd() {
    let (lin, _, v) = make_counterexample(4, 40).unwrap();
    let eigs = eigs_of(&lin, &v);
    let n = eigs.pairs().len();
    let dense = CMatrix::from_fn(40, n, |r, k| eigs.right_full(k)[r]);
    let s = dense.singular_values();
    let (cond, skipped) = basis_condition_number(&eigs, 0..=n - 1).unwrap();
    assert_eq!(skipped, 0);
    assert!((cond - s.max() / s.min()).abs() <= 1e-10 * cond, "{cond}");
    let full_norm = op_norm(&build_truncated_t(&lin, &v, 40).unwrap().into_matrix());
    assert!((eigs.norm() - full_norm).abs() <= 1e-12 * full_norm);
}

#[test]
fn eig_sum_matches_the_contour_around_both_eigenvalues() {
    let (lin, _, v) = make_power_alpha(1.0, 40, 3).unwrap();
    let eigs = eigs_of(&lin, &v);
    let (i, j) = (nearest(&eigs, c(7.0, 0.0)), nearest(&eigs, c(8.0, 0.0)));
    let sum = sum_of_eig_projections(&eigs, &[i, j]).unwrap();
    let circle = Contour::Circle {
        center: c(7.5, 0.0),
        radius: 1.0,
    };
    let contour = contour_projection(&eigs, &circle, 256).unwrap();
    let diff = sum.to_dense(40) - contour.to_dense(40);
    assert!(op_norm(&diff) < 1e-8, "{}", op_norm(&diff));
    assert_eq!(sum.rank(), 2);
    assert!(sum.idempotency_residual() < 1e-10);
}
