//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails.

use fractal_onb::basis::{gen_fractal_onb, gen_walsh_basis, integer_spectrum, walsh_filters, PiecewiseExp, StepWalsh};
use fractal_onb::cuntz::{verify_cuntz, CuntzRep, Function};
use fractal_onb::cycles::find_extreme_cycles;
use fractal_onb::filters::{basis_to_matrix, is_spectrum, matrix_to_basis, Evaluable, MatrixField, QmfBasis, UnitaryMatrix, DEFAULT_GRID};
use fractal_onb::ifs::AffineIfs;
use fractal_onb::measure::{check_strong_invariance, monte_carlo, mu_hat, DEFAULT_FT_EPS};
use fractal_onb::verify::{gram_matrix, parseval_curve, parseval_h, transfer_iterate, walsh_gram, TransferGrid, GRAM_TOL, TRANSFER_POINTS};
use fractal_onb::Complex64;
use nalgebra::DMatrix;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

type Outcome = (bool, String);

const CANTOR_L: [f64; 2] = [0.0, 0.75];

fn cis(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * t)
}

fn cantor_basis(max_len: usize) -> Vec<PiecewiseExp> {
    let ifs = AffineIfs::cantor();
    let cycles = find_extreme_cycles(&ifs, &CANTOR_L, 12, 1e-9).unwrap();
    gen_fractal_onb(&ifs, &CANTOR_L, &cycles, max_len)
}

fn extreme_cycles_of_cantor() -> Outcome {
    let start = Instant::now();
    let cycles = find_extreme_cycles(&AffineIfs::cantor(), &CANTOR_L, 12, 1e-9).unwrap();
    let elapsed = start.elapsed();
    let points: Vec<Vec<f64>> = cycles.iter().map(|c| c.points.clone()).collect();
    (
        points == vec![vec![0.0]] && elapsed < Duration::from_secs(1),
        format!("cycles {points:?} in {elapsed:.2?} (limit 1 s)"),
    )
}

fn spectrum_checks() -> Outcome {
    let pairs = [(3.0, [0.0, 2.0], [0.0, 0.75]), (4.0, [0.0, 2.0], [0.0, 1.0])];
    let mut ok = true;
    let mut worst_pass: f64 = 0.0;
    let mut least_fail = f64::INFINITY;
    for (r, b, l) in pairs {
        let check = is_spectrum(&b, r, &l).unwrap();
        ok &= check.pass && check.defect < 1e-12;
        worst_pass = worst_pass.max(check.defect);
        for k in 0..l.len() {
            for delta in [0.01, -0.01] {
                let mut moved = l;
                moved[k] += delta;
                let check = is_spectrum(&b, r, &moved).unwrap();
                ok &= !check.pass && check.defect > 1e-3;
                least_fail = least_fail.min(check.defect);
            }
        }
    }
    (
        ok,
        format!("max defect of valid pairs {worst_pass:.1e} (< 1e-12), min defect after 0.01 shifts {least_fail:.2e} (> 1e-3)"),
    )
}

fn cantor_orthonormality() -> Outcome {
    let start = Instant::now();
    let basis = cantor_basis(5);
    let report = gram_matrix(&AffineIfs::cantor(), &basis, DEFAULT_FT_EPS, GRAM_TOL).unwrap();
    let elapsed = start.elapsed();
    (
        basis.len() == 32 && report.max_deviation() < 1e-6 && elapsed < Duration::from_secs(10),
        format!(
            "{} elements, Gram deviation {:.2e} (< 1e-6) in {elapsed:.2?} (limit 10 s)",
            basis.len(),
            report.max_deviation()
        ),
    )
}

fn cuntz_relations() -> Outcome {
    let cantor = AffineIfs::cantor();
    let rep = CuntzRep::new(cantor.clone(), QmfBasis::exponential(&cantor, &CANTOR_L).unwrap()).unwrap();
    let basis = cantor_basis(3);
    let mut tests: Vec<Function> = [0.1, 1.0, 2.7]
        .map(|t| Function::Piecewise(PiecewiseExp::exponential(2, Complex64::new(1.0, 0.0), t)))
        .to_vec();
    tests.extend(basis[5..7].iter().cloned().map(Function::Piecewise));
    let cantor_report = verify_cuntz(&rep, &tests, &cantor.grid(DEFAULT_GRID), 1e-10).unwrap();

    let unit = AffineIfs::unit_interval(4);
    let walsh = CuntzRep::new(unit.clone(), walsh_filters(&UnitaryMatrix::walsh_example4()).unwrap()).unwrap();
    let steps: Vec<Function> = (0..5u32)
        .map(|s| {
            let len = 4usize.pow(1 + s % 3);
            let values = (0..len)
                .map(|k| Complex64::new(((k as f64 + 1.0) * (s as f64 + 2.3)).sin(), ((k * k) as f64 * 0.37).cos()))
                .collect();
            Function::Step(StepWalsh::from_values(4, values).unwrap())
        })
        .collect();
    let walsh_report = verify_cuntz(&walsh, &steps, &unit.grid(DEFAULT_GRID), 1e-10).unwrap();
    (
        cantor_report.pass && walsh_report.pass,
        format!(
            "Cantor: orthogonality {:.1e}, completeness {:.1e}; 4x4 Walsh: orthogonality {:.1e}, completeness {:.1e} (tol 1e-10, {} points, 5 functions each)",
            cantor_report.orthogonality_defect,
            cantor_report.completeness_defect,
            walsh_report.orthogonality_defect,
            walsh_report.completeness_defect,
            cantor_report.grid_size
        ),
    )
}

fn correspondence_round_trip() -> Outcome {
    let ifs = AffineIfs::cantor();
    let grid = ifs.grid(DEFAULT_GRID);
    let reference = Arc::new(QmfBasis::exponential(&ifs, &CANTOR_L).unwrap());
    let mut matrix_err: f64 = 0.0;
    let mut basis_err: f64 = 0.0;
    for seed in [1, 2, 3] {
        let a = UnitaryMatrix::random(2, seed);
        // matrix -> basis -> matrix
        let rotated = matrix_to_basis(&ifs, reference.clone(), MatrixField::Constant(a.clone())).unwrap();
        let mut recovered = Vec::new();
        for z in &grid {
            let back = basis_to_matrix(&ifs, &rotated, &reference, z).unwrap();
            matrix_err = matrix_err.max((back.entries() - a.entries()).map(|c| c.norm()).max());
            recovered.push(back);
        }
        // basis -> matrix -> basis
        let rebuilt = matrix_to_basis(&ifs, reference.clone(), MatrixField::Constant(recovered[0].clone())).unwrap();
        for z in &grid {
            for (m, m2) in rotated.filters().iter().zip(rebuilt.filters()) {
                basis_err = basis_err.max((m.value(&ifs, z) - m2.value(&ifs, z)).norm());
            }
        }
    }
    (
        matrix_err <= 1e-10 && basis_err <= 1e-10,
        format!("3 seeded unitaries: matrix sup error {matrix_err:.1e}, filter sup error {basis_err:.1e} (tol 1e-10)"),
    )
}

/// `A^{(x) 2}` with the index convention `(i_0 + N i_1, j_0 + N j_1)`.
fn tensor_square(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let k = a.kronecker(a);
    // nalgebra puts the first factor's index in the high digit
    let swap = |idx: usize| (idx % n) * n + idx / n;
    DMatrix::from_fn(n * n, n * n, |p, q| k[(swap(p), swap(q))])
}

fn walsh_reproduction() -> Outcome {
    // classical Walsh functions as products of Rademacher functions
    let h = UnitaryMatrix::hadamard2();
    let mut rademacher_err: f64 = 0.0;
    for g in gen_walsh_basis(&h, 3).unwrap() {
        let word = g.word().to_vec();
        for k in 0..8 {
            let x = (k as f64 + 0.5) / 8.0;
            let classical: f64 = word
                .iter()
                .enumerate()
                .map(|(t, &i)| {
                    let digit = ((x * 2f64.powi(t as i32 + 1)).floor() as i64) % 2;
                    if i == 1 && digit == 1 { -1.0 } else { 1.0 }
                })
                .product();
            rademacher_err = rademacher_err.max((g.eval(x) - classical).norm());
        }
    }

    let a = UnitaryMatrix::walsh_example4();
    let tensor = tensor_square(a.entries());
    let mut tensor_err: f64 = 0.0;
    let basis = gen_walsh_basis(&a, 2).unwrap();
    for g in basis.iter().filter(|g| g.word().len() == 2) {
        let (i0, i1) = (g.word()[0], g.word()[1]);
        for k in 0..16 {
            let (j0, j1) = (k / 4, k % 4);
            let expect = tensor[(i0 + 4 * i1, j0 + 4 * j1)] * 4.0;
            tensor_err = tensor_err.max((g.values()[k] - expect).norm());
        }
    }
    let gram = walsh_gram(&basis, 1e-12);
    (
        rademacher_err <= 1e-15 && tensor_err <= 1e-12 && gram.pass && gram.size == 16,
        format!(
            "N=2 words <= 3 vs Rademacher products: {rademacher_err:.1e}; 4x4 words of length 2 vs 4 A(x)A: {tensor_err:.1e}; 16x16 Gram deviation {:.1e}",
            gram.max_deviation()
        ),
    )
}

fn integer_spectrum_case() -> Outcome {
    let ifs = AffineIfs::new(4.0, vec![0.0, 2.0]).unwrap();
    let l = [0.0, 1.0];
    let cycles = find_extreme_cycles(&ifs, &l, 12, 1e-9).unwrap();
    let freqs = integer_spectrum(&ifs, &l, &cycles, 4).unwrap();
    let elements = gen_fractal_onb(&ifs, &l, &cycles, 4);
    let gram = gram_matrix(&ifs, &elements, DEFAULT_FT_EPS, GRAM_TOL).unwrap();
    let prefix = [0.0, 1.0, 4.0, 5.0, 16.0, 17.0, 20.0, 21.0];
    (
        freqs.starts_with(&prefix) && gram.max_deviation() < 1e-6,
        format!(
            "{} frequencies starting {:?}; Gram deviation {:.1e} (< 1e-6)",
            freqs.len(),
            &freqs[..prefix.len().min(freqs.len())],
            gram.max_deviation()
        ),
    )
}

fn parseval_diagnostic() -> Outcome {
    let unit = AffineIfs::unit_interval(2);
    let l = [0.0, 1.0];
    let cycles = find_extreme_cycles(&unit, &l, 12, 1e-9).unwrap();
    let lebesgue = gen_fractal_onb(&unit, &l, &cycles, 10);
    let mut ok = true;
    let mut lines = Vec::new();
    for t in [0.25, 0.5, 0.9] {
        let h = parseval_h(&unit, &lebesgue, t, DEFAULT_FT_EPS).unwrap();
        ok &= h >= 0.999;
        lines.push(format!("Lebesgue h({t}) = {h:.6}"));
    }
    let cantor = AffineIfs::cantor();
    let basis = cantor_basis(10);
    for t in [0.1, 0.3, 0.7] {
        let curve = parseval_curve(&cantor, &basis, t, DEFAULT_FT_EPS).unwrap();
        ok &= curve.windows(2).all(|w| w[1].h >= w[0].h);
        ok &= curve.iter().all(|p| p.h <= 1.0 + 1e-6);
        let values: Vec<String> = curve.iter().map(|p| format!("{:.4}", p.h)).collect();
        lines.push(format!("Cantor h({t}) for K = 0..10: [{}]", values.join(", ")));
    }
    (ok, lines.join("; "))
}

fn oracle_agreement() -> Outcome {
    let ifs = AffineIfs::cantor();
    let probes = [0.1, 0.5, 1.0, 1.5, 2.3, 3.7, 5.0, 7.25, 10.0, 13.5];
    let mut worst: f64 = 0.0;
    for (i, &t) in probes.iter().enumerate() {
        let exact = mu_hat(&ifs, t, DEFAULT_FT_EPS);
        let mc = monte_carlo(&ifs, 1_000_000, 2024 + i as u64, |p| cis(t * p.x()));
        worst = worst.max((mc.value - exact).norm());
    }
    let invariance = check_strong_invariance(&ifs, &probes, 1_000_000, 7);
    let gap = invariance.max_gap();
    (
        worst < 3e-3 && gap < 5e-3,
        format!("max |MC - product formula| {worst:.2e} (< 3e-3); max invariance gap {gap:.2e} (< 5e-3); 1e6 samples, 10 probes"),
    )
}

fn transfer_properties() -> Outcome {
    let cantor = AffineIfs::cantor();
    let mut constant_err: f64 = 0.0;
    for (ifs, l) in [(cantor.clone(), CANTOR_L.to_vec()), (AffineIfs::unit_interval(2), vec![0.0, 1.0])] {
        let ones = TransferGrid::covering(&l, ifs.scale(), TRANSFER_POINTS, |_| 1.0).unwrap();
        let h = transfer_iterate(&ifs, &l, &ones, 25).unwrap();
        constant_err = constant_err.max(h.distance_to_constant(1.0));
    }
    // pseudo-random perturbation away from the fixed point 0 of g_0
    let noise = |t: f64| {
        let u = ((t * 7919.0).sin() * 43758.5453).rem_euclid(1.0);
        1.0 + 0.5 * u * (t.abs() / 0.05).min(1.0)
    };
    let h0 = TransferGrid::covering(&CANTOR_L, 3.0, TRANSFER_POINTS, noise).unwrap();
    let start = h0.distance_to_constant(1.0);
    let mut reached = None;
    let mut h = h0;
    for it in 1..=100 {
        h = transfer_iterate(&cantor, &CANTOR_L, &h, 1).unwrap();
        if h.distance_to_constant(1.0) < 1e-3 {
            reached = Some(it);
            break;
        }
    }
    (
        constant_err <= 1e-12 && reached.is_some(),
        format!(
            "constants drift {constant_err:.1e} (<= 1e-12); perturbation {start:.2} -> within 1e-3 after {} iterations (limit 100)",
            reached.map_or("more than 100".to_string(), |n| n.to_string())
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("extreme cycles of the Cantor system", extreme_cycles_of_cantor),
        ("spectrum checks", spectrum_checks),
        ("orthonormality of the 32-element Cantor truncation", cantor_orthonormality),
        ("Cuntz relations", cuntz_relations),
        ("QMF basis / unitary matrix round trip", correspondence_round_trip),
        ("Walsh reproduction", walsh_reproduction),
        ("integer spectrum", integer_spectrum_case),
        ("completeness diagnostic", parseval_diagnostic),
        ("Monte-Carlo oracles", oracle_agreement),
        ("transfer operator", transfer_properties),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| (false, "panicked".into()));
        if !pass {
            failures += 1;
        }
        println!("[{}] {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, k + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
