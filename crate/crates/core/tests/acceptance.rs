//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::FRAC_PI_3;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use grasspack::cli::{cmd_complement, OutputFormat, RunConfig};
use grasspack::constructions::{
    icosahedral_lines, lift_lines_to_subspaces, plucker_embed, simplex_lines, LineSet,
    SubspaceFamily,
};
use grasspack::distances::{
    chordal, chordal_trace, evaluate, fubini_study, fubini_study_product, theta_f, theta_k,
};
use grasspack::grassmann::{
    cross_gram, principal_angles, principal_angles_recursive, principal_angles_via_eigen,
};
use grasspack::io::FamilyFile;
use grasspack::linalg::{determinant, dot};
use grasspack::optimizer::{objective_value, solve, Objective, PackingProblem};
use grasspack::verification::{
    binomial, bound_blokhuis, bound_chordal, bound_decaen, bound_fubini_study, bound_gerzon,
    bound_lemmens_seidel, bound_theorem1, certify_theorem1, check_equiangular, size_chrss,
};
use grasspack::{Metric, Subspace, TolerancePolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs, || {
        format!("runtime {:.2}s exceeds {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_pairs(k: usize, n: usize, count: usize, seed: u64) -> Vec<(Subspace, Subspace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                Subspace::random(k, n, &mut rng).unwrap(),
                Subspace::random(k, n, &mut rng).unwrap(),
            )
        })
        .collect()
}

fn spectrum_in(values: &[f64], allowed: &[f64], tol: f64) -> bool {
    values
        .iter()
        .all(|v| allowed.iter().any(|a| (v - a).abs() <= tol))
}

fn criterion_1() -> Outcome {
    let tol = TolerancePolicy::default();
    let start = Instant::now();
    let shapes = [(1, 3), (2, 4), (2, 5), (3, 6)];
    let mut spectral_eigen = 0.0f64;
    let mut spectral_recursive = 0.0f64;
    for (s, &(k, n)) in shapes.iter().enumerate() {
        for (u, v) in random_pairs(k, n, 125, 100 + s as u64) {
            let a = ok(principal_angles(&u, &v))?;
            let b = ok(principal_angles_via_eigen(&u, &v, &tol))?;
            let c = ok(principal_angles_recursive(&u, &v, &tol))?;
            spectral_eigen = spectral_eigen.max(a.max_abs_diff(&b));
            spectral_recursive = spectral_recursive.max(a.max_abs_diff(&c));
        }
    }
    let elapsed = start.elapsed();
    ensure(spectral_eigen <= 1e-9, || {
        format!("spectral vs eigen differ by {spectral_eigen:e}")
    })?;
    ensure(spectral_recursive <= 1e-6, || {
        format!("spectral vs recursive differ by {spectral_recursive:e}")
    })?;
    within(elapsed, 10.0)?;
    Ok(format!(
        "500 pairs; max |svd-eig| {spectral_eigen:.1e}, max |svd-recursive| {spectral_recursive:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let tol = TolerancePolicy::default();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (u, v) in random_pairs(2, 5, 200, 200) {
        let mut direct = ok(principal_angles(&u, &v))?.nonzero(tol.eps_angle);
        let mut dual = ok(principal_angles(&ok(u.complement(&tol))?, &ok(v.complement(&tol))?))?
            .nonzero(tol.eps_angle);
        direct.sort_by(f64::total_cmp);
        dual.sort_by(f64::total_cmp);
        ensure(direct.len() == dual.len(), || {
            format!("nonzero counts differ: {direct:?} vs {dual:?}")
        })?;
        for (a, b) in direct.iter().zip(&dual) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-8, || format!("complement spectra differ by {worst:e}"))?;
    within(elapsed, 5.0)?;
    Ok(format!(
        "200 pairs in Gr(2,5); max mismatch {worst:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn check_lift(lines: &LineSet, expected_members: usize, n_expected: usize) -> Result<String, String> {
    let tol = TolerancePolicy::default();
    let alpha = lines.common_angle();
    let family = ok(lift_lines_to_subspaces(lines, 2, &tol))?;
    ensure(family.len() == expected_members, || {
        format!("{} members, expected {expected_members}", family.len())
    })?;
    ensure(family.dim() == 2 && family.ambient_dim() == n_expected, || {
        format!("lives in Gr({},{})", family.dim(), family.ambient_dim())
    })?;
    let members = family.members();
    let mut pairs = 0;
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            pairs += 1;
            let s = ok(principal_angles(&members[i], &members[j]))?;
            ensure(spectrum_in(s.angles(), &[0.0, alpha], 1e-8), || {
                format!("pair ({i},{j}) spectrum {:?}", s.angles())
            })?;
            let f = theta_f(&s, tol.eps_angle);
            let k = theta_k(&s);
            ensure((f - alpha).abs() <= 1e-8 && (k - alpha).abs() <= 1e-8, || {
                format!("pair ({i},{j}) thetaF {f}, thetaK {k}, alpha {alpha}")
            })?;
        }
    }
    let expected_pairs = expected_members * (expected_members - 1) / 2;
    ensure(pairs == expected_pairs, || format!("{pairs} pairs"))?;
    for (metric, want) in [
        (Metric::ThetaF, true),
        (Metric::ThetaK, true),
        (Metric::Theta1, false),
    ] {
        let report = ok(check_equiangular(&family, metric, &tol, 1e-8))?;
        ensure(report.verdict == want, || {
            format!("{metric} verdict {} (expected {want})", report.verdict)
        })?;
    }
    Ok(format!("{expected_members} members, {pairs} pairs, alpha {alpha:.9}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let simplex = check_lift(&ok(simplex_lines(2))?, 9, 4)?;
    let ico = check_lift(&icosahedral_lines(), 36, 6)?;
    ensure((icosahedral_lines().common_angle() - (1.0 / 5f64.sqrt()).acos()).abs() <= 1e-12, || {
        "icosahedral angle is not arccos(1/sqrt 5)".into()
    })?;
    ensure((ok(simplex_lines(2))?.common_angle() - FRAC_PI_3).abs() <= 1e-12, || {
        "simplex angle is not pi/3".into()
    })?;
    let elapsed = start.elapsed();
    within(elapsed, 5.0)?;
    Ok(format!(
        "simplex lift: {simplex}; icosahedral lift: {ico}; {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_4() -> Outcome {
    let tol = TolerancePolicy::default();
    let start = Instant::now();
    let family = ok(lift_lines_to_subspaces(&ok(simplex_lines(2))?, 2, &tol))?;
    let cert = ok(certify_theorem1(&family, FRAC_PI_3, &tol, 1e-8))?;
    ensure((cert.lambda - 0.25).abs() <= 1e-12, || format!("lambda {}", cert.lambda))?;
    for (i, row) in cert.eval_matrix.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if i == j {
                ensure((x - 0.5625).abs() <= 1e-8, || format!("diagonal ({i},{i}) = {x}"))?;
            } else {
                ensure(x.abs() <= 1e-8, || format!("off-diagonal ({i},{j}) = {x:e}"))?;
            }
        }
    }
    ensure(cert.verdict && cert.bound == 55 && cert.m == 9, || {
        format!("verdict {}, m {}, bound {}", cert.verdict, cert.m, cert.bound)
    })?;
    ensure(ok(binomial(11, 2))? == 55, || "C(11,2) != 55".into())?;

    let lines = ok(ok(simplex_lines(2))?.to_family(&tol))?;
    let small = ok(certify_theorem1(&lines, FRAC_PI_3, &tol, 1e-8))?;
    ensure(small.verdict && small.m == 3 && small.bound == 3, || {
        format!("simplex lines: verdict {}, m {}, bound {}", small.verdict, small.m, small.bound)
    })?;
    let elapsed = start.elapsed();
    within(elapsed, 1.0)?;
    Ok(format!(
        "9-family diagonal 0.5625, max off-diagonal {:.1e}, 9 <= 55; 3 simplex lines meet bound 3; {:.3}s",
        cert.max_off_diagonal,
        elapsed.as_secs_f64()
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut chord = 0.0f64;
    let mut fs = 0.0f64;
    let shapes = [(1, 3), (2, 4), (2, 5), (3, 6)];
    for (s, &(k, n)) in shapes.iter().enumerate() {
        for (u, v) in random_pairs(k, n, 125, 500 + s as u64) {
            let spec = ok(principal_angles(&u, &v))?;
            chord = chord.max((chordal(&spec) - ok(chordal_trace(&u, &v))?).abs());
            fs = fs.max((fubini_study_product(&spec) - ok(fubini_study(&u, &v))?).abs());
        }
    }
    let mut plucker = 0.0f64;
    for (s, &(k, n)) in [(2, 4), (2, 5), (3, 6)].iter().enumerate() {
        for (u, v) in random_pairs(k, n, 67, 600 + s as u64) {
            let inner = dot(&ok(plucker_embed(&u))?, &ok(plucker_embed(&v))?);
            let det = ok(determinant(&ok(cross_gram(&u, &v))?))?;
            plucker = plucker.max((inner - det).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(chord <= 1e-9, || format!("chordal forms differ by {chord:e}"))?;
    ensure(fs <= 1e-9, || format!("Fubini-Study forms differ by {fs:e}"))?;
    ensure(plucker <= 1e-9, || format!("Plucker inner product off by {plucker:e}"))?;
    within(elapsed, 10.0)?;
    Ok(format!(
        "chordal {chord:.1e}, fubini-study {fs:.1e} on 500 pairs; Cauchy-Binet {plucker:.1e} on 201 pairs; {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let eq = |name: &str, got: Result<u64, grasspack::Error>, want: u64| -> Result<(), String> {
        let got = ok(got)?;
        ensure(got == want, || format!("{name}: {got} != {want}"))
    };
    eq("gerzon(7)", bound_gerzon(7), 28)?;
    let decaen = ok(bound_decaen(1))?;
    ensure(decaen == (5, 8), || format!("decaen(1) = {decaen:?}"))?;
    eq("blokhuis(4)", bound_blokhuis(4), 330)?;
    eq("theorem1(2,4)", bound_theorem1(2, 4), 55)?;
    eq("chordal(4)", bound_chordal(4), 10)?;
    eq("fubini_study(2,4)", bound_fubini_study(2, 4), 21)?;
    eq("lemmens_seidel(2,4)", bound_lemmens_seidel(2, 4), 8)?;
    eq("lemmens_seidel(3,3)", bound_lemmens_seidel(3, 3), 1)?;
    for n in 1..=40u64 {
        eq("gerzon", bound_gerzon(n), ok(binomial(n + 1, 2))?)?;
        eq("chordal", bound_chordal(n), ok(binomial(n + 1, 2))?)?;
        for k in 1..=n.min(6) {
            let d = ok(binomial(n + 1, 2))?;
            eq("theorem1", bound_theorem1(k, n), ok(binomial(d + k - 1, k))?)?;
            eq(
                "fubini_study",
                bound_fubini_study(k, n),
                ok(binomial(ok(binomial(n, k))? + 1, 2))?,
            )?;
            eq(
                "lemmens_seidel",
                bound_lemmens_seidel(k, n),
                ok(binomial(n + 1, 2))? - ok(binomial(k + 1, 2))? + 1,
            )?;
        }
        if n >= 2 {
            eq("blokhuis", bound_blokhuis(n), ok(binomial(2 * n + 3, 4))?)?;
        }
    }
    for t in 1..=4u32 {
        let n = 3 * (1u64 << (2 * t - 1)) - 1;
        let (dn, b) = ok(bound_decaen(t))?;
        ensure(dn == n && 9 * b == 2 * (n + 1) * (n + 1), || format!("decaen({t}) = ({dn},{b})"))?;
    }
    for p in [3u64, 5, 7, 11, 13] {
        let c = ok(size_chrss(p))?;
        ensure(c.k == (p - 1) / 2 && c.n == p && c.size == ok(binomial(p + 1, 2))?, || {
            format!("chrss({p}) = {c:?}")
        })?;
    }
    for n in 2..=100u64 {
        let (t, b) = (ok(bound_theorem1(2, n))?, ok(bound_blokhuis(n))?);
        ensure(t < b, || format!("n={n}: theorem1 {t} >= blokhuis {b}"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, 1.0)?;
    Ok(format!(
        "all closed forms exact; theorem1(2,n) < blokhuis(n) for 2..=100; {:.3}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_7() -> Outcome {
    let tol = TolerancePolicy::default();
    let targets = [
        (PackingProblem::new(1, 2, 3, Metric::ThetaK, Objective::Maximin), FRAC_PI_3 - 1e-3),
        (
            PackingProblem::new(1, 3, 6, Metric::ThetaK, Objective::Maximin),
            (1.0 / 5f64.sqrt()).acos() - 5e-3,
        ),
    ];
    let start = Instant::now();
    let mut results = Vec::new();
    for (problem, _) in &targets {
        ensure(problem.restarts == 16 && problem.max_iters == 20000, || {
            "default budget is not 16 x 20000".into()
        })?;
        results.push(ok(solve(problem, &tol))?);
    }
    let elapsed = start.elapsed();
    let mut achieved = Vec::new();
    for ((problem, target), result) in targets.iter().zip(&results) {
        let min_angle = ok(objective_value(&result.family, Metric::ThetaK, Objective::Maximin, &tol))?;
        ensure(min_angle >= *target, || {
            format!("m={} Gr(1,{}): min angle {min_angle} < {target}", problem.m, problem.n)
        })?;
        achieved.push(min_angle);
    }
    within(elapsed, 60.0)?;
    for ((problem, _), first) in targets.iter().zip(&results) {
        let again = ok(solve(problem, &tol))?;
        let same = again.objective_value.to_bits() == first.objective_value.to_bits()
            && again.best_restart == first.best_restart
            && again.best_iteration == first.best_iteration
            && again
                .family
                .members()
                .iter()
                .zip(first.family.members())
                .all(|(a, b)| {
                    a.rep()
                        .as_slice()
                        .iter()
                        .zip(b.rep().as_slice())
                        .all(|(x, y)| x.to_bits() == y.to_bits())
                });
        ensure(same, || format!("m={} rerun differs", problem.m))?;
    }
    Ok(format!(
        "3 lines in R^2: {:.9} (pi/3 = {:.9}); 6 lines in R^3: {:.9} (arccos(1/sqrt 5) = {:.9}); {:.2}s; reruns bit-identical",
        achieved[0],
        FRAC_PI_3,
        achieved[1],
        (1.0 / 5f64.sqrt()).acos(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_8() -> Outcome {
    let tol = TolerancePolicy::default();
    let metrics = [Metric::Chordal, Metric::FubiniStudy, Metric::ThetaF, Metric::ThetaK];
    let mut worst = 0.0f64;
    for (s, &(k, n)) in [(1, 3), (2, 4), (2, 5), (3, 5)].iter().enumerate() {
        for (u, v) in random_pairs(k, n, 50, 800 + s as u64) {
            let spec = ok(principal_angles(&u, &v))?;
            let f = theta_f(&spec, tol.eps_angle);
            let kk = theta_k(&spec);
            let mid = [f, kk];
            ensure(mid.iter().all(|x| f <= *x && *x <= kk), || {
                format!("sandwich fails: thetaF {f}, thetaK {kk}")
            })?;
            let (uc, vc) = (ok(u.complement(&tol))?, ok(v.complement(&tol))?);
            for metric in metrics {
                let a = ok(evaluate(metric, &u, &v, &tol))?;
                let b = ok(evaluate(metric, &uc, &vc, &tol))?;
                worst = worst.max((a - b).abs());
            }
        }
    }
    ensure(worst <= 1e-8, || format!("complement changes a distance by {worst:e}"))?;

    let family = ok(lift_lines_to_subspaces(&ok(simplex_lines(2))?, 2, &tol))?;
    let dir = ok(tempfile::tempdir())?;
    let src = dir.path().join("lift.json");
    let dst = dir.path().join("lift_complement.json");
    ok(FamilyFile::from_family(&family).write(&src))?;
    let cfg = RunConfig {
        tol,
        format: OutputFormat::Text,
        seed: None,
    };
    let code = ok(cmd_complement(&cfg, &src, &dst, &mut std::io::sink()))?;
    ensure(code == 0, || format!("cmd_complement exit {code}"))?;
    let comp: SubspaceFamily = ok(ok(FamilyFile::read(&dst))?.to_family(&tol))?;
    for metric in metrics {
        let a = ok(check_equiangular(&family, metric, &tol, 1e-8))?.verdict;
        let b = ok(check_equiangular(&comp, metric, &tol, 1e-8))?.verdict;
        ensure(a == b, || format!("{metric}: verdict {a} becomes {b} under complement"))?;
    }
    Ok(format!(
        "200 pairs: thetaF <= thetaK, max complement drift {worst:.1e}; lift-family verdicts preserved for {} metrics",
        metrics.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("principal-angle routes agree", criterion_1),
        ("complement keeps nonzero angles", criterion_2),
        ("lifted families are equiangular", criterion_3),
        ("polynomial certificate", criterion_4),
        ("distance identities", criterion_5),
        ("exact bound tables", criterion_6),
        ("optimizer recovers known optima", criterion_7),
        ("sandwich and complement duality", criterion_8),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {} ({name}): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
