//! Acceptance sweep. Each test prints one PASS/FAIL line and then asserts it.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use cr3kit::connection::{tw_axiom_suite, ConnectionKind, LocalConnection};
use cr3kit::corpus::{random_basic_field, sphere_rotational};
use cr3kit::curvature::{directions, flatness_test, sectional_q, tanaka_k, tanaka_phi};
use cr3kit::deform::{cr_reeb_defect, cr_reeb_sweep, deform_type2, holder_volume_check, hopf_reeb};
use cr3kit::oracle::finite_diff_oracle;
use cr3kit::{Jet, Point, SasakiChart, ScalarField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn catalog() -> Vec<SasakiChart> {
    vec![
        SasakiChart::flat(),
        SasakiChart::round(),
        SasakiChart::hyperbolic(),
    ]
}

fn with_perturbed() -> Vec<SasakiChart> {
    let mut v = catalog();
    v.push(SasakiChart::perturbed_torus(0.05));
    v
}

fn random_points(c: &SasakiChart, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let [x, y] = c.base.domain.random_point(&mut rng);
            [x, y, rng.gen_range(0.0..1.0)]
        })
        .collect()
}

fn grid_points(c: &SasakiChart, n: usize) -> Vec<Point> {
    c.base
        .domain
        .grid(n)
        .into_iter()
        .map(|[x, y]| [x, y, 0.25])
        .collect()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

#[test]
fn jet_partials_match_finite_differences() {
    let start = Instant::now();
    let orders: [[u8; 3]; 5] = [[1, 0, 0], [0, 1, 0], [2, 0, 0], [1, 1, 0], [0, 2, 0]];
    let mut worst: f64 = 0.0;
    for c in catalog() {
        let fields = [
            c.base.conformal_factor().clone(),
            c.conn.ax.clone(),
            c.conn.ay.clone(),
        ];
        for p in random_points(&c, 100, 1) {
            for f in &fields {
                let jet = f.jet_at(p).unwrap();
                for m in orders {
                    let exact = jet.derivative(m).unwrap();
                    let fd = finite_diff_oracle(f.as_ref(), p, m, 1e-4).unwrap();
                    worst = worst.max((exact - fd).abs() / exact.abs().max(1.0));
                }
            }
        }
    }
    let t = secs(start.elapsed());
    verdict(
        "jet_partials_match_finite_differences",
        worst < 1e-4 && t < 5.0,
        format!("max relative error {worst:.3e} (tol 1e-4), {t:.2}s (limit 5s)"),
    );
}

#[test]
fn kaluza_klein_consistency() {
    let mut worst: f64 = 0.0;
    for c in catalog() {
        for p in random_points(&c, 100, 2) {
            worst = worst.max(c.kk_consistency(p).unwrap());
        }
    }
    verdict(
        "kaluza_klein_consistency",
        worst < 1e-10,
        format!("max defect {worst:.3e} (tol 1e-10)"),
    );
}

#[test]
fn tanaka_k_is_minus_gauss_curvature() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for c in with_perturbed() {
        for p in grid_points(&c, 16) {
            let k = tanaka_k(&c, p).unwrap();
            let kb = c.base.gauss_curvature(p).unwrap();
            worst = worst.max((k + kb).abs());
        }
    }
    let t = secs(start.elapsed());
    verdict(
        "tanaka_k_is_minus_gauss_curvature",
        worst < 1e-8 && t < 10.0,
        format!("max |k + K| {worst:.3e} (tol 1e-8), {t:.2}s (limit 10s)"),
    );
}

#[test]
fn contact_plane_sectional_identity() {
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for c in with_perturbed() {
        for p in grid_points(&c, 16) {
            let s = sectional_q(&c, p).unwrap();
            let k = tanaka_k(&c, p).unwrap();
            let d = (s + 2.0 * k + 3.0).abs();
            if d > worst {
                worst = d;
                at = format!("{} at {p:?} (sec_Q {s:.6}, k {k:.6})", c.name());
            }
        }
    }
    let flat = sectional_q(&SasakiChart::flat(), [0.3, 0.6, 0.0]).unwrap();
    verdict(
        "contact_plane_sectional_identity",
        worst < 1e-8 && (flat + 3.0).abs() < 1e-8,
        format!("max |sec_Q + 2k + 3| {worst:.3e} (tol 1e-8) worst {at}; flat sec_Q {flat:.12}"),
    );
}

fn tw_worst(charts: &[SasakiChart], points: impl Fn(&SasakiChart) -> Vec<Point>) -> (f64, f64) {
    let mut worst: f64 = 0.0;
    let mut tau: f64 = 0.0;
    for c in charts {
        for p in points(c) {
            let d = tw_axiom_suite(c, p).unwrap();
            worst = worst.max(d.max());
            tau = tau.max(d.tau_tilde);
        }
    }
    (worst, tau)
}

#[test]
fn tanaka_webster_axioms() {
    let (worst, tau) = tw_worst(&catalog(), |c| random_points(c, 100, 5));
    verdict(
        "tanaka_webster_axioms",
        worst < 1e-9 && tau < 1e-9,
        format!("max axiom defect {worst:.3e}, max tau-tilde {tau:.3e} (tol 1e-9)"),
    );
}

#[test]
fn box_operator_agrees_for_both_connections() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for c in catalog() {
        for _ in 0..20 {
            let f = random_basic_field(&mut rng);
            let [x, y] = c.base.domain.random_point(&mut rng);
            let p = [x, y, rng.gen_range(0.0..1.0)];
            let tw = LocalConnection::new(&c, ConnectionKind::TanakaWebster, p).unwrap();
            let lc = LocalConnection::new(&c, ConnectionKind::LeviCivita, p).unwrap();
            let fj = f.eval_jets(&Jet::seeds(p)).unwrap();
            for dir in directions(8) {
                let a = tw.box_operator(&fj, dir).unwrap();
                let b = lc.box_operator(&fj, dir).unwrap();
                worst = worst.max((a - b).abs());
            }
        }
    }
    verdict(
        "box_operator_agrees_for_both_connections",
        worst < 1e-9,
        format!("max |box_tw - box_lc| {worst:.3e} (tol 1e-9)"),
    );
}

#[test]
fn flatness_detects_constant_curvature() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for c in catalog() {
        let v = flatness_test(&c, 32).unwrap();
        pass &= v.flat && v.max_phi < 1e-7;
        lines.push(format!("{} max|phi| {:.3e}", c.name(), v.max_phi));
    }
    let v = flatness_test(&SasakiChart::perturbed_torus(0.05), 32).unwrap();
    pass &= !v.flat && v.max_phi > 1e-4;
    lines.push(format!(
        "perturbed max|phi| {:.3e} at {:?}",
        v.max_phi, v.location
    ));
    let t = secs(start.elapsed());
    verdict(
        "flatness_detects_constant_curvature",
        pass && t < 60.0,
        format!(
            "{} (flat < 1e-7, perturbed > 1e-4), {t:.2}s (limit 60s)",
            lines.join("; ")
        ),
    );
}

#[test]
fn phi_is_trace_free() {
    let mut worst: f64 = 0.0;
    for c in with_perturbed() {
        for p in grid_points(&c, 8) {
            for x in directions(8) {
                let a = tanaka_phi(&c, x, p).unwrap();
                let b = tanaka_phi(&c, [-x[1], x[0]], p).unwrap();
                worst = worst.max((a + b).abs());
            }
        }
    }
    verdict(
        "phi_is_trace_free",
        worst < 1e-8,
        format!("max |phi(X,X) + phi(JX,JX)| {worst:.3e} (tol 1e-8)"),
    );
}

fn holder_margins(seed: u64) -> Vec<(f64, bool, bool)> {
    let flat = SasakiChart::flat();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..20)
        .map(|_| {
            let f = random_basic_field(&mut rng);
            let r = holder_volume_check(&flat, &f).unwrap();
            (r.margin, r.holds, r.equality)
        })
        .collect()
}

#[test]
fn holder_volume_inequality() {
    let first = holder_margins(9);
    let second = holder_margins(9);
    let holds = first.iter().all(|m| m.1);
    let never_equal = first.iter().all(|m| !m.2);
    let drift = first
        .iter()
        .zip(&second)
        .map(|(a, b)| (a.0 - b.0).abs())
        .fold(0.0, f64::max);
    let constant = holder_volume_check(&SasakiChart::flat(), &ScalarField::constant(1.0)).unwrap();
    let min_margin = first.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    verdict(
        "holder_volume_inequality",
        holds && never_equal && constant.equality && drift <= 1e-9,
        format!(
            "20/20 hold: {holds}, min margin {min_margin:.3e}, equality only for constant: {}, rerun drift {drift:.1e}",
            never_equal && constant.equality
        ),
    );
}

#[test]
fn reeb_hessian_criterion() {
    let flat = SasakiChart::flat();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut weakest = f64::INFINITY;
    for _ in 0..50 {
        let f = random_basic_field(&mut rng);
        let (worst, _) = cr_reeb_sweep(&flat, &f, 16).unwrap();
        weakest = weakest.min(worst);
    }
    let round = SasakiChart::round();
    let mut sphere: f64 = 0.0;
    for p in random_points(&round, 100, 11) {
        let c: f64 = rng.gen_range(-1.0..1.0);
        let a = c.abs() + rng.gen_range(0.1..2.0);
        sphere = sphere.max(cr_reeb_defect(&round, &sphere_rotational(a, c), p).unwrap());
    }
    verdict(
        "reeb_hessian_criterion",
        weakest > 1e-6 && sphere < 1e-8,
        format!("torus corpus min over f of max defect {weakest:.3e} (> 1e-6); sphere family max {sphere:.3e} (< 1e-8)"),
    );
}

#[test]
fn type2_deformation_closure() {
    let sigma = ScalarField::parse(&format!("0.05*sin(2*{PI:?}*x)*sin(2*{PI:?}*y)")).unwrap();
    let deformed = match deform_type2(&SasakiChart::flat(), &sigma) {
        Ok(d) => d,
        Err(e) => {
            verdict(
                "type2_deformation_closure",
                false,
                format!("deformation rejected: {e}"),
            );
            unreachable!()
        }
    };
    let c = &deformed.chart;
    let mut cor: f64 = 0.0;
    let mut sec: f64 = 0.0;
    for p in grid_points(c, 16) {
        let k = tanaka_k(c, p).unwrap();
        let kb = c.base.gauss_curvature(p).unwrap();
        cor = cor.max((k + kb).abs());
        sec = sec.max((sectional_q(c, p).unwrap() + 2.0 * k + 3.0).abs());
    }
    let (tw, tau) = tw_worst(std::slice::from_ref(c), |c| random_points(c, 100, 12));
    verdict(
        "type2_deformation_closure",
        cor < 1e-6 && sec < 1e-6 && tw < 1e-6 && tau < 1e-6,
        format!("|k+K| {cor:.3e}, |sec_Q+2k+3| {sec:.3e}, axioms {tw:.3e} (tol 1e-6)"),
    );
}

#[test]
fn hopf_orbit_closure() {
    let cis = Complex64::from_polar;
    let cases = [
        ((cis(0.5, 0.0), cis(0.5, 0.0)), (true, Some(1))),
        (
            (cis(0.5, 2.0 * PI / 3.0), cis(0.25, 2.0 * PI / 3.0)),
            (true, Some(3)),
        ),
        ((cis(0.5, 1.0), cis(0.5, 0.0)), (false, None)),
    ];
    let mut got = Vec::new();
    let mut pass = true;
    for ((a, b), want) in cases {
        let v = hopf_reeb(a, b).unwrap();
        pass &= (v.closed_orbits, v.order) == want;
        got.push(format!("{:?}", (v.closed_orbits, v.order)));
    }
    verdict("hopf_orbit_closure", pass, got.join(", "));
}
