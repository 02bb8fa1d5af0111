//! Invariant suites sampled over a chart.

use std::sync::Arc;

use clap::ValueEnum;
use cr3kit::connection::{tw_axiom_suite, ConnectionKind, LocalConnection};
use cr3kit::corpus::random_basic_field;
use cr3kit::curvature::{box_m, directions, sectional_q, tanaka_k, tanaka_phi};
use cr3kit::deform::{
    deform_type2, fiber_integral, holder_volume_check, reeb_deform_type1, xf_field,
    LinearCombination,
};
use cr3kit::sasaki::{j0, FrameVec, VectorField};
use cr3kit::{sweep, Point, Result, SasakiChart, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::report::{Sample, TOL_EXACT, TOL_NESTED, TOL_QUADRATURE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Frame,
    Connection,
    Curvature,
    Deform,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Frame => "frame",
            Suite::Connection => "connection",
            Suite::Curvature => "curvature",
            Suite::Deform => "deform",
            Suite::All => "all",
        }
    }
}

fn includes(suites: &[Suite], other: Suite) -> bool {
    suites.iter().any(|&s| s == Suite::All || s == other)
}

#[derive(Debug, Clone, Copy)]
pub struct Sampling {
    pub grid: usize,
    pub seed: u64,
    /// Whether `Φ` can be evaluated (needs third-order jets of `u`).
    pub phi: bool,
}

const BASIS: [FrameVec; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
const FIBER_POINTS: usize = 4;

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// `grid × grid` base points, each at 4 fibre heights jittered by the seed.
pub fn sample_points(c: &SasakiChart, grid: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = c.fiber_len;
    let mut out = Vec::with_capacity(grid * grid * FIBER_POINTS);
    for [x, y] in c.base.domain.grid(grid) {
        for k in 0..FIBER_POINTS {
            let t = len * (k as f64 + rng.gen::<f64>()) / FIBER_POINTS as f64;
            out.push([x, y, t]);
        }
    }
    out
}

/// A seeded basic test function, positive and non-constant.
pub fn test_function(seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    random_basic_field(&mut rng)
}

pub fn run(c: &SasakiChart, suites: &[Suite], s: Sampling) -> Vec<Sample> {
    let points = sample_points(c, s.grid, s.seed);
    let f = test_function(s.seed);
    let mut global = Vec::new();
    let mut deform_ctx = None;
    if includes(suites, Suite::Deform) {
        let ctx = DeformContext::new(c, &f);
        global.extend(ctx.global.iter().cloned());
        deform_ctx = Some(ctx);
    }
    let per_point = sweep::map(&points, |&p| {
        let mut out = Vec::new();
        if includes(suites, Suite::Frame) {
            frame_checks(c, p, &mut out);
        }
        if includes(suites, Suite::Connection) {
            connection_checks(c, p, &mut out);
        }
        if includes(suites, Suite::Curvature) {
            curvature_checks(c, p, &f, s.phi, &mut out);
        }
        if let Some(ctx) = &deform_ctx {
            ctx.point_checks(c, p, &f, &mut out);
        }
        out
    });
    global
        .into_iter()
        .chain(per_point.into_iter().flatten())
        .collect()
}

fn push(out: &mut Vec<Sample>, name: &'static str, tol: f64, p: Point, d: Result<f64>) {
    out.push(Sample::new(name, tol, Some(p), d));
}

fn frame_checks(c: &SasakiChart, p: Point, out: &mut Vec<Sample>) {
    push(out, "kk_consistency", TOL_EXACT, p, c.kk_consistency(p));
    let coords = || -> Result<[[f64; 3]; 3]> {
        let frame = c.frame(p)?;
        Ok(BASIS.map(|e| frame.to_coords(e)))
    };
    push(
        out,
        "orthonormal",
        TOL_EXACT,
        p,
        (|| {
            let e = coords()?;
            let mut worst: f64 = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((c.metric_eval(e[a], e[b], p)? - delta).abs());
                }
            }
            Ok(worst)
        })(),
    );
    push(
        out,
        "metric_eq2",
        TOL_EXACT,
        p,
        (|| {
            let e = coords()?;
            let mut worst: f64 = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    let d = c.metric_eval(e[a], e[b], p)? - c.metric_eq2(e[a], e[b], p)?;
                    worst = worst.max(d.abs());
                }
            }
            Ok(worst)
        })(),
    );
    push(
        out,
        "hermitian",
        TOL_EXACT,
        p,
        (|| {
            let q = [[1.0, 0.0], [0.0, 1.0]];
            let mut worst: f64 = 0.0;
            for (a, x) in q.iter().enumerate() {
                for (b, y) in q.iter().enumerate() {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    let l = c.levi_form(*x, *y, p)?;
                    let jx = [-x[1], x[0]];
                    let jy = [-y[1], y[0]];
                    let lj = c.levi_form(jx, jy, p)?;
                    worst = worst
                        .max((l.hermitian - delta).abs())
                        .max((lj.levi - l.levi).abs());
                }
            }
            Ok(worst)
        })(),
    );
    push(
        out,
        "nijenhuis",
        TOL_EXACT,
        p,
        c.nijenhuis([1.0, 0.0], [0.0, 1.0], p).map(sup),
    );
    let t = VectorField::Coordinates([
        ScalarField::constant(0.0),
        ScalarField::constant(0.0),
        ScalarField::constant(1.0),
    ]);
    push(
        out,
        "reeb_t",
        TOL_EXACT,
        p,
        c.reeb_check(&t, p).map(|d| d.eta.max(d.deta)),
    );
    push(out, "metric_t", TOL_EXACT, p, c.metric_t_derivative(p));
}

fn connection_checks(c: &SasakiChart, p: Point, out: &mut Vec<Sample>) {
    match LocalConnection::new(c, ConnectionKind::LeviCivita, p) {
        Ok(lc) => {
            let g = |i: usize, j: usize, k: usize| lc.gamma[i][j][k].value();
            let metric = sup((0..27).map(|n| {
                let (i, j, k) = (n / 9, n / 3 % 3, n % 3);
                g(i, j, k) + g(i, k, j)
            }));
            push(out, "lc_metric", TOL_EXACT, p, Ok(metric));
            let torsion = sup((0..9).flat_map(|n| lc.torsion(BASIS[n / 3], BASIS[n % 3])));
            push(out, "lc_torsion", TOL_EXACT, p, Ok(torsion));
            // ∇_T T = 0 and ∇_X T = JX on Q
            let mut nabla_t = sup(lc.covariant(BASIS[0], BASIS[0]));
            for x in [BASIS[1], BASIS[2]] {
                let d = lc.covariant(x, BASIS[0]);
                let jx = j0(x);
                nabla_t = nabla_t.max(sup((0..3).map(|k| d[k] - jx[k])));
            }
            push(out, "sasaki_nabla_t", TOL_EXACT, p, Ok(nabla_t));
        }
        Err(e) => {
            for name in ["lc_metric", "lc_torsion", "sasaki_nabla_t"] {
                push(out, name, TOL_EXACT, p, Err(e.clone()));
            }
        }
    }
    const TW: [&str; 7] = [
        "tw_nabla_t",
        "tw_nabla_j",
        "tw_preserves_q",
        "tw_torsion_q",
        "tw_tau_tilde",
        "tw_tau_anti",
        "tw_horizontal_lift",
    ];
    match tw_axiom_suite(c, p) {
        Ok(d) => {
            let values = [
                d.nabla_t,
                d.nabla_j,
                d.preserves_q,
                d.torsion_q,
                d.tau_tilde,
                d.tau_anti,
                d.horizontal_lift,
            ];
            for (name, v) in TW.into_iter().zip(values) {
                push(out, name, TOL_EXACT, p, Ok(v));
            }
        }
        Err(e) => {
            for name in TW {
                push(out, name, TOL_EXACT, p, Err(e.clone()));
            }
        }
    }
}

fn curvature_checks(c: &SasakiChart, p: Point, f: &ScalarField, phi: bool, out: &mut Vec<Sample>) {
    let k = tanaka_k(c, p);
    let kb = c.base.gauss_curvature(p);
    let sec = sectional_q(c, p);
    let triple = || -> Result<(f64, f64, f64)> { Ok((k.clone()?, kb.clone()?, sec.clone()?)) };
    push(
        out,
        "k_plus_gauss",
        TOL_EXACT,
        p,
        triple().map(|(k, kb, _)| (k + kb).abs()),
    );
    push(
        out,
        "sec_q_identity",
        TOL_EXACT,
        p,
        triple().map(|(k, _, s)| (s + 2.0 * k + 3.0).abs()),
    );
    push(
        out,
        "sec_q_oneill",
        TOL_EXACT,
        p,
        triple().map(|(_, kb, s)| (s - kb + 3.0).abs()),
    );
    push(
        out,
        "lc_bianchi",
        TOL_EXACT,
        p,
        (|| {
            let lc = LocalConnection::new(c, ConnectionKind::LeviCivita, p)?;
            let mut worst: f64 = 0.0;
            for (i, j, l) in [
                (0, 1, 2),
                (0, 1, 1),
                (0, 2, 2),
                (1, 2, 1),
                (1, 2, 2),
                (0, 1, 0),
            ] {
                let (x, y, z) = (BASIS[i], BASIS[j], BASIS[l]);
                let a = lc.curvature(x, y, z)?;
                let b = lc.curvature(y, z, x)?;
                let cc = lc.curvature(z, x, y)?;
                worst = worst.max(sup((0..3).map(|m| a[m] + b[m] + cc[m])));
            }
            Ok(worst)
        })(),
    );
    let dirs = directions(8);
    push(
        out,
        "box_tw_lc",
        TOL_EXACT,
        p,
        (|| {
            let mut worst: f64 = 0.0;
            for x in &dirs {
                let tw = box_m(c, ConnectionKind::TanakaWebster, f, *x, p)?;
                let lc = box_m(c, ConnectionKind::LeviCivita, f, *x, p)?;
                worst = worst.max(relative(tw, lc));
            }
            Ok(worst)
        })(),
    );
    push(
        out,
        "box_base",
        TOL_EXACT,
        p,
        (|| {
            let e = (-c.base.u_jet(p)?.value()).exp();
            let mut worst: f64 = 0.0;
            for x in &dirs {
                let tw = box_m(c, ConnectionKind::TanakaWebster, f, *x, p)?;
                let base = c.base.box_sigma(f, [e * x[0], e * x[1]], p)?;
                worst = worst.max(relative(tw, base));
            }
            Ok(worst)
        })(),
    );
    if phi {
        push(
            out,
            "phi_trace_free",
            TOL_NESTED,
            p,
            (|| {
                let mut worst: f64 = 0.0;
                for x in &dirs {
                    let jx = [-x[1], x[0]];
                    worst = worst.max((tanaka_phi(c, *x, p)? + tanaka_phi(c, jx, p)?).abs());
                }
                Ok(worst)
            })(),
        );
    }
}

struct DeformContext {
    global: Vec<Sample>,
    type1: Result<cr3kit::deform::Type1Deformation>,
    type2: Result<cr3kit::deform::Type2Deformation>,
    periodic: LinearCombination,
}

impl DeformContext {
    fn new(c: &SasakiChart, f: &ScalarField) -> Self {
        let mut global = Vec::new();
        if c.base.domain.is_compact_cell() {
            let h = holder_volume_check(c, f).map(|r| (-r.margin).max(0.0));
            global.push(Sample::new("holder", TOL_QUADRATURE, None, h));
        }
        let sigma =
            ScalarField::parse("0.01*sin(2*3.141592653589793*x)*sin(2*3.141592653589793*y)")
                .expect("constant expression parses");
        let type2 = deform_type2(c, &sigma);
        if let Ok(d) = &type2 {
            global.push(Sample::new(
                "type2_reeb",
                TOL_NESTED,
                None,
                Ok::<_, String>(d.reeb_defect),
            ));
        }
        // a fibre-periodic function; ∫ ∂t g dt must vanish
        let w = 2.0 * std::f64::consts::PI / c.fiber_len;
        let g = ScalarField::parse(&format!("sin({w:?}*t + x) * (1 + 0.5*y^2)"))
            .expect("constant expression parses");
        let periodic = LinearCombination {
            constant: 0.0,
            terms: vec![(1.0, Arc::new(g), Some(2))],
        };
        Self {
            global,
            type1: reeb_deform_type1(c, f),
            type2,
            periodic,
        }
    }

    fn point_checks(&self, c: &SasakiChart, p: Point, f: &ScalarField, out: &mut Vec<Sample>) {
        // dη(X_f, Y) = −df(Y) on Q
        push(
            out,
            "xf_sign",
            TOL_EXACT,
            p,
            (|| {
                let x = xf_field(c, f, p)?;
                let frame = c.frame(p)?;
                let fj = f.eval_jets(&cr3kit::Jet::seeds(p))?;
                let mut worst: f64 = 0.0;
                for b in 1..3 {
                    let d = c.deta([0.0, x[0], x[1]], BASIS[b], p)?;
                    worst = worst.max((d + frame.along(b, &fj)?.value()).abs());
                }
                Ok(worst)
            })(),
        );
        push(
            out,
            "type1_reeb",
            TOL_EXACT,
            p,
            match &self.type1 {
                Ok(d) => d.defects(p).map(|d| d.eta.max(d.deta).max(d.lie)),
                Err(e) => Err(e.clone()),
            },
        );
        push(
            out,
            "fiber_dt_integral",
            TOL_QUADRATURE,
            p,
            fiber_integral(c, &self.periodic, [p[0], p[1]]).map(f64::abs),
        );
        push(
            out,
            "type2_small",
            TOL_NESTED,
            p,
            match &self.type2 {
                Ok(d) => (|| {
                    let k = tanaka_k(&d.chart, p)?;
                    let kb = d.chart.base.gauss_curvature(p)?;
                    Ok((k + kb).abs().max(d.chart.kk_consistency(p)?))
                })(),
                Err(e) => Err(e.clone()),
            },
        );
    }
}

/// `|k′ − c·k|` for the type-0 chart `T′ = cT`.
pub fn k_rescaled(
    original: &SasakiChart,
    deformed: &SasakiChart,
    factor: f64,
    s: Sampling,
) -> Vec<Sample> {
    let points = sample_points(original, s.grid, s.seed);
    sweep::map(&points, |&p| {
        let d: Result<f64> =
            (|| Ok((tanaka_k(deformed, p)? - factor * tanaka_k(original, p)?).abs()))();
        Sample::new("k_rescaled", TOL_EXACT, Some(p), d)
    })
}

/// Reeb defects of `T′ = fT + X_f` for `η/f`.
pub fn type1_samples(
    c: &SasakiChart,
    d: &cr3kit::deform::Type1Deformation,
    s: Sampling,
) -> Vec<Sample> {
    let points = sample_points(c, s.grid, s.seed);
    sweep::map(&points, |&p| {
        let v = d.defects(p).map(|d| d.eta.max(d.deta).max(d.lie));
        Sample::new("type1_reeb", TOL_EXACT, Some(p), v)
    })
}
