//! Deformations of Sasakian charts: constant rescaling (type 0), Reeb
//! transformations `T′ = fT + X_f` (type 1) and contact-form shifts
//! `η′ = η + dσ∘J₀` (type 2), plus fibre integrals, the Hölder volume check
//! and the Hopf-surface orbit test.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::{ConnectionKind, LocalConnection};
use crate::error::{Error, Result};
use crate::field::{FieldError, FieldRef, JetField, ScalarField};
use crate::jet::{Jet, Point};
use crate::quadrature::GaussLegendre;
use crate::sasaki::{ConnectionForm, FrameVec, LocalFrame, ReebDefects, SasakiChart, VectorField};
use crate::surface::SurfaceChart;
use crate::sweep;

/// Grid resolution used to sample positivity and contact conditions.
pub const SAMPLE_GRID: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeformationKind {
    Type0,
    Type1,
    Type2,
}

#[derive(Debug, Clone)]
pub enum Deformation {
    Type0 { c: f64 },
    Type1 { f: ScalarField },
    Type2 { sigma: ScalarField },
}

impl Deformation {
    pub fn kind(&self) -> DeformationKind {
        match self {
            Deformation::Type0 { .. } => DeformationKind::Type0,
            Deformation::Type1 { .. } => DeformationKind::Type1,
            Deformation::Type2 { .. } => DeformationKind::Type2,
        }
    }
}

/// `constant + Σ cᵢ·(∂ fᵢ)` where each term is optionally differentiated once.
#[derive(Debug, Clone)]
pub struct LinearCombination {
    pub constant: f64,
    pub terms: Vec<(f64, FieldRef, Option<usize>)>,
}

impl JetField for LinearCombination {
    fn jet_at(&self, p: Point) -> Result<Jet, FieldError> {
        let mut acc = Jet::constant(p, self.constant);
        for (c, f, axis) in &self.terms {
            let j = f.jet_at(p)?;
            let j = match axis {
                Some(a) => j.partial(*a)?,
                None => j,
            };
            acc = acc + j.scale(*c);
        }
        Ok(acc)
    }

    fn is_basic(&self) -> bool {
        self.terms.iter().all(|(_, f, _)| f.is_basic())
    }

    fn describe(&self) -> String {
        let mut s = format!("{:?}", self.constant);
        for (c, f, axis) in &self.terms {
            let d = match axis {
                Some(a) => format!("d{}", ["x", "y", "t"][*a]),
                None => String::new(),
            };
            s.push_str(&format!(" + {c:?}*{d}({})", f.describe()));
        }
        s
    }
}

fn basic(f: &ScalarField) -> Result<()> {
    if f.basic() {
        Ok(())
    } else {
        Err(Error::NotBasic(f.source().to_string()))
    }
}

fn sample_points(c: &SasakiChart) -> Vec<Point> {
    c.base
        .domain
        .grid(SAMPLE_GRID)
        .into_iter()
        .map(|[x, y]| [x, y, 0.0])
        .collect()
}

/// `X_f = ½J(df|_Q)♯` in `(E1, E2)` components.
pub fn xf_field(c: &SasakiChart, f: &ScalarField, p: Point) -> Result<[f64; 2]> {
    basic(f)?;
    let frame = c.frame(p)?;
    let fj = f.eval_jets(&Jet::seeds(p))?;
    let e1 = frame.along(1, &fj)?.value();
    let e2 = frame.along(2, &fj)?.value();
    Ok([-0.5 * e2, 0.5 * e1])
}

/// `T′ = fT + X_f`, `η′ = η/f`, `g′|_Q = g|_Q / f`.
#[derive(Debug, Clone)]
pub struct Type1Deformation {
    pub chart: SasakiChart,
    pub f: ScalarField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Type1Defects {
    /// `|η′(T′) − 1|`.
    pub eta: f64,
    /// `max_b |dη′(T′, ∂_b)|`.
    pub deta: f64,
    /// `max_b |(ℒ_{T′}η′)(∂_b)|` through Cartan's formula.
    pub lie: f64,
}

impl Type1Deformation {
    fn jets(&self, p: Point) -> Result<(LocalFrame, Jet, [Jet; 3])> {
        let frame = self.chart.frame(p)?;
        let fj = self.f.eval_jets(&Jet::seeds(p))?;
        let e1 = frame.along(1, &fj)?;
        let e2 = frame.along(2, &fj)?;
        // frame components (f, −½E2f, ½E1f), order drops by one through X_f
        let comps = [fj.clone(), e2.scale(-0.5), e1.scale(0.5)];
        let coords: [Jet; 3] = std::array::from_fn(|c| {
            let mut acc = &comps[0] * &frame.vectors[0][c];
            for a in 1..3 {
                acc = acc + &comps[a] * &frame.vectors[a][c];
            }
            acc
        });
        Ok((frame, fj, coords))
    }

    /// Coordinate components of `T′`.
    pub fn t_prime(&self, p: Point) -> Result<[f64; 3]> {
        let (_, _, t) = self.jets(p)?;
        Ok([t[0].value(), t[1].value(), t[2].value()])
    }

    /// Frame components of `T′`.
    pub fn t_prime_frame(&self, p: Point) -> Result<FrameVec> {
        let f = self.f.eval(p)?;
        let x = xf_field(&self.chart, &self.f, p)?;
        Ok([f, x[0], x[1]])
    }

    /// Coordinate components of `η′`.
    pub fn eta_prime(&self, p: Point) -> Result<[f64; 3]> {
        let frame = self.chart.frame(p)?;
        let f = self.f.eval(p)?;
        Ok(std::array::from_fn(|c| frame.eta()[c].value() / f))
    }

    /// `g′(X, Y)` for `X, Y ∈ Q` in `(E1, E2)` components.
    pub fn metric_q(&self, x: [f64; 2], y: [f64; 2], p: Point) -> Result<f64> {
        Ok((x[0] * y[0] + x[1] * y[1]) / self.f.eval(p)?)
    }

    pub fn defects(&self, p: Point) -> Result<Type1Defects> {
        let (frame, fj, t) = self.jets(p)?;
        let eta: Vec<Jet> = frame
            .eta()
            .iter()
            .map(|e| e.div(&fj))
            .collect::<Result<_, _>>()?;
        let pairing = t
            .iter()
            .zip(&eta)
            .fold(t[0].scale(0.0), |acc, (a, b)| acc + a * b);
        let mut deta: f64 = 0.0;
        let mut lie: f64 = 0.0;
        for b in 0..3 {
            let mut contraction = 0.0;
            for a in 0..3 {
                let d = eta[b].partial(a)?.value() - eta[a].partial(b)?.value();
                contraction += t[a].value() * d;
            }
            deta = deta.max(contraction.abs());
            lie = lie.max((pairing.partial(b)?.value() + contraction).abs());
        }
        Ok(Type1Defects {
            eta: (pairing.value() - 1.0).abs(),
            deta,
            lie,
        })
    }
}

/// Builds the type-1 deformation after checking `f > 0` on the sample grid.
pub fn reeb_deform_type1(c: &SasakiChart, f: &ScalarField) -> Result<Type1Deformation> {
    basic(f)?;
    for p in sample_points(c) {
        let v = f.eval(p)?;
        if !(v > 0.0) {
            return Err(Error::NonPositive { point: p, value: v });
        }
    }
    Ok(Type1Deformation {
        chart: c.clone(),
        f: f.clone(),
    })
}

/// Tanaka–Webster Hessian of `f` on `Q` and its best multiple of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianFit {
    /// `Hess(Eₐ, E_b)`, `a, b ∈ {1, 2}`.
    pub hessian: [[f64; 2]; 2],
    pub lambda: f64,
    /// `max |Hess − λh|`.
    pub residual: f64,
    /// `max(|H₁₁ − H₂₂|, |H₁₂ + H₂₁|)`.
    pub defect: f64,
}

pub fn hessian_fit(c: &SasakiChart, f: &ScalarField, p: Point) -> Result<HessianFit> {
    basic(f)?;
    let tw = LocalConnection::new(c, ConnectionKind::TanakaWebster, p)?;
    let fj = f.eval_jets(&Jet::seeds(p))?;
    let h = tw.hessian(&fj)?;
    let hq = [
        [h[1][1].value(), h[1][2].value()],
        [h[2][1].value(), h[2][2].value()],
    ];
    let lambda = 0.5 * (hq[0][0] + hq[1][1]);
    let residual = [hq[0][0] - lambda, hq[1][1] - lambda, hq[0][1], hq[1][0]]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max);
    let defect = (hq[0][0] - hq[1][1]).abs().max((hq[0][1] + hq[1][0]).abs());
    Ok(HessianFit {
        hessian: hq,
        lambda,
        residual,
        defect,
    })
}

/// Vanishes exactly when `Hess^Q f` is a multiple of `h`.
pub fn cr_reeb_defect(c: &SasakiChart, f: &ScalarField, p: Point) -> Result<f64> {
    Ok(hessian_fit(c, f, p)?.defect)
}

/// Largest `cr_reeb_defect` over an `n × n` grid and where it occurs.
pub fn cr_reeb_sweep(c: &SasakiChart, f: &ScalarField, n: usize) -> Result<(f64, Point)> {
    let points: Vec<Point> = c
        .base
        .domain
        .grid(n)
        .into_iter()
        .map(|[x, y]| [x, y, 0.0])
        .collect();
    let values = sweep::try_map(&points, |&p| cr_reeb_defect(c, f, p))?;
    let mut best = (0.0, points.first().copied().unwrap_or([0.0; 3]));
    for (p, v) in points.into_iter().zip(values) {
        if v > best.0 {
            best = (v, p);
        }
    }
    Ok(best)
}

/// The chart for `T′ = cT`: `u − ½ln c`, `A/c`, fibre length `L/c`.
pub fn deform_type0(c: &SasakiChart, factor: f64) -> Result<SasakiChart> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::NonPositive {
            point: [0.0; 3],
            value: factor,
        });
    }
    let u = LinearCombination {
        constant: -0.5 * factor.ln(),
        terms: vec![(1.0, c.base.conformal_factor().clone(), None)],
    };
    let scale = |f: &FieldRef| -> FieldRef {
        Arc::new(LinearCombination {
            constant: 0.0,
            terms: vec![(1.0 / factor, f.clone(), None)],
        })
    };
    let base = SurfaceChart::new(format!("{}*type0", c.name()), Arc::new(u), c.base.domain)?;
    let conn = ConnectionForm::new(scale(&c.conn.ax), scale(&c.conn.ay))?;
    SasakiChart::new(base, conn, c.fiber_len / factor)
}

/// `u′ = ½ln(e^{2u} − ½Δσ)`, so that `e^{2u′}` matches `½dη′`.
#[derive(Debug)]
struct ShiftedFactor {
    u: FieldRef,
    sigma: ScalarField,
}

impl JetField for ShiftedFactor {
    fn jet_at(&self, p: Point) -> Result<Jet, FieldError> {
        let u = self.u.jet_at(p)?;
        let s = self.sigma.eval_jets(&Jet::seeds(p))?;
        let lap = s.partial(0)?.partial(0)? + s.partial(1)?.partial(1)?;
        Ok((u.scale(2.0).exp() - lap.scale(0.5)).ln()?.scale(0.5))
    }

    fn is_basic(&self) -> bool {
        self.u.is_basic() && self.sigma.basic()
    }

    fn describe(&self) -> String {
        format!("u'[{}; {}]", self.u.describe(), self.sigma.source())
    }
}

/// Result of `η′ = η + dσ∘J₀` with `J′` the lift of `J` along `T`.
#[derive(Debug, Clone)]
pub struct Type2Deformation {
    pub original: SasakiChart,
    pub sigma: ScalarField,
    /// The deformed structure as a Kaluza–Klein chart with the same `T`.
    pub chart: SasakiChart,
    /// Smallest `η′∧dη′` coefficient over the sample grid.
    pub min_contact: f64,
    /// Largest Reeb defect of `T` for `η′` over the sample grid.
    pub reeb_defect: f64,
}

impl Type2Deformation {
    /// Coordinate components of `η′`.
    pub fn eta_prime(&self, p: Point) -> Result<[f64; 3]> {
        let frame = self.chart.frame(p)?;
        Ok(std::array::from_fn(|c| frame.eta()[c].value()))
    }

    /// Orthonormal frame of `Q′ = ker η′` from the projections of `E1, E2`
    /// along `T`, Gram–Schmidt in `g′`; coordinate components.
    pub fn q_frame(&self, p: Point) -> Result<[[f64; 3]; 2]> {
        let old = self.original.frame(p)?;
        let eta = self.eta_prime(p)?;
        let project = |a: usize| -> [f64; 3] {
            let v: [f64; 3] = std::array::from_fn(|c| old.vectors[a][c].value());
            let e: f64 = (0..3).map(|c| eta[c] * v[c]).sum();
            [v[0], v[1], v[2] - e]
        };
        let g = |v: [f64; 3], w: [f64; 3]| self.chart.metric_eval(v, w, p);
        let v1 = project(1);
        let v2 = project(2);
        let n1 = g(v1, v1)?.sqrt();
        let e1 = v1.map(|z| z / n1);
        let d = g(v2, e1)?;
        let w2: [f64; 3] = std::array::from_fn(|c| v2[c] - d * e1[c]);
        let n2 = g(w2, w2)?.sqrt();
        Ok([e1, w2.map(|z| z / n2)])
    }
}

pub fn deform_type2(c: &SasakiChart, sigma: &ScalarField) -> Result<Type2Deformation> {
    basic(sigma)?;
    let s: FieldRef = Arc::new(sigma.clone());
    // dσ∘J₀ = σ_y dx − σ_x dy
    let ax = LinearCombination {
        constant: 0.0,
        terms: vec![(1.0, c.conn.ax.clone(), None), (1.0, s.clone(), Some(1))],
    };
    let ay = LinearCombination {
        constant: 0.0,
        terms: vec![(1.0, c.conn.ay.clone(), None), (-1.0, s.clone(), Some(0))],
    };
    let conn = ConnectionForm::new(Arc::new(ax), Arc::new(ay))?;

    let points = sample_points(c);
    let contact = sweep::try_map(&points, |&p| -> Result<f64> {
        Ok(conn.curvature_jet(p)?.value())
    })?;
    let (mut worst, mut min_contact) = (points[0], f64::INFINITY);
    for (p, v) in points.iter().zip(&contact) {
        if *v < min_contact {
            min_contact = *v;
            worst = *p;
        }
    }
    if !(min_contact > 0.0) {
        return Err(Error::ContactDegenerate {
            point: worst,
            value: min_contact,
        });
    }

    let u = ShiftedFactor {
        u: c.base.conformal_factor().clone(),
        sigma: sigma.clone(),
    };
    let base = SurfaceChart::new(format!("{}*type2", c.name()), Arc::new(u), c.base.domain)?;
    let chart = SasakiChart::new(base, conn, c.fiber_len)?;

    let t = VectorField::Coordinates([
        ScalarField::constant(0.0),
        ScalarField::constant(0.0),
        ScalarField::constant(1.0),
    ]);
    let defects = sweep::try_map(&points, |&p| chart.reeb_check(&t, p))?;
    let reeb_defect = defects
        .iter()
        .map(|d: &ReebDefects| d.eta.max(d.deta))
        .fold(0.0, f64::max);
    Ok(Type2Deformation {
        original: c.clone(),
        sigma: sigma.clone(),
        chart,
        min_contact,
        reeb_defect,
    })
}

/// `∫₀^L f(x, y, t) dt`.
pub fn fiber_integral(c: &SasakiChart, f: &dyn JetField, x: [f64; 2]) -> Result<f64> {
    if f.is_basic() {
        return Ok(c.fiber_len * f.value_at([x[0], x[1], 0.0])?);
    }
    let rule = GaussLegendre::new(64);
    let mut acc = 0.0;
    for (t, w) in rule.on_interval(0.0, c.fiber_len) {
        acc += w * f.value_at([x[0], x[1], t])?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderReport {
    /// `∫λ`.
    pub v: f64,
    /// `∫f^{−2}λ` after normalising `∫fλ = v`.
    pub v_prime: f64,
    /// Mean of `f` against `λ`; `f` was divided by it.
    pub normalization: f64,
    /// `v′ − v`.
    pub margin: f64,
    pub holds: bool,
    pub equality: bool,
}

pub const HOLDER_TOL: f64 = 1e-9;

/// Checks `(∫f^{−2}λ)(∫fλ)² ≥ (∫λ)³` on the compact chart cell with a 64²
/// Gauss–Legendre rule.
pub fn holder_volume_check(c: &SasakiChart, f: &dyn JetField) -> Result<HolderReport> {
    if !c.base.domain.is_compact_cell() {
        return Err(Error::NonCompactCell(c.name().to_string()));
    }
    if !f.is_basic() {
        return Err(Error::NotBasic(f.describe()));
    }
    let rule = GaussLegendre::new(64);
    let mut v = 0.0;
    let mut first = 0.0;
    let mut samples = Vec::with_capacity(64 * 64);
    for ([x, y], w) in rule.unit_square() {
        let p = [x, y, 0.0];
        let fv = f.value_at(p)?;
        if !(fv > 0.0) {
            return Err(Error::NonPositive {
                point: p,
                value: fv,
            });
        }
        let lambda = w * c.base.area_density(p)? * c.fiber_len;
        v += lambda;
        first += fv * lambda;
        samples.push((fv, lambda));
    }
    let normalization = first / v;
    let v_prime: f64 = samples
        .iter()
        .map(|(fv, l)| (normalization / fv).powi(2) * l)
        .sum();
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (fv, _)| {
            (lo.min(*fv), hi.max(*fv))
        });
    let constant = hi - lo <= 1e-12 * hi.abs().max(1.0);
    // with ∫fλ = v the inequality reads v′ ≥ v
    let margin = v_prime - v;
    Ok(HolderReport {
        v,
        v_prime,
        normalization,
        margin,
        holds: margin >= -HOLDER_TOL * v.max(1.0),
        equality: margin.abs() < HOLDER_TOL && constant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HopfVerdict {
    pub closed_orbits: bool,
    pub order: Option<u64>,
    /// Set when a phase was not recognised as rational with denominator
    /// at most [`PHASE_DENOMINATOR_BOUND`].
    pub bound_exceeded: bool,
}

pub const PHASE_DENOMINATOR_BOUND: u64 = 1_000_000;
const PHASE_TOL: f64 = 1e-13;

/// Smallest `q ≤ bound` with `x ≈ p/q`, by continued fractions.
pub fn rational_phase(x: f64, bound: u64) -> Option<u64> {
    let x = x.rem_euclid(1.0);
    if x < PHASE_TOL || 1.0 - x < PHASE_TOL {
        return Some(1);
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > bound as f64 {
            return None;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > bound {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() < PHASE_TOL {
            return Some(k1);
        }
        let frac = r - a as f64;
        if frac <= 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Orbit closure of the Reeb flow on the Hopf surface with multipliers
/// `α, β`: closed iff both phases are roots of unity of a common order.
/// The pair is unordered; swapping the coordinates swaps the multipliers.
pub fn hopf_reeb(alpha: Complex64, beta: Complex64) -> Result<HopfVerdict> {
    let (alpha, beta) = if alpha.norm() <= beta.norm() {
        (alpha, beta)
    } else {
        (beta, alpha)
    };
    let (a, b) = (alpha.norm(), beta.norm());
    if !(0.0 < a && b < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < |alpha|, |beta| < 1, got {a} and {b}"
        )));
    }
    let turn = |z: Complex64| z.arg() / (2.0 * std::f64::consts::PI);
    let q1 = rational_phase(turn(alpha), PHASE_DENOMINATOR_BOUND);
    let q2 = rational_phase(turn(beta), PHASE_DENOMINATOR_BOUND);
    Ok(match (q1, q2) {
        (Some(p), Some(q)) => HopfVerdict {
            closed_orbits: true,
            order: Some(p / gcd(p, q) * q),
            bound_exceeded: false,
        },
        _ => HopfVerdict {
            closed_orbits: false,
            order: None,
            bound_exceeded: true,
        },
    })
}
