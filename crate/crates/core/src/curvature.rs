//! Curvature of the frame connections, the `□_X` operator and the Tanaka
//! curvature `Φ(X,X)(T) = −½□_X k` of a Sasakian chart.

use std::f64::consts::PI;

use serde::Serialize;

use crate::connection::{ConnectionKind, FrameConnection, LocalConnection};
use crate::error::{Error, Result};
use crate::field::{FieldError, JetField};
use crate::jet::{Jet, Point};
use crate::sasaki::{FrameVec, SasakiChart};
use crate::sweep;

/// Largest reduction defect for which `Φ` is computed through `k`.
pub const REDUCTION_TOL: f64 = 1e-8;

/// `max |Φ|` below which a chart counts as CR flat.
pub const FLAT_TOL: f64 = 1e-7;

/// Unit `Q` directions `(cos θ, sin θ)`, `θ = πm/n`.
pub fn directions(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|m| {
            let a = PI * m as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

/// `R(X, Y)Z` in frame components.
pub fn curvature_tensor(
    conn: &FrameConnection,
    x: FrameVec,
    y: FrameVec,
    z: FrameVec,
    p: Point,
) -> Result<FrameVec> {
    conn.at(p)?.curvature(x, y, z)
}

/// `k = h(R(E1, E2)E1, E2)` as a jet, two orders below the input jets.
pub fn k_jet(tw: &LocalConnection) -> Result<Jet> {
    debug_assert_eq!(tw.kind, ConnectionKind::TanakaWebster);
    Ok(tw.curvature_jets(1, 2, 1)?[2].clone())
}

pub fn tanaka_k(c: &SasakiChart, p: Point) -> Result<f64> {
    let tw = LocalConnection::new(c, ConnectionKind::TanakaWebster, p)?;
    Ok(k_jet(&tw)?.value())
}

/// `g(R⁰(E1, E2)E2, E1)`.
pub fn sectional_q(c: &SasakiChart, p: Point) -> Result<f64> {
    let lc = LocalConnection::new(c, ConnectionKind::LeviCivita, p)?;
    Ok(lc.curvature_jets(1, 2, 2)?[1].value())
}

/// `k` as a field on the chart; jets come back with order 2.
#[derive(Debug, Clone)]
pub struct TanakaKField {
    pub chart: SasakiChart,
}

impl JetField for TanakaKField {
    fn jet_at(&self, p: Point) -> Result<Jet, FieldError> {
        let tw = LocalConnection::new(&self.chart, ConnectionKind::TanakaWebster, p)
            .map_err(|e| FieldError::Other(e.to_string()))?;
        k_jet(&tw).map_err(|e| FieldError::Other(e.to_string()))
    }

    fn is_basic(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("k[{}]", self.chart.name())
    }
}

/// `□_X f` with the chosen connection, `X = x₀E1 + x₁E2`.
pub fn box_m(
    c: &SasakiChart,
    kind: ConnectionKind,
    f: &dyn JetField,
    x: [f64; 2],
    p: Point,
) -> Result<f64> {
    let conn = LocalConnection::new(c, kind, p)?;
    let fj = f.jet_at(p)?;
    conn.box_operator(&fj, x)
}

/// `max(|τ̃|, |dη(E1, E2) − 2|)`: the difference formulas only give the
/// Tanaka–Webster connection under the Sasakian normalisation.
fn reduction_defect(tw: &LocalConnection) -> f64 {
    let t = [1.0, 0.0, 0.0];
    let a = tw.torsion(t, [0.0, 1.0, 0.0]);
    let b = tw.torsion(t, [0.0, 0.0, 1.0]);
    let normalisation = tw.structure[1][2][0].value() + 2.0;
    a.into_iter()
        .chain(b)
        .chain([normalisation])
        .map(f64::abs)
        .fold(0.0, f64::max)
}

fn reduction(c: &SasakiChart, p: Point) -> Result<(LocalConnection, Jet)> {
    let tw = LocalConnection::new(c, ConnectionKind::TanakaWebster, p)?;
    let defect = reduction_defect(&tw);
    if !(defect <= REDUCTION_TOL) {
        return Err(Error::ReductionInvalid { point: p, defect });
    }
    let k = k_jet(&tw)?;
    Ok((tw, k))
}

/// `Φ(X, X)(T) = −½□_X k`.
pub fn tanaka_phi(c: &SasakiChart, x: [f64; 2], p: Point) -> Result<f64> {
    let (tw, k) = reduction(c, p)?;
    Ok(-0.5 * tw.box_operator(&k, x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatnessVerdict {
    pub flat: bool,
    pub max_phi: f64,
    pub location: Point,
    pub direction: [f64; 2],
    pub points: usize,
}

/// Largest `|Φ(X,X)(T)|` over 8 unit directions at one point, with the
/// maximising direction.
pub fn phi_sweep(c: &SasakiChart, p: Point) -> Result<(f64, [f64; 2])> {
    let (tw, k) = reduction(c, p)?;
    let h = tw.hessian(&k)?;
    let mut best = (0.0, [1.0, 0.0]);
    for x in directions(8) {
        let phi = -0.5 * crate::connection::box_from_hessian(&h, x);
        if phi.abs() > best.0 {
            best = (phi.abs(), x);
        }
    }
    Ok(best)
}

/// Sweeps an `n × n` grid of base points at `t = 0`.
pub fn flatness_test(c: &SasakiChart, n: usize) -> Result<FlatnessVerdict> {
    let points: Vec<Point> = c
        .base
        .domain
        .grid(n)
        .into_iter()
        .map(|[x, y]| [x, y, 0.0])
        .collect();
    let sweeps = sweep::try_map(&points, |&p| phi_sweep(c, p))?;
    let mut verdict = FlatnessVerdict {
        flat: true,
        max_phi: 0.0,
        location: points.first().copied().unwrap_or([0.0; 3]),
        direction: [1.0, 0.0],
        points: points.len(),
    };
    for (p, (phi, x)) in points.iter().zip(sweeps) {
        if phi > verdict.max_phi {
            verdict.max_phi = phi;
            verdict.location = *p;
            verdict.direction = x;
        }
    }
    verdict.flat = verdict.max_phi < FLAT_TOL;
    Ok(verdict)
}

/// Curvature quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureReport {
    #[serde(rename = "K_base")]
    pub k_base: f64,
    pub k_tanaka: f64,
    #[serde(rename = "sec_Q")]
    pub sec_q: f64,
    #[serde(rename = "phi_T_component")]
    pub phi_t_component: f64,
    pub box_k_max: f64,
    pub point: Point,
}

impl CurvatureReport {
    pub fn at(c: &SasakiChart, p: Point) -> Result<Self> {
        let (tw, k) = reduction(c, p)?;
        let h = tw.hessian(&k)?;
        let box_k_max = directions(8)
            .into_iter()
            .map(|x| crate::connection::box_from_hessian(&h, x).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            k_base: c.base.gauss_curvature(p)?,
            k_tanaka: k.value(),
            sec_q: sectional_q(c, p)?,
            phi_t_component: -0.5 * crate::connection::box_from_hessian(&h, [1.0, 0.0]),
            box_k_max,
            point: p,
        })
    }

    /// `max |Φ(X,X)(T)|` over the swept unit directions.
    pub fn phi_max(&self) -> f64 {
        0.5 * self.box_k_max
    }
}
