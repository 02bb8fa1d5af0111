//! Levi-Civita and Tanaka–Webster connections in the adapted frame.
//!
//! Coefficients are `gamma[i][j][k] = Γᵏᵢⱼ = g(∇_{Eᵢ}Eⱼ, Eₖ)` over
//! `(E0, E1, E2) = (T, E1, E2)`, kept as jets so curvature can
//! differentiate them once more.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jet::{Jet, Point};
use crate::sasaki::{j0, FrameVec, JetVec, LocalFrame, SasakiChart};

/// `Γᵏᵢⱼ` as jets, indexed `[i][j][k]`.
pub type Gamma = [[[Jet; 3]; 3]; 3];

/// Frame components of `[Eₐ, E_b]`, indexed `[a][b][k]`.
pub type Structure = [[JetVec; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    LeviCivita,
    TanakaWebster,
}

/// Frame components of `[Eᵢ, Eⱼ](p)`.
pub fn structure_functions(c: &SasakiChart, i: usize, j: usize, p: Point) -> Result<FrameVec> {
    let frame = c.frame(p)?;
    let br = LocalFrame::bracket(&frame.vectors[i], &frame.vectors[j])?;
    let v = frame.to_frame(&br);
    Ok([v[0].value(), v[1].value(), v[2].value()])
}

/// A connection on a chart, evaluated on demand.
#[derive(Debug, Clone)]
pub struct FrameConnection {
    pub chart: SasakiChart,
    pub kind: ConnectionKind,
}

impl FrameConnection {
    pub fn levi_civita(c: &SasakiChart) -> Self {
        Self {
            chart: c.clone(),
            kind: ConnectionKind::LeviCivita,
        }
    }

    pub fn tanaka_webster(c: &SasakiChart) -> Self {
        Self {
            chart: c.clone(),
            kind: ConnectionKind::TanakaWebster,
        }
    }

    pub fn new(c: &SasakiChart, kind: ConnectionKind) -> Self {
        Self {
            chart: c.clone(),
            kind,
        }
    }

    pub fn at(&self, p: Point) -> Result<LocalConnection> {
        LocalConnection::new(&self.chart, self.kind, p)
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize, p: Point) -> Result<f64> {
        Ok(self.at(p)?.gamma[i][j][k].value())
    }
}

/// Everything a connection knows at one point.
#[derive(Debug, Clone)]
pub struct LocalConnection {
    pub kind: ConnectionKind,
    pub frame: LocalFrame,
    pub structure: Structure,
    pub gamma: Gamma,
}

fn koszul(c: &Structure) -> Gamma {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| (&c[i][j][k] - &c[j][k][i] + &c[k][i][j]).scale(0.5))
        })
    })
}

impl LocalConnection {
    pub fn new(chart: &SasakiChart, kind: ConnectionKind, p: Point) -> Result<Self> {
        chart.base.check(p)?;
        let frame = chart.frame(p)?;
        let structure = chart.structure_jets(&frame)?;
        let mut gamma = koszul(&structure);
        if kind == ConnectionKind::TanakaWebster {
            // ∇_X T = ∇⁰_X T − JX
            gamma[1][0][2] = gamma[1][0][2].add_const(-1.0);
            gamma[2][0][1] = gamma[2][0][1].add_const(1.0);
            // ∇_T X = ∇⁰_T X − JX
            gamma[0][1][2] = gamma[0][1][2].add_const(-1.0);
            gamma[0][2][1] = gamma[0][2][1].add_const(1.0);
            // ∇_X Y = ∇⁰_X Y + g(JX, Y) T
            gamma[1][2][0] = gamma[1][2][0].add_const(1.0);
            gamma[2][1][0] = gamma[2][1][0].add_const(-1.0);
        }
        Ok(Self {
            kind,
            frame,
            structure,
            gamma,
        })
    }

    pub fn point(&self) -> Point {
        self.frame.point
    }

    /// `[X, Y]` for constant frame components.
    pub fn bracket(&self, x: FrameVec, y: FrameVec) -> FrameVec {
        contract(|i, j, k| self.structure[i][j][k].value(), x, y)
    }

    /// `∇_X Y` for constant frame components.
    pub fn covariant(&self, x: FrameVec, y: FrameVec) -> FrameVec {
        contract(|i, j, k| self.gamma[i][j][k].value(), x, y)
    }

    /// `τ(X, Y) = ∇_X Y − ∇_Y X − [X, Y]`.
    pub fn torsion(&self, x: FrameVec, y: FrameVec) -> FrameVec {
        let a = self.covariant(x, y);
        let b = self.covariant(y, x);
        let c = self.bracket(x, y);
        std::array::from_fn(|k| a[k] - b[k] - c[k])
    }

    /// `Eₐ . f`.
    pub fn along(&self, a: usize, f: &Jet) -> Result<Jet> {
        self.frame.along(a, f)
    }

    /// `Hess(Eₐ, E_b) f = Eₐ.E_b.f − (∇_{Eₐ}E_b).f` as jets.
    pub fn hessian(&self, f: &Jet) -> Result<[[Jet; 3]; 3]> {
        let d1: Vec<Jet> = (0..3).map(|a| self.along(a, f)).collect::<Result<_>>()?;
        let mut rows: Vec<[Jet; 3]> = Vec::with_capacity(3);
        for a in 0..3 {
            let mut row: Vec<Jet> = Vec::with_capacity(3);
            for b in 0..3 {
                let mut h = self.along(a, &d1[b])?;
                for (k, dk) in d1.iter().enumerate() {
                    h = h - &self.gamma[a][b][k] * dk;
                }
                row.push(h);
            }
            rows.push([row[0].clone(), row[1].clone(), row[2].clone()]);
        }
        Ok([rows[0].clone(), rows[1].clone(), rows[2].clone()])
    }

    /// `□_X f = X.JX.f + JX.X.f − ∇_X JX.f − ∇_{JX}X.f` for `X = aE1 + bE2`.
    pub fn box_operator(&self, f: &Jet, x: [f64; 2]) -> Result<f64> {
        let h = self.hessian(f)?;
        Ok(box_from_hessian(&h, x))
    }

    /// `R(Eᵢ, Eⱼ)Eₗ` as jets.
    pub fn curvature_jets(&self, i: usize, j: usize, l: usize) -> Result<JetVec> {
        let g = &self.gamma;
        let nabla = |a: usize, z: &JetVec| -> Result<JetVec> {
            let mut out: Vec<Jet> = Vec::with_capacity(3);
            for k in 0..3 {
                let mut v = self.along(a, &z[k])?;
                for (m, zm) in z.iter().enumerate() {
                    v = v + zm * &g[a][m][k];
                }
                out.push(v);
            }
            Ok([out[0].clone(), out[1].clone(), out[2].clone()])
        };
        let first = nabla(i, &g[j][l])?;
        let second = nabla(j, &g[i][l])?;
        let mut out: Vec<Jet> = Vec::with_capacity(3);
        for k in 0..3 {
            let mut v = &first[k] - &second[k];
            for m in 0..3 {
                v = v - &self.structure[i][j][m] * &g[m][l][k];
            }
            out.push(v);
        }
        Ok([out[0].clone(), out[1].clone(), out[2].clone()])
    }

    /// `R(X, Y)Z` for constant frame components.
    pub fn curvature(&self, x: FrameVec, y: FrameVec, z: FrameVec) -> Result<FrameVec> {
        let mut out = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i == j || x[i] * y[j] == 0.0 {
                    continue;
                }
                for l in 0..3 {
                    if z[l] == 0.0 {
                        continue;
                    }
                    let r = self.curvature_jets(i, j, l)?;
                    for k in 0..3 {
                        out[k] += x[i] * y[j] * z[l] * r[k].value();
                    }
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn box_from_hessian(h: &[[Jet; 3]; 3], x: [f64; 2]) -> f64 {
    let xv = [0.0, x[0], x[1]];
    let jx = j0(xv);
    let mut s = 0.0;
    for a in 1..3 {
        for b in 1..3 {
            let w = xv[a] * jx[b] + jx[a] * xv[b];
            if w != 0.0 {
                s += w * h[a][b].value();
            }
        }
    }
    s
}

fn contract(coef: impl Fn(usize, usize, usize) -> f64, x: FrameVec, y: FrameVec) -> FrameVec {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            let w = x[i] * y[j];
            if w == 0.0 {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                *o += w * coef(i, j, k);
            }
        }
    }
    out
}

/// Separate defects for the Tanaka–Webster axioms at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TwDefects {
    /// `max |∇T|`.
    pub nabla_t: f64,
    /// `max |(∇J)|` on `Q`.
    pub nabla_j: f64,
    /// `max |η(∇_{Eᵢ}Y)|` for `Y ∈ Q`.
    pub preserves_q: f64,
    /// `|τ(E1, E2) − dη(E1, E2)T|`.
    pub torsion_q: f64,
    /// `max |τ(T, ·)|` on `Q`.
    pub tau_tilde: f64,
    /// `|τ̃(JE1) + Jτ̃(E1)|`.
    pub tau_anti: f64,
    /// Difference between `Q`-components of `∇_{Eₐ}E_b` and the lifted base
    /// connection.
    pub horizontal_lift: f64,
}

impl TwDefects {
    pub fn max(&self) -> f64 {
        [
            self.nabla_t,
            self.nabla_j,
            self.preserves_q,
            self.torsion_q,
            self.tau_tilde,
            self.tau_anti,
            self.horizontal_lift,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

const BASIS: [FrameVec; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn tw_axiom_suite(c: &SasakiChart, p: Point) -> Result<TwDefects> {
    let tw = LocalConnection::new(c, ConnectionKind::TanakaWebster, p)?;
    let g = |i: usize, j: usize, k: usize| tw.gamma[i][j][k].value();

    let nabla_t = sup((0..3)
        .flat_map(|i| (0..3).map(move |k| (i, k)))
        .map(|(i, k)| g(i, 0, k)));

    let mut nabla_j: f64 = 0.0;
    for i in 0..3 {
        for y in [BASIS[1], BASIS[2]] {
            let lhs = tw.covariant(BASIS[i], j0(y));
            let rhs = j0(tw.covariant(BASIS[i], y));
            nabla_j = nabla_j.max(sup((0..3).map(|k| lhs[k] - rhs[k])));
        }
    }

    let preserves_q = sup((0..3).flat_map(|i| [g(i, 1, 0), g(i, 2, 0)]));

    let deta12 = c.deta(BASIS[1], BASIS[2], p)?;
    let tq = tw.torsion(BASIS[1], BASIS[2]);
    let torsion_q = sup([tq[0] - deta12, tq[1], tq[2]]);

    let tt1 = tw.torsion(BASIS[0], BASIS[1]);
    let tt2 = tw.torsion(BASIS[0], BASIS[2]);
    let tau_tilde = sup(tt1.into_iter().chain(tt2));
    // τ̃(JE1) = τ̃(E2)
    let jt1 = j0(tt1);
    let tau_anti = sup((0..3).map(|k| tt2[k] + jt1[k]));

    let horizontal_lift = lift_defect(c, &tw)?;

    Ok(TwDefects {
        nabla_t,
        nabla_j,
        preserves_q,
        torsion_q,
        tau_tilde,
        tau_anti,
        horizontal_lift,
    })
}

/// Compares `Q`-components of `∇_{Eₐ}E_b` with `∇^Σ_{eₐ}e_b` for the
/// orthonormal base frame `eₐ = e^{−u}∂ₐ`.
fn lift_defect(c: &SasakiChart, tw: &LocalConnection) -> Result<f64> {
    let p = tw.point();
    let ch = c.base.christoffel(p)?;
    let u = &tw.frame.u;
    let em = (-u.value()).exp();
    let du = [u.partial(0)?.value(), u.partial(1)?.value()];
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..2 {
                // coordinate components of ∇^Σ_{eₐ}e_b, then rescaled to the frame
                let mut coord = em * em * ch[k][a][b].value();
                if k == b {
                    coord -= em * em * du[a];
                }
                let lifted = coord / em;
                worst = worst.max((lifted - tw.gamma[a + 1][b + 1][k + 1].value()).abs());
            }
        }
    }
    Ok(worst)
}
