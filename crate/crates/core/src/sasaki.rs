//! Kaluza–Klein Sasakian charts over conformal surface charts.
//!
//! A chart carries the base surface, a connection form `A = Ax dx + Ay dy`
//! and the fibre length. The contact form is `η = dt + A`, the adapted
//! frame is
//!
//! ```text
//! E0 = T = ∂t,   E1 = e^{−u}(∂x − Ax ∂t),   E2 = e^{−u}(∂y − Ay ∂t),
//! ```
//!
//! with `J E1 = E2`. Exterior derivatives follow
//! `dα(X,Y) = X.α(Y) − Y.α(X) − α([X,Y])`, so the Sasakian normalisation
//! reads `∂x Ay − ∂y Ax = 2 e^{2u}` and `dη(E1, E2) = 2`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{parse_one_form, FieldError, FieldRef, JetField, ScalarField};
use crate::jet::{dot, Jet, Point};
use crate::quadrature::GaussLegendre;
use crate::surface::{Domain, SurfaceChart};

/// Frame components `(T, E1, E2)` of a vector.
pub type FrameVec = [f64; 3];

/// Jet-valued components of a vector field, either in the frame or in the
/// coordinate basis `(∂x, ∂y, ∂t)` depending on context.
pub type JetVec = [Jet; 3];

/// `J₀` on frame components: `J₀T = 0`, `J₀E1 = E2`, `J₀E2 = −E1`.
pub fn j0(v: FrameVec) -> FrameVec {
    [0.0, -v[2], v[1]]
}

/// `A = Ax dx + Ay dy` on the base.
#[derive(Debug, Clone)]
pub struct ConnectionForm {
    pub ax: FieldRef,
    pub ay: FieldRef,
}

impl ConnectionForm {
    pub fn new(ax: FieldRef, ay: FieldRef) -> Result<Self> {
        for f in [&ax, &ay] {
            if !f.is_basic() {
                return Err(Error::NotBasic(f.describe()));
            }
        }
        Ok(Self { ax, ay })
    }

    pub fn from_exprs(ax: &str, ay: &str) -> Result<Self> {
        Self::new(
            Arc::new(ScalarField::parse(ax)?),
            Arc::new(ScalarField::parse(ay)?),
        )
    }

    /// Parses `P*dx + Q*dy` syntax, e.g. `x*dy - y*dx`.
    pub fn from_one_form(src: &str) -> Result<Self> {
        let (p, q) = parse_one_form(src)?;
        Self::new(Arc::new(p), Arc::new(q))
    }

    /// The gauge `Ax = 0`, `Ay(x, y) = ∫₀ˣ 2e^{2u(s,y)} ds`, integrated by
    /// Gauss–Legendre quadrature; matches any conformal factor given as an
    /// expression.
    pub fn line_potential(u: &ScalarField) -> Result<Self> {
        if !u.basic() {
            return Err(Error::NotBasic(u.source().to_string()));
        }
        Ok(Self {
            ax: Arc::new(ScalarField::constant(0.0)),
            ay: Arc::new(LinePotential {
                u: u.clone(),
                rule: GaussLegendre::new(64),
            }),
        })
    }

    /// `F = ∂x Ay − ∂y Ax` as a jet.
    pub fn curvature_jet(&self, p: Point) -> Result<Jet> {
        let ax = self.ax.jet_at(p)?;
        let ay = self.ay.jet_at(p)?;
        Ok(ay.partial(0)? - ax.partial(1)?)
    }
}

/// `∫₀ˣ 2e^{2u(s,y)} ds` with its full jet.
#[derive(Debug)]
pub struct LinePotential {
    u: ScalarField,
    rule: GaussLegendre,
}

impl LinePotential {
    fn integrand(&self, seeds: &[Jet; 3]) -> Result<Jet, FieldError> {
        Ok(self.u.eval_jets(seeds)?.scale(2.0).exp().scale(2.0))
    }
}

impl JetField for LinePotential {
    fn jet_at(&self, p: Point) -> Result<Jet, FieldError> {
        let [x, y, t] = Jet::seeds(p);
        // ∫₀^{x0} F(s, y0 + dy) ds by quadrature on jets in dy ...
        let mut acc = Jet::constant(p, 0.0);
        for (node, weight) in self.rule.on_interval(0.0, p[0]) {
            let seeds = [Jet::constant(p, node), y.clone(), t.clone()];
            acc = acc + self.integrand(&seeds)?.scale(weight);
        }
        // ... plus the exact local antiderivative in dx.
        let local = self.integrand(&[x, y, t])?.integrate(0);
        Ok(acc + local)
    }

    fn is_basic(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("x-integral of 2exp(2({}))", self.u.source())
    }
}

/// Jets of everything the frame needs at one point.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    pub point: Point,
    pub u: Jet,
    pub ax: Jet,
    pub ay: Jet,
    /// `vectors[a][c]`: coordinate component `c` of `E_a`.
    pub vectors: [JetVec; 3],
    /// `coframe[a][c] = θᵃ(∂_c)`, dual to `vectors`.
    pub coframe: [JetVec; 3],
}

impl LocalFrame {
    /// `V.f` for a vector field with coordinate components `v`.
    pub fn directional(v: &JetVec, f: &Jet) -> Result<Jet> {
        let mut acc: Option<Jet> = None;
        for (c, vc) in v.iter().enumerate() {
            if vc.coeffs().iter().all(|&z| z == 0.0) {
                continue;
            }
            let term = vc * &f.partial(c)?;
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        match acc {
            Some(a) => Ok(a),
            None => Ok(f.partial(0)?.scale(0.0)),
        }
    }

    /// `E_a . f`.
    pub fn along(&self, a: usize, f: &Jet) -> Result<Jet> {
        Self::directional(&self.vectors[a], f)
    }

    /// Coordinate components of `[V, W]`.
    pub fn bracket(v: &JetVec, w: &JetVec) -> Result<JetVec> {
        let comp = |c: usize| -> Result<Jet> {
            Ok(Self::directional(v, &w[c])? - Self::directional(w, &v[c])?)
        };
        Ok([comp(0)?, comp(1)?, comp(2)?])
    }

    /// Frame components of a coordinate-component vector field.
    pub fn to_frame(&self, v: &JetVec) -> JetVec {
        std::array::from_fn(|a| dot(&self.coframe[a], v))
    }

    /// Coordinate components of constant frame components.
    pub fn to_coords(&self, v: FrameVec) -> [f64; 3] {
        std::array::from_fn(|c| (0..3).map(|a| v[a] * self.vectors[a][c].value()).sum())
    }

    pub fn frame_field(&self, v: FrameVec) -> JetVec {
        std::array::from_fn(|c| {
            let mut acc = self.vectors[0][c].scale(v[0]);
            for a in 1..3 {
                acc = acc + self.vectors[a][c].scale(v[a]);
            }
            acc
        })
    }

    /// Coordinate components of `η`.
    pub fn eta(&self) -> &JetVec {
        &self.coframe[0]
    }

    /// `dη(∂_a, ∂_b) = ∂_a η_b − ∂_b η_a` at the point.
    pub fn deta_coords(&self) -> Result<[[f64; 3]; 3]> {
        let eta = self.eta();
        let mut out = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                out[a][b] = eta[b].partial(a)?.value() - eta[a].partial(b)?.value();
            }
        }
        Ok(out)
    }
}

fn bilinear(m: &[[f64; 3]; 3], v: &[f64; 3], w: &[f64; 3]) -> f64 {
    (0..3)
        .map(|a| (0..3).map(|b| m[a][b] * v[a] * w[b]).sum::<f64>())
        .sum()
}

/// Levi form and Hermitian form on a pair of `Q` vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeviForm {
    /// `η([X, Y])`.
    pub levi: f64,
    /// `h(X, Y) = −½ dη(JX, Y)`.
    pub hermitian: f64,
}

/// A vector field given by three expressions.
#[derive(Debug, Clone)]
pub enum VectorField {
    /// Components along `(T, E1, E2)`.
    Frame([ScalarField; 3]),
    /// Components along `(∂x, ∂y, ∂t)`.
    Coordinates([ScalarField; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReebDefects {
    /// `|η(V) − 1|`.
    pub eta: f64,
    /// `max_b |dη(V, E_b)|`.
    pub deta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Flat,
    Round,
    Hyperbolic,
    Custom,
}

/// Kaluza–Klein Sasakian chart.
#[derive(Debug, Clone)]
pub struct SasakiChart {
    pub base: SurfaceChart,
    pub conn: ConnectionForm,
    pub fiber_len: f64,
}

impl SasakiChart {
    pub fn new(base: SurfaceChart, conn: ConnectionForm, fiber_len: f64) -> Result<Self> {
        if !(fiber_len > 0.0 && fiber_len.is_finite()) {
            return Err(Error::InvalidParameter(format!("fiber length {fiber_len}")));
        }
        Ok(Self {
            base,
            conn,
            fiber_len,
        })
    }

    /// Heisenberg (Nil³) chart over the flat torus cell, `A = x dy − y dx`.
    pub fn flat() -> Self {
        Self::new(
            SurfaceChart::flat(),
            ConnectionForm::from_exprs("-y", "x").unwrap(),
            1.0,
        )
        .unwrap()
    }

    /// Hopf chart over the round sphere, `A = 4(x dy − y dx)/(1 + x² + y²)`.
    pub fn round() -> Self {
        Self::new(
            SurfaceChart::round(),
            ConnectionForm::from_exprs("-4*y/(1+x^2+y^2)", "4*x/(1+x^2+y^2)").unwrap(),
            1.0,
        )
        .unwrap()
    }

    /// Chart over the hyperbolic disk, `A = 4(x dy − y dx)/(1 − x² − y²)`.
    pub fn hyperbolic() -> Self {
        Self::new(
            SurfaceChart::hyperbolic(),
            ConnectionForm::from_exprs("-4*y/(1-x^2-y^2)", "4*x/(1-x^2-y^2)").unwrap(),
            1.0,
        )
        .unwrap()
    }

    /// Catalog lookup: `flat`, `round`, `hyperbolic`. `custom:<expr>` needs
    /// a connection, see [`SasakiChart::custom`].
    pub fn build_model(name: &str) -> Result<Self> {
        match name {
            "flat" => Ok(Self::flat()),
            "round" => Ok(Self::round()),
            "hyperbolic" => Ok(Self::hyperbolic()),
            other => match other.strip_prefix("custom:") {
                Some(_) => Err(Error::NotIntegrated(other.to_string())),
                None => Err(Error::UnknownModel(other.to_string())),
            },
        }
    }

    pub fn custom(u: &str, conn: ConnectionForm, domain: Domain, fiber_len: f64) -> Result<Self> {
        let base = SurfaceChart::from_expr(format!("custom:{u}"), u, domain)?;
        Self::new(base, conn, fiber_len)
    }

    /// The flat-torus chart with `u = amplitude·sin(2πx)sin(2πy)` and the
    /// quadrature potential.
    pub fn perturbed_torus(amplitude: f64) -> Self {
        let u = format!("{amplitude:?}*sin(2*3.141592653589793*x)*sin(2*3.141592653589793*y)");
        let field = ScalarField::parse(&u).unwrap();
        let conn = ConnectionForm::line_potential(&field).unwrap();
        Self::custom(&u, conn, Domain::Torus, 1.0).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.base.name
    }

    pub fn frame(&self, p: Point) -> Result<LocalFrame> {
        let u = self.base.u_jet(p)?;
        let ax = self.conn.ax.jet_at(p)?;
        let ay = self.conn.ay.jet_at(p)?;
        let zero = Jet::constant(p, 0.0);
        let one = Jet::constant(p, 1.0);
        let e_minus = u.scale(-1.0).exp();
        let e_plus = u.exp();
        let vectors = [
            [zero.clone(), zero.clone(), one.clone()],
            [e_minus.clone(), zero.clone(), -(&e_minus * &ax)],
            [zero.clone(), e_minus.clone(), -(&e_minus * &ay)],
        ];
        let coframe = [
            [ax.clone(), ay.clone(), one],
            [e_plus.clone(), zero.clone(), zero.clone()],
            [zero.clone(), e_plus, zero],
        ];
        Ok(LocalFrame {
            point: p,
            u,
            ax,
            ay,
            vectors,
            coframe,
        })
    }

    /// `|∂x Ay − ∂y Ax − 2e^{2u}|`.
    pub fn kk_consistency(&self, p: Point) -> Result<f64> {
        let f = self.conn.curvature_jet(p)?.value();
        let u = self.base.u_jet(p)?.value();
        Ok((f - 2.0 * (2.0 * u).exp()).abs())
    }

    /// `g(V, W) = η(V)η(W) + e^{2u}(VₓWₓ + VᵧWᵧ)` on coordinate components.
    pub fn metric_eval(&self, v: [f64; 3], w: [f64; 3], p: Point) -> Result<f64> {
        let frame = self.frame(p)?;
        let eta: [f64; 3] = std::array::from_fn(|c| frame.eta()[c].value());
        let ev: f64 = (0..3).map(|c| eta[c] * v[c]).sum();
        let ew: f64 = (0..3).map(|c| eta[c] * w[c]).sum();
        let density = (2.0 * frame.u.value()).exp();
        Ok(ev * ew + density * (v[0] * w[0] + v[1] * w[1]))
    }

    /// `η² − ½dη(J·,·)` evaluated directly: split off the `T` part, apply `J`
    /// on `Q` and contract with the coordinate `dη`.
    pub fn metric_eq2(&self, v: [f64; 3], w: [f64; 3], p: Point) -> Result<f64> {
        let frame = self.frame(p)?;
        let deta = frame.deta_coords()?;
        let eta: [f64; 3] = std::array::from_fn(|c| frame.eta()[c].value());
        let ev: f64 = (0..3).map(|c| eta[c] * v[c]).sum();
        let ew: f64 = (0..3).map(|c| eta[c] * w[c]).sum();
        let to_frame = |z: [f64; 3]| -> FrameVec {
            std::array::from_fn(|a| (0..3).map(|c| frame.coframe[a][c].value() * z[c]).sum())
        };
        let (fv, fw) = (to_frame(v), to_frame(w));
        let jv = frame.to_coords(j0(fv));
        let wq = frame.to_coords([0.0, fw[1], fw[2]]);
        Ok(ev * ew - 0.5 * bilinear(&deta, &jv, &wq))
    }

    /// Frame components of `[E_a, E_b]` as jets; `c[a][b][k]`.
    pub fn structure_jets(&self, frame: &LocalFrame) -> Result<[[JetVec; 3]; 3]> {
        let mut out: Vec<Vec<JetVec>> = Vec::with_capacity(3);
        for a in 0..3 {
            let mut row = Vec::with_capacity(3);
            for b in 0..3 {
                let v = if a == b {
                    let z = frame.u.partial(0)?.scale(0.0);
                    [z.clone(), z.clone(), z]
                } else {
                    let br = LocalFrame::bracket(&frame.vectors[a], &frame.vectors[b])?;
                    frame.to_frame(&br)
                };
                row.push(v);
            }
            out.push(row);
        }
        Ok(std::array::from_fn(|a| {
            std::array::from_fn(|b| out[a][b].clone())
        }))
    }

    pub fn levi_form(&self, x: [f64; 2], y: [f64; 2], p: Point) -> Result<LeviForm> {
        let frame = self.frame(p)?;
        let c = self.structure_jets(&frame)?;
        let xv = [0.0, x[0], x[1]];
        let yv = [0.0, y[0], y[1]];
        let mut levi = 0.0;
        for a in 1..3 {
            for b in 1..3 {
                levi += xv[a] * yv[b] * c[a][b][0].value();
            }
        }
        let deta = frame.deta_coords()?;
        let jx = frame.to_coords(j0(xv));
        let yc = frame.to_coords(yv);
        Ok(LeviForm {
            levi,
            hermitian: -0.5 * bilinear(&deta, &jx, &yc),
        })
    }

    /// `dη(V, W)` on frame components.
    pub fn deta(&self, v: FrameVec, w: FrameVec, p: Point) -> Result<f64> {
        let frame = self.frame(p)?;
        let deta = frame.deta_coords()?;
        Ok(bilinear(&deta, &frame.to_coords(v), &frame.to_coords(w)))
    }

    /// Frame components of `4N(X, Y) = [JX,JY] − J[JX,Y]^Q − J[X,JY]^Q − [X,Y]`
    /// for constant-coefficient `X, Y ∈ Q`.
    pub fn nijenhuis(&self, x: [f64; 2], y: [f64; 2], p: Point) -> Result<FrameVec> {
        let frame = self.frame(p)?;
        let c = self.structure_jets(&frame)?;
        let br = |v: FrameVec, w: FrameVec| -> FrameVec {
            let mut out = [0.0; 3];
            for a in 0..3 {
                for b in 0..3 {
                    if v[a] == 0.0 || w[b] == 0.0 {
                        continue;
                    }
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += v[a] * w[b] * c[a][b][k].value();
                    }
                }
            }
            out
        };
        let q = |v: FrameVec| -> FrameVec { [0.0, v[1], v[2]] };
        let xv = [0.0, x[0], x[1]];
        let yv = [0.0, y[0], y[1]];
        let (jx, jy) = (j0(xv), j0(yv));
        let t1 = br(jx, jy);
        let t2 = j0(q(br(jx, yv)));
        let t3 = j0(q(br(xv, jy)));
        let t4 = br(xv, yv);
        Ok(std::array::from_fn(|k| t1[k] - t2[k] - t3[k] - t4[k]))
    }

    /// Reeb defects `(|η(V) − 1|, max_b |dη(V, E_b)|)`.
    pub fn reeb_check(&self, v: &VectorField, p: Point) -> Result<ReebDefects> {
        let frame = self.frame(p)?;
        let coords: [f64; 3] = match v {
            VectorField::Frame(c) => {
                let fv = [c[0].eval(p)?, c[1].eval(p)?, c[2].eval(p)?];
                frame.to_coords(fv)
            }
            VectorField::Coordinates(c) => [c[0].eval(p)?, c[1].eval(p)?, c[2].eval(p)?],
        };
        let eta: f64 = (0..3).map(|c| frame.eta()[c].value() * coords[c]).sum();
        let deta = frame.deta_coords()?;
        let d = (0..3)
            .map(|b| {
                let eb = frame.to_coords(std::array::from_fn(|i| if i == b { 1.0 } else { 0.0 }));
                bilinear(&deta, &coords, &eb).abs()
            })
            .fold(0.0, f64::max);
        Ok(ReebDefects {
            eta: (eta - 1.0).abs(),
            deta: d,
        })
    }

    /// Largest `|∂t g_ab|` over the coordinate metric coefficients.
    pub fn metric_t_derivative(&self, p: Point) -> Result<f64> {
        let frame = self.frame(p)?;
        let eta = frame.eta();
        let density = frame.u.scale(2.0).exp();
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let mut g = &eta[a] * &eta[b];
                if a == b && a < 2 {
                    g = g + &density;
                }
                worst = worst.max(g.partial(2)?.value().abs());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn catalog() -> Vec<SasakiChart> {
        vec![
            SasakiChart::flat(),
            SasakiChart::round(),
            SasakiChart::hyperbolic(),
        ]
    }

    fn sample(chart: &SasakiChart, rng: &mut ChaCha8Rng) -> Point {
        let [x, y] = chart.base.domain.random_point(rng);
        [x, y, rng.gen_range(0.0..1.0)]
    }

    #[test]
    fn catalog_curvature_forms() {
        let flat = SasakiChart::flat();
        assert_eq!(
            flat.conn.curvature_jet([0.3, 0.4, 0.0]).unwrap().value(),
            2.0
        );
        let r2 = 0.25 + 0.04;
        let f = SasakiChart::round()
            .conn
            .curvature_jet([0.5, 0.2, 0.0])
            .unwrap()
            .value();
        assert!((f - 8.0 / (1.0f64 + r2).powi(2)).abs() < 1e-10);
        let r2 = 0.09 + 0.01;
        let f = SasakiChart::hyperbolic()
            .conn
            .curvature_jet([0.3, 0.1, 0.0])
            .unwrap()
            .value();
        assert!((f - 8.0 / (1.0f64 - r2).powi(2)).abs() < 1e-10);
    }

    #[test]
    fn custom_models_need_a_connection() {
        assert!(matches!(
            SasakiChart::build_model("custom:0.1*x"),
            Err(Error::NotIntegrated(_))
        ));
        assert!(matches!(
            SasakiChart::build_model("sphere"),
            Err(Error::UnknownModel(_))
        ));
    }

    #[test]
    fn kk_consistency_on_catalog_and_controls() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for chart in catalog() {
            for _ in 0..100 {
                let p = sample(&chart, &mut rng);
                assert!(chart.kk_consistency(p).unwrap() < 1e-10);
            }
        }
        let wrong = SasakiChart::new(
            SurfaceChart::flat(),
            ConnectionForm::from_one_form("x*dy").unwrap(),
            1.0,
        )
        .unwrap();
        for p in [[0.0, 0.0, 0.0], [0.7, -0.3, 0.2]] {
            assert!((wrong.kk_consistency(p).unwrap() - 1.0).abs() < 1e-15);
        }
        let base = SurfaceChart::flat()
            .conformal_rescale(ScalarField::parse("0.2*x").unwrap().to_ref())
            .unwrap();
        let stale = SasakiChart::new(base, SasakiChart::flat().conn, 1.0).unwrap();
        assert!(stale.kk_consistency([0.5, 0.5, 0.0]).unwrap() > 0.1);
    }

    #[test]
    fn line_potential_matches_area_form() {
        let chart = SasakiChart::perturbed_torus(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let p = sample(&chart, &mut rng);
            assert!(chart.kk_consistency(p).unwrap() < 1e-12);
            // second derivatives of F agree with those of 2e^{2u}
            let f = chart.conn.curvature_jet(p).unwrap();
            let g = chart.base.u_jet(p).unwrap().scale(2.0).exp().scale(2.0);
            for m in [[1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 2, 0], [2, 0, 0]] {
                let a = f.derivative(m).unwrap();
                let b = g.derivative(m).unwrap();
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{m:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn orthonormal_frame_and_eq2_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for chart in catalog()
            .into_iter()
            .chain([SasakiChart::perturbed_torus(0.05)])
        {
            for _ in 0..100 {
                let p = sample(&chart, &mut rng);
                let frame = chart.frame(p).unwrap();
                let e: [[f64; 3]; 3] =
                    std::array::from_fn(|a| std::array::from_fn(|c| frame.vectors[a][c].value()));
                for a in 0..3 {
                    for b in 0..3 {
                        let want = if a == b { 1.0 } else { 0.0 };
                        let g = chart.metric_eval(e[a], e[b], p).unwrap();
                        let g2 = chart.metric_eq2(e[a], e[b], p).unwrap();
                        assert!(
                            (g - want).abs() < 1e-12,
                            "{}: g({a},{b}) = {g}",
                            chart.name()
                        );
                        assert!(
                            (g2 - want).abs() < 1e-12,
                            "{}: eq2({a},{b}) = {g2}",
                            chart.name()
                        );
                    }
                }
                let v = [rng.gen_range(-1.0..1.0), 0.3, -0.7];
                let w = [0.2, rng.gen_range(-1.0..1.0), 1.1];
                let d = chart.metric_eval(v, w, p).unwrap() - chart.metric_eq2(v, w, p).unwrap();
                assert!(d.abs() < 1e-11);
            }
        }
    }

    #[test]
    fn flat_metric_at_origin() {
        let flat = SasakiChart::flat();
        assert_eq!(
            flat.metric_eval([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [0.4, 0.1, 0.0])
                .unwrap(),
            1.0
        );
        assert_eq!(
            flat.metric_eval([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0])
                .unwrap(),
            1.0
        );
        let g = flat
            .metric_eval([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.5, 0.0])
            .unwrap();
        assert_eq!(g, 1.25);
    }

    #[test]
    fn levi_and_hermitian_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for chart in catalog() {
            for _ in 0..20 {
                let p = sample(&chart, &mut rng);
                let e11 = chart.levi_form([1.0, 0.0], [1.0, 0.0], p).unwrap();
                assert!((e11.hermitian - 1.0).abs() < 1e-10);
                assert_eq!(e11.levi, 0.0);
                let d12 = chart.deta([0.0, 1.0, 0.0], [0.0, 0.0, 1.0], p).unwrap();
                let dj = chart
                    .deta(j0([0.0, 1.0, 0.0]), j0([0.0, 0.0, 1.0]), p)
                    .unwrap();
                assert!((dj - d12).abs() < 1e-10);
                assert!((0.5 * d12 - 1.0).abs() < 1e-10);
                // L(X, Y) = η([X, Y]) = −dη(X, Y)
                let l12 = chart.levi_form([1.0, 0.0], [0.0, 1.0], p).unwrap();
                assert!((l12.levi + d12).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn nijenhuis_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for chart in catalog()
            .into_iter()
            .chain([SasakiChart::perturbed_torus(0.05)])
        {
            let p = sample(&chart, &mut rng);
            assert_eq!(
                chart.nijenhuis([1.0, 0.0], [1.0, 0.0], p).unwrap(),
                [0.0; 3]
            );
            for _ in 0..100 {
                let p = sample(&chart, &mut rng);
                let n = chart.nijenhuis([1.0, 0.0], [0.0, 1.0], p).unwrap();
                assert!(n.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-9);
                let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let y = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let a = chart.nijenhuis(x, y, p).unwrap();
                let b = chart.nijenhuis(y, x, p).unwrap();
                for k in 0..3 {
                    assert!((a[k] + b[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reeb_examples() {
        let flat = SasakiChart::flat();
        let p = [0.3, 0.8, 0.1];
        let f = |s: &str| ScalarField::parse(s).unwrap();
        let t = VectorField::Frame([f("1"), f("0"), f("0")]);
        let d = flat.reeb_check(&t, p).unwrap();
        assert!(d.eta < 1e-15 && d.deta < 1e-15);
        let tilted = VectorField::Frame([f("1"), f("0.1"), f("0")]);
        let d = flat.reeb_check(&tilted, p).unwrap();
        assert!((d.deta - 0.2).abs() < 1e-14);
        let double = VectorField::Coordinates([f("0"), f("0"), f("2")]);
        assert!((flat.reeb_check(&double, p).unwrap().eta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn metric_is_t_independent() {
        for chart in catalog() {
            assert_eq!(chart.metric_t_derivative([0.2, 0.3, 0.7]).unwrap(), 0.0);
        }
    }
}
