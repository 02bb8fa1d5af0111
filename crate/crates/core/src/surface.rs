//! Conformal surface charts `(Σ, e^{2u}(dx² + dy²))`.
//!
//! Christoffel symbols are assembled from jets of the metric coefficients,
//! so any conformal factor expressible as a [`JetField`] works.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldError, FieldRef, JetField, ScalarField};
use crate::jet::{Jet, Point};

/// Radius inside which points of disk and plane charts are sampled.
pub const SAMPLE_RADIUS: f64 = 0.8;

/// Empirical sign `s(X) = KILLING_SIGN · ½ □^Σ_X f` relating the Killing
/// symmetrisation of `J(df)♯` to the box operator.
pub const KILLING_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Periodic unit cell `[0,1) × [0,1)`.
    Torus,
    /// Open disk about the origin.
    Disk { radius: f64 },
    /// The whole plane.
    Plane,
}

impl Domain {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Domain::Disk { radius } => x * x + y * y < radius * radius,
            Domain::Torus | Domain::Plane => x.is_finite() && y.is_finite(),
        }
    }

    /// Radius of the region random and grid samples are drawn from.
    pub fn sample_radius(&self) -> f64 {
        match self {
            Domain::Disk { radius } => SAMPLE_RADIUS.min(0.9 * radius),
            _ => SAMPLE_RADIUS,
        }
    }

    pub fn is_compact_cell(&self) -> bool {
        matches!(self, Domain::Torus)
    }

    /// An `n × n` grid of base points: the cell lattice `i/n` on the torus,
    /// otherwise a square inscribed in the sampling disk.
    pub fn grid(&self, n: usize) -> Vec<[f64; 2]> {
        let n = n.max(1);
        let coords: Vec<f64> = match self {
            Domain::Torus => (0..n).map(|i| i as f64 / n as f64).collect(),
            _ => {
                let s = self.sample_radius() / 2f64.sqrt();
                if n == 1 {
                    vec![0.0]
                } else {
                    (0..n)
                        .map(|i| -s + 2.0 * s * i as f64 / (n - 1) as f64)
                        .collect()
                }
            }
        };
        coords
            .iter()
            .flat_map(|&y| coords.iter().map(move |&x| [x, y]))
            .collect()
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        match self {
            Domain::Torus => [rng.gen::<f64>(), rng.gen::<f64>()],
            _ => {
                let r = self.sample_radius() * rng.gen::<f64>().sqrt();
                let a = 2.0 * PI * rng.gen::<f64>();
                [r * a.cos(), r * a.sin()]
            }
        }
    }
}

/// `a + b` as a field.
#[derive(Debug)]
pub struct SumField(pub FieldRef, pub FieldRef);

impl JetField for SumField {
    fn jet_at(&self, p: Point) -> Result<Jet, FieldError> {
        Ok(self.0.jet_at(p)? + self.1.jet_at(p)?)
    }
    fn is_basic(&self) -> bool {
        self.0.is_basic() && self.1.is_basic()
    }
    fn describe(&self) -> String {
        format!("({}) + ({})", self.0.describe(), self.1.describe())
    }
}

/// Christoffel symbols `gamma[k][i][j] = Γᵏᵢⱼ` of the surface metric as jets.
pub type SurfaceChristoffel = [[[Jet; 2]; 2]; 2];

#[derive(Debug, Clone)]
pub struct SurfaceChart {
    pub name: String,
    u: FieldRef,
    pub domain: Domain,
}

/// One direction of a Killing sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillingSample {
    pub angle: f64,
    /// `g(∇_X J(df)♯, X)` for unit `X`.
    pub symmetrized: f64,
    /// `□^Σ_X f` for the same `X`.
    pub box_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KillingSweep {
    pub samples: Vec<KillingSample>,
}

impl KillingSweep {
    pub fn max_symmetrized(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.symmetrized.abs())
            .fold(0.0, f64::max)
    }

    /// Largest `| |s(X)| − ½|□_X f| |` over the sweep.
    pub fn max_mismatch(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.symmetrized.abs() - 0.5 * s.box_value.abs()).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|s(X) − KILLING_SIGN · ½□_X f|`.
    pub fn max_signed_mismatch(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.symmetrized - KILLING_SIGN * 0.5 * s.box_value).abs())
            .fold(0.0, f64::max)
    }
}

/// Rotation by +90° in an oriented conformal frame.
pub fn rotate(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

impl SurfaceChart {
    pub fn new(name: impl Into<String>, u: FieldRef, domain: Domain) -> Result<Self> {
        if !u.is_basic() {
            return Err(Error::NotBasic(u.describe()));
        }
        Ok(Self {
            name: name.into(),
            u,
            domain,
        })
    }

    pub fn from_expr(name: impl Into<String>, u: &str, domain: Domain) -> Result<Self> {
        Self::new(name, Arc::new(ScalarField::parse(u)?), domain)
    }

    pub fn flat() -> Self {
        Self::from_expr("flat", "0", Domain::Torus).unwrap()
    }

    pub fn round() -> Self {
        Self::from_expr("round", "log(2/(1+x^2+y^2))", Domain::Plane).unwrap()
    }

    pub fn hyperbolic() -> Self {
        Self::from_expr(
            "hyperbolic",
            "log(2/(1-x^2-y^2))",
            Domain::Disk { radius: 0.9 },
        )
        .unwrap()
    }

    pub fn conformal_factor(&self) -> &FieldRef {
        &self.u
    }

    pub fn check(&self, p: Point) -> Result<()> {
        if self.domain.contains(p[0], p[1]) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { point: p })
        }
    }

    pub fn u_jet(&self, p: Point) -> Result<Jet> {
        self.check(p)?;
        Ok(self.u.jet_at(p)?)
    }

    /// `e^{2u}` at `p`, the area density.
    pub fn area_density(&self, p: Point) -> Result<f64> {
        self.check(p)?;
        Ok((2.0 * self.u.value_at(p)?).exp())
    }

    /// `K = −e^{−2u}(∂ₓₓu + ∂ᵧᵧu)`.
    pub fn gauss_curvature(&self, p: Point) -> Result<f64> {
        let u = self.u_jet(p)?;
        let lap = u.derivative([2, 0, 0])? + u.derivative([0, 2, 0])?;
        Ok(-(-2.0 * u.value()).exp() * lap)
    }

    /// `Γᵏᵢⱼ = ½ gᵏˡ(∂ᵢgⱼₗ + ∂ⱼgᵢₗ − ∂ₗgᵢⱼ)` for `gᵢⱼ = e^{2u}δᵢⱼ`.
    pub fn christoffel(&self, p: Point) -> Result<SurfaceChristoffel> {
        let u = self.u_jet(p)?;
        let density = u.scale(2.0).exp();
        let inverse = u.scale(-2.0).exp();
        let d = [density.partial(0)?, density.partial(1)?];
        let zero = d[0].scale(0.0);
        let metric_d = |l: usize, i: usize, j: usize| -> &Jet {
            // ∂ₗ gᵢⱼ
            if i == j {
                &d[l]
            } else {
                &zero
            }
        };
        let gamma: SurfaceChristoffel = std::array::from_fn(|k| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let s = metric_d(i, j, k) + metric_d(j, i, k) - metric_d(k, i, j);
                    (&inverse * &s).scale(0.5)
                })
            })
        });
        Ok(gamma)
    }

    /// `(df)♯ = e^{−2u}(∂ₓf, ∂ᵧf)` in chart components.
    pub fn grad_sharp(&self, f: &dyn JetField, p: Point) -> Result<[f64; 2]> {
        let fj = self.basic_jet(f, p)?;
        let scale = (-2.0 * self.u_jet(p)?.value()).exp();
        Ok([
            scale * fj.derivative([1, 0, 0])?,
            scale * fj.derivative([0, 1, 0])?,
        ])
    }

    fn basic_jet(&self, f: &dyn JetField, p: Point) -> Result<Jet> {
        if !f.is_basic() {
            return Err(Error::NotBasic(f.describe()));
        }
        self.check(p)?;
        Ok(f.jet_at(p)?)
    }

    pub fn box_sigma(&self, f: &dyn JetField, x: [f64; 2], p: Point) -> Result<f64> {
        let fj = self.basic_jet(f, p)?;
        self.box_sigma_jet(&fj, x, p)
    }

    /// `□^Σ_X f = X.JX.f + JX.X.f − (∇_X JX).f − (∇_{JX} X).f` for a vector
    /// with constant chart components `x`.
    pub fn box_sigma_jet(&self, f: &Jet, x: [f64; 2], p: Point) -> Result<f64> {
        let gamma = self.christoffel(p)?;
        let jx = rotate(x);
        let grad = [f.derivative([1, 0, 0])?, f.derivative([0, 1, 0])?];
        let hess = [
            [f.derivative([2, 0, 0])?, f.derivative([1, 1, 0])?],
            [f.derivative([1, 1, 0])?, f.derivative([0, 2, 0])?],
        ];
        let mut second = 0.0;
        let mut connection = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                second += x[i] * jx[j] * hess[i][j] + jx[i] * x[j] * hess[i][j];
                for (k, g) in grad.iter().enumerate() {
                    let c = gamma[k][i][j].value();
                    connection += (x[i] * jx[j] + jx[i] * x[j]) * c * g;
                }
            }
        }
        Ok(second - connection)
    }

    /// Sweeps 16 unit directions and records `g(∇_X J(df)♯, X)` next to
    /// `□^Σ_X f`.
    pub fn killing_sweep(&self, f: &dyn JetField, p: Point) -> Result<KillingSweep> {
        let fj = self.basic_jet(f, p)?;
        let u = self.u_jet(p)?;
        let gamma = self.christoffel(p)?;
        let inv = u.scale(-2.0).exp();
        let grad = [&inv * &fj.partial(0)?, &inv * &fj.partial(1)?];
        let v = [-&grad[1], grad[0].clone()];
        let dv = [
            [v[0].partial(0)?.value(), v[0].partial(1)?.value()],
            [v[1].partial(0)?.value(), v[1].partial(1)?.value()],
        ];
        let density = (2.0 * u.value()).exp();
        let unit = (-u.value()).exp();
        let samples = (0..16)
            .map(|m| {
                let angle = PI * m as f64 / 16.0;
                let x = [unit * angle.cos(), unit * angle.sin()];
                let mut nabla = [0.0; 2];
                for (c, n) in nabla.iter_mut().enumerate() {
                    for i in 0..2 {
                        *n += x[i] * dv[c][i];
                        for j in 0..2 {
                            *n += gamma[c][i][j].value() * x[i] * v[j].value();
                        }
                    }
                }
                let symmetrized = density * (nabla[0] * x[0] + nabla[1] * x[1]);
                let box_value = self.box_sigma_jet(&fj, x, p)?;
                Ok(KillingSample {
                    angle,
                    symmetrized,
                    box_value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KillingSweep { samples })
    }

    /// Maximal `|g(∇_X J(df)♯, X)|` over unit `X`; zero iff `J(df)♯` is Killing at `p`.
    pub fn killing_defect(&self, f: &dyn JetField, p: Point) -> Result<f64> {
        Ok(self.killing_sweep(f, p)?.max_symmetrized())
    }

    /// The chart with conformal factor `u + σ`.
    pub fn conformal_rescale(&self, sigma: FieldRef) -> Result<SurfaceChart> {
        if !sigma.is_basic() {
            return Err(Error::NotBasic(sigma.describe()));
        }
        Ok(SurfaceChart {
            name: format!("{}+rescale", self.name),
            u: Arc::new(SumField(self.u.clone(), sigma)),
            domain: self.domain,
        })
    }
}
