//! Model configuration from TOML/JSON files or command-line flags.

use std::path::Path;

use cr3kit::deform::{Deformation, DeformationKind};
use cr3kit::{ConnectionForm, Domain, SasakiChart, ScalarField};
use serde::Deserialize;

/// Connection form as written in a config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ConnectionSpec {
    /// `[Ax, Ay]`.
    Components([String; 2]),
    /// A one-form such as `"x*dy - y*dx"`, or `"x-integral"`.
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationSpec {
    pub kind: DeformationKind,
    pub c: Option<f64>,
    pub f: Option<String>,
    pub sigma: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: String,
    pub u: Option<String>,
    #[serde(rename = "A", alias = "a")]
    pub connection: Option<ConnectionSpec>,
    pub fiber_len: Option<f64>,
    pub domain: Option<Domain>,
    pub deformation: Option<DeformationSpec>,
}

impl Config {
    pub fn from_tag(tag: &str) -> Self {
        let (model, u) = match tag.strip_prefix("custom:") {
            Some(u) => ("custom".to_string(), Some(u.to_string())),
            None => (tag.to_string(), None),
        };
        Config {
            model,
            u,
            connection: None,
            fiber_len: None,
            domain: None,
            deformation: None,
        }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, String> {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        match ext {
            "json" => serde_json::from_str(text).map_err(|e| e.to_string()),
            "toml" => toml::from_str(text).map_err(|e| e.to_string()),
            _ => serde_json::from_str(text)
                .or_else(|_| toml::from_str(text))
                .map_err(|e: toml::de::Error| e.to_string()),
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, path).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn build(&self) -> Result<SasakiChart, String> {
        let mut chart = match self.model.as_str() {
            "custom" => {
                let u = self.u.as_deref().ok_or("custom model needs `u`")?;
                let conn = match &self.connection {
                    Some(spec) => connection(spec, u)?,
                    None => {
                        return Err(cr3kit::Error::NotIntegrated(format!("custom:{u}")).to_string())
                    }
                };
                let domain = self.domain.unwrap_or(Domain::Torus);
                SasakiChart::custom(u, conn, domain, 1.0).map_err(|e| e.to_string())?
            }
            tag => {
                if self.u.is_some() {
                    return Err(format!(
                        "`u` is only allowed for custom models, not `{tag}`"
                    ));
                }
                let mut c = SasakiChart::build_model(tag).map_err(|e| e.to_string())?;
                if let Some(spec) = &self.connection {
                    let u = c.base.conformal_factor().describe();
                    c.conn = connection(spec, &u)?;
                }
                if let Some(d) = self.domain {
                    c.base.domain = d;
                }
                c
            }
        };
        if let Some(len) = self.fiber_len {
            chart = SasakiChart::new(chart.base, chart.conn, len).map_err(|e| e.to_string())?;
        }
        Ok(chart)
    }
}

impl DeformationSpec {
    pub fn build(&self) -> Result<Deformation, String> {
        let field = |name: &str, v: &Option<String>| -> Result<ScalarField, String> {
            let src = v
                .as_deref()
                .ok_or(format!("{:?} deformation needs `{name}`", self.kind))?;
            ScalarField::parse(src).map_err(|e| e.to_string())
        };
        Ok(match self.kind {
            DeformationKind::Type0 => Deformation::Type0 {
                c: self.c.ok_or("type0 deformation needs `c`")?,
            },
            DeformationKind::Type1 => Deformation::Type1 {
                f: field("f", &self.f)?,
            },
            DeformationKind::Type2 => Deformation::Type2 {
                sigma: field("sigma", &self.sigma)?,
            },
        })
    }
}

/// Resolves a connection spec against the conformal factor source `u`.
pub fn connection(spec: &ConnectionSpec, u: &str) -> Result<ConnectionForm, String> {
    match spec {
        ConnectionSpec::Components([ax, ay]) => {
            ConnectionForm::from_exprs(ax, ay).map_err(|e| e.to_string())
        }
        ConnectionSpec::Text(s) if s.trim() == "x-integral" => {
            let u = ScalarField::parse(u).map_err(|e| e.to_string())?;
            ConnectionForm::line_potential(&u).map_err(|e| e.to_string())
        }
        ConnectionSpec::Text(s) => ConnectionForm::from_one_form(s).map_err(|e| e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let toml_src = r#"
            model = "custom"
            u = "0.05*sin(2*3.141592653589793*x)*sin(2*3.141592653589793*y)"
            A = "x-integral"

            [deformation]
            kind = "type1"
            f = "2 + x"
        "#;
        let json_src = r#"{
            "deformation": {"f": "2 + x", "kind": "type1"},
            "A": "x-integral",
            "u": "0.05*sin(2*3.141592653589793*x)*sin(2*3.141592653589793*y)",
            "model": "custom"
        }"#;
        let a = Config::parse(toml_src, Path::new("m.toml")).unwrap();
        let b = Config::parse(json_src, Path::new("m.json")).unwrap();
        assert_eq!(a, b);
        assert_eq!(Config::parse(json_src, Path::new("m.cfg")).unwrap(), a);
        assert_eq!(Config::parse(toml_src, Path::new("m.cfg")).unwrap(), a);
        let chart = a.build().unwrap();
        assert!(chart.kk_consistency([0.2, 0.3, 0.0]).unwrap() < 1e-12);
        assert!(matches!(
            a.deformation.unwrap().build().unwrap(),
            Deformation::Type1 { .. }
        ));
    }

    #[test]
    fn connection_forms() {
        let mut c = Config::from_tag("flat");
        c.connection = Some(ConnectionSpec::Text("x*dy".into()));
        let chart = c.build().unwrap();
        assert!((chart.kk_consistency([0.1, 0.1, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        c.connection = Some(ConnectionSpec::Components(["-y".into(), "x".into()]));
        assert!(c.build().unwrap().kk_consistency([0.1, 0.1, 0.0]).unwrap() < 1e-15);
    }

    #[test]
    fn config_errors() {
        assert!(Config::from_tag("sphere").build().is_err());
        let e = Config::from_tag("custom:0.1*x").build().unwrap_err();
        assert!(e.contains("connection"), "{e}");
        assert!(Config::parse("model = 3", Path::new("a.toml")).is_err());
        assert!(Config::parse(r#"{"model": "flat", "colour": 1}"#, Path::new("a.json")).is_err());
        let spec = DeformationSpec {
            kind: DeformationKind::Type0,
            c: None,
            f: None,
            sigma: None,
        };
        assert!(spec.build().is_err());
    }
}
