//! Body specification files: a small TOML document naming a family, a
//! dimension, an optional seed and the family parameters.
//!
//! ```toml
//! family = "ellipsoid"
//! dim = 4
//!
//! [params]
//! semi_axes = [1.0, 1.0, 1.0, 2.0]
//! ```

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bodies::StarBody;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quartic: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub family: String,
    pub dim: usize,
    /// Seeds the perturbation coefficients of a perturbed ball when they are
    /// omitted. TOML integers are signed, so at most `i64::MAX`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Params,
}

fn spec_err(msg: impl Into<String>) -> Error {
    Error::Spec(msg.into())
}

fn required<T: Clone>(family: &str, name: &str, v: &Option<T>) -> Result<T> {
    v.clone()
        .ok_or_else(|| spec_err(format!("family `{family}` needs params.{name}")))
}

impl BodySpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| spec_err(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| spec_err(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Spec(msg) => spec_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| spec_err(e.to_string()))
    }

    fn allow_only(&self, allowed: &[&str]) -> Result<()> {
        let p = &self.params;
        let present = [
            ("radius", p.radius.is_some()),
            ("semi_axes", p.semi_axes.is_some()),
            ("half_width", p.half_width.is_some()),
            ("p", p.p.is_some()),
            ("half_height", p.half_height.is_some()),
            ("eps", p.eps.is_some()),
            ("quad", p.quad.is_some()),
            ("quartic", p.quartic.is_some()),
        ];
        match present.iter().find(|(name, set)| *set && !allowed.contains(name)) {
            Some((name, _)) => Err(spec_err(format!(
                "params.{name} does not apply to family `{}` (allowed: {})",
                self.family,
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn check_len(&self, name: &str, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(spec_err(format!(
                "params.{name} has {} entries but dim = {}",
                v.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<StarBody> {
        let f = self.family.as_str();
        let p = &self.params;
        let body = match f {
            "ball" => {
                self.allow_only(&["radius"])?;
                StarBody::ball(self.dim, p.radius.unwrap_or(1.0))
            }
            "ellipsoid" => {
                self.allow_only(&["semi_axes"])?;
                let axes = required(f, "semi_axes", &p.semi_axes)?;
                self.check_len("semi_axes", &axes)?;
                StarBody::ellipsoid(axes)
            }
            "cube" => {
                self.allow_only(&["half_width"])?;
                StarBody::cube(self.dim, p.half_width.unwrap_or(1.0))
            }
            "lp-ball" => {
                self.allow_only(&["p", "radius"])?;
                StarBody::lp_ball(self.dim, required(f, "p", &p.p)?, p.radius.unwrap_or(1.0))
            }
            "cylinder" => {
                self.allow_only(&["radius", "half_height"])?;
                StarBody::cylinder(self.dim, p.radius.unwrap_or(1.0), p.half_height.unwrap_or(1.0))
            }
            "perturbed-ball" => {
                self.allow_only(&["radius", "eps", "quad", "quartic"])?;
                let eps = required(f, "eps", &p.eps)?;
                let (quad, quartic) = match (&p.quad, &p.quartic) {
                    (Some(q), Some(r)) => (q.clone(), r.clone()),
                    (None, None) => {
                        let seed = self
                            .seed
                            .ok_or_else(|| spec_err("perturbed-ball needs params.quad and params.quartic, or a seed"))?;
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let mut draw = || -> Vec<f64> { (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect() };
                        (draw(), draw())
                    }
                    _ => return Err(spec_err("give both params.quad and params.quartic, or neither")),
                };
                self.check_len("quad", &quad)?;
                self.check_len("quartic", &quartic)?;
                StarBody::perturbed_ball(p.radius.unwrap_or(1.0), eps, quad, quartic)
            }
            "custom" => return Err(spec_err("custom bodies cannot be described by a spec file")),
            other => {
                return Err(spec_err(format!(
                    "unknown family `{other}` (expected ball, ellipsoid, cube, lp-ball, cylinder, perturbed-ball)"
                )))
            }
        };
        let body = body.map_err(|e| spec_err(format!("family `{f}`: {e}")))?;
        if body.dim() != self.dim {
            return Err(spec_err(format!("dim = {} but the parameters describe dimension {}", self.dim, body.dim())));
        }
        Ok(body)
    }
}
