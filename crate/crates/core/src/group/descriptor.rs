use serde::{Deserialize, Serialize};

use super::{GroupError, GroupKind, GroupModel, MetricRule};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub kind: String,
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricDescriptor>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDescriptor {
    pub rule: MetricRule,
    #[serde(with = "rational::serde_str", default = "one")]
    pub scale: Rational,
}

fn one() -> Rational {
    Rational::from_integer(1)
}

impl GroupModel {
    pub fn from_descriptor(desc: &ModelDescriptor) -> Result<GroupModel, GroupError> {
        let bad = |msg: String| GroupError::Descriptor(msg);
        let p = &desc.params;
        let forbid = |field: &str, present: bool| {
            if present {
                Err(bad(format!("params.{field} does not apply to kind {:?}", desc.kind)))
            } else {
                Ok(())
            }
        };
        let positive = |field: &str, v: Option<usize>| match v {
            Some(v) if v >= 1 => Ok(v),
            Some(_) => Err(bad(format!("params.{field} must be positive"))),
            None => Err(bad(format!("params.{field} is required for kind {:?}", desc.kind))),
        };
        let mut model = match desc.kind.as_str() {
            "lattice" | "torus" => {
                forbid("rank", p.rank.is_some())?;
                forbid("modulus", p.modulus.is_some())?;
                let dim = positive("dim", p.dim)?;
                if desc.kind == "lattice" {
                    GroupModel::lattice(dim)
                } else {
                    GroupModel::torus(dim)
                }
            }
            "free" => {
                forbid("dim", p.dim.is_some())?;
                forbid("modulus", p.modulus.is_some())?;
                let rank = positive("rank", p.rank)?;
                if rank > 26 {
                    return Err(bad("params.rank must be at most 26".into()));
                }
                GroupModel::free(rank)
            }
            "heisenberg" | "circle" => {
                forbid("dim", p.dim.is_some())?;
                forbid("rank", p.rank.is_some())?;
                forbid("modulus", p.modulus.is_some())?;
                if desc.kind == "circle" {
                    GroupModel::circle()
                } else {
                    GroupModel::heisenberg()
                }
            }
            "cyclic" => {
                forbid("dim", p.dim.is_some())?;
                forbid("rank", p.rank.is_some())?;
                let n = positive("modulus", p.modulus.map(|m| m as usize))?;
                GroupModel::cyclic(n as u64)
            }
            other => return Err(bad(format!("kind: unknown group kind {other:?}"))),
        };
        if let Some(cap) = p.window_cap {
            model = model.with_window_cap(cap);
        }
        if let Some(m) = &desc.metric {
            model = model.with_metric(m.rule, m.scale)?;
        }
        if let Some(gens) = &desc.generators {
            let parsed = gens
                .iter()
                .map(|s| model.parse_element(s))
                .collect::<Result<Vec<_>, _>>()?;
            model = model.with_generators(parsed)?;
        }
        Ok(model)
    }

    pub fn to_descriptor(&self) -> ModelDescriptor {
        let mut params = ModelParams::default();
        match self.kind {
            GroupKind::Lattice { dim } | GroupKind::Torus { dim } => params.dim = Some(dim),
            GroupKind::Free { rank } => params.rank = Some(rank),
            GroupKind::Cyclic { modulus } => params.modulus = Some(modulus),
            GroupKind::Heisenberg | GroupKind::Circle => {}
        }
        if self.window_cap != super::DEFAULT_WINDOW_CAP {
            params.window_cap = Some(self.window_cap);
        }
        ModelDescriptor {
            kind: self.kind.name().to_string(),
            params,
            generators: Some(self.generators.iter().map(|g| g.to_string()).collect()),
            metric: Some(MetricDescriptor {
                rule: self.metric.rule,
                scale: self.metric.scale,
            }),
        }
    }

    pub fn from_json(text: &str) -> Result<GroupModel, GroupError> {
        let desc: ModelDescriptor = serde_json::from_str(text).map_err(|e| GroupError::Descriptor(e.to_string()))?;
        GroupModel::from_descriptor(&desc)
    }
}
