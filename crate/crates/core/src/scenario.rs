//! JSON scenario files.
//!
//! ```json
//! {
//!   "goods": [{"id": "a", "name": "Apples"}, {"id": "b"}],
//!   "tree": {"aggregator": "ces", "r": 0.5,
//!            "children": [{"good": "a"}, {"good": "b"}]},
//!   "scenarios": [{"name": "base", "prices": {"a": 1, "b": 4}, "utility": 1}]
//! }
//! ```
//!
//! A tree node is either `{"good": id}` or an aggregator with `children`.
//! `"ces"` nodes need `r` and may carry `weights`; `"cobb_douglas"` nodes
//! need `weights` and must not carry `r`. Scenarios give a price for every
//! good and optionally `income`, `utility` and `quantities`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lr::{Exponent, PositiveVector, WeightVector};
use crate::tree::{NestTree, ValidatedTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub goods: Vec<GoodSpec>,
    pub tree: TreeSpec,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorKind {
    Ces,
    CobbDouglas,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregator: Option<AggregatorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<TreeSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub prices: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub income: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantities: Option<BTreeMap<String, f64>>,
}

impl ScenarioFile {
    /// Parses JSON, reporting the line, column and field path of any
    /// syntax or type error.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            let text = inner.to_string();
            let message = text
                .rsplit_once(" at line ")
                .map_or(text.as_str(), |(m, _)| m);
            Error::Config(format!(
                "line {} column {} at `{}`: {}",
                inner.line(),
                inner.column(),
                path,
                message
            ))
        })
    }

    /// Checks the goods, tree and scenarios against each other.
    pub fn build(&self) -> Result<Model> {
        let mut index = HashMap::new();
        for (i, good) in self.goods.iter().enumerate() {
            if index.insert(good.id.clone(), i).is_some() {
                return Err(Error::Config(format!(
                    "goods[{i}]: duplicate id `{}`",
                    good.id
                )));
            }
        }
        if self.goods.is_empty() {
            return Err(Error::Config("goods: at least one good is required".into()));
        }
        let tree = convert_tree(&self.tree, "tree", &index)?;
        let tree = tree
            .validate(self.goods.len())
            .map_err(|e| Error::Config(format!("tree: {e}")))?;
        let mut names = HashMap::new();
        for (i, sc) in self.scenarios.iter().enumerate() {
            if names.insert(sc.name.clone(), i).is_some() {
                return Err(Error::Config(format!(
                    "scenarios[{i}]: duplicate name `{}`",
                    sc.name
                )));
            }
            let at = format!("scenarios[{i}]");
            check_good_map(&sc.prices, &index, &format!("{at}.prices"))?;
            if let Some(q) = &sc.quantities {
                check_good_map(q, &index, &format!("{at}.quantities"))?;
            }
            for (field, value) in [("income", sc.income), ("utility", sc.utility)] {
                if let Some(v) = value {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(Error::Config(format!("{at}.{field}: must be > 0, got {v}")));
                    }
                }
            }
        }
        Ok(Model {
            goods: self.goods.clone(),
            index,
            tree,
            scenarios: self.scenarios.clone(),
        })
    }
}

fn check_good_map(
    map: &BTreeMap<String, f64>,
    index: &HashMap<String, usize>,
    at: &str,
) -> Result<()> {
    if let Some(unknown) = map.keys().find(|k| !index.contains_key(*k)) {
        return Err(Error::Config(format!("{at}: unknown good `{unknown}`")));
    }
    let mut missing: Vec<&String> = index.keys().filter(|k| !map.contains_key(*k)).collect();
    if !missing.is_empty() {
        missing.sort();
        return Err(Error::Config(format!(
            "{at}: no value for good `{}`",
            missing[0]
        )));
    }
    if let Some((k, v)) = map.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Config(format!("{at}.{k}: must be > 0, got {v}")));
    }
    Ok(())
}

fn convert_tree(spec: &TreeSpec, at: &str, index: &HashMap<String, usize>) -> Result<NestTree> {
    let config = |msg: String| Error::Config(format!("{at}: {msg}"));
    if let Some(good) = &spec.good {
        if spec.aggregator.is_some()
            || spec.r.is_some()
            || spec.weights.is_some()
            || spec.children.is_some()
        {
            return Err(config(
                "a `good` leaf cannot carry aggregator fields".into(),
            ));
        }
        return index
            .get(good)
            .map(|&i| NestTree::Leaf(i))
            .ok_or_else(|| config(format!("unknown good `{good}`")));
    }
    let kind = spec
        .aggregator
        .ok_or_else(|| config("expected either `good` or `aggregator`".into()))?;
    let children = spec
        .children
        .as_ref()
        .filter(|c| !c.is_empty())
        .ok_or_else(|| config("aggregator needs a nonempty `children` list".into()))?;
    let weights = spec
        .weights
        .clone()
        .map(WeightVector::new)
        .transpose()
        .map_err(|e| config(format!("weights: {e}")))?;
    let exponent = match kind {
        AggregatorKind::Ces => {
            let r = spec.r.ok_or_else(|| config("`ces` needs `r`".into()))?;
            Exponent::finite(r).map_err(|e| config(format!("r: {e}")))?
        }
        AggregatorKind::CobbDouglas => {
            if spec.r.is_some() {
                return Err(config("`cobb_douglas` does not take `r`".into()));
            }
            if weights.is_none() {
                return Err(config("`cobb_douglas` needs `weights`".into()));
            }
            Exponent::CobbDouglas
        }
    };
    if let Some(w) = &weights {
        if w.len() != children.len() {
            return Err(config(format!(
                "{} weights for {} children",
                w.len(),
                children.len()
            )));
        }
    }
    let children = children
        .iter()
        .enumerate()
        .map(|(i, c)| convert_tree(c, &format!("{at}.children[{i}]"), index))
        .collect::<Result<Vec<_>>>()?;
    Ok(NestTree::node(exponent, weights, children))
}

/// A validated scenario file.
#[derive(Debug, Clone)]
pub struct Model {
    pub goods: Vec<GoodSpec>,
    index: HashMap<String, usize>,
    pub tree: ValidatedTree,
    pub scenarios: Vec<Scenario>,
}

impl Model {
    pub fn good_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn scenario(&self, name: &str) -> Result<&Scenario> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Config(format!("no scenario named `{name}`")))
    }

    fn ordered(&self, map: &BTreeMap<String, f64>) -> Vec<f64> {
        self.goods.iter().map(|g| map[&g.id]).collect()
    }

    pub fn prices(&self, scenario: &Scenario) -> Result<PositiveVector> {
        PositiveVector::prices(self.ordered(&scenario.prices))
    }

    pub fn quantities(&self, scenario: &Scenario) -> Result<PositiveVector> {
        let q = scenario.quantities.as_ref().ok_or_else(|| {
            Error::Config(format!("scenario `{}` has no `quantities`", scenario.name))
        })?;
        PositiveVector::quantities(self.ordered(q))
    }

    /// Per-good values keyed by good id.
    pub fn by_good(&self, values: &[f64]) -> BTreeMap<String, f64> {
        self.goods
            .iter()
            .zip(values)
            .map(|(g, v)| (g.id.clone(), *v))
            .collect()
    }
}
