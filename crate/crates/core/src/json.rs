//! JSON documents describing tree systems.
//!
//! ```json
//! {"kind": "eventually_periodic", "prefix": [{"classes": [{"children": [0, 1]}]}], "cycle": [...]}
//! {"kind": "explicit", "levels": [...]}
//! {"kind": "sft", "matrix": [[1, 1], [1, 0]]}
//! {"kind": "cfrac", "prefix": [3], "cycle": [1]}
//! {"kind": "builtin", "name": "fibonacci"}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::tree::{LevelDescriptor, TreeSystem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeSpec {
    EventuallyPeriodic {
        #[serde(default)]
        prefix: Vec<LevelDescriptor>,
        cycle: Vec<LevelDescriptor>,
    },
    Explicit {
        #[serde(alias = "prefix")]
        levels: Vec<LevelDescriptor>,
    },
    Sft {
        matrix: Vec<Vec<u32>>,
    },
    Cfrac {
        #[serde(default)]
        prefix: Vec<u64>,
        cycle: Vec<u64>,
    },
    Builtin {
        name: String,
    },
}

impl TreeSpec {
    pub fn build(&self) -> Result<TreeSystem> {
        match self {
            TreeSpec::EventuallyPeriodic { prefix, cycle } => TreeSystem::eventually_periodic(prefix.clone(), cycle.clone()),
            TreeSpec::Explicit { levels } => TreeSystem::explicit(levels.clone()),
            TreeSpec::Sft { matrix } => TreeSystem::from_sft(matrix),
            TreeSpec::Cfrac { prefix, cycle } => TreeSystem::from_continued_fraction(prefix, cycle),
            TreeSpec::Builtin { name } => TreeSystem::builtin(name),
        }
    }

    /// Like [`TreeSpec::build`], but level descriptions are taken as given so
    /// that [`TreeSystem::validate`] can report every problem.
    pub fn build_unchecked(&self) -> Result<TreeSystem> {
        match self {
            TreeSpec::EventuallyPeriodic { prefix, cycle } => {
                Ok(TreeSystem::EventuallyPeriodic { prefix: prefix.clone(), cycle: cycle.clone() })
            }
            TreeSpec::Explicit { levels } => Ok(TreeSystem::Explicit(levels.clone())),
            _ => self.build(),
        }
    }

    pub fn from_value(v: &Value) -> Result<TreeSpec> {
        serde_json::from_value(v.clone()).map_err(|e| Error::Malformed(format!("invalid tree system: {e}")))
    }

    /// Level-by-level description of a tree; procedural systems have none.
    pub fn describe(ts: &TreeSystem) -> Option<TreeSpec> {
        match ts {
            TreeSystem::Explicit(levels) => Some(TreeSpec::Explicit { levels: levels.clone() }),
            TreeSystem::EventuallyPeriodic { prefix, cycle } => {
                Some(TreeSpec::EventuallyPeriodic { prefix: prefix.clone(), cycle: cycle.clone() })
            }
            TreeSystem::Procedural(_) => None,
        }
    }
}

pub fn tree_from_value(v: &Value) -> Result<TreeSystem> {
    TreeSpec::from_value(v)?.build()
}

pub fn tree_from_json(text: &str) -> Result<TreeSystem> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("invalid JSON: {e}")))?;
    tree_from_value(&v)
}

pub fn tree_to_json(ts: &TreeSystem) -> Result<Value> {
    let spec = TreeSpec::describe(ts)
        .ok_or_else(|| Error::Malformed("procedural systems have no finite description; unfold first".into()))?;
    Ok(serde_json::to_value(spec).expect("tree specs serialize"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for ts in [TreeSystem::fibonacci(), TreeSystem::sturmian(), TreeSystem::fibonacci().unfold(3).unwrap()] {
            let v = tree_to_json(&ts).unwrap();
            assert_eq!(tree_from_value(&v).unwrap(), ts);
        }
    }

    #[test]
    fn builders() {
        let sft = tree_from_json(r#"{"kind":"sft","matrix":[[1,1],[1,0]]}"#).unwrap();
        assert!(sft.is_eventually_periodic());
        let cf = tree_from_json(r#"{"kind":"cfrac","prefix":[3],"cycle":[1]}"#).unwrap();
        assert_eq!(cf, TreeSystem::from_continued_fraction(&[3], &[1]).unwrap());
        let b = tree_from_json(r#"{"kind":"builtin","name":"regular(2)"}"#).unwrap();
        assert_eq!(b, TreeSystem::regular(2));
        let golden = tree_from_json(
            r#"{"kind":"eventually_periodic","prefix":[{"classes":[{"children":[0,1]}]}],"cycle":[{"classes":[{"children":[0,1]},{"children":[0]}]}]}"#,
        );
        assert!(golden.is_ok());
    }

    #[test]
    fn malformed_input_is_an_error() {
        for text in [
            "not json",
            r#"{"kind":"nope"}"#,
            r#"{"kind":"sft","matrix":[[1,1],[1]]}"#,
            r#"{"kind":"eventually_periodic","cycle":[{"classes":[{"children":[5]}]}]}"#,
            r#"{"kind":"cfrac","cycle":[]}"#,
        ] {
            assert!(tree_from_json(text).is_err(), "{text}");
        }
    }
}
