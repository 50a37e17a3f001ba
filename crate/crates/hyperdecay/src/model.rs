//! JSON model files: either an explicit coefficient table or a preset name
//! with its physical parameters.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::presets;
use crate::symbol_core::{HomogeneousSymbol, OperatorStack};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub k: usize,
    pub alpha: Vec<u32>,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub order: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitModel {
    pub name: String,
    pub dim: usize,
    pub symbols: Vec<SymbolSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetModel {
    pub preset: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelFile {
    Preset(PresetModel),
    Explicit(ExplicitModel),
}

impl ModelFile {
    pub fn build(&self) -> Result<OperatorStack> {
        match self {
            ModelFile::Preset(p) => {
                let overrides: Vec<(&str, f64)> = p.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
                presets::build(&p.preset, &overrides)
            }
            ModelFile::Explicit(e) => {
                let symbols = e
                    .symbols
                    .iter()
                    .map(|s| {
                        let mut sym = HomogeneousSymbol::new(s.order, e.dim);
                        for t in &s.terms {
                            sym.add_term(t.k, &t.alpha, t.c)?;
                        }
                        Ok(sym)
                    })
                    .collect::<Result<Vec<_>>>()?;
                OperatorStack::new(e.name.clone(), symbols)
            }
        }
    }
}

pub fn parse_model(text: &str) -> Result<OperatorStack> {
    let m: ModelFile = serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))?;
    m.build()
}

/// Load a model file, or a bare preset name when `spec` names no existing file.
pub fn load_model(spec: &str) -> Result<OperatorStack> {
    let path = Path::new(spec);
    if !path.exists() && presets::is_preset(spec) {
        return presets::build(spec, &[]);
    }
    parse_model(&std::fs::read_to_string(path)?)
}

/// Explicit coefficient table of a stack, zero coefficients omitted except
/// the pure-time ones.
pub fn to_explicit(stack: &OperatorStack) -> ExplicitModel {
    ExplicitModel {
        name: stack.name().to_string(),
        dim: stack.dim(),
        symbols: stack
            .symbols()
            .iter()
            .map(|s| SymbolSpec {
                order: s.order(),
                terms: s
                    .terms()
                    .filter(|(k, _, c)| *c != 0.0 || *k == s.order())
                    .map(|(k, a, c)| TermSpec {
                        k,
                        alpha: a.to_vec(),
                        c,
                    })
                    .collect(),
            })
            .collect(),
    }
}
