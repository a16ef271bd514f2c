//! JSON model documents.
//!
//! ```json
//! {
//!   "variables": [{"name": "X", "card": 2}, {"name": "Y", "card": 2}],
//!   "factorization": [["X"], ["Y"]],
//!   "transition": [
//!     {"child": "X", "parents": ["X", "Y"], "table": [[0.9, 0.1], [0.99, 0.01], [0.1, 0.9], [0.01, 0.99]]}
//!   ],
//!   "observations": [{"name": "Z", "card": 2, "parents": ["Y"], "table": [[0.8, 0.2], [0.2, 0.8]]}],
//!   "prior": {"type": "product", "tables": {"0": [0.5, 0.5], "1": [0.5, 0.5]}}
//! }
//! ```
//!
//! Transition parents are previous-slice state variables; observation parents
//! are current-slice state variables. Rows are ordered lexicographically over
//! the listed parents, last parent fastest.
//!
//! A single table is a smaller document:
//!
//! ```json
//! {
//!   "child": {"name": "X", "card": 2},
//!   "parents": [{"name": "X-", "card": 2}, {"name": "Y-", "card": 2}],
//!   "table": [[0.9, 0.1], [0.99, 0.01], [0.1, 0.9], [0.01, 0.99]]
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DbnModel, Factorization, Prior};
use crate::error::{Error, Result};
use crate::prob::{Categorical, Cpd, Scope, Variable, NORMALIZATION_TOL};

/// Row sums further than this from one are rejected.
const ROW_REJECT_TOL: f64 = 1e-6;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    variables: Vec<Variable>,
    factorization: Vec<Vec<String>>,
    transition: Vec<TransitionDoc>,
    #[serde(default)]
    observations: Vec<ObservationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prior: Option<PriorDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    child: String,
    parents: Vec<String>,
    table: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservationDoc {
    name: String,
    card: usize,
    parents: Vec<String>,
    table: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum PriorDoc {
    Product { tables: BTreeMap<String, Vec<f64>> },
    Joint { table: Vec<f64> },
}

/// Checks row sums, renormalizing small drift.
fn clean_rows(child: &str, rows: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    rows.into_iter()
        .enumerate()
        .map(|(r, mut row)| {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidModel(format!(
                    "row {r} of the table for `{child}` has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_REJECT_TOL {
                return Err(Error::RowSum {
                    child: child.to_string(),
                    row: r,
                    sum,
                });
            }
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                row.iter_mut().for_each(|v| *v /= sum);
            }
            Ok(row)
        })
        .collect()
}

fn clean_dist(what: &str, scope: Scope, values: Vec<f64>) -> Result<Categorical> {
    let mut rows = clean_rows(what, vec![values])?;
    Categorical::new(scope, rows.pop().expect("one row"))
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<DbnModel> {
    let doc: ModelDoc = serde_json::from_str(text)?;

    let state = Scope::new(
        doc.variables
            .iter()
            .map(|v| Variable::new(v.name.clone(), v.card))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let lookup = |name: &str| {
        state
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    };

    let factorization = Factorization::from_names(&state, &doc.factorization)?;

    let mut transitions: Vec<Option<Cpd>> = vec![None; state.len()];
    for t in doc.transition {
        let idx = state
            .position(&t.child)
            .ok_or_else(|| Error::UnknownVariable(t.child.clone()))?;
        if transitions[idx].is_some() {
            return Err(Error::InvalidModel(format!(
                "`{}` has more than one transition CPD",
                t.child
            )));
        }
        let parents = Scope::new(
            t.parents
                .iter()
                .map(|p| lookup(p).map(|v| v.previous()))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let child = Scope::new(vec![state[idx].clone()])?;
        let rows = clean_rows(&t.child, t.table)?;
        transitions[idx] = Some(Cpd::new(child, parents, rows)?);
    }
    let transitions = transitions
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            t.ok_or_else(|| {
                Error::InvalidModel(format!("no transition CPD for `{}`", state[i].name))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let observations = doc
        .observations
        .into_iter()
        .map(|o| {
            let child = Scope::new(vec![Variable::new(o.name.clone(), o.card)?])?;
            let parents = Scope::new(
                o.parents
                    .iter()
                    .map(|p| lookup(p))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            let rows = clean_rows(&o.name, o.table)?;
            Cpd::new(child, parents, rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let prior = match doc.prior {
        None => DbnModel::uniform_prior(&state, &factorization),
        Some(PriorDoc::Joint { table }) => Prior::Joint(clean_dist("prior", state.clone(), table)?),
        Some(PriorDoc::Product { tables }) => {
            let mut out = Vec::with_capacity(factorization.len());
            for i in 0..factorization.len() {
                let table = tables.get(&i.to_string()).ok_or_else(|| {
                    Error::InvalidModel(format!("prior table for factor {i} missing"))
                })?;
                out.push(clean_dist(
                    &format!("prior factor {i}"),
                    factorization.factor_scope(&state, i),
                    table.clone(),
                )?);
            }
            if tables.len() != factorization.len() {
                return Err(Error::InvalidModel(
                    "prior has tables for unknown factors".into(),
                ));
            }
            Prior::Product(out)
        }
    };

    DbnModel::new(state, transitions, observations, prior, factorization)
}

/// Serializes a model in the document format accepted by [`parse_model`].
pub fn to_json(model: &DbnModel) -> String {
    let state = model.state();
    let doc = ModelDoc {
        variables: state.to_vec(),
        factorization: model.factorization().names(state),
        transition: model
            .transitions()
            .iter()
            .map(|c| TransitionDoc {
                child: c.child()[0].name.clone(),
                parents: c
                    .parents()
                    .iter()
                    .map(|p| p.name.strip_suffix('-').unwrap_or(&p.name).to_string())
                    .collect(),
                table: c.rows().map(<[f64]>::to_vec).collect(),
            })
            .collect(),
        observations: model
            .observations()
            .iter()
            .map(|c| ObservationDoc {
                name: c.child()[0].name.clone(),
                card: c.child()[0].card,
                parents: c.parents().names().into_iter().map(String::from).collect(),
                table: c.rows().map(<[f64]>::to_vec).collect(),
            })
            .collect(),
        prior: Some(match model.prior() {
            Prior::Product(tables) => PriorDoc::Product {
                tables: tables
                    .iter()
                    .enumerate()
                    .map(|(i, t)| (i.to_string(), t.values().to_vec()))
                    .collect(),
            },
            Prior::Joint(t) => PriorDoc::Joint {
                table: t.values().to_vec(),
            },
        }),
    };
    serde_json::to_string_pretty(&doc).expect("model documents always serialize")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    child: Variable,
    parents: Vec<Variable>,
    table: Vec<Vec<f64>>,
}

/// Parses and validates a single-table document.
pub fn parse_table(text: &str) -> Result<Cpd> {
    let doc: TableDoc = serde_json::from_str(text)?;
    let child = Variable::new(doc.child.name, doc.child.card)?;
    let parents = Scope::new(
        doc.parents
            .into_iter()
            .map(|v| Variable::new(v.name, v.card))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let rows = clean_rows(&child.name, doc.table)?;
    Cpd::new(Scope::new(vec![child])?, parents, rows)
}

/// Serializes a single-child table in the format accepted by [`parse_table`].
pub fn table_to_json(cpd: &Cpd) -> Result<String> {
    if cpd.child().len() != 1 {
        return Err(Error::InvalidArgument("table documents have a single child".into()));
    }
    let doc = TableDoc {
        child: cpd.child()[0].clone(),
        parents: cpd.parents().to_vec(),
        table: cpd.rows().map(<[f64]>::to_vec).collect(),
    };
    Ok(serde_json::to_string_pretty(&doc).expect("table documents always serialize"))
}

/// A model or a single table.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Model(DbnModel),
    Table(Cpd),
}

/// Parses either document kind, telling them apart by their top-level keys.
pub fn parse_document(text: &str) -> Result<Document> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("variables").is_some() {
        parse_model(text).map(Document::Model)
    } else {
        parse_table(text).map(Document::Table)
    }
}
