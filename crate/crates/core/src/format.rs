//! Instance files.
//!
//! TOML, with every number written as a string (`"3"`, `"0.125"`, `"5/24"`)
//! so that exact rationals survive a round trip:
//!
//! ```toml
//! format_version = 1
//! n = 2
//! costs = ["1", "1/5"]
//!
//! [reward]
//! kind = "additive"
//! values = ["2", "1"]
//! ```
//!
//! Reward kinds: `additive` (`values`), `xos-clauses` (`clauses`), `coverage`
//! (`sets`, `weights`), `symmetric-table` (`table`), `bumped-symmetric`
//! (`table` plus a `[reward.bump]` table with `set` and `amount`) and `table`
//! (`values`, indexed by bitmask).

use serde::{Deserialize, Serialize};

use crate::agents::AgentSet;
use crate::contract::{Instance, Metadata};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::setfn::RewardFunction;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: u32,
    n: usize,
    costs: Vec<String>,
    reward: RewardDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<MetadataDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RewardDoc {
    Additive {
        values: Vec<String>,
    },
    XosClauses {
        clauses: Vec<Vec<String>>,
    },
    Coverage {
        sets: Vec<Vec<usize>>,
        weights: Vec<String>,
    },
    SymmetricTable {
        table: Vec<String>,
    },
    BumpedSymmetric {
        table: Vec<String>,
        bump: BumpDoc,
    },
    Table {
        values: Vec<String>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BumpDoc {
    set: Vec<usize>,
    amount: String,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct MetadataDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_star: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

fn numbers(loc: &str, xs: &[String]) -> Result<Vec<Rational>> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            parse_rational(x).map_err(|e| Error::parse(format!("{loc}[{i}]"), e.to_string()))
        })
        .collect()
}

fn strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

fn expect_len(loc: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::parse(
            loc,
            format!("length mismatch: {got} entries, expected {want}"),
        ))
    }
}

/// Parses an instance file.
pub fn parse_instance(text: &str) -> Result<Instance<Rational>> {
    let doc: InstanceFile = toml::from_str(text).map_err(|e| {
        let loc = e
            .span()
            .map(|s| {
                let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
                format!("line {line}")
            })
            .unwrap_or_else(|| "document".into());
        Error::parse(loc, e.message().to_string())
    })?;
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::parse(
            "format_version",
            format!("unsupported version {}, expected {FORMAT_VERSION}", doc.format_version),
        ));
    }
    let n = doc.n;
    expect_len("costs", doc.costs.len(), n)?;
    let costs = numbers("costs", &doc.costs)?;

    let reward = match &doc.reward {
        RewardDoc::Additive { values } => {
            expect_len("reward.values", values.len(), n)?;
            RewardFunction::additive(numbers("reward.values", values)?)
        }
        RewardDoc::XosClauses { clauses } => {
            let parsed = clauses
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let loc = format!("reward.clauses[{k}]");
                    expect_len(&loc, c.len(), n)?;
                    numbers(&loc, c)
                })
                .collect::<Result<Vec<_>>>()?;
            RewardFunction::xos(n, parsed)
        }
        RewardDoc::Coverage { sets, weights } => {
            expect_len("reward.sets", sets.len(), n)?;
            RewardFunction::coverage(sets.clone(), numbers("reward.weights", weights)?)
        }
        RewardDoc::SymmetricTable { table } => {
            expect_len("reward.table", table.len(), n + 1)?;
            RewardFunction::symmetric(numbers("reward.table", table)?)
        }
        RewardDoc::BumpedSymmetric { table, bump } => {
            expect_len("reward.table", table.len(), n + 1)?;
            let set = AgentSet::from_indices(n, bump.set.iter().copied())
                .map_err(|e| Error::parse("reward.bump.set", e.to_string()))?;
            let amount = parse_rational(&bump.amount)
                .map_err(|e| Error::parse("reward.bump.amount", e.to_string()))?;
            RewardFunction::bumped(numbers("reward.table", table)?, set, amount)
        }
        RewardDoc::Table { values } => {
            if n > crate::setfn::TABLE_CAP {
                return Err(Error::parse(
                    "reward",
                    format!("explicit table limited to n ≤ {}", crate::setfn::TABLE_CAP),
                ));
            }
            expect_len("reward.values", values.len(), 1 << n)?;
            RewardFunction::table(n, numbers("reward.values", values)?)
        }
    }
    .map_err(|e| Error::parse("reward", e.to_string()))?;

    let inst = Instance::new(costs, reward).map_err(|e| Error::parse("costs", e.to_string()))?;
    let metadata = doc.metadata.map_or_else(Metadata::default, |m| Metadata {
        family: m.family,
        seed: m.seed,
        t_star: m.t_star,
        warnings: m.warnings,
    });
    Ok(inst.with_metadata(metadata))
}

/// Serializes an instance; numbers are written exactly.
pub fn write_instance(inst: &Instance<Rational>) -> String {
    let reward = match &inst.reward {
        RewardFunction::Additive { values } => RewardDoc::Additive {
            values: strings(values),
        },
        RewardFunction::XosClauses { clauses, .. } => RewardDoc::XosClauses {
            clauses: clauses.iter().map(|c| strings(c)).collect(),
        },
        RewardFunction::Coverage { covers, weights } => RewardDoc::Coverage {
            sets: covers.clone(),
            weights: strings(weights),
        },
        RewardFunction::SymmetricTable { table } => RewardDoc::SymmetricTable {
            table: strings(table),
        },
        RewardFunction::BumpedSymmetric {
            table,
            bump_set,
            bump,
        } => RewardDoc::BumpedSymmetric {
            table: strings(table),
            bump: BumpDoc {
                set: bump_set.to_vec(),
                amount: format_rational(bump),
            },
        },
        RewardFunction::Table { values, .. } => RewardDoc::Table {
            values: strings(values),
        },
    };
    let m = &inst.metadata;
    let metadata = (*m != Metadata::default()).then(|| MetadataDoc {
        family: m.family.clone(),
        seed: m.seed,
        t_star: m.t_star.clone(),
        warnings: m.warnings.clone(),
    });
    let doc = InstanceFile {
        format_version: FORMAT_VERSION,
        n: inst.n(),
        costs: strings(&inst.costs),
        reward,
        metadata,
    };
    toml::to_string(&doc).expect("instance documents always serialize")
}
