//! TOML map specification files.
//!
//! ```toml
//! domain = ["0", "1"]
//!
//! [[pieces]]
//! left = "0"
//! right = "1/2"
//! left_closed = true
//! right_closed = true
//!
//! [[branches]]
//! kind = "affine"
//! slope = "2"
//! intercept = "0"
//! ```
//!
//! Table branches use `kind = "table"` with `grid = [["x", "y"], …]`,
//! `direction = "increasing" | "decreasing"` and `interpolation = "linear"`.
//! Numbers are strings so rationals survive unchanged.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Branch, Interpolation, MapError, MonotoneTable, Monotonicity, PmMap};
use crate::interval::Interval;
use crate::scalar::{ParseScalarError, Scalar};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{field}: {source}")]
    Number {
        field: String,
        #[source]
        source: ParseScalarError,
    },
    #[error("{field}: {reason}")]
    Field { field: String, reason: String },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("cannot serialise map: {0}")]
    Serialize(#[from] toml::ser::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub domain: [String; 2],
    pub pieces: Vec<PieceSpec>,
    pub branches: Vec<BranchSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub left: String,
    pub right: String,
    pub left_closed: bool,
    pub right_closed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BranchSpec {
    Affine {
        slope: String,
        intercept: String,
    },
    Table {
        grid: Vec<[String; 2]>,
        direction: DirectionSpec,
        #[serde(default)]
        interpolation: InterpolationSpec,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionSpec {
    Increasing,
    Decreasing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpolationSpec {
    #[default]
    Linear,
}

fn num<S: Scalar>(field: impl FnOnce() -> String, text: &str) -> Result<S, SpecError> {
    S::parse(text).map_err(|source| SpecError::Number {
        field: field(),
        source,
    })
}

impl MapSpec {
    pub fn from_toml(text: &str) -> Result<Self, SpecError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String, SpecError> {
        Ok(toml::to_string(self)?)
    }

    pub fn build<S: Scalar>(&self) -> Result<PmMap<S>, SpecError> {
        let a = num(|| "domain[0]".into(), &self.domain[0])?;
        let b = num(|| "domain[1]".into(), &self.domain[1])?;
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            let left: S = num(|| format!("pieces[{i}].left"), &p.left)?;
            let right: S = num(|| format!("pieces[{i}].right"), &p.right)?;
            let iv = Interval::new(left, right, p.left_closed, p.right_closed).ok_or_else(|| {
                SpecError::Field {
                    field: format!("pieces[{i}]"),
                    reason: "empty interval".into(),
                }
            })?;
            pieces.push(iv);
        }
        let mut branches = Vec::with_capacity(self.branches.len());
        for (i, b) in self.branches.iter().enumerate() {
            let branch = match b {
                BranchSpec::Affine { slope, intercept } => Branch::affine(
                    num(|| format!("branches[{i}].slope"), slope)?,
                    num(|| format!("branches[{i}].intercept"), intercept)?,
                ),
                BranchSpec::Table { grid, direction, .. } => {
                    let mut points = Vec::with_capacity(grid.len());
                    for (j, [x, y]) in grid.iter().enumerate() {
                        points.push((
                            num(|| format!("branches[{i}].grid[{j}][0]"), x)?,
                            num(|| format!("branches[{i}].grid[{j}][1]"), y)?,
                        ));
                    }
                    let direction = match direction {
                        DirectionSpec::Increasing => Monotonicity::Increasing,
                        DirectionSpec::Decreasing => Monotonicity::Decreasing,
                    };
                    let table = MonotoneTable::new(points, direction).map_err(|reason| SpecError::Field {
                        field: format!("branches[{i}].grid"),
                        reason,
                    })?;
                    Branch::Table(table)
                }
            };
            branches.push(branch);
        }
        Ok(PmMap::new((a, b), pieces, branches)?)
    }
}

impl<S: Scalar> PmMap<S> {
    pub fn to_spec(&self) -> MapSpec {
        let domain = [self.domain().left.to_text(), self.domain().right.to_text()];
        let pieces = self
            .pieces()
            .iter()
            .map(|p| PieceSpec {
                left: p.interval.left.to_text(),
                right: p.interval.right.to_text(),
                left_closed: p.interval.left_closed,
                right_closed: p.interval.right_closed,
            })
            .collect();
        let branches = self
            .branches()
            .iter()
            .map(|b| match b {
                Branch::Affine(a) => BranchSpec::Affine {
                    slope: a.slope.to_text(),
                    intercept: a.intercept.to_text(),
                },
                Branch::Table(t) => BranchSpec::Table {
                    grid: t.points().map(|(x, y)| [x.to_text(), y.to_text()]).collect(),
                    direction: match t.direction() {
                        Monotonicity::Increasing => DirectionSpec::Increasing,
                        Monotonicity::Decreasing => DirectionSpec::Decreasing,
                    },
                    interpolation: match t.interpolation() {
                        Interpolation::Linear => InterpolationSpec::Linear,
                    },
                },
            })
            .collect();
        MapSpec {
            domain,
            pieces,
            branches,
        }
    }
}

pub fn parse_map<S: Scalar>(text: &str) -> Result<PmMap<S>, SpecError> {
    MapSpec::from_toml(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_model::catalog;
    use crate::Rat;

    const TENT: &str = r#"
domain = ["0", "1"]

[[pieces]]
left = "0"
right = "2/4"
left_closed = true
right_closed = true

[[pieces]]
left = "0.5"
right = "1"
left_closed = false
right_closed = true

[[branches]]
kind = "affine"
slope = "2"
intercept = "0"

[[branches]]
kind = "affine"
slope = "-2"
intercept = "2"
"#;

    #[test]
    fn parses_to_the_catalog_tent() {
        let m: PmMap<Rat> = parse_map(TENT).unwrap();
        assert_eq!(m, catalog::tent());
    }

    #[test]
    fn serialisation_is_lowest_terms_and_round_trips() {
        let m: PmMap<Rat> = parse_map(TENT).unwrap();
        let spec = m.to_spec();
        assert_eq!(spec.pieces[0].right, "1/2");
        assert_eq!(spec.pieces[1].left, "1/2");
        let text = spec.to_toml().unwrap();
        let again = MapSpec::from_toml(&text).unwrap();
        assert_eq!(again, spec);
        assert_eq!(again.build::<Rat>().unwrap(), m);
    }

    #[test]
    fn table_branch_round_trip() {
        let text = r#"
domain = ["0", "1"]
[[pieces]]
left = "0"
right = "1"
left_closed = true
right_closed = true
[[branches]]
kind = "table"
grid = [["0", "0"], ["1/3", "2/3"], ["1", "1"]]
direction = "increasing"
"#;
        let m: PmMap<Rat> = parse_map(text).unwrap();
        assert_eq!(m.eval(&Rat::from_ratio(1, 6)).unwrap(), Rat::from_ratio(1, 3));
        let back = m.to_spec().to_toml().unwrap();
        assert_eq!(parse_map::<Rat>(&back).unwrap(), m);
    }

    #[test]
    fn field_errors_name_the_field() {
        let bad = TENT.replace("slope = \"-2\"", "slope = \"x/2\"");
        let err = parse_map::<Rat>(&bad).unwrap_err();
        assert!(err.to_string().starts_with("branches[1].slope"), "{err}");
        let syntax = parse_map::<Rat>("domain = [\"0\"").unwrap_err();
        assert!(matches!(syntax, SpecError::Syntax(_)));
        let gap = TENT.replace("right = \"2/4\"", "right = \"1/4\"");
        let err = parse_map::<Rat>(&gap).unwrap_err();
        assert!(err.to_string().contains("gap between 1/4 and 1/2"), "{err}");
    }

    #[test]
    fn float_maps_parse_from_the_same_text() {
        let m: PmMap<f64> = parse_map(TENT).unwrap();
        assert_eq!(m.eval(&0.25).unwrap(), 0.5);
    }
}
