use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{pearson, CorrelationCell, PairedSeries, StatsError};
use crate::corpus::{Dimension, DimensionMeans};
use crate::lexical::Metric;
use crate::pool::bounded_map;

/// Which population of simplifications the table describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    System,
    Human,
}

impl Split {
    pub fn title(self) -> &'static str {
        match self {
            Split::System => "System-generated",
            Split::Human => "Human-written",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::System => "system",
            Split::Human => "human",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "system" => Ok(Split::System),
            "human" => Ok(Split::Human),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// Per-instance metric values: instance id → metric → raw value.
pub type ScoreTable = BTreeMap<String, BTreeMap<Metric, f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum RowLabel {
    Dimension(Dimension),
    Metric(Metric),
}

impl RowLabel {
    pub fn display_name(self) -> &'static str {
        match self {
            RowLabel::Dimension(d) => d.display_name(),
            RowLabel::Metric(m) => m.display_name(),
        }
    }
}

/// One (row, column) entry. `cell` is `None` when the pairs were too few or
/// degenerate; `note` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub column: Dimension,
    pub n: usize,
    pub cell: Option<CorrelationCell>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: RowLabel,
    /// `None` for dimension rows.
    pub ref_less: Option<bool>,
    /// Displayed values are negated (lower-is-better metrics).
    pub negate_for_display: bool,
    /// Cells in column order; a dimension row has no cell for itself.
    pub cells: Vec<TableCell>,
}

impl TableRow {
    pub fn cell(&self, column: Dimension) -> Option<&TableCell> {
        self.cells.iter().find(|c| c.column == column)
    }

    /// r as shown in a table: sign-flipped for lower-is-better rows.
    pub fn display_r(&self, column: Dimension) -> Option<f64> {
        let r = self.cell(column)?.cell?.r;
        Some(if self.negate_for_display { -r } else { r })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub split: Split,
    pub columns: Vec<Dimension>,
    pub rows: Vec<TableRow>,
}

impl CorrelationTable {
    pub fn row(&self, label: RowLabel) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

#[derive(Clone, Copy)]
enum Axis {
    Dimension(Dimension),
    Metric(Metric),
}

fn cell_for(
    means: &[&DimensionMeans],
    scores: &ScoreTable,
    x: Axis,
    column: Dimension,
) -> TableCell {
    let mut pairs = Vec::new();
    for m in means {
        let Some(y) = m.get(column) else { continue };
        let xv = match x {
            Axis::Dimension(d) => m.get(d),
            Axis::Metric(metric) => scores
                .get(&m.instance_id)
                .and_then(|s| s.get(&metric))
                .copied(),
        };
        if let Some(xv) = xv {
            pairs.push((xv, y));
        }
    }
    let label = match x {
        Axis::Dimension(d) => d.as_str().to_string(),
        Axis::Metric(metric) => metric.as_str().to_string(),
    };
    let n = pairs.len();
    match pearson(&PairedSeries::new(label, column.as_str(), pairs)) {
        Ok(cell) => TableCell {
            column,
            n,
            cell: Some(cell),
            note: None,
        },
        Err(e) => TableCell {
            column,
            n,
            cell: None,
            note: Some(e.to_string()),
        },
    }
}

/// Correlates each metric and each dimension against every other dimension.
///
/// Pairs are joined on instance id; a missing score or mean only shrinks the
/// affected cell. Lower-is-better metrics are correlated on raw values and
/// flagged for display negation. Fails only if no cell is computable.
pub fn build_table(
    means: &[DimensionMeans],
    scores: &ScoreTable,
    split: Split,
) -> Result<CorrelationTable, StatsError> {
    let mut sorted: Vec<&DimensionMeans> = means.iter().collect();
    sorted.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));

    let columns = Dimension::ALL.to_vec();
    let mut metrics: Vec<Metric> = scores.values().flat_map(|m| m.keys().copied()).collect();
    metrics.sort();
    metrics.dedup();

    // inter-dimension cells, computed once per unordered pair
    let mut dim_pairs = Vec::new();
    for (i, &a) in columns.iter().enumerate() {
        for &b in &columns[i + 1..] {
            dim_pairs.push((a, b));
        }
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let dim_cells = bounded_map(&dim_pairs, workers, |_, &(a, b)| {
        cell_for(&sorted, scores, Axis::Dimension(a), b)
    });
    let pair_cell: BTreeMap<(Dimension, Dimension), &TableCell> =
        dim_pairs.iter().copied().zip(dim_cells.iter()).collect();

    let mut rows = Vec::new();
    for &d in &columns {
        let cells = columns
            .iter()
            .filter(|&&c| c != d)
            .map(|&c| {
                let key = if d < c { (d, c) } else { (c, d) };
                TableCell {
                    column: c,
                    ..pair_cell[&key].clone()
                }
            })
            .collect();
        rows.push(TableRow {
            label: RowLabel::Dimension(d),
            ref_less: None,
            negate_for_display: false,
            cells,
        });
    }

    let metric_jobs: Vec<(Metric, Dimension)> = metrics
        .iter()
        .flat_map(|&m| columns.iter().map(move |&c| (m, c)))
        .collect();
    let metric_cells = bounded_map(&metric_jobs, workers, |_, &(m, c)| {
        cell_for(&sorted, scores, Axis::Metric(m), c)
    });
    let mut metric_cells = metric_cells.into_iter();
    for &m in &metrics {
        rows.push(TableRow {
            label: RowLabel::Metric(m),
            ref_less: Some(m.reference_less()),
            negate_for_display: !m.higher_is_better(),
            cells: metric_cells.by_ref().take(columns.len()).collect(),
        });
    }

    if rows.iter().flat_map(|r| &r.cells).all(|c| c.cell.is_none()) {
        return Err(StatsError::NoCells);
    }
    Ok(CorrelationTable {
        split,
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DimensionCounts;

    fn means(id: &str, f: f64, s: f64, m: f64) -> DimensionMeans {
        DimensionMeans {
            instance_id: id.into(),
            fluency: Some(f),
            simplicity: Some(s),
            meaning: Some(m),
            counts: DimensionCounts {
                fluency: 1,
                simplicity: 1,
                meaning: 1,
            },
        }
    }

    fn fixture() -> (Vec<DimensionMeans>, ScoreTable) {
        let data = [
            ("a", 1.0, 2.0, 1.5),
            ("b", 2.0, 2.5, 3.0),
            ("c", 3.0, 2.0, 2.0),
            ("d", 4.0, 4.5, 5.0),
            ("e", 2.5, 3.0, 1.0),
        ];
        let m = data
            .iter()
            .map(|&(id, f, s, mm)| means(id, f, s, mm))
            .collect();
        let scores = data
            .iter()
            .map(|&(id, f, s, _)| {
                (
                    id.to_string(),
                    BTreeMap::from([(Metric::Bleu, f), (Metric::Fkgl, 10.0 - s)]),
                )
            })
            .collect();
        (m, scores)
    }

    #[test]
    fn metric_equal_to_fluency_gives_r_one() {
        let (m, scores) = fixture();
        let t = build_table(&m, &scores, Split::System).unwrap();
        let bleu = t.row(RowLabel::Metric(Metric::Bleu)).unwrap();
        assert!((bleu.cell(Dimension::Fluency).unwrap().cell.unwrap().r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fkgl_is_negated_only_for_display() {
        let (m, scores) = fixture();
        let t = build_table(&m, &scores, Split::System).unwrap();
        let fkgl = t.row(RowLabel::Metric(Metric::Fkgl)).unwrap();
        let raw = fkgl.cell(Dimension::Simplicity).unwrap().cell.unwrap().r;
        assert!((raw + 1.0).abs() < 1e-12);
        assert!((fkgl.display_r(Dimension::Simplicity).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(fkgl.ref_less, Some(true));
    }

    #[test]
    fn inter_dimension_cells_are_symmetric_and_diagonal_absent() {
        let (m, scores) = fixture();
        let t = build_table(&m, &scores, Split::Human).unwrap();
        let f = t.row(RowLabel::Dimension(Dimension::Fluency)).unwrap();
        let s = t.row(RowLabel::Dimension(Dimension::Simplicity)).unwrap();
        assert_eq!(
            f.cell(Dimension::Simplicity).unwrap().cell,
            s.cell(Dimension::Fluency).unwrap().cell
        );
        assert!(f.cell(Dimension::Fluency).is_none());
        assert_eq!(f.cells.len(), 2);
    }

    #[test]
    fn order_independent() {
        let (mut m, scores) = fixture();
        let a = build_table(&m, &scores, Split::System).unwrap();
        m.reverse();
        m.swap(0, 2);
        let b = build_table(&m, &scores, Split::System).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_data_shrinks_cells() {
        let (mut m, mut scores) = fixture();
        m[0].meaning = None;
        scores.get_mut("b").unwrap().remove(&Metric::Bleu);
        let t = build_table(&m, &scores, Split::System).unwrap();
        let bleu = t.row(RowLabel::Metric(Metric::Bleu)).unwrap();
        assert_eq!(bleu.cell(Dimension::Fluency).unwrap().n, 4);
        assert_eq!(bleu.cell(Dimension::Meaning).unwrap().n, 3);
    }

    #[test]
    fn too_few_everywhere_is_an_error() {
        let (m, scores) = fixture();
        assert_eq!(
            build_table(&m[..2], &scores, Split::System),
            Err(StatsError::NoCells)
        );
    }
}
