//! Modality-gap RMSE and cumulative match scores.

use std::fmt::Write as _;

use crate::classify::RankedMatches;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::modality::{to_new_dimension, OffsetI, SourceKind};

/// Root mean square pixel difference of two equally sized images.
pub fn rmse(f: &GrayImage, s: &GrayImage) -> Result<f64> {
    if f.dims() != s.dims() {
        return Err(Error::InconsistentDims(format!(
            "{:?} vs {:?}",
            f.dims(),
            s.dims()
        )));
    }
    let sum: f64 = f
        .pixels()
        .iter()
        .zip(s.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sum / f.pixels().len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalityRow {
    pub pair: String,
    pub original: f64,
    pub new_dimension: f64,
}

/// RMSE per photo/sketch pair before and after the new-dimension transform.
pub fn modality_report(
    pairs: &[(String, GrayImage, GrayImage)],
    offset: OffsetI,
    levels: usize,
) -> Result<Vec<ModalityRow>> {
    pairs
        .iter()
        .map(|(name, photo, sketch)| {
            let p = to_new_dimension(photo, SourceKind::Photo, None, levels)?;
            let s = to_new_dimension(sketch, SourceKind::Sketch, Some(offset), levels)?;
            Ok(ModalityRow {
                pair: name.clone(),
                original: rmse(photo, sketch)?,
                new_dimension: rmse(&p.img, &s.img)?,
            })
        })
        .collect()
}

pub fn modality_table_text(rows: &[ModalityRow]) -> String {
    let width = rows.iter().map(|r| r.pair.len()).max().unwrap_or(0).max(4);
    let mut out = format!(
        "{:<width$}  {:>14}  {:>14}\n",
        "pair", "rmse_original", "rmse_new_dim"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>14.4}  {:>14.4}",
            r.pair, r.original, r.new_dimension
        );
    }
    out
}

pub fn modality_table_csv(rows: &[ModalityRow]) -> String {
    let mut out = String::from("pair,rmse_original,rmse_new_dimension\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.6},{:.6}", r.pair, r.original, r.new_dimension);
    }
    out
}

/// Fraction of probes whose true label is found within the first `r + 1` ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct CmcCurve {
    pub ranks: Vec<f64>,
    pub n_probes: usize,
}

impl CmcCurve {
    pub fn rank1(&self) -> f64 {
        self.ranks.first().copied().unwrap_or(0.0)
    }
}

/// Cumulative match curve up to `max_rank`. Positions past `max_rank` count as misses.
pub fn cmc(rank_lists: &[(String, RankedMatches)], max_rank: usize) -> Result<CmcCurve> {
    if max_rank == 0 {
        return Err(Error::InvalidParameter(
            "max_rank must be at least 1".into(),
        ));
    }
    if rank_lists.is_empty() {
        return Err(Error::EmptySet("probe"));
    }
    let mut hits = vec![0usize; max_rank];
    for (truth, ranked) in rank_lists {
        let pos = ranked
            .position(truth)
            .ok_or_else(|| Error::LabelNotRanked(truth.clone()))?;
        if pos <= max_rank {
            hits[pos - 1] += 1;
        }
    }
    let n = rank_lists.len();
    let mut acc = 0;
    let ranks = hits
        .into_iter()
        .map(|h| {
            acc += h;
            acc as f64 / n as f64
        })
        .collect();
    Ok(CmcCurve { ranks, n_probes: n })
}

/// Rows of percentages laid out with one column per rank.
pub fn cmc_table_text(rows: &[(&str, &CmcCurve)]) -> String {
    let max_rank = rows.iter().map(|(_, c)| c.ranks.len()).max().unwrap_or(0);
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(4);
    let mut out = format!("{:<width$}", "rank");
    for r in 1..=max_rank {
        let _ = write!(out, "  {r:>6}");
    }
    out.push('\n');
    for (name, curve) in rows {
        let _ = write!(out, "{name:<width$}");
        for v in &curve.ranks {
            let _ = write!(out, "  {:>6.1}", v * 100.0);
        }
        out.push('\n');
    }
    out
}

pub fn cmc_table_csv(rows: &[(&str, &CmcCurve)]) -> String {
    let max_rank = rows.iter().map(|(_, c)| c.ranks.len()).max().unwrap_or(0);
    let mut out = String::from("method");
    for r in 1..=max_rank {
        let _ = write!(out, ",rank{r}");
    }
    out.push('\n');
    for (name, curve) in rows {
        out.push_str(name);
        for v in &curve.ranks {
            let _ = write!(out, ",{:.4}", v * 100.0);
        }
        out.push('\n');
    }
    out
}
