//! Time-multiplexed read-out: measurement plans, least-squares decoding and
//! timer-frequency conversion.
//!
//! A measurement drives a subset of strips as the source electrode and
//! grounds the rest; every cell with one plate on each side of that partition
//! is read in parallel, so the measured value is a 0/1 combination of cell
//! capacitances. The plan's mandatory block holds s independent combinations
//! (one decode per frame is a matrix-vector product with the precomputed
//! pseudoinverse); extra rows make the least-squares decode more robust to
//! measurement noise.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{ElectrodeStrip, Layer, SensorCell};

#[derive(Debug, Error)]
pub enum ReadoutError {
    #[error("unknown strip id {0:?}")]
    UnknownStrip(String),
    #[error("source set is empty")]
    EmptySource,
    #[error("cell {0} references strip {1:?} which is not in the strip list")]
    CellStripMismatch(usize, String),
    #[error("mandatory block is rank deficient: rank {rank} of {needed}; a dependent row subset: {dependent:?}")]
    RankDeficient {
        rank: usize,
        needed: usize,
        dependent: Vec<String>,
    },
    #[error("pseudoinverse check failed: max |M+ M - I| = {0}")]
    PseudoinverseCheck(f64),
    #[error("dimension mismatch: plan expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("measurements contain non-finite values")]
    NonFiniteMeasurement,
    #[error("frequency must be strictly positive, got {0} Hz")]
    BadFrequency(f64),
    #[error("timer constants must be positive (R1 = {r1}, R2 = {r2})")]
    BadTimer { r1: f64, r2: f64 },
    #[error("parasitic capacitance must be non-negative, got {0}")]
    BadParasitic(f64),
    #[error("non-positive capacitance after parasitic subtraction ({0} F); check calibration")]
    Calibration(f64),
    #[error("noise sigma must be non-negative, got {0}")]
    BadNoise(f64),
    #[error("plan file: {0}")]
    PlanFormat(String),
    #[error("trace file: {0}")]
    Trace(#[from] crate::pipeline::FrameCsvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    /// Part of the full-rank block required to decode at all.
    Mandatory,
    /// Additional combination kept for least-squares robustness.
    Extra,
}

/// Whether a trace decoded against this plan carries dimensionless ratios
/// `C/C0` or absolute farads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TraceConvention {
    #[default]
    Ratios,
    Farads,
}

/// Families of extra measurement combinations appended after the mandatory
/// block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraPolicy {
    pub single_strip: bool,
    pub pairs_same_layer: bool,
}

impl ExtraPolicy {
    pub const NONE: Self = Self {
        single_strip: false,
        pairs_same_layer: false,
    };
    pub const SINGLE_STRIP: Self = Self {
        single_strip: true,
        pairs_same_layer: false,
    };
    pub const PAIRS_SAME_LAYER: Self = Self {
        single_strip: false,
        pairs_same_layer: true,
    };
    pub const SINGLE_PLUS_PAIRS: Self = Self {
        single_strip: true,
        pairs_same_layer: true,
    };

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "none" => Some(Self::NONE),
            "single" => Some(Self::SINGLE_STRIP),
            "pairs" => Some(Self::PAIRS_SAME_LAYER),
            "single+pairs" | "pairs+single" => Some(Self::SINGLE_PLUS_PAIRS),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match (self.single_strip, self.pairs_same_layer) {
            (false, false) => "none",
            (true, false) => "single",
            (false, true) => "pairs",
            (true, true) => "single+pairs",
        }
    }
}

/// One measurement combination: the strips driven as source and the cells it
/// reads.
#[derive(Debug, Clone)]
pub struct PlanRow {
    pub kind: RowKind,
    pub source: Vec<String>,
    pub values: DVector<f64>,
}

/// The measurement matrix `M = [mandatory; extra]` with its precomputed
/// pseudoinverse. Immutable once built; decoding is reentrant.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    matrix: DMatrix<f64>,
    row_kind: Vec<RowKind>,
    source_sets: Vec<Vec<String>>,
    pseudoinverse: DMatrix<f64>,
    convention: TraceConvention,
    layout_hash: Option<String>,
}

struct StripIndex<'a> {
    layer_of: BTreeMap<&'a str, Layer>,
}

impl<'a> StripIndex<'a> {
    fn new(strips: &'a [ElectrodeStrip]) -> Self {
        Self {
            layer_of: strips.iter().map(|s| (s.id.as_str(), s.layer)).collect(),
        }
    }

    fn check(&self, id: &str) -> Result<(), ReadoutError> {
        if self.layer_of.contains_key(id) {
            Ok(())
        } else {
            Err(ReadoutError::UnknownStrip(id.to_string()))
        }
    }
}

/// Cells read by a measurement that drives `source_strips` and grounds the
/// rest: exactly those whose two plates fall on opposite sides.
pub fn cells_for_combination(
    cells: &[SensorCell],
    strips: &[ElectrodeStrip],
    source_strips: &BTreeSet<String>,
) -> Result<BTreeSet<usize>, ReadoutError> {
    if source_strips.is_empty() {
        return Err(ReadoutError::EmptySource);
    }
    let index = StripIndex::new(strips);
    for id in source_strips {
        index.check(id)?;
    }
    let mut out = BTreeSet::new();
    for cell in cells {
        index
            .check(&cell.top_strip)
            .map_err(|_| ReadoutError::CellStripMismatch(cell.id, cell.top_strip.clone()))?;
        index
            .check(&cell.bottom_strip)
            .map_err(|_| ReadoutError::CellStripMismatch(cell.id, cell.bottom_strip.clone()))?;
        let top_src = source_strips.contains(&cell.top_strip);
        let bottom_src = source_strips.contains(&cell.bottom_strip);
        if top_src != bottom_src {
            out.insert(cell.id);
        }
    }
    Ok(out)
}

fn row_vector(cells: &[SensorCell], members: &BTreeSet<usize>) -> DVector<f64> {
    let mut v = DVector::zeros(cells.len());
    for &c in members {
        v[c] = 1.0;
    }
    v
}

/// Incremental rank tracking by (twice-applied) Gram-Schmidt.
struct RankTracker {
    basis: Vec<DVector<f64>>,
}

impl RankTracker {
    fn new() -> Self {
        Self { basis: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.basis.len()
    }

    fn try_add(&mut self, row: &DVector<f64>) -> bool {
        let norm = row.norm();
        if norm == 0.0 {
            return false;
        }
        let mut r = row.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let d = q.dot(&r);
                r.axpy(-d, q, 1.0);
            }
        }
        if r.norm() <= 1e-8 * norm {
            return false;
        }
        let n = r.norm();
        self.basis.push(r / n);
        true
    }
}

fn candidate_pairs(cells: &[SensorCell]) -> Vec<BTreeSet<String>> {
    let mut keys: Vec<(String, String)> = cells
        .iter()
        .map(|c| (c.top_strip.clone(), c.bottom_strip.clone()))
        .collect();
    keys.sort();
    keys.into_iter()
        .map(|(t, b)| BTreeSet::from([t, b]))
        .collect()
}

fn sorted_layer_ids(strips: &[ElectrodeStrip], layer: Layer) -> Vec<String> {
    let mut ids: Vec<String> = strips
        .iter()
        .filter(|s| s.layer == layer)
        .map(|s| s.id.clone())
        .collect();
    ids.sort();
    ids
}

/// Builds the mandatory full-rank block.
///
/// Candidates are taken in order: the pair combination of each cell's two
/// strips, then one-layer-plus-one-strip combinations, then single strips.
/// The first family alone is rank deficient on some small grids (summing the
/// two rows of one column equals summing those of another when a layer has
/// only two strips), so later families fill in until the block reaches rank
/// s with exactly s rows.
pub fn build_mandatory(
    cells: &[SensorCell],
    strips: &[ElectrodeStrip],
) -> Result<Vec<PlanRow>, ReadoutError> {
    let s = cells.len();
    let tops = sorted_layer_ids(strips, Layer::Top);
    let bottoms = sorted_layer_ids(strips, Layer::Bottom);

    let mut candidates: Vec<BTreeSet<String>> = candidate_pairs(cells);
    let n_pairs = candidates.len();
    for b in &bottoms {
        let mut set: BTreeSet<String> = tops.iter().cloned().collect();
        set.insert(b.clone());
        candidates.push(set);
    }
    for t in &tops {
        let mut set: BTreeSet<String> = bottoms.iter().cloned().collect();
        set.insert(t.clone());
        candidates.push(set);
    }
    for id in tops.iter().chain(bottoms.iter()) {
        candidates.push(BTreeSet::from([id.clone()]));
    }

    let mut tracker = RankTracker::new();
    let mut rows: Vec<PlanRow> = Vec::with_capacity(s);
    let mut rejected_pair: Option<(BTreeSet<String>, DVector<f64>)> = None;
    for (i, source) in candidates.iter().enumerate() {
        if tracker.rank() == s {
            break;
        }
        let members = cells_for_combination(cells, strips, source)?;
        let values = row_vector(cells, &members);
        if tracker.try_add(&values) {
            rows.push(PlanRow {
                kind: RowKind::Mandatory,
                source: source.iter().cloned().collect(),
                values,
            });
        } else if i < n_pairs && rejected_pair.is_none() {
            rejected_pair = Some((source.clone(), values));
        }
    }
    if tracker.rank() < s {
        let dependent = describe_dependent_subset(&rows, rejected_pair.as_ref());
        return Err(ReadoutError::RankDeficient {
            rank: tracker.rank(),
            needed: s,
            dependent,
        });
    }
    Ok(rows)
}

/// Names a small dependent subset for the rank-deficiency error: the first
/// rejected pair row together with the selected rows it decomposes over.
fn describe_dependent_subset(
    rows: &[PlanRow],
    rejected: Option<&(BTreeSet<String>, DVector<f64>)>,
) -> Vec<String> {
    let Some((source, values)) = rejected else {
        return rows.iter().map(|r| format!("{:?}", r.source)).collect();
    };
    let mut out = vec![format!("{:?}", source.iter().collect::<Vec<_>>())];
    if rows.is_empty() {
        return out;
    }
    let m = DMatrix::from_columns(&rows.iter().map(|r| r.values.clone()).collect::<Vec<_>>());
    if let Ok(svd) = m.clone().svd(true, true).pseudo_inverse(1e-10) {
        let coeffs = svd * values;
        for (i, c) in coeffs.iter().enumerate() {
            if c.abs() > 1e-6 {
                out.push(format!("{:?}", rows[i].source));
            }
        }
    }
    out
}

/// Appends extra measurement combinations per `policy`, deduplicated against
/// every row already present.
pub fn build_extra(
    cells: &[SensorCell],
    strips: &[ElectrodeStrip],
    existing: &[PlanRow],
    policy: ExtraPolicy,
) -> Result<Vec<PlanRow>, ReadoutError> {
    let mut sources: Vec<BTreeSet<String>> = Vec::new();
    let tops = sorted_layer_ids(strips, Layer::Top);
    let bottoms = sorted_layer_ids(strips, Layer::Bottom);
    if policy.single_strip {
        for id in tops.iter().chain(bottoms.iter()) {
            sources.push(BTreeSet::from([id.clone()]));
        }
    }
    if policy.pairs_same_layer {
        for ids in [&tops, &bottoms] {
            for i in 0..ids.len() {
                for j in i + 1..ids.len() {
                    sources.push(BTreeSet::from([ids[i].clone(), ids[j].clone()]));
                }
            }
        }
    }
    let mut seen: Vec<DVector<f64>> = existing.iter().map(|r| r.values.clone()).collect();
    let mut out = Vec::new();
    for source in sources {
        let members = cells_for_combination(cells, strips, &source)?;
        if members.is_empty() {
            continue;
        }
        let values = row_vector(cells, &members);
        if seen.iter().any(|v| v == &values) {
            continue;
        }
        seen.push(values.clone());
        out.push(PlanRow {
            kind: RowKind::Extra,
            source: source.into_iter().collect(),
            values,
        });
    }
    Ok(out)
}

impl MeasurementPlan {
    /// Assembles the plan and precomputes the pseudoinverse (SVD with cutoff
    /// `1e-10 * sigma_max`). Verifies the mandatory block is square and full
    /// rank and that `||M+ M - I||_inf < 1e-8`.
    pub fn assemble(
        cells: &[SensorCell],
        rows: Vec<PlanRow>,
        convention: TraceConvention,
        layout_hash: Option<String>,
    ) -> Result<Self, ReadoutError> {
        Self::assemble_with_count(cells.len(), rows, convention, layout_hash)
    }

    /// Mandatory block plus extras per `policy`, in one step.
    pub fn build(
        cells: &[SensorCell],
        strips: &[ElectrodeStrip],
        policy: ExtraPolicy,
        convention: TraceConvention,
        layout_hash: Option<String>,
    ) -> Result<Self, ReadoutError> {
        let mut rows = build_mandatory(cells, strips)?;
        let extra = build_extra(cells, strips, &rows, policy)?;
        rows.extend(extra);
        Self::assemble(cells, rows, convention, layout_hash)
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cells(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn pseudoinverse(&self) -> &DMatrix<f64> {
        &self.pseudoinverse
    }

    pub fn row_kind(&self) -> &[RowKind] {
        &self.row_kind
    }

    pub fn source_sets(&self) -> &[Vec<String>] {
        &self.source_sets
    }

    pub fn convention(&self) -> TraceConvention {
        self.convention
    }

    pub fn layout_hash(&self) -> Option<&str> {
        self.layout_hash.as_deref()
    }

    pub fn mandatory_count(&self) -> usize {
        self.row_kind
            .iter()
            .filter(|k| **k == RowKind::Mandatory)
            .count()
    }

    /// A plan restricted to its mandatory rows (for robustness comparisons).
    pub fn mandatory_only(&self, cells: &[SensorCell]) -> Result<Self, ReadoutError> {
        let rows: Vec<PlanRow> = (0..self.rows())
            .filter(|&i| self.row_kind[i] == RowKind::Mandatory)
            .map(|i| PlanRow {
                kind: RowKind::Mandatory,
                source: self.source_sets[i].clone(),
                values: self.matrix.row(i).transpose(),
            })
            .collect();
        Self::assemble(cells, rows, self.convention, self.layout_hash.clone())
    }

    pub fn save(&self, path: &Path) -> Result<(), ReadoutError> {
        let file = PlanFile {
            version: 1,
            cells: self.cells(),
            convention: self.convention,
            layout_hash: self.layout_hash.clone(),
            rows: (0..self.rows())
                .map(|i| PlanRowFile {
                    kind: self.row_kind[i],
                    source: self.source_sets[i].clone(),
                    ones: (0..self.cells())
                        .filter(|&j| self.matrix[(i, j)] != 0.0)
                        .collect(),
                })
                .collect(),
        };
        crate::pipeline::write_atomic(path, serde_json::to_string_pretty(&file)?.as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ReadoutError> {
        let file: PlanFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if file.version != 1 {
            return Err(ReadoutError::PlanFormat(format!(
                "unsupported plan version {}",
                file.version
            )));
        }
        let s = file.cells;
        let mut rows = Vec::with_capacity(file.rows.len());
        for row in file.rows {
            let mut values = DVector::zeros(s);
            for c in row.ones {
                if c >= s {
                    return Err(ReadoutError::PlanFormat(format!(
                        "row references cell {c} out of {s}"
                    )));
                }
                values[c] = 1.0;
            }
            rows.push(PlanRow {
                kind: row.kind,
                source: row.source,
                values,
            });
        }
        Self::assemble_with_count(s, rows, file.convention, file.layout_hash)
    }

    fn assemble_with_count(
        s: usize,
        rows: Vec<PlanRow>,
        convention: TraceConvention,
        layout_hash: Option<String>,
    ) -> Result<Self, ReadoutError> {
        let mandatory = rows.iter().filter(|r| r.kind == RowKind::Mandatory).count();
        if mandatory != s {
            return Err(ReadoutError::RankDeficient {
                rank: mandatory.min(s),
                needed: s,
                dependent: vec![format!("{mandatory} mandatory rows for {s} cells")],
            });
        }
        let matrix = DMatrix::from_rows(
            &rows
                .iter()
                .map(|r| r.values.transpose())
                .collect::<Vec<_>>(),
        );
        if matrix.ncols() != s {
            return Err(ReadoutError::PlanFormat("row width mismatch".into()));
        }
        let mand_rows: Vec<_> = rows
            .iter()
            .filter(|r| r.kind == RowKind::Mandatory)
            .map(|r| r.values.transpose())
            .collect();
        let mand = DMatrix::from_rows(&mand_rows);
        let sv = mand.clone().svd(false, false).singular_values;
        let (smin, smax) = (
            sv.iter().cloned().fold(f64::INFINITY, f64::min),
            sv.iter().cloned().fold(0.0f64, f64::max),
        );
        if !(smin > 1e-8 * smax) {
            return Err(ReadoutError::RankDeficient {
                rank: sv.iter().filter(|&&x| x > 1e-8 * smax).count(),
                needed: s,
                dependent: vec!["numerically dependent mandatory block".into()],
            });
        }
        let svd = matrix.clone().svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let pseudoinverse = svd
            .pseudo_inverse(cutoff)
            .map_err(|e| ReadoutError::PlanFormat(e.to_string()))?;
        let check = &pseudoinverse * &matrix;
        let mut worst = 0.0f64;
        for i in 0..s {
            for j in 0..s {
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((check[(i, j)] - expected).abs());
            }
        }
        if worst >= 1e-8 {
            return Err(ReadoutError::PseudoinverseCheck(worst));
        }
        Ok(Self {
            matrix,
            row_kind: rows.iter().map(|r| r.kind).collect(),
            source_sets: rows.into_iter().map(|r| r.source).collect(),
            pseudoinverse,
            convention,
            layout_hash,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PlanRowFile {
    kind: RowKind,
    source: Vec<String>,
    ones: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    version: u32,
    cells: usize,
    convention: TraceConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layout_hash: Option<String>,
    rows: Vec<PlanRowFile>,
}

/// `C_m = M C_c` plus optional additive Gaussian noise per measurement.
pub fn simulate_measurements<R: Rng + ?Sized>(
    plan: &MeasurementPlan,
    cell_values: &DVector<f64>,
    sigma: f64,
    rng: &mut R,
) -> Result<DVector<f64>, ReadoutError> {
    if cell_values.len() != plan.cells() {
        return Err(ReadoutError::DimensionMismatch {
            expected: plan.cells(),
            got: cell_values.len(),
        });
    }
    if sigma < 0.0 {
        return Err(ReadoutError::BadNoise(sigma));
    }
    let mut measured = plan.matrix() * cell_values;
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("valid sigma");
        for v in measured.iter_mut() {
            *v += normal.sample(rng);
        }
    }
    Ok(measured)
}

/// Decode result: per-cell capacitances and the least-squares residual.
#[derive(Debug, Clone)]
pub struct Decoded {
    pub cells: DVector<f64>,
    pub residual: f64,
}

/// Least-squares decode `C_c = M+ C_m` with the plan's precomputed
/// pseudoinverse.
pub fn decode(plan: &MeasurementPlan, measured: &DVector<f64>) -> Result<Decoded, ReadoutError> {
    if measured.len() != plan.rows() {
        return Err(ReadoutError::DimensionMismatch {
            expected: plan.rows(),
            got: measured.len(),
        });
    }
    if measured.iter().any(|v| !v.is_finite()) {
        return Err(ReadoutError::NonFiniteMeasurement);
    }
    let cells = plan.pseudoinverse() * measured;
    let residual = (plan.matrix() * &cells - measured).norm();
    Ok(Decoded { cells, residual })
}

/// Charging-timer constants: `C = 1 / (f (R1 + 2 R2) ln 2) - parasitic`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimerConfig {
    pub r1_ohm: f64,
    pub r2_ohm: f64,
    pub parasitic_farad: f64,
}

impl Default for TimerConfig {
    fn default() -> Self {
        Self {
            r1_ohm: 470e3,
            r2_ohm: 47e3,
            parasitic_farad: 0.0,
        }
    }
}

impl TimerConfig {
    pub fn validate(&self) -> Result<(), ReadoutError> {
        if !(self.r1_ohm > 0.0 && self.r2_ohm > 0.0) {
            return Err(ReadoutError::BadTimer {
                r1: self.r1_ohm,
                r2: self.r2_ohm,
            });
        }
        if self.parasitic_farad < 0.0 {
            return Err(ReadoutError::BadParasitic(self.parasitic_farad));
        }
        Ok(())
    }

    fn tau(&self) -> f64 {
        (self.r1_ohm + 2.0 * self.r2_ohm) * std::f64::consts::LN_2
    }
}

/// Converts a timer output frequency to net capacitance (parasitic
/// subtracted). A non-positive result signals mis-calibration.
pub fn frequency_to_capacitance(timer: &TimerConfig, f_hz: f64) -> Result<f64, ReadoutError> {
    timer.validate()?;
    if !(f_hz > 0.0) {
        return Err(ReadoutError::BadFrequency(f_hz));
    }
    let c = 1.0 / (f_hz * timer.tau()) - timer.parasitic_farad;
    if c <= 0.0 {
        return Err(ReadoutError::Calibration(c));
    }
    Ok(c)
}

/// Inverse of [`frequency_to_capacitance`], used when emitting synthetic raw
/// traces.
pub fn capacitance_to_frequency(timer: &TimerConfig, net_farads: f64) -> Result<f64, ReadoutError> {
    timer.validate()?;
    if !(net_farads > 0.0) {
        return Err(ReadoutError::Calibration(net_farads));
    }
    Ok(1.0 / ((net_farads + timer.parasitic_farad) * timer.tau()))
}

/// Estimated seconds per full measurement round: every row costs
/// `cycles_per_row` timer periods at the typical capacitance.
pub fn estimated_frame_period(
    plan: &MeasurementPlan,
    timer: &TimerConfig,
    typical_capacitance: f64,
    cycles_per_row: f64,
) -> Result<f64, ReadoutError> {
    let f = capacitance_to_frequency(timer, typical_capacitance)?;
    Ok(plan.rows() as f64 * cycles_per_row / f)
}

/// Measurement trace (`C_m` per frame): header `frame,m_0,...`.
pub fn write_measurement_trace(
    path: &Path,
    frames: &[DVector<f64>],
) -> Result<(), ReadoutError> {
    crate::pipeline::write_frame_csv(path, |c| format!("m_{c}"), frames).map_err(Into::into)
}

pub fn read_measurement_trace(path: &Path) -> Result<Vec<DVector<f64>>, ReadoutError> {
    crate::pipeline::read_frame_csv(path).map_err(Into::into)
}

/// Raw timer trace: header `frame,row_0_freq_hz,...`.
pub fn write_raw_frequency_trace(
    path: &Path,
    frames: &[DVector<f64>],
) -> Result<(), ReadoutError> {
    crate::pipeline::write_frame_csv(path, |c| format!("row_{c}_freq_hz"), frames)
        .map_err(Into::into)
}

pub fn read_raw_frequency_trace(path: &Path) -> Result<Vec<DVector<f64>>, ReadoutError> {
    crate::pipeline::read_frame_csv(path).map_err(Into::into)
}
