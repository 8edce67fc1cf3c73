//! Sensor-array geometry: electrode strips, sensor cells, the rest-state
//! triangle mesh and the marker-vertex set.
//!
//! A layout is authored as explicit strip polygons (JSON, millimetres). Cells
//! are the pairwise top/bottom strip overlaps; the mesh is a constrained
//! Delaunay triangulation that honors every cell boundary so each triangle
//! belongs to exactly one cell (or none).

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use nalgebra::{Point2, Point3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spade::{ConstrainedDelaunayTriangulation, Triangulation};
use thiserror::Error;

use crate::geometry::{self, GeometryError, Polygon2};

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("strip {0:?}: {1}")]
    StripGeometry(String, GeometryError),
    #[error("duplicate strip id {0:?}")]
    DuplicateStripId(String),
    #[error("strips {0:?} and {1:?} on the same layer overlap")]
    SameLayerOverlap(String, String),
    #[error("strip {0:?} extends outside the outline")]
    StripOutsideOutline(String),
    #[error("strips {top:?} and {bottom:?} cross {components} times; each pair may cross at most once")]
    MultiComponentCrossing {
        top: String,
        bottom: String,
        components: usize,
    },
    #[error("cell {0} touches the outline boundary; cells must be strictly interior (or equal to the outline)")]
    CellTouchesOutline(usize),
    #[error("target edge length must be positive, got {0}")]
    BadTargetEdgeLength(f64),
    #[error("max spacing must be positive, got {0}")]
    BadMaxSpacing(f64),
    #[error("triangulation rejected a vertex: {0}")]
    Triangulation(String),
    #[error("degenerate (near-zero-area) faces: {0:?}")]
    DegenerateFaces(Vec<usize>),
    #[error("cell {cell}: mesh faces cover {mesh_area} mm^2 but the cell polygon has {cell_area} mm^2")]
    AreaPartition {
        cell: usize,
        mesh_area: f64,
        cell_area: f64,
    },
    #[error("mesh is not flat; {0}")]
    NotFlat(String),
    #[error("mesh is not a topological disk: {0}")]
    NotADisk(String),
    #[error("seam mismatch: {0}")]
    SeamMismatch(String),
    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),
    #[error("layout file uses units {0:?}; only \"mm\" is supported")]
    UnsupportedUnits(String),
    #[error("measured capacitance references unknown strip pair ({0:?}, {1:?})")]
    UnknownMeasuredPair(String, String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Top,
    Bottom,
}

/// Which outline edge a strip's connection lead exits from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LeadSide {
    North,
    #[default]
    South,
    East,
    West,
}

/// One conductive strip on one layer.
#[derive(Debug, Clone)]
pub struct ElectrodeStrip {
    pub id: String,
    pub layer: Layer,
    pub polygon: Polygon2,
    pub lead_side: LeadSide,
}

/// Where a cell's rest capacitance came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RestCapacitance {
    /// Calibrated against hardware.
    Measured(f64),
    /// Computed from the overlap area and the plate-capacitor law.
    FromGeometry(f64),
}

impl RestCapacitance {
    pub fn farads(&self) -> f64 {
        match *self {
            RestCapacitance::Measured(c) | RestCapacitance::FromGeometry(c) => c,
        }
    }
}

/// Overlap of one top and one bottom strip: a local plate capacitor.
#[derive(Debug, Clone)]
pub struct SensorCell {
    pub id: usize,
    pub top_strip: String,
    pub bottom_strip: String,
    pub polygon: Polygon2,
    /// Rest overlap area in mm^2.
    pub rest_area: f64,
    pub rest_capacitance: Option<RestCapacitance>,
}

/// The whole electrode layout: strips on two layers plus the sheet outline.
#[derive(Debug, Clone)]
pub struct SensorLayout {
    pub strips: Vec<ElectrodeStrip>,
    pub outline: Polygon2,
}

#[derive(Serialize, Deserialize)]
struct StripFile {
    id: String,
    layer: Layer,
    polygon: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lead_side: Option<LeadSide>,
}

#[derive(Serialize, Deserialize)]
struct MeasuredCapFile {
    top: String,
    bottom: String,
    farads: f64,
}

#[derive(Serialize, Deserialize)]
struct LayoutFile {
    units: String,
    outline: Vec<[f64; 2]>,
    strips: Vec<StripFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    measured_capacitances: Vec<MeasuredCapFile>,
}

impl SensorLayout {
    pub fn new(strips: Vec<ElectrodeStrip>, outline: Polygon2) -> Result<Self, LayoutError> {
        let layout = Self { strips, outline };
        layout.validate()?;
        Ok(layout)
    }

    /// Checks the structural invariants: unique ids, simple polygons,
    /// same-layer strips pairwise disjoint, strips inside the outline.
    pub fn validate(&self) -> Result<(), LayoutError> {
        let mut seen = std::collections::HashSet::new();
        for strip in &self.strips {
            if !seen.insert(strip.id.clone()) {
                return Err(LayoutError::DuplicateStripId(strip.id.clone()));
            }
            if !geometry::contains_polygon(&self.outline, &strip.polygon) {
                return Err(LayoutError::StripOutsideOutline(strip.id.clone()));
            }
        }
        for (i, a) in self.strips.iter().enumerate() {
            for b in &self.strips[i + 1..] {
                if a.layer == b.layer && !geometry::interiors_disjoint(&a.polygon, &b.polygon) {
                    return Err(LayoutError::SameLayerOverlap(a.id.clone(), b.id.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn layer_strips(&self, layer: Layer) -> Vec<&ElectrodeStrip> {
        let mut v: Vec<&ElectrodeStrip> =
            self.strips.iter().filter(|s| s.layer == layer).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    pub fn strip(&self, id: &str) -> Option<&ElectrodeStrip> {
        self.strips.iter().find(|s| s.id == id)
    }

    fn to_file(&self) -> LayoutFile {
        LayoutFile {
            units: "mm".to_string(),
            outline: self
                .outline
                .points()
                .iter()
                .map(|p| [p.x, p.y])
                .collect(),
            strips: self
                .strips
                .iter()
                .map(|s| StripFile {
                    id: s.id.clone(),
                    layer: s.layer,
                    polygon: s.polygon.points().iter().map(|p| [p.x, p.y]).collect(),
                    lead_side: Some(s.lead_side),
                })
                .collect(),
            measured_capacitances: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String, LayoutError> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    /// Parses the layout JSON; returns the layout and any measured rest
    /// capacitances keyed by (top strip, bottom strip).
    pub fn from_json(text: &str) -> Result<(Self, BTreeMap<(String, String), f64>), LayoutError> {
        let file: LayoutFile = serde_json::from_str(text)?;
        if file.units != "mm" {
            return Err(LayoutError::UnsupportedUnits(file.units));
        }
        let outline = Polygon2::new(
            file.outline
                .iter()
                .map(|&[x, y]| Point2::new(x, y))
                .collect(),
        )?;
        let mut strips = Vec::new();
        for s in file.strips {
            let polygon = Polygon2::new(
                s.polygon
                    .iter()
                    .map(|&[x, y]| Point2::new(x, y))
                    .collect(),
            )
            .map_err(|e| LayoutError::StripGeometry(s.id.clone(), e))?;
            strips.push(ElectrodeStrip {
                id: s.id,
                layer: s.layer,
                polygon,
                lead_side: s.lead_side.unwrap_or_default(),
            });
        }
        let layout = Self::new(strips, outline)?;
        let mut measured = BTreeMap::new();
        for m in file.measured_capacitances {
            if layout.strip(&m.top).is_none() || layout.strip(&m.bottom).is_none() {
                return Err(LayoutError::UnknownMeasuredPair(m.top, m.bottom));
            }
            measured.insert((m.top, m.bottom), m.farads);
        }
        Ok((layout, measured))
    }

    pub fn save(&self, path: &Path) -> Result<(), LayoutError> {
        crate::pipeline::write_atomic(path, self.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, BTreeMap<(String, String), f64>), LayoutError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Content hash of the canonical JSON form; models and plans carry it so
    /// mismatched artifacts are refused.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.to_file()).expect("layout serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

/// Builds one sensor cell per top/bottom strip pair whose polygons overlap
/// with positive area, indexed in (top id, bottom id) order.
pub fn build_cells(layout: &SensorLayout) -> Result<Vec<SensorCell>, LayoutError> {
    layout.validate()?;
    let tops = layout.layer_strips(Layer::Top);
    let bottoms = layout.layer_strips(Layer::Bottom);
    // A single-layer layout simply has no inter-layer overlaps.
    let mut cells = Vec::new();
    for top in &tops {
        for bottom in &bottoms {
            let parts = geometry::intersect(&top.polygon, &bottom.polygon)?;
            match parts.len() {
                0 => continue,
                1 => {
                    let polygon = parts.into_iter().next().unwrap();
                    let rest_area = polygon.area();
                    cells.push(SensorCell {
                        id: cells.len(),
                        top_strip: top.id.clone(),
                        bottom_strip: bottom.id.clone(),
                        polygon,
                        rest_area,
                        rest_capacitance: None,
                    });
                }
                n => {
                    return Err(LayoutError::MultiComponentCrossing {
                        top: top.id.clone(),
                        bottom: bottom.id.clone(),
                        components: n,
                    })
                }
            }
        }
    }
    Ok(cells)
}

/// Applies measured rest capacitances (from the layout file) to cells.
pub fn apply_measured_capacitances(
    cells: &mut [SensorCell],
    measured: &BTreeMap<(String, String), f64>,
) {
    for cell in cells.iter_mut() {
        if let Some(&farads) =
            measured.get(&(cell.top_strip.clone(), cell.bottom_strip.clone()))
        {
            cell.rest_capacitance = Some(RestCapacitance::Measured(farads));
        }
    }
}

/// Rest-state shape of the sensor sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeshGeometry {
    Flat,
    Cylinder { radius: f64 },
}

/// Rest-state triangle mesh of the sensor with per-face cell membership.
#[derive(Debug, Clone)]
pub struct SensorMesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
    /// Cell id of each face, `None` for gap regions between cells.
    pub face_cell: Vec<Option<usize>>,
    /// Sorted vertex indices carrying physical markers.
    pub marker_vertices: Vec<usize>,
    /// Rest area of each face (mm^2) in this mesh's rest geometry.
    pub rest_face_areas: Vec<f64>,
    /// Vertex index of each cell's center, indexed by cell id.
    pub cell_centers: Vec<usize>,
    pub geometry: MeshGeometry,
}

fn triangle_area_3d(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

impl SensorMesh {
    pub fn face_area(&self, positions: &[Point3<f64>], face: usize) -> f64 {
        let [a, b, c] = self.faces[face];
        triangle_area_3d(&positions[a], &positions[b], &positions[c])
    }

    pub fn recompute_rest_areas(&mut self) {
        self.rest_face_areas = (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.faces[f];
                triangle_area_3d(&self.vertices[a], &self.vertices[b], &self.vertices[c])
            })
            .collect();
    }

    /// Faces grouped by cell id.
    pub fn faces_of_cell(&self, cell: usize) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| self.face_cell[f] == Some(cell))
            .collect()
    }

    /// Undirected edge map: (lo, hi) -> incident face count.
    fn edge_face_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut map = HashMap::new();
        for face in &self.faces {
            for k in 0..3 {
                let (a, b) = (face[k], face[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *map.entry(key).or_insert(0) += 1;
            }
        }
        map
    }

    /// Boundary loops as cyclic vertex lists.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let counts = self.edge_face_counts();
        let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
        for (&(a, b), &c) in &counts {
            if c == 1 {
                next.entry(a).or_default().push(b);
                next.entry(b).or_default().push(a);
            }
        }
        let mut visited: std::collections::HashSet<(usize, usize)> =
            std::collections::HashSet::new();
        let mut loops = Vec::new();
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        for start in starts {
            for &second in &next[&start] {
                if visited.contains(&(start, second)) {
                    continue;
                }
                let mut cycle = vec![start];
                let (mut prev, mut cur) = (start, second);
                visited.insert((start, second));
                while cur != start {
                    cycle.push(cur);
                    let neighbors = &next[&cur];
                    let nxt = neighbors
                        .iter()
                        .copied()
                        .find(|&n| n != prev)
                        .unwrap_or(start);
                    visited.insert((cur, nxt));
                    prev = cur;
                    cur = nxt;
                }
                visited.insert((cycle[cycle.len() - 1], start));
                loops.push(cycle);
            }
        }
        loops
    }

    /// Manifoldness, connectivity, positive areas, index bounds and (for flat
    /// meshes) the per-cell area partition against the cell polygons.
    pub fn validate(&self, cells: &[SensorCell]) -> Result<(), LayoutError> {
        if self.faces.len() != self.face_cell.len() || self.faces.len() != self.rest_face_areas.len()
        {
            return Err(LayoutError::MeshInvariant(
                "face attribute arrays disagree in length".into(),
            ));
        }
        for (&(a, b), &c) in &self.edge_face_counts() {
            if c > 2 {
                return Err(LayoutError::MeshInvariant(format!(
                    "edge ({a}, {b}) borders {c} faces"
                )));
            }
        }
        // Connectivity over vertices.
        let mut dsu: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(dsu: &mut Vec<usize>, i: usize) -> usize {
            if dsu[i] != i {
                let root = find(dsu, dsu[i]);
                dsu[i] = root;
            }
            dsu[i]
        }
        for face in &self.faces {
            for k in 0..2 {
                let (ra, rb) = (find(&mut dsu, face[k]), find(&mut dsu, face[k + 1]));
                if ra != rb {
                    dsu[ra] = rb;
                }
            }
        }
        let root = find(&mut dsu, 0);
        for v in 0..self.vertices.len() {
            if find(&mut dsu, v) != root {
                return Err(LayoutError::MeshInvariant(format!(
                    "vertex {v} is disconnected"
                )));
            }
        }
        for &m in &self.marker_vertices {
            if m >= self.vertices.len() {
                return Err(LayoutError::MeshInvariant(format!(
                    "marker vertex {m} out of range"
                )));
            }
        }
        for (f, &area) in self.rest_face_areas.iter().enumerate() {
            if area <= 0.0 {
                return Err(LayoutError::DegenerateFaces(vec![f]));
            }
        }
        for fc in self.face_cell.iter().flatten() {
            if *fc >= cells.len() {
                return Err(LayoutError::MeshInvariant(format!(
                    "face refers to unknown cell {fc}"
                )));
            }
        }
        for cell in cells {
            let total: f64 = self
                .faces_of_cell(cell.id)
                .iter()
                .map(|&f| self.rest_face_areas[f])
                .sum();
            if total <= 0.0 {
                return Err(LayoutError::MeshInvariant(format!(
                    "cell {} has no faces",
                    cell.id
                )));
            }
            if self.geometry == MeshGeometry::Flat {
                let rel = (total - cell.rest_area).abs() / cell.rest_area;
                if rel > 1e-6 {
                    return Err(LayoutError::AreaPartition {
                        cell: cell.id,
                        mesh_area: total,
                        cell_area: cell.rest_area,
                    });
                }
            }
        }
        Ok(())
    }

    /// Writes OBJ geometry plus a sidecar `<path>.meta.json` carrying cell
    /// membership, marker vertices and geometry kind.
    pub fn write_obj(&self, path: &Path) -> Result<(), LayoutError> {
        let mut text = String::new();
        for v in &self.vertices {
            text.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
        }
        for f in &self.faces {
            text.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
        }
        crate::pipeline::write_atomic(path, text.as_bytes())?;
        let meta = MeshSidecar {
            face_cell: self.face_cell.clone(),
            marker_vertices: self.marker_vertices.clone(),
            cell_centers: self.cell_centers.clone(),
            geometry: self.geometry,
        };
        let meta_path = sidecar_path(path);
        crate::pipeline::write_atomic(&meta_path, serde_json::to_string_pretty(&meta)?.as_bytes())?;
        Ok(())
    }

    pub fn read_obj(path: &Path) -> Result<Self, LayoutError> {
        let text = std::fs::read_to_string(path)?;
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let coords: Vec<f64> = it.take(3).filter_map(|t| t.parse().ok()).collect();
                    if coords.len() != 3 {
                        return Err(LayoutError::MeshInvariant(format!(
                            "bad vertex on line {}",
                            lineno + 1
                        )));
                    }
                    vertices.push(Point3::new(coords[0], coords[1], coords[2]));
                }
                Some("f") => {
                    let idx: Vec<usize> = it
                        .take(3)
                        .filter_map(|t| t.split('/').next())
                        .filter_map(|t| t.parse::<usize>().ok())
                        .collect();
                    if idx.len() != 3 {
                        return Err(LayoutError::MeshInvariant(format!(
                            "bad face on line {}",
                            lineno + 1
                        )));
                    }
                    faces.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
                }
                _ => {}
            }
        }
        let meta_path = sidecar_path(path);
        let meta: MeshSidecar = serde_json::from_str(&std::fs::read_to_string(meta_path)?)?;
        let mut mesh = SensorMesh {
            vertices,
            faces,
            face_cell: meta.face_cell,
            marker_vertices: meta.marker_vertices,
            rest_face_areas: Vec::new(),
            cell_centers: meta.cell_centers,
            geometry: meta.geometry,
        };
        mesh.recompute_rest_areas();
        Ok(mesh)
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    std::path::PathBuf::from(os)
}

#[derive(Serialize, Deserialize)]
struct MeshSidecar {
    face_cell: Vec<Option<usize>>,
    marker_vertices: Vec<usize>,
    cell_centers: Vec<usize>,
    geometry: MeshGeometry,
}

/// Conforming triangulation of the layout with cell polygons as constraint
/// edges and one inserted vertex at every cell center.
///
/// Interior Steiner points are seeded on a staggered grid at roughly
/// `target_edge_length` spacing; points too close to a constraint edge are
/// dropped so the triangulation stays well shaped.
pub fn mesh_layout(
    layout: &SensorLayout,
    cells: &[SensorCell],
    target_edge_length: f64,
) -> Result<SensorMesh, LayoutError> {
    if !(target_edge_length > 0.0) {
        return Err(LayoutError::BadTargetEdgeLength(target_edge_length));
    }
    let outline = &layout.outline;
    let (bb_min, bb_max) = outline.bbox();
    let diag = (bb_max - bb_min).norm();
    let touch_tol = 1e-9 * diag;

    // Cells must either sit strictly inside the outline or coincide with it.
    for cell in cells {
        let equals_outline = cell.polygon == *outline;
        if equals_outline {
            continue;
        }
        let touching = cell
            .polygon
            .points()
            .iter()
            .any(|p| outline.distance_to_boundary(p) <= touch_tol)
            || outline
                .points()
                .iter()
                .any(|p| cell.polygon.distance_to_boundary(p) <= touch_tol);
        if touching {
            return Err(LayoutError::CellTouchesOutline(cell.id));
        }
    }

    // Constraint chains: outline ring + every cell ring, edges subdivided to
    // the target length.
    let mut chains: Vec<Vec<Point2<f64>>> = Vec::new();
    let mut push_ring = |poly: &Polygon2| {
        let mut chain = Vec::new();
        for (a, b) in poly.edges() {
            let len = (b - a).norm();
            let pieces = (len / target_edge_length).ceil().max(1.0) as usize;
            for k in 0..pieces {
                let t = k as f64 / pieces as f64;
                chain.push(Point2::from(a.coords + (b.coords - a.coords) * t));
            }
        }
        chains.push(chain);
    };
    push_ring(outline);
    let mut outline_ring_count = 1;
    for cell in cells {
        if cell.polygon == *outline {
            outline_ring_count += 1; // already covered by the outline ring
            continue;
        }
        push_ring(&cell.polygon);
    }
    let _ = outline_ring_count;

    // All constraint segments, for the grid-point proximity filter.
    let mut segments: Vec<(Point2<f64>, Point2<f64>)> = Vec::new();
    for chain in &chains {
        let n = chain.len();
        for i in 0..n {
            segments.push((chain[i], chain[(i + 1) % n]));
        }
    }

    let centers: Vec<Point2<f64>> = cells
        .iter()
        .map(|c| geometry::interior_point(&c.polygon))
        .collect();

    // Staggered interior grid, kept clear of constraints and cell centers.
    let g = target_edge_length;
    let clearance = 0.45 * g;
    let mut grid_points = Vec::new();
    let rows = ((bb_max.y - bb_min.y) / (g * 0.866)).ceil() as usize;
    let cols = ((bb_max.x - bb_min.x) / g).ceil() as usize + 1;
    for r in 0..=rows {
        let y = bb_min.y + r as f64 * g * 0.866;
        let offset = if r % 2 == 0 { 0.5 * g } else { g };
        for c in 0..=cols {
            let x = bb_min.x + offset + c as f64 * g - g;
            let p = Point2::new(x, y);
            if !outline.contains(&p) {
                continue;
            }
            if segments
                .iter()
                .any(|(a, b)| geometry::point_segment_distance(&p, a, b) < clearance)
            {
                continue;
            }
            if centers.iter().any(|c| (p - c).norm() < clearance) {
                continue;
            }
            grid_points.push(p);
        }
    }

    // Triangulate.
    let mut cdt: ConstrainedDelaunayTriangulation<spade::Point2<f64>> =
        ConstrainedDelaunayTriangulation::new();
    let insert = |cdt: &mut ConstrainedDelaunayTriangulation<spade::Point2<f64>>,
                      p: &Point2<f64>|
     -> Result<spade::handles::FixedVertexHandle, LayoutError> {
        cdt.insert(spade::Point2::new(p.x, p.y))
            .map_err(|e| LayoutError::Triangulation(format!("{e:?}")))
    };
    let mut chain_handles = Vec::new();
    for chain in &chains {
        let mut handles = Vec::new();
        for p in chain {
            handles.push(insert(&mut cdt, p)?);
        }
        chain_handles.push(handles);
    }
    let mut center_handles = Vec::new();
    for p in &centers {
        center_handles.push(insert(&mut cdt, p)?);
    }
    for p in &grid_points {
        insert(&mut cdt, p)?;
    }
    for handles in &chain_handles {
        let n = handles.len();
        for i in 0..n {
            let (a, b) = (handles[i], handles[(i + 1) % n]);
            if a != b && !cdt.exists_constraint(a, b) {
                cdt.add_constraint(a, b);
            }
        }
    }

    // Extract vertices (spade indices are stable) and the faces inside the
    // outline.
    let mut vertices = vec![Point3::origin(); cdt.num_vertices()];
    for v in cdt.vertices() {
        let p = v.position();
        vertices[v.index()] = Point3::new(p.x, p.y, 0.0);
    }
    let mut faces = Vec::new();
    let mut face_cell = Vec::new();
    let mut rest_face_areas = Vec::new();
    let mut degenerate = Vec::new();
    // Cell bounding boxes for the membership lookup.
    let cell_bbs: Vec<_> = cells.iter().map(|c| c.polygon.bbox()).collect();
    for face in cdt.inner_faces() {
        let [va, vb, vc] = face.vertices();
        let (ia, ib, ic) = (va.index(), vb.index(), vc.index());
        let (a, b, c) = (&vertices[ia], &vertices[ib], &vertices[ic]);
        let centroid = Point2::new(
            (a.x + b.x + c.x) / 3.0,
            (a.y + b.y + c.y) / 3.0,
        );
        if !outline.contains(&centroid) {
            continue;
        }
        let area = triangle_area_3d(a, b, c);
        if area < 1e-12 * diag * diag {
            degenerate.push(faces.len());
        }
        let mut owner = None;
        for (ci, cell) in cells.iter().enumerate() {
            let (mn, mx) = &cell_bbs[ci];
            if centroid.x < mn.x || centroid.x > mx.x || centroid.y < mn.y || centroid.y > mx.y {
                continue;
            }
            if cell.polygon.contains(&centroid) {
                owner = Some(cell.id);
                break;
            }
        }
        faces.push([ia, ib, ic]);
        face_cell.push(owner);
        rest_face_areas.push(area);
    }
    if !degenerate.is_empty() {
        return Err(LayoutError::DegenerateFaces(degenerate));
    }

    let cell_centers: Vec<usize> = center_handles.iter().map(|h| h.index()).collect();
    let mesh = SensorMesh {
        vertices,
        faces,
        face_cell,
        marker_vertices: Vec::new(),
        rest_face_areas,
        cell_centers,
        geometry: MeshGeometry::Flat,
    };
    mesh.validate(cells)?;
    Ok(mesh)
}

/// Greedy farthest-point selection of marker vertices among the cell centers.
///
/// Every cell-center vertex ends up within `max_spacing` (rest-plane
/// Euclidean) of a selected marker. Deterministic: the seed is the center
/// closest to the centroid of all centers, ties break on vertex index.
pub fn select_markers(mesh: &SensorMesh, max_spacing: f64) -> Result<Vec<usize>, LayoutError> {
    select_markers_with_target(mesh, max_spacing, 0)
}

/// [`select_markers`] continued in the same farthest-point order until at
/// least `target_count` markers are selected (denser regular coverings, e.g.
/// the 21-marker pattern on the bundled prototype).
pub fn select_markers_with_target(
    mesh: &SensorMesh,
    max_spacing: f64,
    target_count: usize,
) -> Result<Vec<usize>, LayoutError> {
    if !(max_spacing > 0.0) {
        return Err(LayoutError::BadMaxSpacing(max_spacing));
    }
    let candidates = &mesh.cell_centers;
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let pos = |v: usize| mesh.vertices[v];
    let centroid = candidates
        .iter()
        .fold(nalgebra::Vector3::zeros(), |acc, &v| acc + pos(v).coords)
        / candidates.len() as f64;
    let seed = *candidates
        .iter()
        .min_by(|&&a, &&b| {
            let da = (pos(a).coords - centroid).norm();
            let db = (pos(b).coords - centroid).norm();
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        })
        .unwrap();
    let mut selected = vec![seed];
    let mut dist: BTreeMap<usize, f64> = candidates
        .iter()
        .map(|&v| (v, (pos(v) - pos(seed)).norm()))
        .collect();
    let target = target_count.min(candidates.len());
    loop {
        let (&far, &d) = dist
            .iter()
            .max_by(|(va, da), (vb, db)| da.partial_cmp(db).unwrap().then(vb.cmp(va)))
            .unwrap();
        if d <= max_spacing && selected.len() >= target.max(1) {
            break;
        }
        if d <= 0.0 {
            break; // every candidate already selected
        }
        selected.push(far);
        for (&v, entry) in dist.iter_mut() {
            let nd = (pos(v) - pos(far)).norm();
            if nd < *entry {
                *entry = nd;
            }
        }
    }
    selected.sort_unstable();
    Ok(selected)
}

/// Rolls a flat rectangular mesh into an open cylinder about its x-extent:
/// x maps to arc length on a circle of radius `width / 2pi`, y to the axis.
/// Seam vertices (x = min and x = max with matching y) are merged.
pub fn roll_to_cylinder(mesh: &SensorMesh, seam_tolerance: f64) -> Result<SensorMesh, LayoutError> {
    if mesh.geometry != MeshGeometry::Flat {
        return Err(LayoutError::NotFlat("mesh is already rolled".into()));
    }
    let loops = mesh.boundary_loops();
    if loops.len() != 1 {
        return Err(LayoutError::NotADisk(format!(
            "expected 1 boundary loop, found {}",
            loops.len()
        )));
    }
    let v = mesh.vertices.len() as i64;
    let f = mesh.faces.len() as i64;
    let e = mesh.edge_face_counts().len() as i64;
    if v - e + f != 1 {
        return Err(LayoutError::NotADisk(format!(
            "Euler characteristic {} != 1",
            v - e + f
        )));
    }

    let xs: Vec<f64> = mesh.vertices.iter().map(|p| p.x).collect();
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = x_max - x_min;
    let lateral_tol = (seam_tolerance).max(1e-9 * width);

    let boundary: std::collections::HashSet<usize> = loops[0].iter().copied().collect();
    let mut left: Vec<usize> = boundary
        .iter()
        .copied()
        .filter(|&i| (mesh.vertices[i].x - x_min).abs() <= lateral_tol)
        .collect();
    let mut right: Vec<usize> = boundary
        .iter()
        .copied()
        .filter(|&i| (mesh.vertices[i].x - x_max).abs() <= lateral_tol)
        .collect();
    if left.len() < 2 || right.len() < 2 {
        return Err(LayoutError::NotADisk(
            "could not find two opposite straight boundary edges".into(),
        ));
    }
    let sort_by_y = |v: &mut Vec<usize>, verts: &[Point3<f64>]| {
        v.sort_by(|&a, &b| verts[a].y.partial_cmp(&verts[b].y).unwrap().then(a.cmp(&b)));
    };
    sort_by_y(&mut left, &mesh.vertices);
    sort_by_y(&mut right, &mesh.vertices);
    let edge_len = |ids: &[usize]| -> f64 {
        ids.windows(2)
            .map(|w| (mesh.vertices[w[1]] - mesh.vertices[w[0]]).norm())
            .sum()
    };
    let (ll, rl) = (edge_len(&left), edge_len(&right));
    if (ll - rl).abs() > seam_tolerance.max(1e-9 * width) {
        return Err(LayoutError::SeamMismatch(format!(
            "seam lengths differ: {ll} vs {rl} mm"
        )));
    }
    if left.len() != right.len() {
        return Err(LayoutError::SeamMismatch(format!(
            "seam vertex counts differ: {} vs {}",
            left.len(),
            right.len()
        )));
    }
    for (&l, &r) in left.iter().zip(&right) {
        let dy = (mesh.vertices[l].y - mesh.vertices[r].y).abs();
        if dy > seam_tolerance {
            return Err(LayoutError::SeamMismatch(format!(
                "no seam partner within tolerance for vertices {l}/{r} (dy = {dy} mm)"
            )));
        }
    }

    let radius = width / (2.0 * std::f64::consts::PI);
    let rolled = |p: &Point3<f64>| {
        let theta = (p.x - x_min) / radius;
        Point3::new(radius * theta.cos(), radius * theta.sin(), p.y)
    };

    // Right-seam vertices collapse onto their left partners.
    let mut alias: HashMap<usize, usize> = HashMap::new();
    for (&l, &r) in left.iter().zip(&right) {
        alias.insert(r, l);
    }
    let mut remap = vec![usize::MAX; mesh.vertices.len()];
    let mut vertices = Vec::with_capacity(mesh.vertices.len() - alias.len());
    for (i, p) in mesh.vertices.iter().enumerate() {
        if alias.contains_key(&i) {
            continue;
        }
        remap[i] = vertices.len();
        vertices.push(rolled(p));
    }
    for (&r, &l) in &alias {
        remap[r] = remap[l];
    }
    let faces: Vec<[usize; 3]> = mesh
        .faces
        .iter()
        .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
        .collect();
    let mut marker_vertices: Vec<usize> = mesh.marker_vertices.iter().map(|&m| remap[m]).collect();
    marker_vertices.sort_unstable();
    marker_vertices.dedup();
    let cell_centers = mesh.cell_centers.iter().map(|&c| remap[c]).collect();

    let mut out = SensorMesh {
        vertices,
        faces,
        face_cell: mesh.face_cell.clone(),
        marker_vertices,
        rest_face_areas: Vec::new(),
        cell_centers,
        geometry: MeshGeometry::Cylinder { radius },
    };
    out.recompute_rest_areas();
    Ok(out)
}

/// A full k x n grid layout: `n_top` horizontal strips crossing `k_bottom`
/// vertical strips, every pair overlapping once.
pub fn grid_layout(n_top: usize, k_bottom: usize) -> SensorLayout {
    let pitch = 20.0;
    let strip_w = 12.0;
    let margin = 8.0;
    let width = margin * 2.0 + k_bottom as f64 * pitch;
    let height = margin * 2.0 + n_top as f64 * pitch;
    let mut strips = Vec::new();
    for i in 0..n_top {
        let y0 = margin + i as f64 * pitch + (pitch - strip_w) / 2.0;
        strips.push(ElectrodeStrip {
            id: format!("t{i:02}"),
            layer: Layer::Top,
            polygon: Polygon2::rect(margin, y0, width - margin, y0 + strip_w),
            lead_side: LeadSide::West,
        });
    }
    for j in 0..k_bottom {
        let x0 = margin + j as f64 * pitch + (pitch - strip_w) / 2.0;
        strips.push(ElectrodeStrip {
            id: format!("b{j:02}"),
            layer: Layer::Bottom,
            polygon: Polygon2::rect(x0, margin, x0 + strip_w, height - margin),
            lead_side: LeadSide::South,
        });
    }
    SensorLayout::new(strips, Polygon2::rect(0.0, 0.0, width, height))
        .expect("grid layout is valid")
}

/// The bundled 200 x 200 mm prototype: 12 strips per layer in a staggered
/// arrangement where shorter bottom strips stop partway up the sheet,
/// yielding 92 sensor cells with all bottom leads routed to the south edge.
pub fn prototype_layout() -> SensorLayout {
    let size = 200.0;
    let margin = 6.0;
    let lanes = 12usize;
    let pitch = (size - 2.0 * margin) / lanes as f64; // 15.666..
    let strip_w = 11.0;
    // Rows covered by each bottom strip (column), summing to 92.
    let column_rows: [usize; 12] = [12, 8, 4, 2, 8, 12, 12, 8, 2, 4, 8, 12];
    let lane0 = |i: usize| margin + i as f64 * pitch + (pitch - strip_w) / 2.0;
    let mut strips = Vec::new();
    for i in 0..lanes {
        let y0 = lane0(i);
        strips.push(ElectrodeStrip {
            id: format!("r{i:02}"),
            layer: Layer::Top,
            polygon: Polygon2::rect(margin, y0, size - margin, y0 + strip_w),
            lead_side: LeadSide::West,
        });
    }
    for (j, &rows) in column_rows.iter().enumerate() {
        let x0 = lane0(j);
        let y_end = lane0(rows - 1) + strip_w + (pitch - strip_w) / 2.0;
        strips.push(ElectrodeStrip {
            id: format!("c{j:02}"),
            layer: Layer::Bottom,
            polygon: Polygon2::rect(x0, margin, x0 + strip_w, y_end),
            lead_side: LeadSide::South,
        });
    }
    SensorLayout::new(strips, Polygon2::rect(0.0, 0.0, size, size))
        .expect("prototype layout is valid")
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent polygon-clipping oracle: Sutherland-Hodgman against the
    /// half-planes of a convex clip polygon.
    fn clip_convex(subject: &[(f64, f64)], clip: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = subject.to_vec();
        let n = clip.len();
        for i in 0..n {
            let (ax, ay) = clip[i];
            let (bx, by) = clip[(i + 1) % n];
            let inside = |p: &(f64, f64)| (bx - ax) * (p.1 - ay) - (by - ay) * (p.0 - ax) >= 0.0;
            let input = std::mem::take(&mut out);
            for (k, p) in input.iter().enumerate() {
                let prev = &input[(k + input.len() - 1) % input.len()];
                let cross = |p1: &(f64, f64), p2: &(f64, f64)| {
                    let denom = (bx - ax) * (p2.1 - p1.1) - (by - ay) * (p2.0 - p1.0);
                    let t = ((bx - ax) * (ay - p1.1) - (by - ay) * (ax - p1.0)) / -denom;
                    (p1.0 + t * (p2.0 - p1.0), p1.1 + t * (p2.1 - p1.1))
                };
                if inside(p) {
                    if !inside(prev) {
                        out.push(cross(prev, p));
                    }
                    out.push(*p);
                } else if inside(prev) {
                    out.push(cross(prev, p));
                }
            }
            if out.is_empty() {
                return out;
            }
        }
        out
    }

    fn shoelace(pts: &[(f64, f64)]) -> f64 {
        let n = pts.len();
        let mut twice = 0.0;
        for i in 0..n {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % n];
            twice += x0 * y1 - x1 * y0;
        }
        (0.5 * twice).abs()
    }

    #[test]
    fn grid_3x2_yields_six_cells() {
        let layout = grid_layout(2, 3);
        let cells = build_cells(&layout).unwrap();
        assert_eq!(cells.len(), 6);
        // Deterministic ordering by (top id, bottom id).
        let keys: Vec<(String, String)> = cells
            .iter()
            .map(|c| (c.top_strip.clone(), c.bottom_strip.clone()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn single_layer_layout_has_no_cells() {
        let outline = Polygon2::rect(0.0, 0.0, 100.0, 100.0);
        let strips = vec![
            ElectrodeStrip {
                id: "a".into(),
                layer: Layer::Top,
                polygon: Polygon2::rect(10.0, 10.0, 90.0, 30.0),
                lead_side: LeadSide::West,
            },
            ElectrodeStrip {
                id: "b".into(),
                layer: Layer::Top,
                polygon: Polygon2::rect(10.0, 50.0, 90.0, 70.0),
                lead_side: LeadSide::West,
            },
        ];
        let layout = SensorLayout::new(strips, outline).unwrap();
        assert!(build_cells(&layout).unwrap().is_empty());
    }

    #[test]
    fn unit_overlap_matches_clipping_oracle() {
        let outline = Polygon2::rect(-1.0, -1.0, 4.0, 2.0);
        let strips = vec![
            ElectrodeStrip {
                id: "top".into(),
                layer: Layer::Top,
                polygon: Polygon2::rect(0.0, 0.0, 2.0, 1.0),
                lead_side: LeadSide::West,
            },
            ElectrodeStrip {
                id: "bot".into(),
                layer: Layer::Bottom,
                polygon: Polygon2::rect(1.0, 0.0, 3.0, 1.0),
                lead_side: LeadSide::South,
            },
        ];
        let layout = SensorLayout::new(strips, outline).unwrap();
        let cells = build_cells(&layout).unwrap();
        assert_eq!(cells.len(), 1);
        let oracle = clip_convex(
            &[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)],
            &[(1.0, 0.0), (3.0, 0.0), (3.0, 1.0), (1.0, 1.0)],
        );
        let expected = shoelace(&oracle);
        assert_relative_eq!(expected, 1.0, max_relative = 1e-12);
        assert_relative_eq!(cells[0].rest_area, expected, max_relative = 1e-6);
    }

    #[test]
    fn multi_component_crossing_is_rejected() {
        // U-shaped top strip crossed by a straight bottom strip -> two
        // disconnected overlaps.
        let outline = Polygon2::rect(-10.0, -10.0, 40.0, 40.0);
        let u = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(30.0, 0.0),
            Point2::new(30.0, 30.0),
            Point2::new(20.0, 30.0),
            Point2::new(20.0, 10.0),
            Point2::new(10.0, 10.0),
            Point2::new(10.0, 30.0),
            Point2::new(0.0, 30.0),
        ])
        .unwrap();
        let strips = vec![
            ElectrodeStrip {
                id: "u".into(),
                layer: Layer::Top,
                polygon: u,
                lead_side: LeadSide::South,
            },
            ElectrodeStrip {
                id: "bar".into(),
                layer: Layer::Bottom,
                polygon: Polygon2::rect(-5.0, 20.0, 35.0, 25.0),
                lead_side: LeadSide::West,
            },
        ];
        let layout = SensorLayout::new(strips, outline).unwrap();
        assert!(matches!(
            build_cells(&layout),
            Err(LayoutError::MultiComponentCrossing { .. })
        ));
    }

    #[test]
    fn same_layer_overlap_is_rejected() {
        let outline = Polygon2::rect(0.0, 0.0, 100.0, 100.0);
        let strips = vec![
            ElectrodeStrip {
                id: "a".into(),
                layer: Layer::Top,
                polygon: Polygon2::rect(10.0, 10.0, 60.0, 30.0),
                lead_side: LeadSide::West,
            },
            ElectrodeStrip {
                id: "b".into(),
                layer: Layer::Top,
                polygon: Polygon2::rect(40.0, 10.0, 90.0, 30.0),
                lead_side: LeadSide::West,
            },
        ];
        assert!(matches!(
            SensorLayout::new(strips, outline),
            Err(LayoutError::SameLayerOverlap(_, _))
        ));
    }

    #[test]
    fn single_cell_coarse_mesh_is_a_fan() {
        // Outline == cell polygon: a coarse target leaves only the four
        // corners plus the inserted center.
        let outline = Polygon2::rect(0.0, 0.0, 20.0, 10.0);
        let strips = vec![
            ElectrodeStrip {
                id: "t".into(),
                layer: Layer::Top,
                polygon: outline.clone(),
                lead_side: LeadSide::West,
            },
            ElectrodeStrip {
                id: "b".into(),
                layer: Layer::Bottom,
                polygon: outline.clone(),
                lead_side: LeadSide::South,
            },
        ];
        let layout = SensorLayout::new(strips, outline).unwrap();
        let cells = build_cells(&layout).unwrap();
        assert_eq!(cells.len(), 1);
        let mesh = mesh_layout(&layout, &cells, 50.0).unwrap();
        assert_eq!(mesh.vertices.len(), 5);
        assert_eq!(mesh.faces.len(), 4);
        let total: f64 = mesh.rest_face_areas.iter().sum();
        assert_relative_eq!(total, cells[0].rest_area, max_relative = 1e-6);
    }

    #[test]
    fn grid_mesh_contains_cell_centers() {
        let layout = grid_layout(2, 3);
        let cells = build_cells(&layout).unwrap();
        let mesh = mesh_layout(&layout, &cells, 6.0).unwrap();
        assert_eq!(mesh.cell_centers.len(), 6);
        for (cell, &v) in cells.iter().zip(&mesh.cell_centers) {
            let p = mesh.vertices[v];
            let c = crate::geometry::interior_point(&cell.polygon);
            assert!((p.x - c.x).abs() < 1e-9 && (p.y - c.y).abs() < 1e-9);
        }
        mesh.validate(&cells).unwrap();
    }

    #[test]
    fn refinement_triples_face_count() {
        let layout = grid_layout(2, 2);
        let cells = build_cells(&layout).unwrap();
        let coarse = mesh_layout(&layout, &cells, 10.0).unwrap();
        let fine = mesh_layout(&layout, &cells, 5.0).unwrap();
        assert!(
            fine.faces.len() >= 3 * coarse.faces.len(),
            "{} vs {}",
            fine.faces.len(),
            coarse.faces.len()
        );
    }

    #[test]
    fn area_partition_across_resolutions() {
        let layout = grid_layout(2, 2);
        let cells = build_cells(&layout).unwrap();
        for target in [12.0, 6.0, 3.0] {
            let mesh = mesh_layout(&layout, &cells, target).unwrap();
            for cell in &cells {
                let total: f64 = mesh
                    .faces_of_cell(cell.id)
                    .iter()
                    .map(|&f| mesh.rest_face_areas[f])
                    .sum();
                assert_relative_eq!(total, cell.rest_area, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn meshing_is_deterministic() {
        let layout = grid_layout(2, 3);
        let cells = build_cells(&layout).unwrap();
        let a = mesh_layout(&layout, &cells, 7.0).unwrap();
        let b = mesh_layout(&layout, &cells, 7.0).unwrap();
        assert_eq!(a.vertices, b.vertices);
        assert_eq!(a.faces, b.faces);
        assert_eq!(
            select_markers(&a, 30.0).unwrap(),
            select_markers(&b, 30.0).unwrap()
        );
    }

    #[test]
    fn marker_coverage_brute_force() {
        // 10 x 10 grid of cells at 20 mm pitch; coverage radius 25 mm.
        let layout = grid_layout(10, 10);
        let cells = build_cells(&layout).unwrap();
        let mesh = mesh_layout(&layout, &cells, 15.0).unwrap();
        let spacing = 25.0;
        let markers = select_markers(&mesh, spacing).unwrap();
        assert!(!markers.is_empty());
        for &c in &mesh.cell_centers {
            let d = markers
                .iter()
                .map(|&m| (mesh.vertices[c] - mesh.vertices[m]).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d <= spacing, "center {c} is {d} mm from nearest marker");
        }
    }

    #[test]
    fn huge_spacing_selects_one_marker() {
        let layout = grid_layout(2, 3);
        let cells = build_cells(&layout).unwrap();
        let mesh = mesh_layout(&layout, &cells, 10.0).unwrap();
        let markers = select_markers(&mesh, 10_000.0).unwrap();
        assert_eq!(markers.len(), 1);
    }

    #[test]
    fn target_count_extends_selection() {
        let layout = prototype_layout();
        let cells = build_cells(&layout).unwrap();
        let mesh = mesh_layout(&layout, &cells, 10.0).unwrap();
        let base = select_markers(&mesh, 50.0).unwrap();
        let extended = select_markers_with_target(&mesh, 50.0, 21).unwrap();
        assert_eq!(extended.len(), 21);
        assert!(base.iter().all(|m| extended.contains(m)));
    }

    #[test]
    fn prototype_has_92_cells_and_full_grid_bound() {
        let layout = prototype_layout();
        let cells = build_cells(&layout).unwrap();
        assert_eq!(cells.len(), 92);
        let tops = layout.layer_strips(Layer::Top).len();
        let bottoms = layout.layer_strips(Layer::Bottom).len();
        assert!(cells.len() <= tops * bottoms);
        // Full grids reach the bound exactly.
        let full = grid_layout(3, 4);
        assert_eq!(build_cells(&full).unwrap().len(), 12);
    }

    #[test]
    fn roll_flat_sheet_radius_and_topology() {
        let layout = grid_layout(3, 3);
        let cells = build_cells(&layout).unwrap();
        let mut mesh = mesh_layout(&layout, &cells, 12.0).unwrap();
        mesh.marker_vertices = select_markers(&mesh, 40.0).unwrap();
        let before = mesh.vertices.len();
        let rolled = roll_to_cylinder(&mesh, 1e-6).unwrap();
        let (min, max) = {
            let xs: Vec<f64> = mesh.vertices.iter().map(|p| p.x).collect();
            (
                xs.iter().cloned().fold(f64::INFINITY, f64::min),
                xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        let width = max - min;
        let expected_radius = width / (2.0 * std::f64::consts::PI);
        match rolled.geometry {
            MeshGeometry::Cylinder { radius } => {
                assert_relative_eq!(radius, expected_radius, max_relative = 1e-12)
            }
            _ => panic!("expected cylinder"),
        }
        // Every rolled vertex sits on the cylinder.
        for p in &rolled.vertices {
            let r = (p.x * p.x + p.y * p.y).sqrt();
            assert_relative_eq!(r, expected_radius, max_relative = 1e-9);
        }
        // Seam pairs merged away.
        let seam_pairs = mesh
            .boundary_loops()[0]
            .iter()
            .filter(|&&v| (mesh.vertices[v].x - min).abs() < 1e-9)
            .count();
        assert_eq!(rolled.vertices.len(), before - seam_pairs);
        assert_eq!(rolled.boundary_loops().len(), 2);
        rolled.validate(&cells).unwrap();
    }

    #[test]
    fn roll_200mm_sheet_radius_value() {
        let layout = prototype_layout();
        let cells = build_cells(&layout).unwrap();
        let mesh = mesh_layout(&layout, &cells, 12.0).unwrap();
        let rolled = roll_to_cylinder(&mesh, 1e-6).unwrap();
        match rolled.geometry {
            MeshGeometry::Cylinder { radius } => {
                assert_relative_eq!(radius, 200.0 / (2.0 * std::f64::consts::PI), max_relative = 1e-12);
                assert!((radius - 31.831).abs() < 1e-3);
            }
            _ => panic!("expected cylinder"),
        }
        assert_eq!(rolled.boundary_loops().len(), 2);
    }

    #[test]
    fn layout_json_roundtrip_and_hash() {
        let layout = prototype_layout();
        let json = layout.to_json().unwrap();
        let (back, measured) = SensorLayout::from_json(&json).unwrap();
        assert!(measured.is_empty());
        assert_eq!(back.strips.len(), layout.strips.len());
        assert_eq!(back.hash(), layout.hash());
        assert_eq!(build_cells(&back).unwrap().len(), 92);
    }

    #[test]
    fn measured_capacitances_are_applied() {
        let layout = grid_layout(1, 1);
        let mut json: serde_json::Value =
            serde_json::from_str(&layout.to_json().unwrap()).unwrap();
        json["measured_capacitances"] = serde_json::json!([
            {"top": "t00", "bottom": "b00", "farads": 47e-12}
        ]);
        let (back, measured) = SensorLayout::from_json(&json.to_string()).unwrap();
        let mut cells = build_cells(&back).unwrap();
        apply_measured_capacitances(&mut cells, &measured);
        assert_eq!(
            cells[0].rest_capacitance,
            Some(RestCapacitance::Measured(47e-12))
        );
    }

    #[test]
    fn obj_roundtrip() {
        let layout = grid_layout(2, 2);
        let cells = build_cells(&layout).unwrap();
        let mut mesh = mesh_layout(&layout, &cells, 8.0).unwrap();
        mesh.marker_vertices = select_markers(&mesh, 30.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.obj");
        mesh.write_obj(&path).unwrap();
        let back = SensorMesh::read_obj(&path).unwrap();
        assert_eq!(back.vertices.len(), mesh.vertices.len());
        assert_eq!(back.faces, mesh.faces);
        assert_eq!(back.face_cell, mesh.face_cell);
        assert_eq!(back.marker_vertices, mesh.marker_vertices);
        assert_eq!(back.geometry, mesh.geometry);
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            assert_eq!(a, b);
        }
    }
}
