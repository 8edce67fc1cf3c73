fn main() {
    let layout = stretchcap::layout::prototype_layout();
    let cells = stretchcap::layout::build_cells(&layout).unwrap();
    println!("cells: {}", cells.len());
    let mesh = stretchcap::layout::mesh_layout(&layout, &cells, 8.0).unwrap();
    println!("verts: {} faces: {}", mesh.vertices.len(), mesh.faces.len());
    for spacing in [40.0, 45.0, 50.0, 55.0, 60.0] {
        let m = stretchcap::layout::select_markers(&mesh, spacing).unwrap();
        println!("spacing {spacing} -> {} markers", m.len());
    }
    let mesh5 = stretchcap::layout::mesh_layout(&layout, &cells, 5.0).unwrap();
    println!("5mm: verts {} faces {}", mesh5.vertices.len(), mesh5.faces.len());
    let m = stretchcap::layout::select_markers(&mesh5, 50.0).unwrap();
    println!("5mm spacing 50 -> {}", m.len());
}
