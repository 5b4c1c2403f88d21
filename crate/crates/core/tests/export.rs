use thickpart_core::export::{gluing_list, mesh_document, net_document, parse_gluing_list, triangulation_document};
use thickpart_core::pipeline::{decompose, RunConfig};
use thickpart_core::triangulator::{cone_sphere, random_sphere};

#[test]
fn gluing_list_round_trips() {
    let t = cone_sphere(&random_sphere(10, 4).unwrap(), None).unwrap();
    let text = gluing_list(&t);
    let (n, rows) = parse_gluing_list(&text).unwrap();
    assert_eq!(n, t.tets.len());
    assert_eq!(rows.len(), t.gluings.len());
    for (row, g) in rows.iter().zip(&t.gluings) {
        assert_eq!(*row, (g.a.0, g.a.1, g.b.0, g.perm));
    }
    assert!(parse_gluing_list("3\n0 1 2\n").is_none());
    assert!(parse_gluing_list("").is_none());
}

#[test]
fn documents_carry_headers_and_counts() {
    let t = cone_sphere(&random_sphere(6, 2).unwrap(), None).unwrap();
    let doc = triangulation_document(&t);
    assert!(doc.starts_with("thickpart-triangulation 1\nvertices 7\n"));
    assert!(doc.contains("\ntetrahedra 8\n"));
    assert!(doc.contains("\ngluings 12\n"));
    assert!(doc.contains("\nboundary 8\n"));

    let cfg = RunConfig { length: 1.2, twist: 0.3, mu: 0.5, d: 0.4, ..RunConfig::default() };
    let dec = decompose(&cfg).unwrap();
    let net = net_document(&dec.net);
    assert!(net.starts_with("thickpart-net 1\n"));
    assert!(net.contains(&format!("\npoints {}\n", dec.net.len())));
    assert_eq!(net.lines().count(), 5 + dec.net.len());
    let mesh = mesh_document(&dec.cells);
    assert!(mesh.starts_with(&format!("thickpart-mesh 1\ncells {}\n", dec.cells.len())));
}
