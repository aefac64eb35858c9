use lozenge::density::ScaledGeometry;
use lozenge_py::{geometry, region};

#[test]
fn region_kinds() {
    assert_eq!(region(2, 3, "2/3", "cut").unwrap().n, 3);
    assert!(region(2, 3, "1", "half-cut").is_ok());
    assert!(region(2, 3, "1", "hexagon").is_err());
    assert!(region(2, 3, "x", "cut").is_err());
}

#[test]
fn geometry_from_keywords() {
    let g = geometry("two-corner", |k| match k {
        "lambda" => Some(1.0),
        "nu" => Some(0.3),
        "theta" => Some(1.7),
        _ => None,
    })
    .unwrap();
    assert_eq!(g, ScaledGeometry::TwoCorner { lambda: 1.0, nu: 0.3, theta: 1.7 });
    let e = geometry("hexagon", |_| None).unwrap_err();
    assert!(e.to_string().contains("lambda"));
}
