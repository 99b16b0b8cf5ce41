use schmidt_demo::{embezzler_search_json, losr_fidelity_json, lu_decay_curve_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn decay_curve_has_one_point_per_copy() {
    let v = parse(lu_decay_curve_json(0.55, 0.65, 10).unwrap());
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 10);
    let single = ((0.55f64 * 0.65).sqrt() + (0.45f64 * 0.35).sqrt()).powi(2);
    assert!((pts[0]["f_lu"].as_f64().unwrap() - single).abs() < 1e-12);
    assert!(lu_decay_curve_json(0.55, 0.65, 0).is_err());
    assert!(lu_decay_curve_json(1.5, 0.65, 3).is_err());
}

#[test]
fn embezzler_search_improves_on_no_catalyst() {
    let v = parse(embezzler_search_json(0.5, 0.7, 2, 0.01).unwrap());
    let plain = v["f_plain"].as_f64().unwrap();
    let f = v["search"]["fidelity"].as_f64().unwrap();
    assert!(f >= plain && f > 0.979, "{f} {plain}");
    assert_eq!(v["search"]["catalyst"]["weights"].as_array().unwrap().len(), 2);
    assert!(embezzler_search_json(0.5, 0.7, 9, 0.01).is_err());
}

#[test]
fn losr_matches_core() {
    let v = parse(losr_fidelity_json("0.85,0.08,0.07", "0.45, 0.45, 0.1", 0.005).unwrap());
    let lo = v["losr"]["fidelity_lower_bound"].as_f64().unwrap();
    assert!(lo > 0.8212 && lo <= 0.8836345334875148 + 1e-12, "{lo}");
    assert!(v["f_lu"].as_f64().unwrap() <= lo);
    // Unsorted and unnormalized input is accepted.
    let w = parse(losr_fidelity_json("0.07,0.85,0.08", "2,9,9", 0.005).unwrap());
    assert_eq!(v["losr"], w["losr"]);
    let e = losr_fidelity_json("0.5,x", "1", 0.01).unwrap_err();
    assert!(e.contains("target") && e.contains("entry 1"), "{e}");
}
