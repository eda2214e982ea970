use magnon_blockade_wasm::{curve, optimum_values};

#[test]
fn optimum_is_a_perfect_blockade() {
    let [d, g, g2] = optimum_values(4e-3, 0.1).unwrap();
    assert!((d - 0.2869).abs() < 1e-4);
    assert!((g - 9.883).abs() < 1e-3);
    assert!(g2 < 1e-18);
    let [dm, ..] = optimum_values(-4e-3, 0.1).unwrap();
    assert_eq!(dm, -d);
    assert!(optimum_values(0.0, 0.1).is_err());
}

#[test]
fn g2_curve_holds_both_kerr_signs() {
    let [_, g, _] = optimum_values(4e-3, 0.1).unwrap();
    let v = curve("g2", "delta", -1.0, 1.0, 201, 0.0, g, 4e-3, 0.1, false).unwrap();
    assert_eq!(v.len(), 402);
    let (pos, neg) = v.split_at(201);
    // mirror images of each other
    for i in 0..201 {
        assert!((pos[i] - neg[200 - i]).abs() <= 1e-9 * pos[i].max(1e-30));
    }
}

#[test]
fn contrast_curve_vanishes_for_identical_spheres() {
    let v = curve("contrast", "delta", -1.0, 1.0, 21, 0.0, 9.88, 4e-3, 0.1, true).unwrap();
    assert_eq!(v.len(), 21);
    assert!(v.iter().all(|c| c.abs() < 1e-9));
}

#[test]
fn bad_inputs_are_errors() {
    assert!(curve("g2", "nope", 0.0, 1.0, 5, 0.0, 1.0, 4e-3, 0.1, false).is_err());
    assert!(curve("g3", "delta", 0.0, 1.0, 5, 0.0, 1.0, 4e-3, 0.1, false).is_err());
    assert!(curve("g2", "delta", 0.0, 1.0, 1, 0.0, 1.0, 4e-3, 0.1, false).is_err());
}
