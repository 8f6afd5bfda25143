use blockade_web::{eject_profile_impl, emission_heatmap_impl, excitation_curve_impl, MAX_DEMO_ATOMS};

#[test]
fn heatmap_peaks_at_centre_with_value_n() {
    let px = 41;
    let map = emission_heatmap_impl(30, 5.0, 0.78, 10.0, 15.0, px, 3).unwrap();
    assert_eq!(map.len(), px * px);
    let centre = map[(px / 2) * px + px / 2];
    assert!((centre - 30.0).abs() < 1e-9);
    assert!(map.iter().all(|v| *v <= 30.0 + 1e-9 && *v >= 0.0));
}

#[test]
fn single_atom_heatmap_is_flat() {
    let map = emission_heatmap_impl(1, 5.0, 0.78, 0.0, 20.0, 9, 1).unwrap();
    assert!(map.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn excitation_curve_reaches_single_excitation_at_pi() {
    let points = 21;
    let curve = excitation_curve_impl(6, 5.0, 1.0, points, 2).unwrap();
    assert_eq!(curve.len(), 4 * points);
    let mid = &curve[4 * (points / 2)..4 * (points / 2) + 4];
    assert!(mid[2] > 0.99, "{mid:?}");
    for row in curve.chunks(4) {
        assert!((row[1] + row[2] + row[3] - 1.0).abs() < 1e-9);
    }
    assert!(excitation_curve_impl(MAX_DEMO_ATOMS + 1, 5.0, 1.0, 5, 1).is_err());
}

#[test]
fn eject_profile_separates_the_states() {
    let rows = eject_profile_impl(9.0, 1.0, 3.0, 101).unwrap();
    assert_eq!(rows.len(), 3 * 101);
    let centre = &rows[3 * 50..3 * 50 + 3];
    assert!(centre[0].abs() < 1e-9);
    // |b> is pushed up by the blue-detuned beam, |a> stays deeply trapped
    assert!(centre[2] > centre[1]);
    let bare = eject_profile_impl(0.0, 1.0, 3.0, 11).unwrap();
    assert!(bare.chunks(3).all(|r| (r[1] - r[2]).abs() < 1e-9));
}
