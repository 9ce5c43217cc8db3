use homfit_photonics::*;

#[test]
fn taper_from_solver_table() {
    let g = WaveguideGeometry::gaas(300.0);
    let widths: Vec<f64> = (0..=7).map(|k| 118.0 + 26.0 * k as f64).collect();
    let table = sweep_neff(&g, &widths, &ModeGrid::standard(&g)).unwrap();
    let src = NeffSource::Table(table);
    let p1 = generate_taper(300.0, 118.0, 1.0, 1.0, &src).unwrap();
    let p10 = generate_taper(300.0, 118.0, 1.0, 10.0, &src).unwrap();
    assert!(p1.residuals().iter().all(|r| r.abs() < 1e-9));
    assert!((p10.total_length_um - 10.0 * p1.total_length_um).abs() < 1e-9 * p10.total_length_um);
    assert_eq!(p1.widths_nm, p10.widths_nm);
    for w in p1.widths_nm.windows(2) {
        assert!(w[1] < w[0]);
    }
    // the scalar indices stay well above 1, so the taper is short
    assert!(p1.total_length_um > 0.05 && p1.total_length_um < 0.3, "{}", p1.total_length_um);
}

#[test]
fn taper_csv_round_trip_shape() {
    let p = generate_taper(300.0, 118.0, 1.0, 1.0, &NeffSource::Constant(2.0)).unwrap();
    let csv = write_taper(&p);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "z_um,width_nm");
    assert_eq!(rows.len(), p.z_um.len() + 1);
}

#[test]
fn overlap_with_itself_and_with_gaussian() {
    let g = WaveguideGeometry::gaas(118.0);
    let m = solve_scalar_mode(&g, &ModeGrid::standard(&g)).unwrap();
    assert!((overlap(&m.field, &m.field).unwrap() - 1.0).abs() < 1e-12);
    let eta = mode_overlap(&m, 2.5).unwrap();
    assert!((0.0..=1.0).contains(&eta));
}
