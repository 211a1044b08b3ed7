use austere_web::{circle_csv, critical_spectrum, summarize};

#[test]
fn point_summary() {
    let s = summarize(3.0, 1.0, "H").unwrap();
    assert_eq!(s.multiplicities, [4, 4, 4, 4, 9]);
    let r = 20f64.sqrt();
    assert!((s.diagonal[0] - 3.0 / r).abs() < 1e-15);
    assert!(s.kappas.iter().sum::<f64>().abs() < 1e-12);
    assert!(summarize(1.0, 1.0, "R").is_err());
    assert!(summarize(1.0, 0.5, "Q").is_err());
}

#[test]
fn circle_csv_is_constant() {
    let csv = circle_csv(3.0, 1.0, "C", 2, 9).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        for k in 1..6 {
            assert!((r[k] - rows[0][k]).abs() < 1e-9);
        }
    }
    assert!(circle_csv(3.0, 1.0, "C", 4, 9).is_err());
}

#[test]
fn critical_spectrum_of_first_normal() {
    let s = critical_spectrum("R", &[1.0, 0.0, 0.0, 0.0], &[0.0; 4], 0.0, 0.0).unwrap();
    assert_eq!(s.len(), 4);
    assert!(s.iter().sum::<f64>().abs() < 1e-12);
    assert!(critical_spectrum("R", &[0.0, 1.0, 0.0, 0.0], &[0.0; 4], 0.0, 0.0).is_err());
    assert!(critical_spectrum("R", &[1.0], &[0.0; 4], 0.0, 0.0).is_err());
}
