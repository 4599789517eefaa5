use lumplab::io::{csv_bytes, fmt_f64, matrix_market, read_csv, read_matrix_market, read_trajectory};
use lumplab_core::linalg::SymMatrix;
use proptest::prelude::*;

proptest! {
    #[test]
    fn floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn matrix_market_is_exact(n in 1usize..7, vals in prop::collection::vec(-1e3f64..1e3, 49)) {
        let m = SymMatrix::from_fn(n, |i, j| if (i + j) % 3 == 0 { 0.0 } else { vals[i.max(j) * 7 + i.min(j)] });
        let text = String::from_utf8(matrix_market(&m)).unwrap();
        prop_assert_eq!(read_matrix_market(&text).unwrap(), m);
    }

    #[test]
    fn csv_keeps_rows(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 0..20)) {
        let cols: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let text: Vec<Vec<String>> = rows.iter().map(|r| r.iter().copied().map(fmt_f64).collect()).collect();
        let bytes = csv_bytes("x", "00", &cols, &text);
        let (meta, header, back) = read_csv(&bytes).unwrap();
        prop_assert_eq!(meta, "id=x, config_hash=00");
        prop_assert_eq!(header, cols);
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn truncated_trajectories_are_rejected(n in 1u64..4, count in 1u64..4, cut in 1usize..8) {
        let mut bytes = n.to_le_bytes().to_vec();
        bytes.extend_from_slice(&count.to_le_bytes());
        bytes.extend(std::iter::repeat_n(0u8, (3 * n * count * 8) as usize));
        prop_assert_eq!(read_trajectory(&bytes).unwrap().len(), count as usize);
        bytes.truncate(bytes.len() - cut);
        prop_assert!(read_trajectory(&bytes).is_err());
    }
}
