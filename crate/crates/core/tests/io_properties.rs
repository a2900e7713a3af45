use proptest::prelude::*;

use confined_ep::io::{read_profile, write_table, PROFILE_HEADER};
use confined_ep::Error;

proptest! {
    #[test]
    fn profiles_round_trip_bit_for_bit(rows in prop::collection::vec((1e-6f64..1e3, 0.0f64..1e6, -1e3f64..1e3), 1..40)) {
        let mut buf = Vec::new();
        write_table(&mut buf, &PROFILE_HEADER, rows.iter().map(|&(r, p, u)| [r, p, u])).unwrap();
        let back = read_profile(buf.as_slice()).unwrap();
        for (i, &(r, p, u)) in rows.iter().enumerate() {
            prop_assert_eq!(back.r[i].to_bits(), r.to_bits());
            prop_assert_eq!(back.p0[i].to_bits(), p.to_bits());
            prop_assert_eq!(back.u0[i].to_bits(), u.to_bits());
        }
    }

    #[test]
    fn a_bad_cell_is_reported_on_its_line(n in 1usize..30, bad in 0usize..30) {
        let bad = bad % n;
        let mut text = String::from("r,P0,u0\n");
        for i in 0..n {
            if i == bad {
                text.push_str("0.5,not-a-number,0\n");
            } else {
                text.push_str(&format!("{},1.0,0.0\n", 0.1 * (i + 1) as f64));
            }
        }
        match read_profile(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => prop_assert_eq!(line, bad + 2),
            other => prop_assert!(false, "unexpected {:?}", other.map(|s| s.r.len())),
        }
    }
}
