use gfk::magd::{
    decode, encode, read_dataset, write_csv, write_dataset, HEADER_BYTES, RECORD_BYTES,
};
use gfk_core::synth::{generate_corpus, CorpusConfig, FlightDataset, Provenance, Record};
use proptest::prelude::*;

fn record(t: f64, v: f64, context: u16) -> Record {
    Record {
        t,
        position: [v, -v, 2.0 * v],
        orientation: [
            [1.0, 0.0, 0.0],
            [0.0, v.cos(), -v.sin()],
            [0.0, v.sin(), v.cos()],
        ],
        clean: [v * 1e4, 0.1 * v, -3.0],
        measured: [v * 1e4 + 1.0, 0.1 * v, -2.5],
        context,
    }
}

fn dataset(n: usize) -> FlightDataset {
    FlightDataset::new(
        (0..n)
            .map(|i| record(0.1 * i as f64, i as f64 / 7.0, (i % 9) as u16))
            .collect(),
        9,
    )
    .unwrap()
}

#[test]
fn generated_flight_round_trips_bitwise() {
    let (_, flights) = generate_corpus(&CorpusConfig {
        duration: 30.0,
        ..Default::default()
    })
    .unwrap();
    let ds = &flights[4].dataset;
    let bytes = encode(ds).unwrap();
    assert_eq!(bytes.len(), HEADER_BYTES + ds.len() * RECORD_BYTES);
    let back = decode(&bytes).unwrap();
    assert_eq!(&back, ds);
    assert_eq!(encode(&back).unwrap(), bytes);
}

#[test]
fn one_record_dataset_round_trips() {
    let ds = dataset(1);
    assert_eq!(decode(&encode(&ds).unwrap()).unwrap(), ds);
}

#[test]
fn header_layout() {
    let bytes = encode(&dataset(3)).unwrap();
    assert_eq!(&bytes[..4], b"MAGD");
    assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
    assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 3);
    assert_eq!(u32::from_le_bytes(bytes[10..14].try_into().unwrap()), 9);
    assert_eq!(f64::from_le_bytes(bytes[14..22].try_into().unwrap()), 0.0);
}

#[test]
fn corrupt_files_are_format_errors() {
    let good = encode(&dataset(5)).unwrap();
    let mut magic = good.clone();
    magic[0] = b'X';
    let mut version = good.clone();
    version[4] = 2;
    let truncated = good[..good.len() - 1].to_vec();
    let mut trailing = good.clone();
    trailing.push(0);
    // swap the timestamps of records 1 and 2
    let mut order = good.clone();
    let (a, b) = (HEADER_BYTES + RECORD_BYTES, HEADER_BYTES + 2 * RECORD_BYTES);
    let ta: [u8; 8] = order[a..a + 8].try_into().unwrap();
    let tb: [u8; 8] = order[b..b + 8].try_into().unwrap();
    order[a..a + 8].copy_from_slice(&tb);
    order[b..b + 8].copy_from_slice(&ta);
    for (name, bytes) in [
        ("magic", magic),
        ("version", version),
        ("truncated", truncated),
        ("trailing", trailing),
        ("order", order),
        ("empty", Vec::new()),
    ] {
        let e = decode(&bytes).unwrap_err();
        assert_eq!(e.exit_code(), 3, "{name}: {e}");
    }
}

#[test]
fn generated_provenance_uses_footer() {
    let mut ds = dataset(4);
    let plain = encode(&ds).unwrap();
    ds.provenance = Provenance::Generated;
    let tagged = encode(&ds).unwrap();
    assert_eq!(tagged.len(), plain.len() + 5);
    assert_eq!(&tagged[plain.len()..plain.len() + 4], b"PROV");
    assert_eq!(decode(&tagged).unwrap().provenance, Provenance::Generated);
    assert_eq!(decode(&plain).unwrap().provenance, Provenance::Physics);
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.magd");
    let ds = dataset(20);
    write_dataset(&ds, &path).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), ds);
    assert_eq!(
        read_dataset(&dir.path().join("missing.magd"))
            .unwrap_err()
            .exit_code(),
        3
    );
}

#[test]
fn csv_mirror_holds_every_value() {
    let ds = dataset(6);
    let mut buf = Vec::new();
    write_csv(&ds, &mut buf).unwrap();
    let mut r = csv::Reader::from_reader(&buf[..]);
    assert_eq!(r.headers().unwrap().len(), 20);
    for (row, rec) in r.records().zip(&ds.records) {
        let row = row.unwrap();
        let vals: Vec<f64> = row.iter().take(19).map(|s| s.parse().unwrap()).collect();
        let expect: Vec<f64> = std::iter::once(rec.t)
            .chain(rec.position)
            .chain(rec.orientation.into_iter().flatten())
            .chain(rec.clean)
            .chain(rec.measured)
            .collect();
        assert_eq!(vals, expect);
        assert_eq!(row[19].parse::<u16>().unwrap(), rec.context);
    }
}

proptest! {
    #[test]
    fn arbitrary_records_round_trip(
        steps in prop::collection::vec(1e-6..10.0f64, 1..40),
        vals in prop::collection::vec(-1e6..1e6f64, 40),
        start in -1e3..1e3f64,
    ) {
        let mut t = start;
        let records: Vec<Record> = steps.iter().zip(&vals).enumerate().map(|(i, (dt, v))| {
            t += dt;
            record(t, *v, (i % 9) as u16)
        }).collect();
        let ds = FlightDataset::new(records, 9).unwrap();
        let bytes = encode(&ds).unwrap();
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(&back, &ds);
        prop_assert_eq!(encode(&back).unwrap(), bytes);
    }
}
