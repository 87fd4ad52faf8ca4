#![no_main]
use libfuzzer_sys::fuzz_target;
use std::io::Cursor;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = digc::ingest::read_matrix(&mut Cursor::new(data)) {
        let mut buf = Vec::new();
        digc::ingest::write_matrix(&mut buf, &m).unwrap();
        let back = digc::ingest::read_matrix(&mut Cursor::new(&buf)).unwrap();
        assert_eq!(back, m);
    }
});
