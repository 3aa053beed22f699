//! Mutation fuzzing of both parsers: no panics, located rejections.

mod common;

#[test]
fn mutated_documents_never_panic() {
    let s = common::fuzz_parsers(100_000, 0x5eed_0001);
    assert_eq!(s.inputs, 100_000);
    assert!(s.rejected > 0);
    assert!(s.unlocated.is_empty(), "{:?}", &s.unlocated[..s.unlocated.len().min(5)]);
}
