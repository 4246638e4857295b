"""Smoke test for the permex Python module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/permex-*.whl
"""

import os
import tempfile

import permex


def main():
    m = permex.PermutationMap.from_one_based([3, 4, 1, 2])
    assert m.apply("1011") == "1110"
    assert m.invert() == m
    assert permex.PermutationMap.from_one_based([2, 3, 1]).invert().to_one_based() == [3, 1, 2]

    counter = permex.EntropySource.counter()
    assert counter.next_bits(8) == "00000000"
    assert counter.next_bits(8) == "00000001"
    assert counter.position == 16

    text = (
        b"The harbor was quiet before dawn, and the boats rocked against their "
        b"ropes while gulls argued over scraps on the pier. " * 20
    )
    src = permex.EntropySource.from_hex("c0ffee")
    pset = permex.PermutationSet.generate(256, 16, src)
    assert (pset.block_size, pset.count, len(pset.maps)) == (256, 16, 16)

    out, trace = permex.expand(text, pset, src)
    assert len(out) == len(text)
    assert permex.invert(out, trace) == text
    before, after = permex.analyze(text), permex.analyze(out)
    assert after["entropy"] > before["entropy"]
    cmp = permex.compare(text, out)
    assert cmp["chi_square"]["percent_change"] > 90

    src2 = permex.EntropySource.from_hex("c0ffee")
    again, _ = permex.expand(text, permex.PermutationSet.generate(256, 16, src2), src2)
    assert again == out

    small = permex.PermutationSet([permex.PermutationMap.from_one_based([3, 4, 1, 2])])
    bits, bit_trace = permex.expand_bits("1011001", small, src, "pad")
    assert bits == "11101000"
    assert permex.invert_bits(bits, bit_trace) == "1011001"

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "key.pxk")
        trace.save(path)
        loaded = permex.KeyTrace.load(path)
        assert loaded.to_bytes() == trace.to_bytes()
        assert permex.invert(out, loaded) == text
        permex.save_keys([trace, trace], path)
        assert len(permex.load_keys(path)) == 2

    corrupt = bytearray(trace.to_bytes())
    corrupt[40] ^= 0x01
    try:
        permex.KeyTrace.from_bytes(bytes(corrupt))
        raise AssertionError("corruption not detected")
    except permex.KeyFileError:
        pass

    pool = permex.EntropySource.from_bytes(b"\x00" * 4)
    try:
        permex.PermutationSet.generate(256, 16, pool)
        raise AssertionError("exhaustion not raised")
    except permex.EntropyExhausted:
        pass

    report = permex.analyze(bytes(range(256)))
    assert report["entropy"] == 8.0 and report["mean"] == 127.5 and report["chi_square"] == 0.0

    print("permex smoke test passed")


if __name__ == "__main__":
    main()
