import math

import pytest
from hypothesis import given, settings, strategies as st

from symtc import bounds, maps
from symtc.bounds import BoundReport
from symtc.errors import NotPrime, UnverifiedWitness
from symtc.geometry import SpaceDescriptor


def _oracle_valuation(p, a, b):
    c, v = math.comb(a, b), 0
    while c % p == 0:
        c //= p
        v += 1
    return v


def test_alpha_examples():
    assert bounds.alpha(5) == 2
    assert bounds.alpha(0) == 0
    assert all(bounds.alpha(2**k) == 1 for k in range(40))
    with pytest.raises(ValueError):
        bounds.alpha(-1)


def test_binom_valuation_examples():
    assert bounds.binom_valuation(2, 10, 5) == 2  # C(10,5) = 252 = 4 * 63
    assert bounds.binom_valuation(3, 2, 1) == 0
    assert bounds.binom_valuation(2, 60, 30) == bounds.alpha(30) == 4
    with pytest.raises(NotPrime):
        bounds.binom_valuation(4, 10, 5)
    with pytest.raises(ValueError):
        bounds.binom_valuation(2, 3, 5)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([2, 3, 5, 7, 11, 13, 17, 101]), st.integers(0, 400), st.data())
def test_binom_valuation_matches_big_integer_oracle(p, a, data):
    b = data.draw(st.integers(0, a))
    assert bounds.binom_valuation(p, a, b) == _oracle_valuation(p, a, b)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 200), st.integers(0, 120), st.data())
def test_divides_binomial_matches_oracle(m, a, data):
    b = data.draw(st.integers(0, a))
    assert bounds.divides_binomial(m, a, b) == (math.comb(a, b) % m == 0)


def test_divides_binomial_examples():
    assert not bounds.divides_binomial(8, 10, 5)
    assert bounds.divides_binomial(4, 10, 5)
    assert bounds.divides_binomial(2, 2, 1)


def test_metastable_and_yasui():
    assert not bounds.metastable_ok(7, 11)
    assert bounds.metastable_ok(7, 12)
    assert bounds.metastable_ok(1, 3)
    assert [bounds.yasui_dim(n) for n in (1, 3, 10)] == [2, 10, 38]
    # agrees with the axial-range inequality 2s >= 3(r+1)
    for r in range(1, 30):
        for s in range(1, 60):
            assert bounds.metastable_ok(r, s) == (2 * s >= 3 * (r + 1))


def test_tc_lens_examples():
    assert bounds.tc_lens(5, 8).exact("TC") == 22
    assert bounds.tc_lens(3, 4).exact("TC") == 12
    assert bounds.tc_lens(3, 8).exact("TC") == 14
    # odd low torsion: 3 | C(4,2) = 6, only an upper bound
    rep = bounds.tc_lens(2, 3)
    assert rep.interval("TC") == (None, 11) and rep.exact("TC") is None
    # even, low torsion and m | C(2n-1, n): upper bound only
    rep = bounds.tc_lens(3, 2)  # C(6,3)=20, C(5,3)=10
    assert rep.select("TC", "upper") and not rep.select("TC", "exact")


def test_tc_lens_at_most_one_exact_branch():
    for n in range(0, 60):
        for m in range(2, 70):
            rep = bounds.tc_lens(n, m)
            exact = rep.select("TC", "exact")
            assert len(exact) <= 1
            if m % 2 and bounds.divides_binomial(m, 2 * n, n):
                assert not exact  # odd low torsion never claims exactness
            tcs = bounds.tcs_lens(n, m)
            assert tcs.interval("TCS")[1] == 4 * n + 3
            lo, hi = rep.interval("TC")
            assert (lo if lo is not None else hi) <= 4 * n + 3
            merged = bounds.bounds_for(SpaceDescriptor.lens(n, m))
            assert merged.consistent, merged.problems()


def test_tcs_lens_examples():
    assert bounds.tcs_lens(5, 8).interval("TCS") == (22, 23)
    assert bounds.tcs_lens(0, 2).interval("TCS")[1] == bounds.TABLE1[1][0] == 3
    assert bounds.tcs_lens(3, 4).interval("TCS") == (12, 15)
    assert bounds.tcs_lens(2, 3).interval("TCS") == (None, 11)
    assert not bounds.tcs_lens(2, 3).select("B_SNM")  # only for even torsion
    assert bounds.tcs_lens(5, 8).interval("B_SNM") == (11, None)


def test_tcs_rp():
    assert bounds.tcs_rp(1).exact("TCS") == 3
    assert bounds.tcs_rp(2).exact("TCS") == 5
    assert bounds.tcs_rp(7).interval("TCS") == (9, 11)
    assert bounds.tcs_rp(7).interval("LEVEL") == (8, 10)
    rep = bounds.tcs_rp(20)
    rels = {f.value for f in rep.select("TCS", "relation")}
    assert "TCS = E(r)+1" in rels and "TCS = LEVEL+1" in rels
    assert rep.interval("TCS") == (None, 41)
    assert "TCS = E(r)+1" not in {f.value for f in bounds.tcs_rp(3).select("TCS", "relation")}
    for r, (u, low) in bounds.TABLE1.items():
        assert low <= u


def test_tcs_rp_with_embedding_file(tmp_path, monkeypatch):
    data = tmp_path / "emb.txt"
    data.write_text("EMB_DIM rp r=16 31 exact external:test-table\nEMB_DIM rp r=3 5 exact external:test-table\n")
    records = bounds.load_known_results(data)
    rep = bounds.tcs_rp(16, records)
    assert rep.exact("TCS") == 32 and rep.exact("EMB_DIM") == 31
    # outside the theorem's range the embedding only gives an upper bound
    rep3 = bounds.tcs_rp(3, records)
    assert rep3.interval("TCS") == (5, 6) and not rep3.select("TCS", "exact")
    monkeypatch.setenv(bounds.KNOWN_RESULTS_ENV, str(data))
    assert bounds.bounds_for(SpaceDescriptor.rp(16)).exact("TCS") == 32


def test_known_results_parsing_errors():
    with pytest.raises(ValueError):
        bounds.parse_known_results("TC sphere - 2 exact\n")
    with pytest.raises(ValueError):
        bounds.parse_known_results("FOO sphere - 2 exact src\n")
    with pytest.raises(ValueError):
        bounds.parse_known_results("TC sphere - 2x+y exact src\n")
    assert [bounds.eval_affine(e, 5) for e in ("4n-3", "2n+1", "4n", "7", "-n+2")] == [17, 11, 20, 7, -3]


def test_tcs_cp_and_sphere():
    assert bounds.tcs_cp(1).exact("TCS") == 3
    assert bounds.tcs_cp(3).exact("TCS") == 7
    assert bounds.tcs_cp(17).exact("TC") == 35
    for r in range(1, 12):
        rep = bounds.tcs_sphere(r)
        assert rep.exact("TCS") == 3
        assert rep.exact("TC") == (2 if r % 2 else 3)
    assert bounds.sphere_tcs_difference(5) == 1 and bounds.sphere_tcs_difference(4) == 0


def test_report_consistency_checks():
    rep = BoundReport(SpaceDescriptor.rp(3)).add("TCS", "lower", 7, "x").add("TCS", "upper", 6, "y")
    assert not rep.consistent
    rep = BoundReport(SpaceDescriptor.rp(3)).add("TCS", "exact", 5, "x").add("TCS", "exact", 6, "y")
    assert "conflicting" in rep.problems()[0]
    with pytest.raises(ValueError):
        BoundReport(SpaceDescriptor.rp(3)).add("TCS", "upper", 6, "")
    with pytest.raises(ValueError):
        BoundReport(SpaceDescriptor.rp(3)).add("TCS", "relation", 6, "x")


def test_witness_upper():
    rep = bounds.witness_upper(maps.builtin_bilinear("complex"))
    assert rep.interval("TCS") == (None, 3)
    assert bounds.tcs_rp(1).extend(rep).consistent
    with pytest.raises(UnverifiedWitness):
        bounds.witness_upper(maps.builtin_bilinear("quaternion"))
    spec = maps.builtin_bilinear("poly", r=2)
    with pytest.raises(UnverifiedWitness):
        bounds.witness_upper(spec, reports=[maps.check_relations(spec, "AXIAL2", 100)])


def test_tables():
    t1 = bounds.table1()
    assert t1["all_match"] and len(t1["columns"]) == 12
    t2 = bounds.table2()
    assert t2["all_match"] and [row["n"] for row in t2["rows"]] == [3, 5, 9, 17]
    assert not any(row["extrapolated"] for row in t2["rows"])
    cells = {(c["quantity"], c["column"]): c for c in t2["rows"][0]["cells"]}
    assert cells["TC", "lens2^e"]["value"] == 14 and cells["TC", "lens2^e"]["source"] == "computed"
    assert cells["TC", "rp2n+1"]["value"] == 8  # 4n-4 at rho = 1
    assert cells["IMM", "cp"]["source"].startswith("external:")
    cells = {(c["quantity"], c["column"]): c["value"] for c in t2["rows"][1]["cells"]}
    assert cells["TC", "lens4"] == 20
    assert {(c["quantity"], c["column"]): c["value"] for c in t2["rows"][3]["cells"]}["TC", "cp"] == 35
    row5 = bounds.table2([5])["rows"][0]
    assert row5["extrapolated"] and row5["n"] == 33
