import numpy as np
import pytest

from helpers import CASE_STUDY
from proofloop import kb as K
from proofloop.design import Design
from proofloop.rtl import chunk_design, parse_source

GROUPING = """
module g(input logic clk, input logic a, output logic x, output logic y, output logic z, output logic r, output logic s);
  assign x = a;
  assign y = ~a;
  assign z = a ^ x;
  always_ff @(posedge clk) r <= a;
  always_comb s = r;
endmodule
"""

SPLIT = """
module h(input logic clk, input logic a, output logic x, output logic r, output logic y);
  assign x = a;
  always_ff @(posedge clk) r <= a;
  assign y = r;
endmodule
"""


def _kb(text, top):
    unit = parse_source([("t.sv", text)])
    return K.build_index(chunk_design(unit), top)


def test_chunk_grouping_rule():
    kinds = [c.kind for c in chunk_design(parse_source([("g.sv", GROUPING)]))]
    assert len(kinds) == 4
    assert kinds.count("Assign") == 1 and kinds.count("AlwaysBlock") == 2
    kinds = [c.kind for c in chunk_design(parse_source([("h.sv", SPLIT)]))]
    assert kinds.count("Assign") == 2


class TestEmbedder:
    def test_unit_norm_and_deterministic(self):
        e = K.TrigramEmbedder()
        v = e.embed(["always_ff @(posedge clk) q <= d;", "assign y = a & b;"])
        assert v.shape == (2, K.DEFAULT_DIM)
        assert np.allclose(np.linalg.norm(v, axis=1), 1.0)
        assert np.array_equal(v, K.TrigramEmbedder().embed(["always_ff @(posedge clk) q <= d;",
                                                              "assign y = a & b;"]))

    def test_cosine_self_is_one(self):
        a = K.embed_text("reset behavior")
        assert K.cosine(a, a) == pytest.approx(1.0)


class TestIndex:
    def test_save_load_round_trip(self, tmp_path):
        kb = _kb(GROUPING, "g")
        kb.save(tmp_path / "kb.jsonl")
        back = K.KnowledgeBase.load(tmp_path / "kb.jsonl")
        assert [c.chunk_id for c in back.chunks] == [c.chunk_id for c in kb.chunks]
        assert np.array_equal(back.vectors, kb.vectors)
        assert K.semantic_search(back, "posedge clk", 2) == K.semantic_search(kb, "posedge clk", 2)

    def test_empty_index(self):
        with pytest.raises(K.KBError) as exc:
            K.build_index([], "x")
        assert exc.value.code == "empty_index"

    def test_embedder_mismatch(self):
        kb = _kb(GROUPING, "g")
        q = K.EmbeddingVector(np.ones(K.DEFAULT_DIM) / np.sqrt(K.DEFAULT_DIM), "other-embedder")
        with pytest.raises(K.KBError) as exc:
            K.search_vector(kb, q, 1)
        assert exc.value.code == "embedder_mismatch"

    def test_dimension_mismatch(self):
        kb = _kb(GROUPING, "g")
        q = K.EmbeddingVector(np.ones(8) / np.sqrt(8), kb.embedder_id)
        with pytest.raises(K.KBError) as exc:
            K.search_vector(kb, q, 1)
        assert exc.value.code == "dimension_mismatch"

    def test_k_larger_than_index(self):
        kb = _kb(GROUPING, "g")
        assert len(K.semantic_search(kb, "assign", 50)) == len(kb)

    def test_ties_break_on_chunk_id(self):
        ids = ["b" * 16, "a" * 16, "c" * 16]
        scores = np.array([0.5, 0.5, 0.9])
        assert [c for c, _ in K.rank(scores, ids, 3)] == ["c" * 16, "a" * 16, "b" * 16]


class TestQueries:
    def test_interface_query(self):
        kb = _kb(GROUPING, "g")
        c = K.interface_query(kb, "g")
        assert c.kind == "ModuleInterface" and "module g" in c.canonical_text
        with pytest.raises(K.KBError) as exc:
            K.interface_query(kb, "nope")
        assert exc.value.code == "unknown_module"

    def test_signal_blocks_match_ast_walk(self):
        d = Design.from_paths([CASE_STUDY / "design"], "ctrl_top")
        kb = d.knowledge_base()
        from proofloop.rtl import ast as A

        for sig in ("ready", "state", "cnt", "rst_n"):
            expected = set()
            for m in d.unit.modules:
                for blk in m.always_blocks:
                    names = set()
                    for s in A.iter_stmts(blk.body):
                        if isinstance(s, A.Assign):
                            names |= A.lvalue_target_names(s.lhs) | A.expr_names(s.rhs)
                            names |= A.expr_names(s.lhs) - A.lvalue_target_names(s.lhs)
                        elif isinstance(s, A.If):
                            names |= A.expr_names(s.cond)
                        elif isinstance(s, A.Case):
                            names |= A.expr_names(s.subject)
                            for item in s.items:
                                for lab in item.labels:
                                    names |= A.expr_names(lab)
                    if sig in names:
                        expected.add((m.name, blk.span.line))
            got = {(c.owner_module, c.source_span.line) for c in K.signal_blocks_query(kb, sig)}
            assert got == expected, sig

    def test_unknown_signal(self):
        kb = _kb(GROUPING, "g")
        with pytest.raises(K.KBError) as exc:
            K.signal_blocks_query(kb, "no_such_sig")
        assert exc.value.code == "unknown_signal"


def test_reset_query_prefers_ready_block_over_adder():
    d = Design.from_paths([CASE_STUDY / "design"], "ctrl_top")
    kb = d.knowledge_base()
    q = K.embed_text("reset behavior of ready register")
    blocks = {c.owner_module: c for c in kb.chunks if c.kind == "AlwaysBlock"}
    ready_vec = kb.vectors[kb.chunks.index(blocks["ready_sync"])]
    adder_vec = kb.vectors[kb.chunks.index(blocks["beat_counter"])]
    assert float(ready_vec @ q.values) > float(adder_vec @ q.values)
