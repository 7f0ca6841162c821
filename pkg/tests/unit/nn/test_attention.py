"""
Unit tests for the skew trick, relative scores and 2D attention.
"""

import numpy as np
import pytest

from portfolio_rl.errors import ConfigError, ShapeError
from portfolio_rl.nn import (
    RelAttentionConfig,
    RelativeAttention2D,
    attention_2d,
    relative_logits,
    skew,
)
from portfolio_rl.tensor import Parameter, Tensor, reduce_sum

from tests.conftest import check_gradients


def brute_force_attention(x, w_q, w_k, w_v, e_time, e_asset, heads):
    """Token-by-token reference for a single (L, H, D) grid."""
    L, H, D = x.shape
    dh = D // heads
    tokens = x.reshape(L * H, D)
    q, k, v = tokens @ w_q, tokens @ w_k, tokens @ w_v
    out = np.zeros((L * H, D))
    for g in range(heads):
        cols = slice(g * dh, (g + 1) * dh)
        logits = np.zeros((L * H, L * H))
        for n in range(L * H):
            ln, an = divmod(n, H)
            for m in range(L * H):
                lm, am = divmod(m, H)
                s = q[n, cols] @ k[m, cols]
                if e_time is not None:
                    s += q[n, cols] @ e_time[g, L - 1 - abs(ln - lm)]
                    s += q[n, cols] @ e_asset[g, H - 1 - abs(an - am)]
                logits[n, m] = s / np.sqrt(dh)
        w = np.exp(logits - logits.max(axis=1, keepdims=True))
        w /= w.sum(axis=1, keepdims=True)
        out[:, cols] = w @ v[:, cols]
    return out.reshape(L, H, D)


def random_case(rng, L=4, H=3, D=8, heads=2):
    cfg = RelAttentionConfig(L, H, D, heads)
    dh = D // heads
    return cfg, {
        "x": rng.normal(size=(L, H, D)),
        "w_q": rng.normal(scale=0.5, size=(D, D)),
        "w_k": rng.normal(scale=0.5, size=(D, D)),
        "w_v": rng.normal(scale=0.5, size=(D, D)),
        "e_time": rng.normal(scale=0.5, size=(heads, L, dh)),
        "e_asset": rng.normal(scale=0.5, size=(heads, H, dh)),
    }


def test_skew_hand_trace_n2():
    out = skew(Tensor([[1.0, 2.0], [3.0, 4.0]])).data
    assert out[0, 0] == 2.0
    assert out[1, 0] == 3.0
    assert out[1, 1] == 4.0


def test_skew_single_element():
    assert skew(Tensor([[7.0]])).data.tolist() == [[7.0]]


def test_skew_lower_triangle_matches_index_formula(rng):
    t = rng.normal(size=(5, 5))
    s = skew(Tensor(t)).data
    for i in range(5):
        for j in range(i + 1):
            assert s[i, j] == t[i, j - i + 4]


def test_skew_keeps_leading_axes(rng):
    t = rng.normal(size=(2, 3, 4, 4))
    s = skew(Tensor(t)).data
    assert s.shape == (2, 3, 4, 4)
    assert np.array_equal(s[1, 2], skew(Tensor(t[1, 2])).data)


def test_skew_rejects_non_square():
    with pytest.raises(ShapeError):
        skew(Tensor(np.ones((2, 3))))


def test_relative_logits_match_distance_oracle(rng):
    h, n, d = 2, 6, 3
    q, e = rng.normal(size=(h, n, d)), rng.normal(size=(h, n, d))
    got = relative_logits(Tensor(q), Tensor(e)).data
    for g in range(h):
        for i in range(n):
            for j in range(n):
                want = q[g, i] @ e[g, n - 1 - abs(i - j)]
                assert got[g, i, j] == pytest.approx(want, abs=1e-12)


def test_relative_logits_symmetric_in_distance(rng):
    q = np.repeat(rng.normal(size=(1, 1, 4)), 5, axis=1)
    got = relative_logits(Tensor(q), Tensor(rng.normal(size=(1, 5, 4)))).data[0]
    assert np.allclose(got, got.T, atol=1e-12)


def test_zero_embedding_gives_zero_logits(rng):
    got = relative_logits(Tensor(rng.normal(size=(2, 4, 3))), Tensor(np.zeros((2, 4, 3))))
    assert np.array_equal(got.data, np.zeros((2, 4, 4)))


ORACLE_GRID = [(L, H, heads) for L in range(1, 7) for H in range(1, 5) for heads in (1, 2)]


@pytest.mark.parametrize("L,H,heads", ORACLE_GRID)
def test_attention_matches_brute_force(L, H, heads):
    for seed in range(20):
        rng = np.random.default_rng(seed)
        cfg, p = random_case(rng, L=L, H=H, D=4, heads=heads)
        got = attention_2d(*(Tensor(p[k]) for k in p), cfg).data
        want = brute_force_attention(
            p["x"], p["w_q"], p["w_k"], p["w_v"], p["e_time"], p["e_asset"], heads
        )
        assert np.max(np.abs(got - want)) < 1e-10, f"seed {seed}"


def test_attention_without_relative_terms_matches_brute_force(rng):
    cfg, p = random_case(rng)
    got = attention_2d(
        Tensor(p["x"]), Tensor(p["w_q"]), Tensor(p["w_k"]), Tensor(p["w_v"]), None, None, cfg,
        relative=False,
    ).data
    want = brute_force_attention(p["x"], p["w_q"], p["w_k"], p["w_v"], None, None, 2)
    assert np.allclose(got, want, atol=1e-10)


def test_single_position_returns_value_projection(rng):
    cfg, p = random_case(rng, L=1, H=1, D=4, heads=2)
    got = attention_2d(*(Tensor(p[k]) for k in p), cfg).data
    assert np.allclose(got, p["x"] @ p["w_v"], atol=1e-12)


def test_attention_rows_sum_to_one(rng):
    cfg, p = random_case(rng)
    _, weights = attention_2d(*(Tensor(p[k]) for k in p), cfg, return_attention=True)
    assert weights.shape == (2, 12, 12)
    assert np.all(weights.data >= 0)
    assert np.allclose(weights.data.sum(axis=-1), 1.0, atol=1e-12)


def test_zero_embeddings_equal_plain_attention(rng):
    cfg, p = random_case(rng)
    weights = [Tensor(p[k]) for k in ("x", "w_q", "w_k", "w_v")]
    zeros = [Tensor(np.zeros_like(p["e_time"])), Tensor(np.zeros_like(p["e_asset"]))]
    with_rel = attention_2d(*weights, *zeros, cfg).data
    without = attention_2d(*weights, None, None, cfg, relative=False).data
    assert np.allclose(with_rel, without, atol=1e-12)


def test_batched_matches_unbatched(rng):
    cfg, p = random_case(rng)
    x2 = rng.normal(size=p["x"].shape)
    rest = [Tensor(p[k]) for k in ("w_q", "w_k", "w_v", "e_time", "e_asset")]
    batched = attention_2d(Tensor(np.stack([p["x"], x2])), *rest, cfg).data
    assert batched.shape == (2, 4, 3, 8)
    assert np.allclose(batched[0], attention_2d(Tensor(p["x"]), *rest, cfg).data, atol=1e-12)
    assert np.allclose(batched[1], attention_2d(Tensor(x2), *rest, cfg).data, atol=1e-12)


def test_attention_gradients_match_finite_differences(rng):
    cfg, p = random_case(rng, L=3, H=2, D=4, heads=2)
    leaves = {k: Parameter(v) for k, v in p.items()}
    target = rng.normal(size=(3, 2, 4))

    def loss():
        return reduce_sum(attention_2d(*leaves.values(), cfg) * target)

    check_gradients(loss, leaves)


def test_module_without_relative_terms_has_no_embeddings(rng):
    cfg = RelAttentionConfig(3, 2, 4, 2)
    plain = RelativeAttention2D(cfg, rng, relative=False)
    assert set(plain.named_parameters()) == {"w_q", "w_k", "w_v"}
    full = RelativeAttention2D(cfg, rng)
    assert full.e_time.shape == (2, 3, 2)
    assert full.e_asset.shape == (2, 2, 2)


def test_config_rejects_indivisible_heads():
    with pytest.raises(ConfigError):
        RelAttentionConfig(3, 2, 6, 4)


def test_wrong_input_grid_shape(rng):
    cfg, p = random_case(rng)
    with pytest.raises(ShapeError):
        attention_2d(
            Tensor(np.ones((4, 2, 8))), *(Tensor(p[k]) for k in list(p)[1:]), cfg
        )
