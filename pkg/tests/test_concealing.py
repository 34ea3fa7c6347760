import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import EQ20_WORD, quiet_bundle, zero_tape
from crs.bitcodec import ade, as_bits, dae, random_word
from crs.concealing import (
    ConcealedBundle, ConcealError, DataFormatError, conceal, conceal_linear, conceal_nonlinear,
    read_data, write_data,
)
from crs.keys import generate_noise_tape, keygen, rng_for
from crs.nonlinear import G_SS, apply_extended, inverse, get


def straight_line(word, bundle, tape, v):
    """Per-index concealment written out longhand, sharing no code with the package."""
    x = [float(c) for c in word]
    n = len(x)
    out = []
    for i, lv in enumerate(bundle.levels):
        u = []
        for k in range(n):
            x_next = x[k + 1] if k + 1 < n else x[k]
            u.append((x_next - lv.a * x[k] - lv.b * v[i][k]) / lv.b_u + tape.w1[i][k])
        out.append(u)
        x = [x[k] + tape.w2[i][k] for k in range(n)]
    out.append(x)
    return np.array(out)


def test_matches_straight_line_oracle():
    bundle = keygen(2, seed=5)
    word = "001101"  # ancilla + K=5 payload 01101
    tape = generate_noise_tape(bundle, 6, 17)
    v = bundle.key_streams(6)
    got = conceal_linear(dae(word), bundle, tape).u
    assert np.array_equal(got, straight_line(word, bundle, tape, v))


def test_matches_oracle_with_odd_parameters():
    bundle = keygen(3, a=-0.7, b=2.5, b_u=0.3, sigma1=0.5, seed=8, v_mode="real")
    tape = generate_noise_tape(bundle, 9, 2)
    word = "011010011"
    got = conceal_linear(dae(word), bundle, tape).u
    np.testing.assert_allclose(got, straight_line(word, bundle, tape, bundle.key_streams(9)), rtol=1e-14, atol=1e-14)


def test_zero_noise_is_a_shift():
    x = dae("0110100111")
    u = conceal_linear(x, quiet_bundle(), zero_tape(1, 10)).u
    assert np.array_equal(u[0][:-1], x[1:])
    assert u[0][-1] == x[-1]  # hold-last boundary
    assert np.array_equal(u[1], x)


def test_g_ss_zero_noise_values():
    x = dae("0110100111")
    u = conceal_nonlinear(x, quiet_bundle(nonlinear_id="g_ss"), zero_tape(1, 10)).u
    expect = np.where(np.append(x[1:], x[-1]) == 1, 1.5, 0.5)
    assert np.array_equal(u[0], expect)


def test_identity_bijection_equals_linear():
    bundle = keygen(2, seed=1)
    tape = generate_noise_tape(bundle, 30, 0)
    x = dae(random_word(rng_for(1, 4), 29))
    lin = conceal_linear(x, bundle, tape).u
    ident = conceal(x, keygen(2, seed=1, nonlinear_id="identity"), tape).u
    assert np.array_equal(lin, ident)


@pytest.mark.parametrize("nl", ["g_s", "g_c", "g_ss"])
def test_scheme_a_inverts_to_linear(nl):
    bundle = keygen(2, seed=2, nonlinear_id=nl)
    tape = generate_noise_tape(bundle, 200, 3)
    x = dae(random_word(rng_for(2, 4), 199))
    lin = conceal_linear(x, bundle, tape).u
    nonl = conceal_nonlinear(x, bundle, tape).u
    back = apply_extended(inverse(get(nl)), nonl)
    np.testing.assert_allclose(back, lin, rtol=0, atol=1e-13)


def test_eve_cannot_read_eq20_word():
    word = as_bits(EQ20_WORD)
    bundle = keygen(2, seed=0)
    data = conceal(dae(word), bundle, generate_noise_tape(bundle, word.size, 0))
    assert data.u.shape == (3, 21)
    for level in data.u:
        assert not np.array_equal(ade(level), word)


def test_no_signal_leak_rate():
    rates = []
    for seed in range(100):
        bundle = keygen(2, seed=seed)
        word = random_word(rng_for(seed, 4), 1000)
        data = conceal(dae(word), bundle, generate_noise_tape(bundle, word.size, seed))
        rates.append([(ade(u) != word).mean() for u in data.u])
    assert (np.mean(rates, axis=0) >= 0.2).all()


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1), st.floats(0.1, 3),
)
def test_linear_path_is_linear(x, y, alpha, beta, a, b_u):
    bundle = quiet_bundle(2, a=a, b_u=b_u)
    tape = zero_tape(2, 4)
    x, y = np.array(x), np.array(y)
    lhs = conceal_linear(alpha * x + beta * y, bundle, tape).u
    rhs = alpha * conceal_linear(x, bundle, tape).u + beta * conceal_linear(y, bundle, tape).u
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_deterministic():
    bundle = keygen(2, seed=4, nonlinear_id="g_c")
    tape = generate_noise_tape(bundle, 21, 9)
    x = dae(EQ20_WORD)
    assert np.array_equal(conceal(x, bundle, tape).u, conceal(x, bundle, tape).u)


def test_batched_equals_single():
    bundle = keygen(2, seed=4)
    words = random_word(rng_for(0, 4), 15, shape=(3,)).astype(float)
    tapes = [generate_noise_tape(bundle, 16, s) for s in range(3)]
    from crs.keys import NoiseTape
    tape = NoiseTape(np.stack([t.w1 for t in tapes], 1), np.stack([t.w2 for t in tapes], 1))
    batch = conceal(words, bundle, tape).u
    for j in range(3):
        assert np.array_equal(batch[:, j], conceal(words[j], bundle, tapes[j]).u)


def test_shape_checks():
    bundle = keygen(2)
    with pytest.raises(ConcealError):
        conceal(dae("0110"), bundle, generate_noise_tape(bundle, 5, 0))
    with pytest.raises(ConcealError):
        conceal(np.array([1.0]), bundle, generate_noise_tape(bundle, 1, 0))
    with pytest.raises(ConcealError):
        conceal_nonlinear(dae("0110"), bundle, generate_noise_tape(bundle, 4, 0))


def test_data_file_round_trip():
    bundle = keygen(2, seed=3, nonlinear_id="g_c")
    data = conceal(dae(EQ20_WORD), bundle, generate_noise_tape(bundle, 21, 1))
    data.image_shape = (3, 7)
    back = read_data(write_data(data))
    assert np.array_equal(back.u, data.u)
    assert back.nonlinear_id == "g_c" and back.image_shape == (3, 7)
    assert write_data(back) == write_data(data)


@pytest.mark.parametrize(
    "mangle",
    [
        lambda t: t.replace("crsdata v1", "crsdata v9"),
        lambda t: t.replace("N=2", "N=3"),
        lambda t: t.replace("len=4", "len=5"),
        lambda t: t.rsplit("\n\n", 1)[0],
        lambda t: t.replace("\n0\n", "\nzero\n", 1),
        lambda t: "",
    ],
)
def test_data_file_errors(mangle):
    text = write_data(ConcealedBundle(np.array([[0.0, 1, 0, 1], [1, 0, 1, 0], [0, 0, 0, 0]])))
    with pytest.raises(DataFormatError):
        read_data(mangle(text))
