import math

import numpy as np
import pytest

from secbc import joint_mi, make_channel, precoder, precoder_wtc, psd_leq, wtc_point_check
from secbc.dpc import (
    DpcInstance,
    dpc_identity_check,
    dpc_joint,
    effective_gain,
    random_instance,
)
from secbc.errors import DegenerateInstanceError

from conftest import random_spd


class TestEffectiveGain:
    def test_no_noise_layer(self, rng):
        g = rng.normal(size=(2, 2))
        assert np.allclose(effective_gain(g, np.zeros((2, 2))), g)

    def test_scalar(self):
        # (1 + 1*3*1)^(-1/2) * 1 = 1/2
        assert effective_gain([[1.0]], [[3.0]])[0, 0] == pytest.approx(0.5)

    def test_gram_identity(self, rng):
        # Gt^T Gt = G^T (I + G K G^T)^{-1} G
        for _ in range(10):
            g = rng.normal(size=(3, 3))
            k1 = random_spd(rng, 3)
            gt = effective_gain(g, k1)
            lhs = gt.T @ gt
            rhs = g.T @ np.linalg.inv(np.eye(3) + g @ k1 @ g.T) @ g
            assert np.abs(lhs - rhs).max() <= 1e-10


class TestPrecoder:
    def test_zero_signal(self):
        assert np.allclose(precoder(np.zeros((2, 2)), np.eye(2)), 0.0)

    def test_scalar(self):
        assert precoder([[1.0]], [[1.0]])[0, 0] == pytest.approx(0.5)

    def test_residual(self, rng):
        for _ in range(10):
            k2 = random_spd(rng, 2)
            gt = rng.normal(size=(2, 2))
            a = precoder(k2, gt)
            resid = a @ (np.eye(2) + gt @ k2 @ gt.T) - k2 @ gt.T
            assert np.abs(resid).max() <= 1e-10

    def test_wtc_specialization(self, rng):
        kstar = random_spd(rng, 2)
        g1 = rng.normal(size=(2, 2))
        expected = precoder(kstar, effective_gain(g1, np.zeros((2, 2))))
        assert np.allclose(precoder_wtc(kstar, g1), expected)

    def test_wtc_zero(self):
        assert np.allclose(precoder_wtc(np.zeros((2, 2)), np.eye(2)), 0.0)

    def test_wtc_scalar(self):
        # 1*2 / (1 + 4) = 2/5
        assert precoder_wtc([[1.0]], [[2.0]])[0, 0] == pytest.approx(0.4)


class TestDpcIdentity:
    def test_constant_interference(self):
        # kv = 0: both sides collapse to the unconditional difference
        ch = make_channel([[2.0]], [[1.0]])
        inst = DpcInstance(ch, np.zeros((1, 1)), np.eye(1), np.zeros((1, 1)))
        lhs, rhs, gap = dpc_identity_check(inst)
        assert gap <= 1e-9
        assert lhs == pytest.approx(0.5 * math.log2(5.0 / 2.0), abs=1e-12)

    def test_scalar_closed_form(self):
        # g1=2, g2=1, k1=0, k2=1, kv=1
        ch = make_channel([[2.0]], [[1.0]])
        inst = DpcInstance(ch, np.zeros((1, 1)), np.eye(1), np.eye(1))
        lhs, rhs, gap = dpc_identity_check(inst)
        assert lhs == pytest.approx(0.5 * math.log2(2.5), abs=1e-12)
        assert gap <= 1e-9

    @pytest.mark.parametrize("t", [1, 2, 3])
    def test_random_instances(self, t):
        rng = np.random.default_rng(100 + t)
        for _ in range(100):
            inst = random_instance(t, rng)
            lhs, _, gap = dpc_identity_check(inst)
            assert gap <= 1e-9 * (1.0 + abs(lhs))

    def test_degenerate_signal_rejected(self):
        ch = make_channel([[1.0, 0.1], [0.0, 1.0]], np.eye(2))
        inst = DpcInstance(ch, np.eye(2), np.zeros((2, 2)), np.eye(2))
        with pytest.raises(DegenerateInstanceError):
            dpc_identity_check(inst)


def test_whitening_invariance(rng):
    # Transforming Y1 by the inverse noise square root inside the oracle
    # must not move any mutual information.
    for _ in range(10):
        inst = random_instance(2, rng)
        joint = dpc_joint(inst)
        sigma = np.eye(2) + inst.ch.g1 @ inst.k1 @ inst.ch.g1.T
        evals, vecs = np.linalg.eigh(sigma)
        inv_sqrt = (vecs / np.sqrt(evals)) @ vecs.T
        transformed = joint.apply("y1", inv_sqrt)
        for blocks in [("u", "y1"), ("x2", "y1", "vstar"), ("x", "y1")]:
            a, b = blocks[0], blocks[1]
            c = blocks[2] if len(blocks) > 2 else ()
            before = joint_mi(joint, a, b, c)
            after = joint_mi(transformed, a, b, c)
            assert after == pytest.approx(before, abs=1e-10)


class TestWtcPointCheck:
    def test_zero_kstar(self, example_channel):
        assert wtc_point_check(example_channel, np.zeros((2, 2))) == (0.0, 0.0)

    def test_symmetric_channel(self, rng):
        g = rng.normal(size=(2, 2))
        ch = make_channel(g, g)
        kstar = random_spd(rng, 2)
        achieved, target = wtc_point_check(ch, kstar)
        assert target == pytest.approx(0.0, abs=1e-10)
        assert achieved == pytest.approx(0.0, abs=1e-9)

    def test_example_channel_random_kstar(self, example_channel, rng):
        k = np.diag([6.0, 6.0])
        done = 0
        while done < 30:
            kstar = random_spd(rng, 2, scale=2.0)
            if not psd_leq(kstar, k, 1e-8):
                continue
            achieved, target = wtc_point_check(example_channel, kstar, k)
            assert abs(achieved - target) <= 1e-9
            done += 1

    def test_full_power_uses_unconditional_path(self, example_channel, rng):
        kstar = random_spd(rng, 2)
        achieved, target = wtc_point_check(example_channel, kstar, kstar)
        assert abs(achieved - target) <= 1e-9
