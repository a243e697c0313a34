"""
測試蒙地卡羅比對工具
"""

import numpy as np
import pytest

from src.cellfree.rpm_channel import PhaseShiftConfig
from src.cellfree.system import build_system
from src.experiments.oracles import Z_LIMIT, _compare, estimate_term_oracles


@pytest.fixture
def tiny_setup(tiny_config):
    system = build_system(tiny_config, np.random.default_rng(4))
    phases = PhaseShiftConfig.random(system.M, system.L_A, np.random.default_rng(5))
    return system, phases, system.statistics(phases)


class TestCompare:
    """z 值比對測試"""

    def test_exact_match_scores_zero(self):
        """測試樣本完全等於期望值時 z = 0"""
        values = np.full((10, 2), 3.0)
        result = _compare("constant", (values.sum(axis=0), (values ** 2).sum(axis=0)), 10, np.full(2, 3.0))

        assert result.z_score == 0.0
        assert result.passed

    def test_worst_element_reported(self):
        """測試回報 z 值最大的元素"""
        rng = np.random.default_rng(0)
        values = rng.normal(size=(4000, 3))
        expected = np.array([0.0, 0.0, 1.0])
        result = _compare("shifted", (values.sum(axis=0), (values ** 2).sum(axis=0)), 4000, expected)

        assert result.closed_form == 1.0
        assert result.z_score > Z_LIMIT
        assert not result.passed


class TestTermOracles:
    """估計項比對測試"""

    def test_terms_drawn_from_cascaded_sampler(self, tiny_setup, monkeypatch):
        """測試估計項以級聯通道取樣器在指定 RP 下取樣"""
        system, phases, patterns = tiny_setup
        calls = []
        original = system.sample

        def recording(phases_, rp, rng):
            calls.append(np.array(rp))
            return original(phases_, rp, rng)

        monkeypatch.setattr(system, "sample", recording)
        results = estimate_term_oracles(system, phases, patterns[1], 1, 600, 9, 1, 200)

        assert len(calls) == 3
        assert all((rp == 1).all() and rp.shape == (200, system.M) for rp in calls)
        assert {"desired_signal", "interference_mean", "self_second_moment"} <= {r.term for r in results}

    @pytest.mark.slow
    @pytest.mark.parametrize("fading", ["rician", "pure-los"])
    def test_closed_form_terms_hold_on_cascaded_channel(self, tiny_config, fading):
        """測試閉式期望值在級聯通道的實際取樣下通過 z 檢定"""
        tiny_config.channel.fading = fading
        system = build_system(tiny_config, np.random.default_rng(31))
        phases = PhaseShiftConfig.random(system.M, system.L_A, np.random.default_rng(32))
        patterns = system.statistics(phases)

        results = estimate_term_oracles(system, phases, patterns[0], 0, 20_000, 33, 1, 2000)

        failed = [(r.term, r.z_score) for r in results if not r.passed]
        assert failed == []
