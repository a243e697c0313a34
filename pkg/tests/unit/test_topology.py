"""
測試網路拓撲、路徑損耗與陰影衰落
"""

import numpy as np
import pytest

from src.cellfree.topology import (
    correlated_shadow_fading,
    generate_geometry,
    large_scale_params,
    link_angles,
    path_loss_nlos,
    rician_factor,
    wrap_distance,
)
from src.core.exceptions import InvalidArgumentError


def to_db(gain):
    return 10.0 * np.log10(gain)


class TestGeometry:
    """佈建測試"""

    def test_positions_inside_area(self):
        """測試座標位於區域內且高度正確"""
        geometry = generate_geometry(1, 1, 1000.0, np.random.default_rng(7))

        for positions in (geometry.ap_positions, geometry.ris_positions, geometry.ue_positions):
            assert np.all((positions[:, :2] >= 0) & (positions[:, :2] <= 1000.0))
        assert geometry.ap_positions[0, 2] == 12.5
        assert geometry.ris_positions[0, 2] == 30.0
        assert geometry.ue_positions[0, 2] == 1.5

    def test_ap_ris_horizontal_distance(self, rng):
        """測試每組 AP-RIS 水平距離為 10 m"""
        geometry = generate_geometry(20, 5, 1000.0, rng)
        ap = geometry.ap_positions.copy()
        ris = geometry.ris_positions.copy()
        ap[:, 2] = ris[:, 2] = 0.0

        np.testing.assert_allclose(wrap_distance(ap, ris, 1000.0), 10.0, atol=1e-9)

    def test_same_seed_same_geometry(self):
        """測試相同種子得到相同佈建"""
        first = generate_geometry(5, 3, 500.0, np.random.default_rng(3))
        second = generate_geometry(5, 3, 500.0, np.random.default_rng(3))

        np.testing.assert_array_equal(first.ap_positions, second.ap_positions)
        np.testing.assert_array_equal(first.ue_positions, second.ue_positions)

    def test_invalid_counts(self, rng):
        """測試 M 或 U 不合法"""
        with pytest.raises(InvalidArgumentError):
            generate_geometry(0, 2, 1000.0, rng)
        with pytest.raises(InvalidArgumentError):
            generate_geometry(2, 2, -1.0, rng)


class TestWrapDistance:
    """環繞距離測試"""

    def test_torus_metric(self):
        """測試跨越邊界的最短距離"""
        assert wrap_distance(np.array([0, 0, 0.0]), np.array([999, 0, 0.0]), 1000.0) == pytest.approx(1.0)

    def test_identity(self):
        """測試同一點距離為 0"""
        p = np.array([123.0, 456.0, 7.0])
        assert wrap_distance(p, p, 1000.0) == 0.0

    def test_vertical_only(self):
        """測試只有高度差"""
        assert wrap_distance(np.array([0, 0, 12.5]), np.array([0, 0, 1.5]), 1000.0) == pytest.approx(11.0)

    def test_symmetry_and_triangle_inequality(self, rng):
        """測試對稱性與三角不等式"""
        side = 1000.0
        points = np.column_stack([rng.uniform(0, side, (10000, 3, 2)).reshape(-1, 2),
                                  rng.uniform(0, 30, 30000)]).reshape(10000, 3, 3)
        p, q, r = points[:, 0], points[:, 1], points[:, 2]

        np.testing.assert_allclose(wrap_distance(p, q, side), wrap_distance(q, p, side))
        assert np.all(wrap_distance(p, r, side) <= wrap_distance(p, q, side) + wrap_distance(q, r, side) + 1e-9)


class TestPathLoss:
    """路徑損耗與 Rician 因子測試"""

    @pytest.mark.parametrize("d, F, expected_db", [
        (1.0, 0.0, -34.53),
        (10.0, 0.0, -72.53),
        (10.0, 3.0, -69.53),
    ])
    def test_path_loss(self, d, F, expected_db):
        """測試 COST 321 路徑損耗"""
        assert to_db(path_loss_nlos(d, F)) == pytest.approx(expected_db)

    def test_path_loss_requires_positive_distance(self):
        """測試距離必須為正"""
        with pytest.raises(InvalidArgumentError):
            path_loss_nlos(0.0)

    @pytest.mark.parametrize("d, expected", [
        (100.0, 10.0),
        (0.0, 10 ** 1.3),
        (1300.0 / 3.0, 1.0),
    ])
    def test_rician_factor(self, d, expected):
        """測試 Rician 因子"""
        assert rician_factor(d) == pytest.approx(expected, rel=1e-9)


class TestShadowFading:
    """相關陰影衰落測試"""

    def _geometry(self, ue_xy, ap_xy):
        from src.cellfree.topology import NetworkGeometry
        ue = np.column_stack([ue_xy, np.full(len(ue_xy), 1.5)])
        ap = np.column_stack([ap_xy, np.full(len(ap_xy), 12.5)])
        return NetworkGeometry(ap_positions=ap, ris_positions=ap.copy(), ue_positions=ue, area_side=1000.0)

    def test_colocated_ues_identical(self, rng):
        """測試距離為 0 的兩個 UE 陰影衰落相同"""
        geometry = self._geometry(np.array([[100.0, 100.0], [100.0, 100.0]]), np.array([[500.0, 500.0]]))
        F = correlated_shadow_fading(geometry, delta_f=1.0, rng=rng)

        assert F[0, 0] == pytest.approx(F[0, 1], abs=1e-3)

    def test_correlation_at_decorrelation_distance(self, rng):
        """測試距離 d_dc 時 UE 項相關係數為 0.5"""
        geometry = self._geometry(np.array([[100.0, 100.0], [200.0, 100.0]]), np.array([[500.0, 500.0]]))
        draws = np.array([
            correlated_shadow_fading(geometry, delta_f=1.0, d_dc=100.0, rng=rng)[0]
            for _ in range(20000)
        ])

        assert np.corrcoef(draws[:, 0], draws[:, 1])[0, 1] == pytest.approx(0.5, abs=0.03)

    def test_variance(self, rng):
        """測試 F 的變異數為 δ_sf²"""
        geometry = self._geometry(np.array([[100.0, 100.0]]), np.array([[500.0, 500.0]]))
        draws = np.array([
            correlated_shadow_fading(geometry, delta_f=0.5, delta_sf=8.0, rng=rng)[0, 0]
            for _ in range(20000)
        ])

        assert np.var(draws) == pytest.approx(64.0, rel=0.05)

    def test_invalid_delta_f(self, rng):
        """測試 δ_f 超出 [0, 1]"""
        geometry = self._geometry(np.array([[1.0, 1.0]]), np.array([[2.0, 2.0]]))
        with pytest.raises(InvalidArgumentError):
            correlated_shadow_fading(geometry, delta_f=1.5, rng=rng)


class TestLargeScaleParams:
    """大尺度參數測試"""

    def test_shapes_and_ris_ap_link(self, rng):
        """測試形狀與 RIS-AP 鏈路 (固定 10 m，無陰影)"""
        geometry = generate_geometry(4, 3, 1000.0, rng)
        params = large_scale_params(geometry, rng)
        d_ris_ap = np.hypot(10.0, 30.0 - 12.5)

        assert params.beta.shape == (4, 3)
        assert params.xi.shape == (4, 3)
        np.testing.assert_allclose(params.alpha, path_loss_nlos(d_ris_ap))
        np.testing.assert_allclose(params.kappa, rician_factor(d_ris_ap))

    def test_link_angles_shapes(self, rng):
        """測試角度形狀"""
        angles = link_angles(generate_geometry(4, 3, 1000.0, rng))

        assert angles.ris_to_ue_az.shape == (4, 3)
        assert angles.ap_to_ris_az.shape == (4,)
        assert np.all(np.abs(angles.ris_to_ap_el) <= np.pi / 2)
