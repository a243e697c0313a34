"""
測試空間相關模型
"""

import numpy as np
import pytest

from src.cellfree.spatial import (
    ap_correlation,
    element_grid,
    full_ris_ap_correlation,
    is_hermitian_psd,
    local_scattering_correlation,
    ris_correlation,
    ula_steering,
    uspa_steering,
)
from src.core.exceptions import InvalidArgumentError


class TestSteering:
    """導向向量測試"""

    def test_ula_broadside(self):
        """測試 angle=0 時所有元素相等"""
        np.testing.assert_allclose(ula_steering(4, 0.0, 0.5, P=2), np.full(4, 1 / np.sqrt(2)))

    def test_ula_endfire_phases(self):
        """測試 J=2、angle=π/2 時相位為 {0, −π}"""
        vector = ula_steering(2, np.pi / 2, 0.5)
        np.testing.assert_allclose(vector, [1.0, np.exp(-1j * np.pi)], atol=1e-12)

    def test_ula_conjugate_symmetry(self):
        """測試 steering(−angle) = conj(steering(angle))"""
        np.testing.assert_allclose(ula_steering(6, -0.4, 0.5), ula_steering(6, 0.4, 0.5).conj())

    def test_uspa_zero_angles(self):
        """測試 az = el = 0 時為全 1 向量"""
        np.testing.assert_allclose(uspa_steering(16, np.arange(16), 0.0, 0.0, 0.25), np.ones(16))

    def test_uspa_block_activation_keeps_positions(self):
        """測試不同啟用區塊取用實體位置上的值"""
        full = uspa_steering(16, np.arange(16), 0.3, 0.2, 0.25)
        block0 = uspa_steering(16, np.arange(0, 4), 0.3, 0.2, 0.25)
        block1 = uspa_steering(16, np.arange(4, 8), 0.3, 0.2, 0.25)

        np.testing.assert_allclose(block0, full[0:4])
        np.testing.assert_allclose(block1, full[4:8])
        assert not np.allclose(block0, block1)

    def test_uspa_rejects_duplicates(self):
        """測試重複的元件索引"""
        with pytest.raises(InvalidArgumentError):
            uspa_steering(16, [0, 0, 1], 0.1, 0.1, 0.25)

    def test_element_grid_requires_square(self):
        """測試 L 必須為完全平方數"""
        np.testing.assert_array_equal(element_grid(4), [[0, 0], [1, 0], [0, 1], [1, 1]])
        with pytest.raises(InvalidArgumentError):
            element_grid(8)


class TestApCorrelation:
    """AP 端相關矩陣測試"""

    def test_rank_one(self):
        """測試 J=2、P=1 時秩為 1"""
        R = ap_correlation(2, 1)
        assert np.linalg.matrix_rank(R, tol=1e-12) == 1
        assert is_hermitian_psd(R)

    def test_trace_equals_J(self):
        """測試單位 d^PL 時 tr(R) = J"""
        assert np.real(np.trace(ap_correlation(4, 2))) == pytest.approx(4.0)

    def test_hermitian(self):
        """測試 Hermitian"""
        R = ap_correlation(8, 4, d=10.0, PL=1e-3)
        assert np.max(np.abs(R - R.conj().T)) < 1e-14

    def test_invalid_paths(self):
        """測試 P 超出 [1, J]"""
        with pytest.raises(InvalidArgumentError):
            ap_correlation(2, 3)


class TestRisCorrelation:
    """RIS sinc 相關測試"""

    def test_diagonal_is_one(self):
        """測試對角元素 (未縮放) 為 1"""
        R = ris_correlation(np.array([[0.0, 0.0], [1.0, 0.0]]), 1.0, 1.0, 1.0)
        np.testing.assert_allclose(np.diag(R), 1.0)

    def test_half_wavelength_spacing(self):
        """測試 λ/2 間距時 sinc(1) = 0"""
        R = ris_correlation(np.array([[0.0, 0.0], [0.5, 0.0]]), 1.0, 1.0, 1.0)
        assert abs(R[0, 1]) < 1e-15

    def test_quarter_wavelength_spacing(self):
        """測試 λ/4 間距時為 2/π"""
        R = ris_correlation(np.array([[0.0, 0.0], [0.25, 0.0]]), 1.0, 1.0, 1.0)
        assert np.real(R[0, 1]) == pytest.approx(2 / np.pi)

    def test_scaling(self):
        """測試 d_H·d_V 縮放"""
        positions = element_grid(4) * 0.25
        R = ris_correlation(positions, 0.5, 0.25, 1.0)
        np.testing.assert_allclose(np.diag(R), 0.125)
        assert is_hermitian_psd(R)


class TestLocalScattering:
    """局部散射相關測試"""

    def test_diagonal_is_beta(self):
        """測試對角元素為 β"""
        R = local_scattering_correlation(4, 0.3, np.deg2rad(15), beta=2.5e-9)
        np.testing.assert_allclose(np.real(np.diag(R)), 2.5e-9, rtol=1e-12)

    def test_small_asd_limit(self):
        """測試 ASD 趨近 0 時退化為確定性相位"""
        theta = 0.7
        R = local_scattering_correlation(3, theta, 1e-6, beta=1.0)
        expected = np.exp(1j * 2 * np.pi * 0.5 * (np.arange(3)[:, None] - np.arange(3)[None, :]) * np.sin(theta))
        np.testing.assert_allclose(R, expected, atol=1e-6)

    def test_matches_monte_carlo_integral(self, rng):
        """測試與蒙地卡羅積分一致"""
        asd, theta = np.deg2rad(15), np.deg2rad(30)
        R = local_scattering_correlation(2, theta, asd, beta=1.0)
        chi = rng.normal(0.0, asd, size=4_000_000)
        estimate = np.mean(np.exp(1j * np.pi * np.sin(theta + chi)))

        assert abs(R[1, 0] - estimate) < 1e-3

    def test_invalid_asd(self):
        """測試 ASD 必須為正"""
        with pytest.raises(InvalidArgumentError):
            local_scattering_correlation(2, 0.0, 0.0, beta=1.0)

    def test_psd(self):
        """測試半正定"""
        assert is_hermitian_psd(local_scattering_correlation(8, -1.1, np.deg2rad(10), beta=1.0))


class TestFullCorrelation:
    """Kronecker 全相關測試"""

    def test_identity_inputs(self):
        """測試單位輸入得到 I/(J·L_A)"""
        R = full_ris_ap_correlation(np.eye(2), np.eye(3), 2, 3)
        np.testing.assert_allclose(R, np.eye(6) / 6)

    def test_trace(self, rng):
        """測試 tr(R̃) = tr(R_AP)·tr(R_RIS)/(J·L_A)"""
        R_AP = ap_correlation(4, 2)
        R_RIS = ris_correlation(element_grid(4) * 0.25, 0.25, 0.25, 1.0)
        R = full_ris_ap_correlation(R_AP, R_RIS, 4, 4)

        assert np.trace(R) == pytest.approx(np.trace(R_AP) * np.trace(R_RIS) / 16)
        assert is_hermitian_psd(R)

    def test_scalar(self):
        """測試 J = L_A = 1"""
        R = full_ris_ap_correlation(np.array([[2.0]]), np.array([[3.0]]), 1, 1)
        assert R[0, 0] == pytest.approx(6.0)

    def test_dimension_mismatch(self):
        """測試維度不符"""
        with pytest.raises(InvalidArgumentError):
            full_ris_ap_correlation(np.eye(2), np.eye(3), 3, 3)
