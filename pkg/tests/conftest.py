"""测试公共夹具"""
import pytest

from src.constants import STORAGE_ENV, WORKERS_ENV
from src.core.measure import EpsilonLadder, RadialGrid


@pytest.fixture(autouse=True)
def isolated_storage(tmp_path, monkeypatch):
    """设置与回归常数写到临时目录，不碰仓库里的 storage/"""
    directory = tmp_path / "storage"
    monkeypatch.setenv(STORAGE_ENV, str(directory))
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    return directory


@pytest.fixture
def ladder():
    return EpsilonLadder.geometric(1.0, 2.0, 4)


@pytest.fixture
def small_grid():
    return RadialGrid(1e-4, 10.0, 512)


@pytest.fixture
def zigzag_csv(tmp_path):
    """轮廓 (0, 2, 0, 2)，半径 1, 1/2, 1/4, 1/8"""
    path = tmp_path / "profile.csv"
    path.write_text("epsilon,value\n1.0,0.0\n0.5,2.0\n0.25,0.0\n0.125,2.0\n", encoding="utf-8")
    return path
