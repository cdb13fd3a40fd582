"""
robustest - Test configuration
把 src 加入路径，并把缓存目录与蒙特卡洛规模指向测试专用的设置
"""

import os
import sys
import tempfile
from pathlib import Path

import pytest

SRC = Path(__file__).resolve().parent.parent / 'src'
sys.path.insert(0, str(SRC))

# 必须在导入 config.settings 之前设置
os.environ['ROBUSTEST_CACHE'] = tempfile.mkdtemp(prefix='robustest-cache-')
os.environ.setdefault('ROBUSTEST_PEARSON_REPLICATES', '4000')
os.environ.setdefault('ROBUSTEST_KS_REPLICATES', '1000')
os.environ.pop('ROBUSTEST_SEED', None)
os.environ.pop('ROBUSTEST_WORKERS', None)

from config.settings import settings  # noqa: E402

settings.reload()


@pytest.fixture
def rng_seed():
    return 20240601


@pytest.fixture
def data_dir(tmp_path):
    """写几个小 CSV 供 table_loader / CLI 测试使用"""
    (tmp_path / 'basic.csv').write_text("a,b,g\n1,2,0\n2,4,1\n3,5,1\n", encoding='utf-8')
    (tmp_path / 'missing.csv').write_text("a,b\n1,2\nNA,4\n3,5\n4,1\n", encoding='utf-8')
    return tmp_path
