"""
配置管理模块
加载和管理应用配置（缓存目录、默认种子、并行度、蒙特卡洛规模）
"""

import logging
import os
from pathlib import Path
from typing import List, Optional

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int, errors: List[str]) -> int:
    """十进制整数环境变量（允许前导零与下划线）；无法解析时记录错误并返回默认值"""
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw.strip(), 10)
    except ValueError:
        errors.append(f"{name} 必须为整数: {raw!r}")
        return default


class Settings:
    """应用配置类"""

    # Pearson 零分布分位数表的主种子（固定，不受环境变量影响）
    PEARSON_TABLE_SEED = 0x5EEDC0DE

    def __init__(self):
        """初始化配置"""
        # 项目根目录
        self.BASE_DIR = Path(__file__).resolve().parent.parent.parent
        self.reload()

    def reload(self):
        """从环境变量重新读取配置；无法解析的值由 validate() 报告"""
        self.ERRORS: List[str] = []
        # 分位数表 / KS 零分布缓存目录
        cache_dir = os.getenv('ROBUSTEST_CACHE')
        self.CACHE_DIR = Path(cache_dir) if cache_dir else self.BASE_DIR / 'cache'

        # 随机种子与并行度
        self.DEFAULT_SEED = _env_int('ROBUSTEST_SEED', 20240601, self.ERRORS)
        self.WORKERS = _env_int('ROBUSTEST_WORKERS', 1, self.ERRORS)

        # 蒙特卡洛规模
        self.PEARSON_TABLE_REPLICATES = _env_int('ROBUSTEST_PEARSON_REPLICATES', 100_000, self.ERRORS)
        self.KS_REPLICATES = _env_int('ROBUSTEST_KS_REPLICATES', 1000, self.ERRORS)

        self.LOG_LEVEL = os.getenv('ROBUSTEST_LOG_LEVEL', 'WARNING').upper()

    def ensure_cache_dir(self) -> Path:
        """确保缓存目录存在"""
        self.CACHE_DIR.mkdir(parents=True, exist_ok=True)
        return self.CACHE_DIR

    def validate(self) -> tuple[bool, Optional[str]]:
        """
        验证配置

        Returns:
            (是否有效, 错误消息)
        """
        if self.ERRORS:
            return False, self.ERRORS[0]
        if self.DEFAULT_SEED < 0:
            return False, "ROBUSTEST_SEED 必须为非负整数"
        if self.WORKERS < 1:
            return False, "ROBUSTEST_WORKERS 必须 >= 1"
        if self.PEARSON_TABLE_REPLICATES < 1000:
            return False, "ROBUSTEST_PEARSON_REPLICATES 必须 >= 1000"
        if self.KS_REPLICATES < 1000:
            return False, "ROBUSTEST_KS_REPLICATES 必须 >= 1000"
        if self.LOG_LEVEL not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            return False, f"未知的日志级别: {self.LOG_LEVEL}"

        return True, None

    def __repr__(self):
        """字符串表示"""
        return f"""Settings(
    BASE_DIR={self.BASE_DIR},
    CACHE_DIR={self.CACHE_DIR},
    DEFAULT_SEED={self.DEFAULT_SEED},
    WORKERS={self.WORKERS}
)"""


def load_env_file(env_file: str = '.env') -> bool:
    """
    从.env文件加载环境变量（已存在的环境变量优先）

    Args:
        env_file: .env文件路径

    Returns:
        是否找到并加载了文件
    """
    env_path = Path(env_file)

    if not env_path.exists():
        logger.debug("未找到%s文件", env_file)
        return False

    with open(env_path, 'r', encoding='utf-8') as f:
        for line in f:
            line = line.strip()

            # 跳过注释和空行
            if not line or line.startswith('#'):
                continue

            # 解析键值对
            if '=' in line:
                key, value = line.split('=', 1)
                key = key.strip()
                value = value.strip().strip('"').strip("'")
                os.environ.setdefault(key, value)

    logger.info("已加载%s配置", env_file)
    return True


# 启动时自动加载.env文件
try:
    load_env_file(str(Path(__file__).resolve().parent.parent.parent / '.env'))
except OSError as e:
    logger.warning("加载.env文件失败: %s", e)


# 全局配置实例（在加载.env文件之后创建）
settings = Settings()
