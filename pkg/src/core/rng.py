"""
可复现随机流
RngStream 由 (seed, stream_id) 唯一确定，底层为计数器型 Philox4x64 生成器：
两者拼成 128 位密钥，计数器从 0 开始。相同 (seed, stream_id) 在任何平台上产生
逐位相同的序列；不同 stream_id 对应不同密钥，即相互独立的流。
"""

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """SplitMix64 终混函数，用于派生子流编号"""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngStream:
    """可拆分的确定性随机流（不可变，复制开销很小）"""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'seed', int(self.seed) & _MASK64)
        object.__setattr__(self, 'stream_id', int(self.stream_id) & _MASK64)

    def generator(self) -> np.random.Generator:
        """
        返回一个新的生成器；每次调用都从计数器 0 开始

        Returns:
            numpy Generator（Philox 位生成器）
        """
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, index: int) -> 'RngStream':
        """
        派生子流：同一 seed 下由 (stream_id, index) 决定新的 stream_id

        Args:
            index: 子流序号（非负整数）

        Returns:
            子流
        """
        child = splitmix64(self.stream_id ^ splitmix64(int(index) & _MASK64))
        return RngStream(self.seed, child)

    def substream(self, *labels: int) -> 'RngStream':
        """按多级序号依次派生，例如 substream(n, replicate)"""
        stream = self
        for label in labels:
            stream = stream.spawn(label)
        return stream
