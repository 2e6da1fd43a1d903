"""Replayable protocol transcripts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


def _jsonable(v):
    import numpy as np
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class ProtocolTranscript:
    """Ordered record of one protocol run; replayable bit-exactly from
    (protocol, seed, strategy)."""

    protocol: str
    seed: int
    n: int
    strategy: str = "honest"
    messages: list = field(default_factory=list)   # (sender, name, value)
    honest: dict = field(default_factory=dict)     # inputs/outputs
    adversary: dict = field(default_factory=dict)  # classical record

    def say(self, party: str, name: str, value):
        self.messages.append((party, name, _jsonable(value)))

    def to_json(self) -> str:
        return json.dumps({
            "protocol": self.protocol, "seed": self.seed, "n": self.n,
            "strategy": self.strategy, "messages": self.messages,
            "honest": _jsonable(self.honest),
            "adversary": _jsonable(self.adversary),
        }, sort_keys=True)
