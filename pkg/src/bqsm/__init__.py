"""Toolkit for simulating and numerically certifying two-party cryptographic
protocols against quantum-memory-bounded adversaries.

Subpackages cover dense multi-qubit linear algebra (`qstate`), classical
entropy machinery (`entropy`), classical-quantum states and privacy
amplification (`cqstate`), GF(2) hash families (`hashing`), the linear-function
characterization of oblivious-transfer security (`classical_ot`), min-entropy
uncertainty relations (`uncertainty`), executable protocol machines
(`protocols`), one-way QKD rate analysis (`qkd`) and a seeded experiment
runner (`cli`).
"""

__version__ = "0.1.0"
