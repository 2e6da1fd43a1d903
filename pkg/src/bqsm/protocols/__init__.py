"""Executable protocol machines for erasure OT, 1-2 string OT and bit
commitment against quantum-memory-bounded adversaries."""

from .channel import ChannelModel, effective_weak_parameters
from .codes import LinearCode, repetition_code, hamming_7_4, random_code
from .adversary import (AdversaryStrategy, store_prefix, measure_fixed,
                        breitbart_strategy, bell_pairwise_xor, full_memory,
                        custom_compression)
from .transcript import ProtocolTranscript
from .rabin import (run_rabin_ot, run_bb84_rabin_ot, bell_xor_attack,
                    breitbart_attack, rabin_guess_probability)
from .ot12 import run_ot12
from .commitment import run_commitment, binding_experiment
from .security import (receiver_security_witness, sender_security_distance,
                       purification_gap)

__all__ = [
    "ChannelModel", "effective_weak_parameters", "LinearCode",
    "repetition_code", "hamming_7_4", "random_code", "AdversaryStrategy",
    "store_prefix", "measure_fixed", "breitbart_strategy",
    "bell_pairwise_xor", "full_memory", "custom_compression",
    "ProtocolTranscript", "run_rabin_ot", "run_bb84_rabin_ot",
    "bell_xor_attack", "breitbart_attack", "rabin_guess_probability",
    "run_ot12", "run_commitment", "binding_experiment",
    "receiver_security_witness", "sender_security_distance",
    "purification_gap",
]
