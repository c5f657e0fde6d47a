"""Circuit-level noise, Pauli-frame sampling and single-fault enumeration."""
from .faults import FAULT_CLASSES, EffectTable, Fault, FaultDictionary, build_effect_table, enumerate_single_faults
from .frame import SECTORS, SectorLayout, propagate
from .noise import Channel, NoiseModel, NoisyCircuit, insert_noise
from .sampling import ShotBatch, TableSampler, frame_sample_block, iter_shot_blocks, sample_shots

__all__ = [
    "FAULT_CLASSES", "EffectTable", "Fault", "FaultDictionary", "build_effect_table", "enumerate_single_faults",
    "SECTORS", "SectorLayout", "propagate", "Channel", "NoiseModel", "NoisyCircuit", "insert_noise",
    "ShotBatch", "TableSampler", "frame_sample_block", "iter_shot_blocks", "sample_shots",
]
