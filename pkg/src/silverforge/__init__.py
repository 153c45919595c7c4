"""Generalized Silver space-time block codes on 2**a transmit antennas."""

from .channel import Constellation, Prng, equivalent_channel, sample_channel, transmit
from .decoder import brute_force_ml, conditional_group_decode, decode, sphere_decode
from .errors import (ConfigInvalid, DependentLayers, DimensionMismatch, RankDeficient,
                     SearchTooLarge, SilverforgeError, StructureViolation, UnsupportedSize)
from .frames import build_frame, verify_frame
from .group_code import LinearDispersionCode, build_rate1_4group, rotation_pair, verify_g_group
from .info import ergodic_capacity_mc, expansion_I1, expansion_I2, stbc_mutual_info_mc
from .silver import assemble_generator, build_silver, build_silver2
from .sim import SimulationConfig, run_mindet, run_ser_sweep, run_verification

__version__ = "0.1.0"
