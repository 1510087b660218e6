"""Dirac and Klein-Gordon bound states in the Hulthen potential with position-dependent mass."""
from .model import (Alignment, Branch, DomainError, EnergyResult, ModelParams, QuantumState,
                    Source, Status)
from .spectra import (dirac_energy, kg_energy, kg_energy_simplified, dirac_energy_simplified,
                      alpha_threshold, coulomb_limit_energy, quantization_residual)

__all__ = [
    "Alignment", "Branch", "DomainError", "EnergyResult", "ModelParams", "QuantumState",
    "Source", "Status", "dirac_energy", "kg_energy", "kg_energy_simplified",
    "dirac_energy_simplified", "alpha_threshold", "coulomb_limit_energy",
    "quantization_residual",
]
