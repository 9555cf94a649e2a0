"""
cblocks Core Module

Contains the core functionality for conformal blocks:
- fusion_ring: Fusion data, ranks by factorization, model laws
- voa_models: Built-in models (Ising, lattice, holomorphic) and the discrete series
- zhu_series: Shells, partition numbers and graded dimensions of lattice modules
- divisor_calc: Divisor classes and the first Chern class formula
- fnef: F-curves, F-nef certificates and the global-generation report
- model_io: Model expressions and the model data format
- report_writer: Table and machine report rendering
"""

__version__ = "1.0.0"
