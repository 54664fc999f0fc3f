"""Direct entanglement ansatz learning for QUBO problems on noisy simulated qubits."""

__version__ = "0.1.0"
