"""Space-air-ground network offloading simulator and federated RL training stack."""

__version__ = "0.1.0"
