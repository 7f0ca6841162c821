from .replay import HMemory, ReplayBuffer, Transition, sample

__all__ = ["HMemory", "ReplayBuffer", "Transition", "sample"]
