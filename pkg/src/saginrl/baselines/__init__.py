from .greedy import greedy_offload, NoOffloadPolicy, GreedyPolicy
from .ddqn import DDQNAgent, DDQNConfig

__all__ = ["greedy_offload", "NoOffloadPolicy", "GreedyPolicy",
           "DDQNAgent", "DDQNConfig"]
