from .sagin import SaginEnv, observe, apply_offload, event_reward, action_space_size
from .cartpole import CartPole, cartpole_make

__all__ = ["SaginEnv", "observe", "apply_offload", "event_reward",
           "action_space_size", "CartPole", "cartpole_make"]
