"""Graph-network manipulation policies trained from demonstrations.

Subpackages: numerics (autodiff tensors), scenegraph (state -> graph
encoding), policy (GNN/MLP policies), worlds (symbolic environments),
demos (experts and datasets), learn (imitation + PPO + evaluation),
explain (policy explanations), hub (CLI, persistence, HTTP service).
"""

__version__ = "0.1.0"
