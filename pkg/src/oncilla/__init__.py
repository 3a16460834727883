"""Quadruped locomotion control stack.

Subpackages and modules:

cpg       morphed-oscillator pattern generator (compiled kernel + fallback)
leg       virtual pantograph-leg kinematics and foot cycles
steering  AA-amplification and asymmetric-stride turning
actuation motor/PID/power models, cost of transport, load estimator
sbcp      binary bus protocol codec, master scheduler, bus simulator
gaitsim   kinematic gait simulator and locomotion metrics
pso       particle swarm gait optimiser
cli       experiment runner (`oncilla` entry point)
"""

__version__ = "0.1.0"
