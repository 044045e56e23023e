"""
Computational core: environments, learners, simulation, replicator field and diagnostics.
"""
