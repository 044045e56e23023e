"""Agent update rules: tabular Q-learning, REINFORCE and independent DQN."""
