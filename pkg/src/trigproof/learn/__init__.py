"""Imitation data, the linear policy, fine-tuning and the rBFS theory checks."""
