# Sampling strategies: random, LHS, HVS and GA-Adaptive
