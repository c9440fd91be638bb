# Simulation
