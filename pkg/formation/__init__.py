# Formation Geometry, Dynamics and Analysis
