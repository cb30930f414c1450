# Datamodel app - samples, dual label sets, synthetic data and splits
