# Harness app - cross-validation, ablations, sweeps and lab commands
