# Emert app - encoders, adversarial decoupling, cross-attention fusion and training
