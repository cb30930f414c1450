# Diffkernel app - float64 tensors, reverse-mode differentiation and SGD
