# Metrics app - recall, F1, regression errors and correlation coefficients
