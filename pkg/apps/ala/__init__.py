# ALA app - annotation filtering, EM reliability weighting and consistency
