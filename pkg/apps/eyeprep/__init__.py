# Eyeprep app - blink and saccade correction, pupil fluctuation, resampling
