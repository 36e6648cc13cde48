"""Physical constants and shared defaults (SI units throughout)."""

# Fundamental constants
BOLTZMANN = 1.38e-23        # J/K
PLANCK = 6.63e-34           # J/Hz
ELECTRON_CHARGE = 1.6e-19   # C
SPEED_OF_LIGHT = 3e8        # m/s

# LED active-layer temperature used by the spectral-width model
JUNCTION_TEMPERATURE = 300.0  # K

# Visible band used for all spectral integrals and wavelength plans
LAMBDA_MIN = 400e-9  # m
LAMBDA_MAX = 700e-9  # m

# Default receiver front-end assumptions (configurable, see NoiseModel)
DEFAULT_LOAD_RESISTANCE = 50.0   # ohm
DEFAULT_AMBIENT_TEMPERATURE = 300.0  # K
