"""Physical constants (SI) shared by every model."""

HBAR = 1.054571817e-34  # J s
G_NEWTON = 6.674e-11  # m^3 kg^-1 s^-2
AMU = 1.66053906660e-27  # kg
PROTON_MASS = 1.67262192369e-27  # kg
PROTON_RADIUS = 0.84e-15  # m
WATER_DENSITY = 1000.0  # kg m^-3
