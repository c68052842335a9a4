"""Physical constants, derived from the exact SI definitions."""

# Exact SI values (2019 redefinition)
H_PLANCK_J_S = 6.62607015e-34
KB_J_PER_K = 1.380649e-23

# h/kB expressed in K per GHz of ordinary frequency, so that the thermal
# exponent is simply H_OVER_KB_K_PER_GHZ * f_ghz / temp_k.
# Not user-overridable: every rate in the package assumes this value.
H_OVER_KB_K_PER_GHZ = H_PLANCK_J_S / KB_J_PER_K * 1e9
