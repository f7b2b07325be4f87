"""LiFi attocell interference, error-rate and TDMA goodput model."""
