from hypothesis import HealthCheck, settings

# solver-backed properties are not microsecond-fast; disable the wall-clock
# deadline and keep example counts moderate so the suite stays responsive
settings.register_profile(
    "riskhull",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("riskhull")
