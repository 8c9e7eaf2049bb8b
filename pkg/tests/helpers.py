"""Shared construction helpers for the test suite."""

from oemt import DriveSpec, LinearizationSpec, ModeSpec, TransducerModel


def make_model(g1, g2, kappa1, kappa2, gamma_m, *, n_th=0.0, nu1=1.0, nu2=1.0,
               n_c1=0.0, n_c2=0.0, delta1=0.0, delta2=0.0,
               side1="red", side2="red", omega_m=1.0):
    """Dimensionless three-mode model with the given rates."""
    return TransducerModel(
        cavity1=ModeSpec.cavity("cavity1", 0.0, kappa1, extraction=nu1, n_th=n_c1),
        mechanics=ModeSpec.mechanical("mechanics", omega_m, gamma_m, n_th=n_th),
        cavity2=ModeSpec.cavity("cavity2", 0.0, kappa2, extraction=nu2, n_th=n_c2),
        coupling1=LinearizationSpec.from_g(g1),
        coupling2=LinearizationSpec.from_g(g2),
        drive1=DriveSpec(side1, delta1),
        drive2=DriveSpec(side2, delta2),
        units="dimensionless")


def lossless_model(g1, g2, **kwargs):
    return make_model(g1, g2, 0.0, 0.0, 0.0, **kwargs)
